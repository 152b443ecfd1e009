mod common;

use common::{fd_gradient, gaussian_cloud, kde_mode, max_relative_error, mean_shift, random_cloud};
use rand::Rng;
use topo_denoise::denoise::{denoise_run, denoise_step, DenoiseParams, DenoiseState};
use topo_denoise::geometry::{distance, random_subset, seeded_rng, PointCloud};
use topo_denoise::kernelfield::{field_gradient, kde_value, FieldParams};

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = seeded_rng(11);
    let mut worst = 0.0f64;
    for instance in 0..120u64 {
        let d = [1, 2, 3, 8][instance as usize % 4];
        let sigma = rng.gen_range(0.3..1.5);
        let params = FieldParams { sigma, omega: rng.gen_range(0.0..0.5) };
        let data = random_cloud(30, d, 1000 + instance);
        let subset = random_cloud(8, d, 2000 + instance);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let exact = field_gradient(&x, &data, &subset, &params).unwrap();
        worst = worst.max(max_relative_error(&fd_gradient(&x, &data, &subset, &params), &exact));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn zero_repulsion_follows_mean_shift() {
    let data = gaussian_cloud(200, 3, 0.7, 5);
    // Ignored at omega = 0.
    let subset = data.clone();
    let mut rng = seeded_rng(6);
    for _ in 0..25 {
        let sigma = rng.gen_range(0.3..1.0);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let g = field_gradient(&x, &data, &subset, &FieldParams { sigma, omega: 0.0 }).unwrap();
        let m = mean_shift(&x, &data, sigma);
        let dot: f64 = g.iter().zip(&m).map(|(a, b)| a * b).sum();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((dot / (norm(&g) * norm(&m)) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn kde_is_at_most_one() {
    let data = random_cloud(20, 2, 3);
    let mut rng = seeded_rng(4);
    for _ in 0..100 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        assert!(kde_value(&x, &data, 0.5).unwrap() < 1.0);
    }
    let same = PointCloud::from_points(2, &[[0.3, 0.4]; 5]).unwrap();
    assert_eq!(kde_value(&[0.3, 0.4], &same, 0.5).unwrap(), 1.0);
}

#[test]
fn mean_shift_limit_approaches_the_mode() {
    let data = gaussian_cloud(400, 2, 0.6, 8);
    let sigma = 0.6;
    let mode = kde_mode(&data, sigma, &[0.0, 0.0]);
    let params = DenoiseParams {
        field: FieldParams { sigma, omega: 0.0 },
        step_c: 0.05,
        iterations: 0,
        snapshot_every: 0,
    };
    let s0 = random_subset(&data, 50, 1).unwrap();
    let mut state = DenoiseState::initial(&data, s0, &params.field).unwrap();
    for _ in 0..100 {
        let next = denoise_step(&data, &state, &params).unwrap();
        for (p, q) in state.s.iter().zip(next.s.iter()) {
            let (before, after) = (distance(p, &mode), distance(q, &mode));
            // Points already at the mode can only jitter in the last bits.
            assert!(after < before || before < 1e-9, "{before} -> {after}");
        }
        state = next;
    }
    let spread = state.s.iter().map(|p| distance(p, &mode)).fold(0.0, f64::max);
    assert!(spread < 0.05, "{spread}");
}

#[test]
fn two_clusters_in_one_dimension() {
    let mut rng = seeded_rng(10);
    let flat: Vec<f64> = (0..400)
        .map(|i| {
            let center = if i % 2 == 0 { -1.0 } else { 1.0 };
            center + rng.gen_range(-0.3..0.3)
        })
        .collect();
    let data = PointCloud::from_flat(1, flat).unwrap();
    let params = DenoiseParams {
        field: FieldParams { sigma: 0.2, omega: 0.1 },
        step_c: 0.05,
        iterations: 100,
        snapshot_every: 0,
    };
    let s0 = random_subset(&data, 40, 2).unwrap();
    let out = denoise_run(&data, &s0, &params).unwrap().final_cloud;
    let xs: Vec<f64> = out.iter().map(|p| p[0]).collect();
    let left: Vec<f64> = xs.iter().copied().filter(|&x| x < 0.0).collect();
    let right: Vec<f64> = xs.iter().copied().filter(|&x| x > 0.0).collect();
    assert!(!left.is_empty() && !right.is_empty());
    for x in &xs {
        assert!((x.abs() - 1.0).abs() < 0.3, "{x} outside the flat high-density regions");
    }
}
