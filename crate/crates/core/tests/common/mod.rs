#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use topo_denoise::geometry::{seeded_rng, PointCloud};
use topo_denoise::homology::FilteredComplex;
use topo_denoise::kernelfield::{field_value, FieldParams};

/// Rank over Z/2 of the rows given as bitsets.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, |r| r.len() * 64);
    for col in 0..width {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & b != 0 {
                row.iter_mut().zip(&p).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers of the subcomplex of simplices with value `<= t`, from
/// boundary-matrix ranks.
pub fn brute_betti(complex: &FilteredComplex, t: f64) -> Vec<usize> {
    let max_dim = complex.max_dim();
    let mut by_dim: Vec<Vec<Vec<u32>>> = vec![Vec::new(); max_dim + 1];
    for (s, v) in complex.iter() {
        if v <= t {
            by_dim[s.len() - 1].push(s.to_vec());
        }
    }
    let mut ranks = vec![0usize; max_dim + 2];
    for k in 1..=max_dim {
        let index: HashMap<&[u32], usize> = by_dim[k - 1].iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let words = by_dim[k - 1].len().div_ceil(64).max(1);
        let rows = by_dim[k]
            .iter()
            .map(|s| {
                let mut row = vec![0u64; words];
                for skip in 0..s.len() {
                    let face: Vec<u32> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    let i = index[face.as_slice()];
                    row[i / 64] ^= 1 << (i % 64);
                }
                row
            })
            .collect();
        ranks[k] = gf2_rank(rows);
    }
    (0..=max_dim).map(|k| by_dim[k].len() - ranks[k] - ranks[k + 1]).collect()
}

pub fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
    let mut rng = seeded_rng(seed);
    let flat = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PointCloud::from_flat(d, flat).unwrap()
}

/// Ten probe values: simplex values themselves (ties), midpoints between
/// consecutive values, and the ends.
pub fn probe_values(complex: &FilteredComplex, seed: u64) -> Vec<f64> {
    let mut values: Vec<f64> = complex.iter().map(|(_, v)| v).collect();
    values.dedup();
    let mut rng = seeded_rng(seed);
    let mut probes = vec![0.0, complex.threshold()];
    while probes.len() < 10 {
        let i = rng.gen_range(0..values.len());
        if rng.gen_bool(0.5) || i + 1 == values.len() {
            probes.push(values[i]);
        } else {
            probes.push(0.5 * (values[i] + values[i + 1]));
        }
    }
    probes
}

/// Central differences of the field value with step `h = 1e-5 sigma`.
pub fn fd_gradient(x: &[f64], data: &PointCloud, subset: &PointCloud, params: &FieldParams) -> Vec<f64> {
    let h = 1e-5 * params.sigma;
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (field_value(&a, data, subset, params).unwrap() - field_value(&b, data, subset, params).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// Largest componentwise relative error; components far below the largest
/// one are measured against the largest.
pub fn max_relative_error(approx: &[f64], exact: &[f64]) -> f64 {
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    approx
        .iter()
        .zip(exact)
        .map(|(a, e)| (a - e).abs() / e.abs().max(1e-3 * scale).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Gaussian mean-shift vector at `x`: weighted mean of the data minus `x`.
pub fn mean_shift(x: &[f64], data: &PointCloud, sigma: f64) -> Vec<f64> {
    let mut num = vec![0.0; x.len()];
    let mut den = 0.0;
    for p in data.iter() {
        let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        let w = (-d2 / (2.0 * sigma * sigma)).exp();
        den += w;
        num.iter_mut().zip(p).for_each(|(n, v)| *n += w * v);
    }
    num.iter().zip(x).map(|(n, xi)| n / den - xi).collect()
}

/// Mode of the kernel density estimate reached by mean-shift iteration from
/// `start`.
pub fn kde_mode(data: &PointCloud, sigma: f64, start: &[f64]) -> Vec<f64> {
    let mut x = start.to_vec();
    for _ in 0..10_000 {
        let step = mean_shift(&x, data, sigma);
        x.iter_mut().zip(&step).for_each(|(a, s)| *a += s);
        if step.iter().map(|s| s * s).sum::<f64>().sqrt() < 1e-13 {
            break;
        }
    }
    x
}

pub fn gaussian_cloud(n: usize, d: usize, sd: f64, seed: u64) -> PointCloud {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = seeded_rng(seed);
    let flat = (0..n * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect();
    PointCloud::from_flat(d, flat).unwrap()
}
