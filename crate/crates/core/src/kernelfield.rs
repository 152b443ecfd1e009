//! Gaussian kernel fields.
//!
//! `f(x)` is the averaged Gaussian density of the data; the field that drives
//! de-noising is `F(x) = f(x) - omega * g(x)`, where `g` is the same average
//! taken over the current moving subset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub sigma: f64,
    pub omega: f64,
}

impl FieldParams {
    pub fn new(sigma: f64, omega: f64) -> Result<Self> {
        let p = Self { sigma, omega };
        p.validate()?;
        if !(0.1..=0.5).contains(&omega) {
            log::warn!("omega = {omega} is outside the usual range [0.1, 0.5]");
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be nonnegative, got {}", self.omega)));
        }
        Ok(())
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(())
}

/// Spherically symmetric Gaussian bump centred at `center`, evaluated at `x`.
///
/// Adds `exp(-|x-c|^2 / 2s^2) * (c - x)` into `grad` (the gradient up to the
/// `1/s^2` factor, applied by the caller once per sum) and returns the value.
#[inline]
pub fn gaussian_kernel(x: &[f64], center: &[f64], inv_two_sigma_sq: f64, grad: &mut [f64]) -> f64 {
    let mut sq = 0.0;
    for (a, b) in x.iter().zip(center) {
        let t = b - a;
        sq += t * t;
    }
    let w = (-sq * inv_two_sigma_sq).exp();
    for ((g, a), b) in grad.iter_mut().zip(x).zip(center) {
        *g += w * (b - a);
    }
    w
}

#[inline]
fn kernel_value(x: &[f64], center: &[f64], inv_two_sigma_sq: f64) -> f64 {
    let mut sq = 0.0;
    for (a, b) in x.iter().zip(center) {
        let t = b - a;
        sq += t * t;
    }
    (-sq * inv_two_sigma_sq).exp()
}

fn check_inputs(x: &[f64], cloud: &PointCloud) -> Result<()> {
    cloud.ensure_non_empty()?;
    cloud.ensure_dim(x.len())
}

fn mean_kernel(x: &[f64], cloud: &PointCloud, sigma: f64) -> f64 {
    let inv = 1.0 / (2.0 * sigma * sigma);
    let sum: f64 = cloud.iter().map(|c| kernel_value(x, c, inv)).sum();
    sum / cloud.len() as f64
}

/// Adds `scale * sum_c exp(..) (c - x)` into `out`, summing in index order.
fn add_mean_kernel_gradient(x: &[f64], cloud: &PointCloud, sigma: f64, scale: f64, acc: &mut [f64], out: &mut [f64]) {
    let inv = 1.0 / (2.0 * sigma * sigma);
    acc.iter_mut().for_each(|v| *v = 0.0);
    for c in cloud.iter() {
        gaussian_kernel(x, c, inv, acc);
    }
    let factor = scale / (cloud.len() as f64 * sigma * sigma);
    for (o, a) in out.iter_mut().zip(acc.iter()) {
        *o += factor * a;
    }
}

/// Kernel density estimate `f(x)`; always in `(0, 1]` up to underflow.
pub fn kde_value(x: &[f64], data: &PointCloud, sigma: f64) -> Result<f64> {
    check_inputs(x, data)?;
    check_sigma(sigma)?;
    Ok(mean_kernel(x, data, sigma))
}

pub fn field_value(x: &[f64], data: &PointCloud, subset: &PointCloud, params: &FieldParams) -> Result<f64> {
    check_inputs(x, data)?;
    check_inputs(x, subset)?;
    params.validate()?;
    Ok(mean_kernel(x, data, params.sigma) - params.omega * mean_kernel(x, subset, params.sigma))
}

pub fn field_gradient(x: &[f64], data: &PointCloud, subset: &PointCloud, params: &FieldParams) -> Result<Vec<f64>> {
    check_inputs(x, data)?;
    check_inputs(x, subset)?;
    params.validate()?;
    let mut out = vec![0.0; x.len()];
    let mut scratch = vec![0.0; x.len()];
    field_gradient_into(x, data, subset, params, &mut scratch, &mut out);
    Ok(out)
}

/// Unchecked gradient kernel used by the iteration driver. `out` is overwritten.
pub(crate) fn field_gradient_into(
    x: &[f64],
    data: &PointCloud,
    subset: &PointCloud,
    params: &FieldParams,
    scratch: &mut [f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    add_mean_kernel_gradient(x, data, params.sigma, 1.0, scratch, out);
    if params.omega != 0.0 {
        add_mean_kernel_gradient(x, subset, params.sigma, -params.omega, scratch, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::seeded_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn c1(v: &[f64]) -> PointCloud {
        PointCloud::from_flat(1, v.to_vec()).unwrap()
    }

    #[test]
    fn kde_examples() {
        let p = [0.3, -1.2];
        let data = PointCloud::from_flat(2, p.to_vec()).unwrap();
        assert_eq!(kde_value(&p, &data, 0.7).unwrap(), 1.0);

        let two = c1(&[-1.0, 1.0]);
        assert_abs_diff_eq!(kde_value(&[0.0], &two, 1.0).unwrap(), (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(kde_value(&[0.0], &two, 1.0).unwrap(), 0.60653, epsilon = 1e-5);

        let far = kde_value(&[25.0], &two, 2.0).unwrap();
        assert!(far < 2e-22, "{far}");
    }

    #[test]
    fn kde_rejects_mismatch() {
        let data = c1(&[0.0]);
        assert!(matches!(
            kde_value(&[0.0, 1.0], &data, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(kde_value(&[0.0], &PointCloud::empty(1), 1.0).is_err());
        assert!(kde_value(&[0.0], &data, 0.0).is_err());
    }

    #[test]
    fn field_examples() {
        let p = c1(&[2.5]);
        let params = FieldParams::new(0.8, 0.1).unwrap();
        assert_abs_diff_eq!(field_value(&[2.5], &p, &p, &params).unwrap(), 0.9, epsilon = 1e-15);

        let data = c1(&[-1.0, 1.0]);
        let s = c1(&[0.0]);
        let v = field_value(&[0.0], &data, &s, &FieldParams::new(1.0, 0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(v, (-0.5f64).exp() - 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.50653, epsilon = 1e-5);

        let off = FieldParams { sigma: 1.0, omega: 0.0 };
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert_eq!(
                field_value(&[x], &data, &s, &off).unwrap(),
                kde_value(&[x], &data, 1.0).unwrap()
            );
        }
        assert!(field_value(&[0.0], &data, &PointCloud::empty(1), &off).is_err());
    }

    #[test]
    fn gradient_examples() {
        let p = PointCloud::from_flat(2, vec![0.4, 0.9]).unwrap();
        let params = FieldParams::new(0.6, 0.1).unwrap();
        assert_eq!(field_gradient(&[0.4, 0.9], &p, &p, &params).unwrap(), vec![0.0, 0.0]);

        let data = c1(&[-1.0, 1.0]);
        let s = c1(&[0.0]);
        for sigma in [0.3, 1.0, 2.0] {
            let g = field_gradient(&[0.0], &data, &s, &FieldParams { sigma, omega: 0.3 }).unwrap();
            assert_eq!(g, vec![0.0]);
        }

        let data = PointCloud::from_flat(2, vec![2.0, 0.0]).unwrap();
        let s = PointCloud::from_flat(2, vec![-5.0, -5.0]).unwrap();
        let params = FieldParams::new(1.0, 0.1).unwrap();
        let g = field_gradient(&[0.0, 0.0], &data, &s, &params).unwrap();
        assert_abs_diff_eq!(g[0], 2.0 * (-2.0f64).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(g[0], 0.27067, epsilon = 1e-5);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-10);

        // Central differences on the field value.
        let h = 1e-5;
        let fd = |x: [f64; 2]| field_value(&x, &data, &s, &params).unwrap();
        let d0 = (fd([h, 0.0]) - fd([-h, 0.0])) / (2.0 * h);
        assert!(((d0 - g[0]) / g[0]).abs() < 1e-6);
    }

    #[test]
    fn kde_translation_equivariant_and_bounded() {
        let mut rng = seeded_rng(77);
        for _ in 0..50 {
            let d = rng.gen_range(1..5);
            let n = rng.gen_range(1..20);
            let pts: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let t: Vec<f64> = (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let shifted: Vec<f64> = pts.chunks(d).flat_map(|p| p.iter().zip(&t).map(|(a, b)| a + b)).collect();
            let xs: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + b).collect();
            let sigma = rng.gen_range(0.2..2.0);
            let a = kde_value(&x, &PointCloud::from_flat(d, pts).unwrap(), sigma).unwrap();
            let b = kde_value(&xs, &PointCloud::from_flat(d, shifted).unwrap(), sigma).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!(a < 1.0);
        }
    }
}
