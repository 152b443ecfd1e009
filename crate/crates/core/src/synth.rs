//! Synthetic noisy shapes sampled by rejection.
//!
//! Each shape's density is the convolution of a uniform measure on the shape
//! (unit circle in the plane, unit sphere in space, or the origin) with an
//! isotropic Gaussian. All three are radial, so they are evaluated as
//! functions of `r = |x|` and scaled so that their peak is 1.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, seeded_rng, PointCloud};
use crate::kernelfield::check_sigma;
use crate::quadrature;

/// Relative accuracy of the circle's angular integral.
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

const MAX_PROPOSALS_BEFORE_CHECK: u64 = 100_000_000;
const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Shape {
    /// Unit circle in the plane.
    Circle,
    /// Unit sphere in three dimensions.
    Sphere,
    /// The origin of `R^dim`.
    Point { dim: usize },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Circle => 2,
            Shape::Sphere => 3,
            Shape::Point { dim } => *dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyShapeSpec {
    pub shape: Shape,
    pub noise_sigma: f64,
    pub count: usize,
    pub seed: u64,
    /// Half-width of the uniform proposal box; at least `1 + 5 sigma`.
    pub box_half_width: f64,
}

impl NoisyShapeSpec {
    pub fn new(shape: Shape, noise_sigma: f64, count: usize, seed: u64) -> Self {
        Self {
            shape,
            noise_sigma,
            count,
            seed,
            box_half_width: default_box(noise_sigma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.noise_sigma)?;
        if self.count == 0 {
            return Err(Error::invalid("count", "must be positive"));
        }
        if self.shape.dim() == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let min_box = default_box(self.noise_sigma);
        if !(self.box_half_width >= min_box && self.box_half_width.is_finite()) {
            return Err(Error::invalid(
                "box_half_width",
                format!("must be at least 1 + 5 sigma = {min_box}, got {}", self.box_half_width),
            ));
        }
        Ok(())
    }
}

pub fn default_box(noise_sigma: f64) -> f64 {
    1.0 + 5.0 * noise_sigma
}

/// Unnormalized circle profile: the angular integral of the Gaussian around
/// the unit circle, seen from a point at radius `r`.
fn circle_profile(r: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    // |x - y|^2 = (1 - r)^2 + 2r(1 - cos t); the first term is pulled out so
    // the integrand stays in (0, 1].
    let envelope = (-(1.0 - r) * (1.0 - r) / (2.0 * s2)).exp();
    if envelope == 0.0 {
        return 0.0;
    }
    let a = r / s2;
    let half = quadrature::integrate(|t: f64| (-a * (1.0 - t.cos())).exp(), 0.0, PI, QUADRATURE_REL_TOL * 0.1, 0.0);
    2.0 * envelope * half.value
}

/// Unnormalized sphere profile. The surface integral over the unit sphere
/// reduces to `2 pi s^2 / r * (exp(-(1-r)^2 / 2s^2) - exp(-(1+r)^2 / 2s^2))`.
fn sphere_profile(r: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let envelope = (-(1.0 - r) * (1.0 - r) / (2.0 * s2)).exp();
    let shape = if r == 0.0 {
        2.0 / s2
    } else {
        -(-2.0 * r / s2).exp_m1() / r
    };
    2.0 * PI * s2 * envelope * shape
}

fn point_profile(r: f64, sigma: f64) -> f64 {
    (-r * r / (2.0 * sigma * sigma)).exp()
}

/// A shape's radial density, scaled so its maximum over `r >= 0` is 1.
#[derive(Debug, Clone, Copy)]
pub struct RadialDensity {
    shape: Shape,
    sigma: f64,
    peak: f64,
}

impl RadialDensity {
    pub fn new(shape: Shape, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        let mut d = Self { shape, sigma, peak: 1.0 };
        d.peak = match shape {
            Shape::Point { .. } => 1.0,
            // Outside the unit ball every |x - y| grows with r, so the peak
            // lies in [0, 1].
            _ => maximize(|r| d.raw(r), 0.0, 1.0),
        };
        Ok(d)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn raw(&self, r: f64) -> f64 {
        match self.shape {
            Shape::Circle => circle_profile(r, self.sigma),
            Shape::Sphere => sphere_profile(r, self.sigma),
            Shape::Point { .. } => point_profile(r, self.sigma),
        }
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        (self.raw(r) / self.peak).min(1.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.shape.dim(),
                found: x.len(),
            });
        }
        Ok(self.at_radius(norm(x)))
    }
}

/// Grid search followed by golden-section refinement around the best node.
fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    const NODES: usize = 200;
    let step = (hi - lo) / NODES as f64;
    let (best_i, best) = (0..=NODES)
        .map(|i| (i, f(lo + step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

pub fn density_circle(x: &[f64], sigma: f64) -> Result<f64> {
    RadialDensity::new(Shape::Circle, sigma)?.eval(x)
}

pub fn density_sphere(x: &[f64], sigma: f64) -> Result<f64> {
    RadialDensity::new(Shape::Sphere, sigma)?.eval(x)
}

pub fn density_point(x: &[f64], sigma: f64) -> Result<f64> {
    RadialDensity::new(Shape::Point { dim: x.len() }, sigma)?.eval(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub cloud: PointCloud,
    pub proposals: u64,
}

impl SampleOutcome {
    pub fn acceptance_rate(&self) -> f64 {
        self.cloud.len() as f64 / self.proposals as f64
    }
}

/// Draws uniform proposals from the box and keeps `x` when the peak-scaled
/// density at `x` exceeds a uniform draw from `[0, 1)`.
pub fn rejection_sample(spec: &NoisyShapeSpec) -> Result<SampleOutcome> {
    spec.validate()?;
    let density = RadialDensity::new(spec.shape, spec.noise_sigma)?;
    let dim = spec.shape.dim();
    let b = spec.box_half_width;
    let mut rng = seeded_rng(spec.seed);
    let mut coords = Vec::with_capacity(spec.count * dim);
    let mut x = vec![0.0; dim];
    let mut proposals: u64 = 0;
    let mut accepted = 0;
    while accepted < spec.count {
        for v in x.iter_mut() {
            *v = rng.gen_range(-b..b);
        }
        let u: f64 = rng.gen();
        proposals += 1;
        if density.at_radius(norm(&x)) > u {
            coords.extend_from_slice(&x);
            accepted += 1;
        }
        if proposals.is_multiple_of(MAX_PROPOSALS_BEFORE_CHECK) {
            let rate = accepted as f64 / proposals as f64;
            if rate < MIN_ACCEPTANCE_RATE {
                return Err(Error::LowAcceptance { rate, proposals });
            }
        }
    }
    Ok(SampleOutcome {
        cloud: PointCloud::from_flat(dim, coords)?,
        proposals,
    })
}
