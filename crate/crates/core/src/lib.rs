//! Topological de-noising of point clouds.
//!
//! A random subset of a noisy sample is moved along the gradient of a
//! Gaussian kernel field: attraction to the data minus a weak repulsion from
//! the subset itself. The subset settles over regions of high, flat density,
//! which keeps the shape's topology while discarding the noise. The crate also
//! carries the tools to check that claim: synthetic noisy shapes, k-nearest
//! neighbor density thresholding, Vietoris-Rips and lazy witness complexes,
//! and Z/2 persistent homology.

pub mod cli;
pub mod denoise;
pub mod density;
pub mod error;
pub mod geometry;
pub mod homology;
pub mod kernelfield;
pub mod patches;
pub mod quadrature;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use geometry::PointCloud;
