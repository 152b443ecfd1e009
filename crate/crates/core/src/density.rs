//! k-th nearest neighbor density estimates and density thresholding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, PointCloud};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub k: usize,
    /// `1 / d_k(i)` per point, where `d_k(i)` is the distance from point `i`
    /// to its k-th nearest other point.
    pub values: Vec<f64>,
}

/// Returns `(d_k, index of the k-th neighbor)` for point `i`.
fn kth_neighbor(cloud: &PointCloud, i: usize, k: usize, buf: &mut Vec<(f64, usize)>) -> (f64, usize) {
    buf.clear();
    let p = cloud.point(i);
    buf.extend(
        cloud
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, q)| (distance(p, q), j)),
    );
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    *kth
}

pub fn knn_density(cloud: &PointCloud, k: usize) -> Result<DensityEstimate> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if k >= cloud.len() {
        return Err(Error::invalid("k", format!("must be smaller than the cloud size {}", cloud.len())));
    }
    let values = (0..cloud.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let (d, j) = kth_neighbor(cloud, i, k, buf);
            if d == 0.0 {
                Err(Error::CoincidentPoints { first: i, second: j })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityEstimate { k, values })
}

/// Indices of the `ceil(fraction * n)` densest points, densest first; ties go
/// to the lower index.
pub fn densest_indices(density: &DensityEstimate, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let n = density.values.len();
    let keep = ((fraction * n as f64).ceil() as usize).min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| density.values[b].total_cmp(&density.values[a]).then(a.cmp(&b)));
    idx.truncate(keep);
    Ok(idx)
}

/// Keeps the densest `ceil(fraction * n)` points, in their original order.
pub fn threshold_top(cloud: &PointCloud, density: &DensityEstimate, fraction: f64) -> Result<PointCloud> {
    if density.values.len() != cloud.len() {
        return Err(Error::invalid(
            "density",
            format!("has {} values for a cloud of {} points", density.values.len(), cloud.len()),
        ));
    }
    let mut idx = densest_indices(density, fraction)?;
    idx.sort_unstable();
    Ok(cloud.select(&idx))
}
