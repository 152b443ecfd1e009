//! Image-patch normalization: from raw `rows x cols` patches to points on the
//! unit sphere of the mean-zero hyperplane.
//!
//! Per patch: optional elementwise log, subtract the mean, measure contrast
//! `sqrt(v^T D v)`. Per image: keep the highest-contrast fraction. Each kept
//! vector is divided by its contrast and mapped through a basis that is an
//! isometry from the `D`-normed mean-zero hyperplane onto `R^(rows*cols - 1)`,
//! so the output lies on the Euclidean unit sphere.
//!
//! `D` here is the contrast matrix, unrelated to the data set of the
//! de-noising field.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{random_subset_indices, PointCloud};

/// Contrast at or below this (relative to the patch's magnitude) is treated
/// as zero.
const ZERO_CONTRAST_REL: f64 = 1e-12;
const BASIS_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl PatchMatrix {
    /// `values` are row-major.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(Error::invalid("patch", format!("{rows}x{cols} has fewer than two pixels")));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("patch", "non-finite pixel value"));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Symmetric positive-definite contrast matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DNormSpec {
    matrix: DMatrix<f64>,
}

impl DNormSpec {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::BadMatrix("square"));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::BadMatrix("symmetric"));
                }
            }
        }
        if matrix.clone().cholesky().is_none() {
            return Err(Error::BadMatrix("positive definite"));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.matrix * &v)[(0, 0)].max(0.0).sqrt()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_matrix_csv(path.as_ref())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchCloudSpec {
    /// When nonzero, at most this many patches per image are used, drawn at
    /// random with `seed`.
    pub patches_per_image: usize,
    pub contrast_fraction: f64,
    pub apply_log: bool,
    pub seed: u64,
}

impl Default for PatchCloudSpec {
    fn default() -> Self {
        Self {
            patches_per_image: 5000,
            contrast_fraction: 0.20,
            apply_log: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedPatch {
    pub vector: Vec<f64>,
    pub contrast: f64,
}

impl PreprocessedPatch {
    pub fn is_degenerate(&self) -> bool {
        self.contrast == 0.0
    }
}

pub fn preprocess_patch(patch: &PatchMatrix, dnorm: &DNormSpec, apply_log: bool) -> Result<PreprocessedPatch> {
    if dnorm.size() != patch.len() {
        return Err(Error::DimensionMismatch {
            expected: dnorm.size(),
            found: patch.len(),
        });
    }
    let mut v = patch.values.clone();
    if apply_log {
        if let Some(bad) = v.iter().position(|&x| x <= 0.0) {
            return Err(Error::invalid("patch", format!("pixel {bad} is not positive; cannot take its log")));
        }
        v.iter_mut().for_each(|x| *x = x.ln());
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let mut contrast = dnorm.norm(&v);
    if contrast <= ZERO_CONTRAST_REL * scale.max(1.0) {
        contrast = 0.0;
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    Ok(PreprocessedPatch { vector: v, contrast })
}

/// Linear map from the mean-zero hyperplane of `R^n` onto `R^(n-1)`, stored as
/// an `(n-1) x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneBasis {
    matrix: DMatrix<f64>,
}

/// Orthonormal basis of the mean-zero hyperplane (Helmert contrasts), as the
/// columns of an `n x (n-1)` matrix.
fn helmert(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n - 1);
    for k in 1..n {
        let s = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / s;
        }
        q[(k, k - 1)] = -(k as f64) / s;
    }
    q
}

impl HyperplaneBasis {
    /// Default basis: with `Q` the Helmert basis and `Q^T D Q = L L^T`, the map
    /// is `L^T Q^T`.
    pub fn for_dnorm(dnorm: &DNormSpec) -> Result<Self> {
        let q = helmert(dnorm.size());
        let restricted = q.transpose() * dnorm.matrix() * &q;
        let chol = restricted.cholesky().ok_or(Error::BadMatrix("positive definite on the hyperplane"))?;
        Ok(Self {
            matrix: chol.l().transpose() * q.transpose(),
        })
    }

    /// Checks that `matrix` is an isometry from `(hyperplane, D-norm)`.
    pub fn new(matrix: DMatrix<f64>, dnorm: &DNormSpec) -> Result<Self> {
        let n = dnorm.size();
        if matrix.ncols() != n || matrix.nrows() != n - 1 {
            return Err(Error::BadMatrix("an (n-1) x n basis for the patch size"));
        }
        let q = helmert(n);
        let bq = &matrix * &q;
        let gram = bq.transpose() * &bq;
        let target = q.transpose() * dnorm.matrix() * &q;
        if (gram - target).abs().max() > BASIS_TOL {
            return Err(Error::BadMatrix("orthonormal under the D inner product"));
        }
        Ok(Self { matrix })
    }

    pub fn read_csv(path: impl AsRef<Path>, dnorm: &DNormSpec) -> Result<Self> {
        Self::new(read_matrix_csv(path.as_ref())?, dnorm)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchCloud {
    pub cloud: PointCloud,
    /// Input index of each output point.
    pub kept: Vec<usize>,
    pub zero_contrast: usize,
}

/// Runs the full normalization. `image_ids[i]` names the image patch `i`
/// came from; contrast selection happens within each image.
pub fn build_patch_cloud(
    patches: &[PatchMatrix],
    image_ids: &[u64],
    dnorm: &DNormSpec,
    spec: &PatchCloudSpec,
    basis: &HyperplaneBasis,
) -> Result<PatchCloud> {
    if !(spec.contrast_fraction > 0.0 && spec.contrast_fraction <= 1.0) {
        return Err(Error::invalid(
            "contrast_fraction",
            format!("must lie in (0, 1], got {}", spec.contrast_fraction),
        ));
    }
    if image_ids.len() != patches.len() {
        return Err(Error::invalid("image_ids", "need one image id per patch"));
    }
    let first = patches.first().ok_or(Error::EmptyCloud)?;
    let (rows, cols) = (first.rows, first.cols);
    if patches.iter().any(|p| p.rows != rows || p.cols != cols) {
        return Err(Error::invalid("patches", "all patches must share one shape"));
    }
    let n = rows * cols;
    if basis.matrix.ncols() != n {
        return Err(Error::BadMatrix("an (n-1) x n basis for the patch size"));
    }

    let pre = patches
        .iter()
        .map(|p| preprocess_patch(p, dnorm, spec.apply_log))
        .collect::<Result<Vec<_>>>()?;

    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &g) in image_ids.iter().enumerate() {
        groups.entry(g).or_default().push(i);
    }
    let mut kept = Vec::new();
    let mut zero_contrast = 0;
    for (&image, members) in &groups {
        let members: Vec<usize> = if spec.patches_per_image > 0 && members.len() > spec.patches_per_image {
            random_subset_indices(members.len(), spec.patches_per_image, spec.seed ^ image)?
                .into_iter()
                .map(|k| members[k])
                .collect()
        } else {
            members.clone()
        };
        let mut ranked = members.clone();
        ranked.sort_by(|&a, &b| pre[b].contrast.total_cmp(&pre[a].contrast).then(a.cmp(&b)));
        let keep = (spec.contrast_fraction * members.len() as f64).ceil() as usize;
        for &i in ranked.iter().take(keep) {
            if pre[i].is_degenerate() {
                zero_contrast += 1;
            } else {
                kept.push(i);
            }
        }
    }
    kept.sort_unstable();

    let mut coords = Vec::with_capacity(kept.len() * (n - 1));
    for &i in &kept {
        let p = &pre[i];
        let scaled: Vec<f64> = p.vector.iter().map(|x| x / p.contrast).collect();
        coords.extend(basis.apply(&scaled));
    }
    let cloud = PointCloud::from_flat(n - 1, coords)?;
    Ok(PatchCloud {
        cloud,
        kept,
        zero_contrast,
    })
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let cloud = PointCloud::read_csv(path)?;
    Ok(DMatrix::from_row_slice(cloud.len(), cloud.dim(), cloud.as_flat()))
}

/// Sidecar describing a patch CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchFileMeta {
    pub rows: usize,
    pub cols: usize,
    /// Image id per patch; absent means all patches share one image.
    #[serde(default)]
    pub image_ids: Option<Vec<u64>>,
}

/// Reads flattened patches (one per CSV row) and their JSON sidecar.
pub fn read_patches(csv: &Path, sidecar: &Path) -> Result<(Vec<PatchMatrix>, Vec<u64>)> {
    let text = std::fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let meta: PatchFileMeta = serde_json::from_str(&text)?;
    let flat = PointCloud::read_csv(csv)?;
    if flat.dim() != meta.rows * meta.cols {
        return Err(Error::DimensionMismatch {
            expected: meta.rows * meta.cols,
            found: flat.dim(),
        });
    }
    let patches = flat
        .iter()
        .map(|p| PatchMatrix::new(meta.rows, meta.cols, p.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let ids = meta.image_ids.unwrap_or_else(|| vec![0; patches.len()]);
    Ok((patches, ids))
}

pub mod synthetic {
    //! Patch corpora with a known circle of edge directions.

    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::PatchMatrix;
    use crate::error::Result;
    use crate::geometry::seeded_rng;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct GradientCorpus {
        pub rows: usize,
        pub cols: usize,
        pub gradients: usize,
        pub noise: usize,
        /// Per-pixel standard deviation of the log-intensity of noise patches.
        pub noise_sd: f64,
        pub patches_per_image: usize,
        pub seed: u64,
    }

    /// Linear log-intensity ramps at uniformly random angles and amplitudes in
    /// `[0.5, 1.5]`, followed by i.i.d. Gaussian log-intensity noise patches.
    /// Every patch gets a random brightness factor. Returns the patches, an
    /// image id per patch, and the ramp angle (`None` for noise).
    pub fn gradient_corpus(spec: &GradientCorpus) -> Result<(Vec<PatchMatrix>, Vec<u64>, Vec<Option<f64>>)> {
        let mut rng = seeded_rng(spec.seed);
        let (rows, cols) = (spec.rows, spec.cols);
        let cy = (rows as f64 - 1.0) / 2.0;
        let cx = (cols as f64 - 1.0) / 2.0;
        let total = spec.gradients + spec.noise;
        let mut patches = Vec::with_capacity(total);
        let mut angles = Vec::with_capacity(total);
        for k in 0..total {
            let brightness: f64 = rng.gen_range(-1.0..1.0);
            let mut values = Vec::with_capacity(rows * cols);
            if k < spec.gradients {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let amp: f64 = rng.gen_range(0.5..1.5);
                for r in 0..rows {
                    for c in 0..cols {
                        let t = theta.cos() * (c as f64 - cx) + theta.sin() * (r as f64 - cy);
                        values.push((brightness + amp * t).exp());
                    }
                }
                angles.push(Some(theta));
            } else {
                for _ in 0..rows * cols {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    values.push((brightness + spec.noise_sd * z).exp());
                }
                angles.push(None);
            }
            patches.push(PatchMatrix::new(rows, cols, values)?);
        }
        // Shuffle so each image mixes ramps and noise.
        let mut order: Vec<usize> = (0..total).collect();
        for i in (1..total).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let patches: Vec<PatchMatrix> = order.iter().map(|&i| patches[i].clone()).collect();
        let angles: Vec<Option<f64>> = order.iter().map(|&i| angles[i]).collect();
        let per = spec.patches_per_image.max(1);
        let ids = (0..total).map(|i| (i / per) as u64).collect();
        Ok((patches, ids, angles))
    }
}
