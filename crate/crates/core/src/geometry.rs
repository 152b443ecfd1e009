//! Point clouds, Euclidean distances, and seeded sampling.
//!
//! Points are stored row-major in a single flat buffer. A point's identity is
//! its index; duplicates are allowed.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// The single generator type behind every stochastic operation.
///
/// ChaCha with 8 rounds, seeded through `SeedableRng::seed_from_u64`, which is
/// specified independently of platform word size and endianness.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { coords, dim })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// A cloud with no points but a fixed ambient dimension.
    pub fn empty(dim: usize) -> Self {
        Self {
            coords: Vec::new(),
            dim: dim.max(1),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.coords
    }

    /// Returns the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            coords,
            dim: self.dim,
        }
    }

    pub(crate) fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(())
    }

    /// Serializes as point-cloud CSV. Floats use the shortest representation
    /// that parses back to the same bits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.coords.len() * 20);
        for p in self.iter() {
            for (k, c) in p.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut coords = Vec::new();
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                message,
            };
            let mut count = 0;
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(format!("bad coordinate {field:?}: {e}")))?;
                if !v.is_finite() {
                    return Err(parse_err(format!("non-finite coordinate {field:?}")));
                }
                coords.push(v);
                count += 1;
            }
            match dim {
                None => dim = Some(count),
                Some(d) if d != count => {
                    return Err(parse_err(format!("expected {d} coordinates, found {count}")))
                }
                Some(_) => {}
            }
        }
        match dim {
            None => Err(Error::EmptyCloud),
            Some(d) => Self::from_flat(d, coords),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dense symmetric matrix of pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

pub fn distance_matrix(cloud: &PointCloud) -> Result<DistanceMatrix> {
    cloud.ensure_non_empty()?;
    let n = cloud.len();
    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let p = cloud.point(i);
        for (j, e) in row.iter_mut().enumerate() {
            // Same expression for (i, j) and (j, i) keeps the matrix exactly symmetric.
            let (a, b) = if i <= j { (p, cloud.point(j)) } else { (cloud.point(j), p) };
            *e = if i == j { 0.0 } else { distance(a, b) };
        }
    });
    Ok(DistanceMatrix { n, entries })
}

pub fn max_interpoint_distance(cloud: &PointCloud) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(Error::NeedTwoPoints);
    }
    let n = cloud.len();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            (i + 1..n)
                .map(|j| squared_distance(p, cloud.point(j)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.sqrt())
}

/// Indices of a uniform random subset without replacement, sorted ascending.
pub fn random_subset_indices(n: usize, size: usize, seed: u64) -> Result<Vec<usize>> {
    if size > n {
        return Err(Error::SubsetTooLarge {
            requested: size,
            available: n,
        });
    }
    let mut rng = seeded_rng(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Uniform random subset without replacement; the chosen points keep their
/// relative order from `cloud`.
pub fn random_subset(cloud: &PointCloud, size: usize, seed: u64) -> Result<PointCloud> {
    let idx = random_subset_indices(cloud.len(), size, seed)?;
    Ok(cloud.select(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(dim: usize, pts: &[&[f64]]) -> PointCloud {
        PointCloud::from_points(dim, pts).unwrap()
    }

    #[test]
    fn three_four_five() {
        let dm = distance_matrix(&cloud(2, &[&[0.0, 0.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.get(1, 0), 5.0);
    }

    #[test]
    fn single_point_matrix() {
        let dm = distance_matrix(&cloud(1, &[&[7.0]])).unwrap();
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
    }

    #[test]
    fn line_matrix() {
        let dm = distance_matrix(&cloud(1, &[&[-1.0], &[1.0], &[3.0]])).unwrap();
        let expected = [[0.0, 2.0, 4.0], [2.0, 0.0, 2.0], [4.0, 2.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(dm.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn empty_cloud_rejected() {
        let err = distance_matrix(&PointCloud::empty(2)).unwrap_err();
        assert_eq!(err.to_string(), "empty point cloud");
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            PointCloud::from_flat(2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(PointCloud::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointCloud::from_points(2, &[vec![1.0]]).is_err());
    }

    #[test]
    fn max_distance_examples() {
        let tri = cloud(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_abs_diff_eq!(max_interpoint_distance(&tri).unwrap(), 2f64.sqrt());
        assert_eq!(max_interpoint_distance(&cloud(1, &[&[-1.0], &[1.0]])).unwrap(), 2.0);

        let square = cloud(2, &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let mut brute: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                brute = brute.max(distance(square.point(i), square.point(j)));
            }
        }
        assert_eq!(max_interpoint_distance(&square).unwrap(), brute);
        assert!(matches!(
            max_interpoint_distance(&cloud(1, &[&[0.0]])),
            Err(Error::NeedTwoPoints)
        ));
    }

    #[test]
    fn subset_examples() {
        let mut rng = seeded_rng(9);
        let flat: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let big = PointCloud::from_flat(2, flat).unwrap();
        let s = random_subset(&big, 100, 42).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|p| big.iter().any(|q| q == p)));
        assert_eq!(s, random_subset(&big, 100, 42).unwrap());

        assert_eq!(random_subset(&big, big.len(), 3).unwrap(), big);
        let err = random_subset(&big, 1001, 0).unwrap_err();
        assert!(err.to_string().starts_with("subset larger than cloud"));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let c = cloud(3, &[&[0.1, -2.5e-17, 1.0 / 3.0], &[1e300, 5.0, -0.0]]);
        let text = format!("# x,y,z\n{}", c.to_csv_string());
        let back = PointCloud::parse_csv(&text, Path::new("mem")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_ragged_rows_rejected() {
        let err = PointCloud::parse_csv("1,2\n3\n", Path::new("mem")).unwrap_err();
        assert!(err.to_string().contains("mem:2"));
    }

    fn random_rotation(rng: &mut SeededRng, d: usize) -> Vec<Vec<f64>> {
        // Gram-Schmidt on a random matrix.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < d {
            let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let n = norm(&v);
            if n > 1e-3 {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        basis
    }

    proptest! {
        #[test]
        fn distances_invariant_under_rigid_motion(seed in any::<u64>(), d in 2usize..=3, n in 2usize..30) {
            let mut rng = seeded_rng(seed);
            let flat: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let a = PointCloud::from_flat(d, flat).unwrap();
            let rot = random_rotation(&mut rng, d);
            let shift: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let moved: Vec<f64> = a
                .iter()
                .flat_map(|p| {
                    (0..d)
                        .map(|r| rot[r].iter().zip(p).map(|(x, y)| x * y).sum::<f64>() + shift[r])
                        .collect::<Vec<_>>()
                })
                .collect();
            let b = PointCloud::from_flat(d, moved).unwrap();
            let (da, db) = (distance_matrix(&a).unwrap(), distance_matrix(&b).unwrap());
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((da.get(i, j) - db.get(i, j)).abs() < 1e-9);
                    prop_assert!(da.get(i, j) >= 0.0);
                    prop_assert_eq!(da.get(i, j), da.get(j, i));
                    for k in 0..n {
                        prop_assert!(da.get(i, k) <= da.get(i, j) + da.get(j, k) + 1e-9);
                    }
                }
            }
            prop_assert_eq!(max_interpoint_distance(&a).unwrap(), da.max_entry());
        }

        #[test]
        fn subset_is_sub_multiset(seed in any::<u64>(), n in 1usize..60, frac in 0.0f64..=1.0) {
            let mut rng = seeded_rng(seed);
            // Small integer grid so duplicates are common.
            let flat: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
            let c = PointCloud::from_flat(1, flat).unwrap();
            let size = ((n as f64) * frac).floor() as usize;
            let s = random_subset(&c, size, seed).unwrap();
            prop_assert_eq!(s.len(), size);
            let mut pool: Vec<f64> = c.as_flat().to_vec();
            for &v in s.as_flat() {
                let pos = pool.iter().position(|&x| x == v);
                prop_assert!(pos.is_some());
                pool.swap_remove(pos.unwrap());
            }
        }
    }
}
