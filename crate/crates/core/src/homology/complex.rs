//! Filtered flag complexes: Vietoris-Rips and lazy witness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, distance_matrix, random_subset_indices, seeded_rng, PointCloud};

/// Default cap on the number of simplices a construction may produce.
pub const DEFAULT_SIMPLEX_CAP: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexRecord {
    offset: u32,
    dim: u8,
    value: f64,
}

/// Simplices sorted by `(value, dim, vertices)`; faces always precede cofaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    records: Vec<SimplexRecord>,
    vertices: Vec<u32>,
    max_dim: usize,
    /// Filtration values above this were not built.
    threshold: f64,
}

impl FilteredComplex {
    /// Builds a complex from explicit `(vertices, value)` pairs. The list is
    /// sorted into filtration order; closure is not checked here (see
    /// [`FilteredComplex::check_closure`]).
    pub fn from_simplices(mut simplices: Vec<(Vec<usize>, f64)>, max_dim: usize, threshold: f64) -> Result<Self> {
        for (v, value) in simplices.iter_mut() {
            if v.is_empty() || v.len() > max_dim + 1 {
                return Err(Error::invalid("simplex", format!("{v:?} has the wrong size for max_dim {max_dim}")));
            }
            if !(value.is_finite() && *value >= 0.0) {
                return Err(Error::invalid("simplex", format!("{v:?} has filtration value {value}")));
            }
            v.sort_unstable();
            if v.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("simplex", format!("{v:?} repeats a vertex")));
            }
        }
        let mut records = Vec::with_capacity(simplices.len());
        let mut vertices = Vec::new();
        for (v, value) in &simplices {
            records.push(SimplexRecord {
                offset: vertices.len() as u32,
                dim: (v.len() - 1) as u8,
                value: *value,
            });
            vertices.extend(v.iter().map(|&x| x as u32));
        }
        let mut c = Self {
            records,
            vertices,
            max_dim,
            threshold,
        };
        c.sort();
        Ok(c)
    }

    fn sort(&mut self) {
        let vertices = &self.vertices;
        let key = |r: &SimplexRecord| &vertices[r.offset as usize..r.offset as usize + r.dim as usize + 1];
        self.records.par_sort_unstable_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.dim.cmp(&b.dim))
                .then_with(|| key(a).cmp(key(b)))
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn simplex(&self, i: usize) -> &[u32] {
        let r = &self.records[i];
        &self.vertices[r.offset as usize..r.offset as usize + r.dim as usize + 1]
    }

    pub fn dim_of(&self, i: usize) -> usize {
        self.records[i].dim as usize
    }

    pub fn value(&self, i: usize) -> f64 {
        self.records[i].value
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.len()).map(move |i| (self.simplex(i), self.value(i)))
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for r in &self.records {
            c[r.dim as usize] += 1;
        }
        c
    }

    /// Number of simplices of each dimension with value `<= t`.
    pub fn counts_at(&self, t: f64) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for r in self.records.iter().filter(|r| r.value <= t) {
            c[r.dim as usize] += 1;
        }
        c
    }

    /// Verifies that every facet of every simplex appears earlier in the order.
    pub fn check_closure(&self) -> Result<()> {
        let index = SimplexIndex::build(self);
        for i in 0..self.len() {
            let s = self.simplex(i);
            if s.len() < 2 {
                continue;
            }
            for skip in 0..s.len() {
                let face: Vec<u32> = s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                match index.find(&face) {
                    Some(j) if j < i => {}
                    _ => {
                        return Err(Error::ClosureViolation {
                            simplex: s.iter().map(|&v| v as usize).collect(),
                            face: face.iter().map(|&v| v as usize).collect(),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}

/// Lookup from vertex sets to positions in a complex.
pub(crate) struct SimplexIndex {
    maps: Vec<std::collections::HashMap<u128, u32>>,
}

fn binomial_key(vertices: &[u32]) -> u128 {
    // Combinatorial number system: sum over k of C(v_k, k + 1).
    let mut key: u128 = 0;
    for (k, &v) in vertices.iter().enumerate() {
        let mut c: u128 = 1;
        let v = v as u128;
        let r = k as u128 + 1;
        if v < r {
            continue;
        }
        for t in 0..r {
            c = c * (v - t) / (t + 1);
        }
        key += c;
    }
    key
}

impl SimplexIndex {
    pub(crate) fn build(c: &FilteredComplex) -> Self {
        let mut maps = vec![std::collections::HashMap::new(); c.max_dim + 1];
        for i in 0..c.len() {
            maps[c.dim_of(i)].insert(binomial_key(c.simplex(i)), i as u32);
        }
        Self { maps }
    }

    pub(crate) fn find(&self, vertices: &[u32]) -> Option<usize> {
        self.maps
            .get(vertices.len().checked_sub(1)?)?
            .get(&binomial_key(vertices))
            .map(|&i| i as usize)
    }
}

/// Symmetric edge weights on `n` vertices.
struct EdgeWeights {
    n: usize,
    w: Vec<f64>,
}

impl EdgeWeights {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
}

fn check_limits(max_eps: f64, max_dim: usize) -> Result<()> {
    if !(max_eps > 0.0 && max_eps.is_finite()) {
        return Err(Error::invalid("max_eps", format!("must be positive, got {max_eps}")));
    }
    if max_dim < 1 {
        return Err(Error::invalid("max_dim", "must be at least 1"));
    }
    Ok(())
}

/// Clique completion of the graph of edges with weight `<= max_eps`; each
/// simplex enters at its largest edge weight, vertices at 0.
fn flag_complex(weights: &EdgeWeights, max_eps: f64, max_dim: usize, cap: usize) -> Result<FilteredComplex> {
    let n = weights.n;
    // Higher-indexed neighbors of each vertex, ascending.
    let up: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .filter(|&j| weights.get(i, j) <= max_eps)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut records = Vec::new();
    let mut vertices: Vec<u32> = Vec::new();
    let mut push = |simplex: &[u32], value: f64, records: &mut Vec<SimplexRecord>| -> Result<()> {
        if records.len() >= cap {
            return Err(Error::TooManySimplices {
                count: records.len() + 1,
                cap,
            });
        }
        records.push(SimplexRecord {
            offset: vertices.len() as u32,
            dim: (simplex.len() - 1) as u8,
            value,
        });
        vertices.extend_from_slice(simplex);
        Ok(())
    };

    // Depth-first expansion: extend a clique by common higher neighbors.
    fn expand(
        clique: &mut Vec<u32>,
        value: f64,
        candidates: &[u32],
        up: &[Vec<u32>],
        weights: &EdgeWeights,
        max_dim: usize,
        records: &mut Vec<SimplexRecord>,
        push: &mut dyn FnMut(&[u32], f64, &mut Vec<SimplexRecord>) -> Result<()>,
    ) -> Result<()> {
        push(clique, value, records)?;
        if clique.len() > max_dim {
            return Ok(());
        }
        for (k, &v) in candidates.iter().enumerate() {
            let mut new_value = value;
            for &u in clique.iter() {
                new_value = new_value.max(weights.get(u as usize, v as usize));
            }
            let next: Vec<u32> = if clique.len() == max_dim {
                Vec::new()
            } else {
                let nbrs = &up[v as usize];
                candidates[k + 1..]
                    .iter()
                    .copied()
                    .filter(|c| nbrs.binary_search(c).is_ok())
                    .collect()
            };
            clique.push(v);
            expand(clique, new_value, &next, up, weights, max_dim, records, push)?;
            clique.pop();
        }
        Ok(())
    }

    let mut clique = Vec::with_capacity(max_dim + 1);
    for v in 0..n {
        clique.push(v as u32);
        expand(&mut clique, 0.0, &up[v], &up, weights, max_dim, &mut records, &mut push)?;
        clique.pop();
    }
    let mut c = FilteredComplex {
        records,
        vertices,
        max_dim,
        threshold: max_eps,
    };
    c.sort();
    Ok(c)
}

pub fn rips_complex(cloud: &PointCloud, max_eps: f64, max_dim: usize) -> Result<FilteredComplex> {
    rips_complex_capped(cloud, max_eps, max_dim, DEFAULT_SIMPLEX_CAP)
}

pub fn rips_complex_capped(cloud: &PointCloud, max_eps: f64, max_dim: usize, cap: usize) -> Result<FilteredComplex> {
    check_limits(max_eps, max_dim)?;
    let dm = distance_matrix(cloud)?;
    let n = dm.len();
    let w = (0..n).flat_map(|i| dm.row(i).to_vec()).collect();
    flag_complex(&EdgeWeights { n, w }, max_eps, max_dim, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandmarkSelection {
    Random,
    /// Greedy farthest-point selection starting from a random point.
    MaxMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    pub indices: Vec<usize>,
    pub selection: LandmarkSelection,
    pub seed: u64,
}

impl LandmarkSet {
    pub fn select(cloud: &PointCloud, count: usize, selection: LandmarkSelection, seed: u64) -> Result<Self> {
        if count > cloud.len() {
            return Err(Error::SubsetTooLarge {
                requested: count,
                available: cloud.len(),
            });
        }
        let indices = match selection {
            LandmarkSelection::Random => random_subset_indices(cloud.len(), count, seed)?,
            LandmarkSelection::MaxMin => maxmin_indices(cloud, count, seed),
        };
        Ok(Self {
            indices,
            selection,
            seed,
        })
    }

    /// Every point of the cloud, in order.
    pub fn all(cloud: &PointCloud) -> Self {
        Self {
            indices: (0..cloud.len()).collect(),
            selection: LandmarkSelection::Random,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in &self.indices {
            if i >= n || seen[i] {
                return Err(Error::invalid("landmarks", format!("index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

fn maxmin_indices(cloud: &PointCloud, count: usize, seed: u64) -> Vec<usize> {
    use rand::Rng;
    if count == 0 {
        return Vec::new();
    }
    let n = cloud.len();
    let mut rng = seeded_rng(seed);
    let first = rng.gen_range(0..n);
    let mut chosen = vec![first];
    let mut nearest: Vec<f64> = cloud.iter().map(|p| distance(p, cloud.point(first))).collect();
    while chosen.len() < count {
        let (next, _) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        chosen.push(next);
        let p = cloud.point(next);
        for (i, q) in cloud.iter().enumerate() {
            nearest[i] = nearest[i].min(distance(p, q));
        }
    }
    chosen
}

/// Lazy witness complex with every cloud point acting as a witness.
///
/// The edge between landmarks `a` and `b` enters at the smallest `t >= 0`
/// for which some witness `x` has `max(d(x, a), d(x, b)) <= t + m(x)`, where
/// `m(x)` is the distance from `x` to its `nu`-th nearest landmark (`m = 0`
/// for `nu = 0`). Vertex `i` of the result is `landmarks.indices[i]`.
pub fn lazy_witness_complex(
    cloud: &PointCloud,
    landmarks: &LandmarkSet,
    nu: usize,
    max_eps: f64,
    max_dim: usize,
) -> Result<FilteredComplex> {
    lazy_witness_complex_capped(cloud, landmarks, nu, max_eps, max_dim, DEFAULT_SIMPLEX_CAP)
}

pub fn lazy_witness_complex_capped(
    cloud: &PointCloud,
    landmarks: &LandmarkSet,
    nu: usize,
    max_eps: f64,
    max_dim: usize,
    cap: usize,
) -> Result<FilteredComplex> {
    check_limits(max_eps, max_dim)?;
    if landmarks.len() < 2 {
        return Err(Error::invalid("landmarks", "need at least two"));
    }
    if nu > 2 {
        return Err(Error::invalid("nu", format!("must be 0, 1 or 2, got {nu}")));
    }
    landmarks.validate(cloud.len())?;
    let l = landmarks.len();
    let lm: Vec<&[f64]> = landmarks.indices.iter().map(|&i| cloud.point(i)).collect();

    let w = (0..cloud.len())
        .into_par_iter()
        .fold(
            || (vec![f64::INFINITY; l * l], vec![0.0; l], vec![0.0; l]),
            |(mut best, mut d, mut sorted), x| {
                let p = cloud.point(x);
                for (k, q) in lm.iter().enumerate() {
                    d[k] = distance(p, q);
                }
                let m = if nu == 0 {
                    0.0
                } else {
                    sorted.copy_from_slice(&d);
                    let (_, v, _) = sorted.select_nth_unstable_by(nu - 1, f64::total_cmp);
                    *v
                };
                for a in 0..l {
                    for b in a + 1..l {
                        let t = (d[a].max(d[b]) - m).max(0.0);
                        let slot = &mut best[a * l + b];
                        if t < *slot {
                            *slot = t;
                        }
                    }
                }
                (best, d, sorted)
            },
        )
        .map(|(best, _, _)| best)
        .reduce(
            || vec![f64::INFINITY; l * l],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x = x.min(y));
                a
            },
        );
    let mut w = w;
    for a in 0..l {
        w[a * l + a] = 0.0;
        for b in a + 1..l {
            w[b * l + a] = w[a * l + b];
        }
    }
    flag_complex(&EdgeWeights { n: l, w }, max_eps, max_dim, cap)
}
