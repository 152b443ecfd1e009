//! Z/2 boundary-matrix column reduction.
//!
//! Rows and columns are indexed by filtration position. A column whose
//! reduced form has lowest nonzero row `i` pairs simplex `i` (birth) with the
//! column's simplex (death); columns that reduce to zero are births.

use super::barcode::{Barcode, Interval};
use super::complex::{FilteredComplex, SimplexIndex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Left-to-right reduction of every column.
    Standard,
    /// Reduces dimensions from the top down and zeroes each column that is
    /// already known to be a pivot row of a higher-dimensional column.
    #[default]
    Clearing,
}

/// Row indices of the boundary of column `j`, ascending.
fn boundary(complex: &FilteredComplex, index: &SimplexIndex, j: usize) -> Result<Vec<u32>> {
    let s = complex.simplex(j);
    if s.len() < 2 {
        return Ok(Vec::new());
    }
    let mut face = Vec::with_capacity(s.len() - 1);
    let mut col = Vec::with_capacity(s.len());
    for skip in 0..s.len() {
        face.clear();
        face.extend(s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
        match index.find(&face) {
            Some(i) if i < j => col.push(i as u32),
            _ => {
                return Err(Error::ClosureViolation {
                    simplex: s.iter().map(|&v| v as usize).collect(),
                    face: face.iter().map(|&v| v as usize).collect(),
                })
            }
        }
    }
    col.sort_unstable();
    Ok(col)
}

/// `a += b` over Z/2 for ascending index lists.
fn add_into(a: &mut Vec<u32>, b: &[u32], buf: &mut Vec<u32>) {
    buf.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                buf.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                buf.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    buf.extend_from_slice(&a[i..]);
    buf.extend_from_slice(&b[j..]);
    std::mem::swap(a, buf);
}

/// Persistence pairs `(birth, death)` in filtration positions, plus the
/// positions of unpaired births.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub essential: Vec<usize>,
}

pub fn reduce(complex: &FilteredComplex, method: Reduction) -> Result<Pairing> {
    let m = complex.len();
    let index = SimplexIndex::build(complex);
    const NONE: u32 = u32::MAX;
    // pivot_owner[i] = column whose reduced low is row i.
    let mut pivot_owner = vec![NONE; m];
    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; m];
    let mut cleared = vec![false; m];
    let mut buf = Vec::new();

    let order: Vec<usize> = match method {
        Reduction::Standard => (0..m).collect(),
        Reduction::Clearing => {
            let mut by_dim: Vec<usize> = (0..m).collect();
            // Stable: filtration order within each dimension.
            by_dim.sort_by_key(|&j| std::cmp::Reverse(complex.dim_of(j)));
            by_dim
        }
    };

    for j in order {
        if cleared[j] {
            continue;
        }
        let mut col = boundary(complex, &index, j)?;
        while let Some(&low) = col.last() {
            let owner = pivot_owner[low as usize];
            if owner == NONE {
                break;
            }
            let other = reduced[owner as usize].as_ref().expect("owner columns are stored");
            add_into(&mut col, other, &mut buf);
        }
        if let Some(&low) = col.last() {
            pivot_owner[low as usize] = j as u32;
            reduced[j] = Some(col);
            if method == Reduction::Clearing {
                cleared[low as usize] = true;
            }
        }
    }

    let mut pairs = Vec::new();
    let mut is_death = vec![false; m];
    for (row, &owner) in pivot_owner.iter().enumerate() {
        if owner != NONE {
            pairs.push((row, owner as usize));
            is_death[owner as usize] = true;
        }
    }
    let paired_birth: std::collections::HashSet<usize> = pairs.iter().map(|p| p.0).collect();
    let essential = (0..m).filter(|&i| !is_death[i] && !paired_birth.contains(&i)).collect();
    pairs.sort_unstable();
    Ok(Pairing { pairs, essential })
}

/// Barcode of a filtered complex. Zero-length intervals are dropped and
/// counted in [`Barcode::zero_length`].
pub fn persistence(complex: &FilteredComplex) -> Result<Barcode> {
    persistence_with(complex, Reduction::default())
}

pub fn persistence_with(complex: &FilteredComplex, method: Reduction) -> Result<Barcode> {
    let pairing = reduce(complex, method)?;
    let mut intervals = Vec::new();
    let mut zero_length = 0;
    for &(b, d) in &pairing.pairs {
        let (birth, death) = (complex.value(b), complex.value(d));
        if birth == death {
            zero_length += 1;
        } else {
            intervals.push(Interval {
                dim: complex.dim_of(b),
                birth,
                death: Some(death),
            });
        }
    }
    for &b in &pairing.essential {
        intervals.push(Interval {
            dim: complex.dim_of(b),
            birth: complex.value(b),
            death: None,
        });
    }
    Ok(Barcode::new(intervals, complex.max_dim(), complex.threshold(), zero_length))
}
