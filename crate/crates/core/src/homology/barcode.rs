use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `None` for classes still alive at the end of the filtration.
    pub death: Option<f64>,
}

impl Interval {
    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && self.death.is_none_or(|d| t < d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    intervals: Vec<Interval>,
    max_dim: usize,
    max_filtration: f64,
    zero_length: usize,
}

impl Barcode {
    /// Intervals are stored sorted by `(dim, birth, death)`, infinite deaths last.
    pub fn new(mut intervals: Vec<Interval>, max_dim: usize, max_filtration: f64, zero_length: usize) -> Self {
        intervals.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.unwrap_or(f64::INFINITY).total_cmp(&b.death.unwrap_or(f64::INFINITY)))
        });
        Self {
            intervals,
            max_dim,
            max_filtration,
            zero_length,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn in_dim(&self, dim: usize) -> Vec<Interval> {
        self.intervals.iter().filter(|i| i.dim == dim).copied().collect()
    }

    /// Top dimension of the complex the barcode came from. Intervals in this
    /// dimension are never killed and only reflect truncation.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Largest filtration value that was built.
    pub fn max_filtration(&self) -> f64 {
        self.max_filtration
    }

    /// Number of birth-death pairs with equal values that were dropped.
    pub fn zero_length(&self) -> usize {
        self.zero_length
    }

    pub fn betti(&self, dim: usize, t: f64) -> usize {
        self.intervals.iter().filter(|i| i.dim == dim && i.contains(t)).count()
    }

    /// JSON array of `{"dim", "birth", "death"}` with `null` for infinite deaths.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.intervals).expect("intervals are finite")
    }

    pub fn from_json(text: &str, max_dim: usize, max_filtration: f64) -> Result<Self> {
        let intervals: Vec<Interval> = serde_json::from_str(text)?;
        for i in &intervals {
            if i.death.is_some_and(|d| d < i.birth) {
                return Err(Error::invalid("barcode", format!("interval {i:?} dies before it is born")));
            }
        }
        Ok(Self::new(intervals, max_dim, max_filtration, 0))
    }
}

/// Longest over second-longest interval length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prominence {
    NoFeatures,
    /// Exactly one interval.
    Unbounded,
    Ratio(f64),
}

impl Prominence {
    /// `None` when there are no features, `+inf` for a single interval.
    pub fn value(&self) -> Option<f64> {
        match self {
            Prominence::NoFeatures => None,
            Prominence::Unbounded => Some(f64::INFINITY),
            Prominence::Ratio(r) => Some(*r),
        }
    }

    /// True when one interval stands out by at least `threshold`.
    pub fn is_dominant(&self, threshold: f64) -> bool {
        self.value().is_some_and(|r| r >= threshold)
    }
}

impl Serialize for Prominence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Prominence::NoFeatures => s.serialize_str("no features"),
            Prominence::Unbounded => s.serialize_str("inf"),
            Prominence::Ratio(r) => s.serialize_f64(*r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarcodeStats {
    pub dim: usize,
    /// Finite interval lengths, longest first.
    pub finite_lengths: Vec<f64>,
    pub infinite_count: usize,
    /// `max_filtration - birth` for each infinite interval, longest first.
    pub infinite_effective_lengths: Vec<f64>,
    pub prominence: Prominence,
    /// Longest effective length, if any.
    pub longest: Option<f64>,
    /// Set when the longest interval is an infinite one measured by its
    /// effective length.
    pub longest_is_infinite: bool,
    /// Set for the top dimension, whose intervals are truncation artifacts.
    pub truncated_dimension: bool,
}

pub fn barcode_stats(barcode: &Barcode, dim: usize) -> BarcodeStats {
    let intervals = barcode.in_dim(dim);
    let desc = |v: &mut Vec<f64>| v.sort_by(|a, b| b.total_cmp(a));
    let mut finite_lengths: Vec<f64> = intervals.iter().filter_map(|i| i.death.map(|d| d - i.birth)).collect();
    desc(&mut finite_lengths);
    let mut infinite_effective_lengths: Vec<f64> = intervals
        .iter()
        .filter(|i| i.is_infinite())
        .map(|i| (barcode.max_filtration() - i.birth).max(0.0))
        .collect();
    desc(&mut infinite_effective_lengths);

    let mut all: Vec<(f64, bool)> = finite_lengths
        .iter()
        .map(|&l| (l, false))
        .chain(infinite_effective_lengths.iter().map(|&l| (l, true)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    let prominence = match all.as_slice() {
        [] => Prominence::NoFeatures,
        [_] => Prominence::Unbounded,
        [a, b, ..] => {
            if b.0 > 0.0 {
                Prominence::Ratio(a.0 / b.0)
            } else {
                Prominence::Unbounded
            }
        }
    };
    BarcodeStats {
        dim,
        infinite_count: infinite_effective_lengths.len(),
        finite_lengths,
        infinite_effective_lengths,
        prominence,
        longest: all.first().map(|a| a.0),
        longest_is_infinite: all.first().is_some_and(|a| a.1),
        truncated_dimension: dim >= barcode.max_dim(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(dim: usize, birth: f64, death: Option<f64>) -> Interval {
        Interval { dim, birth, death }
    }

    #[test]
    fn square_stats() {
        let r2 = 2f64.sqrt();
        let b = Barcode::new(vec![bar(1, 1.0, Some(r2)), bar(0, 0.0, None)], 2, 2.0, 0);
        let s = barcode_stats(&b, 1);
        assert_eq!(s.finite_lengths, vec![r2 - 1.0]);
        assert_eq!(s.prominence, Prominence::Unbounded);
        assert_eq!(s.prominence.value(), Some(f64::INFINITY));
        assert!(!s.truncated_dimension);
    }

    #[test]
    fn empty_and_ties() {
        let b = Barcode::new(vec![bar(1, 0.2, Some(0.5)), bar(1, 1.0, Some(1.3))], 2, 2.0, 0);
        assert_eq!(barcode_stats(&b, 0).prominence, Prominence::NoFeatures);
        assert!(!barcode_stats(&b, 0).prominence.is_dominant(3.0));
        let s = barcode_stats(&b, 1);
        assert!((s.prominence.value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_intervals_use_effective_length() {
        let b = Barcode::new(vec![bar(0, 0.0, None), bar(0, 0.0, Some(0.5))], 1, 2.0, 0);
        let s = barcode_stats(&b, 0);
        assert_eq!(s.infinite_count, 1);
        assert_eq!(s.infinite_effective_lengths, vec![2.0]);
        assert_eq!(s.prominence, Prominence::Ratio(4.0));
        assert!(s.longest_is_infinite);
    }

    #[test]
    fn betti_counts_half_open() {
        let b = Barcode::new(vec![bar(1, 1.0, Some(2.0)), bar(1, 1.5, None)], 2, 3.0, 0);
        assert_eq!(b.betti(1, 0.5), 0);
        assert_eq!(b.betti(1, 1.0), 1);
        assert_eq!(b.betti(1, 1.7), 2);
        assert_eq!(b.betti(1, 2.0), 1);
    }

    #[test]
    fn json_format() {
        let b = Barcode::new(vec![bar(0, 0.0, None), bar(1, 0.25, Some(0.5))], 2, 1.0, 0);
        let text = b.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["dim"], 0);
        assert!(v[0]["death"].is_null());
        assert_eq!(v[1]["death"], 0.5);
        assert_eq!(Barcode::from_json(&text, 2, 1.0).unwrap(), b);
        assert!(Barcode::from_json(r#"[{"dim":0,"birth":1.0,"death":0.5}]"#, 1, 1.0).is_err());
    }
}
