//! Filtered complexes and persistent homology over Z/2.

mod barcode;
mod complex;
mod reduction;

pub use barcode::{barcode_stats, Barcode, BarcodeStats, Interval, Prominence};
pub use complex::{
    lazy_witness_complex, lazy_witness_complex_capped, rips_complex, rips_complex_capped, FilteredComplex,
    LandmarkSelection, LandmarkSet, DEFAULT_SIMPLEX_CAP,
};
pub use reduction::{persistence, persistence_with, reduce, Pairing, Reduction};
