//! C interface to `topo-denoise`.
//!
//! Every fallible call returns a [`TdStatus`]; on failure the message is
//! available from [`td_last_error`] on the same thread. Objects cross the
//! boundary as opaque handles and are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use topo_denoise::cli::{barcode_for, run_denoise, run_threshold, BarcodeOptions, ComplexKind, DenoiseOptions, SelectionArg, ThresholdOptions};
use topo_denoise::homology::{barcode_stats, Barcode, Prominence, DEFAULT_SIMPLEX_CAP};
use topo_denoise::synth::{rejection_sample, NoisyShapeSpec, Shape};
use topo_denoise::{Error, ErrorKind, PointCloud};

/// Status codes. The nonzero values for library errors match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    /// Null pointer or non-UTF-8 string from the caller.
    InvalidArgument = 1,
    Validation = 2,
    Degenerate = 3,
    ResourceCap = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdShape {
    Circle = 0,
    Sphere = 1,
    Point = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdComplex {
    Rips = 0,
    LazyWitness = 1,
}

/// Point cloud handle.
pub struct TdCloud(PointCloud);

/// Barcode handle.
pub struct TdBarcode(Barcode);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdDenoiseParams {
    pub subset: usize,
    pub sigma: f64,
    pub omega: f64,
    pub step_c: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdBarcodeParams {
    pub complex: TdComplex,
    pub max_dim: usize,
    pub max_eps: f64,
    /// Landmark count for witness complexes; capped at the cloud size.
    pub landmarks: usize,
    pub landmark_seed: u64,
    pub nu: usize,
    pub max_simplices: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdInterval {
    pub dim: usize,
    pub birth: f64,
    /// Infinity for classes alive at the end of the filtration.
    pub death: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Argument(&'static str),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(Failure::Argument(what))) => {
            set_error(format!("invalid argument: {what}"));
            TdStatus::InvalidArgument
        }
        Ok(Err(Failure::Library(e))) => {
            set_error(e.to_string());
            match e.kind() {
                ErrorKind::Validation => TdStatus::Validation,
                ErrorKind::Degenerate => TdStatus::Degenerate,
                ErrorKind::ResourceCap => TdStatus::ResourceCap,
            }
        }
        Err(_) => {
            set_error("internal panic".into());
            TdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Argument(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Argument("null output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(Failure::Argument("null path"));
    }
    CStr::from_ptr(path).to_str().map_err(|_| Failure::Argument("path is not UTF-8"))
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `n * dim` row-major coordinates into a new cloud.
///
/// # Safety
/// `coords` must point to `n * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_new(coords: *const f64, n: usize, dim: usize, out: *mut *mut TdCloud) -> TdStatus {
    guard(|| {
        let len = n.checked_mul(dim).ok_or(Failure::Argument("n * dim overflows"))?;
        let flat = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(deref(coords, "null coordinates")?, len).to_vec()
        };
        put(out, TdCloud(PointCloud::from_flat(dim, flat)?))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_read_csv(path: *const c_char, out: *mut *mut TdCloud) -> TdStatus {
    guard(|| put(out, TdCloud(PointCloud::read_csv(path_arg(path)?)?)))
}

/// # Safety
/// `cloud` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_write_csv(cloud: *const TdCloud, path: *const c_char) -> TdStatus {
    guard(|| Ok(deref(cloud, "null cloud")?.0.write_csv(path_arg(path)?)?))
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `cloud` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_len(cloud: *const TdCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `cloud` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_dim(cloud: *const TdCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.dim())
}

/// Row-major coordinates, borrowed from the handle.
///
/// # Safety
/// `cloud` must be NULL or a live handle; the result dies with it.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_coords(cloud: *const TdCloud) -> *const f64 {
    cloud.as_ref().map_or(ptr::null(), |c| c.0.as_flat().as_ptr())
}

/// # Safety
/// `cloud` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_cloud_free(cloud: *mut TdCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Samples `n` points from a noisy circle, sphere or point. `point_dim` is
/// only read for `Point`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_synth(
    shape: TdShape,
    point_dim: usize,
    sigma: f64,
    n: usize,
    seed: u64,
    out: *mut *mut TdCloud,
) -> TdStatus {
    guard(|| {
        let shape = match shape {
            TdShape::Circle => Shape::Circle,
            TdShape::Sphere => Shape::Sphere,
            TdShape::Point => Shape::Point { dim: point_dim },
        };
        let sample = rejection_sample(&NoisyShapeSpec::new(shape, sigma, n, seed))?;
        put(out, TdCloud(sample.cloud))
    })
}

/// Keeps the densest `fraction` of points under the k-nearest-neighbor estimate.
///
/// # Safety
/// `cloud` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_threshold(cloud: *const TdCloud, k: usize, fraction: f64, out: *mut *mut TdCloud) -> TdStatus {
    guard(|| {
        let kept = run_threshold(&deref(cloud, "null cloud")?.0, &ThresholdOptions { k, fraction })?;
        put(out, TdCloud(kept))
    })
}

#[no_mangle]
pub extern "C" fn td_denoise_defaults() -> TdDenoiseParams {
    TdDenoiseParams {
        subset: 100,
        sigma: 0.6,
        omega: 0.1,
        step_c: 0.05,
        iterations: 200,
        seed: 0,
    }
}

/// De-noises a random subset of `data`; `m_norm` may be NULL.
///
/// # Safety
/// `data` and `params` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_denoise(
    data: *const TdCloud,
    params: *const TdDenoiseParams,
    out: *mut *mut TdCloud,
    m_norm: *mut f64,
) -> TdStatus {
    guard(|| {
        let p = deref(params, "null params")?;
        let opts = DenoiseOptions {
            subset: p.subset,
            sigma: p.sigma,
            omega: Some(p.omega),
            c: p.step_c,
            iters: p.iterations,
            seed: p.seed,
        };
        let (trace, _) = run_denoise(&deref(data, "null cloud")?.0, &opts, 0)?;
        if !m_norm.is_null() {
            *m_norm = trace.m_norm;
        }
        put(out, TdCloud(trace.final_cloud))
    })
}

#[no_mangle]
pub extern "C" fn td_barcode_defaults() -> TdBarcodeParams {
    TdBarcodeParams {
        complex: TdComplex::Rips,
        max_dim: 2,
        max_eps: 1.0,
        landmarks: 100,
        landmark_seed: 0,
        nu: 1,
        max_simplices: DEFAULT_SIMPLEX_CAP,
    }
}

/// # Safety
/// `cloud` and `params` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_barcode(cloud: *const TdCloud, params: *const TdBarcodeParams, out: *mut *mut TdBarcode) -> TdStatus {
    guard(|| {
        let p = deref(params, "null params")?;
        let opts = BarcodeOptions {
            complex: match p.complex {
                TdComplex::Rips => ComplexKind::Rips,
                TdComplex::LazyWitness => ComplexKind::LazyWitness,
            },
            max_dim: p.max_dim,
            max_eps: p.max_eps,
            landmarks: p.landmarks,
            landmark_selection: SelectionArg::Random,
            landmark_seed: p.landmark_seed,
            nu: p.nu,
            max_simplices: p.max_simplices,
        };
        let run = barcode_for(&deref(cloud, "null cloud")?.0, &opts)?;
        put(out, TdBarcode(run.barcode))
    })
}

/// # Safety
/// `barcode` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_barcode_len(barcode: *const TdBarcode) -> usize {
    barcode.as_ref().map_or(0, |b| b.0.intervals().len())
}

/// # Safety
/// `barcode` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_barcode_interval(barcode: *const TdBarcode, index: usize, out: *mut TdInterval) -> TdStatus {
    guard(|| {
        let b = deref(barcode, "null barcode")?;
        let i = b.0.intervals().get(index).ok_or(Failure::Argument("interval index out of range"))?;
        if out.is_null() {
            return Err(Failure::Argument("null output pointer"));
        }
        *out = TdInterval {
            dim: i.dim,
            birth: i.birth,
            death: i.death.unwrap_or(f64::INFINITY),
        };
        Ok(())
    })
}

/// Longest over second-longest interval length in `dim`: infinity for a
/// single interval, NaN when there are none.
///
/// # Safety
/// `barcode` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_barcode_prominence(barcode: *const TdBarcode, dim: usize) -> f64 {
    match barcode.as_ref().map(|b| barcode_stats(&b.0, dim).prominence) {
        Some(Prominence::Ratio(r)) => r,
        Some(Prominence::Unbounded) => f64::INFINITY,
        Some(Prominence::NoFeatures) | None => f64::NAN,
    }
}

/// # Safety
/// `barcode` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_barcode_free(barcode: *mut TdBarcode) {
    if !barcode.is_null() {
        drop(Box::from_raw(barcode));
    }
}
