use std::ffi::{CStr, CString};
use std::ptr;

use topo_denoise_ffi::*;

fn last_error() -> String {
    let p = td_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn square_through_the_c_interface() {
    let coords = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let mut cloud = ptr::null_mut();
    unsafe {
        assert_eq!(td_cloud_new(coords.as_ptr(), 4, 2, &mut cloud), TdStatus::Ok);
        assert_eq!(td_cloud_len(cloud), 4);
        assert_eq!(td_cloud_dim(cloud), 2);
        assert_eq!(std::slice::from_raw_parts(td_cloud_coords(cloud), 8), &coords);

        let params = TdBarcodeParams {
            max_dim: 2,
            max_eps: 2.0,
            ..td_barcode_defaults()
        };
        let mut bc = ptr::null_mut();
        assert_eq!(td_barcode(cloud, &params, &mut bc), TdStatus::Ok);
        let mut h1 = Vec::new();
        for i in 0..td_barcode_len(bc) {
            let mut iv = TdInterval { dim: 0, birth: 0.0, death: 0.0 };
            assert_eq!(td_barcode_interval(bc, i, &mut iv), TdStatus::Ok);
            if iv.dim == 1 {
                h1.push(iv);
            }
        }
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, 2f64.sqrt()));
        assert_eq!(td_barcode_prominence(bc, 0), 2.0);
        assert!(td_barcode_prominence(bc, 3).is_nan());
        assert!(td_barcode_prominence(bc, 1).is_infinite());

        let mut iv = TdInterval { dim: 0, birth: 0.0, death: 0.0 };
        assert_eq!(td_barcode_interval(bc, 99, &mut iv), TdStatus::InvalidArgument);
        td_barcode_free(bc);
        td_cloud_free(cloud);
    }
}

#[test]
fn synth_threshold_denoise() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(td_synth(TdShape::Circle, 0, 0.3, 400, 7, &mut k), TdStatus::Ok);
        assert_eq!(td_cloud_len(k), 400);

        let mut kept = ptr::null_mut();
        assert_eq!(td_threshold(k, 10, 0.25, &mut kept), TdStatus::Ok);
        assert_eq!(td_cloud_len(kept), 100);

        let params = TdDenoiseParams {
            subset: 40,
            iterations: 20,
            ..td_denoise_defaults()
        };
        let mut s = ptr::null_mut();
        let mut m = 0.0;
        assert_eq!(td_denoise(k, &params, &mut s, &mut m), TdStatus::Ok);
        assert!(m > 0.0);
        assert_eq!((td_cloud_len(s), td_cloud_dim(s)), (40, 2));

        let mut again = ptr::null_mut();
        assert_eq!(td_denoise(k, &params, &mut again, ptr::null_mut()), TdStatus::Ok);
        let a = std::slice::from_raw_parts(td_cloud_coords(s), 80);
        let b = std::slice::from_raw_parts(td_cloud_coords(again), 80);
        assert_eq!(a, b);

        for c in [k, kept, s, again] {
            td_cloud_free(c);
        }
    }
}

#[test]
fn status_codes_and_messages() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(td_synth(TdShape::Circle, 0, -1.0, 10, 0, &mut out), TdStatus::Validation);
        assert!(last_error().contains("sigma"), "{}", last_error());
        assert!(out.is_null());

        let flat = [1.0; 6];
        let mut cloud = ptr::null_mut();
        assert_eq!(td_cloud_new(flat.as_ptr(), 3, 2, &mut cloud), TdStatus::Ok);
        assert!(td_last_error().is_null());
        let params = TdDenoiseParams { subset: 2, ..td_denoise_defaults() };
        assert_eq!(td_denoise(cloud, &params, &mut out, ptr::null_mut()), TdStatus::Degenerate);

        let capped = TdBarcodeParams {
            max_eps: 2.0,
            max_simplices: 2,
            ..td_barcode_defaults()
        };
        assert_eq!(td_barcode(cloud, &capped, &mut ptr::null_mut()), TdStatus::ResourceCap);
        td_cloud_free(cloud);

        assert_eq!(td_cloud_read_csv(ptr::null(), &mut out), TdStatus::InvalidArgument);
        let missing = CString::new("/nonexistent/points.csv").unwrap();
        assert_eq!(td_cloud_read_csv(missing.as_ptr(), &mut out), TdStatus::Validation);
        assert!(last_error().contains("/nonexistent/points.csv"));
        assert_eq!(td_cloud_len(ptr::null()), 0);
        td_cloud_free(ptr::null_mut());
        td_barcode_free(ptr::null_mut());
    }
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.csv").to_str().unwrap()).unwrap();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(td_synth(TdShape::Point, 3, 0.5, 50, 1, &mut c), TdStatus::Ok);
        assert_eq!(td_cloud_write_csv(c, path.as_ptr()), TdStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(td_cloud_read_csv(path.as_ptr(), &mut d), TdStatus::Ok);
        assert_eq!(
            std::slice::from_raw_parts(td_cloud_coords(c), 150),
            std::slice::from_raw_parts(td_cloud_coords(d), 150)
        );
        td_cloud_free(c);
        td_cloud_free(d);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/topo_denoise.h")).unwrap();
    for name in [
        "typedef struct TdCloud TdCloud;",
        "TD_STATUS_RESOURCE_CAP = 4",
        "td_last_error(void)",
        "td_cloud_new(const double *coords, size_t n, size_t dim, struct TdCloud **out)",
        "td_barcode_prominence",
        "td_denoise_defaults(void)",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn header_compiles_as_c() {
    use std::io::Write;
    use std::process::{Command, Stdio};

    let program = r#"
#include "topo_denoise.h"
int main(void) {
    TdCloud *cloud = NULL;
    TdBarcodeParams p = td_barcode_defaults();
    p.complex = TD_COMPLEX_LAZY_WITNESS;
    TdBarcode *bars = NULL;
    if (td_synth(TD_SHAPE_CIRCLE, 0, 0.3, 100, 1, &cloud) != TD_STATUS_OK) return 1;
    if (td_barcode(cloud, &p, &bars) != TD_STATUS_OK) return 1;
    td_barcode_free(bars);
    td_cloud_free(cloud);
    return 0;
}
"#;
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let Ok(mut cc) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", "-I", include, "-"])
        .stdin(Stdio::piped())
        .spawn()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    cc.stdin.take().unwrap().write_all(program.as_bytes()).unwrap();
    assert!(cc.wait().unwrap().success());
}
