use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use fdlab_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { fdlab_last_error(buf.as_mut_ptr(), buf.len()) };
    let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(msg.len(), n.min(255));
    msg
}

fn grid(n: usize, intervals: usize) -> *mut FdlabGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { fdlab_grid_new(n, 1.0, intervals, 0.0, &mut g) }, FdlabStatus::Ok);
    g
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(fdlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn grid_round_trip_and_errors() {
    let g = grid(4, 64);
    unsafe {
        assert_eq!(fdlab_grid_len(g), 65);
        let mut nodes = vec![0.0; 65];
        assert_eq!(fdlab_grid_nodes(g, nodes.as_mut_ptr(), nodes.len()), FdlabStatus::Ok);
        assert_eq!(nodes[64], 1.0);
        assert_eq!(fdlab_grid_nodes(g, nodes.as_mut_ptr(), 10), FdlabStatus::BufferTooSmall);
        assert!(last_error().contains("need 65"));
        fdlab_grid_free(g);

        let mut bad = ptr::null_mut();
        assert_eq!(fdlab_grid_new(4, -1.0, 64, 0.0, &mut bad), FdlabStatus::InvalidArgument);
        assert!(bad.is_null());
        assert!(last_error().contains("radius"));
        assert_eq!(fdlab_grid_new(4, 1.0, 64, 0.0, ptr::null_mut()), FdlabStatus::NullPointer);
        assert_eq!(fdlab_grid_len(ptr::null()), 0);
        fdlab_grid_free(ptr::null_mut());
    }
}

#[test]
fn stationary_state_through_the_c_api() {
    let g = grid(4, 128);
    unsafe {
        let mut l1 = 0.0;
        assert_eq!(fdlab_dirichlet_lambda1(g, &mut l1), FdlabStatus::Ok);
        let b = 0.3 * l1;
        let mut v = ptr::null_mut();
        let mut alpha = 0.0;
        assert_eq!(fdlab_stationary_solve(g, 3.0, b, &mut v, &mut alpha), FdlabStatus::Ok);
        let n = fdlab_field_len(v);
        let mut vals = vec![0.0; n];
        assert_eq!(fdlab_field_values(v, vals.as_mut_ptr(), n), FdlabStatus::Ok);
        // alpha is the continuum shooting value; the nodal state differs by O(h²).
        assert!((vals[0] / alpha - 1.0).abs() < 1e-2, "{} vs {alpha}", vals[0]);

        // The stabilized flow keeps the stationary state in place.
        let mut w = ptr::null_mut();
        assert_eq!(fdlab_rescaled_run(v, 3.0, b, 2.0, 1, &mut w), FdlabStatus::Ok);
        let mut after = vec![0.0; n];
        fdlab_field_values(w, after.as_mut_ptr(), n);
        let drift = vals.iter().zip(&after).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-6 * alpha, "{drift}");

        let (mut fv, mut fw) = (0.0, 0.0);
        fdlab_energy(v, 3.0, b, &mut fv);
        fdlab_energy(w, 3.0, b, &mut fw);
        assert!((fv - fw).abs() < 1e-6 * fv.abs());

        // b = 0 at the critical exponent has no solution.
        let mut none = ptr::null_mut();
        let st = fdlab_stationary_solve(g, 3.0, 0.0, &mut none, ptr::null_mut());
        assert_ne!(st, FdlabStatus::Ok);
        assert!(none.is_null());
        assert!(!last_error().is_empty());

        fdlab_field_free(v);
        fdlab_field_free(w);
        fdlab_grid_free(g);
    }
}

#[test]
fn field_boundary_is_checked() {
    let g = grid(3, 16);
    unsafe {
        let mut f = ptr::null_mut();
        let ones = vec![1.0; 17];
        assert_eq!(fdlab_field_new(g, ones.as_ptr(), 17, &mut f), FdlabStatus::InvalidArgument);
        let mut vals = ones.clone();
        vals[16] = 0.0;
        assert_eq!(fdlab_field_new(g, vals.as_ptr(), 17, &mut f), FdlabStatus::Ok);
        let mut total = 0.0;
        assert_eq!(fdlab_field_integrate(f, &mut total), FdlabStatus::Ok);
        assert!(total > 0.0);
        fdlab_field_free(f);
        fdlab_grid_free(g);
    }
}

#[test]
fn bubbles_and_fits() {
    unsafe {
        let mut m = 0.0;
        assert_eq!(fdlab_bubble_mass(4, 3.0, &mut m), FdlabStatus::Ok);
        assert!((m - 32.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-8);
        assert_eq!(fdlab_bubble_mass(2, 3.0, &mut m), FdlabStatus::InvalidArgument);

        let (mut i1, mut i2) = (0.0, 0.0);
        assert_eq!(fdlab_interaction(4, 5.0, 5.0, 0.0, &mut i1, &mut i2), FdlabStatus::Ok);
        assert!((i1 / (std::f64::consts::PI.powi(2) / 6.0) - 1.0).abs() < 1e-6);

        let t: Vec<f64> = (0..100).map(|k| 5.0 + 0.1 * k as f64).collect();
        let e: Vec<f64> = t.iter().map(|s| (-0.7 * s).exp()).collect();
        let mut model = FdlabRateModel::Polynomial;
        let mut gamma = 0.0;
        let st = fdlab_fit_rate(t.as_ptr(), e.as_ptr(), t.len(), 0.0, f64::INFINITY, 1.0, &mut model, &mut gamma, ptr::null_mut());
        assert_eq!(st, FdlabStatus::Ok);
        assert_eq!(model, FdlabRateModel::Exponential);
        assert!((gamma - 0.7).abs() < 1e-10);
        let st = fdlab_fit_rate(t.as_ptr(), e.as_ptr(), 3, 0.0, f64::INFINITY, 1.0, &mut model, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, FdlabStatus::Numerical);
    }
}

#[test]
fn header_compiles_as_c_and_cxx() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fdlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["fdlab_grid_new", "fdlab_field_free", "fdlab_fit_bubble", "FdlabStatus_Ok", "typedef struct FdlabGrid FdlabGrid"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).output() else {
            eprintln!("{cc} not available; skipping");
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
