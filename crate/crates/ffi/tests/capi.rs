use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use regmoment_ffi::*;

const CONFIG: &str = "scenario = smooth_1d\nM = 3\nD = 3\nnx = 16\nkn = 0.1\nend_time = 0.05\n";

fn last_error() -> String {
    let p = rm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_solver(text: &str) -> (RmStatus, *mut RmSolver) {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { rm_solver_new(c.as_ptr(), &mut h) };
    (st, h)
}

#[test]
fn solver_lifecycle() {
    let (st, h) = new_solver(CONFIG);
    assert_eq!(st, RmStatus::Ok);
    unsafe {
        assert_eq!(rm_solver_cell_count(h), 16);
        assert_eq!(rm_solver_velocity_dim(h), 3);
        let mut m0 = 0.0;
        let mut e0 = 0.0;
        let mut p0 = [0.0; 3];
        assert_eq!(
            rm_solver_totals(h, &mut m0, p0.as_mut_ptr(), 3, &mut e0),
            RmStatus::Ok
        );

        let mut dt = 0.0;
        assert_eq!(rm_solver_step(h, &mut dt), RmStatus::Ok);
        assert!(dt > 0.0);
        assert_eq!(rm_solver_time(h), dt);
        assert_eq!(rm_solver_run_until(h, 0.05), RmStatus::Ok);
        assert_eq!(rm_solver_time(h), 0.05);

        let mut rho = vec![0.0; 16];
        let mut u = vec![0.0; 48];
        let mut theta = vec![0.0; 16];
        let st = rm_solver_macro_fields(
            h,
            rho.as_mut_ptr(),
            u.as_mut_ptr(),
            theta.as_mut_ptr(),
            ptr::null_mut(),
            16,
        );
        assert_eq!(st, RmStatus::Ok);
        assert!(rho.iter().all(|&r| (1.4..2.6).contains(&r)));
        assert!(theta.iter().all(|&t| t > 0.0));

        let mut m1 = 0.0;
        let mut e1 = 0.0;
        let mut p1 = [0.0; 3];
        assert_eq!(
            rm_solver_totals(h, &mut m1, p1.as_mut_ptr(), 3, &mut e1),
            RmStatus::Ok
        );
        assert!((m1 - m0).abs() < 1e-12 * m0);
        assert!((e1 - e0).abs() < 1e-12 * e0);

        let st = rm_solver_macro_fields(
            h,
            rho.as_mut_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
            4,
        );
        assert_eq!(st, RmStatus::BufferTooSmall);
        rm_solver_free(h);
    }
}

#[test]
fn config_errors_are_reported() {
    let (st, h) = new_solver("scenario = smooth_1d\nM = 2\nregularized = true\n");
    assert_eq!(st, RmStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("M >= 3"), "{}", last_error());

    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { rm_solver_new(ptr::null(), &mut h) },
        RmStatus::NullPointer
    );
    let path = CString::new("/nonexistent/run.cfg").unwrap();
    assert_eq!(
        unsafe { rm_solver_new_from_file(path.as_ptr(), &mut h) },
        RmStatus::Io
    );
    assert_eq!(
        unsafe { rm_solver_step(ptr::null_mut(), ptr::null_mut()) },
        RmStatus::NullPointer
    );
    assert!(unsafe { rm_solver_time(ptr::null()) }.is_nan());
    unsafe { rm_solver_free(ptr::null_mut()) };
}

#[test]
fn roots_and_projection() {
    let mut r = [0.0; 3];
    assert_eq!(
        unsafe { rm_hermite_roots(3, r.as_mut_ptr(), 3) },
        RmStatus::Ok
    );
    let s3 = 3f64.sqrt();
    for (a, b) in r.iter().zip([-s3, 0.0, s3]) {
        assert!((a - b).abs() < 1e-14);
    }
    assert_eq!(
        unsafe { rm_hermite_roots(3, r.as_mut_ptr(), 2) },
        RmStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { rm_hermite_roots(0, r.as_mut_ptr(), 3) },
        RmStatus::InvalidArgument
    );

    // shifted Gaussian: f_k = rho / k!
    assert_eq!(rm_index_count(4, 1), 5);
    let mut c = [0.0; 5];
    c[0] = 2.0;
    let mut out = vec![0.0; 5];
    let st = unsafe {
        rm_project(
            1,
            4,
            [1.0].as_ptr(),
            1.0,
            c.as_ptr(),
            [0.0].as_ptr(),
            1.0,
            4,
            out.as_mut_ptr(),
            5,
        )
    };
    assert_eq!(st, RmStatus::Ok);
    for (k, want) in [2.0, 2.0, 1.0, 1.0 / 3.0, 1.0 / 12.0].iter().enumerate() {
        assert!((out[k] - want).abs() < 1e-12, "{k}: {}", out[k]);
    }
    let st = unsafe {
        rm_project(
            1,
            4,
            [1.0].as_ptr(),
            1.0,
            c.as_ptr(),
            [0.0].as_ptr(),
            -1.0,
            4,
            out.as_mut_ptr(),
            5,
        )
    };
    assert_eq!(st, RmStatus::Unphysical);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/regmoment.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "rm_solver_new",
        "rm_solver_free",
        "rm_solver_step",
        "rm_project",
        "rm_last_error",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
