use std::ffi::CString;
use std::path::Path;
use std::ptr;

use wedgetri_ffi::*;

fn last_error() -> String {
    let needed = unsafe { wt_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; needed];
    unsafe { wt_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn dmat(n: usize, upper: &[f64]) -> *mut WtDistanceMatrix {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { wt_dmat_new(n, upper.as_ptr(), upper.len(), &mut out) }, WtStatus::Ok);
    out
}

fn operator(d: *const WtDistanceMatrix) -> *mut WtOperator {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { wt_operator_from_dmat(d, ptr::null(), &mut out) }, WtStatus::Ok);
    out
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2 * n];
    v[2 * i] = 1.0;
    v
}

#[test]
fn validates_distance_matrices() {
    let good = dmat(3, &[1.0, 1.5, 2.0]);
    let bad = dmat(3, &[1.0, 1.0, 3.0]);
    let mut valid = -1;
    unsafe {
        assert_eq!(wt_dmat_validate(good, &mut valid), WtStatus::Ok);
        assert_eq!(valid, 1);
        assert_eq!(wt_dmat_validate(bad, &mut valid), WtStatus::Ok);
        assert_eq!(valid, 0);
        wt_dmat_free(good);
        wt_dmat_free(bad);
        wt_dmat_free(ptr::null_mut());
    }
}

#[test]
fn reports_errors_through_status_and_message() {
    let mut out = ptr::null_mut();
    let upper = [1.0, 2.0];
    assert_eq!(unsafe { wt_dmat_new(3, upper.as_ptr(), upper.len(), &mut out) }, WtStatus::DimensionMismatch);
    assert!(out.is_null());
    assert!(last_error().contains("dimension mismatch"), "{}", last_error());

    let negative = [1.0, -1.0, 1.0];
    assert_eq!(unsafe { wt_dmat_new(3, negative.as_ptr(), 3, &mut out) }, WtStatus::InvalidArgument);
    assert_eq!(unsafe { wt_dmat_new(3, ptr::null(), 3, &mut out) }, WtStatus::NullPointer);
    assert_eq!(unsafe { wt_mu_closed_form_n3(1.0, 1.0, 1.0, ptr::null_mut()) }, WtStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut v = 0.0;
    assert_eq!(unsafe { wt_mu_closed_form_n3(1.0, 1.0, 1.0, &mut v) }, WtStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn truncates_long_messages() {
    let mut out = ptr::null_mut();
    unsafe { wt_dmat_new(3, [1.0].as_ptr(), 1, &mut out) };
    let full = last_error();
    let mut buf = [0x7f as std::ffi::c_char; 5];
    let needed = unsafe { wt_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(needed, full.len() + 1);
    assert_eq!(buf[4], 0);
    let head: String = buf[..4].iter().map(|&c| c as u8 as char).collect();
    assert_eq!(head, full[..4]);
}

#[test]
fn evaluates_distances_and_deficits() {
    let d = dmat(3, &[1.0, 1.0, 3.0]);
    let q = operator(d);
    assert_eq!(unsafe { wt_operator_dim(q) }, 3);
    let (e1, e2, e3) = (basis(3, 0), basis(3, 1), basis(3, 2));
    let mut v = f64::NAN;
    unsafe {
        assert_eq!(wt_semidistance(q, e2.as_ptr(), e3.as_ptr(), &mut v), WtStatus::Ok);
        assert!((v - 3.0).abs() < 1e-12);
        assert_eq!(wt_hs_distance(e1.as_ptr(), e2.as_ptr(), 3, &mut v), WtStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(wt_deficit(q, e2.as_ptr(), e3.as_ptr(), e1.as_ptr(), &mut v), WtStatus::Ok);
        assert!((v + 1.0).abs() < 1e-12);
        let unnormalized = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(wt_semidistance(q, unnormalized.as_ptr(), e2.as_ptr(), &mut v), WtStatus::InvalidArgument);
        wt_operator_free(q);
        wt_dmat_free(d);
    }
}

#[test]
fn searches_agree_with_the_closed_form() {
    let d = dmat(3, &[1.0, 1.0, 3.0]);
    let q = operator(d);
    let mut mu = 0.0;
    let mut found = 0.0;
    let mut sampled = 0.0;
    let mut xyz = vec![0.0; 18];
    unsafe {
        assert_eq!(wt_mu_closed_form_n3(1.0, 1.0, 3.0, &mut mu), WtStatus::Ok);
        assert_eq!(wt_minimize_deficit(q, 4, 10, &mut found, xyz.as_mut_ptr()), WtStatus::Ok);
        assert_eq!(wt_sample_triples(q, 2000, 4, &mut sampled), WtStatus::Ok);
        assert_eq!(wt_minimize_deficit(q, 4, 0, &mut found, ptr::null_mut()), WtStatus::InvalidArgument);
        assert_eq!(wt_minimize_deficit(q, 4, 10, &mut found, ptr::null_mut()), WtStatus::Ok);
    }
    assert_eq!(mu, -1.0);
    assert!((found - mu).abs() < 1e-6);
    assert!(sampled >= found - 1e-9 && sampled < 0.0);
    let z2: f64 = xyz[12..].chunks(2).skip(1).map(|c| c[0] * c[0] + c[1] * c[1]).sum();
    assert!(z2 < 1e-10, "z should be the first basis vector up to phase");
    unsafe {
        wt_operator_free(q);
        wt_dmat_free(d);
    }
}

#[test]
fn certifies_the_square_l1_operator() {
    let d = dmat(4, &[1.0, 1.0, 2.0, 2.0, 1.0, 1.0]);
    let q = operator(d);
    let mut certified = -1;
    assert_eq!(unsafe { wt_certify_sufficient(q, &mut certified) }, WtStatus::Ok);
    assert_eq!(certified, 1);
    unsafe {
        wt_operator_free(q);
        wt_dmat_free(d);
    }
}

#[test]
fn builds_operators_in_a_rotated_basis_and_from_json() {
    let d = dmat(3, &[1.0, 1.0, 3.0]);
    // Columns (e2, e1, e3): the label d_23 now sits on e1 ∧ e3.
    let swap = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut q = ptr::null_mut();
    let mut v = 0.0;
    let (e1, e3) = (basis(3, 0), basis(3, 2));
    unsafe {
        assert_eq!(wt_operator_from_dmat(d, swap.as_ptr(), &mut q), WtStatus::Ok);
        assert_eq!(wt_semidistance(q, e1.as_ptr(), e3.as_ptr(), &mut v), WtStatus::Ok);
        wt_operator_free(q);
    }
    assert!((v - 3.0).abs() < 1e-12);

    let text = CString::new(r#"{"n":3,"form":"diagonal","dmat":{"n":3,"d":[1,1,3]}}"#).unwrap();
    unsafe {
        assert_eq!(wt_operator_from_json(text.as_ptr(), &mut q), WtStatus::Ok);
        assert_eq!(wt_operator_dim(q), 3);
        wt_operator_free(q);
    }
    let broken = CString::new("{").unwrap();
    assert_eq!(unsafe { wt_operator_from_json(broken.as_ptr(), &mut q) }, WtStatus::ParseError);
    unsafe { wt_dmat_free(d) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wedgetri.h")).unwrap();
    for name in [
        "wt_last_error_message",
        "wt_dmat_new",
        "wt_dmat_validate",
        "wt_dmat_free",
        "wt_operator_from_dmat",
        "wt_operator_from_json",
        "wt_operator_dim",
        "wt_operator_free",
        "wt_hs_distance",
        "wt_semidistance",
        "wt_deficit",
        "wt_certify_sufficient",
        "wt_minimize_deficit",
        "wt_sample_triples",
        "wt_mu_closed_form_n3",
        "WT_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::var_os("CARGO_TARGET_DIR").map_or_else(|| root.join("../../target"), Into::into);
    let lib = target.join("debug/libwedgetri_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let exe = std::env::temp_dir().join(format!("wedgetri_smoke_{}", std::process::id()));
    let status = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(root.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("dimension mismatch"));
}
