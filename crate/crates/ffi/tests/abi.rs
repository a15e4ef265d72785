use std::ffi::{CStr, CString};
use std::ptr;

use nirgas_ffi::*;

fn small_config() -> CString {
    CString::new(r#"{"detuning": {"min": -10.0, "max": 10.0, "count": 3}, "pump_rates": [0.0, 0.01], "phases": 4}"#)
        .unwrap()
}

fn last_error() -> String {
    let p = nirgas_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn default_config_round_trips_through_json() {
    unsafe {
        let cfg = nirgas_config_default();
        let mut text = ptr::null_mut();
        assert_eq!(nirgas_config_to_json(cfg, &mut text), NirgasStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(nirgas_config_from_json(text, &mut back), NirgasStatus::Ok);
        let mut text2 = ptr::null_mut();
        assert_eq!(nirgas_config_to_json(back, &mut text2), NirgasStatus::Ok);
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(text2));
        nirgas_string_free(text);
        nirgas_string_free(text2);
        nirgas_config_free(cfg);
        nirgas_config_free(back);
    }
}

#[test]
fn invalid_config_reports_code_and_message() {
    let bad = CString::new(r#"{"system": {"medium": {"density": -1.0}}}"#).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { nirgas_config_from_json(bad.as_ptr(), &mut cfg) };
    assert_eq!(status, NirgasStatus::InvalidConfig);
    assert!(cfg.is_null());
    assert!(last_error().contains("medium.density"));

    let broken = CString::new("{\n  \"phases\": ,\n}").unwrap();
    let status = unsafe { nirgas_config_from_json(broken.as_ptr(), &mut cfg) };
    assert_eq!(status, NirgasStatus::ParseError);
    assert!(last_error().contains("line 2"));
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(nirgas_config_from_json(ptr::null(), &mut ptr::null_mut()), NirgasStatus::NullPointer);
        assert_eq!(nirgas_run(ptr::null(), 1, &mut ptr::null_mut()), NirgasStatus::NullPointer);
        assert_eq!(nirgas_result_row_count(ptr::null()), 0);
        nirgas_config_free(ptr::null_mut());
        nirgas_result_free(ptr::null_mut());
        nirgas_string_free(ptr::null_mut());
    }
}

#[test]
fn run_exposes_rows_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(nirgas_config_from_json(small_config().as_ptr(), &mut cfg), NirgasStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(nirgas_run(cfg, 1, &mut res), NirgasStatus::Ok, "{}", last_error());
        assert_eq!(nirgas_result_row_count(res), 6);
        assert_eq!(nirgas_result_flagged_count(res), 0);

        let mut row = std::mem::zeroed::<NirgasRow>();
        for i in 0..6 {
            assert_eq!(nirgas_result_row(res, i, &mut row), NirgasStatus::Ok);
            assert!(row.has_values && row.converged);
            assert!(row.n.im > 0.0 || row.pump > 0.0);
            assert_eq!(row.pump, if i < 3 { 0.0 } else { 0.01 });

            let mut n = NirgasComplex::default();
            let status = nirgas_refractive_index(row.eps, row.mu, row.xi_eh, row.xi_he, NirgasPolarization::SigmaMinus, ptr::null(), &mut n);
            assert_eq!(status, NirgasStatus::Ok);
            if row.branch == NirgasBranch::Principal && i < 3 {
                assert!((n.re - row.n.re).abs() <= 1e-12 * row.n.re.abs().max(1.0));
            }
        }
        assert_eq!(nirgas_result_row(res, 6, &mut row), NirgasStatus::OutOfRange);

        let csv = CString::new(dir.path().join("out.csv").to_str().unwrap()).unwrap();
        let json = CString::new(dir.path().join("out.json").to_str().unwrap()).unwrap();
        assert_eq!(nirgas_result_export_csv(res, csv.as_ptr()), NirgasStatus::Ok);
        assert_eq!(nirgas_result_export_json(res, json.as_ptr()), NirgasStatus::Ok);
        let back = nirgas::sweep::read_json(dir.path().join("out.json")).unwrap();
        assert_eq!(back.rows.len(), 6);

        let missing = CString::new(dir.path().join("no/such/dir/x.csv").to_str().unwrap()).unwrap();
        assert_eq!(nirgas_result_export_csv(res, missing.as_ptr()), NirgasStatus::Io);

        nirgas_result_free(res);
        nirgas_config_free(cfg);
    }
}

#[test]
fn refractive_index_follows_previous_root() {
    let eps = NirgasComplex { re: -1.0, im: 0.1 };
    let zero = NirgasComplex::default();
    let mut n = NirgasComplex::default();
    unsafe {
        let s = nirgas_refractive_index(eps, eps, zero, zero, NirgasPolarization::SigmaPlus, ptr::null(), &mut n);
        assert_eq!(s, NirgasStatus::Ok);
        assert!((n.re + 1.0).abs() < 1e-12 && (n.im - 0.1).abs() < 1e-12);
        let prev = NirgasComplex { re: 1.0, im: -0.1 };
        nirgas_refractive_index(eps, eps, zero, zero, NirgasPolarization::SigmaPlus, &prev, &mut n);
        assert!((n.re - 1.0).abs() < 1e-12 && (n.im + 0.1).abs() < 1e-12);

        let bad = NirgasComplex { re: f64::NAN, im: 0.0 };
        let s = nirgas_refractive_index(bad, eps, zero, zero, NirgasPolarization::SigmaPlus, ptr::null(), &mut n);
        assert_eq!(s, NirgasStatus::InvalidConfig);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(nirgas_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
