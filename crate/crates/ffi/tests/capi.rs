use std::ffi::{CStr, CString};
use std::ptr;

use gmmvqa_ffi::*;

fn last_error() -> String {
    let p = gmm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn observable(words: &[(&str, f64)], n: usize) -> *mut GmmObservable {
    let owned: Vec<CString> = words.iter().map(|(w, _)| CString::new(*w).unwrap()).collect();
    let ptrs: Vec<_> = owned.iter().map(|s| s.as_ptr()).collect();
    let coeffs: Vec<f64> = words.iter().map(|&(_, c)| c).collect();
    let mut obs = ptr::null_mut();
    let st = unsafe { gmm_observable_new(n, coeffs.as_ptr(), ptrs.as_ptr(), words.len(), &mut obs) };
    assert_eq!(st, GmmStatus::Ok, "{}", last_error());
    obs
}

fn circuit(n: usize, blocks: usize) -> *mut GmmCircuit {
    let (preset, order) = (CString::new("chain").unwrap(), CString::new("RX_RY").unwrap());
    let mut c = ptr::null_mut();
    let st = unsafe { gmm_circuit_new(n, blocks, preset.as_ptr(), order.as_ptr(), &mut c) };
    assert_eq!(st, GmmStatus::Ok, "{}", last_error());
    c
}

#[test]
fn sample_cost_and_gradient() {
    let obs = observable(&[("XYZ", 1.0), ("ZZI", -0.5)], 3);
    let circ = circuit(3, 2);
    let kind = CString::new("table2").unwrap();
    let mut strat = ptr::null_mut();
    unsafe {
        assert_eq!(gmm_observable_len(obs), 2);
        let p = gmm_circuit_param_count(circ);
        assert_eq!(p, 12);
        assert_eq!(gmm_strategy_new(kind.as_ptr(), circ, obs, 0, -1.0, &mut strat), GmmStatus::Ok);

        let mut theta = vec![0.0; p];
        let mut again = vec![0.0; p];
        assert_eq!(gmm_sample_params(strat, 7, theta.as_mut_ptr(), p), GmmStatus::Ok);
        assert_eq!(gmm_sample_params(strat, 7, again.as_mut_ptr(), p), GmmStatus::Ok);
        assert_eq!(theta, again);
        assert_eq!(gmm_sample_params(strat, 7, again.as_mut_ptr(), p - 1), GmmStatus::ShapeMismatch);

        let mut c = f64::NAN;
        assert_eq!(gmm_cost(circ, obs, theta.as_ptr(), p, &mut c), GmmStatus::Ok);
        assert!(c.abs() <= 1.5);

        let (adjoint, shift) = (CString::new("adjoint").unwrap(), CString::new("shift").unwrap());
        let (mut ga, mut gs) = (vec![0.0; p], vec![0.0; p]);
        let mut norm = 0.0;
        assert_eq!(gmm_gradient(circ, obs, adjoint.as_ptr(), theta.as_ptr(), ga.as_mut_ptr(), p, &mut norm), GmmStatus::Ok);
        assert_eq!(gmm_gradient(circ, obs, shift.as_ptr(), theta.as_ptr(), gs.as_mut_ptr(), p, ptr::null_mut()), GmmStatus::Ok);
        for (a, s) in ga.iter().zip(&gs) {
            assert!((a - s).abs() < 1e-10);
        }
        assert!((norm - ga.iter().map(|g| g * g).sum::<f64>()).abs() < 1e-12);

        let (mut one, mut four) = (GmmMcSummary::default(), GmmMcSummary::default());
        assert_eq!(gmm_mc_grad_stats(circ, obs, strat, 16, 3, adjoint.as_ptr(), 1, &mut one), GmmStatus::Ok);
        assert_eq!(gmm_mc_grad_stats(circ, obs, strat, 16, 3, adjoint.as_ptr(), 4, &mut four), GmmStatus::Ok);
        assert_eq!(one, four);
        assert_eq!(one.samples, 16);

        gmm_strategy_free(strat);
        gmm_circuit_free(circ);
        gmm_observable_free(obs);
    }
}

#[test]
fn bounds_and_moments() {
    let obs = observable(&[("ZZ", 1.0), ("ZI", 1.0)], 2);
    unsafe {
        let mut b = 0.0;
        assert_eq!(gmm_bound_single(2, &mut b), GmmStatus::Ok);
        assert_eq!(b, 0.1875);
        assert_eq!(gmm_bound_equivalent(2, 2, &mut b), GmmStatus::Ok);
        assert_eq!(b, 0.375);
        assert_eq!(gmm_bound_cross(obs, 0, 2, &mut b), GmmStatus::Ok);
        assert!((b - 0.71741).abs() < 1e-4);
        assert_eq!(gmm_bound_single(0, &mut b), GmmStatus::InvalidArgument);

        let mut m = GmmMoments::default();
        assert_eq!(gmm_moment_coeffs(0.5, &mut m), GmmStatus::Ok);
        assert!((m.alpha - (1.0 + (-1.0f64).exp()) / 2.0).abs() < 1e-15);
        assert!((m.gamma - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(gmm_moment_coeffs(-1.0, &mut m), GmmStatus::InvalidArgument);
        gmm_observable_free(obs);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut obs = ptr::null_mut();
        assert_eq!(gmm_observable_tfim(4, ptr::null_mut()), GmmStatus::NullPointer);
        assert!(last_error().contains("out"));

        let bad = CString::new("XQ").unwrap();
        let words = [bad.as_ptr()];
        assert_eq!(gmm_observable_new(2, [1.0].as_ptr(), words.as_ptr(), 1, &mut obs), GmmStatus::Parse);
        assert!(obs.is_null());

        let path = CString::new("/nonexistent/obs.toml").unwrap();
        assert_eq!(gmm_observable_load(path.as_ptr(), &mut obs), GmmStatus::Io);

        let (preset, order) = (CString::new("chain").unwrap(), CString::new("RZ").unwrap());
        let mut c = ptr::null_mut();
        assert_eq!(gmm_circuit_new(3, 1, preset.as_ptr(), order.as_ptr(), &mut c), GmmStatus::Parse);
        assert!(last_error().contains("RZ"));
        let order = CString::new("RX_RY").unwrap();
        assert_eq!(gmm_circuit_new(30, 1, preset.as_ptr(), order.as_ptr(), &mut c), GmmStatus::Ok);
        let mut big = ptr::null_mut();
        assert_eq!(gmm_observable_tfim(30, &mut big), GmmStatus::Ok);
        let theta = vec![0.0; gmm_circuit_param_count(c)];
        let mut cost = 0.0;
        assert_eq!(gmm_cost(c, big, theta.as_ptr(), theta.len(), &mut cost), GmmStatus::Capacity);
        assert_eq!(gmm_cost(c, big, theta.as_ptr(), 3, &mut cost), GmmStatus::ShapeMismatch);
        gmm_circuit_free(c);
        gmm_observable_free(big);

        // Table strategies need a chosen term.
        assert_eq!(gmm_observable_tfim(3, &mut obs), GmmStatus::Ok);
        let circ = circuit(3, 1);
        let kind = CString::new("table1").unwrap();
        let mut st = ptr::null_mut();
        assert_ne!(gmm_strategy_new(kind.as_ptr(), circ, obs, -1, -1.0, &mut st), GmmStatus::Ok);
        assert_eq!(gmm_strategy_new(kind.as_ptr(), ptr::null(), obs, 0, -1.0, &mut st), GmmStatus::NullPointer);

        assert_eq!(gmm_observable_len(ptr::null()), 0);
        gmm_observable_free(ptr::null_mut());
        gmm_circuit_free(circ);
        gmm_observable_free(obs);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(gmm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gmmvqa.h")).unwrap();
    for name in [
        "gmm_last_error",
        "gmm_observable_new",
        "gmm_circuit_new",
        "gmm_strategy_new",
        "gmm_sample_params",
        "gmm_cost",
        "gmm_gradient",
        "gmm_mc_grad_stats",
        "gmm_moment_coeffs",
        "gmm_bound_cross",
        "GMM_STATUS_PANIC",
        "typedef struct GmmObservable GmmObservable",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
