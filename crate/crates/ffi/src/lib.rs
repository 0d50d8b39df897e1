//! C ABI over the `gmmvqa` core.
//!
//! Every fallible function returns a [`GmmStatus`] and writes results through
//! out-pointers. On failure a human-readable message is kept per thread and
//! can be read with [`gmm_last_error`]. Panics never cross the boundary; they
//! surface as [`GmmStatus::Panic`].
//!
//! Objects are opaque handles created by `gmm_*_new`-style functions and
//! released with the matching `gmm_*_free`. Enumerated options (gate order,
//! strategy kind, gradient engine) are passed as NUL-terminated names, the
//! same spellings the CLI accepts.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use gmmvqa::ansatz::{build_circuit_spec, CircuitSpec, GateOrder, ParamMatrix};
use gmmvqa::gradient::{cost, gradient, mc_grad_stats_with_workers, GradEngine};
use gmmvqa::harness::{gen_tfim, load_observable_file};
use gmmvqa::initstrategy::{build_strategy, sample_params, InitStrategy, StrategyKind, StrategyOptions};
use gmmvqa::pauli::{Observable, PauliString};
use gmmvqa::theory::{bound_theorem1, bound_theorem2, bound_theorem3, moment_coeffs};
use gmmvqa::Error;

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GmmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    ShapeMismatch = 4,
    Capacity = 5,
    Precondition = 6,
    Io = 7,
    Panic = 8,
}

/// Observable handle.
pub struct GmmObservable(Observable);

/// Circuit shape handle.
pub struct GmmCircuit(CircuitSpec);

/// Initialization strategy handle, tied to the circuit it was built for.
pub struct GmmStrategy(InitStrategy);

#[repr(C)]
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct GmmMoments {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct GmmMcSummary {
    pub samples: usize,
    pub mean_norm_sq: f64,
    pub stderr_norm_sq: f64,
    pub mean_cost: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(GmmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::PauliParse { .. } | Error::UnknownName { .. } | Error::ObservableFile { .. } => GmmStatus::Parse,
            Error::LengthMismatch { .. } | Error::ShapeMismatch { .. } => GmmStatus::ShapeMismatch,
            Error::Capacity { .. } => GmmStatus::Capacity,
            Error::Precondition(_) => GmmStatus::Precondition,
            Error::Io { .. } => GmmStatus::Io,
            _ => GmmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GmmStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GmmStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(GmmStatus::Panic, format!("panic: {msg}")))
    });
    match outcome {
        Ok(()) => GmmStatus::Ok,
        Err(Failure(status, msg)) => {
            set_last_error(msg);
            status
        }
    }
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(GmmStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(null(what)),
        (false, _) => Ok(slice::from_raw_parts(p, len)),
    }
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&mut []),
        (true, _) => Err(null(what)),
        (false, _) => Ok(slice::from_raw_parts_mut(p, len)),
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn params_for(spec: &CircuitSpec, values: &[f64]) -> Result<ParamMatrix, Failure> {
    Ok(ParamMatrix::from_vec(spec, values.to_vec())?)
}

/// Message for the last failed call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gmm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gmm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an observable from `n_terms` coefficients and Pauli words such as
/// `"XZIY"`. Repeated words are merged.
///
/// # Safety
/// `coeffs` and `words` must point to `n_terms` readable elements, each word a
/// valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_observable_new(
    n_qubits: usize,
    coeffs: *const f64,
    words: *const *const c_char,
    n_terms: usize,
    out: *mut *mut GmmObservable,
) -> GmmStatus {
    guard(|| {
        let coeffs = as_slice(coeffs, n_terms, "coeffs")?;
        let words = as_slice(words, n_terms, "words")?;
        let mut terms = Vec::with_capacity(n_terms);
        for (&c, &w) in coeffs.iter().zip(words) {
            terms.push((c, PauliString::parse(as_str(w, "word")?, n_qubits)?));
        }
        let obs = Observable::new(n_qubits, terms)?;
        write(out, Box::into_raw(Box::new(GmmObservable(obs))), "out")
    })
}

/// Open-chain transverse-field Ising observable on `n_qubits` qubits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_observable_tfim(n_qubits: usize, out: *mut *mut GmmObservable) -> GmmStatus {
    guard(|| write(out, Box::into_raw(Box::new(GmmObservable(gen_tfim(n_qubits)?))), "out"))
}

/// Loads a TOML observable file.
///
/// # Safety
/// `path` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_observable_load(path: *const c_char, out: *mut *mut GmmObservable) -> GmmStatus {
    guard(|| {
        let obs = load_observable_file(Path::new(as_str(path, "path")?))?;
        write(out, Box::into_raw(Box::new(GmmObservable(obs))), "out")
    })
}

/// Number of terms, or 0 for NULL.
///
/// # Safety
/// `obs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gmm_observable_len(obs: *const GmmObservable) -> usize {
    obs.as_ref().map_or(0, |o| o.0.len())
}

/// # Safety
/// `obs` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmm_observable_free(obs: *mut GmmObservable) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Circuit of `n_blocks` blocks with entangler preset `"chain"`, `"ring"` or
/// `"none"` and gate order `"RX_RY"`, `"RY_RX"` or `"RX_RY_RX"`.
///
/// # Safety
/// `preset` and `gate_order` must be valid C strings and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_circuit_new(
    n_qubits: usize,
    n_blocks: usize,
    preset: *const c_char,
    gate_order: *const c_char,
    out: *mut *mut GmmCircuit,
) -> GmmStatus {
    guard(|| {
        let order: GateOrder = as_str(gate_order, "gate_order")?.parse()?;
        let spec = build_circuit_spec(n_qubits, n_blocks, as_str(preset, "preset")?, order)?;
        write(out, Box::into_raw(Box::new(GmmCircuit(spec))), "out")
    })
}

/// Number of rotation angles, or 0 for NULL.
///
/// # Safety
/// `circuit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gmm_circuit_param_count(circuit: *const GmmCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.param_count())
}

/// # Safety
/// `circuit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmm_circuit_free(circuit: *mut GmmCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Builds an initialization strategy. `chosen_term < 0` means none, which
/// only the baselines accept. A negative `sigma2` keeps the default variance.
///
/// # Safety
/// `kind` must be a valid C string, `circuit` and `obs` live handles, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_strategy_new(
    kind: *const c_char,
    circuit: *const GmmCircuit,
    obs: *const GmmObservable,
    chosen_term: i64,
    sigma2: f64,
    out: *mut *mut GmmStrategy,
) -> GmmStatus {
    guard(|| {
        let kind: StrategyKind = as_str(kind, "kind")?.parse()?;
        let spec = &as_ref(circuit, "circuit")?.0;
        let obs = &as_ref(obs, "obs")?.0;
        let chosen = usize::try_from(chosen_term).ok();
        let opts = StrategyOptions {
            sigma2_override: (sigma2 >= 0.0).then_some(sigma2),
            ..StrategyOptions::default()
        };
        let st = build_strategy(kind, spec, obs, chosen, &opts)?;
        write(out, Box::into_raw(Box::new(GmmStrategy(st))), "out")
    })
}

/// # Safety
/// `strategy` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmm_strategy_free(strategy: *mut GmmStrategy) {
    if !strategy.is_null() {
        drop(Box::from_raw(strategy));
    }
}

/// Draws one parameter vector into `out[0..len]`; `len` must equal the
/// circuit's parameter count. Deterministic per seed.
///
/// # Safety
/// `strategy` must be a live handle and `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn gmm_sample_params(strategy: *const GmmStrategy, seed: u64, out: *mut f64, len: usize) -> GmmStatus {
    guard(|| {
        let st = &as_ref(strategy, "strategy")?.0;
        let p = sample_params(st, seed);
        let values = p.as_slice();
        if values.len() != len {
            return Err(Error::ShapeMismatch {
                expected: values.len(),
                actual: len,
            }
            .into());
        }
        as_mut_slice(out, len, "out")?.copy_from_slice(values);
        Ok(())
    })
}

/// `⟨ψ(θ)|O|ψ(θ)⟩`.
///
/// # Safety
/// `circuit` and `obs` must be live handles, `params` must point to `len`
/// readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_cost(
    circuit: *const GmmCircuit,
    obs: *const GmmObservable,
    params: *const f64,
    len: usize,
    out: *mut f64,
) -> GmmStatus {
    guard(|| {
        let spec = &as_ref(circuit, "circuit")?.0;
        let p = params_for(spec, as_slice(params, len, "params")?)?;
        write(out, cost(spec, &as_ref(obs, "obs")?.0, &p)?, "out")
    })
}

/// Full gradient into `grad[0..len]` with engine `"adjoint"` or `"shift"`.
/// `norm_sq` may be NULL.
///
/// # Safety
/// `circuit` and `obs` must be live handles; `params` and `grad` must each
/// point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gmm_gradient(
    circuit: *const GmmCircuit,
    obs: *const GmmObservable,
    engine: *const c_char,
    params: *const f64,
    grad: *mut f64,
    len: usize,
    norm_sq: *mut f64,
) -> GmmStatus {
    guard(|| {
        let engine: GradEngine = as_str(engine, "engine")?.parse()?;
        let spec = &as_ref(circuit, "circuit")?.0;
        let p = params_for(spec, as_slice(params, len, "params")?)?;
        let report = gradient(engine, spec, &as_ref(obs, "obs")?.0, &p)?;
        as_mut_slice(grad, len, "grad")?.copy_from_slice(&report.grad);
        if !norm_sq.is_null() {
            norm_sq.write(report.norm_sq);
        }
        Ok(())
    })
}

/// Monte-Carlo gradient statistics; sample `i` uses seed `seed + i`.
/// `workers = 0` uses all cores.
///
/// # Safety
/// All handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_mc_grad_stats(
    circuit: *const GmmCircuit,
    obs: *const GmmObservable,
    strategy: *const GmmStrategy,
    n_samples: usize,
    seed: u64,
    engine: *const c_char,
    workers: usize,
    out: *mut GmmMcSummary,
) -> GmmStatus {
    guard(|| {
        let engine: GradEngine = as_str(engine, "engine")?.parse()?;
        let spec = &as_ref(circuit, "circuit")?.0;
        let obs = &as_ref(obs, "obs")?.0;
        let st = &as_ref(strategy, "strategy")?.0;
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let s = mc_grad_stats_with_workers(spec, obs, st, n_samples, seed, engine, workers)?;
        let summary = GmmMcSummary {
            samples: s.samples,
            mean_norm_sq: s.mean_norm_sq,
            stderr_norm_sq: s.stderr_norm_sq,
            mean_cost: s.mean_cost,
        };
        write(out, summary, "out")
    })
}

/// Gaussian moment coefficients for variance `sigma2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_moment_coeffs(sigma2: f64, out: *mut GmmMoments) -> GmmStatus {
    guard(|| {
        let m = moment_coeffs(sigma2)?;
        let moments = GmmMoments {
            alpha: m.alpha,
            beta: m.beta,
            gamma: m.gamma,
        };
        write(out, moments, "out")
    })
}

/// Single-term gradient-norm bound for `n_blocks` blocks.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_bound_single(n_blocks: usize, out: *mut f64) -> GmmStatus {
    guard(|| write(out, bound_theorem1(n_blocks)?, "out"))
}

/// Bound for `m` equivalent terms.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_bound_equivalent(m: usize, n_blocks: usize, out: *mut f64) -> GmmStatus {
    guard(|| write(out, bound_theorem2(m, n_blocks)?, "out"))
}

/// Bound including cross terms, for observables with non-negative
/// coefficients.
///
/// # Safety
/// `obs` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gmm_bound_cross(
    obs: *const GmmObservable,
    chosen_term: usize,
    n_blocks: usize,
    out: *mut f64,
) -> GmmStatus {
    guard(|| write(out, bound_theorem3(&as_ref(obs, "obs")?.0, chosen_term, n_blocks)?, "out"))
}
