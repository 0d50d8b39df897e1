//! Cost evaluation, exact gradients and Monte-Carlo gradient statistics.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{run_circuit, run_circuit_into, CircuitSpec, Op, ParamMatrix};
use crate::error::{Error, Result};
use crate::initstrategy::{sample_params, InitStrategy};
use crate::pauli::Observable;
use crate::statevector::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct GradReport {
    pub grad: Vec<f64>,
    pub norm_sq: f64,
    pub cost: f64,
}

impl GradReport {
    fn new(grad: Vec<f64>, cost: f64) -> Self {
        let norm_sq = grad.iter().map(|g| g * g).sum();
        Self { grad, norm_sq, cost }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradEngine {
    #[default]
    Adjoint,
    #[serde(alias = "parameter_shift")]
    Shift,
}

impl GradEngine {
    pub fn name(self) -> &'static str {
        match self {
            GradEngine::Adjoint => "adjoint",
            GradEngine::Shift => "shift",
        }
    }

    /// Parameter shift below 12 qubits, adjoint from there on.
    pub fn default_for(n_qubits: usize) -> Self {
        if n_qubits < 12 {
            GradEngine::Shift
        } else {
            GradEngine::Adjoint
        }
    }
}

impl fmt::Display for GradEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GradEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjoint" => Ok(GradEngine::Adjoint),
            "shift" | "parameter_shift" => Ok(GradEngine::Shift),
            _ => Err(Error::UnknownName {
                what: "gradient engine",
                name: s.to_owned(),
            }),
        }
    }
}

fn check_observable(spec: &CircuitSpec, obs: &Observable) -> Result<()> {
    if obs.n_qubits() != spec.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: spec.n_qubits(),
            actual: obs.n_qubits(),
        });
    }
    Ok(())
}

/// `⟨0|U†(θ) O U(θ)|0⟩`.
pub fn cost(spec: &CircuitSpec, obs: &Observable, params: &ParamMatrix) -> Result<f64> {
    check_observable(spec, obs)?;
    run_circuit(spec, params)?.expectation(obs)
}

pub fn grad_parameter_shift(spec: &CircuitSpec, obs: &Observable, params: &ParamMatrix) -> Result<GradReport> {
    check_observable(spec, obs)?;
    params.check_shape(spec)?;
    let mut state = StateVector::zero(spec.n_qubits())?;
    let mut shifted = params.clone();
    let eval = |p: &ParamMatrix, state: &mut StateVector| -> Result<f64> {
        run_circuit_into(spec, p, state)?;
        state.expectation(obs)
    };
    let f0 = eval(params, &mut state)?;
    let mut grad = Vec::with_capacity(spec.param_count());
    for k in 0..spec.param_count() {
        let base = params.as_slice()[k];
        shifted.as_mut_slice()[k] = base + FRAC_PI_2;
        let plus = eval(&shifted, &mut state)?;
        shifted.as_mut_slice()[k] = base - FRAC_PI_2;
        let minus = eval(&shifted, &mut state)?;
        shifted.as_mut_slice()[k] = base;
        grad.push(0.5 * (plus - minus));
    }
    Ok(GradReport::new(grad, f0))
}

pub fn grad_finite_difference(
    spec: &CircuitSpec,
    obs: &Observable,
    params: &ParamMatrix,
    h: f64,
) -> Result<GradReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    check_observable(spec, obs)?;
    params.check_shape(spec)?;
    let f0 = cost(spec, obs, params)?;
    let mut shifted = params.clone();
    let mut grad = Vec::with_capacity(spec.param_count());
    for k in 0..spec.param_count() {
        let base = params.as_slice()[k];
        shifted.as_mut_slice()[k] = base + h;
        let plus = cost(spec, obs, &shifted)?;
        shifted.as_mut_slice()[k] = base - h;
        let minus = cost(spec, obs, &shifted)?;
        shifted.as_mut_slice()[k] = base;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(GradReport::new(grad, f0))
}

/// Reverse sweep: keeps `|ψ_k⟩` and `|λ_k⟩ = U_{>k}† O U_{>k}|ψ_k⟩` and reads
/// each component off as `Im⟨λ_k|G_k|ψ_k⟩`.
pub fn grad_adjoint(spec: &CircuitSpec, obs: &Observable, params: &ParamMatrix) -> Result<GradReport> {
    check_observable(spec, obs)?;
    let mut psi = run_circuit(spec, params)?;
    let mut lambda = psi.apply_observable(obs)?;
    let cost = psi.inner(&lambda)?.re;
    let theta = params.as_slice();
    let mut grad = vec![0.0; spec.param_count()];
    let ops: Vec<Op<'_>> = spec.ops().collect();
    for op in ops.iter().rev() {
        match *op {
            Op::Entangle(edges) => {
                for &e in edges.iter().rev() {
                    psi.cz(e);
                    lambda.cz(e);
                }
            }
            Op::Rotate { axis, qubit, param } => {
                grad[param] = lambda.generator_overlap(&psi, axis, qubit).im;
                psi.rotate(axis, qubit, -theta[param]);
                lambda.rotate(axis, qubit, -theta[param]);
            }
        }
    }
    Ok(GradReport::new(grad, cost))
}

pub fn gradient(engine: GradEngine, spec: &CircuitSpec, obs: &Observable, params: &ParamMatrix) -> Result<GradReport> {
    match engine {
        GradEngine::Adjoint => grad_adjoint(spec, obs, params),
        GradEngine::Shift => grad_parameter_shift(spec, obs, params),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McStats {
    pub samples: usize,
    pub mean_norm_sq: f64,
    pub stderr_norm_sq: f64,
    pub component_means: Vec<f64>,
    pub component_stderrs: Vec<f64>,
    /// Bessel-corrected sample variance of each component.
    pub component_variances: Vec<f64>,
    pub mean_cost: f64,
}

fn mean_and_var(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Gradient statistics over `n_samples` parameter draws, sample `i` seeded
/// with `base_seed + i`. Runs on the current rayon pool.
pub fn mc_grad_stats(
    spec: &CircuitSpec,
    obs: &Observable,
    strategy: &InitStrategy,
    n_samples: usize,
    base_seed: u64,
    engine: GradEngine,
) -> Result<McStats> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    check_observable(spec, obs)?;
    if !strategy.matches(spec) {
        return Err(Error::ShapeMismatch {
            expected: spec.param_count(),
            actual: strategy.cells().len(),
        });
    }
    // Collected in sample order and reduced sequentially, so the result does
    // not depend on how rayon schedules the samples.
    let reports: Vec<GradReport> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let params = sample_params(strategy, base_seed.wrapping_add(i as u64));
            gradient(engine, spec, obs, &params)
        })
        .collect::<Result<_>>()?;

    let n = n_samples;
    let (mean_norm_sq, var_norm_sq) = mean_and_var(reports.iter().map(|r| r.norm_sq), n);
    let mean_cost = reports.iter().map(|r| r.cost).sum::<f64>() / n as f64;
    let p = spec.param_count();
    let mut component_means = Vec::with_capacity(p);
    let mut component_variances = Vec::with_capacity(p);
    for k in 0..p {
        let (m, v) = mean_and_var(reports.iter().map(|r| r.grad[k]), n);
        component_means.push(m);
        component_variances.push(v);
    }
    let root_n = (n as f64).sqrt();
    Ok(McStats {
        samples: n,
        mean_norm_sq,
        stderr_norm_sq: var_norm_sq.sqrt() / root_n,
        component_stderrs: component_variances.iter().map(|v| v.sqrt() / root_n).collect(),
        component_means,
        component_variances,
        mean_cost,
    })
}

/// [`mc_grad_stats`] on a dedicated pool of `workers` threads.
pub fn mc_grad_stats_with_workers(
    spec: &CircuitSpec,
    obs: &Observable,
    strategy: &InitStrategy,
    n_samples: usize,
    base_seed: u64,
    engine: GradEngine,
    workers: usize,
) -> Result<McStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| mc_grad_stats(spec, obs, strategy, n_samples, base_seed, engine))
}
