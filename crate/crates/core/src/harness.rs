//! Configuration, Hamiltonian generation, observable files and the experiment
//! drivers behind the CLI.
//!
//! All randomness comes from the single `seed` of a [`RunConfig`]. Derived
//! streams use fixed offsets:
//!
//! | stream                         | seed                            |
//! |--------------------------------|---------------------------------|
//! | Monte-Carlo sample `i`         | `seed + i`                      |
//! | generated observable           | `seed + OBSERVABLE_SEED_OFFSET` |
//! | random chosen term             | `seed + TERM_SEED_OFFSET`       |
//! | training initial parameters    | `seed + TRAIN_SEED_OFFSET`      |
//! | verify suite instances         | `seed + VERIFY_SEED_OFFSET + k` |

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_circuit_spec, detect_inactive, CircuitSpec, Entangler, GateOrder, ParamMatrix};
use crate::error::{Error, Result};
use crate::gradient::{
    grad_adjoint, grad_finite_difference, grad_parameter_shift, gradient, mc_grad_stats,
    mc_grad_stats_with_workers, GradEngine, McStats,
};
use crate::initstrategy::{
    build_strategy, count_equivalent_terms, sample_params, InitStrategy, StrategyKind, StrategyOptions,
    ZVariant, DEFAULT_REDUCED_DOMAIN_A,
};
use crate::pauli::{CzTable, Observable, Pauli, PauliString};
use crate::statevector::{exact_ground_energy, StateVector, MAX_DENSE_QUBITS};
use crate::theory::{
    bound_theorem1, bound_theorem2, bound_theorem3, gaussian_expectation, lemma_cases, moment_coeffs,
    verify_lemma_identity,
};

pub const OBSERVABLE_SEED_OFFSET: u64 = 0x1000_0000;
pub const TERM_SEED_OFFSET: u64 = 0x2000_0000;
pub const TRAIN_SEED_OFFSET: u64 = 0x3000_0000;
pub const VERIFY_SEED_OFFSET: u64 = 0x4000_0000;

pub const GRADSCAN_HEADER: &str = "n_qubits,n_blocks,strategy,n_samples,mean_norm_sq,stderr_norm_sq,theorem_bound";
pub const TRAIN_HEADER: &str = "iter,cost,grad_norm_sq";

/// Which term the table strategies are built from: a 0-based index, or
/// `"random"` for a seeded uniform pick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermChoice {
    Index(usize),
    Named(String),
}

impl Default for TermChoice {
    fn default() -> Self {
        TermChoice::Index(0)
    }
}

impl TermChoice {
    pub fn resolve(&self, obs: &Observable, seed: u64) -> Result<usize> {
        match self {
            TermChoice::Index(k) => {
                obs.term(*k)?;
                Ok(*k)
            }
            TermChoice::Named(name) if name == "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(TERM_SEED_OFFSET));
                Ok(rng.random_range(0..obs.len()))
            }
            TermChoice::Named(name) => Err(Error::Config(format!(
                "chosen_term must be an index or \"random\", got {name:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub chosen_term: TermChoice,
    pub sigma2: Option<f64>,
    pub z_variant: ZVariant,
    pub a: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Table1,
            chosen_term: TermChoice::default(),
            sigma2: None,
            z_variant: ZVariant::Centered,
            a: DEFAULT_REDUCED_DOMAIN_A,
        }
    }
}

impl StrategyConfig {
    pub fn options(&self) -> StrategyOptions {
        StrategyOptions {
            sigma2_override: self.sigma2,
            z_variant: self.z_variant,
            reduced_domain_a: self.a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: f64,
    pub pauli: String,
}

/// Exactly one of `generator`, `file` or `terms` is used; `generator`
/// defaults to `"tfim"` when none is given.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableConfig {
    /// `tfim`, `global_x`, `global_y`, `global_z`, `random_global` or
    /// `random_ensemble`.
    pub generator: Option<String>,
    pub file: Option<PathBuf>,
    pub terms: Vec<TermRecord>,
    /// Plus and minus term counts for `random_ensemble`.
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Gd,
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub max_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::Gd,
            learning_rate: 0.01,
            max_iters: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradscanConfig {
    /// Qubit counts to sweep; empty means just `n_qubits`.
    pub qubit_counts: Vec<usize>,
    pub strategies: Vec<StrategyKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_qubits: usize,
    pub n_blocks: usize,
    pub entangler: String,
    /// Explicit CZ edges: one list for all blocks or one per block. Overrides
    /// `entangler` when present.
    pub edges: Option<Vec<Vec<(usize, usize)>>>,
    pub gate_order: GateOrder,
    pub seed: u64,
    pub n_samples: usize,
    /// Defaults to parameter shift below 12 qubits and adjoint above for
    /// scans, and to adjoint for training.
    pub engine: Option<GradEngine>,
    /// Worker threads for Monte-Carlo sampling; unset uses all cores.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub strategy: StrategyConfig,
    pub observable: ObservableConfig,
    pub train: TrainConfig,
    pub gradscan: GradscanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            n_blocks: 2,
            entangler: "chain".into(),
            edges: None,
            gate_order: GateOrder::RxRy,
            seed: 0,
            n_samples: 200,
            engine: None,
            workers: None,
            out: None,
            strategy: StrategyConfig::default(),
            observable: ObservableConfig::default(),
            train: TrainConfig::default(),
            gradscan: GradscanConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file. A relative observable path is
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.observable.file, path.parent()) {
            if file.is_relative() {
                cfg.observable.file = Some(dir.join(file));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_qubits == 0 {
            return bad("n_qubits must be ≥ 1".into());
        }
        if self.n_blocks == 0 {
            return bad("n_blocks must be ≥ 1".into());
        }
        if self.gradscan.qubit_counts.contains(&0) {
            return bad("gradscan.qubit_counts entries must be ≥ 1".into());
        }
        let lr = self.train.learning_rate;
        if !(lr.is_finite() && lr >= 0.0) {
            return bad(format!("train.learning_rate {lr} must be finite and ≥ 0"));
        }
        if let Some(v) = self.strategy.sigma2 {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("strategy.sigma2 {v} must be finite and ≥ 0"));
            }
        }
        if !(self.strategy.a.is_finite() && self.strategy.a > 0.0) {
            return bad(format!("strategy.a {} must be positive", self.strategy.a));
        }
        if self.edges.is_none() {
            Entangler::from_preset(&self.entangler)?;
        }
        let o = &self.observable;
        let sources = o.generator.is_some() as usize + o.file.is_some() as usize + (!o.terms.is_empty()) as usize;
        if sources > 1 {
            return bad("observable: give only one of generator, file or terms".into());
        }
        if let Some(file) = &o.file {
            if !file.is_file() {
                return bad(format!("observable file {} does not exist", file.display()));
            }
        }
        Ok(())
    }

    pub fn entangler(&self) -> Result<Entangler> {
        match &self.edges {
            Some(lists) => Ok(Entangler::Explicit(lists.clone())),
            None => Entangler::from_preset(&self.entangler),
        }
    }

    pub fn circuit(&self, n_qubits: usize) -> Result<CircuitSpec> {
        CircuitSpec::new(n_qubits, self.n_blocks, self.entangler()?, self.gate_order)
    }

    /// The configured observable on `n_qubits` qubits.
    pub fn observable(&self, n_qubits: usize) -> Result<Observable> {
        let o = &self.observable;
        let obs = if let Some(file) = &o.file {
            load_observable_file(file)?
        } else if !o.terms.is_empty() {
            let terms = o
                .terms
                .iter()
                .map(|t| Ok((t.coeff, PauliString::parse(&t.pauli, n_qubits)?)))
                .collect::<Result<Vec<_>>>()?;
            Observable::new(n_qubits, terms)?
        } else {
            let name = o.generator.as_deref().unwrap_or("tfim");
            let seed = self.seed.wrapping_add(OBSERVABLE_SEED_OFFSET);
            generate_observable(name, n_qubits, o.n_plus, o.n_minus, seed)?
        };
        if obs.n_qubits() != n_qubits {
            return Err(Error::Config(format!(
                "observable acts on {} qubits but the circuit has {n_qubits}",
                obs.n_qubits()
            )));
        }
        Ok(obs)
    }

    pub fn qubit_counts(&self) -> Vec<usize> {
        if self.gradscan.qubit_counts.is_empty() {
            vec![self.n_qubits]
        } else {
            self.gradscan.qubit_counts.clone()
        }
    }
}

fn generate_observable(
    name: &str,
    n_qubits: usize,
    n_plus: Option<usize>,
    n_minus: Option<usize>,
    seed: u64,
) -> Result<Observable> {
    let global = |p: Pauli| Observable::single(1.0, PauliString::new(vec![p; n_qubits]));
    match name {
        "tfim" => gen_tfim(n_qubits),
        "global_x" => global(Pauli::X),
        "global_y" => global(Pauli::Y),
        "global_z" => global(Pauli::Z),
        "random_global" => gen_random_global_ensemble(n_qubits, 1, 0, seed),
        "random_ensemble" => {
            gen_random_global_ensemble(n_qubits, n_plus.unwrap_or(10), n_minus.unwrap_or(10), seed)
        }
        _ => Err(Error::UnknownName {
            what: "observable generator",
            name: name.to_owned(),
        }),
    }
}

/// Open-chain transverse-field Ising model `Σ Z_i Z_{i+1} − Σ X_i`.
pub fn gen_tfim(n_qubits: usize) -> Result<Observable> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("TFIM needs at least one qubit".into()));
    }
    let mut terms = Vec::with_capacity(2 * n_qubits - 1);
    for i in 0..n_qubits - 1 {
        let mut w = vec![Pauli::I; n_qubits];
        w[i] = Pauli::Z;
        w[i + 1] = Pauli::Z;
        terms.push((1.0, PauliString::new(w)));
    }
    for i in 0..n_qubits {
        let mut w = vec![Pauli::I; n_qubits];
        w[i] = Pauli::X;
        terms.push((-1.0, PauliString::new(w)));
    }
    Observable::new(n_qubits, terms)
}

/// `n_plus` terms with coefficient `+1` followed by `n_minus` with `−1`, each a
/// distinct word drawn uniformly from `{X, Y, Z}^N`.
pub fn gen_random_global_ensemble(n_qubits: usize, n_plus: usize, n_minus: usize, seed: u64) -> Result<Observable> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one qubit".into()));
    }
    let wanted = n_plus + n_minus;
    let available = 3u64.checked_pow(n_qubits as u32).unwrap_or(u64::MAX);
    if wanted as u64 > available {
        return Err(Error::InvalidArgument(format!(
            "{wanted} distinct global words requested but only {available} exist on {n_qubits} qubits"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(wanted);
    let mut terms = Vec::with_capacity(wanted);
    while terms.len() < wanted {
        let word: Vec<Pauli> = (0..n_qubits)
            .map(|_| [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)])
            .collect();
        if !seen.insert(word.clone()) {
            continue;
        }
        let coeff = if terms.len() < n_plus { 1.0 } else { -1.0 };
        terms.push((coeff, PauliString::new(word)));
    }
    Observable::new(n_qubits, terms)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableFile {
    n_qubits: usize,
    #[serde(default)]
    terms: Vec<TermRecord>,
}

/// Reads a TOML observable file:
///
/// ```toml
/// n_qubits = 2
///
/// [[terms]]
/// coeff = 1.0
/// pauli = "ZZ"
/// ```
///
/// Repeated words are merged by summing their coefficients.
pub fn load_observable_file(path: &Path) -> Result<Observable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |reason: String| Error::ObservableFile {
        path: path.to_owned(),
        reason,
    };
    let file: ObservableFile = toml::from_str(&text).map_err(|e| malformed(e.message().to_owned()))?;
    if file.n_qubits == 0 {
        return Err(malformed("n_qubits must be ≥ 1".into()));
    }
    let mut terms = Vec::with_capacity(file.terms.len());
    for (k, t) in file.terms.iter().enumerate() {
        let s = PauliString::parse(&t.pauli, file.n_qubits)
            .map_err(|e| malformed(format!("term {}: {e}", k + 1)))?;
        terms.push((t.coeff, s));
    }
    Observable::new(file.n_qubits, terms).map_err(|e| malformed(e.to_string()))
}

pub fn observable_to_toml(obs: &Observable) -> String {
    let file = ObservableFile {
        n_qubits: obs.n_qubits(),
        terms: obs
            .terms()
            .iter()
            .map(|t| TermRecord {
                coeff: t.coeff,
                pauli: t.string.word_string(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("observable file serializes")
}

pub fn save_observable_file(path: &Path, obs: &Observable) -> Result<()> {
    fs::write(path, observable_to_toml(obs)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradscanRow {
    pub n_qubits: usize,
    pub n_blocks: usize,
    pub strategy: StrategyKind,
    pub stats: McStats,
    pub theorem_bound: Option<f64>,
}

/// Bound that applies to `kind` for this observable, if any.
pub fn applicable_bound(kind: StrategyKind, obs: &Observable, chosen: usize, n_blocks: usize) -> Result<Option<f64>> {
    Ok(match kind {
        StrategyKind::Table1 if obs.len() == 1 => Some(bound_theorem1(n_blocks)?),
        StrategyKind::Table2 => Some(bound_theorem2(count_equivalent_terms(obs, chosen)?.0, n_blocks)?),
        StrategyKind::Table3 => Some(bound_theorem3(obs, chosen, n_blocks)?),
        _ => None,
    })
}

pub fn run_mc(cfg: &RunConfig, spec: &CircuitSpec, obs: &Observable, strategy: &InitStrategy) -> Result<McStats> {
    let engine = cfg.engine.unwrap_or_else(|| GradEngine::default_for(spec.n_qubits()));
    match cfg.workers {
        Some(w) => mc_grad_stats_with_workers(spec, obs, strategy, cfg.n_samples, cfg.seed, engine, w),
        None => mc_grad_stats(spec, obs, strategy, cfg.n_samples, cfg.seed, engine),
    }
}

/// One Monte-Carlo gradient-norm estimate per (qubit count, strategy).
pub fn cmd_gradscan(cfg: &RunConfig) -> Result<Vec<GradscanRow>> {
    cfg.validate()?;
    if cfg.gradscan.strategies.is_empty() {
        return Err(Error::Config("gradscan.strategies is empty".into()));
    }
    let mut rows = Vec::new();
    for n in cfg.qubit_counts() {
        let spec = cfg.circuit(n)?;
        let obs = cfg.observable(n)?;
        let chosen = cfg.strategy.chosen_term.resolve(&obs, cfg.seed)?;
        for &kind in &cfg.gradscan.strategies {
            let strategy = build_strategy(kind, &spec, &obs, Some(chosen), &cfg.strategy.options())?;
            let stats = run_mc(cfg, &spec, &obs, &strategy)?;
            rows.push(GradscanRow {
                n_qubits: n,
                n_blocks: cfg.n_blocks,
                strategy: kind,
                stats,
                theorem_bound: applicable_bound(kind, &obs, chosen, cfg.n_blocks)?,
            });
        }
    }
    Ok(rows)
}

pub fn gradscan_csv(rows: &[GradscanRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{GRADSCAN_HEADER}").unwrap();
    for r in rows {
        let bound = r.theorem_bound.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n_qubits, r.n_blocks, r.strategy, r.stats.samples, r.stats.mean_norm_sq, r.stats.stderr_norm_sq, bound
        )
        .unwrap();
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrainRecord {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm_sq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub trace: Vec<TrainRecord>,
    pub final_params: ParamMatrix,
    pub final_cost: f64,
    /// Present when the register is small enough to diagonalize.
    pub ground_energy: Option<f64>,
}

impl TrainSummary {
    pub fn relative_error(&self) -> Option<f64> {
        self.ground_energy.map(|e| (self.final_cost - e).abs() / e.abs())
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TRAIN_HEADER}").unwrap();
        for r in &self.trace {
            writeln!(out, "{},{},{}", r.iter, r.cost, r.grad_norm_sq).unwrap();
        }
        out
    }
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "final cost {:.8} after {} iterations", self.final_cost, self.trace.len() - 1)?;
        if let (Some(e), Some(rel)) = (self.ground_energy, self.relative_error()) {
            write!(f, "; ground energy {e:.8}, relative error {rel:.3e}")?;
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for k in 0..theta.len() {
            self.m[k] = Self::BETA1 * self.m[k] + (1.0 - Self::BETA1) * grad[k];
            self.v[k] = Self::BETA2 * self.v[k] + (1.0 - Self::BETA2) * grad[k] * grad[k];
            theta[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Minimizes the cost from parameters drawn with the configured strategy.
/// The trace holds `max_iters + 1` records: one per update plus the final
/// point.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let spec = cfg.circuit(cfg.n_qubits)?;
    let obs = cfg.observable(cfg.n_qubits)?;
    let chosen = cfg.strategy.chosen_term.resolve(&obs, cfg.seed)?;
    let strategy = build_strategy(cfg.strategy.kind, &spec, &obs, Some(chosen), &cfg.strategy.options())?;
    let mut params = sample_params(&strategy, cfg.seed.wrapping_add(TRAIN_SEED_OFFSET));
    train_from(cfg, &spec, &obs, &mut params)
}

/// The optimization loop of [`cmd_train`] from explicit starting parameters.
pub fn train_from(cfg: &RunConfig, spec: &CircuitSpec, obs: &Observable, params: &mut ParamMatrix) -> Result<TrainSummary> {
    let engine = cfg.engine.unwrap_or(GradEngine::Adjoint);
    let lr = cfg.train.learning_rate;
    let mut adam = Adam::new(spec.param_count());
    let mut trace = Vec::with_capacity(cfg.train.max_iters + 1);
    for iter in 0..=cfg.train.max_iters {
        let report = gradient(engine, spec, obs, params)?;
        if !report.cost.is_finite() || !report.norm_sq.is_finite() {
            return Err(Error::Diverged { iter, cost: report.cost });
        }
        trace.push(TrainRecord {
            iter,
            cost: report.cost,
            grad_norm_sq: report.norm_sq,
        });
        if iter == cfg.train.max_iters {
            break;
        }
        let theta = params.as_mut_slice();
        match cfg.train.optimizer {
            Optimizer::Gd => theta.iter_mut().zip(&report.grad).for_each(|(t, g)| *t -= lr * g),
            Optimizer::Adam => adam.step(theta, &report.grad, lr),
        }
    }
    let ground_energy = if obs.n_qubits() <= MAX_DENSE_QUBITS {
        Some(exact_ground_energy(obs)?)
    } else {
        None
    };
    Ok(TrainSummary {
        final_cost: trace.last().expect("at least one record").cost,
        trace,
        final_params: params.clone(),
        ground_energy,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n_blocks: usize,
    pub chosen_term: usize,
    pub equivalent_terms: usize,
    pub theorem1: f64,
    pub theorem2: f64,
    /// Only for observables with non-negative coefficients.
    pub theorem3: Option<f64>,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "blocks            {}", self.n_blocks)?;
        writeln!(f, "chosen term       {}", self.chosen_term)?;
        writeln!(f, "equivalent terms  {}", self.equivalent_terms)?;
        writeln!(f, "single-term bound {}", self.theorem1)?;
        writeln!(f, "equivalence bound {}", self.theorem2)?;
        match self.theorem3 {
            Some(b) => writeln!(f, "cross-term bound  {b}"),
            None => writeln!(f, "cross-term bound  n/a (negative coefficients)"),
        }
    }
}

pub fn cmd_bound(cfg: &RunConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let obs = cfg.observable(cfg.n_qubits)?;
    let chosen = cfg.strategy.chosen_term.resolve(&obs, cfg.seed)?;
    let (m, _) = count_equivalent_terms(&obs, chosen)?;
    let theorem3 = if obs.all_nonnegative() {
        Some(bound_theorem3(&obs, chosen, cfg.n_blocks)?)
    } else {
        None
    };
    Ok(BoundReport {
        n_blocks: cfg.n_blocks,
        chosen_term: chosen,
        equivalent_terms: m,
        theorem1: bound_theorem1(cfg.n_blocks)?,
        theorem2: bound_theorem2(m, cfg.n_blocks)?,
        theorem3,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per identity and variance.
    pub trials: usize,
    pub sigma2s: Vec<f64>,
    /// Random circuits for the gradient cross-checks.
    pub gradient_instances: usize,
    pub cz_table: CzTable,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 50,
            sigma2s: vec![0.01, 0.1, 0.5],
            gradient_instances: 20,
            cz_table: CzTable::standard(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: impl Into<String>, discrepancy: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            discrepancy,
            tolerance,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{status}  {:<width$}  {:.3e}  (tol {:.0e})", c.name, c.discrepancy, c.tolerance)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn random_params(spec: &CircuitSpec, rng: &mut impl Rng) -> ParamMatrix {
    let v = (0..spec.param_count())
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    ParamMatrix::from_vec(spec, v).expect("length matches")
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(amps).expect("power of two");
    s.normalize();
    s
}

fn random_word(n: usize, rng: &mut impl Rng) -> PauliString {
    PauliString::new((0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect())
}

fn random_observable(n: usize, rng: &mut impl Rng) -> Observable {
    let terms: Vec<_> = (0..rng.random_range(1..4))
        .map(|_| (rng.random_range(-1.0..1.0), random_word(n, rng)))
        .collect();
    Observable::new(n, terms).expect("finite coefficients")
}

/// Runs the conformance suite. Check names are stable.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(VERIFY_SEED_OFFSET));

    report.push("cz/table_vs_matrix", opts.cz_table.mismatches().len() as f64, 0.0);

    // Conjugated strings must reproduce ⟨CZψ|P|CZψ⟩ on random states.
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=4);
        let p = random_word(n, &mut rng);
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        let psi = random_state(n, &mut rng);
        let q = opts.cz_table.conjugate(&p, (a, b))?;
        let mut phi = psi.clone();
        phi.apply_cz((a, b))?;
        worst = worst.max((psi.expectation_pauli(&q)? - phi.expectation_pauli(&p)?).abs());
    }
    report.push("cz/conjugation_vs_statevector", worst, 1e-12);

    for case in lemma_cases() {
        let mut worst: f64 = 0.0;
        for (i, &sigma2) in opts.sigma2s.iter().enumerate() {
            for t in 0..opts.trials {
                let seed = opts.seed.wrapping_add(((i * opts.trials + t) as u64) << 8);
                worst = worst.max(verify_lemma_identity(&case.to_string(), sigma2, seed)?.discrepancy);
            }
        }
        report.push(format!("identity/{case}"), worst, 1e-8);
    }

    let mut worst: f64 = 0.0;
    let mut taylor: f64 = 0.0;
    for k in 1..=10 {
        let v = 0.1 * k as f64;
        let m = moment_coeffs(v)?;
        worst = worst
            .max((gaussian_expectation(0.0, v, f64::cos) - m.gamma).abs())
            .max((gaussian_expectation(0.0, v, |t| t.cos().powi(2)) - m.alpha).abs())
            .max((gaussian_expectation(0.0, v, |t| t.sin().powi(2)) - m.beta).abs());
        taylor = taylor.max(1.0 - v - m.alpha).max(v * (1.0 - v) - m.beta);
    }
    report.push("moments/quadrature", worst, 1e-10);
    report.push("moments/taylor_bounds", taylor.max(0.0), 0.0);

    let (mut vs_adjoint, mut vs_fd): (f64, f64) = (0.0, 0.0);
    for k in 0..opts.gradient_instances {
        let n = 1 + k % 6;
        let order = [GateOrder::RxRy, GateOrder::RyRx, GateOrder::RxRyRx][k % 3];
        let spec = build_circuit_spec(n, 1 + k % 4, "chain", order)?;
        let obs = random_observable(n, &mut rng);
        let p = random_params(&spec, &mut rng);
        let shift = grad_parameter_shift(&spec, &obs, &p)?;
        let adj = grad_adjoint(&spec, &obs, &p)?;
        let fd = grad_finite_difference(&spec, &obs, &p, 1e-5)?;
        for i in 0..spec.param_count() {
            vs_adjoint = vs_adjoint.max((shift.grad[i] - adj.grad[i]).abs());
            vs_fd = vs_fd.max((shift.grad[i] - fd.grad[i]).abs());
        }
    }
    report.push("gradient/shift_vs_adjoint", vs_adjoint, 1e-10);
    report.push("gradient/shift_vs_finite_difference", vs_fd, 1e-6);

    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let spec = build_circuit_spec(n, 2, "chain", GateOrder::RxRy)?;
        let obs = Observable::single(1.0, PauliString::new(vec![Pauli::Y; n]))?;
        let inactive = detect_inactive(&spec, &obs)?;
        for _ in 0..5 {
            let g = grad_adjoint(&spec, &obs, &random_params(&spec, &mut rng))?;
            for &(layer, q) in &inactive {
                worst = worst.max(g.grad[spec.flat_index(layer, q)?].abs());
            }
        }
    }
    report.push("inactive/zero_gradient", worst, 1e-12);

    let obs = Observable::from_words(2, &[(1.0, "ZZ"), (1.0, "ZI")])?;
    let expected = 0.375 + 0.75 * (7.0f64 / 8.0).powi(4) * (-0.25f64).exp();
    report.push("bound/cross_term_example", (bound_theorem3(&obs, 0, 2)? - expected).abs(), 1e-12);

    Ok(report)
}

pub fn cmd_tfim_gen(n_qubits: usize) -> Result<String> {
    Ok(observable_to_toml(&gen_tfim(n_qubits)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_examples() {
        let obs = gen_tfim(3).unwrap();
        let words: Vec<(f64, String)> = obs.terms().iter().map(|t| (t.coeff, t.string.word_string())).collect();
        let expected = [(1.0, "ZZI"), (1.0, "IZZ"), (-1.0, "XII"), (-1.0, "IXI"), (-1.0, "IIX")];
        assert_eq!(words.len(), 5);
        for ((c, w), (ec, ew)) in words.iter().zip(expected) {
            assert_eq!((*c, w.as_str()), (ec, ew));
        }
        let one = gen_tfim(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.terms()[0].coeff, -1.0);
        let e = exact_ground_energy(&gen_tfim(2).unwrap()).unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-12);
        assert!(gen_tfim(0).is_err());
    }

    #[test]
    fn random_ensemble() {
        let obs = gen_random_global_ensemble(10, 10, 10, 3).unwrap();
        assert_eq!(obs.len(), 20);
        assert!(obs.terms().iter().all(|t| t.string.support_size() == 10));
        assert_eq!(obs.terms().iter().filter(|t| t.coeff == 1.0).count(), 10);
        assert_eq!(obs, gen_random_global_ensemble(10, 10, 10, 3).unwrap());
        assert_ne!(obs, gen_random_global_ensemble(10, 10, 10, 4).unwrap());
        let one = gen_random_global_ensemble(4, 1, 0, 9).unwrap();
        assert_eq!((one.len(), one.terms()[0].coeff), (1, 1.0));
        // All 9 words on two qubits, then one too many.
        assert_eq!(gen_random_global_ensemble(2, 5, 4, 1).unwrap().len(), 9);
        assert!(gen_random_global_ensemble(2, 5, 5, 1).is_err());
    }

    #[test]
    fn observable_toml_round_trip() {
        let obs = gen_tfim(4).unwrap();
        let text = observable_to_toml(&obs);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tfim.toml");
        fs::write(&path, &text).unwrap();
        assert_eq!(load_observable_file(&path).unwrap(), obs);
    }

    #[test]
    fn observable_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "n_qubits = 2\n[[terms]]\ncoeff = 1.0\npauli = \"ZZZ\"\n").unwrap();
        assert!(matches!(load_observable_file(&path), Err(Error::ObservableFile { .. })));
        fs::write(&path, "n_qubits = 2\n[[terms]]\ncoeff = \"x\"\npauli = \"ZZ\"\n").unwrap();
        assert!(matches!(load_observable_file(&path), Err(Error::ObservableFile { .. })));
        fs::write(
            &path,
            "n_qubits = 2\n[[terms]]\ncoeff = 1.0\npauli = \"ZZ\"\n[[terms]]\ncoeff = 0.5\npauli = \"ZZ\"\n",
        )
        .unwrap();
        let obs = load_observable_file(&path).unwrap();
        assert_eq!((obs.len(), obs.terms()[0].coeff), (1, 1.5));
        assert!(matches!(
            load_observable_file(&dir.path().join("missing.toml")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_toml(
            r#"
            n_qubits = 3
            n_blocks = 2
            gate_order = "RY_RX"
            seed = 5

            [strategy]
            kind = "linear_combination"
            chosen_term = "random"

            [observable]
            terms = [{ coeff = 1.0, pauli = "XYZ" }, { coeff = -2.0, pauli = "ZZI" }]
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.gate_order, GateOrder::RyRx);
        assert_eq!(cfg.strategy.kind, StrategyKind::Table2);
        let obs = cfg.observable(3).unwrap();
        assert_eq!(obs.len(), 2);
        let k = cfg.strategy.chosen_term.resolve(&obs, cfg.seed).unwrap();
        assert!(k < 2);
        assert_eq!(k, cfg.strategy.chosen_term.resolve(&obs, cfg.seed).unwrap());

        assert!(RunConfig::from_toml("n_qubits = 3\nbogus = 1\n").is_err());
        let cfg = RunConfig::from_toml("[observable]\ngenerator = \"tfim\"\nfile = \"x.toml\"\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_toml("[strategy]\nchosen_term = \"first\"\n").unwrap();
        assert!(cfg.strategy.chosen_term.resolve(&gen_tfim(2).unwrap(), 0).is_err());
        let cfg = RunConfig::from_toml("[observable]\ngenerator = \"lih\"\n").unwrap();
        assert!(matches!(cfg.observable(2), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn gradscan_rows_and_bounds() {
        let mut cfg = RunConfig {
            n_blocks: 2,
            n_samples: 8,
            seed: 3,
            ..Default::default()
        };
        cfg.observable.generator = Some("random_ensemble".into());
        cfg.observable.n_plus = Some(3);
        cfg.observable.n_minus = Some(3);
        cfg.strategy.chosen_term = TermChoice::Named("random".into());
        cfg.gradscan.qubit_counts = vec![3, 4];
        cfg.gradscan.strategies = vec![
            StrategyKind::Table2,
            StrategyKind::GaussianBaseline,
            StrategyKind::Uniform,
            StrategyKind::ReducedDomain,
        ];
        let rows = cmd_gradscan(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        for r in &rows {
            match r.strategy {
                StrategyKind::Table2 => assert!(r.theorem_bound.unwrap() >= 0.1875),
                _ => assert_eq!(r.theorem_bound, None),
            }
        }
        let csv = gradscan_csv(&rows);
        assert!(csv.starts_with(&format!("{GRADSCAN_HEADER}\n")));
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.lines().nth(2).unwrap().ends_with(','));

        cfg.gradscan.strategies.clear();
        assert!(matches!(cmd_gradscan(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn training_with_zero_rate_is_constant() {
        let mut cfg = RunConfig {
            n_qubits: 3,
            ..Default::default()
        };
        cfg.train.learning_rate = 0.0;
        cfg.train.max_iters = 5;
        let s = cmd_train(&cfg).unwrap();
        assert_eq!(s.trace.len(), 6);
        assert!(s.trace.iter().all(|r| r.cost == s.trace[0].cost));
        assert!(s.trace.windows(2).all(|w| w[1].iter == w[0].iter + 1));
        assert!(s.trace_csv().starts_with("iter,cost,grad_norm_sq\n"));
    }

    #[test]
    fn training_lowers_the_cost() {
        let mut cfg = RunConfig {
            n_qubits: 3,
            n_blocks: 3,
            seed: 2,
            ..Default::default()
        };
        cfg.train.optimizer = Optimizer::Adam;
        cfg.train.learning_rate = 0.05;
        cfg.train.max_iters = 300;
        let s = cmd_train(&cfg).unwrap();
        assert!(s.final_cost < s.trace[0].cost);
        assert!(s.relative_error().unwrap() < 0.1, "{s}");
    }

    #[test]
    fn bound_command() {
        let mut cfg = RunConfig {
            n_qubits: 2,
            ..Default::default()
        };
        cfg.observable.terms = vec![
            TermRecord { coeff: 1.0, pauli: "ZZ".into() },
            TermRecord { coeff: 1.0, pauli: "ZI".into() },
        ];
        let b = cmd_bound(&cfg).unwrap();
        assert_eq!(b.equivalent_terms, 2);
        assert!((b.theorem3.unwrap() - 0.71741).abs() < 1e-4);
        cfg.observable.terms[1].coeff = -1.0;
        assert_eq!(cmd_bound(&cfg).unwrap().theorem3, None);
    }

    #[test]
    fn verify_detects_corrupted_table() {
        let opts = VerifyOptions {
            trials: 2,
            gradient_instances: 3,
            ..Default::default()
        };
        let good = cmd_verify(&opts).unwrap();
        assert!(good.all_passed(), "{good}");
        let bad = VerifyOptions {
            cz_table: CzTable::standard().with_entry(Pauli::X, Pauli::Y, (Pauli::Y, Pauli::X, 1.0)),
            ..opts
        };
        let report = cmd_verify(&bad).unwrap();
        assert!(!report.get("cz/table_vs_matrix").unwrap().passed());
        assert!(!report.all_passed());
    }
}
