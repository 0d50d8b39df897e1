//! Angle distributions and observable-adaptive initialization strategies.
//!
//! Four distribution families are used:
//!
//! * *arbitrary*: any distribution; instantiated here as `U[-π, π]`,
//! * *centered*: `N(0, σ²)`,
//! * *bimodal*: `½N(-π/2, σ²) + ½N(π/2, σ²)`,
//! * *trimodal*: `¼N(-π, σ²) + ¼N(π, σ²) + ½N(0, σ²)`.
//!
//! The table strategies put every block but the last on the centered
//! distribution with `σ² = 1/(2LS)`, where `S` is the support size of a chosen
//! observable term, and pick the final block's distributions qubit by qubit
//! from the Pauli the chosen term has on that qubit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ansatz::{CircuitSpec, GateOrder, ParamMatrix};
use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli};

/// Default half-width factor of the reduced-domain baseline, `U[-aπ, aπ]`.
pub const DEFAULT_REDUCED_DOMAIN_A: f64 = 0.07;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Distribution of a single angle.
#[derive(Clone, Debug, PartialEq)]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, variance: f64 },
    Mixture(Vec<Component>),
}

impl DistSpec {
    /// Stand-in for "any distribution": `U[-π, π]`.
    pub fn arbitrary() -> Self {
        DistSpec::Uniform { lo: -PI, hi: PI }
    }

    pub fn centered(variance: f64) -> Self {
        DistSpec::Gaussian { mean: 0.0, variance }
    }

    pub fn bimodal(variance: f64) -> Self {
        DistSpec::Mixture(vec![
            Component { weight: 0.5, mean: -PI / 2.0, variance },
            Component { weight: 0.5, mean: PI / 2.0, variance },
        ])
    }

    pub fn trimodal(variance: f64) -> Self {
        DistSpec::Mixture(vec![
            Component { weight: 0.25, mean: -PI, variance },
            Component { weight: 0.25, mean: PI, variance },
            Component { weight: 0.5, mean: 0.0, variance },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            DistSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return bad(format!("uniform bounds [{lo}, {hi}] are invalid"));
                }
            }
            DistSpec::Gaussian { mean, variance } => {
                if !(mean.is_finite() && variance.is_finite() && *variance >= 0.0) {
                    return bad(format!("gaussian N({mean}, {variance}) is invalid"));
                }
            }
            DistSpec::Mixture(components) => {
                if components.is_empty() {
                    return bad("mixture has no components".into());
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.weight > 0.0 && c.mean.is_finite() && c.variance.is_finite() && c.variance >= 0.0) {
                        return bad(format!("mixture component {c:?} is invalid"));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("mixture weights sum to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistSpec::Gaussian { mean, .. } => *mean,
            DistSpec::Mixture(cs) => cs.iter().map(|c| c.weight * c.mean).sum(),
        }
    }

    /// Gaussian components with weights; empty for the uniform family.
    pub fn gaussian_components(&self) -> Vec<Component> {
        match self {
            DistSpec::Uniform { .. } => Vec::new(),
            DistSpec::Gaussian { mean, variance } => vec![Component {
                weight: 1.0,
                mean: *mean,
                variance: *variance,
            }],
            DistSpec::Mixture(cs) => cs.clone(),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Uniform { lo, hi } => write!(f, "U[{lo:.4}, {hi:.4}]"),
            DistSpec::Gaussian { mean, variance } => write!(f, "N({mean:.4}, {variance:.4})"),
            DistSpec::Mixture(cs) => {
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}·N({:.4}, {:.4})", c.weight, c.mean, c.variance)?;
                }
                Ok(())
            }
        }
    }
}

fn gaussian_draw(mean: f64, variance: f64, rng: &mut impl Rng) -> f64 {
    if variance == 0.0 {
        return mean;
    }
    Normal::new(mean, variance.sqrt())
        .expect("validated variance")
        .sample(rng)
}

/// One draw from `dist`. Mixtures pick a component by weight, then draw from it.
pub fn sample_angle(dist: &DistSpec, rng: &mut impl Rng) -> f64 {
    match dist {
        DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        DistSpec::Gaussian { mean, variance } => gaussian_draw(*mean, *variance, rng),
        DistSpec::Mixture(cs) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = cs[cs.len() - 1];
            for c in cs {
                acc += c.weight;
                if u < acc {
                    pick = *c;
                    break;
                }
            }
            gaussian_draw(pick.mean, pick.variance, rng)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Single-term table; Z uses the configured variant, Y's commuting
    /// rotation and I qubits use the arbitrary distribution.
    #[serde(alias = "single_term")]
    Table1,
    /// Linear-combination table; Z and I both trimodal.
    #[serde(alias = "linear_combination")]
    Table2,
    /// Non-negative table; only centered and bimodal distributions.
    #[serde(alias = "non_negative")]
    Table3,
    Uniform,
    GaussianBaseline,
    ReducedDomain,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Table1,
        StrategyKind::Table2,
        StrategyKind::Table3,
        StrategyKind::Uniform,
        StrategyKind::GaussianBaseline,
        StrategyKind::ReducedDomain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Table1 => "table1",
            StrategyKind::Table2 => "table2",
            StrategyKind::Table3 => "table3",
            StrategyKind::Uniform => "uniform",
            StrategyKind::GaussianBaseline => "gaussian_baseline",
            StrategyKind::ReducedDomain => "reduced_domain",
        }
    }

    pub fn is_table(self) -> bool {
        matches!(self, StrategyKind::Table1 | StrategyKind::Table2 | StrategyKind::Table3)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "table1" | "single_term" => StrategyKind::Table1,
            "table2" | "linear_combination" => StrategyKind::Table2,
            "table3" | "non_negative" => StrategyKind::Table3,
            "uniform" => StrategyKind::Uniform,
            "gaussian_baseline" | "gaussian" => StrategyKind::GaussianBaseline,
            "reduced_domain" => StrategyKind::ReducedDomain,
            _ => {
                return Err(Error::UnknownName {
                    what: "strategy",
                    name: s.to_owned(),
                })
            }
        };
        Ok(kind)
    }
}

/// Distribution used for Z (and, in the single-term table, nothing else)
/// when the single-term table leaves the choice open.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZVariant {
    #[default]
    Centered,
    Trimodal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyOptions {
    /// Replaces `1/(2LS)` when set.
    pub sigma2_override: Option<f64>,
    pub z_variant: ZVariant,
    pub reduced_domain_a: f64,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        Self {
            sigma2_override: None,
            z_variant: ZVariant::Centered,
            reduced_domain_a: DEFAULT_REDUCED_DOMAIN_A,
        }
    }
}

/// A distribution for every parameter of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct InitStrategy {
    kind: StrategyKind,
    chosen_term: Option<usize>,
    sigma2: Option<f64>,
    n_layers: usize,
    n_qubits: usize,
    dists: Vec<DistSpec>,
}

impl InitStrategy {
    /// Uses `dist` for every cell of `spec`'s parameter grid.
    pub fn uniform_grid(kind: StrategyKind, spec: &CircuitSpec, dist: DistSpec) -> Result<Self> {
        dist.validate()?;
        Ok(Self {
            kind,
            chosen_term: None,
            sigma2: None,
            n_layers: spec.n_layers(),
            n_qubits: spec.n_qubits(),
            dists: vec![dist; spec.param_count()],
        })
    }

    /// Explicit per-cell distributions, layer-major.
    pub fn from_cells(kind: StrategyKind, spec: &CircuitSpec, cells: Vec<DistSpec>) -> Result<Self> {
        if cells.len() != spec.param_count() {
            return Err(Error::ShapeMismatch {
                expected: spec.param_count(),
                actual: cells.len(),
            });
        }
        for d in &cells {
            d.validate()?;
        }
        Ok(Self {
            kind,
            chosen_term: None,
            sigma2: None,
            n_layers: spec.n_layers(),
            n_qubits: spec.n_qubits(),
            dists: cells,
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn chosen_term(&self) -> Option<usize> {
        self.chosen_term
    }

    /// The variance used by the table strategies, or the baseline Gaussian's
    /// variance; `None` for the uniform families.
    pub fn sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, layer: usize, qubit: usize) -> &DistSpec {
        &self.dists[layer * self.n_qubits + qubit]
    }

    pub fn cells(&self) -> &[DistSpec] {
        &self.dists
    }

    pub fn matches(&self, spec: &CircuitSpec) -> bool {
        self.n_layers == spec.n_layers() && self.n_qubits == spec.n_qubits()
    }
}

fn swap_xy(p: Pauli) -> Pauli {
    match p {
        Pauli::X => Pauli::Y,
        Pauli::Y => Pauli::X,
        other => other,
    }
}

/// Final-block assignment for one qubit as `(R_y dist, R_x dist)`.
fn table_cell(kind: StrategyKind, pauli: Pauli, sigma2: f64, z_variant: ZVariant) -> (DistSpec, DistSpec) {
    let g1 = || DistSpec::centered(sigma2);
    let g2 = || DistSpec::bimodal(sigma2);
    let g3 = || DistSpec::trimodal(sigma2);
    match (kind, pauli) {
        (_, Pauli::X) => (g2(), g1()),
        (StrategyKind::Table1, Pauli::Y) => (DistSpec::arbitrary(), g2()),
        (_, Pauli::Y) => (g1(), g2()),
        (StrategyKind::Table1, Pauli::Z) => match z_variant {
            ZVariant::Centered => (g1(), g1()),
            ZVariant::Trimodal => (g3(), g3()),
        },
        (StrategyKind::Table1, Pauli::I) => (DistSpec::arbitrary(), DistSpec::arbitrary()),
        (StrategyKind::Table2, Pauli::Z | Pauli::I) => (g3(), g3()),
        (_, Pauli::Z | Pauli::I) => (g1(), g1()),
    }
}

/// Builds the per-parameter distribution grid for `kind`.
///
/// Table kinds read the Pauli word of `obs[chosen_term]`. For `RY_RX` the
/// final block uses the `RX_RY` assignment with X and Y exchanged, so the
/// final `R_x` takes the `R_y` row. For `RX_RY_RX` the first `R_x` of the final
/// block is trimodal everywhere and the `R_y` and second `R_x` take the rows
/// of the table.
pub fn build_strategy(
    kind: StrategyKind,
    spec: &CircuitSpec,
    obs: &Observable,
    chosen_term: Option<usize>,
    options: &StrategyOptions,
) -> Result<InitStrategy> {
    if obs.n_qubits() != spec.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: spec.n_qubits(),
            actual: obs.n_qubits(),
        });
    }
    let n = spec.n_qubits();
    let l = spec.n_blocks() as f64;

    let term_support = |index: usize| -> Result<usize> {
        let s = obs.term(index)?.string.support_size();
        if s == 0 {
            return Err(Error::Precondition(format!(
                "chosen term {} is the identity; its support is empty",
                index + 1
            )));
        }
        Ok(s)
    };

    match kind {
        StrategyKind::Uniform => {
            return InitStrategy::uniform_grid(kind, spec, DistSpec::arbitrary());
        }
        StrategyKind::ReducedDomain => {
            let a = options.reduced_domain_a;
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidArgument(format!("reduced-domain factor {a} must be positive")));
            }
            return InitStrategy::uniform_grid(kind, spec, DistSpec::Uniform { lo: -a * PI, hi: a * PI });
        }
        StrategyKind::GaussianBaseline => {
            let s = match chosen_term {
                Some(k) => term_support(k)?,
                None => n,
            } as f64;
            let variance = 1.0 / (4.0 * s * (l + 2.0));
            let mut out = InitStrategy::uniform_grid(kind, spec, DistSpec::centered(variance))?;
            out.chosen_term = chosen_term;
            out.sigma2 = Some(variance);
            return Ok(out);
        }
        _ => {}
    }

    let chosen = chosen_term
        .ok_or_else(|| Error::Precondition(format!("strategy {kind} needs a chosen term")))?;
    let s = term_support(chosen)?;
    if kind == StrategyKind::Table3 && !obs.all_nonnegative() {
        return Err(Error::Precondition(
            "the non-negative table requires every coefficient to be ≥ 0".into(),
        ));
    }
    let sigma2 = match options.sigma2_override {
        Some(v) if v.is_finite() && v >= 0.0 => v,
        Some(v) => return Err(Error::InvalidArgument(format!("σ² override {v} must be ≥ 0"))),
        None => 1.0 / (2.0 * l * s as f64),
    };

    let mut dists = vec![DistSpec::centered(sigma2); spec.param_count()];
    let word = obs.term(chosen)?.string.word().to_vec();
    let last = spec.final_block_layers();
    let idx = |layer: usize, q: usize| layer * n + q;
    for (q, &pauli) in word.iter().enumerate() {
        match spec.gate_order() {
            GateOrder::RxRy => {
                let (y_row, x_row) = table_cell(kind, pauli, sigma2, options.z_variant);
                dists[idx(last.start, q)] = x_row;
                dists[idx(last.start + 1, q)] = y_row;
            }
            // Mirror image of RX_RY under X ↔ Y: the final R_x plays the part
            // of the final R_y.
            GateOrder::RyRx => {
                let (final_row, first_row) = table_cell(kind, swap_xy(pauli), sigma2, options.z_variant);
                dists[idx(last.start, q)] = first_row;
                dists[idx(last.start + 1, q)] = final_row;
            }
            GateOrder::RxRyRx => {
                let (y_row, x_row) = table_cell(kind, pauli, sigma2, options.z_variant);
                dists[idx(last.start, q)] = DistSpec::trimodal(sigma2);
                dists[idx(last.start + 1, q)] = y_row;
                dists[idx(last.start + 2, q)] = x_row;
            }
        }
    }

    Ok(InitStrategy {
        kind,
        chosen_term: Some(chosen),
        sigma2: Some(sigma2),
        n_layers: spec.n_layers(),
        n_qubits: n,
        dists,
    })
}

/// Terms equal to the chosen one up to `Z ↔ I` swaps, including itself.
/// Returns the count and the indices.
pub fn count_equivalent_terms(obs: &Observable, chosen_term: usize) -> Result<(usize, Vec<usize>)> {
    let target = obs.term(chosen_term)?.string.word();
    let equivalent = |word: &[Pauli]| {
        word.iter().zip(target).all(|(&a, &b)| {
            a == b || matches!((a, b), (Pauli::Z, Pauli::I) | (Pauli::I, Pauli::Z))
        })
    };
    let set: Vec<usize> = obs
        .terms()
        .iter()
        .enumerate()
        .filter(|(_, t)| equivalent(t.string.word()))
        .map(|(k, _)| k)
        .collect();
    Ok((set.len(), set))
}

/// Draws every cell independently. Cell `k` (flat index) uses its own
/// ChaCha8 stream `k` keyed by `seed`, so results do not depend on draw order.
pub fn sample_params(strategy: &InitStrategy, seed: u64) -> ParamMatrix {
    let values = strategy
        .dists
        .iter()
        .enumerate()
        .map(|(k, dist)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            sample_angle(dist, &mut rng)
        })
        .collect();
    ParamMatrix::from_shape(strategy.n_layers, strategy.n_qubits, values)
}
