//! Moment coefficients, gradient-norm lower bounds and quadrature checks of
//! the single-rotation expectation identities.
//!
//! For a rotation `V = exp(-iθG/2)` with `G` a Pauli word, write
//! `t(O) = Tr[O VρV†]` and `d(O) = ∂t(O)/∂θ`. When `O` anticommutes with `G`,
//! `t(O) = cosθ·Tr[Oρ] + sinθ·Tr[iGOρ]`; when it commutes, `t(O)` is constant.
//! Every identity checked here is an expectation of `t` or `d` (or a product
//! of two of them) over one of the angle distribution families.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::initstrategy::{count_equivalent_terms, Component, DistSpec};
use crate::pauli::{pair_stats, Observable, Pauli};

/// Gauss–Hermite node count used for every Gaussian component.
pub const QUADRATURE_NODES: usize = 96;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MomentCoeffs {
    /// `E[cos²θ]` under `N(0, σ²)`.
    pub alpha: f64,
    /// `E[sin²θ]` under `N(0, σ²)`.
    pub beta: f64,
    /// `E[cosθ]` under `N(0, σ²)`.
    pub gamma: f64,
    pub sigma2: f64,
}

pub fn moment_coeffs(sigma2: f64) -> Result<MomentCoeffs> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance {sigma2} must be finite and ≥ 0")));
    }
    let e = (-2.0 * sigma2).exp();
    Ok(MomentCoeffs {
        alpha: 0.5 * (1.0 + e),
        beta: 0.5 * (1.0 - e),
        gamma: (-0.5 * sigma2).exp(),
        sigma2,
    })
}

/// `1/4 − 1/(8L)`.
pub fn bound_theorem1(n_blocks: usize) -> Result<f64> {
    if n_blocks < 1 {
        return Err(Error::InvalidArgument("block count must be ≥ 1".into()));
    }
    Ok(0.25 - 1.0 / (8.0 * n_blocks as f64))
}

/// `M · (1/4 − 1/(8L))`.
pub fn bound_theorem2(m: usize, n_blocks: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument("equivalent-term count must be ≥ 1".into()));
    }
    Ok(m as f64 * bound_theorem1(n_blocks)?)
}

/// Lower bound for a non-negative observable: the equivalent-term bound plus a
/// cross term for every ordered pair of distinct terms in the equivalence set
/// of `chosen_term`.
pub fn bound_theorem3(obs: &Observable, chosen_term: usize, n_blocks: usize) -> Result<f64> {
    if !obs.all_nonnegative() {
        return Err(Error::Precondition(
            "the cross-term bound requires every coefficient to be ≥ 0".into(),
        ));
    }
    let s = obs.term(chosen_term)?.string.support_size();
    if s == 0 {
        return Err(Error::Precondition("chosen term is the identity".into()));
    }
    let (m, set) = count_equivalent_terms(obs, chosen_term)?;
    let mut total = bound_theorem2(m, n_blocks)?;
    let l = n_blocks as f64;
    let two_ls = 2.0 * l * s as f64;
    for &i in &set {
        for &j in &set {
            if i == j {
                continue;
            }
            let ps = pair_stats(&obs.terms()[i].string, &obs.terms()[j].string)?;
            total += (2.0 * l - 1.0) * ps.s3 as f64 / two_ls
                * (1.0 - 1.0 / two_ls).powf(2.0 * l * ps.s13 as f64)
                * (-(ps.s03 as f64) / (2.0 * s as f64)).exp();
        }
    }
    Ok(total)
}

/// Nodes and weights for `∫ e^{-x²} f(x) dx`, by Newton iteration on the
/// orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(QUADRATURE_NODES))
}

/// `E f(θ)` for `θ ~ N(mean, variance)`.
pub fn gaussian_expectation(mean: f64, variance: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = default_rule();
    let scale = (2.0 * variance).sqrt();
    x.iter().zip(w).map(|(&xi, &wi)| wi * f(mean + scale * xi)).sum::<f64>() / PI.sqrt()
}

/// `E f(θ)` over a Gaussian or Gaussian-mixture distribution, component by
/// component. Uniform distributions are rejected.
pub fn dist_expectation(dist: &DistSpec, f: impl Fn(f64) -> f64) -> Result<f64> {
    let components = dist.gaussian_components();
    if components.is_empty() {
        return Err(Error::InvalidArgument(format!("no Gaussian quadrature for {dist}")));
    }
    Ok(components
        .iter()
        .map(|c| c.weight * gaussian_expectation(c.mean, c.variance, &f))
        .sum())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// Any distribution; only the commuting identities apply.
    Arbitrary,
    Centered,
    Bimodal,
    Trimodal,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Arbitrary => "arbitrary",
            Family::Centered => "centered",
            Family::Bimodal => "bimodal",
            Family::Trimodal => "trimodal",
        }
    }
}

/// Which side of each operator the identity needs: `A` anticommutes with the
/// generator, `C` commutes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `E t(C)`
    MeanCommuting,
    /// `E t(C)²`
    SquareCommuting,
    /// `E d(C)`
    DerivativeCommuting,
    /// `E t(A)`
    Mean,
    /// `E d(A)`
    Derivative,
    /// `E t(C₁)·t(A₁)`
    ProductMixed,
    /// `E t(C₁)·t(C₂)`
    ProductCommuting,
    /// `E d(C₁)·d(A₂)`
    DerivativeProductMixed,
    /// `E d(C₁)·d(C₂)`
    DerivativeProductCommuting,
    /// `E t(A₁)·t(A₂)`
    Product,
    /// `E d(A₁)·d(A₂)`
    DerivativeProduct,
    /// `E t(A)²`
    Square,
    /// `E d(A)²`
    DerivativeSquare,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::MeanCommuting => "mean_commuting",
            Quantity::SquareCommuting => "square_commuting",
            Quantity::DerivativeCommuting => "derivative_commuting",
            Quantity::Mean => "mean",
            Quantity::Derivative => "derivative",
            Quantity::ProductMixed => "product_mixed",
            Quantity::ProductCommuting => "product_commuting",
            Quantity::DerivativeProductMixed => "derivative_product_mixed",
            Quantity::DerivativeProductCommuting => "derivative_product_commuting",
            Quantity::Product => "product",
            Quantity::DerivativeProduct => "derivative_product",
            Quantity::Square => "square",
            Quantity::DerivativeSquare => "derivative_square",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct LemmaCase {
    pub family: Family,
    pub quantity: Quantity,
}

impl fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.family.name(), self.quantity.name())
    }
}

const COMMUTING_QUANTITIES: [Quantity; 3] = [
    Quantity::MeanCommuting,
    Quantity::SquareCommuting,
    Quantity::DerivativeCommuting,
];

const GAUSSIAN_QUANTITIES: [Quantity; 10] = [
    Quantity::Mean,
    Quantity::Derivative,
    Quantity::ProductMixed,
    Quantity::ProductCommuting,
    Quantity::DerivativeProductMixed,
    Quantity::DerivativeProductCommuting,
    Quantity::Product,
    Quantity::DerivativeProduct,
    Quantity::Square,
    Quantity::DerivativeSquare,
];

/// Every implemented identity, in a fixed order.
pub fn lemma_cases() -> Vec<LemmaCase> {
    let mut out: Vec<LemmaCase> = COMMUTING_QUANTITIES
        .iter()
        .map(|&quantity| LemmaCase {
            family: Family::Arbitrary,
            quantity,
        })
        .collect();
    for family in [Family::Centered, Family::Bimodal, Family::Trimodal] {
        out.extend(GAUSSIAN_QUANTITIES.iter().map(|&quantity| LemmaCase { family, quantity }));
    }
    out
}

impl std::str::FromStr for LemmaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        lemma_cases()
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::UnknownName {
                what: "identity case",
                name: s.to_owned(),
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
}

type CMat = DMatrix<Complex64>;

fn word_matrix(word: &[Pauli]) -> CMat {
    let mut out = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
    for &p in word {
        let m = p.matrix();
        let m = CMat::from_fn(2, 2, |r, c| m[r][c]);
        out = out.kronecker(&m);
    }
    out
}

fn random_word(n: usize, rng: &mut impl Rng) -> Vec<Pauli> {
    (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect()
}

fn anticommutator_norm(a: &CMat, b: &CMat, sign: f64) -> f64 {
    let m = a * b + b * a * Complex64::new(sign, 0.0);
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random real combination of 1–3 Pauli words that all commute
/// (`anti = false`) or all anticommute (`anti = true`) with `g`.
fn random_operator(g: &CMat, n: usize, anti: bool, rng: &mut impl Rng) -> Result<CMat> {
    let dim = 1 << n;
    let mut out = CMat::zeros(dim, dim);
    let terms = rng.random_range(1..=3);
    let mut added = 0;
    while added < terms {
        let w = word_matrix(&random_word(n, rng));
        let commutes = anticommutator_norm(&w, g, -1.0) < 1e-12;
        if commutes == anti {
            continue;
        }
        let c: f64 = rng.random_range(-1.0..1.0);
        out += w * Complex64::new(c, 0.0);
        added += 1;
    }
    let violation = anticommutator_norm(&out, g, if anti { 1.0 } else { -1.0 });
    if violation > 1e-12 {
        return Err(Error::Precondition(format!(
            "sampled operator fails the required relation with the generator by {violation:e}"
        )));
    }
    Ok(out)
}

struct Trial {
    psi: DVector<Complex64>,
    g: CMat,
}

impl Trial {
    fn rotated(&self, theta: f64) -> DVector<Complex64> {
        let dim = self.psi.len();
        let v = CMat::identity(dim, dim) * Complex64::new((theta / 2.0).cos(), 0.0)
            - &self.g * Complex64::new(0.0, (theta / 2.0).sin());
        v * &self.psi
    }

    fn expect(phi: &DVector<Complex64>, o: &CMat) -> Complex64 {
        (phi.adjoint() * o * phi)[(0, 0)]
    }

    /// `Tr[O VρV†]`.
    fn t(&self, o: &CMat, theta: f64) -> f64 {
        Self::expect(&self.rotated(theta), o).re
    }

    /// `∂/∂θ Tr[O VρV†] = Im⟨φ|O G|φ⟩` with `φ = V|ψ⟩`.
    fn d(&self, o: &CMat, theta: f64) -> f64 {
        Self::expect(&self.rotated(theta), &(o * &self.g)).im
    }

    fn tr(&self, o: &CMat) -> f64 {
        Self::expect(&self.psi, o).re
    }

    /// `Tr[iGOρ]`.
    fn tr_igo(&self, o: &CMat) -> f64 {
        Self::expect(&self.psi, &(&self.g * o * Complex64::new(0.0, 1.0))).re
    }
}

fn family_dist(family: Family, sigma2: f64, rng: &mut impl Rng) -> DistSpec {
    match family {
        // A lopsided two-component mixture stands in for "any distribution".
        Family::Arbitrary => {
            let w: f64 = rng.random_range(0.1..0.9);
            DistSpec::Mixture(vec![
                Component {
                    weight: w,
                    mean: rng.random_range(-PI..PI),
                    variance: sigma2,
                },
                Component {
                    weight: 1.0 - w,
                    mean: rng.random_range(-PI..PI),
                    variance: 4.0 * sigma2 + 0.1,
                },
            ])
        }
        Family::Centered => DistSpec::centered(sigma2),
        Family::Bimodal => DistSpec::bimodal(sigma2),
        Family::Trimodal => DistSpec::trimodal(sigma2),
    }
}

/// Evaluates one identity on a random 1- or 2-qubit instance: the left side
/// by quadrature over the angle distribution, the right side from the closed
/// form in terms of the moment coefficients.
pub fn verify_lemma_identity(case: &str, sigma2: f64, trial_seed: u64) -> Result<IdentityReport> {
    let case: LemmaCase = case.parse()?;
    let m = moment_coeffs(sigma2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);

    let n = rng.random_range(1..=2usize);
    let dim = 1 << n;
    let mut gword = vec![Pauli::I; n];
    gword[rng.random_range(0..n)] = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
    let g = word_matrix(&gword);
    let mut psi = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = psi.norm();
    psi /= Complex64::new(norm, 0.0);
    let trial = Trial { psi, g };
    let dist = family_dist(case.family, sigma2, &mut rng);

    // Closed-form moments of the family: E cosθ and E cos²θ (E sinθ, E sin2θ vanish).
    let (mean_cos, mean_cos2) = match case.family {
        Family::Arbitrary => (f64::NAN, f64::NAN),
        Family::Centered => (m.gamma, m.alpha),
        Family::Bimodal => (0.0, m.beta),
        Family::Trimodal => (0.0, m.alpha),
    };
    let mean_sin2 = 1.0 - mean_cos2;

    let mut op = |anti: bool| random_operator(&trial.g, n, anti, &mut rng);
    let e = |f: &dyn Fn(f64) -> f64| dist_expectation(&dist, f);

    let (lhs, rhs) = match case.quantity {
        Quantity::MeanCommuting => {
            let c = op(false)?;
            (e(&|th| trial.t(&c, th))?, trial.tr(&c))
        }
        Quantity::SquareCommuting => {
            let c = op(false)?;
            (e(&|th| trial.t(&c, th).powi(2))?, trial.tr(&c).powi(2))
        }
        Quantity::DerivativeCommuting => {
            let c = op(false)?;
            (e(&|th| trial.d(&c, th))?, 0.0)
        }
        Quantity::Mean => {
            let a = op(true)?;
            (e(&|th| trial.t(&a, th))?, mean_cos * trial.tr(&a))
        }
        Quantity::Derivative => {
            let a = op(true)?;
            (e(&|th| trial.d(&a, th))?, mean_cos * trial.tr_igo(&a))
        }
        Quantity::ProductMixed => {
            let (c, a) = (op(false)?, op(true)?);
            (
                e(&|th| trial.t(&c, th) * trial.t(&a, th))?,
                mean_cos * trial.tr(&c) * trial.tr(&a),
            )
        }
        Quantity::ProductCommuting => {
            let (c1, c2) = (op(false)?, op(false)?);
            (
                e(&|th| trial.t(&c1, th) * trial.t(&c2, th))?,
                trial.tr(&c1) * trial.tr(&c2),
            )
        }
        Quantity::DerivativeProductMixed => {
            let (c, a) = (op(false)?, op(true)?);
            (e(&|th| trial.d(&c, th) * trial.d(&a, th))?, 0.0)
        }
        Quantity::DerivativeProductCommuting => {
            let (c1, c2) = (op(false)?, op(false)?);
            (e(&|th| trial.d(&c1, th) * trial.d(&c2, th))?, 0.0)
        }
        Quantity::Product | Quantity::DerivativeProduct | Quantity::Square | Quantity::DerivativeSquare => {
            let a1 = op(true)?;
            let a2 = match case.quantity {
                Quantity::Square | Quantity::DerivativeSquare => a1.clone(),
                _ => op(true)?,
            };
            let plain = trial.tr(&a1) * trial.tr(&a2);
            let turned = trial.tr_igo(&a1) * trial.tr_igo(&a2);
            match case.quantity {
                Quantity::Product | Quantity::Square => (
                    e(&|th| trial.t(&a1, th) * trial.t(&a2, th))?,
                    mean_cos2 * plain + mean_sin2 * turned,
                ),
                _ => (
                    e(&|th| trial.d(&a1, th) * trial.d(&a2, th))?,
                    mean_sin2 * plain + mean_cos2 * turned,
                ),
            }
        }
    };

    Ok(IdentityReport {
        case: case.to_string(),
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}
