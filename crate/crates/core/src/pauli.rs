//! Pauli words, observables and CZ conjugation.
//!
//! A [`PauliString`] is a word over `{I, X, Y, Z}` with a real sign. Character
//! `k` of the text form acts on qubit `k`. Conjugation by CZ only ever produces
//! `±1` phases, so a real sign is all the phase bookkeeping needed.
//!
//! The CZ conjugation table is written out by hand in [`CzTable::standard`];
//! [`CzTable::derive`] rebuilds it from explicit 4×4 matrix products and serves
//! as its oracle.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Two single-qubit Paulis commute iff one is `I` or they are equal.
    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    /// Row-major 2×2 matrix in the computational basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Undirected CZ edge between two distinct qubits.
pub type Edge = (usize, usize);

pub(crate) fn check_edge(edge: Edge, n_qubits: usize) -> Result<()> {
    let (a, b) = edge;
    for index in [a, b] {
        if index >= n_qubits {
            return Err(Error::QubitOutOfRange { index, n_qubits });
        }
    }
    if a == b {
        return Err(Error::DegenerateEdge(a, b));
    }
    Ok(())
}

/// A Pauli word with a real sign.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    word: Vec<Pauli>,
    sign: f64,
}

impl PauliString {
    pub fn new(word: Vec<Pauli>) -> Self {
        Self { word, sign: 1.0 }
    }

    pub fn with_sign(word: Vec<Pauli>, sign: f64) -> Self {
        Self { word, sign }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits])
    }

    /// Parses a word such as `"XXIZ"`, checking it has `n_qubits` characters.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let mut word = Vec::with_capacity(n_qubits);
        for (pos, c) in text.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or_else(|| Error::PauliParse {
                text: text.to_owned(),
                reason: format!("character {c:?} at qubit {} is not one of I, X, Y, Z", pos + 1),
            })?;
            word.push(p);
        }
        if word.len() != n_qubits {
            return Err(Error::PauliParse {
                text: text.to_owned(),
                reason: format!("expected {n_qubits} characters, found {}", word.len()),
            });
        }
        Ok(Self::new(word))
    }

    pub fn word(&self) -> &[Pauli] {
        &self.word
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn n_qubits(&self) -> usize {
        self.word.len()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.word[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().all(|p| p.is_identity())
    }

    /// Qubits where the word acts nontrivially, and their count.
    pub fn support(&self) -> (Vec<usize>, usize) {
        let set: Vec<usize> = self
            .word
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_identity())
            .map(|(i, _)| i)
            .collect();
        let size = set.len();
        (set, size)
    }

    pub fn support_size(&self) -> usize {
        self.word.iter().filter(|p| !p.is_identity()).count()
    }

    /// The word as text, without the sign.
    pub fn word_string(&self) -> String {
        self.word.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 1.0 {
            write!(f, "{}", self.word_string())
        } else if self.sign == -1.0 {
            write!(f, "-{}", self.word_string())
        } else {
            write!(f, "{}*{}", self.sign, self.word_string())
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, s.chars().count())
    }
}

type Mat4 = [[Complex64; 4]; 4];

/// `a ⊗ b` with `a` on the first qubit of the edge.
fn kron2(a: Pauli, b: Pauli) -> Mat4 {
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = ma[r >> 1][c >> 1] * mb[r & 1][c & 1];
        }
    }
    out
}

/// `CZ† M CZ` for a matrix in the `a ⊗ b` basis. CZ is diagonal, so this
/// only flips signs of the entries in the `|11⟩` row and column.
fn conjugate_by_cz(m: &Mat4) -> Mat4 {
    let d = [1.0, 1.0, 1.0, -1.0];
    let mut out = *m;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = m[r][c] * (d[r] * d[c]);
        }
    }
    out
}

/// Expresses `m` as `s · (a ⊗ b)` with `s = ±1`, if possible.
fn decompose_signed(m: &Mat4) -> Option<(Pauli, Pauli, f64)> {
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let p = kron2(a, b);
            // Hilbert–Schmidt overlap; Paulis are Hermitian.
            let mut overlap = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    overlap += p[r][c].conj() * m[r][c];
                }
            }
            let s = overlap / 4.0;
            if (s.re.abs() - 1.0).abs() < 1e-12 && s.im.abs() < 1e-12 {
                let sign = s.re.signum();
                let exact = (0..4).all(|r| (0..4).all(|c| m[r][c] == p[r][c] * sign));
                if exact {
                    return Some((a, b, sign));
                }
            }
        }
    }
    None
}

/// Brute-force `CZ†(a ⊗ b)CZ` as a signed Pauli pair.
pub fn cz_conjugate_by_matrix(a: Pauli, b: Pauli) -> (Pauli, Pauli, f64) {
    decompose_signed(&conjugate_by_cz(&kron2(a, b)))
        .expect("CZ conjugation maps Pauli pairs to signed Pauli pairs")
}

/// Lookup table for two-qubit CZ conjugation, indexed by input pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CzTable {
    entries: [[(Pauli, Pauli, f64); 4]; 4],
}

impl CzTable {
    /// Builds all 16 entries from explicit matrix conjugation.
    pub fn derive() -> Self {
        let mut entries = [[(Pauli::I, Pauli::I, 1.0); 4]; 4];
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                entries[a.index()][b.index()] = cz_conjugate_by_matrix(a, b);
            }
        }
        Self { entries }
    }

    pub fn get(&self, a: Pauli, b: Pauli) -> (Pauli, Pauli, f64) {
        self.entries[a.index()][b.index()]
    }

    /// Returns a copy with one entry replaced. Used to build corrupted tables
    /// for exercising the conformance check.
    pub fn with_entry(&self, a: Pauli, b: Pauli, value: (Pauli, Pauli, f64)) -> Self {
        let mut out = self.clone();
        out.entries[a.index()][b.index()] = value;
        out
    }

    /// Conjugates `p` by CZ on `edge` using this table.
    pub fn conjugate(&self, p: &PauliString, edge: Edge) -> Result<PauliString> {
        check_edge(edge, p.n_qubits())?;
        let (i, j) = edge;
        let (a, b, s) = self.get(p.word[i], p.word[j]);
        let mut word = p.word.clone();
        word[i] = a;
        word[j] = b;
        Ok(PauliString::with_sign(word, p.sign * s))
    }
}

impl CzTable {
    /// The conjugation rules written out by hand; [`CzTable::derive`] is the
    /// matrix oracle they are checked against.
    pub fn standard() -> Self {
        use Pauli::{I, X, Y, Z};
        Self {
            entries: [
                [(I, I, 1.0), (Z, X, 1.0), (Z, Y, 1.0), (I, Z, 1.0)],
                [(X, Z, 1.0), (Y, Y, 1.0), (Y, X, -1.0), (X, I, 1.0)],
                [(Y, Z, 1.0), (X, Y, -1.0), (X, X, 1.0), (Y, I, 1.0)],
                [(Z, I, 1.0), (I, X, 1.0), (I, Y, 1.0), (Z, Z, 1.0)],
            ],
        }
    }

    /// Input pairs whose entry differs from the matrix oracle.
    pub fn mismatches(&self) -> Vec<(Pauli, Pauli)> {
        let oracle = Self::derive();
        let mut out = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if self.get(a, b) != oracle.get(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// The process-wide CZ table.
pub fn cz_table() -> &'static CzTable {
    static TABLE: OnceLock<CzTable> = OnceLock::new();
    TABLE.get_or_init(CzTable::standard)
}

/// `CZ†·p·CZ` for a single CZ on `edge`.
pub fn cz_conjugate(p: &PauliString, edge: Edge) -> Result<PauliString> {
    cz_table().conjugate(p, edge)
}

/// Conjugates through every CZ in `edges`. CZ gates commute, so edge order
/// does not affect the result.
pub fn cz_conjugate_layer(p: &PauliString, edges: &[Edge]) -> Result<PauliString> {
    edges
        .iter()
        .try_fold(p.clone(), |acc, &edge| cz_conjugate(&acc, edge))
}

/// Positionwise overlap counts between two Pauli words.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub struct PairStats {
    /// Both `X`.
    pub s1: usize,
    /// Both `Z`.
    pub s3: usize,
    /// Equal and not `I`.
    pub s13: usize,
    /// One `Z`, the other `I`.
    pub s03: usize,
}

pub fn pair_stats(a: &PauliString, b: &PauliString) -> Result<PairStats> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: a.n_qubits(),
            actual: b.n_qubits(),
        });
    }
    let mut stats = PairStats::default();
    for (&p, &q) in a.word.iter().zip(&b.word) {
        match (p, q) {
            (Pauli::X, Pauli::X) => {
                stats.s1 += 1;
                stats.s13 += 1;
            }
            (Pauli::Z, Pauli::Z) => {
                stats.s3 += 1;
                stats.s13 += 1;
            }
            (Pauli::Y, Pauli::Y) => stats.s13 += 1,
            (Pauli::Z, Pauli::I) | (Pauli::I, Pauli::Z) => stats.s03 += 1,
            _ => {}
        }
    }
    Ok(stats)
}

/// One weighted term of an [`Observable`]. The string's own sign is always
/// `+1`; the coefficient carries it.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub string: PauliString,
}

/// Real linear combination of Pauli words with distinct words.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<Term>,
}

impl Observable {
    /// Builds an observable, folding each string's sign into its coefficient
    /// and summing coefficients of repeated words. Terms whose coefficient
    /// ends up exactly zero are dropped. Term order follows first appearance.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("observable needs at least one qubit".into()));
        }
        let mut merged: Vec<Term> = Vec::new();
        let mut seen: HashMap<Vec<Pauli>, usize> = HashMap::new();
        for (coeff, string) in terms {
            if string.n_qubits() != n_qubits {
                return Err(Error::LengthMismatch {
                    expected: n_qubits,
                    actual: string.n_qubits(),
                });
            }
            let coeff = coeff * string.sign;
            if !coeff.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient for {}",
                    string.word_string()
                )));
            }
            match seen.get(&string.word) {
                Some(&k) => merged[k].coeff += coeff,
                None => {
                    seen.insert(string.word.clone(), merged.len());
                    merged.push(Term {
                        coeff,
                        string: PauliString::new(string.word),
                    });
                }
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    /// Convenience constructor from `(coefficient, word)` pairs.
    pub fn from_words(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, w)| PauliString::parse(w, n_qubits).map(|p| (c, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, parsed)
    }

    pub fn single(coeff: f64, string: PauliString) -> Result<Self> {
        Self::new(string.n_qubits(), [(coeff, string)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, index: usize) -> Result<&Term> {
        self.terms.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "term index {index} out of range for {} terms",
                self.terms.len()
            ))
        })
    }

    pub fn all_nonnegative(&self) -> bool {
        self.terms.iter().all(|t| t.coeff >= 0.0)
    }

    /// Same words with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_qubits,
            self.terms.iter().map(|t| (t.coeff * factor, t.string.clone())),
        )
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let sep = match (k, t.coeff < 0.0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}{}*{}", t.coeff.abs(), t.string.word_string())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        let p = PauliString::parse("XXIZ", 4).unwrap();
        assert_eq!(p.word(), &[Pauli::X, Pauli::X, Pauli::I, Pauli::Z]);
        assert_eq!(p.sign(), 1.0);
        assert!(PauliString::parse("IIII", 4).unwrap().is_identity());
        assert!(matches!(
            PauliString::parse("XQ", 2),
            Err(Error::PauliParse { .. })
        ));
        assert!(matches!(
            PauliString::parse("XX", 3),
            Err(Error::PauliParse { .. })
        ));
        assert!(PauliString::parse("xz", 2).is_err());
    }

    #[test]
    fn cz_examples() {
        let out = cz_conjugate(&ps("XI"), (0, 1)).unwrap();
        assert_eq!((out.word_string().as_str(), out.sign()), ("XZ", 1.0));
        let out = cz_conjugate(&ps("XY"), (0, 1)).unwrap();
        assert_eq!((out.word_string().as_str(), out.sign()), ("YX", -1.0));
        let out = cz_conjugate(&ps("ZZ"), (0, 1)).unwrap();
        assert_eq!((out.word_string().as_str(), out.sign()), ("ZZ", 1.0));
    }

    #[test]
    fn cz_table_matches_matrices() {
        assert_eq!(CzTable::standard(), CzTable::derive());
        assert!(cz_table().mismatches().is_empty());
        let bad = cz_table().with_entry(Pauli::X, Pauli::Y, (Pauli::Y, Pauli::X, 1.0));
        assert_eq!(bad.mismatches(), vec![(Pauli::X, Pauli::Y)]);
    }

    #[test]
    fn cz_zz_is_fixed() {
        // Z⊗Z commutes with CZ, so it is its own image.
        assert_eq!(cz_table().get(Pauli::Z, Pauli::Z), (Pauli::Z, Pauli::Z, 1.0));
    }

    #[test]
    fn cz_layer_examples() {
        let out = cz_conjugate_layer(&ps("XII"), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!((out.word_string().as_str(), out.sign()), ("XZI", 1.0));
        let out = cz_conjugate_layer(&ps("II"), &[]).unwrap();
        assert_eq!(out, ps("II"));
        let out = cz_conjugate_layer(&ps("ZXI"), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!((out.word_string().as_str(), out.sign()), ("IXZ", 1.0));
    }

    #[test]
    fn cz_errors() {
        assert!(matches!(
            cz_conjugate(&ps("XI"), (0, 2)),
            Err(Error::QubitOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            cz_conjugate(&ps("XI"), (1, 1)),
            Err(Error::DegenerateEdge(1, 1))
        ));
    }

    #[test]
    fn cz_table_closure() {
        let t = cz_table();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (a2, b2, _) = t.get(a, b);
                let iz = |p: Pauli| matches!(p, Pauli::I | Pauli::Z);
                if iz(a) && iz(b) {
                    assert!(iz(a2) && iz(b2));
                }
                if !iz(a) {
                    assert!(!iz(a2), "{a}{b}");
                }
                if !iz(b) {
                    assert!(!iz(b2), "{a}{b}");
                }
            }
        }
    }

    #[test]
    fn pair_stats_examples() {
        let s = pair_stats(&ps("XYZI"), &ps("XYIZ")).unwrap();
        assert_eq!(s, PairStats { s1: 1, s3: 0, s13: 2, s03: 2 });
        let s = pair_stats(&ps("ZZ"), &ps("ZZ")).unwrap();
        assert_eq!(s, PairStats { s1: 0, s3: 2, s13: 2, s03: 0 });
        let s = pair_stats(&ps("XX"), &ps("ZI")).unwrap();
        assert_eq!(s, PairStats::default());
        assert!(pair_stats(&ps("XX"), &ps("X")).is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(ps("XIZ").support(), (vec![0, 2], 2));
        assert_eq!(ps("II").support(), (vec![], 0));
        assert_eq!(ps("XXXX").support(), (vec![0, 1, 2, 3], 4));
    }

    #[test]
    fn observable_merges_duplicates() {
        let o = Observable::from_words(2, &[(1.0, "ZZ"), (-1.0, "XI"), (0.5, "ZZ")]).unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o.terms()[0].coeff, 1.5);
        let o = Observable::from_words(1, &[(1.0, "X"), (-1.0, "X")]).unwrap();
        assert!(o.is_empty());
        assert!(Observable::from_words(2, &[(1.0, "ZZ"), (1.0, "Z")]).is_err());
        let signed = Observable::new(1, [(2.0, PauliString::with_sign(vec![Pauli::X], -1.0))]).unwrap();
        assert_eq!(signed.terms()[0].coeff, -2.0);
        assert_eq!(signed.terms()[0].string.sign(), 1.0);
    }

    fn arb_word(n: usize) -> impl Strategy<Value = Vec<Pauli>> {
        proptest::collection::vec(proptest::sample::select(Pauli::ALL.to_vec()), n)
    }

    proptest! {
        #[test]
        fn cz_is_involution(word in arb_word(5), i in 0usize..5, j in 0usize..5) {
            prop_assume!(i != j);
            let p = PauliString::new(word);
            let twice = cz_conjugate(&cz_conjugate(&p, (i, j)).unwrap(), (i, j)).unwrap();
            prop_assert_eq!(twice, p);
        }

        #[test]
        fn cz_layer_order_independent(word in arb_word(4), perm in Just(vec![(0usize,1usize),(1,2),(2,3),(3,0),(0,2)]).prop_shuffle()) {
            let p = PauliString::new(word);
            let base = cz_conjugate_layer(&p, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
            prop_assert_eq!(cz_conjugate_layer(&p, &perm).unwrap(), base);
        }

        #[test]
        fn pair_stats_symmetric(a in arb_word(6), b in arb_word(6)) {
            let (a, b) = (PauliString::new(a), PauliString::new(b));
            let ab = pair_stats(&a, &b).unwrap();
            prop_assert_eq!(ab, pair_stats(&b, &a).unwrap());
            prop_assert!(ab.s3 <= ab.s13 && ab.s13 <= 6 && ab.s03 <= 6);
        }
    }
}
