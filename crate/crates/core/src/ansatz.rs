//! Hardware-efficient layered ansatz.
//!
//! Each of the `L` blocks applies a CZ entangling layer followed by one
//! rotation layer per axis in the gate order. With the default `RX_RY` order a
//! block is `CZ`, then `R_x` on every qubit, then `R_y` on every qubit.
//!
//! Parameters are indexed by `(layer, qubit)`, both 0-based, where layer `k`
//! is the `k`-th rotation layer counted from the start of the circuit. The flat
//! index is `layer * n_qubits + qubit`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_edge, Edge, Observable, Pauli};
use crate::statevector::{Axis, StateVector};

/// Rotation layers per block, in time order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum GateOrder {
    #[default]
    #[serde(rename = "RX_RY")]
    RxRy,
    #[serde(rename = "RY_RX")]
    RyRx,
    #[serde(rename = "RX_RY_RX")]
    RxRyRx,
}

impl GateOrder {
    pub fn axes(self) -> &'static [Axis] {
        match self {
            GateOrder::RxRy => &[Axis::X, Axis::Y],
            GateOrder::RyRx => &[Axis::Y, Axis::X],
            GateOrder::RxRyRx => &[Axis::X, Axis::Y, Axis::X],
        }
    }

    pub fn layers_per_block(self) -> usize {
        self.axes().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            GateOrder::RxRy => "RX_RY",
            GateOrder::RyRx => "RY_RX",
            GateOrder::RxRyRx => "RX_RY_RX",
        }
    }
}

impl fmt::Display for GateOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RX_RY" => Ok(GateOrder::RxRy),
            "RY_RX" => Ok(GateOrder::RyRx),
            "RX_RY_RX" => Ok(GateOrder::RxRyRx),
            _ => Err(Error::UnknownName {
                what: "gate order",
                name: s.to_owned(),
            }),
        }
    }
}

/// CZ pattern of each block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entangler {
    /// `(i, i+1)` for every neighbouring pair.
    Chain,
    /// Chain plus `(N-1, 0)` when `N ≥ 3`.
    Ring,
    None,
    /// Either one edge list shared by every block, or one list per block.
    Explicit(Vec<Vec<Edge>>),
}

impl Entangler {
    pub fn from_preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "chain" => Ok(Entangler::Chain),
            "ring" => Ok(Entangler::Ring),
            "none" => Ok(Entangler::None),
            _ => Err(Error::UnknownName {
                what: "entangler preset",
                name: name.to_owned(),
            }),
        }
    }
}

/// Circuit shape: qubits, blocks, CZ edges per block and rotation order.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    n_qubits: usize,
    n_blocks: usize,
    gate_order: GateOrder,
    block_edges: Vec<Vec<Edge>>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_blocks: usize, entangler: Entangler, gate_order: GateOrder) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qubit".into()));
        }
        if n_blocks == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one block".into()));
        }
        let chain: Vec<Edge> = (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        let block_edges = match entangler {
            Entangler::Chain => vec![chain; n_blocks],
            Entangler::Ring => {
                let mut ring = chain;
                if n_qubits >= 3 {
                    ring.push((n_qubits - 1, 0));
                }
                vec![ring; n_blocks]
            }
            Entangler::None => vec![Vec::new(); n_blocks],
            Entangler::Explicit(lists) => {
                let lists = match lists.len() {
                    1 => vec![lists[0].clone(); n_blocks],
                    k if k == n_blocks => lists,
                    k => {
                        return Err(Error::InvalidArgument(format!(
                            "explicit entangler has {k} edge lists; expected 1 or {n_blocks}"
                        )))
                    }
                };
                for &edge in lists.iter().flatten() {
                    check_edge(edge, n_qubits)?;
                }
                lists
            }
        };
        Ok(Self {
            n_qubits,
            n_blocks,
            gate_order,
            block_edges,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn gate_order(&self) -> GateOrder {
        self.gate_order
    }

    pub fn block_edges(&self, block: usize) -> &[Edge] {
        &self.block_edges[block]
    }

    pub fn n_layers(&self) -> usize {
        self.n_blocks * self.gate_order.layers_per_block()
    }

    pub fn param_count(&self) -> usize {
        self.n_layers() * self.n_qubits
    }

    pub fn layer_axis(&self, layer: usize) -> Axis {
        self.gate_order.axes()[layer % self.gate_order.layers_per_block()]
    }

    pub fn block_of_layer(&self, layer: usize) -> usize {
        layer / self.gate_order.layers_per_block()
    }

    /// Layers belonging to the final block.
    pub fn final_block_layers(&self) -> std::ops::Range<usize> {
        let k = self.gate_order.layers_per_block();
        self.n_layers() - k..self.n_layers()
    }

    pub fn flat_index(&self, layer: usize, qubit: usize) -> Result<usize> {
        if layer >= self.n_layers() || qubit >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "parameter ({}, {}) outside {} layers × {} qubits",
                layer + 1,
                qubit + 1,
                self.n_layers(),
                self.n_qubits
            )));
        }
        Ok(layer * self.n_qubits + qubit)
    }

    pub fn layer_qubit(&self, flat: usize) -> Result<(usize, usize)> {
        if flat >= self.param_count() {
            return Err(Error::InvalidArgument(format!(
                "flat index {flat} outside {} parameters",
                self.param_count()
            )));
        }
        Ok((flat / self.n_qubits, flat % self.n_qubits))
    }

    /// Gate sequence in time order.
    pub fn ops(&self) -> impl Iterator<Item = Op<'_>> + '_ {
        let k = self.gate_order.layers_per_block();
        (0..self.n_blocks).flat_map(move |block| {
            std::iter::once(Op::Entangle(&self.block_edges[block][..])).chain((0..k).flat_map(move |j| {
                let layer = block * k + j;
                let axis = self.gate_order.axes()[j];
                (0..self.n_qubits).map(move |qubit| Op::Rotate {
                    axis,
                    qubit,
                    param: layer * self.n_qubits + qubit,
                })
            }))
        })
    }
}

/// `build_circuit_spec` with a named entangler preset.
pub fn build_circuit_spec(n_qubits: usize, n_blocks: usize, preset: &str, gate_order: GateOrder) -> Result<CircuitSpec> {
    CircuitSpec::new(n_qubits, n_blocks, Entangler::from_preset(preset)?, gate_order)
}

/// One step of the circuit.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Op<'a> {
    Entangle(&'a [Edge]),
    Rotate { axis: Axis, qubit: usize, param: usize },
}

/// Angle grid shaped `n_layers × n_qubits`, stored layer-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamMatrix {
    n_layers: usize,
    n_qubits: usize,
    values: Vec<f64>,
}

impl ParamMatrix {
    pub fn zeros(spec: &CircuitSpec) -> Self {
        Self {
            n_layers: spec.n_layers(),
            n_qubits: spec.n_qubits(),
            values: vec![0.0; spec.param_count()],
        }
    }

    pub fn from_vec(spec: &CircuitSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return Err(Error::ShapeMismatch {
                expected: spec.param_count(),
                actual: values.len(),
            });
        }
        Ok(Self {
            n_layers: spec.n_layers(),
            n_qubits: spec.n_qubits(),
            values,
        })
    }

    /// Grid without a circuit at hand; `values` must hold `n_layers * n_qubits` angles.
    pub fn from_shape(n_layers: usize, n_qubits: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_layers * n_qubits, "parameter grid shape");
        Self {
            n_layers,
            n_qubits,
            values,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, layer: usize, qubit: usize) -> f64 {
        self.values[layer * self.n_qubits + qubit]
    }

    pub fn set(&mut self, layer: usize, qubit: usize, value: f64) {
        self.values[layer * self.n_qubits + qubit] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn check_shape(&self, spec: &CircuitSpec) -> Result<()> {
        if self.n_layers != spec.n_layers() || self.n_qubits != spec.n_qubits() {
            return Err(Error::ShapeMismatch {
                expected: spec.param_count(),
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Runs the circuit from `|0…0⟩`.
pub fn run_circuit(spec: &CircuitSpec, params: &ParamMatrix) -> Result<StateVector> {
    let mut state = StateVector::zero(spec.n_qubits())?;
    run_circuit_into(spec, params, &mut state)?;
    Ok(state)
}

/// Runs the circuit from `|0…0⟩` into an existing buffer.
pub fn run_circuit_into(spec: &CircuitSpec, params: &ParamMatrix, state: &mut StateVector) -> Result<()> {
    params.check_shape(spec)?;
    if state.n_qubits() != spec.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: spec.n_qubits(),
            actual: state.n_qubits(),
        });
    }
    state.reset();
    let theta = params.as_slice();
    for op in spec.ops() {
        match op {
            Op::Entangle(edges) => edges.iter().for_each(|&e| state.cz(e)),
            Op::Rotate { axis, qubit, param } => state.rotate(axis, qubit, theta[param]),
        }
    }
    Ok(())
}

/// Final-layer parameters that cannot affect the cost: the rotation generator
/// commutes with every term's Pauli on that qubit. Returns `(layer, qubit)`
/// pairs, 0-based, in flat order.
pub fn detect_inactive(spec: &CircuitSpec, obs: &Observable) -> Result<Vec<(usize, usize)>> {
    if obs.n_qubits() != spec.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: spec.n_qubits(),
            actual: obs.n_qubits(),
        });
    }
    let layer = spec.n_layers() - 1;
    let generator: Pauli = spec.layer_axis(layer).generator();
    Ok((0..spec.n_qubits())
        .filter(|&q| obs.terms().iter().all(|t| t.string.get(q).commutes_with(generator)))
        .map(|q| (layer, q))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn presets() {
        let s = build_circuit_spec(4, 2, "chain", GateOrder::RxRy).unwrap();
        assert_eq!(s.block_edges(0), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(s.block_edges(1), s.block_edges(0));
        assert_eq!(s.param_count(), 16);

        let s = build_circuit_spec(1, 3, "chain", GateOrder::RxRy).unwrap();
        assert!(s.block_edges(0).is_empty());
        assert_eq!(s.param_count(), 6);

        let s = CircuitSpec::new(3, 1, Entangler::Explicit(vec![vec![(0, 2)]]), GateOrder::RyRx).unwrap();
        assert_eq!(s.block_edges(0), &[(0, 2)]);

        let s = build_circuit_spec(4, 1, "ring", GateOrder::RxRy).unwrap();
        assert_eq!(s.block_edges(0), &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(build_circuit_spec(4, 1, "none", GateOrder::RxRy).unwrap().block_edges(0).is_empty());

        assert!(matches!(build_circuit_spec(4, 1, "star", GateOrder::RxRy), Err(Error::UnknownName { .. })));
        assert!(CircuitSpec::new(3, 1, Entangler::Explicit(vec![vec![(0, 3)]]), GateOrder::RxRy).is_err());
        assert!(build_circuit_spec(2, 0, "chain", GateOrder::RxRy).is_err());
    }

    #[test]
    fn layout() {
        let s = build_circuit_spec(2, 2, "chain", GateOrder::RxRy).unwrap();
        assert_eq!(s.flat_index(0, 0).unwrap(), 0);
        assert_eq!(s.flat_index(3, 1).unwrap(), 7);
        for flat in 0..s.param_count() {
            let (l, q) = s.layer_qubit(flat).unwrap();
            assert_eq!(s.flat_index(l, q).unwrap(), flat);
        }
        assert!(s.flat_index(4, 0).is_err());
        let s = build_circuit_spec(1, 1, "chain", GateOrder::RxRyRx).unwrap();
        assert_eq!(s.param_count(), 3);
    }

    #[test]
    fn op_order_is_cz_then_rx_then_ry() {
        let s = build_circuit_spec(2, 1, "chain", GateOrder::RxRy).unwrap();
        let ops: Vec<Op<'_>> = s.ops().collect();
        assert_eq!(ops[0], Op::Entangle(&[(0, 1)]));
        assert_eq!(ops[1], Op::Rotate { axis: Axis::X, qubit: 0, param: 0 });
        assert_eq!(ops[2], Op::Rotate { axis: Axis::X, qubit: 1, param: 1 });
        assert_eq!(ops[3], Op::Rotate { axis: Axis::Y, qubit: 0, param: 2 });
        assert_eq!(ops.len(), 5);
    }

    #[test]
    fn run_examples() {
        let s = build_circuit_spec(1, 1, "none", GateOrder::RxRy).unwrap();
        let st = run_circuit(&s, &ParamMatrix::zeros(&s)).unwrap();
        assert_eq!(st.amplitudes()[0], Complex64::new(1.0, 0.0));

        let p = ParamMatrix::from_vec(&s, vec![0.0, PI]).unwrap();
        let st = run_circuit(&s, &p).unwrap();
        assert!((st.amplitudes()[1].norm() - 1.0).abs() < 1e-15);

        assert!(matches!(
            ParamMatrix::from_vec(&s, vec![0.0; 3]),
            Err(Error::ShapeMismatch { expected: 2, actual: 3 })
        ));
    }

    /// Two-qubit circuit against explicit 4×4 matrix products.
    #[test]
    fn run_matches_dense_products() {
        type M = [[Complex64; 4]; 4];
        let c = |r: f64, i: f64| Complex64::new(r, i);
        let mul = |a: &M, b: &M| {
            let mut o = [[c(0.0, 0.0); 4]; 4];
            for r in 0..4 {
                for k in 0..4 {
                    for col in 0..4 {
                        o[r][col] += a[r][k] * b[k][col];
                    }
                }
            }
            o
        };
        // Single-qubit 2×2 u on qubit q (q = 0 is the low bit).
        let embed = |u: [[Complex64; 2]; 2], q: usize| {
            let mut o = [[c(0.0, 0.0); 4]; 4];
            for r in 0..4usize {
                for col in 0..4usize {
                    let other = 1 - q;
                    if (r >> other) & 1 == (col >> other) & 1 {
                        o[r][col] = u[(r >> q) & 1][(col >> q) & 1];
                    }
                }
            }
            o
        };
        let rx = |t: f64| {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        };
        let ry = |t: f64| {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        };
        let mut cz = [[c(0.0, 0.0); 4]; 4];
        for k in 0..4 {
            cz[k][k] = c(if k == 3 { -1.0 } else { 1.0 }, 0.0);
        }
        let spec = build_circuit_spec(2, 1, "chain", GateOrder::RxRy).unwrap();
        for theta in [[PI / 2.0, 0.0, 0.0, 0.0], [0.3, -1.1, 0.7, 2.0]] {
            let p = ParamMatrix::from_vec(&spec, theta.to_vec()).unwrap();
            let mut u = cz;
            for (k, t) in theta.iter().enumerate() {
                let g = if k < 2 { rx(*t) } else { ry(*t) };
                u = mul(&embed(g, k % 2), &u);
            }
            let got = run_circuit(&spec, &p).unwrap();
            for r in 0..4 {
                assert!((got.amplitudes()[r] - u[r][0]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn inactive_examples() {
        let yy = Observable::single(1.0, PauliString::parse("YY", 2).unwrap()).unwrap();
        for l in 1..4 {
            let s = build_circuit_spec(2, l, "chain", GateOrder::RxRy).unwrap();
            assert_eq!(detect_inactive(&s, &yy).unwrap(), vec![(2 * l - 1, 0), (2 * l - 1, 1)]);
        }
        let zz = Observable::from_words(2, &[(1.0, "ZZ")]).unwrap();
        let s = build_circuit_spec(2, 2, "chain", GateOrder::RxRy).unwrap();
        assert!(detect_inactive(&s, &zz).unwrap().is_empty());
        let xy = Observable::from_words(2, &[(1.0, "XY")]).unwrap();
        let s = build_circuit_spec(2, 3, "chain", GateOrder::RyRx).unwrap();
        assert_eq!(detect_inactive(&s, &xy).unwrap(), vec![(5, 0)]);
    }
}
