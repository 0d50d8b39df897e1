//! Statevector simulation of layered `R_x`/`R_y` + CZ circuits, Gaussian-mixture
//! parameter initialization, gradient-norm bounds and the experiment harness
//! built on them.

pub mod ansatz;
pub mod error;
pub mod gradient;
pub mod harness;
pub mod initstrategy;
pub mod pauli;
pub mod statevector;
pub mod theory;

pub use ansatz::{build_circuit_spec, run_circuit, CircuitSpec, Entangler, GateOrder, ParamMatrix};
pub use error::{Error, Result};
pub use gradient::{cost, grad_adjoint, grad_finite_difference, grad_parameter_shift, mc_grad_stats, GradEngine, GradReport, McStats};
pub use harness::{cmd_bound, cmd_gradscan, cmd_train, cmd_verify, RunConfig, VerifyOptions};
pub use initstrategy::{build_strategy, sample_params, DistSpec, InitStrategy, StrategyKind, StrategyOptions};
pub use pauli::{Observable, Pauli, PauliString};
pub use statevector::StateVector;
