//! Numerical laboratory for blow-up analysis of the semilinear wave
//! equation with scale-invariant damping
//!
//!   u_tt - Delta u + mu/(1+t) u_t = |u|^p
//!
//! at the critical Strauss exponent p = p_S(n + mu). The crate packages the
//! analytic machinery at desk scale: exponent algebra, modified Bessel
//! functions and the Bessel-built test-function family b_q, the functional
//! inequality chain on numerical solutions, the Riccati comparison argument
//! with its closed-form blow-up time, and a radial finite-difference solver
//! that measures lifespans and checks the predicted scaling laws.

// Validation uses `!(x > 0.0)`-style guards throughout so NaN inputs are
// rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod functional_chain;
pub mod ode_comparison;
pub mod pde_solver;
pub mod quadrature;
pub mod special;
pub mod test_functions;

pub use error::{Error, Result};
pub use exponents::{AdmissibilityReport, ExponentReport, ModelParams};
pub use functional_chain::{DataPair, FunctionalTrace, RadialProfile};
pub use ode_comparison::RiccatiSpec;
pub use pde_solver::{
    FitMode, LifespanEstimate, RunStatus, ScalingFit, SimulationTrace, SolverConfig,
};
pub use quadrature::QuadratureConfig;
pub use special::{BesselEval, Hyp2f1Eval};
pub use test_functions::TestFunctionSpec;
