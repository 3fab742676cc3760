//! Hermite neural solver for time-fractional PDEs.
//!
//! The crate approximates the Caputo derivative of order α ∈ (0, 1) with
//! closed-form Hermite-interpolation stencils that consume nodal values and
//! time derivatives, obtains those derivatives exactly from a small GELU
//! network, and trains the network with L-BFGS on the collocated residual.
//! A classical L1 time-marching baseline and a convergence-order harness
//! ship alongside.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod caputo;
pub mod error;
pub mod fdm;
pub mod harness;
pub mod hermite;
pub mod lbfgs;
pub mod net;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod special;

pub use caputo::{caputo_monomial, caputo_oracle, relative_l2, FracOrder, ScalarField1D, TimeGrid};
pub use error::{HnsError, Result};
pub use special::{digamma, gamma, ln_gamma};
