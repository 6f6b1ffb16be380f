//! Kicked sequential dynamical systems.
//!
//! A kicked system alternates a flow `h^τ` with a sequence of "kicks" `φ_i`,
//! so the evolution after `k` steps is `φ_k h^τ ⋯ φ_1 h^τ`. This crate
//! provides the shared orbit/recurrence machinery ([`sequential`]) and four
//! concrete arenas:
//!
//! * [`torus`]: Kronecker flows on the d-torus, Weyl sums, discrepancy and the
//!   valuation counterexample to kick stability;
//! * [`moebius`]: horocycle flow in PSL(2,R), transfer matrices, the discrete
//!   Schrödinger recursion, trace polynomials and sub-additive gauges;
//! * [`hyperbolic`]: upper half-plane geometry and quasi-morphisms built from
//!   bounded invariant one-forms;
//! * [`hamiltonian`]: the kicked top on the 2-sphere and a flat-torus shear
//!   flow with a time-reversing symmetry.

pub mod error;
pub mod hamiltonian;
pub mod hyperbolic;
pub mod moebius;
pub mod numeric;
pub mod sequential;
pub mod torus;

pub use error::{KickedError, Result};
