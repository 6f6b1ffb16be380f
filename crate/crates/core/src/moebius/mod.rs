//! Kicked horocycle flows in PSL(2,R).
//!
//! The evolution `f^{(k)}(τ) = φ_k h^τ ⋯ φ_1 h^τ` with `h^t = (1, t; 0, 1)` is
//! studied through matrix products, entry recursions, the equivalent
//! three-term (discrete Schrödinger) equation, closed forms for triangular
//! kicks, exact trace polynomials and a logarithmic norm gauge.

pub mod cover;
pub mod mat2;
pub mod trace;
pub mod transfer;

pub use cover::{cover_report, CoverReport, IntervalCover};
pub use mat2::{classify_element, symmetric_inverse_witness, ElementClass, ElementKind, Mat2};
pub use trace::{trace_agreement, trace_polynomial, trace_polynomial_float, trace_report, RationalKick, TauPolynomial, TracePolynomialReport};
pub use transfer::*;
