//! Hyperbolic plane geometry and quasi-morphisms built from bounded one-forms.
//!
//! Forms are periodized over a finitely generated Fuchsian group by reducing
//! points into a fundamental region bounded by isometric circles, so the
//! periodized value at a point is the tile form pulled back along the reducing
//! element. Orbit arcs are integrated by walking them tile by tile.

pub mod form;
pub mod geodesic;
pub mod group;
pub mod integrate;
pub mod point;
pub mod qm;
pub mod quadrature;

pub use form::{hyperbolic_form, parabolic_form, BoundedOneForm, HyperbolicForm, OneForm, ParabolicForm, Smootherstep, ZeroForm};
pub use geodesic::{geodesic_between, Geodesic, GeodesicKind};
pub use group::{FuchsianGroup, Word};
pub use integrate::{integrate_form, integrate_word, WalkIntegral, DEFAULT_TOL};
pub use point::{mobius_apply, UHPoint};
pub use qm::{r_infinity, DefectReport, QuasiMorphism, QuasiMorphismEstimate, RInfinity, RValue};
pub use quadrature::Quadrature;
