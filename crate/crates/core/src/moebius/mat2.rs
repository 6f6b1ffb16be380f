use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, KickedError, Result};

/// An element of PSL(2,R), stored as the representative with `a > 0`, or
/// `a = 0` and `b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Relative determinant drift above which products are renormalized.
pub const DET_DRIFT: f64 = 1e-12;

/// Tolerance for trace classification.
pub const CLASSIFY_TOL: f64 = 1e-9;

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Validates, scales to determinant one and applies the sign convention.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Mat2> {
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        let det = a * d - b * c;
        if !(det > 0.0) {
            return invalid(format!("matrix must have positive determinant, got {det}"));
        }
        let s = det.sqrt();
        Ok(Mat2 {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
        .signed())
    }

    /// Entries taken as given apart from the sign convention. The caller
    /// guarantees `ad − bc = 1` up to rounding.
    pub fn unchecked(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2 { a, b, c, d }.signed()
    }

    /// `h^t = (1, t; 0, 1)`.
    pub fn horocycle(t: f64) -> Mat2 {
        Mat2::unchecked(1.0, t, 0.0, 1.0)
    }

    /// `(1, 0; c, 1)`.
    pub fn lower_unipotent(c: f64) -> Mat2 {
        Mat2::unchecked(1.0, 0.0, c, 1.0)
    }

    /// `diag(λ, 1/λ)`, `λ ≠ 0`.
    pub fn diag(lambda: f64) -> Mat2 {
        Mat2::unchecked(lambda, 0.0, 0.0, 1.0 / lambda)
    }

    /// `diag(e^t, e^{−t})`.
    pub fn geodesic(t: f64) -> Mat2 {
        Mat2::unchecked(t.exp(), 0.0, 0.0, (-t).exp())
    }

    /// Rotation by angle `θ`, acting on the upper half-plane as rotation by `2θ` about `i`.
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        Mat2::unchecked(c, -s, s, c)
    }

    fn signed(self) -> Mat2 {
        if self.a < 0.0 || (self.a == 0.0 && self.b < 0.0) {
            Mat2 {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
            }
        } else {
            self
        }
    }

    fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// `(det − 1)` relative to `|ad| + |bc|`, computed without overflow.
    pub fn det_drift(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 || !s.is_finite() {
            return f64::INFINITY;
        }
        let (a, b, c, d) = (self.a / s, self.b / s, self.c / s, self.d / s);
        let det = a * d - b * c;
        let scale = (a * d).abs() + (b * c).abs();
        (det - 1.0 / (s * s)).abs() / scale
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Product followed by determinant renormalization when the drift
    /// exceeds [`DET_DRIFT`].
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let m = Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        };
        m.renormalized().signed()
    }

    fn renormalized(self) -> Mat2 {
        if self.det_drift() <= DET_DRIFT {
            return self;
        }
        let s = self.max_abs();
        let (a, b, c, d) = (self.a / s, self.b / s, self.c / s, self.d / s);
        let det = a * d - b * c;
        if !(det > 0.0) {
            return self;
        }
        // x/√(ad − bc) = (x/s)/√det with det taken on the scaled entries
        let r = det.sqrt();
        Mat2 {
            a: a / r,
            b: b / r,
            c: c / r,
            d: d / r,
        }
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2::unchecked(self.d, -self.b, -self.c, self.a)
    }

    pub fn pow(&self, n: u32) -> Mat2 {
        let mut out = Mat2::IDENTITY;
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// `|tr|`, well defined on PSL(2,R).
    pub fn abs_trace(&self) -> f64 {
        self.trace().abs()
    }

    /// Euclidean norm `√(tr g gᵀ)`, at least `√2` for determinant-one matrices.
    pub fn norm(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        let (a, b, c, d) = (self.a / s, self.b / s, self.c / s, self.d / s);
        s * (a * a + b * b + c * c + d * d).sqrt()
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.is_finite())
    }

    /// Largest entrywise difference relative to `other`'s norm, minimized over
    /// the sign ambiguity.
    pub fn projective_rel_err(&self, other: &Mat2) -> f64 {
        let plus = self
            .entries()
            .iter()
            .zip(other.entries())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let minus = self
            .entries()
            .iter()
            .zip(other.entries())
            .map(|(x, y)| (x + y).abs())
            .fold(0.0, f64::max);
        plus.min(minus) / other.norm()
    }

    /// Largest entrywise relative difference; entries of `other` that are zero
    /// must match exactly. Minimized over the sign ambiguity.
    pub fn entrywise_rel_err(&self, other: &Mat2) -> f64 {
        let one = |sign: f64| {
            self.entries()
                .iter()
                .zip(other.entries())
                .map(|(x, y)| {
                    let x = sign * x;
                    if y == 0.0 {
                        if x == 0.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        ((x - y) / y).abs()
                    }
                })
                .fold(0.0, f64::max)
        };
        one(1.0).min(one(-1.0))
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)`.
    pub fn act(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative of the Möbius action, `1/(cz + d)²`.
    pub fn act_derivative(&self, z: Complex64) -> Complex64 {
        let w = self.c * z + self.d;
        1.0 / (w * w)
    }

    pub fn classify(&self) -> ElementClass {
        classify_element(self)
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::mul(&self, &o)
    }
}

impl std::fmt::Display for Mat2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementClass {
    pub kind: ElementKind,
    /// Conjugate to its inverse inside PSL(2,R). Conjugacy inside a discrete
    /// subgroup is a different question and is not decided here.
    pub conjugate_to_inverse: bool,
}

pub fn classify_element(g: &Mat2) -> ElementClass {
    let near_identity = (g.a - 1.0).abs() <= CLASSIFY_TOL
        && (g.d - 1.0).abs() <= CLASSIFY_TOL
        && g.b.abs() <= CLASSIFY_TOL
        && g.c.abs() <= CLASSIFY_TOL;
    let t = g.abs_trace();
    let kind = if near_identity {
        ElementKind::Identity
    } else if t > 2.0 + CLASSIFY_TOL {
        ElementKind::Hyperbolic
    } else if t < 2.0 - CLASSIFY_TOL {
        ElementKind::Elliptic
    } else {
        ElementKind::Parabolic
    };
    ElementClass {
        kind,
        conjugate_to_inverse: matches!(kind, ElementKind::Identity | ElementKind::Hyperbolic),
    }
}

/// In PSL(2,Z) the involution `(0,−1;1,0)` conjugates every symmetric matrix
/// to its inverse. Returns the residual of `s g s⁻¹ g` for a symmetric `g`.
pub fn symmetric_inverse_witness(g: &Mat2) -> Result<f64> {
    if (g.b - g.c).abs() > CLASSIFY_TOL * g.norm() {
        return Err(KickedError::InvalidInput("matrix is not symmetric".into()));
    }
    let s = Mat2::unchecked(0.0, -1.0, 1.0, 0.0);
    let conj = s.mul(g).mul(&s.inverse());
    Ok(conj.mul(g).projective_rel_err(&Mat2::IDENTITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn horocycle_is_a_one_parameter_group() {
        assert_eq!(Mat2::horocycle(0.0), Mat2::IDENTITY);
        assert_eq!(Mat2::horocycle(2.0) * Mat2::horocycle(3.0), Mat2::horocycle(5.0));
        let t = 1.7f64;
        assert!((Mat2::horocycle(t).norm() - (2.0 + t * t).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        assert!((Mat2::IDENTITY.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((Mat2::diag(2.0).norm() - 4.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sign_convention() {
        let m = Mat2::new(-2.0, 0.0, 0.0, -0.5).unwrap();
        assert_eq!(m, Mat2::diag(2.0));
        let m = Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.entries(), [0.0, 1.0, -1.0, 0.0]);
        assert!(Mat2::new(1.0, 0.0, 0.0, -1.0).is_err());
        let m = Mat2::new(2.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(m, Mat2::IDENTITY);
    }

    #[test]
    fn classification_examples() {
        let p = classify_element(&Mat2::horocycle(1.0));
        assert_eq!(p.kind, ElementKind::Parabolic);
        assert!(!p.conjugate_to_inverse);
        let h = classify_element(&Mat2::diag(2.0));
        assert_eq!(h.kind, ElementKind::Hyperbolic);
        assert!(h.conjugate_to_inverse);
        let e = classify_element(&Mat2::rotation(std::f64::consts::PI / 6.0));
        assert!((Mat2::rotation(std::f64::consts::PI / 6.0).trace() - 2.0 * (std::f64::consts::PI / 6.0).cos()).abs() < 1e-15);
        assert_eq!(e.kind, ElementKind::Elliptic);
        assert!(!e.conjugate_to_inverse);
        assert_eq!(classify_element(&Mat2::IDENTITY).kind, ElementKind::Identity);
    }

    #[test]
    fn symmetric_matrices_are_conjugate_to_inverses() {
        let g = Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(symmetric_inverse_witness(&g).unwrap() < 1e-15);
        assert!(symmetric_inverse_witness(&Mat2::horocycle(1.0)).is_err());
    }

    #[test]
    fn huge_products_stay_finite_and_unimodular() {
        let g = Mat2::new(3.0, 8.0, 1.0, 3.0).unwrap();
        let mut p = Mat2::IDENTITY;
        for _ in 0..150 {
            p = p * g;
        }
        assert!(p.is_finite());
        assert!(p.det_drift() <= 1e-9);
        assert!(p.norm() > 1e100);
    }

    fn arb_mat() -> impl Strategy<Value = Mat2> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_filter_map("a≠0", |(a, b, c)| {
            if a.abs() < 0.1 {
                None
            } else {
                Mat2::new(a, b, c, (1.0 + b * c) / a).ok()
            }
        })
    }

    proptest! {
        #[test]
        fn product_keeps_det_one_and_sign(g in arb_mat(), h in arb_mat()) {
            let p = g * h;
            prop_assert!((p.det() - 1.0).abs() <= 1e-9 * (p.norm() * p.norm()).max(1.0));
            prop_assert!(p.a > 0.0 || (p.a == 0.0 && p.b > 0.0));
            prop_assert!(p.norm() >= 2f64.sqrt() * (1.0 - 1e-12));
        }

        #[test]
        fn inverse_is_inverse(g in arb_mat()) {
            prop_assert!((g * g.inverse()).projective_rel_err(&Mat2::IDENTITY) < 1e-12 * g.norm() * g.norm());
        }

        #[test]
        fn norm_is_submultiplicative(g in arb_mat(), h in arb_mat()) {
            prop_assert!((g * h).norm() <= g.norm() * h.norm() * (1.0 + 1e-12));
        }
    }
}
