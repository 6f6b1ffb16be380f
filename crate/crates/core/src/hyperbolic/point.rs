use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::moebius::Mat2;

/// A point `x + iy` of the upper half-plane, `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UHPoint {
    pub x: f64,
    pub y: f64,
}

impl UHPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return invalid(format!("({x}, {y}) is not in the upper half-plane"));
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Hyperbolic distance `2 asinh(|p − q| / (2√(y_p y_q)))`.
    pub fn dist(&self, o: &UHPoint) -> f64 {
        2.0 * ((self.z() - o.z()).norm() / (2.0 * (self.y * o.y).sqrt())).asinh()
    }
}

/// `(az + b)/(cz + d)` with the imaginary part computed as `y/|cz + d|²`.
pub fn mobius_apply(g: &Mat2, p: &UHPoint) -> UHPoint {
    let (x, y) = (p.x, p.y);
    let den = (g.c * x + g.d).powi(2) + (g.c * y).powi(2);
    let re = ((g.a * x + g.b) * (g.c * x + g.d) + g.a * g.c * y * y) / den;
    UHPoint { x: re, y: y / den }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_examples() {
        let p = UHPoint::new(0.0, 3.0).unwrap();
        assert_eq!(mobius_apply(&Mat2::IDENTITY, &p), p);
        assert_eq!(mobius_apply(&Mat2::horocycle(1.0), &p), UHPoint { x: 1.0, y: 3.0 });
        let i = UHPoint::new(0.0, 1.0).unwrap();
        let s = Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap();
        let r = mobius_apply(&s, &i);
        assert!(r.x.abs() < 1e-15 && (r.y - 1.0).abs() < 1e-15);
        assert!(UHPoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn action_is_an_isometry() {
        let g = Mat2::new(3.0, 8.0, 1.0, 3.0).unwrap();
        let p = UHPoint::new(0.3, 1.2).unwrap();
        let q = UHPoint::new(-2.0, 0.4).unwrap();
        let (gp, gq) = (mobius_apply(&g, &p), mobius_apply(&g, &q));
        assert!((gp.dist(&gq) - p.dist(&q)).abs() < 1e-12);
        assert!((gp.z() - g.act(p.z())).norm() < 1e-12);
    }
}
