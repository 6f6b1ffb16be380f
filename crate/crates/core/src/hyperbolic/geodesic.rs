use num_complex::Complex64;
use serde::Serialize;

use super::point::UHPoint;
use crate::error::{KickedError, Result};
use crate::moebius::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GeodesicKind {
    /// `x = abscissa`, running from `y0` to `y1`.
    Vertical { abscissa: f64, y0: f64, y1: f64 },
    /// Circle around `(center, 0)`, angles measured from the positive real direction.
    Semicircle {
        center: f64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

/// The oriented geodesic arc from `p` to `q`, parametrized by hyperbolic arclength.
///
/// `frame` sends the full geodesic onto the imaginary axis with `p ↦ i` and
/// `q ↦ i·e^length`, so `z(s) = frame⁻¹(i eˢ)` for `s ∈ [0, length]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Geodesic {
    pub kind: GeodesicKind,
    pub p: UHPoint,
    pub q: UHPoint,
    pub length: f64,
    #[serde(skip)]
    inv: Mat2,
}

/// Orientation preserving map sending the geodesic from `back` to `fwd` (ideal
/// endpoints, `None` meaning ∞) onto the upward imaginary axis with `p ↦ i`.
pub(crate) fn axis_frame(back: Option<f64>, fwd: Option<f64>, p: &UHPoint) -> Mat2 {
    let m0 = match (back, fwd) {
        (Some(xb), None) => Mat2::unchecked(1.0, -xb, 0.0, 1.0),
        (None, Some(xf)) => Mat2::unchecked(0.0, -1.0, 1.0, -xf),
        (Some(xb), Some(xf)) => {
            let s = (xb - xf).signum();
            let k = (s * (xb - xf)).sqrt();
            Mat2::unchecked(1.0 / k, -xb / k, s / k, -s * xf / k)
        }
        (None, None) => Mat2::IDENTITY,
    };
    let h = m0.act(p.z()).im;
    let r = h.sqrt();
    Mat2::unchecked(1.0 / r, 0.0, 0.0, r).mul(&m0)
}

impl Geodesic {
    pub fn between(p: UHPoint, q: UHPoint) -> Result<Geodesic> {
        if p == q {
            return Err(KickedError::Degenerate(
                "geodesic endpoints coincide".into(),
            ));
        }
        let (kind, back, fwd) = if p.x == q.x {
            let kind = GeodesicKind::Vertical {
                abscissa: p.x,
                y0: p.y,
                y1: q.y,
            };
            if q.y > p.y {
                (kind, Some(p.x), None)
            } else {
                (kind, None, Some(p.x))
            }
        } else {
            let pn = p.x * p.x + p.y * p.y;
            let qn = q.x * q.x + q.y * q.y;
            let center = (qn - pn) / (2.0 * (q.x - p.x));
            let radius = (p.x - center).hypot(p.y);
            let kind = GeodesicKind::Semicircle {
                center,
                radius,
                theta0: p.y.atan2(p.x - center),
                theta1: q.y.atan2(q.x - center),
            };
            if q.x > p.x {
                (kind, Some(center - radius), Some(center + radius))
            } else {
                (kind, Some(center + radius), Some(center - radius))
            }
        };
        let frame = axis_frame(back, fwd, &p);
        Ok(Geodesic {
            kind,
            p,
            q,
            length: p.dist(&q),
            inv: frame.inverse(),
        })
    }

    pub fn reversed(&self) -> Result<Geodesic> {
        Geodesic::between(self.q, self.p)
    }

    /// Point at arclength `s` from `p`.
    pub fn point(&self, s: f64) -> Complex64 {
        self.inv.act(Complex64::new(0.0, s.exp()))
    }

    /// Point and unit-speed velocity at arclength `s`.
    pub fn point_and_velocity(&self, s: f64) -> (Complex64, Complex64) {
        let w = Complex64::new(0.0, s.exp());
        (self.inv.act(w), self.inv.act_derivative(w) * w)
    }

    /// Ideal endpoints `(backward, forward)` of the full geodesic; `None` is ∞.
    pub fn ideal_endpoints(&self) -> (Option<f64>, Option<f64>) {
        let m = &self.inv;
        let back = (m.d != 0.0).then(|| m.b / m.d);
        let fwd = (m.c != 0.0).then(|| m.a / m.c);
        (back, fwd)
    }

    /// Smallest height reached on the arc.
    pub fn min_height(&self) -> f64 {
        self.p.y.min(self.q.y)
    }

    /// Largest height reached on the arc.
    pub fn max_height(&self) -> f64 {
        match self.kind {
            GeodesicKind::Vertical { y0, y1, .. } => y0.max(y1),
            GeodesicKind::Semicircle {
                center, radius, ..
            } => {
                if (self.p.x - center) * (self.q.x - center) <= 0.0 {
                    radius
                } else {
                    self.p.y.max(self.q.y)
                }
            }
        }
    }
}

pub fn geodesic_between(p: UHPoint, q: UHPoint) -> Result<Geodesic> {
    Geodesic::between(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> UHPoint {
        UHPoint::new(x, y).unwrap()
    }

    #[test]
    fn vertical_example() {
        let g = geodesic_between(pt(0.0, 1.0), pt(0.0, 2.0)).unwrap();
        assert!(matches!(g.kind, GeodesicKind::Vertical { abscissa, .. } if abscissa == 0.0));
        assert!((g.length - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn semicircle_example() {
        let g = geodesic_between(pt(0.0, 3.0), pt(1.0, 3.0)).unwrap();
        let GeodesicKind::Semicircle { center, radius, .. } = g.kind else {
            panic!("expected semicircle")
        };
        assert!((center - 0.5).abs() < 1e-15);
        assert!((radius - 37f64.sqrt() / 2.0).abs() < 1e-14);
        assert_eq!(g.min_height(), 3.0);
        let (back, fwd) = g.ideal_endpoints();
        assert!((back.unwrap() - (0.5 - radius)).abs() < 1e-12);
        assert!((fwd.unwrap() - (0.5 + radius)).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(geodesic_between(pt(1.0, 1.0), pt(1.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn endpoints_reproduced(
            px in -5.0..5.0f64, py in 0.05..5.0f64,
            qx in -5.0..5.0f64, qy in 0.05..5.0f64,
            same_x in any::<bool>(),
        ) {
            let qx = if same_x { px } else { qx };
            prop_assume!((px - qx).abs() > 1e-3 || (py - qy).abs() > 1e-3);
            let g = geodesic_between(pt(px, py), pt(qx, qy)).unwrap();
            let a = g.point(0.0);
            let b = g.point(g.length);
            prop_assert!((a - g.p.z()).norm() < 1e-12 * (1.0 + g.p.z().norm()));
            prop_assert!((b - g.q.z()).norm() < 1e-12 * (1.0 + g.q.z().norm()) * g.length.exp().max(1.0));
            let (_, v) = g.point_and_velocity(0.37 * g.length);
            let (z, _) = g.point_and_velocity(0.37 * g.length);
            prop_assert!((v.norm() / z.im - 1.0).abs() < 1e-9);
        }
    }
}
