use num_complex::Complex64;
use serde::Serialize;

use super::form::OneForm;
use super::geodesic::{axis_frame, Geodesic};
use super::group::{FuchsianGroup, Word, DEFAULT_MAX_REDUCTION_STEPS};
use super::point::{mobius_apply, UHPoint};
use super::quadrature::{integrate, Quadrature};
use crate::error::{invalid, Result};
use crate::moebius::Mat2;

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_STAGES: usize = 100_000;
/// Allowed drift of a carried point off the recomputed geodesic.
const DRIFT_WARN: f64 = 1e-6;

/// Integral of `form` along `geod` by adaptive quadrature in global coordinates.
///
/// Accurate while the arc stays at heights well above the coordinate rounding
/// level; use [`integrate_word`] for long orbit arcs.
pub fn integrate_form(form: &dyn OneForm, geod: &Geodesic, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return invalid("quadrature tolerance must be positive");
    }
    Ok(integrate(
        |s| {
            let (z, v) = geod.point_and_velocity(s);
            form.eval(z, v)
        },
        0.0,
        geod.length,
        form.panel(),
        tol,
    ))
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct WalkIntegral {
    pub quadrature: Quadrature,
    /// Arclength covered by the walk.
    pub length: f64,
    /// Number of tiles visited.
    pub stages: usize,
    /// Largest distance between a carried point and the recomputed geodesic.
    pub drift: f64,
}

impl WalkIntegral {
    pub fn flagged(&self) -> bool {
        self.quadrature.flagged || self.drift > DRIFT_WARN
    }
}

/// `∫_{ℓ(x, γx)} α` for a group word `γ`, walking the arc tile by tile.
///
/// In every tile the arc is rebuilt as the geodesic between `δx` and `δγx`, where
/// `δ` is the product of side pairings crossed so far, so only points near the
/// fundamental region are ever represented in floating point. This keeps long
/// arcs, whose far ends sit exponentially close to the real axis, accurate.
pub fn integrate_word(
    form: &dyn OneForm,
    group: &FuchsianGroup,
    x: UHPoint,
    word: &Word,
    tol: f64,
) -> Result<WalkIntegral> {
    if !(tol > 0.0) {
        return invalid("quadrature tolerance must be positive");
    }
    let gamma = group.reduce(word);
    let mut out = WalkIntegral::default();
    if gamma.is_empty() {
        return Ok(out);
    }
    let (red, mut delta) = group.reduce_with_word(x.z(), DEFAULT_MAX_REDUCTION_STEPS);
    out.quadrature.flagged |= !red.converged;
    let mut current = red.w;
    let sides = group.sides();
    let total = total_length(group, x, &gamma);
    let share = |len: f64| tol * (len / total.max(1e-300)).min(1.0);

    loop {
        out.stages += 1;
        if out.stages > MAX_STAGES {
            out.quadrature.flagged = true;
            return Ok(out);
        }
        let a = mobius_apply(&group.matrix(&delta), &x);
        let b = mobius_apply(&group.matrix(&group.concat(&delta, &gamma)), &x);
        if a == b {
            return Ok(out);
        }
        let geod = Geodesic::between(a, b)?;
        let (back, fwd) = geod.ideal_endpoints();
        let here = UHPoint { x: current.re, y: current.im.max(f64::MIN_POSITIVE) };
        let frame = axis_frame(back, fwd, &here);
        let inv = frame.inverse();
        let wc = frame.act(current);
        out.drift = out.drift.max((wc.re / wc.im).abs());
        let u0 = wc.norm().ln();
        let u_end = frame.act(b.z()).norm().ln();

        let mut exit: Option<(f64, usize)> = None;
        for side in &sides {
            let (p, q) = side.violation(&inv);
            if p > 0.0 && q < 0.0 {
                // entering the side's half at u; if that is already behind us we are
                // on it heading inwards, so cross at once
                let u = (0.5 * (-q / p).ln()).max(u0);
                if exit.is_none_or(|(best, _)| u < best) {
                    exit = Some((u, side.letter()));
                }
            }
        }
        let stop = match exit {
            Some((u, _)) => u_end <= u + 1e-12,
            None => true,
        };
        let u1 = if stop { u_end } else { exit.unwrap().0 };
        if u1 > u0 {
            let q = segment(form, &inv, u0, u1, share(u1 - u0));
            out.quadrature = merge(out.quadrature, q);
            out.length += u1 - u0;
        }
        if stop {
            return Ok(out);
        }
        let letter = exit.unwrap().1;
        let m = &group.letters()[letter].matrix;
        current = m.act(inv.act(Complex64::new(0.0, u1.exp())));
        delta = group.concat(&Word(vec![letter]), &delta);
    }
}

fn segment(form: &dyn OneForm, inv: &Mat2, u0: f64, u1: f64, tol: f64) -> Quadrature {
    integrate(
        |u| {
            let w = Complex64::new(0.0, u.exp());
            form.eval(inv.act(w), inv.act_derivative(w) * w)
        },
        u0,
        u1,
        form.panel(),
        tol,
    )
}

fn merge(a: Quadrature, b: Quadrature) -> Quadrature {
    Quadrature {
        value: a.value + b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
        flagged: a.flagged || b.flagged,
    }
}

/// `d(x, γx)` from `2cosh d = ‖P⁻¹γP‖²`, where `P i = x`.
pub fn total_length(group: &FuchsianGroup, x: UHPoint, word: &Word) -> f64 {
    let r = x.y.sqrt();
    let p = Mat2::unchecked(r, x.x / r, 0.0, 1.0 / r);
    let m = p.inverse().mul(&group.matrix(word)).mul(&p);
    let n2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
    (0.5 * n2).max(1.0).acosh()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::hyperbolic::form::{hyperbolic_form, parabolic_form, ZeroForm};
    use crate::hyperbolic::geodesic::geodesic_between;
    use crate::hyperbolic::qm::{r_infinity, QuasiMorphism};
    use crate::KickedError;

    fn modular() -> Arc<FuchsianGroup> {
        Arc::new(
            FuchsianGroup::with_labels(&[
                ('T', Mat2::horocycle(1.0)),
                ('S', Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap()),
            ])
            .unwrap(),
        )
    }

    fn schottky() -> Arc<FuchsianGroup> {
        Arc::new(
            FuchsianGroup::new(&[
                Mat2::new(3.0, 8.0, 1.0, 3.0).unwrap(),
                Mat2::new(2.0, 1.5, 2.0, 2.0).unwrap(),
            ])
            .unwrap(),
        )
    }

    fn pt(x: f64, y: f64) -> UHPoint {
        UHPoint::new(x, y).unwrap()
    }

    /// Compactly supported `ψ(d(z, z0)) dx`, not periodized.
    struct Bump {
        centre: UHPoint,
        radius: f64,
    }

    impl OneForm for Bump {
        fn eval(&self, z: Complex64, v: Complex64) -> (f64, bool) {
            let r = pt(z.re, z.im).dist(&self.centre) / self.radius;
            if r >= 1.0 {
                return (0.0, false);
            }
            ((1.0 - r * r).powi(3) * v.re, false)
        }
        fn bound(&self) -> f64 {
            f64::INFINITY
        }
        fn panel(&self) -> f64 {
            0.25 * self.radius
        }
    }

    #[test]
    fn zero_form_and_disjoint_bump() {
        let g = geodesic_between(pt(0.0, 1.0), pt(3.0, 2.0)).unwrap();
        assert_eq!(integrate_form(&ZeroForm, &g, 1e-8).unwrap().value, 0.0);
        let bump = Bump { centre: pt(10.0, 1.0), radius: 0.5 };
        assert_eq!(integrate_form(&bump, &g, 1e-8).unwrap().value, 0.0);
        let near = Bump { centre: pt(1.5, 2.6), radius: 0.8 };
        let fwd = integrate_form(&near, &g, 1e-10).unwrap().value;
        let back = integrate_form(&near, &g.reversed().unwrap(), 1e-10).unwrap().value;
        assert!(fwd.abs() > 1e-3);
        assert!((fwd + back).abs() < 1e-9);
    }

    #[test]
    fn parabolic_bound_matches_grid_oracle() {
        let form = parabolic_form(modular(), 2.5, 3.0, 8).unwrap();
        // independent oracle: dense sampling of y²u′(y) with u′ from the closed form
        let oracle = (0..=1_000_000)
            .map(|k| {
                let y = 2.5 + 0.5 * k as f64 / 1e6;
                let x: f64 = (y - 2.5) / 0.5;
                y * y * 60.0 * x * x * (1.0 - x) * (1.0 - x)
            })
            .fold(0.0, f64::max);
        assert!(form.bound >= oracle && form.bound < oracle * 1.001);
    }

    #[test]
    fn parabolic_translation_powers() {
        let group = modular();
        let form = parabolic_form(group.clone(), 2.5, 3.0, 8).unwrap();
        let qm = QuasiMorphism::new(form.clone(), pt(0.0, 3.0), DEFAULT_TOL).unwrap();
        let t = group.parse_word("T").unwrap();
        let vals = qm.powers(&t, 30).unwrap();
        for (i, v) in vals.iter().enumerate() {
            assert!((v.value - (i + 1) as f64).abs() < 1e-6, "n = {}: {}", i + 1, v.value);
            assert!(!v.flagged);
        }
        // The direct global-coordinate quadrature agrees on these moderate arcs.
        let g = geodesic_between(pt(0.0, 3.0), pt(7.0, 3.0)).unwrap();
        assert!((integrate_form(&form, &g, 1e-9).unwrap().value - 7.0).abs() < 1e-6);
        let rinf = r_infinity(&vals.iter().map(|v| v.value).collect::<Vec<_>>(), qm.defect_bound()).unwrap();
        assert!((rinf.estimate - 1.0).abs() < 1e-3);
    }

    #[test]
    fn parabolic_defect_and_base_point() {
        let group = modular();
        let form = parabolic_form(group.clone(), 2.5, 3.0, 8).unwrap();
        let qm = QuasiMorphism::new(form, pt(0.0, 3.0), DEFAULT_TOL).unwrap();
        let words: Vec<Word> = group.enumerate(8).into_iter().map(|(w, _)| w).collect();
        let rep = qm.sample_defects(&words, 200, 5).unwrap();
        assert!(rep.max <= PI * qm.form().bound() + 3e-8);
        assert!(rep.max > 0.0);
        assert_eq!(rep.flagged, 0);
        let w = group.parse_word("TTSTtS").unwrap();
        for (x, y) in [(pt(0.0, 3.0), pt(0.2, 1.1)), (pt(-0.4, 5.0), pt(0.1, 0.9))] {
            let shift = qm.base_point_shift(&w, x, y).unwrap();
            assert!(shift <= 2.0 * PI * qm.form().bound() + 1e-8);
        }
    }

    #[test]
    fn walk_matches_direct_quadrature_on_moderate_arcs() {
        let group = modular();
        let form = parabolic_form(group.clone(), 2.5, 3.0, 8).unwrap();
        let x = pt(0.1, 1.7);
        for s in ["TST", "STTTS", "TTTSttS", "ST"] {
            let w = group.parse_word(s).unwrap();
            let walked = integrate_word(&form, &group, x, &w, 1e-10).unwrap();
            let gx = mobius_apply(&group.matrix(&w), &x);
            let direct = integrate_form(&form, &geodesic_between(x, gx).unwrap(), 1e-10).unwrap();
            assert!((walked.quadrature.value - direct.value).abs() < 1e-7, "{s}");
            assert!((walked.length - x.dist(&gx)).abs() < 1e-9 * (1.0 + walked.length));
        }
    }

    #[test]
    fn hyperbolic_form_on_schottky_group() {
        let group = schottky();
        let a = group.matrix(&group.parse_word("A").unwrap());
        let form = hyperbolic_form(group.clone(), &a, 8).unwrap();
        assert!((form.translation_length - 2.0 * 3f64.acosh()).abs() < 1e-12);
        // base point on the isometric circle of A
        let x0 = form.base;
        assert!(((a.c * x0.z() + a.d).norm() - 1.0).abs() < 1e-12);
        // the tile integrates to one over the segment
        let seg = geodesic_between(
            UHPoint::from_complex(form.axis_point(-form.sigma, 0.0)).unwrap(),
            UHPoint::from_complex(form.axis_point(form.sigma, 0.0)).unwrap(),
        )
        .unwrap();
        assert!((integrate_form(&form, &seg, 1e-10).unwrap().value - 1.0).abs() < 1e-8);

        let qm = QuasiMorphism::new(form.clone(), x0, DEFAULT_TOL).unwrap();
        let w = form.g_word();
        let vals: Vec<f64> = qm.powers(&w, 30).unwrap().iter().map(|v| v.value).collect();
        for (i, v) in vals.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-6, "n = {}: {v}", i + 1);
        }
        let rinf = r_infinity(&vals, qm.defect_bound()).unwrap();
        assert!((rinf.estimate - 1.0).abs() < 0.02);
    }

    #[test]
    fn hyperbolic_defect_is_bounded() {
        let group = schottky();
        let a = group.matrix(&group.parse_word("A").unwrap());
        let form = hyperbolic_form(group.clone(), &a, 8).unwrap();
        let qm = QuasiMorphism::new(form.clone(), form.base, DEFAULT_TOL).unwrap();
        let words: Vec<Word> = group.enumerate(8).into_iter().map(|(w, _)| w).collect();
        for w in words.iter().step_by(7) {
            let walk = integrate_word(&form, &group, form.base, w, 1e-8).unwrap();
            let d = total_length(&group, form.base, w);
            assert!((walk.length - d).abs() <= 1e-9 * d, "{}", group.format_word(w));
            assert!(!walk.flagged());
        }
        let rep = qm.sample_defects(&words, 200, 9).unwrap();
        assert!(rep.max <= PI * form.bound + 3e-8, "{} vs {}", rep.max, PI * form.bound);
        assert_eq!(rep.flagged, 0);
    }

    #[test]
    fn symmetric_element_is_rejected() {
        let group = Arc::new(
            FuchsianGroup::new(&[
                Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap(),
                Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap(),
            ])
            .unwrap(),
        );
        let g = Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let err = hyperbolic_form(group, &g, 4).unwrap_err();
        assert!(matches!(err, KickedError::TimeReversingSymmetry { ref word } if word == "B"));
    }

    #[test]
    fn symmetric_element_has_vanishing_homogenization() {
        let group = Arc::new(
            FuchsianGroup::new(&[
                Mat2::new(3.0, 8.0, 1.0, 3.0).unwrap(),
                Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap(),
            ])
            .unwrap(),
        );
        let a = group.matrix(&group.parse_word("A").unwrap());
        let form = hyperbolic_form(group.clone(), &a, 8).unwrap();
        let qm = QuasiMorphism::new(form.clone(), form.base, DEFAULT_TOL).unwrap();
        let g = group.parse_word("ABaB").unwrap();
        let gm = group.matrix(&g);
        let s = group.matrix(&group.parse_word("B").unwrap());
        assert!(s.mul(&gm).mul(&s.inverse()).projective_rel_err(&gm.inverse()) < 1e-9);
        let n_max = 20;
        let vals: Vec<f64> = qm.powers(&g, n_max).unwrap().iter().map(|v| v.value).collect();
        let rinf = r_infinity(&vals, qm.defect_bound()).unwrap();
        assert!(rinf.estimate.abs() <= 2.0 * qm.defect_bound() / n_max as f64);
        // A itself is not symmetric here and keeps a positive homogenization.
        let pos: Vec<f64> = qm.powers(&group.parse_word("A").unwrap(), 8).unwrap().iter().map(|v| v.value).collect();
        assert!((r_infinity(&pos, qm.defect_bound()).unwrap().estimate - 1.0).abs() < 0.02);
    }
}
