use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::geodesic::axis_frame;
use super::group::{FuchsianGroup, Word, DEFAULT_MAX_REDUCTION_STEPS};
use super::point::UHPoint;
use crate::error::{invalid, KickedError, Result};
use crate::moebius::{classify_element, ElementKind, Mat2};
use crate::numeric::linspace;

/// A one-form on the upper half-plane evaluated pointwise.
pub trait OneForm: Send + Sync {
    /// `α_z(v)` and a flag set when the value could not be computed reliably.
    fn eval(&self, z: Complex64, v: Complex64) -> (f64, bool);
    /// Bound `C` on `|dα/Ω|` with `Ω = dx∧dy/y²`.
    fn bound(&self) -> f64;
    /// Hyperbolic length over which the form varies; quadrature panels are no longer.
    fn panel(&self) -> f64;
    fn group(&self) -> Option<&FuchsianGroup> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ZeroForm;

impl OneForm for ZeroForm {
    fn eval(&self, _: Complex64, _: Complex64) -> (f64, bool) {
        (0.0, false)
    }
    fn bound(&self) -> f64 {
        0.0
    }
    fn panel(&self) -> f64 {
        1.0
    }
}

/// Quintic cutoff `6ξ⁵ − 15ξ⁴ + 10ξ³` in `ξ = (y − y0)/(y1 − y0)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Smootherstep {
    pub y0: f64,
    pub y1: f64,
}

impl Smootherstep {
    fn xi(&self, y: f64) -> f64 {
        ((y - self.y0) / (self.y1 - self.y0)).clamp(0.0, 1.0)
    }

    pub fn value(&self, y: f64) -> f64 {
        let x = self.xi(y);
        x * x * x * (10.0 + x * (6.0 * x - 15.0))
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let x = self.xi(y);
        30.0 * x * x * (1.0 - x) * (1.0 - x) / (self.y1 - self.y0)
    }

    /// Certified `max y²u′(y)`: grid maximum plus a Lipschitz margin of half a step.
    pub fn certified_bound(&self, grid: usize) -> f64 {
        let w = self.y1 - self.y0;
        let ys = linspace(self.y0, self.y1, grid);
        let h = w / (grid - 1) as f64;
        let best = ys
            .iter()
            .map(|&y| y * y * self.derivative(y))
            .fold(0.0, f64::max);
        // |u′| ≤ 15/(8w), |u″| ≤ 60·(√3/18)/w²
        let d1 = 15.0 / (8.0 * w);
        let d2 = 60.0 * 3f64.sqrt() / 18.0 / (w * w);
        let lip = 2.0 * self.y1 * d1 + self.y1 * self.y1 * d2;
        best + 0.5 * lip * h
    }
}

const BOUND_GRID: usize = 100_001;

/// Periodization of `u(y) dx` over the cosets of the translation subgroup.
#[derive(Debug, Clone, Serialize)]
pub struct ParabolicForm {
    #[serde(skip)]
    group: Arc<FuchsianGroup>,
    pub cutoff: Smootherstep,
    pub bound: f64,
    pub word_cap: usize,
    pub enumerated: usize,
}

pub fn parabolic_form(group: Arc<FuchsianGroup>, y0: f64, y1: f64, word_cap: usize) -> Result<ParabolicForm> {
    if !(y0 > 0.0 && y1 > y0 && y1.is_finite()) {
        return invalid(format!("cutoff levels need 0 < y0 < y1, got {y0}, {y1}"));
    }
    if group.translation().is_none() {
        return Err(KickedError::Configuration(
            "parabolic form needs a translation generator z ↦ z + t".into(),
        ));
    }
    let words = group.enumerate(word_cap);
    for (w, m) in &words {
        // γ{y ≥ y0} is a horoball of diameter 1/(c² y0) resting on the real axis.
        if m.c.abs() >= 1e-14 && m.c.abs() * y0 <= 1.0 {
            return Err(KickedError::Configuration(format!(
                "horoball {{y ≥ {y0}}} meets its image under {} (|c| = {}); raise y0",
                group.format_word(w),
                m.c.abs()
            )));
        }
    }
    let cutoff = Smootherstep { y0, y1 };
    Ok(ParabolicForm {
        bound: cutoff.certified_bound(BOUND_GRID),
        group,
        cutoff,
        word_cap,
        enumerated: words.len(),
    })
}

impl OneForm for ParabolicForm {
    fn eval(&self, z: Complex64, v: Complex64) -> (f64, bool) {
        let r = self.group.reduce_point(z, DEFAULT_MAX_REDUCTION_STEPS);
        if r.w.im <= self.cutoff.y0 {
            return (0.0, !r.converged);
        }
        (self.cutoff.value(r.w.im) * (r.derivative * v).re, !r.converged)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn panel(&self) -> f64 {
        0.5 * (self.cutoff.y1 / self.cutoff.y0).ln()
    }
    fn group(&self) -> Option<&FuchsianGroup> {
        Some(&self.group)
    }
}

/// Separation margin between distinct translates of the tube.
pub const SEPARATION_EPS: f64 = 0.01;
const INITIAL_TUBE: f64 = 0.25;
const MIN_TUBE: f64 = 1e-6;
const SAMPLES_S: usize = 17;
const SAMPLES_T: usize = 9;
/// `max 6u(1−u²)² = 96/(25√5)`, attained at `u = 1/√5`.
const CHI_SLOPE: f64 = 96.0 / (25.0 * 2.236_067_977_499_79);

/// Bump form `b(s)χ(t) ds` in Fermi coordinates around the axis of `g`, periodized.
///
/// `s` is arclength along the axis measured from its highest point and
/// `t = sinh(distance to the axis)`; both are read off in the axis frame, which
/// sends the axis to the imaginary axis with its repelling end at 0.
#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicForm {
    #[serde(skip)]
    group: Arc<FuchsianGroup>,
    pub g: Mat2,
    pub g_word: String,
    pub translation_length: f64,
    pub repelling: f64,
    pub attracting: f64,
    /// Half-length of the segment carrying the bump.
    pub sigma: f64,
    pub t_max: f64,
    pub bound: f64,
    /// `z(−ℓ/2)`, where the axis meets the isometric circle of `g`.
    pub base: UHPoint,
    pub word_cap: usize,
    pub enumerated: usize,
    #[serde(skip)]
    frame: Mat2,
    #[serde(skip)]
    frame_inv: Mat2,
}

fn fixed_points(g: &Mat2) -> Result<(f64, f64)> {
    if g.c.abs() < 1e-14 {
        return Err(KickedError::Unsupported(
            "hyperbolic element fixing infinity; conjugate the group first".into(),
        ));
    }
    let tr = g.a + g.d;
    let root = (tr * tr - 4.0).sqrt();
    let p = ((g.a - g.d) + root) / (2.0 * g.c);
    let q = ((g.a - g.d) - root) / (2.0 * g.c);
    // attracting where |cz + d| > 1, i.e. |g′| < 1
    if (g.c * p + g.d).abs() > 1.0 {
        Ok((q, p))
    } else {
        Ok((p, q))
    }
}

fn ideal_image(m: &Mat2, x: f64) -> Option<f64> {
    let den = m.c * x + m.d;
    (den.abs() > 1e-300).then(|| (m.a * x + m.b) / den)
}

fn close(a: Option<f64>, b: f64) -> bool {
    a.is_some_and(|a| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
}

fn bump(s: f64, sigma: f64) -> f64 {
    let r = s / sigma;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - r * r;
    35.0 / (32.0 * sigma) * u * u * u
}

fn chi(t: f64, t_max: f64) -> f64 {
    let r = t / t_max;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - r * r;
    u * u * u
}

pub fn hyperbolic_form(group: Arc<FuchsianGroup>, g: &Mat2, word_cap: usize) -> Result<HyperbolicForm> {
    if classify_element(g).kind != ElementKind::Hyperbolic {
        return invalid("g must be hyperbolic");
    }
    let words = group.enumerate(word_cap);
    let g_word = group.find_word(g, word_cap).ok_or_else(|| {
        KickedError::InvalidInput(format!("g is not a group word of length ≤ {word_cap}"))
    })?;
    let (xr, xa) = fixed_points(g)?;
    let ell = 2.0 * (g.abs_trace() / 2.0).acosh();
    for (w, m) in &words {
        let (ir, ia) = (ideal_image(m, xr), ideal_image(m, xa));
        if close(ir, xa) && close(ia, xr) {
            return Err(KickedError::TimeReversingSymmetry {
                word: group.format_word(w),
            });
        }
        if close(ir, xr) && close(ia, xa) {
            let k = 2.0 * (m.abs_trace() / 2.0).acosh() / ell;
            if (k - k.round()).abs() > 1e-6 || k.round() == 0.0 {
                return invalid(format!(
                    "g is not primitive: {} shares its axis with translation length ratio {k}",
                    group.format_word(w)
                ));
            }
        }
    }
    let center = 0.5 * (xr + xa);
    let radius = 0.5 * (xa - xr).abs();
    let top = UHPoint { x: center, y: radius };
    let frame = axis_frame(Some(xr), Some(xa), &top);
    let frame_inv = frame.inverse();
    let on_axis = |s: f64, t: f64| {
        let w = Complex64::new(t, 1.0) * (s.exp() / (1.0 + t * t).sqrt());
        frame_inv.act(w)
    };
    let sigma = ell / 8.0;
    let base_z = on_axis(-0.5 * ell, 0.0);
    let base = UHPoint::new(base_z.re, base_z.im)?;

    let mut t_max = INITIAL_TUBE;
    loop {
        if t_max < MIN_TUBE {
            return Err(KickedError::Configuration(format!(
                "cannot separate the tube around the axis of g within word length {word_cap}; \
                 the segment must lie inside the fundamental region"
            )));
        }
        let samples: Vec<UHPoint> = linspace(-sigma, sigma, SAMPLES_S)
            .into_iter()
            .flat_map(|s| linspace(-t_max, t_max, SAMPLES_T).into_iter().map(move |t| (s, t)))
            .map(|(s, t)| {
                let z = on_axis(s, t);
                UHPoint { x: z.re, y: z.im }
            })
            .collect();
        let inside = samples.iter().all(|p| group.in_region(p.z(), 1e-9));
        let centre = UHPoint { x: top.x, y: top.y };
        let r_u = sigma + t_max.asinh();
        let separated = inside
            && words.iter().all(|(_, m)| {
                let moved = super::point::mobius_apply(m, &centre);
                if centre.dist(&moved) > 2.0 * r_u + SEPARATION_EPS {
                    return true;
                }
                samples.iter().all(|q| {
                    let gq = super::point::mobius_apply(m, q);
                    samples.iter().all(|p| p.dist(&gq) > SEPARATION_EPS)
                })
            });
        if separated {
            break;
        }
        t_max *= 0.5;
    }
    Ok(HyperbolicForm {
        bound: 35.0 / (32.0 * sigma) * CHI_SLOPE / t_max,
        g_word: group.format_word(&g_word),
        group,
        g: *g,
        translation_length: ell,
        repelling: xr,
        attracting: xa,
        sigma,
        t_max,
        base,
        word_cap,
        enumerated: words.len(),
        frame,
        frame_inv,
    })
}

impl HyperbolicForm {
    /// Point at Fermi coordinates `(s, t)` around the axis.
    pub fn axis_point(&self, s: f64, t: f64) -> Complex64 {
        let w = Complex64::new(t, 1.0) * (s.exp() / (1.0 + t * t).sqrt());
        self.frame_inv.act(w)
    }

    /// Fermi coordinates `(s, t)` of `z`.
    pub fn axis_coordinates(&self, z: Complex64) -> (f64, f64) {
        let w = self.frame.act(z);
        (w.norm().ln(), w.re / w.im)
    }

    fn tile(&self, w: Complex64, v: Complex64) -> f64 {
        let wp = self.frame.act(w);
        let s = wp.norm().ln();
        let t = wp.re / wp.im;
        let b = bump(s, self.sigma);
        if b == 0.0 {
            return 0.0;
        }
        let c = chi(t, self.t_max);
        if c == 0.0 {
            return 0.0;
        }
        b * c * (self.frame.act_derivative(w) * v / wp).re
    }

    pub fn g_word(&self) -> Word {
        self.group.parse_word(&self.g_word).unwrap_or_default()
    }
}

impl OneForm for HyperbolicForm {
    fn eval(&self, z: Complex64, v: Complex64) -> (f64, bool) {
        let r = self.group.reduce_point(z, DEFAULT_MAX_REDUCTION_STEPS);
        (self.tile(r.w, r.derivative * v), !r.converged)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn panel(&self) -> f64 {
        0.5 * self.sigma.min(self.t_max.asinh())
    }
    fn group(&self) -> Option<&FuchsianGroup> {
        Some(&self.group)
    }
}

/// The forms this crate can construct, behind one type.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundedOneForm {
    Zero,
    Parabolic(ParabolicForm),
    Hyperbolic(HyperbolicForm),
}

impl BoundedOneForm {
    fn inner(&self) -> &dyn OneForm {
        match self {
            BoundedOneForm::Zero => &ZeroForm,
            BoundedOneForm::Parabolic(f) => f,
            BoundedOneForm::Hyperbolic(f) => f,
        }
    }
}

impl OneForm for BoundedOneForm {
    fn eval(&self, z: Complex64, v: Complex64) -> (f64, bool) {
        self.inner().eval(z, v)
    }
    fn bound(&self) -> f64 {
        self.inner().bound()
    }
    fn panel(&self) -> f64 {
        self.inner().panel()
    }
    fn group(&self) -> Option<&FuchsianGroup> {
        self.inner().group()
    }
}

impl From<ParabolicForm> for BoundedOneForm {
    fn from(f: ParabolicForm) -> Self {
        BoundedOneForm::Parabolic(f)
    }
}

impl From<HyperbolicForm> for BoundedOneForm {
    fn from(f: HyperbolicForm) -> Self {
        BoundedOneForm::Hyperbolic(f)
    }
}
