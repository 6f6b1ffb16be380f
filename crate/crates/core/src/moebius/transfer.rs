use serde::{Deserialize, Serialize};

use super::mat2::Mat2;
use crate::error::{invalid, KickedError, Result};
use crate::sequential::{Arena, KickSchedule, KickedSystem};

/// PSL(2,R) acting on itself by left multiplication, with the flow `h^t`
/// given by left multiplication with a one-parameter subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OneParameter {
    /// `(1, t; 0, 1)`.
    #[default]
    Horocycle,
    /// `diag(e^t, e^{−t})`.
    Geodesic,
}

impl OneParameter {
    pub fn at(&self, t: f64) -> Mat2 {
        match self {
            OneParameter::Horocycle => Mat2::horocycle(t),
            OneParameter::Geodesic => Mat2::geodesic(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Psl2 {
    pub flow: OneParameter,
}

impl Arena for Psl2 {
    type Point = Mat2;
    type Kick = Mat2;

    fn flow(&self, t: f64, p: &Mat2) -> Mat2 {
        self.flow.at(t).mul(p)
    }

    fn kick(&self, k: &Mat2, p: &Mat2) -> Mat2 {
        k.mul(p)
    }

    fn validate(&self, p: &Mat2) -> Result<()> {
        if !p.is_finite() || p.det_drift() > 1e-9 {
            return invalid("not a unimodular matrix");
        }
        Ok(())
    }
}

pub type MatrixSystem = KickedSystem<Psl2>;

/// `φ_i = h^{−τ₀}` for every `i`.
pub fn sharpness_kicks(tau0: f64) -> KickSchedule<Mat2> {
    KickSchedule::constant(Mat2::horocycle(-tau0))
}

/// `(1, 0; c_i, 1)` from a list `c_1, c_2, ...`, cycled if shorter than needed.
pub fn unipotent_kicks(c: &[f64]) -> Result<KickSchedule<Mat2>> {
    KickSchedule::cycled(c.iter().map(|&ci| Mat2::lower_unipotent(ci)).collect())
}

/// `f^{(k)}(τ) = φ_k h^τ ⋯ φ_1 h^τ`, `f^{(0)} = 1`.
pub fn evolve_matrix(kicks: &KickSchedule<Mat2>, tau: f64, k: u64) -> Result<Mat2> {
    let mut g = Mat2::IDENTITY;
    let step = Mat2::horocycle(tau);
    for i in 1..=k {
        g = kicks.kick(i).mul(&step.mul(&g));
        if !g.is_finite() {
            return Err(KickedError::NumericalGuard(format!("matrix product overflowed at step {i}")));
        }
    }
    Ok(g)
}

/// All of `f^{(0)}, ..., f^{(K)}`.
pub fn evolve_matrices(kicks: &KickSchedule<Mat2>, tau: f64, k: u64) -> Result<Vec<Mat2>> {
    let step = Mat2::horocycle(tau);
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut g = Mat2::IDENTITY;
    out.push(g);
    for i in 1..=k {
        g = kicks.kick(i).mul(&step.mul(&g));
        if !g.is_finite() {
            return Err(KickedError::NumericalGuard(format!("matrix product overflowed at step {i}")));
        }
        out.push(g);
    }
    Ok(out)
}

pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 1e6;
pub const DEFAULT_ESCAPE_STEPS: u64 = 10_000;

/// Outcome of an escape scan. `escaped_at = None` means the norm stayed
/// below the threshold through `steps`; that is not a proof of boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeVerdict {
    pub tau: f64,
    pub threshold: f64,
    pub steps: u64,
    pub escaped_at: Option<u64>,
    pub running_max: f64,
    pub argmax: u64,
}

impl EscapeVerdict {
    pub fn escaped(&self) -> bool {
        self.escaped_at.is_some()
    }
}

pub fn escape_detector(kicks: &KickSchedule<Mat2>, tau: f64, max_steps: u64, threshold: f64) -> Result<EscapeVerdict> {
    if max_steps == 0 {
        return invalid("escape scan needs K ≥ 1");
    }
    if !(threshold > 2f64.sqrt()) {
        return invalid(format!("threshold must exceed √2, got {threshold}"));
    }
    let step = Mat2::horocycle(tau);
    let mut g = Mat2::IDENTITY;
    let mut verdict = EscapeVerdict {
        tau,
        threshold,
        steps: max_steps,
        escaped_at: None,
        running_max: g.norm(),
        argmax: 0,
    };
    for i in 1..=max_steps {
        g = kicks.kick(i).mul(&step.mul(&g));
        let n = g.norm();
        if n > verdict.running_max {
            verdict.running_max = n;
            verdict.argmax = i;
        }
        if n > threshold {
            verdict.escaped_at = Some(i);
            verdict.steps = i;
            break;
        }
    }
    Ok(verdict)
}

/// Entry sequences of `f^{(k)}(τ) = (α_k, β_k; γ_k, δ_k)` for lower-unipotent kicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySequences {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
}

impl EntrySequences {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn matrix(&self, k: usize) -> Mat2 {
        Mat2::unchecked(self.alpha[k], self.beta[k], self.gamma[k], self.delta[k])
    }
}

/// The coefficients `c_i` of kicks `(1, 0; c_i, 1)`; other kicks are unsupported.
pub fn unipotent_coefficients(kicks: &[Mat2]) -> Result<Vec<f64>> {
    kicks
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.a == 1.0 && m.b == 0.0 && m.d == 1.0 {
                Ok(m.c)
            } else {
                Err(KickedError::Unsupported(format!(
                    "kick {} = {m} is not lower-unipotent (1, 0; c, 1)",
                    i + 1
                )))
            }
        })
        .collect()
}

/// `α_k = α_{k−1} + τγ_{k−1}`, `γ_k = γ_{k−1} + c_k α_k` and likewise for
/// `β, δ`, from the identity. `c[i−1]` is `c_i`.
pub fn entry_recursion(c: &[f64], tau: f64) -> EntrySequences {
    let n = c.len() + 1;
    let mut s = EntrySequences {
        alpha: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
    };
    let (mut al, mut be, mut ga, mut de) = (1.0, 0.0, 0.0, 1.0);
    s.alpha.push(al);
    s.beta.push(be);
    s.gamma.push(ga);
    s.delta.push(de);
    for &ck in c {
        al += tau * ga;
        ga += ck * al;
        be += tau * de;
        de += ck * be;
        s.alpha.push(al);
        s.beta.push(be);
        s.gamma.push(ga);
        s.delta.push(de);
    }
    s
}

/// Entry sequences with a shared power-of-two exponent, so the recursion can
/// run far beyond the f64 range. Rescaling by a power of two is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneScan {
    pub steps: usize,
    /// First `k` at which some entry decreased, per entry (α, β, γ, δ).
    pub first_decrease: [Option<usize>; 4],
    /// Final entries are `mantissas · 2^exponent`.
    pub mantissas: [f64; 4],
    pub exponent: i64,
}

impl MonotoneScan {
    pub fn all_nondecreasing(&self) -> bool {
        self.first_decrease.iter().all(Option::is_none)
    }
}

const RESCALE_AT: f64 = 1e150;
const RESCALE_BY: f64 = 1.0 / 1_267_650_600_228_229_401_496_703_205_376.0; // 2^-100

/// Runs the entry recursion and compares each entry with its predecessor in
/// the same scale (both sides are floating values; the comparison is exact).
pub fn monotone_scan(c: impl IntoIterator<Item = f64>, tau: f64) -> MonotoneScan {
    let mut v: [f64; 4] = [1.0, 0.0, 0.0, 1.0];
    let mut exponent = 0i64;
    let mut first_decrease = [None; 4];
    let mut steps = 0;
    for (k, ck) in c.into_iter().enumerate() {
        let mut prev = v;
        if v.iter().any(|x| x.abs() > RESCALE_AT) {
            for (x, p) in v.iter_mut().zip(prev.iter_mut()) {
                *x *= RESCALE_BY;
                *p *= RESCALE_BY;
            }
            exponent += 100;
        }
        v[0] += tau * v[2];
        v[2] += ck * v[0];
        v[1] += tau * v[3];
        v[3] += ck * v[1];
        for j in 0..4 {
            if v[j] < prev[j] && first_decrease[j].is_none() {
                first_decrease[j] = Some(k + 1);
            }
        }
        steps = k + 1;
    }
    MonotoneScan {
        steps,
        first_decrease,
        mantissas: v,
        exponent,
    }
}

/// `(q_{k−1}, q_k)` for `q_{k+1} = (2 + τc_k) q_k − q_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerState {
    pub k: u64,
    pub q_prev: f64,
    pub q: f64,
    pub tau: f64,
}

impl SchrodingerState {
    pub fn new(tau: f64, q0: f64, q1: f64) -> Self {
        Self {
            k: 1,
            q_prev: q0,
            q: q1,
            tau,
        }
    }

    /// Kernel of `K_{u,τ}`: the boundary rule `q_0 = (2 − u) q_1` with `q_1 = 1`.
    pub fn with_boundary(tau: f64, u: f64) -> Self {
        Self::new(tau, 2.0 - u, 1.0)
    }

    /// Advance using `c_k` for the current `k`.
    pub fn advance(&mut self, ck: f64) {
        let next = (2.0 + self.tau * ck) * self.q - self.q_prev;
        self.q_prev = self.q;
        self.q = next;
        self.k += 1;
    }

    /// Undo [`advance`](Self::advance) given the same `c_k` (index `k − 1` after advancing).
    pub fn retreat(&mut self, ck: f64) {
        let prev = (2.0 + self.tau * ck) * self.q_prev - self.q;
        self.q = self.q_prev;
        self.q_prev = prev;
        self.k -= 1;
    }
}

/// `q_0..q_K` with `q_{k+1} = (2 + τ c_k) q_k − q_{k−1}`; `c[i−1]` is `c_i`
/// and must cover `1..K−1`.
pub fn schrodinger_solve(c: &[f64], tau: f64, q0: f64, q1: f64, k_max: usize) -> Result<Vec<f64>> {
    if k_max < 1 {
        return invalid("K must be at least 1");
    }
    if c.len() + 1 < k_max {
        return invalid(format!("need c_1..c_{} , got {} coefficients", k_max - 1, c.len()));
    }
    let mut q = Vec::with_capacity(k_max + 1);
    q.push(q0);
    q.push(q1);
    let mut st = SchrodingerState::new(tau, q0, q1);
    for ck in &c[..k_max - 1] {
        st.advance(*ck);
        q.push(st.q);
    }
    Ok(q)
}

/// Entries rebuilt from the two fundamental solutions: `α` from
/// `(q_0, q_1) = (1, 1)`, `β` from `(0, τ)`, then `γ_k = (α_{k+1} − α_k)/τ`
/// and `δ_k = (β_{k+1} − β_k)/τ`. Requires `c_1..c_K` and returns `0..K`.
pub fn schrodinger_entries(c: &[f64], tau: f64) -> Result<EntrySequences> {
    if !(tau != 0.0) {
        return invalid("reconstruction divides by τ; τ must be nonzero");
    }
    let k = c.len();
    let alpha = schrodinger_solve(c, tau, 1.0, 1.0, k + 1)?;
    let beta = schrodinger_solve(c, tau, 0.0, tau, k + 1)?;
    let gamma = alpha.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    let delta = beta.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    Ok(EntrySequences {
        alpha: alpha[..=k].to_vec(),
        beta: beta[..=k].to_vec(),
        gamma,
        delta,
    })
}

/// Largest residual of the three-term equation along `q`, relative to the
/// magnitude of its terms.
pub fn schrodinger_residual(c: &[f64], tau: f64, q: &[f64]) -> f64 {
    (1..q.len() - 1)
        .map(|k| {
            let t = (2.0 + tau * c[k - 1]) * q[k];
            let r = q[k + 1] - t + q[k - 1];
            r.abs() / (q[k + 1].abs() + t.abs() + q[k - 1].abs()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Finite-horizon comparison of `max |q_k|` over the fundamental solutions
/// with `max ‖f^{(k)}(τ)‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessLink {
    pub k: usize,
    pub threshold: f64,
    pub max_q: f64,
    pub max_norm: f64,
    pub q_bounded: bool,
    pub norm_bounded: bool,
    /// `max(|α_k|, |β_k|) ≤ ‖f^{(k)}‖ ≤ √2·M·√(1 + 4/τ²)` with `M` the max
    /// of `|q|` through `k + 1`; this is what ties the two growth rates.
    pub within_link_bounds: bool,
}

pub fn boundedness_link_check(kicks: &[Mat2], tau: f64, threshold: f64) -> Result<BoundednessLink> {
    let c = unipotent_coefficients(kicks)?;
    if c.is_empty() {
        return invalid("need at least one kick");
    }
    let k = c.len() - 1;
    let alpha = schrodinger_solve(&c, tau, 1.0, 1.0, k + 1)?;
    let beta = schrodinger_solve(&c, tau, 0.0, tau, k + 1)?;
    let mats = evolve_matrices(&unipotent_kicks(&c)?, tau, k as u64)?;
    let mut within = true;
    let mut running_q: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    let factor = 2f64.sqrt() * (1.0 + 4.0 / (tau * tau)).sqrt();
    for (i, m) in mats.iter().enumerate() {
        running_q = running_q.max(alpha[i].abs()).max(beta[i].abs());
        let ahead = running_q.max(alpha[i + 1].abs()).max(beta[i + 1].abs());
        let n = m.norm();
        max_norm = max_norm.max(n);
        let lower = alpha[i].abs().max(beta[i].abs());
        if n < lower * (1.0 - 1e-9) || n > factor * ahead * (1.0 + 1e-9) {
            within = false;
        }
    }
    let max_q = alpha.iter().chain(&beta).fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(BoundednessLink {
        k,
        threshold,
        max_q,
        max_norm,
        q_bounded: max_q <= threshold,
        norm_bounded: max_norm <= threshold,
        within_link_bounds: within,
    })
}

/// Closed form of the evolution with upper-triangular kicks `(a_i, b_i; 0, 1/a_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperTriangularClosedForm {
    pub k: usize,
    /// `a_1 ⋯ a_k`.
    pub p: f64,
    /// Upper entry at `τ = 0`.
    pub w: f64,
    /// `Σ_{i=1}^k (a_k ⋯ a_i)² / (a_1 ⋯ a_k)`.
    pub z: f64,
}

impl UpperTriangularClosedForm {
    pub fn at(&self, tau: f64) -> Mat2 {
        Mat2::unchecked(self.p, self.w + tau * self.z, 0.0, 1.0 / self.p)
    }
}

pub fn upper_triangular_closed_form(a: &[f64], b: &[f64]) -> Result<UpperTriangularClosedForm> {
    if a.len() != b.len() {
        return invalid("a and b must have the same length");
    }
    if let Some(i) = a.iter().position(|&x| x == 0.0 || !x.is_finite()) {
        return invalid(format!("a_{} must be nonzero and finite", i + 1));
    }
    let k = a.len();
    let p: f64 = a.iter().product();
    // suffix products a_k ⋯ a_i
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for &ai in a.iter().rev() {
        suffix *= ai;
        sum += suffix * suffix;
    }
    // w: upper entry of φ_k ⋯ φ_1
    let (mut diag, mut w) = (1.0, 0.0);
    for (&ai, &bi) in a.iter().zip(b) {
        // (a, b; 0, 1/a)·(P, w; 0, 1/P) has upper entry a·w + b/P
        w = ai * w + bi / diag;
        diag *= ai;
    }
    Ok(UpperTriangularClosedForm { k, p, w, z: sum / p })
}

/// Kicks `(a_i, b_i; 0, 1/a_i)`.
pub fn upper_triangular_kicks(a: &[f64], b: &[f64]) -> Result<KickSchedule<Mat2>> {
    if a.len() != b.len() || a.iter().any(|&x| x == 0.0) {
        return invalid("need matching a, b with all a_i ≠ 0");
    }
    KickSchedule::cycled(a.iter().zip(b).map(|(&ai, &bi)| Mat2::unchecked(ai, bi, 0.0, 1.0 / ai)).collect())
}

/// `ρ(g) = log max(‖g‖_E, 1)`.
pub fn gauge(g: &Mat2) -> f64 {
    g.norm().max(1.0).ln()
}

/// `ρ(g)` for `g = e^{log_scale}·m`.
fn gauge_scaled(m: &Mat2, log_scale: f64) -> f64 {
    (log_scale + m.norm().ln()).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeGrowth {
    /// `ρ(f^{(k)})` for `k = 0..=K`.
    pub rho: Vec<f64>,
    /// Largest `C₂` with `ρ(f^{(k)}) ≥ C₂ k` for `k ∈ [K/2, K]`.
    pub slope: f64,
}

/// Gauge along `f^{(k)} = φ_k s ⋯ φ_1 s` with step `s = h^τ`. The product is
/// carried as a unit-norm matrix times `e^{scale}` so it never overflows.
pub fn gauge_growth(step: &Mat2, kicks: &KickSchedule<Mat2>, k_max: u64) -> Result<GaugeGrowth> {
    if k_max < 1 {
        return invalid("K must be at least 1");
    }
    let mut m = Mat2::IDENTITY;
    let mut log_scale = 0.0;
    let mut rho = Vec::with_capacity(k_max as usize + 1);
    rho.push(gauge(&m));
    for i in 1..=k_max {
        let p = kicks.kick(i).mul(step);
        let raw = [
            p.a * m.a + p.b * m.c,
            p.a * m.b + p.b * m.d,
            p.c * m.a + p.d * m.c,
            p.c * m.b + p.d * m.d,
        ];
        let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(KickedError::NumericalGuard(format!("gauge product degenerated at step {i}")));
        }
        m = Mat2 {
            a: raw[0] / n,
            b: raw[1] / n,
            c: raw[2] / n,
            d: raw[3] / n,
        };
        log_scale += n.ln();
        rho.push(gauge_scaled(&m, log_scale));
    }
    let lo = (k_max / 2).max(1);
    let slope = (lo..=k_max)
        .map(|k| rho[k as usize] / k as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(GaugeGrowth { rho, slope })
}

/// `lim ρ(gⁿ)/n = log` of the spectral radius; `acosh(|tr|/2)` for hyperbolic `g`.
pub fn gauge_homogenization(g: &Mat2) -> f64 {
    let t = g.abs_trace() / 2.0;
    if t <= 1.0 {
        0.0
    } else {
        t.acosh()
    }
}

/// Sampled certificate of sub-additivity and conjugation invariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeCertificate {
    pub samples: usize,
    /// Constant `C` in `ρ(gh) ≤ ρ(g) + ρ(h) + C`. The Euclidean norm is
    /// submultiplicative, so `C = 0`.
    pub c_subadditive: f64,
    pub subadditive_violations: usize,
    /// Largest `ρ(gh) − ρ(g) − ρ(h)` seen (≤ 0 when certified).
    pub worst_subadditive_excess: f64,
    /// `|ρ(aga⁻¹) − ρ(g)| ≤ C'(a) = 2 log ‖a‖_E` since `‖a⁻¹‖_E = ‖a‖_E`.
    pub conjugation_violations: usize,
    pub worst_conjugation_excess: f64,
}

pub fn certify_gauge(triples: &[(Mat2, Mat2, Mat2)]) -> GaugeCertificate {
    let mut cert = GaugeCertificate {
        samples: triples.len(),
        c_subadditive: 0.0,
        subadditive_violations: 0,
        worst_subadditive_excess: f64::NEG_INFINITY,
        conjugation_violations: 0,
        worst_conjugation_excess: f64::NEG_INFINITY,
    };
    for (g, h, a) in triples {
        let sub = gauge(&g.mul(h)) - gauge(g) - gauge(h);
        cert.worst_subadditive_excess = cert.worst_subadditive_excess.max(sub);
        if sub > 1e-12 {
            cert.subadditive_violations += 1;
        }
        let conj = (gauge(&a.mul(g).mul(&a.inverse())) - gauge(g)).abs() - 2.0 * a.norm().ln();
        cert.worst_conjugation_excess = cert.worst_conjugation_excess.max(conj);
        if conj > 1e-9 {
            cert.conjugation_violations += 1;
        }
    }
    cert
}

/// `‖f^{(k)}(τ)‖² − 2` against `k²(τ − τ₀)²` for the kicks `h^{−τ₀}`.
pub fn sharpness_residual(tau0: f64, tau: f64, k: u64) -> Result<f64> {
    let g = evolve_matrix(&sharpness_kicks(tau0), tau, k)?;
    let n = g.norm();
    let lhs = n * n - 2.0;
    let rhs = (k as f64 * (tau - tau0)).powi(2);
    Ok((lhs - rhs).abs() / rhs.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::SeedStream;
    use proptest::prelude::*;

    #[test]
    fn identity_kicks_give_horocycle() {
        let g = evolve_matrix(&KickSchedule::constant(Mat2::IDENTITY), 0.75, 8).unwrap();
        assert_eq!(g, Mat2::horocycle(6.0));
        assert_eq!(evolve_matrix(&KickSchedule::constant(Mat2::IDENTITY), 0.75, 0).unwrap(), Mat2::IDENTITY);
    }

    #[test]
    fn one_lower_unipotent_kick() {
        let (c, t) = (0.3, 1.25);
        let g = evolve_matrix(&unipotent_kicks(&[c]).unwrap(), t, 1).unwrap();
        assert_eq!(g.entries(), [1.0, t, c, 1.0 + c * t]);
        let s = entry_recursion(&[c], t);
        assert_eq!(s.matrix(1).entries(), [1.0, t, c, 1.0 + c * t]);
    }

    #[test]
    fn sharpness_telescopes() {
        let (t0, t) = (0.8, 1.1);
        let g = evolve_matrix(&sharpness_kicks(t0), t, 10).unwrap();
        assert!(g.projective_rel_err(&Mat2::horocycle(10.0 * (t - t0))) < 1e-14);
        assert_eq!(evolve_matrix(&sharpness_kicks(t0), t0, 1000).unwrap(), Mat2::IDENTITY);
        assert!(sharpness_residual(t0, t, 500).unwrap() < 1e-9);
    }

    #[test]
    fn escape_examples() {
        let t0 = 0.8;
        let v = escape_detector(&sharpness_kicks(t0), t0, 1000, 10.0).unwrap();
        assert!(!v.escaped());
        assert!((v.running_max - 2f64.sqrt()).abs() < 1e-15);
        let v = escape_detector(&sharpness_kicks(t0), 1.0, 1000, 10.0).unwrap();
        let k = v.escaped_at.unwrap();
        // first k with 2 + (0.2k)² > 100
        let expected = (1..).find(|&k: &u64| 2.0 + (0.2 * k as f64).powi(2) > 100.0).unwrap();
        assert_eq!(k, expected);
        assert!(escape_detector(&sharpness_kicks(t0), 1.0, 0, 10.0).is_err());
        assert!(escape_detector(&sharpness_kicks(t0), 1.0, 10, 1.0).is_err());
    }

    #[test]
    fn entry_recursion_trivial_cases() {
        let s = entry_recursion(&[0.0; 5], 0.5);
        for k in 0..=5 {
            assert_eq!(s.matrix(k).entries(), [1.0, 0.5 * k as f64, 0.0, 1.0]);
        }
    }

    #[test]
    fn three_way_agreement() {
        let st = SeedStream::new(7);
        let c: Vec<f64> = (0..1000).map(|i| 2.0 * st.uniform(0, i) - 1.0).collect();
        let tau = 1.5;
        let rec = entry_recursion(&c, tau);
        let sch = schrodinger_entries(&c, tau).unwrap();
        let mats = evolve_matrices(&unipotent_kicks(&c).unwrap(), tau, 1000).unwrap();
        for k in 0..=1000 {
            let m = mats[k];
            assert!(rec.matrix(k).projective_rel_err(&m) < 1e-9, "k={k}");
            assert!(sch.matrix(k).projective_rel_err(&m) < 1e-9, "k={k}");
        }
        assert!(schrodinger_residual(&c, tau, &rec.alpha) < 1e-9);
        assert!(schrodinger_residual(&c, tau, &rec.beta) < 1e-9);
    }

    #[test]
    fn schrodinger_trivial_solutions() {
        let q = schrodinger_solve(&[0.0; 9], 1.0, 1.0, 1.0, 10).unwrap();
        assert!(q.iter().all(|&x| x == 1.0));
        let q = schrodinger_solve(&[0.0; 9], 1.0, 0.0, 1.0, 10).unwrap();
        assert_eq!(q, (0..=10).map(|k| k as f64).collect::<Vec<_>>());
    }

    #[test]
    fn link_check() {
        let kicks = vec![Mat2::lower_unipotent(0.0); 50];
        let r = boundedness_link_check(&kicks, 1.0, 1e6).unwrap();
        assert!(r.within_link_bounds);
        assert!((r.max_q - 50.0).abs() < 1e-12);
        assert!(boundedness_link_check(&[Mat2::horocycle(-0.5)], 1.0, 1e6).is_err());
        let st = SeedStream::new(3);
        let kicks: Vec<Mat2> = (0..40)
            .map(|i| Mat2::lower_unipotent(if st.uniform(0, i) < 0.5 { -1.0 } else { 1.0 } * (1.0 + st.uniform(1, i))))
            .collect();
        let r = boundedness_link_check(&kicks, 10.0, 1e6).unwrap();
        assert!(r.within_link_bounds);
        assert!(!r.q_bounded && !r.norm_bounded);
    }

    #[test]
    fn closed_form_examples() {
        let cf = upper_triangular_closed_form(&[1.0; 6], &[0.5; 6]).unwrap();
        assert_eq!((cf.p, cf.z), (1.0, 6.0));
        assert!(cf.at(0.7).projective_rel_err(&Mat2::horocycle(3.0 + 6.0 * 0.7)) < 1e-15);
        let cf = upper_triangular_closed_form(&[2.0], &[0.0]).unwrap();
        assert_eq!((cf.p, cf.z), (2.0, 2.0));
        assert!(upper_triangular_closed_form(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn closed_form_matches_product() {
        let st = SeedStream::new(11);
        let a: Vec<f64> = (0..500).map(|i| 0.5 + 1.5 * st.uniform(0, i)).collect();
        let b: Vec<f64> = (0..500).map(|i| st.uniform(1, i)).collect();
        let tau = 0.7;
        let cf = upper_triangular_closed_form(&a, &b).unwrap().at(tau);
        let g = evolve_matrix(&upper_triangular_kicks(&a, &b).unwrap(), tau, 500).unwrap();
        assert!(cf.entrywise_rel_err(&g) < 1e-12, "{}", cf.entrywise_rel_err(&g));
    }

    #[test]
    fn monotone_for_nonnegative_kicks() {
        let st = SeedStream::new(5);
        for tau in [0.5, 1.0, 2.0] {
            let scan = monotone_scan((0..10_000).map(|i| st.uniform(0, i)), tau);
            assert!(scan.all_nondecreasing());
            assert!(scan.exponent > 0);
            assert!(scan.mantissas.iter().all(|x| x.is_finite()));
        }
        let scan = monotone_scan([1.0, -5.0], 1.0);
        assert!(!scan.all_nondecreasing());
    }

    #[test]
    fn gauge_slopes() {
        let g = gauge_growth(&Mat2::geodesic(1.0), &KickSchedule::constant(Mat2::IDENTITY), 2000).unwrap();
        assert!((g.slope - 1.0).abs() < 1e-3, "{}", g.slope);
        let g = gauge_growth(&Mat2::horocycle(1.0), &KickSchedule::constant(Mat2::IDENTITY), 2000).unwrap();
        assert!(g.slope < 0.01);
        assert!((gauge(&Mat2::IDENTITY) - 2f64.sqrt().ln()).abs() < 1e-15);
        let h = Mat2::new(3.0, 8.0, 1.0, 3.0).unwrap();
        assert!((gauge_homogenization(&h) - 3f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn gauge_certificate_on_random_triples() {
        let st = SeedStream::new(1);
        let mat = |lane: u64, i: u64| {
            let [a, b, c] = st.uniforms::<3>(lane, i);
            let a = 0.2 + 3.0 * a;
            let (b, c) = (6.0 * b - 3.0, 6.0 * c - 3.0);
            Mat2::new(a, b, c, (1.0 + b * c) / a).unwrap()
        };
        let triples: Vec<_> = (0..10_000).map(|i| (mat(0, i), mat(1, i), mat(2, i))).collect();
        let cert = certify_gauge(&triples);
        assert_eq!(cert.subadditive_violations, 0);
        assert_eq!(cert.conjugation_violations, 0);
        assert_eq!(cert.c_subadditive, 0.0);
    }

    proptest! {
        #[test]
        fn schrodinger_is_reversible(q0 in -5.0f64..5.0, q1 in -5.0f64..5.0, c in proptest::collection::vec(-1.0f64..1.0, 1..20)) {
            let mut st = SchrodingerState::new(0.5, q0, q1);
            for ck in &c {
                st.advance(*ck);
            }
            for ck in c.iter().rev() {
                st.retreat(*ck);
            }
            prop_assert_eq!(st.k, 1);
            prop_assert!((st.q_prev - q0).abs() < 1e-9 && (st.q - q1).abs() < 1e-9);
        }

        #[test]
        fn gauge_is_projective(a in 0.2f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let g = Mat2::new(a, b, c, (1.0 + b * c) / a).unwrap();
            let neg = Mat2 { a: -g.a, b: -g.b, c: -g.c, d: -g.d };
            prop_assert_eq!(gauge(&g), gauge(&neg));
        }
    }
}
