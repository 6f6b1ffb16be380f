//! Kicked Kronecker flows on the d-torus.
//!
//! The flow is `h^t(x) = x + tω mod 1` and kicks are translations by `β_i`,
//! so `f^{(k)}(x) = x + α_k + kτω mod 1` with `α_k = β_1 + ⋯ + β_k`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, KickedError, Result};
use crate::numeric::{circle_dist, frac, frac_mul, CompensatedSum, SeedStream};
use crate::sequential::{map_ordered, Arena, KickSchedule, KickedSystem, Mode};

/// A point of `R^d/Z^d` with every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusVector(Vec<f64>);

impl TorusVector {
    /// Reduces every coordinate mod 1.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        TorusVector(coords.into().into_iter().map(frac).collect())
    }

    pub fn zero(d: usize) -> Self {
        TorusVector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn translate(&self, other: &TorusVector) -> TorusVector {
        TorusVector(self.0.iter().zip(&other.0).map(|(a, b)| frac(a + b)).collect())
    }

    /// Largest coordinatewise circle distance.
    pub fn dist(&self, other: &TorusVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| circle_dist(*a, *b))
            .fold(0.0, f64::max)
    }

    /// `h·x mod 1` for an integer vector `h`.
    pub fn pair(&self, h: &[i64]) -> f64 {
        frac(self.0.iter().zip(h).map(|(x, &hj)| frac_mul(hj as f64, *x)).sum::<f64>())
    }
}

/// How much is known about rational independence of `ω`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Genericity {
    /// Floating-point input; independence is assumed, not checked.
    AssertedGeneric,
    /// `ω = numerators / denominator`, exactly.
    RationalCertified { numerators: Vec<i64>, denominator: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub omega: Vec<f64>,
    pub genericity: Genericity,
}

impl FrequencyVector {
    pub fn asserted_generic(omega: impl Into<Vec<f64>>) -> Result<Self> {
        let omega = omega.into();
        if omega.is_empty() || omega.iter().any(|w| !w.is_finite()) {
            return invalid("frequency vector must be nonempty and finite");
        }
        Ok(Self {
            omega,
            genericity: Genericity::AssertedGeneric,
        })
    }

    pub fn rational(numerators: Vec<i64>, denominator: i64) -> Result<Self> {
        if numerators.is_empty() || denominator == 0 {
            return invalid("rational frequency needs d ≥ 1 and a nonzero denominator");
        }
        let omega = numerators.iter().map(|&n| n as f64 / denominator as f64).collect();
        Ok(Self {
            omega,
            genericity: Genericity::RationalCertified {
                numerators,
                denominator,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn dot(&self, h: &[i64]) -> f64 {
        self.omega.iter().zip(h).map(|(w, &hj)| w * hj as f64).sum()
    }

    /// `Some(true)` if `h·ω = 0` is certified exactly, `None` when only
    /// floating-point information is available.
    pub fn certified_orthogonal(&self, h: &[i64]) -> Option<bool> {
        match &self.genericity {
            Genericity::AssertedGeneric => None,
            Genericity::RationalCertified { numerators, .. } => {
                let s: i128 = numerators.iter().zip(h).map(|(&n, &hj)| n as i128 * hj as i128).sum();
                Some(s == 0)
            }
        }
    }

    /// A nonzero integer `h` with `h·ω = 0`, if the rational data admits one.
    pub fn annihilating_vector(&self) -> Option<Vec<i64>> {
        let Genericity::RationalCertified { numerators, .. } = &self.genericity else {
            return None;
        };
        let d = numerators.len();
        if let Some(j) = numerators.iter().position(|&n| n == 0) {
            let mut h = vec![0; d];
            h[j] = 1;
            return Some(h);
        }
        if d == 1 {
            return None;
        }
        let g = numerators[0].gcd(&numerators[1]);
        let mut h = vec![0; d];
        h[0] = numerators[1] / g;
        h[1] = -numerators[0] / g;
        Some(h)
    }
}

/// The Kronecker flow `x ↦ x + tω` with translation kicks.
#[derive(Debug, Clone, PartialEq)]
pub struct Kronecker {
    pub freq: FrequencyVector,
}

impl Arena for Kronecker {
    type Point = TorusVector;
    type Kick = TorusVector;

    fn flow(&self, t: f64, p: &TorusVector) -> TorusVector {
        TorusVector(
            p.0.iter()
                .zip(&self.freq.omega)
                .map(|(x, w)| frac(x + frac_mul(t, *w)))
                .collect(),
        )
    }

    fn kick(&self, k: &TorusVector, p: &TorusVector) -> TorusVector {
        p.translate(k)
    }

    fn validate(&self, p: &TorusVector) -> Result<()> {
        if p.dim() != self.freq.dim() {
            return invalid(format!("point has dimension {}, torus has {}", p.dim(), self.freq.dim()));
        }
        if p.0.iter().any(|x| !(0.0..1.0).contains(x)) {
            return invalid("torus coordinates must lie in [0, 1)");
        }
        Ok(())
    }
}

pub type TorusSystem = KickedSystem<Kronecker>;

pub fn torus_system(freq: FrequencyVector, tau: f64, kicks: KickSchedule<TorusVector>) -> Result<TorusSystem> {
    KickedSystem::new(Kronecker { freq }, tau, kicks)
}

/// Kicks `β_i ≡ 0`.
pub fn zero_kicks(d: usize) -> KickSchedule<TorusVector> {
    KickSchedule::constant(TorusVector::zero(d))
}

/// Independent uniform kicks keyed by `(seed, i)`.
pub fn random_kicks(d: usize, seed: u64) -> KickSchedule<TorusVector> {
    let stream = SeedStream::new(seed);
    KickSchedule::indexed(move |i| TorusVector((0..d as u64).map(|j| stream.uniform(j, i)).collect()))
}

/// Running `α_k mod 1` per coordinate with an error-tracking carry.
#[derive(Debug, Clone)]
struct CircleAccumulator {
    value: f64,
    carry: f64,
}

impl CircleAccumulator {
    fn new(x: f64) -> Self {
        Self { value: x, carry: 0.0 }
    }

    fn add(&mut self, b: f64) {
        let s = self.value + b;
        let bb = s - self.value;
        self.carry += (self.value - (s - bb)) + (b - bb);
        // s ∈ [0, 2): subtracting its floor is exact
        self.value = s - s.floor();
        if self.carry.abs() > 1e-12 {
            self.value = frac(self.value + self.carry);
            self.carry = 0.0;
        }
    }

    fn get(&self) -> f64 {
        frac(self.value + self.carry)
    }
}

/// Streams `α_0 = 0, α_1, α_2, ...` (mod 1).
pub struct KickPrefix<'a> {
    kicks: &'a KickSchedule<TorusVector>,
    acc: Vec<CircleAccumulator>,
    k: u64,
}

impl<'a> KickPrefix<'a> {
    pub fn new(kicks: &'a KickSchedule<TorusVector>, d: usize) -> Self {
        Self {
            kicks,
            acc: vec![CircleAccumulator::new(0.0); d],
            k: 0,
        }
    }
}

impl Iterator for KickPrefix<'_> {
    type Item = TorusVector;

    fn next(&mut self) -> Option<TorusVector> {
        if self.k > 0 {
            let beta = self.kicks.kick(self.k);
            for (a, b) in self.acc.iter_mut().zip(beta.coords()) {
                a.add(*b);
            }
        }
        self.k += 1;
        Some(TorusVector(self.acc.iter().map(CircleAccumulator::get).collect()))
    }
}

fn closed_form_point(system: &TorusSystem, alpha: &TorusVector, k: u64, x0: &TorusVector) -> TorusVector {
    let kt = k as f64 * system.tau;
    TorusVector(
        x0.0.iter()
            .zip(&alpha.0)
            .zip(&system.arena.freq.omega)
            .map(|((x, a), w)| frac(x + a + frac_mul(kt, *w)))
            .collect(),
    )
}

/// `f^{(k)}(x0) = x0 + α_k + kτω mod 1`.
pub fn torus_evolution_point(system: &TorusSystem, k: u64, x0: &TorusVector) -> Result<TorusVector> {
    system.arena.validate(x0)?;
    let alpha = KickPrefix::new(&system.kicks, x0.dim()).nth(k as usize).expect("infinite iterator");
    Ok(closed_form_point(system, &alpha, k, x0))
}

/// `f^{(0)}(x0), f^{(1)}(x0), ...` from the closed form, without replaying flows.
pub fn evolution_points<'a>(system: &'a TorusSystem, x0: &'a TorusVector) -> impl Iterator<Item = TorusVector> + 'a {
    KickPrefix::new(&system.kicks, x0.dim())
        .enumerate()
        .map(move |(k, alpha)| closed_form_point(system, &alpha, k as u64, x0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylSumResult {
    pub h: Vec<i64>,
    pub n: u64,
    pub tau: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl WeylSumResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn check_h(h: &[i64], d: usize) -> Result<()> {
    if h.len() != d {
        return invalid(format!("h has length {}, torus has dimension {d}", h.len()));
    }
    if h.iter().all(|&x| x == 0) {
        return invalid("h must be a nonzero integer vector");
    }
    Ok(())
}

fn unit(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * phase)
}

/// `S = (1/N) Σ_{k=1}^N exp(2πi h·f^{(k)}(x0))`.
pub fn weyl_sum(h: &[i64], system: &TorusSystem, x0: &TorusVector, n: u64) -> Result<WeylSumResult> {
    check_h(h, system.arena.freq.dim())?;
    system.arena.validate(x0)?;
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for p in evolution_points(system, x0).skip(1).take(n as usize) {
        let z = unit(p.pair(h));
        re.add(z.re);
        im.add(z.im);
    }
    let s = Complex64::new(re.value(), im.value()) / n as f64;
    Ok(WeylSumResult {
        h: h.to_vec(),
        n,
        tau: system.tau,
        re: s.re,
        im: s.im,
        abs: s.norm().min(1.0),
    })
}

/// Which terms of `|S|²` the quadrature integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanSquareTerms {
    Full,
    /// Off-diagonal phases disabled: only `k = l` terms of the squared sum.
    DiagonalOnly,
}

pub const DEFAULT_GRID: usize = 10_000;

/// Per-`k` data of `h·f^{(k)}(0)`: the τ-independent phase `h·α_k` and the
/// frequency `k·h·ω`.
struct WeylPhases {
    alpha_phase: Vec<f64>,
    h_omega: f64,
}

impl WeylPhases {
    fn new(h: &[i64], freq: &FrequencyVector, kicks: &KickSchedule<TorusVector>, n: u64) -> Self {
        let alpha_phase = KickPrefix::new(kicks, freq.dim())
            .skip(1)
            .take(n as usize)
            .map(|a| a.pair(h))
            .collect();
        Self {
            alpha_phase,
            h_omega: freq.dot(h),
        }
    }

    fn sum_at(&self, tau: f64) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (j, a) in self.alpha_phase.iter().enumerate() {
            let k = (j + 1) as f64;
            let z = unit(frac(a + frac_mul(k * tau, self.h_omega)));
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value()) / self.alpha_phase.len() as f64
    }
}

fn check_mean_square_inputs(h: &[i64], freq: &FrequencyVector, a: f64, b: f64, n: u64) -> Result<()> {
    check_h(h, freq.dim())?;
    if !(a < b) {
        return invalid(format!("need a < b, got [{a}, {b}]"));
    }
    if n == 0 {
        return invalid("N must be at least 1");
    }
    match freq.certified_orthogonal(h) {
        Some(true) => Err(KickedError::Degenerate(
            "h·ω = 0 exactly: the mean-square bound does not apply".into(),
        )),
        _ if freq.dot(h) == 0.0 => Err(KickedError::Degenerate("h·ω evaluates to 0".into())),
        _ => Ok(()),
    }
}

/// Composite midpoint rule for `∫_a^b |S_h(N,τ)|² dτ` with base point 0.
#[allow(clippy::too_many_arguments)]
pub fn mean_square_weyl(
    h: &[i64],
    kicks: &KickSchedule<TorusVector>,
    freq: &FrequencyVector,
    interval: (f64, f64),
    n: u64,
    grid_size: usize,
    terms: MeanSquareTerms,
    mode: Mode,
) -> Result<f64> {
    let (a, b) = interval;
    check_mean_square_inputs(h, freq, a, b, n)?;
    if grid_size < 2 {
        return invalid("grid_size must be at least 2");
    }
    let phases = WeylPhases::new(h, freq, kicks, n);
    let dt = (b - a) / grid_size as f64;
    let nodes: Vec<f64> = (0..grid_size).map(|j| a + (j as f64 + 0.5) * dt).collect();
    let values = map_ordered(mode, &nodes, |_, &tau| match terms {
        MeanSquareTerms::Full => phases.sum_at(tau).norm_sqr(),
        MeanSquareTerms::DiagonalOnly => {
            let nf = n as f64;
            let diag: CompensatedSum = phases
                .alpha_phase
                .iter()
                .enumerate()
                .map(|(j, a)| unit(frac(a + frac_mul((j + 1) as f64 * tau, phases.h_omega))).norm_sqr())
                .collect();
            diag.value() / (nf * nf)
        }
    });
    let total: CompensatedSum = values.into_iter().collect();
    Ok(total.value() * dt)
}

/// Exact squared-out value of `∫_a^b |S|²`: the diagonal `(b−a)/N` and the
/// off-diagonal sum of closed-form integrals. O(N²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareDecomposition {
    pub diagonal: f64,
    pub off_diagonal: f64,
}

impl MeanSquareDecomposition {
    pub fn total(&self) -> f64 {
        self.diagonal + self.off_diagonal
    }
}

pub fn mean_square_analytic(
    h: &[i64],
    kicks: &KickSchedule<TorusVector>,
    freq: &FrequencyVector,
    interval: (f64, f64),
    n: u64,
) -> Result<MeanSquareDecomposition> {
    let (a, b) = interval;
    check_mean_square_inputs(h, freq, a, b, n)?;
    let phases = WeylPhases::new(h, freq, kicks, n);
    let w = phases.h_omega;
    let nf = n as f64;
    let ap = &phases.alpha_phase;
    // pairs (k, l) and (l, k) are conjugate, so sum k > l and double the real part
    let mut off = CompensatedSum::new();
    for k in 1..ap.len() {
        for l in 0..k {
            let m = (k - l) as f64;
            let phase = unit(frac(ap[k] - ap[l]));
            let integral = (unit(frac_mul(m * b, w)) - unit(frac_mul(m * a, w))) / Complex64::new(0.0, TAU * m * w);
            off.add(2.0 * (phase * integral).re);
        }
    }
    Ok(MeanSquareDecomposition {
        diagonal: (b - a) / nf,
        off_diagonal: off.value() / (nf * nf),
    })
}

/// Star discrepancy of points in `[0, 1)` via the sorted-points formula
/// `D* = 1/(2N) + max_i |x_(i) − (2i−1)/(2N)|`.
pub fn star_discrepancy(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return invalid("discrepancy needs at least one point");
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x - (2.0 * i as f64 + 1.0) / (2.0 * n)).abs())
        .fold(0.0, f64::max);
    Ok(1.0 / (2.0 * n) + worst)
}

/// Star discrepancy of the first `n` points of a one-dimensional orbit.
pub fn discrepancy_1d(points: &[TorusVector], n: usize) -> Result<f64> {
    if n == 0 || n > points.len() {
        return invalid(format!("need 1 ≤ N ≤ {}, got {n}", points.len()));
    }
    if points.iter().any(|p| p.dim() != 1) {
        return Err(KickedError::Unsupported(
            "star discrepancy is implemented for d = 1 only; use Weyl sums for d > 1".into(),
        ));
    }
    let xs: Vec<f64> = points[..n].iter().map(|p| p.0[0]).collect();
    star_discrepancy(&xs)
}

/// Discrepancy below which an orbit segment is reported as equidistributed.
pub const EQUIDISTRIBUTION_THRESHOLD: f64 = 0.05;

/// `1 + v_2(k)`: surjective onto `{1, 2, ...}` with `u⁻¹(τ)` of density `2^{−τ}`.
pub fn valuation_u(k: u64) -> u64 {
    1 + u64::from(k.trailing_zeros())
}

pub type SurjectionFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// Kicks with `α_k = −u(k)·k·ω mod 1` and `β_k = α_k − α_{k−1}`, for which
/// `f^{(k)}(τ) = k(τ − u(k))ω` vanishes whenever `u(k) = τ`.
#[derive(Clone)]
pub struct BuragoKicks {
    pub omega: f64,
    pub u: SurjectionFn,
}

impl std::fmt::Debug for BuragoKicks {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuragoKicks").field("omega", &self.omega).finish()
    }
}

impl BuragoKicks {
    pub fn valuation(omega: f64) -> Self {
        Self {
            omega,
            u: Arc::new(valuation_u),
        }
    }

    pub fn alpha(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        frac(-frac_mul(((self.u)(k) * k) as f64, self.omega))
    }

    pub fn beta(&self, k: u64) -> f64 {
        frac(self.alpha(k) - self.alpha(k - 1))
    }

    pub fn schedule(&self) -> KickSchedule<TorusVector> {
        let me = self.clone();
        KickSchedule::indexed(move |k| TorusVector(vec![me.beta(k)]))
    }

    /// `k(τ − u(k))ω mod 1`, evaluated directly.
    pub fn closed_form(&self, k: u64, tau: u64) -> f64 {
        let m = k as i128 * (tau as i128 - (self.u)(k) as i128);
        frac_mul(m as f64, self.omega)
    }
}

pub fn burago_kicks(omega: f64, u: Option<SurjectionFn>) -> KickSchedule<TorusVector> {
    BuragoKicks {
        omega,
        u: u.unwrap_or_else(|| Arc::new(valuation_u)),
    }
    .schedule()
}

/// Visits of `f^{(1..=N)}(0)` to 0 and to a symmetric interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitReport {
    pub tau: f64,
    pub n: u64,
    pub hits: u64,
    pub hit_frequency: f64,
    pub interval_half_width: f64,
    pub interval_frequency: f64,
    pub discrepancy: f64,
    pub equidistributed: bool,
}

/// Points within this circle distance of 0 count as exact hits.
pub const HIT_TOLERANCE: f64 = 1e-9;

/// Scans the orbit of 0 under a one-dimensional kicked system.
pub fn hit_report(system: &TorusSystem, n: u64, half_width: f64) -> Result<HitReport> {
    if system.arena.freq.dim() != 1 {
        return Err(KickedError::Unsupported("hit reports are one-dimensional".into()));
    }
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let x0 = TorusVector::zero(1);
    let pts: Vec<f64> = evolution_points(system, &x0).skip(1).take(n as usize).map(|p| p.0[0]).collect();
    let hits = pts.iter().filter(|&&x| circle_dist(x, 0.0) <= HIT_TOLERANCE).count() as u64;
    let inside = pts.iter().filter(|&&x| circle_dist(x, 0.0) < half_width).count() as u64;
    let discrepancy = star_discrepancy(&pts)?;
    Ok(HitReport {
        tau: system.tau,
        n,
        hits,
        hit_frequency: hits as f64 / n as f64,
        interval_half_width: half_width,
        interval_frequency: inside as f64 / n as f64,
        discrepancy,
        equidistributed: discrepancy < EQUIDISTRIBUTION_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys1(omega: f64, tau: f64, kicks: KickSchedule<TorusVector>) -> TorusSystem {
        torus_system(FrequencyVector::asserted_generic(vec![omega]).unwrap(), tau, kicks).unwrap()
    }

    #[test]
    fn evolution_point_examples() {
        let s = sys1(2f64.sqrt(), 1.0, zero_kicks(1));
        let x0 = TorusVector::zero(1);
        assert_eq!(torus_evolution_point(&s, 0, &x0).unwrap(), x0);
        let s = sys1(1.0, 1.0, zero_kicks(1));
        assert_eq!(torus_evolution_point(&s, 7, &x0).unwrap().coords()[0], 0.0);
        let s = sys1(0.0, 1.0, KickSchedule::constant(TorusVector::new(vec![0.25])));
        assert_eq!(torus_evolution_point(&s, 4, &x0).unwrap().coords()[0], 0.0);
    }

    #[test]
    fn core_evolve_matches_closed_form() {
        let s = sys1(2f64.sqrt(), 1.0, zero_kicks(1));
        let x0 = TorusVector::zero(1);
        let orbit = s.evolve(&x0, 2).unwrap();
        let r2 = 2f64.sqrt();
        assert!(circle_dist(orbit.points[1].coords()[0], r2 - 1.0) < 1e-15);
        assert!(circle_dist(orbit.points[2].coords()[0], 2.0 * r2 - 2.0) < 1e-15);

        let s = torus_system(
            FrequencyVector::asserted_generic(vec![0.3, 2f64.sqrt()]).unwrap(),
            1.7,
            random_kicks(2, 5),
        )
        .unwrap();
        let x0 = TorusVector::new(vec![0.2, 0.9]);
        let orbit = s.evolve(&x0, 500).unwrap();
        for (a, b) in orbit.points.iter().zip(evolution_points(&s, &x0)) {
            assert!(a.dist(&b) < 1e-11);
        }
    }

    #[test]
    fn weyl_sum_examples() {
        let s = sys1(1.0, 1.0, zero_kicks(1));
        let r = weyl_sum(&[1], &s, &TorusVector::zero(1), 50).unwrap();
        assert!((r.re - 1.0).abs() < 1e-12 && r.im.abs() < 1e-12);

        let r2 = 2f64.sqrt();
        let s = sys1(r2, 1.0 / (2.0 * r2), zero_kicks(1));
        let r = weyl_sum(&[1], &s, &TorusVector::zero(1), 1000).unwrap();
        assert!(r.abs < 1e-12, "{}", r.abs);
        assert!(weyl_sum(&[0], &s, &TorusVector::zero(1), 10).is_err());
    }

    #[test]
    fn random_kick_weyl_sum_is_small() {
        let s = sys1(2f64.sqrt(), 1.3, random_kicks(1, 42));
        let r = weyl_sum(&[1], &s, &TorusVector::zero(1), 10_000).unwrap();
        assert!(r.abs < 0.05, "{}", r.abs);
    }

    #[test]
    fn single_term_mean_square_is_interval_length() {
        let f = FrequencyVector::asserted_generic(vec![2f64.sqrt()]).unwrap();
        let m = mean_square_weyl(&[1], &zero_kicks(1), &f, (1.0, 2.0), 1, 100, MeanSquareTerms::Full, Mode::Canonical).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let d = mean_square_weyl(&[1], &zero_kicks(1), &f, (1.0, 2.0), 100, 1000, MeanSquareTerms::DiagonalOnly, Mode::Canonical)
            .unwrap();
        assert!((d - 0.01).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_squared_out_sum() {
        let f = FrequencyVector::asserted_generic(vec![2f64.sqrt()]).unwrap();
        for kicks in [zero_kicks(1), random_kicks(1, 3)] {
            let q = mean_square_weyl(&[1], &kicks, &f, (1.0, 2.0), 100, 10_000, MeanSquareTerms::Full, Mode::Fast).unwrap();
            let a = mean_square_analytic(&[1], &kicks, &f, (1.0, 2.0), 100).unwrap();
            assert!((a.diagonal - 0.01).abs() < 1e-15);
            assert!((q - a.total()).abs() < 1e-3 * a.total(), "{q} vs {}", a.total());
        }
    }

    #[test]
    fn rational_orthogonal_h_is_refused() {
        let f = FrequencyVector::rational(vec![1, 2], 3).unwrap();
        assert_eq!(f.annihilating_vector(), Some(vec![2, -1]));
        let r = mean_square_weyl(&[2, -1], &zero_kicks(2), &f, (0.0, 1.0), 10, 10, MeanSquareTerms::Full, Mode::Canonical);
        assert!(matches!(r, Err(KickedError::Degenerate(_))));
        assert!(mean_square_weyl(&[1, 0], &zero_kicks(2), &f, (0.0, 1.0), 10, 10, MeanSquareTerms::Full, Mode::Canonical).is_ok());
        assert_eq!(FrequencyVector::rational(vec![3], 7).unwrap().annihilating_vector(), None);
    }

    #[test]
    fn discrepancy_examples() {
        let n = 1000;
        let even: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        assert!((star_discrepancy(&even).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        assert!((star_discrepancy(&[0.0; 10]).unwrap() - 1.0).abs() < 1e-15);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let golden: Vec<f64> = (0..n).map(|k| frac_mul(k as f64, phi)).collect();
        assert!(star_discrepancy(&golden).unwrap() < 0.01);
        let pts = vec![TorusVector::zero(2); 3];
        assert!(matches!(discrepancy_1d(&pts, 3), Err(KickedError::Unsupported(_))));
    }

    #[test]
    fn burago_hits_exactly_when_u_equals_tau() {
        let b = BuragoKicks::valuation(2f64.sqrt());
        assert_eq!(valuation_u(2), 2);
        assert_eq!(b.closed_form(2, 2), 0.0);
        let s = sys1(2f64.sqrt(), 2.0, b.schedule());
        let p = torus_evolution_point(&s, 2, &TorusVector::zero(1)).unwrap();
        assert!(circle_dist(p.coords()[0], 0.0) < 1e-12);
        for tau in 1..=3u64 {
            let s = sys1(2f64.sqrt(), tau as f64, b.schedule());
            let rep = hit_report(&s, 4096, 0.05).unwrap();
            // oracle: count k with u(k) = τ directly
            let expected = (1..=4096u64).filter(|k| k.trailing_zeros() as u64 + 1 == tau).count() as u64;
            assert_eq!(rep.hits, expected);
            assert!(!rep.equidistributed);
        }
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(x in -1e6f64..1e6) {
            let v = TorusVector::new(vec![x]);
            prop_assert!((0.0..1.0).contains(&v.coords()[0]));
            prop_assert_eq!(TorusVector::new(v.coords().to_vec()), v);
        }

        #[test]
        fn weyl_modulus_is_x0_independent(x0 in 0.0f64..1.0, seed in 0u64..50, tau in 0.1f64..3.0) {
            let s = sys1(2f64.sqrt(), tau, random_kicks(1, seed));
            let a = weyl_sum(&[2], &s, &TorusVector::zero(1), 200).unwrap();
            let b = weyl_sum(&[2], &s, &TorusVector::new(vec![x0]), 200).unwrap();
            prop_assert!(a.abs <= 1.0 && b.abs <= 1.0);
            prop_assert!((a.abs - b.abs).abs() < 1e-12);
        }
    }
}
