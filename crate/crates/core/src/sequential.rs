//! Sequential systems: kick schedules, kicked systems, orbits, counting
//! functions, recurrence ratios and Birkhoff profiles.
//!
//! Everything here is generic over an [`Arena`], which supplies the phase
//! space, the flow `h^t` and the action of kicks. Orbits are produced by
//! `x_i = φ_i h^τ x_{i-1}` with `x_0` the initial point.
//!
//! Finite-horizon estimators never claim limits: a [`RecurrenceReport`] is a
//! lower approximation of `limsup_N max_x ν_{N,A}(x)/N` over the sample set
//! and window it records.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{CompensatedSum, SeedStream};

/// Phase space together with its flow and kick action.
pub trait Arena: Sync {
    type Point: Clone + Send + Sync + fmt::Debug;
    type Kick: Clone + Send + Sync + fmt::Debug;

    /// The flow `h^t`.
    fn flow(&self, t: f64, p: &Self::Point) -> Self::Point;

    /// Apply a kick to a point.
    fn kick(&self, kick: &Self::Kick, p: &Self::Point) -> Self::Point;

    /// Reject points that do not belong to the arena.
    fn validate(&self, _p: &Self::Point) -> Result<()> {
        Ok(())
    }
}

/// Canonical runs use sequential reductions; fast runs may fan out over
/// threads. All reductions in this crate are order-independent or collected
/// in order, so both modes return identical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Canonical,
    Fast,
}

/// Map `f` over `items` either sequentially or with rayon, preserving order.
pub fn map_ordered<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    match mode {
        Mode::Canonical => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        Mode::Fast => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Which rule a [`KickSchedule`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleRule {
    FiniteListCycled,
    ClosedFormIndexed,
    SeededRandomFromGeneratorSet,
}

/// Produces the i-th kick (i ≥ 1). Deterministic in `i`.
pub enum KickSchedule<K> {
    /// `φ_i = list[(i-1) mod len]`.
    Cycled(Vec<K>),
    /// `φ_i = f(i)`.
    Indexed(Arc<dyn Fn(u64) -> K + Send + Sync>),
    /// `φ_i` drawn uniformly from `generators`, keyed by `(seed, i)` only.
    SeededChoice { generators: Vec<K>, seed: u64 },
}

impl<K: Clone> Clone for KickSchedule<K> {
    fn clone(&self) -> Self {
        match self {
            KickSchedule::Cycled(v) => KickSchedule::Cycled(v.clone()),
            KickSchedule::Indexed(f) => KickSchedule::Indexed(Arc::clone(f)),
            KickSchedule::SeededChoice { generators, seed } => KickSchedule::SeededChoice {
                generators: generators.clone(),
                seed: *seed,
            },
        }
    }
}

impl<K: fmt::Debug> fmt::Debug for KickSchedule<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KickSchedule::Cycled(v) => f.debug_tuple("Cycled").field(v).finish(),
            KickSchedule::Indexed(_) => f.write_str("Indexed(<fn>)"),
            KickSchedule::SeededChoice { generators, seed } => f
                .debug_struct("SeededChoice")
                .field("generators", generators)
                .field("seed", seed)
                .finish(),
        }
    }
}

impl<K: Clone> KickSchedule<K> {
    /// The constant schedule; iterates a single map.
    pub fn constant(kick: K) -> Self {
        KickSchedule::Cycled(vec![kick])
    }

    pub fn cycled(kicks: Vec<K>) -> Result<Self> {
        if kicks.is_empty() {
            return invalid("cycled schedule needs at least one kick");
        }
        Ok(KickSchedule::Cycled(kicks))
    }

    pub fn indexed(f: impl Fn(u64) -> K + Send + Sync + 'static) -> Self {
        KickSchedule::Indexed(Arc::new(f))
    }

    pub fn seeded_choice(generators: Vec<K>, seed: u64) -> Result<Self> {
        if generators.is_empty() {
            return invalid("seeded schedule needs a nonempty generator set");
        }
        Ok(KickSchedule::SeededChoice { generators, seed })
    }

    pub fn rule(&self) -> ScheduleRule {
        match self {
            KickSchedule::Cycled(_) => ScheduleRule::FiniteListCycled,
            KickSchedule::Indexed(_) => ScheduleRule::ClosedFormIndexed,
            KickSchedule::SeededChoice { .. } => ScheduleRule::SeededRandomFromGeneratorSet,
        }
    }

    /// The i-th kick, `i ≥ 1`.
    pub fn kick(&self, i: u64) -> K {
        debug_assert!(i >= 1, "kicks are indexed from 1");
        match self {
            KickSchedule::Cycled(v) => v[((i - 1) % v.len() as u64) as usize].clone(),
            KickSchedule::Indexed(f) => f(i),
            KickSchedule::SeededChoice { generators, seed } => {
                let j = SeedStream::new(*seed).below(0, i, generators.len());
                generators[j].clone()
            }
        }
    }
}

/// A flow, a period and a kick schedule.
#[derive(Debug, Clone)]
pub struct KickedSystem<A: Arena> {
    pub arena: A,
    pub tau: f64,
    pub kicks: KickSchedule<A::Kick>,
}

impl<A: Arena> KickedSystem<A> {
    pub fn new(arena: A, tau: f64, kicks: KickSchedule<A::Kick>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return invalid(format!("period must be positive and finite, got {tau}"));
        }
        Ok(Self { arena, tau, kicks })
    }

    /// `x_i = φ_i h^τ x_{i-1}`.
    pub fn step(&self, i: u64, p: &A::Point) -> A::Point {
        let flowed = self.arena.flow(self.tau, p);
        self.arena.kick(&self.kicks.kick(i), &flowed)
    }

    /// Streams `x_0, x_1, ...` without storing them.
    pub fn walk(&self, x0: A::Point) -> OrbitWalk<'_, A> {
        OrbitWalk {
            system: self,
            next: Some(x0),
            index: 0,
        }
    }

    /// The orbit `x_0..x_N`.
    pub fn evolve(&self, x0: &A::Point, n: u64) -> Result<Orbit<A::Point>> {
        if n == 0 {
            return invalid("horizon N must be at least 1");
        }
        self.arena.validate(x0)?;
        let points: Vec<A::Point> = self.walk(x0.clone()).take(n as usize + 1).collect();
        Ok(Orbit { points })
    }
}

/// Iterator over an orbit; yields `x_0` first.
pub struct OrbitWalk<'a, A: Arena> {
    system: &'a KickedSystem<A>,
    next: Option<A::Point>,
    index: u64,
}

impl<A: Arena> Iterator for OrbitWalk<'_, A> {
    type Item = A::Point;

    fn next(&mut self) -> Option<A::Point> {
        let current = self.next.take()?;
        self.index += 1;
        self.next = Some(self.system.step(self.index, &current));
        Some(current)
    }
}

/// A stored orbit `x_0..x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<P> {
    pub points: Vec<P>,
}

impl<P: Clone> Orbit<P> {
    pub fn horizon(&self) -> u64 {
        self.points.len() as u64 - 1
    }

    pub fn initial(&self) -> &P {
        &self.points[0]
    }

    /// Replays every step and returns the largest deviation from the stored point.
    pub fn replay_deviation<A>(&self, system: &KickedSystem<A>, dist: impl Fn(&P, &P) -> f64) -> f64
    where
        A: Arena<Point = P>,
    {
        self.points
            .windows(2)
            .enumerate()
            .map(|(i, w)| dist(&system.step(i as u64 + 1, &w[0]), &w[1]))
            .fold(0.0, f64::max)
    }
}

/// Range of horizons `N_min..=N_max`, `N_min ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub min: u64,
    pub max: u64,
}

impl Window {
    pub fn new(min: u64, max: u64) -> Result<Self> {
        if min == 0 || min > max {
            return invalid(format!("empty or invalid window [{min}, {max}]"));
        }
        Ok(Self { min, max })
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizons(&self) -> impl Iterator<Item = u64> {
        self.min..=self.max
    }
}

/// `ν_{N,A}(x_0)` for every `N` in a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingStats {
    pub window: Window,
    /// `counts[j] = ν_{window.min + j, A}`.
    pub counts: Vec<u64>,
}

impl CountingStats {
    pub fn at(&self, n: u64) -> Option<u64> {
        if n < self.window.min || n > self.window.max {
            return None;
        }
        Some(self.counts[(n - self.window.min) as usize])
    }

    /// `max_N ν_N / N` and the maximizing `N` (smallest on ties).
    pub fn best_ratio(&self) -> (f64, u64) {
        let mut best = (f64::NEG_INFINITY, self.window.min);
        for (j, &c) in self.counts.iter().enumerate() {
            let n = self.window.min + j as u64;
            let r = c as f64 / n as f64;
            if r > best.0 {
                best = (r, n);
            }
        }
        best
    }
}

/// Counts visits to `A` among `x_0..x_{N-1}` for each `N` in the window,
/// reading only as many points as needed.
pub fn count_visits<P>(
    points: impl IntoIterator<Item = P>,
    in_set: impl Fn(&P) -> bool,
    window: Window,
) -> Result<CountingStats> {
    let mut counts = Vec::with_capacity(window.len());
    let mut nu = 0u64;
    let mut seen = 0u64;
    for p in points.into_iter().take(window.max as usize) {
        if in_set(&p) {
            nu += 1;
        }
        seen += 1;
        if seen >= window.min {
            counts.push(nu);
        }
    }
    if seen < window.max {
        return invalid(format!(
            "window end {} exceeds the available orbit length {seen}",
            window.max
        ));
    }
    Ok(CountingStats { window, counts })
}

/// The counting function of a stored orbit; requires `N_max ≤` horizon.
pub fn counting_function<P: Clone>(
    orbit: &Orbit<P>,
    in_set: impl Fn(&P) -> bool,
    window: Window,
) -> Result<CountingStats> {
    if window.max > orbit.horizon() {
        return invalid(format!(
            "window end {} exceeds orbit horizon {}",
            window.max,
            orbit.horizon()
        ));
    }
    count_visits(orbit.points.iter().cloned(), in_set, window)
}

/// Finite-horizon estimate of `R(f_*, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub r_hat: f64,
    pub mu_a: f64,
    pub margin: f64,
    /// `r_hat - mu_a > margin`.
    pub verdict: bool,
    pub window: Window,
    pub samples: usize,
    pub best_sample: usize,
    pub best_n: u64,
}

pub const DEFAULT_MARGIN: f64 = 0.01;

/// Mergeable max-accumulator for recurrence ratios. Ties keep the smaller
/// `(sample, N)` so merges are order-independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMax {
    pub ratio: f64,
    pub sample: usize,
    pub n: u64,
}

impl RatioMax {
    pub fn merge(self, other: RatioMax) -> RatioMax {
        if other.ratio > self.ratio
            || (other.ratio == self.ratio && (other.sample, other.n) < (self.sample, self.n))
        {
            other
        } else {
            self
        }
    }
}

/// `R̂ = max over samples and N in window of ν_{N,A}(x)/N`.
pub fn recurrence_ratio<A: Arena>(
    system: &KickedSystem<A>,
    in_set: impl Fn(&A::Point) -> bool + Sync,
    samples: &[A::Point],
    window: Window,
    mu_a: f64,
    margin: f64,
    mode: Mode,
) -> Result<RecurrenceReport> {
    if samples.is_empty() {
        return invalid("recurrence ratio needs at least one sample point");
    }
    if !(0.0..=1.0).contains(&mu_a) {
        return invalid(format!("mu_A must lie in [0,1], got {mu_a}"));
    }
    for s in samples {
        system.arena.validate(s)?;
    }
    let per_sample = map_ordered(mode, samples, |i, x0| {
        count_visits(system.walk(x0.clone()), &in_set, window).map(|stats| {
            let (ratio, n) = stats.best_ratio();
            RatioMax { ratio, sample: i, n }
        })
    });
    let mut best: Option<RatioMax> = None;
    for r in per_sample {
        let r = r?;
        best = Some(match best {
            None => r,
            Some(b) => b.merge(r),
        });
    }
    let best = best.expect("nonempty samples");
    Ok(RecurrenceReport {
        r_hat: best.ratio,
        mu_a,
        margin,
        verdict: best.ratio - mu_a > margin,
        window,
        samples: samples.len(),
        best_sample: best.sample,
        best_n: best.n,
    })
}

/// Birkhoff averages `I_N(x) = (1/N) Σ_{i<N} F(x_i)` per sample and horizon,
/// plus `H_N = max_x I_N(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffProfile {
    pub window: Window,
    /// `values[s][j] = I_{window.min + j}(samples[s])`.
    pub values: Vec<Vec<f64>>,
    /// `sup[j] = max_s values[s][j]`.
    pub sup: Vec<f64>,
}

impl BirkhoffProfile {
    pub fn at(&self, sample: usize, n: u64) -> f64 {
        self.values[sample][(n - self.window.min) as usize]
    }

    pub fn max_value(&self) -> f64 {
        self.sup.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn averages_along<P>(
    points: impl IntoIterator<Item = P>,
    f: impl Fn(&P) -> f64,
    window: Window,
) -> Vec<f64> {
    let mut sum = CompensatedSum::new();
    let mut out = Vec::with_capacity(window.len());
    for (i, p) in points.into_iter().take(window.max as usize).enumerate() {
        sum.add(f(&p));
        let n = i as u64 + 1;
        if n >= window.min {
            out.push(sum.value() / n as f64);
        }
    }
    out
}

pub fn birkhoff_profile<A: Arena>(
    system: &KickedSystem<A>,
    f: impl Fn(&A::Point) -> f64 + Sync,
    samples: &[A::Point],
    window: Window,
    mode: Mode,
) -> Result<BirkhoffProfile> {
    if samples.is_empty() {
        return invalid("Birkhoff profile needs at least one sample point");
    }
    for s in samples {
        system.arena.validate(s)?;
    }
    let values = map_ordered(mode, samples, |_, x0| {
        averages_along(system.walk(x0.clone()), &f, window)
    });
    let sup = (0..window.len())
        .map(|j| values.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(BirkhoffProfile {
        window,
        values,
        sup,
    })
}

/// Tolerance for the zero-mean certificate of a quasi-integral candidate.
pub const ZERO_MEAN_TOL: f64 = 1e-6;

/// `α̂ = max I_N / max F`. `mean_f` is the arena's measure-oracle value of `∫F dμ`.
pub fn quasi_integral_level(profile: &BirkhoffProfile, max_f: f64, mean_f: f64) -> Result<f64> {
    if !(max_f > 0.0) {
        return invalid(format!("max F must be positive, got {max_f}"));
    }
    if mean_f.abs() > ZERO_MEAN_TOL {
        return invalid(format!(
            "F is not certified zero-mean: |∫F dμ| = {} > {ZERO_MEAN_TOL}",
            mean_f.abs()
        ));
    }
    Ok(profile.max_value() / max_f)
}

/// Thresholds linking quasi-integrals to super-recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperRecurrenceThresholds {
    /// `(α - c)/(1 - c)`, lower bound for `R(f_*, A_c)`.
    pub r_lower: f64,
    /// `γ/(c + γ)`, upper bound for `μ(A_c)`.
    pub mu_upper: f64,
    /// `r_lower - mu_upper`.
    pub delta: f64,
    /// `|c - α/2| < ½ √(α² + 4αγ - 4γ)`.
    pub in_window: bool,
    /// `γ < α²/(4 - 4α)` (vacuous at `α = 1`).
    pub gamma_admissible: bool,
}

pub fn super_recurrence_thresholds(alpha: f64, c: f64, gamma: f64) -> Result<SuperRecurrenceThresholds> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("alpha must lie in (0,1], got {alpha}"));
    }
    if !(c > 0.0) || c >= alpha || c >= 1.0 {
        return invalid(format!("c must lie in (0, alpha) = (0, {alpha}), got {c}"));
    }
    if !(gamma >= 0.0) {
        return invalid(format!("gamma must be nonnegative, got {gamma}"));
    }
    let r_lower = (alpha - c) / (1.0 - c);
    let mu_upper = gamma / (c + gamma);
    let disc = alpha * alpha + 4.0 * alpha * gamma - 4.0 * gamma;
    let in_window = disc > 0.0 && (c - alpha / 2.0).abs() < 0.5 * disc.sqrt();
    let gamma_admissible = alpha >= 1.0 || gamma < alpha * alpha / (4.0 - 4.0 * alpha);
    Ok(SuperRecurrenceThresholds {
        r_lower,
        mu_upper,
        delta: r_lower - mu_upper,
        in_window,
        gamma_admissible,
    })
}

/// Result of checking `N·I_N(x) ≤ c·maxF·(N − ν_N(x)) + maxF·ν_N(x)` with
/// `ν` counting visits to `A_c = {F ≥ c·maxF}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiIntegralCountCheck {
    pub checked: u64,
    pub violations: u64,
    /// Smallest `rhs - lhs` seen, scaled by `N·maxF`.
    pub min_slack: f64,
}

/// Verifies the counting inequality behind the quasi-integral → super-recurrence
/// bound along the orbits of `samples`, at every `N` in the window.
pub fn check_quasi_integral_counts<A: Arena>(
    system: &KickedSystem<A>,
    f: impl Fn(&A::Point) -> f64 + Sync,
    max_f: f64,
    c: f64,
    samples: &[A::Point],
    window: Window,
) -> Result<QuasiIntegralCountCheck> {
    if !(max_f > 0.0) || !(c > 0.0 && c < 1.0) {
        return invalid("need max F > 0 and c in (0,1)");
    }
    let threshold = c * max_f;
    let mut out = QuasiIntegralCountCheck {
        checked: 0,
        violations: 0,
        min_slack: f64::INFINITY,
    };
    for x0 in samples {
        let mut lhs = CompensatedSum::new();
        let mut nu = 0u64;
        for (i, p) in system.walk(x0.clone()).take(window.max as usize).enumerate() {
            let v = f(&p);
            if v > max_f * (1.0 + 1e-15) + 1e-300 {
                return invalid(format!("F exceeds the supplied max F: {v} > {max_f}"));
            }
            lhs.add(v);
            if v >= threshold {
                nu += 1;
            }
            let n = i as u64 + 1;
            if n >= window.min {
                let rhs = threshold * (n - nu) as f64 + max_f * nu as f64;
                let scale = n as f64 * max_f;
                let slack = (rhs - lhs.value()) / scale;
                out.checked += 1;
                // rounding of the compensated sum is far below this
                if slack < -1e-12 {
                    out.violations += 1;
                }
                out.min_slack = out.min_slack.min(slack);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integers under addition; flow adds round(t), kicks add.
    #[derive(Debug, Clone)]
    struct Line;

    impl Arena for Line {
        type Point = i64;
        type Kick = i64;
        fn flow(&self, t: f64, p: &i64) -> i64 {
            p + t.round() as i64
        }
        fn kick(&self, k: &i64, p: &i64) -> i64 {
            p + k
        }
    }

    /// Two points swapped by the first kick and swapped back by the second.
    #[derive(Debug, Clone)]
    struct Flip;

    impl Arena for Flip {
        type Point = u8;
        type Kick = bool;
        fn flow(&self, _t: f64, p: &u8) -> u8 {
            *p
        }
        fn kick(&self, k: &bool, p: &u8) -> u8 {
            if *k {
                1 - p
            } else {
                *p
            }
        }
    }

    #[test]
    fn identity_kicks_iterate_the_flow() {
        let sys = KickedSystem::new(Line, 2.0, KickSchedule::constant(0)).unwrap();
        let orbit = sys.evolve(&5, 3).unwrap();
        assert_eq!(orbit.points, vec![5, 7, 9, 11]);
        assert_eq!(orbit.horizon(), 3);
        assert_eq!(orbit.replay_deviation(&sys, |a, b| (a - b).abs() as f64), 0.0);
    }

    #[test]
    fn evolve_rejects_zero_horizon_and_bad_period() {
        let sys = KickedSystem::new(Line, 1.0, KickSchedule::constant(0)).unwrap();
        assert!(sys.evolve(&0, 0).is_err());
        assert!(KickedSystem::new(Line, 0.0, KickSchedule::constant(0)).is_err());
        assert!(KickedSystem::new(Line, f64::NAN, KickSchedule::constant(0)).is_err());
    }

    #[test]
    fn schedules_are_deterministic() {
        let s = KickSchedule::seeded_choice(vec![1i64, 2, 3], 9).unwrap();
        let a: Vec<i64> = (1..200).map(|i| s.kick(i)).collect();
        let b: Vec<i64> = (1..200).rev().map(|i| s.kick(i)).collect::<Vec<_>>().into_iter().rev().collect();
        assert_eq!(a, b);
        assert!(a.contains(&1) && a.contains(&2) && a.contains(&3));
        let c = KickSchedule::cycled(vec![10i64, 20]).unwrap();
        assert_eq!((1..=4).map(|i| c.kick(i)).collect::<Vec<_>>(), vec![10, 20, 10, 20]);
        assert_eq!(KickSchedule::indexed(|i| i as i64 * 2).kick(3), 6);
        assert!(KickSchedule::<i64>::cycled(vec![]).is_err());
    }

    #[test]
    fn whole_space_counts_every_step() {
        let sys = KickedSystem::new(Line, 1.0, KickSchedule::constant(1)).unwrap();
        let orbit = sys.evolve(&0, 50).unwrap();
        let stats = counting_function(&orbit, |_| true, Window::new(1, 50).unwrap()).unwrap();
        for n in 1..=50 {
            assert_eq!(stats.at(n), Some(n));
        }
    }

    #[test]
    fn counting_rejects_bad_windows() {
        let sys = KickedSystem::new(Line, 1.0, KickSchedule::constant(1)).unwrap();
        let orbit = sys.evolve(&0, 10).unwrap();
        assert!(Window::new(5, 4).is_err());
        assert!(Window::new(0, 4).is_err());
        assert!(counting_function(&orbit, |_| true, Window::new(1, 11).unwrap()).is_err());
    }

    #[test]
    fn two_periodic_orbit_counts_half() {
        // kicks alternate so the orbit is 0,1,0,1,...
        let sys = KickedSystem::new(Flip, 1.0, KickSchedule::constant(true)).unwrap();
        let orbit = sys.evolve(&0, 40).unwrap();
        let stats = counting_function(&orbit, |p| *p == 0, Window::new(1, 40).unwrap()).unwrap();
        for n in 1..=40u64 {
            assert_eq!(stats.at(n).unwrap(), n.div_ceil(2));
        }
        let rep = recurrence_ratio(&sys, |p| *p == 0, &[0], Window::new(10, 40).unwrap(), 0.3, 0.01, Mode::Canonical)
            .unwrap();
        assert!(rep.r_hat >= 0.5 - 1.0 / 40.0);
        assert!(rep.verdict);
    }

    #[test]
    fn birkhoff_of_constant_is_constant() {
        let sys = KickedSystem::new(Line, 1.0, KickSchedule::constant(3)).unwrap();
        let prof = birkhoff_profile(&sys, |_| 2.5, &[0, 7], Window::new(1, 20).unwrap(), Mode::Fast).unwrap();
        assert!(prof.values.iter().flatten().all(|&v| v == 2.5));
        assert_eq!(prof.sup.len(), 20);
    }

    #[test]
    fn two_point_average_and_quasi_integral_level() {
        // F = +1 at 0 and -1 at 1 on the alternating orbit: even averages vanish.
        let sys = KickedSystem::new(Flip, 1.0, KickSchedule::constant(true)).unwrap();
        let f = |p: &u8| if *p == 0 { 1.0 } else { -1.0 };
        let prof = birkhoff_profile(&sys, f, &[0], Window::new(2, 2).unwrap(), Mode::Canonical).unwrap();
        assert_eq!(prof.at(0, 2), 0.0);
        assert_eq!(quasi_integral_level(&prof, 1.0, 0.0).unwrap(), 0.0);
        assert!(quasi_integral_level(&prof, 0.0, 0.0).is_err());
        assert!(quasi_integral_level(&prof, 1.0, 1e-3).is_err());
    }

    #[test]
    fn thresholds_match_closed_forms() {
        let t = super_recurrence_thresholds(0.83, 0.4, 1.0).unwrap();
        assert!((t.r_lower - 0.43 / 0.6).abs() < 1e-15);
        assert!((t.mu_upper - 1.0 / 1.4).abs() < 1e-15);
        assert!(t.delta > 0.0);
        let t = super_recurrence_thresholds(1.0, 1e-9, 0.0).unwrap();
        assert!((t.r_lower - 1.0).abs() < 1e-8);
        assert_eq!(t.mu_upper, 0.0);
        assert!(t.gamma_admissible);
        assert!(super_recurrence_thresholds(0.5, 0.5, 0.1).is_err());
        assert!(super_recurrence_thresholds(0.5, 0.6, 0.1).is_err());
    }

    #[test]
    fn thresholds_independent_reevaluation() {
        // alpha = 0.5, c = 0.25, gamma = 0.02
        let t = super_recurrence_thresholds(0.5, 0.25, 0.02).unwrap();
        assert!((t.r_lower - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.mu_upper - 0.02 / 0.27).abs() < 1e-15);
        // gamma < 0.25/2 = 0.125 and |0.25 - 0.25| < ½√(0.25 + 0.04 - 0.08)
        assert!(t.gamma_admissible);
        assert!(t.in_window);
    }

    #[test]
    fn ratio_max_merge_is_commutative() {
        let a = RatioMax { ratio: 0.5, sample: 2, n: 10 };
        let b = RatioMax { ratio: 0.5, sample: 1, n: 30 };
        let c = RatioMax { ratio: 0.4, sample: 0, n: 1 };
        assert_eq!(a.merge(b), b.merge(a));
        assert_eq!(a.merge(b).merge(c), c.merge(b).merge(a));
        assert_eq!(a.merge(b).sample, 1);
    }
}
