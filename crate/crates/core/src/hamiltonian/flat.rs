use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, KickedError, Result};
use crate::numeric::{circle_dist, frac, CompensatedSum, SeedStream};
use crate::sequential::{map_ordered, Arena, KickSchedule, KickedSystem, Mode};

use super::sphere::{time_reversal_check, TimeReversalReport};
use super::{bernoulli, McEstimate};

/// A point of `R²/Z²`, both coordinates in `[0, 1)`.
pub type FlatPoint = [f64; 2];

pub fn flat_point(x: f64, y: f64) -> FlatPoint {
    [frac(x), frac(y)]
}

pub fn flat_dist(a: &FlatPoint, b: &FlatPoint) -> f64 {
    circle_dist(a[0], b[0]).hypot(circle_dist(a[1], b[1]))
}

/// `h^t(x, y) = (x, y − t sin 2πx)`.
pub fn flat_flow(t: f64, p: &FlatPoint) -> FlatPoint {
    [p[0], frac(p[1] - t * (TAU * p[0]).sin())]
}

/// `H(x, y) = cos(2πx)/(2π)`; `max H = −min H`, so `γ = 1`.
pub fn flat_h(p: &FlatPoint) -> f64 {
    (TAU * p[0]).cos() / TAU
}

pub const FLAT_MAX_H: f64 = 1.0 / TAU;
pub const FLAT_GAMMA: f64 = 1.0;

/// The time-reversing shift `θ = (1/2, 0)`.
pub const THETA_SHIFT: FlatPoint = [0.5, 0.0];

/// Kicks on the flat torus are translations.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatTorus;

impl Arena for FlatTorus {
    type Point = FlatPoint;
    type Kick = FlatPoint;
    fn flow(&self, t: f64, p: &FlatPoint) -> FlatPoint {
        flat_flow(t, p)
    }
    fn kick(&self, k: &FlatPoint, p: &FlatPoint) -> FlatPoint {
        [frac(p[0] + k[0]), frac(p[1] + k[1])]
    }
    fn validate(&self, p: &FlatPoint) -> Result<()> {
        if p.iter().all(|c| (0.0..1.0).contains(c)) {
            Ok(())
        } else {
            invalid(format!("{p:?} is not reduced mod 1"))
        }
    }
}

pub type FlatSystem = KickedSystem<FlatTorus>;

fn shift(p: &FlatPoint, v: FlatPoint) -> FlatPoint {
    [frac(p[0] + v[0]), frac(p[1] + v[1])]
}

/// `θ⁻¹ h^τ`, the odd-time map of the 2-periodic schedule.
pub fn odd_map(tau: f64, p: &FlatPoint) -> FlatPoint {
    shift(&flat_flow(tau, p), [-0.5, 0.0])
}

pub fn flat_time_reversal(t_samples: &[f64], points: &[FlatPoint]) -> TimeReversalReport {
    time_reversal_check(
        flat_flow,
        |p| shift(p, THETA_SHIFT),
        |p| shift(p, [-0.5, 0.0]),
        flat_dist,
        t_samples,
        points,
    )
}

/// `θ⁻¹, θ, θ⁻¹, θ, ...`.
pub fn flat_two_periodic() -> KickSchedule<FlatPoint> {
    KickSchedule::Cycled(vec![[-0.5, 0.0], THETA_SHIFT])
}

/// `φ_{2k−1} = θ⁻¹`, `φ_{2k} = ψ_k θ` with `ψ_k` the translation by `γ`,
/// so `ψ^{(k)}` is the translation by `kγ`.
pub fn randomizing_schedule(gamma: FlatPoint) -> KickSchedule<FlatPoint> {
    KickSchedule::Cycled(vec![[-0.5, 0.0], [frac(gamma[0] + 0.5), frac(gamma[1])]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookkeepingReport {
    pub steps: u64,
    pub max_deviation: f64,
}

/// Largest distance between the orbit and `f^{(2k)} = x + kγ`,
/// `f^{(2k+1)} = θ⁻¹h^τ(x + kγ)` over `steps` steps.
pub fn randomizing_bookkeeping(tau: f64, gamma: FlatPoint, x0: &FlatPoint, steps: u64) -> Result<BookkeepingReport> {
    let sys = KickedSystem::new(FlatTorus, tau, randomizing_schedule(gamma))?;
    sys.arena.validate(x0)?;
    let mut worst: f64 = 0.0;
    for (i, p) in sys.walk(*x0).take(steps as usize + 1).enumerate() {
        let k = (i / 2) as f64;
        let base = [frac(x0[0] + k * gamma[0]), frac(x0[1] + k * gamma[1])];
        let expected = if i % 2 == 0 { base } else { odd_map(tau, &base) };
        worst = worst.max(flat_dist(&p, &expected));
    }
    Ok(BookkeepingReport {
        steps,
        max_deviation: worst,
    })
}

/// `μ{H > c·max H} = acos(c)/π`.
pub fn flat_measure_of_ac(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return invalid(format!("c must lie in (0,1), got {c}"));
    }
    Ok(c.acos() / PI)
}

/// Monte-Carlo `μ(A_c)` for `F = H` on the flat torus.
pub fn flat_ac_monte_carlo(c: f64, n: usize, seed: u64) -> Result<McEstimate> {
    if !(c > 0.0 && c < 1.0) || n == 0 {
        return invalid("need c in (0,1) and at least one sample");
    }
    let rng = SeedStream::new(seed);
    let hits = (0..n as u64)
        .filter(|&i| {
            let [x, y] = rng.uniforms::<2>(0, i);
            flat_h(&[x, y]) > c * FLAT_MAX_H
        })
        .count();
    Ok(bernoulli(hits, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub index: u64,
    pub estimate: McEstimate,
    /// `|estimate − μ(U)²|` in units of the larger of the two Bernoulli σ's.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMixingReport {
    pub tau: f64,
    pub center: FlatPoint,
    pub radius: f64,
    pub delta: f64,
    pub mixing_value: f64,
    pub correlations: Vec<CorrelationEstimate>,
    /// Smallest separation over all indices.
    pub min_separation: f64,
}

/// Checks `f^{(2)} = id` on a few points; the witness needs a 2-periodic evolution.
fn check_two_periodic(system: &FlatSystem) -> Result<()> {
    let rng = SeedStream::new(0x2f1a);
    for i in 0..16 {
        let [x, y] = rng.uniforms::<2>(0, i);
        let p = [x, y];
        let q = system.step(2, &system.step(1, &p));
        if flat_dist(&p, &q) > 1e-12 {
            return invalid("schedule is not 2-periodic: f^(2) differs from the identity");
        }
    }
    Ok(())
}

/// Finds a ball `U` of measure `delta` with `θ⁻¹h^τU ∩ U = ∅` on samples
/// and estimates `∫χ_U(f^{(i)}x)χ_U(x)dμ` for `i = 1..=indices`.
pub fn nonmixing_witness(
    system: &FlatSystem,
    delta: f64,
    indices: u64,
    samples: usize,
    seed: u64,
    mode: Mode,
) -> Result<NonMixingReport> {
    if !(delta > 0.0 && delta < 1.0) || samples == 0 || indices == 0 {
        return invalid("need delta in (0,1), samples > 0, indices > 0");
    }
    check_two_periodic(system)?;
    let radius = (delta / PI).sqrt();
    if radius >= 0.5 {
        return Err(KickedError::Configuration(format!(
            "delta = {delta} gives a ball that wraps around the torus"
        )));
    }
    let g = |p: &FlatPoint| system.step(1, p);
    let probe = SeedStream::new(seed ^ 0x5eed);
    let probe_points: Vec<FlatPoint> = (0..2000u64)
        .map(|i| {
            let [r, a] = probe.uniforms::<2>(0, i);
            let (s, c) = (TAU * a).sin_cos();
            [radius * r.sqrt() * c, radius * r.sqrt() * s]
        })
        .collect();
    let mut center = None;
    'search: for i in 0..16 {
        for j in 0..16 {
            let c = [i as f64 / 16.0, j as f64 / 16.0];
            let disjoint = probe_points.iter().all(|d| {
                let p = shift(&c, *d);
                flat_dist(&g(&p), &c) >= radius
            });
            if disjoint {
                center = Some(c);
                break 'search;
            }
        }
    }
    let Some(center) = center else {
        return Err(KickedError::Configuration(format!(
            "no ball of measure {delta} is displaced off itself by the odd-time map"
        )));
    };
    let in_u = |p: &FlatPoint| flat_dist(p, &center) < radius;
    let mixing_value = delta * delta;
    let idx: Vec<u64> = (1..=indices).collect();
    let correlations = map_ordered(mode, &idx, |_, &k| {
        let rng = SeedStream::new(seed);
        let mut hits = 0usize;
        for s in 0..samples as u64 {
            let [x, y] = rng.uniforms::<2>(0, s);
            let p = [x, y];
            if !in_u(&p) {
                continue;
            }
            let q = system.walk(p).nth(k as usize).expect("orbit is infinite");
            if in_u(&q) {
                hits += 1;
            }
        }
        let estimate = bernoulli(hits, samples);
        let null_sigma = (mixing_value * (1.0 - mixing_value) / samples as f64).sqrt();
        let sigma = estimate.sigma.max(null_sigma);
        CorrelationEstimate {
            index: k,
            estimate,
            separation: (estimate.value - mixing_value).abs() / sigma,
        }
    });
    let min_separation = correlations.iter().map(|c| c.separation).fold(f64::INFINITY, f64::min);
    Ok(NonMixingReport {
        tau: system.tau,
        center,
        radius,
        delta,
        mixing_value,
        correlations,
        min_separation,
    })
}

/// Mean of `F` over `n` uniform samples, compensated.
pub fn flat_mean(f: impl Fn(&FlatPoint) -> f64, n: usize, seed: u64) -> f64 {
    let rng = SeedStream::new(seed);
    let s: CompensatedSum = (0..n as u64).map(|i| f(&rng.uniforms::<2>(0, i))).collect();
    s.value() / n as f64
}
