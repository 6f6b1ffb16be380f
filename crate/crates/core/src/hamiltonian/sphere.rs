use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, KickedError, Result};
use crate::numeric::SeedStream;
use crate::sequential::{map_ordered, recurrence_ratio, Arena, KickSchedule, KickedSystem, Mode, RecurrenceReport, Window};

use super::{bernoulli, McEstimate};

/// A unit vector of `R³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    /// Normalizes `v`; the zero vector is rejected.
    pub fn new(v: [f64; 3]) -> Result<SpherePoint> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return invalid(format!("{v:?} does not define a point of the sphere"));
        }
        Ok(SpherePoint(v.map(|c| c / n)))
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn norm(&self) -> f64 {
        Vector3::from(self.0).norm()
    }

    pub fn dist(&self, o: &SpherePoint) -> f64 {
        (Vector3::from(self.0) - Vector3::from(o.0)).norm()
    }

    /// Uniform point from two uniforms in `[0, 1)` (Archimedes: `z` is uniform).
    pub fn from_uniforms(u: f64, v: f64) -> SpherePoint {
        let z = 2.0 * u - 1.0;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let a = TAU * v;
        SpherePoint([r * a.cos(), r * a.sin(), z])
    }
}

/// The top flow: rotation about the `z`-axis by angle `2πtz`.
///
/// The horizontal part is rescaled to radius `√(1 − z²)`, so `z` is carried
/// over bit-for-bit.
pub fn top_flow(t: f64, p: &SpherePoint) -> SpherePoint {
    let [x, y, z] = p.0;
    let (s, c) = (TAU * t * z).sin_cos();
    let (nx, ny) = (c * x - s * y, s * x + c * y);
    let r = (nx * nx + ny * ny).sqrt();
    let target = (1.0 - z * z).max(0.0).sqrt();
    if r > 0.0 {
        SpherePoint([nx * target / r, ny * target / r, z])
    } else {
        SpherePoint([nx, ny, z])
    }
}

/// `H(x, y, z) = −z² + 1/3`.
pub fn hamiltonian_h(p: &SpherePoint) -> f64 {
    -p.z() * p.z() + 1.0 / 3.0
}

pub const TOP_MAX_H: f64 = 1.0 / 3.0;
pub const TOP_MIN_H: f64 = -2.0 / 3.0;
/// `|min H / max H|`.
pub const TOP_GAMMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneMeasure {
    pub mu: f64,
    pub gamma: f64,
}

/// `μ{H > c·max H} = √((1 − c)/3)`: the zone `|z| < √((1 − c)/3)` has that area fraction.
pub fn measure_of_ac(c: f64) -> Result<ZoneMeasure> {
    if !(c > 0.0 && c < 1.0) {
        return invalid(format!("c must lie in (0,1), got {c}"));
    }
    Ok(ZoneMeasure {
        mu: ((1.0 - c) / 3.0).sqrt(),
        gamma: TOP_GAMMA,
    })
}

/// Half-width `ε′` of the zone `A_ε = {H > (1 − ε) max H} = {|z| < ε′}`; also its measure.
pub fn zone_half_width(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid(format!("eps must lie in (0,1], got {eps}"));
    }
    Ok((eps / 3.0).sqrt())
}

/// An isometry of the sphere given by an orthogonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereKick {
    pub name: String,
    pub matrix: [[f64; 3]; 3],
}

const ORTHO_TOL: f64 = 1e-12;
/// Products are projected back to the orthogonal group this often.
pub const RENORMALIZE_EVERY: u64 = 10_000;

fn to_na(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

fn from_na(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Nearest orthogonal matrix in Frobenius norm, `UVᵀ` from the SVD.
pub fn nearest_orthogonal(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    u * vt
}

impl SphereKick {
    pub fn new(name: impl Into<String>, matrix: [[f64; 3]; 3]) -> Result<SphereKick> {
        let m = to_na(&matrix);
        let dev = (m.transpose() * m - Matrix3::identity()).abs().max();
        if !(dev <= ORTHO_TOL) {
            return invalid(format!("kick matrix is not orthogonal (deviation {dev:e})"));
        }
        Ok(SphereKick {
            name: name.into(),
            matrix,
        })
    }

    pub fn identity() -> SphereKick {
        SphereKick::new("id", [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap()
    }

    /// The kicked top map `φ(x, y, z) = (−z, y, x)`.
    pub fn phi() -> SphereKick {
        SphereKick::new("phi", [[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap()
    }

    /// `(x, −y, −z)`, the half-turn about the `x`-axis.
    pub fn half_turn_x() -> SphereKick {
        SphereKick::new("half_turn_x", [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]).unwrap()
    }

    /// `(x, y, −z)`, the mirror in the equatorial plane.
    pub fn mirror_z() -> SphereKick {
        SphereKick::new("mirror_z", [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]).unwrap()
    }

    /// Rotation by `angle` about the `z`-axis.
    pub fn rotation_z(angle: f64) -> SphereKick {
        let (s, c) = angle.sin_cos();
        SphereKick::new(format!("rot_z({angle})"), [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]).unwrap()
    }

    pub fn inverse(&self) -> SphereKick {
        SphereKick {
            name: format!("{}^-1", self.name),
            matrix: from_na(&to_na(&self.matrix).transpose()),
        }
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        let v = to_na(&self.matrix) * Vector3::from(p.0);
        let v = v / v.norm();
        SpherePoint([v[0], v[1], v[2]])
    }

    /// `self ∘ other`, projected back to the orthogonal group.
    pub fn compose(&self, other: &SphereKick) -> SphereKick {
        let m = nearest_orthogonal(&(to_na(&self.matrix) * to_na(&other.matrix)));
        SphereKick {
            name: format!("{}*{}", self.name, other.name),
            matrix: from_na(&m),
        }
    }
}

/// `kick^n` by repeated multiplication, renormalized every [`RENORMALIZE_EVERY`] factors.
pub fn kick_power(kick: &SphereKick, n: u64) -> SphereKick {
    let k = to_na(&kick.matrix);
    let mut acc = Matrix3::identity();
    for i in 1..=n {
        acc = k * acc;
        if i % RENORMALIZE_EVERY == 0 {
            acc = nearest_orthogonal(&acc);
        }
    }
    SphereKick {
        name: format!("{}^{n}", kick.name),
        matrix: from_na(&nearest_orthogonal(&acc)),
    }
}

/// The top flow on `S²` with isometric kicks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Top;

impl Arena for Top {
    type Point = SpherePoint;
    type Kick = SphereKick;
    fn flow(&self, t: f64, p: &SpherePoint) -> SpherePoint {
        top_flow(t, p)
    }
    fn kick(&self, k: &SphereKick, p: &SpherePoint) -> SpherePoint {
        k.apply(p)
    }
    fn validate(&self, p: &SpherePoint) -> Result<()> {
        if (p.norm() - 1.0).abs() > 1e-12 {
            return invalid("sample point is not on the unit sphere");
        }
        Ok(())
    }
}

pub type TopSystem = KickedSystem<Top>;

pub fn top_system(tau: f64, kicks: KickSchedule<SphereKick>) -> Result<TopSystem> {
    KickedSystem::new(Top, tau, kicks)
}

/// `θ⁻¹, θ, θ⁻¹, θ, ...`; with `θ` time-reversing, `f^{(2k)} = id`.
pub fn two_periodic_schedule(theta: &SphereKick) -> KickSchedule<SphereKick> {
    KickSchedule::cycled(vec![theta.inverse(), theta.clone()]).expect("two kicks")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeReversalReport {
    pub max_deviation: f64,
    pub pass: bool,
}

pub const TIME_REVERSAL_TOL: f64 = 1e-9;

/// `max |θ h^t θ⁻¹ p − h^{−t} p|` over the samples; passes at [`TIME_REVERSAL_TOL`].
pub fn time_reversal_check<P>(
    flow: impl Fn(f64, &P) -> P,
    theta: impl Fn(&P) -> P,
    theta_inv: impl Fn(&P) -> P,
    dist: impl Fn(&P, &P) -> f64,
    t_samples: &[f64],
    points: &[P],
) -> TimeReversalReport {
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        for p in points {
            let lhs = theta(&flow(t, &theta_inv(p)));
            let rhs = flow(-t, p);
            worst = worst.max(dist(&lhs, &rhs));
        }
    }
    TimeReversalReport {
        max_deviation: worst,
        pass: worst <= TIME_REVERSAL_TOL,
    }
}

/// Time-reversal check of the top flow against an isometric `θ`.
pub fn top_time_reversal(theta: &SphereKick, t_samples: &[f64], points: &[SpherePoint]) -> TimeReversalReport {
    let inv = theta.inverse();
    time_reversal_check(top_flow, |p| theta.apply(p), |p| inv.apply(p), SpherePoint::dist, t_samples, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: SpherePoint,
    pub residual: f64,
    pub iterations: usize,
}

pub const FIXED_POINT_TOL: f64 = 1e-10;

fn tangent_basis(p: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if p[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - p * p.dot(&helper)).normalize();
    let e2 = p.cross(&e1);
    (e1, e2)
}

fn exp_map(p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n == 0.0 {
        return *p;
    }
    (p * n.cos() + v * (n.sin() / n)).normalize()
}

/// Fixed points of `φ∘h^τ` by damped Newton iteration in tangent coordinates,
/// started from a Fibonacci lattice of `starts` points. Distinct converged
/// points are returned with their residuals `|F(p) − p|`.
pub fn find_fixed_points(kick: &SphereKick, tau: f64, starts: usize) -> Vec<FixedPoint> {
    let map = |p: &Vector3<f64>| {
        let q = kick.apply(&top_flow(tau, &SpherePoint([p[0], p[1], p[2]])));
        Vector3::from(q.0)
    };
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut found: Vec<FixedPoint> = Vec::new();
    for k in 0..starts {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / starts as f64;
        let r = (1.0 - z * z).sqrt();
        let a = golden * k as f64;
        let mut p = Vector3::new(r * a.cos(), r * a.sin(), z);
        let mut iterations = 0;
        let mut residual = (map(&p) - p).norm();
        while residual > FIXED_POINT_TOL && iterations < 100 {
            iterations += 1;
            let (e1, e2) = tangent_basis(&p);
            let g = |v: &Vector3<f64>| {
                let d = map(v) - v;
                nalgebra::Vector2::new(d.dot(&e1), d.dot(&e2))
            };
            let g0 = g(&p);
            let h = 1e-7;
            let j1 = (g(&exp_map(&p, &(e1 * h))) - g(&exp_map(&p, &(e1 * -h)))) / (2.0 * h);
            let j2 = (g(&exp_map(&p, &(e2 * h))) - g(&exp_map(&p, &(e2 * -h)))) / (2.0 * h);
            let jac = nalgebra::Matrix2::from_columns(&[j1, j2]);
            let Some(step) = jac.lu().solve(&(-g0)) else { break };
            let mut lambda = 1.0;
            let mut improved = false;
            while lambda > 1e-4 {
                let cand = exp_map(&p, &((e1 * step[0] + e2 * step[1]) * lambda));
                let r = (map(&cand) - cand).norm();
                if r < residual {
                    p = cand;
                    residual = r;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if residual <= FIXED_POINT_TOL {
            let point = SpherePoint([p[0], p[1], p[2]]);
            if !found.iter().any(|f| f.point.dist(&point) < 1e-6) {
                found.push(FixedPoint { point, residual, iterations });
            }
        }
    }
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopScanRow {
    pub tau: f64,
    pub eps: f64,
    pub report: RecurrenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopScan {
    pub rows: Vec<TopScanRow>,
    /// Fraction of the τ-grid with a positive verdict (exploratory).
    pub density: f64,
}

/// `R̂(τ)` for `A_ε = {|z| < ε′}` over a τ-grid.
pub fn kicked_top_scan(
    kicks: &KickSchedule<SphereKick>,
    taus: &[f64],
    eps: f64,
    samples: &[SpherePoint],
    window: Window,
    margin: f64,
    mode: Mode,
) -> Result<TopScan> {
    let half = zone_half_width(eps)?;
    if !samples.iter().any(|p| p.z().abs() < half) {
        return invalid("no sample point lies in A_eps");
    }
    let rows = map_ordered(mode, taus, |_, &tau| {
        let sys = top_system(tau, kicks.clone())?;
        let report = recurrence_ratio(&sys, |p| p.z().abs() < half, samples, window, half, margin, Mode::Canonical)?;
        Ok(TopScanRow { tau, eps, report })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(KickedError::InvalidInput("empty tau grid".into()));
    }
    let density = rows.iter().filter(|r| r.report.verdict).count() as f64 / rows.len() as f64;
    Ok(TopScan { rows, density })
}

/// Uniform sample of the sphere from a seeded stream.
pub fn sphere_samples(seed: u64, n: usize) -> Vec<SpherePoint> {
    let rng = SeedStream::new(seed);
    (0..n as u64)
        .map(|i| {
            let [u, v] = rng.uniforms::<2>(0, i);
            SpherePoint::from_uniforms(u, v)
        })
        .collect()
}

/// Monte-Carlo measure of `kick⁻¹(A_ε)`, i.e. of `{p : kick(p) ∈ A_ε}`.
pub fn pushforward_zone_measure(kick: &SphereKick, eps: f64, n: usize, seed: u64) -> Result<McEstimate> {
    let half = zone_half_width(eps)?;
    if n == 0 {
        return invalid("need at least one sample");
    }
    let rng = SeedStream::new(seed);
    let hits = (0..n as u64)
        .filter(|&i| {
            let [u, v] = rng.uniforms::<2>(0, i);
            kick.apply(&SpherePoint::from_uniforms(u, v)).z().abs() < half
        })
        .count();
    Ok(bernoulli(hits, n))
}
