//! Hamiltonian arenas: the top on `S²` and the flat torus with the shear flow.
//!
//! Kicks are isometries (orthogonal matrices on the sphere, translations on
//! the torus), so every kick preserves the measure. Sphere zone areas come
//! from Archimedes: `z` is uniform on `[−1, 1]`.
//!
//! The reflection `(x, −y, −z)` commutes with the top flow rather than
//! reversing it; the equatorial mirror `(x, y, −z)` is the time-reversing
//! symmetry used by [`two_periodic_schedule`].

pub mod flat;
pub mod sphere;

use serde::{Deserialize, Serialize};

pub use flat::{
    flat_ac_monte_carlo, flat_dist, flat_flow, flat_h, flat_mean, flat_measure_of_ac, flat_point, flat_time_reversal,
    flat_two_periodic, nonmixing_witness, odd_map, randomizing_bookkeeping, randomizing_schedule, BookkeepingReport,
    CorrelationEstimate, FlatPoint, FlatSystem, FlatTorus, NonMixingReport, FLAT_GAMMA, FLAT_MAX_H, THETA_SHIFT,
};
pub use sphere::{
    find_fixed_points, hamiltonian_h, kick_power, kicked_top_scan, measure_of_ac, nearest_orthogonal,
    pushforward_zone_measure, sphere_samples, time_reversal_check, top_flow, top_system, top_time_reversal,
    two_periodic_schedule, zone_half_width, FixedPoint, SphereKick, SpherePoint, TimeReversalReport, Top, TopScan,
    TopScanRow, TopSystem, ZoneMeasure, FIXED_POINT_TOL, RENORMALIZE_EVERY, TIME_REVERSAL_TOL, TOP_GAMMA, TOP_MAX_H,
    TOP_MIN_H,
};

/// A Monte-Carlo proportion with its Bernoulli standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub sigma: f64,
    pub samples: usize,
}

pub(crate) fn bernoulli(hits: usize, n: usize) -> McEstimate {
    let p = hits as f64 / n as f64;
    McEstimate {
        value: p,
        sigma: (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::numeric::{linspace, SeedStream};
    use crate::sequential::{birkhoff_profile, KickSchedule, KickedSystem, Mode, Window};

    fn sp(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new([x, y, z]).unwrap()
    }

    #[test]
    fn top_flow_examples() {
        let p = sp(0.3, -0.4, 0.5);
        assert!(top_flow(0.0, &p).dist(&p) < 1e-15);
        let e = sp(1.0, 0.0, 0.0);
        assert!(top_flow(0.77, &e).dist(&e) < 1e-15);
        let r = (0.75f64).sqrt();
        let q = SpherePoint([r * 0.6, r * 0.8, 0.5]);
        let out = top_flow(0.5, &q);
        assert!(out.dist(&SpherePoint([-r * 0.8, r * 0.6, 0.5])) < 1e-12);
        assert_eq!(out.z(), 0.5);
    }

    #[test]
    fn hamiltonian_extremes_and_mean() {
        assert!((hamiltonian_h(&sp(1.0, 0.0, 0.0)) - TOP_MAX_H).abs() < 1e-15);
        assert!((hamiltonian_h(&sp(0.0, 0.0, -1.0)) - TOP_MIN_H).abs() < 1e-15);
        let pts = sphere_samples(3, 1_000_000);
        let mean = pts.iter().map(hamiltonian_h).sum::<f64>() / pts.len() as f64;
        assert!(mean.abs() < 1e-3, "{mean}");
    }

    #[test]
    fn zone_measure_and_lemma_bound() {
        assert!((measure_of_ac(0.25).unwrap().mu - 0.5).abs() < 1e-15);
        assert!(measure_of_ac(1.0 - 1e-12).unwrap().mu < 1e-6);
        assert!(measure_of_ac(0.0).is_err());
        for c in linspace(0.01, 0.99, 99) {
            let m = measure_of_ac(c).unwrap();
            assert!(m.mu <= m.gamma / (c + m.gamma), "c = {c}");
        }
    }

    #[test]
    fn zone_pushforward_matches_area() {
        let eps = 0.3;
        let mu = zone_half_width(eps).unwrap();
        for k in [SphereKick::phi(), SphereKick::mirror_z(), SphereKick::half_turn_x()] {
            let est = pushforward_zone_measure(&k, eps, 200_000, 5).unwrap();
            assert!((est.value - mu).abs() < 5.0 * est.sigma, "{} {est:?} vs {mu}", k.name);
        }
    }

    #[test]
    fn time_reversal_verdicts() {
        let ts = linspace(-1.0, 1.0, 9);
        let pts = sphere_samples(11, 50);
        assert!(top_time_reversal(&SphereKick::mirror_z(), &ts, &pts).pass);
        // the half-turn about the x-axis commutes with the flow
        let half = top_time_reversal(&SphereKick::half_turn_x(), &ts, &pts);
        assert!(!half.pass && half.max_deviation > 0.1);
        assert!(!top_time_reversal(&SphereKick::rotation_z(0.4), &ts, &pts).pass);
        let rng = SeedStream::new(2);
        let fpts: Vec<FlatPoint> = (0..50).map(|i| rng.uniforms::<2>(0, i)).collect();
        assert!(flat_time_reversal(&ts, &fpts).pass);
    }

    #[test]
    fn phi_has_order_four() {
        let id = SphereKick::identity();
        let p = kick_power(&SphereKick::phi(), 1_000_000);
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.matrix[i][j] - id.matrix[i][j]).abs() < 1e-12);
            }
        }
        assert!(SphereKick::new("bad", [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn fixed_points_of_kicked_top() {
        for tau in [0.3, 1.0, 2.7] {
            let fps = find_fixed_points(&SphereKick::phi(), tau, 200);
            assert!(!fps.is_empty());
            for f in &fps {
                assert!(f.residual <= FIXED_POINT_TOL);
                let img = SphereKick::phi().apply(&top_flow(tau, &f.point));
                assert!(img.dist(&f.point) <= 1e-9);
            }
            for target in [sp(0.0, 1.0, 0.0), sp(0.0, -1.0, 0.0)] {
                assert!(fps.iter().any(|f| f.point.dist(&target) < 1e-8), "tau {tau}: {fps:?}");
            }
        }
    }

    #[test]
    fn two_periodic_schedule_returns_home() {
        let sys = top_system(0.83, two_periodic_schedule(&SphereKick::mirror_z())).unwrap();
        for p in sphere_samples(4, 20) {
            for (i, q) in sys.walk(p).take(2001).enumerate() {
                if i % 2 == 0 {
                    assert!(q.dist(&p) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scan_examples() {
        let samples = vec![sp(1.0, 0.0, 0.0), sp(0.0, 0.6, 0.8)];
        let w = Window::new(100, 1000).unwrap();
        let taus = [0.4, 1.1, 2.3];
        let ident = KickSchedule::constant(SphereKick::identity());
        let scan = kicked_top_scan(&ident, &taus, 0.2, &samples, w, 0.01, Mode::Canonical).unwrap();
        assert!(scan.rows.iter().all(|r| r.report.verdict && r.report.r_hat == 1.0));
        assert_eq!(scan.density, 1.0);

        let fixed = vec![sp(0.0, 1.0, 0.0)];
        let phi = KickSchedule::constant(SphereKick::phi());
        let scan = kicked_top_scan(&phi, &taus, 0.2, &fixed, w, 0.01, Mode::Canonical).unwrap();
        assert!(scan.rows.iter().all(|r| r.report.r_hat == 1.0));

        let tp = two_periodic_schedule(&SphereKick::mirror_z());
        let scan = kicked_top_scan(&tp, &taus, 0.05, &[sp(0.9, 0.0, 0.1)], w, 0.01, Mode::Fast).unwrap();
        assert!(scan.rows.iter().all(|r| r.report.r_hat >= 0.5 - 1e-5));

        assert!(kicked_top_scan(&ident, &taus, 0.01, &[sp(0.0, 0.0, 1.0)], w, 0.01, Mode::Canonical).is_err());
    }

    #[test]
    fn randomizing_schedule_equidistributes() {
        let gamma = [2f64.sqrt(), 3f64.sqrt()];
        let x0 = flat_point(0.1, 0.2);
        for tau in [0.3, 0.8, 1.7] {
            let book = randomizing_bookkeeping(tau, gamma, &x0, 10_000).unwrap();
            assert!(book.max_deviation < 1e-9, "{book:?}");
            let sys = KickedSystem::new(FlatTorus, tau, randomizing_schedule(gamma)).unwrap();
            let w = Window::new(100_000, 100_000).unwrap();
            let prof = birkhoff_profile(&sys, |p| (std::f64::consts::TAU * p[1]).cos(), &[x0], w, Mode::Canonical)
                .unwrap();
            assert!(prof.at(0, 100_000).abs() < 0.01);
            let ones = birkhoff_profile(&sys, |_| 1.0, &[x0], w, Mode::Canonical).unwrap();
            assert_eq!(ones.at(0, 100_000), 1.0);
        }
    }

    #[test]
    fn flat_lemma_bound_by_monte_carlo() {
        for c in [0.1, 0.5, 0.9] {
            let exact = flat_measure_of_ac(c).unwrap();
            let mc = flat_ac_monte_carlo(c, 100_000, 9).unwrap();
            assert!((mc.value - exact).abs() < 5.0 * mc.sigma);
            assert!(mc.value <= FLAT_GAMMA / (c + FLAT_GAMMA));
        }
        assert!(flat_mean(flat_h, 100_000, 1).abs() < 1e-3);
    }

    #[test]
    fn nonmixing_witness_oscillates() {
        let sys = KickedSystem::new(FlatTorus, 0.8, flat_two_periodic()).unwrap();
        let rep = nonmixing_witness(&sys, 0.05, 4, 200_000, 1, Mode::Fast).unwrap();
        for c in &rep.correlations {
            if c.index % 2 == 0 {
                assert!((c.estimate.value - 0.05).abs() < 5.0 * c.estimate.sigma.max(1e-4));
            } else {
                assert_eq!(c.estimate.value, 0.0);
            }
        }
        assert!(rep.min_separation > 10.0, "{rep:?}");

        let ident = KickedSystem::new(FlatTorus, 0.8, KickSchedule::constant([0.0, 0.0])).unwrap();
        assert!(matches!(
            nonmixing_witness(&ident, 0.01, 2, 1000, 1, Mode::Canonical),
            Err(crate::error::KickedError::InvalidInput(_))
        ));
        assert!(matches!(
            nonmixing_witness(&sys, 0.9, 2, 1000, 1, Mode::Canonical),
            Err(crate::error::KickedError::Configuration(_))
        ));
    }

    proptest! {
        #[test]
        fn kicks_and_flow_stay_on_sphere(u in 0.0..1.0f64, v in 0.0..1.0f64, t in -5.0..5.0f64, a in -3.0..3.0f64) {
            let p = SpherePoint::from_uniforms(u, v);
            let q = top_flow(t, &p);
            prop_assert!((q.norm() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(q.z(), p.z());
            let r = SphereKick::rotation_z(a).compose(&SphereKick::phi()).apply(&q);
            prop_assert!((r.norm() - 1.0).abs() <= 1e-12);
            let s = top_flow(-t, &top_flow(t, &p));
            prop_assert!(s.dist(&p) <= 1e-12);
        }

        #[test]
        fn flat_flow_keeps_x(x in 0.0..1.0f64, y in 0.0..1.0f64, t in -5.0..5.0f64) {
            let p = flat_point(x, y);
            let q = flat_flow(t, &p);
            prop_assert_eq!(q[0], p[0]);
            prop_assert!(flat_dist(&flat_flow(-t, &q), &p) < 1e-12);
        }
    }
}
