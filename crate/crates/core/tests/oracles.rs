//! Cross-module oracle checks through the public API only.

use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

use kicked_core::hamiltonian::{
    flat_time_reversal, top_flow, top_system, top_time_reversal, two_periodic_schedule, SphereKick, SpherePoint,
};
use kicked_core::hyperbolic::{parabolic_form, FuchsianGroup, QuasiMorphism, UHPoint, DEFAULT_TOL};
use kicked_core::moebius::{
    entry_recursion, escape_detector, evolve_matrix, sharpness_kicks, unipotent_kicks, Mat2,
};
use kicked_core::sequential::KickSchedule;
use kicked_core::torus::{
    burago_kicks, hit_report, torus_system, weyl_sum, zero_kicks, FrequencyVector, TorusVector,
};

#[test]
fn unkicked_weyl_sum_is_a_geometric_series() {
    let tau = 1.3;
    let n = 500u64;
    let sys = torus_system(FrequencyVector::asserted_generic(vec![SQRT_2]).unwrap(), tau, zero_kicks(1)).unwrap();
    let s = weyl_sum(&[2], &sys, &TorusVector::zero(1), n).unwrap();
    // (1/N) Σ_{k=1}^N e^{iθk} with θ = 2π·2τω
    let theta = TAU * 2.0 * tau * SQRT_2;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 1..=n {
        re += (theta * k as f64).cos();
        im += (theta * k as f64).sin();
    }
    let closed = ((n as f64 * theta / 2.0).sin() / (theta / 2.0).sin()).abs() / n as f64;
    assert!((s.re - re / n as f64).abs() < 1e-12);
    assert!((s.im - im / n as f64).abs() < 1e-12);
    assert!((s.abs - closed).abs() < 1e-12);
}

#[test]
fn valuation_kicks_hit_zero_with_density_two_to_minus_tau() {
    for tau in [1u32, 2, 3] {
        let sys = torus_system(
            FrequencyVector::asserted_generic(vec![SQRT_2]).unwrap(),
            tau as f64,
            burago_kicks(SQRT_2, None),
        )
        .unwrap();
        let rep = hit_report(&sys, 1 << 14, 0.01).unwrap();
        let want = 0.5f64.powi(tau as i32);
        assert!((rep.hit_frequency - want).abs() <= 0.01 * want, "τ={tau}: {}", rep.hit_frequency);
        assert!(!rep.equidistributed);
    }
}

#[test]
fn identity_kicks_give_horocycle_powers() {
    let kicks: KickSchedule<Mat2> = KickSchedule::constant(Mat2::IDENTITY);
    for k in [0u64, 1, 7, 40] {
        let g = evolve_matrix(&kicks, 1.5, k).unwrap();
        let want = (2.0 + (1.5 * k as f64).powi(2)).sqrt();
        assert!((g.norm() - want).abs() < 1e-12 * want.max(1.0));
    }
}

#[test]
fn entry_recursion_tracks_the_product() {
    let c = [0.3, -0.7, 1.1, 0.05, -0.4];
    let kicks = unipotent_kicks(&c).unwrap();
    let rec = entry_recursion(&c, 0.9);
    for k in 0..c.len() {
        let g = evolve_matrix(&kicks, 0.9, k as u64).unwrap();
        assert!(rec.matrix(k).projective_rel_err(&g) < 1e-12, "k={k}");
    }
}

#[test]
fn sharpness_kicks_are_bounded_only_at_tau0() {
    let kicks = sharpness_kicks(0.75);
    assert!(escape_detector(&kicks, 0.75, 5000, 10.0).unwrap().escaped_at.is_none());
    for tau in [0.7, 0.8, 2.0] {
        assert!(escape_detector(&kicks, tau, 5000, 10.0).unwrap().escaped_at.is_some(), "τ={tau}");
    }
}

#[test]
fn parabolic_quasi_morphism_counts_translations() {
    let group = Arc::new(
        FuchsianGroup::with_labels(&[('T', Mat2::horocycle(1.0)), ('S', Mat2::new(0.0, -1.0, 1.0, 0.0).unwrap())])
            .unwrap(),
    );
    let form = parabolic_form(group.clone(), 2.5, 3.0, 6).unwrap();
    let qm = QuasiMorphism::new(form, UHPoint::new(0.0, 3.0).unwrap(), DEFAULT_TOL).unwrap();
    let t = group.parse_word("T").unwrap();
    for (i, v) in qm.powers(&t, 12).unwrap().iter().enumerate() {
        assert!((v.value - (i + 1) as f64).abs() < 1e-6, "n={}: {}", i + 1, v.value);
    }
}

#[test]
fn top_flow_conserves_height_and_mirror_reverses_it() {
    let p = SpherePoint::new([0.48, -0.6, 0.64]).unwrap();
    let q = (0..10_000).fold(p, |q, _| top_flow(0.37, &q));
    assert!((q.z() - p.z()).abs() < 1e-12);
    assert!((q.norm() - 1.0).abs() < 1e-12);

    let ts: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.25).collect();
    let pts = [p, SpherePoint::new([0.0, 0.6, -0.8]).unwrap()];
    assert!(top_time_reversal(&SphereKick::mirror_z(), &ts, &pts).pass);
    assert!(!top_time_reversal(&SphereKick::half_turn_x(), &ts, &pts).pass);
    assert!(flat_time_reversal(&ts, &[[0.1, 0.2], [0.7, 0.45]]).pass);
}

#[test]
fn two_periodic_top_returns_every_second_step() {
    let sys = top_system(0.83, two_periodic_schedule(&SphereKick::mirror_z())).unwrap();
    let p = SpherePoint::new([0.6, 0.0, 0.8]).unwrap();
    for (i, q) in sys.walk(p).take(2001).enumerate() {
        if i % 2 == 0 {
            assert!(q.dist(&p) < 1e-12, "step {i}");
        }
    }
}
