use std::f64::consts::TAU;

use kicked_core::hamiltonian::{
    find_fixed_points, flat_point, flat_time_reversal, flat_two_periodic, hamiltonian_h, kicked_top_scan,
    measure_of_ac, nonmixing_witness, randomizing_bookkeeping, randomizing_schedule, sphere_samples, top_system,
    top_time_reversal, two_periodic_schedule, FlatPoint, FlatTorus, SphereKick, SpherePoint, TimeReversalReport,
    TOP_MAX_H,
};
use kicked_core::numeric::{linspace, SeedStream};
use kicked_core::sequential::{birkhoff_profile, check_quasi_integral_counts, KickSchedule, KickedSystem, Window};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{config_err, CliResult};
use crate::output::{Check, Output, Table};

fn theta(name: &str) -> CliResult<SphereKick> {
    match name {
        "half-turn-x" => Ok(SphereKick::half_turn_x()),
        "mirror-z" => Ok(SphereKick::mirror_z()),
        "phi" => Ok(SphereKick::phi()),
        _ => match name.strip_prefix("rot-z:") {
            Some(a) => Ok(SphereKick::rotation_z(crate::config::parse_f64("theta", a)?)),
            None => config_err(format!("unknown sphere map {name:?}")),
        },
    }
}

fn top_kicks(cfg: &RunConfig) -> CliResult<KickSchedule<SphereKick>> {
    match cfg.str_param("kicks", "phi") {
        "identity" => Ok(KickSchedule::constant(SphereKick::identity())),
        "two-periodic" => Ok(two_periodic_schedule(&theta(cfg.str_param("theta", "mirror-z"))?)),
        other => Ok(KickSchedule::constant(theta(other)?)),
    }
}

fn lemma_row(t: &mut Table, tau: f64, c: f64, chk: &kicked_core::sequential::QuasiIntegralCountCheck) {
    t.push(vec![tau.into(), c.into(), chk.checked.into(), chk.violations.into(), chk.min_slack.into()]);
}

const LEMMA_HEADER: [&str; 5] = ["tau", "c", "checked", "violations", "min_slack"];

pub const SCAN_KEYS: &[&str] = &["kicks", "theta", "eps", "samples", "margin", "c", "fixed-points"];

pub fn scan(cfg: &RunConfig) -> CliResult<Output> {
    let kicks = top_kicks(cfg)?;
    let is_phi = cfg.str_param("kicks", "phi") == "phi";
    let eps = cfg.f64_param("eps", 0.2)?;
    let margin = cfg.f64_param("margin", 0.01)?;
    let c = cfg.f64_param("c", 0.5)?;
    let steps = cfg.steps_or(1000);
    let window = cfg.window_or(((steps / 10).max(1), steps))?;
    let taus = cfg.taus_or(&[1.0]);
    let mut samples = vec![SpherePoint([1.0, 0.0, 0.0])];
    let mut fixed = Vec::new();
    if cfg.bool_param("fixed-points", is_phi)? {
        for &tau in &taus {
            for f in find_fixed_points(&SphereKick::phi(), tau, 200) {
                fixed.push(json!({"tau": tau, "point": f.point.0, "residual": f.residual, "iterations": f.iterations}));
                if f.point.z().abs() < 1e-8 && !samples.iter().any(|s| s.dist(&f.point) < 1e-9) {
                    samples.push(f.point);
                }
            }
        }
    }
    samples.extend(sphere_samples(cfg.seed_or(0), cfg.num_param("samples", 16usize)?));

    let result = kicked_top_scan(&kicks, &taus, eps, &samples, window, margin, cfg.mode)?;
    let mut t = Table::new("scan", &["tau", "eps", "N", "R_hat", "mu_A", "verdict"]);
    for r in &result.rows {
        let rep = &r.report;
        t.push(vec![r.tau.into(), r.eps.into(), rep.best_n.into(), rep.r_hat.into(), rep.mu_a.into(), rep.verdict.into()]);
    }

    let mut inv = Table::new("invariants", &["tau", "N", "max_z_drift", "max_norm_drift"]);
    let mut lemma = Table::new("lemma", &LEMMA_HEADER);
    let mut violations = 0u64;
    for &tau in &taus {
        let sys = top_system(tau, kicks.clone())?;
        let (mut dz, mut dn) = (0.0f64, 0.0f64);
        for s in &samples {
            for p in sys.walk(*s).take(window.max as usize + 1) {
                dz = dz.max((p.z() - s.z()).abs());
                dn = dn.max((p.norm() - 1.0).abs());
            }
        }
        inv.push(vec![tau.into(), window.max.into(), dz.into(), dn.into()]);
        let chk = check_quasi_integral_counts(&sys, hamiltonian_h, TOP_MAX_H, c, &samples, window)?;
        violations += chk.violations;
        lemma_row(&mut lemma, tau, c, &chk);
    }

    let grid = linspace(0.01, 0.99, 99);
    let zone_violations = grid
        .iter()
        .map(|&cc| measure_of_ac(cc))
        .collect::<kicked_core::Result<Vec<_>>>()?
        .iter()
        .zip(&grid)
        .filter(|(m, &cc)| m.mu > m.gamma / (cc + m.gamma))
        .count();

    let mut out = Output::default();
    out.checks.push(Check::new("lemma_counts", violations == 0, format!("{violations} violations")));
    out.checks.push(Check::new(
        "zone_measure_bound",
        zone_violations == 0,
        format!("{zone_violations} of 99 grid points violate μ(A_c) ≤ γ/(c+γ)"),
    ));
    out.documents.push((
        "top_scan".into(),
        json!({
            "density": result.density,
            "exploratory": true,
            "fixed_points": fixed,
            "samples": samples.len(),
            "window": [window.min, window.max],
            "zone_bound_violations": zone_violations,
        }),
    ));
    out.tables.extend([t, inv, lemma]);
    Ok(out)
}

pub const TIMEREVERSAL_KEYS: &[&str] = &["theta", "arena", "samples"];

pub fn timereversal(cfg: &RunConfig) -> CliResult<Output> {
    let arena = cfg.str_param("arena", "sphere");
    let name = cfg.str_param("theta", if arena == "flat" { "shift" } else { "mirror-z" });
    let count = cfg.num_param("samples", 64usize)?;
    let ts = match (cfg.tau_grid, cfg.tau) {
        (None, None) => linspace(-1.0, 1.0, 9),
        _ => cfg.taus_or(&[]),
    };
    let steps = cfg.steps_or(1000);
    let period_tau = cfg.tau.unwrap_or(0.83);
    let mut periodic = Table::new("periodic", &["tau", "steps", "max_return_deviation"]);
    let (report, ret): (TimeReversalReport, f64) = match arena {
        "sphere" => {
            let th = theta(name)?;
            let pts = sphere_samples(cfg.seed_or(0), count);
            let rep = top_time_reversal(&th, &ts, &pts);
            let sys = top_system(period_tau, two_periodic_schedule(&th))?;
            let mut worst: f64 = 0.0;
            for p in &pts {
                for (i, q) in sys.walk(*p).take(steps as usize + 1).enumerate() {
                    if i % 2 == 0 {
                        worst = worst.max(q.dist(p));
                    }
                }
            }
            (rep, worst)
        }
        "flat" => {
            if name != "shift" {
                return config_err("the flat arena only has the shift θ = (1/2, 0)");
            }
            let s = SeedStream::new(cfg.seed_or(0));
            let pts: Vec<FlatPoint> = (0..count as u64).map(|i| s.uniforms::<2>(0, i)).collect();
            let rep = flat_time_reversal(&ts, &pts);
            let sys = KickedSystem::new(FlatTorus, period_tau, flat_two_periodic())?;
            let mut worst: f64 = 0.0;
            for p in &pts {
                for (i, q) in sys.walk(*p).take(steps as usize + 1).enumerate() {
                    if i % 2 == 0 {
                        worst = worst.max(kicked_core::hamiltonian::flat_dist(&q, p));
                    }
                }
            }
            (rep, worst)
        }
        other => return config_err(format!("arena must be sphere or flat, got {other:?}")),
    };
    periodic.push(vec![period_tau.into(), steps.into(), ret.into()]);
    let mut t = Table::new("timereversal", &["arena", "theta", "t_samples", "points", "max_deviation", "pass"]);
    t.push(vec![
        arena.into(),
        name.into(),
        ts.len().into(),
        count.into(),
        report.max_deviation.into(),
        report.pass.into(),
    ]);
    let mut out = Output::default();
    out.checks.push(Check::new(
        "time_reversal",
        report.pass,
        format!("max deviation {:e} (tolerance 1e-9)", report.max_deviation),
    ));
    out.checks.push(Check::new(
        "two_periodic_return",
        ret <= 1e-12,
        format!("max |f^(2k)x − x| = {ret:e}"),
    ));
    out.tables.extend([t, periodic]);
    Ok(out)
}

pub const HAMILTONIAN_KEYS: &[&str] = &["gamma", "x0", "delta", "samples", "indices", "witness", "witness-tau", "c"];

pub fn flat_hamiltonian(cfg: &RunConfig) -> CliResult<Output> {
    let g = cfg.f64_list("gamma", &[2f64.sqrt(), 3f64.sqrt()])?;
    let [g0, g1] = g.as_slice() else {
        return config_err("gamma needs two components");
    };
    let gamma = [*g0, *g1];
    let x0v = cfg.f64_list("x0", &[0.1, 0.2])?;
    let [a, b] = x0v.as_slice() else {
        return config_err("x0 needs two components");
    };
    let x0 = flat_point(*a, *b);
    let steps = cfg.steps_or(100_000);
    let window = cfg.window_or((steps, steps))?;
    let taus = cfg.taus_or(&[0.3, 0.8, 1.7]);
    let c = cfg.f64_param("c", 0.5)?;
    let f = |p: &FlatPoint| (TAU * p[1]).cos();

    let mut t = Table::new(
        "birkhoff",
        &["tau", "N", "I_N", "I_N_one", "max_abs_even", "bookkeeping_deviation"],
    );
    let mut lemma = Table::new("lemma", &LEMMA_HEADER);
    let mut worst_even: f64 = 0.0;
    let mut worst_book: f64 = 0.0;
    let mut violations = 0u64;
    for &tau in &taus {
        let sys = KickedSystem::new(FlatTorus, tau, randomizing_schedule(gamma))?;
        let prof = birkhoff_profile(&sys, f, &[x0], window, cfg.mode)?;
        let ones = birkhoff_profile(&sys, |_| 1.0, &[x0], Window::new(window.max, window.max)?, cfg.mode)?;
        let even = window
            .horizons()
            .filter(|n| n % 2 == 0)
            .map(|n| prof.at(0, n).abs())
            .fold(0.0, f64::max);
        worst_even = worst_even.max(even);
        let book = randomizing_bookkeeping(tau, gamma, &x0, steps.min(20_000))?;
        worst_book = worst_book.max(book.max_deviation);
        t.push(vec![
            tau.into(),
            window.max.into(),
            prof.at(0, window.max).into(),
            ones.at(0, window.max).into(),
            even.into(),
            book.max_deviation.into(),
        ]);
        let chk = check_quasi_integral_counts(&sys, f, 1.0, c, &[x0], window)?;
        violations += chk.violations;
        lemma_row(&mut lemma, tau, c, &chk);
    }
    let mut out = Output::default();
    out.checks.push(Check::new(
        "birkhoff_average_small",
        worst_even < 0.01,
        format!("max |I_N| at even N: {worst_even}"),
    ));
    out.checks.push(Check::new(
        "bookkeeping",
        worst_book <= 1e-9,
        format!("max deviation from the telescoped evolution {worst_book:e}"),
    ));
    out.checks.push(Check::new("lemma_counts", violations == 0, format!("{violations} violations")));
    out.tables.extend([t, lemma]);

    if cfg.bool_param("witness", true)? {
        let wtau = cfg.f64_param("witness-tau", taus[0])?;
        let delta = cfg.f64_param("delta", 0.01)?;
        let samples = cfg.num_param("samples", 1_000_000usize)?;
        let indices = cfg.num_param("indices", 6u64)?;
        let sys = KickedSystem::new(FlatTorus, wtau, flat_two_periodic())?;
        let rep = nonmixing_witness(&sys, delta, indices, samples, cfg.seed_or(0), cfg.mode)?;
        let mut w = Table::new("witness", &["index", "estimate", "sigma", "mixing_value", "separation"]);
        for cr in &rep.correlations {
            w.push(vec![
                cr.index.into(),
                cr.estimate.value.into(),
                cr.estimate.sigma.into(),
                rep.mixing_value.into(),
                cr.separation.into(),
            ]);
        }
        out.checks.push(Check::new(
            "nonmixing_separation",
            rep.min_separation >= 10.0,
            format!("min separation {} σ", rep.min_separation),
        ));
        out.documents.push((
            "witness".into(),
            json!({
                "tau": rep.tau,
                "center": rep.center,
                "radius": rep.radius,
                "delta": rep.delta,
                "mixing_value": rep.mixing_value,
                "min_separation": rep.min_separation,
                "samples": samples,
            }),
        ));
        out.tables.push(w);
    }
    Ok(out)
}
