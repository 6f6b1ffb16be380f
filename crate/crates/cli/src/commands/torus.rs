use std::f64::consts::SQRT_2;

use kicked_core::numeric::SeedStream;
use kicked_core::sequential::KickSchedule;
use kicked_core::torus::{
    burago_kicks, evolution_points, hit_report, mean_square_weyl, random_kicks, star_discrepancy,
    torus_system, weyl_sum, zero_kicks, FrequencyVector, MeanSquareTerms, TorusVector, EQUIDISTRIBUTION_THRESHOLD,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{config_err, CliResult};
use crate::output::{Check, Output, Table};

/// Lane reserved for drawing τ values, far from the kick lanes.
const TAU_LANE: u64 = 1 << 40;

fn frequency(cfg: &RunConfig) -> CliResult<FrequencyVector> {
    Ok(FrequencyVector::asserted_generic(cfg.f64_list("omega", &[SQRT_2])?)?)
}

fn kicks(cfg: &RunConfig, d: usize) -> CliResult<KickSchedule<TorusVector>> {
    match cfg.str_param("kicks", "random") {
        "zero" => Ok(zero_kicks(d)),
        "random" => Ok(random_kicks(d, cfg.seed_or(0))),
        other => config_err(format!("kicks must be zero or random, got {other:?}")),
    }
}

fn h_vector(cfg: &RunConfig, d: usize) -> CliResult<Vec<i64>> {
    let h = cfg.num_list("h", &vec![1i64; d])?;
    if h.len() != d {
        return config_err(format!("h has {} entries, omega has {d}", h.len()));
    }
    Ok(h)
}

fn join_h(h: &[i64]) -> String {
    h.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

/// τ values: spaced grid, or `tau-draw=uniform` for seeded draws from the grid's interval.
fn weyl_taus(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    match cfg.str_param("tau-draw", "spaced") {
        "spaced" => Ok(cfg.taus_or(&[1.0])),
        "uniform" => {
            let Some(g) = cfg.tau_grid else {
                return config_err("tau-draw=uniform needs --tau-grid a:b:n");
            };
            let s = SeedStream::new(cfg.seed_or(0));
            Ok((0..g.n as u64).map(|j| g.a + (g.b - g.a) * s.uniform(TAU_LANE, j)).collect())
        }
        other => config_err(format!("tau-draw must be spaced or uniform, got {other:?}")),
    }
}

pub const WEYL_KEYS: &[&str] = &["omega", "h", "kicks", "tau-draw"];

pub fn weyl(cfg: &RunConfig) -> CliResult<Output> {
    let freq = frequency(cfg)?;
    let d = freq.dim();
    let h = h_vector(cfg, d)?;
    let n = cfg.steps_or(10_000);
    let taus = weyl_taus(cfg)?;
    let mut weyl = Table::new("weyl", &["tau", "N", "h", "re", "im", "abs"]);
    let mut disc = Table::new("discrepancy", &["tau", "N", "discrepancy", "equidistributed"]);
    let x0 = TorusVector::zero(d);
    let mut below = 0usize;
    for &tau in &taus {
        let sys = torus_system(freq.clone(), tau, kicks(cfg, d)?)?;
        let s = weyl_sum(&h, &sys, &x0, n)?;
        weyl.push(vec![tau.into(), n.into(), join_h(&h).into(), s.re.into(), s.im.into(), s.abs.into()]);
        if d == 1 {
            let xs: Vec<f64> = evolution_points(&sys, &x0).skip(1).take(n as usize).map(|p| p.coords()[0]).collect();
            let dn = star_discrepancy(&xs)?;
            let ok = dn < EQUIDISTRIBUTION_THRESHOLD;
            below += usize::from(ok);
            disc.push(vec![tau.into(), n.into(), dn.into(), ok.into()]);
        }
    }
    let mut out = Output::default();
    out.tables.push(weyl);
    if d == 1 {
        out.checks.push(Check::new(
            "discrepancy_below_threshold",
            10 * below >= 9 * taus.len(),
            format!("{below}/{} τ values below {EQUIDISTRIBUTION_THRESHOLD}", taus.len()),
        ));
        out.tables.push(disc);
    }
    Ok(out)
}

pub const MEANSQUARE_KEYS: &[&str] = &["omega", "h", "kicks", "horizons", "terms"];

pub fn meansquare(cfg: &RunConfig) -> CliResult<Output> {
    let freq = frequency(cfg)?;
    let d = freq.dim();
    let h = h_vector(cfg, d)?;
    let grid = cfg.tau_grid.unwrap_or(crate::config::TauGrid { a: 1.0, b: 2.0, n: 10_000 });
    if grid.n < 2 || !(grid.a < grid.b) {
        return config_err("mean square needs a tau grid a:b:n with a < b and n ≥ 2 quadrature nodes");
    }
    let horizons: Vec<u64> = match cfg.steps {
        Some(n) => vec![n],
        None => cfg.num_list("horizons", &[100u64, 1000, 10_000])?,
    };
    let terms = cfg.str_param("terms", "both");
    let (full, diag) = match terms {
        "both" => (true, true),
        "full" => (true, false),
        "diagonal" => (false, true),
        other => return config_err(format!("terms must be both, full or diagonal, got {other:?}")),
    };
    let kicks = kicks(cfg, d)?;
    let interval = (grid.a, grid.b);
    let mut t = Table::new(
        "meansquare",
        &["N", "terms", "M", "M_scaled", "diagonal_analytic", "rel_to_diagonal"],
    );
    let mut scaled_first = None;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for &n in &horizons {
        let analytic = (grid.b - grid.a) / n as f64;
        let scale = n as f64 / (n as f64).ln();
        if full {
            let m = mean_square_weyl(&h, &kicks, &freq, interval, n, grid.n, MeanSquareTerms::Full, cfg.mode)?;
            let s = m * scale;
            let first = *scaled_first.get_or_insert(s);
            worst_ratio = worst_ratio.max(s / first);
            t.push(vec![n.into(), "full".into(), m.into(), s.into(), analytic.into(), (m / analytic).into()]);
        }
        if diag {
            let m = mean_square_weyl(&h, &kicks, &freq, interval, n, grid.n, MeanSquareTerms::DiagonalOnly, cfg.mode)?;
            let rel = (m - analytic).abs() / analytic;
            worst_diag = worst_diag.max(rel);
            t.push(vec![n.into(), "diagonal".into(), m.into(), (m * scale).into(), analytic.into(), (m / analytic).into()]);
        }
    }
    let mut out = Output::default();
    if full {
        out.checks.push(Check::new(
            "scaled_mean_square_within_3x",
            worst_ratio <= 3.0,
            format!("max M·N/log N relative to the first horizon: {worst_ratio}"),
        ));
    }
    if diag {
        out.checks.push(Check::new(
            "diagonal_matches_analytic",
            worst_diag < 0.01,
            format!("max relative deviation from (b−a)/N: {worst_diag}"),
        ));
    }
    out.tables.push(t);
    Ok(out)
}

pub const BURAGO_KEYS: &[&str] = &["omega", "half-width"];

pub fn burago(cfg: &RunConfig) -> CliResult<Output> {
    let omega = cfg.f64_param("omega", SQRT_2)?;
    let half = cfg.f64_param("half-width", 0.01)?;
    let n = cfg.steps_or(100_000);
    let taus = cfg.taus_or(&[1.0, 2.0, 3.0]);
    let freq = FrequencyVector::asserted_generic(vec![omega])?;
    let mut t = Table::new(
        "burago",
        &[
            "tau",
            "N",
            "hits",
            "hit_frequency",
            "expected",
            "interval_half_width",
            "interval_frequency",
            "discrepancy",
            "equidistributed",
        ],
    );
    let mut hit_ok = true;
    let mut none_equidistributed = true;
    for &tau in &taus {
        let sys = torus_system(freq.clone(), tau, burago_kicks(omega, None))?;
        let r = hit_report(&sys, n, half)?;
        // at a positive integer τ the orbit sits at 0 exactly when u(k) = τ
        let expected = (tau.fract() == 0.0 && tau >= 1.0).then(|| 0.5f64.powi(tau as i32));
        if let Some(e) = expected {
            hit_ok &= (r.hit_frequency - e).abs() <= 0.01 * e;
        }
        none_equidistributed &= !r.equidistributed;
        t.push(vec![
            tau.into(),
            n.into(),
            r.hits.into(),
            r.hit_frequency.into(),
            expected.into(),
            half.into(),
            r.interval_frequency.into(),
            r.discrepancy.into(),
            r.equidistributed.into(),
        ]);
    }
    let mut out = Output::default();
    out.checks.push(Check::new("hit_frequency_matches_valuation_density", hit_ok, "within 1% of 2^-τ"));
    out.checks.push(Check::new("not_equidistributed", none_equidistributed, "discrepancy verdict negative"));
    out.documents.push((
        "burago_schedule".into(),
        json!({"omega": omega, "u": "1 + 2-adic valuation of k", "steps": n}),
    ));
    out.tables.push(t);
    Ok(out)
}
