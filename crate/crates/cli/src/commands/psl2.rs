use kicked_core::moebius::{
    boundedness_link_check, cover_report, entry_recursion, escape_detector, evolve_matrices, evolve_matrix,
    gauge_growth, monotone_scan, sharpness_kicks, sharpness_residual, schrodinger_entries, trace_agreement,
    trace_polynomial, trace_report, unipotent_kicks, upper_triangular_closed_form, upper_triangular_kicks,
    IntervalCover, Mat2, RationalKick, DEFAULT_ESCAPE_THRESHOLD,
};
use kicked_core::numeric::SeedStream;
use kicked_core::sequential::{map_ordered, KickSchedule};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{config_err, CliError, CliResult};
use crate::output::{Cell, Check, Output, Table};

/// A resolved kick family. Unipotent families keep their coefficients so the
/// recursion-based operations can use them.
struct Kicks {
    schedule: KickSchedule<Mat2>,
    c: Option<Vec<f64>>,
    upper: Option<(Vec<f64>, Vec<f64>)>,
}

fn seeded(seed: u64, lane: u64, count: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let s = SeedStream::new(seed);
    (0..count as u64).map(|i| f(s.uniform(lane, i))).collect()
}

fn unipotent(c: Vec<f64>) -> CliResult<Kicks> {
    Ok(Kicks {
        schedule: unipotent_kicks(&c)?,
        c: Some(c),
        upper: None,
    })
}

/// `count` is how many kicks a random family needs.
fn psl2_kicks(cfg: &RunConfig, default: &str, count: usize, seed: u64) -> CliResult<Kicks> {
    let count = cfg.num_param("count", count)?.max(1);
    match cfg.str_param("kicks", default) {
        "identity" => Ok(Kicks {
            schedule: KickSchedule::constant(Mat2::IDENTITY),
            c: None,
            upper: None,
        }),
        "unipotent" => unipotent(cfg.f64_list("c", &[1.0])?),
        "random-unipotent" => unipotent(seeded(seed, 0, count, |u| 2.0 * u - 1.0)),
        "nonneg-unipotent" => unipotent(seeded(seed, 0, count, |u| u)),
        "signs" => unipotent(seeded(seed, 0, count, |u| if u < 0.5 { -1.0 } else { 1.0 })),
        "sharpness" => Ok(Kicks {
            schedule: sharpness_kicks(cfg.f64_param("tau0", 1.5)?),
            c: None,
            upper: None,
        }),
        "upper" => {
            let a = cfg.f64_list("a", &[2.0])?;
            let b = cfg.f64_list("b", &vec![0.0; a.len()])?;
            Ok(Kicks {
                schedule: upper_triangular_kicks(&a, &b)?,
                c: None,
                upper: Some((a, b)),
            })
        }
        "upper-random" => {
            let a = seeded(seed, 0, count, |u| 0.5 + 1.5 * u);
            let b = seeded(seed, 1, count, |u| u);
            Ok(Kicks {
                schedule: upper_triangular_kicks(&a, &b)?,
                c: None,
                upper: Some((a, b)),
            })
        }
        other => config_err(format!("unknown kick family {other:?}")),
    }
}

/// The first `k` coefficients, cycling a shorter list.
fn coefficients(c: &[f64], k: usize) -> Vec<f64> {
    (0..k).map(|i| c[i % c.len()]).collect()
}

const KICK_KEYS: [&str; 6] = ["kicks", "c", "a", "b", "tau0", "count"];

pub const EVOLVE_KEYS: &[&str] = &KICK_KEYS;

pub fn evolve(cfg: &RunConfig) -> CliResult<Output> {
    let k = cfg.steps_or(10);
    let kicks = psl2_kicks(cfg, "identity", k as usize, cfg.seed_or(0))?;
    let taus = cfg.taus_or(&[1.0]);
    let mut t = Table::new("evolve", &["tau", "k", "norm", "log_norm", "trace"]);
    let mut cf_table = Table::new("closed_form", &["tau", "k", "entrywise_rel_err"]);
    let mut worst: f64 = 0.0;
    for &tau in &taus {
        let mats = evolve_matrices(&kicks.schedule, tau, k)?;
        for (i, m) in mats.iter().enumerate() {
            t.push(vec![tau.into(), i.into(), m.norm().into(), m.norm().ln().into(), m.trace().into()]);
        }
        if let Some((a, b)) = &kicks.upper {
            let a = coefficients(a, k as usize);
            let b = coefficients(b, k as usize);
            let closed = upper_triangular_closed_form(&a, &b)?.at(tau);
            let err = closed.entrywise_rel_err(&mats[k as usize]);
            worst = worst.max(err);
            cf_table.push(vec![tau.into(), k.into(), err.into()]);
        }
    }
    let mut out = Output::default();
    out.tables.push(t);
    if kicks.upper.is_some() {
        out.checks.push(Check::new(
            "closed_form_matches_product",
            worst < 1e-12,
            format!("max entrywise relative error {worst:e}"),
        ));
        out.tables.push(cf_table);
    }
    Ok(out)
}

pub const SCHRODINGER_KEYS: &[&str] = &["kicks", "c", "count", "threshold", "agreement-steps"];

pub fn schrodinger(cfg: &RunConfig) -> CliResult<Output> {
    let k = cfg.steps_or(1000) as usize;
    let kicks = psl2_kicks(cfg, "random-unipotent", k, cfg.seed_or(0))?;
    let Some(c) = kicks.c.as_ref().map(|c| coefficients(c, k)) else {
        return config_err("psl2-schrodinger needs a lower-unipotent kick family");
    };
    // Products overflow long before the rescaled monotone scan does when all
    // c_i ≥ 0, so the matrix comparisons may use a shorter horizon.
    let ka = cfg.num_param("agreement-steps", k)?.min(k);
    let ca = &c[..ka];
    let threshold = cfg.f64_param("threshold", DEFAULT_ESCAPE_THRESHOLD)?;
    let taus = cfg.taus_or(&[1.5]);
    let mut agree = Table::new(
        "agreement",
        &[
            "tau",
            "k",
            "alpha",
            "beta",
            "gamma",
            "delta",
            "err_recursion_product",
            "err_schrodinger_product",
            "err_recursion_schrodinger",
        ],
    );
    let mut link = Table::new(
        "link",
        &["tau", "K", "max_q", "max_norm", "q_bounded", "norm_bounded", "within_link_bounds"],
    );
    let mut mono = Table::new(
        "monotone",
        &[
            "tau",
            "K",
            "alpha_first_decrease",
            "beta_first_decrease",
            "gamma_first_decrease",
            "delta_first_decrease",
            "all_nondecreasing",
        ],
    );
    let mut worst: f64 = 0.0;
    let mut all_mono = true;
    let mut links_ok = true;
    for &tau in &taus {
        let rec = entry_recursion(ca, tau);
        let sch = schrodinger_entries(ca, tau)?;
        let mats = evolve_matrices(&unipotent_kicks(ca)?, tau, ka as u64)?;
        for (i, m) in mats.iter().enumerate() {
            let (r, s) = (rec.matrix(i), sch.matrix(i));
            let e = [r.projective_rel_err(m), s.projective_rel_err(m), r.projective_rel_err(&s)];
            worst = e.iter().fold(worst, |w, x| w.max(*x));
            agree.push(vec![
                tau.into(),
                i.into(),
                r.a.into(),
                r.b.into(),
                r.c.into(),
                r.d.into(),
                e[0].into(),
                e[1].into(),
                e[2].into(),
            ]);
        }
        let lk = boundedness_link_check(&ca.iter().map(|&x| Mat2::lower_unipotent(x)).collect::<Vec<_>>(), tau, threshold)?;
        links_ok &= lk.within_link_bounds;
        link.push(vec![
            tau.into(),
            lk.k.into(),
            lk.max_q.into(),
            lk.max_norm.into(),
            lk.q_bounded.into(),
            lk.norm_bounded.into(),
            lk.within_link_bounds.into(),
        ]);
        let m = monotone_scan(c.iter().copied(), tau);
        all_mono &= m.all_nondecreasing();
        let mut row: Vec<Cell> = vec![tau.into(), m.steps.into()];
        row.extend(m.first_decrease.iter().map(|d| Cell::from(*d)));
        row.push(m.all_nondecreasing().into());
        mono.push(row);
    }
    let mut out = Output::default();
    out.checks.push(Check::new(
        "triple_agreement",
        worst < 1e-9,
        format!("max pairwise projective relative error {worst:e}"),
    ));
    out.checks.push(Check::new("link_bounds", links_ok, "norm within the q-solution envelope"));
    if c.iter().all(|&x| x >= 0.0) {
        out.checks.push(Check::new("entries_nondecreasing", all_mono, "exact comparison of successive entries"));
    }
    out.tables.extend([agree, link, mono]);
    Ok(out)
}

/// Seeded rational kicks `(a, b; c, (1 + bc)/a)` with small nonzero numerators.
fn rational_kicks(seed: u64, k: usize) -> CliResult<Vec<RationalKick>> {
    let st = SeedStream::new(seed);
    (0..k as u64)
        .map(|i| {
            let pick = |lane: u64| {
                let n = st.below(lane, i, 9) as i64 - 4;
                let d = st.below(lane + 10, i, 4) as i64 + 1;
                (if n == 0 { 1 } else { n }, d)
            };
            RationalKick::from_abc(pick(0), pick(1), pick(2)).map_err(CliError::from)
        })
        .collect()
}

pub const TRACE_KEYS: &[&str] = &["evaluations"];

pub fn trace(cfg: &RunConfig) -> CliResult<Output> {
    let k = cfg.steps_or(30) as usize;
    if k == 0 {
        return config_err("trace polynomial needs k ≥ 1");
    }
    let seed = cfg.seed_or(0);
    let kicks = rational_kicks(seed, k)?;
    let poly = trace_polynomial(&kicks)?;
    let report = trace_report(&kicks)?;
    let taus = if cfg.tau.is_some() || cfg.tau_grid.is_some() {
        cfg.taus_or(&[])
    } else {
        let n = cfg.num_param("evaluations", 20usize)?;
        let s = SeedStream::new(seed);
        (0..n as u64).map(|j| 2.0 * s.uniform(1 << 40, j)).collect()
    };
    let sched = KickSchedule::cycled(kicks.iter().map(RationalKick::to_mat2).collect())?;
    let mut t = Table::new("trace_eval", &["tau", "k", "poly_value", "numeric_trace", "agreement"]);
    let mut worst: f64 = 0.0;
    for &tau in &taus {
        let g = evolve_matrix(&sched, tau, k as u64)?;
        let a = trace_agreement(&poly, &g, tau);
        worst = worst.max(a);
        t.push(vec![tau.into(), k.into(), poly.eval(tau).into(), g.trace().into(), a.into()]);
    }
    let leading_ok = report.leading == report.prod_c && poly.degree() == k;
    let mut out = Output::default();
    out.checks.push(Check::new("leading_equals_prod_c", leading_ok, format!("degree {}", poly.degree())));
    out.checks.push(Check::new(
        "evaluations_match_traces",
        worst < 1e-9,
        format!("max agreement error {worst:e}"),
    ));
    out.documents.push((
        "trace".into(),
        json!({
            "k": report.k,
            "coeffs": report.coeffs,
            "leading": report.leading,
            "prod_c": report.prod_c,
            "degree": poly.degree(),
        }),
    ));
    out.tables.push(t);
    Ok(out)
}

pub const ESCAPE_KEYS: &[&str] = &["kicks", "c", "a", "b", "tau0", "count", "threshold", "seeds"];

pub fn escape_scan(cfg: &RunConfig) -> CliResult<Output> {
    let k = cfg.steps_or(10_000);
    let threshold = cfg.f64_param("threshold", DEFAULT_ESCAPE_THRESHOLD)?;
    let seeds = cfg.num_param("seeds", 1u64)?;
    let base = cfg.seed_or(0);
    let taus = cfg.taus_or(&[10.0]);
    let family = cfg.str_param("kicks", "signs").to_string();
    let jobs: Vec<(u64, f64)> = (base..base + seeds).flat_map(|s| taus.iter().map(move |&t| (s, t))).collect();
    let rows = map_ordered(cfg.mode, &jobs, |_, &(seed, tau)| -> CliResult<Vec<Cell>> {
        let kicks = psl2_kicks(cfg, &family, k as usize, seed)?;
        let v = escape_detector(&kicks.schedule, tau, k, threshold)?;
        let slope = gauge_growth(&Mat2::horocycle(tau), &kicks.schedule, k)?.slope;
        Ok(vec![
            seed.into(),
            tau.into(),
            k.into(),
            threshold.into(),
            v.escaped().into(),
            v.escaped_at.into(),
            v.running_max.into(),
            v.argmax.into(),
            slope.into(),
        ])
    });
    let mut t = Table::new(
        "escape",
        &["seed", "tau", "K", "threshold", "escaped", "escaped_at", "running_max", "argmax", "gauge_slope"],
    );
    let mut escaped = 0usize;
    for r in rows {
        let r = r?;
        escaped += usize::from(r[4] == Cell::B(true));
        t.push(r);
    }
    let mut out = Output::default();
    out.checks.push(Check::new(
        "escaped_count",
        escaped == jobs.len(),
        format!("{escaped}/{} runs escaped", jobs.len()),
    ));
    if family == "sharpness" {
        let tau0 = cfg.f64_param("tau0", 1.5)?;
        let mut s = Table::new("sharpness", &["tau", "k", "bounded", "residual"]);
        let mut bounded_at = Vec::new();
        let mut worst: f64 = 0.0;
        for (row, &tau) in t.rows.iter().zip(&taus) {
            let bounded = row[4] == Cell::B(false);
            if bounded {
                bounded_at.push(tau);
            }
            let res = sharpness_residual(tau0, tau, k)?;
            worst = worst.max(res);
            s.push(vec![tau.into(), k.into(), bounded.into(), res.into()]);
        }
        out.checks.push(Check::new(
            "bounded_only_at_tau0",
            bounded_at == [tau0],
            format!("bounded at {bounded_at:?}"),
        ));
        out.checks.push(Check::new(
            "norm_identity",
            worst <= 1e-9,
            format!("max relative residual {worst:e}"),
        ));
        out.tables.push(s);
    }
    out.tables.insert(0, t);
    Ok(out)
}

pub const INTERVALS_KEYS: &[&str] = &["multiplicity"];

pub fn intervals(cfg: &RunConfig) -> CliResult<Output> {
    let k_max = cfg.steps_or(100);
    let multiplicity = cfg.num_param("multiplicity", 3usize)?;
    let taus = cfg.taus_or(&[0.0, 0.37, 1.4, 3.9]);
    let cover = IntervalCover::new();
    let mut iv = Table::new("intervals", &["k", "r_k", "right", "beta_k"]);
    for k in 1..=k_max {
        let (lo, hi) = cover.interval(k)?;
        iv.push(vec![k.into(), lo.into(), hi.into(), cover.beta(k)?.into()]);
    }
    let rep = cover_report(&cover, &taus, multiplicity);
    let mut cv = Table::new("cover", &["tau", "covering_count", "k_needed"]);
    let mut worst: f64 = 0.0;
    for (&tau, &kn) in taus.iter().zip(&rep.k_needed) {
        cv.push(vec![tau.into(), cover.covering_indices(tau).len().into(), kn.into()]);
        let mats = evolve_matrices(&cover.kicks(), tau, k_max)?;
        for (k, g) in mats.iter().enumerate().skip(1) {
            let e = cover.evolution(k as u64, tau)?;
            worst = worst.max((g.b - e.b).abs() / (1.0 + e.b.abs()));
        }
    }
    let mut out = Output::default();
    out.checks.push(Check::new(
        "covered",
        rep.undercovered.is_empty(),
        format!("{} grid points covered fewer than {multiplicity} times", rep.undercovered.len()),
    ));
    out.checks.push(Check::new(
        "evolution_identity",
        worst < 1e-9,
        format!("max relative deviation of the upper entry {worst:e}"),
    ));
    out.tables.extend([iv, cv]);
    Ok(out)
}
