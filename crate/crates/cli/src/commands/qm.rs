use std::sync::Arc;

use kicked_core::hyperbolic::{
    geodesic_between, hyperbolic_form, integrate_form, parabolic_form, r_infinity, BoundedOneForm, FuchsianGroup, OneForm,
    QuasiMorphism, QuasiMorphismEstimate, RValue, UHPoint, Word, DEFAULT_TOL,
};
use kicked_core::hyperbolic::qm::RRecord;
use kicked_core::moebius::Mat2;
use serde_json::{json, Value};

use crate::config::{parse_f64, RunConfig};
use crate::error::{config_err, CliError, CliResult};
use crate::output::{Check, Output, Table};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn n_max(cfg: &RunConfig) -> CliResult<u32> {
    let n = cfg.num_param("n-max", cfg.steps.unwrap_or(30) as u32)?;
    if n < 4 {
        return config_err("n-max must be at least 4");
    }
    Ok(n)
}

/// `a,b,c,d;a,b,c,d;...`
fn parse_generators(s: &str) -> CliResult<Vec<Mat2>> {
    s.split(';')
        .map(|m| {
            let e: Vec<f64> = m.split(',').map(|x| parse_f64("generators", x)).collect::<CliResult<_>>()?;
            let [a, b, c, d] = e.as_slice() else {
                return config_err(format!("generator {m:?} needs four entries"));
            };
            Ok(Mat2::new(*a, *b, *c, *d)?)
        })
        .collect()
}

fn r_table(records: &[(String, u32, RValue)]) -> Table {
    let mut t = Table::new("r_values", &["word", "n", "value", "error", "flagged"]);
    for (w, n, v) in records {
        t.push(vec![w.clone().into(), (*n as u64).into(), v.value.into(), v.error.into(), v.flagged.into()]);
    }
    t
}

struct Powers {
    label: String,
    values: Vec<RValue>,
}

fn estimate(
    qm: &QuasiMorphism,
    p: &Powers,
    n: usize,
    word_cap: usize,
    defect_max: f64,
    defect_flagged: usize,
) -> CliResult<QuasiMorphismEstimate> {
    let vals: Vec<f64> = p.values[..n].iter().map(|v| v.value).collect();
    Ok(QuasiMorphismEstimate {
        generators: qm.group().generators().into_iter().map(|(l, m)| (l, m.entries())).collect(),
        word_cap,
        bound: qm.form().bound(),
        r_values: vals
            .iter()
            .enumerate()
            .map(|(i, &value)| RRecord {
                word: p.label.clone(),
                n: i as u32 + 1,
                value,
            })
            .collect(),
        defect_max,
        defect_bound: qm.defect_bound(),
        r_infinity: r_infinity(&vals, qm.defect_bound())?,
        truncation_warnings: p.values[..n].iter().filter(|v| v.flagged).count() + defect_flagged,
    })
}

fn flagged_warnings(out: &mut Output, count: usize) {
    if count > 0 {
        out.warnings.push(format!(
            "{count} integrals hit a reduction, quadrature or drift guard; values are truncated"
        ));
    }
}

pub const PARABOLIC_KEYS: &[&str] = &["y0", "y1", "word-cap", "n-max", "pairs", "word"];

pub fn parabolic(cfg: &RunConfig) -> CliResult<Output> {
    let group = Arc::new(FuchsianGroup::with_labels(&[
        ('T', Mat2::horocycle(1.0)),
        ('S', Mat2::new(0.0, -1.0, 1.0, 0.0)?),
    ])?);
    let y0 = cfg.f64_param("y0", 2.5)?;
    let y1 = cfg.f64_param("y1", 3.0)?;
    let word_cap = cfg.num_param("word-cap", 8usize)?;
    let n = n_max(cfg)?;
    let pairs = cfg.num_param("pairs", 200usize)?;
    let form = parabolic_form(group.clone(), y0, y1, word_cap)?;
    let base = UHPoint::new(0.0, y1)?;
    let qm = QuasiMorphism::new(form, base, DEFAULT_TOL)?;
    let w = group.parse_word(cfg.str_param("word", "T"))?;
    let p = Powers {
        label: group.format_word(&w),
        values: qm.powers(&w, n)?,
    };
    let words: Vec<Word> = group.enumerate(word_cap).into_iter().map(|(w, _)| w).collect();
    let defects = qm.sample_defects(&words, pairs, cfg.seed_or(0))?;
    let est = estimate(&qm, &p, n as usize, word_cap, defects.max, defects.flagged)?;
    let shift_word = group.parse_word("TTSTtS")?;
    let shifts: Vec<f64> = [((0.0, y1), (0.2, 1.1)), ((-0.4, 5.0), (0.1, 0.9))]
        .iter()
        .map(|&((a, b), (c, d))| qm.base_point_shift(&shift_word, UHPoint::new(a, b)?, UHPoint::new(c, d)?))
        .collect::<kicked_core::Result<_>>()?;
    let max_shift = shifts.iter().copied().fold(0.0, f64::max);
    let bound = qm.defect_bound();
    let mut out = Output::default();
    out.checks.push(Check::new(
        "defect_within_bound",
        defects.max <= bound + 3e-8,
        format!("max |defect| {} vs πC {bound}", defects.max),
    ));
    out.checks.push(Check::new(
        "base_point_shift_within_bound",
        max_shift <= 2.0 * bound + 1e-8,
        format!("max shift {max_shift} vs 2πC {}", 2.0 * bound),
    ));
    let worst_linear = p
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.value - (i + 1) as f64).abs())
        .fold(0.0, f64::max);
    if p.label == "T" {
        out.checks.push(Check::new(
            "r_equals_n",
            worst_linear <= 1e-6,
            format!("max |r(T^n) − n| = {worst_linear:e}"),
        ));
    }
    flagged_warnings(&mut out, est.truncation_warnings);
    let mut doc = to_value(&est);
    doc["base_point_shift"] = json!({"word": "TTSTtS", "values": shifts, "bound": 2.0 * bound});
    doc["form"] = json!({"kind": "parabolic", "y0": y0, "y1": y1});
    out.documents.push(("qm".into(), doc));
    out.tables.push(r_table(
        &p.values.iter().enumerate().map(|(i, v)| (p.label.clone(), i as u32 + 1, *v)).collect::<Vec<_>>(),
    ));
    Ok(out)
}

pub const HYPERBOLIC_KEYS: &[&str] = &["generators", "element", "word", "conjugator", "word-cap", "n-max", "pairs"];

pub fn hyperbolic(cfg: &RunConfig) -> CliResult<Output> {
    let gens = parse_generators(cfg.str_param("generators", "3,8,1,3;2,1.5,2,2"))?;
    let group = Arc::new(FuchsianGroup::new(&gens)?);
    let element = cfg.str_param("element", "A");
    let word = cfg.str_param("word", element);
    let word_cap = cfg.num_param("word-cap", 8usize)?;
    let n = n_max(cfg)?;
    let pairs = cfg.num_param("pairs", 200usize)?;
    let g_elem = group.matrix(&group.parse_word(element)?);
    let form = hyperbolic_form(group.clone(), &g_elem, word_cap)?;
    let tile = geodesic_between(
        UHPoint::from_complex(form.axis_point(-form.sigma, 0.0))?,
        UHPoint::from_complex(form.axis_point(form.sigma, 0.0))?,
    )?;
    let tile_integral = integrate_form(&form, &tile, 1e-10)?.value;
    let base = form.base;
    let summary = json!({
        "kind": "hyperbolic",
        "element": element,
        "translation_length": form.translation_length,
        "sigma": form.sigma,
        "t_max": form.t_max,
        "tile_integral": tile_integral,
    });
    let qm = QuasiMorphism::new(BoundedOneForm::from(form), base, DEFAULT_TOL)?;
    let w = group.parse_word(word)?;
    let p = Powers {
        label: group.format_word(&w),
        values: qm.powers(&w, 2 * n)?,
    };
    let words: Vec<Word> = group.enumerate(word_cap).into_iter().map(|(w, _)| w).collect();
    let defects = qm.sample_defects(&words, pairs, cfg.seed_or(0))?;
    let est = estimate(&qm, &p, n as usize, word_cap, defects.max, defects.flagged)?;
    let squares: Vec<f64> = (1..=n as usize).map(|k| p.values[2 * k - 1].value).collect();
    let r2 = r_infinity(&squares, qm.defect_bound())?;
    let r1 = est.r_infinity.estimate;
    let bound = qm.defect_bound();

    let mut out = Output::default();
    out.checks.push(Check::new(
        "defect_within_bound",
        defects.max <= bound + 3e-8,
        format!("max |defect| {} vs πC {bound}", defects.max),
    ));
    // A symmetric element has r_inf near 0, where only the defect-based
    // resolution 2πC/n_max is meaningful.
    let floor = if cfg.param("conjugator").is_some() { 2.0 * bound / n as f64 } else { 0.0 };
    out.checks.push(Check::new(
        "homogeneity",
        (r2.estimate - 2.0 * r1).abs() <= (0.02 * (2.0 * r1).abs()).max(floor),
        format!("r_inf(g²) = {}, 2·r_inf(g) = {}", r2.estimate, 2.0 * r1),
    ));
    let mut doc = to_value(&est);
    doc["form"] = summary;
    doc["r_infinity_square"] = to_value(&r2);
    if let Some(a) = cfg.param("conjugator") {
        let am = group.matrix(&group.parse_word(a)?);
        let gm = group.matrix(&w);
        let err = am.mul(&gm).mul(&am.inverse()).projective_rel_err(&gm.inverse());
        if err > 1e-9 {
            return Err(CliError::Config(format!(
                "conjugator {a} does not invert {word}: relative error {err:e}"
            )));
        }
        let limit = 2.0 * bound / n as f64;
        out.checks.push(Check::new(
            "symmetric_vanishes",
            r1.abs() <= limit,
            format!("|r_inf| = {} vs 2πC/n_max = {limit}", r1.abs()),
        ));
        doc["conjugator"] = json!({"word": a, "relative_error": err});
    } else {
        out.checks.push(Check::new(
            "matches_tile_integral",
            (r1 - tile_integral).abs() <= 0.02 * tile_integral.abs(),
            format!("r_inf = {r1}, tile integral = {tile_integral}"),
        ));
    }
    flagged_warnings(&mut out, est.truncation_warnings + p.values.iter().skip(n as usize).filter(|v| v.flagged).count());
    out.documents.push(("qm".into(), doc));
    out.tables.push(r_table(
        &p.values.iter().enumerate().map(|(i, v)| (p.label.clone(), i as u32 + 1, *v)).collect::<Vec<_>>(),
    ));
    Ok(out)
}
