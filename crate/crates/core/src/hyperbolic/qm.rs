use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::form::{BoundedOneForm, OneForm};
use super::group::{FuchsianGroup, Word};
use super::integrate::{integrate_word, WalkIntegral};
use super::point::UHPoint;
use crate::error::{invalid, KickedError, Result};
use crate::numeric::SeedStream;

/// `r_x(g) = ∫_{ℓ(x, gx)} α` for a group-invariant bounded form `α`.
#[derive(Debug, Clone)]
pub struct QuasiMorphism {
    form: Arc<BoundedOneForm>,
    pub base: UHPoint,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RValue {
    pub value: f64,
    pub error: f64,
    pub flagged: bool,
}

impl From<WalkIntegral> for RValue {
    fn from(w: WalkIntegral) -> Self {
        RValue {
            value: w.quadrature.value,
            error: w.quadrature.error,
            flagged: w.flagged(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DefectSample {
    pub g: usize,
    pub h: usize,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub samples: Vec<DefectSample>,
    pub max: f64,
    /// `πC`.
    pub bound: f64,
    pub flagged: usize,
}

impl QuasiMorphism {
    pub fn new(form: impl Into<BoundedOneForm>, base: UHPoint, tol: f64) -> Result<QuasiMorphism> {
        let form = form.into();
        if !(tol > 0.0) {
            return invalid("quadrature tolerance must be positive");
        }
        if form.group().is_none() {
            return invalid("quasi-morphisms need a periodized form");
        }
        Ok(QuasiMorphism {
            form: Arc::new(form),
            base,
            tol,
        })
    }

    pub fn form(&self) -> &BoundedOneForm {
        &self.form
    }

    pub fn group(&self) -> &FuchsianGroup {
        self.form.group().expect("checked at construction")
    }

    /// `π·C`, the defect bound.
    pub fn defect_bound(&self) -> f64 {
        std::f64::consts::PI * self.form.bound()
    }

    pub fn r(&self, w: &Word) -> Result<RValue> {
        self.r_at(self.base, w)
    }

    pub fn r_at(&self, x: UHPoint, w: &Word) -> Result<RValue> {
        integrate_word(self.form.as_ref(), self.group(), x, w, self.tol).map(RValue::from)
    }

    /// `r(wⁿ)` for `n = 1..=n_max`.
    pub fn powers(&self, w: &Word, n_max: u32) -> Result<Vec<RValue>> {
        (1..=n_max)
            .into_par_iter()
            .map(|n| self.r(&self.group().power(w, n)))
            .collect()
    }

    /// `r(g) + r(h) − r(gh)`.
    pub fn defect(&self, g: &Word, h: &Word) -> Result<(f64, bool)> {
        let gh = self.group().concat(g, h);
        let (a, b, c) = (self.r(g)?, self.r(h)?, self.r(&gh)?);
        Ok((a.value + b.value - c.value, a.flagged || b.flagged || c.flagged))
    }

    /// Defects on `pairs` random pairs drawn from `words`.
    pub fn sample_defects(&self, words: &[Word], pairs: usize, seed: u64) -> Result<DefectReport> {
        if words.is_empty() {
            return invalid("no words to sample from");
        }
        let rng = SeedStream::new(seed);
        let results: Vec<(DefectSample, bool)> = (0..pairs as u64)
            .into_par_iter()
            .map(|k| {
                let (g, h) = (rng.below(0, k, words.len()), rng.below(1, k, words.len()));
                let (defect, flag) = self.defect(&words[g], &words[h])?;
                Ok((DefectSample { g, h, defect }, flag))
            })
            .collect::<Result<_>>()?;
        Ok(DefectReport {
            max: results.iter().map(|(s, _)| s.defect.abs()).fold(0.0, f64::max),
            flagged: results.iter().filter(|(_, f)| *f).count(),
            samples: results.into_iter().map(|(s, _)| s).collect(),
            bound: self.defect_bound(),
        })
    }

    /// `|r_x(g) − r_y(g)|`, bounded by `2πC`.
    pub fn base_point_shift(&self, w: &Word, x: UHPoint, y: UHPoint) -> Result<f64> {
        Ok((self.r_at(x, w)?.value - self.r_at(y, w)?.value).abs())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RInfinity {
    pub estimate: f64,
    pub error_bar: f64,
    pub n_max: usize,
}

/// Homogenization from `values[n − 1] = r(gⁿ)`, `n = 1..=n_max`.
///
/// Least-squares slope over the top half of the range. If every value deviates
/// from `n·r_∞` by at most `defect`, the slope is off by at most
/// `defect·Σ|n − n̄| / Σ(n − n̄)²`, which is the reported error bar.
pub fn r_infinity(values: &[f64], defect: f64) -> Result<RInfinity> {
    let n_max = values.len();
    if n_max < 4 {
        return invalid(format!("r_infinity needs n_max ≥ 4, got {n_max}"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KickedError::NumericalGuard("non-finite r value".into()));
    }
    let lo = n_max.div_ceil(2);
    let pts: Vec<(f64, f64)> = (lo..=n_max).map(|n| (n as f64, values[n - 1])).collect();
    let m = pts.len() as f64;
    let nbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let rbar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - nbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - nbar) * (p.1 - rbar)).sum();
    let sabs: f64 = pts.iter().map(|p| (p.0 - nbar).abs()).sum();
    Ok(RInfinity {
        estimate: sxy / sxx,
        error_bar: defect.abs() * sabs / sxx,
        n_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RRecord {
    pub word: String,
    pub n: u32,
    pub value: f64,
}

/// Serializable summary of a quasi-morphism computation.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiMorphismEstimate {
    pub generators: Vec<(char, [f64; 4])>,
    #[serde(rename = "W")]
    pub word_cap: usize,
    #[serde(rename = "C")]
    pub bound: f64,
    pub r_values: Vec<RRecord>,
    pub defect_max: f64,
    pub defect_bound: f64,
    pub r_infinity: RInfinity,
    pub truncation_warnings: usize,
}

impl QuasiMorphism {
    /// Report for the powers of `w` together with sampled defects.
    pub fn estimate(&self, w: &Word, n_max: u32, word_cap: usize, defects: &DefectReport) -> Result<QuasiMorphismEstimate> {
        let vals = self.powers(w, n_max)?;
        let label = self.group().format_word(w);
        let rinf = r_infinity(&vals.iter().map(|v| v.value).collect::<Vec<_>>(), self.defect_bound())?;
        Ok(QuasiMorphismEstimate {
            generators: self
                .group()
                .generators()
                .into_iter()
                .map(|(l, m)| (l, m.entries()))
                .collect(),
            word_cap,
            bound: self.form.bound(),
            r_values: vals
                .iter()
                .enumerate()
                .map(|(i, v)| RRecord {
                    word: label.clone(),
                    n: i as u32 + 1,
                    value: v.value,
                })
                .collect(),
            defect_max: defects.max,
            defect_bound: defects.bound,
            r_infinity: rinf,
            truncation_warnings: vals.iter().filter(|v| v.flagged).count() + defects.flagged,
        })
    }
}
