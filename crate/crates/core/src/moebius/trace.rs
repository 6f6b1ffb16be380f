use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::mat2::Mat2;
use crate::error::{invalid, KickedError, Result};

/// Largest kick count accepted in exact mode.
pub const EXACT_DEGREE_LIMIT: usize = 64;

/// A kick with exact rational entries and determinant one.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalKick {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalKick {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Result<Self> {
        if &a * &d - &b * &c != BigRational::one() {
            return invalid("rational kick must have determinant exactly 1");
        }
        Ok(Self { a, b, c, d })
    }

    /// `(a, b; c, (1 + bc)/a)` from integer fractions, `a ≠ 0`.
    pub fn from_abc(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Result<Self> {
        let (a, b, c) = (ratio(a.0, a.1), ratio(b.0, b.1), ratio(c.0, c.1));
        if a.is_zero() {
            return invalid("a must be nonzero");
        }
        let d = (BigRational::one() + &b * &c) / &a;
        Self::new(a, b, c, d)
    }

    pub fn to_mat2(&self) -> Mat2 {
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        Mat2::unchecked(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }
}

/// Polynomial in `τ`, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq)]
pub enum TauPolynomial {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

fn trim_exact(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn trim_float(mut v: Vec<f64>) -> Vec<f64> {
    while v.len() > 1 && v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

impl TauPolynomial {
    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        match self {
            TauPolynomial::Exact(c) => c.len() - 1,
            TauPolynomial::Float(c) => c.len() - 1,
        }
    }

    pub fn leading_exact(&self) -> Option<&BigRational> {
        match self {
            TauPolynomial::Exact(c) => c.last(),
            TauPolynomial::Float(_) => None,
        }
    }

    pub fn leading(&self) -> f64 {
        match self {
            TauPolynomial::Exact(c) => c.last().and_then(ToPrimitive::to_f64).unwrap_or(f64::NAN),
            TauPolynomial::Float(c) => *c.last().unwrap_or(&0.0),
        }
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            TauPolynomial::Exact(c) => {
                let x = BigRational::from_float(tau).unwrap_or_default();
                self.eval_exact(&x).and_then(|v| v.to_f64()).unwrap_or_else(|| {
                    c.iter().rev().fold(0.0, |acc, ci| acc * tau + ci.to_f64().unwrap_or(f64::NAN))
                })
            }
            TauPolynomial::Float(c) => c.iter().rev().fold(0.0, |acc, ci| acc * tau + ci),
        }
    }

    /// Exact Horner evaluation at a rational point.
    pub fn eval_exact(&self, x: &BigRational) -> Option<BigRational> {
        match self {
            TauPolynomial::Exact(c) => Some(c.iter().rev().fold(BigRational::zero(), |acc, ci| acc * x + ci)),
            TauPolynomial::Float(_) => None,
        }
    }

    /// Coefficients as strings (`"p/q"` for exact, shortest round-trip for float).
    pub fn coefficient_strings(&self) -> Vec<String> {
        match self {
            TauPolynomial::Exact(c) => c.iter().map(ToString::to_string).collect(),
            TauPolynomial::Float(c) => c.iter().map(|x| format!("{x:?}")).collect(),
        }
    }
}

type PolyE = Vec<BigRational>;

fn padd(x: &PolyE, y: &PolyE) -> PolyE {
    let n = x.len().max(y.len());
    (0..n)
        .map(|i| {
            let a = x.get(i).cloned().unwrap_or_default();
            let b = y.get(i).cloned().unwrap_or_default();
            a + b
        })
        .collect()
}

fn pscale(x: &PolyE, s: &BigRational) -> PolyE {
    x.iter().map(|c| c * s).collect()
}

fn pshift(x: &PolyE) -> PolyE {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(BigRational::zero());
    v.extend(x.iter().cloned());
    v
}

/// `p_k(τ) = tr f^{(k)}(τ)` in exact rational arithmetic.
pub fn trace_polynomial(kicks: &[RationalKick]) -> Result<TauPolynomial> {
    if kicks.len() > EXACT_DEGREE_LIMIT {
        return Err(KickedError::NumericalGuard(format!(
            "exact trace polynomials are limited to k ≤ {EXACT_DEGREE_LIMIT} kicks (got {})",
            kicks.len()
        )));
    }
    let one = vec![BigRational::one()];
    let zero = vec![BigRational::zero()];
    // entries of the polynomial matrix, row major
    let (mut m11, mut m12, mut m21, mut m22) = (one.clone(), zero.clone(), zero.clone(), one);
    for k in kicks {
        // h^τ M = (M11 + τ M21, M12 + τ M22; M21, M22)
        let t11 = padd(&m11, &pshift(&m21));
        let t12 = padd(&m12, &pshift(&m22));
        let (t21, t22) = (m21, m22);
        m11 = padd(&pscale(&t11, &k.a), &pscale(&t21, &k.b));
        m12 = padd(&pscale(&t12, &k.a), &pscale(&t22, &k.b));
        m21 = padd(&pscale(&t11, &k.c), &pscale(&t21, &k.d));
        m22 = padd(&pscale(&t12, &k.c), &pscale(&t22, &k.d));
    }
    Ok(TauPolynomial::Exact(trim_exact(padd(&m11, &m22))))
}

/// Floating-point coefficients of the trace polynomial for arbitrary kicks.
pub fn trace_polynomial_float(kicks: &[Mat2]) -> TauPolynomial {
    let add = |x: &[f64], y: &[f64]| -> Vec<f64> {
        (0..x.len().max(y.len()))
            .map(|i| x.get(i).copied().unwrap_or(0.0) + y.get(i).copied().unwrap_or(0.0))
            .collect()
    };
    let scale = |x: &[f64], s: f64| -> Vec<f64> { x.iter().map(|c| c * s).collect() };
    let shift = |x: &[f64]| -> Vec<f64> { std::iter::once(0.0).chain(x.iter().copied()).collect() };
    let (mut m11, mut m12, mut m21, mut m22) = (vec![1.0], vec![0.0], vec![0.0], vec![1.0]);
    for k in kicks {
        let t11 = add(&m11, &shift(&m21));
        let t12 = add(&m12, &shift(&m22));
        let (t21, t22) = (m21, m22);
        m11 = add(&scale(&t11, k.a), &scale(&t21, k.b));
        m12 = add(&scale(&t12, k.a), &scale(&t22, k.b));
        m21 = add(&scale(&t11, k.c), &scale(&t21, k.d));
        m22 = add(&scale(&t12, k.c), &scale(&t22, k.d));
    }
    TauPolynomial::Float(trim_float(add(&m11, &m22)))
}

/// `c_1 ⋯ c_k` exactly.
pub fn product_of_c(kicks: &[RationalKick]) -> BigRational {
    kicks.iter().fold(BigRational::one(), |acc, k| acc * &k.c)
}

/// JSON-ready summary of a trace polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePolynomialReport {
    pub k: usize,
    pub coeffs: Vec<String>,
    pub leading: String,
    pub prod_c: String,
}

pub fn trace_report(kicks: &[RationalKick]) -> Result<TracePolynomialReport> {
    let p = trace_polynomial(kicks)?;
    Ok(TracePolynomialReport {
        k: kicks.len(),
        coeffs: p.coefficient_strings(),
        leading: p.leading_exact().map(ToString::to_string).unwrap_or_default(),
        prod_c: product_of_c(kicks).to_string(),
    })
}

/// `|p(τ)|` exactly at the rational value of `τ`, against `|tr f^{(k)}(τ)|`,
/// relative to `‖f^{(k)}(τ)‖`.
pub fn trace_agreement(poly: &TauPolynomial, evolved: &Mat2, tau: f64) -> f64 {
    let exact = match poly {
        TauPolynomial::Exact(_) => BigRational::from_float(tau)
            .and_then(|x| poly.eval_exact(&x))
            .map(|v| v.abs().to_f64().unwrap_or(f64::NAN))
            .unwrap_or(f64::NAN),
        TauPolynomial::Float(_) => poly.eval(tau).abs(),
    };
    (exact - evolved.abs_trace()).abs() / evolved.norm()
}
