use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dictionary::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::groups::Domain;
use crate::linalg::{lstsq_min_norm, numerical_rank, DEFAULT_RANK_TOL};
use crate::scalar::Scalar;

/// An `L^p` exponent, `p >= 1` or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return invalid(format!("L^p exponent must be >= 1 or infinity, got {p}"));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl Default for Exponent {
    fn default() -> Self {
        Exponent(2.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent::INFINITY),
            t => Exponent::new(t.parse::<f64>().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Number(p) => Exponent::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub l2: f64,
    pub lp: f64,
    pub sup: f64,
    pub p: Exponent,
    pub rank: usize,
    pub tolerance: f64,
}

/// Pointwise distances `|f(x) - g(x)|`, Euclidean across components.
fn pointwise<T: Scalar>(n: usize, f: &[T], g: &[T]) -> Result<Vec<f64>> {
    if f.len() != g.len() || n == 0 || !f.len().is_multiple_of(n) {
        return invalid(format!("tables of lengths {} and {} on {n} points", f.len(), g.len()));
    }
    let d = f.len() / n;
    Ok((0..n)
        .map(|x| {
            (0..d)
                .map(|c| (f[x * d + c] - g[x * d + c]).abs_val().powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// `(sum_x |f - g|^p w(x))^(1/p)` under the domain's Haar weights; the
/// maximum when `p` is infinite.
pub fn lp_error<T: Scalar>(domain: &Domain, f: &[T], g: &[T], p: f64) -> Result<f64> {
    let p = Exponent::new(p)?;
    let dist = pointwise(domain.len(), f, g)?;
    if p.is_infinite() {
        return Ok(dist.into_iter().fold(0.0, f64::max));
    }
    let w = domain.weights();
    let sum: f64 = dist.iter().zip(&w).map(|(d, w)| d.powf(p.value()) * w).sum();
    Ok(sum.powf(1.0 / p.value()))
}

/// Largest pointwise distance over the sampled points.
pub fn sup_error<T: Scalar>(f: &[T], g: &[T]) -> f64 {
    f.iter().zip(g).map(|(a, b)| (*a - *b).abs_val()).fold(0.0, f64::max)
}

/// Coefficients minimizing the Haar-weighted `L^2` residual, the
/// minimum-norm solution when the dictionary is rank deficient.
pub fn fit_coefficients<T: Scalar>(dict: &Dictionary<T>, target: &[T], p: f64) -> Result<(Vec<T>, FitReport)> {
    fit_coefficients_with_tol(dict, target, p, DEFAULT_RANK_TOL)
}

pub fn fit_coefficients_with_tol<T: Scalar>(
    dict: &Dictionary<T>,
    target: &[T],
    p: f64,
    tol: f64,
) -> Result<(Vec<T>, FitReport)> {
    let exponent = Exponent::new(p)?;
    let rows = dict.ambient();
    if target.len() != rows {
        return invalid(format!("target has {} values, dictionary has {rows} rows", target.len()));
    }
    let d = dict.components();
    let sqrt_w: Vec<f64> = dict.domain().weights().iter().map(|w| w.sqrt()).collect();
    let scale = |r: usize| T::from_re(sqrt_w[r / d]);
    let a = DMatrix::from_fn(rows, dict.len(), |r, c| dict.columns()[(r, c)] * scale(r));
    let b = DVector::from_fn(rows, |r, _| target[r] * scale(r));
    let x = lstsq_min_norm(&a, &b, tol);
    let coeffs: Vec<T> = x.iter().copied().collect();
    let fitted: Vec<T> = (dict.columns() * &x).iter().copied().collect();
    let report = residual_report(dict.domain(), &fitted, target, exponent, numerical_rank(&a, tol), tol)?;
    Ok((coeffs, report))
}

pub(crate) fn residual_report<T: Scalar>(
    domain: &Domain,
    fitted: &[T],
    target: &[T],
    p: Exponent,
    rank: usize,
    tol: f64,
) -> Result<FitReport> {
    Ok(FitReport {
        l2: lp_error(domain, fitted, target, 2.0)?,
        lp: lp_error(domain, fitted, target, p.value())?,
        sup: lp_error(domain, fitted, target, f64::INFINITY)?,
        p,
        rank,
        tolerance: tol,
    })
}
