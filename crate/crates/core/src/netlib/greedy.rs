//! Orthogonal matching pursuit over a map family.
//!
//! Each step scores a candidate pool by how much of the current residual
//! each column explains after projecting out the columns already chosen,
//! adds the best one and refits every coefficient by least squares.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dictionary::{sample_distinct, Dictionary};
use super::fit::{lp_error, residual_report, Exponent, FitReport};
use super::network::{Evaluator, GroupNetwork};
use crate::error::{invalid, Result};
use crate::groups::Domain;
use crate::homs::{FamilySpec, GroupMap};
use crate::linalg::{lstsq_min_norm, numerical_rank, DEFAULT_RANK_TOL};
use crate::scalar::Scalar;

/// Whether each term gets its own map or all terms share the first choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapMode {
    #[default]
    PerTerm,
    Shared,
}

#[derive(Clone, Debug)]
pub struct GreedyConfig {
    pub max_terms: usize,
    /// Candidates per step; the whole family when it is at most this large.
    pub pool_size: usize,
    pub mode: MapMode,
    pub tol: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig { max_terms: 16, pool_size: 256, mode: MapMode::PerTerm, tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Clone, Debug)]
pub struct GreedyResult<T: Scalar> {
    pub network: GroupNetwork<T>,
    /// Weighted `L^2` residual before the first step and after each step.
    pub residuals: Vec<f64>,
    /// True when a step could not reduce the residual.
    pub stalled: bool,
    pub report: FitReport,
}

pub fn greedy_select<T: Scalar, R: Rng + ?Sized>(
    domain: &Domain,
    family: &FamilySpec,
    activation: &Activation,
    target: &[T],
    config: &GreedyConfig,
    rng: &mut R,
) -> Result<GreedyResult<T>> {
    let space = family.target_space(domain)?;
    let evaluator = Evaluator::new(activation, &space)?;
    let points = domain.points();
    let d = evaluator.components();
    let rows = points.len() * d;
    if target.len() != rows {
        return invalid(format!("target has {} values, expected {rows}", target.len()));
    }
    let sqrt_w: Vec<f64> = domain.weights().iter().map(|w| w.sqrt()).collect();
    let weigh = |v: &[T]| DVector::from_fn(rows, |r, _| v[r] * T::from_re(sqrt_w[r / d]));
    let b = weigh(target);
    let whole_family = family.enumerate_up_to(domain, config.pool_size)?;

    let mut chosen: Vec<GroupMap> = Vec::new();
    let mut raw_columns: Vec<Vec<T>> = Vec::new();
    let mut weighted: Vec<DVector<T>> = Vec::new();
    // Orthonormal basis of the weighted columns chosen so far.
    let mut basis: Vec<DVector<T>> = Vec::new();
    let mut residual = b.clone();
    let mut residuals = vec![residual.norm()];
    let mut stalled = false;
    let floor = 1e-12 * b.norm().max(f64::MIN_POSITIVE);

    while chosen.len() < config.max_terms && residual.norm() > floor {
        let pool: Vec<GroupMap> = match (config.mode, chosen.first()) {
            (MapMode::Shared, Some(first)) => vec![first.clone()],
            _ => match &whole_family {
                Some(all) => all.clone(),
                None => sample_distinct(domain, family, config.pool_size, rng)?,
            },
        };
        let mut best: Option<(f64, GroupMap, Vec<T>, DVector<T>)> = None;
        for m in pool {
            let raw = evaluator.column::<T>(&points, &m)?;
            let col = weigh(&raw);
            let mut perp = col.clone();
            for q in &basis {
                let c = q.dotc(&perp);
                perp -= q * c;
            }
            let pn = perp.norm();
            if pn <= 1e-10 * col.norm().max(f64::MIN_POSITIVE) {
                continue;
            }
            let score = perp.dotc(&residual).modulus() / pn;
            if best.as_ref().is_none_or(|(s, ..)| score > *s) {
                best = Some((score, m, raw, col));
            }
        }
        let gain_floor = 1e-12 * residual.norm();
        let (map, raw, col) = match best {
            Some((score, m, raw, col)) if score > gain_floor => (m, raw, col),
            _ if config.mode == MapMode::Shared && !chosen.is_empty() => {
                // Repeating the shared map never enlarges the span.
                let raw = raw_columns[0].clone();
                let col = weighted[0].clone();
                (chosen[0].clone(), raw, col)
            }
            _ => {
                stalled = true;
                break;
            }
        };
        let mut perp = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&perp);
                perp -= q * c;
            }
        }
        if perp.norm() > 1e-10 * col.norm().max(f64::MIN_POSITIVE) {
            basis.push(perp.unscale(perp.norm()));
        } else {
            stalled = true;
        }
        chosen.push(map);
        raw_columns.push(raw);
        weighted.push(col);
        let a = DMatrix::from_columns(&weighted);
        let x = lstsq_min_norm(&a, &b, config.tol);
        residual = &b - &a * &x;
        residuals.push(residual.norm());
    }

    let dict = Dictionary::from_maps(domain, family, activation, chosen, false)?;
    let a = DMatrix::from_columns(&weighted);
    let alpha: Vec<T> = if weighted.is_empty() {
        Vec::new()
    } else {
        lstsq_min_norm(&a, &b, config.tol).iter().copied().collect()
    };
    let network = dict.network(&alpha)?;
    let fitted = network.eval_all()?;
    let rank = if weighted.is_empty() { 0 } else { numerical_rank(&a, config.tol) };
    let report = residual_report(domain, &fitted, target, Exponent::default(), rank, config.tol)?;
    debug_assert!((lp_error(domain, &fitted, target, 2.0)? - report.l2).abs() < 1e-12);
    Ok(GreedyResult { network, residuals, stalled, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::fourier_transform;
    use crate::netlib::{build_dictionary, fit_coefficients};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(g: &str, fam: &str, act: &str, target: &[f64], cfg: &GreedyConfig) -> GreedyResult<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        greedy_select(&g.parse().unwrap(), &fam.parse().unwrap(), &act.parse().unwrap(), target, cfg, &mut rng)
            .unwrap()
    }

    #[test]
    fn target_on_one_column() {
        let target = [0.0, 0.0, 3.0, 0.0, 0.0];
        let r = run("Z5", "translations", "delta0", &target, &GreedyConfig::default());
        assert_eq!(r.network.terms().len(), 1);
        assert!(r.report.l2 < 1e-10);
    }

    #[test]
    fn full_rank_translates_on_z8() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi: Vec<f64> = loop {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = "Z8".parse::<Domain>().unwrap().finite_group().unwrap();
            if fourier_transform(&g, &v).unwrap().support_size(1e-3) == 8 {
                break v;
            }
        };
        let act = format!("table:{}", psi.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        let target: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = GreedyConfig { max_terms: 8, ..Default::default() };
        let r = run("Z8", "translations", &act, &target, &cfg);
        assert!(r.network.terms().len() <= 8);
        assert!(r.report.l2 < 1e-8, "{}", r.report.l2);
        assert!(r.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn shared_map_collapses_to_one_column() {
        let target = [1.0, -0.5, 0.25, 2.0];
        let d: Domain = "Z4".parse().unwrap();
        for max_terms in [1, 3, 6] {
            let cfg = GreedyConfig { max_terms, mode: MapMode::Shared, ..Default::default() };
            let r = run("Z4", "affine-end", "logistic", &target, &cfg);
            let map = r.network.terms()[0].map.clone();
            assert!(r.network.terms().iter().all(|t| t.map == map));
            let fam: FamilySpec = "affine-end".parse().unwrap();
            let one = Dictionary::<f64>::from_maps(&d, &fam, &"logistic".parse().unwrap(), vec![map], false).unwrap();
            let (_, rep) = fit_coefficients(&one, &target, 2.0).unwrap();
            assert!((r.report.l2 - rep.l2).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_never_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in ["Z6", "Z2xZ4", "Z3xZ3"] {
            let d: Domain = g.parse().unwrap();
            let target: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cfg = GreedyConfig { max_terms: 12, pool_size: 16, ..Default::default() };
            let r = run(g, "affine-end", "logistic:scale=3.0", &target, &cfg);
            assert!(r.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", r.residuals);
        }
    }

    #[test]
    fn stall_is_reported() {
        let target = [1.0, 0.0];
        let r = run("Z2", "aut", "table:1,2", &target, &GreedyConfig::default());
        assert!(r.stalled);
        assert_eq!(r.network.terms().len(), 1);
        let full: Dictionary<f64> =
            build_dictionary(&"Z2".parse().unwrap(), &"aut".parse().unwrap(), &"table:1,2".parse().unwrap(), 4, &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap();
        assert_eq!(full.len(), 1);
    }
}
