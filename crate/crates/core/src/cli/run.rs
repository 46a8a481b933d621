use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{CommandKind, ExperimentConfig};
use super::output::{fmt_f64, write_csv, write_json};
use crate::density::{cell_seed, counterexample_search, density_map, ActivationSource, DensityCell};
use crate::error::{Error, Result};
use crate::fourier::{
    convolve, fourier_transform, inverse_fourier, iterated_integrals, max_abs_diff, measure_transform, pushforward,
    verify_double_dual, Character,
};
use crate::groups::{Domain, FiniteAbelianGroup, HaarMode, SignedMeasure};
use crate::homs::{for_each_automorphism, FamilySpec, GroupMap, Homomorphism};
use crate::netlib::{build_dictionary, fit_coefficients_with_tol, Activation};
use crate::scalar::Scalar;

/// A full-rank fit must reach this residual in every reported norm.
pub const FULL_RANK_RESIDUAL: f64 = 1e-8;

const FOURIER_TRIALS: usize = 100;
const ROUND_TRIP_TOL: f64 = 1e-12;
const SPECTRAL_TOL: f64 = 1e-10;
/// Automorphisms checked per group by the pushforward rule.
const AUT_CHECK_LIMIT: usize = 4096;

#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    match config.command {
        CommandKind::Density => run_density(config),
        CommandKind::Approx => run_approx(config),
        CommandKind::FourierCheck => run_fourier(config),
        CommandKind::Enumerate => run_enumerate(config),
        CommandKind::Counterexample => run_counterexample(config),
    }
}

fn cells(config: &ExperimentConfig) -> Vec<DensityCell> {
    let mut out = Vec::new();
    for g in &config.groups {
        for a in &config.activations {
            for f in &config.families {
                out.push(DensityCell { group: g.clone(), family: f.clone(), activation: a.clone() });
            }
        }
    }
    out
}

fn run_density(config: &ExperimentConfig) -> Result<Outcome> {
    let rows = density_map(&cells(config), config.n_terms, config.tol, config.seed);
    let header = [
        "group", "family", "activation", "n_terms", "rank", "ambient", "dense", "lower_bound_flag", "tolerance", "seed",
        "error",
    ];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.family.clone(),
                r.activation.clone(),
                r.n_terms.to_string(),
                r.rank.to_string(),
                r.ambient.to_string(),
                r.dense.to_string(),
                r.lower_bound.to_string(),
                fmt_f64(r.tolerance),
                r.seed.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let files = vec![
        write_csv(&config.out, "density.csv", config, &header, &table)?,
        write_json(&config.out, "density.json", config, &rows)?,
    ];
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let dense = rows.iter().filter(|r| r.dense).count();
    Ok(Outcome {
        passed: failed == 0,
        files,
        summary: format!("density: {} cells, {dense} dense, {failed} failed", rows.len()),
    })
}

#[derive(Clone, Debug, Serialize)]
struct ApproxRow {
    group: String,
    family: String,
    activation: String,
    n_terms: usize,
    exhaustive: bool,
    rank: usize,
    ambient: usize,
    p: String,
    l2: f64,
    lp: f64,
    sup: f64,
    tolerance: f64,
    seed: u64,
    pass: bool,
    error: Option<String>,
}

fn approx_cell<T: Scalar>(
    domain: &Domain,
    family: &FamilySpec,
    activation: &Activation,
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    row: &mut ApproxRow,
) -> Result<()> {
    let dict = build_dictionary::<T, _>(domain, family, activation, config.n_terms, rng)?;
    let target: Vec<T> = (0..dict.ambient())
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if T::IS_COMPLEX { rng.gen_range(-1.0..1.0) } else { 0.0 };
            T::from_complex(Complex64::new(re, im)).expect("real draw for a real field")
        })
        .collect();
    let (_, report) = fit_coefficients_with_tol(&dict, &target, config.p.value(), config.tol)?;
    row.n_terms = dict.len();
    row.exhaustive = dict.is_exhaustive();
    row.rank = report.rank;
    row.ambient = dict.ambient();
    row.l2 = report.l2;
    row.lp = report.lp;
    row.sup = report.sup;
    row.pass = report.rank < dict.ambient() || (report.lp < FULL_RANK_RESIDUAL && report.sup < FULL_RANK_RESIDUAL);
    Ok(())
}

fn run_approx(config: &ExperimentConfig) -> Result<Outcome> {
    let cells = cells(config);
    let rows: Vec<ApproxRow> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let seed = cell_seed(config.seed, i);
            let mut row = ApproxRow {
                group: cell.group.clone(),
                family: cell.family.clone(),
                activation: cell.activation.clone(),
                n_terms: 0,
                exhaustive: false,
                rank: 0,
                ambient: 0,
                p: config.p.to_string(),
                l2: 0.0,
                lp: 0.0,
                sup: 0.0,
                tolerance: config.tol,
                seed,
                pass: false,
                error: None,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = (|| -> Result<()> {
                let domain: Domain = cell.group.parse()?;
                let family: FamilySpec = cell.family.parse()?;
                let activation: Activation = cell.activation.parse()?;
                if activation.is_complex() {
                    approx_cell::<Complex64>(&domain, &family, &activation, config, &mut rng, &mut row)
                } else {
                    approx_cell::<f64>(&domain, &family, &activation, config, &mut rng, &mut row)
                }
            })();
            if let Err(e) = result {
                row.pass = false;
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();
    let header = [
        "group", "family", "activation", "n_terms", "exhaustive", "rank", "ambient", "p", "l2", "lp", "sup",
        "tolerance", "seed", "pass", "error",
    ];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.family.clone(),
                r.activation.clone(),
                r.n_terms.to_string(),
                r.exhaustive.to_string(),
                r.rank.to_string(),
                r.ambient.to_string(),
                r.p.clone(),
                fmt_f64(r.l2),
                fmt_f64(r.lp),
                fmt_f64(r.sup),
                fmt_f64(r.tolerance),
                r.seed.to_string(),
                r.pass.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let files = vec![
        write_csv(&config.out, "approx.csv", config, &header, &table)?,
        write_json(&config.out, "approx.json", config, &rows)?,
    ];
    let failed = rows.iter().filter(|r| !r.pass).count();
    Ok(Outcome { passed: failed == 0, files, summary: format!("approx: {} cells, {failed} failed", rows.len()) })
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub group: String,
    pub check: String,
    pub trials: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn random_table(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn fourier_checks(group: &FiniteAbelianGroup, budget: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group.order() as usize;
    let name = group.to_string();
    let row = |check: &str, trials: usize, max_error: f64, tolerance: f64| CheckRow {
        group: name.clone(),
        check: check.into(),
        trials,
        max_error,
        tolerance,
        pass: max_error < tolerance,
    };
    let modes = [group.clone().with_haar(HaarMode::Counting), group.clone().with_haar(HaarMode::Probability)];
    let mut rows = Vec::new();

    let mut round_trip = 0.0f64;
    let mut conv = 0.0f64;
    let mut plancherel = 0.0f64;
    for k in 0..FOURIER_TRIALS {
        let g = &modes[k % 2];
        let f = random_table(&mut rng, n);
        let h = random_table(&mut rng, n);
        let ff = fourier_transform(g, &f)?;
        round_trip = round_trip.max(max_abs_diff(&f, &inverse_fourier(&ff)));
        let lhs = fourier_transform(g, &convolve(g, &f, &h)?)?;
        let rhs = ff.pointwise_mul(&fourier_transform(g, &h)?)?;
        conv = conv.max(lhs.max_abs_diff(&rhs));
        let p = &modes[1];
        let energy: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * p.haar_weight();
        let dual: f64 = fourier_transform(p, &f)?.values().iter().map(|v| v.norm_sqr()).sum();
        plancherel = plancherel.max((energy - dual).abs() / energy);
    }
    rows.push(row("round_trip", FOURIER_TRIALS, round_trip, ROUND_TRIP_TOL));
    rows.push(row("convolution", FOURIER_TRIALS, conv, SPECTRAL_TOL));
    rows.push(row("plancherel", FOURIER_TRIALS, plancherel, SPECTRAL_TOL));

    let dd = verify_double_dual(group, budget)?;
    rows.push(row("double_dual", 1, if dd { 0.0 } else { 1.0 }, 0.5));

    let domain = Domain::Finite(group.clone());
    let sigma = SignedMeasure::new(domain, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let hat = measure_transform(&sigma)?;
    let mut push_err = 0.0f64;
    let mut fubini_err = 0.0f64;
    let mut checked = 0usize;
    let psi: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let s: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let mut failure = None;
    for_each_automorphism(group, |m| {
        let a = Homomorphism::new(group.clone(), group.clone(), &chunk(m, group.rank())).expect("enumerated map");
        let step = (|| -> Result<()> {
            let pushed = measure_transform(&pushforward(&sigma, &GroupMap::from(a.clone()))?)?;
            let dual = a.dual();
            for c in group.elements() {
                let expected = hat.at(&Character::new(group, dual.apply(&c)?.coords())?)?;
                let got = pushed.at(&Character::new(group, c.coords())?)?;
                push_err = push_err.max((expected - got).norm());
            }
            let r = iterated_integrals(&a, &psi, &w, &s)?;
            let gap = (r.x_then_y - r.y_then_x).abs() as f64;
            let over = if r.x_then_y.abs() > r.bound { 1.0 } else { 0.0 };
            fubini_err = fubini_err.max(gap + over);
            Ok(())
        })();
        if let Err(e) = step {
            failure = Some(e);
            return std::ops::ControlFlow::Break(());
        }
        checked += 1;
        if checked == AUT_CHECK_LIMIT {
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    rows.push(row("pushforward_dual", checked, push_err, SPECTRAL_TOL));
    rows.push(row("iterated_sums", checked, fubini_err, 0.5));
    Ok(rows)
}

fn chunk(flat: &[i64], width: usize) -> Vec<Vec<i64>> {
    if width == 0 {
        return Vec::new();
    }
    flat.chunks(width).map(<[i64]>::to_vec).collect()
}

fn run_fourier(config: &ExperimentConfig) -> Result<Outcome> {
    let results: Vec<Result<Vec<CheckRow>>> = config
        .groups
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let group = match g.parse::<Domain>()? {
                Domain::Finite(group) => group,
                other => other.finite_group().ok_or_else(|| {
                    Error::InvalidConfiguration(format!("fourier-check needs a finite group or torus grid, got {other}"))
                })?,
            };
            fourier_checks(&group, config.budget, cell_seed(config.seed, i))
        })
        .collect();
    let mut rows = Vec::new();
    for (g, r) in config.groups.iter().zip(results) {
        match r {
            Ok(v) => rows.extend(v),
            Err(e) => rows.push(CheckRow {
                group: g.clone(),
                check: format!("error: {e}"),
                trials: 0,
                max_error: f64::INFINITY,
                tolerance: 0.0,
                pass: false,
            }),
        }
    }
    let header = ["group", "check", "trials", "max_error", "tolerance", "pass"];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.check.clone(),
                r.trials.to_string(),
                fmt_f64(r.max_error),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
            ]
        })
        .collect();
    let files = vec![write_csv(&config.out, "fourier_check.csv", config, &header, &table)?];
    let failed = rows.iter().filter(|r| !r.pass).count();
    Ok(Outcome {
        passed: failed == 0,
        files,
        summary: format!("fourier-check: {} groups, {} checks, {failed} failed", config.groups.len(), rows.len()),
    })
}

#[derive(Serialize)]
struct EnumerationRow {
    group: String,
    family: String,
    count: Option<usize>,
    maps: Vec<GroupMap>,
    error: Option<String>,
}

fn run_enumerate(config: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    for g in &config.groups {
        for f in &config.families {
            let result = (|| -> Result<Vec<GroupMap>> {
                let domain: Domain = g.parse()?;
                let family: FamilySpec = f.parse()?;
                family.enumerate(&domain, config.budget)
            })();
            rows.push(match result {
                Ok(maps) => EnumerationRow { group: g.clone(), family: f.clone(), count: Some(maps.len()), maps, error: None },
                Err(e) => EnumerationRow {
                    group: g.clone(),
                    family: f.clone(),
                    count: None,
                    maps: Vec::new(),
                    error: Some(e.to_string()),
                },
            });
        }
    }
    let files = vec![write_json(&config.out, "enumerate.json", config, &rows)?];
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let total: usize = rows.iter().filter_map(|r| r.count).sum();
    Ok(Outcome {
        passed: failed == 0,
        files,
        summary: format!("enumerate: {} cells, {total} maps, {failed} failed", rows.len()),
    })
}

fn run_counterexample(config: &ExperimentConfig) -> Result<Outcome> {
    let families = config.families.iter().map(|f| f.parse()).collect::<Result<Vec<FamilySpec>>>()?;
    let source = if config.activations.is_empty() {
        ActivationSource::RandomTables
    } else {
        ActivationSource::Fixed(config.activations.iter().map(|a| a.parse()).collect::<Result<Vec<_>>>()?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let found =
        counterexample_search(config.max_order, &families, &source, config.trials, config.budget, config.tol, &mut rng)?;
    let header = ["group", "family", "activation", "max_pairing", "witness"];
    let table: Vec<Vec<String>> = found
        .iter()
        .map(|c| {
            vec![
                c.group.clone(),
                c.family.clone(),
                c.activation.clone(),
                fmt_f64(c.max_pairing),
                c.witness.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect();
    let files = vec![
        write_csv(&config.out, "counterexamples.csv", config, &header, &table)?,
        write_json(&config.out, "counterexamples.json", config, &found)?,
    ];
    Ok(Outcome { passed: true, files, summary: format!("counterexample: {} witnesses", found.len()) })
}
