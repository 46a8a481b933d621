//! Rank and annihilator oracles for map-activation dictionaries.
//!
//! A dictionary is dense in the functions on a finite domain exactly when its
//! columns span the `|G| * dim(X)`-dimensional ambient space, and
//! discriminatory exactly when no nonzero measure `mu` satisfies
//! `sum_x psi(phi(x)) mu(x) = 0` for every map `phi` in the family.
//! [`density_rank`] decides the first from singular values;
//! [`is_discriminatory`] decides the second by Gram-Schmidt on the columns
//! and checks any witness by direct pairing.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::groups::{all_moduli_lists, Domain, FiniteAbelianGroup, GroupElement, SignedMeasure};
use crate::homs::{FamilySpec, GroupMap};
use crate::linalg::{normalize_witness, SpanAccumulator};
use crate::netlib::{sample_distinct, Activation, Dictionary, Evaluator};
use crate::scalar::Scalar;

/// Largest admissible `|sum_x psi(phi(x)) mu(x)|` for a unit-variation
/// witness, relative to `max(1, sup |psi|)`.
pub const WITNESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport<T: Scalar> {
    pub group: String,
    pub family: String,
    pub activation: String,
    /// Number of dictionary columns examined.
    pub n_terms: usize,
    pub rank: usize,
    pub ambient: usize,
    pub dense: bool,
    /// The columns came from a sampled subfamily and do not span, so `rank`
    /// only bounds the family's rank from below.
    pub lower_bound: bool,
    pub annihilator_basis: Vec<SignedMeasure<T>>,
    pub tolerance: f64,
    pub seed: u64,
}

impl<T: Scalar> Serialize for DensityReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a, T> {
            group: &'a str,
            family: &'a str,
            activation: &'a str,
            n_terms: usize,
            rank: usize,
            ambient: usize,
            dense: bool,
            lower_bound: bool,
            tolerance: f64,
            seed: u64,
            annihilator_basis: Vec<&'a [T]>,
        }
        Wire {
            group: &self.group,
            family: &self.family,
            activation: &self.activation,
            n_terms: self.n_terms,
            rank: self.rank,
            ambient: self.ambient,
            dense: self.dense,
            lower_bound: self.lower_bound,
            tolerance: self.tolerance,
            seed: self.seed,
            annihilator_basis: self.annihilator_basis.iter().map(|m| m.mass()).collect(),
        }
        .serialize(s)
    }
}

/// Basis of the measures annihilating every column, each normalized to unit
/// total variation.
pub fn annihilator<T: Scalar>(dict: &Dictionary<T>, tol: f64) -> Result<Vec<SignedMeasure<T>>> {
    crate::linalg::left_null_space(dict.columns(), tol)
        .iter()
        .map(|v| to_measure(dict.domain(), dict.components(), v))
        .collect()
}

fn to_measure<T: Scalar>(domain: &Domain, components: usize, v: &DVector<T>) -> Result<SignedMeasure<T>> {
    let v = normalize_witness(v);
    SignedMeasure::with_components(domain.clone(), components, v.iter().copied().collect())
}

/// Where the columns of a family came from.
enum Source {
    /// Every member, or enough members to span.
    Definitive(usize),
    Sampled(Vec<GroupMap>),
}

/// Feeds family columns into `sink` until it reports a full span, the family
/// is exhausted, or `budget` members have been seen; on overflow the columns
/// are replaced by `budget` distinct samples.
fn feed_family<T: Scalar>(
    domain: &Domain,
    family: &FamilySpec,
    evaluator: &Evaluator,
    budget: usize,
    seed: u64,
    sink: &mut dyn ColumnSink<T>,
) -> Result<Source> {
    let points = domain.points();
    let mut count = 0usize;
    let mut overflow = false;
    let mut failure = None;
    family.for_each_map(domain, |m| {
        if count == budget {
            overflow = true;
            return ControlFlow::Break(());
        }
        match evaluator.column::<T>(&points, &m) {
            Ok(col) => sink.push(&col),
            Err(e) => {
                failure = Some(e);
                return ControlFlow::Break(());
            }
        }
        count += 1;
        if sink.is_full() {
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if !overflow || sink.is_full() {
        return Ok(Source::Definitive(count));
    }
    sink.reset();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = sample_distinct(domain, family, budget, &mut rng)?;
    for m in &maps {
        sink.push(&evaluator.column::<T>(&points, m)?);
    }
    Ok(Source::Sampled(maps))
}

trait ColumnSink<T> {
    fn push(&mut self, col: &[T]);
    fn is_full(&mut self) -> bool;
    fn reset(&mut self);
}

/// Singular-value sink with periodic full-span checks.
struct SvdSink<T: Scalar> {
    acc: SpanAccumulator<T>,
    ambient: usize,
    tol: f64,
    since_check: usize,
}

impl<T: Scalar> ColumnSink<T> for SvdSink<T> {
    fn push(&mut self, col: &[T]) {
        self.acc.push_column(col);
        self.since_check += 1;
    }

    fn is_full(&mut self) -> bool {
        if self.since_check < self.ambient.max(8) {
            return false;
        }
        self.since_check = 0;
        self.acc.is_full()
    }

    fn reset(&mut self) {
        self.acc = SpanAccumulator::new(self.ambient, self.tol);
        self.since_check = 0;
    }
}

/// Rank of the family dictionary, streamed so that large exhaustive
/// families need only `O(ambient^2)` memory.
pub fn density_rank<T: Scalar>(
    domain: &Domain,
    family: &FamilySpec,
    activation: &Activation,
    budget: usize,
    tol: f64,
    seed: u64,
) -> Result<DensityReport<T>> {
    let space = family.target_space(domain)?;
    let evaluator = Evaluator::new(activation, &space)?;
    if activation.is_complex() && !T::IS_COMPLEX {
        return Err(Error::InvalidConfiguration(format!(
            "activation {activation} is complex-valued; use a complex codomain"
        )));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let d = evaluator.components();
    let ambient = domain.len() * d;
    let mut sink = SvdSink { acc: SpanAccumulator::new(ambient, tol), ambient, tol, since_check: 0 };
    let source = feed_family(domain, family, &evaluator, budget, seed, &mut sink)?;
    let rank = sink.acc.rank();
    let annihilator_basis = sink
        .acc
        .left_null_space()
        .iter()
        .map(|v| to_measure(domain, d, v))
        .collect::<Result<Vec<_>>>()?;
    let (n_terms, sampled) = match &source {
        Source::Definitive(n) => (*n, false),
        Source::Sampled(maps) => (maps.len(), true),
    };
    let dense = rank == ambient;
    Ok(DensityReport {
        group: domain.to_string(),
        family: family.to_string(),
        activation: activation.to_string(),
        n_terms,
        rank,
        ambient,
        dense,
        lower_bound: sampled && !dense,
        annihilator_basis,
        tolerance: tol,
        seed,
    })
}

/// Gram-Schmidt sink: orthonormal basis of the column span.
struct GramSchmidt<T: Scalar> {
    ambient: usize,
    tol: f64,
    basis: Vec<DVector<T>>,
}

impl<T: Scalar> GramSchmidt<T> {
    fn residual(&self, v: &DVector<T>) -> DVector<T> {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        r
    }

    /// Orthonormal complement of the span, most independent directions first.
    fn complement(&mut self) -> Vec<DVector<T>> {
        let mut out = Vec::new();
        let mut remaining: Vec<usize> = (0..self.ambient).collect();
        while self.basis.len() < self.ambient {
            let (pos, r) = remaining
                .iter()
                .enumerate()
                .map(|(pos, &k)| {
                    let mut e = DVector::<T>::zeros(self.ambient);
                    e[k] = T::one();
                    (pos, self.residual(&e))
                })
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("a coordinate direction is left");
            remaining.remove(pos);
            let q = r.unscale(r.norm());
            self.basis.push(q.clone());
            out.push(q);
        }
        out
    }
}

impl<T: Scalar> ColumnSink<T> for GramSchmidt<T> {
    fn push(&mut self, col: &[T]) {
        if self.basis.len() == self.ambient {
            return;
        }
        let v = DVector::from_column_slice(col);
        let n = v.norm();
        if n == 0.0 {
            return;
        }
        let r = self.residual(&v);
        let rn = r.norm();
        if rn > self.tol * n {
            self.basis.push(r.unscale(rn));
        }
    }

    fn is_full(&mut self) -> bool {
        self.basis.len() == self.ambient
    }

    fn reset(&mut self) {
        self.basis.clear();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discrimination<T: Scalar> {
    pub discriminatory: bool,
    /// The verdict covers the whole family rather than a sample.
    pub exhaustive: bool,
    pub witness: Option<SignedMeasure<T>>,
    /// Largest `|sum_x psi(phi(x)) mu(x)|` over the checked maps.
    pub max_pairing: f64,
    /// The witness annihilates every checked map within [`WITNESS_TOL`].
    pub verified: bool,
}

/// Decides whether some nonzero measure annihilates every column.
pub fn is_discriminatory<T: Scalar>(
    domain: &Domain,
    family: &FamilySpec,
    activation: &Activation,
    budget: usize,
    tol: f64,
    seed: u64,
) -> Result<Discrimination<T>> {
    let space = family.target_space(domain)?;
    let evaluator = Evaluator::new(activation, &space)?;
    let d = evaluator.components();
    let ambient = domain.len() * d;
    let mut gs = GramSchmidt { ambient, tol, basis: Vec::new() };
    let source = feed_family::<T>(domain, family, &evaluator, budget, seed, &mut gs)?;
    let exhaustive = matches!(source, Source::Definitive(_));
    if gs.is_full() {
        return Ok(Discrimination { discriminatory: true, exhaustive, witness: None, max_pairing: 0.0, verified: true });
    }
    let mu: DVector<T> = gs.complement()[0].map(|v| v.conjugate());
    let witness = to_measure(domain, d, &mu)?;
    let max_pairing = match &source {
        Source::Definitive(_) => {
            let mut worst = 0.0f64;
            let mut failure = None;
            family.for_each_map(domain, |m| match pairing(domain, &evaluator, &m, witness.mass()) {
                Ok(p) => {
                    worst = worst.max(p);
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            worst
        }
        Source::Sampled(maps) => {
            let mut worst = 0.0f64;
            for m in maps {
                worst = worst.max(pairing(domain, &evaluator, m, witness.mass())?);
            }
            worst
        }
    };
    let scale = sup_abs(&evaluator, domain, &space)?.max(1.0);
    Ok(Discrimination {
        discriminatory: false,
        exhaustive,
        verified: max_pairing < WITNESS_TOL * scale,
        witness: Some(witness),
        max_pairing,
    })
}

/// `|sum_x <psi(map(x)), mu(x)>|`, evaluated point by point.
fn pairing<T: Scalar>(domain: &Domain, evaluator: &Evaluator, map: &GroupMap, mu: &[T]) -> Result<f64> {
    let mut acc = T::zero();
    let mut buf: Vec<T> = Vec::new();
    let d = evaluator.components();
    for (i, x) in domain.points().iter().enumerate() {
        buf.clear();
        evaluator.push(&map.apply(x)?, &mut buf)?;
        for (c, v) in buf.iter().enumerate() {
            acc += *v * mu[i * d + c];
        }
    }
    Ok(acc.abs_val())
}

fn sup_abs(evaluator: &Evaluator, domain: &Domain, space: &crate::groups::Space) -> Result<f64> {
    let mut buf: Vec<Complex64> = Vec::new();
    let points: Vec<GroupElement> = match space.moduli() {
        Some(m) => FiniteAbelianGroup::from_moduli(&m)?.elements().collect(),
        None => domain.points(),
    };
    let mut sup = 0.0f64;
    for y in &points {
        buf.clear();
        evaluator.push(y, &mut buf)?;
        sup = buf.iter().fold(sup, |s, z| s.max(z.norm()));
    }
    Ok(sup)
}

/// Per-cell seed from the sweep seed and the cell's position.
pub fn cell_seed(master: u64, index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index as u64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityCell {
    pub group: String,
    pub family: String,
    pub activation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WitnessSet {
    Real(Vec<Vec<f64>>),
    Complex(Vec<Vec<Complex64>>),
}

/// One line of a density sweep; `error` is set when the cell could not run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub group: String,
    pub family: String,
    pub activation: String,
    pub n_terms: usize,
    pub rank: usize,
    pub ambient: usize,
    pub dense: bool,
    pub lower_bound: bool,
    pub tolerance: f64,
    pub seed: u64,
    pub error: Option<String>,
    pub annihilator_basis: WitnessSet,
}

impl<T: Scalar> From<DensityReport<T>> for DensityRow {
    fn from(r: DensityReport<T>) -> Self {
        let basis = if T::IS_COMPLEX {
            WitnessSet::Complex(
                r.annihilator_basis.iter().map(|m| m.mass().iter().map(|v| v.to_complex()).collect()).collect(),
            )
        } else {
            WitnessSet::Real(
                r.annihilator_basis.iter().map(|m| m.mass().iter().map(|v| v.to_complex().re).collect()).collect(),
            )
        };
        DensityRow {
            group: r.group,
            family: r.family,
            activation: r.activation,
            n_terms: r.n_terms,
            rank: r.rank,
            ambient: r.ambient,
            dense: r.dense,
            lower_bound: r.lower_bound,
            tolerance: r.tolerance,
            seed: r.seed,
            error: None,
            annihilator_basis: basis,
        }
    }
}

fn run_cell(cell: &DensityCell, budget: usize, tol: f64, seed: u64) -> Result<DensityRow> {
    let domain: Domain = cell.group.parse()?;
    let family: FamilySpec = cell.family.parse()?;
    let activation: Activation = cell.activation.parse()?;
    Ok(if activation.is_complex() {
        density_rank::<Complex64>(&domain, &family, &activation, budget, tol, seed)?.into()
    } else {
        density_rank::<f64>(&domain, &family, &activation, budget, tol, seed)?.into()
    })
}

/// One report per cell, in cell order. Cells run in parallel with seeds
/// derived from `master_seed`; a failing cell yields a row with `error` set.
pub fn density_map(cells: &[DensityCell], budget: usize, tol: f64, master_seed: u64) -> Vec<DensityRow> {
    cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let seed = cell_seed(master_seed, i);
            run_cell(cell, budget, tol, seed).unwrap_or_else(|e| DensityRow {
                group: cell.group.clone(),
                family: cell.family.clone(),
                activation: cell.activation.clone(),
                n_terms: 0,
                rank: 0,
                ambient: 0,
                dense: false,
                lower_bound: false,
                tolerance: tol,
                seed,
                error: Some(e.to_string()),
                annihilator_basis: WitnessSet::Real(Vec::new()),
            })
        })
        .collect()
}

/// Where counterexample activations come from.
#[derive(Clone, Debug)]
pub enum ActivationSource {
    /// Random non-constant tables with entries in `[-1, 1]`, one per trial.
    RandomTables,
    /// Each listed activation, once per trial.
    Fixed(Vec<Activation>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub group: String,
    pub family: String,
    pub activation: String,
    pub witness: Vec<f64>,
    pub max_pairing: f64,
}

/// Bounded non-constant activations that fail to be discriminatory with
/// respect to a whole family, over every group of order `2..=max_order`.
/// Only exhaustive verdicts whose witness re-verifies are returned.
pub fn counterexample_search<R: rand::Rng + ?Sized>(
    max_order: u64,
    families: &[FamilySpec],
    source: &ActivationSource,
    trials: usize,
    budget: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Vec<Counterexample>> {
    let mut found = Vec::new();
    if trials == 0 {
        return Ok(found);
    }
    for moduli in all_moduli_lists(max_order) {
        let group = FiniteAbelianGroup::from_moduli(&moduli)?;
        if group.order() < 2 {
            continue;
        }
        let domain = Domain::Finite(group.clone());
        for family in families {
            let space = family.target_space(&domain)?;
            let Some(n) = space.order() else { continue };
            for _ in 0..trials {
                let activations = match source {
                    ActivationSource::RandomTables => vec![random_table(n as usize, rng)],
                    ActivationSource::Fixed(list) => list.clone(),
                };
                for act in activations {
                    if !act.is_bounded() || !act.is_nonconstant() || act.is_complex() {
                        continue;
                    }
                    if act.check_space(&space).is_err() {
                        continue;
                    }
                    let verdict = is_discriminatory::<f64>(&domain, family, &act, budget, tol, rng.gen())?;
                    if let (false, true, true, Some(w)) =
                        (verdict.discriminatory, verdict.exhaustive, verdict.verified, verdict.witness)
                    {
                        found.push(Counterexample {
                            group: domain.to_string(),
                            family: family.to_string(),
                            activation: act.to_string(),
                            witness: w.into_mass(),
                            max_pairing: verdict.max_pairing,
                        });
                    }
                }
            }
        }
    }
    Ok(found)
}

fn random_table<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Activation {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let a = Activation::table(v);
        if a.is_nonconstant() {
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_RANK_TOL;
    use crate::netlib::build_dictionary;

    const TOL: f64 = DEFAULT_RANK_TOL;

    fn report(g: &str, fam: &str, act: &str) -> DensityReport<f64> {
        density_rank(&g.parse().unwrap(), &fam.parse().unwrap(), &act.parse().unwrap(), 1 << 16, TOL, 0).unwrap()
    }

    fn discrim(g: &str, fam: &str, act: &str) -> Discrimination<f64> {
        is_discriminatory(&g.parse().unwrap(), &fam.parse().unwrap(), &act.parse().unwrap(), 1 << 16, TOL, 0).unwrap()
    }

    #[test]
    fn annihilator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dict: Dictionary<f64> = build_dictionary(
            &"Z5".parse().unwrap(),
            &"translations".parse().unwrap(),
            &Activation::delta0(),
            64,
            &mut rng,
        )
        .unwrap();
        assert!(annihilator(&dict, TOL).unwrap().is_empty());
        let dict: Dictionary<f64> = build_dictionary(
            &"Z2".parse().unwrap(),
            &"aut".parse().unwrap(),
            &"table:1,2".parse().unwrap(),
            64,
            &mut rng,
        )
        .unwrap();
        let basis = annihilator(&dict, TOL).unwrap();
        assert_eq!(basis.len(), 1);
        let m = basis[0].mass();
        assert!((m[0] - 2.0 / 3.0).abs() < 1e-12 && (m[1] + 1.0 / 3.0).abs() < 1e-12);
        let dict: Dictionary<f64> = build_dictionary(
            &"Z3".parse().unwrap(),
            &"end".parse().unwrap(),
            &"const:0".parse().unwrap(),
            64,
            &mut rng,
        )
        .unwrap();
        assert_eq!(annihilator(&dict, TOL).unwrap().len(), 3);
    }

    #[test]
    fn rank_examples() {
        let r = report("Z4", "translations", "table:1,1,0,0");
        assert_eq!((r.rank, r.dense, r.annihilator_basis.len()), (3, false, 1));
        let r = report("Z5", "affine-end", "delta0");
        assert_eq!((r.rank, r.dense), (5, true));
        assert!(r.annihilator_basis.is_empty());
        let r = report("Z1", "aut", "logistic");
        assert_eq!((r.rank, r.ambient, r.dense), (1, 1, true));
    }

    #[test]
    fn discrimination_examples() {
        assert!(discrim("Z3", "translations", "delta0").discriminatory);
        let d = discrim("Z2", "aut", "table:1,2");
        assert!(!d.discriminatory && d.exhaustive && d.verified);
        let w = d.witness.unwrap();
        assert!((w.mass()[0] - 2.0 / 3.0).abs() < 1e-12 && (w.mass()[1] + 1.0 / 3.0).abs() < 1e-12);
        for g in ["Z2", "Z6", "Z2xZ2"] {
            let d = discrim(g, "affine-end", "const:1.5");
            assert!(!d.discriminatory && d.verified);
        }
    }

    #[test]
    fn sampled_families_are_flagged() {
        let r: DensityReport<f64> = density_rank(
            &"Z2xZ2xZ2".parse().unwrap(),
            &"affine-aut".parse().unwrap(),
            &"table:1,0,0,0,0,0,0,0".parse().unwrap(),
            3,
            TOL,
            5,
        )
        .unwrap();
        assert_eq!(r.n_terms, 3);
        assert!(r.lower_bound && !r.dense);
    }

    #[test]
    fn vector_valued_relu_windows() {
        let r = report("W2@1", "affine-end", "relu");
        assert_eq!(r.ambient, 18);
        assert_eq!(r.rank + r.annihilator_basis.len(), r.ambient);
    }

    #[test]
    fn complex_character_cell() {
        let r: DensityReport<Complex64> = density_rank(
            &"Z5".parse().unwrap(),
            &"translations".parse().unwrap(),
            &"char:c=1".parse().unwrap(),
            64,
            TOL,
            0,
        )
        .unwrap();
        // translates of one character stay on its line
        assert_eq!(r.rank, 1);
        let d: Discrimination<Complex64> = is_discriminatory(
            &"Z5".parse().unwrap(),
            &"translations".parse().unwrap(),
            &"char:c=1".parse().unwrap(),
            64,
            TOL,
            0,
        )
        .unwrap();
        assert!(!d.discriminatory && d.verified);
    }

    #[test]
    fn sweep_rows_keep_order_and_errors() {
        let mut cells = Vec::new();
        for n in 2..=8 {
            for act in ["logistic", "delta0"] {
                for fam in ["aut", "affine-end"] {
                    cells.push(DensityCell { group: format!("Z{n}"), family: fam.into(), activation: act.into() });
                }
            }
        }
        cells.push(DensityCell { group: "Z4".into(), family: "aut".into(), activation: "relu".into() });
        let rows = density_map(&cells, 4096, TOL, 11);
        assert_eq!(rows.len(), cells.len());
        for (row, cell) in rows.iter().zip(&cells) {
            assert_eq!((&row.group, &row.family, &row.activation), (&cell.group, &cell.family, &cell.activation));
            if cell.family == "affine-end" && cell.activation == "delta0" {
                assert!(row.dense);
            }
        }
        let z2 = rows.iter().find(|r| r.group == "Z2" && r.family == "aut" && r.activation == "logistic").unwrap();
        assert!(!z2.dense);
        assert!(rows.last().unwrap().error.is_some());
        assert_eq!(density_map(&cells, 4096, TOL, 11), rows);
        assert!(density_map(&[], 4096, TOL, 11).is_empty());
    }

    #[test]
    fn counterexample_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let aut = vec!["aut".parse().unwrap()];
        let found = counterexample_search(2, &aut, &ActivationSource::RandomTables, 3, 1 << 16, TOL, &mut rng).unwrap();
        assert!(found.iter().any(|c| c.group == "Z2"));
        let affine = vec!["affine-end".parse().unwrap()];
        let delta = ActivationSource::Fixed(vec![Activation::delta0()]);
        assert!(counterexample_search(8, &affine, &delta, 1, 1 << 16, TOL, &mut rng).unwrap().is_empty());
        assert!(counterexample_search(8, &aut, &ActivationSource::RandomTables, 0, 1 << 16, TOL, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cell_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| cell_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
