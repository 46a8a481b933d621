use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::Rng;

use super::activation::Activation;
use super::network::{Evaluator, GroupNetwork, Term};
use crate::error::{invalid, Error, Result};
use crate::groups::{Domain, Space};
use crate::homs::{FamilySpec, GroupMap};
use crate::linalg::numerical_rank;
use crate::scalar::Scalar;

/// Draws per requested member before sampling gives up on new distinct maps.
const SAMPLE_ATTEMPTS_PER_TERM: usize = 20;

/// Columns `psi(map_i(x))`, rows point-major (`x * components + c`).
#[derive(Clone, Debug)]
pub struct Dictionary<T: Scalar> {
    domain: Domain,
    space: Space,
    family: FamilySpec,
    activation: Activation,
    components: usize,
    maps: Vec<GroupMap>,
    columns: DMatrix<T>,
    exhaustive: bool,
}

impl<T: Scalar> Dictionary<T> {
    /// Dictionary over an explicit map list.
    pub fn from_maps(
        domain: &Domain,
        family: &FamilySpec,
        activation: &Activation,
        maps: Vec<GroupMap>,
        exhaustive: bool,
    ) -> Result<Self> {
        let space = family.target_space(domain)?;
        let evaluator = Evaluator::new(activation, &space)?;
        if activation.is_complex() && !T::IS_COMPLEX {
            return Err(Error::InvalidConfiguration(format!(
                "activation {activation} is complex-valued; use a complex codomain"
            )));
        }
        let points = domain.points();
        let rows = points.len() * evaluator.components();
        let mut data = Vec::with_capacity(rows * maps.len());
        for m in &maps {
            data.extend(evaluator.column::<T>(&points, m)?);
        }
        Ok(Dictionary {
            domain: domain.clone(),
            space,
            family: family.clone(),
            activation: activation.clone(),
            components: evaluator.components(),
            columns: DMatrix::from_column_slice(rows, maps.len(), &data),
            maps,
            exhaustive,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    pub fn activation(&self) -> &Activation {
        &self.activation
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn maps(&self) -> &[GroupMap] {
        &self.maps
    }

    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// True when the columns cover the whole family.
    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    /// `|G| * dim(X)`.
    pub fn ambient(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self, tol: f64) -> usize {
        numerical_rank(&self.columns, tol)
    }

    /// The network `sum_i alpha_i psi(map_i(x))`.
    pub fn network(&self, alpha: &[T]) -> Result<GroupNetwork<T>> {
        if alpha.len() != self.maps.len() {
            return invalid(format!("{} coefficients for {} columns", alpha.len(), self.maps.len()));
        }
        let terms = self
            .maps
            .iter()
            .zip(alpha)
            .map(|(m, &a)| Term { alpha: a, map: m.clone() })
            .collect();
        GroupNetwork::new(self.domain.clone(), self.space.clone(), self.activation.clone(), terms)
    }
}

/// Up to `n` distinct members drawn uniformly, in draw order.
pub fn sample_distinct<R: Rng + ?Sized>(
    domain: &Domain,
    family: &FamilySpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<GroupMap>> {
    let mut seen = HashSet::new();
    let mut maps = Vec::with_capacity(n);
    for _ in 0..n.saturating_mul(SAMPLE_ATTEMPTS_PER_TERM) {
        if maps.len() == n {
            break;
        }
        let m = family.sample(domain, rng)?;
        if seen.insert(m.clone()) {
            maps.push(m);
        }
    }
    Ok(maps)
}

/// Columns for `n_terms` members of the family: the whole family when it has
/// at most `n_terms` members, otherwise distinct uniform samples.
pub fn build_dictionary<T: Scalar, R: Rng + ?Sized>(
    domain: &Domain,
    family: &FamilySpec,
    activation: &Activation,
    n_terms: usize,
    rng: &mut R,
) -> Result<Dictionary<T>> {
    let space = family.target_space(domain)?;
    activation.check_space(&space)?;
    if n_terms == 0 {
        return invalid("a dictionary needs at least one term");
    }
    let (maps, exhaustive) = match family.enumerate_up_to(domain, n_terms)? {
        Some(all) => (all, true),
        None => (sample_distinct(domain, family, n_terms, rng)?, false),
    };
    if maps.is_empty() {
        return invalid(format!("family {family} on {domain} is empty"));
    }
    Dictionary::from_maps(domain, family, activation, maps, exhaustive)
}
