use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::activation::{narrow, Activation};
use crate::error::{invalid, Error, Result};
use crate::groups::{Domain, GroupElement, Space};
use crate::homs::GroupMap;
use crate::scalar::Scalar;

/// Activation values on a fixed target space, tabulated when the space is
/// finite.
#[derive(Clone, Debug)]
pub(crate) struct Evaluator {
    activation: Activation,
    space: Space,
    components: usize,
    table: Option<Vec<Complex64>>,
}

impl Evaluator {
    pub(crate) fn new(activation: &Activation, space: &Space) -> Result<Self> {
        activation.check_space(space)?;
        Ok(Evaluator {
            activation: activation.clone(),
            space: space.clone(),
            components: activation.components(space),
            table: activation.tabulate(space)?,
        })
    }

    pub(crate) fn components(&self) -> usize {
        self.components
    }

    /// Appends the value at `y` to `out`.
    pub(crate) fn push<T: Scalar>(&self, y: &GroupElement, out: &mut Vec<T>) -> Result<()> {
        let d = self.components;
        match &self.table {
            Some(table) => {
                let i = self
                    .space
                    .index_of(y)
                    .ok_or_else(|| Error::InvalidArgument(format!("{y} is not a point of {}", self.space)))?;
                for z in &table[i * d..(i + 1) * d] {
                    out.push(narrow(*z, &self.activation)?);
                }
            }
            None => {
                let mut buf = Vec::with_capacity(d);
                self.activation.eval(&self.space, y, &mut buf)?;
                for z in buf {
                    out.push(narrow(z, &self.activation)?);
                }
            }
        }
        Ok(())
    }

    /// `psi(map(x))` for every point, point-major.
    pub(crate) fn column<T: Scalar>(&self, points: &[GroupElement], map: &GroupMap) -> Result<Vec<T>> {
        let mut col = Vec::with_capacity(points.len() * self.components);
        for x in points {
            self.push(&map.apply(x)?, &mut col)?;
        }
        Ok(col)
    }
}

/// Checks that `map` reads points of `domain` and lands in `space`.
pub(crate) fn check_map(domain: &Domain, space: &Space, map: &GroupMap) -> Result<()> {
    let ok = match (map, domain) {
        (GroupMap::Lattice(l), Domain::Sampled(_)) => {
            matches!(space, Space::Lattice { dims } if *dims == l.dims()) && domain.space().dims() == l.dims()
        }
        (GroupMap::Lattice(_), _) => false,
        (m, d) => {
            let h = m.linear_part().expect("finite map");
            let source_ok = d.finite_group().is_some_and(|g| g.same_presentation(h.source()));
            let target_ok = space.moduli().is_some_and(|m| m == h.target().moduli());
            source_ok && target_ok
        }
    };
    if ok {
        Ok(())
    } else {
        invalid(format!("map {map:?} does not act from {domain} into {space}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Term<T> {
    pub alpha: T,
    pub map: GroupMap,
}

/// `F(x) = sum_i alpha_i psi(map_i(x))`.
#[derive(Clone, Debug)]
pub struct GroupNetwork<T: Scalar> {
    domain: Domain,
    space: Space,
    activation: Activation,
    terms: Vec<Term<T>>,
    evaluator: Evaluator,
}

impl<T: Scalar> PartialEq for GroupNetwork<T> {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.space == other.space
            && self.activation == other.activation
            && self.terms == other.terms
    }
}

impl<T: Scalar> GroupNetwork<T> {
    pub fn new(domain: Domain, space: Space, activation: Activation, terms: Vec<Term<T>>) -> Result<Self> {
        let evaluator = Evaluator::new(&activation, &space)?;
        if activation.is_complex() && !T::IS_COMPLEX {
            return Err(Error::InvalidConfiguration(format!(
                "activation {activation} is complex-valued; use a complex codomain"
            )));
        }
        for t in &terms {
            check_map(&domain, &space, &t.map)?;
        }
        Ok(GroupNetwork { domain, space, activation, terms, evaluator })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn activation(&self) -> &Activation {
        &self.activation
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn components(&self) -> usize {
        self.evaluator.components()
    }

    pub fn eval(&self, x: &GroupElement) -> Result<Vec<T>> {
        if !self.domain.contains(x) {
            return invalid(format!("{x} is not a point of {}", self.domain));
        }
        let d = self.components();
        let mut acc = vec![T::zero(); d];
        let mut buf = Vec::with_capacity(d);
        for t in &self.terms {
            buf.clear();
            self.evaluator.push(&t.map.apply(x)?, &mut buf)?;
            for (a, v) in acc.iter_mut().zip(&buf) {
                *a += t.alpha * *v;
            }
        }
        Ok(acc)
    }

    /// Values at every domain point, point-major.
    pub fn eval_all(&self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.domain.len() * self.components());
        for x in self.domain.points() {
            out.extend(self.eval(&x)?);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct NetworkRecord<T> {
    group: String,
    space: String,
    activation: Activation,
    terms: Vec<Term<T>>,
}

impl<T: Scalar> Serialize for GroupNetwork<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkRecord {
            group: self.domain.to_string(),
            space: self.space.to_string(),
            activation: self.activation.clone(),
            terms: self.terms.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for GroupNetwork<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = NetworkRecord::<T>::deserialize(d)?;
        let domain: Domain = r.group.parse().map_err(D::Error::custom)?;
        let space: Space = r.space.parse().map_err(D::Error::custom)?;
        GroupNetwork::new(domain, space, r.activation, r.terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homs::{FamilySpec, Homomorphism, LatticeMap};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dom(s: &str) -> Domain {
        s.parse().unwrap()
    }

    #[test]
    fn table_network_example() {
        let d = dom("Z3");
        let g = d.finite_group().unwrap();
        let net = GroupNetwork::new(
            d.clone(),
            d.space(),
            Activation::table(vec![0.0, 1.0, 0.0]),
            vec![Term { alpha: 2.0, map: Homomorphism::identity(&g).into() }],
        )
        .unwrap();
        assert_eq!(net.eval_all().unwrap(), vec![0.0, 2.0, 0.0]);
        let empty = GroupNetwork::<f64>::new(d.clone(), d.space(), Activation::logistic(), vec![]).unwrap();
        assert_eq!(empty.eval_all().unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn relu_window_example() {
        let d = dom("W1@2");
        let map = LatticeMap::new(&[vec![1]], vec![-1]).unwrap();
        let net = GroupNetwork::new(d.clone(), d.space(), Activation::relu(), vec![Term { alpha: 1.0, map: map.into() }])
            .unwrap();
        assert_eq!(net.eval_all().unwrap(), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn order_requiring_activation_on_unordered_group() {
        let d = dom("Z4");
        let r = GroupNetwork::<f64>::new(d.clone(), d.space(), Activation::relu(), vec![]);
        assert!(matches!(r, Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = dom("Z2xZ3");
        let fam: FamilySpec = "affine-end".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let terms = (0..5)
            .map(|_| Term { alpha: rng.gen_range(-1.0..1.0) / 3.0, map: fam.sample(&d, &mut rng).unwrap() })
            .collect();
        let table = (0..6).map(|_| rng.gen::<f64>() / 7.0).collect();
        let net = GroupNetwork::new(d.clone(), d.space(), Activation::table(table), terms).unwrap();
        let json = serde_json::to_string(&net).unwrap();
        let back: GroupNetwork<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.eval_all().unwrap(), net.eval_all().unwrap());
    }

    proptest! {
        #[test]
        fn evaluation_is_linear_in_coefficients(seed in any::<u64>(), c in -4.0f64..4.0) {
            let d = dom("Z4");
            let fam: FamilySpec = "affine-end".parse().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let maps: Vec<GroupMap> = (0..4).map(|_| fam.sample(&d, &mut rng).unwrap()).collect();
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let net = |coef: &[f64]| {
                let terms = maps.iter().zip(coef).map(|(m, &alpha)| Term { alpha, map: m.clone() }).collect();
                GroupNetwork::new(d.clone(), d.space(), Activation::logistic(), terms).unwrap().eval_all().unwrap()
            };
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            let (fa, fb, fs, fc) = (net(&a), net(&b), net(&sum), net(&scaled));
            for i in 0..4 {
                prop_assert!((fs[i] - (fa[i] + fb[i])).abs() < 1e-12);
                prop_assert!((fc[i] - c * fa[i]).abs() < 1e-12);
            }
        }
    }
}
