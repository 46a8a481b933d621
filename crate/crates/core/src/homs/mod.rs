//! Group homomorphisms, affine maps and the map families used as network
//! layers.
//!
//! A homomorphism `Z_{a_1} x ... x Z_{a_k} -> Z_{b_1} x ... x Z_{b_l}` is stored
//! as its generator-image matrix: row `i` is the image of the `i`-th source
//! generator, reduced mod the target moduli. The matrix is valid iff
//! `a_i * M[i][j] = 0 (mod b_j)` for every entry.

mod enumerate;
mod family;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::groups::{FiniteAbelianGroup, GroupElement};

pub use enumerate::{
    allowed_entries, count_automorphisms, enumerate_automorphisms, enumerate_homs,
    find_isomorphism, for_each_automorphism, for_each_hom_matrix, hom_count,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use family::{FamilyKind, FamilySpec, WindowBounds};

/// Checks the validity congruence `a_i * M[i][j] = 0 (mod b_j)`.
pub fn validate_hom(
    matrix: &[Vec<i64>],
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
) -> Result<bool> {
    check_shape(matrix, source, target)?;
    Ok(matrix.iter().zip(source.moduli()).all(|(row, &a)| {
        row.iter().zip(target.moduli()).all(|(&m, &b)| {
            (a as i128 * m.rem_euclid(b as i64) as i128).rem_euclid(b as i128) == 0
        })
    }))
}

fn check_shape(
    matrix: &[Vec<i64>],
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
) -> Result<()> {
    if matrix.len() != source.rank() || matrix.iter().any(|r| r.len() != target.rank()) {
        return invalid(format!(
            "matrix shape does not match {} generators of {} and {} of {}",
            source.rank(),
            source,
            target.rank(),
            target
        ));
    }
    Ok(())
}

/// A homomorphism between finite Abelian groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    source: FiniteAbelianGroup,
    target: FiniteAbelianGroup,
    /// `k x l`, row-major.
    matrix: Vec<i64>,
}

impl Homomorphism {
    pub fn new(
        source: FiniteAbelianGroup,
        target: FiniteAbelianGroup,
        matrix: &[Vec<i64>],
    ) -> Result<Self> {
        if !validate_hom(matrix, &source, &target)? {
            return invalid(format!(
                "generator images {matrix:?} do not define a homomorphism {source} -> {target}"
            ));
        }
        let flat = matrix
            .iter()
            .flat_map(|row| row.iter().zip(target.moduli()).map(|(&m, &b)| m.rem_euclid(b as i64)))
            .collect();
        Ok(Homomorphism { source, target, matrix: flat })
    }

    /// Builds from an already reduced, already validated flat matrix.
    pub(crate) fn from_flat_unchecked(
        source: FiniteAbelianGroup,
        target: FiniteAbelianGroup,
        matrix: Vec<i64>,
    ) -> Self {
        debug_assert_eq!(matrix.len(), source.rank() * target.rank());
        Homomorphism { source, target, matrix }
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::multiplication(group, 1)
    }

    pub fn zero(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> Self {
        Homomorphism {
            source: source.clone(),
            target: target.clone(),
            matrix: vec![0; source.rank() * target.rank()],
        }
    }

    /// The endomorphism `x -> k x`.
    pub fn multiplication(group: &FiniteAbelianGroup, k: i64) -> Self {
        let r = group.rank();
        let mut matrix = vec![0; r * r];
        for (i, &m) in group.moduli().iter().enumerate() {
            matrix[i * r + i] = k.rem_euclid(m as i64);
        }
        Homomorphism { source: group.clone(), target: group.clone(), matrix }
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.matrix[i * self.target.rank() + j]
    }

    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let l = self.target.rank();
        if l == 0 {
            return vec![Vec::new(); self.source.rank()];
        }
        self.matrix.chunks(l).map(<[i64]>::to_vec).collect()
    }

    pub fn flat_matrix(&self) -> &[i64] {
        &self.matrix
    }

    pub fn is_endomorphism(&self) -> bool {
        self.source.same_presentation(&self.target)
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if !self.source.contains(x) {
            return invalid(format!("{x} is not an element of the source group {}", self.source));
        }
        Ok(GroupElement::new(self.apply_coords(x.coords())))
    }

    pub(crate) fn apply_coords(&self, x: &[i64]) -> Vec<i64> {
        let l = self.target.rank();
        let mut y = vec![0i64; l];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let row = &self.matrix[i * l..(i + 1) * l];
            for (yj, &m) in y.iter_mut().zip(row) {
                *yj += xi * m;
            }
        }
        for (yj, &b) in y.iter_mut().zip(self.target.moduli()) {
            *yj = yj.rem_euclid(b as i64);
        }
        y
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Homomorphism) -> Result<Homomorphism> {
        if !inner.target.same_presentation(&self.source) {
            return invalid(format!(
                "cannot compose: inner target {} differs from outer source {}",
                inner.target, self.source
            ));
        }
        let k = inner.source.rank();
        let mid = self.source.rank();
        let l = self.target.rank();
        let mut matrix = vec![0i64; k * l];
        for i in 0..k {
            for j in 0..l {
                let mut acc: i128 = 0;
                for t in 0..mid {
                    acc += inner.matrix[i * mid + t] as i128 * self.matrix[t * l + j] as i128;
                }
                matrix[i * l + j] = acc.rem_euclid(self.target.moduli()[j] as i128) as i64;
            }
        }
        Ok(Homomorphism { source: inner.source.clone(), target: self.target.clone(), matrix })
    }

    /// Elements mapped to the identity.
    pub fn kernel(&self) -> Vec<GroupElement> {
        self.source
            .elements()
            .filter(|x| self.apply_coords(x.coords()).iter().all(|&c| c == 0))
            .collect()
    }

    pub fn is_injective(&self) -> bool {
        // the identity is always in the kernel
        self.source.elements().skip(1).all(|x| self.apply_coords(x.coords()).iter().any(|&c| c != 0))
    }

    /// Trivial kernel on an endomorphism; errors when source and target differ.
    pub fn is_automorphism(&self) -> Result<bool> {
        if !self.is_endomorphism() {
            return invalid(format!(
                "automorphism check needs source = target, got {} -> {}",
                self.source, self.target
            ));
        }
        Ok(self.is_injective())
    }

    /// Dual map `H^ -> G^`, `chi -> chi ∘ self`, in the self-dual presentation
    /// where characters share the moduli of their group.
    pub fn dual(&self) -> Homomorphism {
        let k = self.source.rank();
        let l = self.target.rank();
        let mut matrix = vec![0i64; l * k];
        for j in 0..l {
            let b = self.target.moduli()[j] as i128;
            for i in 0..k {
                let a = self.source.moduli()[i] as i128;
                // a_i * M[i][j] / b_j is integral by the validity congruence
                let v = a * self.matrix[i * l + j] as i128 / b;
                matrix[j * k + i] = v.rem_euclid(a) as i64;
            }
        }
        Homomorphism { source: self.target.clone(), target: self.source.clone(), matrix }
    }
}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {:?}", self.source, self.target, self.matrix())
    }
}

/// `x -> hom(x) + shift`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    hom: Homomorphism,
    shift: GroupElement,
}

impl AffineMap {
    pub fn new(hom: Homomorphism, shift: GroupElement) -> Result<Self> {
        if !hom.target.contains(&shift) {
            return invalid(format!("shift {shift} is not an element of {}", hom.target));
        }
        Ok(AffineMap { hom, shift })
    }

    /// `x -> x + shift`.
    pub fn translation(group: &FiniteAbelianGroup, shift: GroupElement) -> Result<Self> {
        Self::new(Homomorphism::identity(group), shift)
    }

    pub fn hom(&self) -> &Homomorphism {
        &self.hom
    }

    pub fn shift(&self) -> &GroupElement {
        &self.shift
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        let y = self.hom.apply(x)?;
        Ok(self.hom.target.add_unchecked(&y, &self.shift))
    }

    pub fn is_bijective(&self) -> Result<bool> {
        self.hom.is_automorphism()
    }
}

/// Affine map `x -> x M + b` on the lattice `Z^d`, used on lattice windows.
/// Images live in `Z^d` and may leave the window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeMap {
    dims: usize,
    matrix: Vec<i64>,
    shift: Vec<i64>,
}

impl LatticeMap {
    pub fn new(matrix: &[Vec<i64>], shift: Vec<i64>) -> Result<Self> {
        let dims = matrix.len();
        if dims == 0 || matrix.iter().any(|r| r.len() != dims) || shift.len() != dims {
            return invalid("lattice map needs a square d x d matrix and a length-d shift");
        }
        Ok(LatticeMap { dims, matrix: matrix.concat(), shift })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn matrix(&self) -> Vec<Vec<i64>> {
        self.matrix.chunks(self.dims).map(<[i64]>::to_vec).collect()
    }

    pub fn shift(&self) -> &[i64] {
        &self.shift
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if x.len() != self.dims {
            return invalid(format!("{x} is not a point of Z^{}", self.dims));
        }
        let d = self.dims;
        let mut y = self.shift.clone();
        for (i, &xi) in x.coords().iter().enumerate() {
            for (yj, &a) in y.iter_mut().zip(&self.matrix[i * d..(i + 1) * d]) {
                *yj += xi * a;
            }
        }
        Ok(GroupElement::new(y))
    }

    pub fn determinant(&self) -> i64 {
        integer_determinant(&self.matrix, self.dims)
    }

    /// Invertible over `Z` (determinant ±1).
    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs() == 1
    }
}

/// Fraction-free (Bareiss) determinant of a small integer matrix.
fn integer_determinant(m: &[i64], n: usize) -> i64 {
    let mut a: Vec<i128> = m.iter().map(|&v| v as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                Some(r) => {
                    for c in 0..n {
                        a.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    if n == 0 {
        1
    } else {
        (sign * a[n * n - 1]) as i64
    }
}

/// Any map usable as a network layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupMap {
    Hom(Homomorphism),
    Affine(AffineMap),
    Lattice(LatticeMap),
}

impl GroupMap {
    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        match self {
            GroupMap::Hom(h) => h.apply(x),
            GroupMap::Affine(a) => a.apply(x),
            GroupMap::Lattice(l) => l.apply(x),
        }
    }

    /// Linear part, when the map is over finite groups.
    pub fn linear_part(&self) -> Option<&Homomorphism> {
        match self {
            GroupMap::Hom(h) => Some(h),
            GroupMap::Affine(a) => Some(a.hom()),
            GroupMap::Lattice(_) => None,
        }
    }
}

impl From<Homomorphism> for GroupMap {
    fn from(h: Homomorphism) -> Self {
        GroupMap::Hom(h)
    }
}

impl From<AffineMap> for GroupMap {
    fn from(a: AffineMap) -> Self {
        GroupMap::Affine(a)
    }
}

impl From<LatticeMap> for GroupMap {
    fn from(l: LatticeMap) -> Self {
        GroupMap::Lattice(l)
    }
}

/// Wire form: `{source, target, matrix, shift?}` with groups as spec strings
/// (`"Z4xZ6"`, or `"Z^d"` for lattice maps).
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRecord {
    source: String,
    target: String,
    matrix: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift: Option<Vec<i64>>,
}

impl Serialize for GroupMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let record = match self {
            GroupMap::Hom(h) => MapRecord {
                source: h.source.to_string(),
                target: h.target.to_string(),
                matrix: h.matrix(),
                shift: None,
            },
            GroupMap::Affine(a) => MapRecord {
                source: a.hom.source.to_string(),
                target: a.hom.target.to_string(),
                matrix: a.hom.matrix(),
                shift: Some(a.shift.coords().to_vec()),
            },
            GroupMap::Lattice(l) => MapRecord {
                source: format!("Z^{}", l.dims),
                target: format!("Z^{}", l.dims),
                matrix: l.matrix(),
                shift: Some(l.shift.clone()),
            },
        };
        record.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = MapRecord::deserialize(deserializer)?;
        map_from_record(record).map_err(serde::de::Error::custom)
    }
}

fn parse_finite(spec: &str) -> Result<FiniteAbelianGroup> {
    match spec.parse::<crate::groups::Domain>()? {
        crate::groups::Domain::Finite(g) => Ok(g),
        other => Err(Error::Parse(format!("expected a finite group, got {other}"))),
    }
}

fn map_from_record(r: MapRecord) -> Result<GroupMap> {
    if r.source.starts_with("Z^") {
        return Ok(GroupMap::Lattice(LatticeMap::new(&r.matrix, r.shift.unwrap_or_default())?));
    }
    let source = parse_finite(&r.source)?;
    let target = parse_finite(&r.target)?;
    // trivial groups serialize with an empty matrix
    let matrix = if r.matrix.is_empty() && source.rank() > 0 {
        vec![Vec::new(); source.rank()]
    } else {
        r.matrix
    };
    let hom = Homomorphism::new(source, target.clone(), &matrix)?;
    match r.shift {
        None => Ok(GroupMap::Hom(hom)),
        Some(s) => {
            let shift = target.element(&s)?;
            if shift.coords() != s.as_slice() {
                return invalid(format!("shift {s:?} is not reduced in {target}"));
            }
            Ok(GroupMap::Affine(AffineMap::new(hom, shift)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    fn el(c: &[i64]) -> GroupElement {
        GroupElement::new(c.to_vec())
    }

    /// Exhaustive additivity: the independent check behind every validity
    /// example.
    fn additive(m: &[Vec<i64>], s: &FiniteAbelianGroup, t: &FiniteAbelianGroup) -> bool {
        let image = |x: &GroupElement| -> Vec<i64> {
            (0..t.rank())
                .map(|j| {
                    let v: i64 = (0..s.rank()).map(|i| x.coords()[i] * m[i][j]).sum();
                    v.rem_euclid(t.moduli()[j] as i64)
                })
                .collect()
        };
        s.elements().all(|x| {
            s.elements().all(|y| {
                let lhs = image(&s.add(&x, &y).unwrap());
                let rhs = t.add(&el(&image(&x)), &el(&image(&y))).unwrap();
                lhs == rhs.into_coords()
            })
        })
    }

    #[test]
    fn validate_examples() {
        let (z4, z6) = (g(&[4]), g(&[6]));
        assert!(validate_hom(&[vec![3]], &z4, &z6).unwrap());
        assert!(additive(&[vec![3]], &z4, &z6));
        assert!(!validate_hom(&[vec![1]], &z4, &z6).unwrap());
        assert!(!additive(&[vec![1]], &z4, &z6));
        let (a, b) = (g(&[2, 4]), g(&[6, 3]));
        assert!(validate_hom(&[vec![0, 0], vec![0, 0]], &a, &b).unwrap());
        assert!(validate_hom(&[vec![1]], &z4, &g(&[2, 2])).is_err());
    }

    #[test]
    fn validity_matches_additivity_exhaustively() {
        let groups = [g(&[2]), g(&[4]), g(&[6]), g(&[2, 2]), g(&[3])];
        for s in &groups {
            for t in &groups {
                if s.rank() != 1 || t.rank() != 1 {
                    continue;
                }
                for v in 0..t.moduli()[0] as i64 {
                    let m = vec![vec![v]];
                    assert_eq!(validate_hom(&m, s, t).unwrap(), additive(&m, s, t), "{s}->{t} {v}");
                }
            }
        }
    }

    #[test]
    fn apply_examples() {
        let z8 = g(&[8]);
        let triple = Homomorphism::multiplication(&z8, 3);
        assert_eq!(triple.apply(&el(&[5])).unwrap(), el(&[7]));
        let h = Homomorphism::new(g(&[4]), g(&[6]), &[vec![3]]).unwrap();
        assert_eq!(h.apply(&el(&[2])).unwrap(), el(&[0]));
        let z5 = g(&[5]);
        let aff = AffineMap::new(Homomorphism::multiplication(&z5, 2), el(&[1])).unwrap();
        assert_eq!(aff.apply(&el(&[3])).unwrap(), el(&[2]));
        assert!(triple.apply(&el(&[1, 0])).is_err());
        assert!(triple.apply(&el(&[8])).is_err());
    }

    #[test]
    fn compose_examples() {
        let z6 = g(&[6]);
        let two = Homomorphism::multiplication(&z6, 2);
        let three = Homomorphism::multiplication(&z6, 3);
        assert_eq!(two.compose(&three).unwrap(), Homomorphism::zero(&z6, &z6));
        assert_eq!(two.compose(&Homomorphism::identity(&z6)).unwrap(), two);
        let other = Homomorphism::identity(&g(&[4]));
        assert!(two.compose(&other).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let z8 = g(&[8]);
        assert!(Homomorphism::multiplication(&z8, 3).is_automorphism().unwrap());
        let two = Homomorphism::multiplication(&z8, 2);
        assert!(!two.is_automorphism().unwrap());
        assert!(two.kernel().contains(&el(&[4])));
        assert!(Homomorphism::identity(&g(&[2, 3])).is_automorphism().unwrap());
        let h = Homomorphism::new(g(&[4]), g(&[6]), &[vec![3]]).unwrap();
        assert!(h.is_automorphism().is_err());
    }

    #[test]
    fn dual_map_matches_character_composition() {
        // chi_c(phi(x)) = chi_{phi^(c)}(x) for every c and x
        let cases = [
            Homomorphism::new(g(&[4]), g(&[6]), &[vec![3]]).unwrap(),
            Homomorphism::new(g(&[2, 4]), g(&[4, 2]), &[vec![2, 1], vec![1, 0]]).unwrap(),
            Homomorphism::multiplication(&g(&[3, 9]), 4),
        ];
        for h in &cases {
            let d = h.dual();
            let (s, t) = (h.source(), h.target());
            for c in t.elements() {
                let dc = d.apply(&c).unwrap();
                for x in s.elements() {
                    let y = h.apply(&x).unwrap();
                    let lhs: f64 = c
                        .coords()
                        .iter()
                        .zip(y.coords())
                        .zip(t.moduli())
                        .map(|((&ci, &yi), &m)| (ci * yi) as f64 / m as f64)
                        .sum();
                    let rhs: f64 = dc
                        .coords()
                        .iter()
                        .zip(x.coords())
                        .zip(s.moduli())
                        .map(|((&ci, &xi), &m)| (ci * xi) as f64 / m as f64)
                        .sum();
                    let diff = (lhs - rhs).rem_euclid(1.0);
                    assert!(!(1e-12..=1.0 - 1e-12).contains(&diff), "{h}: c={c} x={x}");
                }
            }
        }
    }

    #[test]
    fn lattice_maps() {
        let m = LatticeMap::new(&[vec![1]], vec![-1]).unwrap();
        assert_eq!(m.apply(&el(&[-2])).unwrap(), el(&[-3]));
        let swap = LatticeMap::new(&[vec![0, 1], vec![1, 0]], vec![0, 0]).unwrap();
        assert_eq!(swap.determinant(), -1);
        assert!(swap.is_unimodular());
        let sing = LatticeMap::new(&[vec![1, 1], vec![1, 1]], vec![0, 0]).unwrap();
        assert_eq!(sing.determinant(), 0);
        let m3 = LatticeMap::new(&[vec![2, 1, 0], vec![1, 1, 1], vec![0, 1, 3]], vec![0; 3]).unwrap();
        assert_eq!(m3.determinant(), 2 * (3 - 1) - 3);
    }

    #[test]
    fn map_json_round_trip() {
        let maps: Vec<GroupMap> = vec![
            Homomorphism::new(g(&[4]), g(&[6]), &[vec![3]]).unwrap().into(),
            AffineMap::new(Homomorphism::multiplication(&g(&[5]), 2), el(&[1])).unwrap().into(),
            LatticeMap::new(&[vec![1]], vec![-1]).unwrap().into(),
            Homomorphism::identity(&FiniteAbelianGroup::trivial()).into(),
        ];
        for m in maps {
            let s = serde_json::to_string(&m).unwrap();
            let back: GroupMap = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        let s = serde_json::to_string(&maps_first()).unwrap();
        assert_eq!(s, r#"{"source":"Z4","target":"Z6","matrix":[[3]]}"#);
        let bad = r#"{"source":"Z4","target":"Z6","matrix":[[1]]}"#;
        assert!(serde_json::from_str::<GroupMap>(bad).is_err());
    }

    fn maps_first() -> GroupMap {
        Homomorphism::new(g(&[4]), g(&[6]), &[vec![3]]).unwrap().into()
    }
}
