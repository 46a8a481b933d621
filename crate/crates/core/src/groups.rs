//! Desk-scale locally compact Abelian groups.
//!
//! Three representations are provided:
//!
//! * [`FiniteAbelianGroup`]: a product `Z_{m_1} x ... x Z_{m_k}` kept in the
//!   presentation it was given (no Smith normal form), with a stored Haar
//!   normalization.
//! * [`SampledGroup`] of kind torus grid: the subgroup `(1/R) Z^d / Z^d` of the
//!   torus `T^d`, used as an equal-weight quadrature of the torus.
//! * [`SampledGroup`] of kind lattice window: the compact set `[-N, N]^d` inside
//!   `Z^d` with the lexicographic order attached. Sums that leave the window
//!   are reported as [`Error::OutOfWindow`], never wrapped.
//!
//! Elements are indexed in mixed-radix row-major order (last coordinate
//! fastest), which is also the order used by every serialized table.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Normalization of the Haar measure on a finite group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HaarMode {
    /// Every element has mass 1.
    Counting,
    /// Every element has mass `1/|G|`.
    #[default]
    Probability,
}

impl HaarMode {
    pub fn weight(self, order: u64) -> f64 {
        match self {
            HaarMode::Counting => 1.0,
            HaarMode::Probability => 1.0 / order as f64,
        }
    }
}

/// A group element given by its coordinates.
///
/// For finite groups and torus grids the coordinates are reduced; for lattice
/// windows they are raw integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElement(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(v: Vec<i64>) -> Self {
        GroupElement(v)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `Z_{m_1} x ... x Z_{m_k}` with a stored Haar normalization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    haar: HaarMode,
}

impl FiniteAbelianGroup {
    /// Builds a group from cyclic factor orders. Factors of order 1 are
    /// dropped; the empty list is the trivial group.
    pub fn new(moduli: &[i64]) -> Result<Self> {
        let mut kept = Vec::with_capacity(moduli.len());
        for &m in moduli {
            if m <= 0 {
                return invalid(format!("modulus must be positive, got {m}"));
            }
            if m > 1 {
                kept.push(m as u64);
            }
        }
        Ok(FiniteAbelianGroup { moduli: kept, haar: HaarMode::default() })
    }

    pub fn from_moduli(moduli: &[u64]) -> Result<Self> {
        let signed: Vec<i64> = moduli.iter().map(|&m| m as i64).collect();
        Self::new(&signed)
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { moduli: Vec::new(), haar: HaarMode::default() }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::from_moduli(&[n])
    }

    pub fn with_haar(mut self, mode: HaarMode) -> Self {
        self.haar = mode;
        self
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Number of cyclic factors in this presentation.
    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    /// Least common multiple of the moduli.
    pub fn exponent(&self) -> u64 {
        self.moduli.iter().fold(1, |acc, &m| lcm(acc, m))
    }

    pub fn haar_mode(&self) -> HaarMode {
        self.haar
    }

    /// Haar mass of a single element under the stored mode.
    pub fn haar_weight(&self) -> f64 {
        self.haar.weight(self.order())
    }

    /// True when both groups have the same moduli list, ignoring Haar mode.
    pub fn same_presentation(&self, other: &FiniteAbelianGroup) -> bool {
        self.moduli == other.moduli
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Reduces arbitrary integer coordinates into an element.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return invalid(format!(
                "element has {} coordinates, group {} has {}",
                coords.len(),
                self,
                self.rank()
            ));
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64))
                .collect(),
        ))
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.len() == self.rank()
            && x.0.iter().zip(&self.moduli).all(|(&c, &m)| c >= 0 && (c as u64) < m)
    }

    pub(crate) fn check(&self, x: &GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            invalid(format!("{x} is not a reduced element of {self}"))
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub(crate) fn add_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.moduli)
                .map(|((&x, &y), &m)| (x + y).rem_euclid(m as i64))
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub(crate) fn neg_unchecked(&self, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter().zip(&self.moduli).map(|(&x, &m)| (-x).rem_euclid(m as i64)).collect(),
        )
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// `k * x`.
    pub fn scale(&self, k: i64, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| ((c as i128 * k as i128).rem_euclid(m as i128)) as i64)
                .collect(),
        ))
    }

    /// Mixed-radix index, last coordinate fastest.
    pub fn index_of(&self, x: &GroupElement) -> Result<usize> {
        self.check(x)?;
        Ok(self.index_unchecked(x.coords()))
    }

    pub(crate) fn index_unchecked(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (&c, &m)| acc * m as usize + c as usize)
    }

    pub fn element_at(&self, index: usize) -> Result<GroupElement> {
        if index as u64 >= self.order() {
            return invalid(format!("index {index} out of range for {self}"));
        }
        let mut coords = vec![0i64; self.rank()];
        let mut rest = index;
        for (slot, &m) in coords.iter_mut().zip(&self.moduli).rev() {
            *slot = (rest % m as usize) as i64;
            rest /= m as usize;
        }
        Ok(GroupElement(coords))
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i).expect("index in range"))
    }

    /// `sum_x f(x) w(x)` under the stored Haar mode.
    pub fn haar_integrate<T: Scalar>(&self, f: impl Fn(&GroupElement) -> T) -> T {
        self.haar_integrate_with(self.haar, f)
    }

    pub fn haar_integrate_with<T: Scalar>(
        &self,
        mode: HaarMode,
        f: impl Fn(&GroupElement) -> T,
    ) -> T {
        let w = mode.weight(self.order());
        let mut acc = T::zero();
        for x in self.elements() {
            acc += f(&x);
        }
        acc * T::from_re(w)
    }

    /// Haar mass of a set (duplicates counted once).
    pub fn haar_measure(&self, set: &[GroupElement]) -> Result<f64> {
        let mut seen = HashSet::with_capacity(set.len());
        for x in set {
            self.check(x)?;
            seen.insert(x);
        }
        Ok(seen.len() as f64 * self.haar_weight())
    }

    /// Checks `m(B) = m(g + B)` for the stored Haar mode.
    pub fn check_haar_invariance(&self, set: &[GroupElement], g: &GroupElement) -> Result<bool> {
        self.check(g)?;
        let n = self.order() as usize;
        let (mut before, mut after) = (vec![false; n], vec![false; n]);
        let (mut count_before, mut count_after) = (0usize, 0usize);
        let mut moved = vec![0i64; self.rank()];
        for b in set {
            self.check(b)?;
            for ((slot, (&x, &y)), &m) in moved.iter_mut().zip(b.0.iter().zip(&g.0)).zip(&self.moduli) {
                *slot = (x + y).rem_euclid(m as i64);
            }
            count_before += !std::mem::replace(&mut before[self.index_unchecked(&b.0)], true) as usize;
            count_after += !std::mem::replace(&mut after[self.index_unchecked(&moved)], true) as usize;
        }
        let w = self.haar_weight();
        Ok(count_before as f64 * w == count_after as f64 * w)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "Z1");
        }
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "Z{m}")?;
        }
        Ok(())
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledKind {
    TorusGrid,
    LatticeWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Quadrature,
}

/// A finite point set standing in for an infinite LCA group: a torus grid or a
/// lattice window.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGroup {
    kind: SampledKind,
    dims: usize,
    /// Resolution `R` for torus grids, radius `N` for lattice windows.
    size: u64,
    points: Vec<GroupElement>,
    weights: Vec<f64>,
    exactness: Exactness,
}

impl SampledGroup {
    /// Grid `{(j_1/R, ..., j_d/R)}` on `T^d`; point `j` is stored as the integer
    /// tuple `j`. Every weight is `1/R^d`.
    pub fn torus_grid(dims: usize, resolution: u64) -> Result<Self> {
        if dims == 0 || resolution < 2 {
            return invalid("torus grid needs dims >= 1 and resolution >= 2");
        }
        let group = FiniteAbelianGroup::from_moduli(&vec![resolution; dims])?;
        let count = resolution.checked_pow(dims as u32).ok_or_else(|| {
            Error::ResourceExhausted(format!("torus grid T{dims}@{resolution} is too large"))
        })?;
        let points: Vec<GroupElement> = group.elements().collect();
        let w = 1.0 / count as f64;
        Ok(SampledGroup {
            kind: SampledKind::TorusGrid,
            dims,
            size: resolution,
            weights: vec![w; points.len()],
            points,
            exactness: Exactness::Quadrature,
        })
    }

    /// Window `[-N, N]^d` in `Z^d`, listed in ascending lexicographic order,
    /// with counting weights.
    pub fn lattice_window(dims: usize, radius: u64) -> Result<Self> {
        if dims == 0 {
            return invalid("lattice window needs dims >= 1");
        }
        let side = 2 * radius + 1;
        let count = side.checked_pow(dims as u32).ok_or_else(|| {
            Error::ResourceExhausted(format!("lattice window W{dims}@{radius} is too large"))
        })?;
        let r = radius as i64;
        let mut points = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let mut coords = vec![0i64; dims];
            let mut rest = idx;
            for slot in coords.iter_mut().rev() {
                *slot = (rest % side) as i64 - r;
                rest /= side;
            }
            points.push(GroupElement(coords));
        }
        Ok(SampledGroup {
            kind: SampledKind::LatticeWindow,
            dims,
            size: radius,
            weights: vec![1.0; points.len()],
            points,
            exactness: Exactness::Exact,
        })
    }

    pub fn kind(&self) -> SampledKind {
        self.kind
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Torus resolution or window radius.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The finite group `Z_R^d` underlying a torus grid.
    pub fn torus_group(&self) -> Option<FiniteAbelianGroup> {
        match self.kind {
            SampledKind::TorusGrid => {
                FiniteAbelianGroup::from_moduli(&vec![self.size; self.dims]).ok()
            }
            SampledKind::LatticeWindow => None,
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        if x.len() != self.dims {
            return false;
        }
        match self.kind {
            SampledKind::TorusGrid => x.0.iter().all(|&c| c >= 0 && (c as u64) < self.size),
            SampledKind::LatticeWindow => x.0.iter().all(|&c| c.unsigned_abs() <= self.size),
        }
    }

    pub fn index_of(&self, x: &GroupElement) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let (side, offset) = match self.kind {
            SampledKind::TorusGrid => (self.size as usize, 0i64),
            SampledKind::LatticeWindow => (2 * self.size as usize + 1, self.size as i64),
        };
        Some(x.0.iter().fold(0usize, |acc, &c| acc * side + (c + offset) as usize))
    }

    /// Torus grids wrap; windows report sums that leave `[-N, N]^d`.
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        for x in [a, b] {
            if !self.contains(x) {
                return invalid(format!("{x} is not a point of {}", Domain::Sampled(self.clone())));
            }
        }
        let sum: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        match self.kind {
            SampledKind::TorusGrid => Ok(GroupElement(
                sum.into_iter().map(|c| c.rem_euclid(self.size as i64)).collect(),
            )),
            SampledKind::LatticeWindow => {
                let s = GroupElement(sum);
                if self.contains(&s) {
                    Ok(s)
                } else {
                    Err(Error::OutOfWindow(format!(
                        "{a} + {b} = {s} leaves the window of radius {}",
                        self.size
                    )))
                }
            }
        }
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        if !self.contains(a) {
            return invalid(format!("{a} is not a point of this sampled group"));
        }
        Ok(match self.kind {
            SampledKind::TorusGrid => {
                GroupElement(a.0.iter().map(|&c| (-c).rem_euclid(self.size as i64)).collect())
            }
            SampledKind::LatticeWindow => GroupElement(a.0.iter().map(|&c| -c).collect()),
        })
    }

    /// Lexicographic order on a lattice window; `None` on torus grids, which
    /// carry no compatible order.
    pub fn compare(&self, a: &GroupElement, b: &GroupElement) -> Option<Ordering> {
        match self.kind {
            SampledKind::LatticeWindow => Some(lex_cmp(a, b)),
            SampledKind::TorusGrid => None,
        }
    }

    /// `sum_x f(x) w(x)` with the stored quadrature weights.
    pub fn haar_integrate<T: Scalar>(&self, f: impl Fn(&GroupElement) -> T) -> T {
        let mut acc = T::zero();
        for (x, &w) in self.points.iter().zip(&self.weights) {
            acc += f(x) * T::from_re(w);
        }
        acc
    }

    /// Total weight, computed as `count / R^d` for torus grids so that it is
    /// exactly one.
    pub fn total_mass(&self) -> f64 {
        match self.kind {
            SampledKind::TorusGrid => {
                self.points.len() as f64 / (self.size as f64).powi(self.dims as i32)
            }
            SampledKind::LatticeWindow => self.points.len() as f64,
        }
    }
}

/// Lexicographic order on integer tuples (first coordinate most significant).
pub fn lex_cmp(a: &GroupElement, b: &GroupElement) -> Ordering {
    a.0.cmp(&b.0)
}

/// The space on which an activation reads its argument: the target of the
/// maps feeding it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Finite group, coordinate `x_j` embedded as `x_j / m_j`.
    Finite { moduli: Vec<u64> },
    /// Torus grid, coordinate embedded as the angle `2 pi x_j / R`.
    Torus { dims: usize, resolution: u64 },
    /// The lattice `Z^d`, coordinates read raw; lexicographically ordered.
    Lattice { dims: usize },
}

impl Space {
    pub fn dims(&self) -> usize {
        match self {
            Space::Finite { moduli } => moduli.len(),
            Space::Torus { dims, .. } | Space::Lattice { dims } => *dims,
        }
    }

    /// Real embedding of coordinate `j`.
    pub fn embed(&self, j: usize, value: i64) -> f64 {
        match self {
            Space::Finite { moduli } => value as f64 / moduli[j] as f64,
            Space::Torus { resolution, .. } => {
                2.0 * std::f64::consts::PI * value as f64 / *resolution as f64
            }
            Space::Lattice { .. } => value as f64,
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, Space::Lattice { .. })
    }

    /// Cyclic moduli for finite and torus spaces.
    pub fn moduli(&self) -> Option<Vec<u64>> {
        match self {
            Space::Finite { moduli } => Some(moduli.clone()),
            Space::Torus { dims, resolution } => Some(vec![*resolution; *dims]),
            Space::Lattice { .. } => None,
        }
    }

    pub fn order(&self) -> Option<u64> {
        self.moduli().map(|m| m.iter().product())
    }

    /// Mixed-radix index of a point of a finite or torus space.
    pub fn index_of(&self, x: &GroupElement) -> Option<usize> {
        let moduli = self.moduli()?;
        if x.len() != moduli.len() {
            return None;
        }
        let mut acc = 0usize;
        for (&c, &m) in x.coords().iter().zip(&moduli) {
            if c < 0 || c as u64 >= m {
                return None;
            }
            acc = acc * m as usize + c as usize;
        }
        Some(acc)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Finite { moduli } => {
                let g = FiniteAbelianGroup::from_moduli(moduli).map_err(|_| fmt::Error)?;
                write!(f, "{g}")
            }
            Space::Torus { dims, resolution } => write!(f, "T{dims}@{resolution}"),
            Space::Lattice { dims } => write!(f, "Z^{dims}"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(d) = s.strip_prefix("Z^") {
            let dims = parse_uint(d, s)? as usize;
            return Ok(Space::Lattice { dims });
        }
        Ok(Domain::from_str(s)?.space())
    }
}

/// Any desk-scale group a dictionary can be built over.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Finite(FiniteAbelianGroup),
    Sampled(SampledGroup),
}

impl Domain {
    pub fn parse(spec: &str) -> Result<Self> {
        spec.parse()
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Finite(g) => g.order() as usize,
            Domain::Sampled(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<GroupElement> {
        match self {
            Domain::Finite(g) => g.elements().collect(),
            Domain::Sampled(s) => s.points().to_vec(),
        }
    }

    /// Haar weight of each point, aligned with [`Domain::points`].
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Domain::Finite(g) => vec![g.haar_weight(); g.order() as usize],
            Domain::Sampled(s) => s.weights().to_vec(),
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        match self {
            Domain::Finite(g) => g.contains(x),
            Domain::Sampled(s) => s.contains(x),
        }
    }

    pub fn index_of(&self, x: &GroupElement) -> Option<usize> {
        match self {
            Domain::Finite(g) => g.contains(x).then(|| g.index_unchecked(x.coords())),
            Domain::Sampled(s) => s.index_of(x),
        }
    }

    /// How an activation reads points of this domain.
    pub fn space(&self) -> Space {
        match self {
            Domain::Finite(g) => Space::Finite { moduli: g.moduli().to_vec() },
            Domain::Sampled(s) => match s.kind() {
                SampledKind::TorusGrid => Space::Torus { dims: s.dims(), resolution: s.size() },
                SampledKind::LatticeWindow => Space::Lattice { dims: s.dims() },
            },
        }
    }

    /// The finite group structure, when the domain has one (finite groups
    /// and torus grids).
    pub fn finite_group(&self) -> Option<FiniteAbelianGroup> {
        match self {
            Domain::Finite(g) => Some(g.clone()),
            Domain::Sampled(s) => s.torus_group(),
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        match self {
            Domain::Finite(g) => g.add(a, b),
            Domain::Sampled(s) => s.add(a, b),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        match self {
            Domain::Finite(g) => g.neg(a),
            Domain::Sampled(s) => s.neg(a),
        }
    }

    pub fn haar_integrate<T: Scalar>(&self, f: impl Fn(&GroupElement) -> T) -> T {
        match self {
            Domain::Finite(g) => g.haar_integrate(f),
            Domain::Sampled(s) => s.haar_integrate(f),
        }
    }
}

impl From<FiniteAbelianGroup> for Domain {
    fn from(g: FiniteAbelianGroup) -> Self {
        Domain::Finite(g)
    }
}

impl From<SampledGroup> for Domain {
    fn from(s: SampledGroup) -> Self {
        Domain::Sampled(s)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Finite(g) => write!(f, "{g}"),
            Domain::Sampled(s) => match s.kind() {
                SampledKind::TorusGrid => write!(f, "T{}@{}", s.dims(), s.size()),
                SampledKind::LatticeWindow => write!(f, "W{}@{}", s.dims(), s.size()),
            },
        }
    }
}

fn parse_uint(text: &str, whole: &str) -> Result<u64> {
    text.trim()
        .parse::<u64>()
        .map_err(|_| Error::Parse(format!("bad integer {text:?} in group spec {whole:?}")))
}

/// Group spec grammar:
///
/// ```text
/// spec   := finite | torus | window
/// finite := "Z" n ("x" "Z" n)*      e.g. Z4xZ6, Z1 (trivial)
/// torus  := "T" d "@" R             e.g. T1@64
/// window := "W" d "@" N             e.g. W2@5
/// ```
impl FromStr for Domain {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let sampled = |rest: &str| -> Result<(usize, u64)> {
            let (d, r) = rest
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("expected <dims>@<size> in {spec:?}")))?;
            Ok((parse_uint(d, spec)? as usize, parse_uint(r, spec)?))
        };
        if let Some(rest) = s.strip_prefix('T') {
            let (d, r) = sampled(rest)?;
            return Ok(Domain::Sampled(SampledGroup::torus_grid(d, r)?));
        }
        if let Some(rest) = s.strip_prefix('W') {
            let (d, n) = sampled(rest)?;
            return Ok(Domain::Sampled(SampledGroup::lattice_window(d, n)?));
        }
        if s.is_empty() {
            return Err(Error::Parse("empty group spec".into()));
        }
        let mut moduli = Vec::new();
        for factor in s.split(['x', 'X']) {
            let n = factor
                .trim()
                .strip_prefix('Z')
                .ok_or_else(|| Error::Parse(format!("expected Z<n> factors in {spec:?}")))?;
            let m = parse_uint(n, spec)?;
            moduli.push(m as i64);
        }
        Ok(Domain::Finite(FiniteAbelianGroup::new(&moduli)?))
    }
}

/// Expands a comma-separated list of group specs; `Za..Zb` expands to the
/// cyclic groups of orders `a..=b`.
pub fn parse_group_list(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo = parse_uint(lo.trim().trim_start_matches('Z'), item)?;
            let hi = parse_uint(hi.trim().trim_start_matches('Z'), item)?;
            if lo == 0 || lo > hi {
                return Err(Error::Parse(format!("bad cyclic range {item:?}")));
            }
            out.extend((lo..=hi).map(|n| format!("Z{n}")));
        } else {
            Domain::from_str(item)?;
            out.push(item.to_string());
        }
    }
    Ok(out)
}

/// Every non-decreasing list of moduli `>= 2` with product at most
/// `max_order`, including the empty list. Ordered by product, then
/// lexicographically.
pub fn all_moduli_lists(max_order: u64) -> Vec<Vec<u64>> {
    fn rec(min: u64, budget: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(current.clone());
        let mut m = min;
        while m <= budget {
            current.push(m);
            rec(m, budget / m, current, out);
            current.pop();
            m += 1;
        }
    }
    let mut out = Vec::new();
    if max_order >= 1 {
        rec(2, max_order, &mut Vec::new(), &mut out);
    }
    out.sort_by(|a, b| {
        let pa: u64 = a.iter().product();
        let pb: u64 = b.iter().product();
        pa.cmp(&pb).then_with(|| a.cmp(b))
    });
    out
}

/// Every ordered list of moduli `>= 2` with product at most `max_order`.
pub fn ordered_moduli_lists(max_order: u64) -> Vec<Vec<u64>> {
    fn rec(budget: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(current.clone());
        for m in 2..=budget {
            current.push(m);
            rec(budget / m, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if max_order >= 1 {
        rec(max_order, &mut Vec::new(), &mut out);
    }
    out
}

/// A signed (or complex) measure on the points of a domain.
///
/// `components > 1` gives an `R^d`-valued measure, stored point-major
/// (`mass[x * components + c]`), pairing with vector-valued functions.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure<T = f64> {
    domain: Domain,
    components: usize,
    mass: Vec<T>,
}

impl<T: Scalar> SignedMeasure<T> {
    pub fn new(domain: Domain, mass: Vec<T>) -> Result<Self> {
        Self::with_components(domain, 1, mass)
    }

    pub fn with_components(domain: Domain, components: usize, mass: Vec<T>) -> Result<Self> {
        if components == 0 || mass.len() != domain.len() * components {
            return invalid(format!(
                "measure has {} entries, domain {} needs {}",
                mass.len(),
                domain,
                domain.len() * components
            ));
        }
        Ok(SignedMeasure { domain, components, mass })
    }

    pub fn zero(domain: Domain) -> Self {
        let n = domain.len();
        SignedMeasure { domain, components: 1, mass: vec![T::zero(); n] }
    }

    /// Unit point mass at `x`.
    pub fn dirac(domain: Domain, x: &GroupElement) -> Result<Self> {
        let idx = domain
            .index_of(x)
            .ok_or_else(|| Error::InvalidArgument(format!("{x} is not in {domain}")))?;
        let mut m = Self::zero(domain);
        m.mass[idx] = T::one();
        Ok(m)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<T> {
        self.mass
    }

    pub fn total_variation(&self) -> f64 {
        self.mass.iter().map(|m| m.abs_val()).sum()
    }

    pub fn total_mass(&self) -> T {
        let mut acc = T::zero();
        for &m in &self.mass {
            acc += m;
        }
        acc
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.mass.iter().all(|m| m.abs_val() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(c: &[i64]) -> GroupElement {
        GroupElement::new(c.to_vec())
    }

    #[test]
    fn make_group_orders() {
        assert_eq!(FiniteAbelianGroup::new(&[2, 4]).unwrap().order(), 8);
        let g = FiniteAbelianGroup::new(&[1, 3]).unwrap();
        assert_eq!(g.moduli(), &[3]);
        assert_eq!(g.order(), 3);
        let t = FiniteAbelianGroup::new(&[]).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(FiniteAbelianGroup::new(&[6]).unwrap().order(), 6);
    }

    #[test]
    fn make_group_rejects_non_positive() {
        assert!(matches!(FiniteAbelianGroup::new(&[0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(FiniteAbelianGroup::new(&[3, -2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn add_and_neg() {
        let z4 = FiniteAbelianGroup::new(&[4]).unwrap();
        assert_eq!(z4.add(&el(&[3]), &el(&[2])).unwrap(), el(&[1]));
        let g = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        assert_eq!(g.add(&el(&[1, 2]), &el(&[1, 2])).unwrap(), el(&[0, 1]));
        assert_eq!(g.neg(&el(&[1, 2])).unwrap(), el(&[1, 1]));
        assert!(g.add(&el(&[1]), &el(&[1, 2])).is_err());
        assert!(g.add(&el(&[2, 0]), &el(&[1, 2])).is_err());
    }

    #[test]
    fn group_axioms_exhaustive_small() {
        for moduli in all_moduli_lists(64) {
            let g = FiniteAbelianGroup::from_moduli(&moduli).unwrap();
            let elems: Vec<_> = g.elements().collect();
            let e = g.identity();
            // triples only on the smaller groups to keep this unit test quick
            let triples = g.order() <= 16;
            for a in &elems {
                assert_eq!(g.add(a, &e).unwrap(), *a);
                assert_eq!(g.add(a, &g.neg(a).unwrap()).unwrap(), e);
                for b in &elems {
                    let ab = g.add(a, b).unwrap();
                    assert_eq!(ab, g.add(b, a).unwrap());
                    if triples {
                        for c in &elems {
                            assert_eq!(
                                g.add(&ab, c).unwrap(),
                                g.add(a, &g.add(b, c).unwrap()).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let g = FiniteAbelianGroup::new(&[2, 3, 4]).unwrap();
        for (i, x) in g.elements().enumerate() {
            assert_eq!(g.index_of(&x).unwrap(), i);
        }
        assert_eq!(g.element_at(5).unwrap(), el(&[0, 1, 1]));
    }

    #[test]
    fn haar_integrals() {
        let z6 = FiniteAbelianGroup::new(&[6]).unwrap();
        let one = |_: &GroupElement| 1.0f64;
        assert_eq!(z6.clone().with_haar(HaarMode::Counting).haar_integrate(one), 6.0);
        assert_eq!(z6.with_haar(HaarMode::Probability).haar_integrate(one), 1.0);
        let torus = SampledGroup::torus_grid(1, 8).unwrap();
        let delta0 = |x: &GroupElement| if x.coords()[0] == 0 { 1.0 } else { 0.0 };
        assert_eq!(torus.haar_integrate(delta0), 0.125);
    }

    #[test]
    fn haar_invariance_examples() {
        let z3 = FiniteAbelianGroup::new(&[3]).unwrap().with_haar(HaarMode::Counting);
        assert!(z3.check_haar_invariance(&[el(&[1]), el(&[2])], &el(&[1])).unwrap());
        let k4 = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        for g in k4.elements() {
            assert!(k4.check_haar_invariance(&[el(&[0, 0])], &g).unwrap());
        }
    }

    #[test]
    fn torus_weights_sum_to_one() {
        for (d, r) in [(1, 8), (2, 4), (1, 64), (3, 2)] {
            let t = SampledGroup::torus_grid(d, r).unwrap();
            assert_eq!(t.weights().iter().sum::<f64>(), 1.0);
            assert_eq!(t.total_mass(), 1.0);
        }
        for (d, r) in [(1, 3), (2, 5), (1, 7)] {
            let t = SampledGroup::torus_grid(d, r).unwrap();
            assert_eq!(t.total_mass(), 1.0);
            assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let p = r as f64;
            assert!(t.points().iter().all(|x| x.coords().iter().all(|&c| (c as f64) / p < 1.0)));
        }
    }

    #[test]
    fn window_flags_overflow() {
        let w = SampledGroup::lattice_window(1, 2).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.add(&el(&[1]), &el(&[1])).unwrap(), el(&[2]));
        assert!(matches!(w.add(&el(&[2]), &el(&[1])), Err(Error::OutOfWindow(_))));
        assert_eq!(w.neg(&el(&[-2])).unwrap(), el(&[2]));
    }

    #[test]
    fn window_order_compatible_with_addition() {
        let w = SampledGroup::lattice_window(2, 2).unwrap();
        let pts = w.points().to_vec();
        for pair in pts.windows(2) {
            assert_eq!(w.compare(&pair[0], &pair[1]), Some(Ordering::Less));
        }
        for a in &pts {
            for b in &pts {
                if w.compare(a, b) != Some(Ordering::Less) {
                    continue;
                }
                for c in &pts {
                    if let (Ok(ac), Ok(bc)) = (w.add(a, c), w.add(b, c)) {
                        assert_eq!(w.compare(&ac, &bc), Some(Ordering::Less));
                    }
                }
            }
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["Z4xZ6", "T1@64", "W2@5", "Z1", "Z2xZ2xZ3"] {
            let d: Domain = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        let d: Domain = "Z1xZ3".parse().unwrap();
        assert_eq!(d.to_string(), "Z3");
        assert!("Q4".parse::<Domain>().is_err());
        assert!("T1".parse::<Domain>().is_err());
        assert!("Z0".parse::<Domain>().is_err());
        let s: Space = "Z^2".parse().unwrap();
        assert_eq!(s, Space::Lattice { dims: 2 });
        assert_eq!(s.to_string(), "Z^2");
    }

    #[test]
    fn group_list_ranges() {
        let l = parse_group_list("Z2..Z4, Z2xZ2").unwrap();
        assert_eq!(l, vec!["Z2", "Z3", "Z4", "Z2xZ2"]);
    }

    #[test]
    fn moduli_list_enumeration() {
        let lists = all_moduli_lists(8);
        assert_eq!(lists[0], Vec::<u64>::new());
        assert!(lists.contains(&vec![2, 2, 2]));
        assert!(lists.contains(&vec![2, 4]));
        assert!(!lists.contains(&vec![4, 2]));
        assert!(ordered_moduli_lists(8).contains(&vec![4, 2]));
        assert!(lists.iter().all(|l| l.iter().product::<u64>() <= 8));
    }

    #[test]
    fn measures() {
        let d = Domain::Finite(FiniteAbelianGroup::new(&[4]).unwrap());
        let m = SignedMeasure::<f64>::new(d.clone(), vec![1.0, -2.0, 0.5, 0.0]).unwrap();
        assert_eq!(m.total_variation(), 3.5);
        assert_eq!(m.total_mass(), -0.5);
        assert!(SignedMeasure::<f64>::new(d.clone(), vec![1.0]).is_err());
        let delta = SignedMeasure::<f64>::dirac(d, &el(&[2])).unwrap();
        assert_eq!(delta.mass(), &[0.0, 0.0, 1.0, 0.0]);
    }
}
