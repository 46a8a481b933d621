//! Characters, the dual group, Fourier transforms, convolution and
//! pushforward measures on finite Abelian groups.
//!
//! The dual group of `Z_{m_1} x ... x Z_{m_k}` is presented with the same
//! moduli; `c` pairs with `x` through `chi_c(x) = exp(2 pi i sum_j c_j x_j / m_j)`.
//!
//! Normalization: with Haar weight `w` (1 for counting, `1/|G|` for
//! probability),
//!
//! * forward: `F(c) = sum_x f(x) conj(chi_c(x)) w`
//! * inverse: `f(x) = kappa sum_c F(c) chi_c(x)` with `kappa = 1 / (|G| w)`
//!
//! so `kappa = 1` under probability Haar (counting measure on the dual) and
//! `kappa = 1/|G|` under counting Haar. Convolution
//! `(f * g)(x) = sum_y f(x - y) g(y) w` satisfies `(f * g)^ = f^ g^` in both
//! modes. Sums run in mixed-radix index order.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::groups::{Domain, FiniteAbelianGroup, GroupElement, SignedMeasure};
use crate::homs::{GroupMap, Homomorphism};
use crate::scalar::Scalar;

/// An element of the dual group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    moduli: Vec<u64>,
    dual_coords: Vec<i64>,
}

impl Character {
    pub fn new(group: &FiniteAbelianGroup, dual_coords: &[i64]) -> Result<Self> {
        let reduced = group.element(dual_coords)?;
        Ok(Character { moduli: group.moduli().to_vec(), dual_coords: reduced.into_coords() })
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Character { moduli: group.moduli().to_vec(), dual_coords: vec![0; group.rank()] }
    }

    pub fn dual_coords(&self) -> &[i64] {
        &self.dual_coords
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }
}

/// `chi_c(x)`, computed from the exact phase `sum_j c_j x_j L / m_j mod L`
/// with `L` the exponent.
pub fn character_eval(c: &Character, x: &GroupElement) -> Result<Complex64> {
    if x.len() != c.moduli.len() {
        return invalid(format!(
            "character on {} coordinates applied to element {x}",
            c.moduli.len()
        ));
    }
    let l = c.moduli.iter().fold(1u64, |acc, &m| crate::groups::lcm(acc, m));
    Ok(root_of_unity(pairing(&c.moduli, l, &c.dual_coords, x.coords()), l))
}

/// Exact pairing numerator: `sum_j c_j x_j (L / m_j) mod L`.
fn pairing(moduli: &[u64], l: u64, c: &[i64], x: &[i64]) -> u64 {
    let l = l as i128;
    let mut acc: i128 = 0;
    for ((&m, &cj), &xj) in moduli.iter().zip(c).zip(x) {
        let cj = (cj as i128).rem_euclid(m as i128);
        let xj = (xj as i128).rem_euclid(m as i128);
        acc = (acc + cj * xj % m as i128 * (l / m as i128)) % l;
    }
    acc as u64
}

fn root_of_unity(k: u64, l: u64) -> Complex64 {
    let (s, c) = (2.0 * PI * k as f64 / l as f64).sin_cos();
    Complex64::new(c, s)
}

/// Phase table: `phase[c * n + x]` is the exact numerator of the pairing,
/// together with the `L`-th roots of unity.
struct PhaseTable {
    n: usize,
    phase: Vec<u32>,
    roots: Vec<Complex64>,
}

impl PhaseTable {
    fn new(group: &FiniteAbelianGroup) -> Self {
        let n = group.order() as usize;
        let l = group.exponent();
        let elems: Vec<GroupElement> = group.elements().collect();
        let mut phase = Vec::with_capacity(n * n);
        for c in &elems {
            for x in &elems {
                phase.push(pairing(group.moduli(), l, c.coords(), x.coords()) as u32);
            }
        }
        let roots = (0..l).map(|k| root_of_unity(k, l)).collect();
        PhaseTable { n, phase, roots }
    }

    fn chi(&self, c: usize, x: usize) -> Complex64 {
        self.roots[self.phase[c * self.n + x] as usize]
    }
}

/// Values of a transform, one per dual element in mixed-radix order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl SpectrumTable {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() as u64 != group.order() {
            return invalid(format!("spectrum of length {} on group {group}", values.len()));
        }
        Ok(SpectrumTable { group, values })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, c: &Character) -> Result<Complex64> {
        let idx = self.group.index_of(&GroupElement::new(c.dual_coords.clone()))?;
        Ok(self.values[idx])
    }

    /// Pointwise product, the spectral side of convolution.
    pub fn pointwise_mul(&self, other: &SpectrumTable) -> Result<SpectrumTable> {
        if !self.group.same_presentation(&other.group) {
            return invalid(format!("spectra on {} and {}", self.group, other.group));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SpectrumTable { group: self.group.clone(), values })
    }

    pub fn max_abs_diff(&self, other: &SpectrumTable) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    /// Number of entries with modulus above `threshold`.
    pub fn support_size(&self, threshold: f64) -> usize {
        self.values.iter().filter(|v| v.norm() > threshold).count()
    }
}

impl Serialize for SpectrumTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check_len(group: &FiniteAbelianGroup, len: usize, what: &str) -> Result<()> {
    if len as u64 != group.order() {
        return invalid(format!("{what} has {len} values, group {group} has order {}", group.order()));
    }
    Ok(())
}

pub fn fourier_transform<T: Scalar>(group: &FiniteAbelianGroup, f: &[T]) -> Result<SpectrumTable> {
    check_len(group, f.len(), "function table")?;
    let table = PhaseTable::new(group);
    let w = group.haar_weight();
    let n = table.n;
    let values = (0..n)
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, fx) in f.iter().enumerate() {
                acc += fx.to_complex() * table.chi(c, x).conj();
            }
            acc * w
        })
        .collect();
    Ok(SpectrumTable { group: group.clone(), values })
}

pub fn inverse_fourier(spectrum: &SpectrumTable) -> Vec<Complex64> {
    let group = &spectrum.group;
    let table = PhaseTable::new(group);
    let kappa = 1.0 / (group.order() as f64 * group.haar_weight());
    (0..table.n)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, fc) in spectrum.values.iter().enumerate() {
                acc += fc * table.chi(c, x);
            }
            acc * kappa
        })
        .collect()
}

pub fn convolve<T: Scalar>(group: &FiniteAbelianGroup, f: &[T], g: &[T]) -> Result<Vec<T>> {
    check_len(group, f.len(), "first factor")?;
    check_len(group, g.len(), "second factor")?;
    let w = T::from_re(group.haar_weight());
    let elems: Vec<GroupElement> = group.elements().collect();
    Ok(elems
        .iter()
        .map(|x| {
            let mut acc = T::zero();
            for (y, gy) in elems.iter().zip(g) {
                let d = group.add_unchecked(x, &group.neg_unchecked(y));
                acc += f[group.index_unchecked(d.coords())] * *gy * w;
            }
            acc
        })
        .collect())
}

/// Image measure `sigma_phi(B) = sigma(phi^{-1}(B))` on the target group.
pub fn pushforward<T: Scalar>(sigma: &SignedMeasure<T>, phi: &GroupMap) -> Result<SignedMeasure<T>> {
    let source = match sigma.domain() {
        Domain::Finite(g) => g,
        other => return invalid(format!("pushforward needs a finite group, got {other}")),
    };
    let h = phi
        .linear_part()
        .ok_or_else(|| Error::InvalidArgument("pushforward needs a homomorphism or affine map".into()))?;
    if !h.source().same_presentation(source) {
        return invalid(format!("map with source {} applied to measure on {source}", h.source()));
    }
    let target = h.target().clone().with_haar(source.haar_mode());
    let d = sigma.components();
    let mut mass = vec![T::zero(); target.order() as usize * d];
    for (i, x) in source.elements().enumerate() {
        let t = target.index_unchecked(phi.apply(&x)?.coords());
        for k in 0..d {
            mass[t * d + k] += sigma.mass()[i * d + k];
        }
    }
    SignedMeasure::with_components(Domain::Finite(target), d, mass)
}

/// Transform of a measure: `sigma^(c) = sum_x sigma(x) conj(chi_c(x))`.
pub fn measure_transform<T: Scalar>(sigma: &SignedMeasure<T>) -> Result<SpectrumTable> {
    let group = match sigma.domain() {
        Domain::Finite(g) => g,
        other => return invalid(format!("measure transform needs a finite group, got {other}")),
    };
    if sigma.components() != 1 {
        return invalid("measure transform needs a scalar measure");
    }
    let counting = group.clone().with_haar(crate::groups::HaarMode::Counting);
    let spec = fourier_transform(&counting, sigma.mass())?;
    SpectrumTable::new(group.clone(), spec.values)
}

/// Exhaustive check that `x -> (c -> chi_c(x))` is an isomorphism onto the
/// double dual.
///
/// Double-dual elements are additive maps from the dual into `Z_L`, `L` the
/// exponent. Each candidate is fixed by its values on the standard
/// generators of the dual, each value additive on its generator's cyclic
/// subgroup, and kept only if additive against every generator step.
pub fn verify_double_dual(group: &FiniteAbelianGroup, budget: usize) -> Result<bool> {
    let n = group.order() as usize;
    if n > budget {
        return Err(Error::ResourceExhausted(format!(
            "double dual of {group} needs {n} evaluations, budget {budget}"
        )));
    }
    let l = group.exponent();
    let moduli = group.moduli();
    let k = moduli.len();
    let dual: Vec<GroupElement> = group.elements().collect();
    // Additivity against each generator implies additivity everywhere.
    let step_index: Vec<usize> = dual
        .iter()
        .flat_map(|a| (0..k).map(move |i| (a, i)))
        .map(|(a, i)| {
            let mut c = a.coords().to_vec();
            c[i] = (c[i] + 1) % moduli[i] as i64;
            group.index_unchecked(&c)
        })
        .collect();
    let generator_index: Vec<usize> = (0..k)
        .map(|i| {
            let mut c = vec![0i64; k];
            c[i] = 1 % moduli[i] as i64;
            group.index_unchecked(&c)
        })
        .collect();
    let additive_table = |table: &[u64]| {
        (0..n).all(|a| (0..k).all(|i| (table[a] + table[generator_index[i]]) % l == table[step_index[a * k + i]]))
    };

    // Values a generator may take: additive on its own cyclic subgroup.
    let allowed: Vec<Vec<u64>> = moduli
        .iter()
        .map(|&m| {
            (0..l)
                .filter(|&t| (0..m).all(|a| (0..m).all(|b| (a * t + b * t) % l == ((a + b) % m) * t % l)))
                .collect()
        })
        .collect();

    // Additive maps dual -> Z_L as value tables.
    let mut double_dual: HashSet<Vec<u64>> = HashSet::new();
    let mut pick = vec![0usize; k];
    'candidates: loop {
        let table: Vec<u64> = dual
            .iter()
            .map(|c| {
                c.coords()
                    .iter()
                    .zip(&pick)
                    .zip(&allowed)
                    .fold(0u64, |acc, ((&cj, &p), vals)| (acc + cj as u64 * vals[p]) % l)
            })
            .collect();
        if additive_table(&table) {
            double_dual.insert(table);
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                break 'candidates;
            }
            pos -= 1;
            pick[pos] += 1;
            if pick[pos] < allowed[pos].len() {
                break;
            }
            pick[pos] = 0;
        }
    }

    let evaluation = |x: &GroupElement| -> Vec<u64> {
        dual.iter().map(|c| pairing(moduli, l, c.coords(), x.coords())).collect()
    };
    let images: Vec<Vec<u64>> = dual.iter().map(evaluation).collect();
    let distinct: HashSet<&Vec<u64>> = images.iter().collect();
    let injective = distinct.len() == n;
    let lands_in_double_dual = images.iter().all(|e| double_dual.contains(e));
    let surjective = double_dual.len() == distinct.len() && lands_in_double_dual;
    let homomorphism = (0..n).all(|a| {
        (0..k).all(|i| {
            let (s, g) = (&images[step_index[a * k + i]], &images[generator_index[i]]);
            (0..n).all(|c| (images[a][c] + g[c]) % l == s[c])
        })
    });
    Ok(injective && surjective && homomorphism)
}

/// Both orders of the double sum in the convolution step of the
/// discrimination argument, with integer data so the comparison is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IteratedIntegrals {
    /// `sum_x sigma(x) sum_y psi(phi(x + y)) w(y)`
    pub x_then_y: i128,
    /// `sum_y w(y) sum_x psi(phi(x + y)) sigma(x)`
    pub y_then_x: i128,
    /// `||w||_1 * ||sigma||_TV * sup |psi|`
    pub bound: i128,
}

/// Iterated sums over `G x G` under counting measure, `phi` an endomorphism.
pub fn iterated_integrals(
    phi: &Homomorphism,
    psi: &[i64],
    w: &[i64],
    sigma: &[i64],
) -> Result<IteratedIntegrals> {
    if !phi.is_endomorphism() {
        return invalid(format!("expected an endomorphism, got {} -> {}", phi.source(), phi.target()));
    }
    let g = phi.source();
    for (name, t) in [("psi", psi), ("w", w), ("sigma", sigma)] {
        check_len(g, t.len(), name)?;
    }
    let elems: Vec<GroupElement> = g.elements().collect();
    let n = elems.len();
    let mut kernel = vec![0i128; n * n];
    for (i, x) in elems.iter().enumerate() {
        for (j, y) in elems.iter().enumerate() {
            let img = phi.apply_coords(g.add_unchecked(x, y).coords());
            kernel[i * n + j] = psi[g.index_unchecked(&img)] as i128;
        }
    }
    let x_then_y = (0..n)
        .map(|i| sigma[i] as i128 * (0..n).map(|j| kernel[i * n + j] * w[j] as i128).sum::<i128>())
        .sum();
    let y_then_x = (0..n)
        .map(|j| w[j] as i128 * (0..n).map(|i| kernel[i * n + j] * sigma[i] as i128).sum::<i128>())
        .sum();
    let l1 = |t: &[i64]| t.iter().map(|v| (*v as i128).abs()).sum::<i128>();
    let sup = psi.iter().map(|v| (*v as i128).abs()).max().unwrap_or(0);
    Ok(IteratedIntegrals { x_then_y, y_then_x, bound: l1(w) * l1(sigma) * sup })
}
