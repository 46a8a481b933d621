//! Exhaustive enumeration of `Hom(G, H)` and `Aut(G)`.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::groups::{gcd, FiniteAbelianGroup};

use super::Homomorphism;

/// Default cap on materialized enumerations.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1 << 16;

/// Admissible images of a generator of order `a` in the coordinate `Z_b`:
/// the multiples of `b / gcd(a, b)`.
pub fn allowed_entries(a: u64, b: u64) -> Vec<i64> {
    let g = gcd(a, b);
    let step = (b / g) as i64;
    (0..g as i64).map(|t| t * step).collect()
}

/// `|Hom(G, H)| = prod_{i,j} gcd(a_i, b_j)`, saturating.
pub fn hom_count(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> u128 {
    let mut n: u128 = 1;
    for &a in source.moduli() {
        for &b in target.moduli() {
            n = n.saturating_mul(gcd(a, b) as u128);
        }
    }
    n
}

/// Visits every homomorphism matrix (flat, row-major) in odometer order
/// without allocating per item.
pub fn for_each_hom_matrix<F>(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup, mut visit: F)
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let l = target.rank();
    let choices: Vec<Vec<i64>> = source
        .moduli()
        .iter()
        .flat_map(|&a| target.moduli().iter().map(move |&b| allowed_entries(a, b)))
        .collect();
    debug_assert_eq!(choices.len(), source.rank() * l);
    let mut digits = vec![0usize; choices.len()];
    let mut matrix: Vec<i64> = choices.iter().map(|c| c[0]).collect();
    loop {
        if visit(&matrix).is_break() {
            return;
        }
        // advance the odometer, last entry fastest
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < choices[pos].len() {
                matrix[pos] = choices[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            matrix[pos] = choices[pos][0];
        }
    }
}

/// Complete, duplicate-free `Hom(G, H)`.
pub fn enumerate_homs(
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
    budget: usize,
) -> Result<Vec<Homomorphism>> {
    let count = hom_count(source, target);
    if count > budget as u128 {
        return Err(Error::ResourceExhausted(format!(
            "|Hom({source}, {target})| = {count} exceeds the enumeration budget {budget}; \
             use sample_map instead"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for_each_hom_matrix(source, target, |m| {
        out.push(Homomorphism::from_flat_unchecked(source.clone(), target.clone(), m.to_vec()));
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Index arithmetic on a finite group, for the automorphism search.
struct Arith {
    moduli: Vec<i64>,
    coords: Vec<Vec<i64>>,
}

impl Arith {
    fn new(group: &FiniteAbelianGroup) -> Self {
        Arith {
            moduli: group.moduli().iter().map(|&m| m as i64).collect(),
            coords: group.elements().map(|e| e.into_coords()).collect(),
        }
    }

    fn index(&self, c: &[i64]) -> usize {
        c.iter().zip(&self.moduli).fold(0usize, |acc, (&x, &m)| acc * m as usize + x as usize)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (&self.coords[a], &self.coords[b]);
        let mut acc = 0usize;
        for ((&x, &y), &m) in ca.iter().zip(cb).zip(&self.moduli) {
            let s = x + y;
            let s = if s >= m { s - m } else { s };
            acc = acc * m as usize + s as usize;
        }
        acc
    }
}

/// Visits every automorphism matrix of `G` (flat, row-major).
///
/// Generator images are chosen one at a time; the partial map on
/// `Z_{a_1} x ... x Z_{a_i}` is kept injective by requiring the image of the
/// new generator to have exact order `a_i` and to meet the subgroup generated
/// so far only in the identity.
pub fn for_each_automorphism<F>(group: &FiniteAbelianGroup, mut visit: F)
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let arith = Arith::new(group);
    let k = group.rank();
    let n = group.order() as usize;
    let candidates: Vec<Vec<usize>> = group
        .moduli()
        .iter()
        .map(|&a| {
            let per_coord: Vec<Vec<i64>> =
                group.moduli().iter().map(|&b| allowed_entries(a, b)).collect();
            let mut out = Vec::new();
            let mut digits = vec![0usize; k];
            'outer: loop {
                let c: Vec<i64> = digits.iter().zip(&per_coord).map(|(&d, p)| p[d]).collect();
                out.push(arith.index(&c));
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break 'outer;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < per_coord[pos].len() {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
            out
        })
        .collect();

    struct State<'a, F> {
        arith: &'a Arith,
        orders: Vec<i64>,
        candidates: &'a [Vec<usize>],
        in_sub: Vec<bool>,
        sub: Vec<usize>,
        chosen: Vec<usize>,
        visit: F,
        matrix: Vec<i64>,
    }

    fn rec<F: FnMut(&[i64]) -> ControlFlow<()>>(st: &mut State<'_, F>, level: usize) -> ControlFlow<()> {
        if level == st.orders.len() {
            st.matrix.clear();
            for &y in &st.chosen {
                st.matrix.extend_from_slice(&st.arith.coords[y]);
            }
            return (st.visit)(&st.matrix);
        }
        let order = st.orders[level];
        for ci in 0..st.candidates[level].len() {
            let y = st.candidates[level][ci];
            // k*y must avoid the current subgroup for 0 < k < order
            let mut multiple = y;
            let mut ok = true;
            for _ in 1..order {
                if st.in_sub[multiple] {
                    ok = false;
                    break;
                }
                multiple = st.arith.add(multiple, y);
            }
            if !ok {
                continue;
            }
            let base_len = st.sub.len();
            let mut shift = y;
            for _ in 1..order {
                for s in 0..base_len {
                    let v = st.arith.add(st.sub[s], shift);
                    st.in_sub[v] = true;
                    st.sub.push(v);
                }
                shift = st.arith.add(shift, y);
            }
            st.chosen.push(y);
            let flow = rec(st, level + 1);
            st.chosen.pop();
            for &v in &st.sub[base_len..] {
                st.in_sub[v] = false;
            }
            st.sub.truncate(base_len);
            flow?;
        }
        ControlFlow::Continue(())
    }

    let mut in_sub = vec![false; n];
    in_sub[0] = true;
    let mut st = State {
        arith: &arith,
        orders: group.moduli().iter().map(|&m| m as i64).collect(),
        candidates: &candidates,
        in_sub,
        sub: vec![0],
        chosen: Vec::with_capacity(k),
        visit: &mut visit,
        matrix: Vec::with_capacity(k * k),
    };
    let _ = rec(&mut st, 0);
}

pub fn count_automorphisms(group: &FiniteAbelianGroup) -> u64 {
    let mut n = 0u64;
    for_each_automorphism(group, |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    n
}

/// Complete `Aut(G)`; fails when it has more than `budget` elements.
pub fn enumerate_automorphisms(group: &FiniteAbelianGroup, budget: usize) -> Result<Vec<Homomorphism>> {
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_automorphism(group, |m| {
        if out.len() == budget {
            overflow = true;
            return ControlFlow::Break(());
        }
        out.push(Homomorphism::from_flat_unchecked(group.clone(), group.clone(), m.to_vec()));
        ControlFlow::Continue(())
    });
    if overflow {
        return Err(Error::ResourceExhausted(format!(
            "|Aut({group})| exceeds the enumeration budget {budget}; use sample_map instead"
        )));
    }
    Ok(out)
}

/// An isomorphism `G -> H`, found by exhaustive search over `Hom(G, H)`.
pub fn find_isomorphism(
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
) -> Option<Homomorphism> {
    if source.order() != target.order() {
        return None;
    }
    let mut found = None;
    for_each_hom_matrix(source, target, |m| {
        let h = Homomorphism::from_flat_unchecked(source.clone(), target.clone(), m.to_vec());
        if h.is_injective() {
            found = Some(h);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}
