//! Map families: the set of layers a dictionary draws from.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::groups::{Domain, FiniteAbelianGroup, GroupElement, SampledKind, Space};

use super::enumerate::{allowed_entries, for_each_automorphism, for_each_hom_matrix, hom_count};
use super::{AffineMap, GroupMap, Homomorphism, LatticeMap, DEFAULT_ENUMERATION_BUDGET};

const AUT_REJECTION_LIMIT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Aut,
    End,
    /// Feature maps into a fixed target group.
    Hom(FiniteAbelianGroup),
    AffineEnd,
    AffineAut,
    Translations,
    /// Integer frequency matrices with entries in `[-k_max, k_max]` acting on a
    /// torus grid.
    TorusLinear { k_max: u64 },
    AffineTorus { k_max: u64 },
}

/// Entry bounds for maps on a lattice window: matrix entries in `[-K, K]`,
/// shifts in `[-B, B]`. Defaults: `K = 1`, `B = N + 1` for radius `N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WindowBounds {
    pub matrix: Option<i64>,
    pub shift: Option<i64>,
}

impl WindowBounds {
    fn resolve(&self, radius: u64) -> (i64, i64) {
        (self.matrix.unwrap_or(1), self.shift.unwrap_or(radius as i64 + 1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// Largest family that is enumerated rather than sampled.
    pub budget: usize,
    pub seed: u64,
    pub window: WindowBounds,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        FamilySpec {
            kind,
            budget: DEFAULT_ENUMERATION_BUDGET,
            seed: 0,
            window: WindowBounds::default(),
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_affine(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::AffineEnd
                | FamilyKind::AffineAut
                | FamilyKind::Translations
                | FamilyKind::AffineTorus { .. }
        )
    }

    /// The space the activation reads: the target of the family's maps.
    pub fn target_space(&self, domain: &Domain) -> Result<Space> {
        self.check_domain(domain)?;
        Ok(match &self.kind {
            FamilyKind::Hom(h) => Space::Finite { moduli: h.moduli().to_vec() },
            _ => domain.space(),
        })
    }

    fn check_domain(&self, domain: &Domain) -> Result<()> {
        let window = matches!(domain, Domain::Sampled(s) if s.kind() == SampledKind::LatticeWindow);
        let torus = matches!(domain, Domain::Sampled(s) if s.kind() == SampledKind::TorusGrid);
        match &self.kind {
            FamilyKind::TorusLinear { .. } | FamilyKind::AffineTorus { .. } if !torus => {
                invalid(format!("family {self} needs a torus grid, got {domain}"))
            }
            FamilyKind::Hom(_) if window => {
                invalid(format!("family {self} is not available on lattice window {domain}"))
            }
            _ => Ok(()),
        }
    }

    /// Exact family size when it is known without enumeration.
    pub fn size_hint(&self, domain: &Domain) -> Option<u128> {
        let group = domain.finite_group();
        match (&self.kind, domain) {
            (_, Domain::Sampled(s)) if s.kind() == SampledKind::LatticeWindow => {
                let (k, b) = self.window.resolve(s.size());
                let d = s.dims() as u32;
                let mats = (2 * k as u128 + 1).checked_pow(d * d)?;
                let shifts = (2 * b as u128 + 1).checked_pow(d)?;
                match self.kind {
                    FamilyKind::End => Some(mats),
                    FamilyKind::AffineEnd => mats.checked_mul(shifts),
                    FamilyKind::Translations => Some(shifts),
                    _ => None,
                }
            }
            (FamilyKind::End, _) => group.map(|g| hom_count(&g, &g)),
            (FamilyKind::Hom(h), _) => group.map(|g| hom_count(&g, h)),
            (FamilyKind::AffineEnd, _) => group.map(|g| hom_count(&g, &g).saturating_mul(g.order() as u128)),
            (FamilyKind::Translations, _) => group.map(|g| g.order() as u128),
            _ => None,
        }
    }

    /// Visits every member of the family in a fixed order.
    pub fn for_each_map<F>(&self, domain: &Domain, mut visit: F) -> Result<()>
    where
        F: FnMut(GroupMap) -> ControlFlow<()>,
    {
        self.check_domain(domain)?;
        if let Domain::Sampled(s) = domain {
            if s.kind() == SampledKind::LatticeWindow {
                return self.for_each_window_map(s.dims(), s.size(), visit);
            }
        }
        let g = domain.finite_group().expect("finite or torus domain");
        let shifts: Vec<GroupElement> = g.elements().collect();
        match &self.kind {
            FamilyKind::End => {
                for_each_hom_matrix(&g, &g, |m| visit(hom(&g, &g, m).into()));
            }
            FamilyKind::Hom(h) => {
                for_each_hom_matrix(&g, h, |m| visit(hom(&g, h, m).into()));
            }
            FamilyKind::Aut => {
                for_each_automorphism(&g, |m| visit(hom(&g, &g, m).into()));
            }
            FamilyKind::AffineEnd => {
                for_each_hom_matrix(&g, &g, |m| with_shifts(hom(&g, &g, m), &shifts, &mut visit));
            }
            FamilyKind::AffineAut => {
                for_each_automorphism(&g, |m| with_shifts(hom(&g, &g, m), &shifts, &mut visit));
            }
            FamilyKind::Translations => {
                let _ = with_shifts(Homomorphism::identity(&g), &shifts, &mut visit);
            }
            FamilyKind::TorusLinear { k_max } => {
                let _ = for_each_torus_matrix(&g, *k_max, |h| visit(h.into()));
            }
            FamilyKind::AffineTorus { k_max } => {
                let _ = for_each_torus_matrix(&g, *k_max, |h| with_shifts(h, &shifts, &mut visit));
            }
        }
        Ok(())
    }

    fn for_each_window_map<F>(&self, dims: usize, radius: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(GroupMap) -> ControlFlow<()>,
    {
        let (k, b) = self.window.resolve(radius);
        let identity: Vec<Vec<i64>> =
            (0..dims).map(|i| (0..dims).map(|j| i64::from(i == j)).collect()).collect();
        let zero_shift = vec![0i64; dims];
        let mut matrices: Vec<Vec<Vec<i64>>> = Vec::new();
        let mut shifts: Vec<Vec<i64>> = Vec::new();
        let unimodular_only = matches!(self.kind, FamilyKind::Aut | FamilyKind::AffineAut);
        match self.kind {
            FamilyKind::Translations => matrices.push(identity),
            FamilyKind::End | FamilyKind::AffineEnd | FamilyKind::Aut | FamilyKind::AffineAut => {
                let _ = box_points(dims * dims, k, |flat| {
                    let m: Vec<Vec<i64>> = flat.chunks(dims).map(<[i64]>::to_vec).collect();
                    if !unimodular_only
                        || LatticeMap::new(&m, zero_shift.clone()).map(|l| l.is_unimodular()).unwrap_or(false)
                    {
                        matrices.push(m);
                    }
                    ControlFlow::Continue(())
                });
            }
            _ => unreachable!("checked by check_domain"),
        }
        match self.kind {
            FamilyKind::End | FamilyKind::Aut => shifts.push(zero_shift),
            _ => {
                let _ = box_points(dims, b, |s| {
                    shifts.push(s.to_vec());
                    ControlFlow::Continue(())
                });
            }
        }
        for m in &matrices {
            for s in &shifts {
                let map = LatticeMap::new(m, s.clone())?;
                if visit(map.into()).is_break() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// All members when there are at most `limit`, otherwise `None`.
    pub fn enumerate_up_to(&self, domain: &Domain, limit: usize) -> Result<Option<Vec<GroupMap>>> {
        if let Some(n) = self.size_hint(domain) {
            if n > limit as u128 {
                self.check_domain(domain)?;
                return Ok(None);
            }
        }
        let mut out = Vec::new();
        let mut overflow = false;
        self.for_each_map(domain, |m| {
            if out.len() == limit {
                overflow = true;
                return ControlFlow::Break(());
            }
            out.push(m);
            ControlFlow::Continue(())
        })?;
        Ok(if overflow { None } else { Some(out) })
    }

    /// All members; fails when there are more than `budget`.
    pub fn enumerate(&self, domain: &Domain, budget: usize) -> Result<Vec<GroupMap>> {
        self.enumerate_up_to(domain, budget)?.ok_or_else(|| {
            Error::ResourceExhausted(format!(
                "family {self} on {domain} has more than {budget} members; use sample_map instead"
            ))
        })
    }

    /// One member, uniformly at random for finite kinds.
    pub fn sample<R: Rng + ?Sized>(&self, domain: &Domain, rng: &mut R) -> Result<GroupMap> {
        self.check_domain(domain)?;
        if let Domain::Sampled(s) = domain {
            if s.kind() == SampledKind::LatticeWindow {
                return self.sample_window(s.dims(), s.size(), rng);
            }
        }
        let g = domain.finite_group().expect("finite or torus domain");
        let shift = |rng: &mut R| random_element(&g, rng);
        Ok(match &self.kind {
            FamilyKind::End => sample_hom(&g, &g, rng).into(),
            FamilyKind::Hom(h) => sample_hom(&g, h, rng).into(),
            FamilyKind::Aut => sample_aut(&g, rng)?.into(),
            FamilyKind::AffineEnd => {
                let h = sample_hom(&g, &g, rng);
                AffineMap::new(h, shift(rng))?.into()
            }
            FamilyKind::AffineAut => {
                let h = sample_aut(&g, rng)?;
                AffineMap::new(h, shift(rng))?.into()
            }
            FamilyKind::Translations => AffineMap::translation(&g, shift(rng))?.into(),
            FamilyKind::TorusLinear { k_max } => sample_torus(&g, *k_max, rng).into(),
            FamilyKind::AffineTorus { k_max } => {
                let h = sample_torus(&g, *k_max, rng);
                AffineMap::new(h, shift(rng))?.into()
            }
        })
    }

    fn sample_window<R: Rng + ?Sized>(&self, dims: usize, radius: u64, rng: &mut R) -> Result<GroupMap> {
        let (k, b) = self.window.resolve(radius);
        let identity: Vec<Vec<i64>> =
            (0..dims).map(|i| (0..dims).map(|j| i64::from(i == j)).collect()).collect();
        let random_matrix = |rng: &mut R| -> Vec<Vec<i64>> {
            (0..dims).map(|_| (0..dims).map(|_| rng.gen_range(-k..=k)).collect()).collect()
        };
        let random_shift = |rng: &mut R| -> Vec<i64> { (0..dims).map(|_| rng.gen_range(-b..=b)).collect() };
        let unimodular = |rng: &mut R| -> Result<Vec<Vec<i64>>> {
            for _ in 0..AUT_REJECTION_LIMIT {
                let m = random_matrix(rng);
                if LatticeMap::new(&m, vec![0; dims])?.is_unimodular() {
                    return Ok(m);
                }
            }
            invalid(format!("no unimodular matrix found with entries in [-{k}, {k}]"))
        };
        let (m, s) = match self.kind {
            FamilyKind::End => (random_matrix(rng), vec![0; dims]),
            FamilyKind::AffineEnd => (random_matrix(rng), random_shift(rng)),
            FamilyKind::Aut => (unimodular(rng)?, vec![0; dims]),
            FamilyKind::AffineAut => (unimodular(rng)?, random_shift(rng)),
            FamilyKind::Translations => (identity, random_shift(rng)),
            _ => unreachable!("checked by check_domain"),
        };
        Ok(LatticeMap::new(&m, s)?.into())
    }
}

fn hom(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup, m: &[i64]) -> Homomorphism {
    Homomorphism::from_flat_unchecked(source.clone(), target.clone(), m.to_vec())
}

fn with_shifts<F>(h: Homomorphism, shifts: &[GroupElement], visit: &mut F) -> ControlFlow<()>
where
    F: FnMut(GroupMap) -> ControlFlow<()>,
{
    for s in shifts {
        visit(AffineMap { hom: h.clone(), shift: s.clone() }.into())?;
    }
    ControlFlow::Continue(())
}

/// Integer points of the box `[-r, r]^n` in lexicographic order.
fn box_points<F>(n: usize, r: i64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let mut p = vec![-r; n];
    loop {
        visit(&p)?;
        let mut pos = n;
        loop {
            if pos == 0 {
                return ControlFlow::Continue(());
            }
            pos -= 1;
            if p[pos] < r {
                p[pos] += 1;
                break;
            }
            p[pos] = -r;
        }
    }
}

/// Distinct reductions mod `R` of integer matrices with entries in
/// `[-k_max, k_max]`.
fn for_each_torus_matrix<F>(g: &FiniteAbelianGroup, k_max: u64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(Homomorphism) -> ControlFlow<()>,
{
    let d = g.rank();
    let r = g.moduli().first().copied().unwrap_or(1) as i64;
    let k = k_max as i64;
    let mut residues: Vec<i64> = (-k..=k).map(|v| v.rem_euclid(r)).collect();
    residues.sort_unstable();
    residues.dedup();
    let width = residues.len();
    let mut digits = vec![0usize; d * d];
    loop {
        let m: Vec<i64> = digits.iter().map(|&i| residues[i]).collect();
        visit(hom(g, g, &m))?;
        let mut pos = d * d;
        loop {
            if pos == 0 {
                return ControlFlow::Continue(());
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < width {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn random_element<R: Rng + ?Sized>(g: &FiniteAbelianGroup, rng: &mut R) -> GroupElement {
    GroupElement::new(g.moduli().iter().map(|&m| rng.gen_range(0..m as i64)).collect())
}

fn sample_hom<R: Rng + ?Sized>(
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
    rng: &mut R,
) -> Homomorphism {
    let mut m = Vec::with_capacity(source.rank() * target.rank());
    for &a in source.moduli() {
        for &b in target.moduli() {
            let choices = allowed_entries(a, b);
            m.push(choices[rng.gen_range(0..choices.len())]);
        }
    }
    hom(source, target, &m)
}

fn sample_aut<R: Rng + ?Sized>(g: &FiniteAbelianGroup, rng: &mut R) -> Result<Homomorphism> {
    for _ in 0..AUT_REJECTION_LIMIT {
        let h = sample_hom(g, g, rng);
        if h.is_injective() {
            return Ok(h);
        }
    }
    invalid(format!("automorphism rejection sampling on {g} did not terminate"))
}

fn sample_torus<R: Rng + ?Sized>(g: &FiniteAbelianGroup, k_max: u64, rng: &mut R) -> Homomorphism {
    let d = g.rank();
    let r = g.moduli().first().copied().unwrap_or(1) as i64;
    let k = k_max as i64;
    let m: Vec<i64> = (0..d * d).map(|_| rng.gen_range(-k..=k).rem_euclid(r)).collect();
    hom(g, g, &m)
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Aut => write!(f, "aut")?,
            FamilyKind::End => write!(f, "end")?,
            FamilyKind::Hom(h) => return write!(f, "hom:{h}"),
            FamilyKind::AffineEnd => write!(f, "affine-end")?,
            FamilyKind::AffineAut => write!(f, "affine-aut")?,
            FamilyKind::Translations => write!(f, "translations")?,
            FamilyKind::TorusLinear { k_max } => return write!(f, "torus-linear:K={k_max}"),
            FamilyKind::AffineTorus { k_max } => return write!(f, "affine-torus:K={k_max}"),
        }
        let mut params = Vec::new();
        if let Some(k) = self.window.matrix {
            params.push(format!("K={k}"));
        }
        if let Some(b) = self.window.shift {
            params.push(format!("B={b}"));
        }
        if !params.is_empty() {
            write!(f, ":{}", params.join(","))?;
        }
        Ok(())
    }
}

fn parse_params(text: &str, spec: &str) -> Result<Vec<(String, i64)>> {
    text.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected KEY=VALUE in family {spec:?}")))?;
            let v = v
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad value {v:?} in family {spec:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Family spec strings: `aut`, `end`, `affine-end`, `affine-aut`,
/// `translations`, `hom:<group>`, `torus-linear:K=<k>`, `affine-torus:K=<k>`.
/// Window bounds attach as `end:K=2,B=4`.
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (s, None),
        };
        let torus_k = |rest: Option<&str>| -> Result<u64> {
            let params = parse_params(rest.unwrap_or("K=1"), spec)?;
            match params.as_slice() {
                [(k, v)] if k == "K" && *v >= 0 => Ok(*v as u64),
                _ => Err(Error::Parse(format!("expected K=<k> in family {spec:?}"))),
            }
        };
        let kind = match head.to_ascii_lowercase().as_str() {
            "aut" => FamilyKind::Aut,
            "end" => FamilyKind::End,
            "affine-end" => FamilyKind::AffineEnd,
            "affine-aut" => FamilyKind::AffineAut,
            "translations" => FamilyKind::Translations,
            "hom" => {
                let target = rest.ok_or_else(|| Error::Parse(format!("hom family needs a target group: {spec:?}")))?;
                match target.parse::<Domain>()? {
                    Domain::Finite(h) => return Ok(FamilySpec::new(FamilyKind::Hom(h))),
                    other => return Err(Error::Parse(format!("hom target must be finite, got {other}"))),
                }
            }
            "torus-linear" => return Ok(FamilySpec::new(FamilyKind::TorusLinear { k_max: torus_k(rest)? })),
            "affine-torus" => return Ok(FamilySpec::new(FamilyKind::AffineTorus { k_max: torus_k(rest)? })),
            _ => return Err(Error::Parse(format!("unknown family {spec:?}"))),
        };
        let mut fam = FamilySpec::new(kind);
        if let Some(rest) = rest {
            for (k, v) in parse_params(rest, spec)? {
                match k.as_str() {
                    "K" if v >= 0 => fam.window.matrix = Some(v),
                    "B" if v >= 0 => fam.window.shift = Some(v),
                    _ => return Err(Error::Parse(format!("unknown or negative parameter {k} in {spec:?}"))),
                }
            }
        }
        Ok(fam)
    }
}
