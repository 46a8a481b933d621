use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::groups::{lex_cmp, GroupElement, Space};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum ActivationKind {
    /// `1 / (1 + exp(-s))` with `s = scale * sum_j embed(x_j) + shift`.
    Logistic { scale: f64, shift: f64 },
    Tanh { scale: f64, shift: f64 },
    /// Real part of the character with frequency `c` (all ones by default).
    CosChar { c: Option<Vec<i64>> },
    /// The character itself; complex-valued.
    Char { c: Vec<i64> },
    Delta0,
    /// Lexicographic positive part on `Z^d`, valued in `R^d`.
    Relu,
    LeakyRelu { slope: f64 },
    /// Point-major values over a finite space, `components` per point.
    Table { components: usize, values: Vec<f64> },
    Const(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Activation {
    kind: ActivationKind,
}

impl Activation {
    pub fn new(kind: ActivationKind) -> Self {
        Activation { kind }
    }

    pub fn kind(&self) -> &ActivationKind {
        &self.kind
    }

    pub fn logistic() -> Self {
        Self::new(ActivationKind::Logistic { scale: 1.0, shift: 0.0 })
    }

    pub fn delta0() -> Self {
        Self::new(ActivationKind::Delta0)
    }

    pub fn relu() -> Self {
        Self::new(ActivationKind::Relu)
    }

    pub fn table(values: Vec<f64>) -> Self {
        Self::new(ActivationKind::Table { components: 1, values })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ActivationKind::Logistic { .. } => "logistic",
            ActivationKind::Tanh { .. } => "tanh",
            ActivationKind::CosChar { .. } => "cos-char",
            ActivationKind::Char { .. } => "char",
            ActivationKind::Delta0 => "delta0",
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu { .. } => "leaky-relu",
            ActivationKind::Table { .. } => "table",
            ActivationKind::Const(_) => "const",
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, ActivationKind::Relu | ActivationKind::LeakyRelu { .. })
    }

    pub fn is_nonconstant(&self) -> bool {
        match &self.kind {
            ActivationKind::Logistic { scale, .. } | ActivationKind::Tanh { scale, .. } => *scale != 0.0,
            ActivationKind::Table { components, values } => values
                .chunks(*components)
                .any(|row| row != &values[..*components]),
            ActivationKind::Const(_) => false,
            _ => true,
        }
    }

    pub fn requires_order(&self) -> bool {
        matches!(self.kind, ActivationKind::Relu | ActivationKind::LeakyRelu { .. })
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            ActivationKind::Logistic { .. } | ActivationKind::Delta0 | ActivationKind::Relu => true,
            ActivationKind::Table { values, .. } => values.iter().all(|v| *v >= 0.0),
            ActivationKind::Const(v) => *v >= 0.0,
            _ => false,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.kind, ActivationKind::Char { .. })
    }

    /// Output dimension on `space`.
    pub fn components(&self, space: &Space) -> usize {
        match &self.kind {
            ActivationKind::Relu | ActivationKind::LeakyRelu { .. } => space.dims().max(1),
            ActivationKind::Table { components, .. } => *components,
            _ => 1,
        }
    }

    /// Checks that the activation reads points of `space`.
    pub fn check_space(&self, space: &Space) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
        if self.requires_order() && !space.is_ordered() {
            return bad(format!("activation {self} needs an ordered domain, got {space}"));
        }
        match &self.kind {
            ActivationKind::Table { components, values } => match space.order() {
                Some(n) if values.len() as u64 == n * *components as u64 => Ok(()),
                Some(n) => bad(format!(
                    "table has {} values, space {space} needs {}",
                    values.len(),
                    n * *components as u64
                )),
                None => bad(format!("table activation needs a finite space, got {space}")),
            },
            ActivationKind::CosChar { c: Some(c) } | ActivationKind::Char { c } => {
                if space.moduli().is_none() {
                    bad(format!("character activation needs a finite or torus space, got {space}"))
                } else if c.len() != space.dims() {
                    bad(format!("frequency {c:?} has the wrong length for {space}"))
                } else {
                    Ok(())
                }
            }
            ActivationKind::CosChar { c: None } if space.moduli().is_none() => {
                bad(format!("character activation needs a finite or torus space, got {space}"))
            }
            _ => Ok(()),
        }
    }

    /// Value at `x`, one entry per component.
    pub fn eval(&self, space: &Space, x: &GroupElement, out: &mut Vec<Complex64>) -> Result<()> {
        out.clear();
        let re = |v: f64| Complex64::new(v, 0.0);
        let embedded = |x: &GroupElement| -> f64 {
            x.coords().iter().enumerate().map(|(j, &v)| space.embed(j, v)).sum()
        };
        match &self.kind {
            ActivationKind::Logistic { scale, shift } => {
                out.push(re(1.0 / (1.0 + (-(scale * embedded(x) + shift)).exp())))
            }
            ActivationKind::Tanh { scale, shift } => out.push(re((scale * embedded(x) + shift).tanh())),
            ActivationKind::CosChar { c } => {
                let phase = char_phase(space, c.as_deref(), x)?;
                out.push(re(phase.cos()));
            }
            ActivationKind::Char { c } => {
                let phase = char_phase(space, Some(c), x)?;
                out.push(Complex64::from_polar(1.0, phase));
            }
            ActivationKind::Delta0 => out.push(re(if x.coords().iter().all(|&v| v == 0) { 1.0 } else { 0.0 })),
            ActivationKind::Relu | ActivationKind::LeakyRelu { .. } => {
                let zero = GroupElement::new(vec![0; x.len()]);
                let positive = lex_cmp(x, &zero) == std::cmp::Ordering::Greater;
                let factor = match (&self.kind, positive) {
                    (_, true) => 1.0,
                    (ActivationKind::LeakyRelu { slope }, false) => *slope,
                    _ => 0.0,
                };
                out.extend(x.coords().iter().map(|&v| re(factor * v as f64)));
            }
            ActivationKind::Table { components, values } => {
                let i = space
                    .index_of(x)
                    .ok_or_else(|| Error::InvalidArgument(format!("{x} is not a point of {space}")))?;
                out.extend(values[i * components..(i + 1) * components].iter().map(|&v| re(v)));
            }
            ActivationKind::Const(v) => out.push(re(*v)),
        }
        Ok(())
    }

    /// Values at every point of a finite space, point-major.
    pub fn tabulate(&self, space: &Space) -> Result<Option<Vec<Complex64>>> {
        let Some(moduli) = space.moduli() else { return Ok(None) };
        let group = crate::groups::FiniteAbelianGroup::from_moduli(&moduli)?;
        let mut table = Vec::with_capacity(group.order() as usize * self.components(space));
        let mut buf = Vec::new();
        for x in group.elements() {
            self.eval(space, &x, &mut buf)?;
            table.extend_from_slice(&buf);
        }
        Ok(Some(table))
    }
}

/// Angle `2 pi sum_j c_j x_j / m_j`, reduced exactly before the float step.
fn char_phase(space: &Space, c: Option<&[i64]>, x: &GroupElement) -> Result<f64> {
    let moduli = space
        .moduli()
        .ok_or_else(|| Error::InvalidConfiguration(format!("characters need a finite or torus space, got {space}")))?;
    let l = moduli.iter().fold(1u64, |acc, &m| crate::groups::lcm(acc, m)) as i128;
    let mut k: i128 = 0;
    for (j, (&xj, &m)) in x.coords().iter().zip(&moduli).enumerate() {
        let cj = c.map_or(1, |c| c[j]) as i128;
        k = (k + (cj * xj as i128).rem_euclid(m as i128) * (l / m as i128)) % l;
    }
    Ok(2.0 * std::f64::consts::PI * k as f64 / l as f64)
}

/// Narrows activation output into the codomain field.
pub(crate) fn narrow<T: Scalar>(z: Complex64, activation: &Activation) -> Result<T> {
    T::from_complex(z).ok_or_else(|| {
        Error::InvalidConfiguration(format!("activation {activation} is complex-valued; use a complex codomain"))
    })
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let ints = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join("/");
        match &self.kind {
            ActivationKind::Logistic { scale, shift } | ActivationKind::Tanh { scale, shift } => {
                write!(f, "{}", self.name())?;
                if *scale != 1.0 || *shift != 0.0 {
                    write!(f, ":scale={scale:?},shift={shift:?}")?;
                }
                Ok(())
            }
            ActivationKind::CosChar { c: None } => write!(f, "cos-char"),
            ActivationKind::CosChar { c: Some(c) } => write!(f, "cos-char:c={}", ints(c)),
            ActivationKind::Char { c } => write!(f, "char:c={}", ints(c)),
            ActivationKind::Delta0 => write!(f, "delta0"),
            ActivationKind::Relu => write!(f, "relu"),
            ActivationKind::LeakyRelu { slope } => write!(f, "leaky-relu:slope={slope:?}"),
            ActivationKind::Table { components: 1, values } => write!(f, "table:{}", list(values)),
            ActivationKind::Table { components, values } => write!(f, "table[{components}]:{}", list(values)),
            ActivationKind::Const(v) => write!(f, "const:{v:?}"),
        }
    }
}

fn parse_f64(s: &str, spec: &str) -> Result<f64> {
    let v = s
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number {s:?} in activation {spec:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite value {s:?} in activation {spec:?}")));
    }
    Ok(v)
}

fn parse_freq(s: &str, spec: &str) -> Result<Vec<i64>> {
    s.split('/')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad frequency {t:?} in {spec:?}"))))
        .collect()
}

fn key_values<'a>(rest: &'a str, spec: &str) -> Result<Vec<(&'a str, &'a str)>> {
    rest.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse(format!("expected KEY=VALUE in activation {spec:?}")))
        })
        .collect()
}

/// Activation spec strings: `logistic[:scale=a,shift=b]`, `tanh[:...]`,
/// `cos-char[:c=1/2]`, `char:c=1/2`, `delta0`, `relu`,
/// `leaky-relu[:slope=a]`, `table:v0,v1,...`, `table[d]:...` for `R^d`
/// values, `const:v`.
impl FromStr for Activation {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (s, None),
        };
        let unexpected = |k: &str| Error::Parse(format!("unknown parameter {k:?} in activation {spec:?}"));
        let kind = match head {
            "logistic" | "tanh" => {
                let (mut scale, mut shift) = (1.0, 0.0);
                if let Some(rest) = rest {
                    for (k, v) in key_values(rest, spec)? {
                        match k {
                            "scale" => scale = parse_f64(v, spec)?,
                            "shift" => shift = parse_f64(v, spec)?,
                            _ => return Err(unexpected(k)),
                        }
                    }
                }
                if head == "logistic" {
                    ActivationKind::Logistic { scale, shift }
                } else {
                    ActivationKind::Tanh { scale, shift }
                }
            }
            "cos-char" | "char" => {
                let mut c = None;
                if let Some(rest) = rest {
                    for (k, v) in key_values(rest, spec)? {
                        match k {
                            "c" => c = Some(parse_freq(v, spec)?),
                            _ => return Err(unexpected(k)),
                        }
                    }
                }
                if head == "cos-char" {
                    ActivationKind::CosChar { c }
                } else {
                    ActivationKind::Char {
                        c: c.ok_or_else(|| Error::Parse(format!("char activation needs c=...: {spec:?}")))?,
                    }
                }
            }
            "delta0" | "relu" if rest.is_none() => {
                if head == "relu" {
                    ActivationKind::Relu
                } else {
                    ActivationKind::Delta0
                }
            }
            "leaky-relu" => {
                let mut slope = 0.01;
                if let Some(rest) = rest {
                    for (k, v) in key_values(rest, spec)? {
                        match k {
                            "slope" => slope = parse_f64(v, spec)?,
                            _ => return Err(unexpected(k)),
                        }
                    }
                }
                ActivationKind::LeakyRelu { slope }
            }
            "const" => ActivationKind::Const(parse_f64(
                rest.ok_or_else(|| Error::Parse(format!("const activation needs a value: {spec:?}")))?,
                spec,
            )?),
            h if h == "table" || h.starts_with("table[") => {
                let components = match h.strip_prefix("table[").and_then(|r| r.strip_suffix(']')) {
                    Some(d) => d
                        .parse::<usize>()
                        .ok()
                        .filter(|&d| d > 0)
                        .ok_or_else(|| Error::Parse(format!("bad table width in {spec:?}")))?,
                    None if h == "table" => 1,
                    None => return Err(Error::Parse(format!("bad table header in {spec:?}"))),
                };
                let rest = rest.ok_or_else(|| Error::Parse(format!("table activation needs values: {spec:?}")))?;
                let values = rest.split(',').map(|v| parse_f64(v, spec)).collect::<Result<Vec<_>>>()?;
                if values.is_empty() || values.len() % components != 0 {
                    return Err(Error::Parse(format!("table length is not a multiple of {components}: {spec:?}")));
                }
                ActivationKind::Table { components, values }
            }
            _ => return Err(Error::Parse(format!("unknown activation {spec:?}"))),
        };
        Ok(Activation { kind })
    }
}

impl Serialize for Activation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Activation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn act(s: &str) -> Activation {
        s.parse().unwrap()
    }

    fn eval1(a: &Activation, space: &Space, x: &[i64]) -> Vec<Complex64> {
        let mut out = Vec::new();
        a.eval(space, &GroupElement::new(x.to_vec()), &mut out).unwrap();
        out
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "logistic",
            "logistic:scale=4.0,shift=-2.0",
            "tanh",
            "cos-char",
            "cos-char:c=1/2",
            "char:c=3",
            "delta0",
            "relu",
            "leaky-relu:slope=0.1",
            "table:0.0,1.0,0.0",
            "table[2]:0.0,1.0,0.5,0.25",
            "const:3.0",
        ] {
            assert_eq!(act(s).to_string(), s);
        }
        for bad in ["sigmoid", "table:", "table[0]:1", "table[2]:1,2,3", "char", "logistic:scale=x", "relu:2"] {
            assert!(bad.parse::<Activation>().is_err(), "{bad}");
        }
    }

    #[test]
    fn table_values_round_trip_bit_exactly() {
        let v = vec![0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI];
        let a = Activation::table(v.clone());
        let back: Activation = a.to_string().parse().unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn flags() {
        assert!(act("relu").requires_order() && !act("relu").is_bounded());
        assert!(act("logistic").is_bounded() && act("logistic").is_nonnegative());
        assert!(!act("const:1").is_nonconstant());
        assert!(!act("table:2,2,2").is_nonconstant());
        assert!(act("table:2,2,3").is_nonconstant());
        assert!(!act("cos-char").is_nonnegative());
        assert!(act("char:c=1").is_complex());
    }

    #[test]
    fn applicability() {
        let z4: Space = "Z4".parse().unwrap();
        let w1: Space = "Z^1".parse().unwrap();
        assert!(matches!(act("relu").check_space(&z4), Err(Error::InvalidConfiguration(_))));
        assert!(act("relu").check_space(&w1).is_ok());
        assert!(act("table:1,2,3").check_space(&z4).is_err());
        assert!(act("table:1,2,3,4").check_space(&z4).is_ok());
        assert!(act("cos-char").check_space(&w1).is_err());
        assert!(act("char:c=1/1").check_space(&z4).is_err());
    }

    #[test]
    fn values() {
        let z4: Space = "Z4".parse().unwrap();
        assert!((eval1(&act("cos-char"), &z4, &[1])[0].re).abs() < 1e-15);
        assert!((eval1(&act("char:c=1"), &z4, &[1])[0] - Complex64::i()).norm() < 1e-15);
        assert_eq!(eval1(&act("logistic"), &z4, &[0])[0].re, 0.5);
        assert_eq!(eval1(&act("delta0"), &z4, &[0])[0].re, 1.0);
        assert_eq!(eval1(&act("delta0"), &z4, &[2])[0].re, 0.0);
        let w2: Space = "Z^2".parse().unwrap();
        let relu = act("relu");
        assert_eq!(eval1(&relu, &w2, &[0, 3]), vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert_eq!(eval1(&relu, &w2, &[-1, 3]), vec![Complex64::new(0.0, 0.0); 2]);
        let leaky = act("leaky-relu:slope=0.5");
        assert_eq!(eval1(&leaky, &"Z^1".parse().unwrap(), &[-4])[0].re, -2.0);
    }

    proptest! {
        #[test]
        fn relu_is_order_consistent(x in prop::collection::vec(-20i64..20, 1..4)) {
            let space = Space::Lattice { dims: x.len() };
            let v = eval1(&Activation::relu(), &space, &x);
            let zero = GroupElement::new(vec![0; x.len()]);
            let positive = lex_cmp(&GroupElement::new(x.clone()), &zero) == std::cmp::Ordering::Greater;
            let lex_nonneg = v.iter().map(|z| z.re).find(|&r| r != 0.0).is_none_or(|r| r > 0.0);
            prop_assert!(lex_nonneg);
            if positive {
                prop_assert!(v.iter().zip(&x).all(|(z, &xi)| z.re == xi as f64));
            } else {
                prop_assert!(v.iter().all(|z| z.re == 0.0));
            }
        }
    }
}
