//! Rearrangement-invariant function spaces: Lebesgue, Lorentz and Orlicz
//! norms computed on step rearrangements, fundamental functions and
//! convexification.

mod index;
mod young;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::parse_num;
use crate::rearrange::StepRearrangement;

pub use index::{dilation_profile, upper_index_details, upper_index_estimate, IndexEstimate};
pub use young::{young_inverse, young_inverse_bisect, YoungFunction};

/// A rearrangement-invariant space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    /// `L^p`, `p ∈ [1, ∞]`.
    Lebesgue(f64),
    /// `L^{p,q}` with norm `‖t^{1/p − 1/q} u*(t)‖_{L^q(dt/t)}`; `p ∈ [1, ∞)`,
    /// `q ∈ [1, ∞]`, or `p = q = ∞`.
    Lorentz { p: f64, q: f64 },
    /// `L^A` with the Luxemburg norm.
    Orlicz(YoungFunction),
}

impl SpaceSpec {
    pub fn lebesgue(p: f64) -> Result<Self> {
        let s = SpaceSpec::Lebesgue(p);
        s.validate()?;
        Ok(s)
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        let s = SpaceSpec::Lorentz { p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn orlicz(a: YoungFunction) -> Self {
        SpaceSpec::Orlicz(a)
    }

    pub fn validate(&self) -> Result<()> {
        let exponent = |name: &str, v: f64| {
            if v >= 1.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::InvalidSpace(format!(
                    "exponent {name} must lie in [1, inf], got {v}"
                )))
            }
        };
        match self {
            SpaceSpec::Lebesgue(p) => exponent("p", *p),
            SpaceSpec::Lorentz { p, q } => {
                exponent("p", *p)?;
                exponent("q", *q)?;
                if p.is_infinite() && q.is_finite() {
                    return Err(Error::InvalidSpace(format!(
                        "L^{{inf,{q}}} is trivial; use Lor:inf,inf"
                    )));
                }
                Ok(())
            }
            SpaceSpec::Orlicz(a) => a.validate(),
        }
    }

    /// `(P, p)` when the space is Lebesgue or Lorentz.
    pub fn lorentz_exponents(&self) -> Option<(f64, f64)> {
        match self {
            SpaceSpec::Lebesgue(p) => Some((*p, *p)),
            SpaceSpec::Lorentz { p, q } => Some((*p, *q)),
            SpaceSpec::Orlicz(_) => None,
        }
    }
}

/// `‖u‖_{L^{P,p}} = (∫_0^∞ t^{p/P − 1} u*(t)^p dt)^{1/p}` for finite `p` and
/// `sup_t t^{1/P} u*(t)` for `p = ∞`.
///
/// The integral is exact: on a segment `(T_{i-1}, T_i)` with value `v_i` it is
/// `(P/p) v_i^p (T_i^{p/P} − T_{i-1}^{p/P})`, and the sum is evaluated in
/// Abel form `(P/p) Σ T_i^{p/P} (v_i^p − v_{i+1}^p)`, whose terms are all
/// nonnegative. Values are normalized by `u*(0+)` to keep large `p` finite.
pub fn lorentz_norm(r: &StepRearrangement, big_p: f64, p: f64) -> Result<f64> {
    SpaceSpec::Lorentz { p: big_p, q: p }.validate()?;
    if r.is_empty() {
        return Ok(0.0);
    }
    let top = r.sup();
    let segs = r.segments();
    let ends = r.breakpoints();
    if p.is_infinite() {
        if big_p.is_infinite() {
            return Ok(top);
        }
        let m = segs
            .iter()
            .zip(ends)
            .map(|(s, &t)| t.powf(1.0 / big_p) * s.value)
            .fold(0.0, f64::max);
        return Ok(m);
    }
    let e = p / big_p;
    let mut sum = 0.0;
    for i in 0..segs.len() {
        let vi = (segs[i].value / top).powf(p);
        let next = segs.get(i + 1).map_or(0.0, |s| (s.value / top).powf(p));
        sum += ends[i].powf(e) * (vi - next);
    }
    let integral = big_p / p * sum;
    if !integral.is_finite() {
        return Err(Error::Overflow(format!(
            "Lorentz integral diverged for P={big_p}, p={p}"
        )));
    }
    Ok(top * integral.powf(1.0 / p))
}

/// `ρ_A(u) = Σ A(v_i)·w_i`.
pub fn orlicz_modular(r: &StepRearrangement, a: &YoungFunction) -> Result<f64> {
    let m: f64 = r.segments().iter().map(|s| a.eval(s.value) * s.width).sum();
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Overflow(format!("modular of {a} is not representable")))
    }
}

fn modular_saturating(r: &StepRearrangement, a: &YoungFunction, lambda: f64) -> f64 {
    let m: f64 = r.segments().iter().map(|s| a.eval(s.value / lambda) * s.width).sum();
    if m.is_nan() {
        f64::INFINITY
    } else {
        m
    }
}

/// `inf{λ > 0 : ρ_A(u/λ) <= 1}` by bisection on `ln λ`.
///
/// `λ ↦ ρ_A(u/λ)` is continuous and strictly decreasing, so the root is
/// bracketed by doubling/halving from `u*(0+)` and then refined to relative
/// width `1e-13`.
pub fn luxemburg_norm(r: &StepRearrangement, a: &YoungFunction) -> Result<f64> {
    if r.is_empty() {
        return Ok(0.0);
    }
    let rho = |l: f64| modular_saturating(r, a, l);
    let (mut lo, mut hi) = (r.sup(), r.sup());
    let mut guard = 0;
    while rho(lo) <= 1.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2100 || lo == 0.0 {
            return Err(Error::Bracket(format!("modular of {a} stays below 1 for every scale")));
        }
    }
    guard = 0;
    while rho(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2100 || !hi.is_finite() {
            return Err(Error::Bracket(format!("modular of {a} stays above 1 for every scale")));
        }
    }
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Norm of `u` in `space`, computed on its rearrangement.
pub fn space_norm(r: &StepRearrangement, space: &SpaceSpec) -> Result<f64> {
    match space {
        SpaceSpec::Lebesgue(p) => lorentz_norm(r, *p, *p),
        SpaceSpec::Lorentz { p, q } => lorentz_norm(r, *p, *q),
        SpaceSpec::Orlicz(a) => luxemburg_norm(r, a),
    }
}

/// Fundamental function `φ_X(t)` in its standard normalization:
/// `t^{1/P}` for `L^P` and `L^{P,p}`, `1/A^{-1}(1/t)` for `L^A`.
///
/// For Lorentz spaces with `P ≠ p` this differs from the norm of an
/// indicator by the constant `(P/p)^{1/p}`; see [`indicator_norm`].
pub fn fundamental_function(space: &SpaceSpec, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "fundamental function needs t > 0, got {t}"
        )));
    }
    match space {
        SpaceSpec::Lebesgue(p) | SpaceSpec::Lorentz { p, .. } => Ok(t.powf(1.0 / p)),
        SpaceSpec::Orlicz(a) => Ok(1.0 / young_inverse(a, 1.0 / t)?),
    }
}

/// Exact norm of an indicator of measure `t`.
pub fn indicator_norm(space: &SpaceSpec, t: f64) -> Result<f64> {
    let phi = fundamental_function(space, t)?;
    match space {
        SpaceSpec::Lorentz { p, q } if q.is_finite() => Ok((p / q).powf(1.0 / q) * phi),
        _ => Ok(phi),
    }
}

/// Convexification `X^α` with norm `‖|u|^α‖_X^{1/α}`.
pub fn convexify(space: &SpaceSpec, alpha: f64) -> Result<SpaceSpec> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "convexification exponent must be positive, got {alpha}"
        )));
    }
    let out = match space {
        SpaceSpec::Lebesgue(p) => SpaceSpec::Lebesgue(alpha * p),
        SpaceSpec::Lorentz { p, q } => SpaceSpec::Lorentz {
            p: alpha * p,
            q: alpha * q,
        },
        SpaceSpec::Orlicz(a) => SpaceSpec::Orlicz(
            YoungFunction::composed(a.clone(), alpha)
                .map_err(|e| Error::InvalidSpace(format!("{space} to the power {alpha}: {e}")))?,
        ),
    };
    out.validate()
        .map_err(|e| Error::InvalidSpace(format!("{space} to the power {alpha}: {e}")))?;
    Ok(out)
}

// --- textual form -----------------------------------------------------------

fn fmt_exp(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lebesgue(p) => write!(f, "Lp:{}", fmt_exp(*p)),
            SpaceSpec::Lorentz { p, q } => write!(f, "Lor:{},{}", fmt_exp(*p), fmt_exp(*q)),
            SpaceSpec::Orlicz(a) => write!(f, "Orl:{a}"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// `Lp:P`, `Lor:P,p`, `Orl:<young>`; exponents accept `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(0, format!("expected Lp:, Lor: or Orl: prefix in `{s}`")))?;
        let at = head.len() + 1;
        let spec = match head {
            "Lp" => SpaceSpec::Lebesgue(parse_num(rest, at)?),
            "Lor" => {
                let (p, q) = rest.split_once(',').ok_or_else(|| {
                    Error::parse(at + rest.len(), "Lorentz space needs P,q: missing second exponent q")
                })?;
                SpaceSpec::Lorentz {
                    p: parse_num(p, at)?,
                    q: parse_num(q, at + p.len() + 1)?,
                }
            }
            "Orl" => SpaceSpec::Orlicz(young::parse_young(rest, at)?),
            other => {
                return Err(Error::parse(
                    0,
                    format!("unknown space kind `{other}` (expected Lp, Lor or Orl)"),
                ));
            }
        };
        spec.validate().map_err(|e| Error::parse(at, e.to_string()))?;
        Ok(spec)
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
