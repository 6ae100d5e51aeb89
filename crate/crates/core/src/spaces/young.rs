//! Young functions: closed-form parametric families, compositions and a
//! tabulated monotone-convex form, with inverses and validity checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::parse_num;
use crate::numerics::{logspace, LOG_GRID_MAX, LOG_GRID_MIN};

/// Convex increasing generator of an Orlicz space with `A(t)/t → 0` at `0`
/// and `A(t)/t → ∞` at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum YoungFunction {
    /// `t^p`, `p > 1`.
    Power(f64),
    /// `t^p · ln(e + t)^a`.
    PowerLog { p: f64, a: f64 },
    /// `base(t^α)`.
    Composed { base: Box<YoungFunction>, alpha: f64 },
    /// Piecewise power interpolation through knots `(t_i, A(t_i))`, linear in
    /// `ln t ↦ ln A`, extended by the end slopes.
    Tabulated(Vec<(f64, f64)>),
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        let a = YoungFunction::Power(p);
        a.validate()?;
        Ok(a)
    }

    pub fn power_log(p: f64, a: f64) -> Result<Self> {
        let y = YoungFunction::PowerLog { p, a };
        y.validate()?;
        Ok(y)
    }

    /// `base(t^α)`; powers are folded (`(t^p)∘t^α = t^{αp}`) as are nested compositions.
    pub fn composed(base: YoungFunction, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidYoung(format!(
                "composition exponent must be positive, got {alpha}"
            )));
        }
        let y = match base {
            YoungFunction::Power(p) => YoungFunction::Power(p * alpha),
            YoungFunction::Composed { base, alpha: inner } => {
                if inner * alpha == 1.0 {
                    *base
                } else {
                    YoungFunction::Composed {
                        base,
                        alpha: inner * alpha,
                    }
                }
            }
            other if alpha == 1.0 => other,
            other => YoungFunction::Composed {
                base: Box::new(other),
                alpha,
            },
        };
        y.validate()?;
        Ok(y)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let y = YoungFunction::Tabulated(knots);
        y.validate()?;
        Ok(y)
    }

    /// `A(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power(p) => t.powf(*p),
            YoungFunction::PowerLog { p, a } => t.powf(*p) * (std::f64::consts::E + t).ln().powf(*a),
            YoungFunction::Composed { base, alpha } => base.eval(t.powf(*alpha)),
            YoungFunction::Tabulated(knots) => tabulated_eval(knots, t),
        }
    }

    /// Checks the defining properties numerically: positivity, strict
    /// monotonicity and midpoint convexity on a 128-point log-grid over
    /// `[1e-12, 1e12]`, plus the two limit proxies
    /// `A(1e12)/1e12 > A(1)` and `A(1e-12)/1e-12 < A(1)`.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        let grid = logspace(LOG_GRID_MIN, LOG_GRID_MAX, 128);
        let vals: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        for (t, v) in grid.iter().zip(&vals) {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidYoung(format!(
                    "{self}: A({t:e}) = {v} is not positive and finite"
                )));
            }
        }
        if let Some(w) = vals.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidYoung(format!(
                "{self}: not increasing near t = {:e}",
                grid[w]
            )));
        }
        for i in 0..grid.len() {
            for j in (i + 1)..grid.len() {
                let mid = self.eval(0.5 * (grid[i] + grid[j]));
                let chord = 0.5 * (vals[i] + vals[j]);
                if mid > chord * (1.0 + 1e-12) {
                    return Err(Error::InvalidYoung(format!(
                        "{self}: midpoint convexity fails between {:e} and {:e}",
                        grid[i], grid[j]
                    )));
                }
            }
        }
        let a1 = self.eval(1.0);
        if !(self.eval(LOG_GRID_MAX) / LOG_GRID_MAX > a1) {
            return Err(Error::InvalidYoung(format!("{self}: A(t)/t does not grow at infinity")));
        }
        if !(self.eval(LOG_GRID_MIN) / LOG_GRID_MIN < a1) {
            return Err(Error::InvalidYoung(format!("{self}: A(t)/t does not vanish at zero")));
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<()> {
        let finite_pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidYoung(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            YoungFunction::Power(p) | YoungFunction::PowerLog { p, .. } => {
                finite_pos("p", *p)?;
                if *p <= 1.0 {
                    return Err(Error::InvalidYoung(format!("exponent p must exceed 1, got {p}")));
                }
                if let YoungFunction::PowerLog { a, .. } = self {
                    if !a.is_finite() {
                        return Err(Error::InvalidYoung(format!("log exponent must be finite, got {a}")));
                    }
                }
                Ok(())
            }
            YoungFunction::Composed { base, alpha } => {
                finite_pos("alpha", *alpha)?;
                base.validate_structure()
            }
            YoungFunction::Tabulated(knots) => {
                if knots.len() < 2 {
                    return Err(Error::InvalidYoung(
                        "a tabulated Young function needs at least two knots".into(),
                    ));
                }
                for (i, &(t, a)) in knots.iter().enumerate() {
                    finite_pos("knot t", t)?;
                    finite_pos("knot A", a)?;
                    if i > 0 && (t <= knots[i - 1].0 || a <= knots[i - 1].1) {
                        return Err(Error::InvalidYoung(format!(
                            "knots must increase strictly at index {i}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Leading behaviour `A(t) ≍ t^p·|ln t|^a` as `t → 0` and as `t → ∞`,
    /// returned as `[(p₀, a₀), (p_∞, a_∞)]`; `None` for tabulated generators.
    pub fn asymptotics(&self) -> Option<[(f64, f64); 2]> {
        match self {
            YoungFunction::Power(p) => Some([(*p, 0.0), (*p, 0.0)]),
            // ln(e + t) → 1 at zero
            YoungFunction::PowerLog { p, a } => Some([(*p, 0.0), (*p, *a)]),
            YoungFunction::Composed { base, alpha } => {
                let [(p0, a0), (p1, a1)] = base.asymptotics()?;
                Some([(alpha * p0, a0), (alpha * p1, a1)])
            }
            YoungFunction::Tabulated(_) => None,
        }
    }

    /// Whether the inverse and the dilation index are known exactly.
    pub fn is_tabulated(&self) -> bool {
        match self {
            YoungFunction::Tabulated(_) => true,
            YoungFunction::Composed { base, .. } => base.is_tabulated(),
            _ => false,
        }
    }
}

fn tabulated_eval(knots: &[(f64, f64)], t: f64) -> f64 {
    let lt = t.ln();
    let n = knots.len();
    let seg = |i: usize| {
        let (t0, a0) = knots[i];
        let (t1, a1) = knots[i + 1];
        let slope = (a1.ln() - a0.ln()) / (t1.ln() - t0.ln());
        (a0.ln() + slope * (lt - t0.ln())).exp()
    };
    if t <= knots[0].0 {
        seg(0)
    } else if t >= knots[n - 1].0 {
        seg(n - 2)
    } else {
        let i = knots.partition_point(|k| k.0 <= t) - 1;
        seg(i.min(n - 2))
    }
}

/// `A^{-1}(y)`, using the closed forms where they exist (powers, compositions
/// of invertible bases) and bisection otherwise.
pub fn young_inverse(a: &YoungFunction, y: f64) -> Result<f64> {
    check_inverse_arg(y)?;
    match a {
        YoungFunction::Power(p) => Ok(y.powf(1.0 / p)),
        YoungFunction::Composed { base, alpha } => Ok(young_inverse(base, y)?.powf(1.0 / alpha)),
        YoungFunction::Tabulated(knots) => Ok(tabulated_inverse(knots, y)),
        _ => young_inverse_bisect(a, y),
    }
}

fn check_inverse_arg(y: f64) -> Result<()> {
    if y.is_finite() && y > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "Young inverse needs a positive finite argument, got {y}"
        )))
    }
}

fn tabulated_inverse(knots: &[(f64, f64)], y: f64) -> f64 {
    // the interpolant is piecewise linear in log-log coordinates, so it inverts piecewise
    let swapped: Vec<(f64, f64)> = knots.iter().map(|&(t, a)| (a, t)).collect();
    tabulated_eval(&swapped, y)
}

/// `A^{-1}(y)` by bisection on `ln t` to relative tolerance `1e-14`,
/// independent of any closed form.
pub fn young_inverse_bisect(a: &YoungFunction, y: f64) -> Result<f64> {
    check_inverse_arg(y)?;
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut guard = 0;
    while a.eval(lo) >= y {
        lo *= 0.5;
        guard += 1;
        if guard > 4000 || lo == 0.0 {
            return Err(Error::OutOfRange(format!("{a}: no t with A(t) < {y:e}")));
        }
    }
    guard = 0;
    while a.eval(hi) < y {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 || !hi.is_finite() {
            return Err(Error::OutOfRange(format!("{a}: no t with A(t) >= {y:e}")));
        }
    }
    for _ in 0..200 {
        if hi / lo - 1.0 <= 1e-14 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if a.eval(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

// --- textual form -----------------------------------------------------------

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Power(p) => write!(f, "pow:{p}"),
            YoungFunction::PowerLog { p, a } => write!(f, "plog:{p},{a}"),
            YoungFunction::Composed { base, alpha } => write!(f, "comp:{base}:{alpha}"),
            YoungFunction::Tabulated(knots) => {
                write!(f, "tab:")?;
                for (i, (t, a)) in knots.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}/{a}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for YoungFunction {
    type Err = Error;

    /// `pow:P`, `plog:P,A`, `comp:<young>:ALPHA`, `tab:t/A,t/A,...`.
    fn from_str(s: &str) -> Result<Self> {
        parse_young(s, 0)
    }
}

pub(crate) fn parse_young(s: &str, offset: usize) -> Result<YoungFunction> {
    let (head, rest) = s.split_once(':').ok_or_else(|| {
        Error::parse(
            offset,
            format!("expected <kind>:<params> for a Young function, found `{s}`"),
        )
    })?;
    let at = offset + head.len() + 1;
    let built = match head {
        "pow" => YoungFunction::power(parse_num(rest, at)?),
        "plog" => {
            let (p, a) = rest
                .split_once(',')
                .ok_or_else(|| Error::parse(at + rest.len(), "plog needs two parameters p,a: missing a"))?;
            YoungFunction::power_log(parse_num(p, at)?, parse_num(a, at + p.len() + 1)?)
        }
        "comp" => {
            let (base, alpha) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::parse(at + rest.len(), "comp needs <young>:alpha: missing alpha"))?;
            let alpha = parse_num(alpha, at + base.len() + 1)?;
            YoungFunction::composed(parse_young(base, at)?, alpha)
        }
        "tab" => {
            let mut knots = Vec::new();
            let mut pos = at;
            for part in rest.split(',') {
                let (t, a) = part
                    .split_once('/')
                    .ok_or_else(|| Error::parse(pos, format!("knot `{part}` must read t/A")))?;
                knots.push((parse_num(t, pos)?, parse_num(a, pos + t.len() + 1)?));
                pos += part.len() + 1;
            }
            YoungFunction::tabulated(knots)
        }
        other => {
            return Err(Error::parse(
                offset,
                format!("unknown Young function kind `{other}` (expected pow, plog, comp or tab)"),
            ))
        }
    };
    built.map_err(|e| Error::parse(offset, e.to_string()))
}

impl Serialize for YoungFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for YoungFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
