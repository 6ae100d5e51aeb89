//! Sampled functions on a uniform cubic grid, closed-form test families and
//! finite-difference derivative tensors.
//!
//! A [`GridFunction`] holds `res^dim` cells covering `[-L, L]^dim`. Each cell
//! carries either a scalar or a flattened order-`j` tensor (`dim^j` entries).
//! Cells are indexed row-major (last axis fastest) and a cell's value is the
//! sample at its center, so the grid function is read as a step function with
//! one step per cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of outermost cell layers that must vanish.
pub const SUPPORT_MARGIN: usize = 2;
/// Smallest accepted number of cells per axis.
pub const MIN_RES: usize = 8;
/// Hard cap on the total number of cells of a grid.
pub const MAX_CELLS: usize = 1 << 24;

/// Samples of a compactly supported function on a uniform cubic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    dim: usize,
    half_width: f64,
    res: usize,
    /// Tensor order of each entry; 0 for scalar samples.
    order: usize,
    values: Vec<f64>,
}

/// Geometry of a grid without values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub dim: usize,
    pub half_width: f64,
    pub res: usize,
}

impl GridShape {
    pub fn new(dim: usize, half_width: f64, res: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if res < MIN_RES {
            return Err(Error::InvalidParameter(format!(
                "res must be at least {MIN_RES}, got {res}"
            )));
        }
        match res.checked_pow(dim as u32) {
            Some(n) if n <= MAX_CELLS => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "res^dim exceeds the cell budget of {MAX_CELLS}"
                )))
            }
        }
        Ok(Self { dim, half_width, res })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.res as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.res.pow(self.dim as u32)
    }

    pub fn box_measure(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Center coordinate of cell index `i` along any axis.
    pub fn center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Multi-index of a flat cell index (row-major, last axis fastest).
    pub fn unravel(&self, mut p: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for d in (0..self.dim).rev() {
            idx[d] = p % self.res;
            p /= self.res;
        }
        idx
    }

    fn stride(&self, axis: usize) -> usize {
        self.res.pow((self.dim - 1 - axis) as u32)
    }

    /// Same spacing, `extra` more cells on every side of every axis.
    pub fn padded(&self, extra: usize) -> Result<Self> {
        let h = self.spacing();
        GridShape::new(self.dim, self.half_width + extra as f64 * h, self.res + 2 * extra)
    }

    /// The grid dilated by `s`: half-width divided by `s`, same resolution.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        GridShape::new(self.dim, self.half_width / s, self.res)
    }
}

impl GridFunction {
    /// Builds a grid function from raw samples, checking every invariant:
    /// finite entries and vanishing outermost layers.
    pub fn from_values(shape: GridShape, order: usize, values: Vec<f64>) -> Result<Self> {
        let comps = shape.dim.pow(order as u32);
        if values.len() != shape.num_cells() * comps {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                shape.num_cells() * comps,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at flat index {i}")));
        }
        let f = Self {
            dim: shape.dim,
            half_width: shape.half_width,
            res: shape.res,
            order,
            values,
        };
        if let Some(p) = f.first_margin_violation() {
            return Err(Error::SupportOverflow(format!(
                "cell {:?} in the outer {SUPPORT_MARGIN} layers is nonzero; functions must vanish near the boundary",
                &shape.unravel(p)[..shape.dim]
            )));
        }
        Ok(f)
    }

    /// Like [`GridFunction::from_values`] but without the vanishing-margin
    /// check, for derived quantities such as maximal functions that do not
    /// vanish near the boundary.
    pub(crate) fn from_values_unbounded(shape: GridShape, order: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.num_cells() * shape.dim.pow(order as u32));
        Self {
            dim: shape.dim,
            half_width: shape.half_width,
            res: shape.res,
            order,
            values,
        }
    }

    /// Samples a closed-form function at cell centers.
    pub fn from_fn(shape: GridShape, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(shape.num_cells());
        let mut x = vec![0.0; shape.dim];
        for p in 0..shape.num_cells() {
            let idx = shape.unravel(p);
            for d in 0..shape.dim {
                x[d] = shape.center(idx[d]);
            }
            values.push(f(&x));
        }
        Self::from_values(shape, 0, values)
    }

    pub fn shape(&self) -> GridShape {
        GridShape {
            dim: self.dim,
            half_width: self.half_width,
            res: self.res,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_scalar(&self) -> bool {
        self.order == 0
    }

    /// Entries per cell: `dim^order`.
    pub fn components(&self) -> usize {
        self.dim.pow(self.order as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.shape().cell_volume()
    }

    pub fn num_cells(&self) -> usize {
        self.shape().num_cells()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of cell `p`.
    pub fn cell(&self, p: usize) -> &[f64] {
        let c = self.components();
        &self.values[p * c..(p + 1) * c]
    }

    /// Per-cell Euclidean magnitude, as a plain vector.
    pub fn magnitudes(&self) -> Vec<f64> {
        if self.is_scalar() {
            return self.values.iter().map(|v| v.abs()).collect();
        }
        self.values
            .chunks_exact(self.components())
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Largest per-cell magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Pointwise sum of two grid functions on the same grid.
    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        if self.order != other.order {
            return Err(Error::InvalidGrid("tensor orders differ".into()));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    /// Pointwise product of magnitudes.
    pub fn product_magnitude(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self
            .magnitudes()
            .into_iter()
            .zip(other.magnitudes())
            .map(|(a, b)| a * b)
            .collect();
        GridFunction::from_values(self.shape(), 0, values)
    }

    /// Same function on a larger grid with the same spacing, extended by zero.
    pub fn pad(&self, extra: usize) -> Result<GridFunction> {
        if extra == 0 {
            return Ok(self.clone());
        }
        let shape = self.shape();
        let big = shape.padded(extra)?;
        let comps = self.components();
        let mut values = vec![0.0; big.num_cells() * comps];
        for p in 0..shape.num_cells() {
            let idx = shape.unravel(p);
            let mut q = 0;
            for &i in &idx[..shape.dim] {
                q = q * big.res + i + extra;
            }
            values[q * comps..(q + 1) * comps].copy_from_slice(self.cell(p));
        }
        GridFunction::from_values(big, self.order, values)
    }

    pub(crate) fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.res != other.res || self.half_width != other.half_width {
            return Err(Error::InvalidGrid("grid functions live on different grids".into()));
        }
        Ok(())
    }

    fn first_margin_violation(&self) -> Option<usize> {
        let shape = self.shape();
        let m = SUPPORT_MARGIN.min(shape.res / 2);
        (0..shape.num_cells()).find(|&p| {
            let idx = shape.unravel(p);
            let on_margin = idx[..shape.dim].iter().any(|&i| i < m || i >= shape.res - m);
            on_margin && self.cell(p).iter().any(|v| *v != 0.0)
        })
    }
}

/// Closed-form, compactly supported test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFamily {
    /// `exp(1 - 1/(1 - |x|²/r²))` for `|x| < r`: a smooth exponential bump with
    /// Gaussian-like profile and value 1 at the origin.
    GaussianBump { radius: f64 },
    /// `(1 - |x|²/r²)^m` for `|x| < r`; of class `C^{m-1}`.
    PolynomialBump { radius: f64, power: u32 },
    /// `2 - |x|^k` on `|x| < 1`, `(2 - |x|)^k` on `1 <= |x| <= 2`, zero elsewhere.
    SaBump { k: u32 },
    /// Indicator of the cube `[0, a^{1/n})^n`, a set of measure `a`.
    Indicator { measure: f64 },
    /// `x ↦ base(s·x)`.
    Dilated { base: Box<TestFamily>, s: f64 },
}

impl TestFamily {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            TestFamily::GaussianBump { radius } => positive("radius", *radius),
            TestFamily::PolynomialBump { radius, power } => {
                positive("radius", *radius)?;
                if *power == 0 {
                    return Err(Error::InvalidParameter("polynomial bump power must be >= 1".into()));
                }
                Ok(())
            }
            TestFamily::SaBump { k } => {
                if *k == 0 {
                    Err(Error::InvalidParameter("sa_bump needs k >= 1".into()))
                } else {
                    Ok(())
                }
            }
            TestFamily::Indicator { measure } => positive("measure", *measure),
            TestFamily::Dilated { base, s } => {
                positive("dilation s", *s)?;
                base.validate()
            }
        }
    }

    /// Value at a point `x` of any dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFamily::GaussianBump { radius } => {
                let rho2 = norm2(x) / (radius * radius);
                if rho2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            }
            TestFamily::PolynomialBump { radius, power } => {
                let rho2 = norm2(x) / (radius * radius);
                if rho2 < 1.0 {
                    (1.0 - rho2).powi(*power as i32)
                } else {
                    0.0
                }
            }
            TestFamily::SaBump { k } => sa_bump_profile(*k, norm2(x).sqrt()),
            TestFamily::Indicator { measure } => {
                let side = measure.powf(1.0 / x.len() as f64);
                if x.iter().all(|&c| (0.0..side).contains(&c)) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFamily::Dilated { base, s } => {
                let y: Vec<f64> = x.iter().map(|c| c * s).collect();
                base.eval(&y)
            }
        }
    }

    /// Bounding interval `[lo, hi]` of the support along each axis.
    pub fn support_bounds(&self, dim: usize) -> (f64, f64) {
        match self {
            TestFamily::GaussianBump { radius } | TestFamily::PolynomialBump { radius, .. } => (-radius, *radius),
            TestFamily::SaBump { .. } => (-2.0, 2.0),
            TestFamily::Indicator { measure } => (0.0, measure.powf(1.0 / dim as f64)),
            TestFamily::Dilated { base, s } => {
                let (lo, hi) = base.support_bounds(dim);
                (lo / s, hi / s)
            }
        }
    }

    /// Largest distance from the origin to the support along an axis.
    pub fn support_radius(&self, dim: usize) -> f64 {
        let (lo, hi) = self.support_bounds(dim);
        lo.abs().max(hi.abs())
    }

    /// Lebesgue measure of the support (exact for the closed forms).
    pub fn support_measure(&self, dim: usize) -> f64 {
        match self {
            TestFamily::Indicator { measure } => *measure,
            TestFamily::Dilated { base, s } => base.support_measure(dim) / s.powi(dim as i32),
            _ => {
                let r = self.support_radius(dim);
                unit_ball_volume(dim) * r.powi(dim as i32)
            }
        }
    }

    /// Dilation that collapses nested dilations: `dilate(dilate(u, s), t) = dilate(u, s·t)`.
    pub fn dilate(&self, s: f64) -> Result<TestFamily> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation must be positive, got {s}")));
        }
        Ok(match self {
            TestFamily::Dilated { base, s: inner } => {
                let total = inner * s;
                if total == 1.0 {
                    (**base).clone()
                } else {
                    TestFamily::Dilated {
                        base: base.clone(),
                        s: total,
                    }
                }
            }
            other if s == 1.0 => other.clone(),
            other => TestFamily::Dilated {
                base: Box::new(other.clone()),
                s,
            },
        })
    }

    /// Innermost undilated family and the accumulated dilation factor.
    pub fn base_and_scale(&self) -> (&TestFamily, f64) {
        match self {
            TestFamily::Dilated { base, s } => {
                let (b, inner) = base.base_and_scale();
                (b, inner * s)
            }
            other => (other, 1.0),
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Radial profile of the two-piece bump used by the scaling argument.
pub fn sa_bump_profile(k: u32, r: f64) -> f64 {
    if r < 1.0 {
        2.0 - r.powi(k as i32)
    } else if r <= 2.0 {
        (2.0 - r).powi(k as i32)
    } else {
        0.0
    }
}

/// Volume of the unit Euclidean ball in dimension `n <= 3`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unit_ball_volume only defined for n <= 3"),
    }
}

/// Samples a test family at cell centers.
///
/// Fails with [`Error::SupportOverflow`] when the (dilated) support does not
/// fit inside the box with the required margin of zero layers.
pub fn sample(spec: &TestFamily, shape: GridShape) -> Result<GridFunction> {
    spec.validate()?;
    let (lo, hi) = spec.support_bounds(shape.dim);
    let limit = shape.half_width - SUPPORT_MARGIN as f64 * shape.spacing();
    if lo < -limit || hi > limit {
        return Err(Error::SupportOverflow(format!(
            "support [{lo}, {hi}] per axis does not fit in [-{limit}, {limit}] (half_width {}, margin {SUPPORT_MARGIN} cells)",
            shape.half_width
        )));
    }
    GridFunction::from_fn(shape, |x| spec.eval(x))
}

/// Order-`j` derivative tensor by `j` iterated second-order central differences.
///
/// Outside the box the function is extended by zero; the outermost
/// [`SUPPORT_MARGIN`] layers of the result are set to zero.
pub fn derivative_tensor(f: &GridFunction, j: usize) -> Result<GridFunction> {
    if !f.is_scalar() {
        return Err(Error::InvalidGrid(
            "derivative_tensor needs a scalar grid function".into(),
        ));
    }
    if j == 0 {
        return Err(Error::InvalidParameter("derivative order must be >= 1".into()));
    }
    if 2 * j >= f.res {
        return Err(Error::ResolutionTooCoarse { order: j, res: f.res });
    }
    let shape = f.shape();
    let n = shape.dim;
    let m = shape.res;
    let cells = shape.num_cells();
    let inv_2h = 1.0 / (2.0 * shape.spacing());

    let mut comps = 1;
    let mut cur = f.values.clone();
    for _ in 0..j {
        let next_comps = comps * n;
        let mut next = vec![0.0; cells * next_comps];
        for p in 0..cells {
            let idx = shape.unravel(p);
            for axis in 0..n {
                let stride = shape.stride(axis);
                let i = idx[axis];
                for c in 0..comps {
                    let fwd = if i + 1 < m { cur[(p + stride) * comps + c] } else { 0.0 };
                    let bwd = if i > 0 { cur[(p - stride) * comps + c] } else { 0.0 };
                    next[p * next_comps + c * n + axis] = (fwd - bwd) * inv_2h;
                }
            }
        }
        cur = next;
        comps = next_comps;
    }

    let margin = SUPPORT_MARGIN.min(m / 2);
    for p in 0..cells {
        let idx = shape.unravel(p);
        if idx[..n].iter().any(|&i| i < margin || i >= m - margin) {
            cur[p * comps..(p + 1) * comps].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    GridFunction::from_values(shape, j, cur)
}

/// Per-cell Euclidean norm over all tensor entries.
pub fn magnitude(f: &GridFunction) -> GridFunction {
    GridFunction {
        dim: f.dim,
        half_width: f.half_width,
        res: f.res,
        order: 0,
        values: f.magnitudes(),
    }
}

/// Dilated family `x ↦ base(s·x)`.
pub fn dilate(spec: &TestFamily, s: f64) -> Result<TestFamily> {
    spec.dilate(s)
}

// --- textual form -----------------------------------------------------------

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFamily::GaussianBump { radius } => write!(f, "gauss:r={radius}"),
            TestFamily::PolynomialBump { radius, power } => write!(f, "poly:r={radius},m={power}"),
            TestFamily::SaBump { k } => write!(f, "sa_bump:k={k}"),
            TestFamily::Indicator { measure } => write!(f, "chi:{measure}"),
            TestFamily::Dilated { base, s } => write!(f, "dil:{s}:{base}"),
        }
    }
}

impl FromStr for TestFamily {
    type Err = Error;

    /// Accepts `gauss[:r=R]`, `poly[:r=R,m=M]`, `sa_bump:k=K`, `chi[:A]` and
    /// `dil:S:<family>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let offset = head.len() + 1;
        let spec = match head {
            "gauss" | "gaussian_bump" => {
                let kv = parse_kv(rest.unwrap_or(""), offset)?;
                TestFamily::GaussianBump {
                    radius: kv_get(&kv, "r", 1.0, offset)?,
                }
            }
            "poly" | "polynomial_bump" => {
                let kv = parse_kv(rest.unwrap_or(""), offset)?;
                TestFamily::PolynomialBump {
                    radius: kv_get(&kv, "r", 1.0, offset)?,
                    power: kv_get(&kv, "m", 6.0, offset)? as u32,
                }
            }
            "sa_bump" | "sa" => {
                let kv = parse_kv(rest.unwrap_or(""), offset)?;
                let k = kv_get(&kv, "k", f64::NAN, offset)?;
                if !(k.is_finite() && k >= 1.0 && k.fract() == 0.0) {
                    return Err(Error::parse(
                        offset,
                        "sa_bump needs an integer k >= 1 (e.g. sa_bump:k=2)",
                    ));
                }
                TestFamily::SaBump { k: k as u32 }
            }
            "chi" | "indicator" => {
                let measure = match rest {
                    Some(a) => parse_num(a, offset)?,
                    None => 1.0,
                };
                TestFamily::Indicator { measure }
            }
            "dil" | "dilated" => {
                let rest = rest.ok_or_else(|| Error::parse(offset, "dil needs S:<family>"))?;
                let (sv, base) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(offset, "dil needs S:<family>"))?;
                let base: TestFamily = base.parse().map_err(|e| shift_parse(e, offset + sv.len() + 1))?;
                TestFamily::Dilated {
                    base: Box::new(base),
                    s: parse_num(sv, offset)?,
                }
            }
            other => {
                return Err(Error::parse(
                    0,
                    format!("unknown family `{other}` (expected gauss, poly, sa_bump, chi or dil)"),
                ))
            }
        };
        spec.validate().map_err(|e| Error::parse(0, e.to_string()))?;
        Ok(spec)
    }
}

fn shift_parse(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { position, message } => Error::Parse {
            position: position + by,
            message,
        },
        other => other,
    }
}

pub(crate) fn parse_num(s: &str, position: usize) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::parse(position, format!("expected a number, found `{t}`"))),
    }
}

fn parse_kv(s: &str, position: usize) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let mut pos = position;
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(pos, format!("expected key=value, found `{part}`")))?;
        out.push((k.trim().to_string(), parse_num(v, pos + k.len() + 1)?));
        pos += part.len() + 1;
    }
    Ok(out)
}

fn kv_get(kv: &[(String, f64)], key: &str, default: f64, position: usize) -> Result<f64> {
    for (k, _) in kv {
        if !["r", "m", "k"].contains(&k.as_str()) {
            return Err(Error::parse(position, format!("unknown parameter `{k}`")));
        }
    }
    Ok(kv.iter().find(|(k, _)| k == key).map_or(default, |(_, v)| *v))
}
