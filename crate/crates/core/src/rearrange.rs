//! Non-increasing rearrangements of sampled functions as exact step functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::numerics::logspace_per_decade;

/// One step of a rearrangement: `value` held on an interval of length `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub value: f64,
    pub width: f64,
}

/// Non-increasing right-continuous step function on `(0, ∞)`, zero beyond
/// its total measure. Values are strictly decreasing and positive; widths
/// are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct StepRearrangement {
    segments: Vec<Segment>,
    /// `ends[i]` is the right endpoint of segment `i`.
    ends: Vec<f64>,
    /// `mass[i]` is the integral over `(0, ends[i])`.
    mass: Vec<f64>,
}

impl TryFrom<Vec<Segment>> for StepRearrangement {
    type Error = Error;
    fn try_from(v: Vec<Segment>) -> Result<Self> {
        StepRearrangement::new(v)
    }
}

impl From<StepRearrangement> for Vec<Segment> {
    fn from(r: StepRearrangement) -> Self {
        r.segments
    }
}

impl StepRearrangement {
    /// Validated constructor: values strictly decreasing and positive, widths positive and finite.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.value.is_finite() && s.value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i}: value {} must be positive",
                    s.value
                )));
            }
            if !(s.width.is_finite() && s.width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i}: width {} must be positive",
                    s.width
                )));
            }
            if i > 0 && segments[i - 1].value <= s.value {
                return Err(Error::InvalidParameter(format!(
                    "segment values must be strictly decreasing at index {i}"
                )));
            }
        }
        Ok(Self::from_sorted_unchecked(segments))
    }

    fn from_sorted_unchecked(segments: Vec<Segment>) -> Self {
        let mut ends = Vec::with_capacity(segments.len());
        let mut mass = Vec::with_capacity(segments.len());
        let (mut t, mut m) = (0.0, 0.0);
        for s in &segments {
            t += s.width;
            m += s.value * s.width;
            ends.push(t);
            mass.push(m);
        }
        Self { segments, ends, mass }
    }

    /// The identically zero rearrangement.
    pub fn zero() -> Self {
        Self::from_sorted_unchecked(Vec::new())
    }

    /// Rearranges weighted samples `(value, weight)`: absolute values are
    /// sorted descending, zero values dropped and exactly equal values merged.
    pub fn from_weighted<I: IntoIterator<Item = (f64, f64)>>(samples: I) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (v, w) in samples {
            if !v.is_finite() || !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!("bad sample ({v}, {w})")));
            }
            let a = v.abs();
            if a > 0.0 && w > 0.0 {
                pts.push((a, w));
            }
        }
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(Self::from_sorted_unchecked(merge_sorted(pts)))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Measure of the set where the function is nonzero.
    pub fn total_measure(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    /// Integral of `u*` over `(0, ∞)`.
    pub fn total_mass(&self) -> f64 {
        self.mass.last().copied().unwrap_or(0.0)
    }

    /// `u*(0+)`, the essential supremum.
    pub fn sup(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.value)
    }

    /// Right endpoints of the segments.
    pub fn breakpoints(&self) -> &[f64] {
        &self.ends
    }

    /// Right-continuous evaluation of `u*(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        // first segment whose right end is strictly greater than t
        let i = self.ends.partition_point(|&e| e <= t);
        self.segments.get(i).map_or(0.0, |s| s.value)
    }

    /// `∫_0^t u*(s) ds`, exact.
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.ends.partition_point(|&e| e <= t);
        match self.segments.get(i) {
            None => self.total_mass(),
            Some(s) => {
                let (start, before) = if i == 0 {
                    (0.0, 0.0)
                } else {
                    (self.ends[i - 1], self.mass[i - 1])
                };
                before + s.value * (t - start)
            }
        }
    }

    /// `u**(t) = (1/t) ∫_0^t u*`, with the value `u*(0+)` at `t = 0`.
    pub fn maximal_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.sup()
        } else {
            self.primitive(t) / t
        }
    }

    /// `c·u` for `c >= 0` (`c = 0` gives the zero rearrangement).
    pub fn scale(&self, c: f64) -> Self {
        let c = c.abs();
        if c == 0.0 {
            return Self::zero();
        }
        Self::from_sorted_unchecked(
            self.segments
                .iter()
                .map(|s| Segment {
                    value: s.value * c,
                    width: s.width,
                })
                .collect(),
        )
    }

    /// `|u|^α`, which is again non-increasing.
    pub fn powf(&self, alpha: f64) -> Self {
        let segs: Vec<Segment> = self
            .segments
            .iter()
            .map(|s| Segment {
                value: s.value.powf(alpha),
                width: s.width,
            })
            .filter(|s| s.value > 0.0 && s.value.is_finite())
            .collect();
        // powers can collide after rounding
        Self::from_sorted_unchecked(merge_sorted(segs.into_iter().map(|s| (s.value, s.width)).collect()))
    }

    /// Values of `u*` on a partition of `(0, ends.last())` given by sorted right endpoints.
    /// Each piece takes the value of `u*` at its left endpoint.
    pub fn values_on(&self, ends: &[f64]) -> Vec<f64> {
        let mut left = 0.0;
        ends.iter()
            .map(|&e| {
                let v = self.eval(left);
                left = e;
                v
            })
            .collect()
    }
}

fn merge_sorted(pts: Vec<(f64, f64)>) -> Vec<Segment> {
    let mut segments: Vec<Segment> = Vec::with_capacity(pts.len());
    for (value, width) in pts {
        match segments.last_mut() {
            Some(last) if last.value == value => last.width += width,
            _ => segments.push(Segment { value, width }),
        }
    }
    segments
}

/// Non-increasing rearrangement of a grid function (magnitude first for tensors).
///
/// Every nonzero cell contributes `cell_volume`; equal magnitudes are merged
/// and the width of a merged step is `count · cell_volume`.
pub fn rearrange(f: &GridFunction) -> StepRearrangement {
    let cv = f.cell_volume();
    let mut mags: Vec<f64> = f.magnitudes().into_iter().filter(|v| *v > 0.0).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut segments: Vec<Segment> = Vec::new();
    let mut run = 0usize;
    for (i, &v) in mags.iter().enumerate() {
        run += 1;
        if i + 1 == mags.len() || mags[i + 1] != v {
            segments.push(Segment {
                value: v,
                width: run as f64 * cv,
            });
            run = 0;
        }
    }
    StepRearrangement::from_sorted_unchecked(segments)
}

/// `u**(t)`; fails for `t <= 0`.
pub fn maximal_rearrangement(r: &StepRearrangement, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    Ok(r.maximal_at(t))
}

/// Largest ratio between the ends of a piece of [`maximal_step_majorant`].
const MAJORANT_RATIO: f64 = 1.005;
/// Cap on the pieces per segment of [`maximal_step_majorant`].
const MAJORANT_MAX_PIECES: f64 = 4096.0;
/// Decades of the `mass/t` tail kept by [`maximal_step_majorant`].
const MAJORANT_TAIL_DECADES: usize = 12;

/// Step function majorizing `u**`.
///
/// `u**` is constant on the first segment and equals `v + c/t` with `c >= 0`
/// on every later one. Each later segment `(a, b)` and the tail `mass/t` on
/// `(T, 10^12 T)` are cut into log-spaced pieces of ratio at most `1.005`
/// (at most 4096 per segment) carrying `u**` at their left end, so the
/// majorant exceeds `u**` by less than 0.5% wherever the cap is not hit.
/// The tail beyond `10^12 T` is dropped.
pub fn maximal_step_majorant(r: &StepRearrangement) -> StepRearrangement {
    if r.is_empty() {
        return StepRearrangement::zero();
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * r.len());
    let ends = r.breakpoints();
    pts.push((r.sup(), ends[0]));
    let cut = |a: f64, b: f64, pts: &mut Vec<(f64, f64)>| {
        let pieces = ((b / a).ln() / MAJORANT_RATIO.ln())
            .ceil()
            .clamp(1.0, MAJORANT_MAX_PIECES) as usize;
        let ratio = (b / a).powf(1.0 / pieces as f64);
        let mut left = a;
        for i in 0..pieces {
            let right = if i + 1 == pieces { b } else { left * ratio };
            pts.push((r.maximal_at(left), right - left));
            left = right;
        }
    };
    for w in ends.windows(2) {
        cut(w[0], w[1], &mut pts);
    }
    let total = r.total_measure();
    let mut a = total;
    for _ in 0..MAJORANT_TAIL_DECADES {
        cut(a, 10.0 * a, &mut pts);
        a *= 10.0;
    }
    StepRearrangement::from_weighted(pts).expect("finite positive pieces")
}

/// Smallest `C` with `∫_0^t u* <= C ∫_0^t v*` for every `t > 0`.
///
/// Both partial integrals are piecewise linear with kinks at the union of
/// breakpoints, so their ratio is monotone between consecutive kinks and the
/// supremum is attained at a kink or in the limit `t → 0+`. A log-spaced
/// refinement grid (64 points per decade) is scanned as well. Returns
/// `+∞` when `v` vanishes identically but `u` does not.
pub fn hlp_constant(u: &StepRearrangement, v: &StepRearrangement) -> f64 {
    if v.is_empty() {
        return if u.is_empty() { 0.0 } else { f64::INFINITY };
    }
    if u.is_empty() {
        return 0.0;
    }
    let mut best = u.sup() / v.sup();
    let mut check = |t: f64| {
        let den = v.primitive(t);
        if den > 0.0 {
            best = best.max(u.primitive(t) / den);
        }
    };
    for &t in u.breakpoints().iter().chain(v.breakpoints()) {
        check(t);
    }
    let lo = u.breakpoints()[0].min(v.breakpoints()[0]);
    let hi = u.total_measure().max(v.total_measure());
    if hi > lo {
        for t in logspace_per_decade(lo, hi, 64) {
            check(t);
        }
    }
    best
}
