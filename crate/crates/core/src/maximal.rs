//! Discrete uncentered cubic Hardy–Littlewood maximal operator and the
//! Riesz–Herz comparison between `u**` and `(Mu)*`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridShape};
use crate::numerics::logspace_per_decade;
use crate::rearrange::rearrange;

/// Cells of a flat row-major array split into lines along `axis`.
struct Lines {
    outer: usize,
    len: usize,
    stride: usize,
}

impl Lines {
    fn new(dims: &[usize], axis: usize) -> Self {
        Lines {
            outer: dims[..axis].iter().product(),
            len: dims[axis],
            stride: dims[axis + 1..].iter().product(),
        }
    }

    /// Start offsets of every line.
    fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.outer).flat_map(move |o| (0..self.stride).map(move |i| o * self.len * self.stride + i))
    }
}

/// Sums over windows of `l` consecutive cells along `axis`; the axis shrinks
/// to `len - l + 1` window positions.
fn window_sums(src: &[f64], dims: &mut [usize], axis: usize, l: usize) -> Vec<f64> {
    let lines = Lines::new(dims, axis);
    let out_len = lines.len + 1 - l;
    let mut out = vec![0.0; lines.outer * out_len * lines.stride];
    let mut prefix = vec![0.0; lines.len + 1];
    for (line, start) in lines.starts().enumerate() {
        for k in 0..lines.len {
            prefix[k + 1] = prefix[k] + src[start + k * lines.stride];
        }
        let (o, i) = (line / lines.stride, line % lines.stride);
        let base = o * out_len * lines.stride + i;
        for y in 0..out_len {
            out[base + y * lines.stride] = prefix[y + l] - prefix[y];
        }
    }
    dims[axis] = out_len;
    out
}

/// `out[x] = max{src[y] : x - l < y <= x}` along `axis`, expanding the axis
/// back to `full` cells (monotone deque).
fn sliding_max(src: &[f64], dims: &mut [usize], axis: usize, l: usize, full: usize) -> Vec<f64> {
    let lines = Lines::new(dims, axis);
    let mut out = vec![0.0; lines.outer * full * lines.stride];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (line, start) in lines.starts().enumerate() {
        let (o, i) = (line / lines.stride, line % lines.stride);
        let base = o * full * lines.stride + i;
        dq.clear();
        for x in 0..full {
            if x < lines.len {
                let v = src[start + x * lines.stride];
                while dq.back().is_some_and(|&b| src[start + b * lines.stride] <= v) {
                    dq.pop_back();
                }
                dq.push_back(x);
            }
            while dq.front().is_some_and(|&f| f + l <= x) {
                dq.pop_front();
            }
            out[base + x * lines.stride] = dq.front().map_or(0.0, |&f| src[start + f * lines.stride]);
        }
    }
    dims[axis] = full;
    out
}

/// Best average over cubes of side `l` cells containing each cell of a box
/// with extents `dims`, using only cubes inside that box.
fn best_average_at_side(src: &[f64], dims: &[usize], l: usize) -> Vec<f64> {
    let full = dims.to_vec();
    let mut dims = full.clone();
    let mut cur = src.to_vec();
    for axis in 0..dims.len() {
        cur = window_sums(&cur, &mut dims, axis, l);
    }
    let vol = (l as f64).powi(dims.len() as i32);
    cur.iter_mut().for_each(|v| *v /= vol);
    for (axis, &len) in full.iter().enumerate() {
        cur = sliding_max(&cur, &mut dims, axis, l, len);
    }
    cur
}

/// Axis-aligned box of cells `lo[d]..=hi[d]`.
#[derive(Clone, Copy)]
struct CellBox {
    lo: [usize; 3],
    hi: [usize; 3],
}

impl CellBox {
    fn dims(&self, n: usize) -> Vec<usize> {
        (0..n).map(|d| self.hi[d] - self.lo[d] + 1).collect()
    }

    /// Flat indices in the `m^n` grid of the box cells, row-major.
    fn cells(&self, n: usize, m: usize) -> Vec<usize> {
        let dims = self.dims(n);
        let count: usize = dims.iter().product();
        let mut out = Vec::with_capacity(count);
        let mut idx = [0usize; 3];
        for _ in 0..count {
            out.push((0..n).fold(0, |acc, d| acc * m + self.lo[d] + idx[d]));
            let mut d = n;
            while d > 0 {
                d -= 1;
                idx[d] += 1;
                if idx[d] < dims[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }
}

/// Bounding box of the nonzero cells.
fn support_hull(mags: &[f64], n: usize, m: usize) -> Option<CellBox> {
    let mut b = CellBox {
        lo: [usize::MAX; 3],
        hi: [0; 3],
    };
    let mut any = false;
    for (p, &v) in mags.iter().enumerate() {
        if v != 0.0 {
            any = true;
            let mut q = p;
            for d in (0..n).rev() {
                let i = q % m;
                q /= m;
                b.lo[d] = b.lo[d].min(i);
                b.hi[d] = b.hi[d].max(i);
            }
        }
    }
    any.then_some(b)
}

/// Parallel pointwise maximum of `init` and the updates made by `step` for each side length.
fn sides_max<F>(sides: std::ops::RangeInclusive<usize>, init: &[f64], step: F) -> Vec<f64>
where
    F: Fn(&mut [f64], usize) + Sync,
{
    sides
        .into_par_iter()
        .fold(
            || init.to_vec(),
            |mut acc, l| {
                step(&mut acc, l);
                acc
            },
        )
        .reduce(
            || init.to_vec(),
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x = x.max(y));
                a
            },
        )
}

/// `Mf(x) = sup{|Q|^{-1} ∫_Q |f| : Q ∋ x}` over discrete cubes made of
/// `l^n` cells, `l = 1..res`, lying inside the grid box.
///
/// Restricting to the box loses nothing: a cube sticking out can be shifted
/// inward without leaving `x` and only gains mass because `f` vanishes
/// outside. Side `1` contributes `|f|` itself, so `Mf >= |f|` holds exactly.
///
/// Only cubes meeting the bounding box `H` of the support carry mass; for
/// side `l` they lie in `H` grown by `l - 1` cells, and the window-sum /
/// sliding-max sweep runs on that box alone. In one dimension cells outside
/// `H` are handled directly: the best interval runs from the cell into `H`,
/// which costs `O(|H|)` per cell.
pub fn maximal_operator(f: &GridFunction) -> GridFunction {
    let shape = f.shape();
    let (n, m) = (shape.dim, shape.res);
    let mags = f.magnitudes();
    let Some(hull) = support_hull(&mags, n, m) else {
        return GridFunction::from_values_unbounded(shape, 0, mags);
    };
    let mut out;
    let max_into = |out: &mut [f64], b: &CellBox, vals: &[f64]| {
        for (p, &v) in b.cells(n, m).into_iter().zip(vals) {
            if v > out[p] {
                out[p] = v;
            }
        }
    };
    let sweep = |b: CellBox, l: usize| -> Vec<f64> {
        let sub: Vec<f64> = b.cells(n, m).into_iter().map(|p| mags[p]).collect();
        best_average_at_side(&sub, &b.dims(n), l)
    };
    if n == 1 {
        let (lo, hi) = (hull.lo[0], hull.hi[0]);
        let w = hi - lo + 1;
        out = sides_max(2..=w, &mags, |acc, l| max_into(acc, &hull, &sweep(hull, l)));
        let inner = &mags[lo..=hi];
        let mut from_left = Vec::with_capacity(w);
        let mut acc = 0.0;
        for v in inner {
            acc += v;
            from_left.push(acc);
        }
        let mut from_right = vec![0.0; w];
        acc = 0.0;
        for k in (0..w).rev() {
            acc += inner[k];
            from_right[k] = acc;
        }
        let outside: Vec<usize> = (0..lo).chain(hi + 1..m).collect();
        let vals: Vec<f64> = outside
            .par_iter()
            .map(|&x| {
                if x < lo {
                    (0..w)
                        .map(|k| from_left[k] / (lo + k - x + 1) as f64)
                        .fold(0.0, f64::max)
                } else {
                    (0..w)
                        .map(|k| from_right[k] / (x - (lo + k) + 1) as f64)
                        .fold(0.0, f64::max)
                }
            })
            .collect();
        for (x, v) in outside.into_iter().zip(vals) {
            out[x] = v;
        }
    } else {
        let grown = |l: usize| {
            let mut b = hull;
            for d in 0..n {
                b.lo[d] = hull.lo[d].saturating_sub(l - 1);
                b.hi[d] = (hull.hi[d] + l - 1).min(m - 1);
            }
            b
        };
        out = sides_max(2..=m, &mags, |acc, l| {
            let b = grown(l);
            max_into(acc, &b, &sweep(b, l))
        });
    }
    GridFunction::from_values_unbounded(shape, 0, out)
}

/// Ratio curve `u**(t) / (Mu)*(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszHerz {
    pub c_min: f64,
    pub c_max: f64,
    /// `(t, u**(t), (Mu)*(t), ratio)`.
    pub curve: Vec<(f64, f64, f64, f64)>,
}

/// 64 log-spaced points per decade over `(1e-3, 1e2)·measure`.
pub fn default_t_grid(support_measure: f64) -> Vec<f64> {
    logspace_per_decade(1e-3 * support_measure, 1e2 * support_measure, 64)
}

/// Compares `u**` with `(Mu)*` on `t_grid`.
///
/// `(Mu)*(t)` is only meaningful while the level sets of `Mu` fit inside the
/// box, so `f` is first padded with zeros (same spacing) until the box
/// measure is at least `2·max(t_grid)`.
pub fn riesz_herz_ratio(f: &GridFunction, t_grid: &[f64]) -> Result<RieszHerz> {
    let r = rearrange(f);
    if r.is_empty() {
        return Err(Error::InvalidParameter("Riesz–Herz ratio of the zero function".into()));
    }
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let padded = f.pad(padding_for_measure(&f.shape(), 2.0 * t_max))?;
    let mr = rearrange(&maximal_operator(&padded));
    let mut curve = Vec::with_capacity(t_grid.len());
    let (mut c_min, mut c_max) = (f64::INFINITY, 0.0f64);
    for &t in t_grid {
        let (us, ms) = (r.maximal_at(t), mr.eval(t));
        let ratio = us / ms;
        c_min = c_min.min(ratio);
        c_max = c_max.max(ratio);
        curve.push((t, us, ms, ratio));
    }
    Ok(RieszHerz { c_min, c_max, curve })
}

/// Cells to add on each side so that the box measure reaches `measure`.
pub fn padding_for_measure(shape: &GridShape, measure: f64) -> usize {
    let side_needed = measure.powf(1.0 / shape.dim as f64);
    ((side_needed / shape.spacing() - shape.res as f64) / 2.0)
        .ceil()
        .max(0.0) as usize
}
