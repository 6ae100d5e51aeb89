//! Small numerical helpers shared across modules: log-spaced grids,
//! power-law slope fits and the divergence heuristics used to decide
//! whether a ratio curve stays bounded.

use serde::{Deserialize, Serialize};

/// Lower end of every log-grid used for Young-function and fundamental-function scans.
pub const LOG_GRID_MIN: f64 = 1e-12;
/// Upper end of every log-grid used for Young-function and fundamental-function scans.
pub const LOG_GRID_MAX: f64 = 1e12;

/// `n` points log-spaced on `[lo, hi]`, endpoints included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "logspace needs 0 < lo <= hi");
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Log-spaced points at a fixed density per decade on `[lo, hi]`.
pub fn logspace_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    logspace(lo, hi, n)
}

/// Least-squares slope of `ln y` against `ln x`. Points with non-positive
/// coordinates are skipped. Returns `None` when fewer than two points remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Direction of the parameter in which a ratio curve blows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// The ratio grows as the parameter tends to zero.
    TowardZero,
    /// The ratio grows as the parameter tends to infinity.
    TowardInfinity,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::TowardZero => write!(f, "s->0"),
            Witness::TowardInfinity => write!(f, "s->inf"),
        }
    }
}

/// Outcome of a divergence test on a sampled ratio curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub witness: Witness,
    /// Largest growth factor observed inside the test window.
    pub growth: f64,
    /// Fitted power-law exponent of the whole curve (`ratio ~ x^slope`).
    pub slope: f64,
}

/// Growth-window test: a curve is divergent when it grows by at least
/// `factor` inside some window spanning at most `decades` decades of `x`.
/// `xs` must be positive and sorted ascending.
pub fn divergence_by_growth(xs: &[f64], ys: &[f64], decades: f64, factor: f64) -> Option<Divergence> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut best: Option<(Witness, f64)> = None;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            if (xs[j] / xs[i]).log10() > decades * (1.0 + 1e-9) {
                break;
            }
            let (lo, hi) = (ys[i], ys[j]);
            let (w, g) = if hi >= lo {
                (Witness::TowardInfinity, growth_ratio(lo, hi))
            } else {
                (Witness::TowardZero, growth_ratio(hi, lo))
            };
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((w, g));
            }
        }
    }
    let (witness, growth) = best?;
    if growth >= factor {
        Some(Divergence {
            witness,
            growth,
            slope: loglog_slope(xs, ys).unwrap_or(f64::NAN),
        })
    } else {
        None
    }
}

fn growth_ratio(small: f64, large: f64) -> f64 {
    if large.is_infinite() {
        f64::INFINITY
    } else if small <= 0.0 {
        if large > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    } else {
        large / small
    }
}

/// Monotone-growth test used for the inverse-function factorization
/// conditions. Toward each end the curve is sampled once per decade over the
/// last `decades` decades; it is divergent there when it increases strictly
/// at every step, by at least `min_growth` overall, and the log-increments
/// `Δ_k` do not decay faster than `|ln x|^{-3/2}`. Slow logarithmic growth
/// (`Δ_k ~ 1/|ln x|`) is caught although it never reaches a large value,
/// while a bounded tail approaching its limit like `c − d/|ln x|`
/// (`Δ_k ~ 1/|ln x|^2`) is not.
pub fn divergence_by_monotone_growth(xs: &[f64], ys: &[f64], decades: usize, min_growth: f64) -> Option<Divergence> {
    let lo = xs.first()?.log10();
    let hi = xs.last()?.log10();
    let nearest = |target: f64| -> usize {
        xs.iter()
            .enumerate()
            .min_by(|a, b| (a.1.log10() - target).abs().total_cmp(&(b.1.log10() - target).abs()))
            .map(|(k, _)| k)
            .unwrap()
    };
    let check = |start: f64, step: f64| -> Option<f64> {
        let idx: Vec<usize> = (0..=decades).map(|d| nearest(start + step * d as f64)).collect();
        let samples: Vec<f64> = idx.iter().map(|&k| ys[k]).collect();
        if !samples.iter().all(|v| v.is_finite() && *v > 0.0) {
            return None;
        }
        let increasing = samples.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-12));
        let growth = samples.last()? / samples.first()?;
        if !(increasing && growth >= min_growth) {
            return None;
        }
        let inc: Vec<f64> = samples.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let mid: Vec<f64> = idx
            .windows(2)
            .map(|w| 0.5 * (xs[w[0]].ln().abs() + xs[w[1]].ln().abs()))
            .collect();
        let (first, last) = (0, inc.len() - 1);
        let decay = if last > first && mid[last] != mid[first] {
            -(inc[last] / inc[first]).ln() / (mid[last] / mid[first]).ln()
        } else {
            0.0
        };
        (decay < 1.5).then_some(growth)
    };
    let slope = loglog_slope(xs, ys).unwrap_or(f64::NAN);
    if (hi - lo) < decades as f64 {
        return None;
    }
    if let Some(growth) = check(hi - decades as f64, 1.0) {
        return Some(Divergence {
            witness: Witness::TowardInfinity,
            growth,
            slope,
        });
    }
    if let Some(growth) = check(lo + decades as f64, -1.0) {
        return Some(Divergence {
            witness: Witness::TowardZero,
            growth,
            slope,
        });
    }
    None
}

/// Maximizes `f` over `ln x` near a grid maximizer by golden-section search
/// on the bracket `[lo, hi]`. Used to turn a grid supremum into the supremum
/// of a smooth ratio without changing which grid point wins.
pub fn refine_max_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    let x = ((a + b) / 2.0).exp();
    (x, f(x))
}
