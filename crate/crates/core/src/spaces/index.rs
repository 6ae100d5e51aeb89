//! Upper dilation index of the fundamental function of an Orlicz space.

use serde::{Deserialize, Serialize};

use super::young::{young_inverse, YoungFunction};
use crate::numerics::{logspace, LOG_GRID_MAX, LOG_GRID_MIN};

/// Dilation scales at which `h(s)` is sampled: `s = 2^2, 2^4, …, 2^20`.
const SCALES: [i32; 10] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20];
const T_POINTS: usize = 256;

/// Diagnostics of [`upper_index_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    /// The value returned by [`upper_index_estimate`].
    pub estimate: f64,
    /// `max_s ln h(s) / ln s` over the sampled scales.
    pub max_ratio: f64,
    /// Extrapolated elasticity of `A` at zero.
    pub elasticity_at_zero: f64,
    /// Extrapolated elasticity of `A` at infinity.
    pub elasticity_at_infinity: f64,
    /// Sampled `(s, h(s))`.
    pub profile: Vec<(f64, f64)>,
    /// Set for tabulated generators, where the fundamental index is not known
    /// to coincide with the Boyd index.
    pub heuristic: bool,
}

fn phi(a: &YoungFunction, t: f64) -> f64 {
    young_inverse(a, 1.0 / t).map_or(f64::NAN, |x| 1.0 / x)
}

/// `h(s) = sup_t φ(st)/φ(t)` with `φ(t) = 1/A^{-1}(1/t)`, the sup taken over
/// 256 log-spaced `t` with `t, st ∈ [1e-12, 1e12]`.
pub fn dilation_profile(a: &YoungFunction, s: f64) -> f64 {
    logspace(LOG_GRID_MIN, LOG_GRID_MAX / s, T_POINTS)
        .into_iter()
        .map(|t| phi(a, s * t) / phi(a, t))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}

/// Numerical upper index of `φ_{L^A}`.
///
/// The upper index of `φ(t) = 1/A^{-1}(1/t)` is `1/min(p_0, p_∞)`, where
/// `p_0` and `p_∞` are the limiting elasticities `t A'(t)/A(t)` of `A` at zero
/// and at infinity. With a logarithmic factor the elasticity converges only
/// like `1/ln t`, and so does `ln h(s)/ln s`; at `s = 2^20` the latter is
/// still off by `0.1` for `t^{3/2}/ln(e+t)`. Each end is therefore fitted by
/// `p_end + c/|ln t|` over `|log10 t| ∈ [6, 12]` (13 points, central
/// differences in `ln t`) and the fitted constant is used. For pure powers
/// `c = 0` and the result is `1/p` to rounding.
pub fn upper_index_estimate(a: &YoungFunction) -> f64 {
    upper_index_details(a).estimate
}

pub fn upper_index_details(a: &YoungFunction) -> IndexEstimate {
    let profile: Vec<(f64, f64)> = SCALES
        .iter()
        .map(|&e| {
            let s = 2f64.powi(e);
            (s, dilation_profile(a, s))
        })
        .collect();
    let max_ratio = profile
        .iter()
        .map(|&(s, h)| h.ln() / s.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let at_zero = limiting_elasticity(a, -1.0);
    let at_infinity = limiting_elasticity(a, 1.0);
    IndexEstimate {
        estimate: 1.0 / at_zero.min(at_infinity),
        max_ratio,
        elasticity_at_zero: at_zero,
        elasticity_at_infinity: at_infinity,
        profile,
        heuristic: a.is_tabulated(),
    }
}

fn elasticity(a: &YoungFunction, t: f64) -> f64 {
    let h: f64 = 1e-4;
    let (up, down) = (a.eval(t * h.exp()), a.eval(t * (-h).exp()));
    (up.ln() - down.ln()) / (2.0 * h)
}

/// Intercept of the least-squares line `e(t) = p + c·x`, `x = 1/|ln t|`,
/// through elasticities sampled at `t = 10^{side·k}`, `k = 6, 6.5, …, 12`.
fn limiting_elasticity(a: &YoungFunction, side: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..13)
        .map(|i| {
            let lt = side * (6.0 + 0.5 * i as f64) * std::f64::consts::LN_10;
            (1.0 / lt.abs(), elasticity(a, lt.exp()))
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    my - sxy / sxx * mx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_index_is_reciprocal_exponent() {
        for p in [1.01, 1.25, 2.0, 4.0] {
            let est = upper_index_details(&YoungFunction::power(p).unwrap());
            assert!((est.estimate - 1.0 / p).abs() < 1e-3, "p={p}: {est:?}");
            assert!((est.max_ratio - 1.0 / p).abs() < 1e-3);
        }
    }

    #[test]
    fn log_factor_does_not_move_index() {
        for p in [1.5, 2.0, 4.0] {
            for la in [-1.0, 1.0] {
                let est = upper_index_estimate(&YoungFunction::power_log(p, la).unwrap());
                assert!((est - 1.0 / p).abs() < 0.02, "p={p} a={la}: {est}");
            }
        }
    }
}
