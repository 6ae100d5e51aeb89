//! Dilation argument: the fundamental-function condition
//! `φ_X ≲ φ_Y^{j/k} φ_Z^{1−j/k}` and its numerical counterpart on the
//! two-piece bump `u_s = u(s·)`.
//!
//! For the bump of order `k`, `|∇ᵏu|` equals `k!` on `B(0, 2)`, so
//! `‖∇ᵏu_s‖_Y ≈ s^k φ_Y(|B(0, 2/s)|)` and likewise for orders `j` and `0`.
//! Fundamental functions are evaluated at the measure `ω_n (2/s)^n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gn::{auto_half_width, best_constant_scan, Form, GNProblem, Tolerances};
use crate::grid::{unit_ball_volume, TestFamily};
use crate::holder::ratio_divergence;
use crate::numerics::{divergence_by_growth, loglog_slope, Divergence};
use crate::spaces::{fundamental_function, SpaceSpec};

/// Resolution of the empirical curve of [`falsify`].
pub const FALSIFY_RES: usize = 512;
/// Largest accepted factor between the empirical and analytic curves.
pub const TRACKING_BAND: f64 = 10.0;

/// `φ_X(t) / (φ_Y(t)^{j/k} φ_Z(t)^{1−j/k})` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryCondition {
    pub sup: f64,
    pub min: f64,
    pub curve: Vec<(f64, f64)>,
    pub divergence: Option<Divergence>,
}

impl NecessaryCondition {
    pub fn holds(&self) -> bool {
        self.divergence.is_none() && self.sup.is_finite()
    }
}

fn check_orders(j: usize, k: usize) -> Result<f64> {
    if 1 <= j && j < k {
        Ok(j as f64 / k as f64)
    } else {
        Err(Error::InvalidParameter(format!("need 1 <= j < k, got j={j}, k={k}")))
    }
}

/// Sup of the fundamental-function ratio over `t_grid` (sorted ascending),
/// with the divergence test used for the Orlicz compatibility condition.
pub fn necessary_condition(
    x: &SpaceSpec,
    y: &SpaceSpec,
    z: &SpaceSpec,
    j: usize,
    k: usize,
    t_grid: &[f64],
) -> Result<NecessaryCondition> {
    let theta = check_orders(j, k)?;
    let mut curve = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let r = fundamental_function(x, t)?
            / (fundamental_function(y, t)?.powf(theta) * fundamental_function(z, t)?.powf(1.0 - theta));
        curve.push((t, r));
    }
    let ys: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let sup = ys.iter().copied().fold(0.0, f64::max);
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(NecessaryCondition {
        divergence: ratio_divergence(t_grid, &ys, sup),
        sup,
        min,
        curve,
    })
}

/// `s^level φ(ω_n (2/s)^n)`, the size of `∇^level u_s` in `space`.
pub fn bump_norm_closed_forms(s: f64, space: &SpaceSpec, level: usize, dim: usize) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("dilation must be positive, got {s}")));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dim must be 1, 2 or 3, got {dim}")));
    }
    let measure = unit_ball_volume(dim) * (2.0 / s).powi(dim as i32);
    Ok(s.powi(level as i32) * fundamental_function(space, measure)?)
}

/// One dilation of the analytic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoint {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FalsifyVerdict {
    Falsified,
    NotFalsified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub x: String,
    pub y: String,
    pub z: String,
    pub j: usize,
    pub k: usize,
    pub dim: usize,
    pub res: usize,
    pub analytic: Vec<AnalyticPoint>,
    /// `(s, best constant)` of the plain inequality on the bump.
    pub empirical: Vec<(f64, f64)>,
    /// Range of `empirical/analytic`.
    pub band: (f64, f64),
    pub tracks: bool,
    /// Power-law slope of the analytic ratio in `s`.
    pub slope: f64,
    pub divergence: Option<Divergence>,
    pub verdict: FalsifyVerdict,
}

/// [`falsify_with`] at resolution [`FALSIFY_RES`] and default tolerances.
pub fn falsify(
    x: &SpaceSpec,
    y: &SpaceSpec,
    z: &SpaceSpec,
    j: usize,
    k: usize,
    s_values: &[f64],
    dim: usize,
) -> Result<FalsifyReport> {
    falsify_with(x, y, z, j, k, s_values, dim, FALSIFY_RES, &Tolerances::default())
}

/// Analytic and empirical dilation curves for the bump of order `k`.
///
/// The verdict is `Falsified` when the analytic ratio grows by
/// `tol.divergence_factor` within `tol.divergence_decades` decades of `s`.
#[allow(clippy::too_many_arguments)]
pub fn falsify_with(
    x: &SpaceSpec,
    y: &SpaceSpec,
    z: &SpaceSpec,
    j: usize,
    k: usize,
    s_values: &[f64],
    dim: usize,
    res: usize,
    tol: &Tolerances,
) -> Result<FalsifyReport> {
    let theta = check_orders(j, k)?;
    if s_values.len() < 2 || s_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "s values must be increasing, at least two".into(),
        ));
    }
    let analytic = s_values
        .par_iter()
        .map(|&s| {
            let lhs = bump_norm_closed_forms(s, x, j, dim)?;
            let rhs = bump_norm_closed_forms(s, y, k, dim)?.powf(theta)
                * bump_norm_closed_forms(s, z, 0, dim)?.powf(1.0 - theta);
            Ok(AnalyticPoint {
                s,
                lhs,
                rhs,
                ratio: lhs / rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let family = vec![TestFamily::SaBump { k: k as u32 }];
    let problem = GNProblem {
        j,
        k,
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        half_width: auto_half_width(&family, dim, res),
        family,
        dim,
        res,
        tolerances: *tol,
    };
    let scan = best_constant_scan(&problem, Form::Plain, s_values)?;
    let empirical: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.s, p.best)).collect();

    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, e) in analytic.iter().zip(&empirical) {
        let q = e.1 / a.ratio;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let tracks = lo >= 1.0 / TRACKING_BAND && hi <= TRACKING_BAND;
    let ratios: Vec<f64> = analytic.iter().map(|a| a.ratio).collect();
    let divergence = divergence_by_growth(s_values, &ratios, tol.divergence_decades, tol.divergence_factor);
    Ok(FalsifyReport {
        x: x.to_string(),
        y: y.to_string(),
        z: z.to_string(),
        j,
        k,
        dim,
        res,
        slope: loglog_slope(s_values, &ratios).unwrap_or(f64::NAN),
        verdict: if divergence.is_some() {
            FalsifyVerdict::Falsified
        } else {
            FalsifyVerdict::NotFalsified
        },
        divergence,
        analytic,
        empirical,
        band: (lo, hi),
        tracks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{logspace, Witness};

    fn sp(s: &str) -> SpaceSpec {
        s.parse().unwrap()
    }

    #[test]
    fn balanced_lorentz_ratio_is_one() {
        let ts = logspace(1e-6, 1e6, 97);
        let nc = necessary_condition(&sp("Lor:2,1"), &sp("Lor:3,1"), &sp("Lor:1.5,1"), 1, 2, &ts).unwrap();
        assert!(nc.sup / nc.min <= 1.0 + 1e-12);
        assert!((nc.sup - 1.0).abs() < 1e-12);
        assert!(nc.holds());
    }

    #[test]
    fn unbalanced_lebesgue_witnesses() {
        let ts = logspace(1e-6, 1e6, 97);
        let small = necessary_condition(&sp("Lp:1.5"), &sp("Lp:3"), &sp("Lp:3"), 1, 2, &ts).unwrap();
        assert_eq!(small.divergence.unwrap().witness, Witness::TowardInfinity);
        let large = necessary_condition(&sp("Lp:6"), &sp("Lp:3"), &sp("Lp:3"), 1, 2, &ts).unwrap();
        assert_eq!(large.divergence.unwrap().witness, Witness::TowardZero);
    }

    #[test]
    fn closed_form_homogeneity() {
        let x = sp("Lp:3");
        let a = bump_norm_closed_forms(1.0, &x, 2, 1).unwrap();
        let b = bump_norm_closed_forms(2.0, &x, 2, 1).unwrap();
        assert!((b / a - 4.0 * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((a - 4f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn balanced_triple_not_falsified() {
        let s = logspace(0.25, 4.0, 5);
        let rep = falsify_with(
            &sp("Lp:2"),
            &sp("Lp:2"),
            &sp("Lp:2"),
            1,
            2,
            &s,
            1,
            256,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, FalsifyVerdict::NotFalsified);
        let e: Vec<f64> = rep.empirical.iter().map(|p| p.1).collect();
        let spread = e.iter().copied().fold(0.0, f64::max) / e.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1.25);
        assert!(rep.tracks, "{:?}", rep.band);
    }

    #[test]
    fn mild_imbalance_has_slope_one_sixth() {
        let s = logspace(1e-2, 1e2, 9);
        let rep = falsify_with(
            &sp("Lp:2"),
            &sp("Lp:3"),
            &sp("Lp:3"),
            1,
            2,
            &s,
            1,
            128,
            &Tolerances::default(),
        )
        .unwrap();
        assert!((rep.slope + 1.0 / 6.0).abs() < 1e-9, "{}", rep.slope);
    }
}
