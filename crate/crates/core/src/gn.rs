//! Gagliardo–Nirenberg inequalities `‖∇ʲu‖_X ≲ ‖∇ᵏu‖_Y^{j/k} ‖u‖_Z^{1−j/k}`
//! evaluated on test families.
//!
//! Three modes share one evaluation path:
//!
//! * r.i. spaces: `‖∇ʲu‖_X` against `‖(∇ᵏu)**‖_Y^{j/k} ‖u**‖_Z^{1−j/k}` with a
//!   user-supplied `Z`, after a proxy check of `Y^{k/j} ↪loc X`;
//! * Lorentz: plain norms, exponents tied by
//!   `1/P = (j/k)/R + (1−j/k)/Q` and `1/p = (j/k)/r + (1−j/k)/q`;
//! * Orlicz: the `**` form whenever `B^{-1}(t)^{j/k} C^{-1}(t)^{1−j/k} ≲ A^{-1}(t)`,
//!   plus the plain form when the upper indices of `L^B` and `L^C` are below 1.
//!
//! Dilation scans sample `u(s·)` on the grid scaled by `1/s`, so every
//! dilate is resolved by the same number of cells.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{derivative_tensor, sample, GridFunction, GridShape, TestFamily};
use crate::holder::{inverse_product_divergence, local_embedding_proxy, refined_sup, EmbeddingProxy};
use crate::maximal::maximal_operator;
use crate::numerics::{logspace, Divergence, LOG_GRID_MAX, LOG_GRID_MIN};
use crate::rearrange::{maximal_step_majorant, rearrange, StepRearrangement};
use crate::spaces::{convexify, space_norm, upper_index_estimate, young_inverse, SpaceSpec, YoungFunction};

/// Relative floor on `Mu` below which cells are skipped in [`mazya_ratio`].
pub const MAZYA_FLOOR: f64 = 1e-12;
/// Tolerance on the exponent balance of the Lorentz mode.
pub const BALANCE_TOL: f64 = 1e-12;
/// Marker attached to Orlicz reports whose compatibility ratio diverges.
pub const CFO_DIVERGENT: &str = "CFO divergent";

/// Tolerances used by the verifiers; all of them end up in the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Largest relative change of the best constant under one resolution doubling.
    pub stability: f64,
    /// Relative floor on `Mu` in the Maz'ya ratio.
    pub mazya_floor: f64,
    /// Tolerance on the Lorentz exponent balance.
    pub balance: f64,
    /// Growth factor and window (in decades) of the scaling divergence test.
    pub divergence_factor: f64,
    pub divergence_decades: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stability: 0.2,
            mazya_floor: MAZYA_FLOOR,
            balance: BALANCE_TOL,
            divergence_factor: 100.0,
            divergence_decades: 4.0,
        }
    }
}

/// One inequality instance: orders, spaces, test family and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GNProblem {
    pub j: usize,
    pub k: usize,
    pub x: SpaceSpec,
    pub y: SpaceSpec,
    pub z: SpaceSpec,
    pub family: Vec<TestFamily>,
    pub dim: usize,
    pub res: usize,
    pub half_width: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl GNProblem {
    /// Problem on a box sized by [`auto_half_width`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        j: usize,
        k: usize,
        x: SpaceSpec,
        y: SpaceSpec,
        z: SpaceSpec,
        family: Vec<TestFamily>,
        dim: usize,
        res: usize,
    ) -> Result<Self> {
        let half_width = auto_half_width(&family, dim, res);
        let p = Self {
            j,
            k,
            x,
            y,
            z,
            family,
            dim,
            res,
            half_width,
            tolerances: Tolerances::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.j && self.j < self.k && self.k <= 4) {
            return Err(Error::InvalidParameter(format!(
                "orders must satisfy 1 <= j < k <= 4, got j={}, k={}",
                self.j, self.k
            )));
        }
        self.x.validate()?;
        self.y.validate()?;
        self.z.validate()?;
        if self.family.is_empty() {
            return Err(Error::InvalidParameter("empty test family".into()));
        }
        for f in &self.family {
            f.validate()?;
        }
        self.shape().map(|_| ())
    }

    pub fn theta(&self) -> f64 {
        self.j as f64 / self.k as f64
    }

    pub fn shape(&self) -> Result<GridShape> {
        GridShape::new(self.dim, self.half_width, self.res)
    }

    fn with_res(&self, res: usize) -> Self {
        Self { res, ..self.clone() }
    }
}

/// Half-width fitting every family member with a margin of four cells plus 5%.
pub fn auto_half_width(family: &[TestFamily], dim: usize, res: usize) -> f64 {
    let r = family.iter().map(|f| f.support_radius(dim)).fold(0.0, f64::max);
    let r = if r > 0.0 { r * 1.05 } else { 1.0 };
    // h = 2L/res and L >= r + 4h
    r / (1.0 - 8.0 / res as f64).max(0.5)
}

/// Which right-hand side is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `‖∇ᵏu‖_Y^{j/k} ‖u‖_Z^{1−j/k}`.
    Plain,
    /// `‖(∇ᵏu)**‖_Y^{j/k} ‖u**‖_Z^{1−j/k}`.
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Constants of the three steps `Maz'ya → Hölder → Riesz–Herz` for one function.
///
/// With `F = M(∇ᵏu)`, `G = Mu`, `θ = j/k`:
/// `mazya` is the Maz'ya ratio, `holder = ‖F^θ G^{1−θ}‖_X / (‖F‖_Y^θ ‖G‖_Z^{1−θ})`
/// and `riesz_herz = ‖F‖_Y^θ ‖G‖_Z^{1−θ} / rhs`. Their product bounds `lhs/rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofChain {
    pub mazya: f64,
    pub holder: f64,
    pub riesz_herz: f64,
    pub product: f64,
    /// `lhs <= mazya·‖F^θ G^{1−θ}‖_X` up to rounding.
    pub consistent: bool,
}

/// Evaluation of one family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub family: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ProofChain>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub mode: String,
    pub form: Form,
    pub j: usize,
    pub k: usize,
    pub x: String,
    pub y: String,
    pub z: String,
    pub dim: usize,
    pub res: usize,
    pub half_width: f64,
    pub tolerances: Tolerances,
    pub version: String,
}

/// Outcome of a verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub records: Vec<FunctionRecord>,
    /// Largest ratio over the family.
    pub best_constant: f64,
    /// Same quantity at twice the resolution.
    pub refined_constant: f64,
    /// `|refined − best| / best`.
    pub relative_change: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<EmbeddingProxy>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut s = String::new();
        let _ = writeln!(s, "mode        {} ({:?} form)", m.mode, m.form);
        let _ = writeln!(s, "orders      j={} k={}", m.j, m.k);
        let _ = writeln!(s, "spaces      X={} Y={} Z={}", m.x, m.y, m.z);
        let _ = writeln!(s, "grid        dim={} res={} half_width={}", m.dim, m.res, m.half_width);
        let _ = writeln!(s, "version     {}", m.version);
        let _ = writeln!(s);
        let width = self.records.iter().map(|r| r.family.len()).max().unwrap_or(6).max(6);
        let _ = writeln!(s, "{:<width$}  {:>14}  {:>14}  {:>14}", "family", "lhs", "rhs", "ratio");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{:<width$}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
                r.family, r.lhs, r.rhs, r.ratio
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "best constant     {:.6e}", self.best_constant);
        let _ = writeln!(s, "at res {:<10} {:.6e}", 2 * m.res, self.refined_constant);
        let _ = writeln!(
            s,
            "relative change   {:.3e} (tolerance {})",
            self.relative_change, m.tolerances.stability
        );
        let _ = writeln!(s, "verdict           {}", self.verdict);
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

// --- Maz'ya ------------------------------------------------------------------

/// `sup |∇ʲu| / (M(∇ᵏu)^{j/k} (Mu)^{1−j/k})` over cells with `Mu > 1e-12·sup|u|`.
/// Returns 0 for `u ≡ 0`.
pub fn mazya_ratio(u: &GridFunction, j: usize, k: usize) -> Result<f64> {
    mazya_ratio_with_floor(u, j, k, MAZYA_FLOOR)
}

pub fn mazya_ratio_with_floor(u: &GridFunction, j: usize, k: usize, floor: f64) -> Result<f64> {
    if !(1 <= j && j < k) {
        return Err(Error::InvalidParameter(format!("need 1 <= j < k, got j={j}, k={k}")));
    }
    let sup = u.sup_norm();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let dj = derivative_tensor(u, j)?.magnitudes();
    let mk = maximal_operator(&derivative_tensor(u, k)?).magnitudes();
    let mu = maximal_operator(u).magnitudes();
    Ok(mazya_sup(&dj, &mk, &mu, j as f64 / k as f64, floor * sup))
}

fn mazya_sup(dj: &[f64], mk: &[f64], mu: &[f64], theta: f64, floor: f64) -> f64 {
    let mut best = 0.0f64;
    for ((&a, &f), &g) in dj.iter().zip(mk).zip(mu) {
        if g <= floor || a == 0.0 {
            continue;
        }
        let den = f.powf(theta) * g.powf(1.0 - theta);
        best = best.max(if den > 0.0 { a / den } else { f64::INFINITY });
    }
    best
}

// --- evaluation --------------------------------------------------------------

struct Instance<'a> {
    j: usize,
    k: usize,
    x: &'a SpaceSpec,
    y: &'a SpaceSpec,
    z: &'a SpaceSpec,
    form: Form,
    chain: bool,
    floor: f64,
}

impl Instance<'_> {
    fn theta(&self) -> f64 {
        self.j as f64 / self.k as f64
    }

    fn rhs_norm(&self, r: &StepRearrangement, space: &SpaceSpec) -> Result<f64> {
        match self.form {
            Form::Plain => space_norm(r, space),
            Form::Maximal => space_norm(&maximal_step_majorant(r), space),
        }
    }

    fn evaluate(&self, spec: &TestFamily, shape: GridShape) -> Result<FunctionRecord> {
        self.evaluate_grid(&sample(spec, shape)?, spec.to_string())
    }

    fn evaluate_grid(&self, u: &GridFunction, label: String) -> Result<FunctionRecord> {
        let dj = derivative_tensor(u, self.j)?;
        let dk = derivative_tensor(u, self.k)?;
        let theta = self.theta();
        let lhs = space_norm(&rearrange(&dj), self.x)?;
        let ny = self.rhs_norm(&rearrange(&dk), self.y)?;
        let nz = self.rhs_norm(&rearrange(u), self.z)?;
        let rhs = ny.powf(theta) * nz.powf(1.0 - theta);
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let chain = if self.chain && rhs > 0.0 {
            Some(self.proof_chain(u, &dj, &dk, lhs, rhs)?)
        } else {
            None
        };
        Ok(FunctionRecord {
            family: label,
            lhs,
            rhs,
            ratio,
            chain,
        })
    }

    fn proof_chain(
        &self,
        u: &GridFunction,
        dj: &GridFunction,
        dk: &GridFunction,
        lhs: f64,
        rhs: f64,
    ) -> Result<ProofChain> {
        let theta = self.theta();
        let mk = maximal_operator(dk).magnitudes();
        let mu = maximal_operator(u).magnitudes();
        let mazya = mazya_sup(&dj.magnitudes(), &mk, &mu, theta, self.floor * u.sup_norm());
        let weights = u.cell_volume();
        let mixed = StepRearrangement::from_weighted(
            mk.iter()
                .zip(&mu)
                .map(|(f, g)| (f.powf(theta) * g.powf(1.0 - theta), weights)),
        )?;
        let to_steps = |v: &[f64]| StepRearrangement::from_weighted(v.iter().map(|&a| (a, weights)));
        let n_mixed = space_norm(&mixed, self.x)?;
        let split =
            space_norm(&to_steps(&mk)?, self.y)?.powf(theta) * space_norm(&to_steps(&mu)?, self.z)?.powf(1.0 - theta);
        let holder = n_mixed / split;
        let riesz_herz = split / rhs;
        Ok(ProofChain {
            mazya,
            holder,
            riesz_herz,
            product: mazya * holder * riesz_herz,
            consistent: lhs <= mazya * n_mixed * (1.0 + 1e-9),
        })
    }
}

/// Ratio of one grid function; `chain` adds the proof-chain constants
/// (only meaningful for [`Form::Maximal`]).
#[allow(clippy::too_many_arguments)]
pub fn gn_ratio(
    u: &GridFunction,
    j: usize,
    k: usize,
    x: &SpaceSpec,
    y: &SpaceSpec,
    z: &SpaceSpec,
    form: Form,
    chain: bool,
) -> Result<FunctionRecord> {
    if !(1 <= j && j < k) {
        return Err(Error::InvalidParameter(format!("need 1 <= j < k, got j={j}, k={k}")));
    }
    let inst = Instance {
        j,
        k,
        x,
        y,
        z,
        form,
        chain,
        floor: MAZYA_FLOOR,
    };
    inst.evaluate_grid(u, "grid".into())
}

fn evaluate_family(inst: &Instance<'_>, family: &[TestFamily], shape: GridShape) -> Result<Vec<FunctionRecord>> {
    family.par_iter().map(|f| inst.evaluate(f, shape)).collect()
}

fn best_of(records: &[FunctionRecord]) -> f64 {
    records.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn run(problem: &GNProblem, mode: &str, form: Form, hypothesis: Option<EmbeddingProxy>) -> Result<VerificationReport> {
    problem.validate()?;
    let tol = problem.tolerances;
    let base = Instance {
        j: problem.j,
        k: problem.k,
        x: &problem.x,
        y: &problem.y,
        z: &problem.z,
        form,
        chain: form == Form::Maximal,
        floor: tol.mazya_floor,
    };
    let records = evaluate_family(&base, &problem.family, problem.shape()?)?;
    let refined = Instance { chain: false, ..base };
    let fine = problem.with_res(2 * problem.res);
    let refined_records = evaluate_family(&refined, &fine.family, fine.shape()?)?;
    let best = best_of(&records);
    let refined_constant = best_of(&refined_records);
    let relative_change = if best > 0.0 {
        (refined_constant - best).abs() / best
    } else if refined_constant == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let pass = best.is_finite() && relative_change <= tol.stability;
    let mut notes = vec![format!(
        "cells with Mu <= {:e}·sup|u| are excluded from Maz'ya ratios",
        tol.mazya_floor
    )];
    if form == Form::Maximal {
        notes.push("** norms use a step majorant of r** (log pieces of ratio <= 1.005, 12-decade tail)".into());
    }
    Ok(VerificationReport {
        meta: ReportMeta {
            mode: mode.into(),
            form,
            j: problem.j,
            k: problem.k,
            x: problem.x.to_string(),
            y: problem.y.to_string(),
            z: problem.z.to_string(),
            dim: problem.dim,
            res: problem.res,
            half_width: problem.half_width,
            tolerances: tol,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        records,
        best_constant: best,
        refined_constant,
        relative_change,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        hypothesis,
        notes,
    })
}

/// r.i. space mode. Fails with a hypothesis error when the proxy rejects
/// `Y^{k/j} ↪loc X`.
pub fn verify_ribfs(problem: &GNProblem) -> Result<VerificationReport> {
    problem.validate()?;
    let yk = convexify(&problem.y, problem.k as f64 / problem.j as f64)?;
    let proxy = local_embedding_proxy(&yk, &problem.x)?;
    if !proxy.holds {
        return Err(Error::Hypothesis {
            clause: format!("local embedding Y^(k/j) = {yk} into X = {}", problem.x),
            detail: format!(
                "φ_X/φ_Y^(k/j) has log-log slope {:.4} near t = 0",
                proxy.slope_near_zero
            ),
        });
    }
    run(problem, "ribfs", Form::Maximal, Some(proxy))
}

/// Checks `1/P = θ/R + (1−θ)/Q` and `1/p = θ/r + (1−θ)/q`.
pub fn lorentz_balance(x: &SpaceSpec, y: &SpaceSpec, z: &SpaceSpec, theta: f64, tol: f64) -> Result<()> {
    let exps = |s: &SpaceSpec, name: &str| {
        s.lorentz_exponents()
            .ok_or_else(|| Error::InvalidSpace(format!("{name} = {s} is not a Lorentz or Lebesgue space")))
    };
    let ((bp, p), (br, r), (bq, q)) = (exps(x, "X")?, exps(y, "Y")?, exps(z, "Z")?);
    for (name, v) in [("P", bp), ("R", br), ("Q", bq)] {
        if !(v > 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must exceed 1, got {v}")));
        }
    }
    let check = |lhs: f64, a: f64, b: f64, label: &str| {
        let rhs = theta / a + (1.0 - theta) / b;
        if (1.0 / lhs - rhs).abs() > tol {
            Err(Error::ExponentBalance(format!(
                "{label}: 1/{lhs} differs from (j/k)/{a} + (1-j/k)/{b} = {rhs}"
            )))
        } else {
            Ok(())
        }
    };
    check(bp, br, bq, "primary exponents")?;
    check(p, r, q, "secondary exponents")
}

/// Lorentz mode with plain norms.
pub fn verify_lorentz(problem: &GNProblem) -> Result<VerificationReport> {
    problem.validate()?;
    lorentz_balance(
        &problem.x,
        &problem.y,
        &problem.z,
        problem.theta(),
        problem.tolerances.balance,
    )?;
    run(problem, "lorentz", Form::Plain, None)
}

/// Sup of `B^{-1}(t)^θ C^{-1}(t)^{1−θ} / A^{-1}(t)` on 512 points of `[1e-12, 1e12]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityCheck {
    pub k_cfo: f64,
    pub divergence: Option<Divergence>,
}

pub fn compatibility_check(
    a: &YoungFunction,
    b: &YoungFunction,
    c: &YoungFunction,
    theta: f64,
) -> Result<CompatibilityCheck> {
    let ratio = |t: f64| -> Result<f64> {
        Ok(young_inverse(b, t)?.powf(theta) * young_inverse(c, t)?.powf(1.0 - theta) / young_inverse(a, t)?)
    };
    let ts = logspace(LOG_GRID_MIN, LOG_GRID_MAX, 512);
    let ys = ts.iter().map(|&t| ratio(t)).collect::<Result<Vec<f64>>>()?;
    let k_cfo = refined_sup(&ts, &ys, |t| ratio(t).unwrap_or(f64::NAN));
    Ok(CompatibilityCheck {
        divergence: inverse_product_divergence(&[(a, -1.0), (b, theta), (c, 1.0 - theta)], &ts, &ys, k_cfo),
        k_cfo,
    })
}

/// Orlicz mode: compatibility check and up to two sub-reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrliczVerification {
    pub compatibility: CompatibilityCheck,
    pub index_b: f64,
    pub index_c: f64,
    /// `**` form; absent when the compatibility ratio diverges.
    pub maximal: Option<VerificationReport>,
    /// Plain form; present only when both indices are below 1.
    pub plain: Option<VerificationReport>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
}

pub fn verify_orlicz(problem: &GNProblem) -> Result<OrliczVerification> {
    problem.validate()?;
    let young = |s: &SpaceSpec, name: &str| match s {
        SpaceSpec::Orlicz(a) => Ok(a.clone()),
        other => Err(Error::InvalidSpace(format!("{name} = {other} is not an Orlicz space"))),
    };
    let (a, b, c) = (
        young(&problem.x, "X")?,
        young(&problem.y, "Y")?,
        young(&problem.z, "Z")?,
    );
    let compatibility = compatibility_check(&a, &b, &c, problem.theta())?;
    let (index_b, index_c) = (upper_index_estimate(&b), upper_index_estimate(&c));
    if compatibility.divergence.is_some() {
        return Ok(OrliczVerification {
            compatibility,
            index_b,
            index_c,
            maximal: None,
            plain: None,
            verdict: Verdict::Fail,
            marker: Some(CFO_DIVERGENT.into()),
        });
    }
    let maximal = run(problem, "orlicz", Form::Maximal, None)?;
    let plain = if index_b < 1.0 && index_c < 1.0 {
        Some(run(problem, "orlicz", Form::Plain, None)?)
    } else {
        None
    };
    let pass = maximal.verdict == Verdict::Pass && plain.as_ref().is_none_or(|p| p.verdict == Verdict::Pass);
    Ok(OrliczVerification {
        compatibility,
        index_b,
        index_c,
        maximal: Some(maximal),
        plain,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        marker: None,
    })
}

// --- dilation scan -----------------------------------------------------------

/// Best constant over the family at one dilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub s: f64,
    pub best: f64,
    pub records: Vec<FunctionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub form: Form,
    pub points: Vec<ScanPoint>,
    pub max: f64,
    pub min: f64,
}

impl ScanCurve {
    /// `max/min` of the best constants.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// Best constant of `form` over `dilate(u, s)` for each `s`, every dilate
/// sampled on the problem grid scaled by `1/s`.
pub fn best_constant_scan(problem: &GNProblem, form: Form, s_values: &[f64]) -> Result<ScanCurve> {
    problem.validate()?;
    let inst = Instance {
        j: problem.j,
        k: problem.k,
        x: &problem.x,
        y: &problem.y,
        z: &problem.z,
        form,
        chain: false,
        floor: problem.tolerances.mazya_floor,
    };
    let base = problem.shape()?;
    let points = s_values
        .par_iter()
        .map(|&s| {
            let shape = base.scaled(s)?;
            let family = problem.family.iter().map(|f| f.dilate(s)).collect::<Result<Vec<_>>>()?;
            let records = family
                .iter()
                .map(|f| inst.evaluate(f, shape))
                .collect::<Result<Vec<_>>>()?;
            Ok(ScanPoint {
                s,
                best: best_of(&records),
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = points.iter().map(|p| p.best).fold(0.0, f64::max);
    let min = points.iter().map(|p| p.best).fold(f64::INFINITY, f64::min);
    Ok(ScanCurve { form, points, max, min })
}
