//! Hölder-type factorization: Lorentz exponent arithmetic, the saturating
//! second factor, lower bounds for the multiplier norm and the Young-function
//! factorization conditions for Orlicz spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridShape};
use crate::numerics::{
    divergence_by_monotone_growth, loglog_slope, logspace, refine_max_log, Divergence, LOG_GRID_MAX, LOG_GRID_MIN,
};
use crate::rearrange::{rearrange, StepRearrangement};
use crate::spaces::{fundamental_function, space_norm, young_inverse, SpaceSpec, YoungFunction};

fn recip(v: f64) -> f64 {
    if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

fn from_recip(v: f64) -> f64 {
    if v.abs() <= 1e-15 {
        f64::INFINITY
    } else {
        1.0 / v
    }
}

/// Exponents with `1/P = 1/R + 1/Q` and `1/p = 1/r + 1/q`: the target space
/// `L^{P,p}`, the given factor `L^{R,r}` and the multiplier `L^{Q,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzFactorization {
    pub big_p: f64,
    pub p: f64,
    pub big_r: f64,
    pub r: f64,
    pub big_q: f64,
    pub q: f64,
}

impl LorentzFactorization {
    pub fn target(&self) -> SpaceSpec {
        SpaceSpec::Lorentz {
            p: self.big_p,
            q: self.p,
        }
    }

    pub fn given(&self) -> SpaceSpec {
        SpaceSpec::Lorentz {
            p: self.big_r,
            q: self.r,
        }
    }

    pub fn multiplier(&self) -> SpaceSpec {
        SpaceSpec::Lorentz {
            p: self.big_q,
            q: self.q,
        }
    }

    /// Whether the Hölder-equality profile of the saturator is non-increasing,
    /// i.e. `r/p <= R/P`.
    pub fn is_saturable(&self) -> bool {
        self.r / self.p <= self.big_r / self.big_p * (1.0 + 1e-12)
    }
}

/// `(Q, q)` with `L^{Q,q} = (L^{R,r})^{L^{P,p}}`: `Q = 1/(1/P − 1/R)` and
/// `q = 1/(1/p − 1/r)`, with `q = ∞` when `p = r`.
pub fn lorentz_factor(big_p: f64, p: f64, big_r: f64, r: f64) -> Result<LorentzFactorization> {
    for (name, v) in [("P", big_p), ("p", p), ("R", big_r), ("r", r)] {
        if !(v >= 1.0) {
            return Err(Error::InfeasibleExponents(format!("{name} = {v} must be at least 1")));
        }
    }
    if big_p.is_infinite() || big_r.is_infinite() {
        return Err(Error::InfeasibleExponents("P and R must be finite".into()));
    }
    let dq_big = 1.0 / big_p - 1.0 / big_r;
    if dq_big <= 1e-15 {
        return Err(Error::InfeasibleExponents(format!(
            "need 1/P > 1/R, got P = {big_p}, R = {big_r}"
        )));
    }
    let dq = recip(p) - recip(r);
    if dq < -1e-15 {
        return Err(Error::InfeasibleExponents(format!(
            "need 1/p >= 1/r, got p = {p}, r = {r}"
        )));
    }
    let (big_q, q) = (1.0 / dq_big, from_recip(dq));
    if !(q >= 1.0) {
        return Err(Error::InfeasibleExponents(format!("q = {q} falls below 1")));
    }
    Ok(LorentzFactorization {
        big_p,
        p,
        big_r,
        r,
        big_q,
        q,
    })
}

/// `‖fg‖_X / (‖f‖_Y ‖g‖_Z)` for grid functions (magnitudes of tensors).
pub fn holder_check(f: &GridFunction, g: &GridFunction, x: &SpaceSpec, y: &SpaceSpec, z: &SpaceSpec) -> Result<f64> {
    let fg = f.product_magnitude(g)?;
    holder_ratio(&rearrange(&fg), &rearrange(f), &rearrange(g), x, y, z)
}

fn holder_ratio(
    fg: &StepRearrangement,
    f: &StepRearrangement,
    g: &StepRearrangement,
    x: &SpaceSpec,
    y: &SpaceSpec,
    z: &SpaceSpec,
) -> Result<f64> {
    let lhs = space_norm(fg, x)?;
    let rhs = space_norm(f, y)? * space_norm(g, z)?;
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::BugSentinel(format!(
            "‖fg‖_{x} = {lhs} while ‖f‖_{y}·‖g‖_{z} vanishes"
        )));
    }
    Ok(lhs / rhs)
}

/// Two non-increasing step functions on a common partition of `(0, T)`, so
/// that `(fg)* = f*·g*` holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSteps {
    /// Right endpoints of the pieces.
    pub ends: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl AlignedSteps {
    fn steps(&self, vals: &[f64]) -> Result<StepRearrangement> {
        let mut left = 0.0;
        StepRearrangement::from_weighted(self.ends.iter().zip(vals).map(|(&e, &v)| {
            let w = e - left;
            left = e;
            (v, w)
        }))
    }

    pub fn f_rearrangement(&self) -> Result<StepRearrangement> {
        self.steps(&self.f)
    }

    pub fn g_rearrangement(&self) -> Result<StepRearrangement> {
        self.steps(&self.g)
    }

    pub fn product_rearrangement(&self) -> Result<StepRearrangement> {
        let prod: Vec<f64> = self.f.iter().zip(&self.g).map(|(a, b)| a * b).collect();
        self.steps(&prod)
    }

    /// `‖f*g*‖_X / (‖f*‖_Y ‖g*‖_Z)`.
    pub fn holder_check(&self, x: &SpaceSpec, y: &SpaceSpec, z: &SpaceSpec) -> Result<f64> {
        holder_ratio(
            &self.product_rearrangement()?,
            &self.f_rearrangement()?,
            &self.g_rearrangement()?,
            x,
            y,
            z,
        )
    }
}

/// `∫_a^b s^{e−1} ds`.
fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    (b.powf(e) - a.powf(e)) / e
}

/// Per-piece weights of the saturating factor on the partition `ends`.
///
/// With `f` in `L^{R,r}` and `g` in `L^{Q,q}`, the target functional is
/// `Σ f_i^p g_i^p W_i` with `W_i = ∫ s^{p/P−1}` over piece `i`, and
/// `‖g‖_{Q,q}^q = Σ g_i^q V_i` with `V_i = ∫ s^{q/Q−1}`. Maximizing the
/// former under the latter gives `g_i = (f_i^p W_i / V_i)^{1/(q−p)}`; when
/// `q = ∞` the constraint is `max_i T_i^{1/Q} g_i <= 1` and `g_i = T_i^{−1/Q}`.
/// On pieces where `s` varies little this is the Hölder-equality profile
/// `g* = f*^{r/q} s^{r/(pR) − 1/P}`.
fn saturating_values(fac: &LorentzFactorization, ends: &[f64], fvals: &[f64]) -> Vec<f64> {
    let (bp, p, bq, q) = (fac.big_p, fac.p, fac.big_q, fac.q);
    let mut left = 0.0;
    ends.iter()
        .zip(fvals)
        .map(|(&e, &fv)| {
            let a = left;
            left = e;
            if fv == 0.0 {
                return 0.0;
            }
            if q.is_infinite() {
                return e.powf(-1.0 / bq);
            }
            let w = power_integral(p / bp, a, e);
            let v = power_integral(q / bq, a, e);
            ((fv.powf(p) * w / v).ln() / (q - p)).exp()
        })
        .collect()
}

fn check_saturator_exponents(big_p: f64, p: f64, big_r: f64, r: f64) -> Result<LorentzFactorization> {
    if p.is_infinite() || r.is_infinite() {
        return Err(Error::InfeasibleExponents(
            "the saturator is defined only for finite p and r".into(),
        ));
    }
    lorentz_factor(big_p, p, big_r, r)
}

/// Second factor `g` saturating `‖fg‖_{P,p} <= ‖f‖_{R,r}‖g‖_{Q,q}` on the grid.
///
/// Cells are ranked by `|f|` (descending, ties by flat index); the cell of
/// rank `k` occupies `(k·v, (k+1)·v)` of the rearrangement axis, `v` the cell
/// volume, and receives the optimal constant for that piece (see
/// [`saturating_values`]). Since `g` is constant on cells, the ratio stays
/// slightly below one; [`lorentz_saturator_steps`] removes that limit.
pub fn lorentz_saturator(f: &GridFunction, big_p: f64, p: f64, big_r: f64, r: f64) -> Result<GridFunction> {
    let fac = check_saturator_exponents(big_p, p, big_r, r)?;
    let mags = f.magnitudes();
    if mags.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter("saturator of the zero function".into()));
    }
    let mut order: Vec<usize> = (0..mags.len()).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    let cv = f.cell_volume();
    let ends: Vec<f64> = (1..=order.len()).map(|k| k as f64 * cv).collect();
    let fvals: Vec<f64> = order.iter().map(|&c| mags[c]).collect();
    let gvals = saturating_values(&fac, &ends, &fvals);
    let mut values = vec![0.0; mags.len()];
    for (&cell, g) in order.iter().zip(gvals) {
        values[cell] = g;
    }
    GridFunction::from_values(f.shape(), 0, values)
}

/// Refinement ratio of [`lorentz_saturator_steps`] at the top of the support.
const REFINE_RATIO: f64 = 1.00005;
/// Relative mass the saturator may give up on the first piece `(0, a)`.
const REFINE_TAIL: f64 = 1e-7;

/// Saturator on the rearrangement axis.
///
/// With the Hölder-equality profile `‖fg‖` is carried by `s^{κ−1} f*(s)^r`,
/// `κ = r/R`, so `(0, t)` holds a share `(t/t₀)^κ` of it for `t` below
/// `t₀ = (Σ f_i^r ΔT_i^κ)^{1/κ}/f*(0+) <= T`. The axis is refined with ratio
/// `REFINE_RATIO` from `T` down to `t₀`, then with ratio
/// `1 + (REFINE_RATIO − 1)(t₀/t)^{κ/2}` (at most 2), so the discretization
/// loss per unit of `ln t` keeps decaying, until `(a/t₀)^κ <= 1e-7`. The
/// breakpoints of `f*` are added and `g` is the per-piece optimum on that
/// partition.
pub fn lorentz_saturator_steps(f: &StepRearrangement, big_p: f64, p: f64, big_r: f64, r: f64) -> Result<AlignedSteps> {
    let fac = check_saturator_exponents(big_p, p, big_r, r)?;
    if f.is_empty() {
        return Err(Error::InvalidParameter("saturator of the zero function".into()));
    }
    let total = f.total_measure();
    let kappa = r / big_r;
    let top = f.segments()[0].value;
    let mut left = 0.0f64;
    let mass: f64 = f
        .segments()
        .iter()
        .map(|s| {
            let a = left;
            left += s.width;
            (s.value / top).powf(r) * (left.powf(kappa) - a.powf(kappa))
        })
        .sum();
    let t0 = mass.powf(1.0 / kappa).min(total);
    let floor = t0 * REFINE_TAIL.powf(1.0 / kappa).max(1e-300);
    let mut ends: Vec<f64> = Vec::new();
    let mut t = total;
    while t > floor {
        ends.push(t);
        let ratio = if t >= t0 {
            REFINE_RATIO
        } else {
            (1.0 + (REFINE_RATIO - 1.0) * (t0 / t).powf(0.5 * kappa)).min(2.0)
        };
        t /= ratio;
    }
    ends.push(floor);
    ends.reverse();
    ends.extend_from_slice(f.breakpoints());
    ends.sort_by(f64::total_cmp);
    ends.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    if let Some(last) = ends.last_mut() {
        *last = total;
    }
    let fvals = f.values_on(&ends);
    let gvals = saturating_values(&fac, &ends, &fvals);
    Ok(AlignedSteps {
        ends,
        f: fvals,
        g: gvals,
    })
}

// --- multiplier norm --------------------------------------------------------

/// Fundamental-function proxy for a local embedding `Y ↪loc X`:
/// `φ_X(t)/φ_Y(t)` on 64 log-spaced points of `[1e-6, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingProxy {
    pub holds: bool,
    /// Largest sampled ratio.
    pub sup: f64,
    /// Log-log slope of the ratio over the two smallest decades; the
    /// embedding fails when it is negative (ratio blowing up as `t → 0`).
    pub slope_near_zero: f64,
    pub method: String,
}

/// Tests `Y ↪loc X` via `sup_{t <= 1} φ_X(t)/φ_Y(t) < ∞`.
pub fn local_embedding_proxy(y: &SpaceSpec, x: &SpaceSpec) -> Result<EmbeddingProxy> {
    let ts = logspace(1e-6, 1.0, 64);
    let mut ratios = Vec::with_capacity(ts.len());
    for &t in &ts {
        ratios.push(fundamental_function(x, t)? / fundamental_function(y, t)?);
    }
    let near = ts.iter().take_while(|&&t| t <= 1e-4 * (1.0 + 1e-12)).count();
    let slope = loglog_slope(&ts[..near], &ratios[..near]).unwrap_or(0.0);
    Ok(EmbeddingProxy {
        holds: slope >= -1e-3,
        sup: ratios.iter().copied().fold(0.0, f64::max),
        slope_near_zero: slope,
        method: "proxy".into(),
    })
}

/// Lower bound for the multiplier norm `‖f‖_{Y^X} = sup_{‖g‖_Y <= 1} ‖fg‖_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimate {
    /// Certified lower bound; `+∞` when the local-embedding proxy fails.
    pub lower_bound: f64,
    /// Candidate that attains the bound.
    pub best_candidate: String,
    pub proxy: EmbeddingProxy,
}

/// `sup ‖fg‖_X/‖g‖_Y` over a fixed candidate family, each `g` arranged with
/// the same ordering as `f`: indicators `χ_(0,a)` for 97 log-spaced `a`,
/// truncated powers `s^{−β}` on the support of `f` for `β` in a 20-point grid
/// of `[0, 0.95]`, and the step saturator when `X` and `Y` are Lorentz spaces.
/// If the proxy for `Y ↪loc X` fails, the multiplier space does not contain
/// indicators and `+∞` is returned.
pub fn multiplier_norm_estimate(f: &GridFunction, x: &SpaceSpec, y: &SpaceSpec) -> Result<MultiplierEstimate> {
    let proxy = local_embedding_proxy(y, x)?;
    if !proxy.holds {
        return Ok(MultiplierEstimate {
            lower_bound: f64::INFINITY,
            best_candidate: "local embedding proxy fails".into(),
            proxy,
        });
    }
    let fr = rearrange(f);
    if fr.is_empty() {
        return Ok(MultiplierEstimate {
            lower_bound: 0.0,
            best_candidate: "zero function".into(),
            proxy,
        });
    }
    let total = fr.total_measure();
    let mut candidates: Vec<(String, AlignedSteps)> = Vec::new();
    let base_ends = fr.breakpoints().to_vec();
    for a in logspace(1e-8 * total, total, 97) {
        let mut ends: Vec<f64> = base_ends.iter().copied().filter(|&e| e < a).collect();
        ends.push(a);
        let fv = fr.values_on(&ends);
        candidates.push((
            format!("indicator a={a:.4e}"),
            AlignedSteps {
                g: vec![1.0; ends.len()],
                f: fv,
                ends,
            },
        ));
    }
    let mut fine: Vec<f64> = logspace(1e-10 * total, total, 400);
    fine.extend_from_slice(&base_ends);
    fine.sort_by(f64::total_cmp);
    fine.dedup();
    let fv = fr.values_on(&fine);
    for i in 0..20 {
        let beta = 0.05 * i as f64;
        let mut left = 0.0;
        let g: Vec<f64> = fine
            .iter()
            .map(|&e| {
                let v = ((left + e) / 2.0).powf(-beta);
                left = e;
                v
            })
            .collect();
        candidates.push((
            format!("power beta={beta:.2}"),
            AlignedSteps {
                ends: fine.clone(),
                f: fv.clone(),
                g,
            },
        ));
    }
    if let (Some((bp, p)), Some((bz, pz))) = (x.lorentz_exponents(), y.lorentz_exponents()) {
        // f plays the multiplier role (Q,q) = (Y^X) and g lives in Y
        if let Ok(fac) = lorentz_factor(bp, p, bz, pz) {
            if let Ok(st) = lorentz_saturator_steps(&fr, bp, p, fac.big_q, fac.q) {
                candidates.push(("saturator".into(), st));
            }
        }
    }
    let mut best = (0.0, String::new());
    for (name, c) in candidates {
        let gn = space_norm(&c.g_rearrangement()?, y)?;
        if gn == 0.0 {
            continue;
        }
        let v = space_norm(&c.product_rearrangement()?, x)? / gn;
        if v > best.0 {
            best = (v, name);
        }
    }
    Ok(MultiplierEstimate {
        lower_bound: best.0,
        best_candidate: best.1,
        proxy,
    })
}

// --- Orlicz factorization ----------------------------------------------------

/// Outcome of the three-condition check for `L^A`, `L^B`, `L^C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrliczFactorReport {
    /// `sup_{t > δ} B^{-1}(A(t))/t`, the least `K` with `A(t) <= B(Kt)` for `t > δ`.
    pub k_pre: f64,
    pub delta: f64,
    /// `sup_t C^{-1}(t)B^{-1}(t)/A^{-1}(t)` over `[1e-12, 1e12]`.
    pub k_iii: f64,
    /// Set when the condition-(iii) ratio is judged unbounded.
    pub unbounded: Option<Divergence>,
    /// `max A(st/K)/(B(s)+C(t))` on the `(s,t)` grid with `K = K_iii`.
    pub k_ii_max: f64,
    pub k_ii_pass: bool,
    /// Largest `‖fg‖_A/(‖f‖_B‖g‖_C)` over the random pairs.
    pub ratio_i: f64,
    pub pairs: usize,
    pub seed: u64,
}

/// Ratio `C^{-1}(t)B^{-1}(t)/A^{-1}(t)` on 512 log-spaced points of `[1e-12, 1e12]`.
pub fn condition_iii_curve(a: &YoungFunction, b: &YoungFunction, c: &YoungFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    let ts = logspace(LOG_GRID_MIN, LOG_GRID_MAX, 512);
    let mut ys = Vec::with_capacity(ts.len());
    for &t in &ts {
        ys.push(young_inverse(c, t)? * young_inverse(b, t)? / young_inverse(a, t)?);
    }
    Ok((ts, ys))
}

/// Sup of a sampled curve refined by golden-section search around the grid maximizer.
pub(crate) fn refined_sup<F: Fn(f64) -> f64>(ts: &[f64], ys: &[f64], f: F) -> f64 {
    let (k, &grid_max) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty curve");
    let lo = ts[k.saturating_sub(1)];
    let hi = ts[(k + 1).min(ts.len() - 1)];
    if hi > lo {
        grid_max.max(refine_max_log(f, lo, hi).1)
    } else {
        grid_max
    }
}

/// Threshold above which a finite-grid supremum is reported as unbounded.
pub const UNBOUNDED_SUP: f64 = 1e6;

/// Divergence of a ratio curve sampled on `[1e-12, 1e12]`: a sup above
/// [`UNBOUNDED_SUP`], or monotone growth toward an end that does not slow down
/// like a convergent `c − d/ln t` tail.
pub fn ratio_divergence(ts: &[f64], ys: &[f64], sup: f64) -> Option<Divergence> {
    if let Some(d) = divergence_by_monotone_growth(ts, ys, 4, 1.0) {
        return Some(d);
    }
    if sup > UNBOUNDED_SUP {
        let k = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        let witness = if k * 2 < ys.len() {
            crate::numerics::Witness::TowardZero
        } else {
            crate::numerics::Witness::TowardInfinity
        };
        return Some(Divergence {
            witness,
            growth: sup / ys.iter().copied().fold(f64::INFINITY, f64::min),
            slope: loglog_slope(ts, ys).unwrap_or(f64::NAN),
        });
    }
    None
}

/// Divergence of `R(s) = Π A_i^{-1}(s)^{w_i}` sampled as `(ts, ys)` with sup `sup`.
///
/// When every `A_i` has a known [`YoungFunction::asymptotics`], the answer is
/// exact: `A^{-1}(s) ≍ s^{1/p}|ln s|^{-a/p}` at each end, so `R ≍ s^e|ln s|^ℓ`
/// with `e = Σ w_i/p_i` and `ℓ = −Σ w_i a_i/p_i`, and `R` is unbounded toward
/// infinity iff `e > 0` or `e = 0 < ℓ` (toward zero iff `e < 0` or `e = 0 < ℓ`).
/// Otherwise falls back to [`ratio_divergence`].
pub fn inverse_product_divergence(
    terms: &[(&YoungFunction, f64)],
    ts: &[f64],
    ys: &[f64],
    sup: f64,
) -> Option<Divergence> {
    let Some(asym) = terms.iter().map(|(a, _)| a.asymptotics()).collect::<Option<Vec<_>>>() else {
        return ratio_divergence(ts, ys, sup);
    };
    let unbounded = |end: usize, sign: f64| {
        let e: f64 = terms.iter().zip(&asym).map(|((_, w), r)| w / r[end].0).sum();
        let l: f64 = -terms
            .iter()
            .zip(&asym)
            .map(|((_, w), r)| w * r[end].1 / r[end].0)
            .sum::<f64>();
        if e.abs() <= 1e-12 {
            l > 1e-12
        } else {
            sign * e > 0.0
        }
    };
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let report = |witness, end: f64| Divergence {
        witness,
        growth: end / min,
        slope: loglog_slope(ts, ys).unwrap_or(f64::NAN),
    };
    if unbounded(1, 1.0) {
        return Some(report(crate::numerics::Witness::TowardInfinity, *ys.last()?));
    }
    if unbounded(0, -1.0) {
        return Some(report(crate::numerics::Witness::TowardZero, *ys.first()?));
    }
    None
}

/// Checks the factorization conditions for `L^C ↪ (L^B)^{L^A}`:
/// the preamble `A(t) <= B(Kt)` for `t > 1`, condition (iii) on a log-grid,
/// condition (ii) with `K = K_iii` on a 64×64 grid of `(s, t)` with
/// `B(s), C(t) ∈ [1e-12, 1e12]`, and the Hölder ratio on `pairs` seeded
/// random pairs (half of them aligned, which maximizes `‖fg‖`).
pub fn orlicz_factor_check(
    a: &YoungFunction,
    b: &YoungFunction,
    c: &YoungFunction,
    pairs: usize,
    seed: u64,
) -> Result<OrliczFactorReport> {
    let delta = 1.0;
    let pre_ts = logspace(delta, LOG_GRID_MAX, 256);
    let mut k_pre = 0.0f64;
    for &t in &pre_ts {
        let at = a.eval(t);
        if at.is_finite() {
            k_pre = k_pre.max(young_inverse(b, at)? / t);
        }
    }
    let pre_ys: Vec<f64> = pre_ts
        .iter()
        .map(|&t| young_inverse(b, a.eval(t)).map_or(f64::NAN, |v| v / t))
        .collect();
    let pre_grows = divergence_by_monotone_growth(&pre_ts, &pre_ys, 4, 1.0)
        .is_some_and(|d| d.witness == crate::numerics::Witness::TowardInfinity);
    if k_pre > UNBOUNDED_SUP || pre_grows {
        return Err(Error::Hypothesis {
            clause: "compatibility A(t) <= B(Kt) for t > 1".into(),
            detail: format!("B^-1(A(t))/t grows without bound (sampled sup {k_pre:.3e})"),
        });
    }

    let (ts, ys) = condition_iii_curve(a, b, c)?;
    let ratio = |t: f64| {
        let v = young_inverse(c, t).and_then(|cv| Ok(cv * young_inverse(b, t)? / young_inverse(a, t)?));
        v.unwrap_or(f64::NAN)
    };
    let k_iii = refined_sup(&ts, &ys, ratio);
    let unbounded = inverse_product_divergence(&[(a, -1.0), (b, 1.0), (c, 1.0)], &ts, &ys, k_iii);

    let (mut k_ii_max, mut k_ii_pass) = (f64::NAN, false);
    if unbounded.is_none() {
        let ss = logspace(young_inverse(b, LOG_GRID_MIN)?, young_inverse(b, LOG_GRID_MAX)?, 64);
        let tt = logspace(young_inverse(c, LOG_GRID_MIN)?, young_inverse(c, LOG_GRID_MAX)?, 64);
        k_ii_max = 0.0;
        for &s in &ss {
            let bs = b.eval(s);
            for &t in &tt {
                let v = a.eval(s * t / k_iii) / (bs + c.eval(t));
                if v.is_finite() {
                    k_ii_max = k_ii_max.max(v);
                }
            }
        }
        k_ii_pass = k_ii_max <= 1.0 + 1e-9;
    }

    let (xa, yb, zc) = (
        SpaceSpec::Orlicz(a.clone()),
        SpaceSpec::Orlicz(b.clone()),
        SpaceSpec::Orlicz(c.clone()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = GridShape::new(1, 1.0, 64)?;
    let mut ratio_i = 0.0f64;
    for k in 0..pairs {
        let f = random_grid_function(&mut rng, shape)?;
        let g = if k % 2 == 0 {
            random_grid_function(&mut rng, shape)?
        } else {
            aligned_partner(&mut rng, &f)?
        };
        if f.sup_norm() == 0.0 || g.sup_norm() == 0.0 {
            continue;
        }
        ratio_i = ratio_i.max(holder_check(&f, &g, &xa, &yb, &zc)?);
    }
    Ok(OrliczFactorReport {
        k_pre,
        delta,
        k_iii,
        unbounded,
        k_ii_max,
        k_ii_pass,
        ratio_i,
        pairs,
        seed,
    })
}

/// Random nonnegative grid function with log-uniform values in `[1e-3, 1e3]`
/// on a random subset of the interior cells.
pub fn random_grid_function<R: Rng>(rng: &mut R, shape: GridShape) -> Result<GridFunction> {
    let m = crate::grid::SUPPORT_MARGIN;
    let density: f64 = rng.gen_range(0.2..1.0);
    let values = (0..shape.num_cells())
        .map(|p| {
            let idx = shape.unravel(p);
            let interior = idx[..shape.dim].iter().all(|&i| i >= m && i < shape.res - m);
            if interior && rng.gen_bool(density) {
                10f64.powf(rng.gen_range(-3.0..3.0))
            } else {
                0.0
            }
        })
        .collect();
    GridFunction::from_values(shape, 0, values)
}

/// Random `g` supported where `f` is, ordered like `|f|`.
fn aligned_partner<R: Rng>(rng: &mut R, f: &GridFunction) -> Result<GridFunction> {
    let mags = f.magnitudes();
    let mut order: Vec<usize> = (0..mags.len()).filter(|&i| mags[i] > 0.0).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let mut vals: Vec<f64> = order.iter().map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; mags.len()];
    for (&c, v) in order.iter().zip(vals) {
        values[c] = v;
    }
    GridFunction::from_values(f.shape(), 0, values)
}

/// Step function from `(value, width)` pairs, sorted and merged.
pub fn steps_from_pairs(pairs: &[(f64, f64)]) -> Result<StepRearrangement> {
    StepRearrangement::from_weighted(pairs.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, TestFamily};

    #[test]
    fn factor_examples() {
        let f = lorentz_factor(2.0, 2.0, 6.0, 6.0).unwrap();
        assert!((f.big_q - 3.0).abs() < 1e-12 && (f.q - 3.0).abs() < 1e-12);
        let f = lorentz_factor(2.0, 1.5, 4.0, 1.5).unwrap();
        assert_eq!(f.q, f64::INFINITY);
        assert!((f.big_q - 4.0).abs() < 1e-12);
        assert!(matches!(
            lorentz_factor(4.0, 2.0, 2.0, 2.0),
            Err(Error::InfeasibleExponents(_))
        ));
        assert!(matches!(
            lorentz_factor(2.0, 4.0, 3.0, 2.0),
            Err(Error::InfeasibleExponents(_))
        ));
    }

    #[test]
    fn indicators_saturate_lebesgue_holder() {
        let shape = GridShape::new(1, 2.0, 128).unwrap();
        let chi = sample(&TestFamily::Indicator { measure: 1.0 }, shape).unwrap();
        let r = holder_check(
            &chi,
            &chi,
            &SpaceSpec::Lebesgue(2.0),
            &SpaceSpec::Lebesgue(4.0),
            &SpaceSpec::Lebesgue(4.0),
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_saturator_reaches_one() {
        let f = steps_from_pairs(&[(3.0, 0.25), (1.0, 1.0), (0.5, 2.0)]).unwrap();
        for (bp, p, br, r) in [(2.0, 2.0, 6.0, 6.0), (2.0, 1.5, 3.0, 2.0), (2.0, 2.0, 4.0, 2.0)] {
            let fac = lorentz_factor(bp, p, br, r).unwrap();
            assert!(fac.is_saturable());
            let st = lorentz_saturator_steps(&f, bp, p, br, r).unwrap();
            let ratio = st.holder_check(&fac.target(), &fac.given(), &fac.multiplier()).unwrap();
            assert!(ratio > 1.0 - 1e-4 && ratio <= 1.0 + 1e-8, "{bp} {p} {br} {r}: {ratio}");
        }
    }

    #[test]
    fn grid_saturator_is_close_and_bounded() {
        let shape = GridShape::new(1, 2.5, 256).unwrap();
        let f = sample(&"sa_bump:k=2".parse().unwrap(), shape).unwrap();
        let (bp, p, br, r) = (2.0, 2.0, 6.0, 6.0);
        let fac = lorentz_factor(bp, p, br, r).unwrap();
        let g = lorentz_saturator(&f, bp, p, br, r).unwrap();
        let ratio = holder_check(&f, &g, &fac.target(), &fac.given(), &fac.multiplier()).unwrap();
        assert!(ratio > 0.99 && ratio <= 1.0 + 1e-8, "{ratio}");
    }

    #[test]
    fn multiplier_of_indicator_in_same_space_is_one() {
        let shape = GridShape::new(1, 2.0, 128).unwrap();
        let chi = sample(&TestFamily::Indicator { measure: 1.0 }, shape).unwrap();
        for x in [SpaceSpec::Lebesgue(2.0), SpaceSpec::Lorentz { p: 3.0, q: 1.5 }] {
            let est = multiplier_norm_estimate(&chi, &x, &x).unwrap();
            assert!((est.lower_bound - 1.0).abs() < 1e-6, "{x}: {est:?}");
        }
    }

    #[test]
    fn multiplier_infinite_without_local_embedding() {
        let shape = GridShape::new(1, 2.0, 128).unwrap();
        let chi = sample(&TestFamily::Indicator { measure: 1.0 }, shape).unwrap();
        let est = multiplier_norm_estimate(&chi, &SpaceSpec::Lebesgue(4.0), &SpaceSpec::Lebesgue(2.0)).unwrap();
        assert_eq!(est.lower_bound, f64::INFINITY);
        assert!(!est.proxy.holds);
    }

    #[test]
    fn orlicz_diagonal_and_mismatch() {
        let p = |e: f64| YoungFunction::power(e).unwrap();
        let rep = orlicz_factor_check(&p(2.0), &p(4.0), &p(4.0), 10, 7).unwrap();
        assert!((rep.k_iii - 1.0).abs() < 1e-12, "{rep:?}");
        assert!(rep.unbounded.is_none() && rep.k_ii_pass);
        assert!(rep.ratio_i <= 2.0 * rep.k_iii * (1.0 + 1e-6));
        let rep = orlicz_factor_check(&p(2.0), &p(4.0), &p(3.0), 4, 7).unwrap();
        assert!(rep.unbounded.is_some());
    }

    #[test]
    fn saturator_keeps_pieces_near_zero() {
        // tall spike on a short interval and weak weight r/R = 1/4
        let f = steps_from_pairs(&[(100.0, 0.01), (0.01, 10.0)]).unwrap();
        let st = lorentz_saturator_steps(&f, 2.0, 1.0, 4.0, 1.0).unwrap();
        assert!(st.ends[1] < 1e-20, "{:?}", &st.ends[..3]);
        let fac = lorentz_factor(2.0, 1.0, 4.0, 1.0).unwrap();
        let ratio = st.holder_check(&fac.target(), &fac.given(), &fac.multiplier()).unwrap();
        assert!(ratio > 1.0 - 5e-5 && ratio <= 1.0 + 1e-8, "{ratio}");
    }

    #[test]
    fn log_balanced_triple_is_bounded() {
        // the ratio rises toward √½ like c − d·ln ln t/ln t, which no finite window separates from ln t
        let y = |s: &str| -> YoungFunction { s.parse().unwrap() };
        let rep = orlicz_factor_check(&y("plog:2,-1"), &y("plog:4,-1"), &y("plog:4,-1"), 4, 7).unwrap();
        assert!(rep.unbounded.is_none() && rep.k_ii_pass, "{rep:?}");
        let rep = orlicz_factor_check(&y("plog:2,1"), &y("pow:4"), &y("pow:4"), 4, 7).unwrap();
        assert_eq!(rep.unbounded.unwrap().witness, crate::numerics::Witness::TowardInfinity);
        let rep = orlicz_factor_check(&y("pow:2"), &y("pow:5"), &y("pow:5"), 4, 7).unwrap();
        assert_eq!(rep.unbounded.unwrap().witness, crate::numerics::Witness::TowardZero);
    }

    #[test]
    fn tabulated_triples_use_the_sampled_test() {
        let knots = |p: f64| {
            YoungFunction::tabulated((-12..=12).map(|k| (10f64.powi(k), 10f64.powf(p * k as f64))).collect()).unwrap()
        };
        let (a, b) = (knots(2.0), knots(4.0));
        let rep = orlicz_factor_check(&a, &b, &b, 4, 7).unwrap();
        assert!(rep.unbounded.is_none(), "{rep:?}");
        let rep = orlicz_factor_check(&a, &knots(3.0), &knots(3.0), 4, 7).unwrap();
        assert!(rep.unbounded.is_some());
    }
}
