use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gnlab::gn::{
    auto_half_width, best_constant_scan, mazya_ratio, verify_lorentz, verify_orlicz, verify_ribfs, Form,
    OrliczVerification, Verdict,
};
use gnlab::holder::{lorentz_factor, lorentz_saturator_steps, orlicz_factor_check, steps_from_pairs};
use gnlab::maximal::{default_t_grid, riesz_herz_ratio};
use gnlab::numerics::logspace;
use gnlab::scaling::{falsify_with, necessary_condition, FalsifyReport, FalsifyVerdict};
use gnlab::spaces::upper_index_details;
use gnlab::{fundamental_function, sample, GridFunction, GridShape, SpaceSpec, TestFamily, YoungFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{parse_family, parse_space, Mode, VerifyConfig};
use crate::{GridArgs, Outcome, ScanKind, TripleArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn sink(out: Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(w))
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn shape_for(family: &[TestFamily], grid: &GridArgs) -> Result<GridShape> {
    let hw = grid
        .half_width
        .unwrap_or_else(|| auto_half_width(family, grid.dim, grid.res));
    Ok(GridShape::new(grid.dim, hw, grid.res)?)
}

// --- rearrange ---------------------------------------------------------------

pub fn rearrange(
    family: Option<String>,
    input: Option<PathBuf>,
    grid: &GridArgs,
    t_samples: usize,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let f: GridFunction = match (family, input) {
        (Some(s), None) => {
            let spec = parse_family("--family", &s)?;
            sample(&spec, shape_for(std::slice::from_ref(&spec), grid)?)?
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing grid function {}", path.display()))?
        }
        _ => bail!("give exactly one of --family and --input"),
    };
    let r = gnlab::rearrange(&f);
    if r.is_empty() {
        bail!("the grid function vanishes identically");
    }
    if t_samples < 2 {
        bail!("--t-samples must be at least 2");
    }
    let m = r.total_measure();
    let mut w = sink(out)?;
    w.write_record(["t", "u_star", "u_double_star"])?;
    for t in logspace(1e-3 * m, 1e2 * m, t_samples) {
        w.write_record([t.to_string(), r.eval(t).to_string(), r.maximal_at(t).to_string()])?;
    }
    w.flush()?;
    Ok(Outcome::Pass)
}

// --- verify ------------------------------------------------------------------

/// Wrapper written to report.json.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a VerifyConfig,
    grid: GridSummary,
    tolerances: gnlab::gn::Tolerances,
    result: T,
}

#[derive(Serialize)]
struct GridSummary {
    dim: usize,
    res: usize,
    half_width: f64,
}

fn write_outputs<T: Serialize>(
    out_dir: &Path,
    cfg: &VerifyConfig,
    half_width: f64,
    result: &T,
    text: &str,
    curve_header: &[&str],
    curve: &[Vec<f64>],
) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let env = Envelope {
        version: VERSION,
        config: cfg,
        grid: GridSummary {
            dim: cfg.dim,
            res: cfg.res,
            half_width,
        },
        tolerances: cfg.tolerances,
        result,
    };
    fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&env)?)?;
    fs::write(out_dir.join("report.txt"), text)?;
    let mut w = csv::Writer::from_path(out_dir.join("curve.csv"))?;
    w.write_record(curve_header)?;
    for row in curve {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn scan_rows(problem: &gnlab::gn::GNProblem, form: Form, s: &[f64]) -> Result<Vec<Vec<f64>>> {
    let curve = best_constant_scan(problem, form, s)?;
    Ok(curve.points.iter().map(|p| vec![p.s, p.best]).collect())
}

pub fn verify(config: &Path, mode: Option<Mode>, out_dir: &Path) -> Result<Outcome> {
    let mut cfg = VerifyConfig::load(config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    let s = cfg.s_values()?;
    match cfg.mode {
        Mode::Falsify => {
            let (x, y, z) = cfg.spaces()?;
            let rep = falsify_with(&x, &y, &z, cfg.j, cfg.k, &s, cfg.dim, cfg.res, &cfg.tolerances)?;
            let hw = auto_half_width(&[TestFamily::SaBump { k: cfg.k as u32 }], cfg.dim, cfg.res);
            let rows: Vec<Vec<f64>> = rep
                .analytic
                .iter()
                .zip(&rep.empirical)
                .map(|(a, e)| vec![a.s, a.lhs, a.rhs, a.ratio, e.1])
                .collect();
            let text = falsify_text(&rep);
            write_outputs(
                out_dir,
                &cfg,
                hw,
                &rep,
                &text,
                &["s", "analytic_lhs", "analytic_rhs", "analytic_ratio", "empirical_ratio"],
                &rows,
            )?;
            emit(&text)?;
            Ok(match rep.verdict {
                FalsifyVerdict::Falsified => Outcome::Fail,
                FalsifyVerdict::NotFalsified => Outcome::Pass,
            })
        }
        Mode::Orlicz => {
            let problem = cfg.problem()?;
            let rep = verify_orlicz(&problem)?;
            let rows = match &rep.maximal {
                Some(_) => scan_rows(&problem, Form::Maximal, &s)?,
                None => Vec::new(),
            };
            let text = orlicz_text(&rep);
            write_outputs(
                out_dir,
                &cfg,
                problem.half_width,
                &rep,
                &text,
                &["s", "best_constant"],
                &rows,
            )?;
            emit(&text)?;
            Ok(outcome(rep.verdict))
        }
        Mode::Ribfs | Mode::Lorentz => {
            let problem = cfg.problem()?;
            let (rep, form) = if cfg.mode == Mode::Ribfs {
                (verify_ribfs(&problem)?, Form::Maximal)
            } else {
                (verify_lorentz(&problem)?, Form::Plain)
            };
            let rows = scan_rows(&problem, form, &s)?;
            let text = rep.to_text();
            write_outputs(
                out_dir,
                &cfg,
                problem.half_width,
                &rep,
                &text,
                &["s", "best_constant"],
                &rows,
            )?;
            emit(&text)?;
            Ok(outcome(rep.verdict))
        }
    }
}

fn outcome(v: Verdict) -> Outcome {
    match v {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
    }
}

fn falsify_text(rep: &FalsifyReport) -> String {
    let mut s = format!(
        "falsify     X={} Y={} Z={} j={} k={} dim={} res={}\n\n{:>12}  {:>14}  {:>14}\n",
        rep.x, rep.y, rep.z, rep.j, rep.k, rep.dim, rep.res, "s", "analytic", "empirical"
    );
    for (a, e) in rep.analytic.iter().zip(&rep.empirical) {
        s += &format!("{:>12.4e}  {:>14.6e}  {:>14.6e}\n", a.s, a.ratio, e.1);
    }
    s += &format!("\nslope       {:.6}\n", rep.slope);
    s += &format!(
        "band        [{:.4}, {:.4}] (tracks: {})\n",
        rep.band.0, rep.band.1, rep.tracks
    );
    match &rep.divergence {
        Some(d) => {
            s += &format!(
                "verdict     falsified (witness {}, growth {:.3e})\n",
                d.witness, d.growth
            )
        }
        None => s += "verdict     not falsified\n",
    }
    s
}

fn orlicz_text(rep: &OrliczVerification) -> String {
    let mut s = format!(
        "compatibility sup  {:.6e}\nupper index B      {:.6}\nupper index C      {:.6}\n",
        rep.compatibility.k_cfo, rep.index_b, rep.index_c
    );
    if let Some(m) = &rep.marker {
        let d = rep.compatibility.divergence.as_ref();
        s += &format!(
            "{m}: witness {}, slope {:.4}\nrun `gnlab verify --mode falsify` on this triple\n",
            d.map_or("-".into(), |d| d.witness.to_string()),
            d.map_or(f64::NAN, |d| d.slope)
        );
    }
    for (name, sub) in [("** form", &rep.maximal), ("plain form", &rep.plain)] {
        match sub {
            Some(r) => s += &format!("\n[{name}]\n{}", r.to_text()),
            None => s += &format!("\n[{name}] not run\n"),
        }
    }
    s += &format!("\nverdict            {}\n", rep.verdict);
    s
}

// --- scan --------------------------------------------------------------------

fn families(list: &[String], default: &[&str]) -> Result<Vec<TestFamily>> {
    if list.is_empty() {
        default.iter().map(|s| parse_family("--family", s)).collect()
    } else {
        list.iter().map(|s| parse_family("--family", s)).collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn scan(
    what: ScanKind,
    family: &[String],
    grid: &GridArgs,
    triple: &TripleArgs,
    config: Option<&Path>,
    s: Option<Vec<f64>>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let mut w = sink(out)?;
    let mut outcome = Outcome::Pass;
    match what {
        ScanKind::RieszHerz => {
            let fams = families(family, &["chi:1", "gauss:r=1", "sa_bump:k=2"])?;
            w.write_record(["family", "t", "u_double_star", "mu_star", "ratio"])?;
            for f in &fams {
                let u = sample(f, shape_for(std::slice::from_ref(f), grid)?)?;
                let rh = riesz_herz_ratio(&u, &default_t_grid(gnlab::rearrange(&u).total_measure()))?;
                for (t, us, ms, ratio) in rh.curve {
                    w.write_record([
                        f.to_string(),
                        t.to_string(),
                        us.to_string(),
                        ms.to_string(),
                        ratio.to_string(),
                    ])?;
                }
            }
        }
        ScanKind::Gnnc => {
            let (x, y, z) = (
                parse_space("--x", &triple.x)?,
                parse_space("--y", &triple.y)?,
                parse_space("--z", &triple.z)?,
            );
            let ts = logspace(1e-6, 1e6, 121);
            let nc = necessary_condition(&x, &y, &z, triple.j, triple.k, &ts)?;
            w.write_record(["t", "phi_x", "phi_y", "phi_z", "ratio"])?;
            for &(t, ratio) in &nc.curve {
                w.write_record([
                    t.to_string(),
                    fundamental_function(&x, t)?.to_string(),
                    fundamental_function(&y, t)?.to_string(),
                    fundamental_function(&z, t)?.to_string(),
                    ratio.to_string(),
                ])?;
            }
            if let Some(d) = nc.divergence {
                eprintln!("necessary condition fails: witness {}, slope {:.4}", d.witness, d.slope);
                outcome = Outcome::Fail;
            }
        }
        ScanKind::Mazya => {
            let fams = families(family, &["gauss:r=1", "gauss:r=0.6", "poly:r=1,m=6"])?;
            w.write_record(["family", "res", "sup_ratio", "sup_ratio_refined", "relative_change"])?;
            for f in &fams {
                let ratio_at = |res: usize| -> Result<f64> {
                    let g = GridArgs { res, ..grid.clone() };
                    let u = sample(f, shape_for(std::slice::from_ref(f), &g)?)?;
                    Ok(mazya_ratio(&u, triple.j, triple.k)?)
                };
                let (a, b) = (ratio_at(grid.res)?, ratio_at(2 * grid.res)?);
                let change = if a > 0.0 { (b - a).abs() / a } else { 0.0 };
                w.write_record([
                    f.to_string(),
                    grid.res.to_string(),
                    a.to_string(),
                    b.to_string(),
                    change.to_string(),
                ])?;
            }
        }
        ScanKind::BestConstant => {
            let cfg = VerifyConfig::load(config.context("best-constant needs --config")?)?;
            let problem = cfg.problem()?;
            let form = match cfg.mode {
                Mode::Lorentz | Mode::Falsify => Form::Plain,
                Mode::Ribfs | Mode::Orlicz => Form::Maximal,
            };
            w.write_record(["s", "best_constant"])?;
            for row in scan_rows(&problem, form, &cfg.s_values()?)? {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
        }
        ScanKind::Falsify => {
            let (x, y, z) = (
                parse_space("--x", &triple.x)?,
                parse_space("--y", &triple.y)?,
                parse_space("--z", &triple.z)?,
            );
            let sv = match s.as_deref() {
                Some([lo, hi, n]) if *n >= 2.0 => logspace(*lo, *hi, *n as usize),
                Some(_) => bail!("--s needs MIN MAX COUNT with COUNT >= 2"),
                None => logspace(1e-2, 1e2, 17),
            };
            let rep = falsify_with(
                &x,
                &y,
                &z,
                triple.j,
                triple.k,
                &sv,
                grid.dim,
                grid.res,
                &Default::default(),
            )?;
            w.write_record(["s", "analytic_lhs", "analytic_rhs", "analytic_ratio", "empirical_ratio"])?;
            for (a, e) in rep.analytic.iter().zip(&rep.empirical) {
                w.write_record([a.s, a.lhs, a.rhs, a.ratio, e.1].map(|v| v.to_string()))?;
            }
            if rep.verdict == FalsifyVerdict::Falsified {
                eprintln!("falsified: slope {:.4}", rep.slope);
                outcome = Outcome::Fail;
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}

// --- holder ------------------------------------------------------------------

/// Random non-increasing step function with up to 20 segments.
pub fn random_steps(rng: &mut ChaCha8Rng) -> Result<gnlab::StepRearrangement> {
    let n = rng.gen_range(1..=20);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                10f64.powf(rng.gen_range(-3.0..3.0)),
                10f64.powf(rng.gen_range(-2.0..1.0)),
            )
        })
        .collect();
    Ok(steps_from_pairs(&pairs)?)
}

#[derive(Serialize)]
struct LorentzHolderOutput {
    version: &'static str,
    factorization: gnlab::holder::LorentzFactorization,
    samples: usize,
    seed: u64,
    min_ratio: f64,
    max_ratio: f64,
}

pub fn holder_lorentz(big_p: f64, p: f64, big_r: f64, r: f64, samples: usize, seed: u64) -> Result<Outcome> {
    let factorization = lorentz_factor(big_p, p, big_r, r)?;
    let (x, y, z) = (
        factorization.target(),
        factorization.given(),
        factorization.multiplier(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        let f = random_steps(&mut rng)?;
        let ratio = lorentz_saturator_steps(&f, big_p, p, big_r, r)?.holder_check(&x, &y, &z)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let out = LorentzHolderOutput {
        version: VERSION,
        factorization,
        samples,
        seed,
        min_ratio: lo,
        max_ratio: hi,
    };
    emit(&(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(if lo >= 1.0 - 1e-4 && hi <= 1.0 + 1e-8 {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

pub fn holder_orlicz(a: &str, b: &str, c: &str, pairs: usize, seed: u64) -> Result<Outcome> {
    let young = |field: &str, s: &str| -> Result<YoungFunction> {
        s.parse().with_context(|| format!("field `{field}` = \"{s}\""))
    };
    let (a, b, c) = (young("--a", a)?, young("--b", b)?, young("--c", c)?);
    let rep = orlicz_factor_check(&a, &b, &c, pairs, seed)?;
    #[derive(Serialize)]
    struct Out<'a> {
        version: &'static str,
        a: String,
        b: String,
        c: String,
        report: &'a gnlab::holder::OrliczFactorReport,
    }
    let out = Out {
        version: VERSION,
        a: a.to_string(),
        b: b.to_string(),
        c: c.to_string(),
        report: &rep,
    };
    emit(&(serde_json::to_string_pretty(&out)? + "\n"))?;
    let holds = rep.unbounded.is_none() && rep.k_ii_pass && rep.ratio_i <= 2.0 * rep.k_iii * (1.0 + 1e-6);
    if rep.unbounded.is_some() {
        eprintln!("condition (iii) unbounded");
    }
    Ok(if holds { Outcome::Pass } else { Outcome::Fail })
}

// --- young-check -------------------------------------------------------------

pub fn young_check(s: &str) -> Result<Outcome> {
    let a: YoungFunction = s.parse().with_context(|| format!("Young function \"{s}\""))?;
    #[derive(Serialize)]
    struct Out {
        version: &'static str,
        young: String,
        index: gnlab::spaces::IndexEstimate,
        fundamental: Vec<(f64, f64)>,
    }
    let space = SpaceSpec::orlicz(a.clone());
    let fundamental = logspace(1e-6, 1e6, 13)
        .into_iter()
        .map(|t| Ok((t, fundamental_function(&space, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let out = Out {
        version: VERSION,
        young: a.to_string(),
        index: upper_index_details(&a),
        fundamental,
    };
    emit(&(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(Outcome::Pass)
}
