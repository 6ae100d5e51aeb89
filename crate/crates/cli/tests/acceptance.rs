//! The ten acceptance criteria, one pass/fail line each.
//!
//! Runs as a plain binary so that the report is printed even when every
//! criterion passes; the process fails if any criterion does.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gnlab::gn::{best_constant_scan, mazya_ratio, verify_lorentz, verify_orlicz, Form, GNProblem, Verdict};
use gnlab::holder::{lorentz_saturator_steps, orlicz_factor_check};
use gnlab::maximal::riesz_herz_ratio;
use gnlab::numerics::logspace;
use gnlab::scaling::{falsify, FalsifyVerdict};
use gnlab::{
    hlp_constant, indicator_norm, lorentz_norm, luxemburg_norm, rearrange, sample, space_norm, upper_index_estimate,
    young_inverse, GridFunction, GridShape, SpaceSpec, StepRearrangement, TestFamily, YoungFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Triple = (usize, usize, (f64, f64), (f64, f64));
type Criterion<'a> = Box<dyn Fn() -> Check + 'a>;

fn space(s: &str) -> SpaceSpec {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn young(s: &str) -> YoungFunction {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn smooth_family() -> Vec<TestFamily> {
    ["gauss:r=1", "gauss:r=0.6", "poly:r=1,m=6"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn random_steps(rng: &mut ChaCha8Rng) -> StepRearrangement {
    let n = rng.gen_range(1..=20);
    StepRearrangement::from_weighted((0..n).map(|_| {
        (
            10f64.powf(rng.gen_range(-3.0..3.0)),
            10f64.powf(rng.gen_range(-2.0..1.0)),
        )
    }))
    .unwrap()
}

fn gnlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gnlab"))
        .args(args)
        .output()
        .expect("spawn gnlab")
}

// 1 ---------------------------------------------------------------------------

/// Distinct magnitudes in decreasing order, each with the measure of its level set.
fn brute_force(f: &GridFunction) -> Vec<(f64, f64)> {
    let mut mags: Vec<f64> = f.magnitudes().into_iter().filter(|&v| v > 0.0).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < mags.len() {
        let v = mags[i];
        // μ{|u| >= v} − μ{|u| > v}
        let ge = mags.iter().filter(|&&m| m >= v).count();
        let gt = mags.iter().filter(|&&m| m > v).count();
        out.push((v, (ge - gt) as f64 * f.cell_volume()));
        i = ge;
    }
    out
}

fn rearrangement_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let dim = rng.gen_range(1..=2);
        let res = if dim == 1 {
            rng.gen_range(gnlab::grid::MIN_RES..=10_000)
        } else {
            rng.gen_range(gnlab::grid::MIN_RES..=100)
        };
        let shape = GridShape::new(dim, rng.gen_range(0.1..10.0), res).unwrap();
        let levels: Vec<f64> = (0..rng.gen_range(1..50)).map(|_| rng.gen_range(-10.0..10.0)).collect();
        // the two outer layers must vanish
        let values = (0..shape.num_cells())
            .map(|c| {
                let idx = shape.unravel(c);
                let inner = idx[..dim].iter().all(|&i| i >= 2 && i < res - 2);
                if inner && rng.gen_bool(0.7) {
                    levels[rng.gen_range(0..levels.len())]
                } else {
                    0.0
                }
            })
            .collect();
        let f = GridFunction::from_values(shape, 0, values).unwrap();
        let got: Vec<(f64, f64)> = rearrange(&f).segments().iter().map(|s| (s.value, s.width)).collect();
        let want = brute_force(&f);
        if got.len() != want.len() {
            return Err(format!(
                "case {case}: {} segments, oracle has {}",
                got.len(),
                want.len()
            ));
        }
        for (g, w) in got.iter().zip(&want) {
            if g.0.to_bits() != w.0.to_bits() {
                return Err(format!("case {case}: value {} vs {}", g.0, w.0));
            }
            worst = worst.max(rel(g.1, w.1));
        }
    }
    if worst <= 1e-12 {
        Ok(format!("200 cases, values bitwise, width error {worst:.1e}"))
    } else {
        Err(format!("width error {worst:.3e}"))
    }
}

// 2 ---------------------------------------------------------------------------

fn norm_closed_forms() -> Check {
    let mut worst = 0.0f64;
    let ts = logspace(1e-6, 1e6, 64);
    for (bp, p) in [(2.0, 2.0), (2.0, 1.0), (3.0, 1.5), (1.5, 4.0), (4.0, 2.0)] {
        let x = SpaceSpec::lorentz(bp, p).unwrap();
        for &t in &ts {
            let chi = StepRearrangement::from_weighted([(1.0, t)]).unwrap();
            // φ(t) = t^{1/P} times the constant (P/p)^{1/p} of the unnormalized functional
            let oracle = (bp / p).powf(1.0 / p) * t.powf(1.0 / bp);
            worst = worst.max(rel(lorentz_norm(&chi, bp, p).unwrap(), oracle));
            worst = worst.max(rel(indicator_norm(&x, t).unwrap(), oracle));
        }
    }
    for s in ["pow:1.5", "pow:3", "plog:2,1", "plog:1.5,-1", "comp:plog:2,1:1.5"] {
        let a = young(s);
        for &t in &ts {
            let chi = StepRearrangement::from_weighted([(1.0, t)]).unwrap();
            let oracle = 1.0 / young_inverse(&a, 1.0 / t).unwrap();
            worst = worst.max(rel(luxemburg_norm(&chi, &a).unwrap(), oracle));
        }
    }
    if worst <= 1e-8 {
        Ok(format!("10 spaces x 64 measures, max rel error {worst:.1e}"))
    } else {
        Err(format!("max rel error {worst:.3e}"))
    }
}

// 3 ---------------------------------------------------------------------------

fn riesz_herz() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (dim, res, lo, fams) in [
        (
            1,
            512,
            0.4,
            &[
                "chi:1",
                "chi:0.3",
                "gauss:r=1",
                "gauss:r=0.6",
                "sa_bump:k=1",
                "sa_bump:k=2",
                "sa_bump:k=3",
            ][..],
        ),
        (2, 64, 0.1, &["chi:1", "gauss:r=1", "sa_bump:k=2"][..]),
    ] {
        let (mut c_min, mut c_max) = (f64::INFINITY, 0.0f64);
        for s in fams {
            let fam: TestFamily = s.parse().unwrap();
            let hw = gnlab::gn::auto_half_width(std::slice::from_ref(&fam), dim, res);
            let u = sample(&fam, GridShape::new(dim, hw, res).unwrap()).unwrap();
            let m = rearrange(&u).total_measure();
            let rh = riesz_herz_ratio(&u, &logspace(1e-2 * m, 1e2 * m, 129)).unwrap();
            c_min = c_min.min(rh.c_min);
            c_max = c_max.max(rh.c_max);
        }
        ok &= c_min >= lo && c_max <= 1.1;
        lines.push(format!("{dim}D [{c_min:.3}, {c_max:.3}] in [{lo}, 1.1]"));
    }
    if ok {
        Ok(lines.join("; "))
    } else {
        Err(lines.join("; "))
    }
}

// 4 ---------------------------------------------------------------------------

fn mazya() -> Check {
    let (mut sup, mut change) = (0.0f64, 0.0f64);
    for (j, k) in [(1, 2), (1, 3), (2, 3)] {
        for fam in smooth_family() {
            let at = |res: usize| {
                let hw = gnlab::gn::auto_half_width(std::slice::from_ref(&fam), 1, res);
                mazya_ratio(&sample(&fam, GridShape::new(1, hw, res).unwrap()).unwrap(), j, k).unwrap()
            };
            let (a, b) = (at(512), at(1024));
            sup = sup.max(a).max(b);
            change = change.max((b - a).abs() / a);
        }
    }
    let msg = format!("sup {sup:.3} (<= 8), change {:.2}% (<= 20%)", 100.0 * change);
    if sup <= 8.0 && change <= 0.2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 5 ---------------------------------------------------------------------------

/// `(j, k, Y = L^{R,r}, Z = L^{Q,q})`; X follows from the balance.
const BALANCED: [Triple; 10] = [
    (1, 2, (2.0, 2.0), (2.0, 2.0)),
    (1, 2, (3.0, 3.0), (3.0, 3.0)),
    (1, 2, (4.0, 2.0), (4.0, 2.0)),
    (1, 2, (4.0, 4.0), (2.0, 2.0)),
    (1, 2, (2.0, 1.0), (6.0, 3.0)),
    (1, 2, (3.0, 2.0), (3.0, 6.0)),
    (1, 3, (3.0, 3.0), (6.0, 6.0)),
    (1, 3, (2.0, 2.0), (5.0, 5.0)),
    (2, 3, (3.0, 1.0), (6.0, 2.0)),
    (2, 3, (2.0, 2.0), (2.0, 2.0)),
];

fn balanced_flat() -> Check {
    let s = logspace(0.25, 4.0, 9);
    let mut worst = 1.0f64;
    for (j, k, (br, r), (bq, q)) in BALANCED {
        let th = j as f64 / k as f64;
        let x = SpaceSpec::lorentz(1.0 / (th / br + (1.0 - th) / bq), 1.0 / (th / r + (1.0 - th) / q)).unwrap();
        let (y, z) = (SpaceSpec::lorentz(br, r).unwrap(), SpaceSpec::lorentz(bq, q).unwrap());
        let p = GNProblem::new(j, k, x.clone(), y.clone(), z.clone(), smooth_family(), 1, 512).unwrap();
        let rep = verify_lorentz(&p).map_err(|e| format!("{x} {y} {z}: {e}"))?;
        let curve = best_constant_scan(&p, Form::Plain, &s).unwrap();
        if !(curve.max.is_finite() && curve.min > 0.0) || rep.verdict != Verdict::Pass {
            return Err(format!(
                "{x} {y} {z} ({j},{k}): max {} verdict {}",
                curve.max, rep.verdict
            ));
        }
        worst = worst.max(curve.spread());
    }
    let msg = format!("10 triples, worst max/min over s in [1/4, 4] = {worst:.4} (<= 1.15)");
    if worst <= 1.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 6 ---------------------------------------------------------------------------

const UNBALANCED: [(&str, &str, &str, usize, usize); 5] = [
    ("Lp:1.25", "Lp:8", "Lp:8", 1, 2),
    ("Lp:8", "Lp:1.25", "Lp:1.25", 1, 2),
    ("Lor:1.25,1", "Lor:8,2", "Lor:8,4", 1, 2),
    ("Lor:10,2", "Lor:1.2,1", "Lor:1.5,1", 1, 3),
    ("Lp:1.1", "Lp:4", "Lp:20", 1, 2),
];

fn falsification(tmp: &Path) -> Check {
    let s = logspace(1e-2, 1e2, 17);
    let mut bands = Vec::new();
    for (i, (x, y, z, j, k)) in UNBALANCED.into_iter().enumerate() {
        let rep = falsify(&space(x), &space(y), &space(z), j, k, &s, 1).unwrap();
        let d = rep
            .divergence
            .as_ref()
            .ok_or(format!("{x} {y} {z}: no divergence, slope {}", rep.slope))?;
        if d.growth < 100.0 || !rep.tracks || rep.verdict != FalsifyVerdict::Falsified {
            return Err(format!("{x} {y} {z}: growth {:.1}, band {:?}", d.growth, rep.band));
        }
        bands.push(format!("{:.2}", rep.band.0.min(1.0 / rep.band.1)));
        let cfg = tmp.join(format!("falsify{i}.json"));
        std::fs::write(
            &cfg,
            format!(r#"{{"mode":"falsify","j":{j},"k":{k},"x":"{x}","y":"{y}","z":"{z}"}}"#),
        )
        .unwrap();
        let out = gnlab(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            tmp.join(format!("f{i}")).to_str().unwrap(),
        ]);
        if out.status.code() != Some(1) {
            return Err(format!("{x} {y} {z}: exit {:?}", out.status.code()));
        }
    }
    Ok(format!(
        "5 triples falsified, exit 1, worst band factors {}",
        bands.join(" ")
    ))
}

// 7 ---------------------------------------------------------------------------

fn saturation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (bp, p, br, r) in [
        (2.0, 2.0, 6.0, 6.0),
        (2.0, 1.5, 4.0, 1.5),
        (3.0, 2.0, 6.0, 4.0),
        (2.0, 1.0, 4.0, 1.0),
        (1.2, 1.0, 20.0, 1.0),
    ] {
        for _ in 0..50 {
            let f = random_steps(&mut rng);
            let fac = gnlab::holder::lorentz_factor(bp, p, br, r).unwrap();
            let ratio = lorentz_saturator_steps(&f, bp, p, br, r)
                .unwrap()
                .holder_check(&fac.target(), &fac.given(), &fac.multiplier())
                .unwrap();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let msg = format!("5 triples x 50 step functions, ratio in [{lo:.8}, {hi:.12}]");
    if lo >= 1.0 - 1e-4 && hi <= 1.0 + 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 8 ---------------------------------------------------------------------------

fn orlicz_chain() -> Check {
    let finite = [
        ("pow:2", "pow:3", "pow:6"),
        ("pow:2", "pow:4", "pow:4"),
        ("pow:1.5", "pow:3", "pow:3"),
        ("pow:3", "pow:4", "pow:12"),
        ("pow:2.5", "pow:5", "pow:5"),
        ("plog:2,1", "plog:4,1", "plog:4,1"),
        ("plog:2,-1", "plog:4,-1", "plog:4,-1"),
        ("plog:2,1", "plog:4,2", "pow:4"),
        ("plog:2,0.5", "plog:4,1", "plog:4,1"),
        ("pow:2", "plog:4,1", "plog:4,1"),
    ];
    let divergent = [
        ("plog:2,1", "pow:4", "pow:4"),
        ("plog:2,2", "plog:4,1", "plog:4,1"),
        ("pow:2", "pow:3", "pow:3"),
        ("pow:2", "pow:5", "pow:5"),
        ("plog:3,1", "pow:6", "pow:6"),
    ];
    let mut worst = 0.0f64;
    for (a, b, c) in finite {
        let rep =
            orlicz_factor_check(&young(a), &young(b), &young(c), 64, 8).map_err(|e| format!("{a} {b} {c}: {e}"))?;
        if rep.unbounded.is_some() || !rep.k_ii_pass {
            return Err(format!(
                "{a} {b} {c}: K_iii {:.4}, (ii) max {:.4}, unbounded {:?}",
                rep.k_iii, rep.k_ii_max, rep.unbounded
            ));
        }
        let q = rep.ratio_i / (2.0 * rep.k_iii);
        if q > 1.0 + 1e-6 {
            return Err(format!(
                "{a} {b} {c}: Hölder ratio {:.4} > 2K = {:.4}",
                rep.ratio_i,
                2.0 * rep.k_iii
            ));
        }
        worst = worst.max(q);
    }
    for (a, b, c) in divergent {
        let rep =
            orlicz_factor_check(&young(a), &young(b), &young(c), 8, 8).map_err(|e| format!("{a} {b} {c}: {e}"))?;
        if rep.unbounded.is_none() {
            return Err(format!("{a} {b} {c}: marker silent, K_iii {:.4}", rep.k_iii));
        }
    }
    Ok(format!(
        "10 finite triples (worst ratio/2K = {worst:.4}), 5 divergent triples flagged"
    ))
}

// 9 ---------------------------------------------------------------------------

fn plain_gate() -> Check {
    let p = GNProblem::new(
        1,
        2,
        space("Orl:pow:2"),
        space("Orl:pow:3"),
        space("Orl:pow:1.5"),
        smooth_family(),
        1,
        512,
    )
    .unwrap();
    let rep = verify_orlicz(&p).map_err(|e| e.to_string())?;
    let plain = rep.plain.as_ref().ok_or("plain report not produced")?;
    if plain.verdict != Verdict::Pass || rep.verdict != Verdict::Pass {
        return Err(format!("plain verdict {}, overall {}", plain.verdict, rep.verdict));
    }
    let mut worst = 0.0f64;
    for e in [1.25, 2.0, 4.0] {
        worst = worst.max((upper_index_estimate(&YoungFunction::power(e).unwrap()) - 1.0 / e).abs());
    }
    if worst > 1e-3 {
        return Err(format!("index error {worst:.3e}"));
    }
    Ok(format!(
        "plain report passes (indices {:.3}, {:.3}), power index error {worst:.1e}",
        rep.index_b, rep.index_c
    ))
}

// 10 --------------------------------------------------------------------------

fn hlp_transfer() -> Check {
    let spaces: Vec<SpaceSpec> = ["Lp:1", "Lp:2.5", "Lp:inf", "Lor:3,1", "Orl:pow:3", "Orl:plog:2,1"]
        .iter()
        .map(|s| space(s))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (u, v) = (random_steps(&mut rng), random_steps(&mut rng));
        let c = hlp_constant(&u, &v);
        for x in &spaces {
            let q = space_norm(&u, x).unwrap() / (c * space_norm(&v, x).unwrap());
            if q > 1.0 + 1e-8 {
                return Err(format!("{x}: ‖u‖/(C‖v‖) = {q}"));
            }
            worst = worst.max(q);
        }
    }
    Ok(format!("100 pairs x 6 spaces, max ‖u‖/(C‖v‖) = {worst:.6}"))
}

// CLI behaviour ----------------------------------------------------------------

fn cli_behaviour(tmp: &Path) -> Check {
    let bad = tmp.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"mode":"lorentz","j":1,"k":2,"x":"Lor:2","y":"Lp:2","z":"Lp:2"}"#,
    )
    .unwrap();
    let out = gnlab(&[
        "verify",
        "--config",
        bad.to_str().unwrap(),
        "--out-dir",
        tmp.to_str().unwrap(),
    ]);
    let err = String::from_utf8_lossy(&out.stderr);
    if out.status.code() != Some(2) || !err.contains("`x`") {
        return Err(format!("bad space: exit {:?}, stderr {err}", out.status.code()));
    }
    let out = gnlab(&["rearrange", "--family", "chi", "--t-samples", "6"]);
    let csv = String::from_utf8_lossy(&out.stdout);
    if !out.status.success() || !csv.starts_with("t,u_star,u_double_star") {
        return Err(format!("rearrange chi: exit {:?}", out.status.code()));
    }
    let cfo = tmp.join("cfo.json");
    std::fs::write(
        &cfo,
        r#"{"mode":"orlicz","j":1,"k":2,"x":"Orl:plog:2,1","y":"Orl:pow:2","z":"Orl:pow:2","res":256}"#,
    )
    .unwrap();
    let out = gnlab(&[
        "verify",
        "--config",
        cfo.to_str().unwrap(),
        "--out-dir",
        tmp.join("cfo").to_str().unwrap(),
    ]);
    if out.status.code() != Some(1) || !String::from_utf8_lossy(&out.stdout).contains("CFO divergent") {
        return Err(format!("CFO divergent triple: exit {:?}", out.status.code()));
    }
    let lor = tmp.join("lor.json");
    std::fs::write(
        &lor,
        r#"{"mode":"lorentz","j":1,"k":2,"x":"Lor:2,2","y":"Lor:2,2","z":"Lor:2,2"}"#,
    )
    .unwrap();
    let dir = tmp.join("lor");
    let out = gnlab(&[
        "verify",
        "--config",
        lor.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    let files = ["report.json", "report.txt", "curve.csv"]
        .iter()
        .all(|f| dir.join(f).exists());
    if out.status.code() != Some(0) || !files {
        return Err(format!("balanced verify: exit {:?}, files {files}", out.status.code()));
    }
    Ok("exit codes 0/1/2, report files, CFO marker".into())
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 rearrangement oracle", Box::new(rearrangement_oracle)),
        ("2 norm closed forms", Box::new(norm_closed_forms)),
        ("3 Riesz-Herz band", Box::new(riesz_herz)),
        ("4 Maz'ya pointwise", Box::new(mazya)),
        ("5 balanced Lorentz triples", Box::new(balanced_flat)),
        ("6 falsification", Box::new(|| falsification(tmp.path()))),
        ("7 Lorentz saturation", Box::new(saturation)),
        ("8 Orlicz factor chain", Box::new(orlicz_chain)),
        ("9 plain-norm gate", Box::new(plain_gate)),
        ("10 HLP transfer", Box::new(hlp_transfer)),
        ("cli exit codes", Box::new(|| cli_behaviour(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let result =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS  {name:<28} {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name:<28} {msg} ({secs:.1}s)");
            }
        }
    }
    println!("\n{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
