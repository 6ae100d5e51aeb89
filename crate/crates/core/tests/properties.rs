use gnlab::gn::{gn_ratio, Form};
use gnlab::holder::{holder_check, lorentz_factor};
use gnlab::maximal::maximal_operator;
use gnlab::numerics::logspace;
use gnlab::scaling::necessary_condition;
use gnlab::{
    fundamental_function, hlp_constant, luxemburg_norm, rearrange, sample, space_norm, GridFunction, GridShape,
    SpaceSpec, StepRearrangement, TestFamily, YoungFunction,
};
use proptest::prelude::*;

fn spaces() -> Vec<SpaceSpec> {
    [
        "Lp:1",
        "Lp:2.5",
        "Lp:inf",
        "Lor:3,1",
        "Lor:1.5,4",
        "Lor:2,inf",
        "Orl:pow:3",
        "Orl:plog:2,1",
        "Orl:comp:plog:1.5,-1:2",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

/// The spaces of [`spaces`] that are Banach, i.e. Lorentz only with `q <= P`.
fn banach_spaces() -> Vec<SpaceSpec> {
    spaces()
        .into_iter()
        .filter(|x| x.lorentz_exponents().is_none_or(|(big_p, q)| q <= big_p))
        .collect()
}

fn steps() -> impl Strategy<Value = StepRearrangement> {
    prop::collection::vec((1e-3f64..1e3, 1e-3f64..10.0), 1..40)
        .prop_map(|v| StepRearrangement::from_weighted(v).unwrap())
}

/// Interior cells of a 1D res-64 grid, with values drawn from `cells`.
fn grid_1d(cells: Vec<f64>) -> GridFunction {
    let shape = GridShape::new(1, 1.0, 64).unwrap();
    let mut values = vec![0.0; 64];
    values[2..2 + cells.len()].copy_from_slice(&cells);
    GridFunction::from_values(shape, 0, values).unwrap()
}

fn cells() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -5.0f64..5.0], 60)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_preserves_mass(c in cells()) {
        let f = grid_1d(c.clone());
        let mass: f64 = c.iter().map(|v| v.abs()).sum::<f64>() * f.cell_volume();
        prop_assert!(rel(rearrange(&f).total_mass(), mass) <= 1e-12);
    }

    #[test]
    fn rearrangement_ignores_order(c in cells(), seed in any::<u64>()) {
        let mut shuffled = c.clone();
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(rearrange(&grid_1d(c)), rearrange(&grid_1d(shuffled)));
    }

    #[test]
    fn double_star_dominates_and_decreases(r in steps()) {
        let ts = logspace(1e-4, 2.0 * r.total_measure(), 200);
        let mut prev = f64::INFINITY;
        for t in ts {
            let m = r.maximal_at(t);
            prop_assert!(m >= r.eval(t) * (1.0 - 1e-12));
            prop_assert!(m <= prev * (1.0 + 1e-12));
            prev = m;
        }
    }

    #[test]
    fn adding_nonnegative_function_dominates(a in cells(), b in prop::collection::vec(0.0f64..3.0, 60)) {
        let u: Vec<f64> = a.iter().map(|v| v.abs()).collect();
        let w: Vec<f64> = u.iter().zip(&b).map(|(x, y)| x + y).collect();
        let c = hlp_constant(&rearrange(&grid_1d(u)), &rearrange(&grid_1d(w)));
        prop_assert!(c <= 1.0 + 1e-12, "{}", c);
    }

    #[test]
    fn luxemburg_power_is_lebesgue(r in steps(), p in 1.05f64..6.0) {
        let a = YoungFunction::power(p).unwrap();
        let lp = space_norm(&r, &SpaceSpec::lebesgue(p).unwrap()).unwrap();
        prop_assert!(rel(luxemburg_norm(&r, &a).unwrap(), lp) <= 1e-8);
    }

    #[test]
    fn norms_are_homogeneous(r in steps()) {
        for x in spaces() {
            let base = space_norm(&r, &x).unwrap();
            for c in [0.1, 3.0, 1e4] {
                prop_assert!(rel(space_norm(&r.scale(c), &x).unwrap(), c * base) <= 1e-10, "{} c={}", x, c);
            }
        }
    }

    #[test]
    fn lattice_property(r in steps(), bumps in prop::collection::vec(1.0f64..2.0, 40)) {
        let bigger = StepRearrangement::from_weighted(
            r.segments().iter().zip(&bumps).map(|(s, b)| (s.value * b, s.width)),
        ).unwrap();
        for x in spaces() {
            prop_assert!(space_norm(&r, &x).unwrap() <= space_norm(&bigger, &x).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hlp_transfer(u in steps(), v in steps()) {
        let c = hlp_constant(&u, &v);
        prop_assume!(c.is_finite());
        for x in banach_spaces() {
            prop_assert!(space_norm(&u, &x).unwrap() <= c * space_norm(&v, &x).unwrap() * (1.0 + 1e-8), "{}", x);
        }
    }

    #[test]
    fn maximal_operator_is_sublinear(a in cells(), b in cells()) {
        let (f, g) = (grid_1d(a), grid_1d(b));
        let sum = maximal_operator(&f.add(&g).unwrap());
        let (mf, mg) = (maximal_operator(&f), maximal_operator(&g));
        for p in 0..64 {
            prop_assert!(sum.values()[p] <= (mf.values()[p] + mg.values()[p]) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn lorentz_factor_round_trip(big_r in 1.1f64..20.0, r in 1.0f64..10.0, dp in 0.01f64..0.5, dq in 0.0f64..0.5) {
        let big_p = 1.0 / (1.0 / big_r + dp);
        let p = 1.0 / (1.0 / r + dq);
        prop_assume!(big_p > 1.0 && p >= 1.0);
        let fac = lorentz_factor(big_p, p, big_r, r).unwrap();
        prop_assert!(rel(1.0 / (1.0 / fac.big_r + 1.0 / fac.big_q), fac.big_p) <= 1e-12);
        let inv_q = if fac.q.is_infinite() { 0.0 } else { 1.0 / fac.q };
        prop_assert!((1.0 / fac.r + inv_q - 1.0 / fac.p).abs() <= 1e-12);
    }

    #[test]
    fn holder_ratio_ignores_scaling(a in cells(), b in cells(), c in 1e-3f64..1e3) {
        let (f, g) = (grid_1d(a), grid_1d(b));
        prop_assume!(f.sup_norm() > 0.0 && g.sup_norm() > 0.0);
        let (x, y, z) = (SpaceSpec::lorentz(2.0, 2.0).unwrap(), SpaceSpec::lorentz(3.0, 1.0).unwrap(), SpaceSpec::lebesgue(6.0).unwrap());
        let base = holder_check(&f, &g, &x, &y, &z).unwrap();
        prop_assert!(rel(holder_check(&f.scale(c), &g, &x, &y, &z).unwrap(), base) <= 1e-10);
    }

    #[test]
    fn gn_ratio_ignores_scaling(radius in 0.3f64..0.9, c in 1e-3f64..1e3) {
        let u = sample(&TestFamily::GaussianBump { radius }, GridShape::new(1, 1.0, 128).unwrap()).unwrap();
        let (x, y, z) = (SpaceSpec::lebesgue(2.0).unwrap(), SpaceSpec::lorentz(3.0, 2.0).unwrap(), SpaceSpec::lebesgue(1.5).unwrap());
        for form in [Form::Plain, Form::Maximal] {
            let a = gn_ratio(&u, 1, 2, &x, &y, &z, form, false).unwrap().ratio;
            let b = gn_ratio(&u.scale(c), 1, 2, &x, &y, &z, form, false).unwrap().ratio;
            prop_assert!(rel(a, b) <= 1e-10, "{:?}: {} vs {}", form, a, b);
        }
    }

    #[test]
    fn balanced_powers_give_constant_ratio(big_r in 1.1f64..10.0, big_q in 1.1f64..10.0, k in 2usize..5) {
        let theta = 1.0 / k as f64;
        let big_p = 1.0 / (theta / big_r + (1.0 - theta) / big_q);
        let ts = logspace(1e-6, 1e6, 49);
        let nc = necessary_condition(
            &SpaceSpec::lebesgue(big_p).unwrap(),
            &SpaceSpec::lorentz(big_r, 1.0).unwrap(),
            &SpaceSpec::lorentz(big_q, 3.0).unwrap(),
            1, k, &ts,
        ).unwrap();
        prop_assert!(nc.sup / nc.min <= 1.0 + 1e-12);
    }
}

#[test]
fn hlp_transfer_fails_for_quasi_normed_lorentz() {
    // v* = 1.1 on (0,1), 0.9 on (1,2) majorizes u* = χ_(0,2), but the weight
    // t^{q/P-1} grows when q > P and rewards the flatter u
    let u = StepRearrangement::from_weighted([(1.0, 2.0)]).unwrap();
    let v = StepRearrangement::from_weighted([(1.1, 1.0), (0.9, 1.0)]).unwrap();
    assert_eq!(hlp_constant(&u, &v), 1.0);
    let x = SpaceSpec::lorentz(1.5, 4.0).unwrap();
    assert!(space_norm(&u, &x).unwrap() > space_norm(&v, &x).unwrap());
}

#[test]
fn fundamental_functions_are_quasi_concave() {
    let ts = logspace(1e-6, 1e6, 121);
    for x in spaces() {
        let phi: Vec<f64> = ts.iter().map(|&t| fundamental_function(&x, t).unwrap()).collect();
        for i in 1..ts.len() {
            assert!(phi[i] >= phi[i - 1] * (1.0 - 1e-12), "{x} not increasing at {}", ts[i]);
            assert!(
                phi[i] / ts[i] <= phi[i - 1] / ts[i - 1] * (1.0 + 1e-12),
                "{x}: φ(t)/t increases"
            );
        }
    }
}

#[test]
fn proof_chain_holds_for_passing_triples() {
    let u = sample(
        &TestFamily::GaussianBump { radius: 0.8 },
        GridShape::new(1, 1.0, 256).unwrap(),
    )
    .unwrap();
    for (x, y, z) in [
        ("Lp:2", "Lp:2", "Lp:2"),
        ("Lp:3", "Lp:3", "Lp:3"),
        ("Lor:2,2", "Lor:3,1", "Lp:1.5"),
    ] {
        let (x, y, z): (SpaceSpec, SpaceSpec, SpaceSpec) = (x.parse().unwrap(), y.parse().unwrap(), z.parse().unwrap());
        let rec = gn_ratio(&u, 1, 2, &x, &y, &z, Form::Maximal, true).unwrap();
        let chain = rec.chain.unwrap();
        assert!(chain.consistent, "{x} {y} {z}: {chain:?}");
        assert!(rec.ratio <= chain.product * (1.0 + 1e-9));
    }
}
