mod common;

use common::*;
use densetest::bounds::{c_pi_of_eps_vector, density_limit, size_lower_bound, BoundValue};
use densetest::constructions::*;
use densetest::rational::{complement, pow, rat, Rational};
use densetest::tester::*;
use densetest::verify::{is_tester, measured_density, Grid};
use densetest::{Error, UnconstructibleReason};
use num_traits::One;
use proptest::prelude::*;

fn exact(n: usize) -> Grid {
    Grid::exact(n).with_budget(200_000_000)
}

fn unconstructible(e: Result<Tester, Error>) -> UnconstructibleReason {
    match e {
        Err(Error::Unconstructible { reason, .. }) => reason,
        other => panic!("expected Unconstructible, got {other:?}"),
    }
}

#[test]
fn evaluation_examples() {
    let t = evaluation_tester(5, 2, 2, 5, Family::P).unwrap();
    assert_eq!((t.size(), t.epsilon().clone()), (5, rat(2, 5)));
    let t = evaluation_tester(7, 2, 2, 4, Family::P).unwrap();
    assert_eq!((t.size(), t.epsilon().clone()), (4, rat(1, 2)));
    let lb = size_lower_bound(7, 2, 2, &rat(1, 2), Family::P).unwrap();
    assert_eq!(lb.value.exact(), Some(&Rational::from_integer(4.into())));
    for r in 1..=3 {
        assert_eq!(unconstructible(evaluation_tester(2, 2, 2, r, Family::P)), UnconstructibleReason::QTooSmall);
    }
    assert_eq!(unconstructible(evaluation_tester(7, 2, 2, 2, Family::P)), UnconstructibleReason::ROutOfRange);
    assert_eq!(unconstructible(evaluation_tester(7, 2, 2, 8, Family::P)), UnconstructibleReason::ROutOfRange);
}

#[test]
fn evaluation_flags() {
    let t = evaluation_tester(5, 2, 2, 5, Family::P).unwrap();
    assert_eq!(t.flags(), Flags::ALL);
    let t = evaluation_tester(5, 2, 2, 6, Family::HP).unwrap();
    assert_eq!(*t.epsilon(), rat(1, 3));
    assert!(t.flags().symmetric && t.flags().linear && t.flags().componentwise);
    assert!(!t.flags().reducible);
}

#[test]
fn evaluation_points_are_the_first_elements() {
    let t = evaluation_tester(7, 2, 1, 4, Family::P).unwrap();
    let tw = t.target().tower().clone();
    for i in 0..4 {
        let maps = t.map_at(i).unwrap();
        let AtomicMap::Chain(parts) = &maps[0] else { panic!("lift then evaluate") };
        assert!(matches!(&parts[1], AtomicMap::Evaluate { point, .. } if tw.index_of(point) == i));
    }
}

#[test]
fn crt_example() {
    let t = crt_reduction_tester(3, 3, 2, 2, &rat(5, 6)).unwrap();
    assert_eq!(t.size(), 3);
    assert_eq!(t.target().field().cardinality(), 9);
    assert_eq!(t.flags(), Flags::ALL);
    for i in 0..3 {
        assert_eq!(t.apply(i, 0, &t.source().one()).unwrap(), t.target().one());
    }
    let r = is_tester(&t, &exact(1)).unwrap();
    assert!(r.exact && r.verdict);
    assert!(r.worst_failure <= rat(5, 6));
}

#[test]
fn crt_roots_are_distinct_irreducible_roots() {
    let t = crt_reduction_tester(2, 9, 6, 1, &rat(1, 2)).unwrap();
    let mut seen = std::collections::HashSet::new();
    let tw = t.target().tower().clone();
    for i in 0..t.size() {
        let AtomicMap::Chain(parts) = &t.map_at(i).unwrap()[0] else { panic!() };
        let AtomicMap::Evaluate { point, .. } = &parts[1] else { panic!() };
        let orbit: Vec<_> = (0..6).map(|j| tw.frobenius(point, j).unwrap()).collect();
        assert_eq!(orbit.iter().collect::<std::collections::HashSet<_>>().len(), 6);
        assert!(seen.insert(orbit.iter().min().unwrap().clone()));
    }
}

#[test]
fn crt_needs_enough_irreducibles() {
    let e = crt_reduction_tester(2, 10, 2, 2, &rat(1, 2));
    assert_eq!(unconstructible(e), UnconstructibleReason::InsufficientIrreducibles);
}

#[test]
fn subfield_chain_example() {
    let (e1, e2) = (rat(2, 3), rat(1, 3));
    let t = subfield_chain_tester(3, 2, 2, 2, &e1, &e2, Family::P).unwrap();
    assert_eq!(t.size(), 3 * 6);
    assert_eq!(t.source().field().cardinality(), 81);
    let floor = complement(&e1) * complement(&e2);
    assert_eq!(complement(t.epsilon()), floor);
    assert!(measured_density(&t, &exact(1)).unwrap() >= floor);
}

#[test]
fn pipeline_levels() {
    assert_eq!(t1_levels(2, 2).unwrap(), 3);
    assert_eq!(t1_levels(3, 2).unwrap(), 2);
    assert_eq!(t1_levels(2, 1).unwrap(), 2);
    assert_eq!(t1_levels(16, 1).unwrap(), 0);
}

/// `1 - ε⁎` from the defining product, computed without the library's helper.
fn density_star(q: u64, d: usize, eps: &EpsVector) -> Rational {
    let mut acc = complement(&eps.eps_r);
    for (i, &eta) in eps.etas.iter().enumerate() {
        let card = (q as u128).pow(1 << i);
        let e = Rational::new(eta.into(), (card + 1).into());
        acc *= pow(&complement(&e), (d as u128).div_ceil(eta) as u32);
    }
    acc
}

#[test]
fn pipeline_matches_product_formula() {
    let eps = preset_eps_vector(2, 2, Preset::Density2).unwrap();
    assert_eq!(eps.etas, vec![2, 4, 16]);
    let t = t1_pipeline(2, 2, 2, &eps, FinalStep::Auto).unwrap();
    assert_eq!(complement(t.epsilon()), density_star(2, 2, &eps));
    assert_eq!(*t.epsilon(), rat(763, 765));
    assert_eq!(t.size(), 3 * 5 * 17 * 6);
    assert_eq!(t.class().family, Family::HLF);
    // Every level has ⌈d/η_i⌉ = 1 block, so each tuple is one map broadcast over both blocks.
    assert_eq!(t.blocks(), 1);
    assert!(!t.flags().symmetric && !t.flags().reducible);
    assert!(t.flags().linear && t.flags().componentwise);
    assert_eq!(t.source().field().cardinality(), 1 << 16);

    let consts = c_pi_of_eps_vector(2, 2, &eps).unwrap();
    let c: f64 = [(3.0f64, 2.0), (5.0, 4.0), (17.0, 16.0)].iter().map(|(n, e)| n.log2() / e).sum();
    assert!((consts.c - c).abs() < 1e-12);
    assert!((consts.size_exponent - 2.0 * c).abs() < 1e-12);
    assert_eq!(consts.eps_star, *t.epsilon());
    assert!(consts.density_lower_bound <= densetest::rational::to_f64(&consts.density_star));
}

#[test]
fn pipeline_presets_and_validation() {
    for m in 1..=3 {
        let eps = preset_eps_vector(3, 4, Preset::Co1(m)).unwrap();
        for (i, &eta) in eps.etas.iter().enumerate() {
            let card = 3u128.pow(1 << i);
            assert_eq!(eta, m as u128 * (card + 1) / 4);
        }
        assert_eq!(complement(&t1_epsilon_star(3, 4, &eps).unwrap()), density_star(3, 4, &eps));
    }
    let bad = EpsVector { etas: vec![1, 5], eps_r: rat(1, 3) };
    assert!(matches!(t1_epsilon_star(2, 2, &bad), Err(Error::Unconstructible { reason: UnconstructibleReason::EpsVectorInvalid, .. })));
    let bad = EpsVector { etas: vec![1, 1, 1], eps_r: rat(3, 4) };
    assert!(t1_pipeline(2, 2, 2, &bad, FinalStep::Auto).is_err());
    assert!(matches!(Preset::parse("co1:2"), Ok(Preset::Co1(2))));
    assert!(Preset::parse("nope").is_err());
}

#[test]
fn small_pipeline_passes_exhaustive_check() {
    // q = 2, d = 1: r = 2, source F_{2^(4·2)}; HLF(n=1, d=1) checked over every assignment.
    let eps = preset_eps_vector(2, 1, Preset::Density2).unwrap();
    let t = t1_pipeline(2, 1, 2, &eps, FinalStep::Auto).unwrap();
    assert_eq!(complement(t.epsilon()), density_star(2, 1, &eps));
    let r = is_tester(&t, &exact(1)).unwrap();
    assert!(r.exact && r.verdict, "measured {} vs declared {}", r.worst_failure, t.epsilon());
}

#[test]
fn exhaustive_search_example() {
    let (tw, g) = chain_tower(2, &[2]);
    let f4 = field(&tw, g + 1);
    let budget = SearchBudget { max_families: 100, grid: Grid::exact(1) };
    let c = class(Family::P, 1, 1);
    // The two coordinate projections fail on f = 1 + x at a = α + 1.
    let maps = linear_maps(&f4);
    let projections = explicit(&f4, &[maps[1].clone(), maps[2].clone()], rat(1, 2), c.clone());
    let r = is_tester(&projections, &Grid::exact(1)).unwrap();
    assert!(!r.verdict);
    assert_eq!(r.worst_failure, Rational::one());

    let found = exhaustive_search_tester(f4.clone(), c.clone(), &rat(1, 2), 2, &budget).unwrap();
    assert_eq!(found.size(), 2);
    let want = [maps[1].clone(), maps[3].clone()];
    for (i, m) in want.iter().enumerate() {
        assert_eq!(found.map_at(i as u128).unwrap()[0], *m);
    }
    assert!(is_tester(&found, &Grid::exact(1)).unwrap().verdict);

    // Below the size lower bound 1/ε = 3 nothing passes.
    let e = exhaustive_search_tester(f4, c, &rat(1, 3), 2, &budget);
    assert!(matches!(e, Err(Error::SearchExhausted { .. })));
}

fn feasible(v: PlanVerdict) -> ConstructionPlan {
    match v {
        PlanVerdict::Feasible(p) => p,
        other => panic!("expected a plan, got {other:?}"),
    }
}

#[test]
fn plan_examples() {
    let p = feasible(plan(7, 2, 2, &rat(1, 2), Family::P).unwrap());
    assert_eq!(p.route, Route::DirectEval);
    assert_eq!(p.predicted_size, Some(4));
    assert!(p.constructive);

    match plan(5, 2, 10, &rat(1, 10), Family::P).unwrap() {
        PlanVerdict::Unconstructible { reason, citation, .. } => {
            assert_eq!(reason, UnconstructibleReason::BelowDensityLimit);
            assert!(citation.contains("eps >= d/q"));
        }
        other => panic!("{other:?}"),
    }

    let eps = preset_eps_vector(2, 3, Preset::Density2).unwrap();
    let star = t1_epsilon_star(2, 3, &eps).unwrap();
    let p = feasible(plan(2, 3, 4, &star, Family::HLF).unwrap());
    assert_eq!(p.route, Route::T1Pipeline);
    assert_eq!(p.declared_epsilon, star);
}

#[test]
fn infeasibility_gates() {
    for (q, d, fam) in [(2u64, 2usize, Family::P), (2, 3, Family::HP), (3, 3, Family::P), (3, 4, Family::HP)] {
        match plan(q, d, 2, &rat(99, 100), fam).unwrap() {
            PlanVerdict::Unconstructible { reason, .. } => assert_eq!(reason, UnconstructibleReason::QTooSmall),
            other => panic!("q={q} d={d}: {other:?}"),
        }
        let e = build(q, 2, d, &rat(99, 100), fam, RouteChoice::Auto);
        assert!(matches!(e, Err(Error::Unconstructible { .. })));
    }
}

#[test]
fn crt_route_is_planned_and_executed() {
    // q = 3, t = 3, d = 2 is below the direct threshold d(t-1)/q = 4/3 > 1 for every ε < 1.
    let (p, t) = build(5, 4, 1, &rat(7, 10), Family::P, RouteChoice::Crt).unwrap();
    assert_eq!(p.route, Route::CrtThenEval);
    assert_eq!(Some(t.size()), p.predicted_size);
    assert!(*t.epsilon() <= rat(7, 10));
    assert_eq!(*t.epsilon(), p.declared_epsilon);
    let Step::Crt { k, eps1, .. } = &p.step else { panic!() };
    let reduction = crt_reduction_tester(5, 4, *k, 1, eps1).unwrap();
    assert_eq!(t.size() % reduction.size(), 0);
}

#[test]
fn formula_only_routes_are_not_built() {
    // F_{1024^4096} is far beyond 128-bit cardinalities: the plan keeps its size formula only.
    let PlanVerdict::Feasible(p) = plan(1024, 2, 4096, &rat(1, 10), Family::P).unwrap() else { panic!() };
    assert!(!p.constructive);
    assert!(p.declared_epsilon <= rat(1, 10));
    assert!(p.notes.iter().any(|n| n.contains("128-bit")));
    assert!(execute(&p).is_err());
    assert!(build(1024, 4096, 2, &rat(1, 10), Family::P, RouteChoice::Auto).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constructive_plans_meet_their_bounds(
        q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9]),
        d in 1usize..=3,
        t in 1usize..=4,
        num in 1i64..20,
        fam in prop::sample::select(vec![Family::P, Family::HP, Family::HLF]),
    ) {
        let eps = rat(num, 20);
        let PlanVerdict::Feasible(p) = plan(q, d, t, &eps, fam).unwrap() else { return Ok(()) };
        prop_assert!(p.declared_epsilon <= eps);
        if !p.constructive || p.predicted_size.is_some_and(|s| s > 5_000) { return Ok(()) }
        let tester = execute(&p).unwrap();
        prop_assert_eq!(Some(tester.size()), p.predicted_size);
        prop_assert_eq!(tester.epsilon(), &p.declared_epsilon);
        prop_assert_eq!(tester.class().family, fam);
        if t > 1 {
            let lb = size_lower_bound(q, d, t, tester.epsilon(), fam).unwrap();
            if let Some(v) = lb.value.exact() {
                prop_assert!(Rational::from_integer(tester.size().into()) >= *v);
            }
            if let BoundValue::Exact(l) = density_limit(q, d, t, fam).unwrap().value {
                prop_assert!(*tester.epsilon() >= l);
            }
        }
        match is_tester(&tester, &Grid::exact(1).with_budget(20_000_000)) {
            Ok(r) => prop_assert!(r.verdict, "{} measured {} declared {}", p.route, r.worst_failure, tester.epsilon()),
            Err(Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
