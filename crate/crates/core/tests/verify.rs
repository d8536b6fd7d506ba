mod common;

use std::collections::HashSet;

use common::*;
use densetest::constructions::{crt_reduction_tester, evaluation_tester};
use densetest::gf::FieldElement;
use densetest::rational::{rat, Rational};
use densetest::tester::*;
use densetest::verify::*;
use densetest::Error;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact(n: usize) -> Grid {
    Grid::exact(n).with_budget(200_000_000)
}

#[test]
fn enumeration_counts() {
    for (q, c, want) in [
        (2, class(Family::P, 1, 2), 7u128),
        (2, class(Family::HLF, 2, 2), 15),
        (3, class(Family::HP, 2, 2), 26),
    ] {
        let e = enumerate_class(q, &c, 1_000, 0).unwrap();
        assert!(e.exhaustive);
        assert_eq!(e.total, Some(want));
        let polys: Vec<MultiPoly> = e.collect();
        assert_eq!(polys.len() as u128, want);
        assert!(polys.iter().all(|f| !f.is_zero()));
        let distinct: HashSet<String> = polys.iter().map(|f| f.to_string()).collect();
        assert_eq!(distinct.len() as u128, want);
    }
}

#[test]
fn monomial_shapes() {
    let hp = class_monomials(&class(Family::HP, 3, 2));
    assert_eq!(hp.len(), 6);
    assert!(hp.iter().all(|m| m.iter().sum::<u32>() == 2));
    let hlf = class_monomials(&class(Family::HLF, 2, 3));
    assert_eq!(hlf.len(), 8);
    for m in &hlf {
        assert_eq!(m.len(), 6);
        for b in 0..3 {
            assert_eq!(m[2 * b] + m[2 * b + 1], 1);
        }
    }
    let p = class_monomials(&class(Family::P, 2, 2));
    assert_eq!(p.len(), 6);
    let capped = PolyClass { variable_degree_cap: Some(1), ..class(Family::P, 2, 2) };
    assert_eq!(class_monomials(&capped).len(), 4);
}

#[test]
fn sampled_enumeration_is_seeded() {
    let c = class(Family::P, 2, 3);
    let a: Vec<MultiPoly> = enumerate_class(5, &c, 50, 7).unwrap().collect();
    let b: Vec<MultiPoly> = enumerate_class(5, &c, 50, 7).unwrap().collect();
    let e = enumerate_class(5, &c, 50, 7).unwrap();
    assert!(!e.exhaustive);
    assert_eq!(e.seed, 7);
    assert_eq!(a.len(), 50);
    assert_eq!(a, b);
    assert!(a.iter().all(|f| !f.is_zero()));
    let other: Vec<MultiPoly> = enumerate_class(5, &c, 50, 8).unwrap().collect();
    assert_ne!(a, other);
}

fn x2_plus_x() -> MultiPoly {
    let e = enumerate_class(2, &class(Family::P, 1, 2), 100, 0).unwrap();
    let tw = e.tower().clone();
    MultiPoly {
        class: class(Family::P, 1, 2),
        level: 0,
        terms: vec![(vec![1], tw.one(0)), (vec![2], tw.one(0))],
    }
}

#[test]
fn eval_examples() {
    let f4 = chain_tower(2, &[2]).0;
    let f = x2_plus_x();
    let alpha = f4.generator(1).unwrap();
    assert_eq!(eval_poly(&f4, &f, &[alpha]).unwrap(), f4.one(1));
    assert!(eval_poly(&f4, &f, &[f4.one(1)]).unwrap().is_zero());

    let one = f4.one(0);
    let bilinear = MultiPoly {
        class: class(Family::HLF, 2, 2),
        level: 0,
        terms: vec![(vec![1, 0, 1, 0], one.clone()), (vec![0, 1, 0, 1], one.clone())],
    };
    let (z, o) = (f4.zero(0), f4.one(0));
    let a: Vec<FieldElement> = vec![o.clone(), z.clone(), z, o];
    assert!(eval_poly(&f4, &bilinear, &a).unwrap().is_zero());
    assert!(matches!(eval_poly(&f4, &bilinear, &a[..2]), Err(Error::InvalidArgument(_)) | Err(Error::LevelMismatch { .. })));
}

#[test]
fn evaluation_tester_example() {
    let t = evaluation_tester(5, 2, 2, 5, Family::P).unwrap();
    let r = is_tester(&t, &exact(2)).unwrap();
    assert!(r.verdict);
    assert!(r.exact);
    assert_eq!(r.worst_failure, rat(2, 5));
    let w = r.witness.unwrap();
    assert_eq!(w.failing.len(), 2);
    assert_eq!(w.poly.degree(), Some(2));
}

#[test]
fn univariate_path_agrees() {
    let cases = [(5u64, 2usize, 2usize, 5u128, Family::P, 1usize), (4, 2, 1, 5, Family::HP, 2), (3, 3, 1, 3, Family::P, 2), (7, 2, 3, 7, Family::P, 1)];
    for (q, t, d, r, fam, max_n) in cases {
        let tester = evaluation_tester(q, t, d, r, fam).unwrap();
        for n in 1..=max_n {
            let g = exact(n);
            let a = is_tester(&tester, &g).unwrap();
            let b = is_tester_univariate(&tester, &g).unwrap();
            assert_eq!((a.verdict, &a.worst_failure, a.nonzero_pairs), (b.verdict, &b.worst_failure, b.nonzero_pairs), "q={q} t={t} d={d} n={n}");
        }
    }
}

#[test]
fn every_map_family_into_f2_fails_on_x2_plus_x() {
    let (tw, g) = chain_tower(2, &[2]);
    let f4 = field(&tw, g + 1);
    let maps = linear_maps(&f4);
    let t = explicit(&f4, &maps[1..3], rat(1, 2), class(Family::P, 1, 2));
    let r = is_tester(&t, &exact(1)).unwrap();
    assert!(!r.verdict);
    assert_eq!(r.worst_failure, Rational::one());
}

#[test]
fn lift_tester_never_fails() {
    let (tw, g) = chain_tower(2, &[2]);
    let lift = lift_tester(tw, g + 1, class(Family::P, 2, 2)).unwrap();
    let r = is_tester(&lift, &exact(2)).unwrap();
    assert!(r.verdict);
    assert_eq!(r.worst_failure, Rational::zero());
    assert!(r.witness.is_none() || r.witness.unwrap().failing.is_empty());
}

fn third_quarter() -> Tester {
    // F_625 → F_25 with ε = 1/3, then F_25 → F_5 with ε = 1/4.
    let (tw, g) = chain_tower(5, &[2, 2]);
    let l1 = eval_at(&tw, g + 2, 3, class(Family::P, 1, 1), None);
    let l2 = eval_at(&tw, g + 1, 4, class(Family::P, 1, 1), None);
    assert_eq!((l1.epsilon().clone(), l2.epsilon().clone()), (rat(1, 3), rat(1, 4)));
    compose(&l1, &l2).unwrap()
}

#[test]
fn composed_measured_failure() {
    let c = third_quarter();
    assert_eq!(*c.epsilon(), rat(1, 2));
    let m = measured_density(&c, &exact(1)).unwrap();
    assert!(m >= rat(1, 2));
    let w = c.weaken(&rat(2, 3), None).unwrap();
    assert_eq!(measured_density(&w, &exact(1)).unwrap(), m);
}

#[test]
fn class_containment() {
    let t = evaluation_tester(5, 2, 2, 5, Family::P).unwrap();
    let p = is_tester(&t, &exact(1)).unwrap();
    for fam in [Family::HP, Family::HLF] {
        let mut g = exact(1);
        g.family = Some(fam);
        let r = is_tester(&t, &g).unwrap();
        assert!(r.verdict);
        assert!(r.worst_failure <= p.worst_failure);
    }
}

#[test]
fn monotone_on_nested_evaluation_families() {
    let mut last = Rational::one();
    for r in 3..=7u128 {
        let t = evaluation_tester(7, 2, 2, r, Family::P).unwrap();
        let m = is_tester(&t, &exact(1)).unwrap().worst_failure;
        assert!(m <= last, "r={r}");
        assert_eq!(m, rat(2, r as i64));
        last = m;
    }
}

#[test]
fn witness_is_genuine() {
    let t = crt_reduction_tester(3, 3, 2, 2, &rat(5, 6)).unwrap();
    let r = is_tester(&t, &exact(1)).unwrap();
    assert!(r.verdict);
    let w = r.witness.unwrap();
    let fa = eval_poly_in(t.source(), &w.poly, &w.assignment).unwrap();
    assert_ne!(fa, Value::Elem(t.source().field().tower.zero(t.source().level())));
    for i in 0..t.size() {
        let img: Vec<Value> = w.assignment.iter().map(|a| t.apply(i, 0, a).unwrap()).collect();
        let v = eval_poly_in(t.target(), &w.poly, &img).unwrap();
        assert_eq!(v.as_elem().unwrap().is_zero(), w.failing.contains(&i));
    }
    assert_eq!(r.worst_failure, Rational::new((w.failing.len() as u64).into(), 3u64.into()));
}

#[test]
fn sampled_reports_reproduce() {
    let t = evaluation_tester(7, 3, 2, 7, Family::P).unwrap();
    let g = Grid { n: 3, class_cap: 200, assignment_cap: 300, seed: 42, ..Grid::default() };
    let a = is_tester(&t, &g).unwrap();
    let b = is_tester(&t, &g).unwrap();
    assert!(!a.exact);
    assert_eq!(a, b);
    assert!(a.caveats.iter().any(|c| c.contains("seed 42")));
    assert!(a.caveats.iter().any(|c| c.starts_with("n-limited")));
    assert!(a.worst_failure <= *t.epsilon());
}

#[test]
fn exact_mode_respects_budget() {
    let t = evaluation_tester(7, 2, 2, 7, Family::P).unwrap();
    let g = Grid::exact(2);
    assert!(matches!(is_tester(&t, &g), Err(Error::BudgetExceeded { .. })));
    assert!(matches!(is_tester_reference(&t, &g), Err(Error::BudgetExceeded { .. })));
}

/// A random small tester: an evaluation, reduction, composition, product or explicit family.
fn random_config(rng: &mut ChaCha8Rng) -> (Tester, usize) {
    match rng.gen_range(0..5) {
        0 => {
            let (q, t) = [(2u64, 2usize), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3)][rng.gen_range(0..6)];
            let d = 1;
            let fam = if rng.gen_bool(0.5) { Family::P } else { Family::HP };
            let lo = (d * (t - 1) + 1) as u128;
            let hi = if fam == Family::P { q as u128 } else { q as u128 + 1 };
            match evaluation_tester(q, t, d, rng.gen_range(lo..=hi.max(lo)), fam) {
                Ok(x) => (x, 1),
                Err(_) => (evaluation_tester(3, 2, 1, 3, Family::P).unwrap(), 1),
            }
        }
        1 => (crt_reduction_tester(2, 3, 2, 1, &rat(1, 1).min(rat(3, 4))).unwrap_or_else(|_| crt_reduction_tester(3, 3, 2, 1, &rat(1, 2)).unwrap()), 1),
        2 => {
            let (tw, g) = chain_tower(2, &[2, 2]);
            let l1 = eval_at(&tw, g + 2, rng.gen_range(2..=5), class(Family::HP, 1, 1), None);
            let l2 = eval_at(&tw, g + 1, rng.gen_range(2..=3), class(Family::HP, 1, 1), None);
            (compose(&l1, &l2).unwrap(), 1)
        }
        3 => {
            let q = [2u64, 3][rng.gen_range(0..2)];
            let hlf = class(Family::HLF, 1, 1);
            let x = evaluation_tester(q, 2, 1, rng.gen_range(2..=q as u128 + 1), Family::HP).unwrap();
            let y = evaluation_tester(q, 2, 1, rng.gen_range(2..=q as u128 + 1), Family::HP).unwrap();
            let x = x.weaken(x.epsilon(), Some(&hlf)).unwrap();
            let y = y.weaken(y.epsilon(), Some(&hlf)).unwrap();
            (product(&x, &y).unwrap(), 1)
        }
        _ => {
            let (tw, g) = chain_tower(3, &[2]);
            let f9 = field(&tw, g + 1);
            let maps = linear_maps(&f9);
            let k = rng.gen_range(1..=4);
            let pick: Vec<AtomicMap> = (0..k).map(|_| maps[rng.gen_range(0..maps.len())].clone()).collect();
            let d = rng.gen_range(1..=2);
            (explicit(&f9, &pick, rat(1, 2), class(Family::P, 1, d)), rng.gen_range(1..=2))
        }
    }
}

#[test]
fn engine_agrees_with_reference_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let (t, n) = random_config(&mut rng);
        let g = exact(n);
        let a = is_tester(&t, &g).unwrap();
        let b = is_tester_reference(&t, &g).unwrap();
        assert!(a.exact && b.exact);
        assert_eq!(a.worst_failure, b.worst_failure, "case {case}: {}", t.kind());
        assert_eq!(a.verdict, b.verdict, "case {case}");
        assert_eq!(a.nonzero_pairs, b.nonzero_pairs, "case {case}");
        assert_eq!(a.worst_failure <= *t.epsilon(), a.verdict);
    }
}
