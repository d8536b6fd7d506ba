#![allow(dead_code)]

use std::sync::Arc;

use densetest::constructions::evaluation_tester_at;
use densetest::gf::{Field, FieldTower};
use densetest::irreducibles::base_field;
use densetest::rational::Rational;
use densetest::tester::{Domain, Family, PolyClass, Tester, Value};

pub fn class(family: Family, n: usize, d: usize) -> PolyClass {
    PolyClass::new(family, n, d).unwrap()
}

/// Tower `F_q ⊂ F_{q^a} ⊂ F_{q^{ab}}` with the level of `F_q`.
pub fn chain_tower(q: u64, degrees: &[usize]) -> (Arc<FieldTower>, usize) {
    let (mut tw, ground) = base_field(q).unwrap();
    for &k in degrees {
        tw = tw.extend(k, None).unwrap();
    }
    (Arc::new(tw), ground)
}

pub fn field(tw: &Arc<FieldTower>, level: usize) -> Field {
    Field::new(tw.clone(), level).unwrap()
}

/// Evaluation tester from `level` to `level - 1`, relabeled to failure bound `eps` if given.
pub fn eval_at(tw: &Arc<FieldTower>, level: usize, r: u128, c: PolyClass, eps: Option<Rational>) -> Tester {
    let t = evaluation_tester_at(field(tw, level), r, c).unwrap();
    match eps {
        Some(e) => t.weaken(&e, None).unwrap(),
        None => t,
    }
}

/// Every element of a field-valued domain.
pub fn elements(d: &Domain) -> Vec<Value> {
    let f = d.field();
    (0..f.cardinality())
        .map(|i| Value::Elem(f.tower.from_index(f.level, i).unwrap()))
        .collect()
}

use densetest::tester::{explicit_tester, AtomicMap};

/// Every linear map `source → level below` as lift followed by a weighted sum of the
/// coefficients, in canonical order of the weight vector (index 0 is the zero map).
pub fn linear_maps(source: &Field) -> Vec<AtomicMap> {
    let tw = &source.tower;
    let target = field(tw, source.level - 1);
    (0..source.cardinality())
        .map(|idx| {
            let weights = tw.coefficients(&tw.from_index(source.level, idx).unwrap()).unwrap();
            AtomicMap::Lift { field: source.clone() }.then(AtomicMap::Functional { field: target.clone(), weights })
        })
        .collect()
}

/// An explicit symmetric tester from a list of maps.
pub fn explicit(source: &Field, maps: &[AtomicMap], eps: Rational, c: PolyClass) -> Tester {
    let target = field(&source.tower, source.level - 1);
    explicit_tester(
        Domain::Field(source.clone()),
        Domain::Field(target.clone()),
        target.level,
        maps.iter().map(|m| vec![m.clone()]).collect(),
        eps,
        c,
    )
    .unwrap()
}
