//! Concrete tester builders and the planner that chooses among them.

mod plan;
mod t1;

pub use plan::{build, execute, plan, plan_with, ConstructionPlan, PlanVerdict, Route, RouteChoice, Step};
pub use t1::{
    preset_eps_vector, t1_epsilon_star, t1_levels, t1_pipeline, EpsVector, FinalStep, Preset,
};

use std::sync::{Arc, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result, UnconstructibleReason};
use crate::gf::{Field, FieldTower};
use crate::irreducibles::{
    base_field, count_irreducibles, first_m_from, select_range, zero_prefix_len,
    IrreducibleFamily,
};
use crate::rational::{ceil_u128, check_epsilon, format_rational, int, Rational};
use crate::tester::{
    compose, explicit_tester, AtomicMap, CrtParams, Domain, Family, Node, PolyClass, Sourcing,
    Tester,
};
use crate::tester::Flags;
use crate::verify::{is_tester, Grid};

/// Variables per block recorded on constructed testers; verification may use any `n`.
pub const DEFAULT_N: usize = 2;

pub(crate) fn default_class(family: Family, d: usize) -> Result<PolyClass> {
    PolyClass::new(family, DEFAULT_N, d)
}

/// Tower `F_q ⊂ F_{q^t}` and the level of `F_q`.
pub(crate) fn extension_tower(q: u64, t: usize) -> Result<(Arc<FieldTower>, usize)> {
    let (base, ground) = base_field(q)?;
    Ok((Arc::new(base.extend(t, None)?), ground))
}

/// Evaluation tester `F_{q^t} → F_q` of size `r`: lift to `F_q[X]_{t-1}` and evaluate at
/// the first `r` elements of `F_q`, plus the top coefficient when `r = q + 1`.
pub fn evaluation_tester(q: u64, t: usize, d: usize, r: u128, family: Family) -> Result<Tester> {
    let (tower, ground) = extension_tower(q, t)?;
    evaluation_tester_at(Field::new(tower, ground + 1)?, r, default_class(family, d)?)
}

/// Evaluation tester from `source` to the level below it.
pub fn evaluation_tester_at(source: Field, r: u128, class: PolyClass) -> Result<Tester> {
    if source.level == 0 {
        return Err(Error::level_mismatch("an extension level", 0));
    }
    let coeff = Field::new(source.tower.clone(), source.level - 1)?;
    let len = source.tower.degree(source.level);
    let mut t = evaluation_on_slice(coeff, len, r, class)?;
    t.source = Domain::Field(source);
    if let Node::Evaluation { lifted, .. } = &mut t.node {
        *lifted = true;
    }
    Ok(t)
}

/// Evaluation tester `F_q[X]_{len-1} → F_q` acting on polynomials directly.
pub fn evaluation_on_slice(coeff: Field, len: usize, r: u128, class: PolyClass) -> Result<Tester> {
    let q = coeff.cardinality();
    let d = class.d as u128;
    let t = len as u128;
    let needed = d * t.saturating_sub(1) + 1;
    match class.family {
        Family::P => {
            if q < d + 1 {
                return Err(Error::unconstructible(
                    UnconstructibleReason::QTooSmall,
                    format!("q = {q} < d + 1 = {}; P-class density limit: eps >= d/q", d + 1),
                ));
            }
            if r < needed || r > q {
                return Err(Error::unconstructible(
                    UnconstructibleReason::ROutOfRange,
                    format!("need d(t-1)+1 = {needed} <= r <= q = {q}, got r = {r}"),
                ));
            }
        }
        Family::HP | Family::HLF => {
            if d > q {
                return Err(Error::unconstructible(
                    UnconstructibleReason::QTooSmall,
                    format!("d = {d} > q = {q}; HP-class density limit: eps >= d/(q+1)"),
                ));
            }
            if r < needed || r > q + 1 {
                return Err(Error::unconstructible(
                    UnconstructibleReason::ROutOfRange,
                    format!("need d(t-1)+1 = {needed} <= r <= q+1 = {}, got r = {r}", q + 1),
                ));
            }
        }
    }
    let epsilon = Rational::new((d * (t - 1)).into(), r.into());
    let infinity = r == q + 1;
    Ok(Tester {
        source: Domain::Poly { coeff: coeff.clone(), len },
        target: Domain::Field(coeff.clone()),
        ground: coeff.level,
        blocks: 1,
        size: r,
        epsilon,
        class: class.clone(),
        flags: Flags { componentwise: true, linear: true, reducible: !infinity, symmetric: true },
        node: Node::Evaluation { points: r.min(q), infinity, lifted: false, class },
    })
}

/// Reduction `F_{q^t} → F_{q^k}` of size `⌈(dt-d+1)/(ε₁k)⌉`: lift and evaluate at one root
/// of each of the first irreducibles of degree `k`. A nonzero `F ∈ F_q[X]_{d(t-1)}` vanishes
/// at the roots of fewer than `(dt-d+1)/k` of them, so the failure bound is `ε₁`.
pub fn crt_reduction_tester(q: u64, t: usize, k: usize, d: usize, eps1: &Rational) -> Result<Tester> {
    check_epsilon(eps1)?;
    if eps1.is_zero() || t == 0 || k == 0 || d == 0 {
        return Err(Error::InvalidArgument("need t, k, d >= 1 and eps1 > 0".into()));
    }
    let numer = int((d * t - d + 1) as u128);
    let available = int(count_irreducibles(q, k)? * k as u128);
    if available < &numer / eps1 {
        return Err(Error::unconstructible(
            UnconstructibleReason::InsufficientIrreducibles,
            format!(
                "k N_q(k) = {} < (dt-d+1)/eps1 = {}",
                available.to_integer(),
                format_rational(&(&numer / eps1))
            ),
        ));
    }
    let size = ceil_u128(&(&numer / (eps1 * int(k as u128))))?;
    let family = Arc::new(IrreducibleFamily::new(q, k)?);
    let indexed = size <= family.capacity()
        && k > zero_prefix_len(q, k)
        && select_range(q, k).is_ok();
    let roots = Arc::new(OnceLock::new());
    let sourcing = if indexed {
        Sourcing::Indexed
    } else {
        let recs = first_m_from(&family, size as usize).map_err(|e| {
            Error::unconstructible(UnconstructibleReason::InsufficientIrreducibles, e.to_string())
        })?;
        let _ = roots.set(recs.into_iter().map(|r| r.root).collect());
        Sourcing::Scan
    };
    let (src_tower, ground) = extension_tower(q, t)?;
    let target = Field::new(family.tower().clone(), ground + 1)?;
    Ok(Tester {
        source: Domain::Field(Field::new(src_tower, ground + 1)?),
        target: Domain::Field(target),
        ground,
        blocks: 1,
        size,
        epsilon: eps1.clone(),
        class: default_class(Family::P, d)?,
        flags: Flags::ALL,
        node: Node::Crt(CrtParams {
            q,
            t,
            k,
            d,
            eps1: eps1.clone(),
            sourcing,
            family,
            roots,
        }),
    })
}

/// `F_{q^{m₁m₂}} → F_{q^{m₁}} → F_q` as two evaluation testers with failure bounds `ε₂` and
/// `ε₁`; sizes multiply and the failure bound is `1 - (1-ε₁)(1-ε₂)`.
pub fn subfield_chain_tester(
    q: u64,
    m1: usize,
    m2: usize,
    d: usize,
    eps1: &Rational,
    eps2: &Rational,
    family: Family,
) -> Result<Tester> {
    check_epsilon(eps1)?;
    check_epsilon(eps2)?;
    if eps1.is_zero() || eps2.is_zero() {
        return Err(Error::InvalidEpsilon("both failure bounds must be positive".into()));
    }
    let (base, ground) = base_field(q)?;
    let tower = Arc::new(base.extend(m1, None)?.extend(m2, None)?);
    let class = default_class(family, d)?;
    let eval_size = |m: usize, eps: &Rational| -> Result<u128> {
        Ok(ceil_u128(&(int((d * (m - 1)) as u128) / eps))?.max(1))
    };
    let inner = evaluation_tester_at(
        Field::new(tower.clone(), ground + 2)?,
        eval_size(m2, eps2)?,
        class.clone(),
    )?
    .weaken(eps2, None)?;
    let outer = evaluation_tester_at(Field::new(tower, ground + 1)?, eval_size(m1, eps1)?, class)?
        .weaken(eps1, None)?;
    compose(&inner, &outer)
}

/// Search limits for [`exhaustive_search_tester`].
#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// Maximum number of candidate families to verify.
    pub max_families: u64,
    pub grid: Grid,
}

/// The lexicographically first family of `size_target` distinct nonzero linear maps from
/// `source` to the level below that passes exact verification with failure bound `epsilon`.
/// Candidate maps are `z ↦ Σ w_j z_j` after the lift, ordered by the canonical index of the
/// weight vector read as an element of `source`.
pub fn exhaustive_search_tester(
    source: Field,
    class: PolyClass,
    epsilon: &Rational,
    size_target: usize,
    budget: &SearchBudget,
) -> Result<Tester> {
    check_epsilon(epsilon)?;
    if source.level == 0 || size_target == 0 {
        return Err(Error::InvalidArgument("need an extension level and a positive size".into()));
    }
    let tw = source.tower.clone();
    let target = Field::new(tw.clone(), source.level - 1)?;
    let card = source.cardinality();
    let candidates: Vec<AtomicMap> = (1..card)
        .map(|idx| {
            let w = tw.coefficients(&tw.from_index(source.level, idx)?)?;
            let lift = AtomicMap::Lift { field: source.clone() };
            Ok(lift.then(AtomicMap::Functional { field: target.clone(), weights: w }))
        })
        .collect::<Result<_>>()?;
    let n = candidates.len();
    if size_target > n {
        return Err(Error::SearchExhausted {
            tried: 0,
            detail: format!("only {n} nonzero linear maps exist"),
        });
    }
    let mut grid = budget.grid.clone();
    grid.exact = true;
    let mut combo: Vec<usize> = (0..size_target).collect();
    let mut tried = 0u64;
    loop {
        if tried >= budget.max_families {
            return Err(Error::SearchExhausted {
                tried,
                detail: format!("family budget {} reached", budget.max_families),
            });
        }
        tried += 1;
        let maps = combo.iter().map(|&i| vec![candidates[i].clone()]).collect();
        let t = explicit_tester(
            Domain::Field(source.clone()),
            Domain::Field(target.clone()),
            target.level,
            maps,
            epsilon.clone(),
            class.clone(),
        )?;
        if is_tester(&t, &grid)?.verdict {
            return Ok(t);
        }
        // Next combination in lexicographic order.
        let mut i = size_target;
        loop {
            if i == 0 {
                return Err(Error::SearchExhausted {
                    tried,
                    detail: format!("no family of {size_target} maps has failure <= {}", format_rational(epsilon)),
                });
            }
            i -= 1;
            if combo[i] < n - size_target + i {
                combo[i] += 1;
                for j in i + 1..size_target {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `⌈d(t-1)/ε⌉`, the size of an evaluation tester with failure bound at most `ε`.
pub(crate) fn eval_size_for(d: usize, t: usize, eps: &Rational) -> Result<u128> {
    if eps.is_zero() {
        return Err(Error::InvalidEpsilon("failure bound must be positive".into()));
    }
    Ok(ceil_u128(&(int((d * t.saturating_sub(1)) as u128) / eps))?.max(1))
}
