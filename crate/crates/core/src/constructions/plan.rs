//! Route planner: chooses a construction for `(q, d, t, ε, class)` and predicts its size
//! and failure bound before anything is built.

use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::t1::{level_card, preset_eps_vector, t1_epsilon_star, t1_levels, t1_pipeline};
use super::{crt_reduction_tester, eval_size_for, evaluation_tester, EpsVector, FinalStep, Preset};
use crate::bounds::{density_limit, tower_tester_size_estimate, BoundValue, TowerRoute};
use crate::error::{Error, Result, UnconstructibleReason};
use crate::irreducibles::{base_field, count_irreducibles};
use crate::rational::{ceil_u128, check_epsilon, complement, format_rational, int, rat, to_f64, Rational};
use crate::tester::{compose, Family, PolyClass, Tester};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    DirectEval,
    CrtThenEval,
    SubfieldChain,
    T1Pipeline,
    ExhaustiveSearch,
    TowerFormulaOnly,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::DirectEval => "DirectEval",
            Route::CrtThenEval => "CrtThenEval",
            Route::SubfieldChain => "SubfieldChain",
            Route::T1Pipeline => "T1Pipeline",
            Route::ExhaustiveSearch => "ExhaustiveSearch",
            Route::TowerFormulaOnly => "TowerFormulaOnly",
        })
    }
}

/// Restricts the planner to one family of routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteChoice {
    Auto,
    Eval,
    Crt,
    T1,
}

impl RouteChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(RouteChoice::Auto),
            "eval" => Ok(RouteChoice::Eval),
            "crt" => Ok(RouteChoice::Crt),
            "t1" => Ok(RouteChoice::T1),
            _ => Err(Error::InvalidArgument(format!("unknown route {s:?}, expected auto|eval|crt|t1"))),
        }
    }

    fn allows(self, route: Route) -> bool {
        match self {
            RouteChoice::Auto => true,
            RouteChoice::Eval => route == Route::DirectEval,
            RouteChoice::Crt => route == Route::CrtThenEval,
            RouteChoice::T1 => route == Route::T1Pipeline,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Evaluation tester of size `r`, built for class `build` and then narrowed.
    Direct { r: u128, build: Family },
    /// Reduction to `F_{q^k}` with failure `eps1`, followed by `inner`.
    Crt { k: usize, eps1: Rational, inner: Box<ConstructionPlan> },
    T1 { preset: Option<Preset>, eps: EpsVector },
    Formula { route: TowerRoute },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionPlan {
    pub route: Route,
    pub q: u64,
    pub d: usize,
    pub t: usize,
    pub family: Family,
    /// Requested failure bound.
    pub epsilon: Rational,
    /// Failure bound the built tester declares; never above `epsilon`.
    pub declared_epsilon: Rational,
    pub predicted_size: Option<u128>,
    pub predicted_value: f64,
    pub epsilon_split: Vec<Rational>,
    pub constructive: bool,
    pub citation: String,
    pub notes: Vec<String>,
    pub step: Step,
}

impl ConstructionPlan {
    pub fn to_json(&self) -> Value {
        let step = match &self.step {
            Step::Direct { r, build } => json!({"kind": "direct", "r": r.to_string(), "build_class": build.to_string()}),
            Step::Crt { k, eps1, inner } => {
                json!({"kind": "crt", "k": k, "eps1": format_rational(eps1), "inner": inner.to_json()})
            }
            Step::T1 { preset, eps } => json!({
                "kind": "t1",
                "preset": preset.map(|p| p.to_string()),
                "etas": eps.etas.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "eps_r": format_rational(&eps.eps_r),
            }),
            Step::Formula { route } => json!({"kind": "formula", "route": format!("{route:?}")}),
        };
        json!({
            "route": self.route.to_string(),
            "q": self.q,
            "d": self.d,
            "t": self.t,
            "class": self.family.to_string(),
            "epsilon": format_rational(&self.epsilon),
            "declared_epsilon": format_rational(&self.declared_epsilon),
            "predicted_size": self.predicted_size.map(|s| s.to_string()),
            "predicted_value": self.predicted_value,
            "epsilon_split": self.epsilon_split.iter().map(format_rational).collect::<Vec<_>>(),
            "constructive": self.constructive,
            "citation": self.citation,
            "notes": self.notes,
            "step": step,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanVerdict {
    Feasible(ConstructionPlan),
    Unconstructible { reason: UnconstructibleReason, citation: String, detail: String },
}

impl PlanVerdict {
    pub fn to_json(&self) -> Value {
        match self {
            PlanVerdict::Feasible(p) => json!({"verdict": "feasible", "plan": p.to_json()}),
            PlanVerdict::Unconstructible { reason, citation, detail } => json!({
                "verdict": "unconstructible",
                "reason": reason.to_string(),
                "citation": citation,
                "detail": detail,
            }),
        }
    }
}

/// Plans with every route allowed.
pub fn plan(q: u64, d: usize, t: usize, epsilon: &Rational, family: Family) -> Result<PlanVerdict> {
    plan_with(q, d, t, epsilon, family, RouteChoice::Auto)
}

/// Picks the first applicable route in the order: direct evaluation, reductions to `F_{q^2}`
/// and to `F_{q^{η+1}}` (and their nested forms), the tight reduction split, the
/// small-field pipeline, and finally formula-only tower routes.
pub fn plan_with(
    q: u64,
    d: usize,
    t: usize,
    epsilon: &Rational,
    family: Family,
    choice: RouteChoice,
) -> Result<PlanVerdict> {
    base_field(q)?;
    check_epsilon(epsilon)?;
    if d == 0 || t == 0 {
        return Err(Error::InvalidArgument("d and t must be positive".into()));
    }
    let limit = density_limit(q, d, t, family)?;
    match &limit.value {
        BoundValue::Infeasible => {
            return Ok(PlanVerdict::Unconstructible {
                reason: UnconstructibleReason::QTooSmall,
                citation: limit.citation,
                detail: format!("q = {q} is too small for degree {d} in class {family}"),
            })
        }
        BoundValue::Exact(l) if epsilon < l && t > 1 => {
            return Ok(PlanVerdict::Unconstructible {
                reason: UnconstructibleReason::BelowDensityLimit,
                citation: limit.citation,
                detail: format!("eps = {} < {}", format_rational(epsilon), format_rational(l)),
            })
        }
        _ => {}
    }
    let p = Params { q, d, t, eps: epsilon.clone(), family };
    let rows: [(Route, fn(&Params) -> Result<Option<ConstructionPlan>>); 8] = [
        (Route::DirectEval, direct),
        (Route::CrtThenEval, crt_quadratic),
        (Route::CrtThenEval, crt_eta),
        (Route::CrtThenEval, crt_eta_nested3),
        (Route::CrtThenEval, crt_eta_nested4),
        (Route::CrtThenEval, crt_tight),
        (Route::T1Pipeline, t1),
        (Route::TowerFormulaOnly, tower_formula),
    ];
    for (route, row) in rows {
        if !choice.allows(route) {
            continue;
        }
        if let Some(mut plan) = row(&p)? {
            mark_unrepresentable(&mut plan)?;
            return Ok(PlanVerdict::Feasible(plan));
        }
    }
    Ok(PlanVerdict::Unconstructible {
        reason: UnconstructibleReason::NoRoute,
        citation: limit.citation,
        detail: format!(
            "no implemented route for q = {q}, d = {d}, t = {t}, eps = {}, class {family} (route choice {choice:?})",
            format_rational(epsilon)
        ),
    })
}

/// Field cardinalities are 128-bit; a plan whose source field is larger stays a formula.
fn mark_unrepresentable(plan: &mut ConstructionPlan) -> Result<()> {
    if !plan.constructive {
        return Ok(());
    }
    let degree = match plan.step {
        Step::T1 { .. } => (1usize << t1_levels(plan.q, plan.d)?) * plan.t,
        _ => plan.t,
    };
    let fits = u32::try_from(degree).ok().and_then(|e| (plan.q as u128).checked_pow(e)).is_some();
    if !fits {
        plan.constructive = false;
        plan.notes.push(format!("source field F_({}^{degree}) exceeds 128-bit cardinality; size is predicted only", plan.q));
    }
    Ok(())
}

/// Builds the tester a constructive plan describes, narrowed to the plan's class.
pub fn execute(plan: &ConstructionPlan) -> Result<Tester> {
    if !plan.constructive && !matches!(plan.step, Step::Formula { .. }) {
        return Err(Error::unconstructible(UnconstructibleReason::NoRoute, plan.notes.join("; ")));
    }
    let built = match &plan.step {
        Step::Direct { r, build } => evaluation_tester(plan.q, plan.t, plan.d, *r, *build)?,
        Step::Crt { k, eps1, inner } => {
            let outer = crt_reduction_tester(plan.q, plan.t, *k, plan.d, eps1)?;
            compose(&outer, &execute(inner)?)?
        }
        Step::T1 { eps, .. } => t1_pipeline(plan.q, plan.d, plan.t, eps, FinalStep::Auto)?,
        Step::Formula { .. } => {
            return Err(Error::unconstructible(
                UnconstructibleReason::NoRoute,
                format!("{} is formula-only: {}", plan.route, plan.citation),
            ))
        }
    };
    if built.class().family == plan.family {
        return Ok(built);
    }
    let class = PolyClass::new(plan.family, built.class().n, plan.d)?;
    let eps = built.epsilon().clone();
    built.weaken(&eps, Some(&class))
}

/// Plans and executes; infeasible and formula-only plans become `Unconstructible` errors.
pub fn build(
    q: u64,
    t: usize,
    d: usize,
    epsilon: &Rational,
    family: Family,
    choice: RouteChoice,
) -> Result<(ConstructionPlan, Tester)> {
    match plan_with(q, d, t, epsilon, family, choice)? {
        PlanVerdict::Unconstructible { reason, citation, detail } => {
            Err(Error::unconstructible(reason, format!("{detail}; {citation}")))
        }
        PlanVerdict::Feasible(plan) => {
            let tester = execute(&plan)?;
            Ok((plan, tester))
        }
    }
}

struct Params {
    q: u64,
    d: usize,
    t: usize,
    eps: Rational,
    family: Family,
}

impl Params {
    fn plan(&self, route: Route, declared: Rational, size: u128, split: Vec<Rational>, citation: &str, step: Step) -> ConstructionPlan {
        ConstructionPlan {
            route,
            q: self.q,
            d: self.d,
            t: self.t,
            family: self.family,
            epsilon: self.eps.clone(),
            declared_epsilon: declared,
            predicted_size: Some(size),
            predicted_value: size as f64,
            epsilon_split: split,
            constructive: true,
            citation: citation.to_string(),
            notes: Vec::new(),
            step,
        }
    }

    fn with(&self, t: usize, eps: Rational) -> Params {
        Params { q: self.q, d: self.d, t, eps, family: Family::P }
    }
}

const DIRECT_CITATION: &str = "evaluation tester: size ceil(d(t-1)/eps), eps >= d(t-1)/q (r <= q+1 with the top coefficient for HP)";

fn direct(p: &Params) -> Result<Option<ConstructionPlan>> {
    let (q, d, t) = (p.q as u128, p.d as u128, p.t as u128);
    let r = if t == 1 {
        1
    } else if p.eps.is_zero() {
        return Ok(None);
    } else {
        eval_size_for(p.d, p.t, &p.eps)?
    };
    let build = match p.family {
        Family::P if q > d && r <= q => Family::P,
        Family::P => return Ok(None),
        _ if d <= q && r <= q && q > d => Family::P,
        _ if d <= q && r <= q + 1 => Family::HP,
        _ => return Ok(None),
    };
    let declared = Rational::new((d * (t - 1)).into(), r.into());
    Ok(Some(p.plan(Route::DirectEval, declared.clone(), r, vec![declared], DIRECT_CITATION, Step::Direct { r, build })))
}

/// `k N_q(k) >= (dt-d+1)/ε₁`; counts too large for 128 bits satisfy it.
fn enough_irreducibles(q: u64, k: usize, numer: &Rational, eps1: &Rational) -> bool {
    if eps1 <= &Rational::zero() {
        return false;
    }
    match count_irreducibles(q, k) {
        Ok(n) => int(n.saturating_mul(k as u128)) >= numer / eps1,
        Err(_) => true,
    }
}

/// Reduction to `F_{q^k}` with failure `eps1` followed by `inner`.
fn crt_plan(p: &Params, k: usize, eps1: Rational, inner: ConstructionPlan, citation: &str) -> Result<Option<ConstructionPlan>> {
    if p.q <= p.d as u64 || k >= p.t || k == 0 {
        return Ok(None);
    }
    let numer = int((p.d * p.t - p.d + 1) as u128);
    if !enough_irreducibles(p.q, k, &numer, &eps1) {
        return Ok(None);
    }
    let outer = ceil_u128(&(&numer / (&eps1 * int(k as u128))))?;
    let Some(inner_size) = inner.predicted_size else { return Ok(None) };
    let Some(size) = outer.checked_mul(inner_size) else { return Ok(None) };
    let declared = complement(&(complement(&eps1) * complement(&inner.declared_epsilon)));
    if declared > p.eps {
        return Ok(None);
    }
    let mut split = vec![eps1.clone()];
    split.extend(inner.epsilon_split.iter().cloned());
    let mut plan = p.plan(
        Route::CrtThenEval,
        declared,
        size,
        split,
        citation,
        Step::Crt { k, eps1, inner: Box::new(inner) },
    );
    if !plan_uses_indexed(p.q, k, outer) {
        plan.notes.push(format!("degree-{k} irreducibles sourced by scan (indexed capacity too small)"));
    }
    Ok(Some(plan))
}

fn plan_uses_indexed(q: u64, k: usize, count: u128) -> bool {
    count <= crate::irreducibles::family_capacity(q, k)
}

fn smallest(cands: Vec<ConstructionPlan>) -> Option<ConstructionPlan> {
    // Smallest size; ties toward the larger first split entry.
    cands.into_iter().min_by(|a, b| {
        a.predicted_size.cmp(&b.predicted_size).then_with(|| b.epsilon_split[0].cmp(&a.epsilon_split[0]))
    })
}

fn direct_inner(p: &Params, k: usize, eps2: &Rational) -> Result<Option<ConstructionPlan>> {
    direct(&p.with(k, eps2.clone()))
}

/// Reduction to `F_{q^2}`: `ε₂ = ε₁ = ε/2` when `ε >= 2d/q`, else `ε₂ = d/q`, `ε₁ = ε - d/q`.
fn crt_quadratic(p: &Params) -> Result<Option<ConstructionPlan>> {
    let (q, d, t) = (p.q, p.d as u128, p.t as u128);
    if q as u128 <= d || t <= 2 || t + 1 >= q as u128 {
        return Ok(None);
    }
    let dq = rat(p.d as i64, q as i64);
    let need = &dq + Rational::new((d * t - d + 1).into(), ((q as u128) * (q as u128) - q as u128).into());
    if p.eps < need {
        return Ok(None);
    }
    let (eps1, eps2) = if p.eps >= &dq * int(2) {
        (&p.eps / int(2), &p.eps / int(2))
    } else {
        (&p.eps - &dq, dq)
    };
    let Some(inner) = direct_inner(p, 2, &eps2)? else { return Ok(None) };
    crt_plan(
        p,
        2,
        eps1,
        inner,
        "reduction to F_{q^2} then evaluation: size ceil((dt-d+1)/(2 eps1)) ceil(d/eps2), \
         eps1 >= (dt-d+1)/(q^2-q), eps2 >= d/q",
    )
}

fn etas(p: &Params) -> std::ops::RangeInclusive<u64> {
    1..=(p.q / p.d as u64)
}

fn qpow_small(q: u64, e: u64) -> Option<u128> {
    (q as u128).checked_pow(u32::try_from(e).ok()?)
}

/// Reduction to `F_{q^{η+1}}` with halves, for `t <= η q^{η-1}` and `ε >= 2ηd/q`.
fn crt_eta_row(p: &Params) -> Result<Option<ConstructionPlan>> {
    let mut cands = Vec::new();
    for eta in etas(p) {
        let Some(window) = qpow_small(p.q, eta - 1).and_then(|v| v.checked_mul(eta as u128)) else { break };
        if p.t as u128 > window || p.eps < rat(2 * eta as i64 * p.d as i64, p.q as i64) {
            continue;
        }
        let k = eta as usize + 1;
        let half = &p.eps / int(2);
        let Some(inner) = direct_inner(p, k, &half)? else { continue };
        if let Some(plan) = crt_plan(
            p,
            k,
            half,
            inner,
            "reduction to F_{q^(eta+1)} then evaluation: size ceil((dt-d+1)/((eta+1) eps/2)) ceil(2 d eta/eps), \
             eps >= 2 eta d/q, t <= eta q^(eta-1)",
        )? {
            cands.push(plan);
        }
    }
    Ok(smallest(cands))
}

fn crt_eta(p: &Params) -> Result<Option<ConstructionPlan>> {
    crt_eta_row(p)
}

/// Reduction to `F_{q^k}`, `k = η q^{η-1}`, with `ε₁ = ε/3` followed by the halves row at `2ε/3`,
/// for `q^{4η} <= t <= q^{η q^{η-1} - 2}` and `ε >= 3ηd/q`.
fn crt_eta_nested3(p: &Params) -> Result<Option<ConstructionPlan>> {
    let mut cands = Vec::new();
    for eta in etas(p) {
        let Some(k) = qpow_small(p.q, eta - 1).and_then(|v| v.checked_mul(eta as u128)) else { break };
        let lo = qpow_small(p.q, 4 * eta);
        let hi = (k >= 2).then(|| qpow_small(p.q, k as u64 - 2)).flatten();
        let t = p.t as u128;
        let in_window = matches!((lo, hi), (Some(lo), Some(hi)) if lo <= t && t <= hi)
            || matches!((lo, hi), (Some(lo), None) if lo <= t && k >= 2);
        if !in_window || p.eps < rat(3 * eta as i64 * p.d as i64, p.q as i64) {
            continue;
        }
        let k = k as usize;
        let Some(inner) = crt_eta_row(&p.with(k, &p.eps * rat(2, 3)))? else { continue };
        if let Some(plan) = crt_plan(
            p,
            k,
            &p.eps / int(3),
            inner,
            "reduction to F_{q^k}, k = eta q^(eta-1), with eps1 = eps/3, then the eta-row tester at 2 eps/3: \
             eps >= 3 eta d/q, q^(4 eta) <= t <= q^(eta q^(eta-1)-2)",
        )? {
            cands.push(plan);
        }
    }
    Ok(smallest(cands))
}

/// Reduction to `F_{q^k}`, `k = q^{η q^{η-1} - 2}`, with `ε₁ = ε/4` followed by the nested
/// row at `3ε/4`, for `t >= q^{4η q^{η-1}}` and `ε >= 4ηd/q`.
fn crt_eta_nested4(p: &Params) -> Result<Option<ConstructionPlan>> {
    let mut cands = Vec::new();
    for eta in etas(p) {
        let Some(m) = qpow_small(p.q, eta - 1).map(|v| v * eta as u128) else { break };
        if m < 2 {
            continue;
        }
        let Some(k) = qpow_small(p.q, m as u64 - 2) else { break };
        let Some(lo) = qpow_small(p.q, 4 * m as u64) else { break };
        if (p.t as u128) < lo || p.eps < rat(4 * eta as i64 * p.d as i64, p.q as i64) {
            continue;
        }
        let Ok(k) = usize::try_from(k) else { break };
        let Some(inner) = crt_eta_nested3(&p.with(k, &p.eps * rat(3, 4)))? else { continue };
        if let Some(plan) = crt_plan(
            p,
            k,
            &p.eps / int(4),
            inner,
            "reduction to F_{q^k}, k = q^(eta q^(eta-1)-2), with eps1 = eps/4, then the nested row at 3 eps/4: \
             eps >= 4 eta d/q, t >= q^(4 eta q^(eta-1))",
        )? {
            cands.push(plan);
        }
    }
    Ok(smallest(cands))
}

/// Reduction to `F_{q^k}` with the inner evaluation at its smallest failure `d(k-1)/q`
/// and `ε₁ = 1 - (1-ε)/(1-ε₂)`, over `2 <= k < t`; smallest total size wins.
fn crt_tight(p: &Params) -> Result<Option<ConstructionPlan>> {
    if p.q <= p.d as u64 {
        return Ok(None);
    }
    let mut cands = Vec::new();
    for k in 2..p.t.min(65) {
        let eps2 = rat((p.d * (k - 1)) as i64, p.q as i64);
        if eps2 >= p.eps {
            break;
        }
        let eps1 = Rational::one() - complement(&p.eps) / complement(&eps2);
        let Some(inner) = direct_inner(p, k, &eps2)? else { continue };
        if let Some(plan) = crt_plan(
            p,
            k,
            eps1,
            inner,
            "reduction to F_{q^k} then evaluation: size ceil((dt-d+1)/(k eps1)) ceil(d(k-1)/eps2), \
             k N_q(k) >= (dt-d+1)/eps1, eps2 = d(k-1)/q, (1-eps1)(1-eps2) = 1-eps",
        )? {
            cands.push(plan);
        }
    }
    Ok(smallest(cands))
}

const T1_CITATION: &str = "small-field pipeline: eps* = 1-(1-eps_r) prod_i (1-eps_i)^ceil(d/(eps_i(q^(2^i)+1))), \
     size prod_i (q^(2^i)+1)^ceil(d/(eps_i(q^(2^i)+1))) * ceil(d(t-1)/eps_r), r least with 9d <= q^(2^r)";

fn t1(p: &Params) -> Result<Option<ConstructionPlan>> {
    if p.family != Family::HLF || p.q > p.d as u64 {
        return Ok(None);
    }
    let mut presets = vec![Preset::Density2];
    presets.extend((1..=p.q).rev().map(Preset::Co1));
    for preset in presets {
        let eps = preset_eps_vector(p.q, p.d, preset)?;
        let star = t1_epsilon_star(p.q, p.d, &eps)?;
        if star > p.eps {
            continue;
        }
        let size = t1_size(p.q, p.d, p.t, &eps)?;
        let r = t1_levels(p.q, p.d)?;
        let mut split: Vec<Rational> = (0..r).map(|i| eps.eps(p.q, i)).collect::<Result<_>>()?;
        split.push(eps.eps_r.clone());
        let mut plan = p.plan(
            Route::T1Pipeline,
            star,
            size,
            split,
            T1_CITATION,
            Step::T1 { preset: Some(preset), eps },
        );
        plan.notes.push(format!(
            "source field is F_(q^(2^{r} t)) = F_({}^{}), which contains F_(q^t)",
            p.q,
            (1usize << r) * p.t
        ));
        return Ok(Some(plan));
    }
    Ok(None)
}

/// `∏_i (q^{2^i}+1)^{⌈d/η_i⌉} · ⌈d(t-1)/ε_r⌉`.
pub(crate) fn t1_size(q: u64, d: usize, t: usize, eps: &EpsVector) -> Result<u128> {
    let ovf = || Error::Overflow("pipeline size exceeds 128 bits".into());
    let mut size = eval_size_for(d, t, &eps.eps_r)?;
    for (i, &eta) in eps.etas.iter().enumerate() {
        let per = (level_card(q, i)? + 1).checked_pow((d as u128).div_ceil(eta) as u32).ok_or_else(ovf)?;
        size = size.checked_mul(per).ok_or_else(ovf)?;
    }
    Ok(size)
}

fn tower_formula(p: &Params) -> Result<Option<ConstructionPlan>> {
    if p.q <= p.d as u64 || p.eps.is_zero() {
        return Ok(None);
    }
    let mut routes = vec![TowerRoute::Lt03];
    let mut k = 0u32;
    while qpow_small(p.q, k as u64).is_some_and(|v| v <= p.t as u128) {
        routes.push(TowerRoute::Lt02 { k });
        routes.push(TowerRoute::Lt01 { k });
        k += 1;
    }
    let best = routes
        .into_iter()
        .filter_map(|route| tower_tester_size_estimate(p.q, p.d, p.t, &p.eps, route).ok().map(|r| (route, r)))
        .min_by(|a, b| a.1.value.as_f64().total_cmp(&b.1.value.as_f64()));
    let Some((route, report)) = best else { return Ok(None) };
    let value = report.value.exact().cloned().unwrap_or_else(Rational::zero);
    Ok(Some(ConstructionPlan {
        route: Route::TowerFormulaOnly,
        q: p.q,
        d: p.d,
        t: p.t,
        family: p.family,
        epsilon: p.eps.clone(),
        declared_epsilon: p.eps.clone(),
        predicted_size: None,
        predicted_value: to_f64(&value),
        epsilon_split: vec![p.eps.clone()],
        constructive: false,
        citation: report.citation,
        notes: vec![
            "function-field constructions are not built; the value is the formula only".into(),
            format!("size formula value {}", value.ceil().to_integer().to_u128().map_or("huge".into(), |v| v.to_string())),
        ],
        step: Step::Formula { route },
    }))
}
