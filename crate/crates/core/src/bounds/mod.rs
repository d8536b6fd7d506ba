//! Closed-form size lower bounds, density limits, series constants and tower parameters.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::constructions::{t1_epsilon_star, EpsVector};
use crate::error::{Error, Result};
use crate::rational::{complement, format_rational, int, pow, rat, to_f64, Rational};
use crate::tester::Family;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    SizeLowerBound,
    DensityLimit,
    CqConstant,
    T1Constants,
    EpsNu,
    TowerParams,
    TowerEstimate,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::SizeLowerBound => "size-lb",
            BoundKind::DensityLimit => "density",
            BoundKind::CqConstant => "cq",
            BoundKind::T1Constants => "t1-consts",
            BoundKind::EpsNu => "eps-nu",
            BoundKind::TowerParams => "tower",
            BoundKind::TowerEstimate => "tower-estimate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Exact(Rational),
    Decimal(f64),
    /// No tester of finite size exists.
    Infeasible,
    Infinite,
}

impl BoundValue {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            BoundValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(r) => to_f64(r),
            BoundValue::Decimal(x) => *x,
            BoundValue::Infeasible | BoundValue::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            BoundValue::Exact(r) => write!(f, "{} (~{:.9})", format_rational(r), to_f64(r)),
            BoundValue::Decimal(x) => write!(f, "{x:.12}"),
            BoundValue::Infeasible => f.write_str("infeasible"),
            BoundValue::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: BoundValue,
    pub citation: String,
    pub inputs: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(kind: BoundKind, value: BoundValue, citation: impl Into<String>) -> Self {
        BoundReport { kind, value, citation: citation.into(), inputs: Vec::new(), notes: Vec::new() }
    }

    fn input(mut self, name: &str, v: impl fmt::Display) -> Self {
        self.inputs.push((name.to_string(), v.to_string()));
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn to_json(&self) -> Value {
        let value = match &self.value {
            BoundValue::Exact(r) => json!({"exact": format_rational(r), "approx": to_f64(r)}),
            BoundValue::Decimal(x) => json!({"decimal": x}),
            BoundValue::Infeasible => json!("infeasible"),
            BoundValue::Infinite => json!("infinite"),
        };
        let inputs: serde_json::Map<String, Value> =
            self.inputs.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        json!({
            "kind": self.kind.to_string(),
            "value": value,
            "citation": self.citation,
            "inputs": inputs,
            "notes": self.notes,
        })
    }
}

fn check_open_epsilon(eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidEpsilon(format!("{} is outside (0, 1)", format_rational(eps))));
    }
    Ok(())
}

fn qpow(q: u64, e: usize) -> Rational {
    Rational::from_integer(num_traits::pow(BigInt::from(q), e))
}

/// `Y = 1 - 1/q + (q-1)/(q(q^t-1))`, the largest density of a nonzero linear form over
/// `F_q` evaluated on a `t`-dimensional image.
fn hlf_y(q: u64, t: usize) -> Rational {
    let qr = int(q as u128);
    let qt = qpow(q, t);
    Rational::one() - Rational::one() / &qr + (&qr - int(1)) / (&qr * (qt - int(1)))
}

/// Smallest possible size of a tester `F_{q^t} → F_q` with failure bound `ε`.
pub fn size_lower_bound(q: u64, d: usize, t: usize, eps: &Rational, family: Family) -> Result<BoundReport> {
    check_open_epsilon(eps)?;
    if q < 2 || d == 0 || t == 0 {
        return Err(Error::InvalidArgument("need q >= 2 and d, t >= 1".into()));
    }
    let dr = int(d as u128);
    let tr = int(t as u128);
    let base = |r: BoundReport| {
        r.input("q", q).input("d", d).input("t", t).input("eps", format_rational(eps)).input("class", family)
    };
    match family {
        Family::P | Family::HP => {
            let v = &dr * (&tr - int(1)) / eps;
            Ok(base(BoundReport::new(
                BoundKind::SizeLowerBound,
                BoundValue::Exact(v),
                "size lower bound: size >= d(t-1)/eps",
            )))
        }
        Family::HLF => {
            // (ν° - 1)/ε with ν° >= (1 + 1/(q-1) - 1/((q-1)q^{t-1}))^{d-1} t.
            let qr = int(q as u128);
            let b = Rational::one() + Rational::one() / (&qr - int(1))
                - Rational::one() / ((&qr - int(1)) * qpow(q, t - 1));
            let trivial = (pow(&b, (d - 1) as u32) * &tr - int(1)) / eps;
            let denom = pow(&hlf_y(q, t), (d - 1) as u32) - complement(eps);
            if denom <= Rational::zero() {
                return Ok(base(BoundReport::new(
                    BoundKind::SizeLowerBound,
                    BoundValue::Infinite,
                    "HLF size lower bound: size >= (t-1)/(Y^(d-1) - (1-eps)), Y = 1-1/q+(q-1)/(q(q^t-1))",
                ))
                .note("1 - eps >= Y^(d-1): no tester of finite size"));
            }
            let singleton = (&tr - int(1)) / denom;
            let (v, which) = if singleton >= trivial { (singleton, "singleton") } else { (trivial, "subset") };
            Ok(base(BoundReport::new(
                BoundKind::SizeLowerBound,
                BoundValue::Exact(v),
                "HLF size lower bound: max((B^(d-1) t - 1)/eps, (t-1)/(Y^(d-1) - (1-eps))), \
                 B = 1+1/(q-1)-1/((q-1)q^(t-1)), Y = 1-1/q+(q-1)/(q(q^t-1))",
            ))
            .note(format!("dominant form: {which}")))
        }
    }
}

/// Least failure bound for which a tester `F_{q^t} → F_q` of finite size can exist.
pub fn density_limit(q: u64, d: usize, t: usize, family: Family) -> Result<BoundReport> {
    if q < 2 || d == 0 || t == 0 {
        return Err(Error::InvalidArgument("need q >= 2 and d, t >= 1".into()));
    }
    let dq = d as u64;
    let r = match family {
        Family::P if dq >= q => BoundReport::new(
            BoundKind::DensityLimit,
            BoundValue::Infeasible,
            "P-class density limit: eps >= d/q; no tester exists when d >= q",
        ),
        Family::P => BoundReport::new(
            BoundKind::DensityLimit,
            BoundValue::Exact(rat(d as i64, q as i64)),
            "P-class density limit: eps >= d/q",
        ),
        Family::HP if dq > q => BoundReport::new(
            BoundKind::DensityLimit,
            BoundValue::Infeasible,
            "HP-class density limit: eps >= d/(q+1); no tester exists when d >= q+1",
        ),
        Family::HP => BoundReport::new(
            BoundKind::DensityLimit,
            BoundValue::Exact(rat(d as i64, q as i64 + 1)),
            "HP-class density limit: eps >= d/(q+1)",
        ),
        Family::HLF => BoundReport::new(
            BoundKind::DensityLimit,
            BoundValue::Exact(Rational::one() - pow(&hlf_y(q, t), d as u32)),
            "HLF-class density limit: eps >= 1-(1-1/q+(q-1)/(q(q^t-1)))^d",
        ),
    };
    Ok(r.input("q", q).input("d", d).input("t", t).input("class", family))
}

/// `c_q = Σ_{i>=0} log2(q^{2^i}+1)/q^{2^i}`, summed until twice the next term is below
/// `precision` (terms at least halve from there on).
pub fn cq_constant(q: u64, precision: f64) -> Result<BoundReport> {
    if q < 2 {
        return Err(Error::InvalidArgument("need q >= 2".into()));
    }
    if !(precision > 0.0) {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let lq = (q as f64).log2();
    let term = |i: i32| -> f64 {
        // Q = q^{2^i}; log2(Q+1)/Q computed without forming Q when it is huge.
        let log_q_big = lq * 2f64.powi(i);
        let inv = (-log_q_big * std::f64::consts::LN_2).exp();
        (log_q_big + (1.0 + inv).log2()) * inv
    };
    let mut sum = 0.0;
    let mut i = 0;
    loop {
        sum += term(i);
        i += 1;
        let next = term(i);
        let settled = lq * 2f64.powi(i) > 2.0; // Q > 4: term ratio < 1/2
        if settled && 2.0 * next < precision {
            break;
        }
    }
    Ok(BoundReport::new(
        BoundKind::CqConstant,
        BoundValue::Decimal(sum),
        "c_q = sum_{i>=0} log2(q^(2^i)+1)/q^(2^i)",
    )
    .input("q", q)
    .input("precision", precision)
    .note(format!("{i} terms; tail below {precision:e}")))
}

/// Constants of the small-field pipeline for one ε-vector.
#[derive(Clone, Debug, PartialEq)]
pub struct T1Constants {
    /// `c_{q,ε} = Σ log2(q^{2^i}+1)/η_i`.
    pub c: f64,
    /// `π_{q,ε} = Σ -log2(1-ε_i)/η_i`.
    pub pi: f64,
    /// `ε⁎` from the defining product.
    pub eps_star: Rational,
    /// `1 - ε⁎`.
    pub density_star: Rational,
    /// `(1-ε_r) ∏ (1-ε_i) · 2^{-π d}`, a lower bound on `1 - ε⁎`.
    pub density_lower_bound: f64,
    /// `c_{q,ε} · d`: log2 of the size up to the `∏(q^{2^i}+1)` and final-step factors.
    pub size_exponent: f64,
    pub citation: String,
}

pub fn c_pi_of_eps_vector(q: u64, d: usize, eps: &EpsVector) -> Result<T1Constants> {
    let eps_star = t1_epsilon_star(q, d, eps).map_err(|e| match e {
        Error::Unconstructible { detail, .. } => Error::InvalidEpsVector(detail),
        other => other,
    })?;
    let mut c = 0.0;
    let mut pi = 0.0;
    let mut prod = to_f64(&complement(&eps.eps_r));
    for (i, &eta) in eps.etas.iter().enumerate() {
        let e_i = eps.eps(q, i)?;
        let big_q = to_f64(&(Rational::from_integer(eta.into()) / &e_i)) - 1.0;
        c += (big_q + 1.0).log2() / eta as f64;
        pi += -to_f64(&complement(&e_i)).log2() / eta as f64;
        prod *= to_f64(&complement(&e_i));
    }
    Ok(T1Constants {
        c,
        pi,
        density_star: complement(&eps_star),
        eps_star,
        density_lower_bound: prod * 2f64.powf(-pi * d as f64),
        size_exponent: c * d as f64,
        citation: "small-field pipeline: 1-eps* = (1-eps_r) prod_i (1-eps_i)^ceil(d/(eps_i(q^(2^i)+1))); \
                   c = sum log2(q^(2^i)+1)/(eps_i(q^(2^i)+1)), pi = sum -log2(1-eps_i)/(eps_i(q^(2^i)+1)); \
                   size <= 2^(c d) prod(q^(2^i)+1) ceil(d(t-1)/eps_r)"
            .into(),
    })
}

/// `ε(m) = (1 - m/(q+1))^{1/m}` and `ν(m) = (q+1)^{1/m}`; exact at `m = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsNu {
    pub eps: f64,
    pub nu: f64,
    pub eps_exact: Option<Rational>,
    pub nu_exact: Option<u128>,
}

pub fn eps_nu_of_m(q: u64, m: u64) -> Result<EpsNu> {
    if m == 0 || m > q {
        return Err(Error::OutOfRange(format!("need 1 <= m <= q = {q}, got m = {m}")));
    }
    let base = 1.0 - m as f64 / (q as f64 + 1.0);
    let (eps_exact, nu_exact) = if m == 1 {
        (Some(rat(q as i64, q as i64 + 1)), Some(q as u128 + 1))
    } else {
        (None, None)
    };
    Ok(EpsNu {
        eps: base.powf(1.0 / m as f64),
        nu: (q as f64 + 1.0).powf(1.0 / m as f64),
        eps_exact,
        nu_exact,
    })
}

/// Genus and degree-one place count of the `k`-th field of the quadratic tower over
/// `F_{q^2}` given by `x_k^q + x_k = x_{k-1}^q/(x_{k-1}^{q-1}+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TowerParams {
    pub genus: i128,
    pub places: i128,
    /// For `k <= 2` only `N_k >= (q^2-q)q^{k-1}` is known.
    pub places_is_lower_bound: bool,
}

pub fn tower_params(q: u64, k: u32) -> Result<TowerParams> {
    if k == 0 || q < 2 {
        return Err(Error::InvalidArgument("need q >= 2 and k >= 1".into()));
    }
    let ovf = || Error::Overflow(format!("tower parameters for q = {q}, k = {k}"));
    let qi = q as i128;
    let p = |e: u32| qi.checked_pow(e).ok_or_else(ovf);
    let genus = if k % 2 == 0 {
        p(k)? - 2 * p(k / 2)? + 1
    } else {
        p(k)? - p(k.div_ceil(2))? - p((k - 1) / 2)? + 1
    };
    let floor = (qi * qi - qi).checked_mul(p(k - 1)?).ok_or_else(ovf)?;
    let (places, lower) = if k >= 3 {
        let extra = if q % 2 == 1 { 2 * qi } else { 2 * qi * qi };
        (floor + extra, false)
    } else {
        (floor, true)
    };
    Ok(TowerParams { genus, places, places_is_lower_bound: lower })
}

/// Which tower-based size formula to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TowerRoute {
    /// Function field `F^{(k)}` over `F_{q^2}`, tester `F_{Q^t} → F_Q` with `Q = q^2`;
    /// `s` degree-one places (default: the smallest admissible count).
    Cvaff3 { k: u32, s: Option<u128> },
    /// `q` must be a perfect square; `t = c·(√q)^k` with `t >= k+4`.
    Lt01 { k: u32 },
    /// `q >= d+1`, `t = c·q^k` with `t >= k+4`.
    Lt02 { k: u32 },
    /// `q >= d+1`, `t >= 8`.
    Lt03,
}

fn hyp(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(what()))
    }
}

fn isqrt(q: u64) -> Option<u64> {
    let r = (q as f64).sqrt().round() as u64;
    (r * r == q).then_some(r)
}

/// Size formula of a tower-based construction after checking its hypotheses. Nothing is built.
pub fn tower_tester_size_estimate(
    q: u64,
    d: usize,
    t: usize,
    eps: &Rational,
    route: TowerRoute,
) -> Result<BoundReport> {
    check_open_epsilon(eps)?;
    let dr = int(d as u128);
    let tr = int(t as u128);
    let fe = format_rational;
    let report = match route {
        TowerRoute::Cvaff3 { k, s } => {
            let tp = tower_params(q, k)?;
            let g = int(tp.genus as u128);
            let need = &dr * (&tr + &g - int(1));
            let n = int(tp.places as u128);
            let big_q = (q as f64) * (q as f64);
            hyp(n > need, || {
                format!(
                    "N_{k} {} {} must exceed d(t+g-1) = {}",
                    if tp.places_is_lower_bound { ">=" } else { "=" },
                    tp.places,
                    fe(&need)
                )
            })?;
            hyp(t as f64 >= 3.0 + 2.0 * (2.0 * tp.genus as f64 + 1.0).log(big_q), || {
                format!("t = {t} < 3 + 2 log_Q(2g+1) with Q = q^2, g = {}", tp.genus)
            })?;
            let s = match s {
                Some(s) => int(s),
                None => (&need / eps).ceil(),
            };
            hyp(s > need && s <= n, || format!("need d(t+g-1) < s <= N, got s = {}", fe(&s)))?;
            let eps_s = &need / &s;
            hyp(eps_s <= *eps, || format!("d(t+g-1)/s = {} exceeds eps", fe(&eps_s)))?;
            BoundReport::new(
                BoundKind::TowerEstimate,
                BoundValue::Exact(s.clone()),
                "function-field evaluation: size s with eps = d(t+g-1)/s, d(t+g-1) < s <= N, t >= 3+2 log_Q(2g+1)",
            )
            .input("genus", tp.genus)
            .input("places", tp.places)
            .note(format!("achieved eps = {}", fe(&eps_s)))
            .note("tester F_{Q^t} -> F_Q with Q = q^2")
        }
        TowerRoute::Lt01 { k } => {
            let sq = isqrt(q).ok_or_else(|| Error::HypothesisViolated(format!("q = {q} is not a perfect square")))?;
            let c = &tr / qpow(sq, k as usize);
            hyp(t >= k as usize + 4, || format!("c >= (k+4)/sqrt(q)^k needs t >= {}", k + 4))?;
            let eps_min = (&c + int(1)) * &dr / int(sq as u128 - 1);
            hyp(*eps >= eps_min, || format!("eps < (c+1)d/(sqrt(q)-1) = {}", fe(&eps_min)))?;
            let v = (Rational::one() + Rational::one() / &c) * &dr * &tr / eps;
            BoundReport::new(
                BoundKind::TowerEstimate,
                BoundValue::Exact(v),
                "square-field tower route: size <= (1+1/c) d t/eps, eps >= (c+1)d/(sqrt(q)-1), t = c sqrt(q)^k",
            )
            .input("c", fe(&c))
        }
        TowerRoute::Lt02 { k } => {
            hyp(q > d as u64, || format!("q = {q} < d + 1"))?;
            let c = &tr / qpow(q, k as usize);
            hyp(t >= k as usize + 4, || format!("c >= (k+4)/q^k needs t >= {}", k + 4))?;
            let eps_min = int(2) * (&c + int(1)) * &dr / int(q as u128 - 1);
            hyp(*eps >= eps_min, || format!("eps < 2(c+1)d/(q-1) = {}", fe(&eps_min)))?;
            let de = &dr / eps;
            let v = int(5) * (Rational::one() + Rational::one() / &c) * &de * &de * &tr;
            BoundReport::new(
                BoundKind::TowerEstimate,
                BoundValue::Exact(v),
                "quadratic-lift tower route: size <= 5(1+1/c)(d/eps)^2 t, eps >= 2(c+1)d/(q-1), t = c q^k",
            )
            .input("c", fe(&c))
        }
        TowerRoute::Lt03 => {
            hyp(q > d as u64, || format!("q = {q} < d + 1"))?;
            hyp(t >= 8, || format!("t = {t} < 8"))?;
            let eps_min = int(8) * &dr / int(q as u128 - 1);
            hyp(*eps >= eps_min, || format!("eps < 8d/(q-1) = {}", fe(&eps_min)))?;
            let de = &dr / eps;
            BoundReport::new(
                BoundKind::TowerEstimate,
                BoundValue::Exact(int(120) * &de * &de * &de * &tr),
                "reduction plus tower route: size <= 120 (d/eps)^3 t, eps >= 8d/(q-1), t >= 8",
            )
        }
    };
    Ok(report
        .input("q", q)
        .input("d", d)
        .input("t", t)
        .input("eps", fe(eps))
        .note("formula only; constructive = false"))
}

/// Rounds a bound up to an integer size when it is finite.
pub fn ceil_size(report: &BoundReport) -> Option<u128> {
    report.value.exact().and_then(|r| r.ceil().to_integer().to_u128())
}
