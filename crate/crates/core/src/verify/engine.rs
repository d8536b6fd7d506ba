//! Verification loops: the matrix-based engine, the reference loop and the univariate loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arith::Arith;
use super::poly::{class_monomials, enumerate_class_in, eval_poly_in, num_vars, value_is_zero, MultiPoly};
use super::{grid_class, Grid, VerificationReport, Witness};
use crate::error::{Error, Result};
use crate::gf::PolyRing;
use crate::rational::Rational;
use crate::tester::{Domain, Family, Node, PolyClass, Tester, Value};

/// Exhaustive or sampled enumeration of `count` items.
#[derive(Clone, Copy, Debug)]
enum Plan {
    All(u128),
    Sample(u128),
}

impl Plan {
    fn count(self) -> u128 {
        match self {
            Plan::All(c) | Plan::Sample(c) => c,
        }
    }

    fn exhaustive(self) -> bool {
        matches!(self, Plan::All(_))
    }
}

fn pow_u128(p: u32, e: usize) -> Option<u128> {
    (p as u128).checked_pow(u32::try_from(e).ok()?)
}

fn budget_error(work: Option<u128>, budget: u128) -> Error {
    Error::BudgetExceeded { work: work.unwrap_or(u128::MAX), budget }
}

/// Chooses exhaustive or sampled enumerations for polynomials and assignments.
fn plan_counts(
    grid: &Grid,
    class_total: Option<u128>,
    assign_total: Option<u128>,
    size: u128,
) -> Result<(Plan, Plan)> {
    if grid.exact {
        let work = class_total
            .zip(assign_total)
            .and_then(|(c, a)| c.checked_mul(a))
            .and_then(|w| w.checked_mul(size));
        return match (work, class_total, assign_total) {
            (Some(w), Some(c), Some(a)) if w <= grid.budget => Ok((Plan::All(c), Plan::All(a))),
            _ => Err(budget_error(work, grid.budget)),
        };
    }
    let polys = match class_total {
        Some(c) if c <= grid.class_cap as u128 => Plan::All(c),
        _ => Plan::Sample(grid.class_cap.max(1) as u128),
    };
    let mut assigns = match assign_total {
        Some(a) if a <= grid.assignment_cap as u128 => Plan::All(a),
        _ => Plan::Sample(grid.assignment_cap.max(1) as u128),
    };
    let per_assign = polys.count().saturating_mul(size).max(1);
    if per_assign.saturating_mul(assigns.count()) > grid.budget {
        assigns = Plan::Sample((grid.budget / per_assign).max(1));
    }
    Ok((polys, assigns))
}

enum Mode {
    /// Prime-field target over `F_2` with at most 64 source coordinates: one mask per map,
    /// images packed as bitsets over the maps.
    Bits { masks: Vec<Vec<u64>>, words: usize },
    /// Prime-field target: one row of source coefficients per map.
    Scalar { rows: Vec<Vec<u32>> },
    /// Anything else: a `wt × ws` matrix per map.
    General { mats: Vec<Vec<u32>> },
}

struct Setup<'a> {
    tester: &'a Tester,
    class: PolyClass,
    src: Arith,
    tgt: Arith,
    monos: Vec<Vec<u32>>,
    var_block: Vec<usize>,
    ground: usize,
    e: usize,
    p: u32,
    size: usize,
    ws_var: usize,
    ws_mono: usize,
    wt_var: usize,
    wt_mono: usize,
    basis: Vec<Vec<u32>>,
    mode: Mode,
}

enum RTable {
    Bits(Vec<Vec<u64>>),
    Vals(Vec<Vec<u32>>),
}

struct Tables {
    ws: Vec<Vec<u32>>,
    wr: RTable,
}

#[inline]
fn add_mod(dst: &mut [u32], src: &[u32], p: u32) {
    if p == 2 {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= s;
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            let x = *d + s;
            *d = if x >= p { x - p } else { x };
        }
    }
}

fn var_blocks(tester: &Tester, class: &PolyClass) -> Vec<usize> {
    (0..num_vars(class))
        .map(|j| if tester.blocks() == 1 { 0 } else { j / class.n })
        .collect()
}

impl<'a> Setup<'a> {
    fn new(tester: &'a Tester, class: PolyClass) -> Result<Self> {
        let src = Arith::of(tester.source());
        let tgt = Arith::of(tester.target());
        let size = usize::try_from(tester.size())
            .map_err(|_| Error::BudgetExceeded { work: tester.size(), budget: usize::MAX as u128 })?;
        let ground = tester.ground_level();
        let tw = src.tower().clone();
        let e = tw.width(ground);
        let p = tw.p();
        let monos = class_monomials(&class);
        let var_block = var_blocks(tester, &class);
        let ws_var = src.var_width();
        let wt_var = tgt.var_width();
        let basis = (0..e)
            .map(|k| {
                let mut v = vec![0; e];
                v[k] = 1;
                v
            })
            .collect();
        // Images of the unit vectors give every map as a matrix.
        let mut cols: Vec<Vec<Vec<u32>>> = Vec::with_capacity(tester.blocks());
        for b in 0..tester.blocks() {
            let mut per_c = Vec::with_capacity(ws_var);
            for c in 0..ws_var {
                let mut u = vec![0; ws_var];
                u[c] = 1;
                let imgs = tester.images(b, &src.from_flat(&u)?)?;
                let flat: Vec<u32> = imgs.iter().flat_map(|v| tgt.to_flat(v, wt_var)).collect();
                per_c.push(flat);
            }
            cols.push(per_c);
        }
        let mode = if tgt.is_prime_field() && p == 2 && ws_var <= 64 {
            let masks = cols
                .iter()
                .map(|per_c| {
                    (0..size)
                        .map(|i| (0..ws_var).fold(0u64, |m, c| m | ((per_c[c][i] as u64) << c)))
                        .collect()
                })
                .collect();
            Mode::Bits { masks, words: size.div_ceil(64) }
        } else if tgt.is_prime_field() {
            let rows = cols
                .iter()
                .map(|per_c| {
                    let mut r = vec![0u32; size * ws_var];
                    for (c, col) in per_c.iter().enumerate() {
                        for i in 0..size {
                            r[i * ws_var + c] = col[i];
                        }
                    }
                    r
                })
                .collect();
            Mode::Scalar { rows }
        } else {
            let mats = cols
                .iter()
                .map(|per_c| {
                    let mut m = vec![0u32; size * wt_var * ws_var];
                    for (c, col) in per_c.iter().enumerate() {
                        for i in 0..size {
                            for r in 0..wt_var {
                                m[(i * wt_var + r) * ws_var + c] = col[i * wt_var + r];
                            }
                        }
                    }
                    m
                })
                .collect();
            Mode::General { mats }
        };
        Ok(Setup {
            ws_mono: src.mono_width(class.d),
            wt_mono: tgt.mono_width(class.d),
            tester,
            class,
            src,
            tgt,
            monos,
            var_block,
            ground,
            e,
            p,
            size,
            ws_var,
            wt_var,
            basis,
            mode,
        })
    }

    fn digits(&self) -> usize {
        self.monos.len() * self.e
    }

    fn mono_value(&self, ar: &Arith, vals: &[Value], mono: &[u32]) -> Result<Value> {
        let mut acc = ar.one();
        for (x, &k) in vals.iter().zip(mono) {
            for _ in 0..k {
                acc = ar.mul(&acc, x)?;
            }
        }
        Ok(acc)
    }

    fn tables(&self, a: &[Vec<u32>]) -> Result<Tables> {
        let p = self.p as u64;
        let vals = a.iter().map(|x| self.src.from_flat(x)).collect::<Result<Vec<_>>>()?;
        let mut ws = Vec::with_capacity(self.digits());
        for mono in &self.monos {
            let v = self.mono_value(&self.src, &vals, mono)?;
            for b in &self.basis {
                ws.push(self.src.to_flat(&self.src.scale(&v, b, self.ground)?, self.ws_mono));
            }
        }
        let wr = match &self.mode {
            Mode::Bits { masks, words } => {
                let tail = self.size % 64;
                let full: Vec<u64> = (0..*words)
                    .map(|w| if w + 1 == *words && tail != 0 { (1u64 << tail) - 1 } else { u64::MAX })
                    .collect();
                let var_bits: Vec<Vec<u64>> = a
                    .iter()
                    .zip(&self.var_block)
                    .map(|(x, &b)| {
                        let am = x.iter().enumerate().fold(0u64, |m, (c, &v)| m | ((v as u64) << c));
                        let mut bits = vec![0u64; *words];
                        for (i, &mask) in masks[b].iter().enumerate() {
                            bits[i / 64] |= (((mask & am).count_ones() & 1) as u64) << (i % 64);
                        }
                        bits
                    })
                    .collect();
                RTable::Bits(
                    self.monos
                        .iter()
                        .map(|mono| {
                            let mut acc = full.clone();
                            for (j, &k) in mono.iter().enumerate() {
                                if k > 0 {
                                    for (d, s) in acc.iter_mut().zip(&var_bits[j]) {
                                        *d &= s;
                                    }
                                }
                            }
                            acc
                        })
                        .collect(),
                )
            }
            Mode::Scalar { rows } => {
                let ws_var = self.ws_var;
                let var_vals: Vec<Vec<u64>> = a
                    .iter()
                    .zip(&self.var_block)
                    .map(|(x, &b)| {
                        (0..self.size)
                            .map(|i| {
                                let row = &rows[b][i * ws_var..(i + 1) * ws_var];
                                row.iter().zip(x).map(|(&r, &v)| r as u64 * v as u64).sum::<u64>() % p
                            })
                            .collect()
                    })
                    .collect();
                RTable::Vals(
                    self.monos
                        .iter()
                        .map(|mono| {
                            (0..self.size)
                                .map(|i| {
                                    let mut acc = 1u64;
                                    for (j, &k) in mono.iter().enumerate() {
                                        for _ in 0..k {
                                            acc = acc * var_vals[j][i] % p;
                                        }
                                    }
                                    acc as u32
                                })
                                .collect()
                        })
                        .collect(),
                )
            }
            Mode::General { mats } => {
                let (ws_var, wt_var, wt_mono) = (self.ws_var, self.wt_var, self.wt_mono);
                let mut out = vec![vec![0u32; self.size * wt_mono]; self.digits()];
                for i in 0..self.size {
                    let tvals = a
                        .iter()
                        .zip(&self.var_block)
                        .map(|(x, &b)| {
                            let m = &mats[b][i * wt_var * ws_var..(i + 1) * wt_var * ws_var];
                            let flat: Vec<u32> = (0..wt_var)
                                .map(|r| {
                                    let row = &m[r * ws_var..(r + 1) * ws_var];
                                    (row.iter().zip(x).map(|(&r, &v)| r as u64 * v as u64).sum::<u64>() % p) as u32
                                })
                                .collect();
                            self.tgt.from_flat(&flat)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    for (mi, mono) in self.monos.iter().enumerate() {
                        let v = self.mono_value(&self.tgt, &tvals, mono)?;
                        for (k, b) in self.basis.iter().enumerate() {
                            let f = self.tgt.to_flat(&self.tgt.scale(&v, b, self.ground)?, wt_mono);
                            out[mi * self.e + k][i * wt_mono..(i + 1) * wt_mono].copy_from_slice(&f);
                        }
                    }
                }
                RTable::Vals(out)
            }
        };
        Ok(Tables { ws, wr })
    }

    fn r_width(&self) -> usize {
        match &self.mode {
            Mode::Bits { .. } | Mode::Scalar { .. } => 1,
            Mode::General { .. } => self.wt_mono,
        }
    }
}

/// Running value of `f(a)` and of `f(l_i(a))` for every tuple `i`.
struct Acc {
    s: Vec<u32>,
    bits: Vec<u64>,
    vals: Vec<u32>,
}

impl Acc {
    fn new(setup: &Setup) -> Self {
        let (bits, vals) = match &setup.mode {
            Mode::Bits { words, .. } => (vec![0; *words], Vec::new()),
            _ => (Vec::new(), vec![0; setup.size * setup.r_width()]),
        };
        Acc { s: vec![0; setup.ws_mono], bits, vals }
    }

    fn clear(&mut self) {
        self.s.fill(0);
        self.bits.fill(0);
        self.vals.fill(0);
    }

    #[inline]
    fn add(&mut self, t: &Tables, digit: usize, p: u32) {
        add_mod(&mut self.s, &t.ws[digit], p);
        match &t.wr {
            RTable::Bits(b) => {
                for (d, s) in self.bits.iter_mut().zip(&b[digit]) {
                    *d ^= s;
                }
            }
            RTable::Vals(v) => add_mod(&mut self.vals, &v[digit], p),
        }
    }

    /// Failing tuples, or `None` when `f(a) = 0`.
    #[inline]
    fn failures(&self, setup: &Setup) -> Option<usize> {
        if self.s.iter().all(|&x| x == 0) {
            return None;
        }
        if !self.bits.is_empty() || matches!(setup.mode, Mode::Bits { .. }) {
            let alive: u32 = self.bits.iter().map(|w| w.count_ones()).sum();
            return Some(setup.size - alive as usize);
        }
        let w = setup.r_width();
        Some(if w == 1 {
            self.vals.iter().filter(|&&x| x == 0).count()
        } else {
            self.vals.chunks(w).filter(|c| c.iter().all(|&x| x == 0)).count()
        })
    }
}

/// Advances a base-`p` counter; false after the last state.
#[inline]
fn bump(digits: &mut [u32], p: u32) -> bool {
    for x in digits.iter_mut() {
        *x += 1;
        if *x < p {
            return true;
        }
        *x = 0;
    }
    false
}

struct Best {
    fails: Option<usize>,
    digits: Vec<u32>,
    assignment: Vec<Vec<u32>>,
    nonzero: u128,
}

impl Best {
    #[inline]
    fn offer(&mut self, fails: usize, digits: &[u32], a: &[Vec<u32>]) {
        self.nonzero += 1;
        if self.fails.is_none_or(|b| fails > b) {
            self.fails = Some(fails);
            self.digits = digits.to_vec();
            self.assignment = a.to_vec();
        }
    }
}

pub(super) fn run(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    let class = grid_class(tester, grid)?;
    let setup = Setup::new(tester, class)?;
    let p = setup.p;
    let nd = setup.digits();
    let nv = setup.var_block.len();
    let class_total = pow_u128(p, nd).map(|v| v - 1);
    let assign_total = pow_u128(p, nv * setup.ws_var);
    let (polys, assigns) = plan_counts(grid, class_total, assign_total, tester.size())?;

    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let sampled_polys: Vec<Vec<u32>> = match polys {
        Plan::All(_) => Vec::new(),
        Plan::Sample(c) => (0..c)
            .map(|_| loop {
                let d: Vec<u32> = (0..nd).map(|_| rng.gen_range(0..p)).collect();
                if d.iter().any(|&x| x != 0) {
                    break d;
                }
            })
            .collect(),
    };

    let mut best = Best { fails: None, digits: Vec::new(), assignment: Vec::new(), nonzero: 0 };
    let mut acc = Acc::new(&setup);
    let mut a_digits = vec![0u32; nv * setup.ws_var];
    let mut digits = vec![0u32; nd];
    for step in 0..assigns.count() {
        match assigns {
            Plan::All(_) => {
                if step > 0 {
                    bump(&mut a_digits, p);
                }
            }
            Plan::Sample(_) => a_digits.iter_mut().for_each(|x| *x = rng.gen_range(0..p)),
        }
        let a: Vec<Vec<u32>> = a_digits.chunks(setup.ws_var).map(|c| c.to_vec()).collect();
        let tables = setup.tables(&a)?;
        acc.clear();
        if polys.exhaustive() {
            digits.fill(0);
            loop {
                // One odometer step: every changed digit moves by +1 mod p, including wraps.
                let mut i = 0;
                while i < nd {
                    digits[i] += 1;
                    acc.add(&tables, i, p);
                    if digits[i] < p {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == nd {
                    break;
                }
                if let Some(f) = acc.failures(&setup) {
                    best.offer(f, &digits, &a);
                }
            }
        } else {
            for d in &sampled_polys {
                acc.clear();
                for (i, &x) in d.iter().enumerate() {
                    for _ in 0..x {
                        acc.add(&tables, i, p);
                    }
                }
                if let Some(f) = acc.failures(&setup) {
                    best.offer(f, d, &a);
                }
            }
        }
    }
    finish(&setup, grid, polys, assigns, best)
}

fn finish(setup: &Setup, grid: &Grid, polys: Plan, assigns: Plan, best: Best) -> Result<VerificationReport> {
    let tester = setup.tester;
    let size = tester.size();
    let worst = Rational::new(best.fails.unwrap_or(0).into(), size.into());
    let witness = match best.fails {
        None => None,
        Some(expected) => {
            let tw = setup.src.tower();
            let poly = MultiPoly::from_digits(tw, &setup.class, setup.ground, &setup.monos, &best.digits)?;
            let assignment = best.assignment.iter().map(|x| setup.src.from_flat(x)).collect::<Result<Vec<_>>>()?;
            let failing = failing_tuples(tester, &setup.class, &setup.var_block, &poly, &assignment)?;
            if failing.len() != expected {
                return Err(Error::InvalidArgument(format!(
                    "engine counted {expected} failing tuples but direct evaluation found {}",
                    failing.len()
                )));
            }
            Some(Witness { poly, assignment, failing })
        }
    };
    Ok(report(tester, grid, setup.class.clone(), worst, witness, polys, assigns, best.nonzero))
}

#[allow(clippy::too_many_arguments)]
fn report(
    tester: &Tester,
    grid: &Grid,
    class: PolyClass,
    worst: Rational,
    witness: Option<Witness>,
    polys: Plan,
    assigns: Plan,
    nonzero: u128,
) -> VerificationReport {
    let exact = polys.exhaustive() && assigns.exhaustive();
    let mut caveats = vec![format!(
        "n-limited: checked with n = {} variables per block; larger n is not certified",
        class.n
    )];
    if !exact {
        caveats.push(format!(
            "sampled: {} polynomials ({}), {} assignments ({}), seed {}",
            polys.count(),
            if polys.exhaustive() { "all" } else { "sampled" },
            assigns.count(),
            if assigns.exhaustive() { "all" } else { "sampled" },
            grid.seed
        ));
    }
    VerificationReport {
        verdict: worst <= *tester.epsilon(),
        worst_failure: worst,
        declared_epsilon: tester.epsilon().clone(),
        witness,
        class,
        polys_checked: polys.count(),
        assignments_checked: assigns.count(),
        nonzero_pairs: nonzero,
        map_evaluations: polys.count().saturating_mul(assigns.count()).saturating_mul(tester.size()),
        exact,
        seed: grid.seed,
        caveats,
    }
}

/// Tuples `i` with `f(l_i(a)) = 0`, through [`Tester::apply`].
fn failing_tuples(
    tester: &Tester,
    class: &PolyClass,
    var_block: &[usize],
    f: &MultiPoly,
    a: &[Value],
) -> Result<Vec<u128>> {
    let _ = class;
    let mut out = Vec::new();
    for i in 0..tester.size() {
        let img = a
            .iter()
            .zip(var_block)
            .map(|(x, &b)| tester.apply(i, b, x))
            .collect::<Result<Vec<_>>>()?;
        if value_is_zero(&eval_poly_in(tester.target(), f, &img)?) {
            out.push(i);
        }
    }
    Ok(out)
}

fn all_assignments(src: &Arith, nv: usize) -> Result<Vec<Vec<Value>>> {
    let w = src.var_width();
    let p = src.p();
    let mut digits = vec![0u32; nv * w];
    let mut out = Vec::new();
    loop {
        out.push(digits.chunks(w).map(|c| src.from_flat(c)).collect::<Result<Vec<_>>>()?);
        if !bump(&mut digits, p) {
            return Ok(out);
        }
    }
}

fn exact_totals(tester: &Tester, grid: &Grid, class: &PolyClass) -> Result<(u128, u128)> {
    let src = Arith::of(tester.source());
    let tw = src.tower();
    let nd = class_monomials(class).len() * tw.width(tester.ground_level());
    let nv = num_vars(class);
    let c = pow_u128(tw.p(), nd).map(|v| v - 1);
    let a = pow_u128(tw.p(), nv * src.var_width());
    let exact = Grid { exact: true, ..grid.clone() };
    match plan_counts(&exact, c, a, tester.size())? {
        (Plan::All(c), Plan::All(a)) => Ok((c, a)),
        _ => unreachable!("exact mode plans exhaustive enumerations"),
    }
}

pub(super) fn reference(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    let class = grid_class(tester, grid)?;
    let (ctotal, atotal) = exact_totals(tester, grid, &class)?;
    let src = Arith::of(tester.source());
    let var_block = var_blocks(tester, &class);
    let assignments = all_assignments(&src, var_block.len())?;
    let polys = enumerate_class_in(src.tower().clone(), tester.ground_level(), &class, u64::MAX, grid.seed)?;
    let mut best: Option<(usize, MultiPoly, Vec<Value>)> = None;
    let mut nonzero = 0u128;
    for f in polys {
        for a in &assignments {
            if value_is_zero(&eval_poly_in(tester.source(), &f, a)?) {
                continue;
            }
            nonzero += 1;
            let fails = failing_tuples(tester, &class, &var_block, &f, a)?.len();
            if best.as_ref().is_none_or(|b| fails > b.0) {
                best = Some((fails, f.clone(), a.clone()));
            }
        }
    }
    let worst = Rational::new(best.as_ref().map_or(0, |b| b.0).into(), tester.size().into());
    let witness = match best {
        Some((_, poly, assignment)) => {
            let failing = failing_tuples(tester, &class, &var_block, &poly, &assignment)?;
            Some(Witness { poly, assignment, failing })
        }
        None => None,
    };
    Ok(report(tester, grid, class, worst, witness, Plan::All(ctotal), Plan::All(atotal), nonzero))
}

pub(super) fn univariate(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    let Node::Evaluation { points, infinity, lifted, .. } = &tester.node else {
        return Err(Error::InvalidArgument("root counting applies to evaluation testers only".into()));
    };
    let class = grid_class(tester, grid)?;
    if class.family == Family::HLF && tester.blocks() > 1 {
        return Err(Error::InvalidArgument("root counting needs a single block".into()));
    }
    let (ctotal, atotal) = exact_totals(tester, grid, &class)?;
    let target = tester.target().field().clone();
    let tw = target.tower.clone();
    let len = match tester.source() {
        Domain::Poly { len, .. } => *len,
        Domain::Field(f) => f.tower.relative_degree(f.level, target.level),
    };
    let top = class.d * (len - 1);
    let slice = Domain::Poly { coeff: target.clone(), len };
    let ring = PolyRing::new(&tw, target.level);
    let pts = (0..*points).map(|i| tw.from_index(target.level, i)).collect::<Result<Vec<_>>>()?;
    let src = Arith::of(tester.source());
    let nv = num_vars(&class);
    let polys: Vec<MultiPoly> =
        enumerate_class_in(src.tower().clone(), tester.ground_level(), &class, u64::MAX, grid.seed)?.collect();
    let mut best: Option<(usize, usize, Vec<Value>)> = None;
    let mut nonzero = 0u128;
    for a in all_assignments(&src, nv)? {
        let lifted_a = a
            .iter()
            .map(|x| match x {
                Value::Elem(e) if *lifted => Ok(Value::Poly(tester.source().tower().element_to_unipoly(e)?)),
                other => Ok(other.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        for (fi, f) in polys.iter().enumerate() {
            if value_is_zero(&eval_poly_in(tester.source(), f, &a)?) {
                continue;
            }
            nonzero += 1;
            let big_f = eval_poly_in(&slice, f, &lifted_a)?;
            let big_f = big_f.as_poly()?;
            let mut fails = 0;
            for b in &pts {
                if ring.eval(big_f, b)?.is_zero() {
                    fails += 1;
                }
            }
            if *infinity && big_f.coeff(&tw, top).is_zero() {
                fails += 1;
            }
            if best.as_ref().is_none_or(|b| fails > b.0) {
                best = Some((fails, fi, a.clone()));
            }
        }
    }
    let worst = Rational::new(best.as_ref().map_or(0, |b| b.0).into(), tester.size().into());
    let var_block = var_blocks(tester, &class);
    let witness = match best {
        Some((_, fi, assignment)) => {
            let poly = polys[fi].clone();
            let failing = failing_tuples(tester, &class, &var_block, &poly, &assignment)?;
            Some(Witness { poly, assignment, failing })
        }
        None => None,
    };
    Ok(report(tester, grid, class, worst, witness, Plan::All(ctotal), Plan::All(atotal), nonzero))
}
