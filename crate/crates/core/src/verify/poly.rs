//! Sparse multivariate polynomials over the ground level and their evaluation.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldTower, PolyRing};
use crate::irreducibles::base_field;
use crate::tester::{Domain, Family, PolyClass, Value};

/// A polynomial in `n` variables (`n·d` for HLF, block `b` holding variables `b·n..(b+1)·n`)
/// with coefficients in one level of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    pub class: PolyClass,
    pub level: usize,
    /// Exponent vector and nonzero coefficient, ordered as [`class_monomials`].
    pub terms: Vec<(Vec<u32>, FieldElement)>,
}

impl MultiPoly {
    pub fn num_vars(&self) -> usize {
        num_vars(&self.class)
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Builds a polynomial from per-monomial coefficient digits (`width` prime-field digits
    /// per monomial of `monomials`).
    pub(crate) fn from_digits(
        tower: &FieldTower,
        class: &PolyClass,
        level: usize,
        monomials: &[Vec<u32>],
        digits: &[u32],
    ) -> Result<Self> {
        let w = tower.width(level);
        let mut terms = Vec::new();
        for (m, mono) in monomials.iter().enumerate() {
            let c = &digits[m * w..(m + 1) * w];
            if c.iter().any(|&x| x != 0) {
                terms.push((mono.clone(), tower.from_flat(level, c.to_vec())?));
            }
        }
        Ok(MultiPoly { class: class.clone(), level, terms })
    }

    pub fn to_json(&self) -> Json {
        let terms: Vec<Json> = self
            .terms
            .iter()
            .map(|(e, c)| json!({"exponents": e, "coeff": c.flat()}))
            .collect();
        json!({"class": self.class.to_string(), "level": self.level, "terms": terms, "text": self.to_string()})
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(j, &k)| if k == 1 { format!("x{j}") } else { format!("x{j}^{k}") })
                    .collect();
                let one = c.flat()[0] == 1 && c.flat()[1..].iter().all(|&x| x == 0);
                let coeff = if c.flat().len() == 1 { c.flat()[0].to_string() } else { c.to_string() };
                match (vars.is_empty(), one) {
                    (true, _) => coeff,
                    (false, true) => vars.join("*"),
                    (false, false) => format!("{coeff}*{}", vars.join("*")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub(crate) fn num_vars(class: &PolyClass) -> usize {
    match class.family {
        Family::HLF => class.n * class.d,
        _ => class.n,
    }
}

/// The monomial basis of a class as exponent vectors: by total degree, then lexicographic.
pub fn class_monomials(class: &PolyClass) -> Vec<Vec<u32>> {
    let nv = num_vars(class);
    let d = class.d as u32;
    let mut out = Vec::new();
    match class.family {
        Family::HLF => {
            let n = class.n;
            let mut choice = vec![0usize; class.d];
            loop {
                let mut e = vec![0u32; nv];
                for (b, &c) in choice.iter().enumerate() {
                    e[b * n + c] = 1;
                }
                out.push(e);
                let mut b = class.d;
                loop {
                    if b == 0 {
                        out.sort();
                        return out;
                    }
                    b -= 1;
                    choice[b] += 1;
                    if choice[b] < n {
                        break;
                    }
                    choice[b] = 0;
                }
            }
        }
        Family::P | Family::HP => {
            let cap = class.variable_degree_cap.map_or(d, |c| c as u32);
            let mut e = vec![0u32; nv];
            fn rec(j: usize, left: u32, cap: u32, e: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if j == e.len() {
                    out.push(e.clone());
                    return;
                }
                for k in 0..=left.min(cap) {
                    e[j] = k;
                    rec(j + 1, left - k, cap, e, out);
                }
                e[j] = 0;
            }
            rec(0, d, cap, &mut e, &mut out);
            if class.family == Family::HP {
                out.retain(|e| e.iter().sum::<u32>() == d);
            }
            out.sort_by(|a, b| a.iter().sum::<u32>().cmp(&b.iter().sum::<u32>()).then_with(|| a.cmp(b)));
            out
        }
    }
}

/// All nonzero members of a class over `F_q` when there are at most `cap` of them, else
/// `cap` seeded uniform samples.
pub struct ClassEnumeration {
    tower: Arc<FieldTower>,
    ground: usize,
    class: PolyClass,
    monomials: Vec<Vec<u32>>,
    /// Number of nonzero members, if it fits in 128 bits.
    pub total: Option<u128>,
    pub exhaustive: bool,
    pub seed: u64,
    digits: Vec<u32>,
    remaining: u128,
    rng: ChaCha8Rng,
}

impl ClassEnumeration {
    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn ground(&self) -> usize {
        self.ground
    }
}

impl Iterator for ClassEnumeration {
    type Item = MultiPoly;

    fn next(&mut self) -> Option<MultiPoly> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let p = self.tower.p();
        if self.exhaustive {
            for x in self.digits.iter_mut() {
                *x += 1;
                if *x < p {
                    break;
                }
                *x = 0;
            }
        } else {
            loop {
                for x in self.digits.iter_mut() {
                    *x = self.rng.gen_range(0..p);
                }
                if self.digits.iter().any(|&x| x != 0) {
                    break;
                }
            }
        }
        MultiPoly::from_digits(&self.tower, &self.class, self.ground, &self.monomials, &self.digits).ok()
    }
}

/// Nonzero members of `class` over `F_q`; exhaustive when there are at most `cap`.
pub fn enumerate_class(q: u64, class: &PolyClass, cap: u64, seed: u64) -> Result<ClassEnumeration> {
    let (tower, ground) = base_field(q)?;
    enumerate_class_in(Arc::new(tower), ground, class, cap, seed)
}

pub(crate) fn enumerate_class_in(
    tower: Arc<FieldTower>,
    ground: usize,
    class: &PolyClass,
    cap: u64,
    seed: u64,
) -> Result<ClassEnumeration> {
    let monomials = class_monomials(class);
    let digits = monomials.len() * tower.width(ground);
    let total = u32::try_from(digits)
        .ok()
        .and_then(|dg| (tower.p() as u128).checked_pow(dg))
        .map(|v| v - 1);
    let exhaustive = total.is_some_and(|t| t <= cap as u128);
    Ok(ClassEnumeration {
        remaining: if exhaustive { total.unwrap_or(0) } else { cap as u128 },
        total,
        exhaustive,
        seed,
        digits: vec![0; digits],
        rng: ChaCha8Rng::seed_from_u64(seed),
        tower,
        ground,
        class: class.clone(),
        monomials,
    })
}

/// `f(a)` for field elements `a` of one level at or above the coefficient level.
pub fn eval_poly(tower: &FieldTower, f: &MultiPoly, a: &[FieldElement]) -> Result<FieldElement> {
    if a.len() != f.num_vars() {
        return Err(Error::level_mismatch(format!("{} variables", f.num_vars()), a.len()));
    }
    let level = a.first().map_or(f.level, |x| x.level());
    if level < f.level || a.iter().any(|x| x.level() != level) {
        return Err(Error::level_mismatch(format!("level >= {} for every variable", f.level), level));
    }
    let mut acc = tower.zero(level);
    for (e, c) in &f.terms {
        let mut term = tower.embed(c, level)?;
        for (x, &k) in a.iter().zip(e) {
            if k > 0 {
                term = tower.mul(&term, &tower.pow(x, k as u128)?)?;
            }
        }
        acc = tower.add(&acc, &term)?;
    }
    Ok(acc)
}

/// `f(a)` for values of a tester domain: field elements, or polynomials over a level
/// multiplied as polynomials.
pub fn eval_poly_in(domain: &Domain, f: &MultiPoly, a: &[Value]) -> Result<Value> {
    match domain {
        Domain::Field(field) => {
            let xs = a.iter().map(|v| v.as_elem().cloned()).collect::<Result<Vec<_>>>()?;
            let tw = &field.tower;
            let xs = xs.iter().map(|x| tw.embed(x, x.level().max(f.level))).collect::<Result<Vec<_>>>()?;
            Ok(Value::Elem(eval_poly(tw, f, &xs)?))
        }
        Domain::Poly { coeff, .. } => {
            if a.len() != f.num_vars() {
                return Err(Error::level_mismatch(format!("{} variables", f.num_vars()), a.len()));
            }
            let tw = &coeff.tower;
            let ring = PolyRing::new(tw, coeff.level);
            let mut acc = ring.zero();
            for (e, c) in &f.terms {
                let mut term = ring.constant(tw.embed(c, coeff.level)?)?;
                for (x, &k) in a.iter().zip(e) {
                    for _ in 0..k {
                        term = ring.mul(&term, x.as_poly()?)?;
                    }
                }
                acc = ring.add(&acc, &term)?;
            }
            Ok(Value::Poly(acc))
        }
    }
}

pub(crate) fn value_is_zero(v: &Value) -> bool {
    match v {
        Value::Elem(e) => e.is_zero(),
        Value::Poly(z) => z.is_zero(),
    }
}
