//! Exact arithmetic in towers of finite fields F_p ⊂ F_{p^{e_1}} ⊂ F_{p^{e_1 e_2}} ⊂ ….
//!
//! Level 0 is the prime field. Level `L > 0` is `F_{L-1}[X]/(f_L)` for a monic irreducible
//! `f_L` of degree `e_L` over level `L-1`. An element of level `L` is stored as a flat
//! coefficient vector over F_p of length `e_1·…·e_L`, nested by level: chunk `j` (as wide as
//! a level `L-1` element) is the coefficient of the level-`L` generator raised to `j`.
//! Coefficients are stored in ascending order.
//!
//! The canonical index of an element is `Σ c_i p^i` over the flat vector. The canonical
//! element order is numeric order on that index, so `0 < 1 < α < α+1` in F_4.

mod poly;

pub use poly::{PolyRing, UniPoly};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An element of one level of a [`FieldTower`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    level: usize,
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Flat coefficient vector over the prime field, lowest index first.
    pub fn flat(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    degree: usize,
    width: usize,
    cardinality: u128,
    modulus: Option<UniPoly>,
}

/// A prime field plus a chain of explicit extensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTower {
    p: u32,
    levels: Vec<Level>,
}

/// A shared handle on one level of a tower.
#[derive(Clone, Debug)]
pub struct Field {
    pub tower: Arc<FieldTower>,
    pub level: usize,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && same_prefix(&self.tower, &other.tower, self.level)
    }
}

impl Field {
    pub fn new(tower: Arc<FieldTower>, level: usize) -> Result<Self> {
        if level >= tower.num_levels() {
            return Err(Error::level_mismatch(format!("level < {}", tower.num_levels()), level));
        }
        Ok(Field { tower, level })
    }

    pub fn cardinality(&self) -> u128 {
        self.tower.cardinality(self.level)
    }
}

/// True when both towers agree on the prime and on every modulus up to `level`.
pub fn same_prefix(a: &FieldTower, b: &FieldTower, level: usize) -> bool {
    a.p == b.p
        && a.levels.len() > level
        && b.levels.len() > level
        && a.levels[..=level] == b.levels[..=level]
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^e` with `p` prime, or returns `None`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut e = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

pub(crate) fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldTower {
    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldTower {
            p: p as u32,
            levels: vec![Level { degree: 1, width: 1, cardinality: p as u128, modulus: None }],
        })
    }

    /// Adds a level of degree `k` over the current top level. Without an explicit modulus the
    /// least monic irreducible in canonical polynomial order is used.
    pub fn extend(&self, k: usize, modulus: Option<&UniPoly>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidModulus("extension degree must be positive".into()));
        }
        let top = self.top_level();
        let ring = PolyRing::new(self, top);
        let modulus = match modulus {
            Some(m) => {
                if m.level() != top {
                    return Err(Error::level_mismatch(top, m.level()));
                }
                if m.degree() != Some(k) || !ring.is_monic(m) {
                    return Err(Error::InvalidModulus(format!("expected monic of degree {k}")));
                }
                if !ring.is_irreducible(m) {
                    return Err(Error::NotIrreducible);
                }
                m.clone()
            }
            None => self.least_irreducible(k)?,
        };
        let below = &self.levels[top];
        let width = below.width * k;
        let cardinality = below
            .cardinality
            .checked_pow(k as u32)
            .ok_or_else(|| Error::Overflow("field cardinality exceeds 128 bits".into()))?;
        let mut levels = self.levels.clone();
        levels.push(Level { degree: k, width, cardinality, modulus: Some(modulus) });
        Ok(FieldTower { p: self.p, levels })
    }

    fn least_irreducible(&self, k: usize) -> Result<UniPoly> {
        let top = self.top_level();
        let ring = PolyRing::new(self, top);
        let q = self.cardinality(top);
        let count = q
            .checked_pow(k as u32)
            .ok_or_else(|| Error::Overflow("modulus search space exceeds 128 bits".into()))?;
        for m in 0..count {
            let mut coeffs = Vec::with_capacity(k + 1);
            let mut rest = m;
            for _ in 0..k {
                coeffs.push(self.from_index(top, rest % q)?);
                rest /= q;
            }
            coeffs.push(self.one(top));
            let f = ring.from_coeffs(coeffs)?;
            if ring.is_irreducible(&f) {
                return Ok(f);
            }
        }
        Err(Error::Exhausted(format!("no irreducible of degree {k}")))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Degree of `level` over the level below (1 for the prime field).
    pub fn degree(&self, level: usize) -> usize {
        self.levels[level].degree
    }

    /// Degree of `level` over `lower`.
    pub fn relative_degree(&self, level: usize, lower: usize) -> usize {
        self.levels[level].width / self.levels[lower].width
    }

    pub fn width(&self, level: usize) -> usize {
        self.levels[level].width
    }

    pub fn cardinality(&self, level: usize) -> u128 {
        self.levels[level].cardinality
    }

    pub fn modulus(&self, level: usize) -> Option<&UniPoly> {
        self.levels[level].modulus.as_ref()
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level < self.levels.len() {
            Ok(())
        } else {
            Err(Error::level_mismatch(format!("level < {}", self.levels.len()), level))
        }
    }

    pub fn check(&self, e: &FieldElement) -> Result<()> {
        self.check_level(e.level)?;
        if e.coeffs.len() != self.width(e.level) || e.coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::level_mismatch(
                format!("element of level {}", e.level),
                format!("{} coefficients", e.coeffs.len()),
            ));
        }
        Ok(())
    }

    fn check_pair(&self, a: &FieldElement, b: &FieldElement) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a.level != b.level {
            return Err(Error::level_mismatch(a.level, b.level));
        }
        Ok(())
    }

    pub fn zero(&self, level: usize) -> FieldElement {
        FieldElement { level, coeffs: vec![0; self.width(level)] }
    }

    pub fn one(&self, level: usize) -> FieldElement {
        let mut coeffs = vec![0; self.width(level)];
        coeffs[0] = 1;
        FieldElement { level, coeffs }
    }

    /// The generator α of `level` over the level below.
    pub fn generator(&self, level: usize) -> Result<FieldElement> {
        if level == 0 {
            return Err(Error::level_mismatch("level >= 1", 0));
        }
        if self.degree(level) == 1 {
            // Degree-one level: the generator is the root of X + c, i.e. -c.
            let c = &self.modulus(level).expect("extension level").coeffs()[0];
            return self.embed(&self.neg(c)?, level);
        }
        let mut coeffs = vec![0; self.width(level)];
        coeffs[self.width(level - 1)] = 1;
        Ok(FieldElement { level, coeffs })
    }

    pub fn from_flat(&self, level: usize, coeffs: Vec<u32>) -> Result<FieldElement> {
        let e = FieldElement { level, coeffs };
        self.check(&e)?;
        Ok(e)
    }

    /// The element with canonical index `index`.
    pub fn from_index(&self, level: usize, index: u128) -> Result<FieldElement> {
        self.check_level(level)?;
        if index >= self.cardinality(level) {
            return Err(Error::out_of_range(index, self.cardinality(level)));
        }
        let p = self.p as u128;
        let mut rest = index;
        let coeffs = (0..self.width(level))
            .map(|_| {
                let c = (rest % p) as u32;
                rest /= p;
                c
            })
            .collect();
        Ok(FieldElement { level, coeffs })
    }

    pub fn index_of(&self, e: &FieldElement) -> u128 {
        let p = self.p as u128;
        e.coeffs.iter().rev().fold(0u128, |acc, &c| acc * p + c as u128)
    }

    /// Coefficients of `e` over the level below.
    pub fn coefficients(&self, e: &FieldElement) -> Result<Vec<FieldElement>> {
        self.check(e)?;
        if e.level == 0 {
            return Err(Error::level_mismatch("level >= 1", 0));
        }
        let w = self.width(e.level - 1);
        Ok(e.coeffs
            .chunks(w)
            .map(|c| FieldElement { level: e.level - 1, coeffs: c.to_vec() })
            .collect())
    }

    pub fn from_coefficients(&self, level: usize, coeffs: &[FieldElement]) -> Result<FieldElement> {
        self.check_level(level)?;
        if level == 0 || coeffs.len() != self.degree(level) {
            return Err(Error::level_mismatch(
                format!("{} coefficients", self.degree(level)),
                coeffs.len(),
            ));
        }
        let mut flat = Vec::with_capacity(self.width(level));
        for c in coeffs {
            self.check(c)?;
            if c.level != level - 1 {
                return Err(Error::level_mismatch(level - 1, c.level));
            }
            flat.extend_from_slice(&c.coeffs);
        }
        Ok(FieldElement { level, coeffs: flat })
    }

    /// Coordinates of `e` over the subfield `ground`, as canonical indices of ground elements.
    pub fn ground_coords(&self, e: &FieldElement, ground: usize) -> Vec<u128> {
        let p = self.p as u128;
        e.coeffs
            .chunks(self.width(ground))
            .map(|c| c.iter().rev().fold(0u128, |acc, &x| acc * p + x as u128))
            .collect()
    }

    /// Views `e` as an element of a higher level.
    pub fn embed(&self, e: &FieldElement, level: usize) -> Result<FieldElement> {
        self.check(e)?;
        self.check_level(level)?;
        if level < e.level {
            return Err(Error::level_mismatch(format!("level >= {}", e.level), level));
        }
        let mut coeffs = e.coeffs.clone();
        coeffs.resize(self.width(level), 0);
        Ok(FieldElement { level, coeffs })
    }

    /// Views `e` as an element of the lower level `level`, if it lies there.
    pub fn restrict(&self, e: &FieldElement, level: usize) -> Option<FieldElement> {
        if level > e.level {
            return None;
        }
        let w = self.width(level);
        if e.coeffs[w..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(FieldElement { level, coeffs: e.coeffs[..w].to_vec() })
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check_pair(a, b)?;
        let mut coeffs = a.coeffs.clone();
        self.add_assign(&mut coeffs, &b.coeffs);
        Ok(FieldElement { level: a.level, coeffs })
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check_pair(a, b)?;
        let mut coeffs = a.coeffs.clone();
        self.sub_assign(&mut coeffs, &b.coeffs);
        Ok(FieldElement { level: a.level, coeffs })
    }

    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        let p = self.p;
        let coeffs = a.coeffs.iter().map(|&c| if c == 0 { 0 } else { p - c }).collect();
        Ok(FieldElement { level: a.level, coeffs })
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check_pair(a, b)?;
        Ok(FieldElement { level: a.level, coeffs: self.mul_flat(a.level, &a.coeffs, &b.coeffs) })
    }

    pub fn pow(&self, a: &FieldElement, mut exp: u128) -> Result<FieldElement> {
        self.check(a)?;
        let mut base = a.coeffs.clone();
        let mut acc = self.one(a.level).coeffs;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_flat(a.level, &acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul_flat(a.level, &base, &base);
            }
        }
        Ok(FieldElement { level: a.level, coeffs: acc })
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.pow(a, self.cardinality(a.level) - 2)
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.mul(a, &self.inv(b)?)
    }

    /// `e^(q^j)` where `q` is the cardinality of the level below `e`'s level. On the prime
    /// field this is the identity.
    pub fn frobenius(&self, e: &FieldElement, j: usize) -> Result<FieldElement> {
        self.check(e)?;
        if e.level == 0 {
            return Ok(e.clone());
        }
        let q = self.cardinality(e.level - 1);
        let mut out = e.clone();
        for _ in 0..j % self.degree(e.level) {
            out = self.pow(&out, q)?;
        }
        Ok(out)
    }

    /// The lift `l_X`: `ω₀+ω₁α+⋯` ↦ `ω₀+ω₁X+⋯` over the level below.
    pub fn element_to_unipoly(&self, e: &FieldElement) -> Result<UniPoly> {
        let coeffs = self.coefficients(e)?;
        PolyRing::new(self, e.level - 1).from_coeffs(coeffs)
    }

    /// Substitutes the generator of `level` for X in `z`, reducing by the modulus.
    pub fn unipoly_to_element(&self, z: &UniPoly, level: usize) -> Result<FieldElement> {
        self.check_level(level)?;
        if level == 0 || z.level() != level - 1 {
            return Err(Error::level_mismatch(level.saturating_sub(1), z.level()));
        }
        let ring = PolyRing::new(self, level - 1);
        let modulus = self.modulus(level).expect("extension level");
        let r = ring.rem(z, modulus)?;
        let mut coeffs = r.coeffs().to_vec();
        coeffs.resize(self.degree(level), self.zero(level - 1));
        self.from_coefficients(level, &coeffs)
    }

    /// The first element in canonical order whose conjugates over the level below form a basis.
    pub fn normal_basis_generator(&self, level: usize) -> Result<FieldElement> {
        self.check_level(level)?;
        if level == 0 {
            return Err(Error::level_mismatch("level >= 1", 0));
        }
        let t = self.degree(level);
        for idx in 1..self.cardinality(level) {
            let a = self.from_index(level, idx)?;
            let mut rows = Vec::with_capacity(t);
            let mut c = a.clone();
            for _ in 0..t {
                rows.push(self.coefficients(&c)?);
                c = self.frobenius(&c, 1)?;
            }
            if self.rank(rows)? == t {
                return Ok(a);
            }
        }
        Err(Error::Exhausted("no normal basis generator".into()))
    }

    /// Rank of a matrix over one level, by Gaussian elimination.
    pub fn rank(&self, mut rows: Vec<Vec<FieldElement>>) -> Result<usize> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = self.inv(&rows[rank][col])?;
            for r in 0..rows.len() {
                if r == rank || rows[r][col].is_zero() {
                    continue;
                }
                let factor = self.mul(&rows[r][col], &inv)?;
                for c in col..cols {
                    let t = self.mul(&factor, &rows[rank][c])?;
                    rows[r][c] = self.sub(&rows[r][c], &t)?;
                }
            }
            rank += 1;
        }
        Ok(rank)
    }

    /// Text form `p=3;deg=2:1,0,1;…`; modulus coefficients low-to-high as canonical indices.
    pub fn signature(&self) -> String {
        let mut s = format!("p={}", self.p);
        for level in 1..self.levels.len() {
            let m = self.modulus(level).expect("extension level");
            let cs: Vec<String> =
                m.coeffs().iter().map(|c| self.index_of(c).to_string()).collect();
            s.push_str(&format!(";deg={}:{}", self.degree(level), cs.join(",")));
        }
        s
    }

    pub fn from_signature(sig: &str) -> Result<Self> {
        let bad = |offset: usize, reason: &str| Error::MalformedInput { offset, reason: reason.into() };
        let mut parts = sig.split(';');
        let head = parts.next().unwrap_or("");
        let p: u64 = head
            .strip_prefix("p=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(0, "expected p=<prime>"))?;
        let mut tower = FieldTower::prime_field(p)?;
        let mut offset = head.len() + 1;
        for part in parts {
            let rest = part.strip_prefix("deg=").ok_or_else(|| bad(offset, "expected deg="))?;
            let (deg, coeffs) =
                rest.split_once(':').ok_or_else(|| bad(offset, "expected deg=<k>:<coeffs>"))?;
            let k: usize = deg.trim().parse().map_err(|_| bad(offset, "bad degree"))?;
            let top = tower.top_level();
            let mut cs = Vec::new();
            for c in coeffs.split(',') {
                let idx: u128 = c.trim().parse().map_err(|_| bad(offset, "bad coefficient"))?;
                cs.push(tower.from_index(top, idx).map_err(|_| bad(offset, "coefficient out of range"))?);
            }
            let m = PolyRing::new(&tower, top).from_coeffs(cs)?;
            tower = tower.extend(k, Some(&m))?;
            offset += part.len() + 1;
        }
        Ok(tower)
    }

    // Flat arithmetic shared by the element and polynomial layers.

    pub(crate) fn add_assign(&self, dst: &mut [u32], src: &[u32]) {
        let p = self.p;
        for (d, &s) in dst.iter_mut().zip(src) {
            let v = *d as u64 + s as u64;
            *d = if v >= p as u64 { (v - p as u64) as u32 } else { v as u32 };
        }
    }

    pub(crate) fn sub_assign(&self, dst: &mut [u32], src: &[u32]) {
        let p = self.p;
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = if *d >= s { *d - s } else { (*d as u64 + p as u64 - s as u64) as u32 };
        }
    }

    pub(crate) fn mul_flat(&self, level: usize, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        if level == 0 {
            return vec![(a[0] as u64 * b[0] as u64 % p) as u32];
        }
        let k = self.levels[level].degree;
        let modulus = self.levels[level].modulus.as_ref().expect("extension level");
        if level == 1 {
            let mut prod = vec![0u64; 2 * k - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
                }
            }
            for m in (k..2 * k - 1).rev() {
                let c = prod[m];
                if c == 0 {
                    continue;
                }
                for (j, mj) in modulus.coeffs()[..k].iter().enumerate() {
                    let s = c * mj.coeffs[0] as u64 % p;
                    prod[m - k + j] = (prod[m - k + j] + p - s) % p;
                }
            }
            return prod[..k].iter().map(|&v| v as u32).collect();
        }
        let w = self.levels[level - 1].width;
        let mut prod = vec![0u32; (2 * k - 1) * w];
        for i in 0..k {
            let ai = &a[i * w..(i + 1) * w];
            if ai.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..k {
                let bj = &b[j * w..(j + 1) * w];
                if bj.iter().all(|&c| c == 0) {
                    continue;
                }
                let m = self.mul_flat(level - 1, ai, bj);
                self.add_assign(&mut prod[(i + j) * w..(i + j + 1) * w], &m);
            }
        }
        for m in (k..2 * k - 1).rev() {
            let c = prod[m * w..(m + 1) * w].to_vec();
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for (j, mj) in modulus.coeffs()[..k].iter().enumerate() {
                if mj.is_zero() {
                    continue;
                }
                let t = self.mul_flat(level - 1, &c, &mj.coeffs);
                self.sub_assign(&mut prod[(m - k + j) * w..(m - k + j + 1) * w], &t);
            }
        }
        prod.truncate(k * w);
        prod
    }
}
