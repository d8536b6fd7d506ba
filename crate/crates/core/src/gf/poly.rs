//! Univariate polynomials over one level of a tower.

use std::fmt;

use super::{prime_factors, FieldElement, FieldTower};
use crate::error::{Error, Result};

/// A polynomial with coefficients in one tower level, stored low-to-high without trailing
/// zeros. The zero polynomial has no coefficients and degree `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    level: usize,
    coeffs: Vec<FieldElement>,
}

impl UniPoly {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `X^j` (zero past the degree).
    pub fn coeff(&self, tower: &FieldTower, j: usize) -> FieldElement {
        self.coeffs.get(j).cloned().unwrap_or_else(|| tower.zero(self.level))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Polynomial arithmetic over `tower` level `level`.
#[derive(Clone, Copy)]
pub struct PolyRing<'a> {
    tower: &'a FieldTower,
    level: usize,
}

impl<'a> PolyRing<'a> {
    pub fn new(tower: &'a FieldTower, level: usize) -> Self {
        PolyRing { tower, level }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn zero(&self) -> UniPoly {
        UniPoly { level: self.level, coeffs: Vec::new() }
    }

    pub fn one(&self) -> UniPoly {
        UniPoly { level: self.level, coeffs: vec![self.tower.one(self.level)] }
    }

    pub fn x(&self) -> UniPoly {
        UniPoly {
            level: self.level,
            coeffs: vec![self.tower.zero(self.level), self.tower.one(self.level)],
        }
    }

    pub fn constant(&self, c: FieldElement) -> Result<UniPoly> {
        self.from_coeffs(vec![c])
    }

    pub fn from_coeffs(&self, mut coeffs: Vec<FieldElement>) -> Result<UniPoly> {
        for c in &coeffs {
            self.tower.check(c)?;
            if c.level() != self.level {
                return Err(Error::level_mismatch(self.level, c.level()));
            }
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(UniPoly { level: self.level, coeffs })
    }

    /// Builds a polynomial from canonical element indices, low-to-high.
    pub fn from_indices(&self, idx: &[u128]) -> Result<UniPoly> {
        let coeffs = idx
            .iter()
            .map(|&i| self.tower.from_index(self.level, i))
            .collect::<Result<Vec<_>>>()?;
        self.from_coeffs(coeffs)
    }

    pub fn to_indices(&self, f: &UniPoly) -> Vec<u128> {
        f.coeffs.iter().map(|c| self.tower.index_of(c)).collect()
    }

    fn check(&self, f: &UniPoly) -> Result<()> {
        if f.level != self.level {
            return Err(Error::level_mismatch(self.level, f.level));
        }
        Ok(())
    }

    pub fn is_monic(&self, f: &UniPoly) -> bool {
        f.coeffs.last().is_some_and(|c| *c == self.tower.one(self.level))
    }

    pub fn add(&self, a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
        self.check(a)?;
        self.check(b)?;
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(self.tower.add(&a.coeff(self.tower, j), &b.coeff(self.tower, j))?);
        }
        self.from_coeffs(out)
    }

    pub fn sub(&self, a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
        self.check(a)?;
        self.check(b)?;
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(self.tower.sub(&a.coeff(self.tower, j), &b.coeff(self.tower, j))?);
        }
        self.from_coeffs(out)
    }

    pub fn scale(&self, a: &UniPoly, c: &FieldElement) -> Result<UniPoly> {
        self.check(a)?;
        let coeffs = a.coeffs.iter().map(|x| self.tower.mul(x, c)).collect::<Result<Vec<_>>>()?;
        self.from_coeffs(coeffs)
    }

    pub fn mul(&self, a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
        self.check(a)?;
        self.check(b)?;
        if a.is_zero() || b.is_zero() {
            return Ok(self.zero());
        }
        let mut out = vec![self.tower.zero(self.level); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let t = self.tower.mul(x, y)?;
                out[i + j] = self.tower.add(&out[i + j], &t)?;
            }
        }
        self.from_coeffs(out)
    }

    pub fn divrem(&self, a: &UniPoly, b: &UniPoly) -> Result<(UniPoly, UniPoly)> {
        self.check(a)?;
        self.check(b)?;
        let Some(db) = b.degree() else {
            return Err(Error::DivisionByZero);
        };
        let lead_inv = self.tower.inv(&b.coeffs[db])?;
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((self.zero(), self.from_coeffs(rem)?));
        }
        let mut quot = vec![self.tower.zero(self.level); rem.len() - db];
        for m in (db..rem.len()).rev() {
            if rem[m].is_zero() {
                continue;
            }
            let c = self.tower.mul(&rem[m], &lead_inv)?;
            for (j, bj) in b.coeffs.iter().enumerate() {
                let t = self.tower.mul(&c, bj)?;
                rem[m - db + j] = self.tower.sub(&rem[m - db + j], &t)?;
            }
            quot[m - db] = c;
        }
        rem.truncate(db);
        Ok((self.from_coeffs(quot)?, self.from_coeffs(rem)?))
    }

    pub fn rem(&self, a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
        Ok(self.divrem(a, b)?.1)
    }

    pub fn monic(&self, f: &UniPoly) -> Result<UniPoly> {
        match f.coeffs.last() {
            None => Ok(f.clone()),
            Some(lead) => self.scale(f, &self.tower.inv(lead)?),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, a: &UniPoly, b: &UniPoly) -> Result<UniPoly> {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = self.rem(&x, &y)?;
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// `base^exp mod m`.
    pub fn powmod(&self, base: &UniPoly, mut exp: u128, m: &UniPoly) -> Result<UniPoly> {
        let mut b = self.rem(base, m)?;
        let mut acc = self.rem(&self.one(), m)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.rem(&self.mul(&acc, &b)?, m)?;
            }
            exp >>= 1;
            if exp > 0 {
                b = self.rem(&self.mul(&b, &b)?, m)?;
            }
        }
        Ok(acc)
    }

    /// Evaluates `z` at `x`, where `x` lies at this ring's level or above.
    pub fn eval(&self, z: &UniPoly, x: &FieldElement) -> Result<FieldElement> {
        self.check(z)?;
        let level = x.level();
        if level < self.level {
            return Err(Error::level_mismatch(format!("level >= {}", self.level), level));
        }
        let mut acc = self.tower.zero(level);
        for c in z.coeffs.iter().rev() {
            acc = self.tower.mul(&acc, x)?;
            acc = self.tower.add(&acc, &self.tower.embed(c, level)?)?;
        }
        Ok(acc)
    }

    /// Distinct-power test: `f | X^{Q^k} - X` and `gcd(f, X^{Q^{k/r}} - X) = 1` for every
    /// prime `r | k`, where `Q` is the cardinality of this level.
    pub fn is_irreducible(&self, f: &UniPoly) -> bool {
        self.is_irreducible_inner(f).unwrap_or(false)
    }

    fn is_irreducible_inner(&self, f: &UniPoly) -> Result<bool> {
        let k = match f.degree() {
            None | Some(0) => return Ok(false),
            Some(1) => return Ok(true),
            Some(k) => k,
        };
        let f = self.monic(f)?;
        let q = self.tower.cardinality(self.level);
        let x = self.x();
        let mut powers = vec![x.clone()];
        for i in 1..=k {
            let next = self.powmod(&powers[i - 1], q, &f)?;
            powers.push(next);
        }
        if powers[k] != x {
            return Ok(false);
        }
        for r in prime_factors(k) {
            let h = self.sub(&powers[k / r], &x)?;
            if self.gcd(&f, &h)?.degree() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
