//! Counting, batch construction and indexed access to monic irreducible polynomials over F_q.
//!
//! Indexed access goes through vectors of period `t`: if `α` generates a normal basis of
//! `F_{q^t}` over `F_q` and `λ ∈ F_q^t` has `t` distinct cyclic shifts, then
//! `β_λ = Σ λ_{i+1} α^{q^i}` has degree `t` and `∏ (X - β_λ^{q^i})` is irreducible.
//! Vectors are produced by a mixed-radix descent over vectors with a prefix of `k` zeros and
//! no other run of `k` zeros, so no enumeration is needed.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{prime_power, FieldElement, FieldTower, PolyRing, UniPoly};

/// Builds the tower for `F_q` (a prime field, or one extension of it) and returns it with the
/// level holding `F_q`.
pub fn base_field(q: u64) -> Result<(FieldTower, usize)> {
    let (p, e) = prime_power(q)
        .ok_or_else(|| Error::InvalidArgument(format!("{q} is not a prime power")))?;
    let tower = FieldTower::prime_field(p)?;
    if e == 1 {
        Ok((tower, 0))
    } else {
        Ok((tower.extend(e as usize, None)?, 1))
    }
}

pub fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

fn checked_pow(q: u64, e: usize) -> Result<u128> {
    (q as u128)
        .checked_pow(e as u32)
        .ok_or_else(|| Error::Overflow(format!("{q}^{e} exceeds 128 bits")))
}

/// `N_q(k)`, the number of monic irreducible polynomials of degree `k` over `F_q`.
pub fn count_irreducibles(q: u64, k: usize) -> Result<u128> {
    if q < 2 || k == 0 {
        return Err(Error::InvalidArgument("need q >= 2 and k >= 1".into()));
    }
    let mut total: i128 = 0;
    for r in 1..=k {
        if k % r == 0 {
            let term = checked_pow(q, r)? as i128;
            total += mobius((k / r) as u64) as i128 * term;
        }
    }
    Ok((total / k as i128) as u128)
}

/// `M(k, n)`: the number of length-`n` vectors over `F_q` with no `k` consecutive zeros.
pub fn count_no_zero_run(q: u64, k: usize, n: usize) -> Result<u128> {
    Ok(*no_zero_run_table(q, k, n)?.last().expect("non-empty table"))
}

/// `M(k, 0..=n)` by the recurrence `M(k,n) = q·M(k,n-1) - (q-1)·M(k,n-k-1)`.
fn no_zero_run_table(q: u64, k: usize, n: usize) -> Result<Vec<u128>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let q128 = q as u128;
    let overflow = || Error::Overflow("M(k,n) exceeds 128 bits".into());
    let mut m = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let v = if i < k {
            checked_pow(q, i)?
        } else if i == k {
            checked_pow(q, k)? - 1
        } else {
            q128.checked_mul(m[i - 1]).ok_or_else(overflow)? - (q128 - 1) * m[i - k - 1]
        };
        m.push(v);
    }
    Ok(m)
}

/// True iff the `t` cyclic shifts of `v` are pairwise distinct.
pub fn has_period_t(v: &[u32]) -> bool {
    let t = v.len();
    (1..t).all(|s| (0..t).any(|i| v[i] != v[(i + s) % t]))
}

fn is_orbit_minimum(v: &[u32]) -> bool {
    let t = v.len();
    (1..t).all(|s| {
        let rotated = (0..t).map(|i| v[(i + s) % t]);
        v.iter().copied().cmp(rotated) != std::cmp::Ordering::Greater
    })
}

/// A vector over `F_q` (entries are canonical element indices) with period equal to its length.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodVector {
    pub q: u64,
    pub entries: Vec<u32>,
}

impl PeriodVector {
    pub fn t(&self) -> usize {
        self.entries.len()
    }
}

/// `k = ⌈log_q t⌉ + 1`, the length of the zero prefix.
pub fn zero_prefix_len(q: u64, t: usize) -> usize {
    let mut e = 0;
    let mut power: u128 = 1;
    while power < t as u128 {
        power *= q as u128;
        e += 1;
    }
    e + 1
}

/// Number of valid indices for [`select_period_vector`]. When the suffix is shorter than the
/// prefix the all-zero suffix is excluded, since the resulting vector is all zeros.
pub fn select_range(q: u64, t: usize) -> Result<u128> {
    let k = zero_prefix_len(q, t);
    if t < k + 1 {
        return Err(Error::InvalidArgument(format!("t = {t} needs t >= k + 1 = {}", k + 1)));
    }
    let n = t - k;
    let m = count_no_zero_run(q, k, n)?;
    Ok(if n < k { m - 1 } else { m })
}

/// The `m`-th vector `(0^k, suffix)` in the recursive order, where the suffix has no `k`
/// consecutive zeros.
pub fn select_period_vector(q: u64, t: usize, m: u128) -> Result<PeriodVector> {
    let range = select_range(q, t)?;
    if m >= range {
        return Err(Error::out_of_range(m, range));
    }
    let k = zero_prefix_len(q, t);
    let table = no_zero_run_table(q, k, t - k)?;
    let mut entries = vec![0u32; k];
    select_suffix(q, k, t - k, m + 1, &table, &mut entries)?;
    Ok(PeriodVector { q, entries })
}

/// Appends the `r`-th (1-based) vector of length `n` with no `k` consecutive zeros.
/// Each step picks the zero run length `j₁ - 1`, then the nonzero symbol `α_{j₂}` by binary
/// search, then recurses on the rest. For `n < k` the all-zero vector comes last.
fn select_suffix(q: u64, k: usize, mut n: usize, mut r: u128, m: &[u128], out: &mut Vec<u32>) -> Result<()> {
    let q1 = (q - 1) as u128;
    'outer: while n > 0 {
        if n < k && r == m[n] {
            out.extend(std::iter::repeat(0).take(n));
            return Ok(());
        }
        let mut before = 0u128;
        for j1 in 1..=k.min(n) {
            let block = m[n - j1];
            let size = q1 * block;
            if r <= before + size {
                let r1 = r - before;
                let (mut lo, mut hi) = (1u128, q1);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if r1 <= mid * block {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                out.extend(std::iter::repeat(0).take(j1 - 1));
                out.push(lo as u32);
                r = r1 - (lo - 1) * block;
                n -= j1;
                continue 'outer;
            }
            before += size;
        }
        return Err(Error::out_of_range(r, before));
    }
    Ok(())
}

/// `⌊q^{t-2}/(2t)⌋` without building the family.
pub fn family_capacity(q: u64, t: usize) -> u128 {
    if t < 2 {
        return 0;
    }
    checked_pow(q, t - 2).map_or(u128::MAX, |v| v / (2 * t as u128))
}

/// One irreducible polynomial together with a root.
#[derive(Clone, Debug)]
pub struct IrreducibleRecord {
    pub index: u128,
    /// Monic, over the level `ground` of `tower`.
    pub poly: UniPoly,
    /// A root in `F_{q^t}`, the top level of `tower`.
    pub root: FieldElement,
    pub tower: Arc<FieldTower>,
    pub ground: usize,
}

/// Degree-`t` irreducibles over `F_q` produced from period vectors and a normal basis.
#[derive(Clone, Debug)]
pub struct IrreducibleFamily {
    q: u64,
    t: usize,
    tower: Arc<FieldTower>,
    ground: usize,
    conjugates: Vec<FieldElement>,
}

impl IrreducibleFamily {
    pub fn new(q: u64, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        let (base, ground) = base_field(q)?;
        let tower = base.extend(t, None)?;
        let top = tower.top_level();
        let alpha = tower.normal_basis_generator(top)?;
        let mut conjugates = Vec::with_capacity(t);
        let mut c = alpha;
        for _ in 0..t {
            let next = tower.frobenius(&c, 1)?;
            conjugates.push(c);
            c = next;
        }
        Ok(IrreducibleFamily { q, t, tower: Arc::new(tower), ground, conjugates })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    /// `⌊q^{t-2}/(2t)⌋`, the number of indices served by [`Self::nth`].
    pub fn capacity(&self) -> u128 {
        family_capacity(self.q, self.t)
    }

    /// `β_λ = Σ λ_{i+1} α^{q^i}` and its minimal polynomial.
    pub fn from_vector(&self, index: u128, lambda: &[u32]) -> Result<IrreducibleRecord> {
        let tw = &*self.tower;
        let top = tw.top_level();
        let mut beta = tw.zero(top);
        for (c, conj) in lambda.iter().zip(&self.conjugates) {
            let c = tw.embed(&tw.from_index(self.ground, *c as u128)?, top)?;
            beta = tw.add(&beta, &tw.mul(&c, conj)?)?;
        }
        let ring = PolyRing::new(tw, top);
        let mut f = ring.one();
        let mut b = beta.clone();
        for _ in 0..self.t {
            let factor = ring.from_coeffs(vec![tw.neg(&b)?, tw.one(top)])?;
            f = ring.mul(&f, &factor)?;
            b = tw.frobenius(&b, 1)?;
        }
        let coeffs = f
            .coeffs()
            .iter()
            .map(|c| {
                tw.restrict(c, self.ground).ok_or_else(|| {
                    Error::Exhausted("conjugate product left the ground field".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let poly = PolyRing::new(tw, self.ground).from_coeffs(coeffs)?;
        Ok(IrreducibleRecord { index, poly, root: beta, tower: self.tower.clone(), ground: self.ground })
    }

    /// The `m`-th irreducible: walks select indices in order and keeps only vectors that are
    /// the lexicographic minimum of their rotation orbit, so distinct `m` give distinct
    /// polynomials.
    pub fn nth(&self, m: u128) -> Result<IrreducibleRecord> {
        let cap = self.capacity();
        if m >= cap {
            return Err(Error::out_of_range(m, cap));
        }
        let (lambda, _) = self.nth_vector(m)?;
        self.from_vector(m, &lambda)
    }

    /// The period vector behind [`Self::nth`] and the number of select calls spent on it.
    pub fn nth_vector(&self, m: u128) -> Result<(Vec<u32>, u128)> {
        let range = select_range(self.q, self.t)?;
        let mut found = 0u128;
        for s in 0..range {
            let v = select_period_vector(self.q, self.t, s)?;
            if is_orbit_minimum(&v.entries) {
                if found == m {
                    return Ok((v.entries, s + 1));
                }
                found += 1;
            }
        }
        Err(Error::Exhausted(format!("only {found} orbit representatives among {range} vectors")))
    }
}

pub fn nth_irreducible(q: u64, t: usize, m: u128) -> Result<IrreducibleRecord> {
    IrreducibleFamily::new(q, t)?.nth(m)
}

/// The first `m` distinct irreducibles met while scanning `F_q^t` in lexicographic order
/// (first coordinate most significant) and keeping vectors of period `t`. The scan covers the
/// first `2tm` vectors, or all of `F_q^t` when that is fewer.
pub fn first_m_irreducibles(q: u64, t: usize, m: usize) -> Result<Vec<IrreducibleRecord>> {
    let family = IrreducibleFamily::new(q, t)?;
    first_m_from(&family, m)
}

pub(crate) fn first_m_from(family: &IrreducibleFamily, m: usize) -> Result<Vec<IrreducibleRecord>> {
    let (q, t) = (family.q, family.t);
    let total = checked_pow(q, t)?;
    let limit = (2 * t as u128 * m as u128).min(total);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(m);
    for v in 0..limit {
        if out.len() == m {
            break;
        }
        let mut lambda = vec![0u32; t];
        let mut rest = v;
        for slot in lambda.iter_mut().rev() {
            *slot = (rest % q as u128) as u32;
            rest /= q as u128;
        }
        if !has_period_t(&lambda) {
            continue;
        }
        let rec = family.from_vector(out.len() as u128, &lambda)?;
        if seen.insert(rec.poly.clone()) {
            out.push(rec);
        }
    }
    if out.len() < m {
        return Err(Error::Exhausted(format!("{} of {m} irreducibles after {limit} vectors", out.len())));
    }
    Ok(out)
}
