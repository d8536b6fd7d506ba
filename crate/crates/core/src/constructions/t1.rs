//! Small-field pipeline: `F_q ⊂ F_{q^2} ⊂ … ⊂ F_{q^{2^r}} ⊂ F_{q^{2^r t}}`, one evaluation
//! tester per quadratic step (split into degree groups by products) and one evaluation
//! tester for the final degree-`t` step.

use std::fmt;
use std::sync::Arc;

use num_traits::One;

use super::{
    default_class, eval_size_for, evaluation_tester_at, exhaustive_search_tester, SearchBudget,
};
use crate::error::{Error, Result, UnconstructibleReason};
use crate::gf::Field;
use crate::irreducibles::base_field;
use crate::rational::{format_rational, pow, rat, Rational};
use crate::tester::{compose, product, Family, Flags, PolyClass, Tester};

/// `(ε₀, …, ε_{r-1}, ε_r)` with `ε_i = η_i/(q^{2^i}+1)` for integers `η_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsVector {
    pub etas: Vec<u128>,
    pub eps_r: Rational,
}

impl EpsVector {
    /// `ε_i` for `i < r`.
    pub fn eps(&self, q: u64, i: usize) -> Result<Rational> {
        Ok(Rational::new(self.etas[i].into(), (level_card(q, i)? + 1).into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `ε_i(q^{2^i}+1) = q^{2^i}`, `ε_r = 1/3`: the smallest sizes.
    Density2,
    /// `ε_i = m/(q+1)` scaled to each level (`η_i = ⌊m(q^{2^i}+1)/(q+1)⌋`), `ε_r = 1/3`.
    Co1(u64),
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "density2" {
            return Ok(Preset::Density2);
        }
        if let Some(m) = s.strip_prefix("co1:") {
            let m = m.parse().map_err(|_| Error::InvalidArgument(format!("bad preset {s:?}")))?;
            return Ok(Preset::Co1(m));
        }
        Err(Error::InvalidArgument(format!("unknown preset {s:?}, expected density2 or co1:M")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Density2 => write!(f, "density2"),
            Preset::Co1(m) => write!(f, "co1:{m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinalStep {
    /// Evaluation tester when it fits, exhaustive search otherwise.
    Auto,
    Evaluation,
    ExhaustiveSearch,
}

/// `q^{2^i}`.
pub(crate) fn level_card(q: u64, i: usize) -> Result<u128> {
    let mut c = q as u128;
    for _ in 0..i {
        c = c.checked_mul(c).ok_or_else(|| Error::Overflow(format!("q^(2^{i}) exceeds 128 bits")))?;
    }
    Ok(c)
}

/// The least `r >= 0` with `9d <= q^{2^r}`, so `q^{2^{r-1}} < 9d` when `r >= 1`.
pub fn t1_levels(q: u64, d: usize) -> Result<usize> {
    let target = 9 * d as u128;
    let mut r = 0;
    while level_card(q, r)? < target {
        r += 1;
    }
    Ok(r)
}

pub fn preset_eps_vector(q: u64, d: usize, preset: Preset) -> Result<EpsVector> {
    let r = t1_levels(q, d)?;
    let mut etas = Vec::with_capacity(r);
    for i in 0..r {
        let qi = level_card(q, i)?;
        etas.push(match preset {
            Preset::Density2 => qi,
            Preset::Co1(m) => {
                if m == 0 || m > q {
                    return Err(Error::InvalidEpsVector(format!("co1 needs 1 <= m <= q, got {m}")));
                }
                m as u128 * (qi + 1) / (q as u128 + 1)
            }
        });
    }
    Ok(EpsVector { etas, eps_r: rat(1, 3) })
}

fn validate(q: u64, d: usize, eps: &EpsVector) -> Result<usize> {
    let r = t1_levels(q, d)?;
    let invalid = |detail: String| Error::unconstructible(UnconstructibleReason::EpsVectorInvalid, detail);
    if eps.etas.len() != r {
        return Err(invalid(format!("expected {r} level entries for q = {q}, d = {d}, got {}", eps.etas.len())));
    }
    for (i, &eta) in eps.etas.iter().enumerate() {
        let qi = level_card(q, i)?;
        if eta == 0 || eta > qi {
            return Err(invalid(format!("level {i}: need 1 <= eps_i (q^(2^i)+1) <= {qi}, got {eta}")));
        }
    }
    if eps.eps_r < rat(1, 3) || eps.eps_r > rat(2, 3) {
        return Err(invalid(format!("final eps {} outside [1/3, 2/3]", format_rational(&eps.eps_r))));
    }
    Ok(r)
}

/// `1 - ε̄_r ∏_{i<r} ε̄_i^{⌈d/η_i⌉}` with `ε̄ = 1 - ε`.
pub fn t1_epsilon_star(q: u64, d: usize, eps: &EpsVector) -> Result<Rational> {
    let r = validate(q, d, eps)?;
    let mut density = Rational::one() - &eps.eps_r;
    for i in 0..r {
        let groups = (d as u128).div_ceil(eps.etas[i]) as u32;
        density *= pow(&(Rational::one() - eps.eps(q, i)?), groups);
    }
    Ok(Rational::one() - density)
}

/// Degree groups at one level: `⌊d/η⌋` groups of `η` and one group of the remainder.
pub(crate) fn groups(d: usize, eta: u128) -> Vec<usize> {
    let eta = eta.min(d as u128) as usize;
    let mut g = vec![eta; d / eta];
    if d % eta != 0 {
        g.push(d % eta);
    }
    g
}

/// Builds the pipeline tester `F_{q^{2^r t}} → F_q` for `HLF(n, d)` with failure bound
/// exactly [`t1_epsilon_star`].
pub fn t1_pipeline(q: u64, d: usize, t: usize, eps: &EpsVector, final_step: FinalStep) -> Result<Tester> {
    let r = validate(q, d, eps)?;
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let (mut tower, ground) = base_field(q)?;
    for _ in 0..r {
        tower = tower.extend(2, None)?;
    }
    let tower = Arc::new(tower.extend(t, None)?);
    let big_q = level_card(q, r)?;
    let hlf = |deg: usize| -> Result<PolyClass> { default_class(Family::HLF, deg) };

    // Final step F_{Q^t} → F_Q.
    let top = Field::new(tower.clone(), ground + r + 1)?;
    let final_size = eval_size_for(d, t, &eps.eps_r)?;
    let use_eval = match final_step {
        FinalStep::Evaluation => true,
        FinalStep::ExhaustiveSearch => false,
        FinalStep::Auto => final_size <= big_q,
    };
    let last = if use_eval {
        evaluation_tester_at(top.clone(), final_size, default_class(Family::P, d)?)
            .map_err(|e| Error::unconstructible(UnconstructibleReason::FinalStepInfeasible, e.to_string()))?
            .weaken(&eps.eps_r, None)?
    } else {
        let budget = SearchBudget { max_families: 10_000, grid: crate::verify::Grid::default() };
        exhaustive_search_tester(top.clone(), hlf(d)?, &eps.eps_r, final_size as usize, &budget)
            .map_err(|e| Error::unconstructible(UnconstructibleReason::FinalStepInfeasible, e.to_string()))?
    };
    let mut acc = last;
    for i in (0..r).rev() {
        let qi = level_card(q, i)?;
        let eps_i = eps.eps(q, i)?;
        let src = Field::new(tower.clone(), ground + i + 1)?;
        let mut level: Option<Tester> = None;
        for g in groups(d, eps.etas[i]) {
            let part = evaluation_tester_at(src.clone(), qi + 1, default_class(Family::HP, g)?)?
                .weaken(&eps_i, Some(&hlf(g)?))?;
            level = Some(match level {
                None => part,
                Some(prev) => product(&prev, &part)?,
            });
        }
        let mut level = level.expect("d >= 1 gives at least one group");
        if level.class().family != Family::HLF {
            level = level.weaken(&eps_i, Some(&hlf(d)?))?;
        }
        let no_symmetry = Flags { symmetric: false, ..Flags::ALL };
        acc = compose(&acc, &level.restrict_flags(no_symmetry))?;
    }
    if acc.class().family != Family::HLF {
        let eps_now = acc.epsilon().clone();
        acc = acc.weaken(&eps_now, Some(&hlf(d)?))?;
    }
    let expected = t1_epsilon_star(q, d, eps)?;
    debug_assert_eq!(*acc.epsilon(), expected);
    Ok(acc.restrict_flags(Flags { symmetric: false, ..Flags::ALL }))
}
