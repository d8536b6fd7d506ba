//! Brute-force check of the tester property: for every enumerated `f` and assignment `a`
//! with `f(a) ≠ 0`, count the map tuples `l` with `f(l(a)) = 0`.
//!
//! The main engine uses that every map is linear over the prime field: each map is reduced
//! to a matrix once, and coefficient vectors of `f` are walked in odometer order so each
//! step adds one precomputed monomial image. [`is_tester_reference`] evaluates `f` through
//! [`Tester::apply`] instead and serves as the independent oracle.

mod arith;
mod engine;
mod poly;

pub use poly::{
    class_monomials, enumerate_class, eval_poly, eval_poly_in, ClassEnumeration, MultiPoly,
};

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::rational::{complement, format_rational, Rational};
use crate::tester::{Family, PolyClass, Tester, Value};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Verification parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    /// Variables per block.
    pub n: usize,
    /// Largest class enumerated exhaustively; larger classes are sampled to this many.
    pub class_cap: u64,
    /// Largest assignment set enumerated exhaustively.
    pub assignment_cap: u64,
    /// Require exhaustive enumeration of both; fail with `BudgetExceeded` when over budget.
    pub exact: bool,
    /// Bound on `polynomials × assignments × size`.
    pub budget: u128,
    pub seed: u64,
    /// Verify against this family instead of the tester's declared one.
    pub family: Option<Family>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            n: 2,
            class_cap: 100_000,
            assignment_cap: 100_000,
            exact: false,
            budget: DEFAULT_BUDGET,
            seed: 0,
            family: None,
        }
    }
}

impl Grid {
    pub fn exact(n: usize) -> Self {
        Grid { n, exact: true, ..Grid::default() }
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }
}

/// A pair `(f, a)` with `f(a) ≠ 0` and the tuples `l` with `f(l(a)) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub poly: MultiPoly,
    pub assignment: Vec<Value>,
    pub failing: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub verdict: bool,
    /// Largest fraction of failing tuples over all checked `(f, a)` with `f(a) ≠ 0`.
    pub worst_failure: Rational,
    pub declared_epsilon: Rational,
    pub witness: Option<Witness>,
    pub class: PolyClass,
    pub polys_checked: u128,
    pub assignments_checked: u128,
    /// Pairs `(f, a)` with `f(a) ≠ 0`.
    pub nonzero_pairs: u128,
    pub map_evaluations: u128,
    /// Both enumerations were exhaustive.
    pub exact: bool,
    pub seed: u64,
    pub caveats: Vec<String>,
}

impl VerificationReport {
    pub fn measured_density(&self) -> Rational {
        complement(&self.worst_failure)
    }

    pub fn to_json(&self) -> Json {
        let witness = self.witness.as_ref().map(|w| {
            json!({
                "poly": w.poly.to_json(),
                "assignment": w.assignment.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "failing": w.failing.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
            })
        });
        json!({
            "verdict": self.verdict,
            "worst_failure": format_rational(&self.worst_failure),
            "declared_epsilon": format_rational(&self.declared_epsilon),
            "measured_density": format_rational(&self.measured_density()),
            "class": self.class.to_string(),
            "exact": self.exact,
            "seed": self.seed,
            "polys_checked": self.polys_checked.to_string(),
            "assignments_checked": self.assignments_checked.to_string(),
            "nonzero_pairs": self.nonzero_pairs.to_string(),
            "map_evaluations": self.map_evaluations.to_string(),
            "witness": witness,
            "caveats": self.caveats,
        })
    }
}

/// The class a grid verifies against.
pub(crate) fn grid_class(tester: &Tester, grid: &Grid) -> Result<PolyClass> {
    if grid.n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut class = tester.class().clone();
    class.n = grid.n;
    if let Some(f) = grid.family {
        class.family = f;
    }
    if tester.blocks() > 1 && (class.family != Family::HLF || tester.blocks() != class.d) {
        return Err(Error::ClassMismatch(format!(
            "a tester with {} blocks only verifies against HLF with d = {}",
            tester.blocks(),
            tester.blocks()
        )));
    }
    Ok(class)
}

/// Checks the tester property over the grid.
pub fn is_tester(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    engine::run(tester, grid)
}

/// `1 - worst_failure`.
pub fn measured_density(tester: &Tester, grid: &Grid) -> Result<Rational> {
    Ok(is_tester(tester, grid)?.measured_density())
}

/// Exhaustive check iterating polynomials outermost and evaluating every tuple through
/// [`Tester::apply`]. Slow; for cross-checking the main engine on tiny instances.
pub fn is_tester_reference(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    engine::reference(tester, grid)
}

/// Exhaustive check for single-block evaluation testers: `f(l_β(a)) = F(β)` with
/// `F = f(lift(a))` a univariate polynomial, so each pair costs one polynomial product and
/// `r` evaluations (the top-coefficient map reads the coefficient of `X^{d(t-1)}`).
pub fn is_tester_univariate(tester: &Tester, grid: &Grid) -> Result<VerificationReport> {
    engine::univariate(tester, grid)
}
