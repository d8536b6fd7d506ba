//! Testers as indexed families of per-block linear maps, and their composition algebra.
//!
//! A tester is stored intensionally: a construction node plus the rule that decodes an index
//! into the indices of its parts. Single maps are computed on demand, so access cost depends
//! on the depth of the construction and not on its size.

mod serial;

pub use serial::{from_json, to_json, MAX_SCHEMA_VERSION, SCHEMA_VERSION};

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement, FieldTower, PolyRing, UniPoly};
use crate::irreducibles::IrreducibleFamily;
use crate::rational::{check_epsilon, format_rational, Rational};

/// Polynomial family: all polynomials of bounded degree, homogeneous ones, or forms with
/// exactly one variable from each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    P,
    HP,
    HLF,
}

impl Family {
    /// Position in the containment chain `HLF ⊂ HP ⊂ P`; larger means narrower.
    pub fn narrowness(self) -> u8 {
        match self {
            Family::P => 0,
            Family::HP => 1,
            Family::HLF => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Family::P),
            "HP" | "hp" => Ok(Family::HP),
            "HLF" | "hlf" => Ok(Family::HLF),
            _ => Err(Error::InvalidArgument(format!("unknown class {s:?}, expected P, HP or HLF"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::P => "P",
            Family::HP => "HP",
            Family::HLF => "HLF",
        })
    }
}

/// `P(n, d)` (optionally with a per-variable degree cap), `HP(n, d)` or `HLF(n, d)`.
/// For HLF, `n` counts variables per block and `d` is the number of blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyClass {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub variable_degree_cap: Option<usize>,
}

impl PolyClass {
    pub fn new(family: Family, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("class needs n >= 1 and d >= 1".into()));
        }
        Ok(PolyClass { family, n, d, variable_degree_cap: None })
    }

    pub fn with_family(&self, family: Family) -> Self {
        PolyClass { family, ..self.clone() }
    }
}

impl fmt::Display for PolyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, d={}", self.family, self.n, self.d)?;
        if let Some(cap) = self.variable_degree_cap {
            write!(f, ", cap={cap}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Flags {
    pub componentwise: bool,
    pub linear: bool,
    pub reducible: bool,
    pub symmetric: bool,
}

impl Flags {
    pub const ALL: Flags = Flags { componentwise: true, linear: true, reducible: true, symmetric: true };

    pub fn and(self, o: Flags) -> Flags {
        Flags {
            componentwise: self.componentwise && o.componentwise,
            linear: self.linear && o.linear,
            reducible: self.reducible && o.reducible,
            symmetric: self.symmetric && o.symmetric,
        }
    }

    /// True when every flag set here is also set in `o`.
    pub fn implied_by(self, o: Flags) -> bool {
        self.and(o) == self
    }
}

/// The space a tester maps from or to: a tower level, or the polynomials of length `len`
/// over a level.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Field(Field),
    Poly { coeff: Field, len: usize },
}

impl Domain {
    /// The field whose elements are the scalars (or coefficients) of this domain.
    pub fn field(&self) -> &Field {
        match self {
            Domain::Field(f) => f,
            Domain::Poly { coeff, .. } => coeff,
        }
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.field().tower
    }

    pub fn level(&self) -> usize {
        self.field().level
    }

    pub fn one(&self) -> Value {
        let f = self.field();
        match self {
            Domain::Field(_) => Value::Elem(f.tower.one(f.level)),
            Domain::Poly { .. } => Value::Poly(PolyRing::new(&f.tower, f.level).one()),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Field(f), Value::Elem(e)) => e.level() == f.level && f.tower.check(e).is_ok(),
            (Domain::Poly { coeff, len }, Value::Poly(z)) => {
                z.level() == coeff.level && z.coeffs().len() <= *len
            }
            _ => false,
        }
    }

    /// Number of elements.
    pub fn cardinality(&self) -> Option<u128> {
        match self {
            Domain::Field(f) => Some(f.cardinality()),
            Domain::Poly { coeff, len } => coeff.cardinality().checked_pow(*len as u32),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Field(fl) => write!(f, "F_{}", fl.cardinality()),
            Domain::Poly { coeff, len } => write!(f, "F_{}[X]_{}", coeff.cardinality(), len - 1),
        }
    }
}

/// A field element or a polynomial, as moved around by atomic maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Elem(FieldElement),
    Poly(UniPoly),
}

impl Value {
    pub fn as_elem(&self) -> Result<&FieldElement> {
        match self {
            Value::Elem(e) => Ok(e),
            Value::Poly(_) => Err(Error::level_mismatch("field element", "polynomial")),
        }
    }

    pub fn as_poly(&self) -> Result<&UniPoly> {
        match self {
            Value::Poly(z) => Ok(z),
            Value::Elem(_) => Err(Error::level_mismatch("polynomial", "field element")),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(e) => write!(f, "{e}"),
            Value::Poly(z) => write!(f, "{z}"),
        }
    }
}

/// One linear map between adjacent spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum AtomicMap {
    /// `l_X`: an element of `field` to its polynomial over the level below.
    Lift { field: Field },
    /// `z ↦ z(β)` for `β` in `field`.
    Evaluate { field: Field, point: FieldElement },
    /// `z ↦` the coefficient of `X^j`, an element of `field`.
    CoefficientAt { field: Field, j: usize },
    /// `z ↦ Σ w_j z_j` with weights in `field`.
    Functional { field: Field, weights: Vec<FieldElement> },
    /// Left-to-right composition.
    Chain(Vec<AtomicMap>),
}

impl AtomicMap {
    pub fn apply(&self, v: &Value) -> Result<Value> {
        match self {
            AtomicMap::Lift { field } => {
                let e = v.as_elem()?;
                if e.level() != field.level {
                    return Err(Error::level_mismatch(field.level, e.level()));
                }
                Ok(Value::Poly(field.tower.element_to_unipoly(e)?))
            }
            AtomicMap::Evaluate { field, point } => {
                let z = v.as_poly()?;
                Ok(Value::Elem(PolyRing::new(&field.tower, z.level()).eval(z, point)?))
            }
            AtomicMap::CoefficientAt { field, j } => {
                let z = v.as_poly()?;
                if z.level() != field.level {
                    return Err(Error::level_mismatch(field.level, z.level()));
                }
                Ok(Value::Elem(z.coeff(&field.tower, *j)))
            }
            AtomicMap::Functional { field, weights } => {
                let z = v.as_poly()?;
                let tw = &field.tower;
                let mut acc = tw.zero(field.level);
                for (c, w) in z.coeffs().iter().zip(weights) {
                    let c = tw.embed(c, field.level)?;
                    acc = tw.add(&acc, &tw.mul(&c, w)?)?;
                }
                Ok(Value::Elem(acc))
            }
            AtomicMap::Chain(maps) => {
                let mut cur = v.clone();
                for m in maps {
                    cur = m.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    /// Joins two maps into one chain, flattening nested chains.
    pub fn then(self, next: AtomicMap) -> AtomicMap {
        let mut parts = match self {
            AtomicMap::Chain(v) => v,
            m => vec![m],
        };
        match next {
            AtomicMap::Chain(v) => parts.extend(v),
            m => parts.push(m),
        }
        AtomicMap::Chain(parts)
    }
}

impl fmt::Display for AtomicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicMap::Lift { .. } => write!(f, "lift"),
            AtomicMap::Evaluate { point, .. } => write!(f, "eval{point}"),
            AtomicMap::CoefficientAt { j, .. } => write!(f, "coeff{j}"),
            AtomicMap::Functional { weights, .. } => {
                let ws: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "functional({})", ws.join(","))
            }
            AtomicMap::Chain(maps) => {
                let parts: Vec<String> = maps.iter().map(|m| m.to_string()).collect();
                write!(f, "{}", parts.join(" -> "))
            }
        }
    }
}

/// Where the roots of a reduction tester come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sourcing {
    /// Indexed access through period vectors; any root is computed on its own.
    Indexed,
    /// A lexicographic scan computed once at construction.
    Scan,
}

impl fmt::Display for Sourcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sourcing::Indexed => "nth",
            Sourcing::Scan => "first_m",
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CrtParams {
    pub q: u64,
    pub t: usize,
    pub k: usize,
    pub d: usize,
    pub eps1: Rational,
    pub sourcing: Sourcing,
    pub family: Arc<IrreducibleFamily>,
    pub roots: Arc<OnceLock<Vec<FieldElement>>>,
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Lift,
    /// Points are the first `points` elements of the target field; `infinity` appends the
    /// top-coefficient map. Unlifted testers act on polynomials directly.
    Evaluation { points: u128, infinity: bool, lifted: bool, class: PolyClass },
    Crt(CrtParams),
    Compose(Box<Tester>, Box<Tester>),
    Product(Box<Tester>, Box<Tester>),
    Explicit(Arc<Vec<Vec<AtomicMap>>>),
}

/// An indexed family of `size` tuples of `blocks` linear maps from `source` to `target`.
#[derive(Clone, Debug)]
pub struct Tester {
    pub(crate) source: Domain,
    pub(crate) target: Domain,
    pub(crate) ground: usize,
    pub(crate) blocks: usize,
    pub(crate) size: u128,
    pub(crate) epsilon: Rational,
    pub(crate) class: PolyClass,
    pub(crate) flags: Flags,
    pub(crate) node: Node,
}

impl PartialEq for Tester {
    fn eq(&self, other: &Self) -> bool {
        to_json(self) == to_json(other)
    }
}

impl Tester {
    pub fn source(&self) -> &Domain {
        &self.source
    }

    pub fn target(&self) -> &Domain {
        &self.target
    }

    /// Level (in the source tower) of the field the class coefficients live in.
    pub fn ground_level(&self) -> usize {
        self.ground
    }

    pub fn ground_field(&self) -> Field {
        Field { tower: self.source.tower().clone(), level: self.ground }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn density(&self) -> Rational {
        Rational::one() - &self.epsilon
    }

    pub fn class(&self) -> &PolyClass {
        &self.class
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    /// Construction kind: `lift`, `evaluation`, `crt`, `compose`, `product` or `explicit`.
    pub fn kind(&self) -> &'static str {
        match self.node {
            Node::Lift => "lift",
            Node::Evaluation { .. } => "evaluation",
            Node::Crt(_) => "crt",
            Node::Compose(..) => "compose",
            Node::Product(..) => "product",
            Node::Explicit(_) => "explicit",
        }
    }

    /// Irreducible sourcing of every reduction node, in construction order.
    pub fn sourcing(&self) -> Vec<Sourcing> {
        match &self.node {
            Node::Crt(c) => vec![c.sourcing],
            Node::Compose(a, b) | Node::Product(a, b) => {
                let mut v = a.sourcing();
                v.extend(b.sourcing());
                v
            }
            _ => Vec::new(),
        }
    }

    fn check_index(&self, index: u128, block: usize) -> Result<()> {
        if index >= self.size {
            return Err(Error::out_of_range(index, self.size));
        }
        if block >= self.blocks {
            return Err(Error::out_of_range(format!("block {block}"), self.blocks));
        }
        Ok(())
    }

    fn check_value(&self, v: &Value) -> Result<()> {
        if !self.source.contains(v) {
            return Err(Error::level_mismatch(&self.source, v));
        }
        Ok(())
    }

    /// The tuple of atomic maps at `index`, one per block.
    pub fn map_at(&self, index: u128) -> Result<Vec<AtomicMap>> {
        self.check_index(index, 0)?;
        (0..self.blocks).map(|b| self.map_in_block(index, b)).collect()
    }

    fn map_in_block(&self, index: u128, block: usize) -> Result<AtomicMap> {
        match &self.node {
            Node::Lift => Ok(AtomicMap::Lift { field: self.source.field().clone() }),
            Node::Evaluation { points, lifted, .. } => {
                let target = self.target.field().clone();
                let inner = if index < *points {
                    let point = target.tower.from_index(target.level, index)?;
                    AtomicMap::Evaluate { field: target, point }
                } else {
                    let len = self.poly_len();
                    AtomicMap::CoefficientAt { field: target, j: len - 1 }
                };
                Ok(if *lifted {
                    AtomicMap::Lift { field: self.source.field().clone() }.then(inner)
                } else {
                    inner
                })
            }
            Node::Crt(c) => {
                let point = crt_root(c, index)?;
                let lift = AtomicMap::Lift { field: self.source.field().clone() };
                Ok(lift.then(AtomicMap::Evaluate { field: self.target.field().clone(), point }))
            }
            Node::Compose(l1, l2) => {
                let (i1, i2) = (index % l1.size, index / l1.size);
                let m1 = l1.map_in_block(i1, sub_block(l1, block))?;
                let m2 = l2.map_in_block(i2, sub_block(l2, block))?;
                Ok(m1.then(m2))
            }
            Node::Product(lx, ly) => {
                let dx = lx.class.d;
                if block < dx {
                    lx.map_in_block(index % lx.size, sub_block(lx, block))
                } else {
                    ly.map_in_block(index / lx.size, sub_block(ly, block - dx))
                }
            }
            Node::Explicit(maps) => {
                let row = &maps[index as usize];
                Ok(row[block.min(row.len() - 1)].clone())
            }
        }
    }

    /// Length of the polynomial slice an evaluation node reads.
    fn poly_len(&self) -> usize {
        match &self.source {
            Domain::Poly { len, .. } => *len,
            Domain::Field(f) => f.tower.relative_degree(f.level, self.target.level()),
        }
    }

    /// Image of `v` under the `block`-th map of tuple `index`.
    pub fn apply(&self, index: u128, block: usize, v: &Value) -> Result<Value> {
        self.check_index(index, block)?;
        self.check_value(v)?;
        self.apply_unchecked(index, block, v)
    }

    fn apply_unchecked(&self, index: u128, block: usize, v: &Value) -> Result<Value> {
        match &self.node {
            Node::Compose(l1, l2) => {
                let (i1, i2) = (index % l1.size, index / l1.size);
                let w = l1.apply_unchecked(i1, sub_block(l1, block), v)?;
                l2.apply_unchecked(i2, sub_block(l2, block), &w)
            }
            Node::Product(lx, ly) => {
                let dx = lx.class.d;
                if block < dx {
                    lx.apply_unchecked(index % lx.size, sub_block(lx, block), v)
                } else {
                    ly.apply_unchecked(index / lx.size, sub_block(ly, block - dx), v)
                }
            }
            _ => self.map_in_block(index, block)?.apply(v),
        }
    }

    /// Images of `v` under the `block`-th map of every tuple, in index order. Shares work
    /// across indices, so it is much cheaper than `size` calls to [`Self::apply`].
    pub fn images(&self, block: usize, v: &Value) -> Result<Vec<Value>> {
        self.check_index(0, block)?;
        self.check_value(v)?;
        self.images_unchecked(block, v)
    }

    fn images_unchecked(&self, block: usize, v: &Value) -> Result<Vec<Value>> {
        match &self.node {
            Node::Lift => Ok(vec![self.map_in_block(0, block)?.apply(v)?]),
            Node::Evaluation { points, infinity, lifted, .. } => {
                let target = self.target.field();
                let tw = &target.tower;
                let z = if *lifted {
                    self.source.tower().element_to_unipoly(v.as_elem()?)?
                } else {
                    v.as_poly()?.clone()
                };
                let ring = PolyRing::new(tw, z.level());
                let mut out = Vec::with_capacity(self.size as usize);
                for i in 0..*points {
                    out.push(Value::Elem(ring.eval(&z, &tw.from_index(target.level, i)?)?));
                }
                if *infinity {
                    out.push(Value::Elem(z.coeff(tw, self.poly_len() - 1)));
                }
                Ok(out)
            }
            Node::Crt(c) => {
                let z = self.source.tower().element_to_unipoly(v.as_elem()?)?;
                let ring = PolyRing::new(&self.target.field().tower, z.level());
                crt_roots(c, self.size)?
                    .iter()
                    .map(|b| Ok(Value::Elem(ring.eval(&z, b)?)))
                    .collect()
            }
            Node::Compose(l1, l2) => {
                let first = l1.images_unchecked(sub_block(l1, block), v)?;
                let mut out = vec![None; self.size as usize];
                let s1 = l1.size as usize;
                for (i1, w) in first.iter().enumerate() {
                    for (i2, x) in l2.images_unchecked(sub_block(l2, block), w)?.into_iter().enumerate() {
                        out[i2 * s1 + i1] = Some(x);
                    }
                }
                Ok(out.into_iter().map(|x| x.expect("every index filled")).collect())
            }
            Node::Product(lx, ly) => {
                let dx = lx.class.d;
                let sx = lx.size as usize;
                if block < dx {
                    let xs = lx.images_unchecked(sub_block(lx, block), v)?;
                    Ok((0..self.size as usize).map(|i| xs[i % sx].clone()).collect())
                } else {
                    let ys = ly.images_unchecked(sub_block(ly, block - dx), v)?;
                    Ok((0..self.size as usize).map(|i| ys[i / sx].clone()).collect())
                }
            }
            Node::Explicit(_) => {
                (0..self.size).map(|i| self.map_in_block(i, block)?.apply(v)).collect()
            }
        }
    }

    /// Declared failure bound `eps2 >= ε`, keeping the maps. The class may be narrowed along
    /// `P ⊃ HP ⊃ HLF` at the same degree.
    pub fn weaken(&self, eps2: &Rational, class: Option<&PolyClass>) -> Result<Tester> {
        check_epsilon(eps2)?;
        if *eps2 < self.epsilon {
            return Err(Error::InvalidEpsilon(format!(
                "{} is below the current bound {}",
                format_rational(eps2),
                format_rational(&self.epsilon)
            )));
        }
        let mut out = self.clone();
        out.epsilon = eps2.clone();
        if let Some(c) = class {
            check_narrowing(&self.class, c)?;
            out.class = c.clone();
        }
        Ok(out)
    }

    /// Clears every flag not set in `keep`.
    pub fn restrict_flags(&self, keep: Flags) -> Tester {
        let mut out = self.clone();
        out.flags = self.flags.and(keep);
        out
    }
}

fn check_narrowing(from: &PolyClass, to: &PolyClass) -> Result<()> {
    if to.d != from.d || to.family.narrowness() < from.family.narrowness() {
        return Err(Error::ClassMismatch(format!("cannot relabel {from} as {to}")));
    }
    Ok(())
}

fn sub_block(t: &Tester, block: usize) -> usize {
    if t.blocks == 1 {
        0
    } else {
        block
    }
}

fn crt_root(c: &CrtParams, index: u128) -> Result<FieldElement> {
    if let Some(roots) = c.roots.get() {
        return Ok(roots[index as usize].clone());
    }
    Ok(c.family.nth(index)?.root)
}

fn crt_roots(c: &CrtParams, size: u128) -> Result<&Vec<FieldElement>> {
    if let Some(r) = c.roots.get() {
        return Ok(r);
    }
    let roots = (0..size).map(|i| Ok(c.family.nth(i)?.root)).collect::<Result<Vec<_>>>()?;
    Ok(c.roots.get_or_init(|| roots))
}

/// The size-1 tester whose only map is the lift `l_X` from `level` to polynomials over the
/// level below; failure bound 0 and all flags set.
pub fn lift_tester(tower: Arc<FieldTower>, level: usize, class: PolyClass) -> Result<Tester> {
    if level == 0 || level >= tower.num_levels() {
        return Err(Error::level_mismatch("an extension level", level));
    }
    let len = tower.degree(level);
    let source = Field::new(tower.clone(), level)?;
    let coeff = Field::new(tower, level - 1)?;
    Ok(Tester {
        source: Domain::Field(source),
        target: Domain::Poly { coeff, len },
        ground: level - 1,
        blocks: 1,
        size: 1,
        epsilon: Rational::zero(),
        class,
        flags: Flags::ALL,
        node: Node::Lift,
    })
}

/// `L₂ ∘ L₁`: size `|L₁|·|L₂|`, failure `1 - (1-ε₁)(1-ε₂)`, index `i = i₂·|L₁| + i₁`.
pub fn compose(l1: &Tester, l2: &Tester) -> Result<Tester> {
    if l1.target != l2.source {
        return Err(Error::level_mismatch(&l2.source, &l1.target));
    }
    if l1.class.d != l2.class.d {
        return Err(Error::ClassMismatch(format!("degrees differ: {} vs {}", l1.class, l2.class)));
    }
    let blocks = match (l1.blocks, l2.blocks) {
        (1, b) | (b, 1) => b,
        (a, b) if a == b => a,
        (a, b) => return Err(Error::ClassMismatch(format!("block counts {a} and {b}"))),
    };
    let class = if l2.class.family.narrowness() > l1.class.family.narrowness() {
        PolyClass { n: l1.class.n, ..l2.class.clone() }
    } else {
        l1.class.clone()
    };
    let size = l1
        .size
        .checked_mul(l2.size)
        .ok_or_else(|| Error::Overflow("composed size exceeds 128 bits".into()))?;
    let epsilon = Rational::one() - l1.density() * l2.density();
    Ok(Tester {
        source: l1.source.clone(),
        target: l2.target.clone(),
        ground: l1.ground.min(l2.ground),
        blocks,
        size,
        epsilon,
        class,
        flags: l1.flags.and(l2.flags),
        node: Node::Compose(Box::new(l1.clone()), Box::new(l2.clone())),
    })
}

/// `L_x × L_y` on HLF classes: the first `d_x` blocks use `L_x`, the rest `L_y`.
/// Size multiplies, failure is `1 - (1-ε_x)(1-ε_y)`, and the symmetric flag is cleared.
pub fn product(lx: &Tester, ly: &Tester) -> Result<Tester> {
    if lx.source != ly.source {
        return Err(Error::level_mismatch(&lx.source, &ly.source));
    }
    if lx.target != ly.target {
        return Err(Error::level_mismatch(&lx.target, &ly.target));
    }
    for t in [lx, ly] {
        if t.blocks != 1 && t.blocks != t.class.d {
            return Err(Error::ClassMismatch(format!(
                "{} blocks for a class of degree {}",
                t.blocks, t.class.d
            )));
        }
    }
    let d = lx.class.d + ly.class.d;
    let class = PolyClass {
        family: Family::HLF,
        n: lx.class.n.max(ly.class.n),
        d,
        variable_degree_cap: None,
    };
    let size = lx
        .size
        .checked_mul(ly.size)
        .ok_or_else(|| Error::Overflow("product size exceeds 128 bits".into()))?;
    let epsilon = Rational::one() - lx.density() * ly.density();
    let mut flags = lx.flags.and(ly.flags);
    flags.symmetric = false;
    Ok(Tester {
        source: lx.source.clone(),
        target: lx.target.clone(),
        ground: lx.ground.min(ly.ground),
        blocks: d,
        size,
        epsilon,
        class,
        flags,
        node: Node::Product(Box::new(lx.clone()), Box::new(ly.clone())),
    })
}

/// A tester given by its maps verbatim: `maps[i]` holds one map per block (or a single map
/// used for every block). Flags are derived from the maps.
pub fn explicit_tester(
    source: Domain,
    target: Domain,
    ground: usize,
    maps: Vec<Vec<AtomicMap>>,
    epsilon: Rational,
    class: PolyClass,
) -> Result<Tester> {
    check_epsilon(&epsilon)?;
    if maps.is_empty() {
        return Err(Error::InvalidArgument("an explicit tester needs at least one map".into()));
    }
    let blocks = maps[0].len();
    if blocks == 0 || maps.iter().any(|row| row.len() != blocks) {
        return Err(Error::InvalidArgument("every tuple must have the same number of maps".into()));
    }
    if blocks != 1 && blocks != class.d {
        return Err(Error::ClassMismatch(format!("{blocks} blocks for {class}")));
    }
    let one_in = source.one();
    let one_out = target.one();
    let mut reducible = true;
    for m in maps.iter().flatten() {
        let img = m.apply(&one_in)?;
        if !target.contains(&img) {
            return Err(Error::level_mismatch(&target, &img));
        }
        reducible &= img == one_out;
    }
    let symmetric = maps.iter().all(|row| row.iter().all(|m| *m == row[0]));
    Ok(Tester {
        source,
        target,
        ground,
        blocks,
        size: maps.len() as u128,
        epsilon,
        class,
        flags: Flags { componentwise: true, linear: true, reducible, symmetric },
        node: Node::Explicit(Arc::new(maps)),
    })
}
