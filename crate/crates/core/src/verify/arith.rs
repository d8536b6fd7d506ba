//! Arithmetic on tester domains through flat prime-field coordinate vectors.

use std::sync::Arc;

use crate::error::Result;
use crate::gf::{FieldTower, PolyRing};
use crate::tester::{Domain, Value};

#[derive(Clone, Debug)]
pub(crate) enum Arith {
    Field { tower: Arc<FieldTower>, level: usize },
    /// Polynomials over `level`; products may exceed `len` coefficients.
    Poly { tower: Arc<FieldTower>, level: usize, len: usize },
}

impl Arith {
    pub fn of(d: &Domain) -> Self {
        match d {
            Domain::Field(f) => Arith::Field { tower: f.tower.clone(), level: f.level },
            Domain::Poly { coeff, len } => Arith::Poly { tower: coeff.tower.clone(), level: coeff.level, len: *len },
        }
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        match self {
            Arith::Field { tower, .. } | Arith::Poly { tower, .. } => tower,
        }
    }

    pub fn p(&self) -> u32 {
        self.tower().p()
    }

    fn level(&self) -> usize {
        match self {
            Arith::Field { level, .. } | Arith::Poly { level, .. } => *level,
        }
    }

    /// True for the prime field itself.
    pub fn is_prime_field(&self) -> bool {
        matches!(self, Arith::Field { level: 0, .. })
    }

    /// Coordinates of one domain element.
    pub fn var_width(&self) -> usize {
        match self {
            Arith::Field { tower, level } => tower.width(*level),
            Arith::Poly { tower, level, len } => tower.width(*level) * len,
        }
    }

    /// Coordinates of a product of `deg` domain elements.
    pub fn mono_width(&self, deg: usize) -> usize {
        match self {
            Arith::Field { tower, level } => tower.width(*level),
            Arith::Poly { tower, level, len } => tower.width(*level) * (deg.max(1) * (len - 1) + 1),
        }
    }

    pub fn from_flat(&self, flat: &[u32]) -> Result<Value> {
        match self {
            Arith::Field { tower, level } => Ok(Value::Elem(tower.from_flat(*level, flat.to_vec())?)),
            Arith::Poly { tower, level, .. } => {
                let w = tower.width(*level);
                let coeffs = flat
                    .chunks(w)
                    .map(|c| tower.from_flat(*level, c.to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Value::Poly(PolyRing::new(tower, *level).from_coeffs(coeffs)?))
            }
        }
    }

    /// Flat coordinates padded with zeros to `width`.
    pub fn to_flat(&self, v: &Value, width: usize) -> Vec<u32> {
        let mut out = match v {
            Value::Elem(e) => e.flat().to_vec(),
            Value::Poly(z) => z.coeffs().iter().flat_map(|c| c.flat().iter().copied()).collect(),
        };
        out.resize(width, 0);
        out
    }

    pub fn one(&self) -> Value {
        match self {
            Arith::Field { tower, level } => Value::Elem(tower.one(*level)),
            Arith::Poly { tower, level, .. } => Value::Poly(PolyRing::new(tower, *level).one()),
        }
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Result<Value> {
        match self {
            Arith::Field { tower, .. } => Ok(Value::Elem(tower.mul(a.as_elem()?, b.as_elem()?)?)),
            Arith::Poly { tower, level, .. } => {
                Ok(Value::Poly(PolyRing::new(tower, *level).mul(a.as_poly()?, b.as_poly()?)?))
            }
        }
    }

    /// `c · v` for `c` given by its flat coordinates at level `ground`.
    pub fn scale(&self, v: &Value, c: &[u32], ground: usize) -> Result<Value> {
        let tower = self.tower();
        let c = tower.embed(&tower.from_flat(ground, c.to_vec())?, self.level())?;
        match self {
            Arith::Field { .. } => Ok(Value::Elem(tower.mul(v.as_elem()?, &c)?)),
            Arith::Poly { level, .. } => Ok(Value::Poly(PolyRing::new(tower, *level).scale(v.as_poly()?, &c)?)),
        }
    }
}
