//! JSON form of testers. Nodes carry construction parameters, not applied values, so a
//! document is small and rebuilding it repeats the construction.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value as Json};

use super::{
    compose, explicit_tester, lift_tester, product, AtomicMap, Domain, Family, Flags, Node,
    PolyClass, Tester,
};
use crate::constructions::{crt_reduction_tester, evaluation_on_slice, evaluation_tester_at};
use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement, FieldTower};
use crate::rational::Rational;

pub const SCHEMA_VERSION: u64 = 1;
pub const MAX_SCHEMA_VERSION: u64 = 1;

pub fn to_json(t: &Tester) -> Json {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("tower_signature".into(), json!(t.source.tower().signature()));
    doc.insert("target_tower_signature".into(), json!(t.target.tower().signature()));
    doc.insert("source_level".into(), json!(t.source.level()));
    doc.insert("target_level".into(), json!(t.target.level()));
    doc.insert("source_len".into(), domain_len(&t.source));
    doc.insert("target_len".into(), domain_len(&t.target));
    doc.insert("ground_level".into(), json!(t.ground));
    doc.insert("class".into(), class_json(&t.class));
    doc.insert("epsilon".into(), rational_json(&t.epsilon));
    doc.insert("blocks".into(), json!(t.blocks));
    doc.insert("size".into(), u128_json(t.size));
    doc.insert(
        "flags".into(),
        json!({
            "componentwise": t.flags.componentwise,
            "linear": t.flags.linear,
            "reducible": t.flags.reducible,
            "symmetric": t.flags.symmetric,
        }),
    );
    let construction = match &t.node {
        Node::Lift => json!({"kind": "lift", "params": {}}),
        Node::Evaluation { points, infinity, lifted, class } => json!({
            "kind": "evaluation",
            "params": {
                "r": u128_json(points + *infinity as u128),
                "lifted": lifted,
                "class": class_json(class),
            }
        }),
        Node::Crt(c) => json!({
            "kind": "crt",
            "params": {
                "q": c.q, "t": c.t, "k": c.k, "d": c.d,
                "eps1": rational_json(&c.eps1),
                "sourcing": c.sourcing.to_string(),
            }
        }),
        Node::Compose(a, b) => json!({
            "kind": "compose",
            "params": {"first": to_json(a), "second": to_json(b)}
        }),
        Node::Product(a, b) => json!({
            "kind": "product",
            "params": {"left": to_json(a), "right": to_json(b)}
        }),
        Node::Explicit(maps) => {
            let rows: Vec<Json> = maps
                .iter()
                .map(|row| Json::Array(row.iter().map(map_json).collect()))
                .collect();
            json!({"kind": "explicit", "params": {"maps": rows}})
        }
    };
    doc.insert("construction".into(), construction);
    Json::Object(doc)
}

fn domain_len(d: &Domain) -> Json {
    match d {
        Domain::Field(_) => Json::Null,
        Domain::Poly { len, .. } => json!(len),
    }
}

fn class_json(c: &PolyClass) -> Json {
    json!({
        "family": c.family.to_string(),
        "n": c.n,
        "d": c.d,
        "cap": c.variable_degree_cap,
    })
}

fn bigint_json(v: &BigInt) -> Json {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn rational_json(r: &Rational) -> Json {
    json!({"num": bigint_json(r.numer()), "den": bigint_json(r.denom())})
}

fn field_json(f: &Field) -> Json {
    json!({"tower": f.tower.signature(), "level": f.level})
}

fn elem_json(e: &FieldElement) -> Json {
    json!(e.flat())
}

fn map_json(m: &AtomicMap) -> Json {
    match m {
        AtomicMap::Lift { field } => json!({"kind": "lift", "field": field_json(field)}),
        AtomicMap::Evaluate { field, point } => {
            json!({"kind": "evaluate", "field": field_json(field), "point": elem_json(point)})
        }
        AtomicMap::CoefficientAt { field, j } => {
            json!({"kind": "coefficient", "field": field_json(field), "j": j})
        }
        AtomicMap::Functional { field, weights } => json!({
            "kind": "functional",
            "field": field_json(field),
            "weights": weights.iter().map(elem_json).collect::<Vec<_>>(),
        }),
        AtomicMap::Chain(maps) => {
            json!({"kind": "chain", "maps": maps.iter().map(map_json).collect::<Vec<_>>()})
        }
    }
}

/// Parses a document produced by [`to_json`]. The construction is rebuilt from its
/// parameters and then relabeled with the document's failure bound, class and flags, which
/// may only be weaker than what the construction guarantees.
pub fn from_json(text: &str) -> Result<Tester> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Error::MalformedInput {
        offset: offset_of(text, e.line(), e.column()),
        reason: e.to_string(),
    })?;
    let mut cx = Parser { towers: HashMap::new() };
    cx.tester(&doc, "$")
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn malformed(path: &str, reason: impl std::fmt::Display) -> Error {
    Error::MalformedInput { offset: 0, reason: format!("{path}: {reason}") }
}

struct Parser {
    towers: HashMap<String, Arc<FieldTower>>,
}

impl Parser {
    fn tower(&mut self, sig: &str, path: &str) -> Result<Arc<FieldTower>> {
        if let Some(t) = self.towers.get(sig) {
            return Ok(t.clone());
        }
        let t = Arc::new(FieldTower::from_signature(sig).map_err(|e| malformed(path, e))?);
        self.towers.insert(sig.to_string(), t.clone());
        Ok(t)
    }

    fn field(&mut self, v: &Json, path: &str) -> Result<Field> {
        let sig = get_str(v, "tower", path)?;
        let tower = self.tower(sig, path)?;
        let level = get_usize(v, "level", path)?;
        Field::new(tower, level).map_err(|e| malformed(path, e))
    }

    fn domain(&mut self, doc: &Json, which: &str, path: &str) -> Result<Domain> {
        let sig_key = if which == "source" { "tower_signature" } else { "target_tower_signature" };
        let tower = self.tower(get_str(doc, sig_key, path)?, path)?;
        let level = get_usize(doc, &format!("{which}_level"), path)?;
        let field = Field::new(tower, level).map_err(|e| malformed(path, e))?;
        match doc.get(format!("{which}_len")) {
            None | Some(Json::Null) => Ok(Domain::Field(field)),
            Some(v) => {
                let len = v.as_u64().ok_or_else(|| malformed(path, format!("{which}_len")))?;
                Ok(Domain::Poly { coeff: field, len: len as usize })
            }
        }
    }

    fn tester(&mut self, doc: &Json, path: &str) -> Result<Tester> {
        let version = get_u64(doc, "schema_version", path)?;
        if version == 0 || version > MAX_SCHEMA_VERSION {
            return Err(malformed(path, format!("unsupported schema_version {version}")));
        }
        let source = self.domain(doc, "source", path)?;
        let target = self.domain(doc, "target", path)?;
        let ground = get_usize(doc, "ground_level", path)?;
        let class = parse_class(get(doc, "class", path)?, &format!("{path}.class"))?;
        let epsilon = parse_rational(get(doc, "epsilon", path)?, &format!("{path}.epsilon"))?;
        let blocks = get_usize(doc, "blocks", path)?;
        let size = parse_u128(get(doc, "size", path)?, &format!("{path}.size"))?;
        let flags = parse_flags(get(doc, "flags", path)?, &format!("{path}.flags"))?;
        let cons = get(doc, "construction", path)?;
        let cpath = format!("{path}.construction");
        let kind = get_str(cons, "kind", &cpath)?;
        let params = get(cons, "params", &cpath)?;
        let ppath = format!("{cpath}.params");
        let rebuilt = match kind {
            "lift" => {
                let f = source.field();
                lift_tester(f.tower.clone(), f.level, class.clone())
            }
            "evaluation" => {
                let r = parse_u128(get(params, "r", &ppath)?, &ppath)?;
                let lifted = get(params, "lifted", &ppath)?
                    .as_bool()
                    .ok_or_else(|| malformed(&ppath, "lifted must be a boolean"))?;
                let own = parse_class(get(params, "class", &ppath)?, &ppath)?;
                if lifted {
                    evaluation_tester_at(source.field().clone(), r, own)
                } else {
                    match &source {
                        Domain::Poly { coeff, len } => evaluation_on_slice(coeff.clone(), *len, r, own),
                        Domain::Field(_) => Err(malformed(&ppath, "unlifted evaluation needs a polynomial source")),
                    }
                }
            }
            "crt" => {
                let q = get_u64(params, "q", &ppath)?;
                let t = get_usize(params, "t", &ppath)?;
                let k = get_usize(params, "k", &ppath)?;
                let d = get_usize(params, "d", &ppath)?;
                let eps1 = parse_rational(get(params, "eps1", &ppath)?, &ppath)?;
                crt_reduction_tester(q, t, k, d, &eps1)
            }
            "compose" => {
                let a = self.tester(get(params, "first", &ppath)?, &format!("{ppath}.first"))?;
                let b = self.tester(get(params, "second", &ppath)?, &format!("{ppath}.second"))?;
                compose(&a, &b)
            }
            "product" => {
                let a = self.tester(get(params, "left", &ppath)?, &format!("{ppath}.left"))?;
                let b = self.tester(get(params, "right", &ppath)?, &format!("{ppath}.right"))?;
                product(&a, &b)
            }
            "explicit" => {
                let rows = get(params, "maps", &ppath)?
                    .as_array()
                    .ok_or_else(|| malformed(&ppath, "maps must be an array"))?;
                let mut maps = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let rpath = format!("{ppath}.maps[{i}]");
                    let row = row.as_array().ok_or_else(|| malformed(&rpath, "expected an array"))?;
                    maps.push(row.iter().map(|m| self.map(m, &rpath)).collect::<Result<Vec<_>>>()?);
                }
                explicit_tester(source.clone(), target.clone(), ground, maps, epsilon.clone(), class.clone())
            }
            other => return Err(malformed(&cpath, format!("unknown construction kind {other:?}"))),
        }
        .map_err(|e| match e {
            e @ Error::MalformedInput { .. } => e,
            e => malformed(&cpath, e),
        })?;
        if rebuilt.source != source || rebuilt.target != target {
            return Err(malformed(path, "domains differ from the construction"));
        }
        if rebuilt.size != size || rebuilt.blocks != blocks || rebuilt.ground != ground {
            return Err(malformed(path, "size, blocks or ground level differ from the construction"));
        }
        if !flags.implied_by(rebuilt.flags) {
            return Err(malformed(path, "flags claim more than the construction guarantees"));
        }
        let class_arg = (class != rebuilt.class).then_some(&class);
        let out = rebuilt.weaken(&epsilon, class_arg).map_err(|e| malformed(path, e))?;
        Ok(out.restrict_flags(flags))
    }

    fn map(&mut self, v: &Json, path: &str) -> Result<AtomicMap> {
        let kind = get_str(v, "kind", path)?;
        if kind == "chain" {
            let maps = get(v, "maps", path)?
                .as_array()
                .ok_or_else(|| malformed(path, "maps must be an array"))?;
            return Ok(AtomicMap::Chain(maps.iter().map(|m| self.map(m, path)).collect::<Result<_>>()?));
        }
        let field = self.field(get(v, "field", path)?, path)?;
        match kind {
            "lift" => Ok(AtomicMap::Lift { field }),
            "evaluate" => {
                let point = parse_elem(&field, get(v, "point", path)?, path)?;
                Ok(AtomicMap::Evaluate { field, point })
            }
            "coefficient" => Ok(AtomicMap::CoefficientAt { j: get_usize(v, "j", path)?, field }),
            "functional" => {
                let ws = get(v, "weights", path)?
                    .as_array()
                    .ok_or_else(|| malformed(path, "weights must be an array"))?;
                let weights = ws.iter().map(|w| parse_elem(&field, w, path)).collect::<Result<_>>()?;
                Ok(AtomicMap::Functional { field, weights })
            }
            other => Err(malformed(path, format!("unknown map kind {other:?}"))),
        }
    }
}

fn get<'a>(v: &'a Json, key: &str, path: &str) -> Result<&'a Json> {
    v.get(key).ok_or_else(|| malformed(path, format!("missing field {key:?}")))
}

fn get_str<'a>(v: &'a Json, key: &str, path: &str) -> Result<&'a str> {
    get(v, key, path)?.as_str().ok_or_else(|| malformed(path, format!("{key} must be a string")))
}

fn get_u64(v: &Json, key: &str, path: &str) -> Result<u64> {
    get(v, key, path)?.as_u64().ok_or_else(|| malformed(path, format!("{key} must be a non-negative integer")))
}

fn get_usize(v: &Json, key: &str, path: &str) -> Result<usize> {
    Ok(get_u64(v, key, path)? as usize)
}

fn parse_u128(v: &Json, path: &str) -> Result<u128> {
    match v {
        Json::Number(n) => n.as_u64().map(u128::from),
        Json::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| malformed(path, "expected a non-negative integer"))
}

fn parse_bigint(v: &Json, path: &str) -> Result<BigInt> {
    match v {
        Json::Number(n) => n.as_i64().map(BigInt::from),
        Json::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| malformed(path, "expected an integer"))
}

fn parse_rational(v: &Json, path: &str) -> Result<Rational> {
    let num = parse_bigint(get(v, "num", path)?, path)?;
    let den = parse_bigint(get(v, "den", path)?, path)?;
    if den == BigInt::from(0) {
        return Err(malformed(path, "zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn parse_class(v: &Json, path: &str) -> Result<PolyClass> {
    let family = Family::parse(get_str(v, "family", path)?).map_err(|e| malformed(path, e))?;
    let mut c = PolyClass::new(family, get_usize(v, "n", path)?, get_usize(v, "d", path)?)
        .map_err(|e| malformed(path, e))?;
    c.variable_degree_cap = match v.get("cap") {
        None | Some(Json::Null) => None,
        Some(x) => Some(x.as_u64().ok_or_else(|| malformed(path, "cap must be an integer"))? as usize),
    };
    Ok(c)
}

fn parse_flags(v: &Json, path: &str) -> Result<Flags> {
    let b = |key: &str| {
        get(v, key, path)?.as_bool().ok_or_else(|| malformed(path, format!("{key} must be a boolean")))
    };
    Ok(Flags {
        componentwise: b("componentwise")?,
        linear: b("linear")?,
        reducible: b("reducible")?,
        symmetric: b("symmetric")?,
    })
}

fn parse_elem(field: &Field, v: &Json, path: &str) -> Result<FieldElement> {
    let coeffs = v
        .as_array()
        .ok_or_else(|| malformed(path, "element must be an array"))?
        .iter()
        .map(|c| c.as_u64().map(|x| x as u32))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| malformed(path, "element coefficients must be integers"))?;
    field.tower.from_flat(field.level, coeffs).map_err(|e| malformed(path, e))
}

fn u128_json(v: u128) -> Json {
    match u64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}
