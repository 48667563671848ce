//! Instance files and solver export formats.
//!
//! Instances are JSON documents with sorted keys, so the same instance
//! always serializes to the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use serde_json::{json, Map, Value};

use crate::encodings::{Construction, Decode, Group, Instance, Meta, Representation};
use crate::error::{Error, Result};
use crate::pbf::{Bit, QuadPoly, Role, VarId, VariableRegistry};

pub const SCHEMA_VERSION: u64 = 1;

fn bit_json(b: &Bit) -> Value {
    match b {
        Bit::Const(false) => json!("0"),
        Bit::Const(true) => json!("1"),
        Bit::Var(v) => json!(v.0),
        Bit::NegVar(v) => json!(format!("~{}", v.0)),
    }
}

fn bit_from_json(v: &Value) -> Result<Bit> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(|id| Bit::Var(VarId(id as u32)))
            .ok_or_else(|| Error::Parse(format!("bad variable id {n}"))),
        Value::String(s) if s == "0" => Ok(Bit::ZERO),
        Value::String(s) if s == "1" => Ok(Bit::ONE),
        Value::String(s) if s.starts_with('~') => s[1..]
            .parse()
            .map(|id| Bit::NegVar(VarId(id)))
            .map_err(|_| Error::Parse(format!("bad literal `{s}`"))),
        other => Err(Error::Parse(format!("bad bit {other}"))),
    }
}

fn positions_json(positions: &[Vec<Bit>]) -> Value {
    Value::Array(
        positions
            .iter()
            .map(|bits| Value::Array(bits.iter().map(bit_json).collect()))
            .collect(),
    )
}

fn positions_from_json(v: &Value) -> Result<Vec<Vec<Bit>>> {
    as_array(v, "positions")?
        .iter()
        .map(|bits| {
            as_array(bits, "position")?
                .iter()
                .map(bit_from_json)
                .collect()
        })
        .collect()
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("`{what}` must be an array")))
}

fn as_i64(v: &Value, what: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::Parse(format!("`{what}` must be an integer")))
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

pub fn to_json(instance: &Instance) -> Result<Value> {
    let variables: Vec<Value> = instance
        .registry
        .iter()
        .map(|(id, info)| json!({"id": id.0, "name": info.name, "role": info.role.as_str()}))
        .collect();
    let linear: Vec<Value> = instance
        .poly
        .linear()
        .map(|(v, c)| json!([v.0, c]))
        .collect();
    let quadratic: Vec<Value> = instance
        .poly
        .quadratic()
        .map(|((a, b), c)| json!([a.0, b.0, c]))
        .collect();

    let mut decode = Map::new();
    decode.insert(
        "representation".into(),
        serde_json::to_value(instance.decode.representation)?,
    );
    if let Some(pi) = instance.decode.groups.get(crate::encodings::PI) {
        decode.insert("positions".into(), positions_json(&pi.positions));
    }
    let groups: Map<String, Value> = instance
        .decode
        .groups
        .iter()
        .map(|(name, g)| {
            let v = json!({
                "positions": positions_json(&g.positions),
                "free": g.free,
                "perm_certified": g.perm_certified,
            });
            (name.clone(), v)
        })
        .collect();
    decode.insert("groups".into(), Value::Object(groups));
    if let Some(sel) = &instance.decode.selection {
        decode.insert(
            "selection".into(),
            Value::Array(sel.iter().map(bit_json).collect()),
        );
    }

    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "meta": serde_json::to_value(&instance.meta)?,
        "variables": variables,
        "offset": instance.poly.offset(),
        "linear": linear,
        "quadratic": quadratic,
        "decode": Value::Object(decode),
    }))
}

/// Canonical text form of an instance.
pub fn to_string(instance: &Instance) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_json(instance)?)?;
    s.push('\n');
    Ok(s)
}

/// Reads an instance. Element records are not stored in files; rebuild
/// from `meta` to obtain them.
pub fn from_json(v: &Value) -> Result<Instance> {
    let version = field(v, "schema_version")?.as_u64();
    if version != Some(SCHEMA_VERSION) {
        return Err(Error::Parse(format!(
            "unsupported schema version {version:?}"
        )));
    }
    let meta: Meta = match v.get("meta") {
        Some(m) if !m.is_null() => serde_json::from_value(m.clone())?,
        _ => Meta {
            construction: Construction::Raw,
            n: 0,
            k: 0,
            topology: None,
            gates: Vec::new(),
            constraints: Vec::new(),
            pattern: None,
        },
    };

    let mut registry = VariableRegistry::new();
    for (expected, var) in as_array(field(v, "variables")?, "variables")?
        .iter()
        .enumerate()
    {
        let id = as_i64(field(var, "id")?, "id")?;
        if id != expected as i64 {
            return Err(Error::Parse(format!(
                "variable ids must be dense, found {id} at {expected}"
            )));
        }
        let name = field(var, "name")?
            .as_str()
            .ok_or_else(|| Error::Parse("`name` must be a string".into()))?;
        let role: Role = serde_json::from_value(field(var, "role")?.clone())?;
        registry.alloc(name, role)?;
    }

    let in_range = |id: i64| -> Result<VarId> {
        if id < 0 || id as usize >= registry.len() {
            return Err(Error::Parse(format!("variable id {id} is not declared")));
        }
        Ok(VarId(id as u32))
    };
    let mut poly = QuadPoly::constant(as_i64(field(v, "offset")?, "offset")?);
    for term in as_array(field(v, "linear")?, "linear")? {
        let t = as_array(term, "linear term")?;
        if t.len() != 2 {
            return Err(Error::Parse("linear terms are [id, coefficient]".into()));
        }
        poly.add_linear(
            in_range(as_i64(&t[0], "id")?)?,
            as_i64(&t[1], "coefficient")?,
        );
    }
    for term in as_array(field(v, "quadratic")?, "quadratic")? {
        let t = as_array(term, "quadratic term")?;
        if t.len() != 3 {
            return Err(Error::Parse(
                "quadratic terms are [id, id, coefficient]".into(),
            ));
        }
        poly.add_quadratic(
            in_range(as_i64(&t[0], "id")?)?,
            in_range(as_i64(&t[1], "id")?)?,
            as_i64(&t[2], "coefficient")?,
        );
    }

    let decode = match v.get("decode") {
        Some(d) if !d.is_null() => {
            let representation: Representation =
                serde_json::from_value(field(d, "representation")?.clone())?;
            let mut groups = BTreeMap::new();
            if let Some(Value::Object(gs)) = d.get("groups") {
                for (name, g) in gs {
                    groups.insert(
                        name.clone(),
                        Group {
                            positions: positions_from_json(field(g, "positions")?)?,
                            free: field(g, "free")?.as_bool().unwrap_or(true),
                            perm_certified: field(g, "perm_certified")?.as_bool().unwrap_or(false),
                        },
                    );
                }
            } else if let Some(p) = d.get("positions") {
                groups.insert(
                    crate::encodings::PI.to_string(),
                    Group {
                        positions: positions_from_json(p)?,
                        free: true,
                        perm_certified: false,
                    },
                );
            }
            let selection = match d.get("selection") {
                Some(Value::Array(bits)) => {
                    Some(bits.iter().map(bit_from_json).collect::<Result<_>>()?)
                }
                _ => None,
            };
            Decode {
                representation,
                groups,
                selection,
            }
        }
        _ => Decode {
            representation: Representation::Binary,
            groups: BTreeMap::new(),
            selection: None,
        },
    };

    Ok(Instance {
        meta,
        registry,
        poly,
        elements: Vec::new(),
        parts: Vec::new(),
        decode,
    })
}

pub fn from_str(s: &str) -> Result<Instance> {
    from_json(&serde_json::from_str(s)?)
}

/// qbsolv-style QUBO text. Node count is the number of declared variables;
/// the constant offset is kept in a comment.
pub fn to_qubo(poly: &QuadPoly, num_vars: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "c QUBO: minimise offset + sum of the listed terms");
    let _ = writeln!(out, "c offset {}", poly.offset());
    let _ = writeln!(
        out,
        "p qubo 0 {num_vars} {} {}",
        poly.num_linear(),
        poly.num_quadratic()
    );
    for (v, c) in poly.linear() {
        let _ = writeln!(out, "{} {} {c}", v.0, v.0);
    }
    for ((a, b), c) in poly.quadratic() {
        let _ = writeln!(out, "{} {} {c}", a.0, b.0);
    }
    out
}

/// Spin form of a QUBO under `x = (1 + s) / 2`, with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ising {
    pub h: BTreeMap<VarId, Ratio<i64>>,
    pub j: BTreeMap<(VarId, VarId), Ratio<i64>>,
    pub offset: Ratio<i64>,
}

impl Ising {
    pub fn from_qubo(poly: &QuadPoly) -> Self {
        let half = Ratio::new(1, 2);
        let quarter = Ratio::new(1, 4);
        let mut h: BTreeMap<VarId, Ratio<i64>> = BTreeMap::new();
        let mut j = BTreeMap::new();
        let mut offset = Ratio::from_integer(poly.offset());
        for (v, c) in poly.linear() {
            *h.entry(v).or_default() += half * c;
            offset += half * c;
        }
        for ((a, b), c) in poly.quadratic() {
            let q = quarter * c;
            *h.entry(a).or_default() += q;
            *h.entry(b).or_default() += q;
            j.insert((a, b), q);
            offset += q;
        }
        h.retain(|_, c| *c != Ratio::from_integer(0));
        Self { h, j, offset }
    }

    /// Energy at spins `s(v) ∈ {−1, +1}`.
    pub fn energy(&self, spin: impl Fn(VarId) -> i64) -> Ratio<i64> {
        let mut e = self.offset;
        for (&v, &c) in &self.h {
            e += c * spin(v);
        }
        for (&(a, b), &c) in &self.j {
            e += c * (spin(a) * spin(b));
        }
        e
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "c Ising: minimise offset + sum h_i s_i + sum J_ij s_i s_j, x = (1 + s) / 2"
        );
        let _ = writeln!(out, "c offset {}", self.offset);
        let _ = writeln!(out, "p ising {} {}", self.h.len(), self.j.len());
        for (v, c) in &self.h {
            let _ = writeln!(out, "h {} {c}", v.0);
        }
        for ((a, b), c) in &self.j {
            let _ = writeln!(out, "J {} {} {c}", a.0, b.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::EncodingSpec;

    #[test]
    fn json_round_trip_is_byte_identical() {
        for spec in [
            EncodingSpec::perm(3).with("even".parse().unwrap()),
            EncodingSpec::matrix(3).with("fix:1=2".parse().unwrap()),
            EncodingSpec::pattern_match(3, "2,1".parse().unwrap()),
        ] {
            let inst = spec.build().unwrap();
            let text = to_string(&inst).unwrap();
            let back = from_str(&text).unwrap();
            assert_eq!(back.poly, inst.poly);
            assert_eq!(back.registry, inst.registry);
            assert_eq!(back.decode, inst.decode);
            assert_eq!(back.meta, inst.meta);
            assert_eq!(to_string(&back).unwrap(), text);
        }
    }

    #[test]
    fn ising_energies_match_qubo() {
        let mut p = QuadPoly::constant(3);
        p.add_linear(VarId(0), -3);
        p.add_linear(VarId(1), 1);
        p.add_quadratic(VarId(0), VarId(1), 5);
        p.add_quadratic(VarId(1), VarId(2), -2);
        let ising = Ising::from_qubo(&p);
        for mask in 0..8u32 {
            let x = |v: VarId| (mask >> v.0) & 1 == 1;
            let asg = crate::pbf::Assignment::from_pairs((0..3).map(|i| (VarId(i), x(VarId(i)))));
            let e = ising.energy(|v| if x(v) { 1 } else { -1 });
            assert_eq!(e, Ratio::from_integer(p.eval(&asg).unwrap()));
        }
    }
}
