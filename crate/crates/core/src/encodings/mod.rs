//! Permutation encodings and the constraints that can be layered on them.
//!
//! An [`EncodingSpec`] fully determines an [`Instance`]: building the same
//! spec twice yields identical registries and polynomials, which is what
//! lets a serialized instance be re-derived and checked later.

mod binary;
mod matrix;
mod pattern;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Element, Fragment};
use crate::error::{Error, Result};
use crate::networks::Topology;
use crate::pbf::{Assignment, Bit, QuadPoly, VariableRegistry};
use crate::perm::Permutation;

pub use binary::build_perm;
pub use matrix::build_matrix;
pub use pattern::build_match;

pub const PI: &str = "pi";
pub const PI_PRIME: &str = "pi_prime";
pub const SIGMA: &str = "sigma";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Binary positions constrained by a sorting network.
    Perm,
    /// One-hot permutation matrix.
    Matrix,
    /// Binary positions plus a pattern-containment witness.
    Match,
    /// A bare polynomial with no recorded construction.
    Raw,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Perm => "perm",
            Construction::Matrix => "matrix",
            Construction::Match => "match",
            Construction::Raw => "raw",
        }
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perm" => Ok(Construction::Perm),
            "matrix" => Ok(Construction::Matrix),
            "match" => Ok(Construction::Match),
            "raw" => Ok(Construction::Raw),
            other => Err(Error::Parse(format!("unknown construction `{other}`"))),
        }
    }
}

/// A side condition on the encoded permutation(s). Positions and values are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// `group(i) = j`
    FixValue {
        group: String,
        i: usize,
        j: usize,
    },
    /// `π(i) ≠ j`
    ForbidValue {
        i: usize,
        j: usize,
    },
    /// `π(i) = i`
    FixedPoint(usize),
    /// No fixed points.
    Derangement,
    /// `π ≠ τ`
    ForbidPerm(Permutation),
    Parity {
        odd: bool,
    },
    /// `π² = id`
    Involution,
    /// `π^r = id`
    Power(usize),
    /// `π` has order exactly `r`.
    Order(usize),
    /// `σ = π′ ∘ π`, i.e. `σ(i) = π′(π(i))`.
    Compose,
    /// `π ∘ π′ = π′ ∘ π`
    Commute,
    /// `π′ = σ⁻¹ ∘ π ∘ σ`
    Conjugate,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::FixValue { group, i, j } if group == PI => write!(f, "fix:{i}={j}"),
            Constraint::FixValue { group, i, j } => write!(f, "fix:{i}={j}@{group}"),
            Constraint::ForbidValue { i, j } => write!(f, "forbid:{i}={j}"),
            Constraint::FixedPoint(i) => write!(f, "fixed-point:{i}"),
            Constraint::Derangement => write!(f, "derangement"),
            Constraint::ForbidPerm(t) => {
                let vals: Vec<String> = t.values().iter().map(|v| v.to_string()).collect();
                write!(f, "forbid-perm:{}", vals.join(","))
            }
            Constraint::Parity { odd: false } => write!(f, "even"),
            Constraint::Parity { odd: true } => write!(f, "odd"),
            Constraint::Involution => write!(f, "involution"),
            Constraint::Power(r) => write!(f, "power:{r}"),
            Constraint::Order(r) => write!(f, "order:{r}"),
            Constraint::Compose => write!(f, "compose"),
            Constraint::Commute => write!(f, "commute"),
            Constraint::Conjugate => write!(f, "conjugate"),
        }
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a positive integer, got `{s}`")))
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (i, j) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected I=J, got `{s}`")))?;
    Ok((parse_index(i)?, parse_index(j)?))
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let need =
            || arg.ok_or_else(|| Error::Parse(format!("constraint `{head}` needs an argument")));
        match head {
            "fix" => {
                let a = need()?;
                let (pair, group) = match a.split_once('@') {
                    Some((p, g)) => (p, g.to_string()),
                    None => (a, PI.to_string()),
                };
                if ![PI, PI_PRIME, SIGMA].contains(&group.as_str()) {
                    return Err(Error::Parse(format!("unknown group `{group}`")));
                }
                let (i, j) = parse_pair(pair)?;
                Ok(Constraint::FixValue { group, i, j })
            }
            "forbid" => {
                let (i, j) = parse_pair(need()?)?;
                Ok(Constraint::ForbidValue { i, j })
            }
            "fixed-point" => Ok(Constraint::FixedPoint(parse_index(need()?)?)),
            "derangement" => Ok(Constraint::Derangement),
            "forbid-perm" => Ok(Constraint::ForbidPerm(need()?.parse()?)),
            "even" => Ok(Constraint::Parity { odd: false }),
            "odd" => Ok(Constraint::Parity { odd: true }),
            "involution" => Ok(Constraint::Involution),
            "power" => Ok(Constraint::Power(parse_index(need()?)?)),
            "order" => Ok(Constraint::Order(parse_index(need()?)?)),
            "compose" => Ok(Constraint::Compose),
            "commute" => Ok(Constraint::Commute),
            "conjugate" => Ok(Constraint::Conjugate),
            other => Err(Error::Parse(format!("unknown constraint `{other}`"))),
        }
    }
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Permutation groups an instance encodes, in a fixed order.
pub fn group_names(constraints: &[Constraint]) -> Vec<&'static str> {
    let mut names = vec![PI];
    let any = |f: fn(&Constraint) -> bool| constraints.iter().any(f);
    if any(|c| {
        matches!(
            c,
            Constraint::Compose | Constraint::Commute | Constraint::Conjugate
        )
    }) {
        names.push(PI_PRIME);
    }
    if any(|c| matches!(c, Constraint::Compose | Constraint::Conjugate)) {
        names.push(SIGMA);
    }
    names
}

/// Everything needed to build an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingSpec {
    pub construction: Construction,
    pub n: usize,
    pub topology: Topology,
    pub constraints: Vec<Constraint>,
    pub pattern: Option<Permutation>,
}

impl EncodingSpec {
    pub fn perm(n: usize) -> Self {
        Self {
            construction: Construction::Perm,
            n,
            topology: Topology::default(),
            constraints: Vec::new(),
            pattern: None,
        }
    }

    pub fn matrix(n: usize) -> Self {
        Self {
            construction: Construction::Matrix,
            ..Self::perm(n)
        }
    }

    pub fn pattern_match(n: usize, pattern: Permutation) -> Self {
        Self {
            construction: Construction::Match,
            pattern: Some(pattern),
            ..Self::perm(n)
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn with(mut self, constraint: Constraint) -> Self {
        self.constraints.push(constraint);
        self
    }

    pub fn build(&self) -> Result<Instance> {
        if self.n == 0 {
            return Err(Error::OutOfRange {
                what: "n",
                value: 0,
            });
        }
        match self.construction {
            Construction::Perm => build_perm(self),
            Construction::Matrix => build_matrix(self),
            Construction::Match => build_match(self),
            Construction::Raw => Err(Error::Unsupported(
                "a raw instance cannot be rebuilt".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub construction: Construction,
    pub n: usize,
    /// Bits per position (binary) or row length (one-hot).
    pub k: usize,
    pub topology: Option<Topology>,
    /// 0-based comparator lines of the main network.
    pub gates: Vec<(usize, usize)>,
    pub constraints: Vec<Constraint>,
    pub pattern: Option<Permutation>,
}

impl Meta {
    pub fn spec(&self) -> EncodingSpec {
        EncodingSpec {
            construction: self.construction,
            n: self.n,
            topology: self.topology.unwrap_or_default(),
            constraints: self.constraints.clone(),
            pattern: self.pattern.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Binary,
    Onehot,
}

/// The bits of one encoded permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// `positions[i]` are the bits describing `π(i + 1)`: binary value
    /// (least significant first) or one-hot row.
    pub positions: Vec<Vec<Bit>>,
    /// Whether the group's variables are independent inputs.
    pub free: bool,
    /// Whether every zero of the polynomial decodes this group to a valid
    /// permutation, so that enumerating permutations finds every zero.
    pub perm_certified: bool,
}

impl Group {
    pub fn vars(&self) -> impl Iterator<Item = crate::pbf::VarId> + '_ {
        self.positions.iter().flatten().filter_map(|b| b.var())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decode {
    pub representation: Representation,
    pub groups: BTreeMap<String, Group>,
    /// Pattern-selection bits (`0` marks a selected position).
    pub selection: Option<Vec<Bit>>,
}

impl Decode {
    /// Decodes one position; `None` if a bit is unassigned.
    fn position(&self, bits: &[Bit], asg: &Assignment) -> Option<u64> {
        match self.representation {
            Representation::Binary => {
                let mut v = 0u64;
                for (i, b) in bits.iter().enumerate() {
                    if b.get(asg)? {
                        v |= 1 << i;
                    }
                }
                Some(v)
            }
            Representation::Onehot => {
                let mut hot = None;
                for (j, b) in bits.iter().enumerate() {
                    if b.get(asg)? {
                        if hot.is_some() {
                            return Some(0);
                        }
                        hot = Some(j as u64 + 1);
                    }
                }
                Some(hot.unwrap_or(0))
            }
        }
    }

    /// Raw decoded values of a group, possibly out of range.
    pub fn values(&self, group: &str, asg: &Assignment) -> Result<Vec<u64>> {
        let g = self
            .groups
            .get(group)
            .ok_or_else(|| Error::Parse(format!("no group `{group}`")))?;
        g.positions
            .iter()
            .map(|bits| {
                self.position(bits, asg).ok_or_else(|| {
                    let v = bits
                        .iter()
                        .find_map(|b| b.var().filter(|&v| asg.get(v).is_none()));
                    Error::Unassigned(v.unwrap_or(crate::pbf::VarId(0)))
                })
            })
            .collect()
    }

    pub fn permutation(&self, group: &str, asg: &Assignment) -> Result<Permutation> {
        let values = self.values(group, asg)?;
        let n = values.len();
        for (position, &value) in values.iter().enumerate() {
            if value == 0 || value as usize > n {
                return Err(Error::Decode {
                    position: position + 1,
                    value,
                    n,
                });
            }
        }
        Permutation::new(values.into_iter().map(|v| v as usize).collect())
    }

    /// Every group decoded as a permutation.
    pub fn solution(&self, asg: &Assignment) -> Result<Solution> {
        self.groups
            .keys()
            .map(|name| Ok((name.clone(), self.permutation(name, asg)?)))
            .collect()
    }
}

/// Decoded permutations keyed by group name.
pub type Solution = BTreeMap<String, Permutation>;

/// A built encoding: the polynomial, its variables and how to read it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub meta: Meta,
    pub registry: VariableRegistry,
    pub poly: QuadPoly,
    /// Gadget records; empty for instances read without rebuilding.
    pub elements: Vec<Element>,
    /// Polynomial contributed by each element.
    pub parts: Vec<QuadPoly>,
    pub decode: Decode,
}

impl Instance {
    pub(crate) fn from_fragment(
        meta: Meta,
        registry: VariableRegistry,
        fragment: Fragment,
        decode: Decode,
    ) -> Self {
        Self {
            meta,
            registry,
            poly: fragment.poly,
            elements: fragment.elements,
            parts: fragment.parts,
            decode,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.registry.len()
    }

    /// Variables whose values are chosen independently: the bits of free
    /// groups and the selection bits.
    pub fn free_vars(&self) -> Vec<crate::pbf::VarId> {
        let mut vars: Vec<_> = self
            .decode
            .groups
            .values()
            .filter(|g| g.free)
            .flat_map(|g| g.vars().collect::<Vec<_>>())
            .collect();
        if let Some(sel) = &self.decode.selection {
            vars.extend(sel.iter().filter_map(|b| b.var()));
        }
        vars.sort();
        vars.dedup();
        vars
    }
}

/// Checks `1 ≤ i, j ≤ n`.
pub(crate) fn check_index(what: &'static str, value: usize, n: usize) -> Result<()> {
    if value == 0 || value > n {
        return Err(Error::OutOfRange {
            what,
            value: value as i64,
        });
    }
    Ok(())
}

/// Pins requested by `fix` and `fixed-point` constraints, per group.
pub(crate) fn pins(spec: &EncodingSpec) -> Result<BTreeMap<(String, usize), usize>> {
    let mut out = BTreeMap::new();
    for c in &spec.constraints {
        let (group, i, j) = match c {
            Constraint::FixValue { group, i, j } => (group.clone(), *i, *j),
            Constraint::FixedPoint(i) => (PI.to_string(), *i, *i),
            _ => continue,
        };
        check_index("position", i, spec.n)?;
        check_index("value", j, spec.n)?;
        if let Some(&prev) = out.get(&(group.clone(), i)) {
            if prev != j {
                return Err(Error::Unsupported(format!(
                    "position {i} of {group} is pinned to both {prev} and {j}"
                )));
            }
        }
        out.insert((group, i), j);
    }
    Ok(out)
}
