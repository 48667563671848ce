//! Zero-set verification.
//!
//! Small polynomials are enumerated outright. Larger instances are checked
//! in three steps:
//!
//! 1. every element's own polynomial is certified by enumeration: for each
//!    assignment of its relation variables the minimum over its auxiliaries
//!    is zero with a unique minimiser when the relation holds and positive
//!    otherwise;
//! 2. for each point of the input domain, element propagation fills in the
//!    remaining variables and the polynomial is evaluated;
//! 3. zeros are decoded and tallied per solution.
//!
//! Since the polynomial is a sum of non-negative element polynomials with
//! disjoint auxiliaries, step 1 makes the zero completion of a point unique
//! whenever the elements' relation variables are determined by the inputs,
//! which holds for network constructions because every gate maps its inputs
//! to its outputs and payload columns are permuted bijectively.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::circuit::{Element, RegisterRule};
use crate::dense::Dense;
use crate::encodings::{Instance, Representation, Solution};
use crate::error::{Error, Result};
use crate::pbf::{Assignment, Bit, LinExpr, QuadPoly, VarId};
use crate::perm::Permutation;

/// Default cap on the number of variables enumerated exhaustively.
pub const DEFAULT_ENUM_CAP: usize = 24;

/// The enumeration cap, overridable through `PERMQUBO_ENUM_CAP`.
pub fn enum_cap() -> usize {
    std::env::var("PERMQUBO_ENUM_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Free-variable count up to which the input domain is every 0/1 point;
    /// beyond it permutation-certified groups range over permutations only.
    pub domain_bits: usize,
    /// Largest relation-plus-auxiliary count certified by enumeration.
    pub certificate_bits: usize,
    /// Largest number of input points enumerated.
    pub max_points: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            domain_bits: 16,
            certificate_bits: 26,
            max_points: 50_000_000,
        }
    }
}

/// All zeros of `poly` over `vars`, by Gray-code enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSet {
    pub vars: Vec<VarId>,
    pub minimum: i64,
    /// Zero points, each a value per entry of `vars`, sorted.
    pub zeros: Vec<Vec<bool>>,
}

pub fn zero_set_exhaustive(poly: &QuadPoly, vars: &[VarId], cap: usize) -> Result<ZeroSet> {
    let n = vars.len();
    if n > cap {
        return Err(Error::CapExceeded { vars: n, cap });
    }
    let dense = Dense::new(poly, vars)?;
    let split = n.min(6);
    let low = n - split;
    let chunks: Vec<(i64, Vec<Vec<bool>>)> = (0u64..1 << split)
        .into_par_iter()
        .map(|hi| {
            let mut x = vec![false; n];
            for b in 0..split {
                x[low + b] = (hi >> b) & 1 == 1;
            }
            let mut e = dense.energy(&x);
            let mut min = e;
            let mut zeros = Vec::new();
            if e == 0 {
                zeros.push(x.clone());
            }
            for step in 1u64..1 << low {
                let i = step.trailing_zeros() as usize;
                e += dense.delta(&x, i);
                x[i] = !x[i];
                min = min.min(e);
                if e == 0 {
                    zeros.push(x.clone());
                }
            }
            (min, zeros)
        })
        .collect();
    let minimum = chunks.iter().map(|c| c.0).min().unwrap_or(poly.offset());
    let mut zeros: Vec<Vec<bool>> = chunks.into_iter().flat_map(|c| c.1).collect();
    zeros.sort();
    Ok(ZeroSet {
        vars: vars.to_vec(),
        minimum,
        zeros,
    })
}

/// Per-kind summary of the certified elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CertificateReport {
    /// Element kind (as displayed) to number of elements of that kind.
    pub kinds: BTreeMap<String, usize>,
    /// Distinct polynomials that were enumerated.
    pub distinct: usize,
}

fn failed(element: &Element, detail: impl Into<String>) -> Error {
    Error::CertificateFailed {
        kind: element.kind().to_string(),
        detail: detail.into(),
    }
}

/// Checks the structure of an instance and certifies each element.
pub fn certify(instance: &Instance, opts: &VerifyOptions) -> Result<CertificateReport> {
    if instance.elements.len() != instance.parts.len() {
        return Err(Error::Unsupported(
            "instance has no element records; rebuild it from its metadata".into(),
        ));
    }
    let mut sum = QuadPoly::zero();
    for part in &instance.parts {
        sum.add_poly(part);
    }
    if sum != instance.poly {
        return Err(Error::CertificateFailed {
            kind: "instance".into(),
            detail: "element polynomials do not add up to the instance polynomial".into(),
        });
    }

    let mut relation_vars: BTreeSet<VarId> = BTreeSet::new();
    for e in &instance.elements {
        relation_vars.extend(e.relation_bits().iter().filter_map(|b| b.var()));
    }
    let mut owner: HashMap<VarId, usize> = HashMap::new();
    for (idx, e) in instance.elements.iter().enumerate() {
        for v in e.aux_vars() {
            if relation_vars.contains(&v) || owner.insert(v, idx).is_some() {
                return Err(failed(e, format!("auxiliary {v} is shared")));
            }
        }
    }

    let mut report = CertificateReport::default();
    let mut seen: HashMap<(Element, QuadPoly), ()> = HashMap::new();
    for (e, part) in instance.elements.iter().zip(&instance.parts) {
        *report.kinds.entry(e.kind().to_string()).or_insert(0) += 1;
        let (ce, cp, r, a) = canonical(e, part)?;
        if seen.contains_key(&(ce.clone(), cp.clone())) {
            continue;
        }
        certify_canonical(&ce, &cp, r, a, opts)?;
        seen.insert((ce, cp), ());
        report.distinct += 1;
    }
    Ok(report)
}

/// Renames relation variables to `0..r` and auxiliaries to `r..r+a`.
fn canonical(e: &Element, part: &QuadPoly) -> Result<(Element, QuadPoly, usize, usize)> {
    let mut map: HashMap<VarId, VarId> = HashMap::new();
    for v in e.relation_bits().iter().filter_map(|b| b.var()) {
        let next = VarId(map.len() as u32);
        map.entry(v).or_insert(next);
    }
    let r = map.len();
    for v in e.aux_vars() {
        let next = VarId(map.len() as u32);
        map.entry(v).or_insert(next);
    }
    let a = map.len() - r;
    for v in part.variables() {
        if !map.contains_key(&v) {
            return Err(failed(
                e,
                format!("polynomial mentions foreign variable {v}"),
            ));
        }
    }
    let f = |v: VarId| map[&v];
    Ok((e.map_vars(&f), part.relabel(f), r, a))
}

fn certify_canonical(
    e: &Element,
    poly: &QuadPoly,
    r: usize,
    a: usize,
    opts: &VerifyOptions,
) -> Result<()> {
    match e {
        Element::Square { expr } => {
            if *poly != QuadPoly::lin_square(expr) {
                return Err(failed(e, "polynomial is not the square of its expression"));
            }
            Ok(())
        }
        Element::Register {
            rule,
            bits,
            register,
        } => {
            let offset = match rule {
                RegisterRule::AtLeast(k) => *k as i64,
                RegisterRule::Parity { odd } => *odd as i64,
            };
            let expr = LinExpr::sum(bits) - LinExpr::constant(offset) - register.lin();
            if *poly != QuadPoly::lin_square(&expr) {
                return Err(failed(
                    e,
                    "polynomial is not the square of its register equation",
                ));
            }
            // The value depends on the relation bits through their sum only.
            let (lo, hi) = LinExpr::sum(bits).range();
            for s in lo..=hi {
                let target = s - offset;
                let zeros = (0..=register.max_value() / register.unit)
                    .filter(|m| target == m * register.unit)
                    .count();
                let holds = match rule {
                    RegisterRule::AtLeast(_) => target >= 0,
                    RegisterRule::Parity { .. } => target >= 0 && target % 2 == 0,
                };
                if holds != (zeros == 1) || zeros > 1 {
                    return Err(failed(e, format!("sum {s}: {zeros} zero completions")));
                }
            }
            Ok(())
        }
        _ => {
            if r + a > opts.certificate_bits {
                return Err(Error::Uncertified(e.kind().to_string()));
            }
            certify_by_enumeration(e, poly, r, a)
        }
    }
}

fn certify_by_enumeration(e: &Element, poly: &QuadPoly, r: usize, a: usize) -> Result<()> {
    let vars: Vec<VarId> = (0..(r + a) as u32).map(VarId).collect();
    let dense = Dense::new(poly, &vars)?;
    let results: Vec<Result<()>> = (0u64..1 << r)
        .into_par_iter()
        .map(|mask| {
            let mut x = vec![false; r + a];
            let mut asg = Assignment::with_capacity(r);
            for i in 0..r {
                x[i] = (mask >> i) & 1 == 1;
                asg.set(VarId(i as u32), x[i]);
            }
            let holds = e
                .relation_holds(&asg)
                .ok_or_else(|| failed(e, "relation depends on an auxiliary"))?;
            let mut en = dense.energy(&x);
            let (mut min, mut count) = (en, 1usize);
            for step in 1u64..1 << a {
                let i = r + step.trailing_zeros() as usize;
                en += dense.delta(&x, i);
                x[i] = !x[i];
                if en < min {
                    min = en;
                    count = 1;
                } else if en == min {
                    count += 1;
                }
            }
            let ok = if holds { min == 0 && count == 1 } else { min > 0 };
            if ok {
                Ok(())
            } else {
                Err(failed(
                    e,
                    format!("relation point {mask:b}: holds={holds}, minimum {min} reached {count} times"),
                ))
            }
        })
        .collect();
    results.into_iter().collect()
}

/// Completes `free` by propagating through the instance's elements.
pub fn witness(instance: &Instance, free: &Assignment) -> Result<Assignment> {
    let mut asg = free.clone();
    loop {
        let mut progress = false;
        for e in &instance.elements {
            progress |= e.propagate(&mut asg);
        }
        if !progress {
            break;
        }
    }
    for (id, info) in instance.registry.iter() {
        if asg.get(id).is_none() {
            return Err(Error::Underdetermined(info.name.clone()));
        }
    }
    Ok(asg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// Every 0/1 point of the free variables.
    Exhaustive,
    /// Permutations for certified groups, every 0/1 point for the rest.
    Permutations,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityReport {
    /// Decoded zeros with the number of zero points decoding to each.
    pub solutions: BTreeMap<Solution, usize>,
    /// Every solution is reached by exactly one zero.
    pub uniform: bool,
    pub zeros: usize,
    pub points: usize,
    pub domain: DomainKind,
    pub certificates: CertificateReport,
}

/// One way of assigning a block of free variables.
type Choice = Vec<(VarId, bool)>;

fn encode_choices(positions: &[Vec<Bit>], representation: Representation) -> Vec<Choice> {
    let n = positions.len();
    Permutation::all(n)
        .filter_map(|p| {
            let mut choice = Vec::new();
            for (i, bits) in positions.iter().enumerate() {
                let value = p.apply(i + 1);
                for (b, bit) in bits.iter().enumerate() {
                    let want = match representation {
                        Representation::Binary => (value >> b) & 1 == 1,
                        Representation::Onehot => b + 1 == value,
                    };
                    match bit {
                        Bit::Const(c) if *c != want => return None,
                        Bit::Const(_) => {}
                        Bit::Var(v) => choice.push((*v, want)),
                        Bit::NegVar(v) => choice.push((*v, !want)),
                    }
                }
            }
            Some(choice)
        })
        .collect()
}

fn binary_choices(vars: &[VarId]) -> Vec<Choice> {
    (0u64..1 << vars.len())
        .map(|m| {
            vars.iter()
                .enumerate()
                .map(|(i, &v)| (v, (m >> i) & 1 == 1))
                .collect()
        })
        .collect()
}

/// Enumerates the input domain, builds a witness for every point and
/// tallies the decoded zeros.
pub fn uniformity_check(instance: &Instance, opts: &VerifyOptions) -> Result<UniformityReport> {
    let certificates = certify(instance, opts)?;
    let free = instance.free_vars();
    let (domain, blocks): (DomainKind, Vec<Vec<Choice>>) = if free.len() <= opts.domain_bits {
        (DomainKind::Exhaustive, vec![binary_choices(&free)])
    } else {
        let mut blocks = Vec::new();
        for (name, g) in &instance.decode.groups {
            if !g.free {
                continue;
            }
            if !g.perm_certified {
                return Err(Error::Uncertified(format!(
                    "group `{name}` is not permutation-certified"
                )));
            }
            let n = g.positions.len() as u128;
            let size = (1..=n)
                .try_fold(1u128, |acc, i| acc.checked_mul(i))
                .unwrap_or(u128::MAX);
            if size > opts.max_points {
                return Err(Error::DomainTooLarge {
                    points: size,
                    cap: opts.max_points,
                });
            }
            blocks.push(encode_choices(&g.positions, instance.decode.representation));
        }
        if let Some(sel) = &instance.decode.selection {
            let vars: Vec<VarId> = sel.iter().filter_map(|b| b.var()).collect();
            if vars.len() >= 64 || 1u128 << vars.len() > opts.max_points {
                return Err(Error::DomainTooLarge {
                    points: 1u128 << vars.len().min(127),
                    cap: opts.max_points,
                });
            }
            blocks.push(binary_choices(&vars));
        }
        (DomainKind::Permutations, blocks)
    };
    let points = blocks.iter().map(|b| b.len() as u128).product::<u128>();
    if points > opts.max_points {
        return Err(Error::DomainTooLarge {
            points,
            cap: opts.max_points,
        });
    }
    let points = points as usize;

    let found: Vec<Result<Option<Solution>>> = (0..points)
        .into_par_iter()
        .map(|mut idx| {
            let mut asg = Assignment::with_capacity(instance.num_vars());
            for block in &blocks {
                for &(v, b) in &block[idx % block.len()] {
                    asg.set(v, b);
                }
                idx /= block.len();
            }
            let full = witness(instance, &asg)?;
            if instance.poly.eval(&full)? == 0 {
                Ok(Some(instance.decode.solution(&full)?))
            } else {
                Ok(None)
            }
        })
        .collect();

    let mut solutions: BTreeMap<Solution, usize> = BTreeMap::new();
    let mut zeros = 0;
    for r in found {
        if let Some(s) = r? {
            zeros += 1;
            *solutions.entry(s).or_insert(0) += 1;
        }
    }
    let uniform = solutions.values().all(|&c| c == 1);
    Ok(UniformityReport {
        solutions,
        uniform,
        zeros,
        points,
        domain,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::{Role, VariableRegistry};

    #[test]
    fn exhaustive_zero_set_of_hamming_square() {
        let mut reg = VariableRegistry::new();
        let x: Vec<VarId> = (0..4)
            .map(|i| reg.alloc(format!("x{i}"), Role::Input).unwrap())
            .collect();
        let bits: Vec<Bit> = x.iter().map(|&v| Bit::Var(v)).collect();
        let h = QuadPoly::lin_square(&(LinExpr::sum(&bits) - LinExpr::constant(2)));
        let z = zero_set_exhaustive(&h, &x, 24).unwrap();
        assert_eq!(z.minimum, 0);
        assert_eq!(z.zeros.len(), 6);
        assert!(z.zeros.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(
            zero_set_exhaustive(&h, &x, 3),
            Err(Error::CapExceeded { vars: 4, cap: 3 })
        ));
    }
}
