//! One-hot matrix encoding: `x_ij = 1` iff `π(i) = j`, with every row and
//! column summing to one.

use std::collections::BTreeMap;

use super::{
    check_index, group_names, pins, Constraint, Construction, Decode, EncodingSpec, Group,
    Instance, Meta, Representation, PI, PI_PRIME, SIGMA,
};
use crate::circuit::{Element, Fragment};
use crate::error::{Error, Result};
use crate::gadgets::{hamming_eq, parity_even, parity_odd, threshold_ge};
use crate::pbf::{Bit, QuadPoly, Role, VariableRegistry};
use crate::quadratize::product_penalty_bits;

type Matrix = Vec<Vec<Bit>>;

/// Row and column sums equal to one.
fn assignment_constraints(m: &Matrix) -> Fragment {
    let n = m.len();
    let mut f = Fragment::default();
    for row in m {
        f.absorb(hamming_eq(row, 1));
    }
    for j in 0..n {
        let col: Vec<Bit> = m.iter().map(|row| row[j]).collect();
        f.absorb(hamming_eq(&col, 1));
    }
    f
}

/// `a·b` as a bit, introducing a product auxiliary only when both are
/// variables.
fn product(a: Bit, b: Bit, reg: &mut VariableRegistry, stem: &str, f: &mut Fragment) -> Bit {
    match (a, b) {
        (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::ZERO,
        (Bit::Const(true), other) | (other, Bit::Const(true)) => other,
        _ => {
            let z = reg.fresh(stem, Role::Auxiliary);
            f.absorb(Fragment::new(
                product_penalty_bits(a, b, z, 1),
                Element::Product { a, b, z, alpha: 1 },
            ));
            Bit::Var(z)
        }
    }
}

pub fn build_matrix(spec: &EncodingSpec) -> Result<Instance> {
    let n = spec.n;
    let names = group_names(&spec.constraints);
    let mut pinned = pins(spec)?;
    for (group, _) in pinned.keys() {
        if !names.contains(&group.as_str()) {
            return Err(Error::Unsupported(format!(
                "group `{group}` is not present without compose"
            )));
        }
    }
    let mut forbidden: Vec<(usize, usize)> = Vec::new();
    for c in &spec.constraints {
        match c {
            Constraint::ForbidValue { i, j } => {
                check_index("position", *i, n)?;
                check_index("value", *j, n)?;
                forbidden.push((*i, *j));
            }
            Constraint::Derangement => forbidden.extend((1..=n).map(|i| (i, i))),
            Constraint::Involution
            | Constraint::Power(_)
            | Constraint::Order(_)
            | Constraint::Commute
            | Constraint::Conjugate => {
                return Err(Error::Unsupported(format!(
                    "constraint `{c}` is not available for the matrix encoding"
                )))
            }
            _ => {}
        }
    }

    let mut reg = VariableRegistry::new();
    let stems: BTreeMap<&str, &str> = [(PI, "x"), (PI_PRIME, "xp"), (SIGMA, "s")].into();
    let mut mats: BTreeMap<&str, Matrix> = BTreeMap::new();
    for &name in &names {
        let m: Matrix = (1..=n)
            .map(|i| {
                let pin = pinned.remove(&(name.to_string(), i));
                (1..=n)
                    .map(|j| match pin {
                        Some(p) => Bit::Const(p == j),
                        None if name == PI && forbidden.contains(&(i, j)) => Bit::ZERO,
                        None => Bit::Var(
                            reg.alloc(format!("{}{i}_{j}", stems[name]), Role::Input)
                                .expect("matrix names are unique"),
                        ),
                    })
                    .collect()
            })
            .collect();
        mats.insert(name, m);
    }

    let mut fragment = Fragment::default();
    for &name in &names {
        fragment.absorb(assignment_constraints(&mats[name]));
    }
    let x = mats[PI].clone();

    for (ci, constraint) in spec.constraints.iter().enumerate() {
        let stem = format!("c{}", ci + 1);
        match constraint {
            Constraint::ForbidPerm(tau) => {
                if tau.len() != n {
                    return Err(Error::InvalidPermutation(format!(
                        "{tau} has length {}",
                        tau.len()
                    )));
                }
                let lits: Vec<Bit> = (1..=n)
                    .map(|i| x[i - 1][tau.apply(i) - 1].negate())
                    .collect();
                fragment.absorb(threshold_ge(&lits, 1, &mut reg, &stem));
            }
            Constraint::Parity { odd } => {
                // One product per inversion pattern i < j, π(i) > π(j).
                let mut inversions = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        for a in 0..n {
                            for b in 0..a {
                                let bit = product(
                                    x[i][a],
                                    x[j][b],
                                    &mut reg,
                                    &format!("{stem}.inv"),
                                    &mut fragment,
                                );
                                if bit != Bit::ZERO {
                                    inversions.push(bit);
                                }
                            }
                        }
                    }
                }
                let f = if *odd { parity_odd } else { parity_even };
                fragment.absorb(f(&inversions, &mut reg, &stem));
            }
            Constraint::Compose => {
                // σ(i) = π′(π(i)): s_ij = Σ_k x_ik · x′_kj.
                let xp = &mats[PI_PRIME];
                let s = &mats[SIGMA];
                for i in 0..n {
                    for j in 0..n {
                        let mut expr = s[i][j].lin();
                        for kk in 0..n {
                            let z = product(
                                x[i][kk],
                                xp[kk][j],
                                &mut reg,
                                &format!("{stem}.z"),
                                &mut fragment,
                            );
                            expr = expr - z.lin();
                        }
                        fragment.absorb(Fragment::new(
                            QuadPoly::lin_square(&expr),
                            Element::Square { expr },
                        ));
                    }
                }
            }
            _ => {}
        }
    }

    let groups = names
        .iter()
        .map(|&name| {
            let group = Group {
                positions: mats[name].clone(),
                free: true,
                perm_certified: true,
            };
            (name.to_string(), group)
        })
        .collect();
    let meta = Meta {
        construction: Construction::Matrix,
        n,
        k: n,
        topology: None,
        gates: Vec::new(),
        constraints: spec.constraints.clone(),
        pattern: None,
    };
    let decode = Decode {
        representation: Representation::Onehot,
        groups,
        selection: None,
    };
    Ok(Instance::from_fragment(meta, reg, fragment, decode))
}
