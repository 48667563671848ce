//! Binary position encoding: `π(i)` is a `k`-bit bus and a sorting network
//! with the identity on its outputs forces the buses to form a permutation.

use std::collections::BTreeMap;

use super::{
    check_index, group_names, pins, Constraint, Construction, Decode, EncodingSpec, Group,
    Instance, Meta, Representation, PI, PI_PRIME, SIGMA,
};
use crate::circuit::Fragment;
use crate::error::{Error, Result};
use crate::gadgets::{parity_even, parity_odd, threshold_ge};
use crate::networks::{network_poly, Network, Wiring};
use crate::pbf::{bit_width, Bit, Bus, Role, VariableRegistry};
use crate::perm::Permutation;

/// Buses `1, 2, …, n` as constants.
pub(crate) fn identity_buses(n: usize, k: usize) -> Vec<Bus> {
    (1..=n).map(|i| Bus::constant(i as u64, k)).collect()
}

/// Concatenates columns, column 0 in the least significant bits.
pub(crate) fn columns(cols: &[&Bus]) -> Bus {
    cols.iter()
        .fold(Bus::empty(), |acc, col| Bus::concat(col, &acc))
}

/// Literals that are all zero exactly when `bus` holds `value`.
fn mismatch_literals(bus: &Bus, value: u64) -> Vec<Bit> {
    bus.bits()
        .iter()
        .enumerate()
        .map(|(b, bit)| bit.xor_const((value >> b) & 1 == 1))
        .collect()
}

/// Sorting `π` by a keyed network relating per-position payload columns.
///
/// Row `i` enters as `(keys[i]; inputs[i])` and must leave row `j` as
/// `(j; outputs[j])`, which states `outputs[j] = inputs[keys⁻¹(j)]`.
struct Relabel<'a> {
    network: &'a Network,
    k: usize,
}

impl Relabel<'_> {
    fn build(
        &self,
        keys: &[Bus],
        inputs: &[Vec<&Bus>],
        outputs: &[Vec<&Bus>],
        reg: &mut VariableRegistry,
        stem: &str,
    ) -> Result<Fragment> {
        let n = self.network.n;
        let ids = identity_buses(n, self.k);
        let rows_in: Vec<Bus> = (0..n)
            .map(|i| Bus::concat(&keys[i], &columns(&inputs[i])))
            .collect();
        let rows_out: Vec<Bus> = (0..n)
            .map(|j| Bus::concat(&ids[j], &columns(&outputs[j])))
            .collect();
        let built = network_poly(
            self.network,
            &rows_in,
            Wiring {
                outputs: Some(rows_out),
                controls: None,
                key_width: Some(self.k),
            },
            reg,
            stem,
        )?;
        Ok(built.fragment)
    }
}

pub fn build_perm(spec: &EncodingSpec) -> Result<Instance> {
    let n = spec.n;
    let k = bit_width(n);
    let network = Network::build(spec.topology, n)?;
    let pinned = pins(spec)?;
    let names = group_names(&spec.constraints);
    let mut reg = VariableRegistry::new();

    let stems: BTreeMap<&str, &str> = [(PI, "x"), (PI_PRIME, "xp"), (SIGMA, "s")].into();
    let mut buses: BTreeMap<&str, Vec<Bus>> = BTreeMap::new();
    for &name in &names {
        let group: Vec<Bus> = (1..=n)
            .map(|i| match pinned.get(&(name.to_string(), i)) {
                Some(&j) => Bus::constant(j as u64, k),
                None => Bus::alloc(&mut reg, &format!("{}{i}", stems[name]), k, Role::Input),
            })
            .collect();
        buses.insert(name, group);
    }
    for (group, _) in pinned.keys() {
        if !names.contains(&group.as_str()) {
            return Err(Error::Unsupported(format!(
                "group `{group}` is not present without compose, commute or conjugate"
            )));
        }
    }
    let x = buses[PI].clone();
    let ids = identity_buses(n, k);

    // The base network sorts π onto the identity.
    let base = network_poly(
        &network,
        &x,
        Wiring {
            outputs: Some(ids.clone()),
            ..Wiring::default()
        },
        &mut reg,
        "perm",
    )?;
    let mut fragment = base.fragment;
    let relabel = Relabel {
        network: &network,
        k,
    };

    for (ci, constraint) in spec.constraints.iter().enumerate() {
        let stem = format!("c{}", ci + 1);
        match constraint {
            Constraint::FixValue { .. } | Constraint::FixedPoint(_) => {}
            Constraint::ForbidValue { i, j } => {
                check_index("position", *i, n)?;
                check_index("value", *j, n)?;
                let lits = mismatch_literals(&x[i - 1], *j as u64);
                fragment.absorb(threshold_ge(&lits, 1, &mut reg, &stem));
            }
            Constraint::Derangement => {
                for i in 1..=n {
                    let lits = mismatch_literals(&x[i - 1], i as u64);
                    fragment.absorb(threshold_ge(&lits, 1, &mut reg, &format!("{stem}.{i}")));
                }
            }
            Constraint::ForbidPerm(tau) => {
                if tau.len() != n {
                    return Err(Error::InvalidPermutation(format!(
                        "{tau} has length {}",
                        tau.len()
                    )));
                }
                fragment.absorb(forbid_perm(&x, tau, &mut reg, &stem));
            }
            Constraint::Parity { odd } => {
                let f = if *odd { parity_odd } else { parity_even };
                fragment.absorb(f(&base.controls, &mut reg, &stem));
            }
            Constraint::Involution => {
                fragment.absorb(power_chain(&relabel, &x, 2, &mut reg, &stem)?.0);
            }
            Constraint::Power(r) => {
                fragment.absorb(power_chain(&relabel, &x, *r, &mut reg, &stem)?.0);
            }
            Constraint::Order(r) => {
                let (f, powers) = power_chain(&relabel, &x, *r, &mut reg, &stem)?;
                fragment.absorb(f);
                let id = Permutation::identity(n);
                for (p, bus) in std::iter::once(&x).chain(powers.iter()).enumerate() {
                    fragment.absorb(forbid_perm(
                        bus,
                        &id,
                        &mut reg,
                        &format!("{stem}.o{}", p + 1),
                    ));
                }
            }
            Constraint::Compose => {
                let xp = &buses[PI_PRIME];
                let sigma = &buses[SIGMA];
                let perm_xp = network_poly(
                    &network,
                    xp,
                    Wiring {
                        outputs: Some(ids.clone()),
                        ..Wiring::default()
                    },
                    &mut reg,
                    &format!("{stem}.perm"),
                )?;
                fragment.absorb(perm_xp.fragment);
                let inputs: Vec<Vec<&Bus>> = sigma.iter().map(|b| vec![b]).collect();
                let outputs: Vec<Vec<&Bus>> = xp.iter().map(|b| vec![b]).collect();
                fragment.absorb(relabel.build(&x, &inputs, &outputs, &mut reg, &stem)?);
            }
            Constraint::Commute => {
                let xp = &buses[PI_PRIME];
                let y: Vec<Bus> = (1..=n)
                    .map(|i| Bus::alloc(&mut reg, &format!("{stem}.y{i}"), k, Role::Auxiliary))
                    .collect();
                let ys: Vec<Vec<&Bus>> = y.iter().map(|b| vec![b]).collect();
                let xps: Vec<Vec<&Bus>> = xp.iter().map(|b| vec![b]).collect();
                let xs: Vec<Vec<&Bus>> = x.iter().map(|b| vec![b]).collect();
                fragment.absorb(relabel.build(&x, &ys, &xps, &mut reg, &format!("{stem}.a"))?);
                fragment.absorb(relabel.build(xp, &ys, &xs, &mut reg, &format!("{stem}.b"))?);
            }
            Constraint::Conjugate => {
                let xp = &buses[PI_PRIME];
                let sigma = &buses[SIGMA];
                let z: Vec<Bus> = (1..=n)
                    .map(|i| Bus::alloc(&mut reg, &format!("{stem}.z{i}"), k, Role::Auxiliary))
                    .collect();
                let zs: Vec<Vec<&Bus>> = z.iter().map(|b| vec![b]).collect();
                let xs: Vec<Vec<&Bus>> = x.iter().map(|b| vec![b]).collect();
                let ss: Vec<Vec<&Bus>> = sigma.iter().map(|b| vec![b]).collect();
                fragment.absorb(relabel.build(sigma, &zs, &xs, &mut reg, &format!("{stem}.a"))?);
                fragment.absorb(relabel.build(xp, &zs, &ss, &mut reg, &format!("{stem}.b"))?);
            }
        }
    }

    let groups = names
        .iter()
        .map(|&name| {
            let group = Group {
                positions: buses[name].iter().map(|b| b.bits().to_vec()).collect(),
                free: true,
                perm_certified: true,
            };
            (name.to_string(), group)
        })
        .collect();
    let meta = Meta {
        construction: Construction::Perm,
        n,
        k,
        topology: Some(spec.topology),
        gates: network.gates.clone(),
        constraints: spec.constraints.clone(),
        pattern: None,
    };
    let decode = Decode {
        representation: Representation::Binary,
        groups,
        selection: None,
    };
    Ok(Instance::from_fragment(meta, reg, fragment, decode))
}

/// At least one bit of the buses differs from `τ`.
fn forbid_perm(x: &[Bus], tau: &Permutation, reg: &mut VariableRegistry, stem: &str) -> Fragment {
    let lits: Vec<Bit> = x
        .iter()
        .enumerate()
        .flat_map(|(i, bus)| mismatch_literals(bus, tau.apply(i + 1) as u64))
        .collect();
    threshold_ge(&lits, 1, reg, stem)
}

/// `π^r = id` through hidden buses `x₂ … x_{r−1}` holding the powers:
/// sorting rows `(π(i); x₂(i), …, x_{r−1}(i), i)` by `π` must yield rows
/// `(j; π(j), x₂(j), …, x_{r−1}(j))`.
fn power_chain(
    relabel: &Relabel<'_>,
    x: &[Bus],
    r: usize,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<(Fragment, Vec<Vec<Bus>>)> {
    if r < 2 {
        return Err(Error::OutOfRange {
            what: "power",
            value: r as i64,
        });
    }
    let n = x.len();
    let k = relabel.k;
    let ids = identity_buses(n, k);
    let powers: Vec<Vec<Bus>> = (2..r)
        .map(|p| {
            (1..=n)
                .map(|i| Bus::alloc(reg, &format!("{stem}.p{p}.{i}"), k, Role::Auxiliary))
                .collect()
        })
        .collect();
    let inputs: Vec<Vec<&Bus>> = (0..n)
        .map(|i| {
            let mut cols: Vec<&Bus> = powers.iter().map(|p| &p[i]).collect();
            cols.push(&ids[i]);
            cols
        })
        .collect();
    let outputs: Vec<Vec<&Bus>> = (0..n)
        .map(|j| {
            let mut cols = vec![&x[j]];
            cols.extend(powers.iter().map(|p| &p[j]));
            cols
        })
        .collect();
    let f = relabel.build(x, &inputs, &outputs, reg, stem)?;
    Ok((f, powers))
}
