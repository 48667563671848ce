//! Pattern containment: `π` contains `τ` when some `ℓ` positions of `π`,
//! read left to right, are ordered like `τ`.
//!
//! Selection bits `pᵢ` (zero = selected) choose the positions. A keyed
//! network sorts the rows `(pᵢ, i; π(i))`, which moves the selected values
//! to the first `ℓ` lines in their original order. A second network on those
//! lines runs with its controls fixed to the ones that sort `τ`; its
//! comparators can only be consistent when the selected values are ordered
//! like `τ`.

use super::binary::{columns, identity_buses};
use super::{Construction, Decode, EncodingSpec, Group, Instance, Meta, Representation, PI};
use crate::error::{Error, Result};
use crate::gadgets::hamming_eq;
use crate::networks::{network_poly, Network, Wiring};
use crate::pbf::{bit_width, Bit, Bus, Role, VariableRegistry};

pub fn build_match(spec: &EncodingSpec) -> Result<Instance> {
    let n = spec.n;
    let pattern = spec
        .pattern
        .clone()
        .ok_or_else(|| Error::Unsupported("match needs a pattern".into()))?;
    let l = pattern.len();
    if l == 0 || l > n {
        return Err(Error::OutOfRange {
            what: "pattern length",
            value: l as i64,
        });
    }
    if !spec.constraints.is_empty() {
        return Err(Error::Unsupported(
            "match does not take extra constraints".into(),
        ));
    }
    let k = bit_width(n);
    let network = Network::build(spec.topology, n)?;
    let mut reg = VariableRegistry::new();

    let x: Vec<Bus> = (1..=n)
        .map(|i| Bus::alloc(&mut reg, &format!("x{i}"), k, Role::Input))
        .collect();
    let selection: Vec<Bit> = (1..=n)
        .map(|i| {
            Bit::Var(
                reg.alloc(format!("p{i}"), Role::Input)
                    .expect("selection names are unique"),
            )
        })
        .collect();

    let ids = identity_buses(n, k);
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

    // Exactly n − ℓ positions are left out.
    fragment.absorb(hamming_eq(&selection, n - l));

    let rows: Vec<Bus> = (0..n)
        .map(|i| {
            let key = Bus::concat(&Bus::new(vec![selection[i]]), &ids[i]);
            Bus::concat(&key, &columns(&[&x[i]]))
        })
        .collect();
    let gather = network_poly(
        &network,
        &rows,
        Wiring {
            key_width: Some(k + 1),
            ..Wiring::default()
        },
        &mut reg,
        "sel",
    )?;
    fragment.absorb(gather.fragment);

    if l >= 2 {
        let selected: Vec<Bus> = gather.outputs[..l].iter().map(|row| row.low(k)).collect();
        let inner = Network::build(spec.topology, l)?;
        let mut values = pattern.values().to_vec();
        let controls = inner
            .apply(&mut values)
            .into_iter()
            .map(Bit::Const)
            .collect();
        let check = network_poly(
            &inner,
            &selected,
            Wiring {
                controls: Some(controls),
                ..Wiring::default()
            },
            &mut reg,
            "pat",
        )?;
        fragment.absorb(check.fragment);
    }

    let group = Group {
        positions: x.iter().map(|b| b.bits().to_vec()).collect(),
        free: true,
        perm_certified: true,
    };
    let meta = Meta {
        construction: Construction::Match,
        n,
        k,
        topology: Some(spec.topology),
        gates: network.gates.clone(),
        constraints: Vec::new(),
        pattern: Some(pattern),
    };
    let decode = Decode {
        representation: Representation::Binary,
        groups: [(PI.to_string(), group)].into(),
        selection: Some(selection),
    };
    Ok(Instance::from_fragment(meta, reg, fragment, decode))
}
