//! Size and sparsity of an instance.

use serde::Serialize;

use crate::encodings::{Construction, Instance};
use crate::networks::{expected_network_aux, Network, Topology};
use crate::pbf::{bit_width, Role};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceStats {
    pub vars: usize,
    pub inputs: usize,
    pub aux: usize,
    pub controls: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    /// Edges over `vars choose 2`.
    pub density: f64,
    /// Closed-form counts, where one is known for the construction.
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub vars: usize,
    pub aux: usize,
    pub controls: usize,
    pub max_degree: Option<usize>,
}

pub fn expected(construction: Construction, n: usize, topology: Topology) -> Option<Expected> {
    match construction {
        Construction::Perm => {
            let k = bit_width(n);
            let m = Network::build(topology, n).ok()?.size();
            let aux = expected_network_aux(n, m, k);
            Some(Expected {
                vars: n * k + aux + m,
                aux,
                controls: m,
                max_degree: None,
            })
        }
        Construction::Matrix => Some(Expected {
            vars: n * n,
            aux: 0,
            controls: 0,
            max_degree: Some(2 * n.saturating_sub(1)),
        }),
        Construction::Match | Construction::Raw => None,
    }
}

pub fn instance_stats(instance: &Instance) -> InstanceStats {
    let vars = instance.registry.len();
    let mut degree = vec![0usize; vars];
    let mut edges = 0;
    for ((a, b), _) in instance.poly.quadratic() {
        degree[a.index()] += 1;
        degree[b.index()] += 1;
        edges += 1;
    }
    let pairs = vars * vars.saturating_sub(1) / 2;
    let meta = &instance.meta;
    let expected = if meta.constraints.is_empty() {
        expected(meta.construction, meta.n, meta.topology.unwrap_or_default())
    } else {
        None
    };
    InstanceStats {
        vars,
        inputs: instance.registry.count_role(Role::Input),
        aux: instance.registry.count_role(Role::Auxiliary),
        controls: instance.registry.count_role(Role::Control),
        edges,
        max_degree: degree.iter().copied().max().unwrap_or(0),
        mean_degree: if vars == 0 {
            0.0
        } else {
            2.0 * edges as f64 / vars as f64
        },
        density: if pairs == 0 {
            0.0
        } else {
            edges as f64 / pairs as f64
        },
        expected,
    }
}
