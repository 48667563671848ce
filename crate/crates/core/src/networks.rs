//! Sorting-network topologies and their compare-exchange polynomials.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Element, Fragment};
use crate::error::{Error, Result};
use crate::gates::ce_gate;
use crate::pbf::{Bit, Bus, QuadPoly, Role, VariableRegistry};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Batcher's odd-even merge sort.
    #[default]
    Batcher,
    /// Odd-even transposition sort.
    Oet,
    /// Bitonic sort with every comparator pointing the same way.
    Bitonic,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Batcher, Topology::Oet, Topology::Bitonic];

    pub fn name(self) -> &'static str {
        match self {
            Topology::Batcher => "batcher",
            Topology::Oet => "oet",
            Topology::Bitonic => "bitonic",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batcher" => Ok(Topology::Batcher),
            "oet" => Ok(Topology::Oet),
            "bitonic" => Ok(Topology::Bitonic),
            other => Err(Error::Parse(format!("unknown topology `{other}`"))),
        }
    }
}

/// A comparator network on lines `0..n`; each gate `(i, j)` has `i < j` and
/// moves the smaller value to line `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub n: usize,
    pub gates: Vec<(usize, usize)>,
}

impl Network {
    pub fn new(n: usize, gates: Vec<(usize, usize)>) -> Result<Self> {
        validate(n, &gates)?;
        Ok(Self { n, gates })
    }

    pub fn build(topology: Topology, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology(
                "network needs at least one line".into(),
            ));
        }
        let gates = match topology {
            Topology::Oet => oet(n),
            Topology::Batcher => truncate(n, batcher(n.next_power_of_two())),
            Topology::Bitonic => truncate(n, bitonic(n.next_power_of_two())),
        };
        Network::new(n, gates)
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Runs the network on `values` and returns the control bit of every
    /// gate (`true` when it swapped).
    pub fn apply<T: Ord>(&self, values: &mut [T]) -> Vec<bool> {
        self.gates
            .iter()
            .map(|&(i, j)| {
                let swap = values[i] > values[j];
                if swap {
                    values.swap(i, j);
                }
                swap
            })
            .collect()
    }

    /// Exhaustive 0-1 principle check.
    pub fn sorts_all_binary_inputs(&self) -> bool {
        (0u64..1 << self.n).all(|mask| {
            let mut v: Vec<u8> = (0..self.n).map(|i| ((mask >> i) & 1) as u8).collect();
            self.apply(&mut v);
            v.windows(2).all(|w| w[0] <= w[1])
        })
    }
}

pub fn validate(n: usize, gates: &[(usize, usize)]) -> Result<()> {
    let mut touched = vec![false; n];
    for &(i, j) in gates {
        if i >= j || j >= n {
            return Err(Error::InvalidTopology(format!(
                "gate ({i}, {j}) is not an ordered pair of lines below {n}"
            )));
        }
        touched[i] = true;
        touched[j] = true;
    }
    if n > 1 {
        if let Some(line) = touched.iter().position(|t| !t) {
            return Err(Error::InvalidTopology(format!(
                "line {line} is never compared"
            )));
        }
    }
    Ok(())
}

fn oet(n: usize) -> Vec<(usize, usize)> {
    let mut gates = Vec::new();
    for round in 0..n {
        let mut i = round % 2;
        while i + 1 < n {
            gates.push((i, i + 1));
            i += 2;
        }
    }
    gates
}

fn batcher(n: usize) -> Vec<(usize, usize)> {
    let mut gates = Vec::new();
    let mut p = 1;
    while p < n {
        let mut k = p;
        while k >= 1 {
            let mut j = k % p;
            while j + k < n {
                for i in 0..k.min(n - j - k) {
                    if (i + j) / (2 * p) == (i + j + k) / (2 * p) {
                        gates.push((i + j, i + j + k));
                    }
                }
                j += 2 * k;
            }
            k /= 2;
        }
        p *= 2;
    }
    gates
}

fn bitonic(n: usize) -> Vec<(usize, usize)> {
    let mut gates = Vec::new();
    let mut k = 2;
    while k <= n {
        for i in 0..n {
            let l = i ^ (k - 1);
            if l > i {
                gates.push((i, l));
            }
        }
        let mut j = k / 4;
        while j >= 1 {
            for i in 0..n {
                let l = i ^ j;
                if l > i {
                    gates.push((i, l));
                }
            }
            j /= 2;
        }
        k *= 2;
    }
    gates
}

/// Drops comparators on padding lines; padding holds values larger than
/// every real input, so those comparators never swap.
fn truncate(n: usize, gates: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    gates.into_iter().filter(|&(_, j)| j < n).collect()
}

/// A network polynomial together with its wiring.
#[derive(Debug, Clone)]
pub struct NetworkBuild {
    pub fragment: Fragment,
    pub outputs: Vec<Bus>,
    pub controls: Vec<Bit>,
}

/// Options for [`network_poly`].
#[derive(Debug, Clone, Default)]
pub struct Wiring {
    /// Buses to use on the last position of every line; fresh auxiliary
    /// buses otherwise.
    pub outputs: Option<Vec<Bus>>,
    /// Fixed control bits (for instance constants); fresh control
    /// variables otherwise.
    pub controls: Option<Vec<Bit>>,
    /// Number of most significant bits compared; the full width otherwise.
    pub key_width: Option<usize>,
}

/// Builds the penalty of `network` applied to `inputs`.
///
/// Line `l` carries a bus per position; position 0 is `inputs[l]`, the last
/// position is `outputs[l]` when given, and every intermediate bus is a fresh
/// auxiliary. Each gate adds a compare-exchange on the current buses of its
/// two lines.
pub fn network_poly(
    network: &Network,
    inputs: &[Bus],
    wiring: Wiring,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<NetworkBuild> {
    let n = network.n;
    if inputs.len() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: inputs.len(),
        });
    }
    let width = inputs.first().map_or(0, Bus::width);
    for bus in inputs {
        if bus.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: bus.width(),
            });
        }
    }
    if let Some(outputs) = &wiring.outputs {
        if outputs.len() != n {
            return Err(Error::WidthMismatch {
                expected: n,
                found: outputs.len(),
            });
        }
        for bus in outputs {
            if bus.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: bus.width(),
                });
            }
        }
    }
    if let Some(controls) = &wiring.controls {
        if controls.len() != network.size() {
            return Err(Error::WidthMismatch {
                expected: network.size(),
                found: controls.len(),
            });
        }
    }
    let key_width = wiring.key_width.unwrap_or(width);

    let mut remaining = vec![0usize; n];
    for &(i, j) in &network.gates {
        remaining[i] += 1;
        remaining[j] += 1;
    }
    let mut current: Vec<Bus> = inputs.to_vec();
    let mut position = vec![0usize; n];
    let mut fragment = Fragment::default();
    let mut controls = Vec::with_capacity(network.size());

    for (g, &(i, j)) in network.gates.iter().enumerate() {
        let mut next = |line: usize, reg: &mut VariableRegistry| {
            remaining[line] -= 1;
            position[line] += 1;
            match (&wiring.outputs, remaining[line]) {
                (Some(outputs), 0) => outputs[line].clone(),
                _ => Bus::alloc(
                    reg,
                    &format!("{stem}.z{}.{}", line + 1, position[line]),
                    width,
                    Role::Auxiliary,
                ),
            }
        };
        let yi = next(i, reg);
        let yj = next(j, reg);
        let c = match &wiring.controls {
            Some(fixed) => fixed[g],
            None => Bit::Var(reg.fresh(&format!("{stem}.c{}", g + 1), Role::Control)),
        };
        fragment.absorb(ce_gate(
            &current[i],
            &current[j],
            &yi,
            &yj,
            c,
            key_width,
            reg,
            &format!("{stem}.g{}", g + 1),
        )?);
        current[i] = yi;
        current[j] = yj;
        controls.push(c);
    }

    // Lines without gates pass straight through.
    if let Some(outputs) = &wiring.outputs {
        for line in 0..n {
            if position[line] == 0 {
                for (a, b) in current[line].bits().iter().zip(outputs[line].bits()) {
                    let expr = a.lin() - b.lin();
                    fragment.absorb(Fragment::new(
                        QuadPoly::lin_square(&expr),
                        Element::Square { expr },
                    ));
                }
                current[line] = outputs[line].clone();
            }
        }
    }

    Ok(NetworkBuild {
        fragment,
        outputs: current,
        controls,
    })
}

/// Auxiliary count of a network polynomial with variable inputs and outputs,
/// controls excluded: `m(7k + 1) − nk`.
pub fn expected_network_aux(n: usize, m: usize, k: usize) -> usize {
    (m * (7 * k + 1)).saturating_sub(n * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sizes() {
        assert_eq!(Network::build(Topology::Batcher, 4).unwrap().size(), 5);
        assert_eq!(Network::build(Topology::Batcher, 8).unwrap().size(), 19);
        assert_eq!(Network::build(Topology::Bitonic, 4).unwrap().size(), 6);
        for n in 1..=8 {
            assert_eq!(
                Network::build(Topology::Oet, n).unwrap().size(),
                n * (n - 1) / 2
            );
        }
    }

    #[test]
    fn every_topology_sorts() {
        for t in Topology::ALL {
            for n in 1..=10 {
                assert!(
                    Network::build(t, n).unwrap().sorts_all_binary_inputs(),
                    "{t} n={n}"
                );
            }
        }
    }

    #[test]
    fn validation_rejects_bad_gates() {
        assert!(Network::new(3, vec![(1, 0), (1, 2)]).is_err());
        assert!(Network::new(3, vec![(0, 3)]).is_err());
        assert!(Network::new(3, vec![(0, 1)]).is_err());
    }
}
