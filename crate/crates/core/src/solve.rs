//! Exhaustive minimisation and simulated annealing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::Dense;
use crate::encodings::Instance;
use crate::error::{Error, Result};
use crate::pbf::{Assignment, QuadPoly, VarId};

/// Minimum of `poly` over `vars` and every point attaining it, sorted.
pub fn exhaustive_min(
    poly: &QuadPoly,
    vars: &[VarId],
    cap: usize,
) -> Result<(i64, Vec<Vec<bool>>)> {
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
            let mut best = (e, vec![x.clone()]);
            for step in 1u64..1 << low {
                let i = step.trailing_zeros() as usize;
                e += dense.delta(&x, i);
                x[i] = !x[i];
                if e < best.0 {
                    best = (e, vec![x.clone()]);
                } else if e == best.0 {
                    best.1.push(x.clone());
                }
            }
            best
        })
        .collect();
    let min = chunks.iter().map(|c| c.0).min().unwrap_or(poly.offset());
    let mut points: Vec<Vec<bool>> = chunks
        .into_iter()
        .filter(|c| c.0 == min)
        .flat_map(|c| c.1)
        .collect();
    points.sort();
    Ok((min, points))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaParams {
    pub reads: usize,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            reads: 100,
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// One value per entry of the variable list passed to [`sa_sample`].
    pub values: Vec<bool>,
    pub energy: i64,
}

/// Single-flip Metropolis annealing with a geometric inverse-temperature
/// schedule. Read `r` uses its own generator seeded with `seed ^ r`, so
/// results do not depend on thread scheduling.
pub fn sa_sample(poly: &QuadPoly, vars: &[VarId], params: &SaParams) -> Result<Vec<Sample>> {
    if params.beta_start <= 0.0 || params.beta_end <= 0.0 {
        return Err(Error::OutOfRange {
            what: "inverse temperature",
            value: 0,
        });
    }
    let dense = Dense::new(poly, vars)?;
    let n = vars.len();
    let betas: Vec<f64> = (0..params.sweeps)
        .map(|s| {
            if params.sweeps <= 1 {
                params.beta_end
            } else {
                let t = s as f64 / (params.sweeps - 1) as f64;
                params.beta_start * (params.beta_end / params.beta_start).powf(t)
            }
        })
        .collect();
    Ok((0..params.reads)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ r as u64);
            let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mut energy = dense.energy(&x);
            // Local field of each variable: linear term plus active neighbours.
            let mut field: Vec<i64> = (0..n)
                .map(|i| {
                    dense.linear[i]
                        + dense.neighbours[i]
                            .iter()
                            .filter(|(j, _)| x[*j])
                            .map(|(_, c)| c)
                            .sum::<i64>()
                })
                .collect();
            for &beta in &betas {
                for i in 0..n {
                    let delta = if x[i] { -field[i] } else { field[i] };
                    if delta <= 0 || rng.gen::<f64>() < (-beta * delta as f64).exp() {
                        x[i] = !x[i];
                        energy += delta;
                        let sign = if x[i] { 1 } else { -1 };
                        for &(j, c) in &dense.neighbours[i] {
                            field[j] += sign * c;
                        }
                    }
                }
            }
            Sample { values: x, energy }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub reads: usize,
    pub energy_histogram: BTreeMap<i64, usize>,
    /// Reads that ended at energy zero.
    pub ground: usize,
    /// Decoded ground states with their frequencies.
    pub solutions: BTreeMap<String, usize>,
    /// Number of solutions the chi-square statistic is taken over.
    pub support: usize,
    /// Pearson statistic against the uniform distribution on the support.
    pub chi_square: Option<f64>,
}

/// Summarises samples. `decode` labels ground states; `support` is the
/// number of solutions expected (defaults to the number observed).
pub fn sample_stats(
    samples: &[Sample],
    decode: impl Fn(&Sample) -> Option<String>,
    support: Option<usize>,
) -> SampleStats {
    let mut energy_histogram = BTreeMap::new();
    let mut solutions: BTreeMap<String, usize> = BTreeMap::new();
    let mut ground = 0;
    for s in samples {
        *energy_histogram.entry(s.energy).or_insert(0) += 1;
        if s.energy == 0 {
            ground += 1;
            if let Some(label) = decode(s) {
                *solutions.entry(label).or_insert(0) += 1;
            }
        }
    }
    let support = support.unwrap_or(solutions.len()).max(solutions.len());
    let decoded: usize = solutions.values().sum();
    let chi_square = (support > 0 && decoded > 0).then(|| {
        let expected = decoded as f64 / support as f64;
        let observed: f64 = solutions
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // Unobserved members of the support each contribute `expected`.
        observed + (support - solutions.len()) as f64 * expected
    });
    SampleStats {
        reads: samples.len(),
        energy_histogram,
        ground,
        solutions,
        support,
        chi_square,
    }
}

/// Anneals an instance over all its variables and labels ground states by
/// their decoded permutations.
pub fn sample_instance(
    instance: &Instance,
    params: &SaParams,
    support: Option<usize>,
) -> Result<(Vec<Sample>, SampleStats)> {
    let vars: Vec<VarId> = instance.registry.ids().collect();
    let samples = sa_sample(&instance.poly, &vars, params)?;
    let stats = sample_stats(
        &samples,
        |s| {
            let asg = Assignment::from_pairs(vars.iter().copied().zip(s.values.iter().copied()));
            instance.decode.solution(&asg).ok().map(|sol| {
                sol.iter()
                    .map(|(name, p)| format!("{name}={p}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
        },
        support,
    );
    Ok((samples, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::{Bit, LinExpr, Role, VariableRegistry};

    fn hamming(n: usize, k: i64) -> (QuadPoly, Vec<VarId>) {
        let mut reg = VariableRegistry::new();
        let x: Vec<VarId> = (0..n)
            .map(|i| reg.alloc(format!("x{i}"), Role::Input).unwrap())
            .collect();
        let bits: Vec<Bit> = x.iter().map(|&v| Bit::Var(v)).collect();
        (
            QuadPoly::lin_square(&(LinExpr::sum(&bits) - LinExpr::constant(k))),
            x,
        )
    }

    #[test]
    fn exhaustive_minimum_of_hamming() {
        let (p, x) = hamming(5, 2);
        let (min, pts) = exhaustive_min(&p, &x, 24).unwrap();
        assert_eq!(min, 0);
        assert_eq!(pts.len(), 10);
    }

    #[test]
    fn annealing_is_deterministic_and_finds_ground_states() {
        let (p, x) = hamming(8, 3);
        let params = SaParams {
            reads: 20,
            sweeps: 200,
            seed: 7,
            ..SaParams::default()
        };
        let a = sa_sample(&p, &x, &params).unwrap();
        let b = sa_sample(&p, &x, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.energy
            == p.eval(&Assignment::from_pairs(
                x.iter().copied().zip(s.values.iter().copied())
            ))
            .unwrap()));
        assert!(a.iter().filter(|s| s.energy == 0).count() >= 18);
    }

    #[test]
    fn chi_square_of_perfectly_uniform_counts_is_zero() {
        let samples: Vec<Sample> = (0..4)
            .map(|i| Sample {
                values: vec![i % 2 == 0],
                energy: 0,
            })
            .collect();
        let stats = sample_stats(&samples, |s| Some(format!("{}", s.values[0])), Some(2));
        assert_eq!(stats.chi_square, Some(0.0));
        let stats = sample_stats(&samples, |s| Some(format!("{}", s.values[0])), Some(4));
        assert_eq!(stats.chi_square, Some(4.0));
    }
}
