//! Plain permutations of `{1, …, n}` in one-line notation.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `π` stored as `(π(1), …, π(n))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!("{values:?}")));
            }
            seen[v - 1] = true;
        }
        Ok(Self(values))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    /// All permutations of `{1, …, n}` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (1..=n).permutations(n).map(Permutation)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `π(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&j| self.apply(j)).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation(inv)
    }

    pub fn inversions(&self) -> usize {
        self.0
            .iter()
            .tuple_combinations()
            .filter(|(a, b)| a > b)
            .count()
    }

    pub fn is_even(&self) -> bool {
        self.inversions().is_multiple_of(2)
    }

    pub fn power(&self, r: usize) -> Permutation {
        (0..r).fold(Permutation::identity(self.len()), |acc, _| {
            self.compose(&acc)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// Smallest `r ≥ 1` with `π^r = id`.
    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut r = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            r += 1;
        }
        r
    }

    pub fn fixed_points(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, &v)| v == i + 1)
            .count()
    }

    /// Whether some subsequence of `self` is order-isomorphic to `pattern`.
    pub fn contains_pattern(&self, pattern: &Permutation) -> bool {
        (0..self.len()).combinations(pattern.len()).any(|idx| {
            idx.iter()
                .tuple_combinations()
                .zip(pattern.0.iter().tuple_combinations())
                .all(|((&a, &b), (pa, pb))| (self.0[a] < self.0[b]) == (pa < pb))
        })
    }

    /// Number of index sets whose values are order-isomorphic to `pattern`.
    pub fn pattern_occurrences(&self, pattern: &Permutation) -> usize {
        (0..self.len())
            .combinations(pattern.len())
            .filter(|idx| {
                idx.iter()
                    .tuple_combinations()
                    .zip(pattern.0.iter().tuple_combinations())
                    .all(|((&a, &b), (pa, pb))| (self.0[a] < self.0[b]) == (pa < pb))
            })
            .count()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `2,3,1` or `(2,3,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let values = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad permutation entry `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Permutation::new(v).map_err(serde::de::Error::custom)
    }
}
