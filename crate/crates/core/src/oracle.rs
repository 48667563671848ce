//! Reference answers computed directly on permutations, without any
//! polynomial.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::encodings::{
    group_names, Constraint, Construction, EncodingSpec, Solution, PI, PI_PRIME, SIGMA,
};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Largest number of permutation tuples the oracle will scan.
const MAX_TUPLES: usize = 20_000_000;

pub fn constraint_holds(c: &Constraint, s: &Solution) -> bool {
    let pi = &s[PI];
    match c {
        Constraint::FixValue { group, i, j } => s[group.as_str()].apply(*i) == *j,
        Constraint::ForbidValue { i, j } => pi.apply(*i) != *j,
        Constraint::FixedPoint(i) => pi.apply(*i) == *i,
        Constraint::Derangement => pi.fixed_points() == 0,
        Constraint::ForbidPerm(t) => pi != t,
        Constraint::Parity { odd } => pi.is_even() != *odd,
        Constraint::Involution => pi.power(2).is_identity(),
        Constraint::Power(r) => pi.power(*r).is_identity(),
        Constraint::Order(r) => pi.order() == *r,
        Constraint::Compose => s[SIGMA] == s[PI_PRIME].compose(pi),
        Constraint::Commute => pi.compose(&s[PI_PRIME]) == s[PI_PRIME].compose(pi),
        Constraint::Conjugate => {
            let sigma = &s[SIGMA];
            s[PI_PRIME] == sigma.inverse().compose(pi).compose(sigma)
        }
    }
}

/// Every solution of `spec` with the number of zeros the encoding should
/// have for it: one for permutation encodings, the number of pattern
/// occurrences for containment.
pub fn oracle_solutions(spec: &EncodingSpec) -> Result<BTreeMap<Solution, usize>> {
    let n = spec.n;
    match spec.construction {
        Construction::Match => {
            let pattern = spec
                .pattern
                .as_ref()
                .ok_or_else(|| Error::Unsupported("match needs a pattern".into()))?;
            Ok(Permutation::all(n)
                .filter_map(|p| {
                    let count = p.pattern_occurrences(pattern);
                    (count > 0).then(|| ([(PI.to_string(), p)].into(), count))
                })
                .collect())
        }
        Construction::Perm | Construction::Matrix => {
            let names = group_names(&spec.constraints);
            let size = (1..=n).product::<usize>().checked_pow(names.len() as u32);
            if size.is_none_or(|s| s > MAX_TUPLES) {
                return Err(Error::Unsupported(format!(
                    "oracle enumeration of {} groups at n = {n} is too large",
                    names.len()
                )));
            }
            let perms: Vec<Permutation> = Permutation::all(n).collect();
            Ok(names
                .iter()
                .map(|_| perms.iter())
                .multi_cartesian_product()
                .map(|tuple| -> Solution {
                    names
                        .iter()
                        .zip(tuple)
                        .map(|(name, p)| (name.to_string(), p.clone()))
                        .collect()
                })
                .filter(|s| spec.constraints.iter().all(|c| constraint_holds(c, s)))
                .map(|s| (s, 1))
                .collect())
        }
        Construction::Raw => Err(Error::Unsupported("a raw instance has no oracle".into())),
    }
}
