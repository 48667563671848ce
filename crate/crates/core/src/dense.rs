//! Index-based view of a quadratic polynomial for tight loops.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pbf::{QuadPoly, VarId};

/// Dense quadratic form used for fast enumeration.
pub(crate) struct Dense {
    pub offset: i64,
    pub linear: Vec<i64>,
    pub neighbours: Vec<Vec<(usize, i64)>>,
}

impl Dense {
    pub fn new(poly: &QuadPoly, vars: &[VarId]) -> Result<Self> {
        let index: HashMap<VarId, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let pos = |v: VarId| index.get(&v).copied().ok_or(Error::Unassigned(v));
        let mut linear = vec![0; vars.len()];
        let mut neighbours = vec![Vec::new(); vars.len()];
        for (v, c) in poly.linear() {
            linear[pos(v)?] += c;
        }
        for ((a, b), c) in poly.quadratic() {
            let (i, j) = (pos(a)?, pos(b)?);
            neighbours[i].push((j, c));
            neighbours[j].push((i, c));
        }
        Ok(Self {
            offset: poly.offset(),
            linear,
            neighbours,
        })
    }

    pub fn energy(&self, x: &[bool]) -> i64 {
        let mut e = self.offset;
        for (i, &xi) in x.iter().enumerate() {
            if xi {
                e += self.linear[i];
                for &(j, c) in &self.neighbours[i] {
                    if j > i && x[j] {
                        e += c;
                    }
                }
            }
        }
        e
    }

    /// Energy change from flipping `i`.
    pub fn delta(&self, x: &[bool], i: usize) -> i64 {
        let mut field = self.linear[i];
        for &(j, c) in &self.neighbours[i] {
            if x[j] {
                field += c;
            }
        }
        if x[i] {
            -field
        } else {
            field
        }
    }
}
