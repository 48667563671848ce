//! Degree reduction for multilinear polynomials.
//!
//! Two moves are provided: a negative monomial of degree `t ≥ 3` is replaced
//! by `|c|·z·(2t − 1 − 2Σxᵢ)`, and a product `xᵢxⱼ` is replaced by a fresh `z`
//! pinned through the penalty `α(xᵢxⱼ − z(2xᵢ + 2xⱼ − 3))`. Both keep the
//! minimising auxiliary value unique.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::pbf::{Bit, LinExpr, QuadPoly, Role, VarId, VariableRegistry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: i64,
    pub vars: BTreeSet<VarId>,
}

impl Monomial {
    pub fn new(coeff: i64, vars: impl IntoIterator<Item = VarId>) -> Self {
        Self {
            coeff,
            vars: vars.into_iter().collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }
}

/// A product `xᵢxⱼ` replaced by a fresh auxiliary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substitution {
    pub product: (VarId, VarId),
    pub replacement: VarId,
    pub alpha: i64,
}

/// Multilinear polynomial of arbitrary degree. Keys are sorted, duplicate-free
/// variable lists; the empty monomial lives in `offset`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiPoly {
    pub offset: i64,
    terms: BTreeMap<Vec<VarId>, i64>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self {
            offset: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(v: VarId) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![v], 1);
        p
    }

    pub fn bit(b: Bit) -> Self {
        Self::from_lin(&b.lin())
    }

    pub fn from_lin(e: &LinExpr) -> Self {
        let mut p = Self::constant(e.offset);
        for (v, c) in e.terms() {
            p.add_term(vec![v], c);
        }
        p
    }

    pub fn from_quad(q: &QuadPoly) -> Self {
        let mut p = Self::constant(q.offset());
        for (v, c) in q.linear() {
            p.add_term(vec![v], c);
        }
        for ((a, b), c) in q.quadratic() {
            p.add_term(vec![a, b], c);
        }
        p
    }

    pub fn from_monomials(offset: i64, monomials: &[Monomial]) -> Self {
        let mut p = Self::constant(offset);
        for m in monomials {
            p.add_term(m.vars.iter().copied().collect(), m.coeff);
        }
        p
    }

    /// Adds `c · Πvars`; `vars` need not be sorted or distinct.
    pub fn add_term(&mut self, mut vars: Vec<VarId>, c: i64) {
        if c == 0 {
            return;
        }
        vars.sort_unstable();
        vars.dedup();
        if vars.is_empty() {
            self.offset += c;
            return;
        }
        let entry = self.terms.entry(vars).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(vars, &c)| Monomial::new(c, vars.iter().copied()))
            .collect()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&mut self, other: &MultiPoly) {
        self.offset += other.offset;
        for (vars, &c) in &other.terms {
            self.add_term(vars.clone(), c);
        }
    }

    pub fn scale(&self, s: i64) -> MultiPoly {
        let mut out = MultiPoly::constant(self.offset * s);
        for (vars, &c) in &self.terms {
            out.add_term(vars.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::constant(self.offset * other.offset);
        for (vars, &c) in &self.terms {
            out.add_term(vars.clone(), c * other.offset);
        }
        for (vars, &c) in &other.terms {
            out.add_term(vars.clone(), c * self.offset);
        }
        for (va, &ca) in &self.terms {
            for (vb, &cb) in &other.terms {
                let mut vars = va.clone();
                vars.extend_from_slice(vb);
                out.add_term(vars, ca * cb);
            }
        }
        out
    }

    pub fn square(&self) -> MultiPoly {
        self.mul(self)
    }

    /// Monomials that contain both `a` and `b`.
    pub fn monomials_containing(&self, a: VarId, b: VarId) -> Vec<Monomial> {
        self.terms
            .iter()
            .filter(|(vars, _)| vars.binary_search(&a).is_ok() && vars.binary_search(&b).is_ok())
            .map(|(vars, &c)| Monomial::new(c, vars.iter().copied()))
            .collect()
    }

    fn occurs_in_high_degree(&self, a: VarId, b: VarId) -> bool {
        self.terms.keys().any(|vars| {
            vars.len() >= 3 && vars.binary_search(&a).is_ok() && vars.binary_search(&b).is_ok()
        })
    }

    /// Replaces `a·b` by `z` in every monomial that contains both.
    fn replace_product(&mut self, a: VarId, b: VarId, z: VarId) {
        let hits: Vec<Vec<VarId>> = self
            .terms
            .keys()
            .filter(|vars| vars.binary_search(&a).is_ok() && vars.binary_search(&b).is_ok())
            .cloned()
            .collect();
        for vars in hits {
            let c = self.terms.remove(&vars).unwrap_or(0);
            let mut reduced: Vec<VarId> = vars.into_iter().filter(|&v| v != a && v != b).collect();
            reduced.push(z);
            self.add_term(reduced, c);
        }
    }

    pub fn eval(&self, values: impl Fn(VarId) -> bool) -> i64 {
        self.offset
            + self
                .terms
                .iter()
                .filter(|(vars, _)| vars.iter().all(|&v| values(v)))
                .map(|(_, &c)| c)
                .sum::<i64>()
    }

    pub fn to_quad(&self) -> Result<QuadPoly> {
        let mut out = QuadPoly::constant(self.offset);
        for (vars, &c) in &self.terms {
            match vars.as_slice() {
                [v] => out.add_linear(*v, c),
                [a, b] => out.add_quadratic(*a, *b, c),
                _ => return Err(Error::NotQuadratic(vars.len())),
            }
        }
        Ok(out)
    }
}

/// `1 + Σ|cᵢ|` over the monomials served by one substitution.
pub fn choose_alpha(monomials: &[Monomial]) -> i64 {
    1 + monomials.iter().map(|m| m.coeff.abs()).sum::<i64>()
}

/// `α(xy − z(2x + 2y − 3))`: zero iff `z = xy`, at least `α` otherwise.
pub fn product_penalty(s: &Substitution) -> QuadPoly {
    product_penalty_bits(
        Bit::Var(s.product.0),
        Bit::Var(s.product.1),
        s.replacement,
        s.alpha,
    )
}

/// [`product_penalty`] over arbitrary literals.
pub fn product_penalty_bits(a: Bit, b: Bit, z: VarId, alpha: i64) -> QuadPoly {
    let la = a.lin();
    let lb = b.lin();
    let mut p = QuadPoly::lin_mul(&la, &lb);
    let inner = la.scale(2) + lb.scale(2) - LinExpr::constant(3);
    p.add_poly(&QuadPoly::lin_mul(&LinExpr::var(z), &inner).scale(-1));
    p.scale(alpha)
}

/// Replaces the negative monomial `c·x₁…x_t` (`c < 0`, `t ≥ 3`) by
/// `|c|·z·(2t − 1 − 2Σxᵢ)` with a fresh auxiliary `z`.
pub fn reduce_negative_monomial(m: &Monomial, reg: &mut VariableRegistry) -> Result<QuadPoly> {
    if m.coeff >= 0 {
        return Err(Error::OutOfRange {
            what: "negative monomial coefficient",
            value: m.coeff,
        });
    }
    let t = m.degree();
    if t < 3 {
        return Err(Error::DegreeTooLow(t));
    }
    let z = reg.fresh("neg", Role::Auxiliary);
    let mut inner = LinExpr::constant(2 * t as i64 - 1);
    for &v in &m.vars {
        inner.add_term(v, -2);
    }
    Ok(QuadPoly::lin_mul(&LinExpr::var(z), &inner).scale(m.coeff.abs()))
}

/// Substitutes `a·b` by a fresh auxiliary when the product occurs in a
/// monomial of degree three or more. The penalty is added to `p` and the
/// substitution returned.
pub fn substitute_product(
    p: &mut MultiPoly,
    a: VarId,
    b: VarId,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Option<Substitution> {
    if a == b || !p.occurs_in_high_degree(a, b) {
        return None;
    }
    Some(force_substitution(p, a, b, reg, stem))
}

/// Like [`substitute_product`] but introduces the auxiliary even when the
/// product only occurs in quadratic monomials (or not at all).
pub fn force_substitution(
    p: &mut MultiPoly,
    a: VarId,
    b: VarId,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Substitution {
    let alpha = choose_alpha(&p.monomials_containing(a, b));
    let z = reg.fresh(stem, Role::Auxiliary);
    p.replace_product(a, b, z);
    let sub = Substitution {
        product: (a.min(b), a.max(b)),
        replacement: z,
        alpha,
    };
    p.add(&MultiPoly::from_quad(&product_penalty(&sub)));
    sub
}

/// Reduces an arbitrary multilinear polynomial to a quadratic one.
///
/// Negative monomials of degree ≥ 3 get one auxiliary each. Positive ones are
/// then reduced by repeatedly substituting the pair shared by the most
/// remaining high-degree monomials, ties going to the smallest pair.
pub fn quadratize_poly(p: &MultiPoly, reg: &mut VariableRegistry) -> Result<QuadPoly> {
    let mut work = MultiPoly::constant(p.offset);
    let mut out = QuadPoly::zero();
    for m in p.monomials() {
        if m.coeff < 0 && m.degree() >= 3 {
            out.add_poly(&reduce_negative_monomial(&m, reg)?);
        } else {
            work.add_term(m.vars.iter().copied().collect(), m.coeff);
        }
    }
    loop {
        let mut counts: BTreeMap<(VarId, VarId), usize> = BTreeMap::new();
        for m in work.monomials().iter().filter(|m| m.degree() >= 3) {
            let vars: Vec<VarId> = m.vars.iter().copied().collect();
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    *counts.entry((vars[i], vars[j])).or_insert(0) += 1;
                }
            }
        }
        // BTreeMap iteration is ascending, so the first maximum is the
        // smallest pair.
        let Some((&(a, b), _)) = counts.iter().fold(
            None,
            |best: Option<(&(VarId, VarId), &usize)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            },
        ) else {
            break;
        };
        substitute_product(&mut work, a, b, reg, "sub");
    }
    out.add_poly(&work.to_quad()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::Assignment;

    fn vars(reg: &mut VariableRegistry, n: usize) -> Vec<VarId> {
        (0..n)
            .map(|i| reg.alloc(format!("x{}", i + 1), Role::Input).unwrap())
            .collect()
    }

    fn asg(vars: &[VarId], mask: u32) -> Assignment {
        Assignment::from_pairs(
            vars.iter()
                .enumerate()
                .map(|(i, &v)| (v, (mask >> i) & 1 == 1)),
        )
    }

    #[test]
    fn negative_cubic_example() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 3);
        let m = Monomial::new(-1, x.clone());
        let q = reduce_negative_monomial(&m, &mut reg).unwrap();
        let z = VarId(3);
        // z(5 - 2x1 - 2x2 - 2x3)
        assert_eq!(q.linear_coeff(z), 5);
        for &v in &x {
            assert_eq!(q.quadratic_coeff(z, v), -2);
        }
        let min_at = |mask: u32| {
            (0..2)
                .map(|zv| {
                    let mut a = asg(&x, mask);
                    a.set(z, zv == 1);
                    (q.eval(&a).unwrap(), zv)
                })
                .min()
                .unwrap()
        };
        assert_eq!(min_at(0b111), (-1, 1));
        assert_eq!(min_at(0b011), (0, 0));
        let q2 = reduce_negative_monomial(&Monomial::new(-2, x.clone()), &mut reg).unwrap();
        let z2 = VarId(4);
        assert_eq!(q2.relabel(|v| if v == z2 { z } else { v }), q.scale(2));
    }

    #[test]
    fn negative_monomial_minimum_is_exact_and_unique() {
        for t in 3..=5 {
            let mut reg = VariableRegistry::new();
            let x = vars(&mut reg, t);
            let q = reduce_negative_monomial(&Monomial::new(-3, x.clone()), &mut reg).unwrap();
            let z = VarId(t as u32);
            for mask in 0..(1u32 << t) {
                let vals: Vec<i64> = (0..2)
                    .map(|zv| {
                        let mut a = asg(&x, mask);
                        a.set(z, zv == 1);
                        q.eval(&a).unwrap()
                    })
                    .collect();
                let prod = if mask == (1 << t) - 1 { 1 } else { 0 };
                let min = *vals.iter().min().unwrap();
                assert_eq!(min, -3 * prod);
                assert_eq!(vals.iter().filter(|&&v| v == min).count(), 1);
                assert_eq!(vals[prod as usize], min);
            }
        }
    }

    #[test]
    fn reduce_rejects_low_degree() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        assert!(matches!(
            reduce_negative_monomial(&Monomial::new(-1, x), &mut reg),
            Err(Error::DegreeTooLow(2))
        ));
    }

    #[test]
    fn product_penalty_values() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 3);
        for alpha in 1..4 {
            let s = Substitution {
                product: (x[0], x[1]),
                replacement: x[2],
                alpha,
            };
            let p = product_penalty(&s);
            for mask in 0..8u32 {
                let v = p.eval(&asg(&x, mask)).unwrap();
                let (a, b, z) = (mask & 1, (mask >> 1) & 1, (mask >> 2) & 1);
                if z == a * b {
                    assert_eq!(v, 0);
                } else {
                    assert!(v >= alpha);
                }
            }
            assert_eq!(p.eval(&asg(&x, 0b011)).unwrap(), alpha);
            assert_eq!(p.eval(&asg(&x, 0b100)).unwrap(), 3 * alpha);
        }
    }

    #[test]
    fn alpha_rule() {
        let m = |c| Monomial::new(c, [VarId(0), VarId(1), VarId(2)]);
        assert_eq!(choose_alpha(&[m(-2)]), 3);
        assert_eq!(choose_alpha(&[m(2), m(-2)]), 5);
        assert_eq!(choose_alpha(&[m(1)]), 2);
    }

    #[test]
    fn quadratic_input_unchanged() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        let mut p = MultiPoly::constant(1);
        p.add_term(vec![x[0], x[1]], -3);
        p.add_term(vec![x[0]], 2);
        let q = quadratize_poly(&p, &mut reg).unwrap();
        assert_eq!(MultiPoly::from_quad(&q), p);
        assert_eq!(reg.len(), 2);
    }

    /// Zero sets of `p` and of `q` projected to the original variables,
    /// plus the number of auxiliary completions per zero.
    fn projected_zeros(p: &MultiPoly, q: &QuadPoly, x: &[VarId], aux: &[VarId]) {
        for mask in 0..(1u32 << x.len()) {
            let orig = p.eval(|v| {
                let i = x.iter().position(|&u| u == v).unwrap();
                (mask >> i) & 1 == 1
            });
            let mut best = i64::MAX;
            let mut count = 0;
            for amask in 0..(1u32 << aux.len()) {
                let mut a = asg(x, mask);
                for (i, &z) in aux.iter().enumerate() {
                    a.set(z, (amask >> i) & 1 == 1);
                }
                let v = q.eval(&a).unwrap();
                if v < best {
                    best = v;
                    count = 1;
                } else if v == best {
                    count += 1;
                }
            }
            assert_eq!(best, orig, "minimum over auxiliaries differs at {mask:b}");
            assert_eq!(count, 1, "minimiser not unique at {mask:b}");
        }
    }

    #[test]
    fn positive_cubic_substitution() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 3);
        let mut p = MultiPoly::zero();
        p.add_term(x.clone(), 1);
        let q = quadratize_poly(&p, &mut reg).unwrap();
        assert_eq!(reg.len(), 4);
        let z = VarId(3);
        // x3 z + 2(x1 x2 - 2 x1 z - 2 x2 z + 3 z)
        assert_eq!(q.quadratic_coeff(x[2], z), 1);
        assert_eq!(q.quadratic_coeff(x[0], x[1]), 2);
        assert_eq!(q.linear_coeff(z), 6);
        projected_zeros(&p, &q, &x, &[z]);
    }

    #[test]
    fn negative_quartic_uses_one_auxiliary() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 4);
        let mut p = MultiPoly::zero();
        p.add_term(x.clone(), -1);
        let q = quadratize_poly(&p, &mut reg).unwrap();
        assert_eq!(reg.len(), 5);
        projected_zeros(&p, &q, &x, &[VarId(4)]);
    }

    #[test]
    fn mixed_polynomial_preserves_minima() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 5);
        let mut p = MultiPoly::constant(3);
        p.add_term(vec![x[0], x[1], x[2]], 2);
        p.add_term(vec![x[0], x[1], x[3]], 1);
        p.add_term(vec![x[1], x[2], x[3], x[4]], 3);
        p.add_term(vec![x[0], x[2], x[4]], -2);
        p.add_term(vec![x[3]], -1);
        let q = quadratize_poly(&p, &mut reg).unwrap();
        let aux: Vec<VarId> = (5..reg.len() as u32).map(VarId).collect();
        assert!(aux.len() <= 6);
        projected_zeros(&p, &q, &x, &aux);
    }

    #[test]
    fn substitution_is_skipped_for_quadratic_products() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 3);
        let mut p = MultiPoly::zero();
        p.add_term(vec![x[0], x[1]], 4);
        assert!(substitute_product(&mut p, x[0], x[1], &mut reg, "d").is_none());
        p.add_term(vec![x[0], x[1], x[2]], -2);
        let s = substitute_product(&mut p, x[0], x[1], &mut reg, "d").unwrap();
        assert_eq!(s.alpha, 1 + 4 + 2);
        assert_eq!(p.degree(), 2);
    }
}
