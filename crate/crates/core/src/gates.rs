//! Comparison, swap and compare-exchange gates.
//!
//! Gates are written as multilinear polynomials first; every cubic product
//! is then replaced by a named auxiliary through a product penalty, so the
//! result is quadratic and each auxiliary is a function of the gate's
//! relation variables.

use crate::circuit::{CompareOp, Element, Fragment, Product};
use crate::error::{Error, Result};
use crate::pbf::{Bit, Bus, LinExpr, Role, VarId, VariableRegistry};
use crate::quadratize::{force_substitution, substitute_product, MultiPoly};

fn check_widths(x: &Bus, y: &Bus) -> Result<()> {
    if x.width() != y.width() {
        return Err(Error::WidthMismatch {
            expected: x.width(),
            found: y.width(),
        });
    }
    Ok(())
}

/// `x + y − 2xy`
fn xor(x: Bit, y: Bit) -> MultiPoly {
    let (mx, my) = (MultiPoly::bit(x), MultiPoly::bit(y));
    let mut out = mx.clone();
    out.add(&my);
    out.add(&mx.mul(&my).scale(-2));
    out
}

fn substitute(
    p: &mut MultiPoly,
    a: Bit,
    b: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
    products: &mut Vec<Product>,
) {
    if let (Some(a), Some(b)) = (a.var(), b.var()) {
        if let Some(s) = substitute_product(p, a, b, reg, stem) {
            products.push(Product {
                a: s.product.0,
                b: s.product.1,
                z: s.replacement,
            });
        }
    }
}

/// Penalty that vanishes exactly when `c = op(x, y)`.
///
/// `k + 1` selectors pick the most significant differing bit (`p₀` when
/// `x = y`). Order gates use `3k + 1` auxiliaries, equality gates `2k + 1`.
pub fn compare_gate(
    op: CompareOp,
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    check_widths(x, y)?;
    let k = x.width();
    let selectors = reg.fresh_many(&format!("{stem}.p"), k + 1, Role::Auxiliary);
    let p = |i: usize| MultiPoly::var(selectors[i]);
    let cm = MultiPoly::bit(c);
    let diffs: Vec<MultiPoly> = (0..k).map(|j| xor(x.bit(j), y.bit(j))).collect();

    let mut sum = LinExpr::constant(-1);
    for &s in &selectors {
        sum.add_term(s, 1);
    }
    let mut poly = MultiPoly::from_lin(&sum).square();

    // No bit above the selected one may differ.
    for i in 0..=k {
        for d in &diffs[i..] {
            poly.add(&p(i).mul(d));
        }
    }

    for i in 1..=k {
        let (xi, yi) = (MultiPoly::bit(x.bit(i - 1)), MultiPoly::bit(y.bit(i - 1)));
        let local = match op {
            // 1 + (1 − 2c)(x − y): zero iff the bits differ and c agrees.
            CompareOp::Gt | CompareOp::Gte => {
                let mut h = MultiPoly::constant(1);
                let mut sign = MultiPoly::constant(1);
                sign.add(&cm.scale(-2));
                let mut delta = xi;
                delta.add(&yi.scale(-1));
                h.add(&sign.mul(&delta));
                h
            }
            // 1 − (x ⊕ y): the selected bit must differ.
            CompareOp::Eq | CompareOp::Neq => {
                let mut h = MultiPoly::constant(1);
                h.add(&diffs[i - 1].scale(-1));
                h
            }
        };
        poly.add(&p(i).mul(&local));
    }

    let p0 = p(0);
    match op {
        CompareOp::Gt => poly.add(&p0.mul(&cm)),
        CompareOp::Gte => {
            let mut not_c = MultiPoly::constant(1);
            not_c.add(&cm.scale(-1));
            poly.add(&p0.mul(&not_c));
        }
        CompareOp::Eq => {
            let mut e = p0;
            e.add(&cm.scale(-1));
            poly.add(&e.square());
        }
        CompareOp::Neq => {
            let mut e = p0;
            e.add(&cm);
            e.add(&MultiPoly::constant(-1));
            poly.add(&e.square());
        }
    }

    let mut products = Vec::new();
    let d_stem = format!("{stem}.d");
    for j in 0..k {
        substitute(&mut poly, x.bit(j), y.bit(j), reg, &d_stem, &mut products);
    }
    if matches!(op, CompareOp::Gt | CompareOp::Gte) {
        let e_stem = format!("{stem}.e");
        for &s in &selectors[1..] {
            substitute(&mut poly, Bit::Var(s), c, reg, &e_stem, &mut products);
        }
    }

    Ok(Fragment::new(
        poly.to_quad()?,
        Element::Compare {
            op,
            x: x.clone(),
            y: y.clone(),
            c,
            selectors,
            products,
        },
    ))
}

pub fn gt_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Gt, x, y, c, reg, stem)
}

pub fn gte_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Gte, x, y, c, reg, stem)
}

/// `c = (x < y)`, built as `y > x`.
pub fn lt_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Gt, y, x, c, reg, stem)
}

/// `c = (x ≤ y)`, built as `y ≥ x`.
pub fn lte_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Gte, y, x, c, reg, stem)
}

pub fn eq_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Eq, x, y, c, reg, stem)
}

pub fn neq_gate(
    x: &Bus,
    y: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    compare_gate(CompareOp::Neq, x, y, c, reg, stem)
}

/// Controlled swap of two buses: `(y1, y2) = c ? (x2, x1) : (x1, x2)`.
///
/// Each bit contributes `(y1 − g(x1, x2))² + (y2 − g(x2, x1))²` with
/// `g(a, b) = (1 − c)a + cb`, and the products `c·x1`, `c·x2` become two
/// auxiliaries per bit.
pub fn swap_gate(
    x1: &Bus,
    x2: &Bus,
    y1: &Bus,
    y2: &Bus,
    c: Bit,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    check_widths(x1, x2)?;
    check_widths(x1, y1)?;
    check_widths(x1, y2)?;
    let cm = MultiPoly::bit(c);
    let select = |a: &MultiPoly, b: &MultiPoly| {
        let mut g = a.clone();
        let mut delta = b.clone();
        delta.add(&a.scale(-1));
        g.add(&cm.mul(&delta));
        g
    };
    let mut out = Fragment::default();
    let a_stem = format!("{stem}.s");
    for j in 0..x1.width() {
        let (a, b) = (MultiPoly::bit(x1.bit(j)), MultiPoly::bit(x2.bit(j)));
        let mut e1 = MultiPoly::bit(y1.bit(j));
        e1.add(&select(&a, &b).scale(-1));
        let mut e2 = MultiPoly::bit(y2.bit(j));
        e2.add(&select(&b, &a).scale(-1));
        let mut poly = e1.square();
        poly.add(&e2.square());

        let mut products = Vec::new();
        for x in [x1.bit(j), x2.bit(j)] {
            if let (Some(cv), Some(xv)) = (c.var(), x.var()) {
                if cv != xv {
                    let s = force_substitution(&mut poly, cv, xv, reg, &a_stem);
                    products.push(Product {
                        a: s.product.0,
                        b: s.product.1,
                        z: s.replacement,
                    });
                }
            }
        }
        out.absorb(Fragment::new(
            poly.to_quad()?,
            Element::Swap1 {
                x1: x1.bit(j),
                x2: x2.bit(j),
                y1: y1.bit(j),
                y2: y2.bit(j),
                c,
                products,
            },
        ));
    }
    Ok(out)
}

/// Compare-exchange: `c = (key(x) > key(y))` and the buses are swapped when
/// `c` is set, so `y1` receives the smaller key. The key is the `key_width`
/// most significant bits of each bus.
#[allow(clippy::too_many_arguments)]
pub fn ce_gate(
    x1: &Bus,
    x2: &Bus,
    y1: &Bus,
    y2: &Bus,
    c: Bit,
    key_width: usize,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<Fragment> {
    check_widths(x1, x2)?;
    if key_width == 0 || key_width > x1.width() {
        return Err(Error::OutOfRange {
            what: "key width",
            value: key_width as i64,
        });
    }
    let mut out = compare_gate(
        CompareOp::Gt,
        &x1.high(key_width),
        &x2.high(key_width),
        c,
        reg,
        stem,
    )?;
    out.absorb(swap_gate(x1, x2, y1, y2, c, reg, stem)?);
    Ok(out)
}

/// Allocates output buses and a control variable and builds a full-key
/// compare-exchange on them.
pub fn ce_gate_fresh(
    x1: &Bus,
    x2: &Bus,
    reg: &mut VariableRegistry,
    stem: &str,
) -> Result<(Fragment, Bus, Bus, VarId)> {
    let y1 = Bus::alloc(reg, &format!("{stem}.y1"), x1.width(), Role::Output);
    let y2 = Bus::alloc(reg, &format!("{stem}.y2"), x1.width(), Role::Output);
    let c = reg.fresh(&format!("{stem}.c"), Role::Control);
    let f = ce_gate(x1, x2, &y1, &y2, Bit::Var(c), x1.width(), reg, stem)?;
    Ok((f, y1, y2, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbf::{Assignment, QuadPoly};

    /// For each relation point: (min over auxiliaries, number of minimisers).
    fn profile(poly: &QuadPoly, rel: &[VarId], aux: &[VarId]) -> Vec<(u64, i64, usize)> {
        let mut out = Vec::new();
        for mask in 0..(1u64 << rel.len()) {
            let mut best = i64::MAX;
            let mut count = 0;
            for amask in 0..(1u64 << aux.len()) {
                let mut asg = Assignment::new();
                for (i, &v) in rel.iter().enumerate() {
                    asg.set(v, (mask >> i) & 1 == 1);
                }
                for (i, &v) in aux.iter().enumerate() {
                    asg.set(v, (amask >> i) & 1 == 1);
                }
                let e = poly.eval(&asg).unwrap();
                if e < best {
                    best = e;
                    count = 1;
                } else if e == best {
                    count += 1;
                }
            }
            out.push((mask, best, count));
        }
        out
    }

    fn check_compare(op: CompareOp, k: usize) {
        let mut reg = VariableRegistry::new();
        let x = Bus::alloc(&mut reg, "x", k, Role::Input);
        let y = Bus::alloc(&mut reg, "y", k, Role::Input);
        let c = reg.fresh("c", Role::Control);
        let rel: Vec<VarId> = (0..reg.len() as u32).map(VarId).collect();
        let f = compare_gate(op, &x, &y, Bit::Var(c), &mut reg, "g").unwrap();
        let aux = reg.with_role(Role::Auxiliary);
        let expected = match op {
            CompareOp::Gt | CompareOp::Gte => 3 * k + 1,
            CompareOp::Eq | CompareOp::Neq => 2 * k + 1,
        };
        assert_eq!(aux.len(), expected, "{op:?} k={k}");
        for (mask, min, count) in profile(&f.poly, &rel, &aux) {
            let xv = mask & ((1 << k) - 1);
            let yv = (mask >> k) & ((1 << k) - 1);
            let cv = (mask >> (2 * k)) & 1 == 1;
            if cv == op.holds(xv, yv) {
                assert_eq!((min, count), (0, 1), "{op:?} x={xv} y={yv} c={cv}");
            } else {
                assert!(min > 0, "{op:?} x={xv} y={yv} c={cv}");
            }
        }
    }

    #[test]
    fn compare_gates_small_widths() {
        for op in [CompareOp::Gt, CompareOp::Gte, CompareOp::Eq, CompareOp::Neq] {
            for k in 1..=2 {
                check_compare(op, k);
            }
        }
    }

    #[test]
    fn swap_gate_relation() {
        let mut reg = VariableRegistry::new();
        let x1 = Bus::alloc(&mut reg, "a", 1, Role::Input);
        let x2 = Bus::alloc(&mut reg, "b", 1, Role::Input);
        let y1 = Bus::alloc(&mut reg, "p", 1, Role::Output);
        let y2 = Bus::alloc(&mut reg, "q", 1, Role::Output);
        let c = reg.fresh("c", Role::Control);
        let rel: Vec<VarId> = (0..5).map(VarId).collect();
        let f = swap_gate(&x1, &x2, &y1, &y2, Bit::Var(c), &mut reg, "s").unwrap();
        let aux = reg.with_role(Role::Auxiliary);
        assert_eq!(aux.len(), 2);
        for (mask, min, count) in profile(&f.poly, &rel, &aux) {
            let b = |i: u32| (mask >> i) & 1;
            let ok = if b(4) == 1 {
                b(2) == b(1) && b(3) == b(0)
            } else {
                b(2) == b(0) && b(3) == b(1)
            };
            if ok {
                assert_eq!((min, count), (0, 1));
            } else {
                assert!(min > 0);
            }
        }
    }

    #[test]
    fn propagation_reaches_zero() {
        let mut reg = VariableRegistry::new();
        let x = Bus::alloc(&mut reg, "x", 3, Role::Input);
        let y = Bus::alloc(&mut reg, "y", 3, Role::Input);
        let (f, o1, o2, _) = ce_gate_fresh(&x, &y, &mut reg, "g").unwrap();
        for (xv, yv) in [(5u64, 3u64), (2, 6), (4, 4)] {
            let mut asg = Assignment::new();
            x.assign(&mut asg, xv);
            y.assign(&mut asg, yv);
            while f
                .elements
                .iter()
                .fold(false, |acc, e| e.propagate(&mut asg) | acc)
            {}
            assert_eq!(f.poly.eval(&asg).unwrap(), 0);
            assert_eq!(o1.value(&asg).unwrap(), xv.min(yv));
            assert_eq!(o2.value(&asg).unwrap(), xv.max(yv));
        }
    }
}
