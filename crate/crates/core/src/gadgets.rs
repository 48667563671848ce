//! Cardinality gadgets over bits: exact count, lower bound and parity.

use crate::circuit::{Element, Fragment, IntRegister, RegisterRule};
use crate::pbf::{Bit, LinExpr, QuadPoly, Role, VariableRegistry};

/// Smallest `t` with `2^t − 1 ≥ max_excess`.
pub fn register_width(max_excess: i64) -> usize {
    let mut t = 0;
    while (1i64 << t) - 1 < max_excess {
        t += 1;
    }
    t
}

/// `(Σbits − k)²`: zero exactly when `k` of the bits are set.
pub fn hamming_eq(bits: &[Bit], k: usize) -> Fragment {
    let expr = LinExpr::sum(bits) - LinExpr::constant(k as i64);
    Fragment::new(QuadPoly::lin_square(&expr), Element::Square { expr })
}

/// `(Σbits − k − Y)²` with an auxiliary register `Y`: zero exactly when at
/// least `k` bits are set (and `Y` holds the excess).
pub fn threshold_ge(bits: &[Bit], k: usize, reg: &mut VariableRegistry, stem: &str) -> Fragment {
    let width = register_width(bits.len() as i64 - k as i64);
    let register = IntRegister {
        bits: reg.fresh_many(stem, width, Role::Auxiliary),
        unit: 1,
    };
    let expr = LinExpr::sum(bits) - LinExpr::constant(k as i64) - register.lin();
    Fragment::new(
        QuadPoly::lin_square(&expr),
        Element::Register {
            rule: RegisterRule::AtLeast(k),
            bits: bits.to_vec(),
            register,
        },
    )
}

/// `(Σbits − odd − E)²` with an even-valued register `E = 2Σ2ⁱyᵢ`.
fn parity(bits: &[Bit], odd: bool, reg: &mut VariableRegistry, stem: &str) -> Fragment {
    let half_max = (bits.len() as i64 - odd as i64).max(0) / 2;
    let register = IntRegister {
        bits: reg.fresh_many(stem, register_width(half_max), Role::Auxiliary),
        unit: 2,
    };
    let expr = LinExpr::sum(bits) - LinExpr::constant(odd as i64) - register.lin();
    Fragment::new(
        QuadPoly::lin_square(&expr),
        Element::Register {
            rule: RegisterRule::Parity { odd },
            bits: bits.to_vec(),
            register,
        },
    )
}

/// Zero exactly when an even number of bits is set.
pub fn parity_even(bits: &[Bit], reg: &mut VariableRegistry, stem: &str) -> Fragment {
    parity(bits, false, reg, stem)
}

/// Zero exactly when an odd number of bits is set.
pub fn parity_odd(bits: &[Bit], reg: &mut VariableRegistry, stem: &str) -> Fragment {
    parity(bits, true, reg, stem)
}
