//! Structural records of the gadgets that make up a polynomial.
//!
//! Every builder emits, next to its polynomial, one [`Element`] per gadget.
//! An element knows the relation its gadget represents and how to fill in
//! forced values (outputs, controls, auxiliaries) from values that are
//! already known. Verification uses these to construct zero witnesses and to
//! look up which gadget kinds need local certificates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pbf::{Assignment, Bit, Bus, LinExpr, QuadPoly, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareOp {
    Gt,
    Gte,
    Eq,
    Neq,
}

impl CompareOp {
    pub fn holds(self, x: u64, y: u64) -> bool {
        match self {
            CompareOp::Gt => x > y,
            CompareOp::Gte => x >= y,
            CompareOp::Eq => x == y,
            CompareOp::Neq => x != y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CompareOp::Gt => "gt",
            CompareOp::Gte => "gte",
            CompareOp::Eq => "eq",
            CompareOp::Neq => "neq",
        }
    }
}

/// Integer register `Y = unit · Σ 2^i yᵢ` built from auxiliary bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntRegister {
    pub bits: Vec<VarId>,
    pub unit: i64,
}

impl IntRegister {
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn max_value(&self) -> i64 {
        self.unit * ((1i64 << self.bits.len()) - 1)
    }

    pub fn lin(&self) -> LinExpr {
        let mut e = LinExpr::zero();
        for (i, &v) in self.bits.iter().enumerate() {
            e.add_term(v, self.unit << i);
        }
        e
    }

    pub fn value(&self, asg: &Assignment) -> Option<i64> {
        self.lin().eval(asg).ok()
    }

    /// Writes `value` into the register bits when it is representable,
    /// otherwise zero.
    fn assign(&self, asg: &mut Assignment, value: i64) -> bool {
        let repr = if value >= 0 && value % self.unit == 0 && value <= self.max_value() {
            value / self.unit
        } else {
            0
        };
        let mut progress = false;
        for (i, &v) in self.bits.iter().enumerate() {
            progress |= Bit::Var(v).assign(asg, (repr >> i) & 1 == 1);
        }
        progress
    }
}

/// Auxiliary `z` standing for the product of two variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Product {
    pub a: VarId,
    pub b: VarId,
    pub z: VarId,
}

impl Product {
    fn propagate(&self, asg: &mut Assignment) -> bool {
        match (asg.get(self.a), asg.get(self.b)) {
            (Some(a), Some(b)) => Bit::Var(self.z).assign(asg, a && b),
            _ => false,
        }
    }
}

/// A gadget polynomial together with the elements that describe it.
/// `parts[i]` is the polynomial contributed by `elements[i]`; `poly` is
/// their sum.
#[derive(Debug, Clone, Default)]
pub struct Fragment {
    pub poly: QuadPoly,
    pub elements: Vec<Element>,
    pub parts: Vec<QuadPoly>,
}

impl Fragment {
    pub fn new(poly: QuadPoly, element: Element) -> Self {
        Self {
            poly: poly.clone(),
            elements: vec![element],
            parts: vec![poly],
        }
    }

    pub fn absorb(&mut self, other: Fragment) {
        self.poly.add_poly(&other.poly);
        self.elements.extend(other.elements);
        self.parts.extend(other.parts);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegisterRule {
    /// `Σbits − k = Y`
    AtLeast(usize),
    /// `Σbits − parity = Y` with `Y` even-valued.
    Parity { odd: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Element {
    /// One bit of a controlled swap: `(y1, y2) = c ? (x2, x1) : (x1, x2)`.
    Swap1 {
        x1: Bit,
        x2: Bit,
        y1: Bit,
        y2: Bit,
        c: Bit,
        products: Vec<Product>,
    },
    /// `c = op(x, y)` with selectors `p₀…p_k`; `pᵢ` marks the most
    /// significant differing bit (`p₀`: none differs).
    Compare {
        op: CompareOp,
        x: Bus,
        y: Bus,
        c: Bit,
        selectors: Vec<VarId>,
        products: Vec<Product>,
    },
    /// Cardinality gadget backed by an integer register.
    Register {
        rule: RegisterRule,
        bits: Vec<Bit>,
        register: IntRegister,
    },
    /// `expr² = 0`, no auxiliaries.
    Square { expr: LinExpr },
    /// Standalone product penalty `z = a·b`; `z` is a wire that other
    /// elements read, so it counts as a relation variable.
    Product {
        a: Bit,
        b: Bit,
        z: VarId,
        alpha: i64,
    },
}

/// Certificate key: every element of the same kind is the same polynomial up
/// to renaming, negation and constant folding of its relation variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Swap1,
    Compare { op: CompareOp, width: usize },
    Threshold { len: usize, k: usize, width: usize },
    Parity { len: usize, odd: bool, width: usize },
    Square,
    Product { alpha: i64 },
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKind::Swap1 => write!(f, "swap1"),
            ElementKind::Compare { op, width } => write!(f, "{}[k={width}]", op.name()),
            ElementKind::Threshold { len, k, width } => {
                write!(f, "threshold[n={len},k={k},t={width}]")
            }
            ElementKind::Parity { len, odd, width } => write!(
                f,
                "{}[n={len},t={width}]",
                if *odd { "odd" } else { "even" }
            ),
            ElementKind::Square => write!(f, "square"),
            ElementKind::Product { alpha } => write!(f, "product[alpha={alpha}]"),
        }
    }
}

fn set(bit: Bit, asg: &mut Assignment, value: bool) -> bool {
    bit.assign(asg, value)
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Swap1 { .. } => ElementKind::Swap1,
            Element::Compare { op, x, .. } => ElementKind::Compare {
                op: *op,
                width: x.width(),
            },
            Element::Register {
                rule: RegisterRule::AtLeast(k),
                bits,
                register,
            } => ElementKind::Threshold {
                len: bits.len(),
                k: *k,
                width: register.width(),
            },
            Element::Register {
                rule: RegisterRule::Parity { odd },
                bits,
                register,
            } => ElementKind::Parity {
                len: bits.len(),
                odd: *odd,
                width: register.width(),
            },
            Element::Square { .. } => ElementKind::Square,
            Element::Product { alpha, .. } => ElementKind::Product { alpha: *alpha },
        }
    }

    /// Fills in values forced by the element's relation. Already assigned
    /// variables are never overwritten; a clash leaves the point infeasible,
    /// which evaluation reports as a positive value.
    pub fn propagate(&self, asg: &mut Assignment) -> bool {
        match self {
            Element::Swap1 {
                x1,
                x2,
                y1,
                y2,
                c,
                products,
            } => {
                let mut progress = false;
                if let Some(cv) = c.get(asg) {
                    let (v1, v2) = (x1.get(asg), x2.get(asg));
                    let (w1, w2) = if cv { (v2, v1) } else { (v1, v2) };
                    if let Some(w) = w1 {
                        progress |= set(*y1, asg, w);
                    }
                    if let Some(w) = w2 {
                        progress |= set(*y2, asg, w);
                    }
                    let (o1, o2) = (y1.get(asg), y2.get(asg));
                    let (i1, i2) = if cv { (o2, o1) } else { (o1, o2) };
                    if let Some(v) = i1 {
                        progress |= set(*x1, asg, v);
                    }
                    if let Some(v) = i2 {
                        progress |= set(*x2, asg, v);
                    }
                }
                for p in products {
                    progress |= p.propagate(asg);
                }
                progress
            }
            Element::Compare {
                op,
                x,
                y,
                c,
                selectors,
                products,
            } => {
                let mut progress = false;
                if let (Some(xv), Some(yv)) = (x.get(asg), y.get(asg)) {
                    progress |= set(*c, asg, op.holds(xv, yv));
                    let top = (u64::BITS - (xv ^ yv).leading_zeros()) as usize;
                    for (i, &p) in selectors.iter().enumerate() {
                        progress |= Bit::Var(p).assign(asg, i == top);
                    }
                }
                for p in products {
                    progress |= p.propagate(asg);
                }
                progress
            }
            Element::Register {
                rule,
                bits,
                register,
            } => {
                let mut sum = 0i64;
                for b in bits {
                    match b.get(asg) {
                        Some(v) => sum += v as i64,
                        None => return false,
                    }
                }
                let target = match rule {
                    RegisterRule::AtLeast(k) => sum - *k as i64,
                    RegisterRule::Parity { odd } => sum - *odd as i64,
                };
                register.assign(asg, target)
            }
            Element::Square { expr } => {
                let (partial, unknown) = expr.partial_eval(asg);
                match unknown.as_slice() {
                    [(v, c)] if c.abs() == 1 => {
                        let value = -partial * c;
                        if value == 0 || value == 1 {
                            Bit::Var(*v).assign(asg, value == 1)
                        } else {
                            false
                        }
                    }
                    _ => false,
                }
            }
            Element::Product { a, b, z, .. } => match (a.get(asg), b.get(asg)) {
                (Some(false), _) | (_, Some(false)) => Bit::Var(*z).assign(asg, false),
                (Some(true), Some(true)) => Bit::Var(*z).assign(asg, true),
                _ => false,
            },
        }
    }

    /// Whether the element's defining relation holds on its relation
    /// variables (auxiliaries excluded). `None` when something is unassigned.
    pub fn relation_holds(&self, asg: &Assignment) -> Option<bool> {
        match self {
            Element::Swap1 {
                x1, x2, y1, y2, c, ..
            } => {
                let (a, b, p, q, cv) = (
                    x1.get(asg)?,
                    x2.get(asg)?,
                    y1.get(asg)?,
                    y2.get(asg)?,
                    c.get(asg)?,
                );
                Some(if cv {
                    p == b && q == a
                } else {
                    p == a && q == b
                })
            }
            Element::Compare { op, x, y, c, .. } => {
                Some(c.get(asg)? == op.holds(x.get(asg)?, y.get(asg)?))
            }
            Element::Register {
                rule,
                bits,
                register,
            } => {
                let mut sum = 0i64;
                for b in bits {
                    sum += b.get(asg)? as i64;
                }
                let target = match rule {
                    RegisterRule::AtLeast(k) => sum - *k as i64,
                    RegisterRule::Parity { odd } => sum - *odd as i64,
                };
                Some(target >= 0 && target % register.unit == 0 && target <= register.max_value())
            }
            Element::Square { expr } => Some(expr.eval(asg).ok()? == 0),
            Element::Product { a, b, z, .. } => Some(asg.get(*z)? == (a.get(asg)? && b.get(asg)?)),
        }
    }

    /// Bits the relation is stated over, in a fixed order.
    pub fn relation_bits(&self) -> Vec<Bit> {
        match self {
            Element::Swap1 {
                x1, x2, y1, y2, c, ..
            } => vec![*x1, *x2, *y1, *y2, *c],
            Element::Compare { x, y, c, .. } => {
                let mut bits = x.bits().to_vec();
                bits.extend_from_slice(y.bits());
                bits.push(*c);
                bits
            }
            Element::Register { bits, .. } => bits.clone(),
            Element::Square { expr } => expr.terms().map(|(v, _)| Bit::Var(v)).collect(),
            Element::Product { a, b, z, .. } => vec![*a, *b, Bit::Var(*z)],
        }
    }

    /// Auxiliaries owned by this element, in a fixed order.
    pub fn aux_vars(&self) -> Vec<VarId> {
        match self {
            Element::Swap1 { products, .. } => products.iter().map(|p| p.z).collect(),
            Element::Compare {
                selectors,
                products,
                ..
            } => selectors
                .iter()
                .copied()
                .chain(products.iter().map(|p| p.z))
                .collect(),
            Element::Register { register, .. } => register.bits.clone(),
            Element::Square { .. } => Vec::new(),
            Element::Product { .. } => Vec::new(),
        }
    }

    /// The same element with every variable renamed through `f`.
    pub fn map_vars(&self, f: &impl Fn(VarId) -> VarId) -> Element {
        let bit = |b: &Bit| match *b {
            Bit::Const(v) => Bit::Const(v),
            Bit::Var(v) => Bit::Var(f(v)),
            Bit::NegVar(v) => Bit::NegVar(f(v)),
        };
        let bus = |b: &Bus| Bus::new(b.bits().iter().map(bit).collect());
        let prod = |p: &Product| Product {
            a: f(p.a),
            b: f(p.b),
            z: f(p.z),
        };
        match self {
            Element::Swap1 {
                x1,
                x2,
                y1,
                y2,
                c,
                products,
            } => Element::Swap1 {
                x1: bit(x1),
                x2: bit(x2),
                y1: bit(y1),
                y2: bit(y2),
                c: bit(c),
                products: products.iter().map(prod).collect(),
            },
            Element::Compare {
                op,
                x,
                y,
                c,
                selectors,
                products,
            } => Element::Compare {
                op: *op,
                x: bus(x),
                y: bus(y),
                c: bit(c),
                selectors: selectors.iter().map(|&v| f(v)).collect(),
                products: products.iter().map(prod).collect(),
            },
            Element::Register {
                rule,
                bits,
                register,
            } => Element::Register {
                rule: *rule,
                bits: bits.iter().map(bit).collect(),
                register: IntRegister {
                    bits: register.bits.iter().map(|&v| f(v)).collect(),
                    unit: register.unit,
                },
            },
            Element::Square { expr } => {
                let mut e = LinExpr::constant(expr.offset);
                for (v, c) in expr.terms() {
                    e.add_term(f(v), c);
                }
                Element::Square { expr: e }
            }
            Element::Product { a, b, z, alpha } => Element::Product {
                a: bit(a),
                b: bit(b),
                z: f(*z),
                alpha: *alpha,
            },
        }
    }
}
