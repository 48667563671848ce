//! Quadratic pseudo-Boolean polynomials with integer coefficients, plus the
//! variable, bit and bus types every builder works with.
//!
//! All polynomials are kept in a canonical form: zero coefficients are never
//! stored and `x * x` is folded into `x` on insertion, so structural equality
//! is polynomial equality.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a binary variable inside a [`VariableRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
    Control,
    Auxiliary,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Output => "output",
            Role::Control => "control",
            Role::Auxiliary => "auxiliary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub role: Role,
}

/// Allocator for named binary variables. Ids are dense and never reused.
#[derive(Debug, Clone, Default)]
pub struct VariableRegistry {
    entries: Vec<VarInfo>,
    by_name: HashMap<String, VarId>,
}

impl PartialEq for VariableRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for VariableRegistry {}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Registers a variable under an exact name.
    pub fn alloc(&mut self, name: impl Into<String>, role: Role) -> Result<VarId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = VarId(self.entries.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.entries.push(VarInfo { name, role });
        Ok(id)
    }

    /// Registers a variable whose name is derived from `stem` and the new id.
    pub fn fresh(&mut self, stem: &str, role: Role) -> VarId {
        let mut name = format!("{stem}#{}", self.entries.len());
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        self.alloc(name, role).expect("fresh name is unique")
    }

    pub fn fresh_many(&mut self, stem: &str, count: usize, role: Role) -> Vec<VarId> {
        (0..count).map(|_| self.fresh(stem, role)).collect()
    }

    pub fn info(&self, id: VarId) -> &VarInfo {
        &self.entries[id.index()]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.entries[id.index()].name
    }

    pub fn role(&self, id: VarId) -> Role {
        self.entries[id.index()].role
    }

    pub fn set_role(&mut self, id: VarId, role: Role) {
        self.entries[id.index()].role = role;
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn contains(&self, id: VarId) -> bool {
        id.index() < self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarInfo)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, info)| (VarId(i as u32), info))
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.entries.len() as u32).map(VarId)
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.entries.iter().filter(|e| e.role == role).count()
    }

    pub fn with_role(&self, role: Role) -> Vec<VarId> {
        self.iter()
            .filter(|(_, info)| info.role == role)
            .map(|(id, _)| id)
            .collect()
    }
}

/// Total or partial 0/1 assignment indexed by [`VarId`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(len: usize) -> Self {
        Self {
            values: vec![None; len],
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, bool)>) -> Self {
        let mut asg = Self::new();
        for (v, b) in pairs {
            asg.set(v, b);
        }
        asg
    }

    pub fn set(&mut self, var: VarId, value: bool) {
        let i = var.index();
        if i >= self.values.len() {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn unset(&mut self, var: VarId) {
        if let Some(slot) = self.values.get_mut(var.index()) {
            *slot = None;
        }
    }

    pub fn get(&self, var: VarId) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn value(&self, var: VarId) -> Result<bool> {
        self.get(var).ok_or(Error::Unassigned(var))
    }

    pub fn is_total_over(&self, vars: impl IntoIterator<Item = VarId>) -> bool {
        vars.into_iter().all(|v| self.get(v).is_some())
    }

    /// Assigned `(var, value)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (VarId(i as u32), b)))
    }

    pub fn raw(&self) -> &[Option<bool>] {
        &self.values
    }
}

/// A single bit on a bus: a constant, a variable, or a negated variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Const(bool),
    Var(VarId),
    NegVar(VarId),
}

impl Bit {
    pub const ZERO: Bit = Bit::Const(false);
    pub const ONE: Bit = Bit::Const(true);

    pub fn var(self) -> Option<VarId> {
        match self {
            Bit::Const(_) => None,
            Bit::Var(v) | Bit::NegVar(v) => Some(v),
        }
    }

    pub fn as_const(self) -> Option<bool> {
        match self {
            Bit::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn negate(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Var(v) => Bit::NegVar(v),
            Bit::NegVar(v) => Bit::Var(v),
        }
    }

    /// The literal `self XOR value` for a constant `value`.
    pub fn xor_const(self, value: bool) -> Bit {
        if value {
            self.negate()
        } else {
            self
        }
    }

    pub fn lin(self) -> LinExpr {
        match self {
            Bit::Const(b) => LinExpr::constant(b as i64),
            Bit::Var(v) => LinExpr::var(v),
            Bit::NegVar(v) => LinExpr::constant(1) - LinExpr::var(v),
        }
    }

    /// Value under `asg`, or `None` when the underlying variable is unassigned.
    pub fn get(self, asg: &Assignment) -> Option<bool> {
        match self {
            Bit::Const(b) => Some(b),
            Bit::Var(v) => asg.get(v),
            Bit::NegVar(v) => asg.get(v).map(|b| !b),
        }
    }

    pub fn value(self, asg: &Assignment) -> Result<bool> {
        match self {
            Bit::Const(b) => Ok(b),
            Bit::Var(v) => asg.value(v),
            Bit::NegVar(v) => asg.value(v).map(|b| !b),
        }
    }

    /// Assigns the underlying variable so that this bit reads `value`.
    /// Returns false for constants and for variables that are already set.
    pub fn assign(self, asg: &mut Assignment, value: bool) -> bool {
        match self {
            Bit::Const(_) => false,
            Bit::Var(v) | Bit::NegVar(v) if asg.get(v).is_some() => false,
            Bit::Var(v) => {
                asg.set(v, value);
                true
            }
            Bit::NegVar(v) => {
                asg.set(v, !value);
                true
            }
        }
    }
}

/// An ordered group of bits, least-significant first, carrying one number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Bus {
    bits: Vec<Bit>,
}

impl Bus {
    pub fn new(bits: Vec<Bit>) -> Self {
        Self { bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn constant(value: u64, width: usize) -> Self {
        let bits = (0..width)
            .map(|i| Bit::Const(i < 64 && (value >> i) & 1 == 1))
            .collect();
        Self { bits }
    }

    pub fn from_vars(vars: &[VarId]) -> Self {
        Self {
            bits: vars.iter().map(|&v| Bit::Var(v)).collect(),
        }
    }

    /// Allocates `width` fresh variables named `{stem}.b{i}`, bit 1 being the
    /// least significant.
    pub fn alloc(reg: &mut VariableRegistry, stem: &str, width: usize, role: Role) -> Self {
        let bits = (0..width)
            .map(|i| Bit::Var(reg.fresh(&format!("{stem}.b{}", i + 1), role)))
            .collect();
        Self { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> Bit {
        self.bits[i]
    }

    /// `high` occupies the most significant bits, `low` the least.
    pub fn concat(high: &Bus, low: &Bus) -> Bus {
        let mut bits = low.bits.clone();
        bits.extend_from_slice(&high.bits);
        Bus { bits }
    }

    /// The `count` most significant bits.
    pub fn high(&self, count: usize) -> Bus {
        Bus {
            bits: self.bits[self.bits.len() - count..].to_vec(),
        }
    }

    /// The `count` least significant bits.
    pub fn low(&self, count: usize) -> Bus {
        Bus {
            bits: self.bits[..count].to_vec(),
        }
    }

    pub fn as_const(&self) -> Option<u64> {
        let mut value = 0u64;
        for (i, bit) in self.bits.iter().enumerate() {
            match bit {
                Bit::Const(true) => value |= 1 << i,
                Bit::Const(false) => {}
                _ => return None,
            }
        }
        Some(value)
    }

    pub fn get(&self, asg: &Assignment) -> Option<u64> {
        let mut value = 0u64;
        for (i, bit) in self.bits.iter().enumerate() {
            if bit.get(asg)? {
                value |= 1 << i;
            }
        }
        Some(value)
    }

    pub fn value(&self, asg: &Assignment) -> Result<u64> {
        let mut value = 0u64;
        for (i, bit) in self.bits.iter().enumerate() {
            if bit.value(asg)? {
                value |= 1 << i;
            }
        }
        Ok(value)
    }

    /// Writes `value` into every unassigned variable bit. Returns whether any
    /// variable was newly assigned.
    pub fn assign(&self, asg: &mut Assignment, value: u64) -> bool {
        let mut progress = false;
        for (i, bit) in self.bits.iter().enumerate() {
            progress |= bit.assign(asg, (value >> i) & 1 == 1);
        }
        progress
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.bits.iter().filter_map(|b| b.var())
    }
}

/// Sparse affine expression over binary variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinExpr {
    pub offset: i64,
    terms: BTreeMap<VarId, i64>,
}

impl LinExpr {
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
        let mut e = Self::zero();
        e.add_term(v, 1);
        e
    }

    /// Sum of the bits.
    pub fn sum(bits: &[Bit]) -> Self {
        bits.iter().fold(Self::zero(), |acc, b| acc + b.lin())
    }

    pub fn add_term(&mut self, v: VarId, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(v).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn coeff(&self, v: VarId) -> i64 {
        self.terms.get(&v).copied().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: i64) -> Self {
        if s == 0 {
            return Self::zero();
        }
        Self {
            offset: self.offset * s,
            terms: self.terms.iter().map(|(&v, &c)| (v, c * s)).collect(),
        }
    }

    /// Minimum and maximum over all 0/1 points.
    pub fn range(&self) -> (i64, i64) {
        let mut lo = self.offset;
        let mut hi = self.offset;
        for &c in self.terms.values() {
            if c < 0 {
                lo += c;
            } else {
                hi += c;
            }
        }
        (lo, hi)
    }

    pub fn eval(&self, asg: &Assignment) -> Result<i64> {
        let mut total = self.offset;
        for (&v, &c) in &self.terms {
            if asg.value(v)? {
                total += c;
            }
        }
        Ok(total)
    }

    /// Evaluates as far as possible; returns the partial sum and the
    /// unassigned terms.
    pub fn partial_eval(&self, asg: &Assignment) -> (i64, Vec<(VarId, i64)>) {
        let mut total = self.offset;
        let mut unknown = Vec::new();
        for (&v, &c) in &self.terms {
            match asg.get(v) {
                Some(true) => total += c,
                Some(false) => {}
                None => unknown.push((v, c)),
            }
        }
        (total, unknown)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.offset += rhs.offset;
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + rhs.scale(-1)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-1)
    }
}

impl Mul<i64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, s: i64) -> LinExpr {
        self.scale(s)
    }
}

/// Quadratic pseudo-Boolean polynomial `offset + Σ l_i x_i + Σ q_ij x_i x_j`.
///
/// Quadratic keys are ordered pairs `(a, b)` with `a < b`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct QuadPoly {
    offset: i64,
    linear: BTreeMap<VarId, i64>,
    quadratic: BTreeMap<(VarId, VarId), i64>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, i64>, key: K, c: i64) {
    if c == 0 {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if *slot.get() == 0 {
                slot.remove();
            }
        }
    }
}

impl QuadPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self {
            offset: c,
            ..Self::default()
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0 && self.linear.is_empty() && self.quadratic.is_empty()
    }

    pub fn add_constant(&mut self, c: i64) {
        self.offset += c;
    }

    pub fn add_linear(&mut self, v: VarId, c: i64) {
        bump(&mut self.linear, v, c);
    }

    /// Adds `c * a * b`; `a == b` folds into the linear term.
    pub fn add_quadratic(&mut self, a: VarId, b: VarId, c: i64) {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => self.add_linear(a, c),
            std::cmp::Ordering::Less => bump(&mut self.quadratic, (a, b), c),
            std::cmp::Ordering::Greater => bump(&mut self.quadratic, (b, a), c),
        }
    }

    pub fn linear(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.linear.iter().map(|(&v, &c)| (v, c))
    }

    pub fn quadratic(&self) -> impl Iterator<Item = ((VarId, VarId), i64)> + '_ {
        self.quadratic.iter().map(|(&k, &c)| (k, c))
    }

    pub fn linear_coeff(&self, v: VarId) -> i64 {
        self.linear.get(&v).copied().unwrap_or(0)
    }

    pub fn quadratic_coeff(&self, a: VarId, b: VarId) -> i64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.quadratic.get(&key).copied().unwrap_or(0)
    }

    pub fn num_linear(&self) -> usize {
        self.linear.len()
    }

    pub fn num_quadratic(&self) -> usize {
        self.quadratic.len()
    }

    /// Every variable that occurs with a non-zero coefficient.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut vars: BTreeSet<VarId> = self.linear.keys().copied().collect();
        for &(a, b) in self.quadratic.keys() {
            vars.insert(a);
            vars.insert(b);
        }
        vars
    }

    /// One past the largest variable id in use.
    pub fn var_bound(&self) -> usize {
        self.variables().last().map_or(0, |v| v.index() + 1)
    }

    pub fn add_poly(&mut self, other: &QuadPoly) {
        self.offset += other.offset;
        for (&v, &c) in &other.linear {
            bump(&mut self.linear, v, c);
        }
        for (&k, &c) in &other.quadratic {
            bump(&mut self.quadratic, k, c);
        }
    }

    pub fn scale(&self, s: i64) -> QuadPoly {
        if s == 0 {
            return QuadPoly::zero();
        }
        QuadPoly {
            offset: self.offset * s,
            linear: self.linear.iter().map(|(&v, &c)| (v, c * s)).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    /// Exact value at a 0/1 point; every variable of the polynomial must be
    /// assigned.
    pub fn eval(&self, asg: &Assignment) -> Result<i64> {
        let mut total = self.offset;
        for (&v, &c) in &self.linear {
            if asg.value(v)? {
                total += c;
            }
        }
        for (&(a, b), &c) in &self.quadratic {
            let xa = asg.value(a)?;
            let xb = asg.value(b)?;
            if xa && xb {
                total += c;
            }
        }
        Ok(total)
    }

    /// Adds `c * e` for an affine expression `e`.
    pub fn add_lin(&mut self, e: &LinExpr, c: i64) {
        self.offset += e.offset * c;
        for (v, w) in e.terms() {
            self.add_linear(v, w * c);
        }
    }

    /// Product of two affine expressions, folded on `x * x = x`.
    pub fn lin_mul(a: &LinExpr, b: &LinExpr) -> QuadPoly {
        let mut out = QuadPoly::constant(a.offset * b.offset);
        for (v, c) in a.terms() {
            out.add_linear(v, c * b.offset);
        }
        for (v, c) in b.terms() {
            out.add_linear(v, c * a.offset);
        }
        for (va, ca) in a.terms() {
            for (vb, cb) in b.terms() {
                out.add_quadratic(va, vb, ca * cb);
            }
        }
        out
    }

    /// `e²` with `x² = x` folding; non-negative on every 0/1 point.
    pub fn lin_square(e: &LinExpr) -> QuadPoly {
        QuadPoly::lin_mul(e, e)
    }

    /// Renames variables through `map`; unmapped variables are kept.
    pub fn relabel(&self, map: impl Fn(VarId) -> VarId) -> QuadPoly {
        let mut out = QuadPoly::constant(self.offset);
        for (&v, &c) in &self.linear {
            out.add_linear(map(v), c);
        }
        for (&(a, b), &c) in &self.quadratic {
            out.add_quadratic(map(a), map(b), c);
        }
        out
    }

    /// Number of distinct quadratic partners per variable.
    pub fn degrees(&self) -> BTreeMap<VarId, usize> {
        let mut deg: BTreeMap<VarId, usize> = BTreeMap::new();
        for v in self.linear.keys() {
            deg.entry(*v).or_insert(0);
        }
        for &(a, b) in self.quadratic.keys() {
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
        }
        deg
    }
}

impl Add for QuadPoly {
    type Output = QuadPoly;
    fn add(mut self, rhs: QuadPoly) -> QuadPoly {
        self.add_poly(&rhs);
        self
    }
}

impl AddAssign<&QuadPoly> for QuadPoly {
    fn add_assign(&mut self, rhs: &QuadPoly) {
        self.add_poly(rhs);
    }
}

impl AddAssign for QuadPoly {
    fn add_assign(&mut self, rhs: QuadPoly) {
        self.add_poly(&rhs);
    }
}

/// Coefficient-wise sum.
pub fn poly_add(a: &QuadPoly, b: &QuadPoly) -> QuadPoly {
    let mut out = a.clone();
    out.add_poly(b);
    out
}

pub fn poly_scale(a: &QuadPoly, s: i64) -> QuadPoly {
    a.scale(s)
}

pub fn poly_eval(a: &QuadPoly, asg: &Assignment) -> Result<i64> {
    a.eval(asg)
}

pub fn lin_square(e: &LinExpr) -> QuadPoly {
    QuadPoly::lin_square(e)
}

/// `b` in the low-order bits, `a` in the high-order bits.
pub fn bus_concat(a: &Bus, b: &Bus) -> Bus {
    Bus::concat(a, b)
}

/// Bits needed to write the values `1..=n`, i.e. `⌈log₂(n+1)⌉`.
pub fn bit_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars(reg: &mut VariableRegistry, n: usize) -> Vec<VarId> {
        (0..n)
            .map(|i| reg.alloc(format!("x{}", i + 1), Role::Input).unwrap())
            .collect()
    }

    #[test]
    fn add_identity_and_cancellation() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        let mut p = QuadPoly::constant(3);
        p.add_linear(x[0], 2);
        p.add_quadratic(x[0], x[1], -4);
        assert_eq!(poly_add(&QuadPoly::zero(), &p), p);
        assert!(poly_add(&p, &p.scale(-1)).is_zero());
    }

    #[test]
    fn add_merges_terms() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        let mut a = QuadPoly::constant(3);
        a.add_linear(x[0], 2);
        let mut b = QuadPoly::constant(1);
        b.add_quadratic(x[0], x[1], 1);
        let s = poly_add(&a, &b);
        assert_eq!(s.offset(), 4);
        assert_eq!(s.linear().collect::<Vec<_>>(), vec![(x[0], 2)]);
        assert_eq!(s.quadratic().collect::<Vec<_>>(), vec![((x[0], x[1]), 1)]);
    }

    #[test]
    fn scale_examples() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 1);
        let mut p = QuadPoly::constant(2);
        p.add_linear(x[0], -1);
        assert_eq!(p.scale(1), p);
        assert!(p.scale(0).is_zero());
        let s = p.scale(3);
        assert_eq!(s.offset(), 6);
        assert_eq!(s.linear_coeff(x[0]), -3);
    }

    #[test]
    fn eval_hamming_square() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 3);
        let e =
            LinExpr::sum(&[Bit::Var(x[0]), Bit::Var(x[1]), Bit::Var(x[2])]) - LinExpr::constant(2);
        let h = lin_square(&e);
        let at = |bits: [bool; 3]| {
            let asg = Assignment::from_pairs(x.iter().copied().zip(bits));
            h.eval(&asg).unwrap()
        };
        assert_eq!(at([true, true, false]), 0);
        assert_eq!(at([true, true, true]), 1);
        assert_eq!(QuadPoly::zero().eval(&Assignment::new()).unwrap(), 0);
    }

    #[test]
    fn eval_missing_variable_names_it() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        let mut p = QuadPoly::zero();
        p.add_quadratic(x[0], x[1], 1);
        let asg = Assignment::from_pairs([(x[0], true)]);
        match p.eval(&asg) {
            Err(Error::Unassigned(v)) => assert_eq!(v, x[1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lin_square_examples() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 2);
        // (x1 - 1)^2 = 1 - x1
        let p = lin_square(&(LinExpr::var(x[0]) - LinExpr::constant(1)));
        let mut want = QuadPoly::constant(1);
        want.add_linear(x[0], -1);
        assert_eq!(p, want);
        // (x1 + x2 - 1)^2 = 1 - x1 - x2 + 2 x1 x2
        let p = lin_square(&(LinExpr::var(x[0]) + LinExpr::var(x[1]) - LinExpr::constant(1)));
        let mut want = QuadPoly::constant(1);
        want.add_linear(x[0], -1);
        want.add_linear(x[1], -1);
        want.add_quadratic(x[0], x[1], 2);
        assert_eq!(p, want);
        assert!(lin_square(&LinExpr::zero()).is_zero());
    }

    #[test]
    fn self_product_folds_to_linear() {
        let mut reg = VariableRegistry::new();
        let x = vars(&mut reg, 1);
        let mut p = QuadPoly::zero();
        p.add_quadratic(x[0], x[0], 5);
        assert_eq!(p.num_quadratic(), 0);
        assert_eq!(p.linear_coeff(x[0]), 5);
    }

    #[test]
    fn bus_concat_examples() {
        let a = Bus::constant(0b01, 2);
        let b = Bus::constant(0b10, 2);
        let c = bus_concat(&a, &b);
        assert_eq!(c.width(), 4);
        assert_eq!(c.as_const(), Some(0b0110));
        assert_eq!(bus_concat(&a, &Bus::empty()), a);
    }

    #[test]
    fn bit_width_covers_n() {
        assert_eq!(bit_width(1), 1);
        assert_eq!(bit_width(2), 2);
        assert_eq!(bit_width(3), 2);
        assert_eq!(bit_width(4), 3);
        assert_eq!(bit_width(7), 3);
        assert_eq!(bit_width(8), 4);
        for n in 1..200usize {
            let k = bit_width(n);
            assert!((1usize << k) > n && (1usize << (k - 1)) <= n);
        }
    }

    #[test]
    fn registry_rejects_duplicate_names() {
        let mut reg = VariableRegistry::new();
        reg.alloc("a", Role::Input).unwrap();
        assert!(matches!(
            reg.alloc("a", Role::Input),
            Err(Error::DuplicateName(_))
        ));
        let f = reg.fresh("a", Role::Auxiliary);
        assert_eq!(f, VarId(1));
    }

    fn arb_poly(nvars: u32) -> impl Strategy<Value = QuadPoly> {
        (
            -5i64..5,
            prop::collection::vec((0..nvars, -4i64..4), 0..6),
            prop::collection::vec((0..nvars, 0..nvars, -4i64..4), 0..8),
        )
            .prop_map(|(offset, lin, quad)| {
                let mut p = QuadPoly::constant(offset);
                for (v, c) in lin {
                    p.add_linear(VarId(v), c);
                }
                for (a, b, c) in quad {
                    p.add_quadratic(VarId(a), VarId(b), c);
                }
                p
            })
    }

    fn point(nvars: u32, mask: u32) -> Assignment {
        Assignment::from_pairs((0..nvars).map(|i| (VarId(i), (mask >> i) & 1 == 1)))
    }

    proptest! {
        #[test]
        fn add_and_scale_commute_with_eval(a in arb_poly(6), b in arb_poly(6), s in -3i64..4, mask in 0u32..64) {
            let asg = point(6, mask);
            let ea = a.eval(&asg).unwrap();
            let eb = b.eval(&asg).unwrap();
            prop_assert_eq!(poly_add(&a, &b).eval(&asg).unwrap(), ea + eb);
            prop_assert_eq!(poly_scale(&a, s).eval(&asg).unwrap(), s * ea);
        }

        #[test]
        fn lin_square_matches_square_of_value(
            offset in -4i64..4,
            terms in prop::collection::vec((0u32..6, -3i64..4), 0..6),
            mask in 0u32..64,
        ) {
            let mut e = LinExpr::constant(offset);
            for (v, c) in terms {
                e.add_term(VarId(v), c);
            }
            let asg = point(6, mask);
            let v = e.eval(&asg).unwrap();
            prop_assert_eq!(lin_square(&e).eval(&asg).unwrap(), v * v);
        }

        #[test]
        fn no_zero_coefficients_are_stored(a in arb_poly(5), b in arb_poly(5)) {
            let s = poly_add(&a, &b.scale(-1));
            prop_assert!(s.linear().all(|(_, c)| c != 0));
            prop_assert!(s.quadratic().all(|((x, y), c)| c != 0 && x < y));
        }
    }
}
