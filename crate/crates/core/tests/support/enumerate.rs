//! Exhaustive enumeration of small equality formulas, up to semantic classes.
//!
//! Every AST of size at most `max_size` over the fixed leaves and operators
//! is covered. Formulas are grouped by a caller-supplied compositional value
//! (for instance, a pair of semantic objects), so each class is expanded
//! once and carries the number of ASTs it stands for.

#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

use modeq::EqFormula;

#[derive(Clone, Copy, Debug)]
pub enum Leaf {
    Atom(u32, u32),
    Card(u32),
}

#[derive(Clone, Copy, Debug)]
pub enum Unary {
    Not,
    Diamond,
    Box,
    Exists(u32),
    Forall(u32),
}

#[derive(Clone, Copy, Debug)]
pub enum Binary {
    And,
    Or,
    Implies,
    Iff,
}

pub fn leaves() -> Vec<Leaf> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            out.push(Leaf::Atom(i, j));
        }
    }
    out.extend((0..=2).map(Leaf::Card));
    out
}

pub fn unaries() -> Vec<Unary> {
    vec![Unary::Not, Unary::Diamond, Unary::Box, Unary::Exists(0), Unary::Exists(1), Unary::Forall(0), Unary::Forall(1)]
}

pub fn binaries() -> Vec<Binary> {
    vec![Binary::And, Binary::Or, Binary::Implies, Binary::Iff]
}

pub fn build_leaf(l: Leaf) -> EqFormula {
    match l {
        Leaf::Atom(i, j) => EqFormula::atom(i, j),
        Leaf::Card(k) => EqFormula::card(k),
    }
}

pub fn build_unary(op: Unary, a: EqFormula) -> EqFormula {
    match op {
        Unary::Not => EqFormula::not(a),
        Unary::Diamond => EqFormula::diamond(a),
        Unary::Box => EqFormula::boxed(a),
        Unary::Exists(v) => EqFormula::exists(v, a),
        Unary::Forall(v) => EqFormula::forall(v, a),
    }
}

pub fn build_binary(op: Binary, a: EqFormula, b: EqFormula) -> EqFormula {
    match op {
        Binary::And => EqFormula::and(a, b),
        Binary::Or => EqFormula::or(a, b),
        Binary::Implies => EqFormula::implies(a, b),
        Binary::Iff => EqFormula::iff(a, b),
    }
}

/// A compositional semantics: the value of a formula depends only on its
/// operator and the values of its children.
pub trait Algebra {
    type Val: Clone + Eq + Hash;
    fn leaf(&self, l: Leaf) -> Self::Val;
    fn unary(&self, op: Unary, a: &Self::Val) -> Self::Val;
    fn binary(&self, op: Binary, a: &Self::Val, b: &Self::Val) -> Self::Val;
}

pub struct Class<V> {
    pub val: V,
    /// Number of ASTs of this size with this value.
    pub count: u64,
    /// The first AST found with this value.
    pub repr: EqFormula,
}

/// `levels[n]` holds the classes of ASTs of size exactly `n` (index 0 unused).
pub fn enumerate<A: Algebra>(alg: &A, max_size: usize) -> Vec<Vec<Class<A::Val>>> {
    let mut levels: Vec<Vec<Class<A::Val>>> = vec![Vec::new()];
    for size in 1..=max_size {
        let mut found: HashMap<A::Val, usize> = HashMap::new();
        let mut classes: Vec<Class<A::Val>> = Vec::new();
        let mut add = |val: A::Val, count: u64, repr: &dyn Fn() -> EqFormula| match found.get(&val) {
            Some(&k) => classes[k].count += count,
            None => {
                found.insert(val.clone(), classes.len());
                classes.push(Class { val, count, repr: repr() });
            }
        };
        if size == 1 {
            for l in leaves() {
                add(alg.leaf(l), 1, &|| build_leaf(l));
            }
        } else {
            for c in &levels[size - 1] {
                for op in unaries() {
                    add(alg.unary(op, &c.val), c.count, &|| build_unary(op, c.repr.clone()));
                }
            }
            for left in 1..size - 1 {
                let right = size - 1 - left;
                for a in &levels[left] {
                    for b in &levels[right] {
                        for op in binaries() {
                            add(alg.binary(op, &a.val, &b.val), a.count * b.count, &|| {
                                build_binary(op, a.repr.clone(), b.repr.clone())
                            });
                        }
                    }
                }
            }
        }
        levels.push(classes);
    }
    levels
}

/// Number of ASTs of each size, computed directly from the grammar.
pub fn ast_counts(max_size: usize) -> Vec<u64> {
    let (l, u, b) = (leaves().len() as u64, unaries().len() as u64, binaries().len() as u64);
    let mut a = vec![0u64; max_size + 1];
    for n in 1..=max_size {
        a[n] = if n == 1 { l } else { u * a[n - 1] + b * (1..n - 1).map(|i| a[i] * a[n - 1 - i]).sum::<u64>() };
    }
    a
}
