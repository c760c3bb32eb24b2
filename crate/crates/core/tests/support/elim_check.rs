//! Algebras pairing the eliminator with the concrete oracle, and with the
//! eliminator applied to modality-erased formulas.

#![allow(dead_code)]

use modeq::{kernel_partition, CategoryKind, EqCardTable, SizeClass};

use super::concrete::{bit, Bits, Universe, World};
use super::enumerate::{Algebra, Binary, Leaf, Unary};

/// Threshold used for every table in the exhaustive comparison: two
/// variables plus the largest cardinality index (2) plus one.
pub const N: u64 = 5;

fn var_mask(t: &EqCardTable) -> u8 {
    t.vars().iter().fold(0, |acc, v| acc | 1 << v)
}

fn table_leaf(cat: CategoryKind, l: Leaf) -> EqCardTable {
    match l {
        Leaf::Atom(i, j) => EqCardTable::atom(cat, N, i, j).unwrap(),
        Leaf::Card(k) => EqCardTable::card(cat, N, k).unwrap(),
    }
}

fn table_unary(op: Unary, a: &EqCardTable) -> EqCardTable {
    match op {
        Unary::Not => a.negate(),
        Unary::Diamond => a.diamond(),
        Unary::Box => a.boxed(),
        Unary::Exists(v) => a.exists(v),
        Unary::Forall(v) => a.forall(v),
    }
}

fn table_binary(op: Binary, a: &EqCardTable, b: &EqCardTable) -> EqCardTable {
    match op {
        Binary::And => a.and(b),
        Binary::Or => a.or(b),
        Binary::Implies => a.implies(b),
        Binary::Iff => a.iff(b),
    }
    .unwrap()
}

pub struct ElimVsOracle<'u> {
    pub cat: CategoryKind,
    pub u: &'u Universe,
    regime: Bits,
    assigned: [Bits; 4],
}

impl<'u> ElimVsOracle<'u> {
    pub fn new(cat: CategoryKind, u: &'u Universe) -> Self {
        ElimVsOracle {
            cat,
            u,
            regime: u.regime_mask(cat.regime),
            assigned: std::array::from_fn(|m| u.assigned_mask(m as u8)),
        }
    }

    fn restrict(&self, t: &EqCardTable, b: &Bits) -> Bits {
        let m = self.u.mask(&self.regime, &self.assigned[var_mask(t) as usize]);
        self.u.mask(b, &m)
    }

    /// States (by index) where the table and the oracle disagree.
    pub fn disagreements(&self, t: &EqCardTable, b: &Bits) -> Vec<usize> {
        let m = self.u.mask(&self.regime, &self.assigned[var_mask(t) as usize]);
        (0..self.u.states.len())
            .filter(|&i| bit(&m, i))
            .filter(|&i| lookup(self.u, t, i) != bit(b, i))
            .collect()
    }
}

/// The table's value at a concrete oracle state.
pub fn lookup(u: &Universe, t: &EqCardTable, i: usize) -> bool {
    let st = u.states[i];
    let values: Vec<usize> = t.vars().iter().map(|&v| st.a[v as usize].expect("assigned")).collect();
    let pattern = kernel_partition(&values);
    let class = match st.world {
        World::Finite(s) if s as u64 <= t.threshold() => SizeClass::Exact(s as u64),
        _ => SizeClass::Tail,
    };
    t.get(&pattern, class).expect("realizable state")
}

impl Algebra for ElimVsOracle<'_> {
    type Val = (EqCardTable, Bits);

    fn leaf(&self, l: Leaf) -> Self::Val {
        let t = table_leaf(self.cat, l);
        let b = match l {
            Leaf::Atom(i, j) => self.u.atom(i, j),
            Leaf::Card(k) => self.u.card(k),
        };
        let b = self.restrict(&t, &b);
        (t, b)
    }

    fn unary(&self, op: Unary, (t, b): &Self::Val) -> Self::Val {
        let t2 = table_unary(op, t);
        let b2 = match op {
            Unary::Not => self.u.negate(b),
            Unary::Diamond => self.u.diamond(self.cat, b),
            Unary::Box => self.u.boxed(self.cat, b),
            Unary::Exists(v) => self.u.exists(v, b),
            Unary::Forall(v) => self.u.forall(v, b),
        };
        let b2 = self.restrict(&t2, &b2);
        (t2, b2)
    }

    fn binary(&self, op: Binary, (ta, ba): &Self::Val, (tb, bb): &Self::Val) -> Self::Val {
        let t = table_binary(op, ta, tb);
        let b = match op {
            Binary::And => self.u.binary(ba, bb, |x, y| x && y),
            Binary::Or => self.u.binary(ba, bb, |x, y| x || y),
            Binary::Implies => self.u.binary(ba, bb, |x, y| !x || y),
            Binary::Iff => self.u.binary(ba, bb, |x, y| x == y),
        };
        let b = self.restrict(&t, &b);
        (t, b)
    }
}

/// Pairs the table of a formula with the table of its modality erasure.
pub struct ErasurePair {
    pub cat: CategoryKind,
}

impl Algebra for ErasurePair {
    type Val = (EqCardTable, EqCardTable);

    fn leaf(&self, l: Leaf) -> Self::Val {
        let t = table_leaf(self.cat, l);
        (t.clone(), t)
    }

    fn unary(&self, op: Unary, (t, e): &Self::Val) -> Self::Val {
        let erased = match op {
            Unary::Diamond | Unary::Box => e.clone(),
            _ => table_unary(op, e),
        };
        (table_unary(op, t), erased)
    }

    fn binary(&self, op: Binary, (ta, ea): &Self::Val, (tb, eb): &Self::Val) -> Self::Val {
        (table_binary(op, ta, tb), table_binary(op, ea, eb))
    }
}
