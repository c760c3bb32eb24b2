//! Abstract syntax for the first-order modal language of equality and for
//! propositional modal formulas, with parser, printer and structural helpers.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parse::{parse_eq, parse_eq_with, parse_prop, ParseOptions};

// Formulas travel as their printed text.
macro_rules! text_serde {
    ($t:ty, $parse:path) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                $parse(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

text_serde!(EqFormula, parse_eq);
text_serde!(PropFormula, parse_prop);

/// Index of an individual variable `x_i`.
pub type Var = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqFormula {
    Atom(Var, Var),
    /// There are precisely `k` elements.
    CardExact(u32),
    Not(Box<EqFormula>),
    And(Box<EqFormula>, Box<EqFormula>),
    Or(Box<EqFormula>, Box<EqFormula>),
    Implies(Box<EqFormula>, Box<EqFormula>),
    Iff(Box<EqFormula>, Box<EqFormula>),
    Exists(Var, Box<EqFormula>),
    Forall(Var, Box<EqFormula>),
    Diamond(Box<EqFormula>),
    Box(Box<EqFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    Var(u32),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
    Iff(Box<PropFormula>, Box<PropFormula>),
    Diamond(Box<PropFormula>),
    Box(Box<PropFormula>),
}

/// Cardinality assertions that expand to core constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    Exact(u32),
    AtLeast(u32),
    AtMost(u32),
}

impl EqFormula {
    pub fn atom(i: Var, j: Var) -> Self {
        EqFormula::Atom(i, j)
    }
    pub fn card(k: u32) -> Self {
        EqFormula::CardExact(k)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        EqFormula::Not(Box::new(f))
    }
    pub fn and(a: Self, b: Self) -> Self {
        EqFormula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Self, b: Self) -> Self {
        EqFormula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Self, b: Self) -> Self {
        EqFormula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Self, b: Self) -> Self {
        EqFormula::Iff(Box::new(a), Box::new(b))
    }
    pub fn exists(v: Var, f: Self) -> Self {
        EqFormula::Exists(v, Box::new(f))
    }
    pub fn forall(v: Var, f: Self) -> Self {
        EqFormula::Forall(v, Box::new(f))
    }
    pub fn diamond(f: Self) -> Self {
        EqFormula::Diamond(Box::new(f))
    }
    pub fn boxed(f: Self) -> Self {
        EqFormula::Box(Box::new(f))
    }

    /// Canonical truth: `card = 0 | ~card = 0`.
    pub fn verum() -> Self {
        Self::or(Self::card(0), Self::not(Self::card(0)))
    }

    /// Canonical falsity: `card = 0 & ~card = 0`.
    pub fn falsum() -> Self {
        Self::and(Self::card(0), Self::not(Self::card(0)))
    }

    /// Right-nested conjunction; the empty conjunction is [`EqFormula::verum`].
    pub fn and_all(items: impl IntoIterator<Item = Self>) -> Self {
        let mut items: Vec<Self> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else { return Self::verum() };
        while let Some(f) = items.pop() {
            acc = Self::and(f, acc);
        }
        acc
    }

    /// Right-nested disjunction; the empty disjunction is [`EqFormula::falsum`].
    pub fn or_all(items: impl IntoIterator<Item = Self>) -> Self {
        let mut items: Vec<Self> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else { return Self::falsum() };
        while let Some(f) = items.pop() {
            acc = Self::or(f, acc);
        }
        acc
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&EqFormula> {
        match self {
            EqFormula::Atom(..) | EqFormula::CardExact(_) => vec![],
            EqFormula::Not(a)
            | EqFormula::Exists(_, a)
            | EqFormula::Forall(_, a)
            | EqFormula::Diamond(a)
            | EqFormula::Box(a) => vec![a],
            EqFormula::And(a, b)
            | EqFormula::Or(a, b)
            | EqFormula::Implies(a, b)
            | EqFormula::Iff(a, b) => vec![a, b],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            EqFormula::Atom(i, j) => {
                for v in [i, j] {
                    if !bound.contains(v) {
                        out.insert(*v);
                    }
                }
            }
            EqFormula::Exists(v, a) | EqFormula::Forall(v, a) => {
                bound.push(*v);
                a.collect_free(bound, out);
                bound.pop();
            }
            _ => self.children().into_iter().for_each(|c| c.collect_free(bound, out)),
        }
    }

    /// Every variable index occurring anywhere, free, bound or as a binder.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            EqFormula::Atom(i, j) => {
                out.insert(*i);
                out.insert(*j);
            }
            EqFormula::Exists(v, _) | EqFormula::Forall(v, _) => {
                out.insert(*v);
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a EqFormula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Largest `k` in any `card = k`.
    pub fn max_card(&self) -> Option<u32> {
        let mut best = None;
        self.visit(&mut |f| {
            if let EqFormula::CardExact(k) = f {
                best = best.max(Some(*k));
            }
        });
        best
    }

    pub fn quantifier_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.quantifier_depth()).max().unwrap_or(0);
        match self {
            EqFormula::Exists(..) | EqFormula::Forall(..) => inner + 1,
            _ => inner,
        }
    }

    pub fn modal_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.modal_depth()).max().unwrap_or(0);
        match self {
            EqFormula::Diamond(_) | EqFormula::Box(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn is_modal_free(&self) -> bool {
        self.modal_depth() == 0
    }

    /// Deletes every modal operator, pushing through connectives and quantifiers.
    pub fn erase_modalities(&self) -> EqFormula {
        let e = |a: &EqFormula| Box::new(a.erase_modalities());
        match self {
            EqFormula::Atom(..) | EqFormula::CardExact(_) => self.clone(),
            EqFormula::Not(a) => EqFormula::Not(e(a)),
            EqFormula::And(a, b) => EqFormula::And(e(a), e(b)),
            EqFormula::Or(a, b) => EqFormula::Or(e(a), e(b)),
            EqFormula::Implies(a, b) => EqFormula::Implies(e(a), e(b)),
            EqFormula::Iff(a, b) => EqFormula::Iff(e(a), e(b)),
            EqFormula::Exists(v, a) => EqFormula::Exists(*v, e(a)),
            EqFormula::Forall(v, a) => EqFormula::Forall(*v, e(a)),
            EqFormula::Diamond(a) | EqFormula::Box(a) => a.erase_modalities(),
        }
    }

    /// Renames binders so that no binder reuses the index of a free variable
    /// or of an enclosing binder. Binders that already satisfy this keep
    /// their index, so the operation is idempotent.
    pub fn normalize_binders(&self) -> EqFormula {
        let free = self.free_vars();
        let mut next = self.all_vars().last().map_or(0, |v| v + 1);
        let mut env: Vec<(Var, Var)> = Vec::new();
        self.rename_binders(&free, &mut env, &mut next)
    }

    fn rename_binders(&self, free: &BTreeSet<Var>, env: &mut Vec<(Var, Var)>, next: &mut Var) -> EqFormula {
        let lookup = |env: &[(Var, Var)], v: Var| {
            env.iter().rev().find(|(old, _)| *old == v).map_or(v, |(_, new)| *new)
        };
        let mut r = |a: &EqFormula, env: &mut Vec<(Var, Var)>| Box::new(a.rename_binders(free, env, next));
        match self {
            EqFormula::Atom(i, j) => EqFormula::Atom(lookup(env, *i), lookup(env, *j)),
            EqFormula::CardExact(k) => EqFormula::CardExact(*k),
            EqFormula::Not(a) => EqFormula::Not(r(a, env)),
            EqFormula::And(a, b) => EqFormula::And(r(a, env), r(b, env)),
            EqFormula::Or(a, b) => EqFormula::Or(r(a, env), r(b, env)),
            EqFormula::Implies(a, b) => EqFormula::Implies(r(a, env), r(b, env)),
            EqFormula::Iff(a, b) => EqFormula::Iff(r(a, env), r(b, env)),
            EqFormula::Diamond(a) => EqFormula::Diamond(r(a, env)),
            EqFormula::Box(a) => EqFormula::Box(r(a, env)),
            EqFormula::Exists(v, a) | EqFormula::Forall(v, a) => {
                let clash = free.contains(v) || env.iter().any(|(_, new)| new == v);
                let target = if clash {
                    let t = *next;
                    *next += 1;
                    t
                } else {
                    *v
                };
                env.push((*v, target));
                let body = a.rename_binders(free, env, next);
                env.pop();
                if matches!(self, EqFormula::Exists(..)) {
                    EqFormula::Exists(target, Box::new(body))
                } else {
                    EqFormula::Forall(target, Box::new(body))
                }
            }
        }
    }

    /// True when no binder reuses a free index or an enclosing binder's index.
    pub fn binders_normalized(&self) -> bool {
        *self == self.normalize_binders()
    }

    /// Renames free variables through `map`; unmapped variables stay put.
    /// Binders are normalized first so the substitution cannot be captured.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> EqFormula {
        fn go(f: &EqFormula, map: &BTreeMap<Var, Var>, bound: &mut Vec<Var>) -> EqFormula {
            let rn = |v: &Var, bound: &[Var]| if bound.contains(v) { *v } else { *map.get(v).unwrap_or(v) };
            let r = |a: &EqFormula, bound: &mut Vec<Var>| Box::new(go(a, map, bound));
            match f {
                EqFormula::Atom(i, j) => EqFormula::Atom(rn(i, bound), rn(j, bound)),
                EqFormula::CardExact(k) => EqFormula::CardExact(*k),
                EqFormula::Not(a) => EqFormula::Not(r(a, bound)),
                EqFormula::And(a, b) => EqFormula::And(r(a, bound), r(b, bound)),
                EqFormula::Or(a, b) => EqFormula::Or(r(a, bound), r(b, bound)),
                EqFormula::Implies(a, b) => EqFormula::Implies(r(a, bound), r(b, bound)),
                EqFormula::Iff(a, b) => EqFormula::Iff(r(a, bound), r(b, bound)),
                EqFormula::Diamond(a) => EqFormula::Diamond(r(a, bound)),
                EqFormula::Box(a) => EqFormula::Box(r(a, bound)),
                EqFormula::Exists(v, a) | EqFormula::Forall(v, a) => {
                    bound.push(*v);
                    let body = Box::new(go(a, map, bound));
                    bound.pop();
                    if matches!(f, EqFormula::Exists(..)) {
                        EqFormula::Exists(*v, body)
                    } else {
                        EqFormula::Forall(*v, body)
                    }
                }
            }
        }
        // Move binders above every index the map can produce.
        let ceiling = map.values().chain(map.keys()).max().map_or(0, |v| v + 1);
        let lifted = self.lift_binders(ceiling);
        go(&lifted, map, &mut Vec::new())
    }

    /// Renumbers every binder to a fresh index at or above `floor`.
    fn lift_binders(&self, floor: Var) -> EqFormula {
        let free = self.free_vars();
        let mut next = self.all_vars().last().map_or(0, |v| v + 1).max(floor).max(free.last().map_or(0, |v| v + 1));
        fn go(f: &EqFormula, env: &mut Vec<(Var, Var)>, next: &mut Var) -> EqFormula {
            let lookup = |env: &[(Var, Var)], v: Var| env.iter().rev().find(|(o, _)| *o == v).map_or(v, |(_, n)| *n);
            let mut r = |a: &EqFormula, env: &mut Vec<(Var, Var)>| Box::new(go(a, env, next));
            match f {
                EqFormula::Atom(i, j) => EqFormula::Atom(lookup(env, *i), lookup(env, *j)),
                EqFormula::CardExact(k) => EqFormula::CardExact(*k),
                EqFormula::Not(a) => EqFormula::Not(r(a, env)),
                EqFormula::And(a, b) => EqFormula::And(r(a, env), r(b, env)),
                EqFormula::Or(a, b) => EqFormula::Or(r(a, env), r(b, env)),
                EqFormula::Implies(a, b) => EqFormula::Implies(r(a, env), r(b, env)),
                EqFormula::Iff(a, b) => EqFormula::Iff(r(a, env), r(b, env)),
                EqFormula::Diamond(a) => EqFormula::Diamond(r(a, env)),
                EqFormula::Box(a) => EqFormula::Box(r(a, env)),
                EqFormula::Exists(v, a) | EqFormula::Forall(v, a) => {
                    let t = *next;
                    *next += 1;
                    env.push((*v, t));
                    let body = Box::new(go(a, env, next));
                    env.pop();
                    if matches!(f, EqFormula::Exists(..)) {
                        EqFormula::Exists(t, body)
                    } else {
                        EqFormula::Forall(t, body)
                    }
                }
            }
        }
        go(self, &mut Vec::new(), &mut next)
    }
}

/// Expands a cardinality assertion, either over `card = k` primitives or as a
/// pure quantifier formula (closed, using indices `0..=k`).
pub fn expand_sigma(kind: SigmaKind, as_quantifiers: bool) -> EqFormula {
    if !as_quantifiers {
        return match kind {
            SigmaKind::Exact(k) => EqFormula::card(k),
            SigmaKind::AtLeast(k) => EqFormula::and_all((0..k).map(|n| EqFormula::not(EqFormula::card(n)))),
            SigmaKind::AtMost(k) => EqFormula::or_all((0..=k).map(EqFormula::card)),
        };
    }
    let distinct = |k: u32| {
        EqFormula::and_all(
            (0..k).flat_map(|i| (i + 1..k).map(move |j| EqFormula::not(EqFormula::atom(i, j)))),
        )
    };
    let exists_all = |k: u32, body: EqFormula| (0..k).rev().fold(body, |acc, v| EqFormula::exists(v, acc));
    let at_least = |k: u32| {
        if k == 0 {
            EqFormula::verum()
        } else if k == 1 {
            EqFormula::exists(0, EqFormula::atom(0, 0))
        } else {
            exists_all(k, distinct(k))
        }
    };
    match kind {
        SigmaKind::AtLeast(k) => at_least(k),
        SigmaKind::AtMost(k) => {
            // Among any k+1 elements two coincide.
            let clash = EqFormula::or_all(
                (0..=k).flat_map(|i| (i + 1..=k).map(move |j| EqFormula::atom(i, j))),
            );
            let clash = if k == 0 { EqFormula::not(EqFormula::atom(0, 0)) } else { clash };
            (0..=k).rev().fold(clash, |acc, v| EqFormula::forall(v, acc))
        }
        SigmaKind::Exact(k) => {
            let cover = EqFormula::forall(
                k,
                if k == 0 {
                    EqFormula::not(EqFormula::atom(0, 0))
                } else {
                    EqFormula::or_all((0..k).map(|i| EqFormula::atom(k, i)))
                },
            );
            if k == 0 {
                cover
            } else if k == 1 {
                EqFormula::exists(0, cover)
            } else {
                exists_all(k, EqFormula::and(distinct(k), cover))
            }
        }
    }
}

impl PropFormula {
    pub fn var(p: u32) -> Self {
        PropFormula::Var(p)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        PropFormula::Not(Box::new(f))
    }
    pub fn and(a: Self, b: Self) -> Self {
        PropFormula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Self, b: Self) -> Self {
        PropFormula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Self, b: Self) -> Self {
        PropFormula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Self, b: Self) -> Self {
        PropFormula::Iff(Box::new(a), Box::new(b))
    }
    pub fn diamond(f: Self) -> Self {
        PropFormula::Diamond(Box::new(f))
    }
    pub fn boxed(f: Self) -> Self {
        PropFormula::Box(Box::new(f))
    }

    pub fn children(&self) -> Vec<&PropFormula> {
        match self {
            PropFormula::Var(_) => vec![],
            PropFormula::Not(a) | PropFormula::Diamond(a) | PropFormula::Box(a) => vec![a],
            PropFormula::And(a, b)
            | PropFormula::Or(a, b)
            | PropFormula::Implies(a, b)
            | PropFormula::Iff(a, b) => vec![a, b],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn modal_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.modal_depth()).max().unwrap_or(0);
        match self {
            PropFormula::Diamond(_) | PropFormula::Box(_) => inner + 1,
            _ => inner,
        }
    }

    /// One more than the largest variable index (0 for variable-free formulas).
    pub fn var_count(&self) -> usize {
        match self {
            PropFormula::Var(p) => *p as usize + 1,
            _ => self.children().iter().map(|c| c.var_count()).max().unwrap_or(0),
        }
    }

    /// Distinct subformulas, children before parents.
    pub fn subformulas(&self) -> Vec<&PropFormula> {
        fn go<'a>(f: &'a PropFormula, seen: &mut BTreeSet<&'a PropFormula>, out: &mut Vec<&'a PropFormula>) {
            if seen.contains(f) {
                return;
            }
            for c in f.children() {
                go(c, seen, out);
            }
            seen.insert(f);
            out.push(f);
        }
        let mut out = Vec::new();
        go(self, &mut BTreeSet::new(), &mut out);
        out
    }

    /// Number of distinct modal subformulas.
    pub fn modal_subformula_count(&self) -> usize {
        self.subformulas()
            .iter()
            .filter(|f| matches!(f, PropFormula::Diamond(_) | PropFormula::Box(_)))
            .count()
    }

    /// Replaces `p_i` by `subst[i]`; variables beyond the slice become falsum.
    pub fn substitute(&self, subst: &[EqFormula]) -> EqFormula {
        let s = |a: &PropFormula| a.substitute(subst);
        match self {
            PropFormula::Var(p) => subst.get(*p as usize).cloned().unwrap_or_else(EqFormula::falsum),
            PropFormula::Not(a) => EqFormula::not(s(a)),
            PropFormula::And(a, b) => EqFormula::and(s(a), s(b)),
            PropFormula::Or(a, b) => EqFormula::or(s(a), s(b)),
            PropFormula::Implies(a, b) => EqFormula::implies(s(a), s(b)),
            PropFormula::Iff(a, b) => EqFormula::iff(s(a), s(b)),
            PropFormula::Diamond(a) => EqFormula::diamond(s(a)),
            PropFormula::Box(a) => EqFormula::boxed(s(a)),
        }
    }
}
