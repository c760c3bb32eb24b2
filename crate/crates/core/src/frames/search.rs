//! Countermodel search.
//!
//! Valuations are ordered as bit strings listing `p0` at every node, then
//! `p1`, and so on, with false before true. The backtracking and naive
//! engines return the least countermodel in that order; the SAT engine does
//! too when `lex_min` is set.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{sat, truth_set, Countermodel, Exactness, FiniteFrame, Valuation, Verdict, Witness};
use crate::error::{Error, Result};
use crate::formula::PropFormula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Backtracking up to [`AUTO_BACKTRACK_BITS`] valuation bits, SAT beyond.
    Auto,
    Backtrack,
    Naive,
    Sat,
}

/// Valid formulas force the backtracking engine through its whole space,
/// which gets slow well before `enum_budget`.
pub const AUTO_BACKTRACK_BITS: usize = 16;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub engine: Engine,
    /// Largest `node_count * vars` for the enumerating engines.
    pub enum_budget: usize,
    /// Largest `node_count * vars` handed to the SAT engine.
    pub sat_budget: usize,
    /// Make the SAT engine return the least countermodel.
    pub lex_min: bool,
    /// Shrink clusters to `2^vars` nodes before searching.
    pub reduce_clusters: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { engine: Engine::Auto, enum_budget: 30, sat_budget: 400_000, lex_min: true, reduce_clusters: false }
    }
}

/// Validity at every node.
pub fn frame_valid(frame: &FiniteFrame, f: &PropFormula) -> Result<Verdict> {
    frame_valid_with(frame, None, f, &SearchOptions::default())
}

/// Validity at one node.
pub fn frame_valid_at(frame: &FiniteFrame, node: usize, f: &PropFormula) -> Result<Verdict> {
    frame_valid_with(frame, Some(node), f, &SearchOptions::default())
}

pub fn frame_valid_with(frame: &FiniteFrame, node: Option<usize>, f: &PropFormula, opts: &SearchOptions) -> Result<Verdict> {
    let n = frame.node_count();
    if let Some(i) = node {
        if i >= n {
            return Err(Error::InvalidArgument(format!("node {i} outside {n} nodes")));
        }
    }
    let vars = f.var_count();
    let found = if opts.reduce_clusters {
        let cap = 1usize << vars.min(20);
        let (small, keep, stand_in) = frame.reduce_clusters(cap, node);
        let small_node = node.map(|i| stand_in[i]);
        countermodel(&small, small_node, f, opts)?.map(|(v, failing)| {
            let v = v.pull_back(n, |i| stand_in[i]);
            (v, node.unwrap_or(keep[failing]))
        })
    } else {
        countermodel(frame, node, f, opts)?
    };
    Ok(match found {
        None => Verdict::valid(Exactness::Exact),
        Some((valuation, node)) => Verdict::invalid(
            Exactness::Exact,
            Witness::Countermodel(Countermodel { frame: frame.name().to_string(), valuation, node }),
        ),
    })
}

fn countermodel(frame: &FiniteFrame, node: Option<usize>, f: &PropFormula, opts: &SearchOptions) -> Result<Option<(Valuation, usize)>> {
    let n = frame.node_count();
    let vars = f.var_count();
    let mut targets = FixedBitSet::with_capacity(n);
    match node {
        Some(i) => targets.insert(i),
        None => targets.insert_range(..),
    }
    if vars == 0 {
        let t = truth_set(frame, &Valuation::empty(0, n), f)?;
        return Ok(targets.difference(&t).next().map(|i| (Valuation::empty(0, n), i)));
    }
    let bits = n * vars;
    let engine = match opts.engine {
        Engine::Auto if bits <= opts.enum_budget.min(AUTO_BACKTRACK_BITS) => Engine::Backtrack,
        Engine::Auto => Engine::Sat,
        e => e,
    };
    let budget = if engine == Engine::Sat { opts.sat_budget } else { opts.enum_budget };
    if bits > budget {
        return Err(Error::BudgetExceeded(format!(
            "{n} nodes x {vars} variables = {bits} valuation bits exceeds {budget} ({engine:?})"
        )));
    }
    let valuation = match engine {
        Engine::Backtrack => Compiled::new(frame, f).backtrack(&targets),
        Engine::Naive => Compiled::new(frame, f).naive(&targets),
        Engine::Sat => sat::countermodel(frame, &targets, f, opts.lex_min),
        Engine::Auto => unreachable!(),
    };
    Ok(match valuation {
        None => None,
        Some(v) => {
            let t = truth_set(frame, &v, f)?;
            let failing = targets.difference(&t).next().expect("search returned a countermodel");
            Some((v, failing))
        }
    })
}

#[derive(Clone, Copy)]
enum Op {
    Var(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Diamond(usize),
    Box(usize),
}

/// A formula flattened over a frame of at most 64 nodes, evaluated on node
/// masks with three truth values (definitely true, definitely false).
struct Compiled {
    ops: Vec<Op>,
    rel: Vec<u64>,
    all: u64,
    vars: usize,
}

impl Compiled {
    fn new(frame: &FiniteFrame, f: &PropFormula) -> Self {
        let n = frame.node_count();
        assert!(n <= 64, "enumerating engines handle at most 64 nodes");
        let subs = f.subformulas();
        let index: HashMap<&PropFormula, usize> = subs.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let ops = subs
            .iter()
            .map(|s| match s {
                PropFormula::Var(p) => Op::Var(*p as usize),
                PropFormula::Not(a) => Op::Not(index[&**a]),
                PropFormula::And(a, b) => Op::And(index[&**a], index[&**b]),
                PropFormula::Or(a, b) => Op::Or(index[&**a], index[&**b]),
                PropFormula::Implies(a, b) => Op::Implies(index[&**a], index[&**b]),
                PropFormula::Iff(a, b) => Op::Iff(index[&**a], index[&**b]),
                PropFormula::Diamond(a) => Op::Diamond(index[&**a]),
                PropFormula::Box(a) => Op::Box(index[&**a]),
            })
            .collect();
        let rel = (0..n).map(|i| frame.row(i).ones().fold(0u64, |m, j| m | 1 << j)).collect();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Compiled { ops, rel, all, vars: f.var_count() }
    }

    fn node_count(&self) -> usize {
        self.rel.len()
    }

    /// Masks of nodes where the formula is definitely true and definitely false.
    fn eval(&self, t_var: &[u64], f_var: &[u64]) -> (u64, u64) {
        let mut t = vec![0u64; self.ops.len()];
        let mut f = vec![0u64; self.ops.len()];
        let over = |test: &dyn Fn(u64) -> bool| -> u64 {
            self.rel.iter().enumerate().fold(0, |m, (w, &r)| if test(r) { m | 1 << w } else { m })
        };
        for (i, op) in self.ops.iter().enumerate() {
            let (ti, fi) = match *op {
                Op::Var(p) => (t_var[p], f_var[p]),
                Op::Not(a) => (f[a], t[a]),
                Op::And(a, b) => (t[a] & t[b], f[a] | f[b]),
                Op::Or(a, b) => (t[a] | t[b], f[a] & f[b]),
                Op::Implies(a, b) => (f[a] | t[b], t[a] & f[b]),
                Op::Iff(a, b) => ((t[a] & t[b]) | (f[a] & f[b]), (t[a] & f[b]) | (f[a] & t[b])),
                Op::Diamond(a) => {
                    let (ta, fa) = (t[a], f[a]);
                    (over(&|r| r & ta != 0), over(&|r| r & !fa == 0))
                }
                Op::Box(a) => {
                    let (ta, fa) = (t[a], f[a]);
                    (over(&|r| r & !ta == 0), over(&|r| r & fa != 0))
                }
            };
            t[i] = ti & self.all;
            f[i] = fi & self.all;
        }
        let root = self.ops.len() - 1;
        (t[root], f[root])
    }

    fn to_valuation(&self, t_var: &[u64]) -> Valuation {
        let n = self.node_count();
        let mut v = Valuation::empty(self.vars, n);
        for (p, &mask) in t_var.iter().enumerate() {
            for i in 0..n {
                v.set(p, i, mask >> i & 1 == 1);
            }
        }
        v
    }

    fn backtrack(&self, targets: &FixedBitSet) -> Option<Valuation> {
        let target = targets.ones().fold(0u64, |m, i| m | 1 << i);
        let mut t_var = vec![0u64; self.vars];
        let mut f_var = vec![0u64; self.vars];
        if self.dfs(0, target, &mut t_var, &mut f_var) {
            Some(self.to_valuation(&t_var))
        } else {
            None
        }
    }

    fn dfs(&self, k: usize, target: u64, t_var: &mut [u64], f_var: &mut [u64]) -> bool {
        let (t, f) = self.eval(t_var, f_var);
        if f & target != 0 {
            return true;
        }
        if t & target == target {
            return false;
        }
        let n = self.node_count();
        let (p, node) = (k / n, k % n);
        f_var[p] |= 1 << node;
        if self.dfs(k + 1, target, t_var, f_var) {
            return true;
        }
        f_var[p] &= !(1 << node);
        t_var[p] |= 1 << node;
        if self.dfs(k + 1, target, t_var, f_var) {
            return true;
        }
        t_var[p] &= !(1 << node);
        false
    }

    fn naive(&self, targets: &FixedBitSet) -> Option<Valuation> {
        let n = self.node_count();
        let bits = n * self.vars;
        let target = targets.ones().fold(0u64, |m, i| m | 1 << i);
        for x in 0u64..1 << bits {
            let mut t_var = vec![0u64; self.vars];
            for k in 0..bits {
                if x >> (bits - 1 - k) & 1 == 1 {
                    t_var[k / n] |= 1 << (k % n);
                }
            }
            let f_var: Vec<u64> = t_var.iter().map(|m| !m & self.all).collect();
            let (_, f) = self.eval(&t_var, &f_var);
            if f & target != 0 {
                return Some(self.to_valuation(&t_var));
            }
        }
        None
    }
}
