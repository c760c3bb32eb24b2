use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use serde::Serialize;

use super::{class_valid, lifted_step, CategoryKind, Regime, Size, SizeClass};
use crate::error::{Error, Result};
use crate::formula::Var;
use crate::partition::{partitions, SetPartition};

/// Truth values over the truncated states of one variable context.
///
/// Rows are partitions of the context (sorted free variables), columns are
/// the size classes `0..=N` followed by the tail. Entries for states that
/// denote no world of the regime are kept `false`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EqCardTable {
    cat: CategoryKind,
    vars: Vec<Var>,
    n: u64,
    values: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableEntry {
    pub partition: SetPartition,
    pub size: u64,
    pub value: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailEntry {
    pub partition: SetPartition,
    pub value: bool,
}

/// Field order is part of the CLI's output contract.
#[derive(Clone, Debug, Serialize)]
pub struct TableJson {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub entries: Vec<TableEntry>,
    pub tail: Vec<TailEntry>,
}

type SuccKey = (CategoryKind, usize, u64);
type SuccLists = Arc<Vec<Vec<u32>>>;

/// Successor lists between cell indices, shared by every table of a given shape.
static SUCCESSORS: LazyLock<RwLock<HashMap<SuccKey, SuccLists>>> = LazyLock::new(Default::default);

fn successor_lists(cat: CategoryKind, m: usize, n: u64) -> SuccLists {
    let key = (cat.canonical(), m, n);
    if let Some(hit) = SUCCESSORS.read().unwrap().get(&key) {
        return hit.clone();
    }
    let parts = partitions(m).expect("context size checked by caller");
    let width = n as usize + 2;
    let mut lists = vec![Vec::new(); parts.len() * width];
    for (pi, p) in parts.iter().enumerate() {
        for a in 0..width {
            let ca = slot_class(a, n);
            if !class_valid(cat.regime, p.block_count(), ca) {
                continue;
            }
            let out = &mut lists[pi * width + a];
            for (qi, q) in parts.iter().enumerate() {
                if !p.refines_unchecked(q) {
                    continue;
                }
                for b in 0..width {
                    let cb = slot_class(b, n);
                    if class_valid(cat.regime, q.block_count(), cb) && lifted_step(key.0, p, ca, q, cb, n) {
                        out.push((qi * width + b) as u32);
                    }
                }
            }
        }
    }
    let lists = Arc::new(lists);
    SUCCESSORS.write().unwrap().entry(key).or_insert(lists).clone()
}

fn slot_class(slot: usize, n: u64) -> SizeClass {
    if slot as u64 <= n {
        SizeClass::Exact(slot as u64)
    } else {
        SizeClass::Tail
    }
}

impl EqCardTable {
    fn width(&self) -> usize {
        self.n as usize + 2
    }

    fn blank(cat: CategoryKind, vars: Vec<Var>, n: u64) -> Result<Self> {
        let rows = partitions(vars.len())?.len();
        if n < vars.len() as u64 {
            return Err(Error::ThresholdTooSmall { given: n, needed: vars.len() as u64 });
        }
        Ok(EqCardTable { cat: cat.canonical(), vars, n, values: vec![false; rows * (n as usize + 2)] })
    }

    /// Fills every valid cell from `f(partition, size class)`.
    fn tabulate(cat: CategoryKind, vars: Vec<Var>, n: u64, mut f: impl FnMut(&SetPartition, SizeClass) -> bool) -> Result<Self> {
        let mut t = Self::blank(cat, vars, n)?;
        let width = t.width();
        for (pi, p) in partitions(t.m())?.iter().enumerate() {
            for slot in 0..width {
                let c = slot_class(slot, n);
                if class_valid(t.cat.regime, p.block_count(), c) {
                    t.values[pi * width + slot] = f(p, c);
                }
            }
        }
        Ok(t)
    }

    /// Table of `x_i = x_j`.
    pub fn atom(cat: CategoryKind, n: u64, i: Var, j: Var) -> Result<Self> {
        let vars: Vec<Var> = BTreeSet::from([i, j]).into_iter().collect();
        let (pi, pj) = (vars.binary_search(&i).unwrap(), vars.binary_search(&j).unwrap());
        Self::tabulate(cat, vars, n, |p, _| p.same_block(pi, pj))
    }

    /// Table of `card = k`.
    pub fn card(cat: CategoryKind, n: u64, k: u32) -> Result<Self> {
        Self::tabulate(cat, Vec::new(), n, |_, c| c == SizeClass::Exact(k as u64))
    }

    /// Constant table over the empty context.
    pub fn constant(cat: CategoryKind, n: u64, value: bool) -> Result<Self> {
        Self::tabulate(cat, Vec::new(), n, |_, _| value)
    }

    pub fn category(&self) -> CategoryKind {
        self.cat
    }

    pub fn regime(&self) -> Regime {
        self.cat.regime
    }

    /// Number of free variables (the ground-set size of the partitions).
    pub fn m(&self) -> usize {
        self.vars.len()
    }

    /// Free variables in ascending order; partition position `i` is `vars()[i]`.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// The truncation threshold `N`.
    pub fn threshold(&self) -> u64 {
        self.n
    }

    /// Value at a truncated state, or `None` if the state denotes no world.
    pub fn get(&self, p: &SetPartition, size: SizeClass) -> Option<bool> {
        if p.m() != self.m() {
            return None;
        }
        let slot = match size {
            SizeClass::Exact(s) if s <= self.n => s as usize,
            SizeClass::Exact(_) => return None,
            SizeClass::Tail => self.width() - 1,
        };
        if !class_valid(self.cat.regime, p.block_count(), slot_class(slot, self.n)) {
            return None;
        }
        Some(self.values[p.rank() * self.width() + slot])
    }

    /// Value at a concrete state; sizes above `N` and ω read the tail.
    pub fn value_at(&self, p: &SetPartition, size: Size) -> Result<bool> {
        if p.m() != self.m() {
            return Err(Error::Arity(format!("table has {} free variables, pattern has {}", self.m(), p.m())));
        }
        if !self.cat.regime.admits(size) {
            return Err(Error::Regime(format!("size {size} is not a world of regime {}", self.cat.regime)));
        }
        let class = match size {
            Size::Finite(s) if s < p.block_count() as u64 => {
                return Err(Error::Unrealizable(format!("pattern {p} does not fit in {s} elements")))
            }
            Size::Finite(s) if s <= self.n => SizeClass::Exact(s),
            _ => SizeClass::Tail,
        };
        Ok(self.get(p, class).expect("valid state"))
    }

    /// Finite entries `(P, s, value)` over valid states.
    pub fn entries(&self) -> Vec<TableEntry> {
        let mut out = Vec::new();
        for p in partitions(self.m()).unwrap() {
            for s in 0..=self.n {
                if let Some(value) = self.get(p, SizeClass::Exact(s)) {
                    out.push(TableEntry { partition: p.clone(), size: s, value });
                }
            }
        }
        out
    }

    pub fn tail(&self) -> Vec<TailEntry> {
        partitions(self.m())
            .unwrap()
            .iter()
            .map(|p| TailEntry { partition: p.clone(), value: self.get(p, SizeClass::Tail).unwrap() })
            .collect()
    }

    pub fn to_json(&self) -> TableJson {
        TableJson { m: self.m(), n: self.n, entries: self.entries(), tail: self.tail() }
    }

    fn map_valid(&self, mut f: impl FnMut(usize, usize, bool) -> bool) -> EqCardTable {
        let mut out = self.clone();
        let width = self.width();
        for (pi, p) in partitions(self.m()).unwrap().iter().enumerate() {
            for slot in 0..width {
                if class_valid(self.cat.regime, p.block_count(), slot_class(slot, self.n)) {
                    let idx = pi * width + slot;
                    out.values[idx] = f(pi, slot, self.values[idx]);
                }
            }
        }
        out
    }

    pub fn negate(&self) -> EqCardTable {
        self.map_valid(|_, _, v| !v)
    }

    /// Re-indexes the table over a larger context containing `self.vars()`.
    pub fn lift(&self, vars: &[Var]) -> Result<EqCardTable> {
        if vars == self.vars.as_slice() {
            return Ok(self.clone());
        }
        let positions: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.binary_search(v)
                    .map_err(|_| Error::InvalidArgument(format!("context {vars:?} lacks x{v}")))
            })
            .collect::<Result<_>>()?;
        let width = self.width();
        Self::tabulate(self.cat, vars.to_vec(), self.n, |p, c| {
            let slot = match c {
                SizeClass::Exact(s) => s as usize,
                SizeClass::Tail => width - 1,
            };
            self.values[p.restrict(&positions).rank() * width + slot]
        })
    }

    /// Pointwise combination over the union of both contexts.
    pub fn combine(&self, other: &EqCardTable, op: impl Fn(bool, bool) -> bool) -> Result<EqCardTable> {
        if self.cat != other.cat || self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "cannot combine tables for {} (N={}) and {} (N={})",
                self.cat, self.n, other.cat, other.n
            )));
        }
        let vars: Vec<Var> = self.vars.iter().chain(&other.vars).copied().collect::<BTreeSet<_>>().into_iter().collect();
        let (a, b) = (self.lift(&vars)?, other.lift(&vars)?);
        Ok(a.map_valid(|pi, slot, v| op(v, b.values[pi * a.width() + slot])))
    }

    pub fn and(&self, other: &EqCardTable) -> Result<EqCardTable> {
        self.combine(other, |a, b| a && b)
    }

    pub fn or(&self, other: &EqCardTable) -> Result<EqCardTable> {
        self.combine(other, |a, b| a || b)
    }

    pub fn implies(&self, other: &EqCardTable) -> Result<EqCardTable> {
        self.combine(other, |a, b| !a || b)
    }

    pub fn iff(&self, other: &EqCardTable) -> Result<EqCardTable> {
        self.combine(other, |a, b| a == b)
    }

    /// `∃ x_v` applied to this table.
    pub fn exists(&self, v: Var) -> EqCardTable {
        let width = self.width();
        let Ok(pos) = self.vars.binary_search(&v) else {
            // Vacuous binder: only the world must be nonempty.
            return self.map_valid(|_, slot, val| val && slot != 0);
        };
        let mut vars = self.vars.clone();
        vars.remove(pos);
        Self::tabulate(self.cat, vars, self.n, |p, c| {
            let slot = match c {
                SizeClass::Exact(s) => s as usize,
                SizeClass::Tail => width - 1,
            };
            let read = |q: SetPartition| self.values[q.rank() * width + slot];
            let fresh_fits = match c {
                SizeClass::Exact(s) => s > p.block_count() as u64,
                SizeClass::Tail => true,
            };
            (0..p.block_count()).any(|b| read(p.insert(pos, Some(b)))) || (fresh_fits && read(p.insert(pos, None)))
        })
        .expect("context shrinks")
    }

    /// `∀ x_v` applied to this table.
    pub fn forall(&self, v: Var) -> EqCardTable {
        self.negate().exists(v).negate()
    }

    /// `◇` applied to this table.
    pub fn diamond(&self) -> EqCardTable {
        let succ = successor_lists(self.cat, self.m(), self.n);
        let values = &self.values;
        self.map_valid(|pi, slot, _| succ[pi * (self.n as usize + 2) + slot].iter().any(|&t| values[t as usize]))
    }

    /// `□` applied to this table.
    pub fn boxed(&self) -> EqCardTable {
        self.negate().diamond().negate()
    }

    /// Whether two tables denote the same function on every state, after
    /// lifting to a common context and reading sizes above both thresholds
    /// from the tails.
    pub fn agrees_with(&self, other: &EqCardTable) -> bool {
        if self.cat != other.cat {
            return false;
        }
        let vars: Vec<Var> = self.vars.iter().chain(&other.vars).copied().collect::<BTreeSet<_>>().into_iter().collect();
        let top = self.n.max(other.n).max(vars.len() as u64);
        let lifted = |t: &EqCardTable| t.extend_threshold(top).and_then(|t| t.lift(&vars));
        let (Ok(a), Ok(b)) = (lifted(self), lifted(other)) else { return false };
        let top = top + 1;
        let sizes: Vec<Size> = (0..=top).map(Size::Finite).chain([Size::Omega]).filter(|s| self.cat.regime.admits(*s)).collect();
        partitions(vars.len()).unwrap().iter().all(|p| {
            sizes.iter().all(|&s| {
                if matches!(s, Size::Finite(k) if k < p.block_count() as u64) {
                    return true;
                }
                a.value_at(p, s).unwrap() == b.value_at(p, s).unwrap()
            })
        })
    }

    /// The same table with a larger threshold; new finite columns copy the tail.
    pub fn extend_threshold(&self, n: u64) -> Result<EqCardTable> {
        if n < self.n {
            return Err(Error::ThresholdTooSmall { given: n, needed: self.n });
        }
        let width = self.width();
        Self::tabulate(self.cat, self.vars.clone(), n, |p, c| {
            let slot = match c {
                SizeClass::Exact(s) if s <= self.n => s as usize,
                _ => width - 1,
            };
            self.values[p.rank() * width + slot]
        })
    }
}

impl fmt::Debug for EqCardTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EqCardTable({}, vars {:?}, N={})", self.cat, self.vars, self.n)?;
        for p in partitions(self.m()).unwrap() {
            write!(f, "\n  {p}:")?;
            for s in 0..=self.n {
                match self.get(p, SizeClass::Exact(s)) {
                    Some(v) => write!(f, " {}", u8::from(v))?,
                    None => f.write_str(" .")?,
                }
            }
            write!(f, " | {}", u8::from(self.get(p, SizeClass::Tail).unwrap()))?;
        }
        Ok(())
    }
}

impl fmt::Display for EqCardTable {
    /// One line per partition: the finite sizes where the table holds, then the tail.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m = {}, N = {}, category {}", self.m(), self.n, self.cat)?;
        for p in partitions(self.m()).unwrap() {
            let sizes: Vec<String> = (0..=self.n)
                .filter(|&s| self.get(p, SizeClass::Exact(s)) == Some(true))
                .map(|s| s.to_string())
                .collect();
            let tail = self.get(p, SizeClass::Tail).unwrap();
            writeln!(
                f,
                "{p}: true at sizes [{}], tail {}",
                sizes.join(", "),
                if tail { "true" } else { "false" }
            )?;
        }
        Ok(())
    }
}
