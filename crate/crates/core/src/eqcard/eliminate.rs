use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use super::{threshold, CategoryKind, EqCardTable, Size, SizeClass};
use crate::error::{Error, Result};
use crate::formula::{expand_sigma, EqFormula, SigmaKind};
use crate::partition::{partitions, SetPartition, MAX_GROUND};

type MemoKey = (EqFormula, CategoryKind, u64);

static MEMO: LazyLock<RwLock<HashMap<MemoKey, Arc<EqCardTable>>>> = LazyLock::new(Default::default);

/// Drops every memoized table.
pub fn clear_memo() {
    MEMO.write().unwrap().clear();
}

/// Threshold used by [`eliminate`]: the larger of [`threshold`] and
/// `free + quantifier depth + max k + 1`, which stays sound when binders
/// shadow each other.
pub fn eliminator_threshold(f: &EqFormula) -> u64 {
    let nested = f.free_vars().len() + f.quantifier_depth() + f.max_card().unwrap_or(0) as usize + 1;
    threshold(f).max(nested as u64)
}

pub fn eliminate(f: &EqFormula, cat: CategoryKind) -> Result<Arc<EqCardTable>> {
    eliminate_at(f, cat, eliminator_threshold(f))
}

/// Eliminates at an explicit threshold, which must be at least
/// [`eliminator_threshold`].
pub fn eliminate_at(f: &EqFormula, cat: CategoryKind, n: u64) -> Result<Arc<EqCardTable>> {
    let needed = eliminator_threshold(f);
    if n < needed {
        return Err(Error::ThresholdTooSmall { given: n, needed });
    }
    build(f, cat.canonical(), n)
}

fn build(f: &EqFormula, cat: CategoryKind, n: u64) -> Result<Arc<EqCardTable>> {
    let key = (f.clone(), cat, n);
    if let Some(hit) = MEMO.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let t = match f {
        EqFormula::Atom(i, j) => EqCardTable::atom(cat, n, *i, *j)?,
        EqFormula::CardExact(k) => EqCardTable::card(cat, n, *k)?,
        EqFormula::Not(a) => build(a, cat, n)?.negate(),
        EqFormula::And(a, b) => build(a, cat, n)?.and(&*build(b, cat, n)?)?,
        EqFormula::Or(a, b) => build(a, cat, n)?.or(&*build(b, cat, n)?)?,
        EqFormula::Implies(a, b) => build(a, cat, n)?.implies(&*build(b, cat, n)?)?,
        EqFormula::Iff(a, b) => build(a, cat, n)?.iff(&*build(b, cat, n)?)?,
        EqFormula::Exists(v, a) => {
            let inner = build(a, cat, n)?;
            if inner.m() > MAX_GROUND {
                return Err(Error::BoundExceeded { m: inner.m(), max: MAX_GROUND });
            }
            inner.exists(*v)
        }
        EqFormula::Forall(v, a) => build(a, cat, n)?.forall(*v),
        EqFormula::Diamond(a) => build(a, cat, n)?.diamond(),
        EqFormula::Box(a) => build(a, cat, n)?.boxed(),
    };
    Ok(MEMO.write().unwrap().entry(key).or_insert(Arc::new(t)).clone())
}

/// Truth of `f` at a world of the given size whose free variables realize
/// `pattern` (positions follow the sorted free variables of `f`).
pub fn evaluate(f: &EqFormula, cat: CategoryKind, size: Size, pattern: &SetPartition) -> Result<bool> {
    let free = f.free_vars().len();
    if pattern.m() != free {
        return Err(Error::Arity(format!("formula has {free} free variables, pattern has {}", pattern.m())));
    }
    eliminate(f, cat)?.value_at(pattern, size)
}

/// Like [`evaluate`], with `params` giving the pattern of `x0..x_{k-1}`.
pub fn evaluate_params(f: &EqFormula, cat: CategoryKind, size: Size, params: &SetPartition) -> Result<bool> {
    let positions = param_positions(f, params)?;
    evaluate(f, cat, size, &params.restrict(&positions))
}

fn param_positions(f: &EqFormula, params: &SetPartition) -> Result<Vec<usize>> {
    f.free_vars()
        .into_iter()
        .map(|v| {
            if (v as usize) < params.m() {
                Ok(v as usize)
            } else {
                Err(Error::Arity(format!("x{v} is free but only {} parameters are named", params.m())))
            }
        })
        .collect()
}

/// Truth of `f` at a truncated state of a frame cut at `frame_n`, with the
/// pattern over `x0..x_{k-1}`. A tail state stands for every size above
/// `frame_n`; `None` means `f` is not constant there.
pub fn evaluate_slot(
    f: &EqFormula,
    cat: CategoryKind,
    class: SizeClass,
    params: &SetPartition,
    frame_n: u64,
) -> Result<Option<bool>> {
    let positions = param_positions(f, params)?;
    let pattern = params.restrict(&positions);
    let table = eliminate(f, cat)?;
    match class {
        SizeClass::Exact(s) => table.value_at(&pattern, Size::Finite(s)).map(Some),
        SizeClass::Tail => {
            let tail = table.get(&pattern, SizeClass::Tail).expect("tail is always valid");
            if cat.regime.allows_finite() {
                for s in frame_n + 1..=table.threshold() {
                    if table.get(&pattern, SizeClass::Exact(s)) != Some(tail) {
                        return Ok(None);
                    }
                }
            }
            Ok(Some(tail))
        }
    }
}

/// The pattern formula `P(x̄)`: pairwise equalities and inequalities over the
/// table's variables, or `None` when fewer than two variables are named.
fn pattern_formula(p: &SetPartition, vars: &[u32]) -> Option<EqFormula> {
    let mut literals = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let atom = EqFormula::atom(vars[i], vars[j]);
            literals.push(if p.same_block(i, j) { atom } else { EqFormula::not(atom) });
        }
    }
    (!literals.is_empty()).then(|| EqFormula::and_all(literals))
}

/// A modality-free, quantifier-free formula denoting the table: one
/// disjunct per partition, `P(x̄) ∧ (σ_s ∨ … ∨ σ≥(N+1))`, with the size
/// clause dropped where the partition holds at every size.
pub fn to_normal_formula(t: &EqCardTable) -> EqFormula {
    let n = t.threshold();
    let mut disjuncts = Vec::new();
    let mut all_full = true;
    for p in partitions(t.m()).unwrap() {
        let sizes: Vec<u64> = (0..=n).filter(|&s| t.get(p, SizeClass::Exact(s)) == Some(true)).collect();
        let valid = (0..=n).filter(|&s| t.get(p, SizeClass::Exact(s)).is_some()).count();
        let tail = t.get(p, SizeClass::Tail) == Some(true);
        let full = tail && sizes.len() == valid;
        all_full &= full;
        if sizes.is_empty() && !tail {
            continue;
        }
        let pattern = pattern_formula(p, t.vars());
        let disjunct = if full {
            pattern.unwrap_or_else(EqFormula::verum)
        } else {
            let mut size_terms: Vec<EqFormula> = sizes.into_iter().map(|s| EqFormula::card(s as u32)).collect();
            if tail {
                size_terms.push(expand_sigma(SigmaKind::AtLeast(n as u32 + 1), false));
            }
            let size_clause = EqFormula::or_all(size_terms);
            match pattern {
                Some(pf) => EqFormula::and(pf, size_clause),
                None => size_clause,
            }
        };
        disjuncts.push(disjunct);
    }
    if all_full {
        return EqFormula::verum();
    }
    if disjuncts.is_empty() {
        return EqFormula::falsum();
    }
    EqFormula::or_all(disjuncts)
}
