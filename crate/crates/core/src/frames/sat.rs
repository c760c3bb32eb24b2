//! SAT encoding of countermodel search.
//!
//! Each subformula gets one literal per node. A modal subformula gets one
//! literal per cluster instead, defined over the cover relation between
//! clusters, so the encoding grows with the Hasse diagram rather than with
//! the full relation.

use std::collections::HashMap;

use batsat::{lbool, BasicSolver, Lit, SolverInterface};
use fixedbitset::FixedBitSet;

use super::{FiniteFrame, Valuation};
use crate::formula::PropFormula;

struct Encoder {
    solver: BasicSolver,
}

impl Encoder {
    fn fresh(&mut self) -> Lit {
        Lit::new(self.solver.new_var_default(), true)
    }

    fn clause(&mut self, lits: &[Lit]) {
        let mut c = lits.to_vec();
        self.solver.add_clause_reuse(&mut c);
    }

    /// A literal equivalent to the conjunction of `lits`.
    fn and(&mut self, lits: &[Lit]) -> Lit {
        let x = self.fresh();
        let mut long = vec![x];
        for &l in lits {
            self.clause(&[!x, l]);
            long.push(!l);
        }
        self.clause(&long);
        x
    }

    fn or(&mut self, lits: &[Lit]) -> Lit {
        let neg: Vec<Lit> = lits.iter().map(|&l| !l).collect();
        !self.and(&neg)
    }

    fn iff(&mut self, a: Lit, b: Lit) -> Lit {
        let x = self.fresh();
        self.clause(&[!x, !a, b]);
        self.clause(&[!x, a, !b]);
        self.clause(&[x, a, b]);
        self.clause(&[x, !a, !b]);
        x
    }
}

/// Finds a valuation falsifying `f` at some node of `targets`.
pub fn countermodel(frame: &FiniteFrame, targets: &FixedBitSet, f: &PropFormula, lex_min: bool) -> Option<Valuation> {
    let n = frame.node_count();
    let vars = f.var_count();
    let mut enc = Encoder { solver: BasicSolver::default() };
    let var_lits: Vec<Vec<Lit>> = (0..vars).map(|_| (0..n).map(|_| enc.fresh()).collect()).collect();

    let (clusters, cluster_of, covers) = frame.cluster_covers();
    // Clusters above their covers come later in a topological order; process
    // them in reverse so covers are defined first.
    let order = topological(&covers);

    let mut lits: HashMap<&PropFormula, Vec<Lit>> = HashMap::new();
    for s in f.subformulas() {
        let node_lits: Vec<Lit> = match s {
            PropFormula::Var(p) => var_lits[*p as usize].clone(),
            PropFormula::Not(a) => lits[&**a].iter().map(|&l| !l).collect(),
            PropFormula::And(a, b) => pointwise(&mut enc, &lits[&**a], &lits[&**b], |e, x, y| e.and(&[x, y])),
            PropFormula::Or(a, b) => pointwise(&mut enc, &lits[&**a], &lits[&**b], |e, x, y| e.or(&[x, y])),
            PropFormula::Implies(a, b) => pointwise(&mut enc, &lits[&**a], &lits[&**b], |e, x, y| e.or(&[!x, y])),
            PropFormula::Iff(a, b) => pointwise(&mut enc, &lits[&**a], &lits[&**b], |e, x, y| e.iff(x, y)),
            PropFormula::Diamond(a) | PropFormula::Box(a) => {
                let is_box = matches!(s, PropFormula::Box(_));
                let inner: Vec<Lit> = lits[&**a].iter().map(|&l| if is_box { !l } else { l }).collect();
                let mut per_cluster: Vec<Option<Lit>> = vec![None; clusters.len()];
                for &c in order.iter().rev() {
                    let mut parts: Vec<Lit> = clusters[c].iter().map(|&i| inner[i]).collect();
                    parts.extend(covers[c].iter().map(|&d| per_cluster[d].expect("covers come first")));
                    per_cluster[c] = Some(enc.or(&parts));
                }
                (0..n)
                    .map(|i| {
                        let d = per_cluster[cluster_of[i]].unwrap();
                        if is_box {
                            !d
                        } else {
                            d
                        }
                    })
                    .collect()
            }
        };
        lits.insert(s, node_lits);
    }
    let root = &lits[f];
    let goal: Vec<Lit> = targets.ones().map(|i| !root[i]).collect();
    enc.clause(&goal);

    if enc.solver.solve_limited(&[]) != lbool::TRUE {
        return None;
    }
    let flat: Vec<Lit> = var_lits.iter().flatten().copied().collect();
    let mut model: Vec<bool> = flat.iter().map(|&l| enc.solver.value_lit(l) == lbool::TRUE).collect();
    if lex_min {
        let mut fixed: Vec<Lit> = Vec::with_capacity(flat.len());
        for k in 0..flat.len() {
            if model[k] {
                fixed.push(!flat[k]);
                if enc.solver.solve_limited(&fixed) == lbool::TRUE {
                    model = flat.iter().map(|&l| enc.solver.value_lit(l) == lbool::TRUE).collect();
                } else {
                    fixed.pop();
                    fixed.push(flat[k]);
                }
            } else {
                fixed.push(!flat[k]);
            }
        }
    }
    let mut v = Valuation::empty(vars, n);
    for (k, &b) in model.iter().enumerate() {
        v.set(k / n, k % n, b);
    }
    Some(v)
}

fn pointwise(enc: &mut Encoder, a: &[Lit], b: &[Lit], op: impl Fn(&mut Encoder, Lit, Lit) -> Lit) -> Vec<Lit> {
    a.iter().zip(b).map(|(&x, &y)| op(enc, x, y)).collect()
}

/// Clusters ordered so that each precedes the clusters it covers.
fn topological(covers: &[Vec<usize>]) -> Vec<usize> {
    let mut indegree = vec![0; covers.len()];
    for cs in covers {
        cs.iter().for_each(|&d| indegree[d] += 1);
    }
    let mut ready: Vec<usize> = (0..covers.len()).filter(|&c| indegree[c] == 0).collect();
    let mut out = Vec::with_capacity(covers.len());
    while let Some(c) = ready.pop() {
        out.push(c);
        for &d in &covers[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(d);
            }
        }
    }
    out
}
