//! Control statements (buttons, switches, dials, ratchets, penultimate
//! assertions) and frame labelings, all checked by exact evaluation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::eqcard::{evaluate_params, evaluate_slot};
use crate::error::{Error, Result};
use crate::formula::{expand_sigma, EqFormula, PropFormula, SigmaKind};
use crate::frames::{FiniteFrame, Valuation};
use crate::partition::partitions;
use crate::validity::{oracle_frame, pattern_formula, states_formula, OracleFrame, WorldSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    WeakButton,
    Button,
    PureButton,
    Switch,
    Dial,
    Ratchet,
    Penultimate,
    IndependentButtons,
}

impl ControlKind {
    pub const ALL: [ControlKind; 8] = [
        ControlKind::WeakButton,
        ControlKind::Button,
        ControlKind::PureButton,
        ControlKind::Switch,
        ControlKind::Dial,
        ControlKind::Ratchet,
        ControlKind::Penultimate,
        ControlKind::IndependentButtons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlKind::WeakButton => "weak_button",
            ControlKind::Button => "button",
            ControlKind::PureButton => "pure_button",
            ControlKind::Switch => "switch",
            ControlKind::Dial => "dial",
            ControlKind::Ratchet => "ratchet",
            ControlKind::Penultimate => "penultimate",
            ControlKind::IndependentButtons => "independent_buttons",
        }
    }

    fn min_formulas(self) -> usize {
        match self {
            ControlKind::IndependentButtons => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        ControlKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown control kind `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct ControlClaim {
    pub kind: ControlKind,
    pub formulas: Vec<EqFormula>,
    pub world: WorldSpec,
}

/// One evaluated modal condition.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub description: String,
    pub formula: EqFormula,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub holds: bool,
    pub conditions: Vec<Condition>,
}

fn nec(f: EqFormula) -> EqFormula {
    EqFormula::boxed(f)
}

fn poss(f: EqFormula) -> EqFormula {
    EqFormula::diamond(f)
}

fn not(f: &EqFormula) -> EqFormula {
    EqFormula::not(f.clone())
}

/// Exactly one of `ds` holds.
fn exactly_one(ds: &[EqFormula]) -> EqFormula {
    let some = EqFormula::or_all(ds.iter().cloned());
    let at_most = EqFormula::and_all(
        (0..ds.len()).flat_map(|i| (i + 1..ds.len()).map(move |j| (i, j))).map(|(i, j)| {
            EqFormula::not(EqFormula::and(ds[i].clone(), ds[j].clone()))
        }),
    );
    EqFormula::and(some, at_most)
}

fn conditions(kind: ControlKind, fs: &[EqFormula]) -> Vec<(String, EqFormula)> {
    let mut out = Vec::new();
    match kind {
        ControlKind::WeakButton | ControlKind::Button | ControlKind::PureButton => {
            for (i, b) in fs.iter().enumerate() {
                if kind == ControlKind::PureButton {
                    out.push((format!("b{i} once true stays true"), nec(EqFormula::implies(b.clone(), nec(b.clone())))));
                }
                let reach = poss(nec(b.clone()));
                if kind == ControlKind::WeakButton {
                    out.push((format!("b{i} can be made necessary"), reach));
                } else {
                    out.push((format!("b{i} can always be made necessary"), nec(reach)));
                }
            }
        }
        ControlKind::Switch => {
            for (i, s) in fs.iter().enumerate() {
                out.push((format!("s{i} can always be toggled"), nec(EqFormula::and(poss(s.clone()), poss(not(s))))));
            }
        }
        ControlKind::Penultimate => {
            for (i, s) in fs.iter().enumerate() {
                out.push((format!("s{i} is true"), s.clone()));
                out.push((format!("s{i} is possibly false"), poss(not(s))));
                out.push((format!("s{i} once false stays false"), nec(EqFormula::implies(not(s), nec(not(s))))));
            }
        }
        ControlKind::Dial => {
            out.push(("necessarily exactly one dial value".to_string(), nec(exactly_one(fs))));
            for (i, d) in fs.iter().enumerate() {
                out.push((format!("d{i} is always reachable"), nec(poss(d.clone()))));
            }
        }
        ControlKind::Ratchet => {
            for (i, r) in fs.iter().enumerate() {
                out.push((format!("r{} once true stays true", i + 1), nec(EqFormula::implies(r.clone(), nec(r.clone())))));
                if let Some(next) = fs.get(i + 1) {
                    out.push((format!("r{} implies r{}", i + 2, i + 1), nec(EqFormula::implies(next.clone(), r.clone()))));
                }
                let target = match fs.get(i + 1) {
                    Some(next) => EqFormula::and(r.clone(), not(next)),
                    None => r.clone(),
                };
                out.push((
                    format!("volume can be raised to exactly {}", i + 1),
                    nec(EqFormula::implies(not(r), poss(target))),
                ));
            }
        }
        ControlKind::IndependentButtons => {
            for (i, b) in fs.iter().enumerate() {
                out.push((format!("b{i} can be made necessary"), poss(nec(b.clone()))));
            }
            for i in 0..fs.len() {
                for j in 0..fs.len() {
                    if i != j {
                        out.push((
                            format!("b{i} can be pushed leaving b{j} false"),
                            poss(EqFormula::and(nec(fs[i].clone()), not(&fs[j]))),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Evaluates the defining conditions of the claim at its world.
pub fn check_control(c: &ControlClaim) -> Result<Certificate> {
    let min = c.kind.min_formulas();
    if c.formulas.len() < min {
        return Err(Error::Arity(format!("{} needs at least {min} formulas, got {}", c.kind, c.formulas.len())));
    }
    let w = &c.world;
    let pattern = w.initial_pattern();
    let mut out = Vec::new();
    for (description, formula) in conditions(c.kind, &c.formulas) {
        let holds = evaluate_params(&formula, w.cat, w.size, &pattern)?;
        out.push(Condition { description, formula, holds });
    }
    Ok(Certificate { holds: out.iter().all(|c| c.holds), conditions: out })
}

pub fn independent_buttons(bs: &[EqFormula], world: &WorldSpec) -> Result<Certificate> {
    check_control(&ControlClaim { kind: ControlKind::IndependentButtons, formulas: bs.to_vec(), world: *world })
}

/// Buttons `(u_i = v_i) ∨ ρ` over parameters `u_i = x(2i)`, `v_i = x(2i+1)`,
/// where `ρ` says some other pair of parameters got identified.
pub fn cross_wiring_buttons(n: u32) -> Vec<EqFormula> {
    let u = |i: u32| 2 * i;
    let v = |i: u32| 2 * i + 1;
    let mut wires = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if j < k {
                wires.push(EqFormula::atom(u(j), u(k)));
                wires.push(EqFormula::atom(v(j), v(k)));
            }
            if j != k {
                wires.push(EqFormula::atom(u(j), v(k)));
            }
        }
    }
    let rho = EqFormula::or_all(wires);
    (0..n).map(|i| EqFormula::or(EqFormula::atom(u(i), v(i)), rho.clone())).collect()
}

/// `d_0, …, d_k` with `d_i` saying there are exactly `i` elements for
/// `i ≥ 1` and `d_0` covering every other size.
pub fn sigma_dial(k: u32) -> Vec<EqFormula> {
    let exact: Vec<EqFormula> = (1..=k).map(EqFormula::card).collect();
    let rest = EqFormula::not(EqFormula::or_all(exact.iter().cloned()));
    std::iter::once(rest).chain(exact).collect()
}

/// "At most n elements", "at most n−1", …, "at most 1".
pub fn at_most_ratchet(n: u32) -> Vec<EqFormula> {
    (1..=n).rev().map(|k| expand_sigma(SigmaKind::AtMost(k), false)).collect()
}

/// A frame with one equational label per node.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub frame: FiniteFrame,
    pub labels: Vec<EqFormula>,
}

impl Labeling {
    pub fn new(frame: FiniteFrame, labels: Vec<EqFormula>) -> Result<Self> {
        if labels.len() != frame.node_count() {
            return Err(Error::Arity(format!("{} labels for {} nodes", labels.len(), frame.node_count())));
        }
        Ok(Labeling { frame, labels })
    }

    /// Lollipop with `k` cluster nodes labeled by size: the root says the
    /// world is empty, cluster node `i` says it has `i+1` elements, the last
    /// one says at least `k`.
    pub fn lollipop(k: usize) -> Self {
        assert!(k >= 1);
        let mut labels = vec![EqFormula::card(0)];
        labels.extend((1..k as u32).map(EqFormula::card));
        labels.push(expand_sigma(SigmaKind::AtLeast(k as u32), false));
        Labeling { frame: FiniteFrame::lollipop(k), labels }
    }

    /// Partition lattice of `n` labeled by the pattern of `x0..x(n-1)`.
    pub fn partition_lattice(n: usize) -> Result<Self> {
        let labels = partitions(n)?.iter().map(pattern_formula).collect();
        Ok(Labeling { frame: FiniteFrame::partition_lattice(n)?, labels })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The frame has no node seeing every node.
    NoRoot,
    InitialLabelFalse { node: usize },
    /// A label whose truth at a state is not determined by the truncation.
    Undetermined { state: String, node: usize },
    Unlabeled { state: String },
    MultiplyLabeled { state: String, nodes: Vec<usize> },
    /// Frame order and realizability disagree for the pair.
    Order { from: usize, to: usize, frame_sees: bool },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRoot => write!(f, "frame has no root"),
            Violation::InitialLabelFalse { node } => write!(f, "initial state fails the label of root node {node}"),
            Violation::Undetermined { state, node } => write!(f, "label of node {node} is not constant on state {state}"),
            Violation::Unlabeled { state } => write!(f, "state {state} satisfies no label"),
            Violation::MultiplyLabeled { state, nodes } => write!(f, "state {state} satisfies labels of nodes {nodes:?}"),
            Violation::Order { from, to, frame_sees } => {
                if *frame_sees {
                    write!(f, "node {from} sees {to} but some state labeled {from} cannot reach label {to}")
                } else {
                    write!(f, "node {from} does not see {to} but every state labeled {from} reaches label {to}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelingReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// For each reachable state, the node whose label it satisfies.
    #[serde(skip)]
    pub assignment: Vec<Option<usize>>,
    #[serde(skip)]
    pub oracle: OracleFrame,
}

/// Checks the labeling against the states reachable from `w`, truncated at `n`.
pub fn verify_labeling(lab: &Labeling, w: &WorldSpec, n: u64) -> Result<LabelingReport> {
    let of = oracle_frame(w, n)?;
    let frame = &lab.frame;
    let mut violations = Vec::new();

    // truth[node][state]
    let mut truth: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(of.states.len()); frame.node_count()];
    for (u, label) in lab.labels.iter().enumerate() {
        for (s, state) in of.states.iter().enumerate() {
            match evaluate_slot(label, w.cat, state.size, &state.partition, n)? {
                Some(b) => truth[u].set(s, b),
                None => violations.push(Violation::Undetermined { state: state.to_string(), node: u }),
            }
        }
    }

    match frame.roots().first() {
        None => violations.push(Violation::NoRoot),
        Some(&r) if !truth[r][of.root] => violations.push(Violation::InitialLabelFalse { node: r }),
        Some(_) => {}
    }

    let mut assignment = Vec::with_capacity(of.states.len());
    for (s, state) in of.states.iter().enumerate() {
        let nodes: Vec<usize> = (0..frame.node_count()).filter(|&u| truth[u][s]).collect();
        match nodes.len() {
            0 => violations.push(Violation::Unlabeled { state: state.to_string() }),
            1 => {}
            _ => violations.push(Violation::MultiplyLabeled { state: state.to_string(), nodes: nodes.clone() }),
        }
        assignment.push((nodes.len() == 1).then(|| nodes[0]));
    }

    for u in 0..frame.node_count() {
        for v in 0..frame.node_count() {
            let realized =
                truth[u].ones().all(|s| of.frame.successors(s).any(|t| truth[v][t]));
            if realized != frame.sees(u, v) {
                violations.push(Violation::Order { from: u, to: v, frame_sees: frame.sees(u, v) });
            }
        }
    }

    Ok(LabelingReport { valid: violations.is_empty(), violations, assignment, oracle: of })
}

/// `ψ_p` = disjunction of the labels of nodes where the model makes `p` true.
pub fn labeling_substitution(lab: &Labeling, model: &Valuation) -> Result<Vec<EqFormula>> {
    if model.node_count() != lab.frame.node_count() {
        return Err(Error::UnverifiedLabeling(format!(
            "valuation over {} nodes for a {}-node frame",
            model.node_count(),
            lab.frame.node_count()
        )));
    }
    Ok((0..model.var_count())
        .map(|p| EqFormula::or_all(model.nodes(p).into_iter().map(|u| lab.labels[u].clone())))
        .collect())
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaReport {
    pub models: usize,
    /// Distinct (model, truth set) pairs reached.
    pub classes: usize,
    pub failures: Vec<String>,
}

/// Checks, for every valuation of `vars` variables on the labeled frame, that
/// each formula of modal depth at most `depth` is true at a node exactly when
/// its substitution instance holds at the states labeled by that node.
///
/// Formulas are tracked by truth set: booleans combine pointwise on both
/// sides and each modal step evaluates `◇χ` through the eliminator, where `χ`
/// defines the state side of the operand. This covers every formula of the
/// given depth, not a sample.
pub fn check_labeling_lemma(lab: &Labeling, w: &WorldSpec, n: u64, vars: usize, depth: usize) -> Result<LemmaReport> {
    let rep = verify_labeling(lab, w, n)?;
    if !rep.valid {
        return Err(Error::UnverifiedLabeling(rep.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
    }
    let nodes = lab.frame.node_count();
    let bits = nodes * vars;
    if bits > 20 {
        return Err(Error::BudgetExceeded(format!("{bits} valuation bits")));
    }
    let of = &rep.oracle;
    let h: Vec<usize> = rep.assignment.iter().map(|a| a.unwrap()).collect();
    let full: u64 = if nodes == 64 { u64::MAX } else { (1 << nodes) - 1 };
    let diamond_frame = |a: u64| -> u64 {
        (0..nodes).filter(|&i| lab.frame.successors(i).any(|j| a >> j & 1 == 1)).fold(0, |m, i| m | 1 << i)
    };
    // Node set of frame-side truth determines the state side we expect.
    let pulled = |a: u64| -> Vec<bool> { h.iter().map(|&u| a >> u & 1 == 1).collect() };
    let mut state_diamond: HashMap<u64, Vec<Option<bool>>> = HashMap::new();
    let mut report = LemmaReport::default();

    for code in 0u64..1 << bits {
        report.models += 1;
        let mut model = Valuation::empty(vars, nodes);
        for k in 0..bits {
            model.set(k / nodes, k % nodes, code >> k & 1 == 1);
        }
        let psi = labeling_substitution(lab, &model)?;
        let mut level: Vec<u64> = Vec::new();
        let mut ok = true;
        for (p, f) in psi.iter().enumerate() {
            let a = (0..nodes).filter(|&u| model.holds(p, u)).fold(0u64, |m, u| m | 1 << u);
            for (s, state) in of.states.iter().enumerate() {
                let got = evaluate_slot(f, w.cat, state.size, &state.partition, n)?;
                if got != Some(a >> h[s] & 1 == 1) {
                    report.failures.push(format!("model {code}: p{p} disagrees at state {state}"));
                    ok = false;
                }
            }
            level.push(a);
        }
        if !ok {
            continue;
        }
        let mut seen = boolean_closure(&level, full);
        for d in 0..depth {
            let mut next: Vec<u64> = seen.clone();
            for &a in &seen {
                let expect = diamond_frame(a);
                let got = state_diamond.entry(a).or_insert_with(|| {
                    let on: Vec<usize> = (0..h.len()).filter(|&s| pulled(a)[s]).collect();
                    let chi = EqFormula::diamond(states_formula(&of.states, n, &on));
                    of.states
                        .iter()
                        .map(|st| evaluate_slot(&chi, w.cat, st.size, &st.partition, n).ok().flatten())
                        .collect()
                });
                let want: Vec<Option<bool>> = pulled(expect).into_iter().map(Some).collect();
                if *got != want {
                    report.failures.push(format!("model {code}: diamond of node set {a:#b} disagrees at depth {}", d + 1));
                    ok = false;
                }
                next.push(expect);
            }
            if !ok {
                break;
            }
            seen = boolean_closure(&next, full);
        }
        report.classes += seen.len();
    }
    Ok(report)
}

/// Closure of node sets under complement and intersection.
fn boolean_closure(gens: &[u64], full: u64) -> Vec<u64> {
    let mut set: std::collections::BTreeSet<u64> = gens.iter().copied().collect();
    set.insert(full);
    loop {
        let items: Vec<u64> = set.iter().copied().collect();
        let before = set.len();
        for &a in &items {
            set.insert(!a & full);
            for &b in &items {
                set.insert(a & b);
            }
        }
        if set.len() == before {
            return set.into_iter().collect();
        }
    }
}

/// Literal form of the lemma for one formula: truth at the frame's root
/// against truth of the substitution instance at the world.
pub fn lemma_instance_agrees(lab: &Labeling, w: &WorldSpec, model: &Valuation, f: &PropFormula) -> Result<bool> {
    let root = *lab.frame.roots().first().ok_or_else(|| Error::UnverifiedLabeling("frame has no root".into()))?;
    let psi = labeling_substitution(lab, model)?;
    let left = crate::frames::model_check(&lab.frame, model, root, f)?;
    let right = evaluate_params(&f.substitute(&psi), w.cat, w.size, &w.initial_pattern())?;
    Ok(left == right)
}
