//! Finite reflexive-transitive frames, their generators, a model checker and
//! validity search, and the registry of axioms and theories.

mod axioms;
mod canon;
mod sat;
mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formula::PropFormula;
use crate::partition::partitions;

pub use axioms::{axiom, j_axiom, AxiomName, TheoryId, TheoryInfo};
pub use search::{frame_valid, frame_valid_at, frame_valid_with, Engine, SearchOptions};

/// Largest chain or partition-lattice parameter accepted by [`mk_frame`].
pub const MAX_FAMILY_N: usize = 5;
/// Largest cluster size accepted by [`mk_frame`].
pub const MAX_FAMILY_K: usize = 4;
/// Largest poset accepted by [`mk_frame`].
pub const MAX_POSET_NODES: usize = 5;

/// A finite preorder. `rel[i]` holds the nodes visible from `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteFrame {
    name: String,
    rel: Vec<FixedBitSet>,
    labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Chain(usize),
    Cluster(usize),
    Lollipop(usize),
    PartitionLattice(usize),
    PrepartitionPrelattice(usize, usize),
    /// A tree of clusters: `parents[i]` is the parent of cluster `i`, which
    /// must precede it.
    Pretree { parents: Vec<Option<usize>>, cluster_sizes: Vec<usize> },
    AllPosets(usize),
    AllDirectedPosets(usize),
}

fn check_bound(what: &str, value: usize, max: usize) -> Result<()> {
    if value > max {
        return Err(Error::FrameBound(format!("{what} {value} exceeds {max}")));
    }
    Ok(())
}

/// Builds the frames of a family, enforcing the size guards.
pub fn mk_frame(family: &Family) -> Result<Vec<FiniteFrame>> {
    use Family::*;
    match family {
        Chain(n) => {
            check_bound("chain length", *n, MAX_FAMILY_N)?;
            Ok(vec![FiniteFrame::chain(*n)])
        }
        Cluster(k) => {
            check_bound("cluster size", *k, MAX_FAMILY_K)?;
            Ok(vec![FiniteFrame::cluster(*k)])
        }
        Lollipop(k) => {
            check_bound("cluster size", *k, MAX_FAMILY_K)?;
            Ok(vec![FiniteFrame::lollipop(*k)])
        }
        PartitionLattice(n) => {
            check_bound("partition size", *n, MAX_FAMILY_N)?;
            Ok(vec![FiniteFrame::partition_lattice(*n)?])
        }
        PrepartitionPrelattice(n, k) => {
            check_bound("partition size", *n, MAX_FAMILY_N)?;
            check_bound("cluster size", *k, MAX_FAMILY_K)?;
            Ok(vec![FiniteFrame::prepartition(*n, *k)?])
        }
        Pretree { parents, cluster_sizes } => {
            check_bound("pretree clusters", parents.len(), MAX_POSET_NODES)?;
            for &k in cluster_sizes {
                check_bound("cluster size", k, MAX_FAMILY_K)?;
            }
            Ok(vec![FiniteFrame::pretree(parents, cluster_sizes)?])
        }
        AllPosets(n) => {
            check_bound("poset size", *n, MAX_POSET_NODES)?;
            Ok(FiniteFrame::all_posets(*n))
        }
        AllDirectedPosets(n) => {
            check_bound("poset size", *n, MAX_POSET_NODES)?;
            Ok((1..=*n).flat_map(FiniteFrame::all_directed_posets).collect())
        }
    }
}

impl FiniteFrame {
    /// A frame from an explicit relation, which must already be a preorder.
    pub fn new(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let f = Self::raw(node_count, pairs)?;
        for i in 0..node_count {
            if !f.rel[i][i] {
                return Err(Error::NotPreorder(format!("node {i} is not reflexive")));
            }
            for j in f.rel[i].ones() {
                if !f.rel[j].is_subset(&f.rel[i]) {
                    let k = f.rel[j].difference(&f.rel[i]).next().unwrap();
                    return Err(Error::NotPreorder(format!("{i} sees {j} and {j} sees {k}, but {i} does not see {k}")));
                }
            }
        }
        Ok(f)
    }

    /// The reflexive-transitive closure of the given pairs.
    pub fn from_closure(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut f = Self::raw(node_count, pairs)?;
        for i in 0..node_count {
            f.rel[i].insert(i);
        }
        for k in 0..node_count {
            let row_k = f.rel[k].clone();
            for i in 0..node_count {
                if f.rel[i][k] {
                    f.rel[i].union_with(&row_k);
                }
            }
        }
        Ok(f)
    }

    fn raw(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rel = vec![FixedBitSet::with_capacity(node_count); node_count];
        for (i, j) in pairs {
            if i >= node_count || j >= node_count {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) outside {node_count} nodes")));
            }
            rel[i].insert(j);
        }
        Ok(FiniteFrame { name: format!("frame({node_count})"), rel, labels: (0..node_count).map(|i| i.to_string()).collect() })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::InvalidArgument(format!("{} labels for {} nodes", labels.len(), self.node_count())));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn point() -> Self {
        Self::chain(1)
    }

    /// `n` nodes, each seeing itself and every later node.
    pub fn chain(n: usize) -> Self {
        Self::from_closure(n, (1..n).map(|i| (i - 1, i))).unwrap().with_name(format!("chain({n})"))
    }

    pub fn cluster(k: usize) -> Self {
        Self::from_closure(k, (0..k).flat_map(|i| (0..k).map(move |j| (i, j)))).unwrap().with_name(format!("cluster({k})"))
    }

    /// A root strictly below a `k`-cluster.
    pub fn lollipop(k: usize) -> Self {
        let pairs = (1..=k).flat_map(|i| [(0, i), (i, 1 + i % k)]);
        let mut labels = vec!["root".to_string()];
        labels.extend((0..k).map(|i| format!("c{i}")));
        Self::from_closure(k + 1, pairs).unwrap().with_name(format!("lollipop({k})")).with_labels(labels).unwrap()
    }

    /// Partitions of an `n`-set ordered by refinement, finest first.
    pub fn partition_lattice(n: usize) -> Result<Self> {
        let parts = partitions(n)?;
        let mut pairs = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            for (j, q) in parts.iter().enumerate() {
                if p.refines_unchecked(q) {
                    pairs.push((i, j));
                }
            }
        }
        let labels = parts.iter().map(|p| p.to_string()).collect();
        Self::new(parts.len(), pairs)?.with_name(format!("partition_lattice({n})")).with_labels(labels)
    }

    /// The partition lattice of `n` with every node replaced by a `k`-cluster.
    pub fn prepartition(n: usize, k: usize) -> Result<Self> {
        Ok(Self::partition_lattice(n)?.clusterize(k).with_name(format!("prepartition({n}, {k})")))
    }

    pub fn pretree(parents: &[Option<usize>], cluster_sizes: &[usize]) -> Result<Self> {
        if parents.len() != cluster_sizes.len() {
            return Err(Error::InvalidArgument("pretree needs one cluster size per node".into()));
        }
        let mut offsets = vec![0];
        for &k in cluster_sizes {
            if k == 0 {
                return Err(Error::InvalidArgument("pretree clusters must be nonempty".into()));
            }
            offsets.push(offsets.last().unwrap() + k);
        }
        let mut pairs = Vec::new();
        for (c, &k) in cluster_sizes.iter().enumerate() {
            pairs.extend((0..k).map(|i| (offsets[c] + i, offsets[c] + (i + 1) % k)));
            if let Some(p) = parents[c] {
                if p >= c {
                    return Err(Error::InvalidArgument(format!("parent {p} of cluster {c} must precede it")));
                }
                pairs.push((offsets[p], offsets[c]));
            }
        }
        Ok(Self::from_closure(offsets[cluster_sizes.len()], pairs)?.with_name(format!("pretree({parents:?}, {cluster_sizes:?})")))
    }

    /// Replaces every node by `k` mutually visible copies.
    pub fn clusterize(&self, k: usize) -> Self {
        let n = self.node_count();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in self.rel[i].ones() {
                for a in 0..k {
                    for b in 0..k {
                        pairs.push((i * k + a, j * k + b));
                    }
                }
            }
        }
        let labels = (0..n * k).map(|x| format!("{}#{}", self.labels[x / k], x % k)).collect();
        Self::new(n * k, pairs).unwrap().with_name(format!("{}x{k}", self.name)).with_labels(labels).unwrap()
    }

    /// All partial orders on `n` points up to isomorphism.
    pub fn all_posets(n: usize) -> Vec<Self> {
        // Every poset has a linear extension, so it suffices to choose
        // relations among pairs i < j and keep the transitive ones.
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for mask in 0u64..1 << pairs.len() {
            let chosen = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &p)| p);
            let Ok(f) = Self::new(n, chosen.chain((0..n).map(|i| (i, i)))) else { continue };
            if seen.insert(f.canonical_form()) {
                let idx = out.len();
                out.push(f.with_name(format!("poset({n}, #{idx})")));
            }
        }
        out
    }

    pub fn all_directed_posets(n: usize) -> Vec<Self> {
        Self::all_posets(n)
            .into_iter()
            .filter(|f| f.is_directed())
            .enumerate()
            .map(|(i, f)| f.with_name(format!("directed_poset({n}, #{i})")))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.rel.len()
    }

    pub fn sees(&self, i: usize, j: usize) -> bool {
        self.rel[i][j]
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rel[i].ones()
    }

    pub(crate) fn row(&self, i: usize) -> &FixedBitSet {
        &self.rel[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Maximal sets of mutually visible nodes, ordered by least member.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut done = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        for i in 0..n {
            if done[i] {
                continue;
            }
            let c: Vec<usize> = self.rel[i].ones().filter(|&j| self.rel[j][i]).collect();
            c.iter().for_each(|&j| done.insert(j));
            out.push(c);
        }
        out
    }

    pub fn is_partial_order(&self) -> bool {
        self.clusters().iter().all(|c| c.len() == 1)
    }

    /// Every two nodes have a common successor.
    pub fn is_directed(&self) -> bool {
        let n = self.node_count();
        (0..n).all(|i| (0..n).all(|j| self.rel[i].intersection(&self.rel[j]).next().is_some()))
    }

    /// Nodes that see every node.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.rel[i].count_ones(..) == self.node_count()).collect()
    }

    /// The subframe generated by `root`, with the original index of each node.
    pub fn cone(&self, root: usize) -> (FiniteFrame, Vec<usize>) {
        let keep: Vec<usize> = self.rel[root].ones().collect();
        let sub = self.induced(&keep);
        (sub.with_name(format!("{} from {root}", self.name)), keep)
    }

    /// The subframe on `keep` (sorted original indices).
    fn induced(&self, keep: &[usize]) -> FiniteFrame {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let mut pairs = Vec::new();
        for &i in keep {
            pairs.extend(self.rel[i].ones().filter_map(|j| pos.get(&j)).map(|&b| (pos[&i], b)));
        }
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        Self::new(keep.len(), pairs).expect("induced subframe of a preorder").with_labels(labels).unwrap().with_name(self.name.clone())
    }

    /// Keeps at most `cap` nodes of every cluster, always including `protect`
    /// when given. Returns the smaller frame, the original index of each kept
    /// node, and for every original node the kept node standing in for it.
    ///
    /// Collapsing a cluster is a bounded morphism, and a model only realizes
    /// `2^v` valuation types per cluster, so with `cap >= 2^v` the reduced
    /// frame has a countermodel exactly when the original does.
    pub fn reduce_clusters(&self, cap: usize, protect: Option<usize>) -> (FiniteFrame, Vec<usize>, Vec<usize>) {
        let cap = cap.max(1);
        let mut keep = Vec::new();
        let mut stand_in = vec![0; self.node_count()];
        for c in self.clusters() {
            let mut chosen: Vec<usize> = protect.filter(|p| c.contains(p)).into_iter().collect();
            chosen.extend(c.iter().copied().filter(|&i| Some(i) != protect).take(cap - chosen.len()));
            for (k, &i) in c.iter().enumerate() {
                stand_in[i] = if chosen.contains(&i) { i } else { chosen[k % chosen.len()] };
            }
            keep.extend(chosen);
        }
        keep.sort_unstable();
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let stand_in = stand_in.iter().map(|i| pos[i]).collect();
        (self.induced(&keep), keep, stand_in)
    }

    /// Immediate successors between clusters: `cover[c]` lists the clusters
    /// directly above cluster `c`, with `cluster_of` mapping nodes to clusters.
    pub(crate) fn cluster_covers(&self) -> (Vec<Vec<usize>>, Vec<usize>, Vec<Vec<usize>>) {
        let clusters = self.clusters();
        let mut cluster_of = vec![0; self.node_count()];
        for (c, members) in clusters.iter().enumerate() {
            members.iter().for_each(|&i| cluster_of[i] = c);
        }
        let k = clusters.len();
        let strict: Vec<FixedBitSet> = (0..k)
            .map(|c| {
                let mut s = FixedBitSet::with_capacity(k);
                self.rel[clusters[c][0]].ones().for_each(|j| s.insert(cluster_of[j]));
                s.set(c, false);
                s
            })
            .collect();
        let covers = (0..k)
            .map(|c| {
                let mut below = FixedBitSet::with_capacity(k);
                strict[c].ones().for_each(|e| below.union_with(&strict[e]));
                strict[c].difference(&below).collect()
            })
            .collect();
        (clusters, cluster_of, covers)
    }

    pub fn canonical_form(&self) -> canon::CanonicalForm {
        canon::canonical_form(self)
    }

    /// Isomorphism as unlabeled frames.
    pub fn is_isomorphic(&self, other: &FiniteFrame) -> bool {
        self.node_count() == other.node_count() && self.canonical_form() == other.canonical_form()
    }

    pub fn to_json(&self) -> FrameJson {
        FrameJson {
            name: self.name.clone(),
            nodes: self.labels.iter().enumerate().map(|(id, label)| NodeJson { id, label: label.clone() }).collect(),
            relation: (0..self.node_count()).flat_map(|i| self.rel[i].ones().map(move |j| (i, j))).collect(),
        }
    }
}

impl fmt::Debug for FiniteFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.name)?;
        for i in 0..self.node_count() {
            let succ: Vec<String> = self.rel[i].ones().map(|j| j.to_string()).collect();
            write!(f, " {}:{{{}}}", self.labels[i], succ.join(","))?;
        }
        f.write_str(" ]")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeJson {
    pub id: usize,
    pub label: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameJson {
    pub name: String,
    pub nodes: Vec<NodeJson>,
    pub relation: Vec<(usize, usize)>,
}

/// Truth sets of propositional variables: `sets[p]` is where `p` holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    node_count: usize,
    sets: Vec<FixedBitSet>,
}

impl Valuation {
    pub fn empty(vars: usize, node_count: usize) -> Self {
        Valuation { node_count, sets: vec![FixedBitSet::with_capacity(node_count); vars] }
    }

    pub fn from_sets(node_count: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut v = Self::empty(sets.len(), node_count);
        for (p, nodes) in sets.iter().enumerate() {
            for &i in nodes {
                if i >= node_count {
                    return Err(Error::InvalidArgument(format!("node {i} outside {node_count} nodes")));
                }
                v.sets[p].insert(i);
            }
        }
        Ok(v)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn var_count(&self) -> usize {
        self.sets.len()
    }

    pub fn holds(&self, p: usize, node: usize) -> bool {
        self.sets[p][node]
    }

    pub fn set(&mut self, p: usize, node: usize, value: bool) {
        self.sets[p].set(node, value);
    }

    pub fn nodes(&self, p: usize) -> Vec<usize> {
        self.sets[p].ones().collect()
    }

    /// Pulls a valuation back along a node map into a frame of `node_count` nodes.
    pub fn pull_back(&self, node_count: usize, map: impl Fn(usize) -> usize) -> Valuation {
        let mut out = Self::empty(self.var_count(), node_count);
        for p in 0..self.var_count() {
            for i in 0..node_count {
                out.sets[p].set(i, self.sets[p][map(i)]);
            }
        }
        out
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, Vec<usize>> = (0..self.var_count()).map(|p| (format!("p{p}"), self.nodes(p))).collect();
        map.serialize(s)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.var_count())
            .map(|p| {
                let nodes: Vec<String> = self.nodes(p).iter().map(|i| i.to_string()).collect();
                format!("p{p}: {{{}}}", nodes.join(", "))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The set of nodes where `f` holds.
pub fn truth_set(frame: &FiniteFrame, v: &Valuation, f: &PropFormula) -> Result<FixedBitSet> {
    let n = frame.node_count();
    let diamond = |a: &FixedBitSet| {
        let mut out = FixedBitSet::with_capacity(n);
        for i in 0..n {
            out.set(i, !frame.rel[i].is_disjoint(a));
        }
        out
    };
    let complement = |a: &FixedBitSet| {
        let mut out = a.clone();
        out.toggle_range(..);
        out
    };
    Ok(match f {
        PropFormula::Var(p) => {
            v.sets.get(*p as usize).ok_or(Error::VariableOutOfRange(*p))?.clone()
        }
        PropFormula::Not(a) => complement(&truth_set(frame, v, a)?),
        PropFormula::And(a, b) => {
            let mut out = truth_set(frame, v, a)?;
            out.intersect_with(&truth_set(frame, v, b)?);
            out
        }
        PropFormula::Or(a, b) => {
            let mut out = truth_set(frame, v, a)?;
            out.union_with(&truth_set(frame, v, b)?);
            out
        }
        PropFormula::Implies(a, b) => {
            let mut out = complement(&truth_set(frame, v, a)?);
            out.union_with(&truth_set(frame, v, b)?);
            out
        }
        PropFormula::Iff(a, b) => {
            let mut out = truth_set(frame, v, a)?;
            out.symmetric_difference_with(&truth_set(frame, v, b)?);
            complement(&out)
        }
        PropFormula::Diamond(a) => diamond(&truth_set(frame, v, a)?),
        PropFormula::Box(a) => complement(&diamond(&complement(&truth_set(frame, v, a)?))),
    })
}

/// Kripke truth of `f` at `node`.
pub fn model_check(frame: &FiniteFrame, v: &Valuation, node: usize, f: &PropFormula) -> Result<bool> {
    if node >= frame.node_count() {
        return Err(Error::InvalidArgument(format!("node {node} outside {} nodes", frame.node_count())));
    }
    Ok(truth_set(frame, v, f)?[node])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    InValidities,
    NotInValidities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    BoundedBy(u64),
}

#[derive(Clone, Debug, Serialize)]
pub struct Countermodel {
    pub frame: String,
    pub valuation: Valuation,
    pub node: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Countermodel(Countermodel),
    /// `p_i` is replaced by the `i`-th formula.
    Substitution(Vec<crate::formula::EqFormula>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub exactness: Exactness,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn valid(exactness: Exactness) -> Self {
        Verdict { outcome: Outcome::InValidities, exactness, witness: None }
    }

    pub fn invalid(exactness: Exactness, witness: Witness) -> Self {
        Verdict { outcome: Outcome::NotInValidities, exactness, witness: Some(witness) }
    }

    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::InValidities
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match &self.witness {
            Some(Witness::Countermodel(c)) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::InValidities => "in-validities",
            Outcome::NotInValidities => "not-in-validities",
        })
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exactness::Exact => f.write_str("exact"),
            Exactness::BoundedBy(n) => write!(f, "bounded N={n}"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.outcome, self.exactness)
    }
}
