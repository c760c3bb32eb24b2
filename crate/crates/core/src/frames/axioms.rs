use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::{Exactness, FiniteFrame, MAX_POSET_NODES};
use crate::error::{Error, Result};
use crate::formula::PropFormula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomName {
    K,
    Dual,
    T,
    Four,
    Five,
    Grz,
    Two,
    Three,
    Triv,
    J(u32),
}

impl AxiomName {
    pub fn formula(self) -> PropFormula {
        use PropFormula as P;
        let p = || P::var(0);
        let q = || P::var(1);
        match self {
            AxiomName::K => P::implies(P::boxed(P::implies(p(), q())), P::implies(P::boxed(p()), P::boxed(q()))),
            AxiomName::Dual => P::iff(P::diamond(p()), P::not(P::boxed(P::not(p())))),
            AxiomName::T => P::implies(P::boxed(p()), p()),
            AxiomName::Four => P::implies(P::boxed(p()), P::boxed(P::boxed(p()))),
            AxiomName::Five => j_axiom(1),
            AxiomName::Grz => P::implies(P::boxed(P::implies(P::boxed(P::implies(p(), P::boxed(p()))), p())), p()),
            AxiomName::Two => P::implies(P::diamond(P::boxed(p())), P::boxed(P::diamond(p()))),
            AxiomName::Three => P::or(
                P::boxed(P::implies(P::boxed(p()), q())),
                P::boxed(P::implies(P::boxed(q()), p())),
            ),
            AxiomName::Triv => P::iff(P::boxed(p()), p()),
            AxiomName::J(n) => j_axiom(n),
        }
    }
}

/// `J_1 = ◇□p0 → p0`, `J_{n+1} = ◇(□p_n ∧ ¬J_n) → p_n`.
pub fn j_axiom(n: u32) -> PropFormula {
    assert!(n >= 1, "J axioms start at 1");
    let mut j = PropFormula::implies(PropFormula::diamond(PropFormula::boxed(PropFormula::var(0))), PropFormula::var(0));
    for k in 1..n {
        let pk = PropFormula::var(k);
        j = PropFormula::implies(
            PropFormula::diamond(PropFormula::and(PropFormula::boxed(pk.clone()), PropFormula::not(j))),
            pk,
        );
    }
    j
}

/// The named axiom; `n` is required for `J` and ignored otherwise.
pub fn axiom(name: &str, n: Option<u32>) -> Result<PropFormula> {
    let name: AxiomName = match (name, n) {
        ("J", Some(n)) | ("j", Some(n)) if n >= 1 => AxiomName::J(n),
        ("J", _) | ("j", _) => return Err(Error::InvalidArgument("axiom J needs an index n >= 1".into())),
        _ => name.parse()?,
    };
    Ok(name.formula())
}

impl FromStr for AxiomName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "K" => AxiomName::K,
            "Dual" => AxiomName::Dual,
            "T" => AxiomName::T,
            "4" => AxiomName::Four,
            "5" => AxiomName::Five,
            "Grz" => AxiomName::Grz,
            ".2" => AxiomName::Two,
            ".3" => AxiomName::Three,
            "Triv" => AxiomName::Triv,
            _ => match s.strip_prefix('J').and_then(|k| k.parse().ok()) {
                Some(k) if k >= 1 => AxiomName::J(k),
                _ => return Err(Error::UnknownAxiom(s.to_string())),
            },
        })
    }
}

impl fmt::Display for AxiomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomName::K => f.write_str("K"),
            AxiomName::Dual => f.write_str("Dual"),
            AxiomName::T => f.write_str("T"),
            AxiomName::Four => f.write_str("4"),
            AxiomName::Five => f.write_str("5"),
            AxiomName::Grz => f.write_str("Grz"),
            AxiomName::Two => f.write_str(".2"),
            AxiomName::Three => f.write_str(".3"),
            AxiomName::Triv => f.write_str("Triv"),
            AxiomName::J(n) => write!(f, "J{n}"),
        }
    }
}

impl Serialize for AxiomName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryId {
    S4,
    S4_2,
    S4_3,
    S4_3J(u32),
    S5,
    Grz,
    Grz2,
    Grz3,
    Grz3J(u32),
    Triv,
    Lollipop,
    Partition(u32),
    Prepartition(u32),
}

/// Registry entry for a theory.
#[derive(Clone, Debug, Serialize)]
pub struct TheoryInfo {
    pub id: TheoryId,
    /// Axioms over S4's base (K, T, 4 are listed explicitly). Empty for
    /// theories given only by a frame class.
    pub axioms: Vec<AxiomName>,
    pub family: &'static str,
    /// Whether the characteristic family is a fixed finite set of frames.
    pub finitely_many_frames: bool,
}

impl TheoryId {
    pub fn info(self) -> TheoryInfo {
        use AxiomName::*;
        let s4 = vec![K, T, Four];
        let grz = vec![K, T, Four, Grz];
        let with = |mut base: Vec<AxiomName>, extra: &[AxiomName]| {
            base.extend_from_slice(extra);
            base
        };
        let (axioms, family, finite) = match self {
            TheoryId::S4 => (s4, "rooted posets of clusters", false),
            TheoryId::S4_2 => (with(s4, &[Two]), "directed posets of clusters", false),
            TheoryId::S4_3 => (with(s4, &[Three]), "chains of clusters", false),
            TheoryId::S4_3J(n) => (with(s4, &[Three, J(n)]), "chains of clusters of length at most n", false),
            TheoryId::S5 => (with(s4, &[Five]), "clusters", false),
            TheoryId::Grz => (grz, "rooted posets", false),
            TheoryId::Grz2 => (with(grz, &[Two]), "directed posets", false),
            TheoryId::Grz3 => (with(grz, &[Three]), "finite chains", false),
            TheoryId::Grz3J(n) => (with(grz, &[Three, J(n)]), "chains of length at most n", true),
            TheoryId::Triv => (with(s4, &[Triv]), "a single reflexive point", true),
            TheoryId::Lollipop => (Vec::new(), "lollipops", false),
            TheoryId::Partition(_) => (Vec::new(), "the partition lattice of n", true),
            TheoryId::Prepartition(_) => (Vec::new(), "prepartition prelattices of n", false),
        };
        TheoryInfo { id: self, axioms, family, finitely_many_frames: finite }
    }

    pub fn exactness(self, bound: u64) -> Exactness {
        if self.info().finitely_many_frames {
            Exactness::Exact
        } else {
            Exactness::BoundedBy(bound)
        }
    }

    /// Characteristic frames, instantiated up to `bound` for a formula in
    /// `vars` variables. Each family is closed under generated subframes, so
    /// only maximal members are listed; clusters are capped at `2^vars`,
    /// beyond which a larger cluster refutes nothing new.
    pub fn frames(self, bound: u64, vars: usize) -> Result<Vec<FiniteFrame>> {
        let b = bound.max(1) as usize;
        let c = b.min(1usize << vars.min(16));
        let posets = |directed: bool| -> Vec<FiniteFrame> {
            (1..=b.min(MAX_POSET_NODES))
                .flat_map(FiniteFrame::all_posets)
                .filter(|f| !f.roots().is_empty() && (!directed || f.is_directed()))
                .collect()
        };
        let chain_of_clusters = |len: usize| FiniteFrame::chain(len).clusterize(c).with_name(format!("chain({len}) of {c}-clusters"));
        Ok(match self {
            TheoryId::S4 => posets(false).iter().map(|f| f.clusterize(c)).collect(),
            TheoryId::S4_2 => posets(true).iter().map(|f| f.clusterize(c)).collect(),
            TheoryId::S4_3 => vec![chain_of_clusters(b)],
            TheoryId::S4_3J(n) => vec![chain_of_clusters(n as usize)],
            TheoryId::S5 => vec![FiniteFrame::cluster(c)],
            TheoryId::Grz => posets(false),
            TheoryId::Grz2 => posets(true),
            TheoryId::Grz3 => vec![FiniteFrame::chain(b)],
            TheoryId::Grz3J(n) => vec![FiniteFrame::chain(n as usize)],
            TheoryId::Triv => vec![FiniteFrame::point()],
            TheoryId::Lollipop => vec![FiniteFrame::lollipop(c)],
            TheoryId::Partition(n) => vec![FiniteFrame::partition_lattice(n as usize)?],
            TheoryId::Prepartition(n) => vec![FiniteFrame::prepartition(n as usize, c)?],
        })
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryId::S4 => f.write_str("S4"),
            TheoryId::S4_2 => f.write_str("S4.2"),
            TheoryId::S4_3 => f.write_str("S4.3"),
            TheoryId::S4_3J(n) => write!(f, "S4.3J({n})"),
            TheoryId::S5 => f.write_str("S5"),
            TheoryId::Grz => f.write_str("Grz"),
            TheoryId::Grz2 => f.write_str("Grz.2"),
            TheoryId::Grz3 => f.write_str("Grz.3"),
            TheoryId::Grz3J(n) => write!(f, "Grz.3J({n})"),
            TheoryId::Triv => f.write_str("Triv"),
            TheoryId::Lollipop => f.write_str("Lollipop"),
            TheoryId::Partition(n) => write!(f, "Partition({n})"),
            TheoryId::Prepartition(n) => write!(f, "Prepartition({n})"),
        }
    }
}

impl FromStr for TheoryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |prefix: &str| -> Option<u32> { s.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok() };
        Ok(match s {
            "S4" => TheoryId::S4,
            "S4.2" => TheoryId::S4_2,
            "S4.3" => TheoryId::S4_3,
            "S5" => TheoryId::S5,
            "Grz" => TheoryId::Grz,
            "Grz.2" => TheoryId::Grz2,
            "Grz.3" => TheoryId::Grz3,
            "Triv" => TheoryId::Triv,
            "Lollipop" => TheoryId::Lollipop,
            _ => {
                if let Some(n) = indexed("S4.3J(") {
                    TheoryId::S4_3J(n)
                } else if let Some(n) = indexed("Grz.3J(") {
                    TheoryId::Grz3J(n)
                } else if let Some(n) = indexed("Partition(") {
                    TheoryId::Partition(n)
                } else if let Some(n) = indexed("Prepartition(") {
                    TheoryId::Prepartition(n)
                } else {
                    return Err(Error::InvalidArgument(format!("unknown theory `{s}`")));
                }
            }
        })
    }
}

impl Serialize for TheoryId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
