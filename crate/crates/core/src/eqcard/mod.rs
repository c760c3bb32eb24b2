//! Abstract-state semantics for the modal language of equality over
//! categories of sets, and the simultaneous modality and quantifier
//! eliminator.
//!
//! A world together with a named tuple is summarized by an abstract state:
//! the partition the tuple induces and the size of the world (a natural
//! number or a single infinite size ω). Every formula is eliminated to an
//! [`EqCardTable`] over such states, truncated at a threshold `N` above
//! which truth no longer depends on the size.

mod eliminate;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::EqFormula;
use crate::partition::{partitions, SetPartition};

pub use eliminate::{
    clear_memo, eliminate, eliminate_at, eliminator_threshold, evaluate, evaluate_params, evaluate_slot,
    to_normal_formula,
};
pub use table::{EqCardTable, TableEntry, TableJson, TailEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Morphisms {
    Functions,
    Surjections,
    Injections,
    Inclusions,
    Bijections,
    Identities,
}

impl Morphisms {
    pub const ALL: [Morphisms; 6] = [
        Morphisms::Functions,
        Morphisms::Surjections,
        Morphisms::Injections,
        Morphisms::Inclusions,
        Morphisms::Bijections,
        Morphisms::Identities,
    ];

    /// Inclusions reach the same abstract states as injections, identities
    /// the same as bijections.
    pub fn canonical(self) -> Morphisms {
        match self {
            Morphisms::Inclusions => Morphisms::Injections,
            Morphisms::Identities => Morphisms::Bijections,
            m => m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Morphisms::Functions => "functions",
            Morphisms::Surjections => "surjections",
            Morphisms::Injections => "injections",
            Morphisms::Inclusions => "inclusions",
            Morphisms::Bijections => "bijections",
            Morphisms::Identities => "identities",
        }
    }
}

impl fmt::Display for Morphisms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Morphisms {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Morphisms::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown morphism class `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "all")]
    AllSets,
    #[serde(rename = "fin")]
    FiniteOnly,
    #[serde(rename = "inf")]
    InfiniteOnly,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::AllSets, Regime::FiniteOnly, Regime::InfiniteOnly];

    pub fn allows_finite(self) -> bool {
        self != Regime::InfiniteOnly
    }

    pub fn allows_infinite(self) -> bool {
        self != Regime::FiniteOnly
    }

    pub fn admits(self, size: Size) -> bool {
        match size {
            Size::Finite(_) => self.allows_finite(),
            Size::Omega => self.allows_infinite(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::AllSets => "all",
            Regime::FiniteOnly => "fin",
            Regime::InfiniteOnly => "inf",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" | "allsets" => Ok(Regime::AllSets),
            "fin" | "finite" | "finiteonly" => Ok(Regime::FiniteOnly),
            "inf" | "infinite" | "infiniteonly" => Ok(Regime::InfiniteOnly),
            _ => Err(Error::InvalidArgument(format!("unknown regime `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CategoryKind {
    pub morphisms: Morphisms,
    pub regime: Regime,
}

impl CategoryKind {
    pub fn new(morphisms: Morphisms, regime: Regime) -> Self {
        CategoryKind { morphisms, regime }
    }

    /// All eighteen categories, morphism-major.
    pub fn all() -> Vec<CategoryKind> {
        Morphisms::ALL
            .into_iter()
            .flat_map(|m| Regime::ALL.into_iter().map(move |r| CategoryKind::new(m, r)))
            .collect()
    }

    /// The representative with identical semantics.
    pub fn canonical(self) -> CategoryKind {
        CategoryKind::new(self.morphisms.canonical(), self.regime)
    }
}

impl fmt::Display for CategoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.morphisms, self.regime)
    }
}

/// Size of a world: finite, or the single abstract infinite size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Size {
    Finite(u64),
    Omega,
}

impl Size {
    fn minus(self, k: usize) -> Size {
        match self {
            Size::Finite(s) => Size::Finite(s.saturating_sub(k as u64)),
            Size::Omega => Size::Omega,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Size::Finite(_))
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Finite(s) => write!(f, "{s}"),
            Size::Omega => f.write_str("omega"),
        }
    }
}

impl FromStr for Size {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" | "ω" | "w" | "inf" => Ok(Size::Omega),
            _ => s
                .parse::<u64>()
                .map(Size::Finite)
                .map_err(|_| Error::InvalidArgument(format!("size must be a natural number or `omega`, got `{s}`"))),
        }
    }
}

impl Serialize for Size {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Size::Finite(n) => s.serialize_u64(*n),
            Size::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Size {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Size::Finite(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbstractState {
    pub partition: SetPartition,
    pub size: Size,
}

impl AbstractState {
    pub fn new(partition: SetPartition, size: Size) -> Self {
        AbstractState { partition, size }
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.partition, self.size)
    }
}

/// A size below the truncation threshold, or the tail standing for every
/// larger size including ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeClass {
    Exact(u64),
    Tail,
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeClass::Exact(s) => write!(f, "{s}"),
            SizeClass::Tail => f.write_str("tail"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedState {
    pub partition: SetPartition,
    pub size: SizeClass,
}

impl TruncatedState {
    pub fn new(partition: SetPartition, size: SizeClass) -> Self {
        TruncatedState { partition, size }
    }

    /// The truncated class of a concrete state.
    pub fn of(state: &AbstractState, n: u64) -> Self {
        let size = match state.size {
            Size::Finite(s) if s <= n => SizeClass::Exact(s),
            _ => SizeClass::Tail,
        };
        TruncatedState { partition: state.partition.clone(), size }
    }
}

impl fmt::Display for TruncatedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.partition, self.size)
    }
}

fn check_state(cat: CategoryKind, state: &AbstractState) -> Result<()> {
    if !cat.regime.admits(state.size) {
        return Err(Error::Regime(format!("size {} is not a world of regime {}", state.size, cat.regime)));
    }
    if let Size::Finite(s) = state.size {
        if s < state.partition.block_count() as u64 {
            return Err(Error::Unrealizable(format!(
                "pattern {} needs {} elements but the world has {s}",
                state.partition,
                state.partition.block_count()
            )));
        }
    }
    Ok(())
}

/// Whether some morphism carries a world in state `(p, s)` to one in `(q, t)`.
/// Assumes both states are realizable and share a ground set.
pub(crate) fn step_exists(morphisms: Morphisms, p: &SetPartition, s: Size, q: &SetPartition, t: Size) -> bool {
    match morphisms.canonical() {
        Morphisms::Functions => {
            p.refines_unchecked(q) && (s == Size::Finite(0) || t >= Size::Finite(q.block_count().max(1) as u64))
        }
        Morphisms::Surjections => {
            // The image of the named tuple loses |P|-|Q| points, and the rest of
            // the source must still cover the rest of the target.
            p.refines_unchecked(q)
                && t >= Size::Finite(q.block_count() as u64)
                && t <= s
                && s.minus(p.block_count()) >= t.minus(q.block_count())
                && ((t == Size::Finite(0)) == (s == Size::Finite(0)))
        }
        Morphisms::Injections => p == q && t >= s,
        Morphisms::Bijections => p == q && t == s,
        Morphisms::Inclusions | Morphisms::Identities => unreachable!(),
    }
}

pub fn can_step(cat: CategoryKind, from: &AbstractState, to: &AbstractState) -> Result<bool> {
    if from.partition.m() != to.partition.m() {
        return Err(Error::Arity(format!(
            "source names {} elements, target names {}",
            from.partition.m(),
            to.partition.m()
        )));
    }
    check_state(cat, from)?;
    check_state(cat, to)?;
    Ok(step_exists(cat.morphisms, &from.partition, from.size, &to.partition, to.size))
}

/// Concrete sizes standing in for a truncated size class.
fn representatives(regime: Regime, class: SizeClass, n: u64, m: usize) -> Vec<Size> {
    match class {
        SizeClass::Exact(s) => vec![Size::Finite(s)],
        SizeClass::Tail => {
            let mut out = Vec::new();
            if regime.allows_finite() {
                out.push(Size::Finite(2 * n + m as u64 + 2));
            }
            if regime.allows_infinite() {
                out.push(Size::Omega);
            }
            out
        }
    }
}

/// Step relation between a concrete source and a truncated target: a tail
/// target is reached if some size above `n` is.
fn step_to_class(cat: CategoryKind, p: &SetPartition, s: Size, q: &SetPartition, b: SizeClass, n: u64) -> bool {
    match b {
        SizeClass::Exact(t) => step_exists(cat.morphisms, p, s, q, Size::Finite(t)),
        SizeClass::Tail => {
            let mut targets = Vec::with_capacity(3);
            if cat.regime.allows_finite() {
                targets.push(Size::Finite(n + 1));
                if let Size::Finite(sv) = s {
                    if sv > n + 1 {
                        targets.push(Size::Finite(sv));
                    }
                }
            }
            if cat.regime.allows_infinite() {
                targets.push(Size::Omega);
            }
            targets.into_iter().any(|t| step_exists(cat.morphisms, p, s, q, t))
        }
    }
}

/// Step relation lifted to truncated states.
pub(crate) fn lifted_step(cat: CategoryKind, p: &SetPartition, a: SizeClass, q: &SetPartition, b: SizeClass, n: u64) -> bool {
    representatives(cat.regime, a, n, p.m())
        .into_iter()
        .any(|s| step_to_class(cat, p, s, q, b, n))
}

/// Whether a truncated state denotes at least one world of the regime.
pub(crate) fn class_valid(regime: Regime, blocks: usize, class: SizeClass) -> bool {
    match (regime, class) {
        (Regime::InfiniteOnly, SizeClass::Exact(_)) => false,
        (_, SizeClass::Exact(s)) => s >= blocks as u64,
        (_, SizeClass::Tail) => true,
    }
}

/// All truncated states reachable in one step from `from`, in canonical
/// order (partition, then size with the tail last).
pub fn successors(cat: CategoryKind, from: &AbstractState, n: u64) -> Result<Vec<TruncatedState>> {
    let m = from.partition.m();
    if n < m as u64 {
        return Err(Error::ThresholdTooSmall { given: n, needed: m as u64 });
    }
    check_state(cat, from)?;
    let mut out = Vec::new();
    for q in partitions(m)? {
        let classes = (0..=n).map(SizeClass::Exact).chain(std::iter::once(SizeClass::Tail));
        for b in classes {
            if class_valid(cat.regime, q.block_count(), b) && step_to_class(cat, &from.partition, from.size, q, b, n) {
                out.push(TruncatedState::new(q.clone(), b));
            }
        }
    }
    Ok(out)
}

/// Distinct variable indices (free and bound) plus the largest `card = k`, plus one.
pub fn threshold(f: &EqFormula) -> u64 {
    f.all_vars().len() as u64 + f.max_card().unwrap_or(0) as u64 + 1
}
