//! Set partitions of `{0..m-1}` ordered by refinement.
//!
//! A partition is stored as a restricted growth string: `labels[i]` is the
//! block of `i`, with blocks numbered in order of their least element. That
//! makes the representation canonical, so equality and hashing are
//! structural.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest ground set accepted by enumeration (Bell(8) = 4140).
pub const MAX_GROUND: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    labels: Vec<u8>,
    count: u8,
}

impl SetPartition {
    /// The unique partition of the empty set.
    pub fn empty() -> Self {
        SetPartition { labels: Vec::new(), count: 0 }
    }

    /// Every element in its own block.
    pub fn discrete(m: usize) -> Self {
        SetPartition { labels: (0..m as u8).collect(), count: m as u8 }
    }

    /// A single block (or the empty partition when `m = 0`).
    pub fn indiscrete(m: usize) -> Self {
        SetPartition { labels: vec![0; m], count: u8::from(m > 0) }
    }

    /// Builds a partition from explicit blocks, validating cover and disjointness.
    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if m > u8::MAX as usize {
            return Err(Error::BoundExceeded { m, max: u8::MAX as usize });
        }
        let mut owner = vec![usize::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= m {
                    return Err(Error::InvalidPartition(format!("element {i} outside 0..{m}")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("element {i} appears twice")));
                }
                owner[i] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("element {i} is not covered")));
        }
        Ok(kernel_partition(&owner))
    }

    /// Canonicalizes an arbitrary block labelling.
    fn from_raw_labels<T: Eq>(values: &[T]) -> Self {
        let mut reps: Vec<&T> = Vec::new();
        let mut labels = Vec::with_capacity(values.len());
        for v in values {
            let b = match reps.iter().position(|r| *r == v) {
                Some(b) => b,
                None => {
                    reps.push(v);
                    reps.len() - 1
                }
            };
            labels.push(b as u8);
        }
        SetPartition { labels, count: reps.len() as u8 }
    }

    /// Size of the ground set.
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks, written |P|.
    pub fn block_count(&self) -> usize {
        self.count as usize
    }

    /// Block index of element `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().map(|&l| l as usize)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.m()
    }

    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        if self.m() != other.m() {
            return Err(Error::MismatchedGround { left: self.m(), right: other.m() });
        }
        Ok(self.refines_unchecked(other))
    }

    /// Refinement test for partitions already known to share a ground set.
    pub(crate) fn refines_unchecked(&self, other: &SetPartition) -> bool {
        // P <= Q iff each block of P maps into a single block of Q.
        let mut image = [u8::MAX; 256];
        for (a, b) in self.labels.iter().zip(&other.labels) {
            let slot = &mut image[*a as usize];
            if *slot == u8::MAX {
                *slot = *b;
            } else if *slot != *b {
                return false;
            }
        }
        true
    }

    /// The pattern induced on the sub-tuple `positions` (in the given order).
    pub fn restrict(&self, positions: &[usize]) -> SetPartition {
        let picked: Vec<u8> = positions.iter().map(|&p| self.labels[p]).collect();
        SetPartition::from_raw_labels(&picked)
    }

    /// Inserts a new element at `pos`, either into existing block `block`
    /// (numbered as in `self`) or into a fresh singleton block.
    pub fn insert(&self, pos: usize, block: Option<usize>) -> SetPartition {
        let mut raw: Vec<usize> = self.labels().collect();
        raw.insert(pos, block.unwrap_or(self.block_count()));
        SetPartition::from_raw_labels(&raw)
    }

    /// Removes element `pos`, renumbering the rest.
    pub fn remove(&self, pos: usize) -> SetPartition {
        let mut raw: Vec<u8> = self.labels.clone();
        raw.remove(pos);
        SetPartition::from_raw_labels(&raw)
    }

    /// Relabels elements: element `i` of the result is element `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> SetPartition {
        self.restrict(perm)
    }

    /// Index of this partition in `enumerate_partitions(self.m())`.
    pub fn rank(&self) -> usize {
        RANKS[self.m()][self]
    }
}

impl Ord for SetPartition {
    /// Ground-set size, then finest first, then lexicographic on block labels.
    fn cmp(&self, other: &Self) -> Ordering {
        self.m()
            .cmp(&other.m())
            .then_with(|| other.count.cmp(&self.count))
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

impl PartialOrd for SetPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m() == 0 {
            return f.write_str("{}");
        }
        for block in self.blocks() {
            f.write_str("{")?;
            for (k, i) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{i}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Accepts "{0 1}{2}", tolerating commas and whitespace; "{}" is the empty partition.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPartition(format!("{msg} in `{s}`"));
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut current: Option<Vec<usize>> = None;
        let mut number = String::new();
        let flush = |number: &mut String, current: &mut Option<Vec<usize>>| -> Result<()> {
            if !number.is_empty() {
                let v = number.parse::<usize>().map_err(|_| bad("bad element"))?;
                current.as_mut().ok_or_else(|| bad("element outside braces"))?.push(v);
                number.clear();
            }
            Ok(())
        };
        for c in s.chars() {
            match c {
                '{' => {
                    if current.is_some() {
                        return Err(bad("nested brace"));
                    }
                    current = Some(Vec::new());
                }
                '}' => {
                    flush(&mut number, &mut current)?;
                    let block = current.take().ok_or_else(|| bad("unmatched brace"))?;
                    blocks.push(block);
                }
                c if c.is_ascii_digit() => number.push(c),
                c if c.is_whitespace() || c == ',' => flush(&mut number, &mut current)?,
                _ => return Err(bad("unexpected character")),
            }
        }
        if current.is_some() {
            return Err(bad("unclosed brace"));
        }
        if blocks.len() == 1 && blocks[0].is_empty() {
            return Ok(SetPartition::empty());
        }
        let m = blocks.iter().map(Vec::len).sum();
        SetPartition::from_blocks(m, &blocks)
    }
}

impl Serialize for SetPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SetPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn generate(m: usize) -> Vec<SetPartition> {
    fn rec(labels: &mut Vec<u8>, max: u8, m: usize, out: &mut Vec<SetPartition>) {
        if labels.len() == m {
            let count = if m == 0 { 0 } else { max + 1 };
            out.push(SetPartition { labels: labels.clone(), count });
            return;
        }
        let limit = if labels.is_empty() { 0 } else { max + 1 };
        for l in 0..=limit {
            labels.push(l);
            rec(labels, max.max(l), m, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), 0, m, &mut out);
    out.sort();
    out
}

static ALL: LazyLock<Vec<Vec<SetPartition>>> =
    LazyLock::new(|| (0..=MAX_GROUND).map(generate).collect());

static RANKS: LazyLock<Vec<HashMap<SetPartition, usize>>> = LazyLock::new(|| {
    ALL.iter()
        .map(|ps| ps.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect())
        .collect()
});

/// All partitions of `{0..m-1}` in canonical order, borrowed from a shared cache.
pub fn partitions(m: usize) -> Result<&'static [SetPartition]> {
    if m > MAX_GROUND {
        return Err(Error::BoundExceeded { m, max: MAX_GROUND });
    }
    Ok(&ALL[m])
}

pub fn enumerate_partitions(m: usize) -> Result<Vec<SetPartition>> {
    partitions(m).map(<[SetPartition]>::to_vec)
}

pub fn refines(p: &SetPartition, q: &SetPartition) -> Result<bool> {
    p.refines(q)
}

/// All coarsenings of `p` (including `p`), in canonical order.
pub fn coarsenings(p: &SetPartition) -> Result<Vec<SetPartition>> {
    Ok(partitions(p.m())?.iter().filter(|q| p.refines_unchecked(q)).cloned().collect())
}

/// The partition identifying positions that carry equal values.
pub fn kernel_partition<T: Eq>(values: &[T]) -> SetPartition {
    SetPartition::from_raw_labels(values)
}
