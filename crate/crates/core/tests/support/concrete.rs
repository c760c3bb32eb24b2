//! Brute-force semantics over concrete worlds.
//!
//! Worlds are the sets `{0..s-1}` for `s <= MAX_FINITE` plus one countable
//! world standing for every infinite set. A state is a world together with
//! values (or nothing) for `x0` and `x1`. Modal steps come from enumerating
//! every map between the worlds and keeping those the category admits. The
//! infinite world is handled up to automorphism: assignments in it are
//! canonicalized to `0, 1`.

#![allow(dead_code)]

use std::collections::HashMap;

use modeq::{CategoryKind, EqFormula, Morphisms, Regime};

pub const MAX_FINITE: usize = 7;
const WORDS: usize = 4;

pub type Bits = [u64; WORDS];

pub fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn and(a: &Bits, b: &Bits) -> Bits {
    std::array::from_fn(|k| a[k] & b[k])
}

fn or(a: &Bits, b: &Bits) -> Bits {
    std::array::from_fn(|k| a[k] | b[k])
}

fn not(a: &Bits) -> Bits {
    std::array::from_fn(|k| !a[k])
}

fn is_zero(a: &Bits) -> bool {
    a.iter().all(|w| *w == 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum World {
    Finite(usize),
    Nat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub world: World,
    pub a: [Option<usize>; 2],
}

fn canon_nat(a: [Option<usize>; 2]) -> [Option<usize>; 2] {
    match a {
        [Some(x), Some(y)] => [Some(0), Some(usize::from(x != y))],
        [Some(_), None] => [Some(0), None],
        [None, Some(_)] => [None, Some(0)],
        [None, None] => [None, None],
    }
}

pub struct Universe {
    pub states: Vec<State>,
    index: HashMap<State, usize>,
    /// `assign[v][i]`: states obtained from state `i` by giving `x_v` each value of its world.
    assign: [Vec<Vec<usize>>; 2],
    /// One-step reachability per morphism class, over all worlds.
    reach: HashMap<Morphisms, Vec<Bits>>,
    finite_mask: Bits,
    nat_mask: Bits,
}

fn maps(s: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..t).map(move |v| {
                    let mut m2 = m.clone();
                    m2.push(v);
                    m2
                })
            })
            .collect();
    }
    out
}

impl Universe {
    pub fn new() -> Self {
        let mut states = Vec::new();
        for s in 0..=MAX_FINITE {
            let vals: Vec<Option<usize>> = std::iter::once(None).chain((0..s).map(Some)).collect();
            for &a0 in &vals {
                for &a1 in &vals {
                    states.push(State { world: World::Finite(s), a: [a0, a1] });
                }
            }
        }
        for a in [[None, None], [Some(0), None], [None, Some(0)], [Some(0), Some(0)], [Some(0), Some(1)]] {
            states.push(State { world: World::Nat, a });
        }
        assert!(states.len() <= WORDS * 64);
        let index: HashMap<State, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut finite_mask = [0; WORDS];
        let mut nat_mask = [0; WORDS];
        for (i, st) in states.iter().enumerate() {
            match st.world {
                World::Finite(_) => set(&mut finite_mask, i),
                World::Nat => set(&mut nat_mask, i),
            }
        }
        let mut u = Universe {
            states,
            index,
            assign: [Vec::new(), Vec::new()],
            reach: HashMap::new(),
            finite_mask,
            nat_mask,
        };
        assert!(u.states.iter().enumerate().all(|(i, st)| u.idx(st.world, st.a) == i));
        u.build_assign();
        u.build_reach();
        u
    }

    fn idx(&self, world: World, a: [Option<usize>; 2]) -> usize {
        match world {
            // Finite states are laid out in order of size, then x0, then x1.
            World::Finite(s) => {
                let before: usize = (0..s).map(|k| (k + 1) * (k + 1)).sum();
                let code = |v: Option<usize>| v.map_or(0, |x| x + 1);
                before + code(a[0]) * (s + 1) + code(a[1])
            }
            World::Nat => {
                let finite: usize = (0..=MAX_FINITE).map(|k| (k + 1) * (k + 1)).sum();
                finite
                    + match canon_nat(a) {
                        [None, None] => 0,
                        [Some(_), None] => 1,
                        [None, Some(_)] => 2,
                        [Some(x), Some(y)] => 3 + usize::from(x != y),
                    }
            }
        }
    }

    fn build_assign(&mut self) {
        for v in 0..2 {
            let lists = self
                .states
                .iter()
                .map(|st| {
                    let values: Vec<usize> = match st.world {
                        World::Finite(s) => (0..s).collect(),
                        World::Nat => vec![0, 1, 2],
                    };
                    values
                        .into_iter()
                        .map(|d| {
                            let mut a = st.a;
                            a[v] = Some(d);
                            self.idx(st.world, a)
                        })
                        .collect()
                })
                .collect();
            self.assign[v] = lists;
        }
    }

    fn build_reach(&mut self) {
        let n = self.states.len();
        let mut reach: HashMap<Morphisms, Vec<Bits>> =
            Morphisms::ALL.iter().map(|m| (*m, vec![[0; WORDS]; n])).collect();
        let pairs = |s: usize| -> Vec<[Option<usize>; 2]> {
            let vals: Vec<Option<usize>> = std::iter::once(None).chain((0..s).map(Some)).collect();
            vals.iter().flat_map(|&x| vals.iter().map(move |&y| [x, y])).collect()
        };
        let image = |f: &[usize], a: [Option<usize>; 2]| [a[0].map(|x| f[x]), a[1].map(|x| f[x])];

        // Finite to finite: every map, classified.
        let kinds = [
            Morphisms::Functions,
            Morphisms::Surjections,
            Morphisms::Injections,
            Morphisms::Inclusions,
            Morphisms::Bijections,
            Morphisms::Identities,
        ];
        let mut by_kind: Vec<Vec<Bits>> = kinds.iter().map(|m| std::mem::take(reach.get_mut(m).unwrap())).collect();
        for s in 0..=MAX_FINITE {
            let src_pairs = pairs(s);
            for t in 0..=MAX_FINITE {
                for f in maps(s, t) {
                    let mut hit = vec![false; t];
                    f.iter().for_each(|&y| hit[y] = true);
                    let surj = hit.iter().all(|h| *h);
                    let inj = hit.iter().filter(|h| **h).count() == s;
                    let incl = s <= t && f.iter().enumerate().all(|(i, &y)| i == y);
                    let ok = [true, surj, inj, incl, inj && surj, incl && s == t];
                    for &a in &src_pairs {
                        let from = self.idx(World::Finite(s), a);
                        let to = self.idx(World::Finite(t), image(&f, a));
                        for k in 0..kinds.len() {
                            if ok[k] {
                                set(&mut by_kind[k][from], to);
                            }
                        }
                    }
                }
            }
        }
        for (m, bits) in kinds.iter().zip(by_kind) {
            reach.insert(*m, bits);
        }

        // Finite to the countable world.
        for s in 0..=MAX_FINITE {
            let into_nat: Vec<(Vec<usize>, bool)> = maps(s, s.max(1))
                .into_iter()
                .map(|f| {
                    let mut seen = f.clone();
                    seen.sort();
                    seen.dedup();
                    let inj = seen.len() == s;
                    (f, inj)
                })
                .collect();
            for &a in &pairs(s) {
                let from = self.idx(World::Finite(s), a);
                for (f, inj) in &into_nat {
                    let to = self.idx(World::Nat, image(f, a));
                    set(&mut reach.get_mut(&Morphisms::Functions).unwrap()[from], to);
                    if *inj {
                        set(&mut reach.get_mut(&Morphisms::Injections).unwrap()[from], to);
                    }
                }
                let to = self.idx(World::Nat, a);
                set(&mut reach.get_mut(&Morphisms::Inclusions).unwrap()[from], to);
            }
        }

        // The countable world, whose assignments live in {0, 1}.
        let nat_states: Vec<[Option<usize>; 2]> =
            vec![[None, None], [Some(0), None], [None, Some(0)], [Some(0), Some(0)], [Some(0), Some(1)]];
        for &a in &nat_states {
            let from = self.idx(World::Nat, a);
            for t in 1..=MAX_FINITE {
                for g in maps(2, t) {
                    let to = self.idx(World::Finite(t), image(&g, a));
                    for m in [Morphisms::Functions, Morphisms::Surjections] {
                        set(&mut reach.get_mut(&m).unwrap()[from], to);
                    }
                }
            }
            for g in maps(2, 3) {
                let to = self.idx(World::Nat, image(&g, a));
                for m in [Morphisms::Functions, Morphisms::Surjections] {
                    set(&mut reach.get_mut(&m).unwrap()[from], to);
                }
                if g[0] != g[1] {
                    for m in [Morphisms::Injections, Morphisms::Bijections] {
                        set(&mut reach.get_mut(&m).unwrap()[from], to);
                    }
                }
            }
            for m in [Morphisms::Identities, Morphisms::Inclusions] {
                set(&mut reach.get_mut(&m).unwrap()[from], from);
            }
        }
        self.reach = reach;
    }

    /// States belonging to worlds of the regime.
    pub fn regime_mask(&self, regime: Regime) -> Bits {
        match regime {
            Regime::AllSets => or(&self.finite_mask, &self.nat_mask),
            Regime::FiniteOnly => self.finite_mask,
            Regime::InfiniteOnly => self.nat_mask,
        }
    }

    /// States where every variable in `vars` (bitmask over x0, x1) has a value.
    pub fn assigned_mask(&self, vars: u8) -> Bits {
        let mut out = [0; WORDS];
        for (i, st) in self.states.iter().enumerate() {
            if (0..2).all(|v| vars >> v & 1 == 0 || st.a[v].is_some()) {
                set(&mut out, i);
            }
        }
        out
    }

    pub fn reach(&self, cat: CategoryKind, from: usize) -> Bits {
        and(&self.reach[&cat.morphisms][from], &self.regime_mask(cat.regime))
    }

    pub fn atom(&self, i: u32, j: u32) -> Bits {
        let mut out = [0; WORDS];
        for (k, st) in self.states.iter().enumerate() {
            if let (Some(x), Some(y)) = (st.a[i as usize], st.a[j as usize]) {
                if x == y {
                    set(&mut out, k);
                }
            }
        }
        out
    }

    pub fn card(&self, k: u32) -> Bits {
        let mut out = [0; WORDS];
        for (i, st) in self.states.iter().enumerate() {
            if st.world == World::Finite(k as usize) {
                set(&mut out, i);
            }
        }
        out
    }

    pub fn negate(&self, a: &Bits) -> Bits {
        not(a)
    }

    pub fn binary(&self, a: &Bits, b: &Bits, op: fn(bool, bool) -> bool) -> Bits {
        let mut out = [0; WORDS];
        for i in 0..self.states.len() {
            if op(bit(a, i), bit(b, i)) {
                set(&mut out, i);
            }
        }
        out
    }

    pub fn exists(&self, v: u32, a: &Bits) -> Bits {
        let mut out = [0; WORDS];
        for i in 0..self.states.len() {
            if self.assign[v as usize][i].iter().any(|&j| bit(a, j)) {
                set(&mut out, i);
            }
        }
        out
    }

    pub fn forall(&self, v: u32, a: &Bits) -> Bits {
        not(&self.exists(v, &not(a)))
    }

    pub fn diamond(&self, cat: CategoryKind, a: &Bits) -> Bits {
        let mut out = [0; WORDS];
        for i in 0..self.states.len() {
            if !is_zero(&and(&self.reach(cat, i), a)) {
                set(&mut out, i);
            }
        }
        out
    }

    pub fn boxed(&self, cat: CategoryKind, a: &Bits) -> Bits {
        not(&self.diamond(cat, &not(a)))
    }

    /// Direct recursive evaluation of a formula whose variables are x0, x1.
    pub fn eval(&self, cat: CategoryKind, f: &EqFormula) -> Bits {
        match f {
            EqFormula::Atom(i, j) => self.atom(*i, *j),
            EqFormula::CardExact(k) => self.card(*k),
            EqFormula::Not(a) => not(&self.eval(cat, a)),
            EqFormula::And(a, b) => and(&self.eval(cat, a), &self.eval(cat, b)),
            EqFormula::Or(a, b) => or(&self.eval(cat, a), &self.eval(cat, b)),
            EqFormula::Implies(a, b) => or(&not(&self.eval(cat, a)), &self.eval(cat, b)),
            EqFormula::Iff(a, b) => self.binary(&self.eval(cat, a), &self.eval(cat, b), |x, y| x == y),
            EqFormula::Exists(v, a) => self.exists(*v, &self.eval(cat, a)),
            EqFormula::Forall(v, a) => self.forall(*v, &self.eval(cat, a)),
            EqFormula::Diamond(a) => self.diamond(cat, &self.eval(cat, a)),
            EqFormula::Box(a) => self.boxed(cat, &self.eval(cat, a)),
        }
    }

    pub fn mask(&self, a: &Bits, m: &Bits) -> Bits {
        and(a, m)
    }
}

impl Default for Universe {
    fn default() -> Self {
        Self::new()
    }
}
