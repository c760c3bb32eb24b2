//! Frame generators, the validity search, and the axiom registry against a
//! test-local Kripke evaluator that enumerates every valuation.

use modeq::frames::{frame_valid_with, Engine, SearchOptions};
use modeq::{axiom, frame_valid, mk_frame, model_check, Family, FiniteFrame, PropFormula, TheoryId};
use proptest::prelude::*;

/// Truth of `f` at every node, from a relation matrix and per-variable node masks.
fn eval(rel: &[Vec<bool>], val: &[Vec<bool>], f: &PropFormula) -> Vec<bool> {
    let n = rel.len();
    let un = |a: Vec<bool>, g: &dyn Fn(bool) -> bool| a.into_iter().map(g).collect::<Vec<_>>();
    let bin = |a: Vec<bool>, b: Vec<bool>, g: &dyn Fn(bool, bool) -> bool| a.into_iter().zip(b).map(|(x, y)| g(x, y)).collect();
    match f {
        PropFormula::Var(p) => val[*p as usize].clone(),
        PropFormula::Not(a) => un(eval(rel, val, a), &|x| !x),
        PropFormula::And(a, b) => bin(eval(rel, val, a), eval(rel, val, b), &|x, y| x && y),
        PropFormula::Or(a, b) => bin(eval(rel, val, a), eval(rel, val, b), &|x, y| x || y),
        PropFormula::Implies(a, b) => bin(eval(rel, val, a), eval(rel, val, b), &|x, y| !x || y),
        PropFormula::Iff(a, b) => bin(eval(rel, val, a), eval(rel, val, b), &|x, y| x == y),
        PropFormula::Diamond(a) => {
            let t = eval(rel, val, a);
            (0..n).map(|w| (0..n).any(|u| rel[w][u] && t[u])).collect()
        }
        PropFormula::Box(a) => {
            let t = eval(rel, val, a);
            (0..n).map(|w| (0..n).all(|u| !rel[w][u] || t[u])).collect()
        }
    }
}

fn matrix(f: &FiniteFrame) -> Vec<Vec<bool>> {
    let n = f.node_count();
    (0..n).map(|i| (0..n).map(|j| f.sees(i, j)).collect()).collect()
}

/// Valid at every node under every valuation.
fn brute_valid(f: &FiniteFrame, phi: &PropFormula) -> bool {
    let rel = matrix(f);
    let (n, v) = (f.node_count(), phi.var_count());
    (0u64..1 << (n * v)).all(|x| {
        let val: Vec<Vec<bool>> = (0..v).map(|p| (0..n).map(|i| x >> (p * n + i) & 1 == 1).collect()).collect();
        eval(&rel, &val, phi).into_iter().all(|b| b)
    })
}

fn valid(f: &FiniteFrame, name: &str, n: Option<u32>) -> bool {
    frame_valid(f, &axiom(name, n).unwrap()).unwrap().is_valid()
}

#[test]
fn generated_frames_are_preorders() {
    let families = [
        Family::Chain(5),
        Family::Cluster(4),
        Family::Lollipop(4),
        Family::PartitionLattice(4),
        Family::PrepartitionPrelattice(3, 2),
        Family::Pretree { parents: vec![None, Some(0), Some(0), Some(1)], cluster_sizes: vec![1, 2, 1, 3] },
        Family::AllPosets(4),
        Family::AllDirectedPosets(4),
    ];
    for fam in families {
        for f in mk_frame(&fam).unwrap() {
            let m = matrix(&f);
            let n = m.len();
            assert!((0..n).all(|i| m[i][i]), "{fam:?}");
            assert!((0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(m[i][j] && m[j][k]) || m[i][k]))), "{fam:?}");
            let rebuilt = FiniteFrame::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| m[i][j])).unwrap();
            assert_eq!(matrix(&rebuilt), m, "{fam:?}");
        }
    }
    assert_eq!(mk_frame(&Family::PartitionLattice(4)).unwrap()[0].node_count(), 15);
}

#[test]
fn poset_counts_match_known_sequence() {
    let counts: Vec<usize> = (1..=5).map(|n| FiniteFrame::all_posets(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 16, 63]);
}

#[test]
fn frame_characterization_spot_checks() {
    for n in 2..=4u32 {
        let c = FiniteFrame::chain(n as usize);
        assert!(valid(&c, "Grz", None) && valid(&c, ".3", None));
        assert!(valid(&c, "J", Some(n)), "chain({n}) J{n}");
        assert!(!valid(&c, "J", Some(n - 1)), "chain({n}) J{}", n - 1);
    }
    let pl = FiniteFrame::partition_lattice(3).unwrap();
    assert!(valid(&pl, "Grz", None) && valid(&pl, ".2", None) && !valid(&pl, ".3", None));
    for k in 2..=4 {
        let c = FiniteFrame::cluster(k);
        assert!(valid(&c, "5", None) && !valid(&c, "Grz", None));
    }
    for k in 1..=4 {
        let l = FiniteFrame::lollipop(k);
        assert!(valid(&l, "4", None) && valid(&l, "T", None) && !valid(&l, "5", None));
    }
}

#[test]
fn every_axiom_of_a_theory_holds_on_its_frames() {
    for t in [TheoryId::S4, TheoryId::S4_2, TheoryId::S4_3, TheoryId::S5, TheoryId::Grz, TheoryId::Grz2, TheoryId::Grz3, TheoryId::Grz3J(3), TheoryId::Triv] {
        let info = t.info();
        for a in &info.axioms {
            let f = a.formula();
            for fr in t.frames(4, f.var_count()).unwrap() {
                assert!(frame_valid(&fr, &f).unwrap().is_valid(), "{t}: {a} fails on {}", fr.name());
            }
        }
    }
}

fn prop_formula(vars: u32) -> impl Strategy<Value = PropFormula> {
    (0..vars).prop_map(PropFormula::var).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(PropFormula::not),
            inner.clone().prop_map(PropFormula::diamond),
            inner.clone().prop_map(PropFormula::boxed),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PropFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PropFormula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| PropFormula::implies(a, b)),
        ]
    })
}

/// A random preorder on up to `max` nodes, as the closure of random edges.
fn frame(max: usize) -> impl Strategy<Value = FiniteFrame> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |edges| FiniteFrame::from_closure(n, edges).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_agrees_with_brute_force(f in frame(8), phi in prop_formula(2)) {
        prop_assume!(f.node_count() * phi.var_count() <= 16);
        let expected = brute_valid(&f, &phi);
        for engine in [Engine::Backtrack, Engine::Naive, Engine::Sat] {
            let opts = SearchOptions { engine, ..SearchOptions::default() };
            let v = frame_valid_with(&f, None, &phi, &opts).unwrap();
            prop_assert_eq!(v.is_valid(), expected, "{:?}", engine);
            if let Some(c) = v.countermodel() {
                prop_assert!(!model_check(&f, &c.valuation, c.node, &phi).unwrap());
            }
        }
    }

    #[test]
    fn cluster_reduction_preserves_validity(f in frame(5), k in 1usize..4, phi in prop_formula(2)) {
        let big = f.clusterize(k + 2);
        let opts = SearchOptions { engine: Engine::Sat, reduce_clusters: true, ..SearchOptions::default() };
        let reduced = frame_valid_with(&big, Some(0), &phi, &opts).unwrap();
        let full = frame_valid_with(&big, Some(0), &phi, &SearchOptions { engine: Engine::Sat, ..SearchOptions::default() }).unwrap();
        prop_assert_eq!(reduced.is_valid(), full.is_valid());
        if let Some(c) = reduced.countermodel() {
            prop_assert!(!model_check(&big, &c.valuation, 0, &phi).unwrap());
        }
    }

    #[test]
    fn isomorphism_is_invariant_under_relabelling(f in frame(6), seed in any::<u64>()) {
        let n = f.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| f.successors(i).map(move |j| (i, j)).collect::<Vec<_>>()).map(|(i, j)| (perm[i], perm[j])).collect();
        let g = FiniteFrame::new(n, pairs).unwrap();
        prop_assert!(f.is_isomorphic(&g));
    }
}
