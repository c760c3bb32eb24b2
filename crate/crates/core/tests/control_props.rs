//! Control statements and labelings against independent evaluations.

use modeq::control::{
    at_most_ratchet, check_labeling_lemma, cross_wiring_buttons, lemma_instance_agrees, sigma_dial, Labeling,
};
use modeq::validity::{default_bound, oracle_decide, Lang, WorldSpec};
use modeq::{
    axiom, check_control, independent_buttons, labeling_substitution, verify_labeling, CategoryKind, ControlClaim,
    ControlKind, EqFormula, Morphisms, PropFormula, Regime, Size, Valuation,
};
use proptest::prelude::*;

fn world(m: Morphisms, size: Size, lang: Lang, named: usize) -> WorldSpec {
    WorldSpec::new(CategoryKind::new(m, Regime::AllSets), size, lang).unwrap().with_named(named).unwrap()
}

fn lollipop_world() -> WorldSpec {
    world(Morphisms::Functions, Size::Finite(0), Lang::Sentential, 0)
}

fn lattice_world() -> WorldSpec {
    world(Morphisms::Surjections, Size::Finite(3), Lang::Formulaic, 3)
}

fn holds(kind: ControlKind, f: &EqFormula, w: &WorldSpec) -> bool {
    check_control(&ControlClaim { kind, formulas: vec![f.clone()], world: *w }).unwrap().holds
}

fn two_param_worlds() -> Vec<WorldSpec> {
    vec![
        world(Morphisms::Functions, Size::Finite(3), Lang::Formulaic, 2),
        world(Morphisms::Surjections, Size::Finite(4), Lang::Formulaic, 2),
        world(Morphisms::Injections, Size::Finite(2), Lang::Formulaic, 2),
        world(Morphisms::Functions, Size::Omega, Lang::Formulaic, 2),
        world(Morphisms::Surjections, Size::Omega, Lang::Formulaic, 2),
        world(Morphisms::Bijections, Size::Finite(3), Lang::Formulaic, 2),
    ]
}

fn eq_formula() -> impl Strategy<Value = EqFormula> {
    let leaf = prop_oneof![
        (0u32..2, 0u32..2).prop_map(|(i, j)| EqFormula::atom(i, j)),
        (0u32..5).prop_map(EqFormula::card),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(EqFormula::not),
            inner.clone().prop_map(EqFormula::diamond),
            inner.clone().prop_map(EqFormula::boxed),
            (2u32..4, inner.clone()).prop_map(|(v, f)| EqFormula::exists(v, f)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EqFormula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| EqFormula::or(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn button_hierarchy(f in eq_formula()) {
        for w in two_param_worlds() {
            let pure = holds(ControlKind::PureButton, &f, &w);
            let button = holds(ControlKind::Button, &f, &w);
            let weak = holds(ControlKind::WeakButton, &f, &w);
            prop_assert!(!pure || button, "pure but not button at {}", w);
            prop_assert!(!button || weak, "button but not weak at {}", w);
        }
    }

    #[test]
    fn weak_buttons_are_buttons_where_dot2_is_valid(f in eq_formula()) {
        let dot2 = axiom(".2", None).unwrap();
        for w in two_param_worlds() {
            if oracle_decide(&w, &dot2, default_bound(&w, &dot2)).unwrap().is_valid() && holds(ControlKind::WeakButton, &f, &w) {
                prop_assert!(holds(ControlKind::Button, &f, &w), "weak button that is not a button at {}", w);
            }
        }
    }
}

#[test]
fn every_test_world_validates_dot2() {
    // So the previous property is exercised at each of them.
    let dot2 = axiom(".2", None).unwrap();
    for w in two_param_worlds() {
        assert!(oracle_decide(&w, &dot2, default_bound(&w, &dot2)).unwrap().is_valid(), "{w}");
    }
}

#[test]
fn documented_control_claims() {
    let surj5 = world(Morphisms::Surjections, Size::Finite(5), Lang::Formulaic, 4);
    assert!(independent_buttons(&cross_wiring_buttons(2), &surj5).unwrap().holds);

    let fun2 = world(Morphisms::Functions, Size::Finite(2), Lang::Sentential, 0);
    let dial = ControlClaim { kind: ControlKind::Dial, formulas: sigma_dial(3), world: fun2 };
    assert!(check_control(&dial).unwrap().holds);

    let surj_omega = world(Morphisms::Surjections, Size::Omega, Lang::Sentential, 0);
    for n in 1..=4 {
        let r = ControlClaim { kind: ControlKind::Ratchet, formulas: at_most_ratchet(n), world: surj_omega };
        assert!(check_control(&r).unwrap().holds, "ratchet of length {n}");
    }

    // At an S5 world weak buttons are already pushed, so none are independent.
    let fun3 = world(Morphisms::Functions, Size::Finite(3), Lang::Sentential, 0);
    let b = vec![EqFormula::card(1), EqFormula::card(2)];
    assert!(!independent_buttons(&b, &fun3).unwrap().holds);
}

#[test]
fn ratchet_fails_where_sizes_cannot_shrink() {
    let inj = world(Morphisms::Injections, Size::Finite(4), Lang::Sentential, 0);
    let r = ControlClaim { kind: ControlKind::Ratchet, formulas: at_most_ratchet(3), world: inj };
    assert!(!check_control(&r).unwrap().holds);
}

#[test]
fn switches_and_penultimate_assertions() {
    let fun2 = world(Morphisms::Functions, Size::Finite(2), Lang::Sentential, 0);
    let even_small = EqFormula::or(EqFormula::card(2), EqFormula::card(4));
    assert!(holds(ControlKind::Switch, &even_small, &fun2));
    let surj3 = world(Morphisms::Surjections, Size::Finite(3), Lang::Sentential, 0);
    assert!(!holds(ControlKind::Switch, &even_small, &surj3));
    // "more than one element" is true at 3, can fail, and never comes back.
    let many = EqFormula::not(EqFormula::or(EqFormula::card(0), EqFormula::card(1)));
    assert!(holds(ControlKind::Penultimate, &many, &surj3));
    assert!(!holds(ControlKind::Penultimate, &many, &fun2));
}

#[test]
fn preset_labelings_verify() {
    for k in 1..=3 {
        let rep = verify_labeling(&Labeling::lollipop(k), &lollipop_world(), 4).unwrap();
        assert!(rep.valid, "lollipop({k}): {:?}", rep.violations);
    }
    let rep = verify_labeling(&Labeling::partition_lattice(3).unwrap(), &lattice_world(), 3).unwrap();
    assert!(rep.valid, "{:?}", rep.violations);
    // Injections never merge parameters, so coarser labels are unreachable.
    let inj3 = world(Morphisms::Injections, Size::Finite(3), Lang::Formulaic, 3);
    assert!(!verify_labeling(&Labeling::partition_lattice(3).unwrap(), &inj3, 3).unwrap().valid);
}

#[test]
fn labeling_lemma_over_all_depth_three_formulas() {
    let rep = check_labeling_lemma(&Labeling::lollipop(2), &lollipop_world(), 4, 2, 3).unwrap();
    assert!(rep.failures.is_empty(), "{:?}", &rep.failures[..rep.failures.len().min(5)]);
    assert_eq!(rep.models, 64);
    let rep = check_labeling_lemma(&Labeling::partition_lattice(3).unwrap(), &lattice_world(), 3, 2, 3).unwrap();
    assert!(rep.failures.is_empty(), "{:?}", &rep.failures[..rep.failures.len().min(5)]);
    assert_eq!(rep.models, 1024);
}

/// Every formula over p0, p1 with at most `size` nodes.
fn prop_formulas(size: usize) -> Vec<Vec<PropFormula>> {
    let mut by_size: Vec<Vec<PropFormula>> = vec![Vec::new(), vec![PropFormula::var(0), PropFormula::var(1)]];
    for s in 2..=size {
        let mut out = Vec::new();
        for a in &by_size[s - 1] {
            out.push(PropFormula::not(a.clone()));
            out.push(PropFormula::diamond(a.clone()));
            out.push(PropFormula::boxed(a.clone()));
        }
        for l in 1..s - 1 {
            for a in &by_size[l] {
                for b in &by_size[s - 1 - l] {
                    out.push(PropFormula::and(a.clone(), b.clone()));
                    out.push(PropFormula::implies(a.clone(), b.clone()));
                }
            }
        }
        by_size.push(out);
    }
    by_size
}

#[test]
fn labeling_lemma_on_literal_instances() {
    let formulas: Vec<PropFormula> = prop_formulas(4).into_iter().flatten().filter(|f| f.modal_depth() <= 3).collect();
    let cases = [(Labeling::lollipop(2), lollipop_world()), (Labeling::partition_lattice(3).unwrap(), lattice_world())];
    for (lab, w) in cases {
        let n = lab.frame.node_count();
        // Every valuation of p0 alone, paired with a few of p1.
        for code in 0u64..1 << n {
            let mut model = Valuation::empty(2, n);
            for i in 0..n {
                model.set(0, i, code >> i & 1 == 1);
                model.set(1, i, (code.rotate_left(1) ^ 0b101) >> i & 1 == 1);
            }
            for f in &formulas {
                assert!(lemma_instance_agrees(&lab, &w, &model, f).unwrap(), "{f} under {model} at {w}");
            }
        }
    }
}

#[test]
fn substitution_covers_every_state_when_p_is_everywhere() {
    let lab = Labeling::partition_lattice(3).unwrap();
    let w = lattice_world();
    let mut model = Valuation::empty(1, 5);
    (0..5).for_each(|i| model.set(0, i, true));
    let psi = labeling_substitution(&lab, &model).unwrap();
    let boxed = EqFormula::boxed(psi[0].clone());
    assert!(modeq::eqcard::evaluate_params(&boxed, w.cat, w.size, &w.initial_pattern()).unwrap());
}
