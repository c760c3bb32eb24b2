//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use modeq::control::{at_most_ratchet, check_labeling_lemma, cross_wiring_buttons, sigma_dial, Labeling};
use modeq::validity::{
    default_bound, oracle_decide, oracle_state_frame, reproduce_table, standard_corpus, world_for, FormulaResult,
    TableOptions, TableReport,
};
use modeq::{
    axiom, check_control, independent_buttons, mk_frame, verify_labeling, CategoryKind, ControlClaim, ControlKind,
    Family, FiniteFrame, Lang, Morphisms, Outcome, Regime, Size, WorldSpec,
};
use rayon::prelude::*;

use support::concrete::Universe;
use support::elim_check::{ElimVsOracle, ErasurePair};
use support::enumerate::{ast_counts, enumerate};

const MAX_AST: usize = 7;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    ensure(took <= limit, || format!("took {took:.1?}, target {limit:?}"))
}

fn world(m: Morphisms, r: Regime, size: Size, lang: Lang) -> WorldSpec {
    WorldSpec::new(CategoryKind::new(m, r), size, lang).unwrap()
}

fn eliminator_matches_concrete_semantics() -> Check {
    let start = Instant::now();
    let u = Universe::new();
    let expected: u64 = ast_counts(MAX_AST).iter().sum();
    let results: Vec<Result<u64, String>> = CategoryKind::all()
        .par_iter()
        .map(|&cat| {
            let alg = ElimVsOracle::new(cat, &u);
            let mut covered = 0;
            for c in enumerate(&alg, MAX_AST)[1..].iter().flatten() {
                covered += c.count;
                let bad = alg.disagreements(&c.val.0, &c.val.1);
                ensure(bad.is_empty(), || format!("{cat}: {} disagrees at {:?}", c.repr, u.states[bad[0]]))?;
            }
            ensure(covered == expected, || format!("{cat}: covered {covered} of {expected} formulas"))?;
            Ok(covered)
        })
        .collect();
    let total = results.into_iter().sum::<Result<u64, String>>()?;
    within(Duration::from_secs(300), start.elapsed())?;
    Ok(format!("{total} formula/category pairs agree in {:.1?}", start.elapsed()))
}

fn sizes() -> Vec<Size> {
    (0..=4).map(Size::Finite).chain([Size::Omega]).collect()
}

fn outcome(w: &WorldSpec, name: &str, n: Option<u32>) -> Outcome {
    let f = axiom(name, n).unwrap();
    let w = world_for(w, &f);
    oracle_decide(&w, &f, default_bound(&w, &f)).unwrap().outcome
}

fn table_reproduces(report: &TableReport, took: Duration) -> Check {
    use Morphisms::*;
    ensure(report.cells.len() == 144, || format!("{} cells", report.cells.len()))?;
    ensure(report.disagreements == 0 && report.skipped == 0, || {
        format!("{} disagreements, {} skipped", report.disagreements, report.skipped)
    })?;
    let expect = |w: &WorldSpec, name: &str, n: Option<u32>, want: Outcome| {
        let got = outcome(w, name, n);
        ensure(got == want, || format!("{name}{} at {w}: {got}", n.map(|n| n.to_string()).unwrap_or_default()))
    };
    for n in 2..=4u32 {
        let w = world(Surjections, Regime::AllSets, Size::Finite(n as u64), Lang::Sentential);
        expect(&w, "J", Some(n), Outcome::InValidities)?;
        expect(&w, "J", Some(n - 1), Outcome::NotInValidities)?;
    }
    for n in 1..=4 {
        let w = world(Functions, Regime::AllSets, Size::Finite(n), Lang::Sentential);
        expect(&w, "5", None, Outcome::InValidities)?;
        expect(&w, "Grz", None, Outcome::NotInValidities)?;
    }
    expect(&world(Functions, Regime::AllSets, Size::Finite(0), Lang::Sentential), "5", None, Outcome::NotInValidities)?;
    for n in 0..=4 {
        for lang in [Lang::Sentential, Lang::Formulaic] {
            let w = world(Injections, Regime::AllSets, Size::Finite(n), lang);
            expect(&w, ".3", None, Outcome::InValidities)?;
            expect(&w, "Grz", None, Outcome::InValidities)?;
            expect(&w, "5", None, Outcome::NotInValidities)?;
        }
    }
    for m in Morphisms::ALL {
        expect(&world(m, Regime::InfiniteOnly, Size::Omega, Lang::Sentential), "Triv", None, Outcome::InValidities)?;
    }
    within(Duration::from_secs(600), took)?;
    Ok(format!("{} cells, {} agreeing pairs in {took:.1?}", report.cells.len(), report.agreements))
}

fn state_frames_match() -> Check {
    let lattice = mk_frame(&Family::PartitionLattice(3)).map_err(|e| e.to_string())?.remove(0);
    ensure(lattice.node_count() == 5, || "partition lattice of 3 should have 5 nodes".into())?;
    let surj = world(Morphisms::Surjections, Regime::AllSets, Size::Finite(3), Lang::Formulaic).with_named(3).unwrap();
    for n in 3..=6 {
        let f = oracle_state_frame(&surj, n).map_err(|e| e.to_string())?;
        ensure(f.is_isomorphic(&lattice), || format!("surjections state frame at N={n} has {} nodes", f.node_count()))?;
    }
    let fun = world(Morphisms::Functions, Regime::AllSets, Size::Finite(0), Lang::Sentential);
    for n in 1..=6 {
        let f = oracle_state_frame(&fun, n).map_err(|e| e.to_string())?;
        let k = f.node_count().saturating_sub(1);
        ensure(k >= 1 && f.is_isomorphic(&FiniteFrame::lollipop(k)), || {
            format!("functions state frame at N={n} is not a lollipop")
        })?;
    }
    Ok("partition lattice at N=3..6; lollipop at N=1..6".into())
}

fn modalities_trivialize() -> Check {
    let cats: Vec<CategoryKind> = CategoryKind::all()
        .into_iter()
        .filter(|c| {
            matches!(c.morphisms, Morphisms::Bijections | Morphisms::Identities)
                || (c.morphisms == Morphisms::Injections && c.regime == Regime::InfiniteOnly)
        })
        .collect();
    let checked = cats
        .par_iter()
        .map(|&cat| {
            let mut n = 0;
            for c in enumerate(&ErasurePair { cat }, MAX_AST)[1..].iter().flatten() {
                ensure(c.val.0 == c.val.1, || format!("{cat}: {} differs from its erasure", c.repr))?;
                n += c.count;
            }
            Ok(n)
        })
        .collect::<Vec<Result<u64, String>>>()
        .into_iter()
        .sum::<Result<u64, String>>()?;
    Ok(format!("{checked} formulas over {} categories", cats.len()))
}

fn controls_hold() -> Check {
    let surj5 = world(Morphisms::Surjections, Regime::AllSets, Size::Finite(5), Lang::Formulaic).with_named(4).unwrap();
    let cert = independent_buttons(&cross_wiring_buttons(2), &surj5).map_err(|e| e.to_string())?;
    ensure(cert.holds, || "cross-wired buttons are not independent".into())?;

    let fun2 = world(Morphisms::Functions, Regime::AllSets, Size::Finite(2), Lang::Sentential);
    let dial = ControlClaim { kind: ControlKind::Dial, formulas: sigma_dial(3), world: fun2 };
    ensure(check_control(&dial).map_err(|e| e.to_string())?.holds, || "sigma dial fails".into())?;

    let surj_omega = world(Morphisms::Surjections, Regime::AllSets, Size::Omega, Lang::Sentential);
    for n in 1..=4 {
        let r = ControlClaim { kind: ControlKind::Ratchet, formulas: at_most_ratchet(n), world: surj_omega };
        ensure(check_control(&r).map_err(|e| e.to_string())?.holds, || format!("ratchet of length {n} fails"))?;
    }
    Ok("buttons, dial, ratchets of length 1..4".into())
}

fn labeling_lemma_holds() -> Check {
    let start = Instant::now();
    let cases = [
        (Labeling::lollipop(2), world(Morphisms::Functions, Regime::AllSets, Size::Finite(0), Lang::Sentential), 4),
        (
            Labeling::partition_lattice(3).unwrap(),
            world(Morphisms::Surjections, Regime::AllSets, Size::Finite(3), Lang::Formulaic).with_named(3).unwrap(),
            3,
        ),
    ];
    let mut summary = Vec::new();
    for (lab, w, n) in cases {
        let rep = verify_labeling(&lab, &w, n).map_err(|e| e.to_string())?;
        ensure(rep.valid, || format!("{}: {:?}", lab.frame.name(), rep.violations))?;
        let lemma = check_labeling_lemma(&lab, &w, n, 2, 3).map_err(|e| e.to_string())?;
        ensure(lemma.failures.is_empty(), || format!("{}: {} failures", lab.frame.name(), lemma.failures.len()))?;
        summary.push(format!("{} ({} models, {} classes)", lab.frame.name(), lemma.models, lemma.classes));
    }
    within(Duration::from_secs(120), start.elapsed())?;
    Ok(summary.join(", "))
}

fn monotone_with_s4_floor(report: &TableReport) -> Check {
    let valid = |r: &FormulaResult| {
        let o = r.oracle_verdict.as_ref().map(|v| v.is_valid());
        let t = r.theory_verdict.as_ref().map(|v| v.is_valid());
        (o, t)
    };
    let mut pairs = 0;
    for c in report.cells.iter().filter(|c| c.lang == Lang::Formulaic) {
        let s = report
            .cells
            .iter()
            .find(|d| d.category == c.category && d.regime == c.regime && d.size == c.size && d.lang == Lang::Sentential)
            .ok_or_else(|| format!("no sentential cell for {}/{} {}", c.category, c.regime, c.size))?;
        for (f, g) in c.results.iter().zip(&s.results) {
            let (fo, ft) = valid(f);
            let (go, gt) = valid(g);
            ensure(fo != Some(true) || go == Some(true), || format!("{} oracle-valid only formulaically at {}/{} {}", f.formula, c.category, c.regime, c.size))?;
            ensure(ft != Some(true) || gt == Some(true), || format!("{} theory-valid only formulaically at {}/{} {}", f.formula, c.category, c.regime, c.size))?;
            pairs += 1;
        }
    }
    for c in &report.cells {
        for r in c.results.iter().filter(|r| r.formula == "T" || r.formula == "4") {
            ensure(valid(r) == (Some(true), Some(true)), || {
                format!("{} fails at {}/{} {} {}", r.formula, c.category, c.regime, c.size, c.lang)
            })?;
        }
    }
    Ok(format!("{pairs} formulaic/sentential pairs; T and 4 in all {} cells", report.cells.len()))
}

fn run(label: &str, check: impl FnOnce() -> Check) -> bool {
    let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match result {
        Ok(detail) => {
            println!("PASS {label}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {label}: {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let report = reproduce_table(&standard_corpus(), &sizes(), TableOptions::default());
    let table_time = start.elapsed();
    let results = [
        run("1 eliminator vs concrete semantics", eliminator_matches_concrete_semantics),
        run("2 classification table", || table_reproduces(&report, table_time)),
        run("3 state frame shapes", state_frames_match),
        run("4 trivialization", modalities_trivialize),
        run("5 control statements", controls_hold),
        run("6 labeling lemma", labeling_lemma_holds),
        run("7 monotonicity and S4 floor", || monotone_with_s4_floor(&report)),
    ];
    if results.iter().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
