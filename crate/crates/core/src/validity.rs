//! Propositional validities at a world, decided two ways: by the expected
//! theory's characteristic frames, and by searching the frame of abstract
//! states reachable from the world.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::eqcard::{lifted_step, CategoryKind, Morphisms, Regime, Size, SizeClass, TruncatedState};
use crate::error::{Error, Result};
use crate::formula::{EqFormula, PropFormula};
use crate::frames::{
    axiom, frame_valid_with, Engine, Exactness, FiniteFrame, SearchOptions, TheoryId, Verdict, Witness,
};
use crate::partition::{partitions, SetPartition};

/// Which substitution instances count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    /// Sentences only.
    Sentential,
    /// Formulas with parameters naming elements of the world.
    Formulaic,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Sentential => "sentential",
            Lang::Formulaic => "formulaic",
        })
    }
}

impl std::str::FromStr for Lang {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentential" | "sent" | "s" => Ok(Lang::Sentential),
            "formulaic" | "form" | "f" => Ok(Lang::Formulaic),
            _ => Err(Error::InvalidArgument(format!("language must be `sentential` or `formulaic`, got `{s}`"))),
        }
    }
}

/// Parameters named at an infinite world when none are requested.
pub const DEFAULT_INFINITE_NAMED: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WorldSpec {
    pub cat: CategoryKind,
    pub size: Size,
    pub lang: Lang,
    pub named: usize,
}

impl WorldSpec {
    /// A world with the default parameter count: none for sentences, every
    /// element of a finite world, [`DEFAULT_INFINITE_NAMED`] otherwise.
    pub fn new(cat: CategoryKind, size: Size, lang: Lang) -> Result<Self> {
        let named = match (lang, size) {
            (Lang::Sentential, _) => 0,
            (Lang::Formulaic, Size::Finite(s)) => s as usize,
            (Lang::Formulaic, Size::Omega) => DEFAULT_INFINITE_NAMED,
        };
        WorldSpec { cat, size, lang, named }.validated()
    }

    pub fn with_named(self, named: usize) -> Result<Self> {
        WorldSpec { named, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !self.cat.regime.admits(self.size) {
            return Err(Error::Regime(format!("size {} is not a world of regime {}", self.size, self.cat.regime)));
        }
        if self.lang == Lang::Sentential && self.named != 0 {
            return Err(Error::InvalidArgument("sentential worlds name no parameters".into()));
        }
        if let Size::Finite(s) = self.size {
            if self.named as u64 > s {
                return Err(Error::InvalidArgument(format!("cannot name {} distinct elements of a {s}-element world", self.named)));
            }
        }
        if self.named > crate::partition::MAX_GROUND {
            return Err(Error::BoundExceeded { m: self.named, max: crate::partition::MAX_GROUND });
        }
        Ok(self)
    }

    /// Parameters realize distinct elements.
    pub fn initial_pattern(&self) -> SetPartition {
        SetPartition::discrete(self.named)
    }
}

impl fmt::Display for WorldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, size {}, {}", self.cat, self.size, self.lang)?;
        if self.lang == Lang::Formulaic {
            write!(f, " (named {})", self.named)?;
        }
        Ok(())
    }
}

/// The classification cell for a world.
pub fn expected_theory(w: &WorldSpec) -> TheoryId {
    use Morphisms::*;
    let finite = w.size.is_finite();
    let n = match w.size {
        Size::Finite(s) => s as u32,
        Size::Omega => 0,
    };
    if w.cat.regime == Regime::InfiniteOnly {
        return match (w.lang, w.cat.morphisms.canonical()) {
            (Lang::Formulaic, Functions | Surjections) => TheoryId::Grz2,
            _ => TheoryId::Triv,
        };
    }
    match (w.cat.morphisms.canonical(), w.lang) {
        (Functions, _) if w.size == Size::Finite(0) => TheoryId::Lollipop,
        (Functions, Lang::Sentential) => TheoryId::S5,
        (Functions, Lang::Formulaic) if finite => TheoryId::Prepartition(n),
        (Functions, Lang::Formulaic) => TheoryId::S4_2,
        (Surjections, _) if finite && n <= 1 => TheoryId::Triv,
        (Surjections, Lang::Sentential) if finite => TheoryId::Grz3J(n),
        (Surjections, Lang::Formulaic) if finite => TheoryId::Partition(n),
        (Surjections, Lang::Sentential) => TheoryId::Grz3,
        (Surjections, Lang::Formulaic) => TheoryId::Grz2,
        (Injections, _) if finite => TheoryId::Grz3,
        (Injections, _) => TheoryId::Triv,
        _ => TheoryId::Triv,
    }
}

/// Subformula count plus named parameters plus one.
pub fn default_bound(w: &WorldSpec, f: &PropFormula) -> u64 {
    (f.size() + w.named + 1) as u64
}

/// Search settings used by the deciders; `budget` caps valuation bits.
pub fn search_options(budget: Option<usize>) -> SearchOptions {
    let d = SearchOptions::default();
    SearchOptions {
        engine: Engine::Auto,
        reduce_clusters: true,
        enum_budget: budget.map_or(d.enum_budget, |b| b.min(d.enum_budget)),
        sat_budget: budget.unwrap_or(d.sat_budget),
        ..d
    }
}

/// Validity on every characteristic frame of `t`, instantiated up to `bound`.
pub fn decide_in_theory(t: TheoryId, f: &PropFormula, bound: u64) -> Result<Verdict> {
    decide_in_theory_with(t, f, bound, &search_options(None))
}

pub fn decide_in_theory_with(t: TheoryId, f: &PropFormula, bound: u64, opts: &SearchOptions) -> Result<Verdict> {
    let needed = f.size() as u64;
    if bound < needed {
        return Err(Error::ThresholdTooSmall { given: bound, needed });
    }
    let exactness = t.exactness(bound);
    for frame in t.frames(bound, f.var_count())? {
        let v = frame_valid_with(&frame, None, f, opts)?;
        if let Some(Witness::Countermodel(c)) = v.witness {
            return Ok(Verdict::invalid(exactness, Witness::Countermodel(c)));
        }
    }
    Ok(Verdict::valid(exactness))
}

/// The frame of truncated abstract states reachable from a world.
#[derive(Clone, Debug)]
pub struct OracleFrame {
    pub world: WorldSpec,
    pub n: u64,
    pub frame: FiniteFrame,
    /// The state at each node.
    pub states: Vec<TruncatedState>,
    pub root: usize,
}

fn valid_class(regime: Regime, blocks: usize, class: SizeClass) -> bool {
    crate::eqcard::class_valid(regime, blocks, class)
}

/// Reachable truncated states with the lifted step relation; node 0 is the
/// world itself.
pub fn oracle_frame(w: &WorldSpec, n: u64) -> Result<OracleFrame> {
    if n < w.named as u64 {
        return Err(Error::ThresholdTooSmall { given: n, needed: w.named as u64 });
    }
    let cat = w.cat;
    let root_class = match w.size {
        Size::Finite(s) if s <= n => SizeClass::Exact(s),
        _ => SizeClass::Tail,
    };
    let root = TruncatedState::new(w.initial_pattern(), root_class);
    let step = |a: &TruncatedState, b: &TruncatedState| lifted_step(cat, &a.partition, a.size, &b.partition, b.size, n);

    let mut states = vec![root.clone()];
    for q in partitions(w.named)? {
        for class in (0..=n).map(SizeClass::Exact).chain([SizeClass::Tail]) {
            let s = TruncatedState::new(q.clone(), class);
            if s != root && valid_class(cat.regime, q.block_count(), class) && step(&root, &s) {
                states.push(s);
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            if i == j || step(a, b) {
                pairs.push((i, j));
            }
        }
    }
    let labels = states.iter().map(|s| s.to_string()).collect();
    let frame = FiniteFrame::new(states.len(), pairs)?
        .with_name(format!("states of ({w}) at N={n}"))
        .with_labels(labels)?;
    Ok(OracleFrame { world: *w, n, frame, states, root: 0 })
}

pub fn oracle_state_frame(w: &WorldSpec, n: u64) -> Result<FiniteFrame> {
    Ok(oracle_frame(w, n)?.frame)
}

/// Membership in the validities at `w`, searching valuations of the state
/// frame at its root. A countermodel is returned as a substitution.
pub fn oracle_decide(w: &WorldSpec, f: &PropFormula, n: u64) -> Result<Verdict> {
    oracle_decide_with(w, f, n, &search_options(None))
}

pub fn oracle_decide_with(w: &WorldSpec, f: &PropFormula, n: u64, opts: &SearchOptions) -> Result<Verdict> {
    let of = oracle_frame(w, n)?;
    let exactness = Exactness::BoundedBy(of.n);
    // Only the world's own truth matters, so skip the lex-least refinement.
    let opts = SearchOptions { lex_min: false, ..opts.clone() };
    let v = frame_valid_with(&of.frame, Some(of.root), f, &opts)?;
    Ok(match v.witness {
        None => Verdict::valid(exactness),
        Some(Witness::Countermodel(c)) => {
            let subst =
                (0..c.valuation.var_count()).map(|p| states_formula(&of.states, of.n, &c.valuation.nodes(p))).collect();
            Verdict::invalid(exactness, Witness::Substitution(subst))
        }
        Some(w) => Verdict::invalid(exactness, w),
    })
}

/// Pattern of the parameters as equalities and inequalities.
pub(crate) fn pattern_formula(p: &SetPartition) -> EqFormula {
    let m = p.m() as u32;
    EqFormula::and_all((0..m).flat_map(|i| {
        (i + 1..m).map(move |j| {
            let atom = EqFormula::atom(i, j);
            if p.same_block(i as usize, j as usize) {
                atom
            } else {
                EqFormula::not(atom)
            }
        })
    }))
}

fn size_formula(class: SizeClass, n: u64) -> EqFormula {
    match class {
        SizeClass::Exact(s) => EqFormula::card(s as u32),
        SizeClass::Tail => EqFormula::and_all((0..=n as u32).map(|k| EqFormula::not(EqFormula::card(k)))),
    }
}

/// A formula true at the listed states and false at the other given ones.
/// Only the given states are constrained, so each pattern's size clause
/// lists whichever side is shorter and is dropped when all sizes agree.
pub(crate) fn states_formula(states: &[TruncatedState], n: u64, nodes: &[usize]) -> EqFormula {
    let mut by_pattern: BTreeMap<&SetPartition, (Vec<SizeClass>, Vec<SizeClass>)> = BTreeMap::new();
    for (i, s) in states.iter().enumerate() {
        let (on, off) = by_pattern.entry(&s.partition).or_default();
        if nodes.contains(&i) { on } else { off }.push(s.size);
    }
    let any = |cs: &[SizeClass]| EqFormula::or_all(cs.iter().map(|&c| size_formula(c, n)));
    EqFormula::or_all(by_pattern.into_iter().filter(|(_, (on, _))| !on.is_empty()).map(|(p, (on, off))| {
        let sizes = if off.is_empty() {
            None
        } else if on.len() <= off.len() {
            Some(any(&on))
        } else {
            Some(EqFormula::not(any(&off)))
        };
        let pattern = (p.m() >= 2).then(|| pattern_formula(p));
        match (pattern, sizes) {
            (Some(a), Some(b)) => EqFormula::and(a, b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => EqFormula::verum(),
        }
    }))
}

/// The fixed corpus: T, 4, 5, Grz, .2, .3, J1..J4 and Triv.
pub fn standard_corpus() -> Vec<(String, PropFormula)> {
    let mut out: Vec<(String, PropFormula)> = ["T", "4", "5", "Grz", ".2", ".3"]
        .iter()
        .map(|n| (n.to_string(), axiom(n, None).unwrap()))
        .collect();
    out.extend((1..=4).map(|k| (format!("J{k}"), axiom("J", Some(k)).unwrap())));
    out.push(("Triv".to_string(), axiom("Triv", None).unwrap()));
    out
}

/// Every table cell at the given sizes, in the order categories, regimes,
/// sizes, languages.
pub fn table_cells(sizes: &[Size]) -> Vec<WorldSpec> {
    let mut out = Vec::new();
    for cat in CategoryKind::all() {
        for &size in sizes {
            for lang in [Lang::Sentential, Lang::Formulaic] {
                if let Ok(w) = WorldSpec::new(cat, size, lang) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// The world a formula is checked at: infinite formulaic worlds name one more
/// parameter than the formula has variables (at least the default).
pub fn world_for(cell: &WorldSpec, f: &PropFormula) -> WorldSpec {
    if cell.lang == Lang::Formulaic && cell.size == Size::Omega {
        let named = DEFAULT_INFINITE_NAMED.max(f.var_count() + 1);
        cell.with_named(named).unwrap_or(*cell)
    } else {
        *cell
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaResult {
    pub formula: String,
    pub named: usize,
    pub bound: u64,
    pub theory_verdict: Option<Verdict>,
    pub oracle_verdict: Option<Verdict>,
    pub agree: Option<bool>,
    pub exactness: Option<Exactness>,
    /// Why the pair was not decided, when it was not.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub category: Morphisms,
    pub regime: Regime,
    pub size: Size,
    pub lang: Lang,
    pub expected_theory: TheoryId,
    pub results: Vec<FormulaResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub cells: Vec<CellReport>,
    pub agreements: usize,
    pub disagreements: usize,
    pub skipped: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TableOptions {
    /// Added on top of [`default_bound`].
    pub extra_bound: u64,
    /// Valuation-bit budget for each search.
    pub budget: Option<usize>,
}

pub fn decide_cell(cell: &WorldSpec, name: &str, f: &PropFormula, opts: TableOptions) -> FormulaResult {
    let w = world_for(cell, f);
    let bound = default_bound(&w, f) + opts.extra_bound;
    let search = search_options(opts.budget);
    let theory = decide_in_theory_with(expected_theory(&w), f, bound, &search);
    let oracle = oracle_decide_with(&w, f, bound, &search);
    match (theory, oracle) {
        (Ok(t), Ok(o)) => FormulaResult {
            formula: name.to_string(),
            named: w.named,
            bound,
            agree: Some(t.outcome == o.outcome),
            exactness: Some(t.exactness),
            theory_verdict: Some(t),
            oracle_verdict: Some(o),
            skipped: None,
        },
        (t, o) => {
            let reason = [t.as_ref().err(), o.as_ref().err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
            FormulaResult {
                formula: name.to_string(),
                named: w.named,
                bound,
                theory_verdict: t.ok(),
                oracle_verdict: o.ok(),
                agree: None,
                exactness: None,
                skipped: Some(reason),
            }
        }
    }
}

/// Decides every (cell, formula) pair both ways. Cells run in parallel; the
/// report keeps the order of [`table_cells`].
pub fn reproduce_table(corpus: &[(String, PropFormula)], sizes: &[Size], opts: TableOptions) -> TableReport {
    let cells = table_cells(sizes);
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..corpus.len()).map(move |k| (c, k))).collect();
    let results: HashMap<(usize, usize), FormulaResult> = jobs
        .par_iter()
        .map(|&(c, k)| ((c, k), decide_cell(&cells[c], &corpus[k].0, &corpus[k].1, opts)))
        .collect();
    let mut report = TableReport { cells: Vec::new(), agreements: 0, disagreements: 0, skipped: 0 };
    for (c, w) in cells.iter().enumerate() {
        let results: Vec<FormulaResult> = (0..corpus.len()).map(|k| results[&(c, k)].clone()).collect();
        for r in &results {
            match r.agree {
                Some(true) => report.agreements += 1,
                Some(false) => report.disagreements += 1,
                None => report.skipped += 1,
            }
        }
        report.cells.push(CellReport {
            category: w.cat.morphisms,
            regime: w.cat.regime,
            size: w.size,
            lang: w.lang,
            expected_theory: expected_theory(w),
            results,
        });
    }
    report
}

impl TableReport {
    /// One row per category and regime; one column per size and language,
    /// showing the expected theory and a mark for agreement on the corpus.
    pub fn render(&self) -> String {
        let mut columns: Vec<(Size, Lang)> = Vec::new();
        let mut rows: Vec<(Morphisms, Regime)> = Vec::new();
        let mut cells: HashMap<(Morphisms, Regime, Size, Lang), &CellReport> = HashMap::new();
        for c in &self.cells {
            if !columns.contains(&(c.size, c.lang)) {
                columns.push((c.size, c.lang));
            }
            if !rows.contains(&(c.category, c.regime)) {
                rows.push((c.category, c.regime));
            }
            cells.insert((c.category, c.regime, c.size, c.lang), c);
        }
        let head: Vec<String> = columns.iter().map(|(s, l)| format!("{s}/{}", if *l == Lang::Sentential { "sent" } else { "form" })).collect();
        let mut grid = vec![std::iter::once("category/regime".to_string()).chain(head).collect::<Vec<_>>()];
        for &(m, r) in &rows {
            let mut line = vec![format!("{}/{}", m, r)];
            for &(s, l) in &columns {
                line.push(match cells.get(&(m, r, s, l)) {
                    None => "-".to_string(),
                    Some(c) => {
                        let mark = if c.results.iter().any(|x| x.agree == Some(false)) {
                            "!"
                        } else if c.results.iter().any(|x| x.agree.is_none()) {
                            "?"
                        } else {
                            ""
                        };
                        format!("{}{mark}", c.expected_theory)
                    }
                });
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len()).map(|k| grid.iter().map(|r| r[k].len()).max().unwrap()).collect();
        let mut out = String::new();
        for row in &grid {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out.push_str(&format!(
            "agreements {}, disagreements {}, skipped {} (`!` marks a disagreement, `?` a skipped pair)\n",
            self.agreements, self.disagreements, self.skipped
        ));
        out
    }
}
