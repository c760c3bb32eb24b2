//! `modeq` command-line front end.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modeq::control::{at_most_ratchet, check_labeling_lemma, cross_wiring_buttons, sigma_dial, Labeling};
use modeq::eqcard::{eliminate, eliminate_at, evaluate_params, to_normal_formula};
use modeq::frames::{frame_valid_with, Family, FiniteFrame};
use modeq::validity::{
    decide_in_theory_with, default_bound, expected_theory, oracle_decide_with, reproduce_table, search_options,
    standard_corpus, world_for, Lang, TableOptions, WorldSpec,
};
use modeq::{
    axiom, check_control, mk_frame, parse_eq, parse_prop, verify_labeling, CategoryKind, ControlClaim, ControlKind,
    EqFormula, Error, Morphisms, PropFormula, Regime, SetPartition, Size, Verdict, Witness,
};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "modeq", version, about = "Modal logic of equality over categories of sets")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable output (the default).
    #[arg(long, global = true)]
    text: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct WorldArgs {
    #[arg(long, default_value = "functions")]
    cat: Morphisms,
    /// all, fin or inf.
    #[arg(long, default_value = "all")]
    regime: Regime,
    /// A natural number or `omega`.
    #[arg(long, default_value = "0")]
    size: Size,
    #[arg(long, default_value = "sentential")]
    lang: Lang,
    /// Parameters naming distinct elements of the world.
    #[arg(long)]
    named: Option<usize>,
}

impl WorldArgs {
    fn world(&self) -> Result<WorldSpec, Error> {
        let w = WorldSpec::new(CategoryKind::new(self.cat, self.regime), self.size, self.lang)?;
        match self.named {
            Some(n) => w.with_named(n),
            None => Ok(w),
        }
    }

    fn category(&self) -> CategoryKind {
        CategoryKind::new(self.cat, self.regime)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Decider {
    Both,
    Oracle,
    Theory,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and print a formula in canonical form.
    Parse {
        /// Read a propositional modal formula instead of an equality formula.
        #[arg(long)]
        prop: bool,
        formula: String,
    },
    /// Eliminate modalities and quantifiers; print the table and normal form.
    Normalize {
        #[arg(long, default_value = "functions")]
        cat: Morphisms,
        #[arg(long, default_value = "all")]
        regime: Regime,
        #[arg(long)]
        threshold: Option<u64>,
        formula: String,
    },
    /// Truth value of a formula at a world.
    Eval {
        #[command(flatten)]
        world: WorldArgs,
        /// Pattern of the parameters x0, x1, … as a partition, e.g. "{0 1}{2}".
        #[arg(long)]
        pattern: Option<SetPartition>,
        formula: String,
    },
    /// Build frames of a family, optionally checking a formula on them.
    Frame {
        /// chain N | cluster K | lollipop K | partition N | prepartition N K |
        /// pretree PARENTS SIZES | posets N | directed N
        #[arg(required = true, num_args = 1..)]
        family: Vec<String>,
        /// Propositional formula to check for validity on each frame.
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Decide membership of a propositional formula in the validities at a world.
    Validity {
        #[command(flatten)]
        world: WorldArgs,
        /// Named axiom: T, 4, 5, Grz, .2, .3, Triv, K, Dual or J.
        #[arg(long, conflicts_with = "formula")]
        axiom: Option<String>,
        /// Index for J.
        #[arg(long)]
        index: Option<u32>,
        #[arg(long)]
        threshold: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        decider: Decider,
        formula: Option<String>,
    },
    /// Reproduce the classification table on a corpus.
    Table {
        /// Comma-separated sizes; `omega` adds the infinite column.
        #[arg(long, default_value = "0,1,2,3,4,omega", value_delimiter = ',')]
        sizes: Vec<Size>,
        /// File of `name: formula` lines; defaults to the standard corpus.
        #[arg(long)]
        corpus: Option<String>,
        /// Added to each pair's default threshold.
        #[arg(long, default_value = "0")]
        extra_threshold: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Check a control statement at a world.
    Control {
        #[command(flatten)]
        world: WorldArgs,
        /// JSON claim file: {"kind", "formulas": [...], "world": {...}}.
        #[arg(long, conflicts_with_all = ["kind", "preset"])]
        claim: Option<String>,
        #[arg(long)]
        kind: Option<ControlKind>,
        /// buttons:N, dial:K or ratchet:N.
        #[arg(long, conflicts_with = "formulas")]
        preset: Option<String>,
        formulas: Vec<String>,
    },
    /// Verify a labeling of a frame against the states of a world.
    Labeling {
        #[command(flatten)]
        world: WorldArgs,
        /// lollipop:K or partition:N.
        #[arg(long)]
        preset: String,
        #[arg(long, default_value = "4")]
        threshold: u64,
        /// Also check the substitution lemma for all formulas up to this modal depth.
        #[arg(long)]
        lemma_depth: Option<usize>,
        #[arg(long, default_value = "2")]
        vars: usize,
    },
}

/// How a run ended, mapped to the process exit code.
enum Failure {
    Violation(String),
    Usage(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) => Failure::Budget(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Run = Result<(), Failure>;

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, text: impl FnOnce() -> String, value: impl FnOnce() -> serde_json::Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value()).expect("serializable"));
        } else {
            print!("{}", text());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out { json: cli.json };
    let result = match cli.command {
        Command::Parse { prop, formula } => cmd_parse(&out, prop, &formula),
        Command::Normalize { cat, regime, threshold, formula } => {
            cmd_normalize(&out, CategoryKind::new(cat, regime), threshold, &formula)
        }
        Command::Eval { world, pattern, formula } => cmd_eval(&out, &world, pattern, &formula),
        Command::Frame { family, check, budget } => cmd_frame(&out, &family, check.as_deref(), budget),
        Command::Validity { world, axiom, index, threshold, budget, decider, formula } => {
            cmd_validity(&out, &world, axiom.as_deref(), index, formula.as_deref(), threshold, budget, decider)
        }
        Command::Table { sizes, corpus, extra_threshold, budget } => {
            cmd_table(&out, &sizes, corpus.as_deref(), extra_threshold, budget)
        }
        Command::Control { world, claim, kind, preset, formulas } => {
            cmd_control(&out, &world, claim.as_deref(), kind, preset.as_deref(), &formulas)
        }
        Command::Labeling { world, preset, threshold, lemma_depth, vars } => {
            cmd_labeling(&out, &world, &preset, threshold, lemma_depth, vars)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}

fn eq(text: &str) -> Result<EqFormula, Failure> {
    parse_eq(text).map_err(|e| Failure::Usage(format!("{e}")))
}

fn prop(text: &str) -> Result<PropFormula, Failure> {
    parse_prop(text).map_err(|e| Failure::Usage(format!("{e}")))
}

fn cmd_parse(out: &Out, is_prop: bool, text: &str) -> Run {
    if is_prop {
        let f = prop(text)?;
        out.emit(
            || format!("{f}\n"),
            || json!({"kind": "prop", "formula": f, "size": f.size(), "vars": f.var_count(), "modal_depth": f.modal_depth()}),
        );
    } else {
        let f = eq(text)?;
        out.emit(
            || format!("{f}\n"),
            || {
                json!({"kind": "eq", "formula": f, "size": f.size(), "free_vars": f.free_vars(),
                       "modal_depth": f.modal_depth(), "quantifier_depth": f.quantifier_depth()})
            },
        );
    }
    Ok(())
}

fn cmd_normalize(out: &Out, cat: CategoryKind, threshold: Option<u64>, text: &str) -> Run {
    let f = eq(text)?;
    let table = match threshold {
        Some(n) => eliminate_at(&f, cat, n)?,
        None => eliminate(&f, cat)?,
    };
    let nf = to_normal_formula(&table);
    out.emit(
        || format!("normal form: {nf}\n{table}"),
        || json!({"normal_form": nf, "table": table.to_json()}),
    );
    Ok(())
}

fn cmd_eval(out: &Out, world: &WorldArgs, pattern: Option<SetPartition>, text: &str) -> Run {
    let f = eq(text)?;
    let pattern = match pattern {
        Some(p) => p,
        None => {
            let named = world.named.unwrap_or_else(|| f.free_vars().last().map_or(0, |&v| v as usize + 1));
            SetPartition::discrete(named)
        }
    };
    if let Size::Finite(s) = world.size {
        if pattern.block_count() as u64 > s {
            return Err(Failure::Usage(format!("pattern {pattern} needs more than {s} elements")));
        }
    }
    let value = evaluate_params(&f, world.category(), world.size, &pattern)?;
    out.emit(|| format!("{value}\n"), || json!({ "value": value }));
    Ok(())
}

fn numbers(args: &[String], count: usize) -> Result<Vec<usize>, Failure> {
    if args.len() != count {
        return Err(Failure::Usage(format!("family `{}` takes {count} number(s)", args.join(" "))));
    }
    args.iter().map(|a| a.parse::<usize>().map_err(|_| Failure::Usage(format!("`{a}` is not a number")))).collect()
}

fn parse_family(words: &[String]) -> Result<Family, Failure> {
    let (name, rest) = words.split_first().expect("clap requires a family");
    Ok(match name.as_str() {
        "chain" => Family::Chain(numbers(rest, 1)?[0]),
        "cluster" => Family::Cluster(numbers(rest, 1)?[0]),
        "lollipop" => Family::Lollipop(numbers(rest, 1)?[0]),
        "partition" | "partition_lattice" => Family::PartitionLattice(numbers(rest, 1)?[0]),
        "prepartition" | "prepartition_prelattice" => {
            let v = numbers(rest, 2)?;
            Family::PrepartitionPrelattice(v[0], v[1])
        }
        "posets" => Family::AllPosets(numbers(rest, 1)?[0]),
        "directed" | "directed_posets" => Family::AllDirectedPosets(numbers(rest, 1)?[0]),
        "pretree" => {
            let [parents, sizes] = rest else {
                return Err(Failure::Usage("pretree takes PARENTS (e.g. -,0,0) and SIZES (e.g. 1,2,2)".into()));
            };
            let parents = parents
                .split(',')
                .map(|p| if p == "-" { Ok(None) } else { p.parse().map(Some) })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(format!("bad parent list `{parents}`")))?;
            let cluster_sizes = sizes
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(format!("bad size list `{sizes}`")))?;
            Family::Pretree { parents, cluster_sizes }
        }
        other => return Err(Failure::Usage(format!("unknown frame family `{other}`"))),
    })
}

fn frame_text(f: &FiniteFrame) -> String {
    let mut s = format!("{} ({} nodes)\n", f.name(), f.node_count());
    for i in 0..f.node_count() {
        let succ: Vec<String> = f.successors(i).map(|j| j.to_string()).collect();
        s.push_str(&format!("  {i} [{}] -> {}\n", f.label(i), succ.join(" ")));
    }
    s
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = format!("{v}\n");
    match &v.witness {
        Some(Witness::Countermodel(c)) => {
            s.push_str(&format!("countermodel: {} under {} at node {}\n", c.frame, c.valuation, c.node));
        }
        Some(Witness::Substitution(subst)) => {
            for (p, f) in subst.iter().enumerate() {
                s.push_str(&format!("witness: p{p} := {f}\n"));
            }
        }
        None => {}
    }
    s
}

fn cmd_frame(out: &Out, words: &[String], check: Option<&str>, budget: Option<usize>) -> Run {
    let frames = mk_frame(&parse_family(words)?)?;
    let Some(check) = check else {
        out.emit(
            || frames.iter().map(frame_text).collect(),
            || json!(frames.iter().map(FiniteFrame::to_json).collect::<Vec<_>>()),
        );
        return Ok(());
    };
    let f = prop(check)?;
    let opts = search_options(budget);
    let mut results = Vec::new();
    for frame in &frames {
        results.push((frame, frame_valid_with(frame, None, &f, &opts)?));
    }
    out.emit(
        || results.iter().map(|(fr, v)| format!("{}: {}", fr.name(), verdict_text(v))).collect(),
        || json!(results.iter().map(|(fr, v)| json!({"frame": fr.name(), "verdict": v})).collect::<Vec<_>>()),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_validity(
    out: &Out,
    world: &WorldArgs,
    axiom_name: Option<&str>,
    index: Option<u32>,
    formula: Option<&str>,
    threshold: Option<u64>,
    budget: Option<usize>,
    decider: Decider,
) -> Run {
    let f = match (axiom_name, formula) {
        (Some(name), _) => axiom(name, index)?,
        (None, Some(text)) => prop(text)?,
        (None, None) => return Err(Failure::Usage("give a formula or --axiom".into())),
    };
    let mut w = world.world()?;
    if world.named.is_none() {
        w = world_for(&w, &f);
    }
    let n = threshold.unwrap_or_else(|| default_bound(&w, &f));
    let opts = search_options(budget);
    let theory = expected_theory(&w);
    let oracle = match decider {
        Decider::Theory => None,
        _ => Some(oracle_decide_with(&w, &f, n, &opts)?),
    };
    let by_theory = match decider {
        Decider::Oracle => None,
        _ => Some(decide_in_theory_with(theory, &f, n, &opts)?),
    };
    out.emit(
        || {
            let mut s = String::new();
            if let Some(v) = &oracle {
                s.push_str(&verdict_text(v));
            }
            if let Some(v) = &by_theory {
                s.push_str(&format!("expected theory {theory}: {}", verdict_text(v)));
            }
            s
        },
        || json!({"world": w, "formula": f, "threshold": n, "expected_theory": theory,
                  "oracle_verdict": oracle, "theory_verdict": by_theory}),
    );
    match (&oracle, &by_theory) {
        (Some(a), Some(b)) if a.outcome != b.outcome => {
            Err(Failure::Violation(format!("oracle says {}, {theory} says {}", a.outcome, b.outcome)))
        }
        _ => Ok(()),
    }
}

fn read_corpus(path: &str) -> Result<Vec<(String, PropFormula)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (name, body) = match line.split_once(':') {
            Some((n, b)) => (n.trim().to_string(), b.trim()),
            None => (line.to_string(), line),
        };
        let f = match axiom(body, None) {
            Ok(f) => f,
            Err(_) => prop(body)?,
        };
        out.push((name, f));
    }
    Ok(out)
}

fn cmd_table(out: &Out, sizes: &[Size], corpus: Option<&str>, extra: u64, budget: Option<usize>) -> Run {
    let corpus = match corpus {
        Some(path) => read_corpus(path)?,
        None => standard_corpus(),
    };
    let report = reproduce_table(&corpus, sizes, TableOptions { extra_bound: extra, budget });
    out.emit(|| report.render(), || json!(report));
    if report.disagreements > 0 {
        return Err(Failure::Violation(format!("{} disagreeing pairs", report.disagreements)));
    }
    if report.skipped > 0 {
        return Err(Failure::Budget(format!("{} pairs skipped", report.skipped)));
    }
    Ok(())
}

#[derive(Deserialize)]
struct ClaimFile {
    kind: String,
    formulas: Vec<EqFormula>,
    world: WorldFile,
}

#[derive(Deserialize)]
struct WorldFile {
    cat: String,
    #[serde(default = "default_regime")]
    regime: String,
    /// A number or the string "omega".
    size: serde_json::Value,
    #[serde(default = "default_lang")]
    lang: String,
    named: Option<usize>,
}

fn default_regime() -> String {
    "all".into()
}

fn default_lang() -> String {
    "sentential".into()
}

impl WorldFile {
    fn args(&self) -> Result<WorldArgs, Error> {
        Ok(WorldArgs {
            cat: self.cat.parse()?,
            regime: self.regime.parse()?,
            size: match &self.size {
                serde_json::Value::String(s) => s.parse()?,
                v => v.to_string().parse()?,
            },
            lang: self.lang.parse()?,
            named: self.named,
        })
    }
}

fn preset_claim(preset: &str) -> Result<(ControlKind, Vec<EqFormula>), Failure> {
    let (name, n) = preset.split_once(':').unwrap_or((preset, "2"));
    let n: u32 = n.parse().map_err(|_| Failure::Usage(format!("bad preset size in `{preset}`")))?;
    Ok(match name {
        "buttons" => (ControlKind::IndependentButtons, cross_wiring_buttons(n)),
        "dial" => (ControlKind::Dial, sigma_dial(n)),
        "ratchet" => (ControlKind::Ratchet, at_most_ratchet(n)),
        _ => return Err(Failure::Usage(format!("unknown preset `{name}`"))),
    })
}

fn cmd_control(
    out: &Out,
    world: &WorldArgs,
    claim: Option<&str>,
    kind: Option<ControlKind>,
    preset: Option<&str>,
    formulas: &[String],
) -> Run {
    let claim = if let Some(path) = claim {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        let file: ClaimFile = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        ControlClaim { kind: file.kind.parse()?, formulas: file.formulas, world: file.world.args()?.world()? }
    } else if let Some(preset) = preset {
        let (k, fs) = preset_claim(preset)?;
        ControlClaim { kind: kind.unwrap_or(k), formulas: fs, world: world.world()? }
    } else {
        let kind = kind.ok_or_else(|| Failure::Usage("give --kind, --preset or --claim".into()))?;
        let fs = formulas.iter().map(|t| eq(t)).collect::<Result<Vec<_>, _>>()?;
        ControlClaim { kind, formulas: fs, world: world.world()? }
    };
    let cert = check_control(&claim)?;
    out.emit(
        || {
            let mut s = format!("{} at {}: {}\n", claim.kind, claim.world, if cert.holds { "holds" } else { "fails" });
            for c in &cert.conditions {
                s.push_str(&format!("  [{}] {}: {}\n", if c.holds { "ok" } else { "no" }, c.description, c.formula));
            }
            s
        },
        || json!({"kind": claim.kind, "world": claim.world, "formulas": claim.formulas, "certificate": cert}),
    );
    if cert.holds {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} does not hold", claim.kind)))
    }
}

fn cmd_labeling(out: &Out, world: &WorldArgs, preset: &str, n: u64, depth: Option<usize>, vars: usize) -> Run {
    let (name, k) = preset.split_once(':').unwrap_or((preset, "2"));
    let k: usize = k.parse().map_err(|_| Failure::Usage(format!("bad preset size in `{preset}`")))?;
    let lab = match name {
        "lollipop" if k >= 1 => Labeling::lollipop(k),
        "partition" => Labeling::partition_lattice(k)?,
        _ => return Err(Failure::Usage(format!("unknown labeling preset `{preset}`"))),
    };
    let w = world.world()?;
    let report = verify_labeling(&lab, &w, n)?;
    let lemma = match (report.valid, depth) {
        (true, Some(d)) => Some(check_labeling_lemma(&lab, &w, n, vars, d)?),
        _ => None,
    };
    out.emit(
        || {
            let mut s = format!("{} at {w}: {}\n", lab.frame.name(), if report.valid { "valid labeling" } else { "invalid labeling" });
            for (i, l) in lab.labels.iter().enumerate() {
                s.push_str(&format!("  {i} [{}]: {l}\n", lab.frame.label(i)));
            }
            for v in &report.violations {
                s.push_str(&format!("  violation: {v}\n"));
            }
            if let Some(l) = &lemma {
                s.push_str(&format!(
                    "lemma: {} models, {} truth-set classes, {} failures\n",
                    l.models,
                    l.classes,
                    l.failures.len()
                ));
            }
            s
        },
        || json!({"frame": lab.frame.to_json(), "labels": lab.labels, "report": report, "lemma": lemma}),
    );
    if !report.valid {
        return Err(Failure::Violation("labeling violates the frame order".into()));
    }
    if lemma.is_some_and(|l| !l.failures.is_empty()) {
        return Err(Failure::Violation("substitution lemma fails".into()));
    }
    Ok(())
}
