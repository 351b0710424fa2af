//! Command-line frontend.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::engine::trace::{to_json, to_text};
use crate::engine::{build_tree, derive, DeriveOptions, LoopCheck, Mode, NodeStatus, Tree, TreeOptions};
use crate::lab::duplication::{check_duplication, check_embedding_suite, check_list_embedding, check_priority_embedding, duplication_variants, ground_goal, ground_program};
use crate::lab::templates::{check_determinism, check_lifting, check_lowering, random_lifting_trials, random_lowering_trials, TemplateInstance};
use crate::lab::loops::{check_equivalence, check_pruning_bound};
use crate::lab::lowering::{check_congruence_oracle, check_specialisation_independence, LabError};
use crate::lab::{CheckReport, Outcome};
use crate::priority::PriorityGoal;
use crate::reduction::{reduce_list_goal, reduce_priority_goal, ReductionMode};
use crate::scheduling::Rule;
use crate::syntax::{parse_goal, parse_priority_goal, parse_program, Program};
use crate::term::Var;

pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "rsld", version, about = "SLD and reduced SLD derivations with priority scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single derivation.
    Run(RunArgs),
    /// Build the derivation tree up to a depth.
    Tree(TreeArgs),
    /// Reduce a goal.
    Reduce(ReduceArgs),
    /// Run a property check.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Program file.
    #[arg(long)]
    program: PathBuf,
    /// Initial goal; priority modes accept `[p]` tags.
    #[arg(long, allow_hyphen_values = true)]
    goal: String,
    #[arg(long, default_value = "rsld")]
    mode: Mode,
    #[arg(long, default_value = "stack")]
    rule: Rule,
    /// Reduce resolvents (default in rsld and prsld).
    #[arg(long, overrides_with = "no_reduce")]
    reduce: bool,
    #[arg(long)]
    no_reduce: bool,
    #[arg(long)]
    no_advancement: bool,
    #[arg(long, default_value = "off")]
    loop_check: LoopCheck,
    /// Search for the largest reduction (goals of at most 12 atoms).
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
    trace: TraceFormat,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Write the tree in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    max_nodes: usize,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, allow_hyphen_values = true)]
    goal: String,
    /// Comma-separated protected variables.
    #[arg(long, value_delimiter = ',')]
    protect: Vec<String>,
    #[arg(long)]
    exhaustive: bool,
    /// Read the goal as a priority goal.
    #[arg(long)]
    priority: bool,
    #[arg(long)]
    no_advancement: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Property {
    SpecIndependence,
    Lowering,
    Lifting,
    Determinism,
    Duplication,
    Embedding,
    Congruence,
    Pruning,
    Equivalence,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    property: Property,
    #[arg(long, default_value = "stack")]
    rule: Rule,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, env = "RSLD_SEED", default_value_t = 0)]
    seed: u64,
    /// JSON instance instead of random trials.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Print the whole report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Tree(a) => cmd_tree(a, out),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::Check(a) => cmd_check(a, out),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
    }
}

fn read_program(path: &Path) -> Result<Program, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn read_goal(text: &str, mode: Mode) -> Result<PriorityGoal, UsageError> {
    Ok(if mode.is_list() { PriorityGoal::from_list(&parse_goal(text)?) } else { parse_priority_goal(text)? })
}

fn options(c: &Common) -> DeriveOptions {
    let mut o = DeriveOptions::new(c.mode, c.rule.clone()).loop_check(c.loop_check).reduce(!c.no_reduce).advancement(!c.no_advancement);
    if c.exhaustive {
        o.reduction_mode = ReductionMode::Exhaustive;
    }
    o
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let program = read_program(&a.common.program)?;
    let goal = read_goal(&a.common.goal, a.common.mode)?;
    program.check_atoms(goal.iter().map(|x| &x.atom))?;
    let d = derive(&program, &goal, &options(&a.common).max_steps(a.max_steps))?;
    match a.trace {
        TraceFormat::Text => write!(out, "{}", to_text(&d))?,
        TraceFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&to_json(&d))?)?,
    }
    Ok(d.status.exit_code())
}

/// 0 with a refutation, else 2 when cut by the depth or node bound, else 3
/// when a branch was pruned, else 1.
fn tree_exit_code(t: &Tree) -> i32 {
    let leaves = t.leaves();
    if t.has_refutation() {
        0
    } else if !t.is_finite() {
        2
    } else if leaves.iter().any(|n| matches!(n.status, NodeStatus::Pruned { .. })) {
        3
    } else {
        1
    }
}

fn cmd_tree(a: TreeArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let program = read_program(&a.common.program)?;
    let goal = read_goal(&a.common.goal, a.common.mode)?;
    program.check_atoms(goal.iter().map(|x| &x.atom))?;
    let mut o = TreeOptions::new(a.common.mode, a.common.rule.clone(), a.depth);
    o.loop_check = a.common.loop_check;
    o.reduce = !a.common.no_reduce;
    o.advancement = !a.common.no_advancement;
    o.max_nodes = a.max_nodes;
    let t = build_tree(&program, &goal, &o)?;
    if let Some(path) = &a.dot {
        fs::write(path, t.to_dot())?;
    }
    let leaves = t.leaves();
    let count = |f: fn(&NodeStatus) -> bool| leaves.iter().filter(|n| f(&n.status)).count();
    writeln!(out, "nodes: {}", t.nodes)?;
    writeln!(out, "depth: {}", t.max_depth())?;
    writeln!(out, "leaves: {}", leaves.len())?;
    writeln!(out, "refuted: {}", count(|s| *s == NodeStatus::Refuted))?;
    writeln!(out, "failed: {}", count(|s| *s == NodeStatus::Failed))?;
    writeln!(out, "pruned: {}", count(|s| matches!(s, NodeStatus::Pruned { .. })))?;
    writeln!(out, "truncated: {}", count(|s| matches!(s, NodeStatus::Truncated | NodeStatus::Budget)))?;
    writeln!(out, "finite: {}", t.is_finite())?;
    if t.budget_exhausted {
        writeln!(out, "node budget exhausted")?;
    }
    Ok(tree_exit_code(&t))
}

fn cmd_reduce(a: ReduceArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let mode = if a.exhaustive { ReductionMode::Exhaustive } else { ReductionMode::Greedy };
    let protect = a.protect.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).map(Var::new).collect();
    if a.priority || a.goal.contains('[') {
        let g = parse_priority_goal(&a.goal)?;
        let (n, cert) = reduce_priority_goal(&g, &protect, !a.no_advancement, mode);
        writeln!(out, "{}", if n.is_empty() { "□".to_string() } else { n.to_string() })?;
        writeln!(out, "tau: {}", cert.tau)?;
    } else {
        let g = parse_goal(&a.goal)?;
        let (n, cert) = reduce_list_goal(&g, &protect, mode);
        let shown: Vec<String> = n.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", if shown.is_empty() { "□".to_string() } else { shown.join(", ") })?;
        writeln!(out, "tau: {}", cert.tau)?;
    }
    Ok(0)
}

#[derive(Deserialize)]
struct ProgramInstance {
    program: String,
    goal: String,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    max_steps: Option<usize>,
    #[serde(default)]
    depth: Option<usize>,
}

fn template_report(name: &str, inst: &TemplateInstance, r: Result<bool, LabError>) -> Result<CheckReport, UsageError> {
    let mut report = CheckReport::new(name);
    let outcome = match r {
        Ok(true) => Outcome::Pass,
        Ok(false) => Outcome::fail(inst.to_json(), "conclusion does not hold"),
        Err(LabError::NoWitnessDerivation) => Outcome::Vacuous,
        Err(e) => return Err(UsageError(e.to_string())),
    };
    report.record(0, 0, outcome);
    Ok(report)
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let rule = &a.rule;
    let instance = a.instance.as_ref().map(fs::read_to_string).transpose()?;
    let report = match (a.property, instance) {
        (Property::SpecIndependence, _) => check_specialisation_independence(rule, a.trials, a.seed),
        (Property::Lowering, Some(text)) => {
            let inst = TemplateInstance::from_json(&text, rule.clone())?;
            template_report("lowering", &inst, check_lowering(&inst))?
        }
        (Property::Lowering, None) => random_lowering_trials(rule, a.trials, a.seed),
        (Property::Lifting, Some(text)) => {
            let inst = TemplateInstance::from_json(&text, rule.clone())?;
            template_report("lifting", &inst, check_lifting(&inst))?
        }
        (Property::Lifting, None) => random_lifting_trials(rule, a.trials, a.seed),
        (Property::Determinism, _) => check_determinism(rule, a.trials, a.seed),
        (Property::Duplication, Some(text)) => {
            let p: ProgramInstance = serde_json::from_str(&text)?;
            let program = parse_program(&p.program)?;
            let goal = parse_priority_goal(&p.goal)?;
            check_duplication(&program, rule, &goal, p.depth.unwrap_or(5), &duplication_variants(goal.len()))
        }
        (Property::Duplication, None) => {
            let program = ground_program();
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut report = CheckReport::new(&format!("duplication[{rule}]"));
            for _ in 0..a.trials.min(20) {
                let goal = ground_goal(&mut rng);
                report.absorb(check_duplication(&program, rule, &goal, 5, &duplication_variants(goal.len())));
            }
            report
        }
        (Property::Embedding, Some(text)) => {
            let p: ProgramInstance = serde_json::from_str(&text)?;
            let program = parse_program(&p.program)?;
            let mode: Mode = p.mode.as_deref().unwrap_or("rsld").parse()?;
            let goal = read_goal(&p.goal, mode)?;
            let d = derive(&program, &goal, &DeriveOptions::new(mode, rule.clone()).max_steps(p.max_steps.unwrap_or(6)))?;
            let mut report = CheckReport::new("embedding");
            let r = if mode.is_list() { check_list_embedding(&program, &d) } else { check_priority_embedding(&program, &d).map(|_| ()) };
            let outcome = match r {
                Ok(()) => Outcome::Pass,
                Err(LabError::BudgetExhausted) => Outcome::Budget,
                Err(e) => Outcome::fail(serde_json::json!({ "program": p.program, "goal": p.goal, "template": d.template() }), e.to_string()),
            };
            report.record(0, 0, outcome);
            report
        }
        (Property::Embedding, None) => check_embedding_suite(a.trials, a.seed),
        (Property::Congruence, _) => check_congruence_oracle(a.trials, a.seed, 6),
        (Property::Pruning, _) => check_pruning_bound(a.trials, a.seed),
        (Property::Equivalence, _) => check_equivalence(a.trials, a.seed),
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "{}", report.summary())?;
        for f in report.failures.iter().take(3) {
            writeln!(out, "  trial {} (seed {}): {}", f.trial, f.seed, f.reason)?;
            writeln!(out, "    {}", f.instance)?;
        }
    }
    Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(std::iter::once("rsld").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["run"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["check", "lowering", "--rule", "sideways"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn reduce_command() {
        let (code, out) = run_str(&["reduce", "--goal", "p(x), p(y), q(y)", "--protect", "x"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("p(x), p(y), q(y)") || out.contains("tau"), "{out}");
        let (_, out) = run_str(&["reduce", "--goal", "p(x), p(a)"]);
        assert_eq!(out.lines().next(), Some("p(a)"));
    }

    #[test]
    fn check_center_fails() {
        let (code, out) = run_str(&["check", "spec-independence", "--rule", "center", "--trials", "50", "--seed", "7"]);
        assert_eq!(code, EXIT_CHECK_FAILED, "{out}");
        let (code, _) = run_str(&["check", "spec-independence", "--rule", "queue", "--trials", "50"]);
        assert_eq!(code, 0);
    }
}
