//! `pacp`: command-line front end for the workbench.
//!
//! Exit codes: 0 success or equivalent; 1 distinguished, deadlock-dominant
//! simulation, or a runtime failure; 2 usage, syntax or configuration error;
//! 3 a state or equation cap was exceeded; 4 the two equivalence methods
//! disagree.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Value, json};

use pacp::bisim::{Verdict, bisim_equiv};
use pacp::rewrite::{CanonTerm, eliminate_si, normalize, reduce_recursion};
use pacp::semantics::{PtsOptions, build_pts};
use pacp::simulate::{Nondet, RunOutcome, run, stats};
use pacp::syntax::config::{load_config, parse_term_file};
use pacp::syntax::{Interleaving, Term, parse_term};
use pacp::{Context, Error};

#[derive(Parser)]
#[command(name = "pacp", version, about = "Probabilistic ACP workbench")]
struct Cli {
    /// Configuration file with actions, communication, strategies and specs.
    #[arg(long, global = true, env = "PACP_CONFIG")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    output: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Bisim,
    Axioms,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Check a term file and pretty-print every entry.
    Parse { file: PathBuf },
    /// Canonical proper basic form of a closed term.
    Normalize {
        term: String,
        /// Eliminate strategic interleaving first.
        #[arg(long)]
        eliminate_si: bool,
    },
    /// Export the reachable probabilistic transition system.
    Lts {
        term: String,
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
        /// Merge interleaving states whose histories the strategy cannot tell apart.
        #[arg(long)]
        abstract_histories: bool,
    },
    /// Decide whether two terms are equivalent.
    Equiv {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = Method::Bisim)]
        method: Method,
        #[arg(long)]
        eliminate_si: bool,
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
    },
    /// Reduce a recursive specification to one over the basic theory.
    Reduce {
        spec: String,
        var: String,
        #[arg(long, default_value_t = 1000)]
        max_eq: usize,
    },
    /// Seeded random runs.
    Simulate {
        term: String,
        /// Use this strategy for every interleaving in the term.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// uniform, first or error.
        #[arg(long, default_value = "uniform")]
        nondet: String,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Core(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Contract(_) | Error::Nondeterminism(_) => 1,
        _ => 2,
    }
}

fn load(cli: &Cli) -> Res<Context> {
    match &cli.config {
        None => Ok(Context::with_builtins()),
        Some(path) => {
            let src = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            load_config(&src).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn emit(format: Format, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value()).unwrap()),
        _ => println!("{}", text()),
    }
}

fn no_dot(cli: &Cli, cmd: &str) -> Res<()> {
    if cli.output == Format::Dot {
        return Err(Failure::Usage(format!("`{cmd}` has no dot output")));
    }
    Ok(())
}

fn canon_json(c: &CanonTerm) -> Value {
    json!({
        "term": c.to_string(),
        "branches": c.branches().map(|(m, p)| json!({
            "p": p.to_string(),
            "menu": pacp::rewrite::denote_menu(m).to_string(),
        })).collect::<Vec<_>>(),
    })
}

/// Rewrites away strategic interleaving when asked; refuses it otherwise.
fn basic_form(t: &Term, ctx: &Context, eliminate: bool, max_states: usize) -> Res<Term> {
    if !eliminate {
        return Ok(t.clone());
    }
    let e = eliminate_si(t, ctx, max_states)?;
    Ok(e.term)
}

fn cmd_parse(cli: &Cli, ctx: &Context, file: &PathBuf) -> Res<u8> {
    no_dot(cli, "parse")?;
    let src = std::fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let entries = parse_term_file(&src, ctx)?;
    emit(
        cli.output,
        || {
            entries
                .iter()
                .map(|e| match &e.name {
                    Some(n) => format!("{n} = {}", e.term),
                    None => e.term.to_string(),
                })
                .collect::<Vec<_>>()
                .join("\n")
        },
        || {
            json!({ "terms": entries.iter().map(|e| json!({
                "name": e.name,
                "line": e.line,
                "term": e.term.to_string(),
            })).collect::<Vec<_>>() })
        },
    );
    Ok(0)
}

fn cmd_normalize(cli: &Cli, ctx: &Context, term: &str, eliminate: bool) -> Res<u8> {
    no_dot(cli, "normalize")?;
    let t = parse_term(term, ctx)?;
    let c = normalize(&basic_form(&t, ctx, eliminate, 10_000)?, ctx)?;
    emit(cli.output, || c.to_string(), || json!({ "input": t.to_string(), "normal_form": canon_json(&c) }));
    Ok(0)
}

fn cmd_lts(cli: &Cli, ctx: &Context, term: &str, max_states: usize, abstract_histories: bool) -> Res<u8> {
    let t = parse_term(term, ctx)?;
    let opts = PtsOptions { abstract_histories, ..PtsOptions::new(max_states) };
    let pts = build_pts(&t, ctx, &opts)?;
    match cli.output {
        Format::Dot => println!("{}", pts.to_dot()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&pts.to_json()).unwrap()),
        Format::Text => {
            for (i, s) in pts.states.iter().enumerate() {
                let kind = if pts.is_static[i] { "static" } else { "probabilistic" };
                println!("{i}: {s} [{kind}]");
                for (j, p) in &pts.dist[i] {
                    if *j != i {
                        println!("  ~{p}~> {j}");
                    }
                }
                for e in &pts.steps[i] {
                    match e.target {
                        Some(j) => println!("  -{}-> {j}", e.action),
                        None => println!("  -{}-> (terminated)", e.action),
                    }
                }
            }
        }
    }
    Ok(0)
}

fn has_recursion(t: &Term) -> bool {
    matches!(t, Term::Rec(..)) || t.children().into_iter().any(has_recursion)
}

fn cmd_equiv(cli: &Cli, ctx: &Context, left: &str, right: &str, method: Method, eliminate: bool, max_states: usize) -> Res<u8> {
    no_dot(cli, "equiv")?;
    let (t1, t2) = (parse_term(left, ctx)?, parse_term(right, ctx)?);
    let mut out = json!({ "left": t1.to_string(), "right": t2.to_string() });
    let mut notices = Vec::new();

    let mut axioms = None;
    if method != Method::Bisim {
        let (b1, b2) = (basic_form(&t1, ctx, eliminate, max_states)?, basic_form(&t2, ctx, eliminate, max_states)?);
        if has_recursion(&b1) || has_recursion(&b2) {
            notices.push("recursion present: the axiomatic method does not apply, using bisimulation".to_string());
        } else if b1.has_interleaving() || b2.has_interleaving() {
            return Err(Failure::Usage("the axiomatic method needs --eliminate-si for interleaving terms".into()));
        } else {
            let (n1, n2) = (normalize(&b1, ctx)?, normalize(&b2, ctx)?);
            axioms = Some(n1 == n2);
            out["axioms"] = json!({
                "verdict": if n1 == n2 { "equivalent" } else { "distinguished" },
                "left": canon_json(&n1),
                "right": canon_json(&n2),
            });
        }
    }
    let mut bisim = None;
    if method != Method::Axioms || axioms.is_none() {
        let rep = bisim_equiv(&t1, &t2, ctx, &PtsOptions::new(max_states))?;
        bisim = Some(rep.equivalent());
        out["bisim"] = rep.to_json(cli.output == Format::Json);
        if let Verdict::Distinguished(r) = &rep.verdict {
            notices.push(format!("bisimulation: {}", r.detail));
        }
    }
    for n in &notices {
        eprintln!("note: {n}");
    }
    out["notices"] = json!(notices);

    if let (Some(a), Some(b)) = (axioms, bisim) {
        if a != b {
            out["verdict"] = json!("disagreement");
            eprintln!("error: the axiomatic and bisimulation verdicts disagree; please report this:");
            eprintln!("{}", serde_json::to_string_pretty(&out).unwrap());
            emit(cli.output, || "disagreement".into(), || out.clone());
            return Ok(4);
        }
    }
    let equivalent = axioms.or(bisim).unwrap_or(false);
    let verdict = if equivalent { "equivalent" } else { "distinguished" };
    out["verdict"] = json!(verdict);
    emit(cli.output, || verdict.to_string(), || out);
    Ok(if equivalent { 0 } else { 1 })
}

fn cmd_reduce(cli: &Cli, ctx: &Context, spec: &str, var: &str, max_eq: usize) -> Res<u8> {
    no_dot(cli, "reduce")?;
    let e = ctx.spec(spec).ok_or_else(|| Failure::Usage(format!("unknown spec `{spec}`")))?;
    let r = reduce_recursion(e, var, max_eq, ctx)?;
    emit(
        cli.output,
        || {
            let eqs: Vec<String> = r.spec.equations.iter().map(|(x, t)| format!("  {x} = {t};")).collect();
            format!("# root {}\nspec {} {{\n{}\n}}", r.root, r.spec.name, eqs.join("\n"))
        },
        || {
            json!({
                "spec": &*r.spec.name,
                "root": &*r.root,
                "equations": r.spec.equations.iter().map(|(x, t)| json!({"var": &**x, "rhs": t.to_string()})).collect::<Vec<_>>(),
            })
        },
    );
    Ok(0)
}

/// Replaces the strategy of every interleaving in `t`.
fn retarget(t: &Term, ctx: &Context, strategy: &str) -> Res<Term> {
    let st = ctx.strategy(strategy).ok_or_else(|| Failure::Usage(format!("unknown strategy `{strategy}`")))?.clone();
    let swap = |n: &Interleaving| {
        let fresh = n.history.is_empty();
        let state = if fresh { st.strategy.initial_state() } else { n.state.clone() };
        std::sync::Arc::new(Interleaving { strategy: st.clone(), state, ..n.clone() })
    };
    Ok(t.map_bottom_up(&mut |u| match &u {
        Term::Si(n) => Term::Si(swap(n)),
        Term::Posm(i, n) => Term::Posm(*i, swap(n)),
        _ => u,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    ctx: &Context,
    term: &str,
    strategy: &Option<String>,
    seed: u64,
    runs: u64,
    steps: usize,
    nondet: &str,
) -> Res<u8> {
    no_dot(cli, "simulate")?;
    let policy: Nondet = nondet.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    if nondet == "uniform" {
        log::warn!("nondeterministic choices are resolved uniformly at random");
    }
    let mut t = parse_term(term, ctx)?;
    if let Some(s) = strategy {
        t = retarget(&t, ctx, s)?;
    }
    if runs <= 1 {
        let trace = run(&t, ctx, seed, steps, policy)?;
        match cli.output {
            Format::Json => {
                for e in &trace.events {
                    println!("{}", serde_json::to_string(e).unwrap());
                }
                println!("{}", json!({ "seed": trace.seed, "outcome": trace.outcome }));
            }
            _ => {
                let acts: Vec<&str> = trace.events.iter().map(|e| e.action.as_str()).collect();
                let outcome = serde_json::to_value(trace.outcome).unwrap();
                println!("{} [{}]", acts.join(" "), outcome.as_str().unwrap_or_default());
            }
        }
        return Ok(u8::from(trace.outcome == RunOutcome::Deadlocked));
    }
    let s = stats(&t, ctx, seed..seed + runs, steps, policy)?;
    emit(
        cli.output,
        || {
            let mut lines = vec![format!("runs: {}", s.runs)];
            for (o, k) in &s.outcomes {
                lines.push(format!("{}: {k}", serde_json::to_value(o).unwrap().as_str().unwrap_or_default()));
            }
            for (a, k) in &s.first_actions {
                lines.push(format!("first {a}: {k}"));
            }
            lines.join("\n")
        },
        || serde_json::to_value(&s).unwrap(),
    );
    let dead = s.outcomes.get(&RunOutcome::Deadlocked).copied().unwrap_or(0);
    Ok(u8::from(2 * dead as u64 > runs))
}

fn dispatch(cli: &Cli) -> Res<u8> {
    let ctx = load(cli)?;
    match &cli.command {
        Command::Parse { file } => cmd_parse(cli, &ctx, file),
        Command::Normalize { term, eliminate_si } => cmd_normalize(cli, &ctx, term, *eliminate_si),
        Command::Lts { term, max_states, abstract_histories } => cmd_lts(cli, &ctx, term, *max_states, *abstract_histories),
        Command::Equiv { left, right, method, eliminate_si, max_states } => {
            cmd_equiv(cli, &ctx, left, right, *method, *eliminate_si, *max_states)
        }
        Command::Reduce { spec, var, max_eq } => cmd_reduce(cli, &ctx, spec, var, *max_eq),
        Command::Simulate { term, strategy, seed, runs, steps, nondet } => {
            cmd_simulate(cli, &ctx, term, strategy, *seed, *runs, *steps, nondet)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
