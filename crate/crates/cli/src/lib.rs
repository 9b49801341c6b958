//! Command-line front end: argument types, command runners and the fuzz and
//! bench harnesses.

pub mod bench;
pub mod fuzz;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use csat_core::{
    brute_force, brute_force_cone, dump_tables, format_trace, parse_circuit, solve, Circuit,
    CircuitClass, DecisionPolicy, SolveOutcome, Tables, Var,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;
pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_TAUT: i32 = 30;
pub const EXIT_FAIL: i32 = 40;

#[derive(Debug, Parser)]
#[command(
    name = "csat",
    version,
    about = "Circuit satisfiability by reverse propagation over truth tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a netlist and print the verdict.
    Solve(SolveArgs),
    /// Report the structural classes of a netlist.
    Classify { path: PathBuf },
    /// Print the initial truth and degree tables.
    Dump { path: PathBuf },
    /// Count satisfying inputs by enumeration.
    Oracle {
        path: PathBuf,
        /// Restrict to the cone of this gate (`y4`, `4` or its name).
        #[arg(long)]
        cone: Option<String>,
    },
    /// Compare the solver against the oracle on random circuits.
    Fuzz(FuzzArgs),
    /// Time the solver on chain circuits of growing size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// Print the event trace after the verdict.
    #[arg(long)]
    pub trace: bool,
    /// Scripted decisions, e.g. `x1=1,x2=0`.
    #[arg(long, conflicts_with = "seed")]
    pub decisions: Option<String>,
    /// Use seeded random decisions.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_preprocess: bool,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// `general`, `monotone`, `tree`, `not_on_unbranched` or `all`.
    #[arg(long, default_value = "all")]
    pub class: String,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 24)]
    pub m: usize,
    /// Generated circuits per class.
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, env = "CSAT_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "counterexamples")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub max_counterexamples: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, env = "CSAT_SEED", default_value_t = 0xC5A7)]
    pub seed: u64,
}

fn load(path: &PathBuf) -> Result<Circuit, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_circuit(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Resolves `x3`, `y4`, a bare gate number or a declared name.
pub fn resolve_var(c: &Circuit, s: &str) -> Option<Var> {
    let in_range = |v: Var| match v {
        Var::Input(i) => (i as usize) <= c.n(),
        Var::Gate(j) => (j as usize) <= c.m(),
    };
    if let Ok(v) = s.parse::<Var>() {
        return in_range(v).then_some(v);
    }
    if let Some(i) = c.input_names().iter().position(|x| x == s) {
        return Some(Var::Input(i as u32 + 1));
    }
    c.gate_names()
        .iter()
        .position(|x| x == s)
        .map(|j| Var::Gate(j as u32 + 1))
}

/// Parses `x1=1,x2=0` against the circuit's variables.
pub fn parse_decisions(c: &Circuit, s: &str) -> Result<Vec<(Var, bool)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (name, bit) = pair
                .split_once('=')
                .ok_or_else(|| format!("decision `{pair}` is not of the form var=bit"))?;
            let v = resolve_var(c, name.trim())
                .ok_or_else(|| format!("unknown variable `{}`", name.trim()))?;
            let b = match bit.trim() {
                "0" => false,
                "1" => true,
                other => return Err(format!("bit `{other}` must be 0 or 1")),
            };
            Ok((v, b))
        })
        .collect()
}

pub fn outcome_exit_code(o: &SolveOutcome) -> i32 {
    match o {
        SolveOutcome::Sat(_) => EXIT_SAT,
        SolveOutcome::Unsat => EXIT_UNSAT,
        SolveOutcome::Tautology => EXIT_TAUT,
        SolveOutcome::FailureDetected { .. } => EXIT_FAIL,
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let c = load(&a.path)?;
    for j in c.unreachable_gates() {
        let _ = writeln!(
            err,
            "warning: gate {} (G{j}) does not reach the output",
            c.name_of(Var::Gate(j))
        );
    }
    let policy = match (&a.decisions, a.seed) {
        (Some(d), _) => DecisionPolicy::Scripted(parse_decisions(&c, d)?),
        (None, Some(s)) => DecisionPolicy::SeededRandom(s),
        (None, None) => DecisionPolicy::Deterministic,
    };
    let r = solve(&c, &policy, !a.no_preprocess);
    let mut text = r.outcome.verdict_line();
    text.push('\n');
    if a.trace {
        text.push_str(&format_trace(&r.trace));
    }
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(outcome_exit_code(&r.outcome))
}

fn cmd_oracle(path: &PathBuf, cone: Option<&str>, out: &mut dyn Write) -> Result<i32, String> {
    let c = load(path)?;
    let (v, labels): (_, Vec<String>) = match cone {
        None => (
            brute_force(&c).map_err(|e| e.to_string())?,
            (1..=c.n()).map(|i| format!("x{i}")).collect(),
        ),
        Some(g) => {
            let k = match resolve_var(&c, g).or_else(|| g.parse().ok().map(Var::Gate)) {
                Some(Var::Gate(k)) if (k as usize) <= c.m() => k,
                _ => return Err(format!("`{g}` is not a gate")),
            };
            (
                brute_force_cone(&c, k).map_err(|e| e.to_string())?,
                c.cone_inputs(k).iter().map(|i| format!("x{i}")).collect(),
            )
        }
    };
    let mut line = format!(
        "sat_count={} total={} classification={}",
        v.sat_count,
        v.total(),
        v.classification
    );
    if let Some(w) = &v.witness {
        line.push_str(" witness");
        for (l, b) in labels.iter().zip(w) {
            line.push_str(&format!(" {l}={}", *b as u8));
        }
    }
    writeln!(out, "{line}").map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

fn cmd_fuzz(a: &FuzzArgs, out: &mut dyn Write) -> Result<i32, String> {
    let classes: Vec<CircuitClass> = if a.class == "all" {
        CircuitClass::ALL.to_vec()
    } else {
        vec![a.class.parse().map_err(|e: String| e)?]
    };
    if a.n > csat_core::oracle::MAX_ORACLE_INPUTS {
        return Err(format!("--n {} exceeds the oracle limit", a.n));
    }
    let mut sound = true;
    for class in classes {
        let mut cfg = fuzz::FuzzConfig::new(class, a.n, a.m, a.runs, a.seed);
        cfg.out_dir = Some(a.out.clone());
        cfg.max_counterexamples = a.max_counterexamples;
        let report = fuzz::run_fuzz(&cfg).map_err(|e| e.to_string())?;
        sound &= report.is_sound();
        out.write_all(report.to_text().as_bytes())
            .map_err(|e| e.to_string())?;
    }
    Ok(if sound { EXIT_OK } else { EXIT_DISAGREEMENT })
}

/// Runs a parsed command line, writing to the given streams; returns the
/// process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Classify { path } => load(path).and_then(|c| {
            writeln!(out, "{}", c.classify())
                .map(|_| EXIT_OK)
                .map_err(|e| e.to_string())
        }),
        Command::Dump { path } => load(path).and_then(|c| {
            out.write_all(dump_tables(&Tables::new(&c)).as_bytes())
                .map(|_| EXIT_OK)
                .map_err(|e| e.to_string())
        }),
        Command::Oracle { path, cone } => cmd_oracle(path, cone.as_deref(), out),
        Command::Fuzz(a) => cmd_fuzz(a, out),
        Command::Bench(a) => {
            let report = bench::run_bench(&a.sizes, a.reps, a.seed);
            out.write_all(report.to_csv().as_bytes())
                .map(|_| EXIT_OK)
                .map_err(|e| e.to_string())
        }
    };
    result.unwrap_or_else(|msg| {
        let _ = writeln!(err, "error: {msg}");
        EXIT_ERROR
    })
}
