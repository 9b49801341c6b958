//! Reverse-execution Circuit-SAT heuristic.
//!
//! A circuit is encoded as a *circuit truth table* (the stacked truth tables
//! of its gates) and a *degree table* (the surviving rows of each gate). The
//! solver fixes the output to 1 and deletes rows that disagree with each new
//! value, forcing gates left with a single row and deciding on the others.
//! An optional pre-pass finds subcircuits that are constant. Results are
//! self-checked: `Sat` is verified by evaluation, `Unsat`/`Tautology` are only
//! reported when derived without any decision.
//!
//! ```
//! use csat_core::{parse_circuit, solve, DecisionPolicy};
//!
//! let c = parse_circuit("INPUT(a)\nINPUT(b)\no = AND(a, b)\nOUTPUT(o)").unwrap();
//! let r = solve(&c, &DecisionPolicy::Deterministic, true);
//! assert_eq!(r.outcome.verdict_line(), "SAT x1=1 x2=1");
//! ```

pub mod circuit;
pub mod generate;
pub mod netlist;
pub mod oracle;
pub mod preprocess;
pub mod shrink;
pub mod solve;
pub mod tables;
pub mod trace;

pub use circuit::{
    classify_structure, Assignment, Circuit, CircuitError, EvalError, Gate, GateKind,
    StructureClass, Var,
};
pub use generate::{chain, generate, CircuitClass, GateWeights, GenConfig, GenError};
pub use netlist::{parse_circuit, serialize_circuit, ParseError};
pub use oracle::{brute_force, brute_force_cone, Classification, OracleError, OracleVerdict};
pub use preprocess::{
    preprocess, probe_gate, Mark, MarkKind, PreprocessOutcome, PreprocessReport, ProbeResult,
};
pub use shrink::shrink;
pub use solve::{
    choose_decision, extract_solution, propagate_degree1, solve, DecisionPolicy, SolveOutcome,
    SolveResult, SolveStats,
};
pub use tables::{build_tables, dump_tables, DeletionReport, Snapshot, TableError, Tables};
pub use trace::{format_trace, PolicyTag, TraceEvent};
