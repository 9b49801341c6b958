//! Detection of constant subcircuits before solving.
//!
//! Every AND/OR gate reachable from the output is visited children first.
//! An AND gate is probed with `y_k := 1`, an OR gate with `y_k := 0`; if
//! degree-1 propagation alone reaches a contradiction, the opposite value
//! holds for every input assignment and is fixed permanently. NOT gates are
//! traversed but never probed; their values follow through propagation.
//! Sweeps repeat while they keep finding marks.

use std::collections::VecDeque;
use std::fmt;

use crate::circuit::{Circuit, GateKind, Var};
use crate::solve::{enqueue_degree1, probe_hypothesis, run_propagation, Session};
use crate::tables::{TableError, Tables};
use crate::trace::TraceEvent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkKind {
    /// The cone is constantly 1.
    Tautology,
    /// The cone is constantly 0.
    Contradiction,
}

impl fmt::Display for MarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkKind::Tautology => "tautology",
            MarkKind::Contradiction => "contradiction",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mark {
    pub gate: u32,
    pub bit: bool,
    pub kind: MarkKind,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mark G{} y{}={} {}",
            self.gate, self.gate, self.bit as u8, self.kind
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreprocessOutcome {
    Open,
    CircuitTautology,
    CircuitContradiction,
    /// Propagating a mark emptied a gate. Only possible when the tables were
    /// already constrained before the pass.
    Inconsistent {
        gate: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessReport {
    pub marks: Vec<Mark>,
    /// Probed gates in order of first probe; later sweeps may probe again.
    pub tested: Vec<u32>,
    pub outcome: PreprocessOutcome,
}

impl PreprocessReport {
    /// One `mark G<k> y<k>=<b> <kind>` line per mark.
    pub fn to_text(&self) -> String {
        self.marks.iter().map(|m| format!("{m}\n")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeResult {
    Consistent,
    Contradiction,
}

/// Assigns `y_k := hypothesis` and propagates to a fixpoint. The tables are
/// left modified; the caller restores its snapshot.
///
/// Propagation is seeded from the gates touched by the hypothesis, so the
/// tables are expected to be at a propagation fixpoint beforehand.
pub fn probe_gate(t: &mut Tables, k: u32, hypothesis: bool) -> ProbeResult {
    let mut queue = VecDeque::new();
    match t.assign_value(Var::Gate(k), hypothesis) {
        Ok(rep) => enqueue_degree1(t, &rep, &mut queue),
        Err(TableError::ContradictionReached { .. } | TableError::ConflictingAssignment { .. }) => {
            return ProbeResult::Contradiction
        }
    }
    let mut scratch = Vec::new();
    match run_propagation(t, &mut queue, &mut scratch) {
        Ok(()) => ProbeResult::Consistent,
        Err(_) => ProbeResult::Contradiction,
    }
}

/// Post-order over AND/OR gates in the cone of the output, looking through
/// NOT gates.
fn probe_order(c: &Circuit) -> Vec<u32> {
    let mut order = Vec::new();
    let mut visited = vec![false; c.m() + 1];
    let mut stack = vec![(c.m() as u32, false)];
    while let Some((j, expanded)) = stack.pop() {
        if expanded {
            if c.gate(j).kind != GateKind::Not {
                order.push(j);
            }
            continue;
        }
        if visited[j as usize] {
            continue;
        }
        visited[j as usize] = true;
        stack.push((j, true));
        for v in c.gate(j).inputs.iter().rev() {
            if let Var::Gate(p) = *v {
                if !visited[p as usize] {
                    stack.push((p, false));
                }
            }
        }
    }
    order
}

pub(crate) fn preprocess_session(s: &mut Session<'_>) -> PreprocessReport {
    let c = s.circuit;
    let mut marks = Vec::new();
    let mut tested = Vec::new();
    let mut outcome = PreprocessOutcome::Open;

    let order = probe_order(c);
    let mut seen = vec![false; c.m() + 1];
    // a mark can expose constants among gates probed earlier, so sweep again
    // until a sweep adds nothing
    'sweeps: loop {
        let found = marks.len();
        for &k in &order {
            let y = Var::Gate(k);
            if s.tables.value(y).is_some() {
                continue;
            }
            let hyp = probe_hypothesis(c.gate(k).kind).unwrap();
            let snap = s.tables.take_snapshot();
            let result = probe_gate(&mut s.tables, k, hyp);
            s.tables
                .restore(snap)
                .expect("snapshot taken on these tables");
            if !seen[k as usize] {
                seen[k as usize] = true;
                tested.push(k);
            }
            s.stats.probes += 1;
            if result == ProbeResult::Consistent {
                continue;
            }
            let kind = if hyp {
                MarkKind::Contradiction
            } else {
                MarkKind::Tautology
            };
            marks.push(Mark {
                gate: k,
                bit: !hyp,
                kind,
            });
            let step = s
                .assign(y, !hyp, TraceEvent::Mark { gate: k, bit: !hyp })
                .and_then(|()| s.propagate());
            if let Err(gate) = step {
                outcome = PreprocessOutcome::Inconsistent { gate };
                break 'sweeps;
            }
        }
        if marks.len() == found {
            break;
        }
    }

    if outcome == PreprocessOutcome::Open {
        outcome = match s.tables.value(c.output()) {
            Some(true) => PreprocessOutcome::CircuitTautology,
            Some(false) => PreprocessOutcome::CircuitContradiction,
            None => PreprocessOutcome::Open,
        };
    }
    PreprocessReport {
        marks,
        tested,
        outcome,
    }
}

/// Runs the pass on fresh tables for `c`. Returns the report and the tables
/// with all marks applied and propagated.
pub fn preprocess(c: &Circuit) -> (PreprocessReport, Tables) {
    let mut s = Session::new(c);
    let report = preprocess_session(&mut s);
    (report, s.tables)
}

/// Runs the pass on existing tables. Marks are only sound relative to the
/// constraints already present in `t`.
pub fn preprocess_tables(c: &Circuit, t: Tables) -> (PreprocessReport, Tables) {
    let mut s = Session::new(c);
    s.tables = t;
    let mut seed: VecDeque<u32> = s.tables.gates_with_degree(1).collect();
    let mut scratch = Vec::new();
    if let Err(gate) = run_propagation(&mut s.tables, &mut seed, &mut scratch) {
        let report = PreprocessReport {
            marks: Vec::new(),
            tested: Vec::new(),
            outcome: PreprocessOutcome::Inconsistent { gate },
        };
        return (report, s.tables);
    }
    let report = preprocess_session(&mut s);
    (report, s.tables)
}
