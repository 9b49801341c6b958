//! Reverse execution: fix the output to 1, then walk back towards the inputs
//! by forcing degree-1 gates and deciding on degree 2-4 gates.
//!
//! There is no backtracking. A contradiction reached without any decision is
//! a proof of unsatisfiability; one reached after a decision only means the
//! heuristic got stuck, and is reported as [`SolveOutcome::FailureDetected`].
//! A `Sat` answer is always re-checked by forward evaluation.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Assignment, Circuit, GateKind, Var};
use crate::preprocess::{preprocess_session, PreprocessOutcome, PreprocessReport};
use crate::tables::{DeletionReport, TableError, Tables};
use crate::trace::{PolicyTag, TraceEvent};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum DecisionPolicy {
    #[default]
    Deterministic,
    SeededRandom(u64),
    Scripted(Vec<(Var, bool)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Input values `x1..xn`, verified to drive the output to 1.
    Sat(Assignment),
    Unsat,
    Tautology,
    FailureDetected {
        reason: String,
        trail: Vec<TraceEvent>,
    },
}

impl SolveOutcome {
    /// `SAT x1=1 x2=0`, `UNSAT`, `TAUT` or `FAIL <reason>`.
    pub fn verdict_line(&self) -> String {
        match self {
            SolveOutcome::Sat(a) => {
                let mut s = String::from("SAT");
                for (v, b) in a.iter() {
                    s.push_str(&format!(" {v}={}", b as u8));
                }
                s
            }
            SolveOutcome::Unsat => "UNSAT".into(),
            SolveOutcome::Tautology => "TAUT".into(),
            SolveOutcome::FailureDetected { reason, .. } => format!("FAIL {reason}"),
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: usize,
    pub defaults: usize,
    pub probes: usize,
    pub iterations: usize,
    /// Row deletions including the ones undone after probes.
    pub deletions: u64,
    /// Rows dead at the end of the run.
    pub dead_rows: usize,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub trace: Vec<TraceEvent>,
    pub preprocess: Option<PreprocessReport>,
    pub stats: SolveStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub var: Var,
    pub bit: bool,
    pub gate: Option<u32>,
    pub policy: PolicyTag,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecisionError {
    #[error("scripted decision {var}={} conflicts with {var}={}", *.wanted as u8, *.current as u8)]
    ScriptConflict {
        var: Var,
        wanted: bool,
        current: bool,
    },
}

/// Stateful side of a [`DecisionPolicy`]: the RNG or the script cursor.
#[derive(Debug)]
pub struct Decider {
    kind: DeciderKind,
}

#[derive(Debug)]
enum DeciderKind {
    Deterministic,
    Random(Box<ChaCha8Rng>),
    Scripted(VecDeque<(Var, bool)>),
}

impl Decider {
    pub fn new(policy: &DecisionPolicy) -> Decider {
        let kind = match policy {
            DecisionPolicy::Deterministic => DeciderKind::Deterministic,
            DecisionPolicy::SeededRandom(seed) => {
                DeciderKind::Random(Box::new(ChaCha8Rng::seed_from_u64(*seed)))
            }
            DecisionPolicy::Scripted(s) => DeciderKind::Scripted(s.iter().copied().collect()),
        };
        Decider { kind }
    }
}

/// Picks the next free decision, or `None` when no gate of degree
/// 2..=4 has an unassigned variable.
///
/// Once a script runs out, the deterministic rule takes over.
pub fn choose_decision(
    t: &Tables,
    decider: &mut Decider,
) -> Result<Option<Decision>, DecisionError> {
    match &mut decider.kind {
        DeciderKind::Deterministic => Ok(deterministic(t)),
        DeciderKind::Random(rng) => Ok(random(t, rng)),
        DeciderKind::Scripted(script) => {
            while let Some((var, bit)) = script.pop_front() {
                match t.value(var) {
                    Some(cur) if cur == bit => continue,
                    Some(cur) => {
                        return Err(DecisionError::ScriptConflict {
                            var,
                            wanted: bit,
                            current: cur,
                        })
                    }
                    None => {
                        return Ok(Some(Decision {
                            var,
                            bit,
                            gate: decision_gate(t, var),
                            policy: PolicyTag::Scripted,
                        }))
                    }
                }
            }
            Ok(deterministic(t))
        }
    }
}

fn unassigned_operand(t: &Tables, j: u32) -> Option<Var> {
    let vars = t.gate_vars(j);
    vars[..vars.len() - 1]
        .iter()
        .map(|&(v, _)| v)
        .find(|&v| t.value(v).is_none())
}

fn deterministic(t: &Tables) -> Option<Decision> {
    for d in 2..=4 {
        for j in t.gates_with_degree(d) {
            if let Some(var) = unassigned_operand(t, j) {
                let rows = t.degree_table().live_rows(j);
                let ones = rows
                    .iter()
                    .filter(|&&r| t.ctt().row(r).value(var) == Some(true))
                    .count();
                let bit = 2 * ones >= rows.len();
                return Some(Decision {
                    var,
                    bit,
                    gate: Some(j),
                    policy: PolicyTag::Deterministic,
                });
            }
        }
    }
    None
}

fn random(t: &Tables, rng: &mut ChaCha8Rng) -> Option<Decision> {
    let mut pool: Vec<u32> = t
        .gates_with_degree(2)
        .chain(t.gates_with_degree(3))
        .collect();
    if pool.is_empty() {
        pool = t.gates_with_degree(4).collect();
    }
    pool.retain(|&j| unassigned_operand(t, j).is_some());
    if pool.is_empty() {
        return None;
    }
    let j = pool[rng.gen_range(0..pool.len())];
    let vars = t.gate_vars(j);
    let free: Vec<Var> = vars[..vars.len() - 1]
        .iter()
        .map(|&(v, _)| v)
        .filter(|&v| t.value(v).is_none())
        .collect();
    let var = free[rng.gen_range(0..free.len())];
    let rows = t.degree_table().live_rows(j);
    let row = rows[rng.gen_range(0..rows.len())];
    let bit = t.ctt().row(row).value(var).unwrap();
    Some(Decision {
        var,
        bit,
        gate: Some(j),
        policy: PolicyTag::Random,
    })
}

/// Lowest gate of degree >= 2 reading `var`, else the lowest gate valuing it.
fn decision_gate(t: &Tables, var: Var) -> Option<u32> {
    let owners: Vec<u32> = t
        .ctt()
        .occurrences(var)
        .map(|(r, _)| t.ctt().row(r).owner)
        .collect();
    owners
        .iter()
        .copied()
        .filter(|&j| j != var_gate(var) && t.degree(j) >= 2)
        .min()
        .or_else(|| owners.iter().copied().min())
}

fn var_gate(v: Var) -> u32 {
    match v {
        Var::Gate(j) => j,
        Var::Input(_) => 0,
    }
}

/// Degree-1 propagation failed: gate `gate` lost its last row.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("gate G{gate} reached degree 0")]
pub struct Contradiction {
    pub gate: u32,
    pub events: Vec<TraceEvent>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropagationReport {
    /// `FORCE` and `DEL` events in execution order.
    pub events: Vec<TraceEvent>,
}

impl PropagationReport {
    pub fn forced(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::Force { var, bit, .. } => Some((*var, *bit)),
            _ => None,
        })
    }
}

/// Forces the sole live row of every degree-1 gate until nothing changes.
pub fn propagate_degree1(t: &mut Tables) -> Result<PropagationReport, Contradiction> {
    let mut queue: VecDeque<u32> = t.gates_with_degree(1).collect();
    let mut events = Vec::new();
    match run_propagation(t, &mut queue, &mut events) {
        Ok(()) => Ok(PropagationReport { events }),
        Err(gate) => Err(Contradiction { gate, events }),
    }
}

pub(crate) fn enqueue_degree1(t: &Tables, report: &DeletionReport, queue: &mut VecDeque<u32>) {
    for &g in &report.changed {
        if t.degree(g) == 1 {
            queue.push_back(g);
        }
    }
}

/// Worklist propagation. Appends `FORCE`/`DEL`/`CONTRADICTION` events and
/// returns the emptied gate on failure.
pub(crate) fn run_propagation(
    t: &mut Tables,
    queue: &mut VecDeque<u32>,
    events: &mut Vec<TraceEvent>,
) -> Result<(), u32> {
    while let Some(j) = queue.pop_front() {
        if t.degree(j) != 1 {
            continue;
        }
        let row = t.degree_table().live_rows(j)[0];
        let cells = t.ctt().row(row).cells.clone();
        for (var, bit) in cells {
            if t.value(var).is_some() {
                continue;
            }
            events.push(TraceEvent::Force {
                var,
                bit,
                gate: j,
                row,
            });
            match t.assign_value(var, bit) {
                Ok(rep) => {
                    if !rep.is_empty() {
                        events.push(TraceEvent::Delete {
                            rows: rep.deleted.clone(),
                        });
                    }
                    enqueue_degree1(t, &rep, queue);
                }
                Err(TableError::ContradictionReached { gate, report }) => {
                    events.push(TraceEvent::Delete {
                        rows: report.deleted,
                    });
                    events.push(TraceEvent::Contradiction { gate });
                    queue.clear();
                    return Err(gate);
                }
                Err(TableError::ConflictingAssignment { .. }) => {
                    unreachable!("forcing only touches unassigned variables")
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("input {0} is still unassigned")]
    UnassignedInput(Var),
}

/// Reads `x1..xn` off the tables. Inputs that no gate reads default to 0.
pub fn extract_solution(t: &Tables) -> Result<Assignment, ExtractError> {
    let n = t.n();
    let mut bits = Vec::with_capacity(n);
    for i in 1..=n as u32 {
        let v = Var::Input(i);
        match t.value(v) {
            Some(b) => bits.push(b),
            None if t.ctt().occurrences(v).next().is_none() => bits.push(false),
            None => return Err(ExtractError::UnassignedInput(v)),
        }
    }
    Ok(Assignment::from_inputs(&bits))
}

/// Mutable solver state for one circuit.
pub struct Session<'c> {
    pub(crate) circuit: &'c Circuit,
    pub(crate) tables: Tables,
    pub(crate) trace: Vec<TraceEvent>,
    pub(crate) pending: VecDeque<u32>,
    pub(crate) stats: SolveStats,
    choices: usize,
}

enum Step {
    Done,
    Contradiction(u32),
}

impl<'c> Session<'c> {
    pub fn new(circuit: &'c Circuit) -> Session<'c> {
        Session {
            circuit,
            tables: Tables::new(circuit),
            trace: Vec::new(),
            pending: VecDeque::new(),
            stats: SolveStats::default(),
            choices: 0,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Performs `var := bit`, logging `event` and the resulting deletions.
    pub(crate) fn assign(&mut self, var: Var, bit: bool, event: TraceEvent) -> Result<(), u32> {
        self.trace.push(event);
        match self.tables.assign_value(var, bit) {
            Ok(rep) => {
                if !rep.is_empty() {
                    self.trace.push(TraceEvent::Delete {
                        rows: rep.deleted.clone(),
                    });
                }
                enqueue_degree1(&self.tables, &rep, &mut self.pending);
                Ok(())
            }
            Err(TableError::ContradictionReached { gate, report }) => {
                self.trace.push(TraceEvent::Delete {
                    rows: report.deleted,
                });
                self.trace.push(TraceEvent::Contradiction { gate });
                Err(gate)
            }
            Err(TableError::ConflictingAssignment { .. }) => {
                // `var` was forced to the other value already
                let gate = self.first_dead_owner(var);
                self.trace.push(TraceEvent::Contradiction { gate });
                Err(gate)
            }
        }
    }

    fn first_dead_owner(&self, var: Var) -> u32 {
        self.tables
            .ctt()
            .occurrences(var)
            .map(|(r, _)| self.tables.ctt().row(r).owner)
            .next()
            .unwrap_or(0)
    }

    pub(crate) fn propagate(&mut self) -> Result<(), u32> {
        run_propagation(&mut self.tables, &mut self.pending, &mut self.trace)
    }

    fn contradiction_outcome(&mut self, gate: u32) -> SolveOutcome {
        if self.choices == 0 {
            SolveOutcome::Unsat
        } else {
            let reason = format!(
                "contradiction at G{gate} after {} decision(s)",
                self.choices
            );
            self.fail(reason)
        }
    }

    fn fail(&mut self, reason: String) -> SolveOutcome {
        self.trace.push(TraceEvent::Fail {
            reason: reason.clone(),
        });
        SolveOutcome::FailureDetected {
            reason,
            trail: self.trace.clone(),
        }
    }

    /// Main loop after the output has been fixed.
    fn search(&mut self, decider: &mut Decider) -> Result<Step, DecisionError> {
        let c = self.circuit;
        let limit = 4 * c.m() + c.n() + c.m();
        loop {
            self.stats.iterations += 1;
            assert!(
                self.stats.iterations <= limit + 1,
                "solver loop exceeded {limit} iterations"
            );
            if let Err(g) = self.propagate() {
                return Ok(Step::Contradiction(g));
            }
            if self.tables.unassigned_inputs() == 0 {
                return Ok(Step::Done);
            }
            let step = match choose_decision(&self.tables, decider)? {
                Some(d) => {
                    self.choices += 1;
                    self.stats.decisions += 1;
                    let ev = TraceEvent::Decide {
                        var: d.var,
                        bit: d.bit,
                        gate: d.gate,
                        policy: d.policy,
                    };
                    self.assign(d.var, d.bit, ev)
                }
                None => {
                    let var = (1..=c.n() as u32)
                        .map(Var::Input)
                        .find(|&v| self.tables.value(v).is_none())
                        .expect("an unassigned input exists");
                    self.choices += 1;
                    self.stats.defaults += 1;
                    self.assign(var, false, TraceEvent::Default { var })
                }
            };
            if let Err(g) = step {
                return Ok(Step::Contradiction(g));
            }
        }
    }

    fn finish(
        mut self,
        outcome: SolveOutcome,
        preprocess: Option<PreprocessReport>,
    ) -> SolveResult {
        self.stats.deletions = self.tables.total_deletions();
        self.stats.dead_rows = self.tables.dead_rows();
        SolveResult {
            outcome,
            trace: self.trace,
            preprocess,
            stats: self.stats,
        }
    }
}

/// Full pipeline: optional tautology/contradiction pre-pass, `ym := 1`,
/// propagation and decisions until every input is valued, then verification.
pub fn solve(c: &Circuit, policy: &DecisionPolicy, preprocess: bool) -> SolveResult {
    let mut s = Session::new(c);
    let mut decider = Decider::new(policy);

    let report = if preprocess {
        let r = preprocess_session(&mut s);
        match r.outcome {
            PreprocessOutcome::CircuitContradiction => {
                return s.finish(SolveOutcome::Unsat, Some(r))
            }
            PreprocessOutcome::CircuitTautology => {
                return s.finish(SolveOutcome::Tautology, Some(r))
            }
            PreprocessOutcome::Inconsistent { gate } => {
                // only reachable if the tables started constrained
                let out = s.contradiction_outcome(gate);
                return s.finish(out, Some(r));
            }
            PreprocessOutcome::Open => Some(r),
        }
    } else {
        None
    };

    let out = c.output();
    if let Err(g) = s.assign(
        out,
        true,
        TraceEvent::Set {
            var: out,
            bit: true,
        },
    ) {
        let o = s.contradiction_outcome(g);
        return s.finish(o, report);
    }

    let outcome = match s.search(&mut decider) {
        Err(e) => s.fail(e.to_string()),
        Ok(Step::Contradiction(g)) => s.contradiction_outcome(g),
        Ok(Step::Done) => match extract_solution(&s.tables) {
            Err(e) => s.fail(e.to_string()),
            Ok(a) => match c.evaluate(&a) {
                Ok(true) => SolveOutcome::Sat(a),
                Ok(false) => s.fail("extracted assignment does not satisfy the output".into()),
                Err(e) => s.fail(e.to_string()),
            },
        },
    };
    s.finish(outcome, report)
}

/// Replays every assigning event of `trace` on fresh tables.
pub fn replay(c: &Circuit, trace: &[TraceEvent]) -> Tables {
    let mut t = Tables::new(c);
    for e in trace {
        if let Some((v, b)) = e.assignment() {
            let _ = t.assign_value(v, b);
        }
    }
    t
}

pub(crate) fn probe_hypothesis(kind: GateKind) -> Option<bool> {
    match kind {
        GateKind::And => Some(true),
        GateKind::Or => Some(false),
        GateKind::Not => None,
    }
}
