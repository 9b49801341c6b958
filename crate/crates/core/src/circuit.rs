//! Gate-level circuit representation.
//!
//! Inputs are labelled `x1..xn`, gates `G1..Gm` with outputs `y1..ym`. Gate ids
//! are topological: every gate only reads inputs or gates with a smaller id,
//! and the circuit output is always `ym`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A circuit variable: a primary input `x_i` or a gate output `y_j` (both 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Input(u32),
    Gate(u32),
}

impl Var {
    /// Dense column index: `x1..xn` first, then `y1..ym`.
    #[inline]
    pub fn column(self, n: usize) -> usize {
        match self {
            Var::Input(i) => i as usize - 1,
            Var::Gate(j) => n + j as usize - 1,
        }
    }

    #[inline]
    pub fn from_column(col: usize, n: usize) -> Var {
        if col < n {
            Var::Input(col as u32 + 1)
        } else {
            Var::Gate((col - n) as u32 + 1)
        }
    }

    pub fn is_input(self) -> bool {
        matches!(self, Var::Input(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Input(i) => write!(f, "x{i}"),
            Var::Gate(j) => write!(f, "y{j}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid variable label `{0}` (expected x<i> or y<j>)")]
pub struct VarParseError(pub String);

impl FromStr for Var {
    type Err = VarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || VarParseError(s.to_string());
        let (head, idx) = s.split_at_checked(1).ok_or_else(err)?;
        let idx: u32 = idx.parse().map_err(|_| err())?;
        if idx == 0 {
            return Err(err());
        }
        match head {
            "x" => Ok(Var::Input(idx)),
            "y" => Ok(Var::Gate(idx)),
            _ => Err(err()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or => 2,
            GateKind::Not => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
        }
    }

    #[inline]
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Not => !a,
        }
    }

    #[inline]
    fn apply_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub id: u32,
    pub kind: GateKind,
    pub inputs: Vec<Var>,
}

impl Gate {
    /// Operands sorted by column order (inputs before gate outputs, then by index).
    pub fn sorted_inputs(&self) -> Vec<Var> {
        let mut v = self.inputs.clone();
        v.sort();
        v
    }

    pub fn output(&self) -> Var {
        Var::Gate(self.id)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("circuit has no gates")]
    Empty,
    #[error("gate G{gate}: {kind} takes {expected} operand(s), got {got}")]
    Arity {
        gate: u32,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("gate G{gate}: operand {var} is out of range or not topologically earlier")]
    BadOperand { gate: u32, var: Var },
    #[error("gate G{gate}: operand {var} used twice")]
    RepeatedOperand { gate: u32, var: Var },
    #[error("names must be unique identifiers, one per input and gate")]
    Names,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("missing value for input {0}")]
    MissingInput(Var),
    #[error("expected {expected} input values, got {got}")]
    InputCount { expected: usize, got: usize },
}

/// Immutable combinational circuit with a single output `ym`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    input_names: Vec<String>,
    gate_names: Vec<String>,
}

impl Circuit {
    /// Builds a circuit from gate descriptions in topological order; gate `k`
    /// of the list becomes `G(k+1)`. Names default to the `x<i>`/`y<j>` labels.
    pub fn new(n: usize, gates: Vec<(GateKind, Vec<Var>)>) -> Result<Circuit, CircuitError> {
        let input_names = (1..=n).map(|i| format!("x{i}")).collect();
        let gate_names = (1..=gates.len()).map(|j| format!("y{j}")).collect();
        Circuit::with_names(n, gates, input_names, gate_names)
    }

    pub fn with_names(
        n: usize,
        gates: Vec<(GateKind, Vec<Var>)>,
        input_names: Vec<String>,
        gate_names: Vec<String>,
    ) -> Result<Circuit, CircuitError> {
        if gates.is_empty() {
            return Err(CircuitError::Empty);
        }
        if input_names.len() != n || gate_names.len() != gates.len() {
            return Err(CircuitError::Names);
        }
        let mut seen = std::collections::HashSet::new();
        for name in input_names.iter().chain(&gate_names) {
            if !is_identifier(name) || !seen.insert(name.as_str()) {
                return Err(CircuitError::Names);
            }
        }
        let mut built = Vec::with_capacity(gates.len());
        for (k, (kind, inputs)) in gates.into_iter().enumerate() {
            let id = k as u32 + 1;
            if inputs.len() != kind.arity() {
                return Err(CircuitError::Arity {
                    gate: id,
                    kind,
                    expected: kind.arity(),
                    got: inputs.len(),
                });
            }
            for &var in &inputs {
                let ok = match var {
                    Var::Input(i) => i >= 1 && i as usize <= n,
                    Var::Gate(j) => j >= 1 && j < id,
                };
                if !ok {
                    return Err(CircuitError::BadOperand { gate: id, var });
                }
            }
            if inputs.len() == 2 && inputs[0] == inputs[1] {
                return Err(CircuitError::RepeatedOperand {
                    gate: id,
                    var: inputs[0],
                });
            }
            built.push(Gate { id, kind, inputs });
        }
        Ok(Circuit {
            n,
            gates: built,
            input_names,
            gate_names,
        })
    }

    /// Number of primary inputs.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of gates.
    pub fn m(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate `G<j>` (1-based).
    pub fn gate(&self, j: u32) -> &Gate {
        &self.gates[j as usize - 1]
    }

    pub fn output(&self) -> Var {
        Var::Gate(self.m() as u32)
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn gate_names(&self) -> &[String] {
        &self.gate_names
    }

    pub fn name_of(&self, var: Var) -> &str {
        match var {
            Var::Input(i) => &self.input_names[i as usize - 1],
            Var::Gate(j) => &self.gate_names[j as usize - 1],
        }
    }

    /// Number of gate operands reading each column (`x1..xn`, `y1..ym`).
    pub fn fanout(&self) -> Vec<usize> {
        let mut out = vec![0; self.n + self.m()];
        for g in &self.gates {
            for v in &g.inputs {
                out[v.column(self.n)] += 1;
            }
        }
        out
    }

    /// Gates in the transitive fan-in of `G<k>`, including `k`, in ascending id order.
    pub fn cone_gates(&self, k: u32) -> Vec<u32> {
        let mut mark = vec![false; self.m() + 1];
        mark[k as usize] = true;
        for j in (1..=k).rev() {
            if !mark[j as usize] {
                continue;
            }
            for v in &self.gate(j).inputs {
                if let Var::Gate(p) = *v {
                    mark[p as usize] = true;
                }
            }
        }
        (1..=k).filter(|&j| mark[j as usize]).collect()
    }

    /// Primary inputs read anywhere inside the cone of `G<k>`, ascending.
    pub fn cone_inputs(&self, k: u32) -> Vec<u32> {
        let mut seen = vec![false; self.n + 1];
        for j in self.cone_gates(k) {
            for v in &self.gate(j).inputs {
                if let Var::Input(i) = *v {
                    seen[i as usize] = true;
                }
            }
        }
        (1..=self.n as u32).filter(|&i| seen[i as usize]).collect()
    }

    /// Gates that do not feed the output.
    pub fn unreachable_gates(&self) -> Vec<u32> {
        let cone = self.cone_gates(self.m() as u32);
        let mut reach = vec![false; self.m() + 1];
        for j in cone {
            reach[j as usize] = true;
        }
        (1..=self.m() as u32)
            .filter(|&j| !reach[j as usize])
            .collect()
    }

    /// Sub-circuit keeping the listed gates and inputs (both ascending), renumbered
    /// densely, with the last kept gate as output. Names are preserved.
    ///
    /// Panics if a kept gate reads something that is not kept.
    pub fn restrict(&self, gates: &[u32], inputs: &[u32]) -> Circuit {
        let mut gmap = vec![0u32; self.m() + 1];
        for (k, &j) in gates.iter().enumerate() {
            gmap[j as usize] = k as u32 + 1;
        }
        let mut imap = vec![0u32; self.n + 1];
        for (k, &i) in inputs.iter().enumerate() {
            imap[i as usize] = k as u32 + 1;
        }
        let remap = |v: Var| match v {
            Var::Input(i) => Var::Input(imap[i as usize]),
            Var::Gate(j) => Var::Gate(gmap[j as usize]),
        };
        let built = gates
            .iter()
            .map(|&j| {
                let g = self.gate(j);
                (g.kind, g.inputs.iter().map(|&v| remap(v)).collect())
            })
            .collect();
        let input_names = inputs
            .iter()
            .map(|&i| self.input_names[i as usize - 1].clone())
            .collect();
        let gate_names = gates
            .iter()
            .map(|&j| self.gate_names[j as usize - 1].clone())
            .collect();
        Circuit::with_names(inputs.len(), built, input_names, gate_names)
            .expect("restriction must keep every operand of a kept gate")
    }

    /// The cone of `G<k>` over all `n` inputs, with `G<k>` as output.
    pub fn prune_to_cone(&self, k: u32) -> Circuit {
        let all: Vec<u32> = (1..=self.n as u32).collect();
        self.restrict(&self.cone_gates(k), &all)
    }

    /// The cone of `G<k>` over only the inputs it reads.
    pub fn cone_subcircuit(&self, k: u32) -> Circuit {
        self.restrict(&self.cone_gates(k), &self.cone_inputs(k))
    }

    /// Evaluates every gate; `inputs[i-1]` is the value of `x_i`. Returns the
    /// values of `y1..ym`.
    pub fn eval_gates(&self, inputs: &[bool]) -> Result<Vec<bool>, EvalError> {
        if inputs.len() != self.n {
            return Err(EvalError::InputCount {
                expected: self.n,
                got: inputs.len(),
            });
        }
        let mut ys = Vec::with_capacity(self.m());
        for g in &self.gates {
            let read = |v: Var| match v {
                Var::Input(i) => inputs[i as usize - 1],
                Var::Gate(j) => ys[j as usize - 1],
            };
            let a = read(g.inputs[0]);
            let b = g.inputs.get(1).is_some_and(|&v| read(v));
            ys.push(g.kind.apply(a, b));
        }
        Ok(ys)
    }

    /// Value of the output `ym` for a total input vector.
    pub fn eval(&self, inputs: &[bool]) -> Result<bool, EvalError> {
        Ok(*self.eval_gates(inputs)?.last().unwrap())
    }

    /// Evaluates the circuit on an [`Assignment`] that defines every input.
    pub fn evaluate(&self, a: &Assignment) -> Result<bool, EvalError> {
        let inputs = a.input_vector(self.n)?;
        self.eval(&inputs)
    }

    /// Bit-parallel evaluation: bit `t` of `inputs[i-1]` is the value of `x_i`
    /// in lane `t`. Returns one word per gate.
    pub fn eval_words(&self, inputs: &[u64]) -> Vec<u64> {
        assert_eq!(inputs.len(), self.n);
        let mut ys: Vec<u64> = Vec::with_capacity(self.m());
        for g in &self.gates {
            let read = |v: Var| match v {
                Var::Input(i) => inputs[i as usize - 1],
                Var::Gate(j) => ys[j as usize - 1],
            };
            let a = read(g.inputs[0]);
            let b = g.inputs.get(1).map_or(0, |&v| read(v));
            ys.push(g.kind.apply_word(a, b));
        }
        ys
    }

    pub fn classify(&self) -> StructureClass {
        classify_structure(self)
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Partial map from variables to bits, stored densely by column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    n: usize,
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(n: usize, m: usize) -> Assignment {
        Assignment {
            n,
            values: vec![None; n + m],
        }
    }

    /// Total assignment to the inputs only (no gate columns).
    pub fn from_inputs(bits: &[bool]) -> Assignment {
        Assignment {
            n: bits.len(),
            values: bits.iter().map(|&b| Some(b)).collect(),
        }
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.values.get(v.column(self.n)).copied().flatten()
    }

    pub fn set(&mut self, v: Var, b: bool) {
        let col = v.column(self.n);
        self.values[col] = Some(b);
    }

    pub fn clear(&mut self, v: Var) {
        let col = v.column(self.n);
        self.values[col] = None;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The input values `x1..xn`, failing on the first unassigned one.
    pub fn input_vector(&self, n: usize) -> Result<Vec<bool>, EvalError> {
        (1..=n as u32)
            .map(|i| {
                let v = Var::Input(i);
                if i as usize > self.n {
                    return Err(EvalError::MissingInput(v));
                }
                self.get(v).ok_or(EvalError::MissingInput(v))
            })
            .collect()
    }

    /// Assigned variables in column order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(c, v)| v.map(|b| (Var::from_column(c, self.n), b)))
    }
}

/// The structural circuit classes for which the heuristic is claimed exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct StructureClass {
    /// No NOT gate.
    pub monotone: bool,
    /// Every input and every non-output gate output feeds exactly one gate operand.
    pub tree: bool,
    /// Every NOT gate reads a wire of fan-out exactly one.
    pub not_on_unbranched_wires: bool,
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "monotone={} tree={} not_on_unbranched_wires={}",
            self.monotone, self.tree, self.not_on_unbranched_wires
        )
    }
}

pub fn classify_structure(c: &Circuit) -> StructureClass {
    let fanout = c.fanout();
    let out_col = c.output().column(c.n());
    let monotone = c.gates().iter().all(|g| g.kind != GateKind::Not);
    let tree = fanout
        .iter()
        .enumerate()
        .all(|(col, &f)| col == out_col || f == 1);
    let not_on_unbranched_wires = c
        .gates()
        .iter()
        .filter(|g| g.kind == GateKind::Not)
        .all(|g| fanout[g.inputs[0].column(c.n())] == 1);
    StructureClass {
        monotone,
        tree,
        not_on_unbranched_wires,
    }
}
