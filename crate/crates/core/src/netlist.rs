//! Line-oriented netlist format.
//!
//! ```text
//! # comments start with a hash
//! INPUT(a)
//! INPUT(b)
//! INPUT(c)
//! t = OR(a, b)
//! u = NOT(c)
//! o = AND(t, u)
//! OUTPUT(o)
//! ```
//!
//! Definitions may appear in any order. Inputs are numbered in declaration
//! order; gates are topologically renumbered, keeping declaration order where
//! the dependencies allow it, with the `OUTPUT` gate always last.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}: {op} takes {expected} operand(s), got {got}")]
    Arity {
        line: usize,
        op: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{line}:{col}: undefined identifier `{name}`")]
    Undefined {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}: `{name}` is already defined")]
    Duplicate { line: usize, name: String },
    #[error("{line}: operand `{name}` used twice")]
    RepeatedOperand { line: usize, name: String },
    #[error("no OUTPUT declared")]
    NoOutput,
    #[error("{line}: more than one OUTPUT declared")]
    MultipleOutput { line: usize },
    #[error("{line}: OUTPUT `{name}` must name a gate")]
    OutputNotGate { line: usize, name: String },
    #[error("{line}: gate `{by}` reads the OUTPUT wire `{name}`")]
    OutputConsumed {
        line: usize,
        name: String,
        by: String,
    },
    #[error("combinational cycle through `{name}`")]
    Cycle { name: String },
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    /// Returns the identifier and its 1-based column.
    fn ident(&mut self) -> Result<(&'a str, usize), ParseError> {
        self.skip_ws();
        let col = self.col();
        let rest = &self.text[self.pos..];
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 {
                c.is_ascii_alphabetic() || c == '_'
            } else {
                c.is_ascii_alphanumeric() || c == '_'
            };
            if !ok {
                break;
            }
            len = i + c.len_utf8();
        }
        if len == 0 {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok((&rest[..len], col))
    }

    fn end(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

struct GateDef<'a> {
    line: usize,
    name: &'a str,
    kind: GateKind,
    args: Vec<(&'a str, usize)>,
}

#[derive(Clone, Copy)]
enum Def {
    Input(usize),
    Gate(usize),
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut inputs: Vec<&str> = Vec::new();
    let mut gates: Vec<GateDef> = Vec::new();
    let mut output: Option<(&str, usize, usize)> = None;
    let mut defs: HashMap<&str, Def> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cur = Cursor {
            line,
            text: raw,
            pos: 0,
        };
        let (head, _) = cur.ident()?;
        cur.skip_ws();
        match cur.peek() {
            Some('(') if head == "INPUT" || head == "OUTPUT" => {
                cur.eat('(')?;
                let (name, col) = cur.ident()?;
                cur.eat(')')?;
                cur.end()?;
                if head == "INPUT" {
                    if defs.insert(name, Def::Input(inputs.len())).is_some() {
                        return Err(ParseError::Duplicate {
                            line,
                            name: name.into(),
                        });
                    }
                    inputs.push(name);
                } else {
                    if output.is_some() {
                        return Err(ParseError::MultipleOutput { line });
                    }
                    output = Some((name, line, col));
                }
            }
            Some('=') => {
                cur.eat('=')?;
                let (op, _) = cur.ident()?;
                let kind = match op {
                    "AND" => GateKind::And,
                    "OR" => GateKind::Or,
                    "NOT" => GateKind::Not,
                    _ => {
                        cur.pos -= op.len();
                        return Err(cur.err(format!("unknown gate type `{op}`")));
                    }
                };
                cur.eat('(')?;
                let mut args = vec![cur.ident()?];
                loop {
                    cur.skip_ws();
                    if cur.peek() == Some(',') {
                        cur.eat(',')?;
                        args.push(cur.ident()?);
                    } else {
                        break;
                    }
                }
                cur.eat(')')?;
                cur.end()?;
                if args.len() != kind.arity() {
                    return Err(ParseError::Arity {
                        line,
                        op: kind,
                        expected: kind.arity(),
                        got: args.len(),
                    });
                }
                if args.len() == 2 && args[0].0 == args[1].0 {
                    return Err(ParseError::RepeatedOperand {
                        line,
                        name: args[0].0.into(),
                    });
                }
                if defs.insert(head, Def::Gate(gates.len())).is_some() {
                    return Err(ParseError::Duplicate {
                        line,
                        name: head.into(),
                    });
                }
                gates.push(GateDef {
                    line,
                    name: head,
                    kind,
                    args,
                });
            }
            _ => return Err(cur.err("expected `=` or a declaration")),
        }
    }

    let (out_name, out_line, out_col) = output.ok_or(ParseError::NoOutput)?;
    let out_idx = match defs.get(out_name) {
        Some(Def::Gate(g)) => *g,
        Some(Def::Input(_)) => {
            return Err(ParseError::OutputNotGate {
                line: out_line,
                name: out_name.into(),
            })
        }
        None => {
            return Err(ParseError::Undefined {
                line: out_line,
                col: out_col,
                name: out_name.into(),
            })
        }
    };

    // Resolve operands and build the dependency graph between gate definitions.
    let mut operands: Vec<Vec<Def>> = Vec::with_capacity(gates.len());
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    let mut pending = vec![0usize; gates.len()];
    for (g, def) in gates.iter().enumerate() {
        let mut ops = Vec::with_capacity(def.args.len());
        for &(name, col) in &def.args {
            let d = *defs.get(name).ok_or_else(|| ParseError::Undefined {
                line: def.line,
                col,
                name: name.into(),
            })?;
            if let Def::Gate(p) = d {
                if p == out_idx {
                    return Err(ParseError::OutputConsumed {
                        line: def.line,
                        name: out_name.into(),
                        by: def.name.into(),
                    });
                }
                readers[p].push(g);
                pending[g] += 1;
            }
            ops.push(d);
        }
        operands.push(ops);
    }

    // Kahn's algorithm, smallest declaration index first; the output goes last.
    let mut order = Vec::with_capacity(gates.len());
    let mut ready: BinaryHeap<Reverse<usize>> = (0..gates.len())
        .filter(|&g| pending[g] == 0 && g != out_idx)
        .map(Reverse)
        .collect();
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for &r in &readers[g] {
            pending[r] -= 1;
            if pending[r] == 0 && r != out_idx {
                ready.push(Reverse(r));
            }
        }
    }
    if order.len() + 1 != gates.len() || pending[out_idx] != 0 {
        let placed: std::collections::HashSet<usize> = order.iter().copied().collect();
        let name = cycle_member(&operands, &placed, out_idx);
        return Err(ParseError::Cycle {
            name: gates[name].name.into(),
        });
    }
    order.push(out_idx);

    let mut new_id = vec![0u32; gates.len()];
    for (k, &g) in order.iter().enumerate() {
        new_id[g] = k as u32 + 1;
    }
    let to_var = |d: Def| match d {
        Def::Input(i) => Var::Input(i as u32 + 1),
        Def::Gate(g) => Var::Gate(new_id[g]),
    };
    let built = order
        .iter()
        .map(|&g| {
            (
                gates[g].kind,
                operands[g].iter().map(|&d| to_var(d)).collect(),
            )
        })
        .collect();
    let gate_names = order.iter().map(|&g| gates[g].name.to_string()).collect();
    let input_names = inputs.iter().map(|s| s.to_string()).collect();
    Ok(
        Circuit::with_names(inputs.len(), built, input_names, gate_names)
            .expect("parser produced an inconsistent circuit"),
    )
}

/// Follows unplaced predecessors until a definition repeats.
fn cycle_member(
    operands: &[Vec<Def>],
    placed: &std::collections::HashSet<usize>,
    out_idx: usize,
) -> usize {
    let start = (0..operands.len())
        .find(|g| !placed.contains(g) && *g != out_idx)
        .unwrap_or(out_idx);
    let mut seen = vec![false; operands.len()];
    let mut g = start;
    while !seen[g] {
        seen[g] = true;
        let next = operands[g].iter().find_map(|d| match *d {
            Def::Gate(p) if !placed.contains(&p) => Some(p),
            _ => None,
        });
        match next {
            Some(p) => g = p,
            None => break,
        }
    }
    g
}

/// Canonical text: inputs, gates in id order, then the output.
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    for name in c.input_names() {
        writeln!(out, "INPUT({name})").unwrap();
    }
    for g in c.gates() {
        let args: Vec<&str> = g.inputs.iter().map(|&v| c.name_of(v)).collect();
        writeln!(
            out,
            "{} = {}({})",
            c.name_of(g.output()),
            g.kind,
            args.join(", ")
        )
        .unwrap();
    }
    writeln!(out, "OUTPUT({})", c.name_of(c.output())).unwrap();
    out
}
