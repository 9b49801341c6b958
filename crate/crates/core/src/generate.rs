//! Seeded random circuits for each structural class.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{classify_structure, Circuit, GateKind, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CircuitClass {
    General,
    Monotone,
    Tree,
    NotOnUnbranched,
}

impl CircuitClass {
    pub const ALL: [CircuitClass; 4] = [
        CircuitClass::General,
        CircuitClass::Monotone,
        CircuitClass::Tree,
        CircuitClass::NotOnUnbranched,
    ];

    pub fn admits(self, c: &Circuit) -> bool {
        let s = classify_structure(c);
        match self {
            CircuitClass::General => true,
            CircuitClass::Monotone => s.monotone,
            CircuitClass::Tree => s.tree,
            CircuitClass::NotOnUnbranched => s.not_on_unbranched_wires,
        }
    }
}

impl fmt::Display for CircuitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CircuitClass::General => "general",
            CircuitClass::Monotone => "monotone",
            CircuitClass::Tree => "tree",
            CircuitClass::NotOnUnbranched => "not_on_unbranched",
        })
    }
}

impl FromStr for CircuitClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CircuitClass::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown circuit class `{s}`"))
    }
}

/// Relative frequencies of gate kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GateWeights {
    pub and: u32,
    pub or: u32,
    pub not: u32,
}

impl Default for GateWeights {
    fn default() -> Self {
        GateWeights {
            and: 2,
            or: 2,
            not: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub weights: GateWeights,
    pub class: CircuitClass,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(class: CircuitClass, n: usize, m: usize, seed: u64) -> GenConfig {
        GenConfig {
            n,
            m,
            weights: GateWeights::default(),
            class,
            seed,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("generated circuit is not in class {0}")]
    ClassViolation(CircuitClass),
}

/// Builds a random circuit of the requested class in which every gate feeds
/// the output.
pub fn generate(cfg: &GenConfig) -> Result<Circuit, GenError> {
    if cfg.n == 0 || cfg.m == 0 {
        return Err(GenError::Infeasible("need n >= 1 and m >= 1".into()));
    }
    let w = cfg.weights;
    if w.and + w.or == 0 {
        return Err(GenError::Infeasible("AND/OR weights are both zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c = match cfg.class {
        CircuitClass::Tree => tree(cfg, &mut rng)?,
        CircuitClass::Monotone => dag(cfg, GateWeights { not: 0, ..w }, false, &mut rng)?,
        CircuitClass::General => dag(cfg, w, false, &mut rng)?,
        CircuitClass::NotOnUnbranched => dag(cfg, w, true, &mut rng)?,
    };
    if !cfg.class.admits(&c) {
        return Err(GenError::ClassViolation(cfg.class));
    }
    debug_assert!(c.unreachable_gates().is_empty());
    Ok(c)
}

fn pick_binary(w: GateWeights, rng: &mut ChaCha8Rng) -> GateKind {
    if rng.gen_range(0..w.and + w.or) < w.and {
        GateKind::And
    } else {
        GateKind::Or
    }
}

/// Random bottom-up merge of the inputs: `n - 1` binary gates and
/// `m - n + 1` NOT gates, every wire read exactly once.
fn tree(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<Circuit, GenError> {
    let binaries = cfg.n - 1;
    if cfg.m < binaries {
        return Err(GenError::Infeasible(format!(
            "a tree over {} inputs needs at least {} gates",
            cfg.n, binaries
        )));
    }
    let mut ops: Vec<bool> = (0..cfg.m).map(|k| k < binaries).collect();
    ops.shuffle(rng);
    let mut pool: Vec<Var> = (1..=cfg.n as u32).map(Var::Input).collect();
    let mut gates = Vec::with_capacity(cfg.m);
    for (k, binary) in ops.into_iter().enumerate() {
        let a = pool.swap_remove(rng.gen_range(0..pool.len()));
        if binary {
            let b = pool.swap_remove(rng.gen_range(0..pool.len()));
            gates.push((pick_binary(cfg.weights, rng), vec![a, b]));
        } else {
            gates.push((GateKind::Not, vec![a]));
        }
        pool.push(Var::Gate(k as u32 + 1));
    }
    debug_assert_eq!(pool.len(), 1);
    Circuit::new(cfg.n, gates).map_err(|e| GenError::Infeasible(e.to_string()))
}

/// DAG with fan-out. Unconsumed gate outputs (the frontier) are merged so
/// that exactly one, the last gate, remains at the end. With `private_not`,
/// a NOT only reads a wire nobody else reads and that wire is sealed.
fn dag(
    cfg: &GenConfig,
    w: GateWeights,
    private_not: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Circuit, GenError> {
    let n = cfg.n;
    let m = cfg.m;
    let mut fanout = vec![0usize; n + m];
    let mut sealed = vec![false; n + m];
    let mut frontier: Vec<Var> = Vec::new();
    let mut gates: Vec<(GateKind, Vec<Var>)> = Vec::with_capacity(m);

    for j in 1..=m {
        let remaining = m - j;
        let f = frontier.len();
        // wires usable as a non-frontier operand
        let usable: Vec<Var> = (1..=n as u32)
            .map(Var::Input)
            .chain((1..j as u32).map(Var::Gate))
            .filter(|v| !frontier.contains(v) && !sealed[v.column(n)])
            .collect();
        let fresh_inputs: Vec<Var> = usable
            .iter()
            .copied()
            .filter(|v| v.is_input() && fanout[v.column(n)] == 0)
            .collect();

        // (kind is binary, operands taken from the frontier)
        let mut options: Vec<(bool, usize)> = Vec::new();
        for take in 0..=f.min(2) {
            let after = f - take + 1;
            if after - 1 > remaining {
                continue;
            }
            if usable.len() >= 2 - take {
                options.push((true, take));
            }
            if take <= 1 && w.not > 0 {
                let private_ok = !private_not || take == 1 || !fresh_inputs.is_empty();
                if (take == 1 || !usable.is_empty()) && private_ok {
                    options.push((false, take));
                }
            }
        }
        if options.is_empty() {
            return Err(GenError::Infeasible(format!(
                "cannot place gate {j} of {m} with {n} inputs"
            )));
        }

        let want_not = w.not > 0 && rng.gen_range(0..w.and + w.or + w.not) < w.not;
        let same_arity: Vec<(bool, usize)> = options
            .iter()
            .copied()
            .filter(|o| o.0 != want_not)
            .collect();
        let pool = if same_arity.is_empty() {
            &options
        } else {
            &same_arity
        };
        // mostly extend the frontier by one gate; start new branches or merge now and then
        let weight = |take: usize| [1u32, 5, 2][take];
        let total: u32 = pool.iter().map(|o| weight(o.1)).sum();
        let mut ticket = rng.gen_range(0..total);
        let mut chosen = pool[0];
        for &o in pool.iter() {
            if ticket < weight(o.1) {
                chosen = o;
                break;
            }
            ticket -= weight(o.1);
        }
        let (binary, take) = chosen;

        let mut operands = Vec::with_capacity(2);
        for _ in 0..take {
            operands.push(frontier.swap_remove(rng.gen_range(0..frontier.len())));
        }
        let arity = if binary { 2 } else { 1 };
        while operands.len() < arity {
            let candidates: Vec<Var> =
                if (!binary && private_not) || (!fresh_inputs.is_empty() && rng.gen_bool(0.5)) {
                    fresh_inputs.clone()
                } else {
                    usable.clone()
                };
            let candidates: Vec<Var> = candidates
                .into_iter()
                .filter(|v| !operands.contains(v))
                .collect();
            let pick = if candidates.is_empty() {
                let rest: Vec<Var> = usable
                    .iter()
                    .copied()
                    .filter(|v| !operands.contains(v))
                    .collect();
                rest[rng.gen_range(0..rest.len())]
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            };
            operands.push(pick);
        }
        for v in &operands {
            fanout[v.column(n)] += 1;
        }
        let kind = if binary {
            pick_binary(w, rng)
        } else {
            if private_not {
                sealed[operands[0].column(n)] = true;
            }
            GateKind::Not
        };
        gates.push((kind, operands));
        frontier.push(Var::Gate(j as u32));
    }
    Circuit::new(n, gates).map_err(|e| GenError::Infeasible(e.to_string()))
}

/// `y1 = op(x1, x2)`, `y_j = op(y_{j-1}, x_{j+1})` with a NOT roughly every
/// fifth gate; every gate reads its predecessor.
pub fn chain(m: usize, seed: u64) -> Circuit {
    assert!(m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::with_capacity(m);
    let mut next_input = 1u32;
    let mut fresh = || {
        next_input += 1;
        Var::Input(next_input)
    };
    for j in 1..=m as u32 {
        let prev = if j == 1 {
            Var::Input(1)
        } else {
            Var::Gate(j - 1)
        };
        if j > 1 && rng.gen_range(0..5) == 0 {
            gates.push((GateKind::Not, vec![prev]));
        } else {
            let kind = if rng.gen_bool(0.5) {
                GateKind::And
            } else {
                GateKind::Or
            };
            gates.push((kind, vec![prev, fresh()]));
        }
    }
    Circuit::new(next_input as usize, gates).expect("chain is well formed")
}
