//! Ground truth by exhaustive enumeration, 64 assignments per pass.

use std::fmt;

use thiserror::Error;

use crate::circuit::Circuit;

/// Enumeration refuses circuits with more inputs than this.
pub const MAX_ORACLE_INPUTS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Contradiction,
    Tautology,
    Mixed,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Contradiction => "contradiction",
            Classification::Tautology => "tautology",
            Classification::Mixed => "mixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub n: usize,
    pub sat_count: u64,
    pub classification: Classification,
    /// Lexicographically first model (with `x1` most significant).
    pub witness: Option<Vec<bool>>,
}

impl OracleVerdict {
    pub fn total(&self) -> u64 {
        1u64 << self.n
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} inputs exceed the enumeration limit of {MAX_ORACLE_INPUTS}")]
    TooManyInputs { n: usize },
}

pub fn classify_count(sat_count: u64, n: usize) -> Classification {
    if sat_count == 0 {
        Classification::Contradiction
    } else if sat_count == 1u64 << n {
        Classification::Tautology
    } else {
        Classification::Mixed
    }
}

/// Counts the input assignments that drive the output to 1.
pub fn brute_force(c: &Circuit) -> Result<OracleVerdict, OracleError> {
    let n = c.n();
    if n > MAX_ORACLE_INPUTS {
        return Err(OracleError::TooManyInputs { n });
    }
    let total: u64 = 1 << n;
    // lane patterns for the six least significant assignment bits
    const LANES: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let mut words = vec![0u64; n];
    let mut sat_count = 0u64;
    let mut witness = None;
    let mut base = 0u64;
    while base < total {
        let lanes = (total - base).min(64);
        let valid = if lanes == 64 {
            u64::MAX
        } else {
            (1u64 << lanes) - 1
        };
        for (k, w) in words.iter_mut().enumerate() {
            let shift = n - 1 - k; // x1 is the most significant bit
            *w = if shift < 6 {
                LANES[shift]
            } else if base >> shift & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
        let out = *c.eval_words(&words).last().unwrap() & valid;
        sat_count += out.count_ones() as u64;
        if witness.is_none() && out != 0 {
            let idx = base + out.trailing_zeros() as u64;
            witness = Some((0..n).map(|k| idx >> (n - 1 - k) & 1 == 1).collect());
        }
        base += 64;
    }
    Ok(OracleVerdict {
        n,
        sat_count,
        classification: classify_count(sat_count, n),
        witness,
    })
}

/// Counts assignments of the inputs read by the cone of `G<k>` for which
/// `y_k = 1`. The witness is indexed by those inputs in ascending order.
pub fn brute_force_cone(c: &Circuit, k: u32) -> Result<OracleVerdict, OracleError> {
    brute_force(&c.cone_subcircuit(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, Var};
    use crate::netlist::parse_circuit;

    /// Straight scalar enumeration, independent of the packed evaluator.
    fn naive_count(c: &Circuit) -> u64 {
        let n = c.n();
        (0..1u64 << n)
            .filter(|idx| {
                let bits: Vec<bool> = (0..n).map(|k| idx >> (n - 1 - k) & 1 == 1).collect();
                c.eval(&bits).unwrap()
            })
            .count() as u64
    }

    #[test]
    fn sample_count() {
        let c = parse_circuit(
            "INPUT(x1)\nINPUT(x2)\nINPUT(x3)\ny1 = OR(x1, x2)\ny2 = NOT(x3)\ny3 = AND(y1, y2)\nOUTPUT(y3)\n",
        )
        .unwrap();
        let v = brute_force(&c).unwrap();
        assert_eq!(v.sat_count, 3);
        assert_eq!(v.classification, Classification::Mixed);
        assert_eq!(v.witness, Some(vec![false, true, false]));
    }

    #[test]
    fn excluded_middle() {
        let c = parse_circuit("INPUT(x1)\ny1 = NOT(x1)\ny2 = OR(x1, y1)\nOUTPUT(y2)").unwrap();
        let v = brute_force(&c).unwrap();
        assert_eq!(
            (v.sat_count, v.classification),
            (2, Classification::Tautology)
        );
    }

    #[test]
    fn refuses_wide_circuits() {
        let n = 25;
        let c = Circuit::new(n, vec![(GateKind::Not, vec![Var::Input(1)])]).unwrap();
        assert_eq!(brute_force(&c), Err(OracleError::TooManyInputs { n: 25 }));
    }

    #[test]
    fn packed_matches_naive_across_block_boundary() {
        // 8 inputs: four 64-lane blocks
        let gates = vec![
            (GateKind::Or, vec![Var::Input(1), Var::Input(8)]),
            (GateKind::And, vec![Var::Gate(1), Var::Input(7)]),
            (GateKind::Not, vec![Var::Input(2)]),
            (GateKind::Or, vec![Var::Gate(2), Var::Gate(3)]),
            (GateKind::And, vec![Var::Gate(4), Var::Input(5)]),
        ];
        let c = Circuit::new(8, gates).unwrap();
        let v = brute_force(&c).unwrap();
        assert_eq!(v.sat_count, naive_count(&c));
        assert!(c.eval(&v.witness.unwrap()).unwrap());
    }
}
