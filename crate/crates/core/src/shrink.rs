//! Greedy counterexample minimisation.
//!
//! Candidate reductions, tried in a fixed order until none keeps the
//! predicate true:
//! - replace the output by one of the gates it reads,
//! - bypass a gate by wiring its readers to one of its operands,
//! - drop an input no gate reads.

use crate::circuit::{Circuit, Var};

/// Smallest circuit reachable by single reductions that still satisfies
/// `predicate`. Returns `c` itself when no reduction applies.
pub fn shrink<F>(c: &Circuit, mut predicate: F) -> Circuit
where
    F: FnMut(&Circuit) -> bool,
{
    let mut current = c.clone();
    'outer: loop {
        for cand in candidates(&current) {
            if predicate(&cand) {
                current = cand;
                continue 'outer;
            }
        }
        return current;
    }
}

fn candidates(c: &Circuit) -> Vec<Circuit> {
    let mut out = Vec::new();
    let m = c.m() as u32;

    for v in &c.gate(m).inputs {
        if let Var::Gate(p) = *v {
            out.push(c.prune_to_cone(p));
        }
    }

    for k in 1..m {
        for &replacement in &c.gate(k).inputs {
            if let Some(cand) = bypass(c, k, replacement) {
                out.push(cand);
            }
        }
    }

    let fanout = c.fanout();
    let gates: Vec<u32> = (1..=m).collect();
    for i in 1..=c.n() as u32 {
        if fanout[i as usize - 1] == 0 && c.n() > 1 {
            let keep: Vec<u32> = (1..=c.n() as u32).filter(|&x| x != i).collect();
            out.push(c.restrict(&gates, &keep));
        }
    }
    out
}

/// Rewires every reader of `y_k` to `replacement`, then drops gates that no
/// longer reach the output.
fn bypass(c: &Circuit, k: u32, replacement: Var) -> Option<Circuit> {
    let target = Var::Gate(k);
    let mut gates = Vec::with_capacity(c.m());
    for g in c.gates() {
        let ins: Vec<Var> = g
            .inputs
            .iter()
            .map(|&v| if v == target { replacement } else { v })
            .collect();
        if ins.len() == 2 && ins[0] == ins[1] {
            return None;
        }
        gates.push((g.kind, ins));
    }
    let rewired = Circuit::with_names(
        c.n(),
        gates,
        c.input_names().to_vec(),
        c.gate_names().to_vec(),
    )
    .ok()?;
    Some(rewired.prune_to_cone(c.m() as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_circuit;
    use crate::oracle::brute_force;

    #[test]
    fn unchanged_when_nothing_smaller_qualifies() {
        let c = parse_circuit("INPUT(a)\nINPUT(b)\nt = AND(a, b)\no = NOT(t)\nOUTPUT(o)").unwrap();
        let m = c.m();
        let s = shrink(&c, |x| x.m() == m);
        assert_eq!(s, c);
    }

    #[test]
    fn shrinks_to_contradiction_core() {
        let text = "\
INPUT(a)
INPUT(b)
INPUT(c)
na = NOT(a)
core = AND(a, na)
p = OR(b, c)
q = AND(core, p)
r = OR(q, core)
OUTPUT(r)
";
        let c = parse_circuit(text).unwrap();
        let pred = |x: &Circuit| brute_force(x).unwrap().sat_count == 0;
        assert!(pred(&c));
        let s = shrink(&c, pred);
        assert!(pred(&s));
        assert_eq!(s.m(), 2);
        assert_eq!(s.n(), 1);
        assert_eq!(shrink(&s, pred), s);
    }
}
