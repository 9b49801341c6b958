use proptest::prelude::*;

use csat_core::preprocess::preprocess_tables;
use csat_core::solve::replay;
use csat_core::{
    brute_force, generate, parse_circuit, preprocess, propagate_degree1, serialize_circuit, solve,
    Circuit, CircuitClass, DecisionPolicy, GateKind, GenConfig, SolveOutcome, Tables, Var,
};

/// Arbitrary topologically ordered circuits, unreachable gates included.
fn raw_circuit() -> impl Strategy<Value = Circuit> {
    (
        1usize..6,
        prop::collection::vec((0u8..3, any::<u32>(), any::<u32>()), 1..14),
    )
        .prop_filter_map("operands must differ", |(n, specs)| {
            let mut gates = Vec::new();
            for (j, (k, a, b)) in specs.into_iter().enumerate() {
                let avail = (n + j) as u32;
                let pick = |r: u32| {
                    let i = r % avail;
                    if (i as usize) < n {
                        Var::Input(i + 1)
                    } else {
                        Var::Gate(i - n as u32 + 1)
                    }
                };
                let (kind, ins) = match k {
                    0 => (GateKind::Not, vec![pick(a)]),
                    1 => (GateKind::And, vec![pick(a), pick(b)]),
                    _ => (GateKind::Or, vec![pick(a), pick(b)]),
                };
                gates.push((kind, ins));
            }
            Circuit::new(n, gates).ok()
        })
}

fn generated_circuit() -> impl Strategy<Value = Circuit> {
    (0usize..4, 2usize..9, 4usize..30, any::<u64>()).prop_map(|(k, n, m, seed)| {
        generate(&GenConfig::new(CircuitClass::ALL[k], n, m.max(n), seed)).unwrap()
    })
}

fn any_circuit() -> impl Strategy<Value = Circuit> {
    prop_oneof![raw_circuit(), generated_circuit()]
}

fn interpret(c: &Circuit, inputs: &[bool], v: Var) -> bool {
    match v {
        Var::Input(i) => inputs[i as usize - 1],
        Var::Gate(j) => {
            let g = c.gate(j);
            let a = interpret(c, inputs, g.inputs[0]);
            match g.kind {
                GateKind::Not => !a,
                GateKind::And => a && interpret(c, inputs, g.inputs[1]),
                GateKind::Or => a || interpret(c, inputs, g.inputs[1]),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn evaluate_matches_interpreter(c in raw_circuit(), bits in any::<u32>()) {
        let inputs: Vec<bool> = (0..c.n()).map(|i| bits >> i & 1 == 1).collect();
        prop_assert_eq!(c.eval(&inputs).unwrap(), interpret(&c, &inputs, c.output()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn netlist_round_trip(c in any_circuit()) {
        let text = serialize_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(serialize_circuit(&back), text);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn solve_is_sound(c in any_circuit(), seed in any::<u64>(), pre in any::<bool>()) {
        let count = brute_force(&c).unwrap().sat_count;
        for policy in [DecisionPolicy::Deterministic, DecisionPolicy::SeededRandom(seed)] {
            match solve(&c, &policy, pre).outcome {
                SolveOutcome::Sat(a) => prop_assert!(c.evaluate(&a).unwrap()),
                SolveOutcome::Unsat => prop_assert_eq!(count, 0),
                SolveOutcome::Tautology => prop_assert_eq!(count, 1 << c.n()),
                SolveOutcome::FailureDetected { .. } => {}
            }
        }
    }

    #[test]
    fn replay_reaches_same_state(c in any_circuit(), seed in any::<u64>()) {
        let r = solve(&c, &DecisionPolicy::SeededRandom(seed), true);
        let t = replay(&c, &r.trace);
        prop_assert_eq!(t.dead_rows(), r.stats.dead_rows);
        if let SolveOutcome::Sat(a) = &r.outcome {
            for i in 1..=c.n() as u32 {
                prop_assert_eq!(t.value(Var::Input(i)), a.get(Var::Input(i)));
            }
        }
    }

    #[test]
    fn solve_is_deterministic(c in any_circuit(), seed in any::<u64>()) {
        for policy in [DecisionPolicy::Deterministic, DecisionPolicy::SeededRandom(seed)] {
            let a = solve(&c, &policy, true);
            let b = solve(&c, &policy, true);
            prop_assert_eq!(a.trace, b.trace);
            prop_assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn oracle_complement_and_witness(c in any_circuit()) {
        let v = brute_force(&c).unwrap();
        let mut gates: Vec<(GateKind, Vec<Var>)> =
            c.gates().iter().map(|g| (g.kind, g.inputs.clone())).collect();
        gates.push((GateKind::Not, vec![c.output()]));
        let neg = brute_force(&Circuit::new(c.n(), gates).unwrap()).unwrap();
        prop_assert_eq!(v.sat_count + neg.sat_count, v.total());
        match v.witness {
            Some(w) => prop_assert!(c.eval(&w).unwrap()),
            None => prop_assert_eq!(v.sat_count, 0),
        }
    }

    /// With every input fixed, degree-1 propagation computes every gate.
    #[test]
    fn propagation_agrees_with_evaluation(c in any_circuit(), bits in any::<u32>()) {
        let inputs: Vec<bool> = (0..c.n()).map(|i| bits >> i & 1 == 1).collect();
        let mut t = Tables::new(&c);
        for (i, &b) in inputs.iter().enumerate() {
            t.assign_value(Var::Input(i as u32 + 1), b).unwrap();
        }
        propagate_degree1(&mut t).unwrap();
        let values = c.eval_gates(&inputs).unwrap();
        for j in 1..=c.m() as u32 {
            prop_assert_eq!(t.value(Var::Gate(j)), Some(values[j as usize - 1]));
            prop_assert_eq!(t.degree(j), 1);
        }
    }

    #[test]
    fn preprocess_is_idempotent(c in any_circuit()) {
        let (first, t) = preprocess(&c);
        let before = t.dump();
        let (second, t2) = preprocess_tables(&c, t);
        prop_assert!(second.marks.is_empty(), "{:?} then {:?}", first.marks, second.marks);
        prop_assert_eq!(t2.dump(), before);
    }

    #[test]
    fn probes_leave_no_trace(c in any_circuit()) {
        let fresh = Tables::new(&c).dump();
        let mut t = Tables::new(&c);
        for k in 1..=c.m() as u32 {
            let s = t.take_snapshot();
            for hyp in [false, true] {
                csat_core::probe_gate(&mut t, k, hyp);
                t.restore(s).unwrap();
            }
        }
        prop_assert_eq!(t.dump(), fresh);
    }

    #[test]
    fn table_dimensions(c in any_circuit()) {
        let t = Tables::new(&c);
        let binary = c.gates().iter().filter(|g| g.kind != GateKind::Not).count();
        prop_assert_eq!(t.ctt().rows().len(), 4 * binary + 2 * (c.m() - binary));
        prop_assert!(t.ctt().rows().len() <= 4 * c.m());
        prop_assert_eq!(t.ctt().columns(), c.n() + c.m());
        t.check_coherence().unwrap();
    }
}
