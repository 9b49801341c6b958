//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csat_cli::bench::run_bench;
use csat_cli::fuzz::{exhibits, load_counterexample, run_fuzz, FuzzConfig, FuzzReport};
use csat_core::{
    generate, parse_circuit, preprocess, probe_gate, solve, Circuit, CircuitClass, DecisionPolicy,
    GateKind, GenConfig, MarkKind, PreprocessOutcome, SolveOutcome, TableError, Tables, TraceEvent,
    Var,
};

const FUZZ_SEED: u64 = 0x5EED_2024;

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn circuit(name: &str) -> Circuit {
    parse_circuit(&fixture(name)).unwrap()
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, t0: Instant) -> Result<(), String> {
    let dt = t0.elapsed();
    check(dt < limit, format!("took {dt:?}, limit {limit:?}"))
}

fn c1_table_fidelity() -> Outcome {
    let t0 = Instant::now();
    for fig in ["sample", "constant_cone"] {
        let got = Tables::new(&circuit(&format!("{fig}.bench"))).dump();
        let want = fixture(&format!("{fig}.dump"));
        check(got == want, format!("{fig} dump differs:\n{got}"))?;
    }
    within(Duration::from_secs(1), t0)?;
    Ok("sample 10 rows, constant_cone 18 rows byte-exact".into())
}

const SAMPLE_TRACE: &str = "\
SET y3=1
DEL 7,8,9
FORCE y1=1 G3 r10
DEL 1
FORCE y2=1 G3 r10
DEL 6
FORCE x3=0 G2 r5
DECIDE x1=1 G1 script
DEL 2
DECIDE x2=0 G1 script
DEL 4
";

fn c2_worked_trace() -> Outcome {
    let t0 = Instant::now();
    let c = circuit("sample.bench");
    let policy = DecisionPolicy::Scripted(vec![(Var::Input(1), true), (Var::Input(2), false)]);
    let r = solve(&c, &policy, false);
    let trace = csat_core::format_trace(&r.trace);
    check(trace == SAMPLE_TRACE, format!("trace differs:\n{trace}"))?;
    let verdict = r.outcome.verdict_line();
    check(verdict == "SAT x1=1 x2=0 x3=0", verdict)?;
    let live = csat_core::solve::replay(&c, &r.trace).ctt().live_row_ids();
    check(live == vec![3, 5, 10], format!("live rows {live:?}"))?;
    within(Duration::from_secs(1), t0)?;
    Ok("trace exact, live rows {3,5,10}".into())
}

fn c3_constant_cone_preprocess() -> Outcome {
    let t0 = Instant::now();
    let c = circuit("constant_cone.bench");
    let (report, _) = preprocess(&c);
    let marks: Vec<_> = report
        .marks
        .iter()
        .map(|m| (m.gate, m.bit, m.kind))
        .collect();
    check(
        marks == vec![(4, false, MarkKind::Contradiction)],
        format!("marks {marks:?}"),
    )?;
    check(
        report.outcome == PreprocessOutcome::Open,
        format!("{:?}", report.outcome),
    )?;
    let r = solve(&c, &DecisionPolicy::Deterministic, true);
    let forced = r.trace.iter().any(|e| {
        matches!(
            e,
            TraceEvent::Force {
                var: Var::Input(1),
                bit: true,
                row: 17,
                ..
            }
        )
    });
    check(forced, "x1=1 not forced from row 17")?;
    let decided_x1 = r.trace.iter().any(|e| {
        matches!(
            e,
            TraceEvent::Decide {
                var: Var::Input(1),
                ..
            }
        )
    });
    check(!decided_x1, "x1 was decided, not forced")?;
    match &r.outcome {
        SolveOutcome::Sat(a) => check(a.get(Var::Input(1)) == Some(true), "x1 != 1")?,
        o => return Err(o.verdict_line()),
    }
    within(Duration::from_secs(1), t0)?;
    Ok("mark G4 y4=0 contradiction; x1=1 forced".into())
}

/// Truth-table lines of a lone gate consistent with a partial assignment.
fn consistent_lines(kind: GateKind, vals: &[Option<bool>]) -> u8 {
    let fits = |v: Option<bool>, b: bool| v.is_none_or(|x| x == b);
    match kind {
        GateKind::Not => [false, true]
            .iter()
            .filter(|&&a| fits(vals[0], a) && fits(vals[1], !a))
            .count() as u8,
        _ => {
            let mut k = 0;
            for a in [false, true] {
                for b in [false, true] {
                    let y = if kind == GateKind::And {
                        a && b
                    } else {
                        a || b
                    };
                    if fits(vals[0], a) && fits(vals[1], b) && fits(vals[2], y) {
                        k += 1;
                    }
                }
            }
            k
        }
    }
}

/// Degree given by the classic case list, for the patterns it describes.
fn listed_degree(kind: GateKind, vals: &[Option<bool>]) -> Option<u8> {
    if kind == GateKind::Not {
        return match (vals[0], vals[1]) {
            (None, None) => None,
            (Some(a), Some(y)) if a == y => Some(0),
            (Some(_), Some(_)) => None,
            _ => Some(1),
        };
    }
    // `dom` is the controlling input value: 0 for AND, 1 for OR
    let dom = kind == GateKind::Or;
    let ins: Vec<bool> = vals[..2].iter().flatten().copied().collect();
    match (vals[2], ins.as_slice()) {
        (None, []) => Some(4),
        (Some(y), []) if y == dom => Some(3),
        (Some(_), []) => Some(1),
        (Some(y), [a]) if y == dom && *a == dom => Some(2),
        (None, [a]) if *a == dom => Some(2),
        (Some(y), [a]) if y == dom && *a != dom => Some(1),
        (Some(y), [a]) if y != dom && *a == dom => Some(0),
        _ => None,
    }
}

fn c4_degree_classification() -> Outcome {
    let t0 = Instant::now();
    let mut checked = 0;
    let mut listed = 0;
    for kind in [GateKind::And, GateKind::Or, GateKind::Not] {
        let arity = kind.arity();
        let c = Circuit::new(
            arity,
            vec![(kind, (1..=arity as u32).map(Var::Input).collect())],
        )
        .unwrap();
        let vars: Vec<Var> = (1..=arity as u32)
            .map(Var::Input)
            .chain([Var::Gate(1)])
            .collect();
        let patterns = 3usize.pow(vars.len() as u32);
        for p in 0..patterns {
            let vals: Vec<Option<bool>> = (0..vars.len())
                .map(|i| match p / 3usize.pow(i as u32) % 3 {
                    0 => None,
                    1 => Some(false),
                    _ => Some(true),
                })
                .collect();
            let mut t = Tables::new(&c);
            for (v, b) in vars.iter().zip(&vals) {
                if let Some(b) = b {
                    match t.assign_value(*v, *b) {
                        Ok(_) | Err(TableError::ContradictionReached { .. }) => {}
                        Err(e) => return Err(format!("{kind:?} {vals:?}: {e}")),
                    }
                }
            }
            let got = t.degree(1);
            let want = consistent_lines(kind, &vals);
            check(
                got == want,
                format!("{kind:?} {vals:?}: degree {got}, expected {want}"),
            )?;
            if let Some(d) = listed_degree(kind, &vals) {
                check(
                    got == d,
                    format!("{kind:?} {vals:?}: degree {got}, listed {d}"),
                )?;
                listed += 1;
            }
            checked += 1;
        }
    }
    check(checked == 27 + 27 + 9, format!("{checked} patterns"))?;
    within(Duration::from_secs(1), t0)?;
    Ok(format!("{checked} patterns, {listed} listed cases"))
}

/// Instances per (class, size) cell; 4 classes x 4 sizes x 625 = 10,000.
const SOUNDNESS_SIZES: [(usize, usize); 4] = [(4, 12), (6, 20), (8, 30), (10, 40)];
const PER_CELL: usize = 625;

fn soundness_reports() -> Vec<FuzzReport> {
    let mut reports = Vec::new();
    for (i, class) in CircuitClass::ALL.into_iter().enumerate() {
        for (k, &(n, m)) in SOUNDNESS_SIZES.iter().enumerate() {
            let seed = FUZZ_SEED + (i * SOUNDNESS_SIZES.len() + k) as u64;
            let mut cfg = FuzzConfig::new(class, n, m, PER_CELL, seed);
            cfg.max_counterexamples = 0;
            reports.push(run_fuzz(&cfg).unwrap());
        }
    }
    reports
}

fn c5_soundness(reports: &[FuzzReport], elapsed: Duration) -> Outcome {
    let circuits: usize = reports.iter().map(|r| r.instances).sum();
    let runs: usize = reports.iter().map(|r| r.runs).sum();
    let bad: usize = reports.iter().map(|r| r.disagreement).sum();
    let fail: usize = reports.iter().map(|r| r.failure_but_oracle_sat).sum();
    check(circuits >= 10_000, format!("only {circuits} circuits"))?;
    check(bad == 0, format!("{bad} disagreements"))?;
    Ok(format!(
        "{circuits} circuits, {runs} solves in {:.1}s, 0 disagreements ({fail} heuristic failures on SAT inputs)",
        elapsed.as_secs_f64()
    ))
}

fn c6_claim_measurement() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for class in [CircuitClass::Monotone, CircuitClass::Tree] {
        let mut cfg = FuzzConfig::new(class, 8, 24, 1000, FUZZ_SEED);
        cfg.out_dir = Some(dir.path().to_path_buf());
        cfg.max_counterexamples = 5;
        let r = run_fuzz(&cfg).unwrap();
        check(
            r.disagreement == 0,
            format!("{class}: {} disagreements", r.disagreement),
        )?;
        if r.failure_but_oracle_sat > 0 {
            check(
                !r.counterexamples.is_empty(),
                format!("{class}: failures without counterexample"),
            )?;
        }
        for cx in &r.counterexamples {
            let path = cx.path.as_ref().ok_or("counterexample not written")?;
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let (kind, policy, c) = load_counterexample(&text)?;
            check(
                exhibits(kind, &policy, &c),
                format!("{} does not reproduce", path.display()),
            )?;
        }
        lines.push(format!(
            "{class} failure rate {:.2}% ({}/{} runs, det {} rand {}), {} counterexamples reproduce",
            100.0 * r.failure_rate(),
            r.failure_but_oracle_sat,
            r.runs,
            r.failure_det,
            r.failure_rand,
            r.counterexamples.len()
        ));
    }
    Ok(lines.join("; "))
}

fn c7_mark_soundness(reports: &[FuzzReport]) -> Outcome {
    let marks: usize = reports.iter().map(|r| r.marks_checked).sum();
    let bad: usize = reports.iter().map(|r| r.mark_violations).sum();
    check(marks > 0, "no marks produced")?;
    check(bad == 0, format!("{bad} of {marks} marks refuted"))?;
    Ok(format!("{marks} marks confirmed constant"))
}

fn c8_size_and_complexity() -> Outcome {
    let mut built = 0;
    for class in CircuitClass::ALL {
        for seed in 0..250u64 {
            let c = generate(&GenConfig::new(
                class,
                2 + seed as usize % 9,
                10 + seed as usize % 31,
                seed,
            ))
            .unwrap();
            let t = Tables::new(&c);
            let binary = c.gates().iter().filter(|g| g.kind != GateKind::Not).count();
            let rows = t.ctt().rows().len();
            check(
                rows == 4 * binary + 2 * (c.m() - binary),
                format!("{rows} rows"),
            )?;
            check(rows <= 4 * c.m(), format!("{rows} rows > 4m"))?;
            check(t.ctt().columns() == c.n() + c.m(), "column count")?;
            built += 1;
        }
    }
    let report = run_bench(&[100, 1_000, 10_000], 5, 0xC5A7);
    for row in &report.rows {
        check(
            row.deletions <= 4 * row.m,
            format!("m={} deletions {}", row.m, row.deletions),
        )?;
    }
    let big = report.rows.last().unwrap();
    check(
        big.time_ms < 10_000.0,
        format!("m=10^4 took {:.0} ms", big.time_ms),
    )?;
    let slope = report.slope.ok_or("no slope")?;
    check(slope <= 2.5, format!("slope {slope:.2}"))?;
    Ok(format!(
        "{built} tables within bounds; slope {slope:.2}; m=10^4 in {:.1} ms",
        big.time_ms
    ))
}

fn c9_snapshot_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let circuits: Vec<Circuit> = (0..20u64)
        .map(|s| {
            let class = CircuitClass::ALL[s as usize % 4];
            generate(&GenConfig::new(class, 6, 20, s)).unwrap()
        })
        .collect();
    for cycle in 0..1000 {
        let c = &circuits[cycle % circuits.len()];
        let mut t = Tables::new(c);
        // start from a constrained state half of the time
        if rng.gen_bool(0.5) {
            let _ = t.assign_value(c.output(), true);
        }
        let before = t.dump();
        let snap = t.take_snapshot();
        for _ in 0..rng.gen_range(1..6) {
            if rng.gen_bool(0.5) {
                let k = rng.gen_range(1..=c.m() as u32);
                if t.value(Var::Gate(k)).is_none() {
                    probe_gate(&mut t, k, rng.gen_bool(0.5));
                }
            } else {
                let v = if rng.gen_bool(0.5) {
                    Var::Input(rng.gen_range(1..=c.n() as u32))
                } else {
                    Var::Gate(rng.gen_range(1..=c.m() as u32))
                };
                let _ = t.assign_value(v, rng.gen_bool(0.5));
            }
        }
        t.restore(snap).map_err(|e| e.to_string())?;
        check(t.dump() == before, format!("cycle {cycle}: dump changed"))?;
        t.check_coherence()?;
    }
    Ok("1000 cycles byte-identical".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let out = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS criterion {n} {name} [{secs:.2}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n} {name} [{secs:.2}s]: {msg}");
            }
        }
    };

    report(1, "table fidelity", &c1_table_fidelity);
    report(2, "worked-example trace", &c2_worked_trace);
    report(
        3,
        "constant-cone preprocessing",
        &c3_constant_cone_preprocess,
    );
    report(4, "degree classification", &c4_degree_classification);
    let t0 = Instant::now();
    let reports = soundness_reports();
    let elapsed = t0.elapsed();
    report(5, "soundness", &|| c5_soundness(&reports, elapsed));
    report(6, "class claim measurement", &c6_claim_measurement);
    report(7, "mark soundness", &|| c7_mark_soundness(&reports));
    report(8, "size and complexity", &c8_size_and_complexity);
    report(9, "snapshot exactness", &c9_snapshot_exactness);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
