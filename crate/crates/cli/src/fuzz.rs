//! Differential fuzzing of the solver against the brute-force oracle.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use csat_core::preprocess::PreprocessReport;
use csat_core::{
    brute_force, brute_force_cone, generate, parse_circuit, preprocess, serialize_circuit, shrink,
    solve, Circuit, CircuitClass, DecisionPolicy, GenConfig, GenError, SolveOutcome,
};

/// What went wrong on one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FindingKind {
    /// `Sat` whose assignment does not evaluate to 1.
    SatNotVerified,
    /// `Unsat` on a satisfiable circuit.
    UnsatButSatisfiable,
    /// `Tautology` on a circuit with a falsifying input.
    TautButFalsifiable,
    /// A pre-processing mark that is not constant on its cone.
    MarkNotConstant,
    /// The heuristic gave up although the circuit is satisfiable.
    FailureButOracleSat,
}

impl FindingKind {
    /// Whether this finding breaks the solver's soundness contract.
    pub fn is_soundness_violation(self) -> bool {
        self != FindingKind::FailureButOracleSat
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingKind::SatNotVerified => "sat_not_verified",
            FindingKind::UnsatButSatisfiable => "unsat_but_satisfiable",
            FindingKind::TautButFalsifiable => "taut_but_falsifiable",
            FindingKind::MarkNotConstant => "mark_not_constant",
            FindingKind::FailureButOracleSat => "failure_but_oracle_sat",
        })
    }
}

impl FromStr for FindingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            FindingKind::SatNotVerified,
            FindingKind::UnsatButSatisfiable,
            FindingKind::TautButFalsifiable,
            FindingKind::MarkNotConstant,
            FindingKind::FailureButOracleSat,
        ]
        .into_iter()
        .find(|k| k.to_string() == s)
        .ok_or_else(|| format!("unknown finding kind `{s}`"))
    }
}

/// `det` or `rand:<seed>` in counterexample headers.
pub fn policy_label(p: &DecisionPolicy) -> String {
    match p {
        DecisionPolicy::Deterministic => "det".into(),
        DecisionPolicy::SeededRandom(s) => format!("rand:{s}"),
        DecisionPolicy::Scripted(_) => "script".into(),
    }
}

pub fn parse_policy_label(s: &str) -> Option<DecisionPolicy> {
    if s == "det" {
        return Some(DecisionPolicy::Deterministic);
    }
    s.strip_prefix("rand:")?
        .parse()
        .ok()
        .map(DecisionPolicy::SeededRandom)
}

/// Outcome bucket of one solve run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    SatAgree,
    UnsatAgree,
    TautAgree,
    FailureOracleSat,
    FailureOracleUnsat,
    Disagree(FindingKind),
}

fn judge(c: &Circuit, outcome: &SolveOutcome, sat_count: u64) -> Verdict {
    let total = 1u64 << c.n();
    match outcome {
        SolveOutcome::Sat(a) => {
            if c.evaluate(a) == Ok(true) && sat_count > 0 {
                Verdict::SatAgree
            } else {
                Verdict::Disagree(FindingKind::SatNotVerified)
            }
        }
        SolveOutcome::Unsat if sat_count == 0 => Verdict::UnsatAgree,
        SolveOutcome::Unsat => Verdict::Disagree(FindingKind::UnsatButSatisfiable),
        SolveOutcome::Tautology if sat_count == total => Verdict::TautAgree,
        SolveOutcome::Tautology => Verdict::Disagree(FindingKind::TautButFalsifiable),
        SolveOutcome::FailureDetected { .. } if sat_count > 0 => Verdict::FailureOracleSat,
        SolveOutcome::FailureDetected { .. } => Verdict::FailureOracleUnsat,
    }
}

/// Marks refuted by enumeration of their cones.
fn bad_marks(c: &Circuit, report: &PreprocessReport) -> usize {
    report
        .marks
        .iter()
        .filter(|mk| {
            let v = brute_force_cone(c, mk.gate).expect("fuzz sizes stay within the oracle limit");
            let constant = if mk.bit { v.total() } else { 0 };
            v.sat_count != constant
        })
        .count()
}

/// Re-checks whether `c` shows the finding `kind` under `policy`.
pub fn exhibits(kind: FindingKind, policy: &DecisionPolicy, c: &Circuit) -> bool {
    if c.n() > csat_core::oracle::MAX_ORACLE_INPUTS {
        return false;
    }
    if kind == FindingKind::MarkNotConstant {
        let (report, _) = preprocess(c);
        return bad_marks(c, &report) > 0;
    }
    let sat_count = brute_force(c).unwrap().sat_count;
    let r = solve(c, policy, true);
    let v = judge(c, &r.outcome, sat_count);
    match kind {
        FindingKind::FailureButOracleSat => v == Verdict::FailureOracleSat,
        k => v == Verdict::Disagree(k),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub class: CircuitClass,
    pub n: usize,
    pub m: usize,
    /// Number of generated circuits; each is solved once per policy.
    pub instances: usize,
    pub seed: u64,
    /// Where counterexamples go; `None` keeps them in memory only.
    pub out_dir: Option<PathBuf>,
    /// Upper bound on shrunk counterexamples per run.
    pub max_counterexamples: usize,
}

impl FuzzConfig {
    pub fn new(class: CircuitClass, n: usize, m: usize, instances: usize, seed: u64) -> FuzzConfig {
        FuzzConfig {
            class,
            n,
            m,
            instances,
            seed,
            out_dir: None,
            max_counterexamples: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: FindingKind,
    pub policy: DecisionPolicy,
    pub class: CircuitClass,
    pub original_gates: usize,
    pub circuit: Circuit,
    pub path: Option<PathBuf>,
}

impl Counterexample {
    /// Netlist with a commented header.
    pub fn to_text(&self) -> String {
        format!(
            "# kind: {}\n# policy: {}\n# class: {}\n# shrunk from {} gates\n{}",
            self.kind,
            policy_label(&self.policy),
            self.class,
            self.original_gates,
            serialize_circuit(&self.circuit)
        )
    }

    pub fn file_name(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        format!("{}.bench", &hex::encode(digest)[..16])
    }
}

/// Reads a counterexample file back: its header and circuit.
pub fn load_counterexample(text: &str) -> Result<(FindingKind, DecisionPolicy, Circuit), String> {
    let header = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("# {key}: ")))
            .ok_or_else(|| format!("missing `{key}` header"))
    };
    let kind: FindingKind = header("kind")?.parse()?;
    let policy = parse_policy_label(header("policy")?).ok_or("bad policy header")?;
    let circuit = parse_circuit(text).map_err(|e| e.to_string())?;
    Ok((kind, policy, circuit))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub class: Option<CircuitClass>,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub instances: usize,
    /// Solve runs: two per instance.
    pub runs: usize,
    pub sat_verified_agree: usize,
    pub unsat_agree: usize,
    pub tautology_agree: usize,
    pub failure_but_oracle_sat: usize,
    pub failure_but_oracle_unsat: usize,
    pub disagreement: usize,
    /// `failure_but_oracle_sat` split by policy: deterministic, random.
    pub failure_det: usize,
    pub failure_rand: usize,
    pub marks_checked: usize,
    pub mark_violations: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl FuzzReport {
    pub fn is_sound(&self) -> bool {
        self.disagreement == 0 && self.mark_violations == 0
    }

    pub fn failure_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.failure_but_oracle_sat as f64 / self.runs as f64
        }
    }

    pub fn to_text(&self) -> String {
        let class = self.class.map_or("-".to_string(), |c| c.to_string());
        let mut s = format!(
            "class={class} n={} m={} seed={} instances={} runs={}\n\
             sat_verified_agree={} unsat_agree={} tautology_agree={}\n\
             failure_but_oracle_sat={} (det={} rand={}) failure_but_oracle_unsat={}\n\
             disagreement={} marks_checked={} mark_violations={}\n",
            self.n,
            self.m,
            self.seed,
            self.instances,
            self.runs,
            self.sat_verified_agree,
            self.unsat_agree,
            self.tautology_agree,
            self.failure_but_oracle_sat,
            self.failure_det,
            self.failure_rand,
            self.failure_but_oracle_unsat,
            self.disagreement,
            self.marks_checked,
            self.mark_violations,
        );
        for cx in &self.counterexamples {
            let loc = cx
                .path
                .as_ref()
                .map_or_else(|| cx.file_name(), |p| p.display().to_string());
            s.push_str(&format!(
                "counterexample {} {} gates={} {}\n",
                cx.kind,
                policy_label(&cx.policy),
                cx.circuit.m(),
                loc
            ));
        }
        s
    }
}

/// SplitMix64 step; derives per-instance seeds from the run seed.
fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct InstanceResult {
    circuit: Circuit,
    verdicts: [(DecisionPolicy, Verdict); 2],
    marks: usize,
    bad_marks: usize,
}

fn run_instance(cfg: &FuzzConfig, i: usize) -> Result<InstanceResult, GenError> {
    let inst_seed = mix(cfg.seed, i as u64);
    let circuit = generate(&GenConfig::new(cfg.class, cfg.n, cfg.m, inst_seed))?;
    let sat_count = brute_force(&circuit)
        .expect("fuzz sizes stay within the oracle limit")
        .sat_count;
    let policies = [
        DecisionPolicy::Deterministic,
        DecisionPolicy::SeededRandom(inst_seed),
    ];
    let mut marks = 0;
    let mut bad = 0;
    let verdicts = policies.map(|p| {
        let r = solve(&circuit, &p, true);
        if let (DecisionPolicy::Deterministic, Some(report)) = (&p, &r.preprocess) {
            marks = report.marks.len();
            bad = bad_marks(&circuit, report);
        }
        let v = judge(&circuit, &r.outcome, sat_count);
        (p, v)
    });
    Ok(InstanceResult {
        circuit,
        verdicts,
        marks,
        bad_marks: bad,
    })
}

/// Claim-covered classes also persist heuristic failures on satisfiable inputs.
fn records_failures(class: CircuitClass) -> bool {
    class != CircuitClass::General
}

#[derive(Debug, thiserror::Error)]
pub enum FuzzError {
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("writing counterexample: {0}")]
    Io(#[from] io::Error),
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport, FuzzError> {
    let results: Vec<InstanceResult> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| run_instance(cfg, i))
        .collect::<Result<_, _>>()?;

    let mut report = FuzzReport {
        class: Some(cfg.class),
        n: cfg.n,
        m: cfg.m,
        seed: cfg.seed,
        instances: cfg.instances,
        ..FuzzReport::default()
    };
    let mut findings: Vec<(FindingKind, DecisionPolicy, &Circuit)> = Vec::new();
    for res in &results {
        report.marks_checked += res.marks;
        report.mark_violations += res.bad_marks;
        if res.bad_marks > 0 {
            findings.push((
                FindingKind::MarkNotConstant,
                DecisionPolicy::Deterministic,
                &res.circuit,
            ));
        }
        for (policy, v) in &res.verdicts {
            report.runs += 1;
            match v {
                Verdict::SatAgree => report.sat_verified_agree += 1,
                Verdict::UnsatAgree => report.unsat_agree += 1,
                Verdict::TautAgree => report.tautology_agree += 1,
                Verdict::FailureOracleUnsat => report.failure_but_oracle_unsat += 1,
                Verdict::FailureOracleSat => {
                    report.failure_but_oracle_sat += 1;
                    match policy {
                        DecisionPolicy::Deterministic => report.failure_det += 1,
                        _ => report.failure_rand += 1,
                    }
                    if records_failures(cfg.class) {
                        findings.push((
                            FindingKind::FailureButOracleSat,
                            policy.clone(),
                            &res.circuit,
                        ));
                    }
                }
                Verdict::Disagree(kind) => {
                    report.disagreement += 1;
                    findings.push((*kind, policy.clone(), &res.circuit));
                }
            }
        }
    }

    // soundness violations first, then heuristic failures
    findings.sort_by_key(|(k, _, _)| !k.is_soundness_violation());
    findings.truncate(cfg.max_counterexamples);
    let mut cxs: Vec<Counterexample> = findings
        .into_par_iter()
        .map(|(kind, policy, c)| {
            let small = shrink(c, |cand| exhibits(kind, &policy, cand));
            Counterexample {
                kind,
                policy,
                class: cfg.class,
                original_gates: c.m(),
                circuit: small,
                path: None,
            }
        })
        .collect();
    cxs.dedup_by_key(|cx| cx.file_name());
    if let Some(dir) = &cfg.out_dir {
        for cx in &mut cxs {
            cx.path = Some(write_counterexample(dir, cx)?);
        }
    }
    report.counterexamples = cxs;
    Ok(report)
}

fn write_counterexample(dir: &Path, cx: &Counterexample) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(cx.file_name());
    fs::write(&path, cx.to_text())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_labels_round_trip() {
        for p in [
            DecisionPolicy::Deterministic,
            DecisionPolicy::SeededRandom(42),
        ] {
            assert_eq!(parse_policy_label(&policy_label(&p)), Some(p));
        }
        assert_eq!(parse_policy_label("rand:x"), None);
    }

    #[test]
    fn counts_add_up() {
        let r = run_fuzz(&FuzzConfig::new(CircuitClass::General, 5, 12, 50, 3)).unwrap();
        let sum = r.sat_verified_agree
            + r.unsat_agree
            + r.tautology_agree
            + r.failure_but_oracle_sat
            + r.failure_but_oracle_unsat
            + r.disagreement;
        assert_eq!(sum, r.runs);
        assert_eq!(r.runs, 100);
        assert!(r.is_sound(), "{}", r.to_text());
    }

    #[test]
    fn deterministic_reports() {
        let cfg = FuzzConfig::new(CircuitClass::NotOnUnbranched, 6, 16, 40, 11);
        assert_eq!(
            run_fuzz(&cfg).unwrap().to_text(),
            run_fuzz(&cfg).unwrap().to_text()
        );
    }
}
