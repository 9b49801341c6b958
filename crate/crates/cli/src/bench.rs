//! Scaling measurements on chain circuits.

use std::time::Instant;

use csat_core::{chain, solve, DecisionPolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    /// Median wall time of one solve, preprocessing included.
    pub time_ms: f64,
    /// Rows dead when the solver stops.
    pub deletions: usize,
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log time against log m.
    pub slope: Option<f64>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,n,time_ms,deletions,probes\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.3},{},{}\n",
                r.m, r.n, r.time_ms, r.deletions, r.probes
            ));
        }
        match self.slope {
            Some(k) => s.push_str(&format!("# slope {k:.3}\n")),
            None => s.push_str("# slope n/a\n"),
        }
        s
    }
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`; `None` for fewer
/// than two distinct sizes.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (x.ln(), y.max(1e-9).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub fn run_bench(sizes: &[usize], reps: usize, seed: u64) -> BenchReport {
    let reps = reps.max(1);
    let mut rows = Vec::new();
    for &m in sizes {
        let c = chain(m, seed);
        let mut times = Vec::with_capacity(reps);
        let mut last = None;
        for _ in 0..reps {
            let t0 = Instant::now();
            let r = solve(&c, &DecisionPolicy::Deterministic, true);
            times.push(t0.elapsed().as_secs_f64() * 1e3);
            last = Some(r);
        }
        let r = last.unwrap();
        rows.push(BenchRow {
            m,
            n: c.n(),
            time_ms: median(&mut times),
            deletions: r.stats.dead_rows,
            probes: r.stats.probes,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.time_ms)).collect();
    BenchReport {
        slope: loglog_slope(&pts),
        rows,
    }
}
