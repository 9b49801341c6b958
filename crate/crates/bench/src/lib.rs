//! Circuit families shared by the criterion benches.

use csat_core::{chain, generate, Circuit, CircuitClass, GenConfig};

/// Chain circuits at the given sizes, fixed seed.
pub fn chains(sizes: &[usize]) -> Vec<Circuit> {
    sizes.iter().map(|&m| chain(m, 0xC5A7)).collect()
}

/// Random DAGs of one class, `count` seeds.
pub fn dags(class: CircuitClass, n: usize, m: usize, count: u64) -> Vec<Circuit> {
    (0..count)
        .map(|seed| generate(&GenConfig::new(class, n, m, seed)).expect("feasible bench config"))
        .collect()
}
