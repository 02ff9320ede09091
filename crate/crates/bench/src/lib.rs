//! Workloads shared by the benchmarks.

use corrspec_core::factor_model::{sample_params, simulate_returns};
use corrspec_core::{correlation_matrix, normalize, CorrMatrix, NormalizedReturns};

/// Ten-sector simulated market at the usual desk scale (`N = 200`).
pub fn market(t_len: usize, seed: u64) -> NormalizedReturns {
    let p = sample_params(&[20; 10], 0.5, 0.6, 0.05, seed).expect("feasible parameters");
    normalize(&simulate_returns(&p, t_len, seed).expect("valid length")).expect("nonzero variance")
}

pub fn market_correlation(t_len: usize, seed: u64) -> CorrMatrix {
    correlation_matrix(&market(t_len, seed))
}
