//! Shared fixtures for the kernel benchmarks.

use divsparse_core::simulator::{generate_instance, Instance};

/// Problem points the bound benchmarks sweep over: (κ, linear SNR, J, α).
pub const BOUND_POINTS: [(f64, f64, u32, f64); 3] = [(1e-4, 1e4, 1, 0.1), (1e-4, 1e4, 16, 0.1), (1e-2, 1e2, 4, 0.05)];

/// A matched-filter sized instance with `n` columns, κ = 0.05 and r = 1/2.
pub fn instance(n: usize, diversity: usize, seed: u64) -> Instance {
    let k = (n / 20).max(1);
    generate_instance(n, k, diversity, n / 2, 100.0, seed).expect("valid instance parameters")
}
