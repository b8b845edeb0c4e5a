//! Closed-form expectations used as references for the simulations.

use crate::error::{Error, Result};

/// `H_k = 1 + 1/2 + ... + 1/k`, with `H_0 = 0`.
pub fn harmonic(k: usize) -> f64 {
    // Smallest terms first.
    (1..=k).rev().map(|i| 1.0 / i as f64).sum()
}

/// Expected scheduler steps for a one-way epidemic started by one agent to
/// reach all `n`: `(n-1) H_{n-1}`.
pub fn expected_epidemic_interactions(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidPopulationSize(n));
    }
    Ok((n - 1) as f64 * harmonic(n - 1))
}

pub fn expected_epidemic_parallel_time(n: usize) -> Result<f64> {
    Ok(expected_epidemic_interactions(n)? / n as f64)
}

/// Expected PSE leader counters `(c_q, c_a)` when half the population is
/// infected: `(H_{n/2}, H_{n-1} - H_{n/2-1})`. The second term tends to
/// `ln 2`.
pub fn expected_pse_counters_at_half(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidPopulationSize(n));
    }
    let half = n / 2;
    Ok((harmonic(half), harmonic(n - 1) - harmonic(half - 1)))
}

/// `coeff * log2(n)^2 / log2(log2 n)` parallel time; `None` when the
/// denominator vanishes (`n = 2`).
pub fn le_deadline(n: usize, coeff: f64) -> Option<f64> {
    let log_n = (n as f64).log2();
    let log_log = log_n.log2();
    (log_log > 0.0).then(|| coeff * log_n * log_n / log_log)
}
