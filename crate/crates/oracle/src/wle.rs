//! Workload error in the clear.

use mpcsynth_core::marginals::measurement_count;

use crate::marginals::brute_marginals;

/// Fixed-point workload error at `f` bits, rounded down.
pub fn clear_wle(real: &[Vec<u8>], synth: &[Vec<u8>], genes: usize, f: u32) -> i64 {
    let (n, n_hat) = (real.len() as u128, synth.len() as u128);
    let a = brute_marginals(real, genes).flatten();
    let b = brute_marginals(synth, genes).flatten();
    let s: u128 = a.iter().zip(&b).map(|(&c, &c_hat)| (c as u128 * n_hat).abs_diff(c_hat as u128 * n)).sum();
    ((s << f) / (n * n_hat * measurement_count(genes) as u128)) as i64
}

/// Workload error in floating point.
pub fn float_wle(real: &[Vec<u8>], synth: &[Vec<u8>], genes: usize) -> f64 {
    let (n, n_hat) = (real.len() as f64, synth.len() as f64);
    let a = brute_marginals(real, genes).flatten();
    let b = brute_marginals(synth, genes).flatten();
    let s: f64 = a.iter().zip(&b).map(|(&c, &c_hat)| (c as f64 / n - c_hat as f64 / n_hat).abs()).sum();
    s / measurement_count(genes) as f64
}
