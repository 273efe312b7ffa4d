//! Replaying the servers' noise in the clear from their private seeds.

use mpcsynth_core::local::party_private_seed;
use mpcsynth_core::runtime::{PartyId, Seed};
use rand::RngCore;

/// Shared uniform bits of stream `name`: the XOR of the three servers'
/// contributions.
pub fn replay_bits(master: u64, name: &str, count: usize) -> Vec<u64> {
    let mut rngs: Vec<_> = PartyId::ALL
        .iter()
        .map(|&id| party_private_seed(Seed::from_u64(master), id).derive("local").derive(name).rng())
        .collect();
    let mut streams: Vec<Vec<u64>> =
        rngs.iter_mut().map(|r| (0..count).map(|_| r.next_u64() >> 63).collect()).collect();
    let c = streams.pop().unwrap();
    let b = streams.pop().unwrap();
    let a = streams.pop().unwrap();
    (0..count).map(|i| a[i] ^ b[i] ^ c[i]).collect()
}

/// `n` Irwin-Hall samples at `f` fractional bits.
pub fn replay_gauss(master: u64, name: &str, n: usize, f: u32) -> Vec<i64> {
    let fu = f as usize;
    let bits = replay_bits(master, name, 12 * n * fu);
    let uniform: Vec<i64> =
        (0..12 * n).map(|s| (0..fu).map(|j| (bits[s * fu + j] as i64) << j).sum()).collect();
    uniform.chunks_exact(12).map(|c| c.iter().sum::<i64>() - (6i64 << f)).collect()
}

/// Noisy cells at `2f` fractional bits: `count 2^(2f) + round(sigma 2^f) gamma`.
pub fn noisy_cells(counts: &[u64], sigma: f64, gamma: &[i64], f: u32) -> Vec<i64> {
    let scale = (sigma * (1u64 << f) as f64).round() as i64;
    counts.iter().zip(gamma).map(|(&c, &g)| ((c as i64) << (2 * f)) + scale * g).collect()
}
