//! Shared randomness: uniform fixed-point values and approximate Gaussians.

use rand::RngCore;

use super::compare::xor;
use crate::error::Result;
use crate::ring::RingValue;
use crate::rss::Share;
use crate::runtime::Party;

/// Each party draws `count` private random bits from its named local stream.
/// Bits are taken from the top of successive 64-bit outputs.
pub fn local_bits(p: &mut Party, stream: &str, count: usize) -> Vec<RingValue> {
    let rng = p.local_stream(stream);
    (0..count).map(|_| RingValue(rng.next_u64() >> 63)).collect()
}

/// `n` shared uniform values on the `2^-f` grid of `[0, 1)`.
///
/// Every party contributes `f` private bits per sample; the shared bit is
/// the XOR of the three contributions, so it is uniform as long as one
/// party is honest. Bit `j` of a sample carries weight `2^j`.
pub fn rand_uniform01(p: &mut Party, stream: &str, n: usize) -> Result<Vec<Share>> {
    let f = p.fixed().frac_bits() as usize;
    let m = n * f;
    p.count_call("π_GR-RANDOM", n);
    let mine = local_bits(p, stream, m);
    let [b1, b2, b3] = p.input_all(&mine, [m; 3])?;
    let t = xor(p, &b1, &b2)?;
    let bits = xor(p, &t, &b3)?;
    Ok((0..n)
        .map(|s| (0..f).map(|j| bits[s * f + j].shl(j as u32)).sum())
        .collect())
}

/// Sums groups of twelve uniforms and subtracts 6.
pub(crate) fn irwin_hall(p: &Party, uniforms: &[Share]) -> Vec<Share> {
    let six = p.fixed().one().0.wrapping_mul(6);
    uniforms
        .chunks_exact(12)
        .map(|c| c.iter().copied().sum::<Share>().add_public(p.id(), -RingValue(six)))
        .collect()
}

/// `n` approximate standard normal samples at scale `f` (Irwin-Hall), with
/// support `[-6, 6]`.
pub fn gauss01(p: &mut Party, stream: &str, n: usize) -> Result<Vec<Share>> {
    p.count_call("π_GAUSS", n);
    let u = rand_uniform01(p, stream, 12 * n)?;
    Ok(irwin_hall(p, &u))
}
