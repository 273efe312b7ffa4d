//! Secure division.
//!
//! [`div`] is exact restoring long division: the quotient is the real
//! quotient truncated toward zero, bit for bit what integer division in the
//! clear produces. [`reciprocal`] is a Newton-Raphson approximation used
//! where an approximate `1/x` on a known interval suffices.

use super::compare::{lt, msb, not};
use crate::error::{Error, Result};
use crate::ring::RingValue;
use crate::rss::Share;
use crate::runtime::Party;

/// `trunc(num * 2^frac_bits / den)` for `den > 0`.
///
/// `int_bits` is a public bound on the integer part: `|num| / den < 2^int_bits`.
/// Requires `den * 2^int_bits < 2^62`. The number of iterations depends only
/// on the public bit counts.
pub fn div(p: &mut Party, num: &[Share], den: &[Share], int_bits: u32, frac_bits: u32) -> Result<Vec<Share>> {
    assert_eq!(num.len(), den.len());
    if int_bits + frac_bits > 62 {
        return Err(Error::Parameter(format!("quotient of {int_bits}+{frac_bits} bits exceeds the ring")));
    }
    let n = num.len();
    p.count_call("π_DIV", n);

    let sign = msb(p, num)?;
    let sn = p.mul(&sign, num)?;
    let mut rem: Vec<Share> = num.iter().zip(&sn).map(|(&x, &s)| x - s.shl(1)).collect();
    let mut q = vec![Share::ZERO; n];

    // Integer part: subtract den * 2^k where it fits.
    for k in (0..int_bits).rev() {
        let shifted: Vec<Share> = den.iter().map(|d| d.shl(k)).collect();
        let below = lt(p, &rem, &shifted)?;
        let take = not(p, &below);
        let sub = p.mul(&take, &shifted)?;
        for i in 0..n {
            rem[i] -= sub[i];
            q[i] += take[i].shl(k);
        }
    }
    // Fractional part: the remainder stays below den, so doubling it is safe.
    for _ in 0..frac_bits {
        for i in 0..n {
            rem[i] = rem[i].shl(1);
            q[i] = q[i].shl(1);
        }
        let below = lt(p, &rem, den)?;
        let take = not(p, &below);
        let sub = p.mul(&take, den)?;
        for i in 0..n {
            rem[i] -= sub[i];
            q[i] += take[i];
        }
    }

    let sq = p.mul(&sign, &q)?;
    Ok(q.iter().zip(sq).map(|(&q, sq)| q - sq.shl(1)).collect())
}

/// Fixed-point `a / b` with both operands and the result at the session
/// precision.
pub fn div_fixed(p: &mut Party, a: &[Share], b: &[Share], int_bits: u32) -> Result<Vec<Share>> {
    let f = p.fixed().frac_bits();
    div(p, a, b, int_bits, f)
}

/// Approximate `1/x` for fixed-point `x` in `[0.9, 5.2]`: linear initial
/// guess followed by five Newton steps `y <- y (2 - x y)`.
pub fn reciprocal(p: &mut Party, x: &[Share]) -> Result<Vec<Share>> {
    p.count_call("π_RECIP", x.len());
    let c = p.fixed();
    let id = p.id();
    let c0 = c.encode(0.87249782)?;
    let c1 = c.encode(0.1430221)?;
    let two = c.encode(2.0)?;
    let t = x.iter().map(|s| s.mul_public(c1)).collect::<Vec<_>>();
    let t = p.trunc(&t, c.frac_bits())?;
    let mut y: Vec<Share> = t.into_iter().map(|t| Share::public(id, c0) - t).collect();
    for _ in 0..5 {
        let xy = p.mul_fixed(x, &y)?;
        let e: Vec<Share> = xy.into_iter().map(|v| Share::public(id, two) - v).collect();
        y = p.mul_fixed(&y, &e)?;
    }
    Ok(y)
}

/// Clear counterpart of [`div`]: integer division truncating toward zero.
pub fn div_clear(num: RingValue, den: RingValue, frac_bits: u32) -> RingValue {
    let n = num.as_i64() as i128;
    let d = den.as_i64() as i128;
    RingValue::from_i64(((n << frac_bits) / d) as i64)
}
