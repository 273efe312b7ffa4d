//! Comparison-family primitives on shared ring values.
//!
//! The sign bit of `x = (x1 + x2) + x3` is computed with a carry circuit:
//! S1 knows `A = x1 + x2` and inputs its bits, while S2 and S3 both know
//! `B = x3` and share its bits without communication. A parallel-prefix
//! carry over the low 63 bit positions then yields `msb = A63 ^ B63 ^ c63`.

use crate::error::Result;
use crate::ring::RingValue;
use crate::rss::Share;
use crate::runtime::{Party, PartyId};

/// `x ^ y` for shared bits.
pub fn xor(p: &mut Party, x: &[Share], y: &[Share]) -> Result<Vec<Share>> {
    let xy = p.mul(x, y)?;
    Ok(x.iter().zip(y).zip(xy).map(|((&x, &y), xy)| x + y - xy.shl(1)).collect())
}

/// `x & y` for shared bits.
pub fn and(p: &mut Party, x: &[Share], y: &[Share]) -> Result<Vec<Share>> {
    p.mul(x, y)
}

/// `1 - x` for shared bits.
pub fn not(p: &Party, x: &[Share]) -> Vec<Share> {
    let one = Share::public(p.id(), RingValue::ONE);
    x.iter().map(|&x| one - x).collect()
}

/// Oblivious selection `c ? x : y` for a shared bit `c`.
pub fn select(p: &mut Party, c: &[Share], x: &[Share], y: &[Share]) -> Result<Vec<Share>> {
    let diff: Vec<Share> = x.iter().zip(y).map(|(&x, &y)| x - y).collect();
    let d = p.mul(c, &diff)?;
    Ok(y.iter().zip(d).map(|(&y, d)| y + d).collect())
}

/// Sign bit of each value: 1 iff the signed interpretation is negative.
pub fn msb(p: &mut Party, x: &[Share]) -> Result<Vec<Share>> {
    let n = x.len();
    p.count_call("π_MSB", n);
    let me = p.id();
    let [s1, s2, s3] = PartyId::ALL;

    // Bits of A = x1 + x2, input by S1; position-major layout [bit][elem].
    let mut a_bits = Vec::new();
    if me == s1 {
        a_bits.reserve(64 * n);
        for i in 0..64 {
            for s in x {
                a_bits.push(RingValue((s.a + s.b).bit(i)));
            }
        }
    }
    let a_sh = p.input_from(s1, &a_bits, 64 * n)?;

    // Bits of B = x3 live on component 3, held by S2 (as b) and S3 (as a).
    let mut b_sh = Vec::with_capacity(64 * n);
    for i in 0..64 {
        for s in x {
            b_sh.push(if me == s2 {
                Share::new(RingValue::ZERO, RingValue(s.b.bit(i)))
            } else if me == s3 {
                Share::new(RingValue(s.a.bit(i)), RingValue::ZERO)
            } else {
                Share::ZERO
            });
        }
    }

    let g = p.mul(&a_sh, &b_sh)?;
    let prop: Vec<Share> = (0..64 * n).map(|k| a_sh[k] + b_sh[k] - g[k].shl(1)).collect();

    // Carry into position 63 = generate signal of the span [0, 63).
    let mut gs: Vec<Vec<Share>> = (0..63).map(|i| g[i * n..(i + 1) * n].to_vec()).collect();
    let mut ps: Vec<Vec<Share>> = (0..63).map(|i| prop[i * n..(i + 1) * n].to_vec()).collect();
    while gs.len() > 1 {
        let pairs = gs.len() / 2;
        // Combine (lo, hi) = (2j, 2j+1): G = G_hi + P_hi G_lo, P = P_hi P_lo.
        let mut left = Vec::with_capacity(2 * pairs * n);
        let mut right = Vec::with_capacity(2 * pairs * n);
        for j in 0..pairs {
            left.extend_from_slice(&ps[2 * j + 1]);
            right.extend_from_slice(&gs[2 * j]);
        }
        for j in 0..pairs {
            left.extend_from_slice(&ps[2 * j + 1]);
            right.extend_from_slice(&ps[2 * j]);
        }
        let prod = p.mul(&left, &right)?;
        let mut ng = Vec::with_capacity(pairs + 1);
        let mut np = Vec::with_capacity(pairs + 1);
        for j in 0..pairs {
            let pg = &prod[j * n..(j + 1) * n];
            let pp = &prod[(pairs + j) * n..(pairs + j + 1) * n];
            ng.push(gs[2 * j + 1].iter().zip(pg).map(|(&g, &t)| g + t).collect());
            np.push(pp.to_vec());
        }
        if gs.len() % 2 == 1 {
            ng.push(gs.pop().unwrap());
            np.push(ps.pop().unwrap());
        }
        gs = ng;
        ps = np;
    }
    let carry = &gs[0];
    xor(p, &prop[63 * n..64 * n], carry)
}

/// `[a < b]` under the signed interpretation.
pub fn lt(p: &mut Party, a: &[Share], b: &[Share]) -> Result<Vec<Share>> {
    p.count_call("π_LT", a.len());
    let d: Vec<Share> = a.iter().zip(b).map(|(&a, &b)| a - b).collect();
    msb(p, &d)
}

/// `[x < c]` for a public constant `c`.
pub fn lt_public(p: &mut Party, x: &[Share], c: RingValue) -> Result<Vec<Share>> {
    let cs = p.constant(c, x.len());
    lt(p, x, &cs)
}

/// `[a == b]`, computed as `1 - [a < b] - [b < a]` in one batched sign test.
pub fn eq(p: &mut Party, a: &[Share], b: &[Share]) -> Result<Vec<Share>> {
    let n = a.len();
    p.count_call("π_EQ", n);
    let mut d: Vec<Share> = a.iter().zip(b).map(|(&a, &b)| a - b).collect();
    d.extend(a.iter().zip(b).map(|(&a, &b)| b - a));
    let s = msb(p, &d)?;
    let one = Share::public(p.id(), RingValue::ONE);
    Ok((0..n).map(|i| one - s[i] - s[n + i]).collect())
}

/// `[x == c]` for a public constant `c`.
pub fn eq_public(p: &mut Party, x: &[Share], c: RingValue) -> Result<Vec<Share>> {
    let cs = p.constant(c, x.len());
    eq(p, x, &cs)
}

/// `|x|` as `x - 2 [x < 0] x`.
pub fn abs(p: &mut Party, x: &[Share]) -> Result<Vec<Share>> {
    p.count_call("π_ABS", x.len());
    let s = msb(p, x)?;
    let sx = p.mul(&s, x)?;
    Ok(x.iter().zip(sx).map(|(&x, sx)| x - sx.shl(1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::run3;
    use crate::ring::FixedPointConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn enc(v: &[f64]) -> Vec<RingValue> {
        let c = FixedPointConfig::default();
        v.iter().map(|&x| c.encode(x).unwrap()).collect()
    }

    fn with_inputs<T: Send>(
        a: &[RingValue],
        b: &[RingValue],
        f: impl Fn(&mut Party, Vec<Share>, Vec<Share>) -> Result<T> + Sync,
    ) -> [T; 3] {
        run3(11, |p| {
            let x = p.input_from(PartyId::ALL[0], a, a.len())?;
            let y = p.input_from(PartyId::ALL[1], b, b.len())?;
            f(p, x, y)
        })
        .unwrap()
    }

    #[test]
    fn lt_examples() {
        let a = enc(&[2.0, 3.0, -1.5, 0.0, -7.0]);
        let b = enc(&[5.0, 3.0, 0.0, -1.5, -7.5]);
        let out = with_inputs(&a, &b, |p, x, y| {
            let z = lt(p, &x, &y)?;
            p.open(&z)
        });
        let bits: Vec<u64> = out[0].iter().map(|v| v.0).collect();
        assert_eq!(bits, vec![1, 0, 1, 0, 0]);
    }

    #[test]
    fn comparisons_match_signed_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let n = 1000;
        let a: Vec<RingValue> = (0..n).map(|_| RingValue::from_i64(rng.gen_range(-(1i64 << 45)..(1i64 << 45)))).collect();
        let mut b: Vec<RingValue> =
            (0..n).map(|_| RingValue::from_i64(rng.gen_range(-(1i64 << 45)..(1i64 << 45)))).collect();
        for i in 0..n / 10 {
            b[i] = a[i];
        }
        let out = with_inputs(&a, &b, |p, x, y| {
            let l = lt(p, &x, &y)?;
            let e = eq(p, &x, &y)?;
            let ab = abs(p, &x)?;
            let neg: Vec<Share> = x.iter().map(|&s| -s).collect();
            let abn = abs(p, &neg)?;
            Ok((p.open(&l)?, p.open(&e)?, p.open(&ab)?, p.open(&abn)?))
        });
        let (l, e, ab, abn) = &out[0];
        for i in 0..n {
            assert_eq!(l[i].0, (a[i].as_i64() < b[i].as_i64()) as u64, "lt {i}");
            assert_eq!(e[i].0, (a[i] == b[i]) as u64, "eq {i}");
            assert_eq!(ab[i].as_i64(), a[i].as_i64().abs(), "abs {i}");
            assert_eq!(ab[i], abn[i]);
        }
    }

    #[test]
    fn equality_and_abs_examples() {
        let a = enc(&[0.0, 5.0, -3.5, 0.0]);
        let out = with_inputs(&a, &[], |p, x, _| {
            let e = eq_public(p, &x, RingValue::ZERO)?;
            let ab = abs(p, &x)?;
            Ok((p.open(&e)?, p.open(&ab)?))
        });
        let c = FixedPointConfig::default();
        assert_eq!(out[0].0.iter().map(|v| v.0).collect::<Vec<_>>(), vec![1, 0, 0, 1]);
        assert_eq!(c.decode(out[0].1[2]), 3.5);
        assert_eq!(out[0].1[0], RingValue::ZERO);
    }

    #[test]
    fn lt_transcript_is_oblivious() {
        let shape = |a: Vec<RingValue>, b: Vec<RingValue>| {
            with_inputs(&a, &b, |p, x, y| {
                let (_, d) = p.run_protocol(crate::Protocol::Eval, |p| lt(p, &x, &y))?;
                Ok(d)
            })
        };
        let one = shape(enc(&[1.0, 2.0, 3.0]), enc(&[3.0, 2.0, 1.0]));
        let two = shape(enc(&[-9.0, 0.0, 100.0]), enc(&[-9.0, 50.0, -4.0]));
        assert_eq!(one, two);
    }
}
