//! Indicator polynomials over small integer domains.
//!
//! For a domain `{0, .., k-1}`, `I_b(x) = prod_{j != b} (x - j) / prod_{j != b} (b - j)`
//! is 1 at `x = b` and 0 at every other domain point. The numerator is
//! computed with shared prefix and suffix products of the factors `x - j`.
//! The denominator `D_b = ±2^v * odd` is removed without truncation: the
//! result is produced at a chosen precision `s >= v` by multiplying with the
//! public ring element `±2^(s-v) * odd^-1`, which is exact because the
//! numerator is either 0 or exactly `D_b` on the domain.

use crate::error::{Error, Result};
use crate::ring::RingValue;
use crate::rss::Share;
use crate::runtime::Party;

/// `prod_{j != b} (b - j)` for each `b` of a `k`-point domain.
pub fn denominators(k: usize) -> Vec<i64> {
    (0..k as i64).map(|b| (0..k as i64).filter(|&j| j != b).map(|j| b - j).product()).collect()
}

/// Smallest output precision for which the lift is exact.
pub fn min_precision(k: usize) -> u32 {
    denominators(k).iter().map(|d| d.trailing_zeros()).max().unwrap_or(0)
}

/// Public multiplier turning the numerator into `I_b` at precision `s`.
fn lift(d: i64, s: u32) -> RingValue {
    let v = d.trailing_zeros();
    let odd = RingValue::from_i64(d.abs() >> v).inverse_odd().expect("odd part");
    let signed = if d < 0 { -odd } else { odd };
    signed.shl(s - v)
}

/// All `k` indicators of every input value, at precision `s`.
/// Output layout: `out[b][i] = I_b(x[i]) * 2^s`.
pub fn indicators(p: &mut Party, x: &[Share], k: usize, s: u32) -> Result<Vec<Vec<Share>>> {
    if k < 2 {
        return Err(Error::Parameter(format!("indicator domain of size {k}")));
    }
    if s < min_precision(k) || s > 62 {
        return Err(Error::Parameter(format!("precision {s} cannot carry indicators of a {k}-point domain")));
    }
    let n = x.len();
    p.count_call("π_INDICATOR", n);
    let id = p.id();
    // t[j] = x - j
    let t: Vec<Vec<Share>> =
        (0..k).map(|j| x.iter().map(|&v| v.add_public(id, -RingValue(j as u64))).collect()).collect();

    // prefix[b] = prod_{j < b} t_j and suffix[b] = prod_{j >= b} t_j, for
    // b in 1..k. Numerators are P_0 = suffix[1], P_{k-1} = prefix[k-1] and
    // P_b = prefix[b] * suffix[b+1] in between. Each round computes every
    // product whose operands are ready.
    let mut prefix: Vec<Option<Vec<Share>>> = vec![None; k + 1];
    let mut suffix: Vec<Option<Vec<Share>>> = vec![None; k + 1];
    let mut inner: Vec<Option<Vec<Share>>> = vec![None; k];
    prefix[1] = Some(t[0].clone());
    suffix[k - 1] = Some(t[k - 1].clone());
    enum Slot {
        Prefix(usize),
        Suffix(usize),
        Inner(usize),
    }
    loop {
        let mut jobs: Vec<(Slot, &[Share], &[Share])> = Vec::new();
        if let Some(b) = (2..k).find(|&b| prefix[b].is_none()) {
            if let Some(prev) = &prefix[b - 1] {
                jobs.push((Slot::Prefix(b), prev, &t[b - 1]));
            }
        }
        if let Some(b) = (1..k - 1).rev().find(|&b| suffix[b].is_none()) {
            if let Some(next) = &suffix[b + 1] {
                jobs.push((Slot::Suffix(b), next, &t[b]));
            }
        }
        for b in 1..k - 1 {
            if let (None, Some(l), Some(r)) = (&inner[b], &prefix[b], &suffix[b + 1]) {
                jobs.push((Slot::Inner(b), l, r));
            }
        }
        if jobs.is_empty() {
            break;
        }
        let lhs: Vec<Share> = jobs.iter().flat_map(|j| j.1.iter().copied()).collect();
        let rhs: Vec<Share> = jobs.iter().flat_map(|j| j.2.iter().copied()).collect();
        let slots: Vec<Slot> = jobs.into_iter().map(|j| j.0).collect();
        let prod = p.mul(&lhs, &rhs)?;
        for (i, slot) in slots.into_iter().enumerate() {
            let v = Some(prod[i * n..(i + 1) * n].to_vec());
            match slot {
                Slot::Prefix(b) => prefix[b] = v,
                Slot::Suffix(b) => suffix[b] = v,
                Slot::Inner(b) => inner[b] = v,
            }
        }
    }

    let dens = denominators(k);
    let mut out = Vec::with_capacity(k);
    for b in 0..k {
        let num: &[Share] = if b == 0 {
            suffix[1].as_ref().unwrap()
        } else if b == k - 1 {
            prefix[k - 1].as_ref().unwrap()
        } else {
            inner[b].as_ref().unwrap()
        };
        let m = lift(dens[b], s);
        out.push(num.iter().map(|v| v.mul_public(m)).collect());
    }
    Ok(out)
}

/// Indicators of the four gene bins.
pub fn indicator4(p: &mut Party, x: &[Share], s: u32) -> Result<Vec<Vec<Share>>> {
    indicators(p, x, 4, s)
}

/// Indicators of the five labels.
pub fn indicator5(p: &mut Party, y: &[Share], s: u32) -> Result<Vec<Vec<Share>>> {
    indicators(p, y, 5, s)
}
