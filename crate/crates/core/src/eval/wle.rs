//! Workload error between the measured marginals of two binned datasets.

use crate::error::{Error, Result};
use crate::marginals::{count_marginals_batch, measurement_count};
use crate::primitives::{abs, div};
use crate::ring::RingValue;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{Party, Protocol};

/// `(1/|Q|) sum_q sum_b |mu_q^b(D)/N - mu_q^b(D')/N'|` at the session
/// precision, rounded down. Each cell difference is formed as
/// `c N' - c' N` so only the final division rounds.
pub fn wle(p: &mut Party, real: &ShareMatrix, synth: &ShareMatrix) -> Result<Share> {
    p.scoped(Protocol::Wle, |p| {
        let (n, n_hat) = (real.rows as u64, synth.rows as u64);
        if n == 0 || n_hat == 0 {
            return Err(Error::Parameter("workload error of an empty dataset".into()));
        }
        let f = p.fixed().frac_bits();
        let q = measurement_count(real.genes()) as u64;
        let m = count_marginals_batch(p, &[real, synth])?;
        let (a, b) = (m[0].flatten(), m[1].flatten());
        let diff: Vec<Share> = a
            .iter()
            .zip(&b)
            .map(|(&c, &c_hat)| c.mul_public(RingValue(n_hat)) - c_hat.mul_public(RingValue(n)))
            .collect();
        let total: Share = abs(p, &diff)?.into_iter().sum();
        let den = Share::public(p.id(), RingValue((n * n_hat * q) << f));
        // Each measurement contributes at most 2, so the quotient is below 4.
        Ok(div(p, &[total], &[den], 2, f)?[0])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::run3;
    use crate::runtime::PartyId;

    fn input(p: &mut Party, rows: &[Vec<u64>], cols: usize) -> Result<ShareMatrix> {
        let vals: Vec<RingValue> = rows.iter().flatten().map(|&v| RingValue(v)).collect();
        let cells = p.input_from(PartyId::ALL[0], &vals, vals.len())?;
        Ok(ShareMatrix::new(rows.len(), cols, cells))
    }

    #[test]
    fn label_only_toy_and_identity() {
        let out = run3(101, |p| {
            let d = input(p, &[vec![0], vec![0]], 1)?;
            let dh = input(p, &[vec![0], vec![1]], 1)?;
            let e = wle(p, &d, &dh)?;
            let z = wle(p, &d, &d)?;
            p.open(&[e, z])
        })
        .unwrap();
        assert_eq!(out[0][0], RingValue(1 << 16));
        assert_eq!(out[0][1], RingValue::ZERO);
    }

    #[test]
    fn symmetric_for_equal_sizes() {
        let a = vec![vec![0, 1, 2], vec![3, 3, 4], vec![1, 0, 0]];
        let b = vec![vec![2, 1, 2], vec![0, 3, 1], vec![1, 2, 0]];
        let out = run3(102, |p| {
            let x = input(p, &a, 3)?;
            let y = input(p, &b, 3)?;
            let e1 = wle(p, &x, &y)?;
            let e2 = wle(p, &y, &x)?;
            p.open(&[e1, e2])
        })
        .unwrap();
        assert_eq!(out[0][0], out[0][1]);
        assert!(out[0][0].0 > 0);
    }
}
