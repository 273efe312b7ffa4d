//! Secure building blocks on shares.

pub mod compare;
pub mod division;
pub mod random;
pub mod sort;

pub use compare::{abs, and, eq, eq_public, lt, lt_public, msb, not, select, xor};
pub use division::{div, div_clear, div_fixed, reciprocal};
pub use random::{gauss01, rand_uniform01};
pub use sort::{sort, sort_columns, SENTINEL};

use crate::rss::Share;

/// Mean of `K` shared values kept as an exact rational: the shared sum and
/// the public divisor. Averaging is local; consumers compare `sum` against
/// `K` times a bound instead of dividing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Average {
    pub sum: Share,
    pub count: u64,
}

/// Averages one metric over folds without communication.
pub fn avg(values: &[Share]) -> Average {
    Average { sum: values.iter().copied().sum(), count: values.len() as u64 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::run3;
    use crate::ring::RingValue;
    use crate::runtime::{PartyId, Protocol};

    #[test]
    fn average_is_local_and_exact() {
        let c = crate::FixedPointConfig::default();
        let vals: Vec<RingValue> = [2.0, 4.0, 6.0].iter().map(|&v| c.encode(v).unwrap()).collect();
        let out = run3(51, |p| {
            let x = p.input_from(PartyId::ALL[0], &vals, 3)?;
            let (m, d) = p.run_protocol(Protocol::Avg, |_| Ok(avg(&x)))?;
            let same = avg(&vec![x[1]; 5]);
            let opened = p.open(&[m.sum, same.sum])?;
            Ok((opened, m.count, d.total_bytes()))
        })
        .unwrap();
        let (opened, k, bytes) = &out[0];
        assert_eq!(c.decode(opened[0]) / *k as f64, 4.0);
        assert_eq!(c.decode(opened[1]) / 5.0, 4.0);
        assert_eq!(*bytes, 0);
    }
}
