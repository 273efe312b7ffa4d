//! Quantile binning in the clear.

use mpcsynth_core::preprocess::{quantile_position, CUT_EXTRA_BITS, QUARTERS};

/// Binned columns of one matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearBinned {
    /// Cut points per gene at `f + 2` fractional bits.
    pub cuts: Vec<[i64; 3]>,
    /// Bin of every cell, row-major `rows x genes`.
    pub bins: Vec<Vec<u8>>,
    /// Bin means per gene at `f` fractional bits, truncated toward zero.
    pub means: Vec<[i64; 4]>,
    pub counts: Vec<[u64; 4]>,
}

/// Cut points of one column of fixed-point values.
pub fn cuts_of(column: &[i64]) -> [i64; 3] {
    let mut v = column.to_vec();
    v.sort_unstable();
    QUARTERS.map(|q| {
        let (lo, frac4) = quantile_position(v.len(), q);
        let base = v[lo] << CUT_EXTRA_BITS;
        if frac4 == 0 {
            base
        } else {
            base + frac4 as i64 * (v[lo + 1] - v[lo])
        }
    })
}

pub fn bin_of(x: i64, cuts: &[i64; 3]) -> u8 {
    3 - cuts.iter().filter(|&&c| (x << CUT_EXTRA_BITS) < c).count() as u8
}

/// Bins with given cuts.
pub fn bin_rows(values: &[Vec<i64>], cuts: &[[i64; 3]]) -> Vec<Vec<u8>> {
    values.iter().map(|r| r.iter().zip(cuts).map(|(&x, c)| bin_of(x, c)).collect()).collect()
}

/// Bins every gene column with cuts learned on the same rows.
pub fn clear_bin(values: &[Vec<i64>]) -> ClearBinned {
    let d = values.first().map_or(0, Vec::len);
    let cuts: Vec<[i64; 3]> = (0..d).map(|g| cuts_of(&values.iter().map(|r| r[g]).collect::<Vec<_>>())).collect();
    let bins = bin_rows(values, &cuts);
    let mut means = Vec::with_capacity(d);
    let mut counts = Vec::with_capacity(d);
    for g in 0..d {
        let mut sum = [0i64; 4];
        let mut cnt = [0u64; 4];
        for (r, row) in values.iter().enumerate() {
            let b = bins[r][g] as usize;
            sum[b] += row[g];
            cnt[b] += 1;
        }
        let q = cuts[g];
        let fallback = [2 * q[0], q[0] + q[1], q[1] + q[2], 2 * q[2]];
        means.push(std::array::from_fn(|b| if cnt[b] > 0 { sum[b] / cnt[b] as i64 } else { fallback[b] / 8 }));
        counts.push(cnt);
    }
    ClearBinned { cuts, bins, means, counts }
}

/// Floating-point binning with linearly interpolated quartiles. Returns
/// the bins and the bin means (NaN for empty bins).
pub fn float_bin(column: &[f64]) -> (Vec<u8>, [f64; 4]) {
    let mut v = column.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let q: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|p| {
            let pos = p * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        })
        .collect();
    let bins: Vec<u8> = column.iter().map(|&x| 3 - q.iter().filter(|&&c| x < c).count() as u8).collect();
    let mut sum = [0.0; 4];
    let mut cnt = [0.0; 4];
    for (&x, &b) in column.iter().zip(&bins) {
        sum[b as usize] += x;
        cnt[b as usize] += 1.0;
    }
    (bins, std::array::from_fn(|b| sum[b] / cnt[b]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_column() {
        let col: Vec<i64> = [10, 50, 30, 20, 40].iter().map(|v| v << 16).collect();
        let rows: Vec<Vec<i64>> = col.iter().map(|&v| vec![v]).collect();
        let b = clear_bin(&rows);
        assert_eq!(b.cuts[0], [20 << 18, 30 << 18, 40 << 18]);
        assert_eq!(b.bins.iter().map(|r| r[0]).collect::<Vec<_>>(), [0, 3, 2, 1, 3]);
        assert_eq!(b.means[0], [10 << 16, 20 << 16, 30 << 16, 45 << 16]);
        let (fb, fm) = float_bin(&[10.0, 50.0, 30.0, 20.0, 40.0]);
        assert_eq!(fb, [0, 3, 2, 1, 3]);
        assert_eq!(fm, [10.0, 20.0, 30.0, 45.0]);
    }
}
