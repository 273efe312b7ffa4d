//! Secure quantile binning of gene columns and inverse discretization.
//!
//! Gene values enter at the session precision `f`. Bins and labels are plain
//! integers. Cut points are kept at precision `f + 2`: quantile positions
//! are multiples of 1/4, so linear interpolation between sorted values is
//! exact there and comparisons against `4 x` need no rounding.

use crate::error::{Error, Result};
use crate::primitives::{div, eq, eq_public, lt, sort_columns};
use crate::ring::RingValue;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{Party, Protocol};

/// Quantile levels, in quarters.
pub const QUARTERS: [u64; 3] = [1, 2, 3];

/// Extra fractional bits carried by cut points.
pub const CUT_EXTRA_BITS: u32 = 2;

/// Per gene, the three shared cut points at precision `f + 2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuantileCuts {
    pub cuts: Vec<[Share; 3]>,
}

/// Per gene, the shared bin means (precision `f`) and bin counts (integers).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BinMeans {
    pub means: Vec<[Share; 4]>,
    pub counts: Vec<[Share; 4]>,
}

#[derive(Clone, Debug, Default)]
pub struct Binned {
    /// Gene columns replaced by bin indices; the label column is unchanged.
    pub data: ShareMatrix,
    pub cuts: QuantileCuts,
    pub means: Option<BinMeans>,
}

/// Floor index and quarter fraction of the interpolation position
/// `(n - 1) * q / 4`.
pub fn quantile_position(n: usize, quarters: u64) -> (usize, u64) {
    let pos4 = (n as u64 - 1) * quarters;
    ((pos4 / 4) as usize, pos4 % 4)
}

/// Cut points from sorted columns: `4 D[lo] + 4 frac (D[lo+1] - D[lo])`.
/// Positions and fractions are public, so this is local.
pub fn compute_quantiles(sorted: &[Vec<Share>]) -> Result<QuantileCuts> {
    let mut cuts = Vec::with_capacity(sorted.len());
    for col in sorted {
        let n = col.len();
        if n < 2 {
            return Err(Error::Degenerate(format!("quantiles need at least 2 rows, got {n}")));
        }
        let q = QUARTERS.map(|r| {
            let (lo, frac4) = quantile_position(n, r);
            let base = col[lo].shl(CUT_EXTRA_BITS);
            if frac4 == 0 {
                base
            } else {
                base + (col[lo + 1] - col[lo]).mul_public(RingValue(frac4))
            }
        });
        cuts.push(q);
    }
    Ok(QuantileCuts { cuts })
}

/// Maps every gene cell to `3 - [x < Q0] - [x < Q1] - [x < Q2]`.
/// Returns the bins column-major (`[gene][row]`).
fn bin_with_cuts(p: &mut Party, data: &ShareMatrix, cuts: &QuantileCuts) -> Result<Vec<Vec<Share>>> {
    let (n, d) = (data.rows, data.genes());
    assert_eq!(cuts.cuts.len(), d, "cuts for a different gene count");
    let mut lhs = Vec::with_capacity(3 * n * d);
    let mut rhs = Vec::with_capacity(3 * n * d);
    for g in 0..d {
        for k in 0..3 {
            for r in 0..n {
                lhs.push(data.get(r, g).shl(CUT_EXTRA_BITS));
                rhs.push(cuts.cuts[g][k]);
            }
        }
    }
    let c = lt(p, &lhs, &rhs)?;
    let three = Share::public(p.id(), RingValue(3));
    Ok((0..d)
        .map(|g| {
            (0..n)
                .map(|r| {
                    let base = g * 3 * n;
                    three - c[base + r] - c[base + n + r] - c[base + 2 * n + r]
                })
                .collect()
        })
        .collect())
}

fn with_gene_columns(data: &ShareMatrix, genes: Vec<Vec<Share>>) -> ShareMatrix {
    let mut cols = genes;
    cols.push(data.column(data.label_col()));
    ShareMatrix::from_columns(&cols)
}

/// Fallback means for empty bins at precision `f + 3`: the lone adjacent cut
/// for the outer bins, the midpoint of the two adjacent cuts otherwise.
fn fallback_means(q: &[Share; 3]) -> [Share; 4] {
    [q[0].shl(1), q[0] + q[1], q[1] + q[2], q[2].shl(1)]
}

/// Per-bin means `trunc(sum / count)` at precision `f`, with empty bins
/// replaced obliviously by [`fallback_means`] rounded toward zero.
/// `value_bits` bounds the magnitude of gene values: `|x| < 2^value_bits`.
fn compute_bin_means(
    p: &mut Party,
    bins: &[Vec<Share>],
    values: &ShareMatrix,
    cuts: &QuantileCuts,
    value_bits: u32,
) -> Result<BinMeans> {
    let d = bins.len();
    let n = values.rows;
    let f = p.fixed().frac_bits();
    let int_bits = value_bits + f;
    if (n as f64 * 8.0).log2() + int_bits as f64 >= 62.0 {
        return Err(Error::Parameter(format!(
            "{n} rows with {value_bits}-bit values exceed the division range"
        )));
    }

    let mut lhs = Vec::with_capacity(4 * n * d);
    let mut rhs = Vec::with_capacity(4 * n * d);
    for col in bins {
        for b in 0..4u64 {
            lhs.extend_from_slice(col);
            rhs.extend(std::iter::repeat(Share::public(p.id(), RingValue(b))).take(n));
        }
    }
    let ind = eq(p, &lhs, &rhs)?;

    let mut pairs = Vec::with_capacity(4 * d);
    let mut counts = Vec::with_capacity(4 * d);
    for g in 0..d {
        let x = values.column(g);
        for b in 0..4 {
            let c = &ind[(g * 4 + b) * n..(g * 4 + b + 1) * n];
            counts.push(c.iter().copied().sum::<Share>());
            pairs.push((c.to_vec(), x.clone()));
        }
    }
    let sums = p.dot(&pairs)?;
    let empty = eq_public(p, &counts, RingValue::ZERO)?;

    let mut diff = Vec::with_capacity(4 * d);
    for g in 0..d {
        let fb = fallback_means(&cuts.cuts[g]);
        for b in 0..4 {
            diff.push(fb[b] - sums[g * 4 + b].shl(3));
        }
    }
    let adj = p.mul(&empty, &diff)?;
    let num: Vec<Share> = (0..4 * d).map(|k| sums[k].shl(3) + adj[k]).collect();
    let den: Vec<Share> = (0..4 * d).map(|k| (counts[k] + empty[k]).shl(3)).collect();
    let mean = div(p, &num, &den, int_bits, 0)?;

    Ok(BinMeans {
        means: (0..d).map(|g| [0, 1, 2, 3].map(|b| mean[g * 4 + b])).collect(),
        counts: (0..d).map(|g| [0, 1, 2, 3].map(|b| counts[g * 4 + b])).collect(),
    })
}

/// Quantile-bins every gene column of a training matrix. Sorting is
/// accounted under its own label.
pub fn bin(p: &mut Party, data: &ShareMatrix, value_bits: u32, means_needed: bool) -> Result<Binned> {
    p.scoped(Protocol::Bin, |p| {
        let genes: Vec<Vec<Share>> = (0..data.genes()).map(|g| data.column(g)).collect();
        let sorted = p.scoped(Protocol::Sort, |p| sort_columns(p, &genes))?;
        let cuts = compute_quantiles(&sorted)?;
        let bins = bin_with_cuts(p, data, &cuts)?;
        let means = if means_needed {
            Some(compute_bin_means(p, &bins, data, &cuts, value_bits)?)
        } else {
            None
        };
        Ok(Binned { data: with_gene_columns(data, bins), cuts, means })
    })
}

/// Bins held-out rows with cut points learned on training rows.
pub fn bin_with_train_cuts(p: &mut Party, data: &ShareMatrix, cuts: &QuantileCuts) -> Result<ShareMatrix> {
    p.scoped(Protocol::Bin, |p| {
        if data.rows == 0 {
            return Ok(data.clone());
        }
        let bins = bin_with_cuts(p, data, cuts)?;
        Ok(with_gene_columns(data, bins))
    })
}

/// Replaces every gene bin by its bin mean: `sum_b [cell == b] m_b`.
pub fn inv_bin(p: &mut Party, binned: &ShareMatrix, means: &BinMeans) -> Result<ShareMatrix> {
    p.scoped(Protocol::InvBin, |p| {
        let (n, d) = (binned.rows, binned.genes());
        assert_eq!(means.means.len(), d);
        let mut lhs = Vec::with_capacity(4 * n * d);
        let mut rhs = Vec::with_capacity(4 * n * d);
        for g in 0..d {
            let col = binned.column(g);
            for b in 0..4u64 {
                lhs.extend_from_slice(&col);
                rhs.extend(std::iter::repeat(Share::public(p.id(), RingValue(b))).take(n));
            }
        }
        let ind = eq(p, &lhs, &rhs)?;
        let mut pairs = Vec::with_capacity(n * d);
        for g in 0..d {
            for r in 0..n {
                let sel: Vec<Share> = (0..4).map(|b| ind[(g * 4 + b) * n + r]).collect();
                pairs.push((sel, means.means[g].to_vec()));
            }
        }
        let vals = p.dot(&pairs)?;
        let genes: Vec<Vec<Share>> = (0..d).map(|g| vals[g * n..(g + 1) * n].to_vec()).collect();
        Ok(with_gene_columns(binned, genes))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::run3;
    use crate::ring::FixedPointConfig;
    use crate::runtime::PartyId;

    fn matrix(p: &mut Party, rows: &[Vec<f64>]) -> Result<ShareMatrix> {
        let c = p.fixed();
        let cols = rows[0].len();
        let mut vals = Vec::new();
        for r in rows {
            for (j, &v) in r.iter().enumerate() {
                vals.push(if j + 1 == cols { RingValue(v as u64) } else { c.encode(v)? });
            }
        }
        let cells = p.input_from(PartyId::ALL[0], &vals, vals.len())?;
        Ok(ShareMatrix::new(rows.len(), cols, cells))
    }

    #[test]
    fn quantile_positions() {
        assert_eq!(quantile_position(5, 1), (1, 0));
        assert_eq!(quantile_position(5, 3), (3, 0));
        assert_eq!(quantile_position(2, 2), (0, 2));
        assert_eq!(quantile_position(4, 1), (0, 3));
    }

    #[test]
    fn binning_and_means_on_small_column() {
        let c = FixedPointConfig::default();
        let rows: Vec<Vec<f64>> = [10.0, 50.0, 30.0, 20.0, 40.0].iter().map(|&v| vec![v, 0.0]).collect();
        let out = run3(61, |p| {
            let m = matrix(p, &rows)?;
            let b = bin(p, &m, 20, true)?;
            let cuts = p.open(&b.cuts.cuts[0])?;
            let bins = p.open(&b.data.column(0))?;
            let means = b.means.unwrap();
            let mv = p.open(&means.means[0])?;
            let cv = p.open(&means.counts[0])?;
            Ok((cuts, bins, mv, cv))
        })
        .unwrap();
        let (cuts, bins, means, counts) = &out[0];
        let q: Vec<f64> = cuts.iter().map(|&v| crate::ring::decode_at(v, 18)).collect();
        assert_eq!(q, vec![20.0, 30.0, 40.0]);
        assert_eq!(bins.iter().map(|v| v.0).collect::<Vec<_>>(), vec![0, 3, 2, 1, 3]);
        assert_eq!(counts.iter().map(|v| v.0).collect::<Vec<_>>(), vec![1, 1, 1, 2]);
        let m: Vec<f64> = means.iter().map(|&v| c.decode(v)).collect();
        assert_eq!(m, vec![10.0, 20.0, 30.0, 45.0]);
    }

    #[test]
    fn interpolated_cut_and_empty_bin_fallback() {
        let c = FixedPointConfig::default();
        let rows = vec![vec![0.0, 1.0], vec![100.0, 2.0]];
        let out = run3(62, |p| {
            let m = matrix(p, &rows)?;
            let b = bin(p, &m, 20, true)?;
            let means = b.means.unwrap();
            Ok((p.open(&b.cuts.cuts[0])?, p.open(&means.means[0])?, p.open(&b.data.column(1))?))
        })
        .unwrap();
        let q: Vec<f64> = out[0].0.iter().map(|&v| crate::ring::decode_at(v, 18)).collect();
        assert_eq!(q, vec![25.0, 50.0, 75.0]);
        // Bins 1 and 2 are empty: their means fall back to cut midpoints.
        let m: Vec<f64> = out[0].1.iter().map(|&v| c.decode(v)).collect();
        assert_eq!(m, vec![0.0, 37.5, 62.5, 100.0]);
        assert_eq!(out[0].2, vec![RingValue(1), RingValue(2)]);
    }

    #[test]
    fn inverse_binning_selects_means() {
        let c = FixedPointConfig::default();
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0].iter().map(|&v| vec![v, 3.0]).collect();
        let out = run3(63, |p| {
            let m = matrix(p, &rows)?;
            let b = bin(p, &m, 20, true)?;
            let back = inv_bin(p, &b.data, b.means.as_ref().unwrap())?;
            let test = bin_with_train_cuts(p, &m.select_rows(&[7, 0]), &b.cuts)?;
            Ok((p.open(&back.column(0))?, p.open(&back.column(1))?, p.open(&test.column(0))?))
        })
        .unwrap();
        let vals: Vec<f64> = out[0].0.iter().map(|&v| c.decode(v)).collect();
        assert_eq!(vals, vec![1.5, 1.5, 3.5, 3.5, 5.5, 5.5, 7.5, 7.5]);
        assert_eq!(out[0].1, vec![RingValue(3); 8]);
        assert_eq!(out[0].2, vec![RingValue(3), RingValue(0)]);
    }
}
