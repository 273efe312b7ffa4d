//! Oblivious sorting with a bitonic network.

use super::compare::lt;
use crate::error::Result;
use crate::ring::RingValue;
use crate::rss::Share;
use crate::runtime::Party;

/// Padding value placed above every in-range input.
pub const SENTINEL: RingValue = RingValue(1 << 60);

/// Compare-exchange index pairs `(lo, hi)` of a bitonic network on `n`
/// elements (a power of two), grouped into stages that can run in parallel.
fn bitonic_stages(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut stages = Vec::new();
    let mut k = 2;
    while k <= n {
        let mut j = k / 2;
        while j > 0 {
            let mut stage = Vec::with_capacity(n / 2);
            for i in 0..n {
                let l = i ^ j;
                if l > i {
                    if i & k == 0 {
                        stage.push((i, l));
                    } else {
                        stage.push((l, i));
                    }
                }
            }
            stages.push(stage);
            j /= 2;
        }
        k *= 2;
    }
    stages
}

/// Sorts several equal-length columns independently, batching the
/// compare-exchanges of all columns into the same rounds. The sequence of
/// operations depends only on the column count and length.
pub fn sort_columns(p: &mut Party, columns: &[Vec<Share>]) -> Result<Vec<Vec<Share>>> {
    let Some(len) = columns.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    assert!(columns.iter().all(|c| c.len() == len), "columns differ in length");
    let width = len.next_power_of_two().max(1);
    p.count_call("π_SORT", len * columns.len());
    let pad = Share::public(p.id(), SENTINEL);
    let mut cols: Vec<Vec<Share>> = columns
        .iter()
        .map(|c| {
            let mut v = c.clone();
            v.resize(width, pad);
            v
        })
        .collect();

    for stage in bitonic_stages(width) {
        let mut lo = Vec::with_capacity(stage.len() * cols.len());
        let mut hi = Vec::with_capacity(stage.len() * cols.len());
        for c in &cols {
            for &(i, j) in &stage {
                lo.push(c[i]);
                hi.push(c[j]);
            }
        }
        let swap = lt(p, &hi, &lo)?;
        let diff: Vec<Share> = hi.iter().zip(&lo).map(|(&h, &l)| h - l).collect();
        let d = p.mul(&swap, &diff)?;
        let mut k = 0;
        for c in cols.iter_mut() {
            for &(i, j) in &stage {
                c[i] = lo[k] + d[k];
                c[j] = hi[k] - d[k];
                k += 1;
            }
        }
    }
    for c in cols.iter_mut() {
        c.truncate(len);
    }
    Ok(cols)
}

/// Sorts one vector in non-decreasing order.
pub fn sort(p: &mut Party, v: &[Share]) -> Result<Vec<Share>> {
    Ok(sort_columns(p, &[v.to_vec()])?.remove(0))
}
