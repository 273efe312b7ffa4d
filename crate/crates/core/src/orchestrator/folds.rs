//! K-fold splits from a public seed.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::runtime::Seed;

/// A seeded permutation of row indices cut into `K` contiguous blocks whose
/// sizes differ by at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    permutation: Vec<usize>,
    bounds: Vec<usize>,
}

impl FoldPlan {
    pub fn new(rows: usize, folds: usize, seed: Seed) -> Result<Self> {
        if folds < 2 || folds > rows {
            return Err(Error::Parameter(format!("{folds} folds over {rows} rows")));
        }
        let mut permutation: Vec<usize> = (0..rows).collect();
        permutation.shuffle(&mut seed.rng());
        let (base, extra) = (rows / folds, rows % folds);
        let mut bounds = vec![0];
        for k in 0..folds {
            bounds.push(bounds[k] + base + usize::from(k < extra));
        }
        Ok(FoldPlan { permutation, bounds })
    }

    pub fn folds(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn test_block(&self, k: usize) -> &[usize] {
        &self.permutation[self.bounds[k]..self.bounds[k + 1]]
    }

    /// `(train, test)` row indices of fold `k`; training rows keep
    /// permutation order.
    pub fn split(&self, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if k >= self.folds() {
            return Err(Error::Parameter(format!("fold {k} of {}", self.folds())));
        }
        let (lo, hi) = (self.bounds[k], self.bounds[k + 1]);
        let train = self.permutation[..lo].iter().chain(&self.permutation[hi..]).copied().collect();
        Ok((train, self.permutation[lo..hi].to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_partition_rows() {
        let plan = FoldPlan::new(10, 5, Seed::from_u64(3)).unwrap();
        let mut all: Vec<usize> = (0..5).flat_map(|k| plan.test_block(k).to_vec()).collect();
        assert!((0..5).all(|k| plan.test_block(k).len() == 2));
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(plan, FoldPlan::new(10, 5, Seed::from_u64(3)).unwrap());

        let uneven = FoldPlan::new(23, 5, Seed::from_u64(4)).unwrap();
        let sizes: Vec<usize> = (0..5).map(|k| uneven.test_block(k).len()).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        let (train, test) = uneven.split(4).unwrap();
        assert_eq!(train.len() + test.len(), 23);
        assert!(uneven.split(5).is_err());
    }
}
