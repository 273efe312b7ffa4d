//! Marginal counts by direct enumeration.

use mpcsynth_core::marginals::{ClearMarginals, GENE_DOMAIN, LABEL_DOMAIN, PAIR_CELLS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearCounts {
    pub gene: Vec<[u64; GENE_DOMAIN]>,
    pub label: [u64; LABEL_DOMAIN],
    pub pair: Vec<[u64; PAIR_CELLS]>,
}

impl ClearCounts {
    /// Cells ordered gene, label, pair.
    pub fn flatten(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.gene.iter().flatten().copied().collect();
        v.extend_from_slice(&self.label);
        v.extend(self.pair.iter().flatten());
        v
    }

    pub fn to_clear(&self) -> ClearMarginals {
        ClearMarginals {
            gene: self.gene.iter().map(|g| g.map(|c| c as f64)).collect(),
            label: self.label.map(|c| c as f64),
            pair: self.pair.iter().map(|p| p.map(|c| c as f64)).collect(),
        }
    }
}

/// For every attribute value (and value pair) counts the rows that carry
/// it. Rows hold `genes` bins followed by the label.
pub fn brute_marginals(rows: &[Vec<u8>], genes: usize) -> ClearCounts {
    let count = |pred: &dyn Fn(&Vec<u8>) -> bool| rows.iter().filter(|r| pred(r)).count() as u64;
    let gene = (0..genes).map(|g| std::array::from_fn(|b| count(&|r| r[g] as usize == b))).collect();
    let label = std::array::from_fn(|y| count(&|r| r[genes] as usize == y));
    let pair = (0..genes)
        .map(|g| {
            std::array::from_fn(|cell| {
                let (b, y) = (cell / LABEL_DOMAIN, cell % LABEL_DOMAIN);
                count(&|r| r[g] as usize == b && r[genes] as usize == y)
            })
        })
        .collect();
    ClearCounts { gene, label, pair }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_counts() {
        let rows = vec![vec![1, 0], vec![1, 0], vec![3, 4]];
        let m = brute_marginals(&rows, 1);
        assert_eq!(m.label, [2, 0, 0, 0, 1]);
        assert_eq!(m.gene[0], [0, 2, 0, 1]);
        assert_eq!(m.pair[0][5], 2);
        assert_eq!(m.pair[0][19], 1);
        let empty = brute_marginals(&[], 2);
        assert!(empty.flatten().iter().all(|&c| c == 0));
    }
}
