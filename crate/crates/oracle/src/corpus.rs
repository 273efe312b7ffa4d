//! Seeded synthetic datasets with label-dependent gene levels.

use mpcsynth_core::io::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// `rows x genes` dataset. Every gene's level shifts with the label by a
/// gene-specific amount, plus unit Gaussian noise; values have three
/// decimals.
pub fn synthetic_dataset(rows: usize, genes: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let effect: Vec<f64> = (0..genes).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let base: Vec<f64> = (0..genes).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let mut ds = Dataset { genes: (1..=genes).map(|g| format!("g{g}")).collect(), ..Dataset::default() };
    for _ in 0..rows {
        let y: u8 = rng.gen_range(0..5);
        let vals = (0..genes).map(|g| round3(base[g] + effect[g] * y as f64 + noise.sample(&mut rng))).collect();
        ds.values.push(vals);
        ds.labels.push(y);
    }
    ds
}

/// Consecutive row blocks of the given sizes.
pub fn split_rows(ds: &Dataset, sizes: &[usize]) -> Vec<Dataset> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &n in sizes {
        out.push(Dataset {
            genes: ds.genes.clone(),
            values: ds.values[at..at + n].to_vec(),
            labels: ds.labels[at..at + n].to_vec(),
        });
        at += n;
    }
    out
}

/// Two custodians whose gene values occupy disjoint ranges: the second
/// custodian's data is the first's distribution shifted up by `offset`.
pub fn skewed_split(rows_each: usize, genes: usize, offset: f64, seed: u64) -> [Dataset; 2] {
    let a = synthetic_dataset(rows_each, genes, seed);
    let mut b = synthetic_dataset(rows_each, genes, seed ^ 0x5eed);
    b.genes = a.genes.clone();
    for row in &mut b.values {
        for x in row {
            *x = round3(*x + offset);
        }
    }
    [a, b]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = synthetic_dataset(50, 4, 9);
        assert_eq!(a.rows(), 50);
        assert!(a.values.iter().all(|r| r.len() == 4));
        assert!(a.labels.iter().all(|&y| y < 5));
        assert_eq!(a, synthetic_dataset(50, 4, 9));
        let parts = split_rows(&a, &[20, 30]);
        assert_eq!(parts[1].values[0], a.values[20]);
        let [lo, hi] = skewed_split(30, 3, 100.0, 1);
        let max_lo = lo.values.iter().flatten().cloned().fold(f64::MIN, f64::max);
        let min_hi = hi.values.iter().flatten().cloned().fold(f64::MAX, f64::min);
        assert!(max_lo < min_hi);
    }
}
