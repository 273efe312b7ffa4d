//! Measuring 1-way and gene-by-label 2-way marginals on binned data, with
//! optional Gaussian noise, and turning noisy marginals into synthetic rows.

pub mod bridge;
pub mod generator;
pub mod indicator;
pub mod noise;

pub use bridge::secure_generate;
pub use generator::{generate_synthetic, ipf_fit, ClearMarginals, SyntheticRows};
pub use indicator::{indicator4, indicator5, indicators};
pub use noise::{calibrate, noiseless, NoiseCalibration};

use crate::error::{Error, Result};
use crate::primitives::gauss01;
use crate::ring::RingValue;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{Party, Protocol};

pub const GENE_DOMAIN: usize = 4;
pub const LABEL_DOMAIN: usize = 5;
pub const PAIR_CELLS: usize = GENE_DOMAIN * LABEL_DOMAIN;

/// Gene indicators are produced at this precision, label indicators at
/// [`LABEL_IND_BITS`]; their product is lifted to `f` without truncation.
const GENE_IND_BITS: u32 = 1;
const LABEL_IND_BITS: u32 = 3;

/// Number of measured marginals for `d` genes: each gene, the label, and
/// each gene paired with the label.
pub fn measurement_count(genes: usize) -> usize {
    2 * genes + 1
}

/// Shared marginals. Exact counts are at precision `f`; noisy ones at `2f`.
/// Pair cells are flattened as `gene_bin * 5 + label`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarginalSet {
    pub frac_bits: u32,
    pub genes: usize,
    pub gene: Vec<Share>,
    pub label: Vec<Share>,
    pub pair: Vec<Share>,
}

impl MarginalSet {
    pub fn cells(&self) -> usize {
        self.gene.len() + self.label.len() + self.pair.len()
    }

    /// All cells, ordered gene, label, pair.
    pub fn flatten(&self) -> Vec<Share> {
        let mut v = Vec::with_capacity(self.cells());
        v.extend_from_slice(&self.gene);
        v.extend_from_slice(&self.label);
        v.extend_from_slice(&self.pair);
        v
    }

    pub fn from_flat(frac_bits: u32, genes: usize, flat: &[Share]) -> Self {
        let (g, rest) = flat.split_at(genes * GENE_DOMAIN);
        let (l, pr) = rest.split_at(LABEL_DOMAIN);
        MarginalSet { frac_bits, genes, gene: g.to_vec(), label: l.to_vec(), pair: pr.to_vec() }
    }
}

/// Exact marginal counts of a binned matrix at the session precision.
pub fn count_marginals(p: &mut Party, data: &ShareMatrix) -> Result<MarginalSet> {
    Ok(count_marginals_batch(p, &[data])?.remove(0))
}

/// Exact marginal counts of several binned matrices with the same gene
/// count, sharing one indicator and one product schedule.
pub fn count_marginals_batch(p: &mut Party, sets: &[&ShareMatrix]) -> Result<Vec<MarginalSet>> {
    let f = p.fixed().frac_bits();
    let Some(first) = sets.first() else { return Ok(Vec::new()) };
    let d = first.genes();
    if sets.iter().any(|m| m.genes() != d) {
        return Err(Error::Parameter("marginal batch mixes gene counts".into()));
    }
    let total: usize = sets.iter().map(|m| m.rows).sum();
    let mut offsets = Vec::with_capacity(sets.len());
    let mut ys = Vec::with_capacity(total);
    for m in sets {
        offsets.push(ys.len());
        ys.extend(m.column(m.label_col()));
    }
    // Gene values laid out gene-major, then set, then row.
    let mut xs = Vec::with_capacity(total * d);
    for g in 0..d {
        for m in sets {
            xs.extend(m.column(g));
        }
    }
    let lab = indicator5(p, &ys, LABEL_IND_BITS)?;
    let gen = indicator4(p, &xs, GENE_IND_BITS)?;

    let mut out = Vec::with_capacity(sets.len());
    let mut pairs = Vec::with_capacity(sets.len() * d * PAIR_CELLS);
    for (s, m) in sets.iter().enumerate() {
        let (n, off) = (m.rows, offsets[s]);
        let labels: Vec<&[Share]> = lab.iter().map(|col| &col[off..off + n]).collect();
        let label = labels.iter().map(|l| l.iter().copied().sum::<Share>().shl(f - LABEL_IND_BITS)).collect();
        let mut gene = Vec::with_capacity(d * GENE_DOMAIN);
        for g in 0..d {
            for col in &gen {
                let part = &col[g * total + off..g * total + off + n];
                gene.push(part.iter().copied().sum::<Share>().shl(f - GENE_IND_BITS));
                for l in &labels {
                    pairs.push((part.to_vec(), l.to_vec()));
                }
            }
        }
        out.push(MarginalSet { frac_bits: f, genes: d, gene, label, pair: Vec::new() });
    }
    let prods = p.dot(&pairs)?;
    for (s, m) in out.iter_mut().enumerate() {
        let cells = &prods[s * d * PAIR_CELLS..(s + 1) * d * PAIR_CELLS];
        m.pair = cells.iter().map(|v| v.shl(f - GENE_IND_BITS - LABEL_IND_BITS)).collect();
    }
    Ok(out)
}

/// Measures all marginals and adds `sigma`-scaled Irwin-Hall noise to every
/// cell. With `sigma = 0` the exact counts are returned at precision `f`;
/// otherwise `count * 2^f + round(sigma 2^f) * gamma` at precision `2f`.
/// Noise bits come from each party's local stream `noise_stream`.
pub fn noisy_marginals(
    p: &mut Party,
    data: &ShareMatrix,
    cal: &NoiseCalibration,
    noise_stream: &str,
) -> Result<MarginalSet> {
    p.scoped(Protocol::NoisyMarg, |p| {
        let exact = count_marginals(p, data)?;
        if cal.sigma == 0.0 {
            return Ok(exact);
        }
        let c = p.fixed();
        let f = c.frac_bits();
        let scale = RingValue::from_i64((cal.sigma * c.one().0 as f64).round() as i64);
        let flat = exact.flatten();
        let gamma = gauss01(p, noise_stream, flat.len())?;
        let noisy: Vec<Share> = flat.iter().zip(&gamma).map(|(&m, &g)| m.shl(f) + g.mul_public(scale)).collect();
        Ok(MarginalSet::from_flat(2 * f, exact.genes, &noisy))
    })
}
