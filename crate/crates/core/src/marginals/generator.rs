//! Cleartext generation of binned synthetic rows from noisy marginals.
//!
//! Genes are modelled as conditionally independent given the label. For
//! each gene a 4x5 joint table is fitted to the measured gene, label and
//! gene-by-label marginals with iterative proportional fitting, starting
//! from the (clipped) 2-way measurement. Rows are then sampled as
//! `y ~ p(y)` followed by `g_i ~ p(g_i | y)` for each gene.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GENE_DOMAIN, LABEL_DOMAIN, PAIR_CELLS};
use crate::error::{Error, Result};

/// Decoded marginals as produced by measurement (raw, possibly negative).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearMarginals {
    pub gene: Vec<[f64; GENE_DOMAIN]>,
    pub label: [f64; LABEL_DOMAIN],
    pub pair: Vec<[f64; PAIR_CELLS]>,
}

impl ClearMarginals {
    pub fn genes(&self) -> usize {
        self.gene.len()
    }

    /// Rebuilds from cells ordered gene, label, pair.
    pub fn from_flat(genes: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != genes * (GENE_DOMAIN + PAIR_CELLS) + LABEL_DOMAIN {
            return Err(Error::Parameter(format!("{} marginal cells for {genes} genes", flat.len())));
        }
        let (g, rest) = flat.split_at(genes * GENE_DOMAIN);
        let (l, pr) = rest.split_at(LABEL_DOMAIN);
        Ok(ClearMarginals {
            gene: g.chunks_exact(GENE_DOMAIN).map(|c| c.try_into().unwrap()).collect(),
            label: l.try_into().unwrap(),
            pair: pr.chunks_exact(PAIR_CELLS).map(|c| c.try_into().unwrap()).collect(),
        })
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.gene.iter().flatten().copied().collect();
        v.extend_from_slice(&self.label);
        v.extend(self.pair.iter().flatten());
        v
    }
}

/// Binned synthetic rows: gene bins followed by the label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticRows {
    pub genes: usize,
    pub rows: Vec<Vec<u8>>,
}

fn clip<const K: usize>(v: &[f64; K]) -> [f64; K] {
    v.map(|x| if x > 0.0 { x } else { 0.0 })
}

/// Label target: clipped label marginal, uniform if nothing survives.
fn label_target(m: &ClearMarginals) -> [f64; LABEL_DOMAIN] {
    let t = clip(&m.label);
    if t.iter().sum::<f64>() > 0.0 {
        t
    } else {
        [1.0; LABEL_DOMAIN]
    }
}

/// Gene target: clipped gene marginal rescaled to the label target's total.
fn gene_target(m: &ClearMarginals, g: usize, total: f64) -> [f64; GENE_DOMAIN] {
    let t = clip(&m.gene[g]);
    let s: f64 = t.iter().sum();
    if s > 0.0 {
        if s == total {
            t
        } else {
            t.map(|x| x * total / s)
        }
    } else {
        [total / GENE_DOMAIN as f64; GENE_DOMAIN]
    }
}

/// Joint gene-by-label table for gene `g` after `iterations` IPF passes.
/// Each pass rescales rows to the gene target, then columns to the label
/// target. Rows or columns with zero mass are left unchanged.
pub fn ipf_fit(m: &ClearMarginals, g: usize, iterations: usize) -> [[f64; LABEL_DOMAIN]; GENE_DOMAIN] {
    let ty = label_target(m);
    let total: f64 = ty.iter().sum();
    let tg = gene_target(m, g, total);
    let mut t = [[0.0; LABEL_DOMAIN]; GENE_DOMAIN];
    let mut mass = 0.0;
    for r in 0..GENE_DOMAIN {
        for c in 0..LABEL_DOMAIN {
            let v = m.pair[g][r * LABEL_DOMAIN + c];
            t[r][c] = if v > 0.0 { v } else { 0.0 };
            mass += t[r][c];
        }
    }
    if mass == 0.0 {
        t = [[total / PAIR_CELLS as f64; LABEL_DOMAIN]; GENE_DOMAIN];
    }
    for _ in 0..iterations {
        for r in 0..GENE_DOMAIN {
            let s: f64 = t[r].iter().sum();
            if s > 0.0 && s != tg[r] {
                let k = tg[r] / s;
                t[r].iter_mut().for_each(|v| *v *= k);
            }
        }
        for c in 0..LABEL_DOMAIN {
            let s: f64 = (0..GENE_DOMAIN).map(|r| t[r][c]).sum();
            if s > 0.0 && s != ty[c] {
                let k = ty[c] / s;
                (0..GENE_DOMAIN).for_each(|r| t[r][c] *= k);
            }
        }
    }
    t
}

fn sample<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave u at the very top; fall back to the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Samples `n_out` binned rows consistent with the marginals.
pub fn generate_synthetic<R: Rng>(m: &ClearMarginals, n_out: usize, iterations: usize, rng: &mut R) -> SyntheticRows {
    let d = m.genes();
    let ty = label_target(m);
    let total: f64 = ty.iter().sum();
    let tables: Vec<_> = (0..d).map(|g| ipf_fit(m, g, iterations)).collect();
    let targets: Vec<_> = (0..d).map(|g| gene_target(m, g, total)).collect();
    // Conditional weights p(g | y) per gene and label.
    let cond: Vec<Vec<[f64; GENE_DOMAIN]>> = (0..d)
        .map(|g| {
            (0..LABEL_DOMAIN)
                .map(|c| {
                    let col: [f64; GENE_DOMAIN] = std::array::from_fn(|r| tables[g][r][c]);
                    if col.iter().sum::<f64>() > 0.0 {
                        col
                    } else {
                        targets[g]
                    }
                })
                .collect()
        })
        .collect();

    let rows = (0..n_out)
        .map(|_| {
            let y = sample(&ty, rng);
            let mut row: Vec<u8> = (0..d).map(|g| sample(&cond[g][y], rng) as u8).collect();
            row.push(y as u8);
            row
        })
        .collect();
    SyntheticRows { genes: d, rows }
}
