//! Baseline in which every custodian bins its own rows before the
//! measurements are pooled, compared with binning the combined data.

use mpcsynth_core::io::Dataset;
use mpcsynth_core::marginals::{generate_synthetic, ClearMarginals};
use mpcsynth_core::orchestrator::{noise_calibration, PipelineConfig};
use mpcsynth_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::binning::{bin_rows, clear_bin};
use crate::marginals::brute_marginals;
use crate::wle::float_wle;
use crate::{encode_genes, BinnedRows};

/// Noisy measurement and generation shared by both variants.
fn generate(rows: &BinnedRows, genes: usize, cfg: &PipelineConfig, h: usize, rng: &mut ChaCha20Rng) -> Result<BinnedRows> {
    let sigma = noise_calibration(cfg, genes)?.sigma;
    let normal = Normal::new(0.0, sigma).unwrap();
    let noisy: Vec<f64> = brute_marginals(rows, genes).flatten().into_iter().map(|c| c as f64 + normal.sample(rng)).collect();
    let m = ClearMarginals::from_flat(genes, &noisy)?;
    Ok(generate_synthetic(&m, rows.len(), h, rng).rows)
}

/// Workload errors `(combined, local)` of the published data, both
/// measured against the real data discretized with combined cut points.
/// Local bins are de-binned with the pooled mean of the values they hold.
pub fn combined_vs_local(parts: &[Dataset], cfg: &PipelineConfig, h: usize, seed: u64) -> Result<(f64, f64)> {
    let fixed = cfg.fixed()?;
    let d = parts[0].genes.len();
    let enc: Vec<Vec<Vec<i64>>> = parts.iter().map(|p| encode_genes(p, fixed)).collect::<Result<_>>()?;
    let all: Vec<Vec<i64>> = enc.iter().flatten().cloned().collect();
    let labels: Vec<u8> = parts.iter().flat_map(|p| p.labels.iter().copied()).collect();
    let attach = |bins: Vec<Vec<u8>>| -> BinnedRows {
        bins.into_iter().zip(&labels).map(|(mut r, &y)| {
            r.push(y);
            r
        }).collect()
    };

    let combined = clear_bin(&all);
    let reference = attach(combined.bins.clone());
    let rebin = |synth: &BinnedRows, means: &[[i64; 4]]| -> BinnedRows {
        let vals: Vec<Vec<i64>> = synth.iter().map(|r| (0..d).map(|g| means[g][r[g] as usize]).collect()).collect();
        let mut out = bin_rows(&vals, &combined.cuts);
        for (o, r) in out.iter_mut().zip(synth) {
            o.push(r[d]);
        }
        out
    };

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let synth = generate(&reference, d, cfg, h, &mut rng)?;
    let wle_combined = float_wle(&reference, &rebin(&synth, &combined.means), d);

    let mut local_rows = Vec::new();
    let mut sums = vec![[0i64; 4]; d];
    let mut counts = vec![[0i64; 4]; d];
    for vals in &enc {
        let b = clear_bin(vals);
        for (row, bins) in vals.iter().zip(&b.bins) {
            for g in 0..d {
                sums[g][bins[g] as usize] += row[g];
                counts[g][bins[g] as usize] += 1;
            }
        }
        local_rows.extend(b.bins);
    }
    let pooled: Vec<[i64; 4]> = (0..d)
        .map(|g| std::array::from_fn(|b| if counts[g][b] > 0 { sums[g][b] / counts[g][b] } else { 0 }))
        .collect();
    let local = attach(local_rows);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let synth = generate(&local, d, cfg, h, &mut rng)?;
    let wle_local = float_wle(&reference, &rebin(&synth, &pooled), d);
    Ok((wle_combined, wle_local))
}
