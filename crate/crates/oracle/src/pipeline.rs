//! The full collaborative run in the clear.

use mpcsynth_core::eval::LrParams;
use mpcsynth_core::io::Dataset;
use mpcsynth_core::marginals::{generate_synthetic, ClearMarginals};
use mpcsynth_core::orchestrator::{
    fold_plan, generator_seed, noise_calibration, noise_stream, ClearThresholds, PipelineConfig, SearchMode,
};
use mpcsynth_core::ring::{decode_at, RingValue};
use mpcsynth_core::{Error, Result};

use crate::binning::{bin_rows, clear_bin};
use crate::lr::{clear_accuracy, clear_lr_train};
use crate::marginals::brute_marginals;
use crate::noise::{noisy_cells, replay_gauss};
use crate::wle::clear_wle;
use crate::{encode_genes, BinnedRows};

#[derive(Clone, Debug, PartialEq)]
pub struct ClearRun {
    pub chosen: Option<usize>,
    pub loops: usize,
    pub votes: Vec<bool>,
    /// Per loop: fold sums of the fixed-point WLE and accuracy.
    pub metric_sums: Vec<(i64, i64)>,
    pub synthetic: Option<Dataset>,
}

fn with_labels(bins: Vec<Vec<u8>>, labels: &[u8]) -> BinnedRows {
    bins.into_iter().zip(labels).map(|(mut r, &y)| {
        r.push(y);
        r
    }).collect()
}

/// Noisy marginals as decoded by the generator host.
fn noisy_marginals(rows: &[Vec<u8>], genes: usize, cfg: &PipelineConfig, stream: &str) -> Result<ClearMarginals> {
    let f = cfg.frac_bits;
    let counts = brute_marginals(rows, genes).flatten();
    let cal = noise_calibration(cfg, genes)?;
    let gamma = replay_gauss(cfg.seed, stream, counts.len(), f);
    let cells: Vec<f64> =
        noisy_cells(&counts, cal.sigma, &gamma, f).into_iter().map(|v| decode_at(RingValue::from_i64(v), 2 * f)).collect();
    ClearMarginals::from_flat(genes, &cells)
}

fn synthesize(rows: &[Vec<u8>], genes: usize, cfg: &PipelineConfig, at: Option<(usize, usize)>, n_out: usize, h: usize) -> Result<BinnedRows> {
    let m = noisy_marginals(rows, genes, cfg, &noise_stream(at))?;
    Ok(generate_synthetic(&m, n_out, h, &mut generator_seed(cfg, at).rng()).rows)
}

/// Fold-summed WLE and accuracy for hyperparameter `h` in loop `l`.
fn loop_metrics(values: &[Vec<i64>], labels: &[u8], cfg: &PipelineConfig, l: usize, h: usize) -> Result<(i64, i64)> {
    let f = cfg.frac_bits;
    let d = values[0].len();
    let plan = fold_plan(cfg, values.len())?;
    let lr: LrParams = cfg.lr;
    let (mut wle, mut acc) = (0i64, 0i64);
    for k in 0..plan.folds() {
        let (tr, te) = plan.split(k)?;
        let pick = |idx: &[usize]| -> (Vec<Vec<i64>>, Vec<u8>) {
            (idx.iter().map(|&i| values[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
        };
        let (tv, tl) = pick(&tr);
        let (ev, el) = pick(&te);
        let b = clear_bin(&tv);
        let train = with_labels(b.bins.clone(), &tl);
        let test = with_labels(bin_rows(&ev, &b.cuts), &el);
        let synth = synthesize(&train, d, cfg, Some((l, k)), train.len(), h)?;
        wle += clear_wle(&train, &synth, d, f);
        let w = clear_lr_train(&synth, &lr, f);
        acc += clear_accuracy(&w, &test, f);
    }
    Ok((wle, acc))
}

fn passes(sums: (i64, i64), folds: i64, th: &[ClearThresholds], cfg: &PipelineConfig) -> Result<bool> {
    let fixed = cfg.fixed()?;
    for t in th {
        let [max_wle, min_acc] = t.encode(&fixed)?.map(|v| v.as_i64());
        if folds * max_wle < sums.0 || sums.1 < folds * min_acc {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs tuning and, on success, the publish path, with the seeds a local
/// secure run derives from `cfg.seed`.
pub fn clear_pipeline(datasets: &[Dataset], thresholds: &[ClearThresholds], cfg: &PipelineConfig) -> Result<ClearRun> {
    cfg.validate()?;
    let fixed = cfg.fixed()?;
    let first = datasets.first().ok_or_else(|| Error::Ingest("no custodian data".into()))?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for ds in datasets {
        if ds.genes != first.genes {
            return Err(Error::Ingest("custodian headers differ".into()));
        }
        values.extend(encode_genes(ds, fixed)?);
        labels.extend_from_slice(&ds.labels);
    }
    let d = first.genes.len();
    let loops = cfg.max_loops.min(cfg.hyperparameters.len());
    let folds = cfg.folds as i64;
    let mut run = ClearRun { chosen: None, loops: 0, votes: Vec::new(), metric_sums: Vec::new(), synthetic: None };
    let mut best: Option<(i64, usize)> = None;
    for (l, &h) in cfg.hyperparameters.iter().take(loops).enumerate() {
        let sums = loop_metrics(&values, &labels, cfg, l, h)?;
        let pass = passes(sums, folds, thresholds, cfg)?;
        run.metric_sums.push(sums);
        run.loops = l + 1;
        match cfg.mode {
            SearchMode::FirstPass => {
                run.votes.push(pass);
                if pass {
                    run.chosen = Some(h);
                    break;
                }
            }
            SearchMode::Exhaustive => {
                if pass && best.is_none_or(|(w, _)| sums.0 < w) {
                    best = Some((sums.0, h));
                }
            }
        }
    }
    if cfg.mode == SearchMode::Exhaustive {
        run.chosen = best.map(|(_, h)| h);
    }
    if let Some(h) = run.chosen {
        let b = clear_bin(&values);
        let rows = with_labels(b.bins, &labels);
        let n_out = cfg.synthetic_rows.unwrap_or(rows.len());
        let synth = synthesize(&rows, d, cfg, None, n_out, h)?;
        let mut ds = Dataset { genes: first.genes.clone(), ..Dataset::default() };
        for r in synth {
            ds.values.push((0..d).map(|g| decode_at(RingValue::from_i64(b.means[g][r[g] as usize]), cfg.frac_bits)).collect());
            ds.labels.push(r[d]);
        }
        run.synthetic = Some(ds);
    }
    Ok(run)
}
