//! The end-to-end loop: concatenate, tune over folds, vote, publish.

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::marginals::{calibrate, measurement_count, noisy_marginals, secure_generate, NoiseCalibration};
use crate::preprocess::{bin, bin_with_train_cuts, inv_bin};
use crate::primitives::{avg, lt, SENTINEL};
use crate::ring::RingValue;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{OpeningKind, Party, Protocol, Seed};

use super::config::{PipelineConfig, SearchMode};
use super::folds::FoldPlan;
use super::vote::{secret_vote, unanimous, AveragedMetrics, Thresholds};

/// Local stream feeding the noise of one fold (`Some((loop, fold))`) or of
/// the published measurement (`None`).
pub fn noise_stream(at: Option<(usize, usize)>) -> String {
    match at {
        Some((l, k)) => format!("noise/loop{l}/fold{k}"),
        None => "noise/publish".into(),
    }
}

/// Generator randomness, derived from the public seed.
pub fn generator_seed(cfg: &PipelineConfig, at: Option<(usize, usize)>) -> Seed {
    let base = cfg.public_seed().derive("generator");
    match at {
        Some((l, k)) => base.derive(&format!("loop{l}/fold{k}")),
        None => base.derive("publish"),
    }
}

pub fn fold_plan(cfg: &PipelineConfig, rows: usize) -> Result<FoldPlan> {
    FoldPlan::new(rows, cfg.folds, cfg.public_seed().derive("folds"))
}

pub fn noise_calibration(cfg: &PipelineConfig, genes: usize) -> Result<NoiseCalibration> {
    calibrate(cfg.synthesis.epsilon, cfg.synthesis.delta, measurement_count(genes))
}

/// One custodian's contribution as seen by a server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CustodianInput {
    pub header: Vec<String>,
    pub data: ShareMatrix,
    pub thresholds: Thresholds,
}

/// Stacks custodian matrices in custodian order. Headers must agree.
pub fn concat(p: &mut Party, parts: &[CustodianInput]) -> Result<ShareMatrix> {
    p.scoped(Protocol::Concat, |_| {
        let first = parts.first().ok_or_else(|| Error::Ingest("no custodian data".into()))?;
        for (c, part) in parts.iter().enumerate().skip(1) {
            if part.header.len() != first.header.len() {
                return Err(Error::Ingest(format!(
                    "custodian {} has {} columns, custodian 1 has {}",
                    c + 1,
                    part.header.len(),
                    first.header.len()
                )));
            }
            if let Some(i) = (0..first.header.len()).find(|&i| part.header[i] != first.header[i]) {
                return Err(Error::Ingest(format!(
                    "column {} is `{}` for custodian {} but `{}` for custodian 1",
                    i + 1,
                    part.header[i],
                    c + 1,
                    first.header[i]
                )));
            }
        }
        let cols = first.data.cols;
        let cells: Vec<Share> = parts.iter().flat_map(|c| c.data.cells.iter().copied()).collect();
        Ok(ShareMatrix::new(cells.len() / cols.max(1), cols, cells))
    })
}

/// Result of the hyperparameter search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TuningOutcome {
    pub loops: usize,
    /// The accepted hyperparameter, if any.
    pub chosen: Option<usize>,
    /// Opened vote bits in loop order (first-pass mode only).
    pub votes: Vec<bool>,
}

/// Fold-averaged secret metrics for hyperparameter `h` in loop `l`.
pub fn fold_metrics(
    p: &mut Party,
    data: &ShareMatrix,
    plan: &FoldPlan,
    cfg: &PipelineConfig,
    cal: &NoiseCalibration,
    l: usize,
    h: usize,
) -> Result<AveragedMetrics> {
    let mut wle = Vec::with_capacity(plan.folds());
    let mut acc = Vec::with_capacity(plan.folds());
    for k in 0..plan.folds() {
        let (tr, te) = plan.split(k)?;
        let train = data.select_rows(&tr);
        let test = data.select_rows(&te);
        let binned = bin(p, &train, cfg.value_bits, false)?;
        let test = bin_with_train_cuts(p, &test, &binned.cuts)?;
        let marg = noisy_marginals(p, &binned.data, cal, &noise_stream(Some((l, k))))?;
        let synth = secure_generate(p, &marg, train.rows, h, generator_seed(cfg, Some((l, k))))?;
        let m = evaluate(p, &synth, &test, &binned.data, &cfg.lr)?;
        wle.push(m.wle);
        acc.push(m.accuracy);
    }
    p.scoped(Protocol::Avg, |_| Ok(AveragedMetrics { wle: avg(&wle), accuracy: avg(&acc) }))
}

/// Scans the hyperparameters for at most `min(L, |H|)` loops.
pub fn tuning_loop(p: &mut Party, data: &ShareMatrix, cfg: &PipelineConfig, th: &[Thresholds]) -> Result<TuningOutcome> {
    let plan = fold_plan(cfg, data.rows)?;
    let cal = noise_calibration(cfg, data.genes())?;
    let loops = cfg.max_loops.min(cfg.hyperparameters.len());
    let mut out = TuningOutcome::default();
    match cfg.mode {
        SearchMode::FirstPass => {
            for (l, &h) in cfg.hyperparameters.iter().take(loops).enumerate() {
                let m = fold_metrics(p, data, &plan, cfg, &cal, l, h)?;
                let pass = secret_vote(p, &m, th)?;
                out.loops = l + 1;
                out.votes.push(pass);
                if pass {
                    out.chosen = Some(h);
                    break;
                }
            }
        }
        SearchMode::Exhaustive => {
            // Best accepted loop so far (1-based, 0 = none) and its WLE sum.
            let id = p.id();
            let mut best_idx = Share::ZERO;
            let mut best_wle = Share::public(id, SENTINEL);
            for (l, &h) in cfg.hyperparameters.iter().take(loops).enumerate() {
                let m = fold_metrics(p, data, &plan, cfg, &cal, l, h)?;
                let pass = unanimous(p, &m, th)?;
                (best_idx, best_wle) = p.scoped(Protocol::Vote, |p| {
                    let lower = lt(p, &[m.wle.sum], &[best_wle])?;
                    let better = p.mul(&[pass], &lower)?[0];
                    let gap = [m.wle.sum - best_wle, Share::public(id, RingValue(l as u64 + 1)) - best_idx];
                    let moved = p.mul(&[better, better], &gap)?;
                    Ok((best_idx + moved[1], best_wle + moved[0]))
                })?;
                out.loops = l + 1;
            }
            let opened = p.scoped(Protocol::Vote, |p| p.open(&[best_idx]))?[0].0 as usize;
            if opened > loops {
                return Err(Error::Integrity(format!("best loop index opened to {opened}")));
            }
            out.chosen = opened.checked_sub(1).map(|i| cfg.hyperparameters[i]);
        }
    }
    Ok(out)
}

/// Bins the full data, measures, generates with `h` and de-bins. Returns the
/// shared synthetic matrix; nothing is opened.
pub fn publish_path(p: &mut Party, data: &ShareMatrix, cfg: &PipelineConfig, h: usize) -> Result<ShareMatrix> {
    let cal = noise_calibration(cfg, data.genes())?;
    let binned = bin(p, data, cfg.value_bits, true)?;
    let means = binned.means.as_ref().expect("means requested");
    let marg = noisy_marginals(p, &binned.data, &cal, &noise_stream(None))?;
    let n_out = cfg.synthetic_rows.unwrap_or(data.rows);
    let synth = secure_generate(p, &marg, n_out, h, generator_seed(cfg, None))?;
    inv_bin(p, &synth, means)
}

/// Hands this server's share pairs of `m` to every custodian.
pub fn reveal_to_custodians(p: &mut Party, m: &ShareMatrix, custodians: usize) -> Result<Vec<[u64; 2]>> {
    p.scoped(Protocol::Reveal, |p| {
        for _ in 0..custodians {
            p.record_external_send(16 * m.cells.len() as u64);
        }
        p.log_opening(OpeningKind::Custodians, &[]);
        Ok(m.cells.iter().map(|s| [s.a.0, s.b.0]).collect())
    })
}

/// What one server holds at the end of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyOutcome {
    pub tuning: TuningOutcome,
    pub rows: usize,
    pub genes: usize,
    pub header: Vec<String>,
    /// This server's share pairs of the published matrix.
    pub published: Option<(usize, usize, Vec<[u64; 2]>)>,
}

/// Algorithm body executed in lockstep by every server.
pub fn run_pipeline(p: &mut Party, cfg: &PipelineConfig, inputs: &[CustodianInput]) -> Result<PartyOutcome> {
    if inputs.len() != cfg.custodians {
        return Err(Error::Ingest(format!("expected {} custodians, got {}", cfg.custodians, inputs.len())));
    }
    let data = concat(p, inputs)?;
    if data.cols < 2 {
        return Err(Error::Ingest("datasets need at least one gene column".into()));
    }
    let th: Vec<Thresholds> = inputs.iter().map(|c| c.thresholds).collect();
    let tuning = tuning_loop(p, &data, cfg, &th)?;
    let published = match tuning.chosen {
        Some(h) => {
            let m = publish_path(p, &data, cfg, h)?;
            let pairs = reveal_to_custodians(p, &m, cfg.custodians)?;
            Some((m.rows, m.cols, pairs))
        }
        None => None,
    };
    Ok(PartyOutcome { tuning, rows: data.rows, genes: data.genes(), header: inputs[0].header.clone(), published })
}
