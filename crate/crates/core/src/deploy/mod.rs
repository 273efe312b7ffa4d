//! Running the pipeline: all parties in one process, or one server per
//! process over TCP with custodians as separate clients.

pub mod net;
pub mod upload;

pub use net::{run_custodian, serve_party, serve_party_on, CustodianOptions, CustodianRun, PartyOptions, PartyRun};
pub use upload::{check_upload, ingest, prepare_uploads, reconstruct_published, RevealMessage, Upload};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::local::{derived_party_seeds, party_private_seed, run_parties, LOCAL_TIMEOUT};
use crate::orchestrator::{run_pipeline, ClearThresholds, PartyOutcome, PartyReport, PipelineConfig, RunReport};
use crate::runtime::{Opening, PartyId, Seed};

/// Share randomness of custodian `c`: derived from `seed` when given.
pub fn custodian_rng(seed: Option<u64>, custodian: u32) -> ChaCha20Rng {
    match seed {
        Some(s) => Seed::from_u64(s).derive(&format!("custodian/{custodian}")).rng(),
        None => ChaCha20Rng::from_entropy(),
    }
}

/// Private seed of server `id`: derived from `seed` when given.
pub fn server_seed(seed: Option<u64>, id: PartyId) -> Seed {
    match seed {
        Some(s) => party_private_seed(Seed::from_u64(s), id),
        None => Seed(rand::random()),
    }
}

pub fn reveal_message(cfg: &PipelineConfig, id: PartyId, out: &PartyOutcome) -> Option<RevealMessage> {
    out.published.as_ref().map(|(rows, _, pairs)| RevealMessage {
        party: id.get(),
        header: out.header.clone(),
        rows: *rows,
        frac_bits: cfg.frac_bits,
        pairs: pairs.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct LocalRun {
    pub report: RunReport,
    pub synthetic: Option<Dataset>,
    /// Each server's opening log.
    pub openings: [Vec<Opening>; 3],
}

/// Three in-process servers and all custodians. Every seed derives from
/// `cfg.seed`, so a TCP deployment started with the same seed produces the
/// same output.
pub fn run_local(cfg: &PipelineConfig, datasets: &[Dataset], thresholds: &[ClearThresholds]) -> Result<LocalRun> {
    cfg.validate()?;
    if datasets.len() != cfg.custodians || thresholds.len() != cfg.custodians {
        return Err(Error::Parameter(format!(
            "configured for {} custodians, got {} datasets and {} threshold files",
            cfg.custodians,
            datasets.len(),
            thresholds.len()
        )));
    }
    let params = cfg.session_params()?;
    let mut per_server: [Vec<Upload>; 3] = Default::default();
    for (c, (d, t)) in datasets.iter().zip(thresholds).enumerate() {
        let c = c as u32 + 1;
        for (i, u) in prepare_uploads(c, d, t, cfg, &mut custodian_rng(Some(cfg.seed), c))?.into_iter().enumerate() {
            per_server[i].push(u);
        }
    }
    let outs = run_parties(&params, derived_party_seeds(cfg.seed), LOCAL_TIMEOUT, |p| {
        let inputs = ingest(p, &per_server[p.id().index()], &params)?;
        let out = run_pipeline(p, cfg, &inputs)?;
        Ok((out, PartyReport::from_party(p), p.openings().to_vec()))
    })?;
    let [a, b, c] = outs;
    if a.0.tuning != b.0.tuning || a.0.tuning != c.0.tuning {
        return Err(Error::Integrity("servers disagree on the tuning outcome".into()));
    }
    let reveals: Vec<RevealMessage> =
        [&a, &b, &c].iter().enumerate().filter_map(|(i, o)| reveal_message(cfg, PartyId::from_index(i), &o.0)).collect();
    let synthetic = match reveals.len() {
        0 => None,
        3 => Some(reconstruct_published(&reveals)?),
        _ => return Err(Error::Integrity("only some servers published".into())),
    };
    let report = RunReport::new(
        cfg,
        &a.0.tuning,
        a.0.rows,
        a.0.genes,
        synthetic.as_ref().map(Dataset::rows),
        vec![a.1, b.1, c.1],
    )?;
    Ok(LocalRun { report, synthetic, openings: [a.2, b.2, c.2] })
}
