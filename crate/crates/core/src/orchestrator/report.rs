//! Run reports: decision, budget, and per-party accounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, PrivacyBudget};
use super::pipeline::{noise_calibration, TuningOutcome};
use crate::error::Result;
use crate::marginals::measurement_count;
use crate::runtime::{CommLedger, Opening, OpeningKind, Party};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub synthesis: PrivacyBudget,
    pub preprocessing: PrivacyBudget,
    pub measurements: usize,
    pub epsilon_per_measurement: f64,
    pub delta_per_measurement: f64,
    pub sigma: f64,
    /// `(eps_s + eps_p, delta_s + delta_p)`, independent of the loop count.
    pub claimed_epsilon: f64,
    pub claimed_delta: f64,
    pub preprocessing_consumed: bool,
    pub notes: Vec<String>,
}

impl BudgetReport {
    pub fn new(cfg: &PipelineConfig, genes: usize) -> Result<Self> {
        let cal = noise_calibration(cfg, genes)?;
        Ok(BudgetReport {
            synthesis: cfg.synthesis,
            preprocessing: cfg.preprocessing,
            measurements: measurement_count(genes),
            epsilon_per_measurement: cal.eps_q,
            delta_per_measurement: cal.delta_q,
            sigma: cal.sigma,
            claimed_epsilon: cfg.synthesis.epsilon + cfg.preprocessing.epsilon,
            claimed_delta: cfg.synthesis.delta + cfg.preprocessing.delta,
            preprocessing_consumed: false,
            notes: vec![
                "synthesis budget is spent afresh in every loop; only the published measurement is released".into(),
                "quantile binning is exact, so the preprocessing budget is reserved but not consumed".into(),
            ],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningSummary {
    pub label: String,
    pub kind: OpeningKind,
    pub values: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyReport {
    pub party: u8,
    pub ledger: CommLedger,
    /// Wall-clock seconds per protocol label.
    pub seconds: BTreeMap<String, f64>,
    pub openings: Vec<OpeningSummary>,
}

impl PartyReport {
    pub fn from_party(p: &Party) -> Self {
        PartyReport {
            party: p.id().get(),
            ledger: p.ledger().clone(),
            seconds: p.timings().iter().map(|(k, v)| (k.name().to_string(), v.as_secs_f64())).collect(),
            openings: p.openings().iter().map(summarize).collect(),
        }
    }
}

fn summarize(o: &Opening) -> OpeningSummary {
    OpeningSummary { label: o.label.name().to_string(), kind: o.kind, values: o.values.len() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub decision: String,
    pub hyperparameter: Option<usize>,
    pub loops: usize,
    pub votes: Vec<bool>,
    pub mode: String,
    pub rows: usize,
    pub genes: usize,
    pub custodians: usize,
    pub synthetic_rows: Option<usize>,
    pub budget: BudgetReport,
    pub parties: Vec<PartyReport>,
    pub config: PipelineConfig,
}

impl RunReport {
    pub fn new(
        cfg: &PipelineConfig,
        tuning: &TuningOutcome,
        rows: usize,
        genes: usize,
        synthetic_rows: Option<usize>,
        parties: Vec<PartyReport>,
    ) -> Result<Self> {
        Ok(RunReport {
            decision: if tuning.chosen.is_some() { "publish" } else { "no-publish" }.into(),
            hyperparameter: tuning.chosen,
            loops: tuning.loops,
            votes: tuning.votes.clone(),
            mode: cfg.mode.name().into(),
            rows,
            genes,
            custodians: cfg.custodians,
            synthetic_rows,
            budget: BudgetReport::new(cfg, genes)?,
            parties,
            config: cfg.clone(),
        })
    }

    pub fn published(&self) -> bool {
        self.hyperparameter.is_some()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without per-party accounting, for cross-party comparison.
    pub fn public_fields(&self) -> RunReport {
        RunReport { parties: Vec::new(), ..self.clone() }
    }
}
