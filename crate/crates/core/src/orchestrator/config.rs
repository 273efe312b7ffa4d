//! Public run parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::LrParams;
use crate::ring::FixedPointConfig;
use crate::runtime::{Seed, SessionParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

/// How the hyperparameter list is scanned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Stop at the first hyperparameter every custodian accepts.
    #[default]
    FirstPass,
    /// Evaluate every hyperparameter within the loop bound and keep the
    /// accepted one with the lowest workload error.
    Exhaustive,
}

impl SearchMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first-pass" => Some(SearchMode::FirstPass),
            "exhaustive" => Some(SearchMode::Exhaustive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SearchMode::FirstPass => "first-pass",
            SearchMode::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// K
    pub folds: usize,
    /// L
    pub max_loops: usize,
    /// H, as generator iteration counts.
    pub hyperparameters: Vec<usize>,
    pub synthesis: PrivacyBudget,
    pub preprocessing: PrivacyBudget,
    /// Master public seed.
    pub seed: u64,
    pub custodians: usize,
    pub frac_bits: u32,
    /// Gene values must satisfy `|x| < 2^value_bits`.
    pub value_bits: u32,
    pub lr: LrParams,
    pub mode: SearchMode,
    /// Published row count; the combined row count when unset.
    pub synthetic_rows: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            folds: 5,
            max_loops: 4,
            hyperparameters: vec![10, 15, 25, 30],
            synthesis: PrivacyBudget { epsilon: 1.0, delta: 1e-5 },
            preprocessing: PrivacyBudget { epsilon: 1.0, delta: 1e-5 },
            seed: 0,
            custodians: 2,
            frac_bits: FixedPointConfig::DEFAULT_FRAC_BITS,
            value_bits: 16,
            lr: LrParams::default(),
            mode: SearchMode::FirstPass,
            synthetic_rows: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.folds < 2 {
            return bad(format!("K must be at least 2, got {}", self.folds));
        }
        if self.max_loops < 1 {
            return bad("L must be at least 1".into());
        }
        if self.hyperparameters.is_empty() {
            return bad("hyperparameter list is empty".into());
        }
        for (name, b) in [("synthesis", self.synthesis), ("preprocessing", self.preprocessing)] {
            if !(b.epsilon > 0.0 && b.epsilon.is_finite()) || !(b.delta > 0.0 && b.delta < 1.0) {
                return bad(format!("{name} budget ({}, {}) is not positive", b.epsilon, b.delta));
            }
        }
        if self.custodians == 0 {
            return bad("at least one custodian is required".into());
        }
        FixedPointConfig::new(self.frac_bits)?;
        if self.value_bits == 0 || self.value_bits + self.frac_bits > 40 {
            return bad(format!("value_bits {} leaves no headroom at {} fractional bits", self.value_bits, self.frac_bits));
        }
        if self.lr.learning_rate <= 0.0 || !self.lr.learning_rate.is_finite() {
            return bad(format!("learning rate {} is not positive", self.lr.learning_rate));
        }
        if self.synthetic_rows == Some(0) {
            return bad("synthetic_rows must be positive".into());
        }
        Ok(())
    }

    pub fn fixed(&self) -> Result<FixedPointConfig> {
        FixedPointConfig::new(self.frac_bits)
    }

    pub fn public_seed(&self) -> Seed {
        Seed::from_u64(self.seed)
    }

    /// Fields compared at the setup handshake.
    pub fn session_params(&self) -> Result<SessionParams> {
        let h: Vec<String> = self.hyperparameters.iter().map(ToString::to_string).collect();
        Ok(SessionParams::new(self.fixed()?)
            .with_field("folds", self.folds)
            .with_field("max_loops", self.max_loops)
            .with_field("hyperparameters", h.join(","))
            .with_field("epsilon_s", self.synthesis.epsilon)
            .with_field("delta_s", self.synthesis.delta)
            .with_field("epsilon_p", self.preprocessing.epsilon)
            .with_field("delta_p", self.preprocessing.delta)
            .with_field("seed", self.seed)
            .with_field("custodians", self.custodians)
            .with_field("value_bits", self.value_bits)
            .with_field("epochs", self.lr.epochs)
            .with_field("learning_rate", self.lr.learning_rate)
            .with_field("mode", self.mode.name())
            .with_field("synthetic_rows", self.synthetic_rows.map_or("combined".to_string(), |n| n.to_string())))
    }
}
