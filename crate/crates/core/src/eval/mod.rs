//! Utility metrics of synthetic data, computed on shares.

pub mod lr;
pub mod wle;

pub use lr::{lr_accuracy, lr_train, predict, LrModel, LrParams};
pub use wle::wle;

use crate::error::Result;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{Party, Protocol};

/// Secret metrics of one evaluation. Never opened during tuning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricVector {
    pub wle: Share,
    pub accuracy: Share,
}

/// Workload error of the synthetic training data against the real training
/// data, and test accuracy of a model trained on the synthetic data.
pub fn evaluate(
    p: &mut Party,
    synth_train: &ShareMatrix,
    test: &ShareMatrix,
    real_train: &ShareMatrix,
    params: &LrParams,
) -> Result<MetricVector> {
    p.scoped(Protocol::Eval, |p| {
        let wle = wle(p, real_train, synth_train)?;
        let model = lr_train(p, synth_train, params)?;
        let accuracy = lr_accuracy(p, &model, test)?;
        Ok(MetricVector { wle, accuracy })
    })
}
