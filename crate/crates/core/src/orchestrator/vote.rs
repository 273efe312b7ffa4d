//! Unanimous secret vote of the custodians on averaged fold metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{eq_public, lt, Average};
use crate::ring::{FixedPointConfig, RingValue};
use crate::rss::Share;
use crate::runtime::{Party, Protocol};

/// Thresholds are clamped to this magnitude before encoding, so that
/// `K * threshold` stays far inside the ring.
pub const THRESHOLD_LIMIT: f64 = (1u64 << 20) as f64;

/// One custodian's clear thresholds. Workload error is lower-is-better,
/// accuracy higher-is-better.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearThresholds {
    pub max_wle: f64,
    pub min_accuracy: f64,
}

impl ClearThresholds {
    pub const VACUOUS: ClearThresholds = ClearThresholds { max_wle: f64::INFINITY, min_accuracy: 0.0 };

    /// Ring encodings `[max_wle, min_accuracy]` after clamping.
    pub fn encode(&self, c: &FixedPointConfig) -> Result<[RingValue; 2]> {
        let clamp = |v: f64| {
            if v.is_nan() {
                Err(Error::Parameter("threshold is NaN".into()))
            } else {
                Ok(v.clamp(-THRESHOLD_LIMIT, THRESHOLD_LIMIT))
            }
        };
        Ok([c.encode(clamp(self.max_wle)?)?, c.encode(clamp(self.min_accuracy)?)?])
    }
}

/// One custodian's shared thresholds at the session precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub max_wle: Share,
    pub min_accuracy: Share,
}

/// Fold-averaged metrics kept as exact sums over `count` folds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AveragedMetrics {
    pub wle: Average,
    pub accuracy: Average,
}

/// Shared bit: every custodian's thresholds are met. A metric equal to its
/// threshold meets it. Nothing is opened.
pub fn unanimous(p: &mut Party, m: &AveragedMetrics, th: &[Thresholds]) -> Result<Share> {
    p.scoped(Protocol::Vote, |p| {
        let c = th.len();
        let k = RingValue(m.wle.count);
        let ka = RingValue(m.accuracy.count);
        // fail_wle = [K max_wle < sum wle], fail_acc = [sum acc < K min_acc]
        let mut lhs = Vec::with_capacity(2 * c);
        let mut rhs = Vec::with_capacity(2 * c);
        for t in th {
            lhs.push(t.max_wle.mul_public(k));
            rhs.push(m.wle.sum);
        }
        for t in th {
            lhs.push(m.accuracy.sum);
            rhs.push(t.min_accuracy.mul_public(ka));
        }
        let fail = lt(p, &lhs, &rhs)?;
        let one = Share::public(p.id(), RingValue::ONE);
        let ok: Vec<Share> = fail.iter().map(|&b| one - b).collect();
        let pass = p.mul(&ok[..c], &ok[c..])?;
        let votes: Share = pass.into_iter().sum();
        Ok(eq_public(p, &[votes], RingValue(c as u64))?[0])
    })
}

/// Opens only the unanimity bit.
pub fn secret_vote(p: &mut Party, m: &AveragedMetrics, th: &[Thresholds]) -> Result<bool> {
    let bit = unanimous(p, m, th)?;
    let opened = p.scoped(Protocol::Vote, |p| p.open(&[bit]))?;
    match opened[0].0 {
        0 => Ok(false),
        1 => Ok(true),
        v => Err(Error::Integrity(format!("vote opened to {v}"))),
    }
}
