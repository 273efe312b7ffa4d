//! Multiclass logistic regression on binned shares.
//!
//! Features are the gene bins as plain integers plus a constant bias of 1,
//! so products with fixed-point weights land at the session precision
//! without truncation. Training is full-batch gradient descent on softmax
//! cross-entropy from zero weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::{indicator5, LABEL_DOMAIN};
use crate::primitives::{div, eq, lt, lt_public, reciprocal};
use crate::ring::RingValue;
use crate::rss::{Share, ShareMatrix};
use crate::runtime::{Party, PartyId, Protocol};

pub const CLASSES: usize = LABEL_DOMAIN;

/// Coefficients of the degree-5 approximation of `exp(t)` on `[-8, 0]`,
/// lowest degree first.
pub const EXP_COEFFS: [f64; 6] =
    [9.92373966e-01, 9.22762264e-01, 3.66347469e-01, 7.40245643e-02, 7.39896788e-03, 2.88885912e-04];

/// Shifted scores below this are clamped before the exponential.
pub const EXP_CLAMP: f64 = -8.0;

/// Fractional bits of the public exponential coefficients.
pub const COEFF_BITS: u32 = 28;

/// Extra fractional bits of the public step size `lr / N`.
pub const STEP_EXTRA_BITS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams { epochs: 150, learning_rate: 0.05 }
    }
}

/// Shared weights, `(d + 1) x 5` row-major with the bias row last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrModel {
    pub features: usize,
    pub weights: Vec<Share>,
}

/// Row-major `n x (d + 1)` design matrix of integer bins and the bias.
pub fn design(id: PartyId, data: &ShareMatrix) -> Vec<Share> {
    let d = data.genes();
    let one = Share::public(id, RingValue::ONE);
    let mut x = Vec::with_capacity(data.rows * (d + 1));
    for r in 0..data.rows {
        x.extend((0..d).map(|g| data.get(r, g)));
        x.push(one);
    }
    x
}

/// One-hot labels at the session precision, row-major `n x 5`.
pub fn one_hot(p: &mut Party, labels: &[Share]) -> Result<Vec<Share>> {
    let f = p.fixed().frac_bits();
    let ind = indicator5(p, labels, 3)?;
    let n = labels.len();
    Ok((0..n * CLASSES).map(|k| ind[k % CLASSES][k / CLASSES].shl(f - 3)).collect())
}

/// Row-wise maximum of an `n x 5` score matrix by a pairwise tournament.
/// With `with_index` also returns the winning class, lowest index on ties.
fn tournament(p: &mut Party, z: &[Share], n: usize, with_index: bool) -> Result<(Vec<Share>, Vec<Share>)> {
    let id = p.id();
    let col = |c: usize| -> Vec<Share> { (0..n).map(|r| z[r * CLASSES + c]).collect() };
    let idx = |c: u64| vec![Share::public(id, RingValue(c)); n];
    // Contenders: (values, class index).
    let mut layer: Vec<(Vec<Share>, Vec<Share>)> = (0..CLASSES).map(|c| (col(c), idx(c as u64))).collect();
    while layer.len() > 1 {
        let pairs = layer.len() / 2;
        let mut left = Vec::with_capacity(pairs * n);
        let mut right = Vec::with_capacity(pairs * n);
        for k in 0..pairs {
            left.extend_from_slice(&layer[2 * k].0);
            right.extend_from_slice(&layer[2 * k + 1].0);
        }
        // The right contender wins only when strictly larger.
        let s = lt(p, &left, &right)?;
        let mut sel = s.clone();
        let mut gap: Vec<Share> = right.iter().zip(&left).map(|(&r, &l)| r - l).collect();
        if with_index {
            sel.extend_from_slice(&s);
            for k in 0..pairs {
                gap.extend(layer[2 * k + 1].1.iter().zip(&layer[2 * k].1).map(|(&r, &l)| r - l));
            }
        }
        let moved = p.mul(&sel, &gap)?;
        let mut next = Vec::with_capacity(pairs + 1);
        for k in 0..pairs {
            let v = (0..n).map(|r| left[k * n + r] + moved[k * n + r]).collect();
            let i = if with_index {
                let base = pairs * n + k * n;
                layer[2 * k].1.iter().enumerate().map(|(r, &l)| l + moved[base + r]).collect()
            } else {
                Vec::new()
            };
            next.push((v, i));
        }
        if layer.len() % 2 == 1 {
            next.push(layer.pop().unwrap());
        }
        layer = next;
    }
    Ok(layer.pop().unwrap())
}

/// [`EXP_COEFFS`] rounded to [`COEFF_BITS`] fractional bits.
pub fn exp_coefficients() -> [RingValue; 6] {
    EXP_COEFFS.map(|v| RingValue::from_i64((v * 2f64.powi(COEFF_BITS as i32)).round() as i64))
}

/// Row-wise softmax of an `n x 5` score matrix at the session precision.
pub fn softmax(p: &mut Party, z: &[Share], n: usize) -> Result<Vec<Share>> {
    let c = p.fixed();
    let f = c.frac_bits();
    let id = p.id();
    let (max, _) = tournament(p, z, n, false)?;
    let mut t: Vec<Share> = z.iter().enumerate().map(|(k, &v)| v - max[k / CLASSES]).collect();

    let floor = c.encode(EXP_CLAMP)?;
    let below = lt_public(p, &t, floor)?;
    let gap: Vec<Share> = t.iter().map(|&v| Share::public(id, floor) - v).collect();
    let lift = p.mul(&below, &gap)?;
    for (v, l) in t.iter_mut().zip(lift) {
        *v += l;
    }

    let m = t.len();
    let t2 = p.mul_fixed(&t, &t)?;
    let lhs: Vec<Share> = t2.iter().chain(&t2).copied().collect();
    let rhs: Vec<Share> = t.iter().chain(&t2).copied().collect();
    let t34 = p.mul_fixed(&lhs, &rhs)?;
    let (t3, t4) = t34.split_at(m);
    let t5 = p.mul_fixed(t4, &t)?;

    let a = exp_coefficients();
    let powers = [&t[..], &t2[..], t3, t4, &t5[..]];
    let acc: Vec<Share> = (0..m)
        .map(|k| {
            let mut s = Share::public(id, a[0].shl(f));
            for (j, pw) in powers.iter().enumerate() {
                s += pw[k].mul_public(a[j + 1]);
            }
            s
        })
        .collect();
    let e = p.trunc(&acc, COEFF_BITS)?;

    let sums: Vec<Share> = e.chunks_exact(CLASSES).map(|r| r.iter().copied().sum()).collect();
    let inv = reciprocal(p, &sums)?;
    let spread: Vec<Share> = (0..m).map(|k| inv[k / CLASSES]).collect();
    p.mul_fixed(&e, &spread)
}

/// `X^T (softmax(X W) - Y)` at the session precision.
pub fn gradient(p: &mut Party, x: &[Share], xt: &[Share], y: &[Share], w: &[Share], n: usize, k: usize) -> Result<Vec<Share>> {
    let z = p.matmul(x, n, k, w, CLASSES)?;
    let probs = softmax(p, &z, n)?;
    let diff: Vec<Share> = probs.iter().zip(y).map(|(&a, &b)| a - b).collect();
    p.matmul(xt, k, n, &diff, CLASSES)
}

fn transpose(x: &[Share], n: usize, k: usize) -> Vec<Share> {
    let mut t = Vec::with_capacity(x.len());
    for j in 0..k {
        t.extend((0..n).map(|i| x[i * k + j]));
    }
    t
}

/// Public step multiplier `round(lr / N * 2^(f + STEP_EXTRA_BITS))`.
pub fn step_multiplier(frac_bits: u32, learning_rate: f64, rows: usize) -> RingValue {
    RingValue::from_i64((learning_rate / rows as f64 * 2f64.powi((frac_bits + STEP_EXTRA_BITS) as i32)).round() as i64)
}

/// Trains on a binned matrix. Communication grows linearly in `epochs`.
pub fn lr_train(p: &mut Party, data: &ShareMatrix, params: &LrParams) -> Result<LrModel> {
    p.scoped(Protocol::Lr, |p| {
        let (n, k) = (data.rows, data.genes() + 1);
        let mut w = vec![Share::ZERO; k * CLASSES];
        if params.epochs == 0 {
            return Ok(LrModel { features: k, weights: w });
        }
        if n == 0 {
            return Err(Error::Parameter("training on an empty dataset".into()));
        }
        let f = p.fixed().frac_bits();
        let x = design(p.id(), data);
        let xt = transpose(&x, n, k);
        let y = one_hot(p, &data.column(data.label_col()))?;
        let step = step_multiplier(f, params.learning_rate, n);
        for _ in 0..params.epochs {
            let g = gradient(p, &x, &xt, &y, &w, n, k)?;
            let scaled: Vec<Share> = g.iter().map(|v| v.mul_public(step)).collect();
            let delta = p.trunc(&scaled, f + STEP_EXTRA_BITS)?;
            for (wi, di) in w.iter_mut().zip(delta) {
                *wi -= di;
            }
        }
        Ok(LrModel { features: k, weights: w })
    })
}

/// Predicted class per row (shared integer).
pub fn predict(p: &mut Party, model: &LrModel, data: &ShareMatrix) -> Result<Vec<Share>> {
    if data.genes() + 1 != model.features {
        return Err(Error::Parameter(format!(
            "model expects {} genes, data has {}",
            model.features - 1,
            data.genes()
        )));
    }
    let x = design(p.id(), data);
    let z = p.matmul(&x, data.rows, model.features, &model.weights, CLASSES)?;
    Ok(tournament(p, &z, data.rows, true)?.1)
}

/// Share of test rows whose predicted class equals the label, at the
/// session precision, rounded down.
pub fn lr_accuracy(p: &mut Party, model: &LrModel, test: &ShareMatrix) -> Result<Share> {
    p.scoped(Protocol::Lr, |p| {
        if test.rows == 0 {
            return Err(Error::Parameter("accuracy on an empty test set".into()));
        }
        let f = p.fixed().frac_bits();
        let pred = predict(p, model, test)?;
        let hit = eq(p, &pred, &test.column(test.label_col()))?;
        let count: Share = hit.into_iter().sum();
        let den = Share::public(p.id(), RingValue(test.rows as u64));
        Ok(div(p, &[count], &[den], 1, f)?[0])
    })
}
