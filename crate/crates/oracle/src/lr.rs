//! Logistic regression in the clear: a fixed-point replica of the secure
//! trainer with floor truncation, and a floating-point reference.

use mpcsynth_core::eval::lr::{exp_coefficients, step_multiplier, CLASSES, COEFF_BITS, EXP_CLAMP, STEP_EXTRA_BITS};
use mpcsynth_core::eval::LrParams;
use mpcsynth_core::FixedPointConfig;

/// Integer bins plus the bias, row-major `n x (d + 1)`.
fn design(rows: &[Vec<u8>]) -> (Vec<i64>, usize) {
    let k = rows.first().map_or(1, Vec::len);
    let mut x = Vec::with_capacity(rows.len() * k);
    for r in rows {
        x.extend(r[..k - 1].iter().map(|&b| b as i64));
        x.push(1);
    }
    (x, k)
}

fn enc(f: u32, v: f64) -> i64 {
    FixedPointConfig::new(f).unwrap().encode(v).unwrap().as_i64()
}

fn mulf(a: i64, b: i64, f: u32) -> i64 {
    a.wrapping_mul(b) >> f
}

/// Scores `X W` at `f` bits.
fn scores(x: &[i64], k: usize, w: &[i64]) -> Vec<i64> {
    let n = x.len() / k;
    let mut z = vec![0i64; n * CLASSES];
    for r in 0..n {
        for c in 0..CLASSES {
            z[r * CLASSES + c] = (0..k).map(|j| x[r * k + j].wrapping_mul(w[j * CLASSES + c])).sum();
        }
    }
    z
}

fn reciprocal(x: i64, f: u32) -> i64 {
    let (c0, c1, two) = (enc(f, 0.87249782), enc(f, 0.1430221), enc(f, 2.0));
    let mut y = c0 - mulf(x, c1, f);
    for _ in 0..5 {
        let e = two - mulf(x, y, f);
        y = mulf(y, e, f);
    }
    y
}

/// Row-wise softmax of `n x 5` scores, same polynomial and reciprocal as
/// the secure path.
pub fn softmax(z: &[i64], f: u32) -> Vec<i64> {
    let a = exp_coefficients().map(|v| v.as_i64());
    let floor = enc(f, EXP_CLAMP);
    let mut out = Vec::with_capacity(z.len());
    for row in z.chunks_exact(CLASSES) {
        let m = *row.iter().max().unwrap();
        let e: Vec<i64> = row
            .iter()
            .map(|&v| {
                let t = (v - m).max(floor);
                let t2 = mulf(t, t, f);
                let t3 = mulf(t2, t, f);
                let t4 = mulf(t2, t2, f);
                let t5 = mulf(t4, t, f);
                let acc = (a[0] << f) + a[1] * t + a[2] * t2 + a[3] * t3 + a[4] * t4 + a[5] * t5;
                acc >> COEFF_BITS
            })
            .collect();
        let inv = reciprocal(e.iter().sum(), f);
        out.extend(e.iter().map(|&v| mulf(v, inv, f)));
    }
    out
}

/// Trained weights, `(d + 1) x 5` at `f` bits.
pub fn clear_lr_train(rows: &[Vec<u8>], params: &LrParams, f: u32) -> Vec<i64> {
    let (x, k) = design(rows);
    let n = rows.len();
    let mut w = vec![0i64; k * CLASSES];
    let step = step_multiplier(f, params.learning_rate, n).as_i64();
    for _ in 0..params.epochs {
        let p = softmax(&scores(&x, k, &w), f);
        let mut g = vec![0i64; k * CLASSES];
        for r in 0..n {
            let y = rows[r][k - 1] as usize;
            for c in 0..CLASSES {
                let diff = p[r * CLASSES + c] - if c == y { 1i64 << f } else { 0 };
                for j in 0..k {
                    g[j * CLASSES + c] += x[r * k + j] * diff;
                }
            }
        }
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= gi.wrapping_mul(step) >> (f + STEP_EXTRA_BITS);
        }
    }
    w
}

/// First index of the row maximum.
pub fn clear_predict(w: &[i64], rows: &[Vec<u8>]) -> Vec<u8> {
    let (x, k) = design(rows);
    scores(&x, k, w)
        .chunks_exact(CLASSES)
        .map(|r| {
            let m = *r.iter().max().unwrap();
            r.iter().position(|&v| v == m).unwrap() as u8
        })
        .collect()
}

/// Accuracy at `f` bits, rounded down.
pub fn clear_accuracy(w: &[i64], test: &[Vec<u8>], f: u32) -> i64 {
    let pred = clear_predict(w, test);
    let hits = pred.iter().zip(test).filter(|(p, r)| **p == *r.last().unwrap()).count() as i64;
    (hits << f) / test.len() as i64
}

/// Mean softmax cross-entropy gradient `X^T (P - Y) / N` in floating point.
pub fn float_gradient(rows: &[Vec<u8>], w: &[f64]) -> Vec<f64> {
    let (x, k) = design(rows);
    let n = rows.len();
    let mut g = vec![0.0; k * CLASSES];
    for r in 0..n {
        let z: Vec<f64> =
            (0..CLASSES).map(|c| (0..k).map(|j| x[r * k + j] as f64 * w[j * CLASSES + c]).sum()).collect();
        let m = z.iter().cloned().fold(f64::MIN, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        let y = rows[r][k - 1] as usize;
        for c in 0..CLASSES {
            let diff = e[c] / s - if c == y { 1.0 } else { 0.0 };
            for j in 0..k {
                g[j * CLASSES + c] += x[r * k + j] as f64 * diff / n as f64;
            }
        }
    }
    g
}
