use mpcsynth_core::eval::lr::{design, gradient, one_hot};
use mpcsynth_core::io::Dataset;
use mpcsynth_core::local::run3;
use mpcsynth_core::marginals::count_marginals;
use mpcsynth_core::orchestrator::FoldPlan;
use mpcsynth_core::primitives::{div, div_clear, lt};
use mpcsynth_core::ring::decode_at;
use mpcsynth_core::rss::{reconstruct, share_secret};
use mpcsynth_core::runtime::Seed;
use mpcsynth_core::{FixedPointConfig, PartyId, RingValue, Share, ShareMatrix};
use mpcsynth_oracle::lr::float_gradient;
use mpcsynth_oracle::{brute_marginals, BinnedRows};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn secure_cases() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #[test]
    fn shares_reconstruct_and_overlap(x in any::<u64>(), seed in any::<u64>()) {
        let shares = share_secret(RingValue(x), &mut ChaCha20Rng::seed_from_u64(seed));
        for i in 0..3 {
            prop_assert_eq!(shares[i].b, shares[(i + 1) % 3].a);
        }
        prop_assert_eq!(reconstruct(&shares).unwrap(), RingValue(x));
    }

    #[test]
    fn folds_partition_rows(rows in 2usize..400, folds in 2usize..12, seed in any::<u64>()) {
        prop_assume!(folds <= rows);
        let plan = FoldPlan::new(rows, folds, Seed::from_u64(seed)).unwrap();
        let mut seen = vec![0u32; rows];
        for k in 0..folds {
            let (train, test) = plan.split(k).unwrap();
            prop_assert_eq!(train.len() + test.len(), rows);
            prop_assert!(test.len() == rows / folds || test.len() == rows / folds + 1);
            for &r in &test {
                seen[r] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn dataset_csv_round_trip(
        rows in prop::collection::vec((prop::collection::vec(-1.0e6f64..1.0e6, 3), 0u8..5), 0..20)
    ) {
        let ds = Dataset {
            genes: vec!["a".into(), "b".into(), "c".into()],
            values: rows.iter().map(|r| r.0.clone()).collect(),
            labels: rows.iter().map(|r| r.1).collect(),
        };
        let text = ds.to_csv_string();
        let back = Dataset::read_from(text.as_bytes(), "mem").unwrap();
        prop_assert_eq!(back, ds);
    }
}

proptest! {
    #![proptest_config(secure_cases())]

    #[test]
    fn secure_products_and_comparisons(a in -(1i64 << 30)..(1i64 << 30), b in -(1i64 << 30)..(1i64 << 30)) {
        let out = run3(a as u64 ^ b as u64, |p| {
            let vals = [RingValue::from_i64(a), RingValue::from_i64(b)];
            let s = p.input_from(PartyId::ALL[0], &vals, 2)?;
            let prod = p.mul(&s[..1], &s[1..])?;
            let less = lt(p, &s[..1], &s[1..])?;
            let shifted = p.trunc(&s[..1], 8)?;
            let mut v = prod;
            v.extend(less);
            v.extend(shifted);
            p.open(&v)
        }).unwrap();
        let v = &out[0];
        prop_assert_eq!(v[0], RingValue::from_i64(a) * RingValue::from_i64(b));
        prop_assert_eq!(v[1].0, (a < b) as u64);
        let floor = a >> 8;
        prop_assert!(v[2].as_i64() == floor || v[2].as_i64() == floor + 1);
    }

    #[test]
    fn secure_division_is_exact(num in -(1i64 << 24)..(1i64 << 24), den in 1i64..(1i64 << 24)) {
        let out = run3(num as u64 ^ den as u64, |p| {
            let s = p.input_from(PartyId::ALL[1], &[RingValue::from_i64(num), RingValue::from_i64(den)], 2)?;
            let q = div(p, &s[..1], &s[1..], 25, 16)?;
            p.open(&q)
        }).unwrap();
        prop_assert_eq!(out[0][0], div_clear(RingValue::from_i64(num), RingValue::from_i64(den), 16));
    }

    #[test]
    fn noiseless_counts_match_enumeration(
        rows in prop::collection::vec((prop::collection::vec(0u8..4, 2), 0u8..5), 1..30)
    ) {
        let binned: BinnedRows = rows.iter().map(|(g, y)| {
            let mut r = g.clone();
            r.push(*y);
            r
        }).collect();
        let vals: Vec<RingValue> = binned.iter().flatten().map(|&v| RingValue(v as u64)).collect();
        let n = binned.len();
        let out = run3(n as u64, |p| {
            let cells = p.input_from(PartyId::ALL[2], &vals, vals.len())?;
            let m = count_marginals(p, &ShareMatrix::new(n, 3, cells))?;
            p.open(&m.flatten())
        }).unwrap();
        let want = brute_marginals(&binned, 2);
        let f = FixedPointConfig::default().frac_bits();
        let got: Vec<u64> = out[0].iter().map(|v| v.0 >> f).collect();
        prop_assert_eq!(&got, &want.flatten());
        for g in 0..2 {
            prop_assert_eq!(want.gene[g].iter().sum::<u64>(), n as u64);
            prop_assert_eq!(want.pair[g].iter().sum::<u64>(), n as u64);
        }
        prop_assert_eq!(want.label.iter().sum::<u64>(), n as u64);
    }
}

/// Mean softmax cross-entropy over binned rows with a bias feature.
fn loss(rows: &BinnedRows, w: &[f64]) -> f64 {
    let k = rows[0].len();
    let mut total = 0.0;
    for r in rows {
        let x: Vec<f64> = r[..k - 1].iter().map(|&v| v as f64).chain([1.0]).collect();
        let z: Vec<f64> = (0..5).map(|c| (0..k).map(|j| x[j] * w[j * 5 + c]).sum()).collect();
        let lse = z.iter().map(|v| v.exp()).sum::<f64>().ln();
        total += lse - z[r[k - 1] as usize];
    }
    total / rows.len() as f64
}

#[test]
fn secure_gradient_at_step_zero_matches_finite_differences() {
    let rows: BinnedRows = (0..30u8).map(|i| vec![i % 4, (i / 2) % 4, (i + i / 4) % 5]).collect();
    let (n, k) = (rows.len(), 3);
    let vals: Vec<RingValue> = rows.iter().flatten().map(|&v| RingValue(v as u64)).collect();
    let out = run3(91, |p| {
        let cells = p.input_from(PartyId::ALL[0], &vals, vals.len())?;
        let m = ShareMatrix::new(n, k, cells);
        let x = design(p.id(), &m);
        let mut xt = Vec::with_capacity(x.len());
        for j in 0..k {
            xt.extend((0..n).map(|i| x[i * k + j]));
        }
        let y = one_hot(p, &m.column(m.label_col()))?;
        let w = vec![Share::ZERO; k * 5];
        let g = gradient(p, &x, &xt, &y, &w, n, k)?;
        p.open(&g)
    })
    .unwrap();
    let zero = vec![0.0; k * 5];
    let analytic = float_gradient(&rows, &zero);
    let tol = 10.0 / 65536.0;
    for (i, got) in out[0].iter().enumerate() {
        let h = 1e-5;
        let (mut up, mut down) = (zero.clone(), zero.clone());
        up[i] += h;
        down[i] -= h;
        let fd = (loss(&rows, &up) - loss(&rows, &down)) / (2.0 * h);
        let secure = decode_at(*got, 16) / n as f64;
        assert!((secure - fd).abs() <= tol, "coordinate {i}: {secure} vs {fd}");
        assert!((analytic[i] - fd).abs() <= 1e-8);
    }
}
