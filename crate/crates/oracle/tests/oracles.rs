use mpcsynth_core::eval::LrParams;
use mpcsynth_core::orchestrator::{ClearThresholds, PipelineConfig};
use mpcsynth_core::FixedPointConfig;
use mpcsynth_oracle::lr::{clear_accuracy, clear_lr_train, clear_predict};
use mpcsynth_oracle::noise::{noisy_cells, replay_gauss};
use mpcsynth_oracle::wle::{clear_wle, float_wle};
use mpcsynth_oracle::{brute_marginals, clear_bin, clear_pipeline, float_bin, split_rows, synthetic_dataset, BinnedRows};
use proptest::prelude::*;

fn binned() -> impl Strategy<Value = BinnedRows> {
    prop::collection::vec((prop::collection::vec(0u8..4, 3), 0u8..5), 1..60).prop_map(|rows| {
        rows.into_iter()
            .map(|(mut g, y)| {
                g.push(y);
                g
            })
            .collect()
    })
}

proptest! {
    // Eighths are exact both on the fixed-point grid and in binary floating point.
    #[test]
    fn fixed_and_float_binning_agree_on_the_grid(eighths in prop::collection::vec(-800i64..800, 2..80)) {
        let f = FixedPointConfig::default().frac_bits();
        let fixed: Vec<Vec<i64>> = eighths.iter().map(|&k| vec![k << (f - 3)]).collect();
        let float: Vec<f64> = eighths.iter().map(|&k| k as f64 / 8.0).collect();
        let clear = clear_bin(&fixed);
        let (bins, means) = float_bin(&float);
        prop_assert_eq!(clear.bins.iter().map(|r| r[0]).collect::<Vec<_>>(), bins);
        for b in 0..4 {
            if means[b].is_nan() {
                prop_assert_eq!(clear.counts[0][b], 0);
            } else {
                let got = clear.means[0][b] as f64 / (1u64 << f) as f64;
                prop_assert!((got - means[b]).abs() < 1.0 / (1u64 << f) as f64);
            }
        }
    }

    #[test]
    fn marginals_sum_to_row_count(rows in binned()) {
        let m = brute_marginals(&rows, 3);
        let n = rows.len() as u64;
        prop_assert_eq!(m.label.iter().sum::<u64>(), n);
        for g in 0..3 {
            prop_assert_eq!(m.gene[g].iter().sum::<u64>(), n);
            prop_assert_eq!(m.pair[g].iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn fixed_wle_is_the_floor_of_float_wle(real in binned(), synth in binned()) {
        let f = 16;
        let fixed = clear_wle(&real, &synth, 3, f) as f64 / 65536.0;
        let float = float_wle(&real, &synth, 3);
        prop_assert!(fixed <= float + 1e-12 && float - fixed < 1.0 / 65536.0);
        prop_assert_eq!(clear_wle(&real, &real, 3, f), 0);
    }
}

#[test]
fn noiseless_cells_are_scaled_counts() {
    let counts = [0u64, 3, 17];
    assert_eq!(noisy_cells(&counts, 0.0, &[5, -9, 1 << 20], 16), vec![0, 3 << 32, 17 << 32]);
}

#[test]
fn replayed_gaussians_look_standard() {
    let g = replay_gauss(7, "noise/publish", 4000, 16);
    let xs: Vec<f64> = g.iter().map(|&v| v as f64 / 65536.0).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.1 && (0.85..1.15).contains(&var), "{mean} {var}");
    assert!(xs.iter().all(|x| x.abs() <= 6.0));
}

#[test]
fn clear_lr_fits_a_separable_toy() {
    let rows: BinnedRows = (0..40u8).map(|i| vec![i % 4, i % 4]).collect();
    let w = clear_lr_train(&rows, &LrParams { epochs: 200, learning_rate: 0.5 }, 16);
    assert_eq!(clear_predict(&w, &rows), rows.iter().map(|r| r[1]).collect::<Vec<_>>());
    assert_eq!(clear_accuracy(&w, &rows, 16), 1 << 16);
}

#[test]
fn clear_pipeline_publishes_under_vacuous_thresholds() {
    let cfg = PipelineConfig {
        folds: 2,
        hyperparameters: vec![5, 8],
        seed: 9,
        lr: LrParams { epochs: 3, learning_rate: 0.05 },
        ..PipelineConfig::default()
    };
    let parts = split_rows(&synthetic_dataset(30, 2, 8), &[10, 20]);
    let run = clear_pipeline(&parts, &[ClearThresholds::VACUOUS; 2], &cfg).unwrap();
    assert_eq!((run.chosen, run.loops, run.votes), (Some(5), 1, vec![true]));
    assert_eq!(run.synthetic.unwrap().rows(), 30);
}
