use mpcsynth_core::deploy::run_local;
use mpcsynth_core::eval::LrParams;
use mpcsynth_core::orchestrator::{ClearThresholds, PipelineConfig, SearchMode};
use mpcsynth_core::runtime::OpeningKind;
use mpcsynth_oracle::{clear_pipeline, split_rows, synthetic_dataset};

fn small_config() -> PipelineConfig {
    PipelineConfig {
        folds: 2,
        max_loops: 3,
        hyperparameters: vec![5, 8, 12],
        custodians: 2,
        seed: 31,
        lr: LrParams { epochs: 4, learning_rate: 0.05 },
        ..PipelineConfig::default()
    }
}

#[test]
fn vacuous_thresholds_publish_and_match_the_clear_pipeline() {
    let cfg = small_config();
    let parts = split_rows(&synthetic_dataset(36, 3, 4), &[16, 20]);
    let th = [ClearThresholds::VACUOUS; 2];
    let run = run_local(&cfg, &parts, &th).unwrap();
    assert_eq!(run.report.decision, "publish");
    assert_eq!(run.report.hyperparameter, Some(5));
    assert_eq!(run.report.loops, 1);
    let synth = run.synthetic.unwrap();
    assert_eq!(synth.rows(), 36);
    let clear = clear_pipeline(&parts, &th, &cfg).unwrap();
    assert_eq!(clear.chosen, Some(5));
    assert_eq!(synth.to_csv_string(), clear.synthetic.unwrap().to_csv_string());
    for g in 0..3 {
        let mut distinct: Vec<u64> = synth.values.iter().map(|r| r[g].to_bits()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        assert!(distinct.len() <= 4);
    }
}

#[test]
fn unsatisfiable_thresholds_open_only_vote_bits() {
    let cfg = small_config();
    let parts = split_rows(&synthetic_dataset(30, 2, 5), &[12, 18]);
    let th = [ClearThresholds::VACUOUS, ClearThresholds { max_wle: f64::INFINITY, min_accuracy: 1.5 }];
    let run = run_local(&cfg, &parts, &th).unwrap();
    assert_eq!(run.report.decision, "no-publish");
    assert_eq!(run.report.loops, 3);
    assert!(run.synthetic.is_none());
    for log in &run.openings {
        let public: Vec<_> = log.iter().filter(|o| o.kind == OpeningKind::Public).collect();
        assert_eq!(public.len(), 3);
        assert!(public.iter().all(|o| o.values == [0]));
        assert!(log.iter().all(|o| o.kind != OpeningKind::Custodians));
    }
}

#[test]
fn exhaustive_mode_agrees_with_the_clear_pipeline() {
    let cfg = PipelineConfig { mode: SearchMode::Exhaustive, ..small_config() };
    let parts = split_rows(&synthetic_dataset(30, 2, 6), &[15, 15]);
    let th = [ClearThresholds { max_wle: 0.5, min_accuracy: 0.0 }; 2];
    let run = run_local(&cfg, &parts, &th).unwrap();
    let clear = clear_pipeline(&parts, &th, &cfg).unwrap();
    assert_eq!(run.report.loops, 3);
    assert_eq!(run.report.hyperparameter, clear.chosen);
}
