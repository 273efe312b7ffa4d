use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use mpcsynth_core::deploy::{run_custodian, run_local, serve_party_on, CustodianOptions, CustodianRun, PartyOptions, PartyRun};
use mpcsynth_core::eval::LrParams;
use mpcsynth_core::io::Dataset;
use mpcsynth_core::orchestrator::{ClearThresholds, PipelineConfig};
use mpcsynth_core::runtime::PartyId;
use mpcsynth_core::Result;
use mpcsynth_oracle::{split_rows, synthetic_dataset};

fn config() -> PipelineConfig {
    PipelineConfig {
        folds: 2,
        max_loops: 2,
        hyperparameters: vec![5, 9],
        custodians: 2,
        seed: 8,
        lr: LrParams { epochs: 3, learning_rate: 0.05 },
        ..PipelineConfig::default()
    }
}

fn deploy(
    configs: [PipelineConfig; 3],
    parts: &[Dataset],
    th: &[ClearThresholds],
) -> (Vec<Result<PartyRun>>, Vec<Result<CustodianRun>>) {
    let listeners: Vec<TcpListener> = (0..3).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
    let addrs: Vec<String> = listeners.iter().map(|l| l.local_addr().unwrap().to_string()).collect();
    let servers: Vec<_> = listeners
        .into_iter()
        .zip(configs)
        .enumerate()
        .map(|(i, (l, config))| {
            let addrs = addrs.clone();
            thread::spawn(move || {
                let id = PartyId::from_index(i);
                let peers = (0..3).filter(|&j| j != i).map(|j| (PartyId::from_index(j), addrs[j].clone())).collect();
                let opts = PartyOptions {
                    id,
                    peers,
                    config,
                    seed: Some(8),
                    connect_timeout: Duration::from_secs(20),
                    recv_timeout: Duration::from_secs(60),
                };
                serve_party_on(l, &opts)
            })
        })
        .collect();
    let custodians: Vec<_> = parts
        .iter()
        .zip(th)
        .enumerate()
        .map(|(c, (d, t))| {
            let opts = CustodianOptions {
                id: c as u32 + 1,
                servers: [addrs[0].clone(), addrs[1].clone(), addrs[2].clone()],
                data: d.clone(),
                thresholds: *t,
                seed: Some(8),
                config: None,
                connect_timeout: Duration::from_secs(20),
            };
            thread::spawn(move || run_custodian(&opts))
        })
        .collect();
    (
        servers.into_iter().map(|h| h.join().unwrap()).collect(),
        custodians.into_iter().map(|h| h.join().unwrap()).collect(),
    )
}

#[test]
fn tcp_deployment_reproduces_the_local_run() {
    let cfg = config();
    let parts = split_rows(&synthetic_dataset(30, 2, 12), &[14, 16]);
    let th = [ClearThresholds::VACUOUS; 2];
    let local = run_local(&cfg, &parts, &th).unwrap();
    let (servers, custodians) = deploy([cfg.clone(), cfg.clone(), cfg.clone()], &parts, &th);
    let servers: Vec<PartyRun> = servers.into_iter().map(Result::unwrap).collect();
    let want = local.synthetic.unwrap().to_csv_string();
    for c in custodians {
        let c = c.unwrap();
        assert_eq!(c.decision, "publish");
        assert_eq!(c.synthetic.unwrap().to_csv_string(), want);
    }
    for s in &servers {
        assert_eq!(s.report.public_fields(), local.report.public_fields());
    }
    for (s, l) in servers.iter().zip(&local.openings) {
        assert_eq!(&s.openings, l);
    }
    for (s, l) in servers.iter().zip(&local.report.parties) {
        assert_eq!(s.report.parties[0].ledger, l.ledger);
    }
}

#[test]
fn mismatched_server_configuration_is_a_setup_failure() {
    let cfg = config();
    let parts = split_rows(&synthetic_dataset(20, 2, 13), &[10, 10]);
    let th = [ClearThresholds::VACUOUS; 2];
    let odd = PipelineConfig { folds: 3, ..cfg.clone() };
    let (servers, custodians) = deploy([cfg.clone(), odd, cfg], &parts, &th);
    for r in servers.iter().map(|r| r.as_ref().unwrap_err()) {
        assert_eq!(r.exit_code(), 4, "{r}");
    }
    for r in custodians.iter().map(|r| r.as_ref().unwrap_err()) {
        assert_eq!(r.exit_code(), 4, "{r}");
    }
}
