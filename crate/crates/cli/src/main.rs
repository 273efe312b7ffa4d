use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use mpcsynth_core::deploy::{run_custodian, run_local, serve_party, CustodianOptions, PartyOptions};
use mpcsynth_core::io::{read_config, read_thresholds, Dataset};
use mpcsynth_core::orchestrator::{PipelineConfig, RunReport, SearchMode};
use mpcsynth_core::runtime::PartyId;
use mpcsynth_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mpcsynth", version, about = "Collaborative differentially private synthetic data on three MPC servers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Key = value configuration file; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Search mode: first-pass or exhaustive.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SearchMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the three servers and all custodians in this process.
    RunLocal {
        #[command(flatten)]
        common: Common,
        /// One dataset per custodian, in custodian order.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        /// One thresholds file per custodian, or a single file for all.
        #[arg(long, required = true)]
        thresholds: Vec<PathBuf>,
        /// Synthetic dataset, written only on publish.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON run report with per-server ledgers.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Runs one server.
    Party {
        #[command(flatten)]
        common: Common,
        /// Server index, 1 to 3.
        #[arg(long)]
        id: u8,
        /// Address to accept peers and custodians on.
        #[arg(long)]
        listen: String,
        /// Peer address as ID=HOST:PORT; give one per other server.
        #[arg(long, required = true)]
        peer: Vec<String>,
        /// JSON report of this server's ledger and openings.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Seconds to wait for connections and for each message.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Uploads one custodian's data and waits for the outcome.
    Custodian {
        #[command(flatten)]
        common: Common,
        /// 1-based custodian index.
        #[arg(long, default_value_t = 1)]
        id: u32,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        thresholds: PathBuf,
        /// The three server addresses, comma separated, in server order.
        #[arg(long, value_delimiter = ',', required = true)]
        servers: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
}

fn parse_mode(s: &str) -> std::result::Result<SearchMode, String> {
    SearchMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected first-pass or exhaustive)"))
}

fn load_config(c: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => read_config(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn summary(r: &RunReport) -> String {
    match r.hyperparameter {
        Some(h) => format!("decision: publish (hyperparameter {h}, {} loops)", r.loops),
        None => format!("decision: no-publish ({} loops)", r.loops),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunLocal { common, data, thresholds, out, report } => {
            let mut cfg = load_config(&common)?;
            cfg.custodians = data.len();
            cfg.validate()?;
            let datasets = data.iter().map(|p| Dataset::read_path(p)).collect::<Result<Vec<_>>>()?;
            let th = match thresholds.len() {
                1 => vec![read_thresholds(&thresholds[0])?; data.len()],
                n if n == data.len() => thresholds.iter().map(|p| read_thresholds(p)).collect::<Result<_>>()?,
                n => return Err(Error::Parse(format!("{n} threshold files for {} datasets", data.len()))),
            };
            let run = run_local(&cfg, &datasets, &th)?;
            if let (Some(path), Some(ds)) = (&out, &run.synthetic) {
                ds.write_path(path)?;
            }
            if let Some(path) = &report {
                write_text(path, &run.report.to_json())?;
            }
            println!("{}", summary(&run.report));
        }
        Command::Party { common, id, listen, peer, report, timeout } => {
            let cfg = load_config(&common)?;
            let id = PartyId::new(id).ok_or_else(|| Error::Parameter(format!("server id {id} is not 1, 2 or 3")))?;
            let peers = peer
                .iter()
                .map(|s| {
                    let (i, addr) = s.split_once('=').ok_or_else(|| Error::Parse(format!("peer `{s}` is not ID=ADDR")))?;
                    let pid = i.trim().parse().ok().and_then(PartyId::new);
                    let pid = pid.ok_or_else(|| Error::Parse(format!("peer `{s}` has an invalid id")))?;
                    Ok((pid, addr.trim().to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let opts = PartyOptions {
                id,
                peers,
                config: cfg,
                seed: common.seed,
                connect_timeout: Duration::from_secs(timeout),
                recv_timeout: Duration::from_secs(timeout),
            };
            let run = serve_party(&listen, &opts)?;
            if let Some(path) = &report {
                write_text(path, &run.report.to_json())?;
            }
            println!("{}", summary(&run.report));
        }
        Command::Custodian { common, id, data, thresholds, servers, out, timeout } => {
            if servers.len() != 3 {
                return Err(Error::Parse(format!("--servers needs 3 addresses, got {}", servers.len())));
            }
            let expected = common.config.as_ref().map(|_| load_config(&common)).transpose()?;
            let opts = CustodianOptions {
                id,
                servers: [servers[0].clone(), servers[1].clone(), servers[2].clone()],
                data: Dataset::read_path(&data)?,
                thresholds: read_thresholds(&thresholds)?,
                seed: common.seed,
                config: expected,
                connect_timeout: Duration::from_secs(timeout),
            };
            let run = run_custodian(&opts)?;
            if let (Some(path), Some(ds)) = (&out, &run.synthetic) {
                ds.write_path(path)?;
            }
            match run.hyperparameter {
                Some(h) => println!("decision: publish (hyperparameter {h}, {} loops)", run.loops),
                None => println!("decision: no-publish ({} loops)", run.loops),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(ledger) = e.ledger_snapshot() {
                eprintln!("ledger at abort: {}", serde_json::to_string(ledger).unwrap_or_default());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
