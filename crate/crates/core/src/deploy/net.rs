//! Server and custodian processes over TCP.
//!
//! Servers talk to each other with the binary frame transport. Custodians
//! exchange length-prefixed JSON messages with each server: the server
//! announces its configuration once the peer handshake succeeded, the
//! custodian uploads its components, and the server finally returns the
//! decision and, on publish, its share pairs.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::upload::{ingest, prepare_uploads, reconstruct_published, RevealMessage, Upload};
use super::{custodian_rng, reveal_message, server_seed};
use crate::error::{Error, Result, TransportError};
use crate::io::Dataset;
use crate::orchestrator::{run_pipeline, ClearThresholds, PartyReport, PipelineConfig, RunReport};
use crate::runtime::tcp::{accept_hello, connect_retry, Hello, TcpTransport};
use crate::runtime::{Opening, Party, PartyId};

const MAX_MESSAGE: usize = 1 << 31;

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Message {
    Ready { config: PipelineConfig },
    Upload(Upload),
    Done(ServerResult),
    Abort { code: i32, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ServerResult {
    decision: String,
    hyperparameter: Option<usize>,
    loops: usize,
    reveal: Option<RevealMessage>,
}

fn io_err(e: io::Error) -> Error {
    let e = match e.kind() {
        io::ErrorKind::WouldBlock => io::Error::new(io::ErrorKind::TimedOut, e),
        io::ErrorKind::UnexpectedEof => io::Error::new(io::ErrorKind::ConnectionReset, e),
        _ => e,
    };
    Error::Transport(TransportError::Io(e))
}

fn send_msg(s: &mut TcpStream, m: &Message) -> Result<()> {
    let body = serde_json::to_vec(m).expect("message serializes");
    s.write_all(&(body.len() as u32).to_be_bytes()).map_err(io_err)?;
    s.write_all(&body).map_err(io_err)?;
    s.flush().map_err(io_err)
}

fn recv_msg<T: DeserializeOwned>(s: &mut TcpStream) -> Result<T> {
    let mut len = [0u8; 4];
    s.read_exact(&mut len).map_err(io_err)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_MESSAGE {
        return Err(Error::Integrity(format!("message of {len} bytes")));
    }
    let mut body = vec![0u8; len];
    s.read_exact(&mut body).map_err(io_err)?;
    serde_json::from_slice(&body).map_err(|e| Error::Integrity(format!("malformed message: {e}")))
}

pub struct PartyOptions {
    pub id: PartyId,
    /// Addresses of the two other servers.
    pub peers: Vec<(PartyId, String)>,
    pub config: PipelineConfig,
    /// Derives the private seed; random when absent.
    pub seed: Option<u64>,
    /// How long to wait for peers and custodians to connect.
    pub connect_timeout: Duration,
    /// How long to wait for any single protocol message.
    pub recv_timeout: Duration,
}

#[derive(Clone, Debug)]
pub struct PartyRun {
    pub report: RunReport,
    pub openings: Vec<Opening>,
}

pub fn serve_party(listen: &str, opts: &PartyOptions) -> Result<PartyRun> {
    let listener = TcpListener::bind(listen).map_err(io_err)?;
    serve_party_on(listener, opts)
}

/// Runs one server on an already bound listener.
pub fn serve_party_on(listener: TcpListener, opts: &PartyOptions) -> Result<PartyRun> {
    let cfg = &opts.config;
    cfg.validate()?;
    let params = cfg.session_params()?;
    let id = opts.id;
    let deadline = Instant::now() + opts.connect_timeout;
    let mut targets = Vec::new();
    for want in [id.next(), id.prev()] {
        let addr = opts
            .peers
            .iter()
            .find(|(p, _)| *p == want)
            .map(|(_, a)| a.clone())
            .ok_or_else(|| Error::Parameter(format!("no address for peer {want}")))?;
        targets.push((want, addr));
    }
    let connector = thread::spawn(move || -> io::Result<Vec<(PartyId, TcpStream)>> {
        let mut out = Vec::new();
        for (peer, addr) in targets {
            let mut s = connect_retry(&addr, deadline)?;
            Hello::Peer(id).write(&mut s)?;
            out.push((peer, s));
        }
        Ok(out)
    });

    let mut incoming: Vec<(PartyId, TcpStream)> = Vec::new();
    let mut custodians: Vec<(u32, TcpStream)> = Vec::new();
    while incoming.len() < 2 || custodians.len() < cfg.custodians {
        let (hello, s) = accept_hello(&listener, deadline).map_err(io_err)?;
        match hello {
            Hello::Peer(p) if p != id && incoming.iter().all(|(q, _)| *q != p) => incoming.push((p, s)),
            Hello::Custodian(c)
                if c >= 1 && c as usize <= cfg.custodians && custodians.iter().all(|(d, _)| *d != c) =>
            {
                custodians.push((c, s))
            }
            other => return Err(Error::Setup(format!("unexpected connection {other:?}"))),
        }
    }
    custodians.sort_by_key(|(c, _)| *c);
    let outgoing = connector.join().expect("connector thread panicked").map_err(io_err)?;

    let result = (|| {
        let transport = TcpTransport::new(outgoing, incoming, opts.recv_timeout);
        let mut p = Party::establish(id, Box::new(transport), &params, server_seed(opts.seed, id))?;
        let mut uploads = Vec::with_capacity(custodians.len());
        for (_, s) in custodians.iter_mut() {
            send_msg(s, &Message::Ready { config: cfg.clone() })?;
        }
        for (c, s) in custodians.iter_mut() {
            s.set_read_timeout(Some(opts.recv_timeout)).map_err(io_err)?;
            match recv_msg(s)? {
                Message::Upload(u) if u.custodian == *c => uploads.push(u),
                _ => return Err(Error::Setup(format!("custodian {c} did not send an upload"))),
            }
        }
        let inputs = ingest(&mut p, &uploads, &params)?;
        let out = run_pipeline(&mut p, cfg, &inputs)?;
        let reveal = reveal_message(cfg, id, &out);
        let report = RunReport::new(
            cfg,
            &out.tuning,
            out.rows,
            out.genes,
            reveal.as_ref().map(|r| r.rows),
            vec![PartyReport::from_party(&p)],
        )?;
        let done = ServerResult {
            decision: report.decision.clone(),
            hyperparameter: out.tuning.chosen,
            loops: out.tuning.loops,
            reveal,
        };
        for (_, s) in custodians.iter_mut() {
            send_msg(s, &Message::Done(done.clone()))?;
        }
        Ok(PartyRun { report, openings: p.openings().to_vec() })
    })();
    if let Err(e) = &result {
        for (_, s) in custodians.iter_mut() {
            let _ = send_msg(s, &Message::Abort { code: e.exit_code(), message: e.to_string() });
        }
    }
    result
}

pub struct CustodianOptions {
    /// 1-based custodian index.
    pub id: u32,
    pub servers: [String; 3],
    pub data: Dataset,
    pub thresholds: ClearThresholds,
    /// Derives the share randomness; random when absent.
    pub seed: Option<u64>,
    /// When given, the servers' configuration must match it.
    pub config: Option<PipelineConfig>,
    pub connect_timeout: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CustodianRun {
    pub decision: String,
    pub hyperparameter: Option<usize>,
    pub loops: usize,
    pub synthetic: Option<Dataset>,
    pub config: PipelineConfig,
}

fn expect<T>(party: usize, m: Message, pick: impl FnOnce(Message) -> Option<T>) -> Result<T> {
    let party = party as u8 + 1;
    match m {
        Message::Abort { code, message } => Err(Error::Remote { party, code, message }),
        m => pick(m).ok_or_else(|| Error::Integrity(format!("unexpected message from server {party}"))),
    }
}

/// Uploads one custodian's data to the three servers and waits for the
/// outcome.
pub fn run_custodian(opts: &CustodianOptions) -> Result<CustodianRun> {
    let deadline = Instant::now() + opts.connect_timeout;
    let mut streams = Vec::with_capacity(3);
    for addr in &opts.servers {
        let mut s = connect_retry(addr, deadline).map_err(io_err)?;
        Hello::Custodian(opts.id).write(&mut s).map_err(io_err)?;
        streams.push(s);
    }
    let mut configs = Vec::with_capacity(3);
    for (i, s) in streams.iter_mut().enumerate() {
        // Servers answer only after their peer handshake, which may wait for
        // other custodians to connect.
        s.set_read_timeout(Some(opts.connect_timeout * 2)).map_err(io_err)?;
        configs.push(expect(i, recv_msg(s)?, |m| match m {
            Message::Ready { config } => Some(config),
            _ => None,
        })?);
    }
    let cfg = configs[0].clone();
    if configs.iter().any(|c| *c != cfg) {
        return Err(Error::Setup("servers announced different configurations".into()));
    }
    if let Some(mine) = &opts.config {
        let (a, b) = (mine.session_params()?, cfg.session_params()?);
        if let Some(((name, _), _)) = a.fields().iter().zip(b.fields()).find(|(x, y)| x != y) {
            return Err(Error::ConfigMismatch { field: name.clone() });
        }
    }
    let uploads = prepare_uploads(opts.id, &opts.data, &opts.thresholds, &cfg, &mut custodian_rng(opts.seed, opts.id))?;
    for (s, u) in streams.iter_mut().zip(uploads) {
        send_msg(s, &Message::Upload(u))?;
    }
    let mut results = Vec::with_capacity(3);
    for (i, s) in streams.iter_mut().enumerate() {
        s.set_read_timeout(None).map_err(io_err)?;
        results.push(expect(i, recv_msg(s)?, |m| match m {
            Message::Done(r) => Some(r),
            _ => None,
        })?);
    }
    let strip = |r: &ServerResult| (r.decision.clone(), r.hyperparameter, r.loops);
    if results.iter().any(|r| strip(r) != strip(&results[0])) {
        return Err(Error::Integrity("servers report different outcomes".into()));
    }
    let reveals: Vec<RevealMessage> = results.iter().filter_map(|r| r.reveal.clone()).collect();
    let synthetic = match reveals.len() {
        0 => None,
        3 => Some(reconstruct_published(&reveals)?),
        _ => return Err(Error::Integrity("only some servers revealed".into())),
    };
    let r = &results[0];
    Ok(CustodianRun {
        decision: r.decision.clone(),
        hyperparameter: r.hyperparameter,
        loops: r.loops,
        synthetic,
        config: cfg,
    })
}
