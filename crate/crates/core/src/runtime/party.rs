use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CommLedger, PartyId, Protocol, Seed, Transport, TransportFrame};
use crate::error::{Error, Result, TransportError};
use crate::ring::{FixedPointConfig, RingValue};
use crate::rss::ZeroShareKeys;

/// Public session parameters checked field by field during the handshake.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionParams {
    pub fixed: FixedPointConfig,
    fields: Vec<(String, String)>,
}

impl SessionParams {
    pub fn new(fixed: FixedPointConfig) -> Self {
        SessionParams { fixed, fields: vec![("frac_bits".into(), fixed.frac_bits().to_string())] }
    }

    /// Adds a named field that all three parties must agree on.
    pub fn with_field(mut self, name: &str, value: impl ToString) -> Self {
        self.fields.push((name.to_string(), value.to_string()));
        self
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }
}

/// Per-field digests exchanged at setup. The field count leads so that
/// parties configured with different schemas fail cleanly.
pub fn handshake_fields(params: &SessionParams) -> Vec<u64> {
    let mut out = vec![params.fields.len() as u64];
    for (name, value) in &params.fields {
        let digest = Sha256::new().chain_update(name).chain_update([0u8]).chain_update(value).finalize();
        out.push(u64::from_le_bytes(digest[..8].try_into().unwrap()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpeningKind {
    /// Reconstructed by all three servers.
    Public,
    /// Reconstructed only by the generator enclave co-located with a server.
    Enclave(PartyId),
    /// Share pairs handed to data custodians for reconstruction.
    Custodians,
}

/// One entry of the opening log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub label: Protocol,
    pub kind: OpeningKind,
    pub values: Vec<u64>,
}

/// One party's protocol session: transport, correlated randomness, the
/// communication ledger and the opening log.
pub struct Party {
    id: PartyId,
    fixed: FixedPointConfig,
    transport: Box<dyn Transport>,
    pub(crate) keys: ZeroShareKeys,
    private_seed: Seed,
    ledger: CommLedger,
    scopes: Vec<Protocol>,
    timings: BTreeMap<Protocol, Duration>,
    mark: Instant,
    openings: Vec<Opening>,
    send_seq: [u64; 3],
    recv_seq: [u64; 3],
    streams: HashMap<String, ChaCha20Rng>,
}

impl Party {
    /// Runs the setup handshake: checks that all parties agree on every
    /// session field, then exchanges the zero-sharing keys. The ledger is
    /// zeroed once the session is established.
    pub fn establish(
        id: PartyId,
        transport: Box<dyn Transport>,
        params: &SessionParams,
        private_seed: Seed,
    ) -> Result<Party> {
        let own_key = private_seed.derive("zero-share-key");
        let mut p = Party {
            id,
            fixed: params.fixed,
            transport,
            keys: ZeroShareKeys::new(own_key, own_key),
            private_seed,
            ledger: CommLedger::new(),
            scopes: Vec::new(),
            timings: BTreeMap::new(),
            mark: Instant::now(),
            openings: Vec::new(),
            send_seq: [0; 3],
            recv_seq: [0; 3],
            streams: HashMap::new(),
        };
        p.scopes.push(Protocol::Setup);

        let mine = handshake_fields(params);
        let got = p.step(&[(id.next(), mine.clone()), (id.prev(), mine.clone())], &[id.next(), id.prev()])?;
        for theirs in &got {
            if theirs.first() != mine.first() {
                return Err(Error::Setup(format!(
                    "parties disagree on the number of session fields ({} vs {})",
                    mine[0],
                    theirs.first().copied().unwrap_or(0)
                )));
            }
            for (i, (name, _)) in params.fields.iter().enumerate() {
                if theirs[i + 1] != mine[i + 1] {
                    return Err(Error::ConfigMismatch { field: name.clone() });
                }
            }
        }

        // S_i hands its key to S_{i-1}, so every key is held by exactly two parties.
        let got = p.step(&[(id.prev(), own_key.to_words().to_vec())], &[id.next()])?;
        let next_key = Seed::from_words(&got[0])
            .ok_or_else(|| Error::Setup("malformed key message".into()))?;
        p.keys = ZeroShareKeys::new(own_key, next_key);

        p.scopes.clear();
        p.ledger = CommLedger::new();
        p.timings.clear();
        p.mark = Instant::now();
        Ok(p)
    }

    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn fixed(&self) -> FixedPointConfig {
        self.fixed
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    /// Wall-clock time spent under each label, exclusive of nested labels.
    pub fn timings(&self) -> &BTreeMap<Protocol, Duration> {
        &self.timings
    }

    pub fn openings(&self) -> &[Opening] {
        &self.openings
    }

    pub fn current_label(&self) -> Protocol {
        self.scopes.last().copied().unwrap_or(Protocol::Unscoped)
    }

    fn charge_time(&mut self) {
        let now = Instant::now();
        let label = self.current_label();
        *self.timings.entry(label).or_default() += now - self.mark;
        self.mark = now;
    }

    /// Runs `body` with all communication attributed to `label`. Errors are
    /// wrapped once, at the innermost scope, with a ledger snapshot.
    pub fn scoped<T>(&mut self, label: Protocol, body: impl FnOnce(&mut Party) -> Result<T>) -> Result<T> {
        if self.scopes.contains(&label) {
            return Err(Error::Accounting(format!("nested scope {label} inside itself")));
        }
        self.charge_time();
        self.scopes.push(label);
        let out = body(self);
        self.charge_time();
        self.scopes.pop();
        out.map_err(|e| match e {
            e @ Error::Aborted { .. } => e,
            e => Error::Aborted {
                party: self.id,
                label,
                source: Box::new(e),
                ledger: Box::new(self.ledger.clone()),
            },
        })
    }

    /// Like [`scoped`](Self::scoped) but also returns the ledger delta.
    pub fn run_protocol<T>(
        &mut self,
        label: Protocol,
        body: impl FnOnce(&mut Party) -> Result<T>,
    ) -> Result<(T, CommLedger)> {
        let before = self.ledger.clone();
        let out = self.scoped(label, body)?;
        Ok((out, self.ledger.delta_since(&before)))
    }

    /// Records `elements` uses of a primitive under the current label.
    pub fn count_call(&mut self, primitive: &str, elements: usize) {
        let label = self.current_label();
        self.ledger.record_call(label, primitive, elements as u64);
    }

    /// One synchronous communication step: send every outgoing payload,
    /// then receive one frame from each listed peer in order. Every party
    /// executes the same steps, so each step counts as one round everywhere.
    pub fn step(&mut self, sends: &[(PartyId, Vec<u64>)], recvs: &[PartyId]) -> Result<Vec<Vec<u64>>> {
        let label = self.current_label();
        self.ledger.record_round(label);
        for (to, payload) in sends {
            let seq = self.send_seq[to.index()];
            self.send_seq[to.index()] += 1;
            let frame = TransportFrame::new(label, seq, payload.clone());
            self.ledger.record_send(label, frame.payload_bytes());
            self.transport.send(*to, frame)?;
        }
        let mut out = Vec::with_capacity(recvs.len());
        for from in recvs {
            let frame = self.transport.recv(*from)?;
            let expect = self.recv_seq[from.index()];
            if frame.seq != expect || frame.label != label.id() {
                return Err(TransportError::Framing {
                    peer: *from,
                    detail: format!(
                        "expected seq {expect} label {}, got seq {} label {}",
                        label.id(),
                        frame.seq,
                        frame.label
                    ),
                }
                .into());
            }
            self.recv_seq[from.index()] += 1;
            out.push(frame.payload);
        }
        Ok(out)
    }

    /// Sends ring elements to `to` and receives the same number of elements
    /// from `from` in one round.
    pub fn exchange(&mut self, to: PartyId, send: &[RingValue], from: PartyId) -> Result<Vec<RingValue>> {
        let payload = send.iter().map(|v| v.0).collect();
        let got = self.step(&[(to, payload)], &[from])?;
        let got = &got[0];
        if got.len() != send.len() {
            return Err(TransportError::Framing {
                peer: from,
                detail: format!("expected {} elements, got {}", send.len(), got.len()),
            }
            .into());
        }
        Ok(got.iter().map(|&w| RingValue(w)).collect())
    }

    /// Accounts bytes that leave the server mesh (to custodians).
    pub fn record_external_send(&mut self, bytes: u64) {
        let label = self.current_label();
        self.ledger.record_send(label, bytes);
    }

    pub(crate) fn log_opening(&mut self, kind: OpeningKind, values: &[RingValue]) {
        let label = self.current_label();
        self.openings.push(Opening { label, kind, values: values.iter().map(|v| v.0).collect() });
    }

    /// A named stream of this party's private randomness. Streams are
    /// independent of each other and of the zero-sharing keys.
    pub fn local_stream(&mut self, name: &str) -> &mut ChaCha20Rng {
        let seed = &self.private_seed;
        self.streams.entry(name.to_string()).or_insert_with(|| seed.derive("local").derive(name).rng())
    }
}
