use crate::runtime::{CommLedger, PartyId, Protocol};

/// Failures of the transport layer. Any of these aborts the run.
#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("channel to party {0} is closed")]
    Closed(PartyId),
    #[error("timed out waiting for party {0}")]
    Timeout(PartyId),
    #[error("unexpected frame from party {peer}: {detail}")]
    Framing { peer: PartyId, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("value {value} is outside the fixed-point range (|x| < {limit})")]
    Range { value: f64, limit: f64 },
    #[error("unsupported fixed-point precision: {0} fractional bits (expected 8..=24)")]
    Precision(u32),
    #[error("share integrity check failed: {0}")]
    Integrity(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("setup handshake failed: parties disagree on `{field}`")]
    ConfigMismatch { field: String },
    #[error("setup handshake failed: {0}")]
    Setup(String),
    #[error("accounting error: {0}")]
    Accounting(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("ingestion error: {0}")]
    Ingest(String),
    #[error("{0}")]
    Parse(String),
    #[error("server {party} aborted: {message}")]
    Remote { party: u8, code: i32, message: String },
    #[error("protocol aborted in {label} at party {party}: {source}")]
    Aborted {
        party: PartyId,
        label: Protocol,
        #[source]
        source: Box<Error>,
        ledger: Box<CommLedger>,
    },
}

impl Error {
    /// True when the error ultimately stems from a peer being unreachable.
    pub fn is_connectivity(&self) -> bool {
        match self {
            Error::Transport(TransportError::Timeout(_) | TransportError::Closed(_)) => true,
            Error::Transport(TransportError::Io(e)) => matches!(
                e.kind(),
                std::io::ErrorKind::ConnectionRefused
                    | std::io::ErrorKind::ConnectionReset
                    | std::io::ErrorKind::TimedOut
                    | std::io::ErrorKind::NotConnected
            ),
            Error::Aborted { source, .. } => source.is_connectivity(),
            _ => false,
        }
    }

    /// Process exit status: 2 for bad input, 4 for connectivity and setup
    /// failures, 3 for any other abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Aborted { source, .. } => source.exit_code(),
            Error::Remote { code, .. } => *code,
            Error::Parse(_) | Error::Ingest(_) | Error::Parameter(_) | Error::Range { .. } | Error::Precision(_) => 2,
            Error::ConfigMismatch { .. } | Error::Setup(_) => 4,
            e if e.is_connectivity() => 4,
            _ => 3,
        }
    }

    /// The ledger snapshot attached to an aborted run, if any.
    pub fn ledger_snapshot(&self) -> Option<&CommLedger> {
        match self {
            Error::Aborted { ledger, .. } => Some(ledger),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
