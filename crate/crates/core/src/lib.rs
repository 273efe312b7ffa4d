//! Three-party replicated secret sharing engine and the collaborative
//! synthetic data pipeline built on it.

pub mod deploy;
pub mod error;
pub mod eval;
pub mod io;
pub mod local;
pub mod marginals;
pub mod orchestrator;
pub mod preprocess;
pub mod primitives;
pub mod ring;
pub mod rss;
pub mod runtime;

pub use error::{Error, Result};
pub use ring::{FixedPointConfig, RingValue};
pub use rss::{Share, ShareMatrix};
pub use runtime::{Party, PartyId, Protocol};
