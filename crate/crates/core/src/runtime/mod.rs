//! Hosting one party's protocol execution: identities, transports, the
//! communication ledger and seeded randomness.

mod ledger;
mod party;
mod seed;
pub mod tcp;
mod transport;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ledger::{CommLedger, LedgerEntry};
pub use party::{handshake_fields, Opening, OpeningKind, Party, SessionParams};
pub use seed::Seed;
pub use transport::{local_mesh, LocalTransport, Transport, TransportFrame};

/// One of the three computing servers, numbered 1..=3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartyId(u8);

impl PartyId {
    pub const ALL: [PartyId; 3] = [PartyId(1), PartyId(2), PartyId(3)];

    pub fn new(id: u8) -> Option<Self> {
        (1..=3).contains(&id).then_some(PartyId(id))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based index.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_index(i: usize) -> Self {
        PartyId((i % 3) as u8 + 1)
    }

    pub fn next(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn prev(self) -> Self {
        Self::from_index(self.index() + 2)
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// Protocol labels under which communication is accounted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Unscoped,
    Setup,
    Input,
    Concat,
    Bin,
    InvBin,
    Sort,
    NoisyMarg,
    Sdg,
    Eval,
    Wle,
    Lr,
    Avg,
    Vote,
    Reveal,
}

impl Protocol {
    pub const ALL: [Protocol; 15] = [
        Protocol::Unscoped,
        Protocol::Setup,
        Protocol::Input,
        Protocol::Concat,
        Protocol::Bin,
        Protocol::InvBin,
        Protocol::Sort,
        Protocol::NoisyMarg,
        Protocol::Sdg,
        Protocol::Eval,
        Protocol::Wle,
        Protocol::Lr,
        Protocol::Avg,
        Protocol::Vote,
        Protocol::Reveal,
    ];

    /// Wire identifier carried in every frame header.
    pub fn id(self) -> u16 {
        Self::ALL.iter().position(|p| *p == self).unwrap() as u16
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Unscoped => "unscoped",
            Protocol::Setup => "setup",
            Protocol::Input => "π_INPUT",
            Protocol::Concat => "π_CONCAT",
            Protocol::Bin => "π_BIN",
            Protocol::InvBin => "π_INV-BIN",
            Protocol::Sort => "π_SORT",
            Protocol::NoisyMarg => "π_NOISY-MARG",
            Protocol::Sdg => "π_SDG",
            Protocol::Eval => "π_EVAL",
            Protocol::Wle => "π_WLE",
            Protocol::Lr => "π_LR",
            Protocol::Avg => "π_AVG",
            Protocol::Vote => "π_VOTE",
            Protocol::Reveal => "π_REVEAL",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Protocol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Protocol::from_name(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown protocol label {name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn party_ids_are_cyclic() {
        let s1 = PartyId::new(1).unwrap();
        assert_eq!(s1.next().get(), 2);
        assert_eq!(s1.prev().get(), 3);
        assert_eq!(s1.next().next().next(), s1);
        assert!(PartyId::new(0).is_none());
        assert!(PartyId::new(4).is_none());
    }

    #[test]
    fn protocol_ids_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(Protocol::from_id(p.id()), Some(p));
            assert_eq!(Protocol::from_name(p.name()), Some(p));
        }
    }
}
