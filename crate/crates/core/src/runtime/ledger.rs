use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Protocol;

/// Traffic attributed to one protocol label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub bytes_sent: u64,
    pub messages_sent: u64,
    pub rounds: u64,
    /// Number of elements processed by each primitive inside this label.
    pub calls: BTreeMap<String, u64>,
}

impl LedgerEntry {
    fn absorb(&mut self, other: &LedgerEntry) {
        self.bytes_sent += other.bytes_sent;
        self.messages_sent += other.messages_sent;
        self.rounds += other.rounds;
        for (k, v) in &other.calls {
            *self.calls.entry(k.clone()).or_default() += v;
        }
    }

    pub fn call_count(&self, primitive: &str) -> u64 {
        self.calls.get(primitive).copied().unwrap_or(0)
    }
}

/// Per-party communication accounting. Each byte is attributed to the
/// innermost protocol label active when it was sent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommLedger {
    entries: BTreeMap<Protocol, LedgerEntry>,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|e| *e == LedgerEntry::default())
    }

    pub fn entry(&self, label: Protocol) -> Option<&LedgerEntry> {
        self.entries.get(&label)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Protocol, &LedgerEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn bytes(&self, label: Protocol) -> u64 {
        self.entry(label).map_or(0, |e| e.bytes_sent)
    }

    pub fn rounds(&self, label: Protocol) -> u64 {
        self.entry(label).map_or(0, |e| e.rounds)
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.values().map(|e| e.bytes_sent).sum()
    }

    pub(crate) fn record_send(&mut self, label: Protocol, bytes: u64) {
        let e = self.entries.entry(label).or_default();
        e.bytes_sent += bytes;
        e.messages_sent += 1;
    }

    pub(crate) fn record_round(&mut self, label: Protocol) {
        self.entries.entry(label).or_default().rounds += 1;
    }

    pub(crate) fn record_call(&mut self, label: Protocol, primitive: &str, elements: u64) {
        *self.entries.entry(label).or_default().calls.entry(primitive.to_string()).or_default() +=
            elements;
    }

    /// Entry-wise difference `self - earlier`; labels with no change are dropped.
    pub fn delta_since(&self, earlier: &CommLedger) -> CommLedger {
        let mut out = CommLedger::new();
        for (label, now) in &self.entries {
            let before = earlier.entries.get(label).cloned().unwrap_or_default();
            let mut calls = BTreeMap::new();
            for (k, v) in &now.calls {
                let d = v - before.calls.get(k).copied().unwrap_or(0);
                if d > 0 {
                    calls.insert(k.clone(), d);
                }
            }
            let e = LedgerEntry {
                bytes_sent: now.bytes_sent - before.bytes_sent,
                messages_sent: now.messages_sent - before.messages_sent,
                rounds: now.rounds - before.rounds,
                calls,
            };
            if e != LedgerEntry::default() {
                out.entries.insert(*label, e);
            }
        }
        out
    }

    pub fn merge(&mut self, other: &CommLedger) {
        for (label, e) in &other.entries {
            self.entries.entry(*label).or_default().absorb(e);
        }
    }
}

impl fmt::Display for CommLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>14} {:>10} {:>8}", "protocol", "bytes", "messages", "rounds")?;
        for (label, e) in &self.entries {
            writeln!(
                f,
                "{:<14} {:>14} {:>10} {:>8}",
                label.name(),
                e.bytes_sent,
                e.messages_sent,
                e.rounds
            )?;
        }
        Ok(())
    }
}
