use std::io::{self, Read, Write};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::{PartyId, Protocol};
use crate::error::TransportError;

/// One framed message between two parties.
///
/// Wire layout: 4-byte big-endian length of everything that follows, 2-byte
/// big-endian protocol-label id, 8-byte big-endian sequence number, then the
/// payload as 64-bit little-endian words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportFrame {
    pub label: u16,
    pub seq: u64,
    pub payload: Vec<u64>,
}

const HEADER_LEN: usize = 2 + 8;

impl TransportFrame {
    pub fn new(label: Protocol, seq: u64, payload: Vec<u64>) -> Self {
        TransportFrame { label: label.id(), seq, payload }
    }

    pub fn payload_bytes(&self) -> u64 {
        8 * self.payload.len() as u64
    }

    pub fn encode(&self) -> Vec<u8> {
        let body = HEADER_LEN + 8 * self.payload.len();
        let mut out = Vec::with_capacity(4 + body);
        out.extend_from_slice(&(body as u32).to_be_bytes());
        out.extend_from_slice(&self.label.to_be_bytes());
        out.extend_from_slice(&self.seq.to_be_bytes());
        for w in &self.payload {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(&self.encode())
    }

    pub fn read_from<R: Read>(r: &mut R) -> io::Result<Self> {
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let body = u32::from_be_bytes(len) as usize;
        if body < HEADER_LEN || (body - HEADER_LEN) % 8 != 0 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("bad frame length {body}")));
        }
        let mut buf = vec![0u8; body];
        r.read_exact(&mut buf)?;
        let label = u16::from_be_bytes([buf[0], buf[1]]);
        let seq = u64::from_be_bytes(buf[2..10].try_into().unwrap());
        let payload = buf[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(TransportFrame { label, seq, payload })
    }
}

/// Point-to-point delivery between the three parties. Implementations must
/// deliver frames exactly once and in order per (sender, receiver) pair.
pub trait Transport: Send {
    fn send(&mut self, to: PartyId, frame: TransportFrame) -> Result<(), TransportError>;
    fn recv(&mut self, from: PartyId) -> Result<TransportFrame, TransportError>;
}

/// In-process transport over unbounded channels.
pub struct LocalTransport {
    me: PartyId,
    outgoing: [Option<Sender<TransportFrame>>; 3],
    incoming: [Option<Receiver<TransportFrame>>; 3],
    timeout: Duration,
}

/// Builds a fully connected in-process mesh for parties 1, 2, 3.
pub fn local_mesh(timeout: Duration) -> [LocalTransport; 3] {
    let mut outgoing: [[Option<Sender<TransportFrame>>; 3]; 3] = Default::default();
    let mut incoming: [[Option<Receiver<TransportFrame>>; 3]; 3] = Default::default();
    for from in 0..3 {
        for to in 0..3 {
            if from != to {
                let (tx, rx) = channel();
                outgoing[from][to] = Some(tx);
                incoming[to][from] = Some(rx);
            }
        }
    }
    let mut out = outgoing.into_iter().zip(incoming).enumerate().map(|(i, (o, r))| LocalTransport {
        me: PartyId::from_index(i),
        outgoing: o,
        incoming: r,
        timeout,
    });
    [out.next().unwrap(), out.next().unwrap(), out.next().unwrap()]
}

impl Transport for LocalTransport {
    fn send(&mut self, to: PartyId, frame: TransportFrame) -> Result<(), TransportError> {
        let tx = self.outgoing[to.index()].as_ref().ok_or(TransportError::Closed(to))?;
        tx.send(frame).map_err(|_| TransportError::Closed(to))
    }

    fn recv(&mut self, from: PartyId) -> Result<TransportFrame, TransportError> {
        let rx = self.incoming[from.index()].as_ref().ok_or(TransportError::Closed(from))?;
        rx.recv_timeout(self.timeout).map_err(|e| match e {
            RecvTimeoutError::Timeout => TransportError::Timeout(from),
            RecvTimeoutError::Disconnected => TransportError::Closed(from),
        })
    }
}

impl LocalTransport {
    pub fn id(&self) -> PartyId {
        self.me
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_wire_layout() {
        let f = TransportFrame::new(Protocol::Bin, 7, vec![1, u64::MAX]);
        let bytes = f.encode();
        assert_eq!(&bytes[0..4], &(26u32).to_be_bytes());
        assert_eq!(&bytes[4..6], &Protocol::Bin.id().to_be_bytes());
        assert_eq!(&bytes[6..14], &7u64.to_be_bytes());
        assert_eq!(&bytes[14..22], &1u64.to_le_bytes());
        let back = TransportFrame::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn malformed_length_is_rejected() {
        let mut bytes = TransportFrame::new(Protocol::Bin, 0, vec![3]).encode();
        bytes[3] = 11;
        assert!(TransportFrame::read_from(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn local_mesh_preserves_order() {
        let [mut a, mut b, _c] = local_mesh(Duration::from_secs(1));
        let s1 = PartyId::new(1).unwrap();
        let s2 = PartyId::new(2).unwrap();
        for i in 0..5 {
            a.send(s2, TransportFrame::new(Protocol::Lr, i, vec![i])).unwrap();
        }
        for i in 0..5 {
            assert_eq!(b.recv(s1).unwrap().seq, i);
        }
        assert!(matches!(b.recv(s1), Err(TransportError::Timeout(_))));
    }
}
