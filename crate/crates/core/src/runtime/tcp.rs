//! Length-prefixed TCP transport between server processes.
//!
//! Each server opens one outgoing connection per peer and accepts one
//! incoming connection per peer; a reader thread per incoming connection
//! feeds a FIFO queue so protocol code can block on a single peer.

use std::io::{self, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::{PartyId, Protocol, Transport, TransportFrame};
use crate::error::TransportError;

const MAGIC_PEER: u64 = 0x6d70_6373_7065_6572;
const MAGIC_CUSTODIAN: u64 = 0x6d70_6373_6375_7374;

/// First frame on every connection, identifying the connecting side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hello {
    Peer(PartyId),
    Custodian(u32),
}

impl Hello {
    fn frame(self) -> TransportFrame {
        let payload = match self {
            Hello::Peer(id) => vec![MAGIC_PEER, id.get() as u64],
            Hello::Custodian(c) => vec![MAGIC_CUSTODIAN, c as u64],
        };
        TransportFrame::new(Protocol::Setup, 0, payload)
    }

    pub fn write(self, stream: &mut impl Write) -> io::Result<()> {
        self.frame().write_to(stream)?;
        stream.flush()
    }

    pub fn read(stream: &mut impl io::Read) -> io::Result<Hello> {
        let f = TransportFrame::read_from(stream)?;
        let bad = || io::Error::new(io::ErrorKind::InvalidData, "unrecognized hello frame");
        match f.payload.as_slice() {
            [MAGIC_PEER, id] => u8::try_from(*id).ok().and_then(PartyId::new).map(Hello::Peer).ok_or_else(bad),
            [MAGIC_CUSTODIAN, c] => u32::try_from(*c).map(Hello::Custodian).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Connects to `addr`, retrying until `deadline` so that processes may be
/// started in any order.
pub fn connect_retry(addr: &str, deadline: Instant) -> io::Result<TcpStream> {
    let addrs: Vec<SocketAddr> = addr.to_socket_addrs()?.collect();
    loop {
        let mut last = io::Error::new(io::ErrorKind::NotConnected, format!("no address for {addr}"));
        for a in &addrs {
            match TcpStream::connect_timeout(a, Duration::from_millis(500)) {
                Ok(s) => {
                    s.set_nodelay(true)?;
                    return Ok(s);
                }
                Err(e) => last = e,
            }
        }
        if Instant::now() >= deadline {
            return Err(io::Error::new(io::ErrorKind::TimedOut, format!("could not reach {addr}: {last}")));
        }
        thread::sleep(Duration::from_millis(50));
    }
}

/// Accepts one connection and reads its hello, giving up at `deadline`.
pub fn accept_hello(listener: &TcpListener, deadline: Instant) -> io::Result<(Hello, TcpStream)> {
    listener.set_nonblocking(true)?;
    loop {
        match listener.accept() {
            Ok((mut s, _)) => {
                s.set_nonblocking(false)?;
                s.set_nodelay(true)?;
                s.set_read_timeout(Some(deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(10))))?;
                let hello = Hello::read(&mut s)?;
                s.set_read_timeout(None)?;
                return Ok((hello, s));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    return Err(io::Error::new(io::ErrorKind::TimedOut, "timed out waiting for connections"));
                }
                thread::sleep(Duration::from_millis(20));
            }
            Err(e) => return Err(e),
        }
    }
}

pub struct TcpTransport {
    outgoing: [Option<BufWriter<TcpStream>>; 3],
    incoming: [Option<Receiver<Result<TransportFrame, String>>>; 3],
    timeout: Duration,
}

impl TcpTransport {
    /// Wraps already-greeted connections: `outgoing` carries frames to a
    /// peer, `incoming` carries frames from it.
    pub fn new(outgoing: Vec<(PartyId, TcpStream)>, incoming: Vec<(PartyId, TcpStream)>, timeout: Duration) -> Self {
        let mut t = TcpTransport { outgoing: Default::default(), incoming: Default::default(), timeout };
        for (peer, s) in outgoing {
            t.outgoing[peer.index()] = Some(BufWriter::new(s));
        }
        for (peer, s) in incoming {
            let (tx, rx) = channel();
            thread::spawn(move || {
                let mut r = BufReader::new(s);
                loop {
                    match TransportFrame::read_from(&mut r) {
                        Ok(f) => {
                            if tx.send(Ok(f)).is_err() {
                                return;
                            }
                        }
                        Err(e) => {
                            let _ = tx.send(Err(e.to_string()));
                            return;
                        }
                    }
                }
            });
            t.incoming[peer.index()] = Some(rx);
        }
        t
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, to: PartyId, frame: TransportFrame) -> Result<(), TransportError> {
        let w = self.outgoing[to.index()].as_mut().ok_or(TransportError::Closed(to))?;
        frame.write_to(w)?;
        w.flush()?;
        Ok(())
    }

    fn recv(&mut self, from: PartyId) -> Result<TransportFrame, TransportError> {
        let rx = self.incoming[from.index()].as_ref().ok_or(TransportError::Closed(from))?;
        match rx.recv_timeout(self.timeout) {
            Ok(Ok(f)) => Ok(f),
            Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => Err(TransportError::Closed(from)),
            Err(RecvTimeoutError::Timeout) => Err(TransportError::Timeout(from)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hello_round_trip() {
        for h in [Hello::Peer(PartyId::new(2).unwrap()), Hello::Custodian(7)] {
            let mut buf = Vec::new();
            h.write(&mut buf).unwrap();
            assert_eq!(Hello::read(&mut buf.as_slice()).unwrap(), h);
        }
    }

    #[test]
    fn frames_cross_a_socket_in_order() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let deadline = Instant::now() + Duration::from_secs(5);
        let s1 = PartyId::new(1).unwrap();
        let s2 = PartyId::new(2).unwrap();
        let client = thread::spawn(move || {
            let mut s = connect_retry(&addr, deadline).unwrap();
            Hello::Peer(s1).write(&mut s).unwrap();
            let mut t = TcpTransport::new(vec![(s2, s)], vec![], Duration::from_secs(5));
            for i in 0..3 {
                t.send(s2, TransportFrame::new(Protocol::Wle, i, vec![i * 10])).unwrap();
            }
        });
        let (hello, stream) = accept_hello(&listener, deadline).unwrap();
        assert_eq!(hello, Hello::Peer(s1));
        let mut t = TcpTransport::new(vec![], vec![(s1, stream)], Duration::from_secs(5));
        for i in 0..3 {
            assert_eq!(t.recv(s1).unwrap().payload, vec![i * 10]);
        }
        client.join().unwrap();
        assert!(matches!(t.recv(s1), Err(TransportError::Closed(_))));
    }
}
