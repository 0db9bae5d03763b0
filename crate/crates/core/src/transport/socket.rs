use std::collections::HashMap;
use std::io::{self, Read, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use super::{ProtocolError, Transport, MAX_FRAME_LEN};

/// Overrides the host part of every agent's bind address.
pub const BIND_ADDR_ENV: &str = "ASCII_BIND_ADDR";

type Inbox = Receiver<Result<Vec<u8>, String>>;

/// Each agent listens on its own TCP port. Frames travel with the same
/// length-prefixed framing they were serialized with.
pub struct SocketTransport {
    addrs: Vec<SocketAddr>,
    inboxes: Vec<Inbox>,
    outgoing: HashMap<(usize, usize), TcpStream>,
    shutdown: Arc<AtomicBool>,
    acceptors: Vec<JoinHandle<()>>,
    timeout: Duration,
}

fn host_override() -> Option<String> {
    std::env::var(BIND_ADDR_ENV).ok().filter(|h| !h.trim().is_empty())
}

impl SocketTransport {
    /// Ephemeral ports on loopback, or on the host named by [`BIND_ADDR_ENV`].
    pub fn local(num_agents: usize) -> io::Result<Self> {
        let host = host_override().unwrap_or_else(|| "127.0.0.1".into());
        let addrs: Vec<String> = (0..num_agents).map(|_| format!("{host}:0")).collect();
        Self::bind_addrs(&addrs)
    }

    /// One `host:port` per agent. Port 0 picks a free port.
    pub fn bind(addrs: &[String]) -> io::Result<Self> {
        match host_override() {
            Some(host) => {
                let rewritten: Vec<String> = addrs
                    .iter()
                    .map(|a| {
                        let port = a.rsplit_once(':').map_or("0", |(_, p)| p);
                        format!("{host}:{port}")
                    })
                    .collect();
                Self::bind_addrs(&rewritten)
            }
            None => Self::bind_addrs(addrs),
        }
    }

    fn bind_addrs(addrs: &[String]) -> io::Result<Self> {
        let shutdown = Arc::new(AtomicBool::new(false));
        let mut bound = Vec::with_capacity(addrs.len());
        let mut inboxes = Vec::with_capacity(addrs.len());
        let mut acceptors = Vec::with_capacity(addrs.len());
        for a in addrs {
            let addr = a
                .to_socket_addrs()?
                .next()
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("cannot resolve {a}")))?;
            let listener = TcpListener::bind(addr)?;
            bound.push(listener.local_addr()?);
            let (tx, rx) = mpsc::channel();
            inboxes.push(rx);
            let stop = Arc::clone(&shutdown);
            acceptors.push(thread::spawn(move || accept_loop(listener, tx, stop)));
        }
        Ok(Self {
            addrs: bound,
            inboxes,
            outgoing: HashMap::new(),
            shutdown,
            acceptors,
            timeout: Duration::from_secs(30),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn addresses(&self) -> &[SocketAddr] {
        &self.addrs
    }

    fn dial_addr(&self, agent: usize) -> SocketAddr {
        let mut addr = self.addrs[agent];
        if addr.ip().is_unspecified() {
            addr.set_ip(IpAddr::V4(Ipv4Addr::LOCALHOST));
        }
        addr
    }
}

fn accept_loop(listener: TcpListener, inbox: Sender<Result<Vec<u8>, String>>, stop: Arc<AtomicBool>) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = conn else { continue };
        let tx = inbox.clone();
        thread::spawn(move || read_frames(stream, tx));
    }
}

fn read_frames(mut stream: TcpStream, inbox: Sender<Result<Vec<u8>, String>>) {
    loop {
        let mut prefix = [0u8; 4];
        match stream.read_exact(&mut prefix) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return,
            Err(e) => {
                let _ = inbox.send(Err(e.to_string()));
                return;
            }
        }
        let len = u32::from_be_bytes(prefix) as usize;
        if len > MAX_FRAME_LEN {
            let _ = inbox.send(Err(format!("declared frame length {len} exceeds the limit")));
            return;
        }
        let mut frame = vec![0u8; 4 + len];
        frame[..4].copy_from_slice(&prefix);
        if let Err(e) = stream.read_exact(&mut frame[4..]) {
            let _ = inbox.send(Err(format!("frame cut short: {e}")));
            return;
        }
        if inbox.send(Ok(frame)).is_err() {
            return;
        }
    }
}

impl Transport for SocketTransport {
    fn send(&mut self, from: usize, to: usize, frame: &[u8]) -> Result<(), ProtocolError> {
        if to >= self.addrs.len() {
            return Err(ProtocolError::ConnectionLost { agent: to, reason: "no such agent".into() });
        }
        let lost = |e: io::Error| ProtocolError::ConnectionLost { agent: to, reason: e.to_string() };
        if !self.outgoing.contains_key(&(from, to)) {
            let stream = TcpStream::connect_timeout(&self.dial_addr(to), self.timeout).map_err(lost)?;
            stream.set_nodelay(true).map_err(lost)?;
            self.outgoing.insert((from, to), stream);
        }
        let stream = self.outgoing.get_mut(&(from, to)).expect("inserted above");
        stream.write_all(frame).and_then(|()| stream.flush()).map_err(|e| {
            self.outgoing.remove(&(from, to));
            lost(e)
        })
    }

    fn recv(&mut self, at: usize) -> Result<Vec<u8>, ProtocolError> {
        let inbox = self
            .inboxes
            .get(at)
            .ok_or_else(|| ProtocolError::ConnectionLost { agent: at, reason: "no such agent".into() })?;
        match inbox.recv_timeout(self.timeout) {
            Ok(Ok(frame)) => Ok(frame),
            Ok(Err(reason)) => Err(ProtocolError::ConnectionLost { agent: at, reason }),
            Err(RecvTimeoutError::Timeout) => {
                Err(ProtocolError::ConnectionLost { agent: at, reason: "timed out waiting for a frame".into() })
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(ProtocolError::ConnectionLost { agent: at, reason: "listener closed".into() })
            }
        }
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        self.outgoing.clear();
        for i in 0..self.addrs.len() {
            // Wake the blocking accept so the thread sees the flag.
            let _ = TcpStream::connect_timeout(&self.dial_addr(i), Duration::from_millis(200));
        }
        for h in self.acceptors.drain(..) {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_cross_the_socket_in_order() {
        let mut t = SocketTransport::local(2).unwrap().with_timeout(Duration::from_secs(5));
        for i in 0..5u8 {
            let frame = [0, 0, 0, 2, 1, i];
            t.send(0, 1, &frame).unwrap();
        }
        for i in 0..5u8 {
            assert_eq!(t.recv(1).unwrap(), vec![0, 0, 0, 2, 1, i]);
        }
        t.send(1, 0, &[0, 0, 0, 0]).unwrap();
        assert_eq!(t.recv(0).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn empty_inbox_times_out() {
        let mut t = SocketTransport::local(1).unwrap().with_timeout(Duration::from_millis(50));
        assert!(matches!(t.recv(0), Err(ProtocolError::ConnectionLost { .. })));
    }
}
