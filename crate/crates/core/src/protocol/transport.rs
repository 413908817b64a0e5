use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::sync::{Arc, Mutex};

use super::messages::Message;
use super::prover::Prover;
use super::ProtocolError;

/// Verifier-side duplex channel to a prover.
pub trait Transport {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError>;
    fn recv(&mut self) -> Result<Message, ProtocolError>;
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        (**self).send(msg)
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        (**self).recv()
    }
}

/// In-process prover. Messages still go through their JSON line form, so the
/// prover sees exactly what it would read from a socket.
#[derive(Debug)]
pub struct Loopback {
    prover: Prover,
    inbox: VecDeque<String>,
    prover_bound: Vec<u8>,
}

impl Loopback {
    pub fn new(prover: Prover) -> Self {
        Self { prover, inbox: VecDeque::new(), prover_bound: Vec::new() }
    }

    /// Every byte sent towards the prover so far.
    pub fn prover_bound_bytes(&self) -> &[u8] {
        &self.prover_bound
    }
}

impl Transport for Loopback {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        let line = msg.to_line();
        self.prover_bound.extend_from_slice(line.as_bytes());
        self.prover_bound.push(b'\n');
        let parsed = Message::from_line(&line)?;
        if let Some(reply) = self.prover.handle(&parsed)? {
            self.inbox.push_back(reply.to_line());
        }
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let line = self.inbox.pop_front().ok_or(ProtocolError::Closed)?;
        Message::from_line(&line)
    }
}

/// Newline-delimited JSON over any reader/writer pair (pipes, TCP).
#[derive(Debug)]
pub struct LineTransport<R, W> {
    reader: R,
    writer: W,
}

impl<R: BufRead, W: Write> LineTransport<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self { reader, writer }
    }

    pub fn into_inner(self) -> (R, W) {
        (self.reader, self.writer)
    }
}

impl<R: BufRead, W: Write> Transport for LineTransport<R, W> {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        writeln!(self.writer, "{}", msg.to_line())?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(ProtocolError::Closed);
        }
        Message::from_line(&line)
    }
}

/// Writer that keeps a copy of everything written through it.
#[derive(Debug, Clone)]
pub struct CaptureWriter<W> {
    inner: W,
    captured: Arc<Mutex<Vec<u8>>>,
}

impl<W: Write> CaptureWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, captured: Arc::new(Mutex::new(Vec::new())) }
    }

    /// Shared handle to the captured bytes.
    pub fn captured(&self) -> Arc<Mutex<Vec<u8>>> {
        self.captured.clone()
    }
}

impl<W: Write> Write for CaptureWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.captured.lock().expect("capture lock").extend_from_slice(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Runs a prover over a byte stream until the peer closes it. Returns the
/// number of messages handled.
pub fn serve<R: BufRead, W: Write>(prover: &mut Prover, mut reader: R, mut writer: W) -> Result<usize, ProtocolError> {
    let mut handled = 0;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(handled);
        }
        if line.trim().is_empty() {
            continue;
        }
        let msg = Message::from_line(&line)?;
        handled += 1;
        if let Some(reply) = prover.handle(&msg)? {
            writeln!(writer, "{}", reply.to_line())?;
            writer.flush()?;
        }
    }
}
