//! Length-prefixed frames and the byte streams that carry them.
//!
//! Frame: type byte, payload length as 4 bytes big-endian, payload.

use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use thiserror::Error;

use crate::bits::BitString;
use crate::extractor::Nonce;

pub const MAX_PAYLOAD: usize = 64 * 1024;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

pub const TYPE_CHALLENGE_REQUEST: u8 = 0x01;
pub const TYPE_CHALLENGE: u8 = 0x02;
pub const TYPE_RESPONSE: u8 = 0x03;
pub const TYPE_VERDICT: u8 = 0x04;
pub const TYPE_ERROR: u8 = 0x7F;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("timed out waiting for a frame")]
    Timeout,
    #[error("peer closed the stream")]
    Closed,
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for WireError {
    fn from(e: io::Error) -> Self {
        match e.kind() {
            io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => WireError::Timeout,
            io::ErrorKind::UnexpectedEof => WireError::Malformed("truncated frame".into()),
            _ => WireError::Io(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    ChallengeRequest,
    Challenge { challenge: BitString, nonce: Nonce },
    Response([u8; 32]),
    Verdict(bool),
    Error(String),
}

fn malformed(what: impl Into<String>) -> WireError {
    WireError::Malformed(what.into())
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::ChallengeRequest => TYPE_CHALLENGE_REQUEST,
            Message::Challenge { .. } => TYPE_CHALLENGE,
            Message::Response(_) => TYPE_RESPONSE,
            Message::Verdict(_) => TYPE_VERDICT,
            Message::Error(_) => TYPE_ERROR,
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            Message::ChallengeRequest => Vec::new(),
            Message::Challenge { challenge, nonce } => {
                let len = u16::try_from(challenge.len()).expect("challenge length checked by encode");
                let mut p = len.to_be_bytes().to_vec();
                p.extend(challenge.to_bytes());
                p.extend_from_slice(nonce);
                p
            }
            Message::Response(mac) => mac.to_vec(),
            Message::Verdict(accept) => vec![*accept as u8],
            Message::Error(reason) => reason.as_bytes().to_vec(),
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        if let Message::Challenge { challenge, .. } = self {
            if challenge.len() > u16::MAX as usize {
                return Err(malformed(format!("challenge of {} bits exceeds 16-bit length", challenge.len())));
            }
        }
        let payload = self.payload();
        if payload.len() > MAX_PAYLOAD {
            return Err(malformed(format!("payload of {} bytes exceeds {MAX_PAYLOAD}", payload.len())));
        }
        let mut frame = Vec::with_capacity(5 + payload.len());
        frame.push(self.type_byte());
        frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        frame.extend(payload);
        Ok(frame)
    }

    pub fn decode(kind: u8, payload: &[u8]) -> Result<Self, WireError> {
        match kind {
            TYPE_CHALLENGE_REQUEST if payload.is_empty() => Ok(Message::ChallengeRequest),
            TYPE_CHALLENGE => {
                if payload.len() < 2 {
                    return Err(malformed("challenge payload too short"));
                }
                let bits = u16::from_be_bytes([payload[0], payload[1]]) as usize;
                let bytes = bits.div_ceil(8);
                if bits == 0 || payload.len() != 2 + bytes + 16 {
                    return Err(malformed(format!("challenge payload of {} bytes for {bits} bits", payload.len())));
                }
                let raw = &payload[2..2 + bytes];
                let challenge = BitString::from_bytes(raw, bits).map_err(|e| malformed(e.to_string()))?;
                if challenge.to_bytes() != raw {
                    return Err(malformed("nonzero padding bits"));
                }
                let nonce = payload[2 + bytes..].try_into().expect("16 bytes by length check");
                Ok(Message::Challenge { challenge, nonce })
            }
            TYPE_RESPONSE => {
                let mac = payload.try_into().map_err(|_| malformed(format!("response of {} bytes", payload.len())))?;
                Ok(Message::Response(mac))
            }
            TYPE_VERDICT => match payload {
                [0] => Ok(Message::Verdict(false)),
                [1] => Ok(Message::Verdict(true)),
                _ => Err(malformed("verdict payload must be one byte 0 or 1")),
            },
            TYPE_ERROR => Ok(Message::Error(String::from_utf8_lossy(payload).into_owned())),
            TYPE_CHALLENGE_REQUEST => Err(malformed("challenge request carries a payload")),
            other => Err(malformed(format!("unknown frame type 0x{other:02x}"))),
        }
    }
}

pub fn write_message<W: Write + ?Sized>(w: &mut W, msg: &Message) -> Result<(), WireError> {
    w.write_all(&msg.encode()?)?;
    w.flush()?;
    Ok(())
}

pub fn read_message<R: Read + ?Sized>(r: &mut R) -> Result<Message, WireError> {
    let mut header = [0u8; 5];
    match r.read(&mut header[..1])? {
        0 => return Err(WireError::Closed),
        _ => r.read_exact(&mut header[1..])?,
    }
    let len = u32::from_be_bytes(header[1..].try_into().expect("4 bytes")) as usize;
    if len > MAX_PAYLOAD {
        return Err(malformed(format!("declared payload of {len} bytes exceeds {MAX_PAYLOAD}")));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Message::decode(header[0], &payload)
}

/// One end of an in-memory duplex byte stream. Reads block for at most the
/// configured timeout.
pub struct PipeEnd {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    buf: Vec<u8>,
    pos: usize,
    timeout: Duration,
}

/// Two connected pipe ends.
pub fn pipe(timeout: Duration) -> (PipeEnd, PipeEnd) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    let end = |tx, rx| PipeEnd { tx, rx, buf: Vec::new(), pos: 0, timeout };
    (end(a_tx, a_rx), end(b_tx, b_rx))
}

impl Read for PipeEnd {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if out.is_empty() {
            return Ok(0);
        }
        if self.pos == self.buf.len() {
            match self.rx.recv_timeout(self.timeout) {
                Ok(chunk) => {
                    self.buf = chunk;
                    self.pos = 0;
                }
                Err(RecvTimeoutError::Timeout) => return Err(io::ErrorKind::TimedOut.into()),
                Err(RecvTimeoutError::Disconnected) => return Ok(0),
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for PipeEnd {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        if data.is_empty() {
            return Ok(0);
        }
        self.tx.send(data.to_vec()).map_err(|_| io::Error::from(io::ErrorKind::BrokenPipe))?;
        Ok(data.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Apply the per-message timeout to both directions of a TCP stream.
pub fn configure_tcp(stream: &TcpStream, timeout: Duration) -> io::Result<()> {
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    stream.set_nodelay(true)
}

pub fn tcp_connect(addr: impl ToSocketAddrs, timeout: Duration) -> io::Result<TcpStream> {
    let addr = addr
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "address resolves to nothing"))?;
    let stream = TcpStream::connect_timeout(&addr, timeout)?;
    configure_tcp(&stream, timeout)?;
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(msg: Message) {
        let frame = msg.encode().unwrap();
        assert_eq!(frame[0], msg.type_byte());
        assert_eq!(u32::from_be_bytes(frame[1..5].try_into().unwrap()) as usize, frame.len() - 5);
        assert_eq!(read_message(&mut frame.as_slice()).unwrap(), msg);
    }

    #[test]
    fn messages_round_trip() {
        round_trip(Message::ChallengeRequest);
        round_trip(Message::Challenge { challenge: "10110".parse().unwrap(), nonce: [3; 16] });
        round_trip(Message::Response([7; 32]));
        round_trip(Message::Verdict(true));
        round_trip(Message::Verdict(false));
        round_trip(Message::Error("store exhausted".into()));
    }

    #[test]
    fn challenge_layout() {
        let msg = Message::Challenge { challenge: "1011".parse().unwrap(), nonce: [0xAA; 16] };
        let frame = msg.encode().unwrap();
        assert_eq!(&frame[..8], &[0x02, 0, 0, 0, 19, 0, 4, 0xB0]);
        assert_eq!(&frame[8..], &[0xAA; 16]);
    }

    #[test]
    fn malformed_frames() {
        let cases: Vec<Vec<u8>> = vec![
            vec![0x03, 0, 0, 0, 10, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            vec![0x03, 0, 0, 0, 32, 1, 2, 3],
            vec![0x04, 0, 0, 0, 1, 2],
            vec![0x05, 0, 0, 0, 0],
            vec![0x01, 0, 0, 0, 1, 0],
            vec![0x02, 0, 0, 0, 19, 0, 4, 0xB1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            vec![0x02, 0x00, 0x01, 0x00, 0x01],
            vec![0x03, 0, 0],
        ];
        for frame in cases {
            let err = read_message(&mut frame.as_slice()).unwrap_err();
            assert!(matches!(err, WireError::Malformed(_)), "{frame:?} gave {err:?}");
        }
        assert!(matches!(read_message(&mut [].as_slice()), Err(WireError::Closed)));
    }

    #[test]
    fn pipe_carries_frames_and_times_out() {
        let (mut a, mut b) = pipe(Duration::from_millis(50));
        write_message(&mut a, &Message::Verdict(true)).unwrap();
        assert_eq!(read_message(&mut b).unwrap(), Message::Verdict(true));
        assert!(matches!(read_message(&mut b), Err(WireError::Timeout)));
        drop(a);
        assert!(matches!(read_message(&mut b), Err(WireError::Closed)));
    }
}
