//! Framed channel over any byte stream, with TCP helpers.

use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::{read_frame, write_frame, FrameIoError, Message};
use crate::session::{Channel, ChannelError};

/// Default wait for each expected frame.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

pub struct StreamChannel<S> {
    stream: S,
}

impl<S: Read + Write> StreamChannel<S> {
    pub fn new(stream: S) -> Self {
        StreamChannel { stream }
    }

    pub fn into_inner(self) -> S {
        self.stream
    }
}

fn map_io(e: io::Error) -> ChannelError {
    match e.kind() {
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => ChannelError::Timeout,
        io::ErrorKind::UnexpectedEof
        | io::ErrorKind::ConnectionReset
        | io::ErrorKind::ConnectionAborted
        | io::ErrorKind::BrokenPipe => ChannelError::Closed,
        _ => ChannelError::Io(e),
    }
}

impl<S: Read + Write> Channel for StreamChannel<S> {
    fn send(&mut self, msg: &Message) -> Result<(), ChannelError> {
        write_frame(&mut self.stream, msg).map_err(map_io)
    }

    fn recv(&mut self) -> Result<Message, ChannelError> {
        read_frame(&mut self.stream).map_err(|e| match e {
            FrameIoError::Io(e) => map_io(e),
            FrameIoError::Decode(d) => ChannelError::Decode(d),
        })
    }
}

pub type TcpChannel = StreamChannel<TcpStream>;

impl TcpChannel {
    /// Wraps an accepted or connected socket, applying `timeout` to reads and writes.
    pub fn from_tcp(stream: TcpStream, timeout: Duration) -> io::Result<Self> {
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        Ok(StreamChannel::new(stream))
    }

    pub fn connect<A: ToSocketAddrs>(addr: A, timeout: Duration) -> io::Result<Self> {
        let mut last = None;
        for a in addr.to_socket_addrs()? {
            match TcpStream::connect_timeout(&a, timeout) {
                Ok(s) => return Self::from_tcp(s, timeout),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| io::Error::new(io::ErrorKind::NotFound, "no address")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Challenge;
    use crate::wire::DecodeError;

    #[test]
    fn stream_channel_maps_errors() {
        let mut chan = StreamChannel::new(io::Cursor::new(Vec::new()));
        chan.send(&Message::Challenge(Challenge::One)).unwrap();
        let bytes = chan.into_inner().into_inner();
        let mut chan = StreamChannel::new(io::Cursor::new(bytes));
        assert_eq!(chan.recv().unwrap(), Message::Challenge(Challenge::One));
        assert!(matches!(chan.recv(), Err(ChannelError::Closed)));

        let mut chan = StreamChannel::new(io::Cursor::new(b"XX\x01\x03\0\0\0\x01\0".to_vec()));
        assert!(matches!(
            chan.recv(),
            Err(ChannelError::Decode(DecodeError::BadMagic(_)))
        ));
    }
}
