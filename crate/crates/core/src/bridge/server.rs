//! Fake networked curtain: a TCP server speaking the wire protocol.
//!
//! Sessions are concurrent, but every device mutation goes through one mutex,
//! so interleaved SETs serialize and the device never holds an invalid state.
//! An accepted SET settles the motion ramp before the reply, so a follow-up
//! GET echoes the commanded opening.

use std::io::{BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use crate::actuator::CurtainState;
use crate::bridge::codec::{
    decode, encode, read_line_bounded, ErrCode, ProtocolMessage, MAX_LINE_BYTES, PROTOCOL_VERSION,
};
use crate::error::{Error, Result};

/// Connection state of one client session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SessionState {
    AwaitingHello,
    Ready,
    Closed,
}

/// Handle to a running device server.
pub struct DeviceServer {
    local_addr: SocketAddr,
    device: Arc<Mutex<CurtainState>>,
    stop: Arc<AtomicBool>,
    sessions: Arc<Mutex<Vec<TcpStream>>>,
    accept_thread: Option<JoinHandle<()>>,
}

/// Bind `endpoint` (e.g. `127.0.0.1:7878`, port 0 for ephemeral) and serve
/// the device until [`DeviceServer::shutdown`]. A busy endpoint fails here.
pub fn serve_device(initial: CurtainState, endpoint: &str) -> Result<DeviceServer> {
    initial.validate()?;
    let listener = TcpListener::bind(endpoint).map_err(|e| Error::io(endpoint, e))?;
    let local_addr = listener.local_addr().map_err(|e| Error::io(endpoint, e))?;
    let device = Arc::new(Mutex::new(initial));
    let stop = Arc::new(AtomicBool::new(false));
    let sessions: Arc<Mutex<Vec<TcpStream>>> = Arc::new(Mutex::new(Vec::new()));

    let accept_device = Arc::clone(&device);
    let accept_stop = Arc::clone(&stop);
    let accept_sessions = Arc::clone(&sessions);
    let accept_thread = std::thread::spawn(move || {
        for stream in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            if let Ok(clone) = stream.try_clone() {
                accept_sessions.lock().expect("session list").push(clone);
            }
            let device = Arc::clone(&accept_device);
            std::thread::spawn(move || {
                let _ = serve_session(stream, &device);
            });
        }
    });

    Ok(DeviceServer {
        local_addr,
        device,
        stop,
        sessions,
        accept_thread: Some(accept_thread),
    })
}

impl DeviceServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Current device opening (settled).
    pub fn opening(&self) -> i64 {
        self.device.lock().expect("device mutex").opening_pct
    }

    /// Stop accepting, sever live sessions, and join the accept loop.
    pub fn shutdown(mut self) {
        self.stop_now();
    }

    /// Block until the server stops (for the CLI serve mode).
    pub fn join(mut self) {
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }

    fn stop_now(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept with a throwaway connection.
        let _ = TcpStream::connect(self.local_addr);
        for session in self.sessions.lock().expect("session list").drain(..) {
            let _ = session.shutdown(std::net::Shutdown::Both);
        }
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }
}

impl Drop for DeviceServer {
    fn drop(&mut self) {
        self.stop_now();
    }
}

fn serve_session(stream: TcpStream, device: &Mutex<CurtainState>) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut state = SessionState::AwaitingHello;

    while state != SessionState::Closed {
        let Some((line, overlong)) = read_line_bounded(&mut reader, MAX_LINE_BYTES)? else {
            break; // client went away
        };
        let reply = if overlong {
            ProtocolMessage::Err(ErrCode::Parse)
        } else {
            match decode(&line) {
                Err(_) => ProtocolMessage::Err(ErrCode::Parse),
                Ok(msg) => dispatch(msg, &mut state, device),
            }
        };
        if state == SessionState::Closed {
            break;
        }
        writer.write_all(encode(&reply).as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

fn dispatch(
    msg: ProtocolMessage,
    state: &mut SessionState,
    device: &Mutex<CurtainState>,
) -> ProtocolMessage {
    match (*state, msg) {
        (_, ProtocolMessage::Bye) => {
            *state = SessionState::Closed;
            ProtocolMessage::Bye // never written; session closes first
        }
        (SessionState::AwaitingHello, ProtocolMessage::Hello { version })
            if version == PROTOCOL_VERSION =>
        {
            *state = SessionState::Ready;
            let opening = device.lock().expect("device mutex").opening_pct;
            ProtocolMessage::Ok(opening)
        }
        (SessionState::AwaitingHello, _) => ProtocolMessage::Err(ErrCode::State),
        (SessionState::Ready, ProtocolMessage::Set(pct)) => {
            if !(0..=100).contains(&pct) {
                return ProtocolMessage::Err(ErrCode::Range);
            }
            let mut dev = device.lock().expect("device mutex");
            match dev.with_target(pct) {
                Ok(next) => {
                    *dev = next.settle();
                    ProtocolMessage::Ok(dev.opening_pct)
                }
                Err(_) => ProtocolMessage::Err(ErrCode::Range),
            }
        }
        (SessionState::Ready, ProtocolMessage::Get) => {
            ProtocolMessage::Ok(device.lock().expect("device mutex").opening_pct)
        }
        // A second HELLO, or a stray reply verb, is a session-state violation.
        (SessionState::Ready, _) => ProtocolMessage::Err(ErrCode::State),
        (SessionState::Closed, _) => ProtocolMessage::Err(ErrCode::State),
    }
}
