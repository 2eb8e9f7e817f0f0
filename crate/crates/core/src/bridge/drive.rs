//! Drive loop: run the deadband controller against a networked curtain.
//!
//! Each tick takes one reading from the sensor source, runs the same decide
//! step the simulator uses, and turns every actuating decision into one SET
//! on the wire. The controller trusts the device: the HELLO reply seeds its
//! believed opening, an ERR reply triggers a GET re-sync, and reconnects
//! re-handshake without losing the reading history.

use std::io::{BufReader, Write};
use std::net::TcpStream;
use std::time::Duration;

use crate::bridge::codec::{
    decode, encode, read_line_bounded, ErrCode, ProtocolMessage, MAX_LINE_BYTES, PROTOCOL_VERSION,
};
use crate::controller::{decide, Command, ControllerConfig, ControllerState};
use crate::error::{Error, Result};

/// Outcome of one tick's command exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandResult {
    /// Hold decision; nothing was sent.
    NotSent,
    /// Device acknowledged with `OK <opening>`.
    Acknowledged(i64),
    /// Device refused; the controller re-synced to the confirmed opening.
    Rejected {
        code: ErrCode,
        device_opening: i64,
    },
    /// Connection attempts exhausted; the command never landed.
    Failed(String),
}

/// One drive tick: what was read, decided, and answered.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveRecord {
    pub tick: usize,
    pub t_s: f64,
    pub reading: f64,
    pub command: Command,
    pub result: CommandResult,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DriveLog {
    pub records: Vec<DriveRecord>,
}

impl DriveLog {
    /// The openings actually commanded over the wire, in order.
    pub fn sent_targets(&self) -> Vec<i64> {
        self.records
            .iter()
            .filter_map(|r| match (&r.command, &r.result) {
                (Command::SetOpening(n), CommandResult::Acknowledged(_)) => Some(*n),
                (Command::SetOpening(n), CommandResult::Rejected { .. }) => Some(*n),
                _ => None,
            })
            .collect()
    }
}

/// Knobs for [`drive`].
#[derive(Debug, Clone)]
pub struct DriveOptions {
    pub controller: ControllerConfig,
    /// Pace ticks at `controller.tick_s` wall-clock seconds.
    pub real_time: bool,
    /// Connection attempts per exchange before giving up on the tick.
    pub max_attempts: u32,
    /// First reconnect backoff; doubles per retry.
    pub backoff: Duration,
    /// Read timeout on the socket.
    pub reply_timeout: Duration,
}

impl Default for DriveOptions {
    fn default() -> Self {
        DriveOptions {
            controller: ControllerConfig::default(),
            real_time: false,
            max_attempts: 3,
            backoff: Duration::from_millis(50),
            reply_timeout: Duration::from_secs(5),
        }
    }
}

struct Session {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Session {
    fn connect(endpoint: &str, timeout: Duration) -> Result<(Session, i64)> {
        let stream = TcpStream::connect(endpoint).map_err(|e| Error::io(endpoint, e))?;
        stream
            .set_read_timeout(Some(timeout))
            .map_err(|e| Error::io(endpoint, e))?;
        let writer = stream.try_clone().map_err(|e| Error::io(endpoint, e))?;
        let mut session = Session {
            reader: BufReader::new(stream),
            writer,
        };
        let opening = match session.request(&ProtocolMessage::Hello {
            version: PROTOCOL_VERSION,
        })? {
            ProtocolMessage::Ok(opening) => opening,
            other => {
                return Err(Error::Protocol(format!(
                    "device answered HELLO with {other:?}"
                )))
            }
        };
        Ok((session, opening))
    }

    fn request(&mut self, msg: &ProtocolMessage) -> Result<ProtocolMessage> {
        let io_err = |e: std::io::Error| Error::io("device session", e);
        self.writer
            .write_all(encode(msg).as_bytes())
            .and_then(|()| self.writer.flush())
            .map_err(io_err)?;
        let line = read_line_bounded(&mut self.reader, MAX_LINE_BYTES)
            .map_err(io_err)?
            .ok_or_else(|| {
                Error::io(
                    "device session",
                    std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "device closed"),
                )
            })?;
        decode(&line.0)
    }
}

/// Drive a device at `endpoint` with one controller tick per reading.
///
/// Fails fast when the device is unreachable at startup; afterwards each
/// exchange retries with doubling backoff up to `max_attempts` before logging
/// a failed tick and moving on. Controller reading history survives
/// reconnects; the believed opening re-syncs from every HELLO reply.
pub fn drive(
    options: &DriveOptions,
    readings: impl IntoIterator<Item = f64>,
    endpoint: &str,
) -> Result<DriveLog> {
    options.controller.validate()?;
    let (mut session, opening) = Session::connect(endpoint, options.reply_timeout)?;
    let mut controller = ControllerState::new(&options.controller);
    controller.current_target = opening;

    let mut log = DriveLog::default();
    for (tick, reading) in readings.into_iter().enumerate() {
        if options.real_time && tick > 0 {
            std::thread::sleep(Duration::from_secs_f64(options.controller.tick_s));
        }
        let (command, next) = decide(&controller, reading, &options.controller);
        controller = next;

        let result = match command {
            Command::Hold => CommandResult::NotSent,
            Command::SetOpening(target) => {
                exchange(&mut session, &mut controller, target, options, endpoint)
            }
        };
        log.records.push(DriveRecord {
            tick,
            t_s: tick as f64 * options.controller.tick_s,
            reading,
            command,
            result,
        });
    }
    let _ = session.writer.write_all(encode(&ProtocolMessage::Bye).as_bytes());
    Ok(log)
}

fn exchange(
    session: &mut Session,
    controller: &mut ControllerState,
    target: i64,
    options: &DriveOptions,
    endpoint: &str,
) -> CommandResult {
    let mut backoff = options.backoff;
    let mut last_failure = String::new();
    for attempt in 0..options.max_attempts {
        if attempt > 0 {
            std::thread::sleep(backoff);
            backoff *= 2;
            match Session::connect(endpoint, options.reply_timeout) {
                Ok((fresh, opening)) => {
                    *session = fresh;
                    // Trust the device over the believed target.
                    controller.current_target = opening;
                }
                Err(e) => {
                    last_failure = e.to_string();
                    continue;
                }
            }
        }
        match session.request(&ProtocolMessage::Set(target)) {
            Ok(ProtocolMessage::Ok(opening)) => {
                // The ack carries the settled opening; adopt it so a retry
                // after a reconnect re-sync cannot leave a stale belief.
                controller.current_target = opening;
                return CommandResult::Acknowledged(opening);
            }
            Ok(ProtocolMessage::Err(code)) => {
                // Roll the believed target back to whatever the device holds.
                let device_opening = match session.request(&ProtocolMessage::Get) {
                    Ok(ProtocolMessage::Ok(opening)) => opening,
                    _ => controller.current_target,
                };
                controller.current_target = device_opening;
                return CommandResult::Rejected {
                    code,
                    device_opening,
                };
            }
            Ok(other) => {
                last_failure = format!("unexpected reply {other:?}");
            }
            Err(e) => {
                last_failure = e.to_string();
            }
        }
    }
    CommandResult::Failed(last_failure)
}
