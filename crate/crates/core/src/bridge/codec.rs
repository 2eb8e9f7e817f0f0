//! Line codec for the curtain wire protocol.
//!
//! Grammar, one ASCII message per LF-terminated line of at most
//! [`MAX_LINE_BYTES`] bytes, single-space separators:
//!
//! ```text
//! HELLO v1      client greets; server answers OK <opening>
//! SET <int>     command an opening in percent
//! GET           query the current opening
//! OK <int>      success reply carrying the opening
//! ERR <CODE>    failure reply, CODE in {RANGE, PARSE, STATE}
//! BYE           close the session
//! ```

use crate::error::{Error, Result};

/// Cap on one protocol line, terminator excluded. Bounds parser memory.
pub const MAX_LINE_BYTES: usize = 64;

/// Protocol version this build speaks.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrCode {
    Range,
    Parse,
    State,
}

impl ErrCode {
    fn as_str(self) -> &'static str {
        match self {
            ErrCode::Range => "RANGE",
            ErrCode::Parse => "PARSE",
            ErrCode::State => "STATE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolMessage {
    Hello { version: u32 },
    Set(i64),
    Get,
    Ok(i64),
    Err(ErrCode),
    Bye,
}

/// Encode a message as one wire line, LF included.
pub fn encode(msg: &ProtocolMessage) -> String {
    match msg {
        ProtocolMessage::Hello { version } => format!("HELLO v{version}\n"),
        ProtocolMessage::Set(pct) => format!("SET {pct}\n"),
        ProtocolMessage::Get => "GET\n".to_owned(),
        ProtocolMessage::Ok(pct) => format!("OK {pct}\n"),
        ProtocolMessage::Err(code) => format!("ERR {}\n", code.as_str()),
        ProtocolMessage::Bye => "BYE\n".to_owned(),
    }
}

fn parse_error(why: impl Into<String>) -> Error {
    Error::Protocol(why.into())
}

/// Decode one line. The trailing LF is optional; anything malformed comes
/// back as an error value; decode never panics, whatever the bytes.
pub fn decode(line: &[u8]) -> Result<ProtocolMessage> {
    let line = match line.split_last() {
        Some((b'\n', rest)) => rest,
        _ => line,
    };
    if line.len() > MAX_LINE_BYTES {
        return Err(parse_error(format!(
            "line of {} bytes exceeds the {MAX_LINE_BYTES}-byte cap",
            line.len()
        )));
    }
    let text = std::str::from_utf8(line).map_err(|_| parse_error("line is not ASCII text"))?;
    if !text.is_ascii() {
        return Err(parse_error("line is not ASCII text"));
    }
    let mut tokens = text.split(' ');
    let verb = tokens.next().unwrap_or("");
    let arg = tokens.next();
    if tokens.next().is_some() {
        return Err(parse_error(format!("too many tokens in {text:?}")));
    }

    let int_arg = |what: &str| -> Result<i64> {
        let raw = arg.ok_or_else(|| parse_error(format!("{what} needs an argument")))?;
        if raw.is_empty() || (!raw.starts_with('-') && !raw.as_bytes()[0].is_ascii_digit()) {
            return Err(parse_error(format!("{what}: bad integer {raw:?}")));
        }
        raw.parse::<i64>()
            .map_err(|_| parse_error(format!("{what}: bad integer {raw:?}")))
    };

    match verb {
        "HELLO" => {
            let raw = arg.ok_or_else(|| parse_error("HELLO needs a version"))?;
            let digits = raw
                .strip_prefix('v')
                .ok_or_else(|| parse_error(format!("HELLO: bad version {raw:?}")))?;
            let version = digits
                .parse::<u32>()
                .map_err(|_| parse_error(format!("HELLO: bad version {raw:?}")))?;
            Ok(ProtocolMessage::Hello { version })
        }
        "SET" => Ok(ProtocolMessage::Set(int_arg("SET")?)),
        "GET" => match arg {
            None => Ok(ProtocolMessage::Get),
            Some(_) => Err(parse_error("GET takes no argument")),
        },
        "OK" => Ok(ProtocolMessage::Ok(int_arg("OK")?)),
        "ERR" => match arg {
            Some("RANGE") => Ok(ProtocolMessage::Err(ErrCode::Range)),
            Some("PARSE") => Ok(ProtocolMessage::Err(ErrCode::Parse)),
            Some("STATE") => Ok(ProtocolMessage::Err(ErrCode::State)),
            other => Err(parse_error(format!("ERR: bad code {other:?}"))),
        },
        "BYE" => match arg {
            None => Ok(ProtocolMessage::Bye),
            Some(_) => Err(parse_error("BYE takes no argument")),
        },
        other => Err(parse_error(format!("unknown verb {other:?}"))),
    }
}

/// Read one LF-terminated line without buffering more than `max` payload
/// bytes. Returns `None` at EOF before any byte, otherwise the line (LF
/// stripped) and an overlong flag; an overlong line is drained to its LF so
/// the stream stays usable, but only `max` bytes of it are kept.
pub fn read_line_bounded<R: std::io::BufRead>(
    reader: &mut R,
    max: usize,
) -> std::io::Result<Option<(Vec<u8>, bool)>> {
    let mut line: Vec<u8> = Vec::with_capacity(32);
    let mut overlong = false;
    let mut saw_any = false;
    loop {
        // Scope the fill_buf borrow so consume can follow it.
        let (grabbed, payload_len, lf_idx) = {
            let buf = reader.fill_buf()?;
            if buf.is_empty() {
                return if saw_any {
                    Ok(Some((line, overlong)))
                } else {
                    Ok(None)
                };
            }
            let lf_idx = buf.iter().position(|&b| b == b'\n');
            let payload_len = lf_idx.unwrap_or(buf.len());
            let room = max - line.len();
            (buf[..payload_len.min(room)].to_vec(), payload_len, lf_idx)
        };
        saw_any = true;
        if payload_len > grabbed.len() {
            overlong = true;
        }
        line.extend_from_slice(&grabbed);
        match lf_idx {
            Some(idx) => {
                reader.consume(idx + 1);
                return Ok(Some((line, overlong)));
            }
            None => {
                reader.consume(payload_len);
            }
        }
    }
}
