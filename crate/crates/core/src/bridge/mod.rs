//! Wire protocol, fake device server, and drive loop: the networking seam
//! between the controller and a (real or fake) curtain.

mod codec;
mod drive;
mod server;

pub use codec::{
    decode, encode, read_line_bounded, ErrCode, ProtocolMessage, MAX_LINE_BYTES, PROTOCOL_VERSION,
};
pub use drive::{drive, CommandResult, DriveLog, DriveOptions, DriveRecord};
pub use server::{serve_device, DeviceServer};
