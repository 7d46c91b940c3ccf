// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {pos} out of bounds (valid range {lo}..={hi})")]
    OutOfBounds { pos: u64, lo: u64, hi: u64 },

    #[error("ordinal {ordinal} not found (have {count})")]
    NotFound { ordinal: u64, count: u64 },

    #[error("end of stream")]
    EndOfStream,

    #[error("build error: {0}")]
    Build(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown object {0}")]
    UnknownObject(u32),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_bounds(pos: impl TryInto<u64>, lo: u64, hi: u64) -> Self {
        Error::OutOfBounds { pos: pos.try_into().unwrap_or(u64::MAX), lo, hi }
    }

    pub(crate) fn not_found(ordinal: impl TryInto<u64>, count: impl TryInto<u64>) -> Self {
        Error::NotFound { ordinal: ordinal.try_into().unwrap_or(u64::MAX), count: count.try_into().unwrap_or(u64::MAX) }
    }
}
