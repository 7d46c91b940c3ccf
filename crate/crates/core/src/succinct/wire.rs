// SPDX-License-Identifier: Apache-2.0

//! Little-endian byte layout shared by every serialized structure.

use crate::error::{Error, Result};

pub(crate) const VERSION: u8 = 1;

/// A structure with a stable, bit-exact byte encoding.
pub trait Wire: Sized {
    fn write_to(&self, out: &mut Vec<u8>);

    fn read_from(reader: &mut Reader<'_>) -> Result<Self>;

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    /// Decodes `bytes`, which must contain exactly one encoded value.
    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader::new(bytes);
        let value = Self::read_from(&mut reader)?;
        if !reader.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", reader.remaining())));
        }
        Ok(value)
    }
}

pub(crate) fn put_u8(out: &mut Vec<u8>, v: u8) {
    out.push(v);
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_words(out: &mut Vec<u8>, words: &[u64]) {
    put_u64(out, words.len() as u64);
    for w in words {
        put_u64(out, *w);
    }
}

/// Cursor over an encoded byte slice.
#[derive(Debug, Clone)]
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format(format!(
                "truncated input: need {n} bytes at offset {}, have {}",
                self.pos,
                self.remaining()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("length {v} exceeds usize")))
    }

    pub(crate) fn words(&mut self) -> Result<Vec<u64>> {
        let n = self.usize()?;
        if n.checked_mul(8).is_none_or(|b| b > self.remaining()) {
            return Err(Error::Format(format!("word count {n} exceeds input")));
        }
        (0..n).map(|_| self.u64()).collect()
    }

    pub(crate) fn version(&mut self, what: &str) -> Result<()> {
        match self.u8()? {
            VERSION => Ok(()),
            v => Err(Error::Format(format!("{what}: unsupported version {v}"))),
        }
    }
}
