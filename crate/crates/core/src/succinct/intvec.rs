// SPDX-License-Identifier: Apache-2.0

use super::wire::{self, Reader, Wire};
use crate::error::{Error, Result};

/// Fixed-width packed integer array, LSB-first within 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVector {
    len: usize,
    width: u32,
    words: Box<[u64]>,
}

/// Borrowed packed array with the layout of [`IntVector`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ints<'a> {
    len: usize,
    width: u32,
    words: &'a [u64],
}

/// Words holding `len` values of `width` bits.
pub(crate) fn words_for(len: usize, width: u32) -> usize {
    (len * width as usize).div_ceil(64)
}

impl<'a> Ints<'a> {
    #[inline]
    pub(crate) fn new(len: usize, width: u32, words: &'a [u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(len, width));
        Ints { len, width, words }
    }

    pub(crate) fn words(self) -> &'a [u64] {
        self.words
    }

    /// Value at 0-based index `i`. Panics when out of range.
    #[inline]
    pub(crate) fn get(self, i: usize) -> u64 {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        if self.width == 0 {
            return 0;
        }
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let lo = self.words[w] >> off;
        let v = if off + self.width as usize <= 64 { lo } else { lo | (self.words[w + 1] << (64 - off)) };
        v & (u64::MAX >> (64 - self.width))
    }
}

/// Bits needed to store `value` (0 for 0).
pub fn bit_width(value: u64) -> u32 {
    64 - value.leading_zeros()
}

impl IntVector {
    pub fn new(len: usize, width: u32) -> Self {
        assert!(width <= 64, "width {width} exceeds 64");
        let bits = len.checked_mul(width as usize).expect("int vector too large");
        IntVector { len, width, words: vec![0; bits.div_ceil(64)].into_boxed_slice() }
    }

    /// Takes ownership of packed words; `words` must have the exact length.
    pub(crate) fn from_words(len: usize, width: u32, words: Box<[u64]>) -> Self {
        assert_eq!(words.len(), words_for(len, width), "word count for {len}x{width}");
        IntVector { len, width, words }
    }

    /// Packs `values` at the smallest width that holds the maximum.
    pub fn from_values(values: &[u64]) -> Self {
        let width = bit_width(values.iter().copied().max().unwrap_or(0));
        Self::with_width(values, width)
    }

    pub fn with_width(values: &[u64], width: u32) -> Self {
        let mut v = Self::new(values.len(), width);
        for (i, &x) in values.iter().enumerate() {
            v.set(i, x);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// Value at 0-based index `i`. Panics when out of range.
    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.view().get(i)
    }

    #[inline]
    pub(crate) fn view(&self) -> Ints<'_> {
        Ints { len: self.len, width: self.width, words: &self.words }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn set(&mut self, i: usize, value: u64) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        assert!(value & !self.mask() == 0, "value {value} does not fit in {} bits", self.width);
        if self.width == 0 {
            return;
        }
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mask = self.mask();
        self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
        if off + self.width as usize > 64 {
            let spill = 64 - off;
            self.words[w + 1] = (self.words[w + 1] & !(mask >> spill)) | (value >> spill);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn size_in_bytes(&self) -> usize {
        16 + self.words.len() * 8
    }
}

impl Wire for IntVector {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u8(out, wire::VERSION);
        wire::put_u64(out, self.len as u64);
        wire::put_u8(out, self.width as u8);
        wire::put_words(out, &self.words);
    }

    fn read_from(reader: &mut Reader<'_>) -> Result<Self> {
        reader.version("int vector")?;
        let len = reader.usize()?;
        let width = reader.u8()? as u32;
        if width > 64 {
            return Err(Error::Format(format!("int vector: width {width}")));
        }
        let words = reader.words()?;
        let expect = len.checked_mul(width as usize).map(|b| b.div_ceil(64));
        if expect != Some(words.len()) {
            return Err(Error::Format(format!("int vector: {} words for {len}x{width} bits", words.len())));
        }
        Ok(IntVector { len, width, words: words.into_boxed_slice() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(bit_width(0), 0);
        assert_eq!(bit_width(1), 1);
        assert_eq!(bit_width(5), 3);
        assert_eq!(bit_width(u64::MAX), 64);
    }

    #[test]
    fn zero_width_holds_zeros() {
        let v = IntVector::from_values(&[0, 0, 0]);
        assert_eq!(v.width(), 0);
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![0, 0, 0]);
    }

    proptest! {
        #[test]
        fn packs_and_unpacks(values in proptest::collection::vec(any::<u64>(), 0..200), shift in 0u32..64) {
            let values: Vec<u64> = values.into_iter().map(|v| v >> shift).collect();
            let v = IntVector::from_values(&values);
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), values);
            let back = IntVector::from_bytes(&v.to_bytes()).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
