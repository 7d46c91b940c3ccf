// SPDX-License-Identifier: Apache-2.0

use super::elias_fano::{Ef, EfCursor, EfShape, EliasFano};
use super::wire::{Reader, Wire};
use crate::error::{Error, Result};

/// Non-negative values `d_1..d_m` written in unary (`d_i` zeros, then a one)
/// and concatenated. The `i`-th one sits at `prefix_sum(i) + i`, so prefix
/// sums fall out of a single select. The prefix sums themselves are what is
/// Elias-Fano coded; zero deltas repeat a value and are legal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryDeltaStream {
    sums: EliasFano,
}

/// Borrowed [`UnaryDeltaStream`].
#[derive(Clone, Copy)]
pub(crate) struct Deltas<'a> {
    sums: Ef<'a>,
}

impl<'a> Deltas<'a> {
    #[inline]
    pub(crate) fn new(sums: Ef<'a>) -> Self {
        Deltas { sums }
    }

    #[inline]
    pub(crate) fn count(self) -> usize {
        self.sums.len()
    }

    pub(crate) fn total(self) -> u64 {
        self.sums.universe() - 1
    }

    #[inline]
    pub(crate) fn prefix_sum_or_zero(self, i: usize) -> u64 {
        if i == 0 {
            0
        } else {
            self.sums.get(i - 1)
        }
    }

    /// See [`UnaryDeltaStream::cursor`]; `after` must not exceed the count.
    pub(crate) fn cursor(self, after: usize) -> DeltaCursor<'a> {
        debug_assert!(after <= self.count());
        DeltaCursor { inner: self.sums.cursor(after) }
    }
}

impl UnaryDeltaStream {
    pub fn from_deltas(deltas: &[u64]) -> Self {
        let mut acc = 0u64;
        let sums: Vec<u64> = deltas
            .iter()
            .map(|d| {
                acc = acc.checked_add(*d).expect("delta sum overflows u64");
                acc
            })
            .collect();
        UnaryDeltaStream { sums: EliasFano::new(&sums, acc + 1).expect("prefix sums are monotone") }
    }

    pub(crate) fn from_view(d: Deltas<'_>) -> Self {
        UnaryDeltaStream { sums: EliasFano::from_view(d.sums) }
    }

    pub(crate) fn shape(&self) -> EfShape {
        self.sums.shape()
    }

    pub(crate) fn buffer(&self) -> &[u64] {
        self.sums.buffer()
    }

    pub fn count(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Sum of all encoded values.
    pub fn total(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            self.sums.get(self.count() - 1)
        }
    }

    /// Length of the virtual unary bitmap.
    pub fn bitmap_len(&self) -> u64 {
        self.total() + self.count() as u64
    }

    /// `d_1 + ... + d_i` for `1 <= i <= count`.
    pub fn prefix_sum(&self, i: usize) -> Result<u64> {
        if i == 0 || i > self.count() {
            return Err(Error::not_found(i, self.count()));
        }
        Ok(self.sums.get(i - 1))
    }

    /// Position of the `i`-th one in the unary bitmap.
    pub fn select1(&self, i: usize) -> Result<u64> {
        Ok(self.prefix_sum(i)? + i as u64)
    }

    /// Cursor positioned after the `after`-th one; its first step returns
    /// `prefix_sum(after + 1)`.
    pub fn cursor(&self, after: usize) -> Result<DeltaCursor<'_>> {
        if after > self.count() {
            return Err(Error::not_found(after, self.count()));
        }
        Ok(DeltaCursor { inner: self.sums.cursor(after) })
    }

    pub fn payload_bits(&self) -> usize {
        self.sums.payload_bits()
    }

    pub fn size_in_bytes(&self) -> usize {
        self.sums.size_in_bytes()
    }
}

/// Sequential select over a [`UnaryDeltaStream`].
#[derive(Clone, Debug)]
pub struct DeltaCursor<'a> {
    inner: EfCursor<'a>,
}

impl DeltaCursor<'_> {
    /// Number of ones consumed so far.
    pub fn position(&self) -> usize {
        self.inner.index()
    }

    /// Prefix sum at the next ordinal, advancing the cursor.
    #[inline]
    pub fn select_next(&mut self) -> Result<u64> {
        self.inner.next().ok_or(Error::EndOfStream)
    }
}

impl Iterator for DeltaCursor<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.inner.next()
    }
}

impl Wire for UnaryDeltaStream {
    fn write_to(&self, out: &mut Vec<u8>) {
        self.sums.write_to(out)
    }

    fn read_from(reader: &mut Reader<'_>) -> Result<Self> {
        let sums = EliasFano::read_from(reader)?;
        let total = if sums.is_empty() { 0 } else { sums.get(sums.len() - 1) };
        if sums.universe() != total + 1 {
            return Err(Error::Format("delta stream: universe does not match total".into()));
        }
        Ok(UnaryDeltaStream { sums })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_sums() {
        let s = UnaryDeltaStream::from_deltas(&[4, 3, 1, 0]);
        assert_eq!(s.prefix_sum(4).unwrap(), 8);
        assert_eq!(s.prefix_sum(1).unwrap(), 4);
        assert_eq!(s.select1(4).unwrap(), 12);
        assert_eq!(s.total(), 8);
        assert!(matches!(s.prefix_sum(0), Err(Error::NotFound { .. })));
        assert!(matches!(s.prefix_sum(5), Err(Error::NotFound { .. })));

        let single = UnaryDeltaStream::from_deltas(&[5]);
        assert_eq!(single.prefix_sum(1).unwrap(), 5);
    }

    #[test]
    fn select_next_sequence() {
        let s = UnaryDeltaStream::from_deltas(&[4, 3, 1, 0]);
        let mut c = s.cursor(0).unwrap();
        let got: Vec<u64> = (0..4).map(|_| c.select_next().unwrap()).collect();
        assert_eq!(got, vec![4, 7, 8, 8]);
        assert!(matches!(c.select_next(), Err(Error::EndOfStream)));

        let single = UnaryDeltaStream::from_deltas(&[9]);
        let mut c = single.cursor(0).unwrap();
        assert_eq!(c.select_next().unwrap(), 9);
        assert!(matches!(c.select_next(), Err(Error::EndOfStream)));

        let mut c = s.cursor(2).unwrap();
        assert_eq!(c.select_next().unwrap(), 8);
        assert!(s.cursor(5).is_err());
    }

    #[test]
    fn empty_stream() {
        let s = UnaryDeltaStream::from_deltas(&[]);
        assert_eq!(s.count(), 0);
        assert_eq!(s.total(), 0);
        assert_eq!(Deltas::new(s.sums.view()).prefix_sum_or_zero(0), 0);
        assert!(s.cursor(0).unwrap().next().is_none());
    }

    proptest! {
        #[test]
        fn prefix_sums_match_oracle(deltas in proptest::collection::vec(prop_oneof![Just(0u64), 0u64..8, 0u64..100_000], 1..300)) {
            let s = UnaryDeltaStream::from_deltas(&deltas);
            let mut acc = 0;
            let mut prev = 0;
            for (i, d) in deltas.iter().enumerate() {
                acc += d;
                let p = s.prefix_sum(i + 1).unwrap();
                prop_assert_eq!(p, acc);
                prop_assert!(p >= prev);
                prop_assert_eq!(p - prev, *d);
                prev = p;
            }
            prop_assert_eq!(s.total(), acc);
            let seq: Vec<u64> = s.cursor(0).unwrap().collect();
            let per_index: Vec<u64> = (1..=deltas.len()).map(|i| s.prefix_sum(i).unwrap()).collect();
            prop_assert_eq!(seq, per_index);
            let back = UnaryDeltaStream::from_bytes(&s.to_bytes()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
