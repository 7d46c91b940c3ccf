// SPDX-License-Identifier: Apache-2.0

//! Elias-Fano coding of non-decreasing integer sequences and the sparse
//! bitmap built on it.
//!
//! Each value is split at `low_width = floor(log2(universe / len))`: the low
//! bits go to a packed array, the high part `h_i` is written as a one at
//! position `h_i + i` of the high bitmap. Access is one `select1` on the high
//! bitmap plus one packed read.

use super::bits::{BitVector, Bits, BitsShape};
use super::intvec::{words_for, IntVector, Ints};
use super::wire::{self, Reader, Wire};
use crate::error::{Error, Result};

/// Universe, length and split of a sequence; locates both parts in a buffer
/// holding the low array followed by the high bitmap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct EfShape {
    universe: u64,
    len: usize,
    low_width: u32,
}

impl EfShape {
    pub(crate) fn new(universe: u64, len: usize) -> Self {
        let n = len as u64;
        let low_width = if n > 0 && universe > n { 63 - (universe / n).leading_zeros() } else { 0 };
        EfShape { universe, len, low_width }
    }

    /// Shape with a known split, as returned by [`low_width`](Self::low_width).
    #[inline]
    pub(crate) fn with_width(universe: u64, len: usize, low_width: u32) -> Self {
        EfShape { universe, len, low_width }
    }

    pub(crate) fn universe(self) -> u64 {
        self.universe
    }

    pub(crate) fn low_width(self) -> u32 {
        self.low_width
    }

    #[inline]
    fn low_words(self) -> usize {
        words_for(self.len, self.low_width)
    }

    #[inline]
    fn high(self) -> BitsShape {
        let len = if self.len == 0 { 0 } else { ((self.universe - 1) >> self.low_width) as usize + self.len };
        BitsShape { len, ones: self.len }
    }

    pub(crate) fn words(self) -> usize {
        self.low_words() + self.high().words()
    }

    #[inline]
    pub(crate) fn view(self, buf: &[u64]) -> Ef<'_> {
        let (low, high) = buf.split_at(self.low_words());
        Ef { shape: self, low: Ints::new(self.len, self.low_width, low), high: self.high().view(high) }
    }
}

/// Borrowed Elias-Fano sequence.
#[derive(Clone, Copy)]
pub(crate) struct Ef<'a> {
    shape: EfShape,
    low: Ints<'a>,
    high: Bits<'a>,
}

impl<'a> Ef<'a> {
    #[inline]
    pub(crate) fn len(self) -> usize {
        self.shape.len
    }

    #[inline]
    pub(crate) fn universe(self) -> u64 {
        self.shape.universe
    }

    /// Value at 0-based index `i`. Panics when out of range.
    #[inline]
    pub(crate) fn get(self, i: usize) -> u64 {
        let high = (self.high.select1_at(i + 1) - i) as u64;
        (high << self.shape.low_width) | self.low.get(i)
    }

    #[inline]
    fn low_mask(self) -> u64 {
        (1u64 << self.shape.low_width) - 1
    }

    /// Number of values `<= x`, and whether `x` itself occurs.
    #[inline]
    pub(crate) fn count_le_hit(self, x: u64) -> (usize, bool) {
        if self.shape.len == 0 {
            return (0, false);
        }
        let bucket = (x >> self.shape.low_width) as usize;
        if bucket > self.high.count_zeros() || x >= self.shape.universe {
            return (self.shape.len, false);
        }
        // Elements with a smaller high part all precede the bucket-th zero.
        let (mut idx, mut pos) = if bucket == 0 {
            (0, 0)
        } else {
            let z = self.high.select0_at(bucket);
            (z + 1 - bucket, z + 1)
        };
        let low = x & self.low_mask();
        let mut hit = false;
        while pos < self.high.len() && self.high.bit(pos) {
            let v = self.low.get(idx);
            if v > low {
                break;
            }
            hit = v == low;
            idx += 1;
            pos += 1;
        }
        (idx, hit)
    }

    /// Cursor whose first `next()` yields the value at 0-based index `i`.
    pub(crate) fn cursor(self, i: usize) -> EfCursor<'a> {
        let words = self.high.words();
        if i >= self.len() {
            return EfCursor { ef: self, idx: self.len(), word: words.len(), current: 0 };
        }
        let pos = self.high.select1_at(i + 1);
        let word = pos / 64;
        let current = words[word] & (u64::MAX << (pos % 64));
        EfCursor { ef: self, idx: i, word, current }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliasFano {
    shape: EfShape,
    buf: Box<[u64]>,
}

impl EliasFano {
    /// Encodes `values`, which must be non-decreasing and below `universe`.
    pub fn new(values: &[u64], universe: u64) -> Result<Self> {
        if let Some(w) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Build(format!("sequence decreases at index {}", w + 1)));
        }
        if let Some(&last) = values.last() {
            if last >= universe {
                return Err(Error::Build(format!("value {last} outside universe {universe}")));
            }
        }
        let shape = EfShape::new(universe, values.len());
        let low_width = shape.low_width;
        let low_mask = if low_width == 0 { 0 } else { (1u64 << low_width) - 1 };
        let lows: Vec<u64> = values.iter().map(|v| v & low_mask).collect();
        let low = IntVector::with_width(&lows, low_width);
        let high = BitVector::from_set_positions(
            shape.high().len,
            values.iter().enumerate().map(|(i, v)| (v >> low_width) as usize + i),
        );
        Ok(Self::from_parts(shape, &low, &high))
    }

    fn from_parts(shape: EfShape, low: &IntVector, high: &BitVector) -> Self {
        let mut buf = Vec::with_capacity(shape.words());
        buf.extend_from_slice(low.words());
        buf.extend_from_slice(high.buffer());
        debug_assert_eq!(buf.len(), shape.words());
        EliasFano { shape, buf: buf.into_boxed_slice() }
    }

    /// Rebuilds from a view's buffer.
    pub(crate) fn from_view(ef: Ef<'_>) -> Self {
        let mut buf = ef.low.words().to_vec();
        buf.extend_from_slice(ef.high.buffer());
        EliasFano { shape: ef.shape, buf: buf.into_boxed_slice() }
    }

    #[inline]
    pub(crate) fn view(&self) -> Ef<'_> {
        self.shape.view(&self.buf)
    }

    pub(crate) fn shape(&self) -> EfShape {
        self.shape
    }

    pub(crate) fn buffer(&self) -> &[u64] {
        &self.buf
    }

    pub fn len(&self) -> usize {
        self.shape.len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn universe(&self) -> u64 {
        self.shape.universe
    }

    pub fn low_width(&self) -> u32 {
        self.shape.low_width
    }

    /// Value at 0-based index `i`. Panics when out of range.
    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.view().get(i)
    }

    /// Number of values `<= x`.
    pub fn count_le(&self, x: u64) -> usize {
        self.view().count_le_hit(x).0
    }

    /// Cursor whose first `next()` yields the value at 0-based index `i`.
    pub fn cursor(&self, i: usize) -> EfCursor<'_> {
        self.view().cursor(i)
    }

    pub fn iter(&self) -> EfCursor<'_> {
        self.cursor(0)
    }

    /// Bits of the encoded payload: low array plus high bitmap.
    pub fn payload_bits(&self) -> usize {
        self.shape.len * self.shape.low_width as usize + self.shape.high().len
    }

    pub fn size_in_bytes(&self) -> usize {
        12 + 8 + self.buf.len() * 8
    }
}

/// Sequential decoder over an [`EliasFano`] sequence. Each step scans the high
/// bitmap word by word for the next one, so no select directory is consulted
/// after the initial seek.
#[derive(Clone)]
pub struct EfCursor<'a> {
    ef: Ef<'a>,
    idx: usize,
    word: usize,
    current: u64,
}

impl EfCursor<'_> {
    /// 0-based index of the value the next call returns.
    pub fn index(&self) -> usize {
        self.idx
    }
}

impl Iterator for EfCursor<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.idx >= self.ef.len() {
            return None;
        }
        let words = self.ef.high.words();
        while self.current == 0 {
            self.word += 1;
            self.current = words[self.word];
        }
        let pos = self.word * 64 + self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        let high = (pos - self.idx) as u64;
        let value = (high << self.ef.shape.low_width) | self.ef.low.get(self.idx);
        self.idx += 1;
        Some(value)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.ef.len() - self.idx;
        (left, Some(left))
    }
}

impl std::fmt::Debug for EfCursor<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EfCursor").field("index", &self.idx).finish()
    }
}

impl Wire for EliasFano {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u8(out, wire::VERSION);
        wire::put_u64(out, self.universe());
        wire::put_u64(out, self.len() as u64);
        let n = self.shape.low_words();
        IntVector::from_words(self.len(), self.low_width(), self.buf[..n].into()).write_to(out);
        BitVector::from_view(self.view().high).write_to(out);
    }

    fn read_from(reader: &mut Reader<'_>) -> Result<Self> {
        reader.version("elias-fano")?;
        let universe = reader.u64()?;
        let len = reader.usize()?;
        let low = IntVector::read_from(reader)?;
        let high = BitVector::read_from(reader)?;
        let shape = EfShape::new(universe, len);
        if low.len() != len || low.width() != shape.low_width || high.shape() != shape.high() {
            return Err(Error::Format("elias-fano: inconsistent parts".into()));
        }
        Ok(Self::from_parts(shape, &low, &high))
    }
}

/// Borrowed [`SparseBitVector`].
#[derive(Clone, Copy)]
pub(crate) struct Sparse<'a> {
    ef: Ef<'a>,
}

impl<'a> Sparse<'a> {
    #[inline]
    pub(crate) fn new(ef: Ef<'a>) -> Self {
        Sparse { ef }
    }

    #[inline]
    pub(crate) fn len(self) -> usize {
        self.ef.universe() as usize
    }

    #[inline]
    pub(crate) fn count_ones(self) -> usize {
        self.ef.len()
    }

    #[inline]
    pub(crate) fn count_zeros(self) -> usize {
        self.len() - self.count_ones()
    }

    #[inline]
    pub(crate) fn rank1_at(self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.ef.count_le_hit((i - 1) as u64).0
        }
    }

    /// Ones among the first `i` bits and whether bit `i` (1-based) is set,
    /// `i >= 1`.
    #[inline]
    pub(crate) fn rank1_and_get(self, i: usize) -> (usize, bool) {
        self.ef.count_le_hit((i - 1) as u64)
    }

    /// 1-based position of the `j`-th zero.
    pub(crate) fn select0_at(self, j: usize) -> usize {
        // Ones preceding the j-th zero: those with fewer than j zeros before them.
        let (mut lo, mut hi) = (0usize, self.count_ones());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let zeros_before = self.ef.get(mid) as usize - mid;
            if zeros_before < j {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        j + lo
    }

    /// Cursor over 0-based one positions, skipping the first `skip` ones.
    pub(crate) fn ef_cursor(self, skip: usize) -> EfCursor<'a> {
        self.ef.cursor(skip)
    }
}

/// Bitmap of length `n` with `m` ones, stored as the Elias-Fano code of the
/// one positions. Same 1-based conventions as [`BitVector`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseBitVector {
    ef: EliasFano,
}

impl SparseBitVector {
    /// `positions` are the 1-based set positions in strictly increasing order.
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        if let Some(w) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Build(format!("positions not strictly increasing at index {}", w + 1)));
        }
        if let Some(&p) = positions.iter().find(|&&p| p == 0 || p > len) {
            return Err(Error::Build(format!("position {p} outside 1..={len}")));
        }
        let values: Vec<u64> = positions.iter().map(|&p| (p - 1) as u64).collect();
        Ok(SparseBitVector { ef: EliasFano::new(&values, len as u64)? })
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut len = 0;
        let mut ones = Vec::new();
        for b in bits {
            len += 1;
            if b {
                ones.push(len);
            }
        }
        Self::from_positions(len, &ones).expect("positions from a bit iterator are valid")
    }

    pub(crate) fn from_view(s: Sparse<'_>) -> Self {
        SparseBitVector { ef: EliasFano::from_view(s.ef) }
    }

    #[inline]
    pub(crate) fn view(&self) -> Sparse<'_> {
        Sparse { ef: self.ef.view() }
    }

    pub(crate) fn elias_fano(&self) -> &EliasFano {
        &self.ef
    }

    pub fn len(&self) -> usize {
        self.ef.universe() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ef.len()
    }

    pub fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        if i == 0 || i > self.len() {
            return Err(Error::out_of_bounds(i, 1, self.len() as u64));
        }
        Ok(self.view().rank1_and_get(i).1)
    }

    pub fn select1(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.count_ones() {
            return Err(Error::not_found(j, self.count_ones()));
        }
        Ok(self.ef.get(j - 1) as usize + 1)
    }

    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i > self.len() {
            return Err(Error::out_of_bounds(i, 0, self.len() as u64));
        }
        Ok(self.rank1_at(i))
    }

    pub fn rank0(&self, i: usize) -> Result<usize> {
        Ok(i - self.rank1(i)?)
    }

    /// Position of the `j`-th zero, by binary search over the ones.
    pub fn select0(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.count_zeros() {
            return Err(Error::not_found(j, self.count_zeros()));
        }
        Ok(self.select0_at(j))
    }

    #[inline]
    pub(crate) fn rank1_at(&self, i: usize) -> usize {
        self.view().rank1_at(i)
    }

    /// 1-based position of the `j`-th zero.
    pub(crate) fn select0_at(&self, j: usize) -> usize {
        self.view().select0_at(j)
    }

    /// 1-based positions of the ones, starting at the `j`-th.
    pub fn ones_from(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.ef.cursor(j.saturating_sub(1)).map(|v| v as usize + 1)
    }

    pub fn payload_bits(&self) -> usize {
        self.ef.payload_bits()
    }

    pub fn size_in_bytes(&self) -> usize {
        self.ef.size_in_bytes()
    }
}

impl Wire for SparseBitVector {
    fn write_to(&self, out: &mut Vec<u8>) {
        self.ef.write_to(out)
    }

    fn read_from(reader: &mut Reader<'_>) -> Result<Self> {
        let ef = EliasFano::read_from(reader)?;
        if ef.iter().zip(ef.iter().skip(1)).any(|(a, b)| a >= b) {
            return Err(Error::Format("sparse bitmap: repeated position".into()));
        }
        Ok(SparseBitVector { ef })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn select_and_rank_examples() {
        let sv = SparseBitVector::from_positions(32, &[3, 7, 20]).unwrap();
        assert_eq!(sv.select1(2).unwrap(), 7);
        assert_eq!(sv.rank1(7).unwrap(), 2);
        assert_eq!(sv.rank1(0).unwrap(), 0);
        assert_eq!(sv.rank1(6).unwrap(), 1);
        assert_eq!(sv.rank1(32).unwrap(), 3);
        assert!(matches!(sv.select1(4), Err(Error::NotFound { .. })));
        assert!(matches!(sv.rank1(33), Err(Error::OutOfBounds { .. })));

        let one = SparseBitVector::from_positions(1, &[1]).unwrap();
        assert_eq!(one.select1(1).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_positions() {
        assert!(SparseBitVector::from_positions(10, &[3, 3]).is_err());
        assert!(SparseBitVector::from_positions(10, &[0]).is_err());
        assert!(SparseBitVector::from_positions(10, &[11]).is_err());
        assert!(EliasFano::new(&[3, 2], 10).is_err());
        assert!(EliasFano::new(&[10], 10).is_err());
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<usize> {
        (1..=n).filter(|_| rng.gen_bool(density)).collect()
    }

    #[test]
    fn random_sets_match_sorted_array() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for density in [0.001, 0.01, 0.1, 0.5, 0.95] {
            let n = 20_000;
            let set = random_set(&mut rng, n, density);
            let sv = SparseBitVector::from_positions(n, &set).unwrap();
            for (j, &p) in set.iter().enumerate() {
                assert_eq!(sv.select1(j + 1).unwrap(), p);
            }
            for i in (0..=n).step_by(7) {
                let expect = set.partition_point(|&p| p <= i);
                assert_eq!(sv.rank1(i).unwrap(), expect, "rank1({i}) density {density}");
            }
            let zeros: Vec<usize> = (1..=n).filter(|p| set.binary_search(p).is_err()).collect();
            for (j, &p) in zeros.iter().enumerate().step_by(13) {
                assert_eq!(sv.select0(j + 1).unwrap(), p);
            }
            assert_eq!(sv.ones_from(1).collect::<Vec<_>>(), set);
        }
    }

    #[test]
    fn space_within_loose_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for density in [0.01, 0.1, 0.5] {
            let n = 200_000;
            let set = random_set(&mut rng, n, density);
            let m = set.len();
            let sv = SparseBitVector::from_positions(n, &set).unwrap();
            let log_ratio = (n as f64 / m as f64).log2().ceil() as usize;
            let bound = 4 * m + m * log_ratio;
            let measured = sv.size_in_bytes() * 8;
            assert!(measured <= bound, "density {density}: {measured} > {bound}");
            assert!(sv.payload_bits() <= m * log_ratio + 2 * m + 1);
        }
    }

    #[test]
    fn duplicates_allowed_in_raw_sequence() {
        let values = [0, 0, 3, 3, 3, 9];
        let ef = EliasFano::new(&values, 10).unwrap();
        assert_eq!(ef.iter().collect::<Vec<_>>(), values);
        assert_eq!(ef.count_le(0), 2);
        assert_eq!(ef.count_le(2), 2);
        assert_eq!(ef.count_le(3), 5);
        assert_eq!(ef.count_le(100), 6);
    }

    proptest! {
        #[test]
        fn ef_matches_sorted_vec(mut values in proptest::collection::vec(0u64..5000, 0..400), extra in 1u64..1000) {
            values.sort_unstable();
            let universe = values.last().map_or(extra, |v| v + extra);
            let ef = EliasFano::new(&values, universe).unwrap();
            for (i, &v) in values.iter().enumerate() {
                prop_assert_eq!(ef.get(i), v);
                let from_i: Vec<u64> = ef.cursor(i).collect();
                prop_assert_eq!(&from_i[..], &values[i..]);
            }
            for x in (0..universe + 3).step_by(17) {
                prop_assert_eq!(ef.count_le(x), values.partition_point(|&v| v <= x));
            }
            let bytes = ef.to_bytes();
            let back = EliasFano::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
        }

        #[test]
        fn sparse_rank_select_identities(bits in proptest::collection::vec(any::<bool>(), 0..1500)) {
            let sv = SparseBitVector::from_bits(bits.iter().copied());
            let n = bits.len();
            for i in 0..=n {
                let r = sv.rank1(i).unwrap();
                prop_assert_eq!(r + sv.rank0(i).unwrap(), i);
                if r >= 1 {
                    prop_assert!(sv.select1(r).unwrap() <= i);
                }
            }
            for j in 1..=sv.count_ones() {
                prop_assert_eq!(sv.rank1(sv.select1(j).unwrap()).unwrap(), j);
            }
            for j in 1..=sv.count_zeros() {
                prop_assert_eq!(sv.rank0(sv.select0(j).unwrap()).unwrap(), j);
            }
        }
    }
}
