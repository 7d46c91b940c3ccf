// SPDX-License-Identifier: Apache-2.0

//! Plain bit vector with a two-level rank directory and sampled select.
//!
//! Positions and ordinals in the public API are 1-based: `rank1(i)` counts the
//! ones among bits `1..=i` (so `rank1(0) == 0`) and `select1(j)` returns the
//! position of the `j`-th one. The `*_at` helpers used inside the crate are
//! 0-based.
//!
//! Layout: two directory words per 512-bit block, the ones before the block
//! and the in-block counts at its seven inner word boundaries packed as
//! 9-bit fields. Rank reads both and popcounts one word. Select keeps the
//! block of every 512th occurrence, searches block counts from there and
//! picks the word by comparing against all packed fields at once.
//!
//! A vector of at most one block keeps no directory; its queries popcount
//! the words directly.
//!
//! Bits, directory and samples share one buffer whose section lengths follow
//! from the length and the number of ones, so a [`Bits`] view over any slice
//! with that layout answers the same queries.

use std::fmt;

use super::wire::{self, Reader, Wire};
use crate::error::{Error, Result};

const BLOCK_WORDS: usize = 8;
const BLOCK_BITS: usize = BLOCK_WORDS * 64;
const SELECT_SAMPLE: usize = 512;
const FIELD_BITS: usize = 9;
const FIELD_MASK: u64 = (1 << FIELD_BITS) - 1;
/// Block ranges at most this long are searched linearly; vectors with at
/// most this many blocks keep no select samples.
const LINEAR_BLOCKS: usize = 8;

/// Length and population of a bit vector; enough to locate every section of
/// its buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct BitsShape {
    pub(crate) len: usize,
    pub(crate) ones: usize,
}

impl BitsShape {
    #[inline]
    fn nwords(self) -> usize {
        self.len.div_ceil(64)
    }

    #[inline]
    fn blocks(self) -> usize {
        self.nwords().div_ceil(BLOCK_WORDS)
    }

    #[inline]
    fn samples(self, count: usize) -> usize {
        if self.blocks() <= LINEAR_BLOCKS {
            0
        } else {
            count.div_ceil(SELECT_SAMPLE)
        }
    }

    #[inline]
    fn small(self) -> bool {
        self.nwords() <= BLOCK_WORDS
    }

    /// Buffer words: bits, directory, then both sample arrays.
    pub(crate) fn words(self) -> usize {
        if self.small() {
            return self.nwords();
        }
        self.nwords()
            + 2 * self.blocks()
            + self.samples(self.ones).div_ceil(2)
            + self.samples(self.len - self.ones).div_ceil(2)
    }

    #[inline]
    pub(crate) fn view(self, buf: &[u64]) -> Bits<'_> {
        debug_assert_eq!(buf.len(), self.words());
        Bits { shape: self, buf }
    }
}

/// Directory and samples for `words` holding `len` bits, appended to `words`.
fn encode(mut words: Vec<u64>, len: usize) -> (BitsShape, Vec<u64>) {
    words.resize(len.div_ceil(64), 0);
    if !len.is_multiple_of(64) {
        *words.last_mut().unwrap() &= (1u64 << (len % 64)) - 1;
    }
    let nblocks = words.len().div_ceil(BLOCK_WORDS);
    let mut dir = Vec::with_capacity(2 * nblocks);
    let mut select1 = Vec::new();
    let mut select0 = Vec::new();
    let mut ones = 0usize;
    for (b, chunk) in words.chunks(BLOCK_WORDS).enumerate() {
        let zeros_before = b * BLOCK_BITS - ones;
        let mut packed = 0u64;
        let mut here = 0usize;
        for w in 0..BLOCK_WORDS {
            if w > 0 {
                // Past the end of a short last block the field repeats the
                // block total, so select never lands there.
                packed |= (here as u64) << (FIELD_BITS * (w - 1));
            }
            here += chunk.get(w).map_or(0, |x| x.count_ones() as usize);
        }
        dir.push(ones as u64);
        dir.push(packed);
        let span = (len - b * BLOCK_BITS).min(BLOCK_BITS);
        // Record the block of every occurrence numbered t*SAMPLE+1.
        while select1.len() * SELECT_SAMPLE < ones + here {
            select1.push(b as u32);
        }
        while select0.len() * SELECT_SAMPLE < zeros_before + (span - here) {
            select0.push(b as u32);
        }
        ones += here;
    }
    let shape = BitsShape { len, ones };
    let mut buf = words;
    if shape.small() {
        return (shape, buf);
    }
    buf.extend_from_slice(&dir);
    if nblocks > LINEAR_BLOCKS {
        for samples in [select1, select0] {
            buf.extend(samples.chunks(2).map(|c| c[0] as u64 | (c.get(1).copied().unwrap_or(0) as u64) << 32));
        }
    }
    debug_assert_eq!(buf.len(), shape.words());
    (shape, buf)
}

/// Borrowed bit vector over a buffer laid out like [`BitVector`]'s.
#[derive(Clone, Copy)]
pub(crate) struct Bits<'a> {
    shape: BitsShape,
    buf: &'a [u64],
}

impl<'a> Bits<'a> {
    #[inline]
    pub(crate) fn len(self) -> usize {
        self.shape.len
    }

    #[inline]
    pub(crate) fn count_ones(self) -> usize {
        self.shape.ones
    }

    #[inline]
    pub(crate) fn count_zeros(self) -> usize {
        self.shape.len - self.shape.ones
    }

    #[inline]
    pub(crate) fn words(self) -> &'a [u64] {
        &self.buf[..self.shape.nwords()]
    }

    pub(crate) fn buffer(self) -> &'a [u64] {
        self.buf
    }

    /// Bit at 0-based position `i`.
    #[inline]
    pub(crate) fn bit(self, i: usize) -> bool {
        (self.buf[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Ones in the first `w` words of a block with packed counts `packed`.
    #[inline]
    fn in_block(packed: u64, w: usize) -> usize {
        let shift = (FIELD_BITS * w).wrapping_sub(FIELD_BITS) & 63;
        ((packed >> shift & FIELD_MASK) as usize) & ((w != 0) as usize).wrapping_neg()
    }

    /// Word of a block holding its `r`-th (0-based) one, given packed counts.
    #[inline]
    fn word_of_one(packed: u64, r: usize) -> usize {
        (0..BLOCK_WORDS - 1).map(|k| ((packed >> (FIELD_BITS * k) & FIELD_MASK) as usize <= r) as usize).sum()
    }

    /// Same for zeros.
    #[inline]
    fn word_of_zero(packed: u64, r: usize) -> usize {
        (0..BLOCK_WORDS - 1)
            .map(|k| (64 * (k + 1) - (packed >> (FIELD_BITS * k) & FIELD_MASK) as usize <= r) as usize)
            .sum()
    }

    /// Ones among the first `i` bits, `0 <= i <= len`.
    #[inline]
    pub(crate) fn rank1_at(self, i: usize) -> usize {
        debug_assert!(i <= self.shape.len);
        let w = i / 64;
        let rem = i % 64;
        let b = w / BLOCK_WORDS;
        let nw = self.shape.nwords();
        if w >= nw {
            return self.shape.ones;
        }
        let partial = (self.buf[w] & ((1u64 << rem) - 1)).count_ones() as usize;
        if self.shape.small() {
            return self.buf[..w].iter().map(|x| x.count_ones() as usize).sum::<usize>() + partial;
        }
        let dir = &self.buf[nw + 2 * b..nw + 2 * b + 2];
        let r = dir[0] as usize + Self::in_block(dir[1], w % BLOCK_WORDS);
        r + partial
    }

    /// Position of the `r`-th (0-based) set bit of `words`, flipped first
    /// when `flip` is all ones.
    #[inline]
    fn scan_select(words: &[u64], flip: u64, mut r: usize) -> usize {
        for (w, &x) in words.iter().enumerate() {
            let c = (x ^ flip).count_ones() as usize;
            if r < c {
                return w * 64 + select_in_word(x ^ flip, r);
            }
            r -= c;
        }
        unreachable!("occurrence beyond the vector")
    }

    /// Largest block `b` in `[lo, hi)` with `before(b) < j`.
    #[inline]
    fn find_block(lo: usize, hi: usize, j: usize, before: impl Fn(usize) -> usize) -> usize {
        let (mut a, mut z) = (lo, hi);
        while z - a > LINEAR_BLOCKS {
            let mid = (a + z) / 2;
            if before(mid) < j {
                a = mid;
            } else {
                z = mid;
            }
        }
        // Blocks after `a` whose count is still below `j`.
        a + (a + 1..z).map(|b| (before(b) < j) as usize).sum::<usize>()
    }

    /// Candidate blocks for occurrence `j` from the select samples.
    #[inline]
    fn sample_range(self, zero: bool, j: usize) -> (usize, usize) {
        let blocks = self.shape.blocks();
        if blocks <= LINEAR_BLOCKS {
            return (0, blocks);
        }
        let mut at = self.shape.nwords() + 2 * blocks;
        let mut count = self.shape.ones.div_ceil(SELECT_SAMPLE);
        if zero {
            at += count.div_ceil(2);
            count = self.count_zeros().div_ceil(SELECT_SAMPLE);
        }
        let sample = |t: usize| (self.buf[at + t / 2] >> (32 * (t % 2))) as u32 as usize;
        let t = (j - 1) / SELECT_SAMPLE;
        let hi = if t + 1 < count { sample(t + 1) + 1 } else { blocks };
        (sample(t), hi)
    }

    /// 0-based position of the `j`-th one, `1 <= j <= ones`.
    #[inline]
    pub(crate) fn select1_at(self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.shape.ones);
        if self.shape.small() {
            return Self::scan_select(self.words(), 0, j - 1);
        }
        let (lo, hi) = self.sample_range(false, j);
        let dir = &self.buf[self.shape.nwords()..];
        let b = Self::find_block(lo, hi, j, |b| dir[2 * b] as usize);
        let r = j - 1 - dir[2 * b] as usize;
        let packed = dir[2 * b + 1];
        let w = Self::word_of_one(packed, r);
        let word = b * BLOCK_WORDS + w;
        word * 64 + select_in_word(self.buf[word], r - Self::in_block(packed, w))
    }

    /// 0-based position of the `j`-th zero, `1 <= j <= zeros`.
    #[inline]
    pub(crate) fn select0_at(self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.count_zeros());
        if self.shape.small() {
            // Padding past `len` is zero, but the `j`-th zero comes first.
            return Self::scan_select(self.words(), u64::MAX, j - 1);
        }
        let (lo, hi) = self.sample_range(true, j);
        let dir = &self.buf[self.shape.nwords()..];
        let b = Self::find_block(lo, hi, j, |b| b * BLOCK_BITS - dir[2 * b] as usize);
        let r = j - 1 - (b * BLOCK_BITS - dir[2 * b] as usize);
        let packed = dir[2 * b + 1];
        let w = Self::word_of_zero(packed, r);
        let word = b * BLOCK_WORDS + w;
        word * 64 + select_in_word(!self.buf[word], r - (64 * w - Self::in_block(packed, w)))
    }

    /// Cursor over 1-based positions of successive `bit`s, starting at the
    /// `j`-th occurrence. Yields nothing when `j` is 0 or exceeds the count.
    pub(crate) fn cursor(self, bit: bool, j: usize) -> BitCursor<'a> {
        let flip = if bit { 0 } else { u64::MAX };
        let count = if bit { self.count_ones() } else { self.count_zeros() };
        let words = self.words();
        if j == 0 || j > count {
            return BitCursor { words, len: self.len(), flip, word: words.len(), current: 0 };
        }
        let pos = if bit { self.select1_at(j) } else { self.select0_at(j) };
        let word = pos / 64;
        let current = (words[word] ^ flip) & (u64::MAX << (pos % 64));
        BitCursor { words, len: self.len(), flip, word, current }
    }
}

#[derive(Clone)]
pub struct BitVector {
    shape: BitsShape,
    buf: Box<[u64]>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self::from_words(vec![0; len.div_ceil(64)], len)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for bit in bits {
            if len.is_multiple_of(64) {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1 << (len % 64);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    /// Builds from 0-based positions of set bits. Out-of-range positions panic.
    pub(crate) fn from_set_positions<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for p in ones {
            assert!(p < len, "bit {p} out of range for length {len}");
            words[p / 64] |= 1 << (p % 64);
        }
        Self::from_words(words, len)
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        let (shape, buf) = encode(words, len);
        BitVector { shape, buf: buf.into_boxed_slice() }
    }

    /// Rebuilds from a view's buffer.
    pub(crate) fn from_view(bits: Bits<'_>) -> Self {
        BitVector { shape: bits.shape, buf: bits.buf.into() }
    }

    #[inline]
    pub(crate) fn view(&self) -> Bits<'_> {
        Bits { shape: self.shape, buf: &self.buf }
    }

    pub(crate) fn shape(&self) -> BitsShape {
        self.shape
    }

    /// The whole buffer: bits, directory and samples.
    pub(crate) fn buffer(&self) -> &[u64] {
        &self.buf
    }

    pub fn len(&self) -> usize {
        self.shape.len
    }

    pub fn is_empty(&self) -> bool {
        self.shape.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.shape.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.shape.len - self.shape.ones
    }

    pub fn count(&self, bit: bool) -> usize {
        if bit {
            self.count_ones()
        } else {
            self.count_zeros()
        }
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> Result<bool> {
        if i == 0 || i > self.len() {
            return Err(Error::out_of_bounds(i, 1, self.len() as u64));
        }
        Ok(self.bit(i - 1))
    }

    pub fn rank(&self, bit: bool, i: usize) -> Result<usize> {
        if i > self.len() {
            return Err(Error::out_of_bounds(i, 0, self.len() as u64));
        }
        let ones = self.rank1_at(i);
        Ok(if bit { ones } else { i - ones })
    }

    pub fn rank1(&self, i: usize) -> Result<usize> {
        self.rank(true, i)
    }

    pub fn rank0(&self, i: usize) -> Result<usize> {
        self.rank(false, i)
    }

    pub fn select(&self, bit: bool, j: usize) -> Result<usize> {
        let count = self.count(bit);
        if j == 0 || j > count {
            return Err(Error::not_found(j, count));
        }
        Ok(if bit { self.select1_at(j) } else { self.select0_at(j) } + 1)
    }

    pub fn select1(&self, j: usize) -> Result<usize> {
        self.select(true, j)
    }

    pub fn select0(&self, j: usize) -> Result<usize> {
        self.select(false, j)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.bit(i))
    }

    /// Cursor over 1-based positions of successive `bit`s, starting at the
    /// `j`-th occurrence (`j >= 1`). Yields nothing when `j` exceeds the count.
    pub fn cursor(&self, bit: bool, j: usize) -> BitCursor<'_> {
        self.view().cursor(bit, j)
    }

    /// Heap footprint in bytes, directory included.
    pub fn size_in_bytes(&self) -> usize {
        2 * std::mem::size_of::<u64>() + self.buf.len() * 8
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        self.view().bit(i)
    }

    #[inline]
    pub(crate) fn rank1_at(&self, i: usize) -> usize {
        self.view().rank1_at(i)
    }

    #[inline]
    pub(crate) fn select1_at(&self, j: usize) -> usize {
        self.view().select1_at(j)
    }

    #[inline]
    pub(crate) fn select0_at(&self, j: usize) -> usize {
        self.view().select0_at(j)
    }

    pub(crate) fn words(&self) -> &[u64] {
        self.view().words()
    }
}

/// Position of the `k`-th one inside a byte, indexed by `byte | k << 8`.
#[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
static SELECT_IN_BYTE: [u8; 2048] = {
    let mut t = [0u8; 2048];
    let mut byte = 0;
    while byte < 256 {
        let mut k = 0;
        let mut pos = 0;
        while pos < 8 {
            if (byte >> pos) & 1 == 1 {
                t[byte | (k << 8)] = pos as u8;
                k += 1;
            }
            pos += 1;
        }
        byte += 1;
    }
    t
};

/// Position of the `r`-th (0-based) set bit of `word`, `r < popcount(word)`.
#[inline]
pub(crate) fn select_in_word(word: u64, r: usize) -> usize {
    debug_assert!(r < word.count_ones() as usize);
    #[cfg(all(target_arch = "x86_64", target_feature = "bmi2"))]
    {
        // SAFETY: the instruction set extension is enabled at compile time.
        unsafe { std::arch::x86_64::_pdep_u64(1u64 << r, word).trailing_zeros() as usize }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
    {
        const L8: u64 = 0x0101_0101_0101_0101;
        const H8: u64 = 0x8080_8080_8080_8080;
        let mut s = word - ((word >> 1) & 0x5555_5555_5555_5555);
        s = (s & 0x3333_3333_3333_3333) + ((s >> 2) & 0x3333_3333_3333_3333);
        s = (s + (s >> 4)) & 0x0f0f_0f0f_0f0f_0f0f;
        // Byte i of `sums` counts the ones in bytes 0..=i.
        let sums = s.wrapping_mul(L8);
        let below = ((((r as u64).wrapping_mul(L8) | H8) - sums) & H8) >> 7;
        let place = (below.wrapping_mul(L8) >> 53) & !7;
        let before = ((sums << 8) >> place) & 0xff;
        let byte = (word >> place) & 0xff;
        place as usize + SELECT_IN_BYTE[(byte | ((r as u64 - before) << 8)) as usize] as usize
    }
}

/// Sequential scan over occurrences of one bit value.
#[derive(Clone, Debug)]
pub struct BitCursor<'a> {
    words: &'a [u64],
    len: usize,
    flip: u64,
    word: usize,
    current: u64,
}

impl Iterator for BitCursor<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word] ^ self.flip;
        }
        let pos = self.word * 64 + self.current.trailing_zeros() as usize;
        if pos >= self.len {
            self.current = 0;
            self.word = self.words.len();
            return None;
        }
        self.current &= self.current - 1;
        Some(pos + 1)
    }
}

impl PartialEq for BitVector {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.words() == other.words()
    }
}

impl Eq for BitVector {}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 128 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitVector({s})")
        } else {
            write!(f, "BitVector {{ len: {}, ones: {} }}", self.len(), self.count_ones())
        }
    }
}

impl Wire for BitVector {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u8(out, wire::VERSION);
        wire::put_u64(out, self.len() as u64);
        wire::put_u64(out, self.count_ones() as u64);
        wire::put_words(out, self.words());
    }

    fn read_from(reader: &mut Reader<'_>) -> Result<Self> {
        reader.version("bit vector")?;
        let len = reader.usize()?;
        let ones = reader.usize()?;
        let words = reader.words()?;
        if words.len() != len.div_ceil(64) {
            return Err(Error::Format(format!("bit vector: {} words for {len} bits", words.len())));
        }
        if len % 64 != 0 && words.last().is_some_and(|w| w >> (len % 64) != 0) {
            return Err(Error::Format("bit vector: padding bits set".into()));
        }
        let bv = BitVector::from_words(words, len);
        if bv.count_ones() != ones {
            return Err(Error::Format(format!("bit vector: header says {ones} ones, found {}", bv.count_ones())));
        }
        Ok(bv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parse(s: &str) -> BitVector {
        BitVector::from_bits(s.chars().map(|c| c == '1'))
    }

    #[test]
    fn small_examples() {
        let b = parse("1011");
        assert_eq!(b.rank1(3).unwrap(), 2);
        assert_eq!(b.rank1(0).unwrap(), 0);
        assert_eq!(b.select1(2).unwrap(), 3);
        assert_eq!(b.select0(1).unwrap(), 2);
        assert!(b.get(1).unwrap());
        assert!(!b.get(2).unwrap());
    }

    #[test]
    fn error_paths() {
        let b = parse("1011");
        assert!(matches!(b.rank1(5), Err(Error::OutOfBounds { .. })));
        assert!(matches!(b.select1(4), Err(Error::NotFound { .. })));
        assert!(matches!(b.select0(0), Err(Error::NotFound { .. })));
        assert!(matches!(b.select0(2), Err(Error::NotFound { .. })));
        assert!(b.get(0).is_err());
        let empty = BitVector::zeros(0);
        assert_eq!(empty.rank1(0).unwrap(), 0);
        assert!(empty.select0(1).is_err());
    }

    fn check_against_scan(bits: &[bool]) {
        let bv = BitVector::from_bits(bits.iter().copied());
        let mut ones = 0;
        let mut one_pos = Vec::new();
        let mut zero_pos = Vec::new();
        assert_eq!(bv.rank1(0).unwrap(), 0);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                ones += 1;
                one_pos.push(i + 1);
            } else {
                zero_pos.push(i + 1);
            }
            assert_eq!(bv.rank1(i + 1).unwrap(), ones, "rank1({})", i + 1);
            assert_eq!(bv.rank0(i + 1).unwrap(), i + 1 - ones);
        }
        for (j, &p) in one_pos.iter().enumerate() {
            assert_eq!(bv.select1(j + 1).unwrap(), p);
        }
        for (j, &p) in zero_pos.iter().enumerate() {
            assert_eq!(bv.select0(j + 1).unwrap(), p);
        }
        assert_eq!(bv.cursor(true, 1).collect::<Vec<_>>(), one_pos);
        assert_eq!(bv.cursor(false, 1).collect::<Vec<_>>(), zero_pos);
        if zero_pos.len() > 3 {
            assert_eq!(bv.cursor(false, 3).collect::<Vec<_>>(), zero_pos[2..]);
        }
    }

    #[test]
    fn random_10k_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for density in [0.01, 0.1, 0.5, 0.9, 0.99] {
            let bits: Vec<bool> = (0..10_000).map(|_| rng.gen_bool(density)).collect();
            check_against_scan(&bits);
        }
    }

    #[test]
    fn boundary_lengths() {
        for len in [1, 63, 64, 65, 511, 512, 513, 1024, 4097] {
            check_against_scan(&vec![true; len]);
            check_against_scan(&vec![false; len]);
            let alt: Vec<bool> = (0..len).map(|i| i % 3 == 0).collect();
            check_against_scan(&alt);
        }
    }

    #[test]
    fn select_in_word_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut words = vec![0xF0F0_0001_8000_0101u64, u64::MAX, 1, 1 << 63];
        words.extend((0..2000).map(|_| rng.gen::<u64>() & rng.gen::<u64>()));
        for w in words {
            let naive: Vec<usize> = (0..64).filter(|i| (w >> i) & 1 == 1).collect();
            for (r, &p) in naive.iter().enumerate() {
                assert_eq!(select_in_word(w, r), p, "word {w:#x} rank {r}");
            }
        }
    }

    proptest! {
        #[test]
        fn rank_select_identities(bits in proptest::collection::vec(any::<bool>(), 0..3000)) {
            let bv = BitVector::from_bits(bits.iter().copied());
            let n = bits.len();
            for i in 0..=n {
                prop_assert_eq!(bv.rank1(i).unwrap() + bv.rank0(i).unwrap(), i);
                for b in [false, true] {
                    let r = bv.rank(b, i).unwrap();
                    if r >= 1 {
                        prop_assert!(bv.select(b, r).unwrap() <= i);
                    }
                }
            }
            for b in [false, true] {
                for j in 1..=bv.count(b) {
                    prop_assert_eq!(bv.rank(b, bv.select(b, j).unwrap()).unwrap(), j);
                }
            }
        }

        #[test]
        fn wire_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let bv = BitVector::from_bits(bits);
            let bytes = bv.to_bytes();
            let back = BitVector::from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &bv);
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn rejects_corrupt_header() {
        let mut bytes = parse("1011").to_bytes();
        // ones count lives at offset 9
        bytes[9] = 7;
        assert!(BitVector::from_bytes(&bytes).is_err());
        let bytes = parse("1011").to_bytes();
        assert!(BitVector::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
