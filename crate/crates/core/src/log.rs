// SPDX-License-Identifier: Apache-2.0

//! Per-object, per-period movement log.
//!
//! For the period `[k, k+d]` the log covers local instants `1..=d-1`
//! (instants `k` and `k+d` belong to snapshots). It stores:
//!
//! * `first`/`last`, the first and last local instants with data, and a
//!   presence bitmap `T` over `first..=last` where a 1 marks a missing sample;
//! * per axis, a sign bitmap with one bit per data instant (1 = the
//!   difference to the previous data instant is non-negative) and two unary
//!   partial-sum streams holding the non-negative and the negated negative
//!   differences.
//!
//! The chain starts from absolute zero, so the first difference is the
//! absolute coordinate. The coordinate at data ordinal `j` is then
//! `P(pos) - N(j - pos)` where `pos = rank1(sign, j)` and `P`, `N` are the
//! prefix sums of the two streams.
//!
//! All seven parts live in one buffer; the log keeps only their shapes and
//! offsets, so a lookup touches a single allocation.

use crate::error::{Error, Result};
use crate::succinct::wire;
use crate::succinct::{
    BitCursor, BitVector, Bits, BitsShape, DeltaCursor, Deltas, EfCursor, EfShape, Reader, Sparse, SparseBitVector,
    UnaryDeltaStream, Wire,
};

/// Gap density below which `T` is stored as a sparse bitmap.
pub const SPARSE_GAP_DENSITY: f64 = 0.10;

/// Fixed per-log allowance, in bits, for headers and directory words in the
/// space bound checked by [`TrajectoryLog::space_bound_bits`].
pub const SPACE_BOUND_CONSTANT_BITS: f64 = 1024.0;

/// One observation. Instants are global unless stated otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sample {
    pub instant: u32,
    pub x: u32,
    pub y: u32,
}

impl Sample {
    pub fn new(instant: u32, x: u32, y: u32) -> Self {
        Sample { instant, x, y }
    }
}

/// Owned presence bitmap, used while building and (de)serializing.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Presence {
    Plain(BitVector),
    Sparse(SparseBitVector),
}

impl Presence {
    fn build(gaps: &[bool]) -> Self {
        let ones = gaps.iter().filter(|&&g| g).count();
        if (ones as f64) < SPARSE_GAP_DENSITY * gaps.len() as f64 {
            Presence::Sparse(SparseBitVector::from_bits(gaps.iter().copied()))
        } else {
            Presence::Plain(BitVector::from_bits(gaps.iter().copied()))
        }
    }

    fn shape(&self) -> GapShape {
        match self {
            Presence::Plain(b) => GapShape::Plain(b.shape()),
            Presence::Sparse(s) => GapShape::Sparse(s.elias_fano().shape()),
        }
    }

    fn buffer(&self) -> &[u64] {
        match self {
            Presence::Plain(b) => b.buffer(),
            Presence::Sparse(s) => s.elias_fano().buffer(),
        }
    }

    fn view(&self) -> Gaps<'_> {
        match self {
            Presence::Plain(b) => Gaps::Plain(b.view()),
            Presence::Sparse(s) => Gaps::Sparse(s.view()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GapShape {
    Plain(BitsShape),
    Sparse(EfShape),
}

impl GapShape {
    #[inline]
    fn view(self, buf: &[u64]) -> Gaps<'_> {
        match self {
            GapShape::Plain(s) => Gaps::Plain(s.view(buf)),
            GapShape::Sparse(s) => Gaps::Sparse(Sparse::new(s.view(buf))),
        }
    }
}

/// Borrowed presence bitmap; offsets are 1-based.
#[derive(Clone, Copy)]
enum Gaps<'a> {
    Plain(Bits<'a>),
    Sparse(Sparse<'a>),
}

impl<'a> Gaps<'a> {
    fn len(self) -> usize {
        match self {
            Gaps::Plain(b) => b.len(),
            Gaps::Sparse(s) => s.len(),
        }
    }

    #[inline]
    fn count_zeros(self) -> usize {
        match self {
            Gaps::Plain(b) => b.count_zeros(),
            Gaps::Sparse(s) => s.count_zeros(),
        }
    }

    /// Missing instants among offsets `1..=i`.
    #[inline]
    fn rank1(self, i: usize) -> usize {
        match self {
            Gaps::Plain(b) => b.rank1_at(i),
            Gaps::Sparse(s) => s.rank1_at(i),
        }
    }

    /// `rank1(i)` and whether offset `i` (1-based) is missing.
    #[inline]
    fn rank1_and_missing(self, i: usize) -> (usize, bool) {
        match self {
            Gaps::Plain(b) => (b.rank1_at(i), b.bit(i - 1)),
            Gaps::Sparse(s) => s.rank1_and_get(i),
        }
    }

    /// Whether offset `i` (1-based) is missing.
    fn missing(self, i: usize) -> bool {
        self.rank1_and_missing(i).1
    }

    /// 1-based offset of the `j`-th data instant.
    #[inline]
    fn select0(self, j: usize) -> usize {
        match self {
            Gaps::Plain(b) => b.select0_at(j) + 1,
            Gaps::Sparse(s) => s.select0_at(j),
        }
    }

    fn data_offsets(self, j: usize) -> DataOffsets<'a> {
        match self {
            Gaps::Plain(b) => DataOffsets::Plain(b.cursor(false, j)),
            Gaps::Sparse(s) => {
                let start = if j >= 1 && j <= s.count_zeros() { s.select0_at(j) } else { s.len() + 1 };
                let ones_before = s.rank1_at(start.min(s.len()));
                DataOffsets::Sparse { next: start, len: s.len(), ones: s.ef_cursor(ones_before), upcoming: None }
            }
        }
    }

    fn to_owned(self) -> Presence {
        match self {
            Gaps::Plain(b) => Presence::Plain(BitVector::from_view(b)),
            Gaps::Sparse(s) => Presence::Sparse(SparseBitVector::from_view(s)),
        }
    }
}

/// Successive offsets of data instants in `T`.
enum DataOffsets<'a> {
    Plain(BitCursor<'a>),
    Sparse { next: usize, len: usize, ones: EfCursor<'a>, upcoming: Option<usize> },
}

impl Iterator for DataOffsets<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        match self {
            DataOffsets::Plain(c) => c.next(),
            DataOffsets::Sparse { next, len, ones, upcoming } => loop {
                if *next > *len {
                    return None;
                }
                let one = match *upcoming {
                    Some(p) if p >= *next => Some(p),
                    _ => {
                        *upcoming = ones.next().map(|v| v as usize + 1);
                        *upcoming
                    }
                };
                let here = *next;
                *next += 1;
                if one != Some(here) {
                    return Some(here);
                }
            },
        }
    }
}

/// Timestamps with data: `first`, `last` and the gap bitmap between them.
#[derive(Clone, Copy)]
pub struct TimeIndex<'a> {
    first: u32,
    last: u32,
    gaps: Gaps<'a>,
}

impl TimeIndex<'_> {
    pub fn first(&self) -> u32 {
        self.first
    }

    pub fn last(&self) -> u32 {
        self.last
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.gaps, Gaps::Sparse(_))
    }

    /// Gap bitmap as plain bits, 1 = no data.
    pub fn gap_bits(&self) -> Vec<bool> {
        (1..=self.gaps.len()).map(|i| self.gaps.missing(i)).collect()
    }
}

/// Signed differences of one coordinate, as separate owned parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisDeltas {
    sign: BitVector,
    pos: UnaryDeltaStream,
    neg: UnaryDeltaStream,
}

/// Intermediate values of one coordinate reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisExtraction {
    /// Non-negative differences up to the ordinal.
    pub pos: usize,
    /// Negative differences up to the ordinal.
    pub neg: usize,
    /// `select1` on the positive stream's unary bitmap (0 when `pos == 0`).
    pub pos_select: u64,
    /// `select1` on the negative stream's unary bitmap (0 when `neg == 0`).
    pub neg_select: u64,
    pub value: i64,
}

impl AxisDeltas {
    fn from_coords(coords: &[u32]) -> Self {
        let mut prev = 0i64;
        let mut sign = Vec::with_capacity(coords.len());
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &c in coords {
            let d = c as i64 - prev;
            prev = c as i64;
            if d >= 0 {
                sign.push(true);
                pos.push(d as u64);
            } else {
                sign.push(false);
                neg.push((-d) as u64);
            }
        }
        AxisDeltas {
            sign: BitVector::from_bits(sign),
            pos: UnaryDeltaStream::from_deltas(&pos),
            neg: UnaryDeltaStream::from_deltas(&neg),
        }
    }

    fn shape(&self) -> AxisShape {
        AxisShape { sign: self.sign.shape(), pos: self.pos.shape(), neg: self.neg.shape() }
    }

    pub fn sign(&self) -> &BitVector {
        &self.sign
    }

    pub fn positive(&self) -> &UnaryDeltaStream {
        &self.pos
    }

    pub fn negative(&self) -> &UnaryDeltaStream {
        &self.neg
    }

    /// Sum of absolute differences, including the absolute start.
    pub fn total_movement(&self) -> u64 {
        self.pos.total() + self.neg.total()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AxisShape {
    sign: BitsShape,
    pos: EfShape,
    neg: EfShape,
}

/// Borrowed axis parts.
#[derive(Clone, Copy)]
struct Axis<'a> {
    sign: Bits<'a>,
    pos: Deltas<'a>,
    neg: Deltas<'a>,
}

impl<'a> Axis<'a> {
    #[inline]
    fn value_at(self, ordinal: usize) -> i64 {
        let pos = self.sign.rank1_at(ordinal);
        let neg = ordinal - pos;
        self.pos.prefix_sum_or_zero(pos) as i64 - self.neg.prefix_sum_or_zero(neg) as i64
    }

    fn explain(self, ordinal: usize) -> AxisExtraction {
        let pos = self.sign.rank1_at(ordinal);
        let neg = ordinal - pos;
        let pos_select = if pos == 0 { 0 } else { self.pos.prefix_sum_or_zero(pos) + pos as u64 };
        let neg_select = if neg == 0 { 0 } else { self.neg.prefix_sum_or_zero(neg) + neg as u64 };
        let value = (pos_select as i64 - pos as i64) - (neg_select as i64 - neg as i64);
        AxisExtraction { pos, neg, pos_select, neg_select, value }
    }

    fn total_movement(self) -> u64 {
        self.pos.total() + self.neg.total()
    }

    fn cursor(self, from: usize) -> AxisCursor<'a> {
        let pos = self.sign.rank1_at(from - 1);
        let neg = from - 1 - pos;
        AxisCursor {
            sign: self.sign,
            pos_sum: self.pos.prefix_sum_or_zero(pos),
            neg_sum: self.neg.prefix_sum_or_zero(neg),
            pos_cursor: self.pos.cursor(pos),
            neg_cursor: self.neg.cursor(neg),
        }
    }

    fn to_owned(self) -> AxisDeltas {
        AxisDeltas {
            sign: BitVector::from_view(self.sign),
            pos: UnaryDeltaStream::from_view(self.pos),
            neg: UnaryDeltaStream::from_view(self.neg),
        }
    }
}

struct AxisCursor<'a> {
    sign: Bits<'a>,
    pos_sum: u64,
    neg_sum: u64,
    pos_cursor: DeltaCursor<'a>,
    neg_cursor: DeltaCursor<'a>,
}

impl AxisCursor<'_> {
    #[inline]
    fn step(&mut self, ordinal: usize) -> i64 {
        if self.sign.bit(ordinal - 1) {
            self.pos_sum = self.pos_cursor.select_next().expect("sign bitmap matches positive stream");
        } else {
            self.neg_sum = self.neg_cursor.select_next().expect("sign bitmap matches negative stream");
        }
        self.pos_sum as i64 - self.neg_sum as i64
    }
}

/// Every intermediate of [`TrajectoryLog::position`] for one instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extraction {
    /// Missing instants from `first` through the queried instant.
    pub dis: usize,
    /// Data ordinal of the queried instant.
    pub ordinal: usize,
    pub x: AxisExtraction,
    pub y: AxisExtraction,
}

/// Stream split of one axis; the sign bitmap has one bit per data instant
/// and `pos_len` ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AxisHeader {
    pos_universe: u64,
    neg_universe: u64,
    pos_len: u32,
    pos_width: u8,
    neg_width: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryLog {
    object: u32,
    start: u32,
    period: u32,
    first: u32,
    last: u32,
    /// Data instants.
    count: u32,
    /// Low width of the sparse gap bitmap; `None` when it is plain.
    sparse_width: Option<u8>,
    axes: [AxisHeader; 2],
    /// Buffer offsets of sign, positive and negative stream per axis; the
    /// gap bitmap starts at 0.
    at: [[u32; 3]; 2],
    buf: Box<[u64]>,
}

impl TrajectoryLog {
    /// Builds the log of `object` for the period starting at global instant
    /// `start` with snapshot distance `period`. Sample instants are global
    /// and must fall strictly inside the period.
    pub fn build(object: u32, samples: &[Sample], start: u32, period: u32) -> Result<Self> {
        if period < 2 {
            return Err(Error::Build(format!("period {period} leaves no log instants")));
        }
        if samples.is_empty() {
            return Err(Error::Build(format!("object {object}: no samples in period at {start}")));
        }
        let end = start as u64 + period as u64;
        for (i, s) in samples.iter().enumerate() {
            if s.instant as u64 <= start as u64 || s.instant as u64 >= end {
                return Err(Error::Build(format!(
                    "object {object}: instant {} outside log range {}..{end}",
                    s.instant,
                    start as u64 + 1
                )));
            }
            if i > 0 && samples[i - 1].instant >= s.instant {
                return Err(Error::Build(format!(
                    "object {object}: instants not strictly increasing at {}",
                    s.instant
                )));
            }
        }
        let first = samples[0].instant - start;
        let last = samples[samples.len() - 1].instant - start;
        let mut gaps = vec![true; (last - first + 1) as usize];
        for s in samples {
            gaps[(s.instant - start - first) as usize] = false;
        }
        let xs: Vec<u32> = samples.iter().map(|s| s.x).collect();
        let ys: Vec<u32> = samples.iter().map(|s| s.y).collect();
        let axes = [AxisDeltas::from_coords(&xs), AxisDeltas::from_coords(&ys)];
        Ok(Self::assemble(object, start, period, first, last, &Presence::build(&gaps), &axes))
    }

    fn assemble(
        object: u32,
        start: u32,
        period: u32,
        first: u32,
        last: u32,
        gaps: &Presence,
        axes: &[AxisDeltas; 2],
    ) -> Self {
        let mut buf = gaps.buffer().to_vec();
        let mut at = [[0u32; 3]; 2];
        for (k, axis) in axes.iter().enumerate() {
            for (slot, part) in [axis.sign.buffer(), axis.pos.buffer(), axis.neg.buffer()].into_iter().enumerate() {
                at[k][slot] = u32::try_from(buf.len()).expect("log buffer exceeds 2^32 words");
                buf.extend_from_slice(part);
            }
        }
        let header = |a: &AxisDeltas| {
            let s = a.shape();
            AxisHeader {
                pos_universe: s.pos.universe(),
                neg_universe: s.neg.universe(),
                pos_len: s.sign.ones as u32,
                pos_width: s.pos.low_width() as u8,
                neg_width: s.neg.low_width() as u8,
            }
        };
        let sparse_width = match gaps.shape() {
            GapShape::Plain(_) => None,
            GapShape::Sparse(s) => Some(s.low_width() as u8),
        };
        let log = TrajectoryLog {
            object,
            start,
            period,
            first,
            last,
            count: axes[0].sign.len() as u32,
            sparse_width,
            axes: [header(&axes[0]), header(&axes[1])],
            at,
            buf: buf.into_boxed_slice(),
        };
        debug_assert_eq!(log.gap_shape(), gaps.shape());
        debug_assert!(log.axis_shape(0) == axes[0].shape() && log.axis_shape(1) == axes[1].shape());
        log
    }

    #[inline]
    fn gap_shape(&self) -> GapShape {
        let len = (self.last - self.first + 1) as usize;
        let ones = len - self.count as usize;
        match self.sparse_width {
            None => GapShape::Plain(BitsShape { len, ones }),
            Some(w) => GapShape::Sparse(EfShape::with_width(len as u64, ones, w as u32)),
        }
    }

    #[inline]
    fn axis_shape(&self, k: usize) -> AxisShape {
        let h = self.axes[k];
        let (n, pos) = (self.count as usize, h.pos_len as usize);
        AxisShape {
            sign: BitsShape { len: n, ones: pos },
            pos: EfShape::with_width(h.pos_universe, pos, h.pos_width as u32),
            neg: EfShape::with_width(h.neg_universe, n - pos, h.neg_width as u32),
        }
    }

    #[inline]
    fn gap_view(&self) -> Gaps<'_> {
        self.gap_shape().view(&self.buf[..self.at[0][0] as usize])
    }

    #[inline]
    fn axis(&self, k: usize) -> Axis<'_> {
        let (s, at) = (self.axis_shape(k), self.at[k].map(|a| a as usize));
        let end = if k == 0 { self.at[1][0] as usize } else { self.buf.len() };
        Axis {
            sign: s.sign.view(&self.buf[at[0]..at[1]]),
            pos: Deltas::new(s.pos.view(&self.buf[at[1]..at[2]])),
            neg: Deltas::new(s.neg.view(&self.buf[at[2]..end])),
        }
    }

    pub fn object(&self) -> u32 {
        self.object
    }

    /// Global instant of the period's opening snapshot.
    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn time(&self) -> TimeIndex<'_> {
        TimeIndex { first: self.first, last: self.last, gaps: self.gap_view() }
    }

    /// Copy of the x-axis parts.
    pub fn dx(&self) -> AxisDeltas {
        self.axis(0).to_owned()
    }

    /// Copy of the y-axis parts.
    pub fn dy(&self) -> AxisDeltas {
        self.axis(1).to_owned()
    }

    /// Number of data instants.
    pub fn data_count(&self) -> usize {
        self.count as usize
    }

    fn check_local(&self, i: u32) -> Result<()> {
        if i == 0 || i >= self.period {
            return Err(Error::out_of_bounds(i, 1, self.period as u64 - 1));
        }
        Ok(())
    }

    fn check_ordinal(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.data_count() {
            return Err(Error::not_found(j, self.data_count()));
        }
        Ok(())
    }

    /// Data ordinal of local instant `i`, if the object has data there.
    #[inline]
    fn ordinal_at(&self, i: u32) -> Option<usize> {
        if i < self.first || i > self.last {
            return None;
        }
        let off = (i - self.first + 1) as usize;
        let (missing_before, missing) = self.gap_view().rank1_and_missing(off);
        (!missing).then_some(off - missing_before)
    }

    /// Position at local instant `i` in `1..=d-1`, `None` when there is no
    /// data at `i`.
    #[inline]
    pub fn position(&self, i: u32) -> Result<Option<(u32, u32)>> {
        self.check_local(i)?;
        Ok(self.ordinal_at(i).map(|j| self.coords_at(j)))
    }

    #[inline]
    fn coords_at(&self, ordinal: usize) -> (u32, u32) {
        (self.axis(0).value_at(ordinal) as u32, self.axis(1).value_at(ordinal) as u32)
    }

    /// Position at data ordinal `j`.
    pub fn position_at_ordinal(&self, j: usize) -> Result<(u32, u32)> {
        self.check_ordinal(j)?;
        Ok(self.coords_at(j))
    }

    /// [`position`](Self::position) with every intermediate exposed.
    pub fn explain(&self, i: u32) -> Result<Option<Extraction>> {
        self.check_local(i)?;
        let Some(ordinal) = self.ordinal_at(i) else {
            return Ok(None);
        };
        let off = (i - self.first + 1) as usize;
        Ok(Some(Extraction {
            dis: self.gap_view().rank1(off),
            ordinal,
            x: self.axis(0).explain(ordinal),
            y: self.axis(1).explain(ordinal),
        }))
    }

    /// Data positions with ordinals `from..=to`, decoded sequentially.
    /// Yields samples whose `instant` is local.
    pub fn scan_positions(&self, from: usize, to: usize) -> Result<LogScan<'_>> {
        self.check_ordinal(from)?;
        self.check_ordinal(to)?;
        if from > to {
            return Err(Error::InvalidArgument(format!("ordinal range {from}..={to} is empty")));
        }
        Ok(LogScan {
            first: self.first,
            ordinal: from,
            to,
            offsets: self.gap_view().data_offsets(from),
            x: self.axis(0).cursor(from),
            y: self.axis(1).cursor(from),
        })
    }

    /// Data instants at or before local instant `i`; `None` before `first`.
    pub fn map_instant(&self, i: u32) -> Result<Option<usize>> {
        self.check_local(i)?;
        if i < self.first {
            return Ok(None);
        }
        let off = (i.min(self.last) - self.first + 1) as usize;
        Ok(Some(off - self.gap_view().rank1(off)))
    }

    /// Local instant of the `j`-th data sample.
    pub fn unmap_ordinal(&self, j: usize) -> Result<u32> {
        self.check_ordinal(j)?;
        Ok(self.unmap_unchecked(j))
    }

    #[inline]
    pub(crate) fn unmap_unchecked(&self, j: usize) -> u32 {
        self.gap_view().select0(j) as u32 + self.first - 1
    }

    /// Data ordinals whose instants fall in local `[lo, hi]`, if any.
    pub fn ordinals_between(&self, lo: u32, hi: u32) -> Option<(usize, usize)> {
        let lo = lo.max(self.first);
        let hi = hi.min(self.last);
        if lo > hi {
            return None;
        }
        let gaps = self.gap_view();
        let below = |i: u32| {
            if i < self.first {
                0
            } else {
                let off = (i - self.first + 1) as usize;
                off - gaps.rank1(off)
            }
        };
        let from = below(lo - 1) + 1;
        let to = below(hi);
        (from <= to).then_some((from, to))
    }

    /// Buffer plus the fixed header (ids, instants, shapes, offsets).
    pub fn size_in_bytes(&self) -> usize {
        std::mem::size_of::<Self>() + self.buf.len() * 8
    }

    /// Engineering space bound in bits:
    /// `4 * (n*log2(Nx/n + 2) + n*log2(Ny/n + 2) + d + SPACE_BOUND_CONSTANT_BITS)`
    /// where `n` is the data count and `Nx`, `Ny` the per-axis movement sums.
    pub fn space_bound_bits(&self) -> f64 {
        let n = self.data_count() as f64;
        let term = |total: u64| n * (total as f64 / n + 2.0).log2();
        4.0 * (term(self.axis(0).total_movement())
            + term(self.axis(1).total_movement())
            + self.period as f64
            + SPACE_BOUND_CONSTANT_BITS)
    }
}

/// Sequential decoder produced by [`TrajectoryLog::scan_positions`].
pub struct LogScan<'a> {
    first: u32,
    ordinal: usize,
    to: usize,
    offsets: DataOffsets<'a>,
    x: AxisCursor<'a>,
    y: AxisCursor<'a>,
}

impl LogScan<'_> {
    /// Ordinal the next call will decode.
    pub fn next_ordinal(&self) -> usize {
        self.ordinal
    }
}

impl Iterator for LogScan<'_> {
    type Item = Sample;

    #[inline]
    fn next(&mut self) -> Option<Sample> {
        if self.ordinal > self.to {
            return None;
        }
        let off = self.offsets.next().expect("presence bitmap holds every ordinal");
        let j = self.ordinal;
        self.ordinal += 1;
        Some(Sample { instant: off as u32 + self.first - 1, x: self.x.step(j) as u32, y: self.y.step(j) as u32 })
    }
}

impl Wire for TrajectoryLog {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u32(out, self.object);
        wire::put_u32(out, self.start);
        wire::put_u32(out, self.period);
        wire::put_u32(out, self.first);
        wire::put_u32(out, self.last);
        match self.gap_view().to_owned() {
            Presence::Plain(b) => {
                wire::put_u8(out, 0);
                b.write_to(out);
            }
            Presence::Sparse(s) => {
                wire::put_u8(out, 1);
                s.write_to(out);
            }
        }
        for k in 0..2 {
            let axis = self.axis(k).to_owned();
            axis.sign.write_to(out);
            axis.pos.write_to(out);
            axis.neg.write_to(out);
        }
    }

    fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let object = r.u32()?;
        let start = r.u32()?;
        let period = r.u32()?;
        let first = r.u32()?;
        let last = r.u32()?;
        let gaps = match r.u8()? {
            0 => Presence::Plain(BitVector::read_from(r)?),
            1 => Presence::Sparse(SparseBitVector::read_from(r)?),
            t => return Err(Error::Format(format!("log: presence tag {t}"))),
        };
        let mut axes = Vec::with_capacity(2);
        for _ in 0..2 {
            axes.push(AxisDeltas {
                sign: BitVector::read_from(r)?,
                pos: UnaryDeltaStream::read_from(r)?,
                neg: UnaryDeltaStream::read_from(r)?,
            });
        }
        let axes: [AxisDeltas; 2] = axes.try_into().expect("two axes");
        let bad = |m: &str| Err(Error::Format(format!("log of object {object}: {m}")));
        if first == 0 || first > last || last >= period {
            return bad("first/last outside the period");
        }
        let view = gaps.view();
        if view.len() != (last - first + 1) as usize || view.missing(1) || view.missing(view.len()) {
            return bad("presence bitmap does not match first/last");
        }
        let n = view.count_zeros();
        for axis in &axes {
            if axis.sign.len() != n
                || axis.sign.count_ones() != axis.pos.count()
                || axis.sign.count_zeros() != axis.neg.count()
            {
                return bad("sign bitmap does not match streams");
            }
        }
        Ok(Self::assemble(object, start, period, first, last, &gaps, &axes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Trajectory consistent with the worked example: data at local instants
    /// 2,3,4,5,8,9,10 of the period [0, 13].
    pub(crate) fn worked_example() -> TrajectoryLog {
        let pts = [(2, 2, 4), (3, 3, 6), (4, 5, 5), (5, 3, 7), (8, 10, 10), (9, 9, 9), (10, 8, 8)];
        let samples: Vec<Sample> = pts.iter().map(|&(t, x, y)| Sample::new(t, x, y)).collect();
        TrajectoryLog::build(7, &samples, 0, 13).unwrap()
    }

    #[test]
    fn worked_example_extraction() {
        let log = worked_example();
        assert_eq!(log.time().first(), 2);
        assert_eq!(log.time().last(), 10);
        let gaps: String = log.time().gap_bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        assert_eq!(gaps, "000011000");
        let e = log.explain(9).unwrap().unwrap();
        assert_eq!(e.dis, 2);
        assert_eq!((e.x.pos, e.x.neg), (4, 2));
        assert_eq!((e.x.pos_select, e.x.neg_select), (16, 5));
        assert_eq!(e.x.value, 9);
        assert_eq!(log.position(9).unwrap(), Some((9, 9)));
        assert_eq!(log.dx().positive().prefix_sum(4).unwrap(), 12);
        for gap in [1, 6, 7, 11, 12] {
            assert_eq!(log.position(gap).unwrap(), None, "instant {gap}");
        }
    }

    #[test]
    fn map_and_unmap() {
        let log = worked_example();
        assert_eq!(log.map_instant(9).unwrap(), Some(6));
        assert_eq!(log.map_instant(2).unwrap(), Some(1));
        assert_eq!(log.map_instant(1).unwrap(), None);
        assert_eq!(log.map_instant(12).unwrap(), Some(7));
        assert_eq!(log.map_instant(7).unwrap(), Some(4));
        assert_eq!(log.unmap_ordinal(5).unwrap(), 8);
        assert_eq!(log.unmap_ordinal(1).unwrap(), 2);
        assert!(matches!(log.unmap_ordinal(8), Err(Error::NotFound { .. })));
        assert_eq!(log.ordinals_between(4, 8), Some((3, 5)));
        assert_eq!(log.ordinals_between(6, 7), None);
        assert_eq!(log.ordinals_between(1, 12), Some((1, 7)));
    }

    #[test]
    fn scan_worked_example() {
        let log = worked_example();
        let got: Vec<Sample> = log.scan_positions(3, 4).unwrap().collect();
        assert_eq!(got, vec![Sample::new(4, 5, 5), Sample::new(5, 3, 7)]);
        let one: Vec<Sample> = log.scan_positions(6, 6).unwrap().collect();
        assert_eq!(one, vec![Sample::new(9, 9, 9)]);
        assert!(log.scan_positions(0, 2).is_err());
        assert!(log.scan_positions(3, 8).is_err());
    }

    #[test]
    fn bounds_and_build_errors() {
        let log = worked_example();
        assert!(matches!(log.position(0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(log.position(13), Err(Error::OutOfBounds { .. })));
        assert!(log.position(12).unwrap().is_none());

        let s = |t| Sample::new(t, 1, 1);
        assert!(TrajectoryLog::build(1, &[], 0, 10).is_err());
        assert!(TrajectoryLog::build(1, &[s(0)], 0, 10).is_err());
        assert!(TrajectoryLog::build(1, &[s(10)], 0, 10).is_err());
        assert!(TrajectoryLog::build(1, &[s(3), s(3)], 0, 10).is_err());
        assert!(TrajectoryLog::build(1, &[s(4), s(3)], 0, 10).is_err());
    }

    #[test]
    fn single_sample() {
        let log = TrajectoryLog::build(3, &[Sample::new(101, 5, 7)], 100, 10).unwrap();
        assert_eq!(log.position(1).unwrap(), Some((5, 7)));
        assert_eq!(log.data_count(), 1);
        assert_eq!(log.position(2).unwrap(), None);
    }

    #[test]
    fn wire_round_trip_and_validation() {
        let log = worked_example();
        let bytes = log.to_bytes();
        let back = TrajectoryLog::from_bytes(&bytes).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_bytes(), bytes);
        let mut bad = bytes.clone();
        bad[12] = 0; // first = 0
        assert!(TrajectoryLog::from_bytes(&bad).is_err());
    }

    fn arb_log() -> impl Strategy<Value = (u32, u32, Vec<Sample>)> {
        (2u32..400, 0u32..5).prop_flat_map(|(period, k)| {
            let start = k * period;
            let instants = proptest::collection::btree_set(1..period.max(2), 1..=(period as usize - 1).max(1));
            (Just(period), Just(start), instants).prop_flat_map(|(period, start, instants)| {
                let n = instants.len();
                (Just(period), Just(start), Just(instants), proptest::collection::vec((0u32..5000, 0u32..400_000), n))
                    .prop_map(|(period, start, instants, coords)| {
                        let samples =
                            instants.into_iter().zip(coords).map(|(t, (x, y))| Sample::new(start + t, x, y)).collect();
                        (period, start, samples)
                    })
            })
        })
    }

    proptest! {
        #[test]
        fn replay_all_instants((period, start, samples) in arb_log()) {
            let log = TrajectoryLog::build(1, &samples, start, period).unwrap();
            let mut table = vec![None; period as usize];
            for s in &samples {
                table[(s.instant - start) as usize] = Some((s.x, s.y));
            }
            for i in 1..period {
                prop_assert_eq!(log.position(i).unwrap(), table[i as usize]);
            }
            let n = samples.len();
            prop_assert_eq!(log.data_count(), n);
            let all: Vec<Sample> = log.scan_positions(1, n).unwrap()
                .map(|s| Sample::new(s.instant + start, s.x, s.y)).collect();
            prop_assert_eq!(&all, &samples);
            for j in 1..=n {
                let t = log.unmap_ordinal(j).unwrap();
                prop_assert_eq!(t + start, samples[j - 1].instant);
                prop_assert_eq!(log.map_instant(t).unwrap(), Some(j));
            }
            let mid = n / 2 + 1;
            let part: Vec<Sample> = log.scan_positions(mid, n).unwrap()
                .map(|s| Sample::new(s.instant + start, s.x, s.y)).collect();
            prop_assert_eq!(&part[..], &samples[mid - 1..]);
            prop_assert!((log.size_in_bytes() * 8) as f64 <= log.space_bound_bits());
            let back = TrajectoryLog::from_bytes(&log.to_bytes()).unwrap();
            prop_assert_eq!(back, log);
        }

        #[test]
        fn sign_decomposition_matches_signed_sums(xs in proptest::collection::vec(0u32..1000, 1..200)) {
            let samples: Vec<Sample> = xs.iter().enumerate().map(|(i, &x)| Sample::new(i as u32 + 1, x, 0)).collect();
            let log = TrajectoryLog::build(0, &samples, 0, xs.len() as u32 + 1).unwrap();
            let mut prev = 0i64;
            let mut cum = 0i64;
            let (mut pos, mut neg) = (0, 0);
            for (j, &x) in xs.iter().enumerate() {
                let d = x as i64 - prev;
                prev = x as i64;
                cum += d;
                if d >= 0 { pos += 1 } else { neg += 1 }
                let e = log.explain(j as u32 + 1).unwrap().unwrap();
                prop_assert_eq!((e.x.pos, e.x.neg), (pos, neg));
                prop_assert_eq!(e.x.pos + e.x.neg, j + 1);
                prop_assert_eq!(e.x.value, cum);
            }
        }
    }
}
