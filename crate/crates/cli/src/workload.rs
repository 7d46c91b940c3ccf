// SPDX-License-Identifier: Apache-2.0

//! Seeded query streams for the benchmark and the oracle check.

use contact::{Extent, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference grid the region sizes are given on.
const REFERENCE_GRID: (u64, u64) = (2723, 367_775);
const SMALL_REGION: (u64, u64) = (272, 367);
const LARGE_REGION: (u64, u64) = (2723, 3677);
pub const SHORT_INTERVAL: u32 = 36;
pub const LONG_INTERVAL: u32 = 90;
/// Span of a trajectory query.
pub const TRAJECTORY_SPAN: u32 = LONG_INTERVAL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Object,
    Trajectory,
    SliceS,
    SliceL,
    IntervalS,
    IntervalL,
}

impl Class {
    pub const ALL: [Class; 6] =
        [Class::Object, Class::Trajectory, Class::SliceS, Class::SliceL, Class::IntervalS, Class::IntervalL];

    pub fn name(self) -> &'static str {
        match self {
            Class::Object => "object",
            Class::Trajectory => "trajectory",
            Class::SliceS => "slice_s",
            Class::SliceL => "slice_l",
            Class::IntervalS => "interval_s",
            Class::IntervalL => "interval_l",
        }
    }

    /// Queries averaged per data point.
    pub fn count(self) -> usize {
        match self {
            Class::Object => 20_000,
            Class::Trajectory => 10_000,
            _ => 1_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Object { id: u32, q: u32 },
    Trajectory { id: u32, b: u32, e: u32 },
    Slice { r: Rect, q: u32 },
    Interval { r: Rect, b: u32, e: u32 },
}

/// Region size on `extent` covering the same fraction of each axis as
/// `size` does on the reference grid.
pub fn scaled_region(extent: Extent, size: (u64, u64)) -> (u32, u32) {
    let scale = |len: u32, part: u64, whole: u64| ((len as u64 * part + whole / 2) / whole).clamp(1, len as u64) as u32;
    (scale(extent.width, size.0, REFERENCE_GRID.0), scale(extent.height, size.1, REFERENCE_GRID.1))
}

pub fn small_region(extent: Extent) -> (u32, u32) {
    scaled_region(extent, SMALL_REGION)
}

pub fn large_region(extent: Extent) -> (u32, u32) {
    scaled_region(extent, LARGE_REGION)
}

pub struct Workload<'a> {
    ids: &'a [u32],
    extent: Extent,
    horizon: u32,
    rng: ChaCha8Rng,
}

impl<'a> Workload<'a> {
    /// Streams for the given class depend only on the seed and the class.
    pub fn new(ids: &'a [u32], extent: Extent, horizon: u32, seed: u64, class: Class) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        Workload { ids, extent, horizon, rng }
    }

    fn object(&mut self) -> u32 {
        self.ids[self.rng.gen_range(0..self.ids.len())]
    }

    fn span(&mut self, len: u32) -> (u32, u32) {
        let len = len.min(self.horizon);
        let b = self.rng.gen_range(0..=self.horizon - len);
        (b, b + len - 1)
    }

    fn region(&mut self, (w, h): (u32, u32)) -> Rect {
        let x1 = self.rng.gen_range(0..=self.extent.width - w);
        let y1 = self.rng.gen_range(0..=self.extent.height - h);
        Rect::new(x1, x1 + w - 1, y1, y1 + h - 1)
    }

    pub fn next(&mut self, class: Class) -> Query {
        match class {
            Class::Object => Query::Object { id: self.object(), q: self.rng.gen_range(0..self.horizon) },
            Class::Trajectory => {
                let id = self.object();
                let (b, e) = self.span(TRAJECTORY_SPAN);
                Query::Trajectory { id, b, e }
            }
            Class::SliceS | Class::SliceL => {
                let size = if class == Class::SliceS { small_region(self.extent) } else { large_region(self.extent) };
                Query::Slice { r: self.region(size), q: self.rng.gen_range(0..self.horizon) }
            }
            Class::IntervalS | Class::IntervalL => {
                let (size, len) = if class == Class::IntervalS {
                    (small_region(self.extent), SHORT_INTERVAL)
                } else {
                    (large_region(self.extent), LONG_INTERVAL)
                };
                let r = self.region(size);
                let (b, e) = self.span(len);
                Query::Interval { r, b, e }
            }
        }
    }

    pub fn take(mut self, class: Class, n: usize) -> Vec<Query> {
        (0..n).map(|_| self.next(class)).collect()
    }
}
