// SPDX-License-Identifier: Apache-2.0

//! Perfect binary tree of bounding boxes over a log's data ordinals.
//!
//! Leaves cover `C` consecutive data ordinals; the leaf count is padded to a
//! power of two. Nodes live in heap order (root at 1, children of `p` at `2p`
//! and `2p + 1`). The root box is kept verbatim and every other node stores,
//! per axis, `(child.min - parent.min, parent.max - child.max)`, packed at
//! `w = floor(log2 m) + 1` bits where `m` is the largest such difference in
//! the tree. Padding nodes cover no ordinal and store zeros.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::log::TrajectoryLog;
use crate::succinct::wire;
use crate::succinct::{bit_width, IntVector, Reader, Wire};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MbrTree {
    capacity: u32,
    leaves: u32,
    count: u32,
    width: u32,
    root: Rect,
    nodes_x: IntVector,
    nodes_y: IntVector,
}

/// Which pruning rules a traversal applies. The ordinal-range test is part
/// of the query definition and always applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pruning {
    pub mbr: bool,
    pub speed: bool,
}

impl Pruning {
    pub const ALL: Pruning = Pruning { mbr: true, speed: true };
    pub const NONE: Pruning = Pruning { mbr: false, speed: false };
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::ALL
    }
}

/// Arguments of a time-interval check against one log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalQuery {
    pub region: Rect,
    /// First data ordinal to consider (b').
    pub first: usize,
    /// Last data ordinal to consider (e').
    pub last: usize,
    /// Local instant where the queried interval begins (b).
    pub begin: u32,
    /// Local instant where the queried interval ends (e).
    pub end: u32,
    /// Maximum per-axis displacement per instant.
    pub max_speed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hit {
    pub ordinal: usize,
    /// Local instant.
    pub instant: u32,
    pub x: u32,
    pub y: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// Node passed the ordinal and box tests and was entered.
    Visit(usize),
    /// Node's ordinal range misses `[first, last]`.
    PruneTime(usize),
    /// Node's box misses the region.
    PruneMbr(usize),
    /// Node skipped because the sibling's box is too far to reach the region in time.
    PruneSpeed(usize),
    /// Leaf scan over ordinals `from..=to`.
    Scan {
        node: usize,
        from: usize,
        to: usize,
    },
    Decode {
        ordinal: usize,
        instant: u32,
    },
    /// Scan abandoned: the region is unreachable before the interval ends.
    SpeedStop {
        ordinal: usize,
    },
    Hit {
        ordinal: usize,
        instant: u32,
    },
}

/// Cost counters, plus an optional event trace.
#[derive(Clone, Debug, Default)]
pub struct Probe {
    pub nodes_visited: u64,
    pub positions_decoded: u64,
    pub trace: Option<Vec<TraceEvent>>,
}

impl Probe {
    pub fn traced() -> Self {
        Probe { trace: Some(Vec::new()), ..Probe::default() }
    }

    #[inline]
    fn event(&mut self, e: TraceEvent) {
        if let Some(t) = &mut self.trace {
            t.push(e);
        }
    }

    pub fn absorb(&mut self, other: &Probe) {
        self.nodes_visited += other.nodes_visited;
        self.positions_decoded += other.positions_decoded;
    }
}

enum Flow {
    Continue,
    Found(Hit),
    Stop,
}

impl MbrTree {
    pub fn build(log: &TrajectoryLog, capacity: u32) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Build("leaf capacity must be at least 1".into()));
        }
        let n = log.data_count();
        if n == 0 {
            return Err(Error::Build("cannot index an empty log".into()));
        }
        let points: Vec<(u32, u32)> = log.scan_positions(1, n)?.map(|s| (s.x, s.y)).collect();
        let used_leaves = n.div_ceil(capacity as usize);
        let leaves = used_leaves.next_power_of_two();

        let mut boxes: Vec<Option<Rect>> = vec![None; 2 * leaves];
        for (j, chunk) in points.chunks(capacity as usize).enumerate() {
            let mut b = Rect::point(chunk[0].0, chunk[0].1);
            for &(x, y) in &chunk[1..] {
                b.expand_to(x, y);
            }
            boxes[leaves + j] = Some(b);
        }
        for p in (1..leaves).rev() {
            boxes[p] = match (boxes[2 * p], boxes[2 * p + 1]) {
                (Some(a), Some(b)) => Some(a.union(&b)),
                (a, b) => a.or(b),
            };
        }

        let root = boxes[1].expect("nonempty log has a root box");
        let slots = 2 * (2 * leaves - 2);
        let mut dx = vec![0u64; slots];
        let mut dy = vec![0u64; slots];
        for p in 2..2 * leaves {
            if let (Some(c), Some(par)) = (boxes[p], boxes[p / 2]) {
                let k = 2 * (p - 2);
                dx[k] = (c.x1 - par.x1) as u64;
                dx[k + 1] = (par.x2 - c.x2) as u64;
                dy[k] = (c.y1 - par.y1) as u64;
                dy[k + 1] = (par.y2 - c.y2) as u64;
            }
        }
        let largest = dx.iter().chain(&dy).copied().max().unwrap_or(0);
        let width = bit_width(largest);
        Ok(MbrTree {
            capacity,
            leaves: leaves as u32,
            count: n as u32,
            width,
            root,
            nodes_x: IntVector::with_width(&dx, width),
            nodes_y: IntVector::with_width(&dy, width),
        })
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves as usize
    }

    pub fn node_count(&self) -> usize {
        2 * self.leaves as usize - 1
    }

    /// Data ordinals indexed by the tree.
    pub fn data_count(&self) -> usize {
        self.count as usize
    }

    /// Bits per stored difference.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn root(&self) -> Rect {
        self.root
    }

    pub fn is_leaf(&self, p: usize) -> bool {
        p >= self.leaves as usize
    }

    /// Stored `(min, max)` differences of node `p >= 2` on both axes.
    pub fn stored_diffs(&self, p: usize) -> Option<((u64, u64), (u64, u64))> {
        if p < 2 || p > self.node_count() {
            return None;
        }
        let k = 2 * (p - 2);
        Some(((self.nodes_x.get(k), self.nodes_x.get(k + 1)), (self.nodes_y.get(k), self.nodes_y.get(k + 1))))
    }

    /// Largest stored difference.
    pub fn max_stored_diff(&self) -> u64 {
        self.nodes_x.iter().chain(self.nodes_y.iter()).max().unwrap_or(0)
    }

    /// Ordinals covered by node `p`, `None` for padding nodes.
    pub fn node_range(&self, p: usize) -> Option<(usize, usize)> {
        if p == 0 || p > self.node_count() {
            return None;
        }
        let depth = usize::BITS - 1 - p.leading_zeros();
        let span = (self.leaves as usize >> depth) * self.capacity as usize;
        let index = p - (1 << depth);
        let lo = index * span + 1;
        let hi = ((index + 1) * span).min(self.count as usize);
        (lo <= self.count as usize).then_some((lo, hi))
    }

    #[inline]
    fn child_box(&self, parent: Rect, p: usize) -> Rect {
        let k = 2 * (p - 2);
        Rect {
            x1: parent.x1 + self.nodes_x.get(k) as u32,
            x2: parent.x2 - self.nodes_x.get(k + 1) as u32,
            y1: parent.y1 + self.nodes_y.get(k) as u32,
            y2: parent.y2 - self.nodes_y.get(k + 1) as u32,
        }
    }

    /// Absolute box of node `p`, reconstructed from the root down.
    pub fn node_mbr(&self, p: usize) -> Result<Rect> {
        if self.node_range(p).is_none() {
            return Err(Error::not_found(p, self.node_count()));
        }
        let depth = usize::BITS - 1 - p.leading_zeros();
        let mut b = self.root;
        for d in (0..depth).rev() {
            b = self.child_box(b, p >> d);
        }
        Ok(b)
    }

    /// Whether some data position with ordinal in `[first, last]` lies in the region.
    pub fn query_interval(&self, log: &TrajectoryLog, q: &IntervalQuery) -> Result<bool> {
        Ok(self.first_hit(log, q, Pruning::ALL, &mut Probe::default())?.is_some())
    }

    /// Earliest qualifying position found by the pruned traversal.
    pub fn first_hit(
        &self,
        log: &TrajectoryLog,
        q: &IntervalQuery,
        pruning: Pruning,
        probe: &mut Probe,
    ) -> Result<Option<Hit>> {
        if log.data_count() != self.count as usize {
            return Err(Error::InvalidArgument(format!(
                "tree indexes {} ordinals, log has {}",
                self.count,
                log.data_count()
            )));
        }
        if q.first == 0 || q.first > q.last || q.last > self.count as usize {
            return Err(Error::InvalidArgument(format!(
                "ordinal window {}..={} outside 1..={}",
                q.first, q.last, self.count
            )));
        }
        if pruning.mbr && !self.root.intersects(&q.region) {
            probe.event(TraceEvent::PruneMbr(1));
            return Ok(None);
        }
        Ok(match self.visit(log, 1, self.root, q, pruning, probe) {
            Flow::Found(hit) => Some(hit),
            Flow::Continue | Flow::Stop => None,
        })
    }

    fn visit(
        &self,
        log: &TrajectoryLog,
        p: usize,
        b: Rect,
        q: &IntervalQuery,
        pruning: Pruning,
        probe: &mut Probe,
    ) -> Flow {
        probe.nodes_visited += 1;
        probe.event(TraceEvent::Visit(p));
        let (lo, hi) = self.node_range(p).expect("visited nodes are in use");
        if self.is_leaf(p) {
            return self.scan_leaf(log, p, lo.max(q.first), hi.min(q.last), q, pruning, probe);
        }

        let children = [2 * p, 2 * p + 1];
        let ranges = children.map(|c| self.node_range(c));
        let boxes = [0, 1].map(|i| ranges[i].map(|_| self.child_box(b, children[i])));
        let mut wanted = [false; 2];
        for i in 0..2 {
            if let Some((clo, chi)) = ranges[i] {
                wanted[i] = clo <= q.last && q.first <= chi;
                if !wanted[i] {
                    probe.event(TraceEvent::PruneTime(children[i]));
                }
            }
        }

        let mut stop_after_left = false;
        if pruning.speed {
            // Left box too far: nothing in the right child can reach the region by `end`.
            if let (true, Some((_, left_hi)), Some(lb)) = (wanted[1], ranges[0], boxes[0]) {
                let left_end = log.unmap_unchecked(left_hi);
                let budget = q.max_speed * q.end.saturating_sub(left_end) as u64;
                if lb.chebyshev_gap(&q.region) > budget {
                    wanted[1] = false;
                    stop_after_left = true;
                    probe.event(TraceEvent::PruneSpeed(children[1]));
                }
            }
            // Right box too far: nothing in the left child since `begin` can be in the region.
            if let (true, Some((right_lo, _)), Some(rb)) = (wanted[0], ranges[1], boxes[1]) {
                let right_start = log.unmap_unchecked(right_lo);
                let budget = q.max_speed * right_start.saturating_sub(q.begin) as u64;
                if rb.chebyshev_gap(&q.region) > budget {
                    wanted[0] = false;
                    probe.event(TraceEvent::PruneSpeed(children[0]));
                }
            }
        }

        for i in 0..2 {
            if !wanted[i] {
                continue;
            }
            let cb = boxes[i].expect("wanted children are in use");
            if pruning.mbr && !cb.intersects(&q.region) {
                probe.event(TraceEvent::PruneMbr(children[i]));
                continue;
            }
            match self.visit(log, children[i], cb, q, pruning, probe) {
                Flow::Continue => {}
                done => return done,
            }
        }
        if stop_after_left {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_leaf(
        &self,
        log: &TrajectoryLog,
        node: usize,
        from: usize,
        to: usize,
        q: &IntervalQuery,
        pruning: Pruning,
        probe: &mut Probe,
    ) -> Flow {
        probe.event(TraceEvent::Scan { node, from, to });
        let scan = log.scan_positions(from, to).expect("leaf range within log");
        for (ordinal, s) in (from..).zip(scan) {
            probe.positions_decoded += 1;
            probe.event(TraceEvent::Decode { ordinal, instant: s.instant });
            if q.region.contains(s.x, s.y) {
                probe.event(TraceEvent::Hit { ordinal, instant: s.instant });
                return Flow::Found(Hit { ordinal, instant: s.instant, x: s.x, y: s.y });
            }
            if pruning.speed {
                let gap = Rect::point(s.x, s.y).chebyshev_gap(&q.region);
                if gap > q.max_speed * q.end.saturating_sub(s.instant) as u64 {
                    probe.event(TraceEvent::SpeedStop { ordinal });
                    return Flow::Stop;
                }
            }
        }
        Flow::Continue
    }

    pub fn size_in_bytes(&self) -> usize {
        4 * 4 + 16 + self.nodes_x.size_in_bytes() + self.nodes_y.size_in_bytes()
    }
}

impl Wire for MbrTree {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u32(out, self.capacity);
        wire::put_u32(out, self.leaves);
        wire::put_u32(out, self.count);
        wire::put_u8(out, self.width as u8);
        for v in [self.root.x1, self.root.x2, self.root.y1, self.root.y2] {
            wire::put_u32(out, v);
        }
        self.nodes_x.write_to(out);
        self.nodes_y.write_to(out);
    }

    fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let capacity = r.u32()?;
        let leaves = r.u32()?;
        let count = r.u32()?;
        let width = r.u8()? as u32;
        let (x1, x2, y1, y2) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let root = Rect::checked(x1, x2, y1, y2).map_err(|e| Error::Format(format!("mbr tree root: {e}")))?;
        let nodes_x = IntVector::read_from(r)?;
        let nodes_y = IntVector::read_from(r)?;
        let slots = 2 * (2 * (leaves as usize).max(1) - 2);
        let ok = capacity > 0
            && count > 0
            && leaves.is_power_of_two()
            && (count as u64).div_ceil(capacity as u64).next_power_of_two() == leaves as u64
            && nodes_x.len() == slots
            && nodes_y.len() == slots
            && nodes_x.width() == width
            && nodes_y.width() == width;
        if !ok {
            return Err(Error::Format("mbr tree: inconsistent header".into()));
        }
        Ok(MbrTree { capacity, leaves, count, width, root, nodes_x, nodes_y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::Sample;
    use proptest::prelude::*;

    fn worked_log() -> TrajectoryLog {
        let pts = [(2, 2, 4), (3, 3, 6), (4, 5, 5), (5, 3, 7), (8, 10, 10), (9, 9, 9), (10, 8, 8)];
        let samples: Vec<Sample> = pts.iter().map(|&(t, x, y)| Sample::new(t, x, y)).collect();
        TrajectoryLog::build(7, &samples, 0, 13).unwrap()
    }

    #[test]
    fn worked_example_boxes() {
        let log = worked_log();
        let t = MbrTree::build(&log, 2).unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.root(), Rect::new(2, 10, 4, 10));
        assert_eq!(t.node_mbr(1).unwrap(), t.root());
        assert_eq!(t.node_mbr(2).unwrap(), Rect::new(2, 5, 4, 7));
        assert_eq!(t.stored_diffs(2).unwrap().0, (0, 5));
        assert_eq!(t.node_mbr(4).unwrap(), Rect::new(2, 3, 4, 6));
        assert_eq!(t.node_mbr(5).unwrap(), Rect::new(3, 5, 5, 7));
        assert_eq!(t.node_range(1), Some((1, 7)));
        assert_eq!(t.node_range(2), Some((1, 4)));
        assert_eq!(t.node_range(3), Some((5, 7)));
        assert_eq!(t.node_range(7), Some((7, 7)));
        assert!(t.max_stored_diff() < 1 << t.width());
    }

    #[test]
    fn worked_example_traversal() {
        let log = worked_log();
        let t = MbrTree::build(&log, 2).unwrap();
        let q = IntervalQuery {
            region: Rect::new(4, 5, 4, 10),
            first: 2,
            last: 4,
            begin: log.unmap_ordinal(2).unwrap(),
            end: log.unmap_ordinal(4).unwrap(),
            max_speed: 3,
        };
        let mut probe = Probe::traced();
        let hit = t.first_hit(&log, &q, Pruning::ALL, &mut probe).unwrap().unwrap();
        assert_eq!((hit.ordinal, hit.instant), (3, 4));
        use TraceEvent::*;
        assert_eq!(
            probe.trace.unwrap(),
            vec![
                Visit(1),
                PruneTime(3),
                Visit(2),
                PruneMbr(4),
                Visit(5),
                Scan { node: 5, from: 3, to: 4 },
                Decode { ordinal: 3, instant: 4 },
                Hit { ordinal: 3, instant: 4 },
            ]
        );
        assert!(t.query_interval(&log, &q).unwrap());
    }

    #[test]
    fn disjoint_region_stops_at_root() {
        let log = worked_log();
        let t = MbrTree::build(&log, 2).unwrap();
        let q = IntervalQuery { region: Rect::new(50, 60, 0, 3), first: 1, last: 7, begin: 2, end: 10, max_speed: 3 };
        let mut probe = Probe::traced();
        assert!(t.first_hit(&log, &q, Pruning::ALL, &mut probe).unwrap().is_none());
        assert_eq!(probe.trace.unwrap(), vec![TraceEvent::PruneMbr(1)]);
        assert_eq!(probe.nodes_visited, 0);
    }

    #[test]
    fn single_point_tree() {
        let log = TrajectoryLog::build(1, &[Sample::new(5, 9, 4)], 0, 10).unwrap();
        for c in [1, 3, 100] {
            let t = MbrTree::build(&log, c).unwrap();
            assert_eq!(t.node_count(), 1);
            assert_eq!(t.node_mbr(1).unwrap(), Rect::point(9, 4));
            assert_eq!(t.width(), 0);
        }
        assert!(MbrTree::build(&log, 0).is_err());
    }

    #[test]
    fn padding_nodes_not_found() {
        let samples: Vec<Sample> = (1..=5).map(|t| Sample::new(t, t, t)).collect();
        let log = TrajectoryLog::build(1, &samples, 0, 10).unwrap();
        let t = MbrTree::build(&log, 2).unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.node_range(7), None);
        assert!(matches!(t.node_mbr(7), Err(Error::NotFound { .. })));
        assert_eq!(t.node_range(6), Some((5, 5)));
        assert_eq!(t.stored_diffs(7), Some(((0, 0), (0, 0))));
        assert!(t.node_mbr(8).is_err());
    }

    #[test]
    fn rejects_bad_window() {
        let log = worked_log();
        let t = MbrTree::build(&log, 2).unwrap();
        let mut q =
            IntervalQuery { region: Rect::new(0, 100, 0, 100), first: 0, last: 3, begin: 1, end: 12, max_speed: 3 };
        assert!(t.first_hit(&log, &q, Pruning::ALL, &mut Probe::default()).is_err());
        q.first = 4;
        q.last = 8;
        assert!(t.first_hit(&log, &q, Pruning::ALL, &mut Probe::default()).is_err());
    }

    /// Speed-bounded walk of `n` data points over a period, with gaps.
    fn arb_walk() -> impl Strategy<Value = (Vec<Sample>, u32, u64)> {
        (1usize..120, 1u32..4, proptest::collection::vec((0u32..3, -3i32..=3, -3i32..=3), 120), 0u32..200, 0u32..200)
            .prop_map(|(n, c, steps, x0, y0)| {
                let mut t = 0u32;
                let (mut x, mut y) = (x0 as i64 + 400, y0 as i64 + 400);
                let mut out = Vec::new();
                for &(skip, dx, dy) in steps.iter().take(n) {
                    let dt = 1 + skip;
                    t += dt;
                    x += dx as i64 * dt as i64;
                    y += dy as i64 * dt as i64;
                    out.push(Sample::new(t, x as u32, y as u32));
                }
                (out, c, 3u64)
            })
    }

    fn brute_box(samples: &[Sample], lo: usize, hi: usize) -> Rect {
        let xs = samples[lo - 1..hi].iter().map(|s| s.x);
        let ys = samples[lo - 1..hi].iter().map(|s| s.y);
        Rect::new(xs.clone().min().unwrap(), xs.max().unwrap(), ys.clone().min().unwrap(), ys.max().unwrap())
    }

    proptest! {
        #[test]
        fn nodes_match_brute_force((samples, c, _s) in arb_walk()) {
            let period = samples.last().unwrap().instant + 1;
            let log = TrajectoryLog::build(1, &samples, 0, period).unwrap();
            let t = MbrTree::build(&log, c).unwrap();
            for p in 1..=t.node_count() {
                match t.node_range(p) {
                    Some((lo, hi)) => {
                        let b = t.node_mbr(p).unwrap();
                        prop_assert_eq!(b, brute_box(&samples, lo, hi));
                        if p > 1 {
                            prop_assert!(t.node_mbr(p / 2).unwrap().contains_rect(&b));
                        }
                    }
                    None => prop_assert!(t.node_mbr(p).is_err()),
                }
            }
            let m = t.max_stored_diff();
            prop_assert!(m < 1u64 << t.width());
            prop_assert_eq!(t.width(), if m == 0 { 0 } else { 64 - m.leading_zeros() });
            let back = MbrTree::from_bytes(&t.to_bytes()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn interval_matches_linear_scan(
            (samples, c, s) in arb_walk(),
            rx in 350u32..800, ry in 350u32..800, w in 0u32..40, h in 0u32..40,
            a in 0usize..120, b in 0usize..120,
        ) {
            let n = samples.len();
            let period = samples.last().unwrap().instant + 1;
            let log = TrajectoryLog::build(1, &samples, 0, period).unwrap();
            let t = MbrTree::build(&log, c).unwrap();
            let (first, last) = ((a % n).min(b % n) + 1, (a % n).max(b % n) + 1);
            let region = Rect::new(rx, rx + w, ry, ry + h);
            let q = IntervalQuery {
                region, first, last,
                begin: samples[first - 1].instant,
                end: samples[last - 1].instant,
                max_speed: s,
            };
            let expect = samples[first - 1..last].iter().position(|p| region.contains(p.x, p.y)).map(|i| first + i);
            let mut pruned = Probe::default();
            let mut plain = Probe::default();
            let mut mbr_only = Probe::default();
            let got = t.first_hit(&log, &q, Pruning::ALL, &mut pruned).unwrap();
            let got_plain = t.first_hit(&log, &q, Pruning::NONE, &mut plain).unwrap();
            let got_mbr = t.first_hit(&log, &q, Pruning { mbr: true, speed: false }, &mut mbr_only).unwrap();
            prop_assert_eq!(got.map(|h| h.ordinal), expect);
            prop_assert_eq!(got_plain.map(|h| h.ordinal), expect);
            prop_assert_eq!(got_mbr.map(|h| h.ordinal), expect);
            prop_assert!(pruned.nodes_visited <= mbr_only.nodes_visited);
            prop_assert!(pruned.positions_decoded <= mbr_only.positions_decoded);
        }
    }
}
