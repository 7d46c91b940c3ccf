// SPDX-License-Identifier: Apache-2.0

//! The full index: a snapshot every `d` instants, and for each object and
//! period a log with its bounding-box tree.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Extent, Rect};
use crate::ingest::RawRecord;
use crate::log::{Sample, TrajectoryLog};
use crate::mbrtree::{IntervalQuery, MbrTree, Probe, Pruning};
use crate::snapshot::{expanded_region, Snapshot};
use crate::succinct::wire;
use crate::succinct::{Reader, Wire};

pub const MAGIC: &[u8; 4] = b"CTCT";
pub const FORMAT_VERSION: u8 = 1;
const NO_LOG: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexConfig {
    /// Snapshot distance `d`, at least 2.
    pub period: u32,
    /// Data instants per MBR tree leaf.
    pub leaf_capacity: u32,
    /// Replaces the speed measured on the data. A value below the true
    /// maximum makes range queries incomplete.
    pub max_speed: Option<u64>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { period: 120, leaf_capacity: 80, max_speed: None }
    }
}

impl IndexConfig {
    pub fn new(period: u32, leaf_capacity: u32) -> Self {
        IndexConfig { period, leaf_capacity, max_speed: None }
    }
}

/// Samples sorted by object, then instant, on a fixed grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    extent: Extent,
    horizon: u32,
    records: Vec<RawRecord>,
}

impl Dataset {
    /// Takes records sorted by `(object, instant)` with no repeated pair.
    /// The horizon defaults to one past the latest instant.
    pub fn new(extent: Extent, records: Vec<RawRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !extent.contains(r.x, r.y) {
                return Err(Error::Build(format!(
                    "record {r:?} lies outside the {}x{} grid",
                    extent.width, extent.height
                )));
            }
            if i > 0 {
                let p = &records[i - 1];
                if (p.object, p.instant) >= (r.object, r.instant) {
                    let what = if (p.object, p.instant) == (r.object, r.instant) { "duplicate" } else { "unsorted" };
                    return Err(Error::Build(format!(
                        "{what} sample: object {} instant {} after object {} instant {}",
                        r.object, r.instant, p.object, p.instant
                    )));
                }
            }
        }
        let horizon = records.iter().map(|r| r.instant as u64 + 1).max().unwrap_or(0);
        let horizon = u32::try_from(horizon).map_err(|_| Error::Build("instant u32::MAX is reserved".into()))?;
        Ok(Dataset { extent, horizon, records })
    }

    /// Sorts `records` first; repeated `(object, instant)` pairs are still
    /// an error.
    pub fn from_unsorted(extent: Extent, mut records: Vec<RawRecord>) -> Result<Self> {
        records.sort_by_key(|r| (r.object, r.instant));
        Self::new(extent, records)
    }

    /// Extends the instant range past the last sample.
    pub fn with_horizon(mut self, horizon: u32) -> Result<Self> {
        if horizon < self.horizon {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} ends before the last sample at {}",
                self.horizon - 1
            )));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    /// Number of instants, `0..horizon`.
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn records(&self) -> &[RawRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Per-object runs of records.
    pub fn objects(&self) -> impl Iterator<Item = &[RawRecord]> {
        self.records.chunk_by(|a, b| a.object == b.object)
    }

    /// Largest per-axis displacement per instant, rounded up, between
    /// consecutive samples of any object.
    pub fn max_speed(&self) -> u64 {
        self.records
            .windows(2)
            .filter(|w| w[0].object == w[1].object)
            .map(|w| {
                let dt = (w[1].instant - w[0].instant) as u64;
                let step = w[0].x.abs_diff(w[1].x).max(w[0].y.abs_diff(w[1].y)) as u64;
                step.div_ceil(dt)
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub log: TrajectoryLog,
    pub tree: MbrTree,
}

/// Byte counts of the in-memory structures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SizeBreakdown {
    pub snapshots: usize,
    pub logs: usize,
    pub trees: usize,
    /// Object id table and per-(period, object) log slots.
    pub tables: usize,
}

impl SizeBreakdown {
    pub fn total(&self) -> usize {
        self.snapshots + self.logs + self.trees + self.tables
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactIndex {
    period: u32,
    leaf_capacity: u32,
    extent: Extent,
    horizon: u32,
    max_speed: u64,
    samples: u64,
    ids: Vec<u32>,
    snapshots: Vec<Snapshot>,
    /// `logs[p][slot]` covers instants strictly between `p*d` and `(p+1)*d`.
    logs: Vec<Vec<Option<Box<LogEntry>>>>,
}

struct ObjectParts {
    at_snapshot: Vec<(usize, u32, u32)>,
    entrants: Vec<(usize, u32, u32)>,
    logs: Vec<(usize, LogEntry)>,
}

fn build_object(group: &[RawRecord], d: u32, capacity: u32) -> Result<ObjectParts> {
    let mut parts = ObjectParts { at_snapshot: Vec::new(), entrants: Vec::new(), logs: Vec::new() };
    for run in group.chunk_by(|a, b| a.instant / d == b.instant / d) {
        let p = (run[0].instant / d) as usize;
        let k = p as u32 * d;
        let mut inner = run;
        if run[0].instant == k {
            parts.at_snapshot.push((p, run[0].x, run[0].y));
            inner = &run[1..];
        } else {
            parts.entrants.push((p, run[0].x, run[0].y));
        }
        if inner.is_empty() {
            continue;
        }
        let samples: Vec<Sample> = inner.iter().map(|r| Sample::new(r.instant, r.x, r.y)).collect();
        let log = TrajectoryLog::build(group[0].object, &samples, k, d)?;
        let tree = MbrTree::build(&log, capacity)?;
        parts.logs.push((p, LogEntry { log, tree }));
    }
    Ok(parts)
}

impl ContactIndex {
    pub fn build(data: &Dataset, config: &IndexConfig) -> Result<Self> {
        let d = config.period;
        if d < 2 {
            return Err(Error::Build(format!("snapshot distance {d} must be at least 2")));
        }
        if config.leaf_capacity == 0 {
            return Err(Error::Build("leaf capacity must be at least 1".into()));
        }
        let groups: Vec<&[RawRecord]> = data.objects().collect();
        let ids: Vec<u32> = groups.iter().map(|g| g[0].object).collect();
        let snapshot_count = if data.horizon == 0 { 0 } else { ((data.horizon - 1) / d) as usize + 1 };

        let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(groups.len().max(1));
        let chunk = groups.len().div_ceil(threads).max(1);
        let parts: Vec<ObjectParts> = std::thread::scope(|scope| {
            let handles: Vec<_> = groups
                .chunks(chunk)
                .map(|gs| {
                    scope.spawn(move || {
                        gs.iter().map(|g| build_object(g, d, config.leaf_capacity)).collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("index build worker panicked"))
                .collect::<Result<Vec<Vec<_>>>>()
                .map(|v| v.into_iter().flatten().collect())
        })?;

        let mut present = vec![Vec::new(); snapshot_count];
        let mut entrants = vec![Vec::new(); snapshot_count];
        let mut logs: Vec<Vec<Option<Box<LogEntry>>>> = (0..snapshot_count).map(|_| vec![None; ids.len()]).collect();
        for (slot, part) in parts.into_iter().enumerate() {
            let id = ids[slot];
            for (p, x, y) in part.at_snapshot {
                present[p].push((id, x, y));
            }
            for (p, x, y) in part.entrants {
                entrants[p].push((id, x, y));
            }
            for (p, entry) in part.logs {
                logs[p][slot] = Some(Box::new(entry));
            }
        }
        let snapshots = (0..snapshot_count)
            .map(|p| Snapshot::build_with_entrants(&present[p], &entrants[p], p as u32 * d, data.extent))
            .collect::<Result<Vec<_>>>()?;
        Ok(ContactIndex {
            period: d,
            leaf_capacity: config.leaf_capacity,
            extent: data.extent,
            horizon: data.horizon,
            max_speed: config.max_speed.unwrap_or_else(|| data.max_speed()),
            samples: data.len() as u64,
            ids,
            snapshots,
            logs,
        })
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn leaf_capacity(&self) -> u32 {
        self.leaf_capacity
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn max_speed(&self) -> u64 {
        self.max_speed
    }

    pub fn sample_count(&self) -> u64 {
        self.samples
    }

    /// Object ids, ascending.
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Log of `id` for the period starting at snapshot `p`.
    pub fn log(&self, p: usize, id: u32) -> Result<Option<&LogEntry>> {
        let slot = self.slot(id)?;
        Ok(self.logs.get(p).and_then(|row| row[slot].as_deref()))
    }

    pub fn log_entries(&self) -> impl Iterator<Item = &LogEntry> {
        self.logs.iter().flatten().flatten().map(|e| &**e)
    }

    fn slot(&self, id: u32) -> Result<usize> {
        self.ids.binary_search(&id).map_err(|_| Error::UnknownObject(id))
    }

    fn check_instant(&self, q: u32) -> Result<()> {
        if q >= self.horizon {
            return Err(Error::out_of_bounds(q, 0, (self.horizon as u64).saturating_sub(1)));
        }
        Ok(())
    }

    pub fn object_position(&self, id: u32, q: u32) -> Result<Option<(u32, u32)>> {
        let slot = self.slot(id)?;
        self.check_instant(q)?;
        let p = (q / self.period) as usize;
        let local = q % self.period;
        if local == 0 {
            return Ok(self.snapshots[p].position(id));
        }
        match &self.logs[p][slot] {
            Some(e) => e.log.position(local),
            None => Ok(None),
        }
    }

    /// Samples of `id` with instants in `[b, e]`; `e` may exceed the horizon.
    pub fn trajectory(&self, id: u32, b: u32, e: u32) -> Result<Vec<Sample>> {
        let slot = self.slot(id)?;
        self.check_instant(b)?;
        if b > e {
            return Err(Error::InvalidArgument(format!("interval [{b}, {e}] is empty")));
        }
        let e = e.min(self.horizon - 1);
        let d = self.period;
        let mut out = Vec::new();
        for p in (b / d) as usize..=(e / d) as usize {
            let k = p as u32 * d;
            if k >= b {
                if let Some((x, y)) = self.snapshots[p].position(id) {
                    out.push(Sample::new(k, x, y));
                }
            }
            let (lo, hi) = (b.max(k + 1), e.min(k + d - 1));
            let Some(entry) = self.logs[p][slot].as_ref().filter(|_| lo <= hi) else {
                continue;
            };
            if let Some((from, to)) = entry.log.ordinals_between(lo - k, hi - k) {
                out.extend(entry.log.scan_positions(from, to)?.map(|s| Sample::new(s.instant + k, s.x, s.y)));
            }
        }
        Ok(out)
    }

    /// Objects inside `r` at instant `q`, as `(id, x, y)` sorted by id.
    pub fn time_slice(&self, r: &Rect, q: u32) -> Result<Vec<(u32, u32, u32)>> {
        self.check_instant(q)?;
        let Some(r) = r.clamp_to(self.extent) else {
            return Ok(Vec::new());
        };
        let p = (q / self.period) as usize;
        let k = p as u32 * self.period;
        let snap = &self.snapshots[p];
        let mut out = Vec::new();
        if q == k {
            snap.for_each_in(&r, |e| {
                if e.present {
                    out.push((e.id, e.x, e.y));
                }
            });
        } else if let Some(er) = expanded_region(&r, q, k, self.max_speed, self.extent)? {
            let mut candidates = Vec::new();
            snap.for_each_in(&er, |e| candidates.push(e.id));
            for id in candidates {
                let slot = self.slot(id)?;
                if let Some(entry) = &self.logs[p][slot] {
                    if let Some((x, y)) = entry.log.position(q - k)? {
                        if r.contains(x, y) {
                            out.push((id, x, y));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Objects inside `r` at some instant of `[b, e]`, sorted.
    pub fn time_interval(&self, r: &Rect, b: u32, e: u32) -> Result<Vec<u32>> {
        self.time_interval_with(r, b, e, Pruning::ALL, &mut Probe::default())
    }

    /// [`time_interval`](Self::time_interval) with a choice of tree pruning
    /// rules and cost counters accumulated into `probe`.
    pub fn time_interval_with(
        &self,
        r: &Rect,
        b: u32,
        e: u32,
        pruning: Pruning,
        probe: &mut Probe,
    ) -> Result<Vec<u32>> {
        self.check_instant(b)?;
        if b > e {
            return Err(Error::InvalidArgument(format!("interval [{b}, {e}] is empty")));
        }
        let Some(r) = r.clamp_to(self.extent) else {
            return Ok(Vec::new());
        };
        let e = e.min(self.horizon - 1);
        let d = self.period;
        let mut found = vec![false; self.ids.len()];
        let mut candidates = Vec::new();
        for p in (b / d) as usize..=(e / d) as usize {
            let k = p as u32 * d;
            let snap = &self.snapshots[p];
            if k >= b {
                candidates.clear();
                snap.for_each_in(&r, |en| {
                    if en.present {
                        candidates.push(en.id);
                    }
                });
                for &id in &candidates {
                    found[self.slot(id)?] = true;
                }
            }
            let (lo, hi) = (b.max(k + 1), e.min(k + d - 1));
            if lo > hi {
                continue;
            }
            let Some(er) = expanded_region(&r, hi, k, self.max_speed, self.extent)? else {
                continue;
            };
            candidates.clear();
            snap.for_each_in(&er, |en| candidates.push(en.id));
            for &id in &candidates {
                let slot = self.slot(id)?;
                if found[slot] {
                    continue;
                }
                let Some(entry) = &self.logs[p][slot] else {
                    continue;
                };
                let Some((first, last)) = entry.log.ordinals_between(lo - k, hi - k) else {
                    continue;
                };
                let q = IntervalQuery { region: r, first, last, begin: lo - k, end: hi - k, max_speed: self.max_speed };
                if entry.tree.first_hit(&entry.log, &q, pruning, probe)?.is_some() {
                    found[slot] = true;
                }
            }
        }
        Ok(self.ids.iter().zip(found).filter_map(|(&id, f)| f.then_some(id)).collect())
    }

    pub fn size_breakdown(&self) -> SizeBreakdown {
        let mut s = SizeBreakdown {
            snapshots: self.snapshots.iter().map(Snapshot::size_in_bytes).sum(),
            tables: self.ids.len() * 4 + self.logs.len() * self.ids.len().div_ceil(8),
            ..SizeBreakdown::default()
        };
        for entry in self.log_entries() {
            s.logs += entry.log.size_in_bytes();
            s.trees += entry.tree.size_in_bytes();
        }
        s
    }

    pub fn size_in_bytes(&self) -> usize {
        self.size_breakdown().total()
    }

    /// Size of the same samples as 9-byte binary records.
    pub fn baseline_bytes(&self) -> u64 {
        self.samples * crate::ingest::RECORD_BYTES as u64
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// File layout, all little-endian: magic, version, metadata, id table,
/// snapshot offsets, log offsets (row per snapshot, `u64::MAX` for none),
/// then the encoded structures. Offsets count from the start of the data.
impl Wire for ContactIndex {
    fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        wire::put_u8(out, FORMAT_VERSION);
        for v in [self.period, self.leaf_capacity, self.extent.width, self.extent.height, self.horizon] {
            wire::put_u32(out, v);
        }
        wire::put_u64(out, self.max_speed);
        wire::put_u64(out, self.samples);
        wire::put_u32(out, self.ids.len() as u32);
        wire::put_u32(out, self.snapshots.len() as u32);
        for &id in &self.ids {
            wire::put_u32(out, id);
        }

        let mut data = Vec::new();
        let mut snapshot_offsets = Vec::with_capacity(self.snapshots.len());
        for s in &self.snapshots {
            snapshot_offsets.push(data.len() as u64);
            s.write_to(&mut data);
        }
        let mut log_offsets = Vec::with_capacity(self.logs.len() * self.ids.len());
        for entry in self.logs.iter().flatten() {
            match entry {
                Some(e) => {
                    log_offsets.push(data.len() as u64);
                    e.log.write_to(&mut data);
                    e.tree.write_to(&mut data);
                }
                None => log_offsets.push(NO_LOG),
            }
        }
        for off in snapshot_offsets.iter().chain(&log_offsets) {
            wire::put_u64(out, *off);
        }
        wire::put_u64(out, data.len() as u64);
        out.extend_from_slice(&data);
    }

    fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not an index file (bad magic)".into()));
        }
        let version = r.u8()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("index format version {version} unsupported")));
        }
        let period = r.u32()?;
        let leaf_capacity = r.u32()?;
        let extent = Extent::new(r.u32()?, r.u32()?);
        let horizon = r.u32()?;
        let max_speed = r.u64()?;
        let samples = r.u64()?;
        let n = r.u32()? as usize;
        let snapshot_count = r.u32()? as usize;
        if period < 2 || leaf_capacity == 0 {
            return Err(Error::Format(format!("index: period {period}, leaf capacity {leaf_capacity}")));
        }
        let expected = if horizon == 0 { 0 } else { ((horizon - 1) / period) as usize + 1 };
        if snapshot_count != expected {
            return Err(Error::Format(format!("index: {snapshot_count} snapshots for horizon {horizon}")));
        }
        let table = n.checked_mul(4).and_then(|a| snapshot_count.checked_mul(n + 1)?.checked_mul(8)?.checked_add(a));
        if table.is_none_or(|t| t > r.remaining()) {
            return Err(Error::Format("index: tables exceed input".into()));
        }
        let ids = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("index: id table not strictly increasing".into()));
        }
        let snapshot_offsets = (0..snapshot_count).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let log_offsets = (0..snapshot_count * n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let data_len = r.usize()?;
        let data = r.take(data_len)?;
        let at = |off: u64| -> Result<Reader<'_>> {
            let off = usize::try_from(off).ok().filter(|&o| o <= data.len());
            let off = off.ok_or_else(|| Error::Format("index: offset past end of data".into()))?;
            Ok(Reader::new(&data[off..]))
        };

        let mut snapshots = Vec::with_capacity(snapshot_count);
        for (p, &off) in snapshot_offsets.iter().enumerate() {
            let s = Snapshot::read_from(&mut at(off)?)?;
            if s.instant() != p as u32 * period || s.extent() != extent {
                return Err(Error::Format(format!("index: snapshot {p} has the wrong instant or grid")));
            }
            if s.perm().iter().any(|id| ids.binary_search(id).is_err()) {
                return Err(Error::Format(format!("index: snapshot {p} files an unknown object")));
            }
            snapshots.push(s);
        }
        let mut logs = Vec::with_capacity(snapshot_count);
        for p in 0..snapshot_count {
            let mut row = Vec::with_capacity(n);
            for slot in 0..n {
                let off = log_offsets[p * n + slot];
                if off == NO_LOG {
                    row.push(None);
                    continue;
                }
                let mut rd = at(off)?;
                let log = TrajectoryLog::read_from(&mut rd)?;
                let tree = MbrTree::read_from(&mut rd)?;
                if log.object() != ids[slot]
                    || log.start() != p as u32 * period
                    || log.period() != period
                    || tree.data_count() != log.data_count()
                    || tree.capacity() != leaf_capacity
                {
                    return Err(Error::Format(format!(
                        "index: log of object {} in period {p} is inconsistent",
                        ids[slot]
                    )));
                }
                row.push(Some(Box::new(LogEntry { log, tree })));
            }
            logs.push(row);
        }
        Ok(ContactIndex { period, leaf_capacity, extent, horizon, max_speed, samples, ids, snapshots, logs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbrtree::TraceEvent;

    fn rec(o: u32, t: u32, x: u32, y: u32) -> RawRecord {
        RawRecord::new(o, t, x, y)
    }

    /// One object observed at instants 2..=5 and 8..=10 of the period [0, 13].
    fn worked_example() -> ContactIndex {
        let pts = [(2, 2, 4), (3, 3, 6), (4, 5, 5), (5, 3, 7), (8, 10, 10), (9, 9, 9), (10, 8, 8)];
        let records = pts.iter().map(|&(t, x, y)| rec(7, t, x, y)).collect();
        let data = Dataset::new(Extent::new(16, 16), records).unwrap().with_horizon(14).unwrap();
        ContactIndex::build(&data, &IndexConfig { period: 13, leaf_capacity: 2, max_speed: Some(3) }).unwrap()
    }

    #[test]
    fn worked_example_structure() {
        let ix = worked_example();
        assert_eq!(ix.snapshots().len(), 2);
        assert_eq!(ix.snapshots()[1].instant(), 13);
        assert!(ix.snapshots()[1].is_empty());
        assert_eq!(ix.log_entries().count(), 1);
        let entry = ix.log(0, 7).unwrap().unwrap();
        let gaps: String = entry.log.time().gap_bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        assert_eq!(gaps, "000011000");
        assert_eq!(ix.object_position(7, 9).unwrap(), Some((9, 9)));
        assert_eq!(ix.object_position(7, 0).unwrap(), None);
        assert_eq!(ix.object_position(7, 6).unwrap(), None);
        assert!(matches!(ix.object_position(8, 9), Err(Error::UnknownObject(8))));
        assert!(ix.object_position(7, 14).is_err());
    }

    #[test]
    fn worked_example_interval() {
        let ix = worked_example();
        let r = Rect::new(4, 5, 4, 10);
        assert_eq!(ix.time_interval(&r, 4, 8).unwrap(), vec![7]);
        let mut probe = Probe::traced();
        ix.time_interval_with(&r, 4, 8, Pruning::ALL, &mut probe).unwrap();
        let trace = probe.trace.unwrap();
        assert!(trace.contains(&TraceEvent::Hit { ordinal: 3, instant: 4 }));
        assert_eq!(ix.time_interval(&r, 5, 8).unwrap(), Vec::<u32>::new());
        assert_eq!(ix.time_slice(&r, 4).unwrap(), vec![(7, 5, 5)]);
        assert!(ix.time_slice(&r, 5).unwrap().is_empty());
    }

    #[test]
    fn period_two_and_stitching() {
        let records: Vec<_> = (0..9).map(|t| rec(1, t, t, 8 - t)).chain([rec(2, 4, 0, 0), rec(2, 7, 3, 1)]).collect();
        let data = Dataset::new(Extent::new(9, 9), records.clone()).unwrap();
        let ix = ContactIndex::build(&data, &IndexConfig::new(2, 1)).unwrap();
        let traj = ix.trajectory(1, 0, 100).unwrap();
        let want: Vec<_> = (0..9).map(|t| Sample::new(t, t, 8 - t)).collect();
        assert_eq!(traj, want);
        assert_eq!(ix.trajectory(1, 3, 3).unwrap(), vec![Sample::new(3, 3, 5)]);
        assert_eq!(ix.trajectory(2, 0, 8).unwrap(), vec![Sample::new(4, 0, 0), Sample::new(7, 3, 1)]);
        assert_eq!(ix.trajectory(2, 5, 6).unwrap(), vec![]);
        for t in 0..9 {
            assert_eq!(ix.object_position(1, t).unwrap(), Some((t, 8 - t)));
        }
        assert_eq!(ix.time_interval(&Rect::new(3, 3, 0, 8), 0, 8).unwrap(), vec![1, 2]);
        assert_eq!(ix.time_interval(&Rect::new(3, 3, 1, 1), 5, 6).unwrap(), Vec::<u32>::new());
        assert_eq!(ix.time_interval(&Rect::new(3, 3, 1, 1), 5, 7).unwrap(), vec![2]);
    }

    #[test]
    fn dataset_validation() {
        let e = Extent::new(4, 4);
        assert!(matches!(Dataset::new(e, vec![rec(1, 2, 0, 0), rec(1, 2, 1, 1)]), Err(Error::Build(_))));
        assert!(matches!(Dataset::new(e, vec![rec(1, 3, 0, 0), rec(1, 2, 1, 1)]), Err(Error::Build(_))));
        assert!(matches!(Dataset::new(e, vec![rec(2, 0, 0, 0), rec(1, 2, 1, 1)]), Err(Error::Build(_))));
        assert!(Dataset::new(e, vec![rec(1, 0, 4, 0)]).is_err());
        assert_eq!(Dataset::from_unsorted(e, vec![rec(2, 0, 0, 0), rec(1, 2, 1, 1)]).unwrap().horizon(), 3);
        let d = Dataset::new(e, vec![rec(1, 0, 0, 0), rec(1, 3, 3, 1), rec(2, 0, 0, 0), rec(2, 1, 2, 0)]).unwrap();
        assert_eq!(d.max_speed(), 2);
        assert!(ContactIndex::build(&d, &IndexConfig::new(1, 4)).is_err());
        assert!(ContactIndex::build(&d, &IndexConfig::new(4, 0)).is_err());
    }

    #[test]
    fn file_round_trip() {
        let ix = worked_example();
        let bytes = ix.to_bytes();
        let back = ContactIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back, ix);
        assert_eq!(back.to_bytes(), bytes);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(ContactIndex::from_bytes(&bad), Err(Error::Format(_))));
        assert!(ContactIndex::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
