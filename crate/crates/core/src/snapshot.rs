// SPDX-License-Identifier: Apache-2.0

//! Positions of every object at one sampled instant.
//!
//! Occupied cells are kept in a k²-tree with k = 2 over the grid padded to a
//! power-of-two square. Leaves enumerate occupied cells in Morton order, and
//! `perm` lists the objects cell by cell in that same order. `cell_counts`
//! writes each cell's object count in unary (`count - 1` zeros, then a one).

use crate::error::{Error, Result};
use crate::geom::{Extent, Rect};
use crate::succinct::wire;
use crate::succinct::{bit_width, BitVector, IntVector, Reader, Wire};

const ARITY: u32 = 2;
const BLOCK: usize = (ARITY * ARITY) as usize;

/// Occupancy matrix of a grid as a pointer-free quadtree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K2Tree {
    extent: Extent,
    height: u32,
    /// Internal levels 1..height-1, concatenated in level order.
    levels: BitVector,
    /// Last level; one bit per cell of each visited 2x2 block.
    leaves: BitVector,
}

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

#[inline]
fn morton(x: u32, y: u32) -> u64 {
    spread(x) | (spread(y) << 1)
}

fn height_for(extent: Extent) -> u32 {
    let side = extent.width.max(extent.height).max(2).next_power_of_two();
    side.trailing_zeros()
}

impl K2Tree {
    /// Builds the tree over a sorted, duplicate-free list of Morton codes.
    fn from_codes(extent: Extent, codes: &[u64]) -> Self {
        let height = height_for(extent);
        let mut levels = Vec::new();
        let mut leaves = Vec::new();
        if !codes.is_empty() {
            for level in 1..=height {
                let shift = 2 * (height - level);
                let out = if level == height { &mut leaves } else { &mut levels };
                let mut parent = None;
                let mut prev = None;
                for &z in codes {
                    let prefix = z >> shift;
                    if prev == Some(prefix) {
                        continue;
                    }
                    prev = Some(prefix);
                    if parent != Some(prefix >> 2) {
                        parent = Some(prefix >> 2);
                        out.extend([false; BLOCK]);
                    }
                    let at = out.len() - BLOCK + (prefix & 3) as usize;
                    out[at] = true;
                }
            }
        }
        K2Tree { extent, height, levels: BitVector::from_bits(levels), leaves: BitVector::from_bits(leaves) }
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn arity(&self) -> u32 {
        ARITY
    }

    /// Number of 2x2 splits from the root to a cell.
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Side of the padded square grid.
    pub fn side(&self) -> u32 {
        1 << self.height
    }

    pub fn levels(&self) -> &BitVector {
        &self.levels
    }

    pub fn leaves(&self) -> &BitVector {
        &self.leaves
    }

    pub fn occupied_cells(&self) -> usize {
        self.leaves.count_ones()
    }

    /// Start of the child block of the node whose bit sits at `pos` in the
    /// concatenation of `levels` and `leaves`; `None` for a leaf or a zero bit.
    pub fn children(&self, pos: usize) -> Option<usize> {
        if pos >= self.levels.len() || !self.levels.bit(pos) {
            return None;
        }
        Some(BLOCK * self.levels.rank1_at(pos + 1))
    }

    fn bit(&self, pos: usize) -> bool {
        let t = self.levels.len();
        if pos < t {
            self.levels.bit(pos)
        } else {
            self.leaves.bit(pos - t)
        }
    }

    /// Calls `f(cell_index, x, y)` for every occupied cell inside `r`, in
    /// Morton order. `cell_index` is the cell's 0-based leaf rank.
    pub fn range<F: FnMut(usize, u32, u32)>(&self, r: &Rect, mut f: F) {
        if self.leaves.is_empty() {
            return;
        }
        self.descend(0, 1, 0, 0, r, &mut f);
    }

    fn descend<F: FnMut(usize, u32, u32)>(&self, start: usize, level: u32, x0: u32, y0: u32, r: &Rect, f: &mut F) {
        let half = 1u32 << (self.height - level);
        for c in 0..BLOCK {
            let cx = x0 + (c as u32 & 1) * half;
            let cy = y0 + (c as u32 >> 1) * half;
            let pos = start + c;
            if cx > r.x2 || cy > r.y2 || cx + (half - 1) < r.x1 || cy + (half - 1) < r.y1 || !self.bit(pos) {
                continue;
            }
            if level == self.height {
                let leaf = pos - self.levels.len();
                f(self.leaves.rank1_at(leaf), cx, cy);
            } else {
                let child = BLOCK * self.levels.rank1_at(pos + 1);
                self.descend(child, level + 1, cx, cy, r, f);
            }
        }
    }

    /// Coordinates of the occupied cell with 0-based leaf rank `cell`.
    pub fn cell_position(&self, cell: usize) -> Result<(u32, u32)> {
        if cell >= self.occupied_cells() {
            return Err(Error::not_found(cell, self.occupied_cells()));
        }
        let mut pos = self.levels.len() + self.leaves.select1_at(cell + 1);
        let (mut x, mut y) = (0u32, 0u32);
        let mut shift = 0;
        loop {
            let c = (pos % BLOCK) as u32;
            x |= (c & 1) << shift;
            y |= (c >> 1) << shift;
            shift += 1;
            let block = pos / BLOCK;
            if block == 0 {
                break;
            }
            pos = self.levels.select1_at(block);
        }
        Ok((x, y))
    }

    pub fn size_in_bytes(&self) -> usize {
        self.levels.size_in_bytes() + self.leaves.size_in_bytes()
    }
}

/// An object located by a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub id: u32,
    pub x: u32,
    pub y: u32,
    /// False for a period entrant: the object has no sample at the snapshot
    /// instant and is filed at its first position later in the period.
    pub present: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    instant: u32,
    tree: K2Tree,
    perm: Vec<u32>,
    cell_counts: BitVector,
    present: BitVector,
    /// Indices into `perm`, sorted by id.
    by_id: IntVector,
}

impl Snapshot {
    /// Snapshot of objects that all have a sample at `instant`.
    pub fn build(positions: &[(u32, u32, u32)], instant: u32, extent: Extent) -> Result<Self> {
        Self::build_with_entrants(positions, &[], instant, extent)
    }

    /// `entrants` are filed like `positions` but flagged as not present.
    pub fn build_with_entrants(
        positions: &[(u32, u32, u32)],
        entrants: &[(u32, u32, u32)],
        instant: u32,
        extent: Extent,
    ) -> Result<Self> {
        let mut all: Vec<(u64, u32, bool)> = Vec::with_capacity(positions.len() + entrants.len());
        for (list, present) in [(positions, true), (entrants, false)] {
            for &(id, x, y) in list {
                if !extent.contains(x, y) {
                    return Err(Error::Build(format!(
                        "object {id} at ({x},{y}) lies outside the {}x{} grid",
                        extent.width, extent.height
                    )));
                }
                all.push((morton(x, y), id, present));
            }
        }
        all.sort_unstable();

        let mut codes: Vec<u64> = all.iter().map(|e| e.0).collect();
        let ends: Vec<bool> = (0..all.len()).map(|i| all.get(i + 1).is_none_or(|n| n.0 != all[i].0)).collect();
        codes.dedup();
        let perm: Vec<u32> = all.iter().map(|e| e.1).collect();
        let by_id = index_by_id(&perm)?;
        Ok(Snapshot {
            instant,
            tree: K2Tree::from_codes(extent, &codes),
            perm,
            cell_counts: BitVector::from_bits(ends),
            present: BitVector::from_bits(all.iter().map(|e| e.2)),
            by_id,
        })
    }

    pub fn instant(&self) -> u32 {
        self.instant
    }

    pub fn extent(&self) -> Extent {
        self.tree.extent
    }

    pub fn tree(&self) -> &K2Tree {
        &self.tree
    }

    /// Object ids in leaf order.
    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn cell_counts(&self) -> &BitVector {
        &self.cell_counts
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Objects with an actual sample at the snapshot instant.
    pub fn present_count(&self) -> usize {
        self.present.count_ones()
    }

    fn entry(&self, idx: usize, x: u32, y: u32) -> Entry {
        Entry { id: self.perm[idx], x, y, present: self.present.bit(idx) }
    }

    /// Objects of cell `cell` as a range of `perm` indices.
    fn cell_members(&self, cell: usize) -> std::ops::Range<usize> {
        let start = if cell == 0 { 0 } else { self.cell_counts.select1_at(cell) + 1 };
        start..self.cell_counts.select1_at(cell + 1) + 1
    }

    /// Calls `f` for each object filed inside `r`.
    pub fn for_each_in<F: FnMut(Entry)>(&self, r: &Rect, mut f: F) {
        self.tree.range(r, |cell, x, y| {
            for idx in self.cell_members(cell) {
                f(self.entry(idx, x, y));
            }
        });
    }

    /// Every object filed inside `r`, entrants included.
    pub fn range_report(&self, r: &Rect) -> Vec<Entry> {
        let mut out = Vec::new();
        self.for_each_in(r, |e| out.push(e));
        out
    }

    /// Where `id` is filed, if it is in this snapshot.
    pub fn lookup(&self, id: u32) -> Option<Entry> {
        let n = self.by_id.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.perm[self.by_id.get(mid) as usize] < id {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == n {
            return None;
        }
        let idx = self.by_id.get(lo) as usize;
        if self.perm[idx] != id {
            return None;
        }
        let cell = self.cell_counts.rank1_at(idx);
        let (x, y) = self.tree.cell_position(cell).expect("cell of a filed object exists");
        Some(self.entry(idx, x, y))
    }

    /// Position of `id` if it has a sample at the snapshot instant.
    pub fn position(&self, id: u32) -> Option<(u32, u32)> {
        self.lookup(id).filter(|e| e.present).map(|e| (e.x, e.y))
    }

    pub fn size_in_bytes(&self) -> usize {
        self.tree.size_in_bytes()
            + self.perm.len() * 4
            + self.cell_counts.size_in_bytes()
            + self.present.size_in_bytes()
            + self.by_id.size_in_bytes()
    }
}

fn index_by_id(perm: &[u32]) -> Result<IntVector> {
    let mut order: Vec<u64> = (0..perm.len() as u64).collect();
    order.sort_unstable_by_key(|&i| perm[i as usize]);
    if let Some(w) = order.windows(2).find(|w| perm[w[0] as usize] == perm[w[1] as usize]) {
        return Err(Error::Build(format!("object {} filed twice in a snapshot", perm[w[0] as usize])));
    }
    Ok(IntVector::with_width(&order, bit_width(perm.len() as u64)))
}

/// Rectangle that holds every position from which `r` can be reached by
/// instant `q` starting at instant `k`, moving at most `s` cells per instant
/// on each axis. Clipped to the grid; `None` when nothing in the grid
/// qualifies.
pub fn expanded_region(r: &Rect, q: u32, k: u32, s: u64, extent: Extent) -> Result<Option<Rect>> {
    if q < k {
        return Err(Error::InvalidArgument(format!("instant {q} precedes snapshot {k}")));
    }
    let grow = s.saturating_mul((q - k) as u64).min(u32::MAX as u64) as u32;
    let er = Rect {
        x1: r.x1.saturating_sub(grow),
        x2: r.x2.saturating_add(grow),
        y1: r.y1.saturating_sub(grow),
        y2: r.y2.saturating_add(grow),
    };
    Ok(er.clamp_to(extent))
}

impl Wire for Snapshot {
    fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u8(out, wire::VERSION);
        wire::put_u32(out, ARITY);
        wire::put_u32(out, self.tree.extent.width);
        wire::put_u32(out, self.tree.extent.height);
        wire::put_u32(out, self.instant);
        self.tree.levels.write_to(out);
        self.tree.leaves.write_to(out);
        wire::put_u64(out, self.perm.len() as u64);
        for &id in &self.perm {
            wire::put_u32(out, id);
        }
        self.cell_counts.write_to(out);
        self.present.write_to(out);
    }

    fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        r.version("snapshot")?;
        let arity = r.u32()?;
        if arity != ARITY {
            return Err(Error::Format(format!("snapshot: arity {arity} unsupported")));
        }
        let extent = Extent::new(r.u32()?, r.u32()?);
        let instant = r.u32()?;
        let levels = BitVector::read_from(r)?;
        let leaves = BitVector::read_from(r)?;
        let n = r.usize()?;
        if n.checked_mul(4).is_none_or(|b| b > r.remaining()) {
            return Err(Error::Format(format!("snapshot: {n} ids exceed input")));
        }
        let perm = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let cell_counts = BitVector::read_from(r)?;
        let present = BitVector::read_from(r)?;
        let bad = |m: &str| Err(Error::Format(format!("snapshot at {instant}: {m}")));
        if levels.len() % BLOCK != 0 || leaves.len() % BLOCK != 0 {
            return bad("level bitmaps are not whole blocks");
        }
        if leaves.is_empty() != levels.is_empty() && height_for(extent) > 1 {
            return bad("tree levels do not match");
        }
        // Every one in `levels` opens exactly one block further down.
        let blocks_below = (levels.len() + leaves.len()) / BLOCK;
        if !leaves.is_empty() && levels.count_ones() + 1 != blocks_below {
            return bad("child blocks do not match internal ones");
        }
        if cell_counts.len() != n || present.len() != n || cell_counts.count_ones() != leaves.count_ones() {
            return bad("id list does not match occupied cells");
        }
        if n > 0 && !cell_counts.bit(n - 1) {
            return bad("last cell is not terminated");
        }
        let by_id = index_by_id(&perm).map_err(|e| Error::Format(format!("snapshot at {instant}: {e}")))?;
        let tree = K2Tree { extent, height: height_for(extent), levels, leaves };
        Ok(Snapshot { instant, tree, perm, cell_counts, present, by_id })
    }
}
