// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference answers. Everything here is a plain loop over an
//! uncompressed table and deliberately avoids the index code paths.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::ingest::RawRecord;

pub const MAX_SAMPLES: usize = 10_000_000;

/// Dense `object x instant` table of optional positions.
#[derive(Clone, Debug)]
pub struct PositionTable {
    ids: Vec<u32>,
    horizon: u32,
    cells: Vec<Vec<Option<(u32, u32)>>>,
}

fn inside(r: &Rect, x: u32, y: u32) -> bool {
    r.x1 <= x && x <= r.x2 && r.y1 <= y && y <= r.y2
}

impl PositionTable {
    /// Records in any order; a repeated `(object, instant)` keeps the last.
    pub fn new(records: &[RawRecord], horizon: u32) -> Result<Self> {
        if records.len() > MAX_SAMPLES {
            return Err(Error::InvalidArgument(format!("oracle limited to {MAX_SAMPLES} samples")));
        }
        let ids: Vec<u32> = records.iter().map(|r| r.object).collect::<BTreeSet<_>>().into_iter().collect();
        let mut cells = vec![vec![None; horizon as usize]; ids.len()];
        for r in records {
            if r.instant >= horizon {
                return Err(Error::InvalidArgument(format!("sample at {} beyond horizon {horizon}", r.instant)));
            }
            let row = ids.binary_search(&r.object).unwrap();
            cells[row][r.instant as usize] = Some((r.x, r.y));
        }
        Ok(PositionTable { ids, horizon, cells })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn position(&self, id: u32, q: u32) -> Option<(u32, u32)> {
        let row = self.ids.binary_search(&id).ok()?;
        self.cells[row].get(q as usize).copied().flatten()
    }

    pub fn trajectory(&self, id: u32, b: u32, e: u32) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        let Ok(row) = self.ids.binary_search(&id) else {
            return out;
        };
        for t in b..=e.min(self.horizon.saturating_sub(1)) {
            if let Some((x, y)) = self.cells[row][t as usize] {
                out.push((t, x, y));
            }
        }
        out
    }

    /// Largest per-axis displacement per instant, rounded up.
    pub fn max_speed(&self) -> u64 {
        let mut s = 0;
        for row in &self.cells {
            let mut last: Option<(usize, u32, u32)> = None;
            for (t, c) in row.iter().enumerate() {
                if let Some((x, y)) = *c {
                    if let Some((t0, x0, y0)) = last {
                        let step = x.abs_diff(x0).max(y.abs_diff(y0)) as u64;
                        s = s.max(step.div_ceil((t - t0) as u64));
                    }
                    last = Some((t, x, y));
                }
            }
        }
        s
    }
}

/// Objects inside `r` at `q` with their positions, sorted by id.
pub fn oracle_slice(table: &PositionTable, r: &Rect, q: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for (row, &id) in table.ids.iter().enumerate() {
        if let Some(Some((x, y))) = table.cells[row].get(q as usize) {
            if inside(r, *x, *y) {
                out.push((id, *x, *y));
            }
        }
    }
    out
}

/// Objects inside `r` at some instant of `[b, e]`, sorted.
pub fn oracle_interval(table: &PositionTable, r: &Rect, b: u32, e: u32) -> Vec<u32> {
    let mut out = BTreeSet::new();
    for q in b..=e {
        for (id, _, _) in oracle_slice(table, r, q) {
            out.insert(id);
        }
    }
    out.into_iter().collect()
}

/// Bounding box of `points[range]`.
pub fn oracle_mbr(points: &[(u32, u32)], range: std::ops::Range<usize>) -> Result<Rect> {
    let slice = points.get(range.clone()).filter(|s| !s.is_empty());
    let Some(slice) = slice else {
        return Err(Error::InvalidArgument(format!("empty or invalid range {range:?}")));
    };
    let mut b = Rect { x1: u32::MAX, x2: 0, y1: u32::MAX, y2: 0 };
    for &(x, y) in slice {
        b.x1 = b.x1.min(x);
        b.x2 = b.x2.max(x);
        b.y1 = b.y1.min(y);
        b.y2 = b.y2.max(y);
    }
    Ok(b)
}

/// Uncompressed heap-ordered box tree: entry `p` (1-based, `0` unused) is
/// the box of the points covered by node `p`, or `None` past the data.
pub fn shadow_tree(points: &[(u32, u32)], capacity: usize) -> Vec<Option<Rect>> {
    let used = points.len().div_ceil(capacity).max(1);
    let mut leaves = 1;
    while leaves < used {
        leaves *= 2;
    }
    let mut out = vec![None; 2 * leaves];
    let mut depth_start = 1;
    let mut span = leaves * capacity;
    while depth_start < 2 * leaves {
        for p in depth_start..2 * depth_start {
            let lo = (p - depth_start) * span;
            let hi = (lo + span).min(points.len());
            if lo < hi {
                out[p] = Some(oracle_mbr(points, lo..hi).unwrap());
            }
        }
        depth_start *= 2;
        span /= 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_and_empty() {
        let recs = [RawRecord::new(5, 0, 1, 1), RawRecord::new(3, 0, 9, 9), RawRecord::new(3, 2, 0, 0)];
        let t = PositionTable::new(&recs, 3).unwrap();
        let all = Rect { x1: 0, x2: 9, y1: 0, y2: 9 };
        assert_eq!(oracle_slice(&t, &all, 0), vec![(3, 9, 9), (5, 1, 1)]);
        assert_eq!(oracle_slice(&t, &all, 1), vec![]);
        assert_eq!(oracle_interval(&t, &all, 1, 2), vec![3]);
        assert_eq!(oracle_interval(&t, &Rect { x1: 2, x2: 3, y1: 2, y2: 3 }, 0, 2), Vec::<u32>::new());
        assert_eq!(oracle_interval(&t, &all, 0, 0), vec![3, 5]);
        assert_eq!(t.max_speed(), 5);
        let empty = PositionTable::new(&[], 10).unwrap();
        assert!(oracle_slice(&empty, &all, 4).is_empty());
        assert!(PositionTable::new(&recs, 2).is_err());
    }

    #[test]
    fn boxes() {
        let pts = [(2, 4), (3, 6), (5, 5), (3, 7), (10, 10), (9, 9), (8, 8)];
        assert_eq!(oracle_mbr(&pts, 0..7).unwrap(), Rect { x1: 2, x2: 10, y1: 4, y2: 10 });
        assert_eq!(oracle_mbr(&pts, 2..3).unwrap(), Rect { x1: 5, x2: 5, y1: 5, y2: 5 });
        assert!(oracle_mbr(&pts, 3..3).is_err());
        assert!(oracle_mbr(&pts, 5..9).is_err());
        let tree = shadow_tree(&pts, 2);
        assert_eq!(tree.len(), 8);
        assert_eq!(tree[2], Some(Rect { x1: 2, x2: 5, y1: 4, y2: 7 }));
        assert_eq!(tree[3], Some(Rect { x1: 8, x2: 10, y1: 8, y2: 10 }));
        assert_eq!(tree[7], Some(Rect { x1: 8, x2: 8, y1: 8, y2: 8 }));
    }
}
