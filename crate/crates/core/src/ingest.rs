// SPDX-License-Identifier: Apache-2.0

//! Reading raw samples and cleaning them onto the regular instant grid.
//!
//! Text input has four comma-separated integer columns: object, instant, x,
//! y. Binary input is a sequence of 9-byte little-endian records: object
//! (2 bytes), instant (2), x (2), y (3).

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::geom::Extent;

pub const RECORD_BYTES: usize = 9;
pub const DEFAULT_MAX_SPEED: u64 = 55;
pub const DEFAULT_MAX_GAP: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawRecord {
    pub object: u32,
    pub instant: u32,
    pub x: u32,
    pub y: u32,
}

impl RawRecord {
    pub fn new(object: u32, instant: u32, x: u32, y: u32) -> Self {
        RawRecord { object, instant, x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizeConfig {
    /// Cells per instant on each axis.
    pub max_speed: u64,
    /// Runs of fewer than this many missing instants are interpolated.
    pub max_gap: u32,
    pub extent: Extent,
}

impl NormalizeConfig {
    pub fn new(extent: Extent) -> Self {
        NormalizeConfig { max_speed: DEFAULT_MAX_SPEED, max_gap: DEFAULT_MAX_GAP, extent }
    }
}

pub fn parse_csv<R: BufRead>(input: R) -> Result<Vec<RawRecord>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: n + 1, msg };
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let mut v = [0u32; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|e| bad(format!("field {f:?}: {e}")))?;
        }
        out.push(RawRecord::new(v[0], v[1], v[2], v[3]));
    }
    Ok(out)
}

pub fn write_csv<W: Write>(mut out: W, records: &[RawRecord]) -> Result<()> {
    for r in records {
        writeln!(out, "{},{},{},{}", r.object, r.instant, r.x, r.y)?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_binary<R: Read>(mut input: R) -> Result<Vec<RawRecord>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % RECORD_BYTES != 0 {
        let whole = bytes.len() / RECORD_BYTES;
        return Err(Error::Format(format!(
            "truncated record {} ({} of {RECORD_BYTES} bytes)",
            whole + 1,
            bytes.len() - whole * RECORD_BYTES
        )));
    }
    Ok(bytes
        .chunks_exact(RECORD_BYTES)
        .map(|b| {
            let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]) as u32;
            RawRecord::new(u16_at(0), u16_at(2), u16_at(4), u32::from_le_bytes([b[6], b[7], b[8], 0]))
        })
        .collect())
}

pub fn write_binary<W: Write>(mut out: W, records: &[RawRecord]) -> Result<()> {
    let mut buf = Vec::with_capacity(records.len() * RECORD_BYTES);
    for r in records {
        if r.object > 0xffff || r.instant > 0xffff || r.x > 0xffff || r.y > 0xff_ffff {
            return Err(Error::InvalidArgument(format!("record {r:?} exceeds the binary field widths")));
        }
        buf.extend_from_slice(&(r.object as u16).to_le_bytes());
        buf.extend_from_slice(&(r.instant as u16).to_le_bytes());
        buf.extend_from_slice(&(r.x as u16).to_le_bytes());
        buf.extend_from_slice(&r.y.to_le_bytes()[..3]);
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

#[inline]
fn too_fast(prev: &RawRecord, next: &RawRecord, s: u64) -> bool {
    let dt = (next.instant - prev.instant) as u64;
    let limit = s.saturating_mul(dt);
    (next.x.abs_diff(prev.x) as u64) > limit || (next.y.abs_diff(prev.y) as u64) > limit
}

/// Drops every sample that moves faster than `s` cells per instant on some
/// axis relative to the previous kept sample of the same object.
pub fn speed_filter(records: &[RawRecord], s: u64) -> Vec<RawRecord> {
    let mut last: HashMap<u32, RawRecord> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match last.get(&r.object) {
            Some(prev) if too_fast(prev, r, s) => continue,
            _ => {
                last.insert(r.object, *r);
                out.push(*r);
            }
        }
    }
    out
}

/// `a + (b - a) * num / den` rounded to the nearest integer, halves going
/// toward `a`.
fn lerp(a: u32, b: u32, num: u64, den: u64) -> u32 {
    let span = a.abs_diff(b) as u64 * num;
    let step = ((2 * span + den - 1) / (2 * den)) as u32;
    if b >= a {
        a + step
    } else {
        a - step
    }
}

/// Fills runs of `m` missing instants with `0 < m < g` by rounded linear
/// interpolation on each axis. Output is sorted by object, then instant.
pub fn interpolate_gaps(records: &[RawRecord], g: u32) -> Vec<RawRecord> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.object, r.instant));
    let mut out = Vec::with_capacity(sorted.len());
    for (i, r) in sorted.iter().enumerate() {
        if let Some(prev) = i.checked_sub(1).map(|j| sorted[j]).filter(|p| p.object == r.object) {
            let missing = r.instant - prev.instant - 1;
            if missing > 0 && missing < g {
                let den = (r.instant - prev.instant) as u64;
                for t in prev.instant + 1..r.instant {
                    let num = (t - prev.instant) as u64;
                    out.push(RawRecord::new(r.object, t, lerp(prev.x, r.x, num, den), lerp(prev.y, r.y, num, den)));
                }
            }
        }
        out.push(*r);
    }
    out
}

/// Sorts, removes repeated instants (first occurrence wins), filters by
/// speed and interpolates short gaps.
pub fn normalize(mut records: Vec<RawRecord>, config: &NormalizeConfig) -> Result<Vec<RawRecord>> {
    if config.max_speed == 0 {
        return Err(Error::InvalidArgument("maximum speed must be positive".into()));
    }
    if let Some(r) = records.iter().find(|r| !config.extent.contains(r.x, r.y)) {
        return Err(Error::InvalidArgument(format!(
            "record {r:?} lies outside the {}x{} grid",
            config.extent.width, config.extent.height
        )));
    }
    records.sort_by_key(|r| (r.object, r.instant));
    records.dedup_by_key(|r| (r.object, r.instant));
    let kept = speed_filter(&records, config.max_speed);
    Ok(interpolate_gaps(&kept, config.max_gap))
}
