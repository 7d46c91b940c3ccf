// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// Grid size in cells; valid coordinates are `0..width` by `0..height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Extent {
    pub width: u32,
    pub height: u32,
}

impl Extent {
    pub fn new(width: u32, height: u32) -> Self {
        Extent { width, height }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height
    }

    pub fn full(&self) -> Rect {
        Rect::new(0, self.width.saturating_sub(1), 0, self.height.saturating_sub(1))
    }

    pub fn cells(&self) -> u64 {
        self.width as u64 * self.height as u64
    }
}

/// Closed axis-aligned rectangle `[x1, x2] x [y1, y2]` in grid cells. Used
/// both for query regions and for bounding boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x1: u32,
    pub x2: u32,
    pub y1: u32,
    pub y2: u32,
}

pub type Region = Rect;
pub type Mbr = Rect;

impl Rect {
    pub fn new(x1: u32, x2: u32, y1: u32, y2: u32) -> Self {
        debug_assert!(x1 <= x2 && y1 <= y2, "degenerate rect [{x1},{x2}]x[{y1},{y2}]");
        Rect { x1, x2, y1, y2 }
    }

    pub fn checked(x1: u32, x2: u32, y1: u32, y2: u32) -> Result<Self> {
        if x1 > x2 || y1 > y2 {
            return Err(Error::InvalidArgument(format!("empty rectangle [{x1},{x2}]x[{y1},{y2}]")));
        }
        Ok(Rect { x1, x2, y1, y2 })
    }

    pub fn point(x: u32, y: u32) -> Self {
        Rect { x1: x, x2: x, y1: y, y2: y }
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.x1 <= x && x <= self.x2 && self.y1 <= y && y <= self.y2
    }

    #[inline]
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x1 <= other.x2 && other.x1 <= self.x2 && self.y1 <= other.y2 && other.y1 <= self.y2
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x1 <= other.x1 && other.x2 <= self.x2 && self.y1 <= other.y1 && other.y2 <= self.y2
    }

    pub fn expand_to(&mut self, x: u32, y: u32) {
        self.x1 = self.x1.min(x);
        self.x2 = self.x2.max(x);
        self.y1 = self.y1.min(y);
        self.y2 = self.y2.max(y);
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x1: self.x1.min(other.x1),
            x2: self.x2.max(other.x2),
            y1: self.y1.min(other.y1),
            y2: self.y2.max(other.y2),
        }
    }

    /// Intersection with the grid, `None` when the rectangle lies outside it.
    pub fn clamp_to(&self, extent: Extent) -> Option<Rect> {
        if extent.width == 0 || extent.height == 0 || self.x1 >= extent.width || self.y1 >= extent.height {
            return None;
        }
        Some(Rect { x1: self.x1, x2: self.x2.min(extent.width - 1), y1: self.y1, y2: self.y2.min(extent.height - 1) })
    }

    /// Largest per-axis gap between the two rectangles (0 when they meet).
    #[inline]
    pub fn chebyshev_gap(&self, other: &Rect) -> u64 {
        let gx = axis_gap(self.x1, self.x2, other.x1, other.x2);
        let gy = axis_gap(self.y1, self.y2, other.y1, other.y2);
        gx.max(gy)
    }
}

#[inline]
fn axis_gap(a1: u32, a2: u32, b1: u32, b2: u32) -> u64 {
    if a2 < b1 {
        (b1 - a2) as u64
    } else if b2 < a1 {
        (a1 - b2) as u64
    } else {
        0
    }
}
