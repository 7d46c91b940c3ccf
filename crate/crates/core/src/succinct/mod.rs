// SPDX-License-Identifier: Apache-2.0

//! Rank/select bitmaps, Elias-Fano sequences and unary partial sums.
//!
//! All public rank and select methods use 1-based positions and ordinals;
//! `rank(0)` is defined and equal to 0.

mod bits;
mod elias_fano;
mod intvec;
mod unary;
pub mod wire;

pub use bits::{BitCursor, BitVector};
pub(crate) use bits::{Bits, BitsShape};
pub use elias_fano::{EfCursor, EliasFano, SparseBitVector};
pub(crate) use elias_fano::{EfShape, Sparse};
pub use intvec::{bit_width, IntVector};
pub(crate) use unary::Deltas;
pub use unary::{DeltaCursor, UnaryDeltaStream};
pub use wire::{Reader, Wire};
