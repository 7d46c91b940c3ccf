// SPDX-License-Identifier: Apache-2.0

//! Compressed in-memory index for trajectories of many objects sampled on a
//! shared regular clock.
//!
//! Every `d` instants a [`snapshot::Snapshot`] stores all object positions in
//! a k²-tree. Between snapshots each object gets a [`log::TrajectoryLog`]:
//! a presence bitmap and per-axis signed difference streams coded as Elias-Fano
//! partial sums, giving constant-time access to any position. A
//! [`mbrtree::MbrTree`] over each log answers "was the object inside this
//! rectangle during this interval" without decoding most positions.

pub mod engine;
pub mod error;
pub mod geom;
pub mod ingest;
pub mod log;
pub mod mbrtree;
pub mod oracle;
pub mod snapshot;
pub mod succinct;
pub mod synth;

pub use engine::{ContactIndex, Dataset, IndexConfig};
pub use error::{Error, Result};
pub use geom::{Extent, Rect};
