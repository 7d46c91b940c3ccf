// SPDX-License-Identifier: Apache-2.0

//! Seeded random-walk fleets for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Extent;
use crate::ingest::RawRecord;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    /// Per-axis step drawn uniformly from `-max..=max`.
    Uniform { max: u32 },
    /// Per-axis magnitude geometric on `0, 1, 2, ...` with the given mean,
    /// random sign.
    Geometric { mean: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FleetSpec {
    pub objects: u32,
    pub instants: u32,
    pub extent: Extent,
    pub step: Step,
    /// Expected fraction of unobserved instants.
    pub missing: f64,
    /// Unobserved instants come in runs of `1..=max_gap_run`.
    pub max_gap_run: u32,
    pub seed: u64,
}

impl FleetSpec {
    pub fn new(objects: u32, instants: u32, extent: Extent, seed: u64) -> Self {
        FleetSpec { objects, instants, extent, step: Step::Uniform { max: 3 }, missing: 0.05, max_gap_run: 8, seed }
    }
}

/// Id of the `i`-th generated object; deliberately not `i`.
pub fn object_id(i: u32) -> u32 {
    7 * i + 3
}

fn reflect(v: i64, size: u32) -> u32 {
    let top = size as i64 - 1;
    if top <= 0 {
        return 0;
    }
    let period = 2 * top;
    let m = v.rem_euclid(period);
    (if m > top { period - m } else { m }) as u32
}

fn draw(rng: &mut ChaCha8Rng, step: Step) -> i64 {
    match step {
        Step::Uniform { max } => rng.gen_range(-(max as i64)..=max as i64),
        Step::Geometric { mean } => {
            let p = 1.0 / (mean + 1.0);
            let mut k = 0i64;
            while !rng.gen_bool(p) {
                k += 1;
            }
            if rng.gen_bool(0.5) {
                -k
            } else {
                k
            }
        }
    }
}

/// Records sorted by object, then instant. Objects keep moving while
/// unobserved, so speed across gaps stays bounded by the step law.
pub fn fleet(spec: &FleetSpec) -> Vec<RawRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mean_run = (1 + spec.max_gap_run) as f64 / 2.0;
    let start_gap = if spec.missing <= 0.0 || spec.max_gap_run == 0 {
        0.0
    } else {
        (spec.missing / (mean_run * (1.0 - spec.missing))).min(1.0)
    };
    let mut out = Vec::with_capacity((spec.objects as usize) * (spec.instants as usize));
    for i in 0..spec.objects {
        let id = object_id(i);
        let mut x = rng.gen_range(0..spec.extent.width.max(1)) as i64;
        let mut y = rng.gen_range(0..spec.extent.height.max(1)) as i64;
        let mut hidden = 0u32;
        let mut seen = true;
        for t in 0..spec.instants {
            if t > 0 {
                x = reflect(x + draw(&mut rng, spec.step), spec.extent.width) as i64;
                y = reflect(y + draw(&mut rng, spec.step), spec.extent.height) as i64;
            }
            // Runs never touch, so every gap is at most `max_gap_run` long.
            if hidden == 0 && seen && start_gap > 0.0 && rng.gen_bool(start_gap) {
                hidden = rng.gen_range(1..=spec.max_gap_run);
            }
            seen = hidden == 0;
            if hidden > 0 {
                hidden -= 1;
                continue;
            }
            out.push(RawRecord::new(id, t, x as u32, y as u32));
        }
    }
    out
}
