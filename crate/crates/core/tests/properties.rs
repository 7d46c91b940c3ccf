// SPDX-License-Identifier: Apache-2.0

//! Engine answers against the brute-force table on small random fleets.

use contact::engine::{ContactIndex, Dataset, IndexConfig};
use contact::geom::{Extent, Rect};
use contact::mbrtree::{Probe, Pruning};
use contact::oracle::{oracle_interval, oracle_slice, PositionTable};
use contact::synth::{fleet, FleetSpec, Step};
use proptest::prelude::*;

fn rect(extent: Extent, (x, y, w, h): (u32, u32, u32, u32)) -> Rect {
    let x1 = x % extent.width;
    let y1 = y % extent.height;
    Rect::new(x1, (x1 + w).min(extent.width - 1), y1, (y1 + h).min(extent.height - 1))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn engine_matches_oracle(
        seed in any::<u64>(),
        objects in 1u32..8,
        instants in 2u32..90,
        period in 2u32..20,
        leaf in 1u32..6,
        wide in any::<bool>(),
        missing in 0.0f64..0.4,
        boxes in proptest::collection::vec((any::<u32>(), any::<u32>(), 0u32..12, 0u32..12, any::<u32>(), 0u32..30), 12),
    ) {
        let extent = Extent::new(24, 17);
        let step = if wide { Step::Geometric { mean: 3.0 } } else { Step::Uniform { max: 1 } };
        let spec = FleetSpec { step, missing, max_gap_run: 5, ..FleetSpec::new(objects, instants, extent, seed) };
        let records = fleet(&spec);
        prop_assume!(!records.is_empty());
        let data = Dataset::new(extent, records.clone()).unwrap();
        let ix = ContactIndex::build(&data, &IndexConfig::new(period, leaf)).unwrap();
        let table = PositionTable::new(&records, ix.horizon()).unwrap();
        let reloaded = {
            let dir = std::env::temp_dir().join(format!("contact-prop-{}-{seed}", std::process::id()));
            ix.save(&dir).unwrap();
            let back = ContactIndex::load(&dir).unwrap();
            std::fs::remove_file(&dir).unwrap();
            back
        };

        for &id in table.ids() {
            for q in 0..ix.horizon() {
                prop_assert_eq!(ix.object_position(id, q).unwrap(), table.position(id, q), "object {} at {}", id, q);
            }
            let all: Vec<_> = ix.trajectory(id, 0, ix.horizon() + 5).unwrap().iter().map(|s| (s.instant, s.x, s.y)).collect();
            prop_assert_eq!(all, table.trajectory(id, 0, ix.horizon()));
        }
        for &(x, y, w, h, b, len) in &boxes {
            let r = rect(extent, (x, y, w, h));
            let b = b % ix.horizon();
            let e = (b + len).min(ix.horizon() - 1);
            prop_assert_eq!(ix.time_slice(&r, b).unwrap(), oracle_slice(&table, &r, b));
            let want = oracle_interval(&table, &r, b, e);
            prop_assert_eq!(&ix.time_interval(&r, b, e).unwrap(), &want, "{:?} [{}, {}]", r, b, e);
            let bare = ix.time_interval_with(&r, b, e, Pruning { mbr: false, speed: false }, &mut Probe::default()).unwrap();
            prop_assert_eq!(&bare, &want);
            prop_assert_eq!(&reloaded.time_interval(&r, b, e).unwrap(), &want);
        }
    }
}
