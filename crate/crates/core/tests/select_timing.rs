// SPDX-License-Identifier: Apache-2.0

//! Sparse select latency does not depend on the position of the element.

use std::hint::black_box;
use std::time::Instant;

use contact::succinct::SparseBitVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: usize = 10_000_000;

fn time_select(sv: &SparseBitVector, ordinals: &[usize]) -> f64 {
    let t = Instant::now();
    let mut acc = 0usize;
    for &j in ordinals {
        acc = acc.wrapping_add(sv.select1(black_box(j)).unwrap());
    }
    black_box(acc);
    t.elapsed().as_nanos() as f64 / ordinals.len() as f64
}

#[test]
fn first_and_last_element_cost_the_same() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut p = 0usize;
    let positions: Vec<usize> = (0..M)
        .map(|_| {
            p += rng.gen_range(1..=20);
            p
        })
        .collect();
    let sv = SparseBitVector::from_positions(p + 7, &positions).unwrap();
    assert_eq!(sv.select1(1).unwrap(), positions[0]);
    assert_eq!(sv.select1(M).unwrap(), positions[M - 1]);

    let first = vec![1; 200_000];
    let last = vec![M; 200_000];
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..15 {
        a = a.min(time_select(&sv, &first));
        b = b.min(time_select(&sv, &last));
    }
    let ratio = a.max(b) / a.min(b);
    println!("select1(1) {a:.1} ns, select1(m) {b:.1} ns, ratio {ratio:.2}");
    assert!(ratio < 2.0, "select1(1) {a:.1} ns vs select1(m) {b:.1} ns");
}
