//! The flow-based utilitarian policy against brute-force enumeration.

use std::collections::BTreeMap;

use fairalloc::policies::allocate_utilitarian;
use fairalloc::{Allocation, CapacityVector, Population};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best total over every assignment in `K^N` that respects capacities.
fn exhaustive_optimum(pop: &Population<f64>, caps: &[usize]) -> f64 {
    let (n, k) = (pop.n(), pop.k());
    let mut best = f64::NEG_INFINITY;
    let mut assignment = vec![0usize; n];
    'outer: loop {
        let mut counts = vec![0usize; k];
        for &s in &assignment {
            counts[s] += 1;
        }
        if counts.iter().zip(caps).all(|(c, cap)| c <= cap) {
            let total: f64 = assignment.iter().enumerate().map(|(i, &s)| pop.utility(i, s)).sum();
            best = best.max(total);
        }
        for slot in assignment.iter_mut() {
            *slot += 1;
            if *slot < k {
                continue 'outer;
            }
            *slot = 0;
        }
        return best;
    }
}

#[test]
fn matches_enumeration_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for draw in 0..500 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=3);
        // Multiples of 1/256 add exactly, so totals compare with ==.
        let utilities: Vec<f64> = (0..n * k).map(|_| rng.random_range(-256..=256) as f64 / 256.0).collect();
        let mut caps = vec![0usize; k];
        for _ in 0..rng.random_range(n..=n + 3) {
            caps[rng.random_range(0..k)] += 1;
        }
        let groups = BTreeMap::from([("g".to_string(), (0..n).map(|i| i % 2 == 1).collect())]);
        let pop = Population::new(n, k, utilities, groups).unwrap();
        let caps_v = CapacityVector::new(caps.clone());
        let alloc: Allocation = allocate_utilitarian(&pop, &caps_v, 1e7).unwrap();
        alloc.validate(&pop, &caps_v).unwrap();
        assert_eq!(alloc.total_utility(&pop), exhaustive_optimum(&pop, &caps), "draw {draw}: caps {caps:?}");
    }
}
