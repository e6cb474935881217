//! Random instance generation for tests and fuzzing. All generators are
//! deterministic functions of the supplied RNG.

use rand::prelude::*;

use crate::arena::{Arena, Player, VertexSet};
use crate::memory::MemoryStructure;

/// A random arena with up to `max_vertices` vertices and out-degrees in
/// `1..=max_degree`.
pub fn random_arena<R: Rng>(rng: &mut R, max_vertices: usize, max_degree: usize) -> Arena {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let owner = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Player::Zero
            } else {
                Player::One
            }
        })
        .collect();
    let successors = (0..n)
        .map(|_| {
            let deg = rng.gen_range(1..=max_degree.min(n));
            let mut targets: Vec<usize> = (0..n).collect();
            targets.shuffle(rng);
            targets.truncate(deg);
            targets
        })
        .collect();
    Arena::new(owner, successors, rng.gen_range(0..n)).unwrap()
}

/// A random total memory structure with `states` states.
pub fn random_memory<R: Rng>(rng: &mut R, vertex_count: usize, states: usize) -> MemoryStructure {
    let table = (0..states * vertex_count)
        .map(|_| rng.gen_range(0..states))
        .collect();
    MemoryStructure::new(states, rng.gen_range(0..states), vertex_count, table).unwrap()
}

/// A random edge-valid play prefix from the arena's initial vertex, of
/// length in `1..=max_len`.
pub fn random_prefix<R: Rng>(rng: &mut R, arena: &Arena, max_len: usize) -> Vec<usize> {
    let len = rng.gen_range(1..=max_len.max(1));
    let mut v = arena.initial();
    let mut out = vec![v];
    for _ in 1..len {
        let succ = arena.successors(v);
        v = succ[rng.gen_range(0..succ.len())];
        out.push(v);
    }
    out
}

/// A random subset of `[0, domain)` where each vertex is included with
/// probability `p`.
pub fn random_set<R: Rng>(rng: &mut R, domain: usize, p: f64) -> VertexSet {
    VertexSet::from_iter(domain, (0..domain).filter(|_| rng.gen_bool(p)))
}

/// Random per-vertex ranks in `0..=max_rank`.
pub fn random_ranks<R: Rng>(rng: &mut R, vertex_count: usize, max_rank: u64) -> Vec<u64> {
    (0..vertex_count).map(|_| rng.gen_range(0..=max_rank)).collect()
}
