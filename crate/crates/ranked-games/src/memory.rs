//! Memory structures, expanded arenas, memory products, and play extension.
//!
//! A memory structure is a deterministic finite transducer over the vertices
//! of an arena. By convention the initial memory state already accounts for
//! the first vertex of a play, so running a memory over the one-vertex prefix
//! `v_I` yields the initial state unchanged.

use std::collections::HashMap;
use std::hash::Hash;

use thiserror::Error;

use crate::arena::{Arena, Player};
use crate::play::UpPlay;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("empty play prefix")]
    EmptyPrefix,
    #[error("memory table entry out of range")]
    TableOutOfRange,
}

/// A deterministic transducer `(M, m_I, Upd)` with a dense, total update
/// table over `states × vertices`.
///
/// Table entries for `(state, vertex)` pairs that cannot occur along any
/// edge-valid play prefix may be filled with a self-loop; such entries are
/// never exercised by `run_update` on valid prefixes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MemoryStructure {
    states: usize,
    initial: usize,
    vertex_count: usize,
    table: Vec<usize>,
}

impl MemoryStructure {
    pub fn new(
        states: usize,
        initial: usize,
        vertex_count: usize,
        table: Vec<usize>,
    ) -> Result<MemoryStructure, MemoryError> {
        assert_eq!(table.len(), states * vertex_count);
        if initial >= states || table.iter().any(|&m| m >= states) {
            return Err(MemoryError::TableOutOfRange);
        }
        Ok(MemoryStructure {
            states,
            initial,
            vertex_count,
            table,
        })
    }

    /// The single-state memory that ignores its input.
    pub fn trivial(vertex_count: usize) -> MemoryStructure {
        MemoryStructure {
            states: 1,
            initial: 0,
            vertex_count,
            table: vec![0; vertex_count],
        }
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn update(&self, state: usize, vertex: usize) -> usize {
        self.table[state * self.vertex_count + vertex]
    }

    /// Folds the update function over a play prefix: the first vertex maps to
    /// the initial state, every further vertex steps the state.
    pub fn run_update(&self, prefix: &[usize]) -> Result<usize, MemoryError> {
        if prefix.is_empty() {
            return Err(MemoryError::EmptyPrefix);
        }
        let mut m = self.initial;
        for &v in &prefix[1..] {
            m = self.update(m, v);
        }
        Ok(m)
    }
}

/// The expanded arena `A × M`: an arena over the pair states `(v, m)`
/// reachable from the seed pairs, with projections back to vertices and
/// memory states. Pair `((v, m), (v', m'))` is an edge exactly when
/// `(v, v')` is an edge and the memory maps `m` to `m'` on reading `v'`.
#[derive(Clone, Debug)]
pub struct ProductArena {
    pub arena: Arena,
    pairs: Vec<(usize, usize)>,
    pair_index: HashMap<(usize, usize), usize>,
    full_size: usize,
    base_vertex_count: usize,
}

impl ProductArena {
    pub fn vertex_of(&self, pair: usize) -> usize {
        self.pairs[pair].0
    }

    pub fn state_of(&self, pair: usize) -> usize {
        self.pairs[pair].1
    }

    pub fn pair_index(&self, vertex: usize, state: usize) -> Option<usize> {
        self.pair_index.get(&(vertex, state)).copied()
    }

    /// Size of the full Cartesian product `n · k`.
    pub fn full_size(&self) -> usize {
        self.full_size
    }

    /// Number of reachable pair states.
    pub fn reachable_size(&self) -> usize {
        self.pairs.len()
    }

    pub fn base_vertex_count(&self) -> usize {
        self.base_vertex_count
    }

    /// Projects a set of pair states to base vertices.
    pub fn project_set(&self, pairs: &crate::arena::VertexSet) -> crate::arena::VertexSet {
        let mut out = crate::arena::VertexSet::empty(self.base_vertex_count);
        for p in pairs.iter() {
            out.insert(self.vertex_of(p));
        }
        out
    }
}

/// Builds the reachable part of `A × M` from the given seed pairs. The first
/// seed becomes the initial vertex of the product arena.
pub fn product_arena_from_seeds(
    arena: &Arena,
    memory: &MemoryStructure,
    seeds: &[(usize, usize)],
) -> ProductArena {
    assert_eq!(memory.vertex_count(), arena.vertex_count());
    assert!(!seeds.is_empty());

    let mut pairs = Vec::new();
    let mut pair_index = HashMap::new();
    let mut worklist = Vec::new();
    for &(v, m) in seeds {
        if let std::collections::hash_map::Entry::Vacant(e) = pair_index.entry((v, m)) {
            e.insert(pairs.len());
            pairs.push((v, m));
            worklist.push(pairs.len() - 1);
        }
    }

    let mut successors: Vec<Vec<usize>> = Vec::new();
    let mut cursor = 0;
    while cursor < pairs.len() {
        let p = cursor;
        cursor += 1;
        let (v, m) = pairs[p];
        let mut list = Vec::with_capacity(arena.out_degree(v));
        for &t in arena.successors(v) {
            let mt = memory.update(m, t);
            let q = *pair_index.entry((t, mt)).or_insert_with(|| {
                pairs.push((t, mt));
                pairs.len() - 1
            });
            if !list.contains(&q) {
                list.push(q);
            }
        }
        successors.push(list);
        debug_assert_eq!(successors.len(), p + 1);
    }

    let owner = pairs.iter().map(|&(v, _)| arena.owner(v)).collect();
    let product = Arena::new(owner, successors, 0).expect("product of valid arena is valid");
    ProductArena {
        arena: product,
        full_size: arena.vertex_count() * memory.state_count(),
        base_vertex_count: arena.vertex_count(),
        pairs,
        pair_index,
    }
}

/// The expanded arena reachable from `(v_I, m_I)`.
pub fn product_arena(arena: &Arena, memory: &MemoryStructure) -> ProductArena {
    product_arena_from_seeds(arena, memory, &[(arena.initial(), memory.initial())])
}

/// Pairs a memory `M1` over `A` with a memory `M2` over `A × M1` into a
/// single memory over `A`. States are flattened as `m1 · |M2| + m2`, so the
/// identities `(v, m1, m2) = ((v, m1), m2)` hold by index arithmetic.
///
/// Satisfies the composition law: running the product over a prefix equals
/// running `M1`, extending the prefix into `A × M1`, and running `M2` over
/// the extension.
pub fn product_memory(
    m1: &MemoryStructure,
    product: &ProductArena,
    m2: &MemoryStructure,
) -> MemoryStructure {
    assert_eq!(m2.vertex_count(), product.arena.vertex_count());
    let n = m1.vertex_count();
    let (k1, k2) = (m1.state_count(), m2.state_count());
    let mut table = vec![0usize; k1 * k2 * n];
    for s1 in 0..k1 {
        for s2 in 0..k2 {
            let flat = s1 * k2 + s2;
            for v in 0..n {
                let t1 = m1.update(s1, v);
                // Pairs that never occur along an edge-valid prefix keep m2.
                let t2 = match product.pair_index(v, t1) {
                    Some(p) => m2.update(s2, p),
                    None => s2,
                };
                table[flat * n + v] = t1 * k2 + t2;
            }
        }
    }
    MemoryStructure::new(
        k1 * k2,
        m1.initial() * k2 + m2.initial(),
        n,
        table,
    )
    .expect("product table is closed by construction")
}

/// Extends a finite play prefix into the product arena, returning the pair
/// state indices position by position.
pub fn extend_prefix(
    memory: &MemoryStructure,
    product: &ProductArena,
    prefix: &[usize],
) -> Vec<usize> {
    assert!(!prefix.is_empty());
    let mut m = memory.initial();
    let mut out = Vec::with_capacity(prefix.len());
    out.push(
        product
            .pair_index(prefix[0], m)
            .expect("prefix start not a product seed"),
    );
    for &v in &prefix[1..] {
        m = memory.update(m, v);
        out.push(
            product
                .pair_index(v, m)
                .expect("extension left the reachable product"),
        );
    }
    out
}

/// The unique extension of an ultimately periodic play into the product
/// arena. The input cycle is unrolled until the memory state at the lap
/// boundary repeats, so the extended period divides `|cycle| · |M|`.
pub fn extend_play(memory: &MemoryStructure, product: &ProductArena, play: &UpPlay) -> UpPlay {
    let mut m = memory.initial();
    let mut out = Vec::new();
    let mut started = false;
    let push = |m: &mut usize, started: &mut bool, v: usize, out: &mut Vec<usize>| {
        if *started {
            *m = memory.update(*m, v);
        } else {
            // The first vertex of a play maps to the initial state.
            *started = true;
        }
        out.push(
            product
                .pair_index(v, *m)
                .expect("extension left the reachable product"),
        );
    };
    for &v in play.prefix() {
        push(&mut m, &mut started, v, &mut out);
    }
    let cycle = play.cycle();
    // The boundary behavior differs before anything was read, so the flag
    // is part of the repetition key.
    let mut seen: HashMap<(bool, usize), usize> = HashMap::new();
    loop {
        if let Some(&start) = seen.get(&(started, m)) {
            let prefix = out[..start].to_vec();
            let cycle = out[start..].to_vec();
            return UpPlay::new(prefix, cycle);
        }
        seen.insert((started, m), out.len());
        for &v in cycle {
            push(&mut m, &mut started, v, &mut out);
        }
    }
}

/// Online definition of a memory structure: a state type plus the transition
/// behavior. Used to build reachable-only memories and their products
/// without materializing exponential state spaces.
pub trait MemoryOracle {
    type State: Clone + Eq + Hash;

    /// State after reading the first vertex of a play.
    fn start(&self, vertex: usize) -> Self::State;

    /// State after reading `vertex` in `state`, where `from` is the vertex
    /// the play is moving away from.
    fn step(&self, state: &Self::State, from: usize, vertex: usize) -> Self::State;
}

/// A reachable-only memory structure built from an oracle, together with the
/// expanded arena it induces and the interned oracle states.
pub struct BuiltMemory<S> {
    pub memory: MemoryStructure,
    pub product: ProductArena,
    pub states: Vec<S>,
    /// Product pair index of `(v, start(v))` for each seeded start vertex.
    pub start_pairs: Vec<(usize, usize)>,
}

/// Explores the pairs `(v, s)` reachable from the seed vertices, interning
/// oracle states into dense indices. With `all_starts` every vertex is
/// seeded with its start state, which is what per-start-vertex solvers need;
/// otherwise only the arena's initial vertex is seeded.
pub fn build_memory_product<O: MemoryOracle>(
    arena: &Arena,
    oracle: &O,
    all_starts: bool,
) -> BuiltMemory<O::State> {
    let n = arena.vertex_count();
    let mut states: Vec<O::State> = Vec::new();
    let mut state_index: HashMap<O::State, usize> = HashMap::new();
    let mut intern = |s: O::State, states: &mut Vec<O::State>| -> usize {
        if let Some(&i) = state_index.get(&s) {
            i
        } else {
            let i = states.len();
            state_index.insert(s.clone(), i);
            states.push(s);
            i
        }
    };

    let starts: Vec<usize> = if all_starts {
        (0..n).collect()
    } else {
        vec![arena.initial()]
    };
    let mut seeds = Vec::with_capacity(starts.len());
    // Seed the arena's initial vertex first so it roots the product.
    let mut ordered = starts.clone();
    if let Some(pos) = ordered.iter().position(|&v| v == arena.initial()) {
        ordered.swap(0, pos);
    }
    for &v in &ordered {
        let s = intern(oracle.start(v), &mut states);
        seeds.push((v, s));
    }

    // Reachable pair exploration, recording exercised transitions.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
    for &(v, s) in &seeds {
        if let std::collections::hash_map::Entry::Vacant(e) = pair_index.entry((v, s)) {
            e.insert(pairs.len());
            pairs.push((v, s));
        }
    }
    let mut transitions: HashMap<(usize, usize), usize> = HashMap::new();
    let mut successors: Vec<Vec<usize>> = Vec::new();
    let mut cursor = 0;
    while cursor < pairs.len() {
        let (v, s) = pairs[cursor];
        cursor += 1;
        let mut list = Vec::with_capacity(arena.out_degree(v));
        for &t in arena.successors(v) {
            let st = match transitions.get(&(s, t)) {
                Some(&st) => st,
                None => {
                    let next = oracle.step(&states[s], v, t);
                    let st = intern(next, &mut states);
                    transitions.insert((s, t), st);
                    st
                }
            };
            let q = *pair_index.entry((t, st)).or_insert_with(|| {
                pairs.push((t, st));
                pairs.len() - 1
            });
            if !list.contains(&q) {
                list.push(q);
            }
        }
        successors.push(list);
    }

    let k = states.len();
    let mut table = vec![0usize; k * n];
    for s in 0..k {
        for v in 0..n {
            // Unexercised entries self-loop; they are unreachable along
            // edge-valid prefixes.
            table[s * n + v] = transitions.get(&(s, v)).copied().unwrap_or(s);
        }
    }
    let initial_state = seeds[0].1;
    let memory = MemoryStructure::new(k, initial_state, n, table).expect("interned table closed");

    let owner: Vec<Player> = pairs.iter().map(|&(v, _)| arena.owner(v)).collect();
    let succ = successors;
    let product_arena = Arena::new(owner, succ, 0).expect("product of valid arena is valid");
    let product = ProductArena {
        arena: product_arena,
        full_size: n * k,
        base_vertex_count: n,
        pairs: pairs.clone(),
        pair_index,
    };

    let start_pairs = seeds;
    BuiltMemory {
        memory,
        product,
        states,
        start_pairs,
    }
}
