//! Arenas, vertex sets, attractor fixpoints, and region removal.
//!
//! An arena is a finite directed graph whose vertices are partitioned between
//! Player 0 and Player 1, with a designated initial vertex and no terminal
//! vertices. All vertex sets are bit-indexed over `[0, n)` so that the
//! attractor fixpoint runs in time linear in the number of edges.

use std::collections::VecDeque;

use thiserror::Error;

/// The two players. Player 0 minimizes play values, Player 1 maximizes them.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Player> {
        match i {
            0 => Some(Player::Zero),
            1 => Some(Player::One),
            _ => None,
        }
    }
}

/// A set of vertices over a fixed domain `[0, n)`, stored as a bitmap with a
/// cached cardinality. Membership tests are constant time.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexSet {
    bits: Vec<u64>,
    domain: usize,
    count: usize,
}

impl VertexSet {
    pub fn empty(domain: usize) -> VertexSet {
        VertexSet {
            bits: vec![0; domain.div_ceil(64)],
            domain,
            count: 0,
        }
    }

    pub fn full(domain: usize) -> VertexSet {
        let mut s = VertexSet::empty(domain);
        for v in 0..domain {
            s.insert(v);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(domain: usize, iter: I) -> VertexSet {
        let mut s = VertexSet::empty(domain);
        for v in iter {
            s.insert(v);
        }
        s
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.domain);
        self.bits[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.domain, "vertex {v} out of domain {}", self.domain);
        let (w, m) = (v / 64, 1u64 << (v % 64));
        if self.bits[w] & m == 0 {
            self.bits[w] |= m;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, v: usize) -> bool {
        assert!(v < self.domain);
        let (w, m) = (v / 64, 1u64 << (v % 64));
        if self.bits[w] & m != 0 {
            self.bits[w] &= !m;
            self.count -= 1;
            true
        } else {
            false
        }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        assert_eq!(self.domain, other.domain);
        let mut count = 0;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
            count += a.count_ones() as usize;
        }
        self.count = count;
    }

    pub fn complement(&self) -> VertexSet {
        let mut s = VertexSet::empty(self.domain);
        for v in 0..self.domain {
            if !self.contains(v) {
                s.insert(v);
            }
        }
        s
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        assert_eq!(self.domain, other.domain);
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        assert_eq!(self.domain, other.domain);
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.domain).filter(move |&v| self.contains(v))
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ArenaError {
    #[error("vertex {vertex} has no successors")]
    Terminal { vertex: usize },
    #[error("successor index {target} of vertex {vertex} out of range")]
    EdgeOutOfRange { vertex: usize, target: usize },
    #[error("duplicate successor {target} of vertex {vertex}")]
    DuplicateEdge { vertex: usize, target: usize },
    #[error("initial vertex {initial} out of range")]
    InitialOutOfRange { initial: usize },
    #[error("arena must have at least one vertex")]
    Empty,
}

/// A finite game graph: per-vertex owner, ordered successor lists in CSR
/// form (plus a predecessor index for backward fixpoints), and an initial
/// vertex. Immutable after construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Arena {
    owner: Vec<Player>,
    succ_off: Vec<usize>,
    succ: Vec<usize>,
    pred_off: Vec<usize>,
    pred: Vec<usize>,
    initial: usize,
}

impl Arena {
    /// Builds an arena, checking that every vertex has at least one
    /// successor, all indices are in range, and successor lists contain no
    /// duplicates. Successor order is preserved as given.
    pub fn new(
        owner: Vec<Player>,
        successors: Vec<Vec<usize>>,
        initial: usize,
    ) -> Result<Arena, ArenaError> {
        let n = owner.len();
        if n == 0 {
            return Err(ArenaError::Empty);
        }
        assert_eq!(successors.len(), n, "owner/successor length mismatch");
        if initial >= n {
            return Err(ArenaError::InitialOutOfRange { initial });
        }
        let mut seen = vec![usize::MAX; n];
        for (v, list) in successors.iter().enumerate() {
            if list.is_empty() {
                return Err(ArenaError::Terminal { vertex: v });
            }
            for &t in list {
                if t >= n {
                    return Err(ArenaError::EdgeOutOfRange { vertex: v, target: t });
                }
                if seen[t] == v {
                    return Err(ArenaError::DuplicateEdge { vertex: v, target: t });
                }
                seen[t] = v;
            }
        }

        let mut succ_off = Vec::with_capacity(n + 1);
        let mut succ = Vec::new();
        succ_off.push(0);
        for list in &successors {
            succ.extend_from_slice(list);
            succ_off.push(succ.len());
        }

        let mut pred_count = vec![0usize; n];
        for &t in &succ {
            pred_count[t] += 1;
        }
        let mut pred_off = Vec::with_capacity(n + 1);
        pred_off.push(0);
        for v in 0..n {
            pred_off.push(pred_off[v] + pred_count[v]);
        }
        let mut pred = vec![0usize; succ.len()];
        let mut cursor = pred_off.clone();
        for v in 0..n {
            for &t in &successors[v] {
                pred[cursor[t]] = v;
                cursor[t] += 1;
            }
        }

        Ok(Arena {
            owner,
            succ_off,
            succ,
            pred_off,
            pred,
            initial,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.owner.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[self.succ_off[v]..self.succ_off[v + 1]]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[self.pred_off[v]..self.pred_off[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.succ_off[v + 1] - self.succ_off[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).contains(&v)
    }

    /// Position of edge `(u, v)` in the flat successor array, usable as a
    /// dense edge id.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.successors(u)
            .iter()
            .position(|&t| t == v)
            .map(|p| self.succ_off[u] + p)
    }

    /// The same arena with a different initial vertex.
    pub fn with_initial(&self, initial: usize) -> Arena {
        assert!(initial < self.vertex_count());
        let mut a = self.clone();
        a.initial = initial;
        a
    }
}

/// Result of an attractor computation: the attractor set, a partial
/// positional strategy for the attracting player defined on
/// `(attr \ X) ∩ V_i`, and the fixpoint level at which each vertex entered.
#[derive(Clone, Debug)]
pub struct AttractorResult {
    pub set: VertexSet,
    pub strategy: Vec<Option<usize>>,
    pub level: Vec<Option<usize>>,
}

/// Computes the set of vertices from which `player` can force a visit to
/// `target`, in time linear in the edge count. Per-opponent-vertex
/// remaining-outdegree counters drive the fixpoint; the prescribed strategy
/// move always strictly decreases the entry level, breaking ties towards the
/// lowest entry level and then the lowest vertex index.
pub fn attractor(arena: &Arena, player: Player, target: &VertexSet) -> AttractorResult {
    let n = arena.vertex_count();
    assert_eq!(target.domain(), n, "target domain must match the arena");

    let mut set = VertexSet::empty(n);
    let mut level: Vec<Option<usize>> = vec![None; n];
    let mut remaining: Vec<usize> = (0..n).map(|v| arena.out_degree(v)).collect();
    let mut queue = VecDeque::new();

    for v in target.iter() {
        set.insert(v);
        level[v] = Some(0);
        queue.push_back(v);
    }

    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for &u in arena.predecessors(v) {
            if set.contains(u) {
                continue;
            }
            let joins = if arena.owner(u) == player {
                true
            } else {
                remaining[u] -= 1;
                remaining[u] == 0
            };
            if joins {
                set.insert(u);
                level[u] = Some(lv + 1);
                queue.push_back(u);
            }
        }
    }

    let mut strategy = vec![None; n];
    for v in set.iter() {
        if arena.owner(v) != player || level[v] == Some(0) {
            continue;
        }
        let lv = level[v].unwrap();
        let mut best: Option<(usize, usize)> = None;
        for &t in arena.successors(v) {
            if let Some(lt) = level[t] {
                if lt < lv && best.map_or(true, |b| (lt, t) < b) {
                    best = Some((lt, t));
                }
            }
        }
        strategy[v] = Some(best.expect("attractor vertex without decreasing move").1);
    }

    AttractorResult { set, strategy, level }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RemoveError {
    #[error("initial vertex lies in the removed region")]
    InitialRemoved,
    #[error("vertex {vertex} would lose all successors")]
    DeadEnd { vertex: usize },
}

/// A sub-arena together with the index mappings between the original and the
/// restricted vertex space.
#[derive(Clone, Debug)]
pub struct RemovalResult {
    pub arena: Arena,
    pub kept: VertexSet,
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

impl RemovalResult {
    /// Maps a set over the sub-arena back to the original index space.
    pub fn lift_set(&self, sub: &VertexSet) -> VertexSet {
        let mut out = VertexSet::empty(self.old_to_new.len());
        for s in sub.iter() {
            out.insert(self.new_to_old[s]);
        }
        out
    }

    /// Restricts a set over the original arena to the sub-arena.
    pub fn restrict_set(&self, set: &VertexSet) -> VertexSet {
        let mut out = VertexSet::empty(self.new_to_old.len());
        for v in set.iter() {
            if let Some(s) = self.old_to_new[v] {
                out.insert(s);
            }
        }
        out
    }
}

/// Removes `region` from the arena, keeping only edges between surviving
/// vertices. The caller is expected to pass an attractor (so the remainder
/// has no dead ends); a `DeadEnd` error signals that this was violated.
pub fn remove_region(arena: &Arena, region: &VertexSet) -> Result<RemovalResult, RemoveError> {
    if region.contains(arena.initial()) {
        return Err(RemoveError::InitialRemoved);
    }
    remove_region_impl(arena, region, arena.initial())
}

/// Region removal for solver internals that classify every start vertex:
/// when the original initial vertex is removed, the sub-arena is re-rooted
/// at the lowest-index survivor. Returns `None` if nothing survives.
pub(crate) fn remove_region_rerooted(
    arena: &Arena,
    region: &VertexSet,
) -> Option<RemovalResult> {
    let root = if region.contains(arena.initial()) {
        (0..arena.vertex_count()).find(|&v| !region.contains(v))?
    } else {
        arena.initial()
    };
    Some(remove_region_impl(arena, region, root).expect("attractor removal left a dead end"))
}

fn remove_region_impl(
    arena: &Arena,
    region: &VertexSet,
    root: usize,
) -> Result<RemovalResult, RemoveError> {
    let n = arena.vertex_count();
    assert_eq!(region.domain(), n);

    let mut old_to_new = vec![None; n];
    let mut new_to_old = Vec::new();
    for v in 0..n {
        if !region.contains(v) {
            old_to_new[v] = Some(new_to_old.len());
            new_to_old.push(v);
        }
    }

    let mut owner = Vec::with_capacity(new_to_old.len());
    let mut successors = Vec::with_capacity(new_to_old.len());
    for &v in &new_to_old {
        let list: Vec<usize> = arena
            .successors(v)
            .iter()
            .filter_map(|&t| old_to_new[t])
            .collect();
        if list.is_empty() {
            return Err(RemoveError::DeadEnd { vertex: v });
        }
        owner.push(arena.owner(v));
        successors.push(list);
    }

    let kept = region.complement();
    let arena = Arena::new(owner, successors, old_to_new[root].unwrap())
        .expect("restriction of a valid arena is valid");
    Ok(RemovalResult {
        arena,
        kept,
        old_to_new,
        new_to_old,
    })
}
