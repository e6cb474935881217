//! Plays, strategies, simulation, and consistency.
//!
//! Ultimately periodic plays (`prefix · cycle^ω`) are the universal play
//! representation here: every cost evaluator in this crate is defined on
//! them, and every pair of finite-state strategies induces one.

use std::collections::HashMap;

use thiserror::Error;

use crate::arena::{Arena, Player, VertexSet};
use crate::memory::MemoryStructure;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PlayError {
    #[error("play does not start at the expected vertex")]
    WrongStart,
    #[error("no edge from {from} to {to}")]
    NotAnEdge { from: usize, to: usize },
    #[error("cycle must be nonempty")]
    EmptyCycle,
    #[error("prefix must be nonempty")]
    EmptyPrefix,
}

/// A finite play prefix: a nonempty vertex sequence that starts at the
/// expected start vertex and follows edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PlayPrefix {
    vertices: Vec<usize>,
}

impl PlayPrefix {
    pub fn new(arena: &Arena, start: usize, vertices: Vec<usize>) -> Result<PlayPrefix, PlayError> {
        if vertices.is_empty() {
            return Err(PlayError::EmptyPrefix);
        }
        if vertices[0] != start {
            return Err(PlayError::WrongStart);
        }
        for w in vertices.windows(2) {
            if !arena.has_edge(w[0], w[1]) {
                return Err(PlayError::NotAnEdge { from: w[0], to: w[1] });
            }
        }
        Ok(PlayPrefix { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }
}

/// An ultimately periodic play `prefix · cycle^ω`.
///
/// The representation is canonical: the cycle is reduced to its primitive
/// period and any overlap between the end of the prefix and the end of the
/// cycle is rotated into the cycle, yielding the unique shortest-prefix form
/// of the underlying infinite word. Equality on `UpPlay` is therefore
/// equality of plays.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UpPlay {
    prefix: Vec<usize>,
    cycle: Vec<usize>,
}

impl UpPlay {
    /// Builds a play and canonicalizes it. The cycle must be nonempty.
    pub fn new(prefix: Vec<usize>, cycle: Vec<usize>) -> UpPlay {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        let mut play = UpPlay { prefix, cycle };
        play.canonicalize();
        play
    }

    /// Validates edge consistency (including the prefix-to-cycle seam and
    /// the cycle wrap) and the start anchor.
    pub fn validate(&self, arena: &Arena, start: usize) -> Result<(), PlayError> {
        if self.first_vertex() != start {
            return Err(PlayError::WrongStart);
        }
        let word: Vec<usize> = self.prefix.iter().chain(&self.cycle).copied().collect();
        for w in word.windows(2) {
            if !arena.has_edge(w[0], w[1]) {
                return Err(PlayError::NotAnEdge { from: w[0], to: w[1] });
            }
        }
        let last = *self.cycle.last().unwrap();
        if !arena.has_edge(last, self.cycle[0]) {
            return Err(PlayError::NotAnEdge { from: last, to: self.cycle[0] });
        }
        Ok(())
    }

    fn canonicalize(&mut self) {
        // Primitive period.
        let k = self.cycle.len();
        'period: for p in 1..k {
            if k % p != 0 {
                continue;
            }
            for i in p..k {
                if self.cycle[i] != self.cycle[i % p] {
                    continue 'period;
                }
            }
            self.cycle.truncate(p);
            break;
        }
        // Rotate shared tail out of the prefix: q·x (y…x)^ω = q (x y…)^ω.
        while let Some(&last) = self.prefix.last() {
            if last == *self.cycle.last().unwrap() {
                self.prefix.pop();
                self.cycle.rotate_right(1);
            } else {
                break;
            }
        }
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    pub fn first_vertex(&self) -> usize {
        *self.prefix.first().unwrap_or(&self.cycle[0])
    }

    /// Vertex at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The set of vertices occurring at all.
    pub fn visited_set(&self, domain: usize) -> VertexSet {
        VertexSet::from_iter(domain, self.prefix.iter().chain(&self.cycle).copied())
    }

    /// The set of vertices occurring infinitely often: exactly the cycle's
    /// vertex set.
    pub fn inf_set(&self, domain: usize) -> VertexSet {
        VertexSet::from_iter(domain, self.cycle.iter().copied())
    }
}

/// One chosen successor per owned vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PositionalStrategy {
    pub player: Player,
    pub moves: Vec<Option<usize>>,
}

impl PositionalStrategy {
    pub fn new(player: Player, moves: Vec<Option<usize>>) -> PositionalStrategy {
        PositionalStrategy { player, moves }
    }

    pub fn to_finite_state(&self) -> FiniteStateStrategy {
        let n = self.moves.len();
        FiniteStateStrategy {
            player: self.player,
            memory: MemoryStructure::trivial(n),
            next: self.moves.clone(),
        }
    }
}

/// A strategy in Mealy form: a memory structure plus a next-move table on
/// `(owned vertex, memory state)`. Every prescribed move must be an edge;
/// the reported size of the strategy is the size of its memory.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteStateStrategy {
    pub player: Player,
    pub memory: MemoryStructure,
    /// Indexed `state · n + vertex`; `None` where no move is prescribed.
    pub next: Vec<Option<usize>>,
}

impl FiniteStateStrategy {
    pub fn new(
        player: Player,
        memory: MemoryStructure,
        next: Vec<Option<usize>>,
    ) -> FiniteStateStrategy {
        assert_eq!(next.len(), memory.state_count() * memory.vertex_count());
        FiniteStateStrategy { player, memory, next }
    }

    pub fn size(&self) -> usize {
        self.memory.state_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.memory.vertex_count()
    }

    pub fn next_move(&self, vertex: usize, state: usize) -> Option<usize> {
        self.next[state * self.memory.vertex_count() + vertex]
    }

    /// Checks that every prescribed move is an edge and that all owned
    /// vertices are covered in every state.
    pub fn validate(&self, arena: &Arena) -> Result<(), PlayError> {
        for m in 0..self.memory.state_count() {
            for v in 0..arena.vertex_count() {
                if arena.owner(v) != self.player {
                    continue;
                }
                match self.next_move(v, m) {
                    Some(t) if arena.has_edge(v, t) => {}
                    Some(t) => return Err(PlayError::NotAnEdge { from: v, to: t }),
                    None => return Err(PlayError::NotAnEdge { from: v, to: usize::MAX }),
                }
            }
        }
        Ok(())
    }

    /// If the memory is trivial, the underlying positional strategy.
    pub fn as_positional(&self) -> Option<PositionalStrategy> {
        if self.memory.state_count() == 1 {
            Some(PositionalStrategy {
                player: self.player,
                moves: self.next.clone(),
            })
        } else {
            None
        }
    }

    /// Re-indexes a strategy computed on a sub-arena to the parent arena.
    /// Removed vertices get no move and self-looping memory updates; they
    /// are unreachable when the strategy confines play to the sub-arena.
    pub fn lift_to_parent(
        &self,
        old_to_new: &[Option<usize>],
        new_to_old: &[usize],
    ) -> FiniteStateStrategy {
        let n = old_to_new.len();
        let k = self.memory.state_count();
        let mut table = vec![0usize; k * n];
        let mut next = vec![None; k * n];
        for m in 0..k {
            for v in 0..n {
                match old_to_new[v] {
                    Some(s) => {
                        table[m * n + v] = self.memory.update(m, s);
                        next[m * n + v] = self.next_move(s, m).map(|t| new_to_old[t]);
                    }
                    None => table[m * n + v] = m,
                }
            }
        }
        let memory = MemoryStructure::new(k, self.memory.initial(), n, table)
            .expect("lifted table stays closed");
        FiniteStateStrategy {
            player: self.player,
            memory,
            next,
        }
    }
}

/// The unique play consistent with a closed strategy pair, found by cycle
/// detection over (vertex, memory state, memory state) configurations. Total
/// strategies terminate within `n · |σ0| · |σ1|` steps.
pub fn simulate(
    arena: &Arena,
    strategy0: &FiniteStateStrategy,
    strategy1: &FiniteStateStrategy,
) -> UpPlay {
    simulate_from(arena, strategy0, strategy1, arena.initial())
}

/// `simulate` from an arbitrary start vertex.
pub fn simulate_from(
    arena: &Arena,
    strategy0: &FiniteStateStrategy,
    strategy1: &FiniteStateStrategy,
    start: usize,
) -> UpPlay {
    debug_assert_eq!(strategy0.player, Player::Zero);
    debug_assert_eq!(strategy1.player, Player::One);
    let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut word = Vec::new();
    let mut v = start;
    let mut m0 = strategy0.memory.initial();
    let mut m1 = strategy1.memory.initial();
    loop {
        if let Some(&at) = seen.get(&(v, m0, m1)) {
            let cycle = word.split_off(at);
            return UpPlay::new(word, cycle);
        }
        seen.insert((v, m0, m1), word.len());
        word.push(v);
        let next = match arena.owner(v) {
            Player::Zero => strategy0.next_move(v, m0),
            Player::One => strategy1.next_move(v, m1),
        }
        .expect("strategy undefined at an owned vertex during simulation");
        debug_assert!(arena.has_edge(v, next), "strategy move is not an edge");
        m0 = strategy0.memory.update(m0, next);
        m1 = strategy1.memory.update(m1, next);
        v = next;
    }
}

/// Whether every owned position of the play follows the strategy. For
/// ultimately periodic plays the cycle is unrolled until the strategy memory
/// becomes periodic over it.
pub fn is_consistent(arena: &Arena, play: &UpPlay, strategy: &FiniteStateStrategy) -> bool {
    let player = strategy.player;
    let mut m = strategy.memory.initial();
    let check = |v: usize, next: usize, m: &mut usize| -> bool {
        let ok = arena.owner(v) != player || strategy.next_move(v, *m) == Some(next);
        *m = strategy.memory.update(*m, next);
        ok
    };

    let word: Vec<usize> = play.prefix().iter().chain(play.cycle()).copied().collect();
    for w in word.windows(2) {
        if !check(w[0], w[1], &mut m) {
            return false;
        }
    }
    // Unroll the cycle until (offset 0, memory state) repeats.
    let mut seen = std::collections::HashSet::new();
    let cycle = play.cycle();
    loop {
        if !seen.insert(m) {
            return true;
        }
        let mut prev = *cycle.last().unwrap();
        for &v in cycle {
            if !check(prev, v, &mut m) {
                return false;
            }
            prev = v;
        }
    }
}

/// Consistency of a finite prefix with a strategy.
pub fn is_consistent_prefix(
    arena: &Arena,
    prefix: &PlayPrefix,
    strategy: &FiniteStateStrategy,
) -> bool {
    let mut m = strategy.memory.initial();
    let vs = prefix.vertices();
    for w in vs.windows(2) {
        if arena.owner(w[0]) == strategy.player && strategy.next_move(w[0], m) != Some(w[1]) {
            return false;
        }
        m = strategy.memory.update(m, w[1]);
    }
    true
}
