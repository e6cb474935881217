//! Quantitative Muller games: McNaughton scores, the score-tracking
//! reduction to vertex-ranked safety games, and the three-solve solver.
//!
//! The score of a set `F` along a play prefix counts how often `F` has been
//! traversed completely without leaving it. The score of the infinity set
//! diverges, which characterizes the Muller winner; every other set's score
//! keeps resetting. Player 0 can cap the score of all her opponent's sets at
//! two whenever she wins at all, so finite values live in `{0, 1, 2}`.

use thiserror::Error;

use crate::arena::{Arena, Player, VertexSet};
use crate::memory::{build_memory_product, MemoryOracle};
use crate::play::{FiniteStateStrategy, UpPlay};
use crate::qualitative::QualitativeCondition;
use crate::ranked::{solve_sup_bound, RankMode, VertexRankedGame};
use crate::reduction::{lift_strategy, CorrectionFunction, ReductionWitness};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MullerError {
    #[error("family members must be nonempty")]
    EmptyFamilyMember,
    #[error("duplicate family member")]
    DuplicateFamilyMember,
    #[error("family member mentions vertex {vertex} outside the arena")]
    VertexOutOfRange { vertex: usize },
}

/// The explicitly given family `F_1` of vertex sets whose recurrence Player
/// 1 pursues. `F_0` is never materialized: a set belongs to it exactly when
/// it is not listed here.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MullerSpec {
    domain: usize,
    family: Vec<VertexSet>,
}

impl MullerSpec {
    pub fn new(domain: usize, family: Vec<VertexSet>) -> Result<MullerSpec, MullerError> {
        for (i, f) in family.iter().enumerate() {
            if f.is_empty() {
                return Err(MullerError::EmptyFamilyMember);
            }
            if let Some(v) = f.iter().find(|&v| v >= domain) {
                return Err(MullerError::VertexOutOfRange { vertex: v });
            }
            if family[..i].contains(f) {
                return Err(MullerError::DuplicateFamilyMember);
            }
        }
        Ok(MullerSpec { domain, family })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn family(&self) -> &[VertexSet] {
        &self.family
    }

    pub fn family_contains(&self, set: &VertexSet) -> bool {
        self.family.iter().any(|f| f == set)
    }
}

/// An arena with a quantitative Muller condition.
#[derive(Clone, Debug)]
pub struct MullerGame {
    pub arena: Arena,
    pub spec: MullerSpec,
}

impl MullerGame {
    pub fn new(arena: Arena, spec: MullerSpec) -> MullerGame {
        assert_eq!(spec.domain(), arena.vertex_count());
        MullerGame { arena, spec }
    }
}

/// One step of the score recurrence for a single set `F`: leaving `F`
/// resets, completing `F` increments and clears the accumulator, otherwise
/// the visited vertex is accumulated.
pub fn score_step(acc: &VertexSet, score: u64, f: &VertexSet, v: usize) -> (VertexSet, u64) {
    debug_assert!(acc.is_subset_of(f) && acc.len() < f.len());
    if !f.contains(v) {
        return (VertexSet::empty(f.domain()), 0);
    }
    if !acc.contains(v) && acc.len() + 1 == f.len() {
        // acc ⊆ F with v missing and full cardinality: acc = F \ {v}.
        return (VertexSet::empty(f.domain()), score + 1);
    }
    let mut next = acc.clone();
    next.insert(v);
    (next, score)
}

/// The family score of a finite vertex sequence: fold the recurrence for
/// every family member and take the maximum (zero for the empty family or
/// the empty sequence).
pub fn score_of_prefix(spec: &MullerSpec, prefix: &[usize]) -> u64 {
    spec.family
        .iter()
        .map(|f| {
            let mut acc = VertexSet::empty(spec.domain);
            let mut score = 0;
            for &v in prefix {
                (acc, score) = score_step(&acc, score, f, v);
            }
            score
        })
        .max()
        .unwrap_or(0)
}

/// Value of an ultimately periodic play: infinite when the infinity set
/// belongs to the family (its score diverges), otherwise the largest family
/// score over any prefix, found by simulating the recurrence until the
/// per-lap score state stops changing.
pub fn eval_quantmuller(game: &MullerGame, play: &UpPlay) -> Value {
    let spec = &game.spec;
    let inf = play.inf_set(spec.domain);
    if spec.family_contains(&inf) {
        return Value::Infinite;
    }
    if spec.family.is_empty() {
        return Value::Finite(0);
    }

    let mut rows: Vec<(VertexSet, u64)> = spec
        .family
        .iter()
        .map(|_| (VertexSet::empty(spec.domain), 0))
        .collect();
    let mut max = 0u64;
    let feed = |rows: &mut Vec<(VertexSet, u64)>, v: usize, max: &mut u64| {
        for (i, f) in spec.family.iter().enumerate() {
            let (acc, score) = score_step(&rows[i].0, rows[i].1, f, v);
            *max = (*max).max(score);
            rows[i] = (acc, score);
        }
    };

    for &v in play.prefix() {
        feed(&mut rows, v, &mut max);
    }
    // Per-lap states stabilize within |V| + 2 laps when the infinity set is
    // outside the family: sets that reset repeat their lap trajectory, sets
    // that never reset only accumulate.
    let lap_limit = spec.domain + 4;
    let mut boundary = rows.clone();
    for _ in 0..lap_limit {
        for &v in play.cycle() {
            feed(&mut rows, v, &mut max);
        }
        if rows == boundary {
            return Value::Finite(max);
        }
        boundary = rows.clone();
    }
    unreachable!("score state failed to stabilize on a non-divergent play");
}

/// A class of score-equivalent play prefixes: the vertex they end in plus
/// the accumulator and score of every family member, or the absorbing state
/// entered once any score passes two.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ScoreClass {
    Live {
        last: usize,
        rows: Vec<(VertexSet, u8)>,
    },
    Bottom,
}

impl ScoreClass {
    pub fn rank(&self) -> u64 {
        match self {
            ScoreClass::Live { rows, .. } => {
                rows.iter().map(|&(_, s)| s as u64).max().unwrap_or(0)
            }
            ScoreClass::Bottom => 3,
        }
    }
}

struct ScoreTracker<'a> {
    spec: &'a MullerSpec,
}

impl ScoreTracker<'_> {
    fn settle(&self, last: usize, rows: Vec<(VertexSet, u8)>) -> ScoreClass {
        if rows.iter().any(|&(_, s)| s > 2) {
            ScoreClass::Bottom
        } else {
            ScoreClass::Live { last, rows }
        }
    }
}

impl MemoryOracle for ScoreTracker<'_> {
    type State = ScoreClass;

    fn start(&self, vertex: usize) -> ScoreClass {
        let rows = self
            .spec
            .family
            .iter()
            .map(|f| {
                let (acc, s) = score_step(&VertexSet::empty(self.spec.domain), 0, f, vertex);
                (acc, s as u8)
            })
            .collect();
        self.settle(vertex, rows)
    }

    fn step(&self, state: &ScoreClass, _from: usize, vertex: usize) -> ScoreClass {
        match state {
            ScoreClass::Bottom => ScoreClass::Bottom,
            ScoreClass::Live { rows, .. } => {
                let rows = self
                    .spec
                    .family
                    .iter()
                    .zip(rows)
                    .map(|(f, (acc, s))| {
                        let (acc, s) = score_step(acc, *s as u64, f, vertex);
                        (acc, s as u8)
                    })
                    .collect();
                self.settle(vertex, rows)
            }
        }
    }
}

/// The reduction of a quantitative Muller game to a vertex-ranked sup
/// safety game over the score-class memory.
#[derive(Clone, Debug)]
pub struct MullerReduction {
    pub witness: ReductionWitness,
    pub target: VertexRankedGame,
    /// Interned score classes, aligned with the witness memory indices.
    pub states: Vec<ScoreClass>,
}

/// Builds the score-tracking memory (reachable classes only, the absorbing
/// state included), ranks each pair by its class score (three once
/// absorbed), and targets safety on avoiding the absorbed pairs. The
/// correction function is `cap_3` at threshold 3.
pub fn build_muller_reduction(game: &MullerGame) -> MullerReduction {
    let tracker = ScoreTracker { spec: &game.spec };
    let built = build_memory_product(&game.arena, &tracker, false);

    let np = built.product.arena.vertex_count();
    let ranks: Vec<u64> = (0..np)
        .map(|p| built.states[built.product.state_of(p)].rank())
        .collect();
    let avoid = VertexSet::from_iter(
        np,
        (0..np).filter(|&p| built.states[built.product.state_of(p)] == ScoreClass::Bottom),
    );
    let target = VertexRankedGame::new(
        built.product.arena.clone(),
        QualitativeCondition::SafetyAvoid(avoid),
        ranks,
        RankMode::Sup,
    );
    let witness = ReductionWitness {
        memory: built.memory,
        product: built.product,
        correction: CorrectionFunction::Cap(3),
        threshold: Value::Finite(3),
        source_cap: Some(2),
    };
    MullerReduction {
        witness,
        target,
        states: built.states,
    }
}

#[derive(Clone, Debug)]
pub enum MullerQuery {
    Decision { bound: u64, player0_wins: bool },
    Optimal { value: Value },
}

/// Outcome of a quantitative Muller query. Player 1's side is reported as a
/// strategy in the reduced safety game only: the reduction is constructive
/// exactly when Player 0 wins, so no source strategy is synthesized for him.
#[derive(Clone, Debug)]
pub struct MullerOutcome {
    pub query: MullerQuery,
    pub qualitative_winner: Player,
    pub strategy: Option<FiniteStateStrategy>,
    pub player1_target_strategy: Option<FiniteStateStrategy>,
    pub reduction: MullerReduction,
}

/// Solves a quantitative Muller game through the safety reduction: a
/// decision needs one threshold solve, the optimum at most three (bounds
/// above two clamp to two). The value is infinite exactly when Player 0
/// loses with respect to two, which also decides the qualitative Muller
/// game.
pub fn solve_muller(game: &MullerGame, bound: Option<u64>) -> MullerOutcome {
    let reduction = build_muller_reduction(game);
    let initial = reduction.target.arena.initial();
    let solve_at = |b: u64| solve_sup_bound(&reduction.target, b);

    match bound {
        Some(raw) => {
            let b = raw.min(2);
            let solved = solve_at(b);
            let player0_wins = solved.w0.contains(initial);
            let qualitative_winner = if player0_wins {
                Player::Zero
            } else if solve_at(2).w0.contains(initial) {
                Player::Zero
            } else {
                Player::One
            };
            let strategy = player0_wins
                .then(|| lift_strategy(&game.arena, &reduction.witness, &solved.strategy0));
            let player1_target_strategy = (!player0_wins).then(|| solved.strategy1.clone());
            MullerOutcome {
                query: MullerQuery::Decision { bound: raw, player0_wins },
                qualitative_winner,
                strategy,
                player1_target_strategy,
                reduction,
            }
        }
        None => {
            let mut value = Value::Infinite;
            let mut winning_solve = None;
            let mut last_solve = None;
            for b in 0..=2 {
                let solved = solve_at(b);
                if solved.w0.contains(initial) {
                    value = Value::Finite(b);
                    winning_solve = Some(solved);
                    break;
                }
                last_solve = Some(solved);
            }
            let qualitative_winner = if value.is_finite() {
                Player::Zero
            } else {
                Player::One
            };
            let strategy = winning_solve
                .as_ref()
                .map(|s| lift_strategy(&game.arena, &reduction.witness, &s.strategy0));
            let player1_target_strategy = if value.is_finite() {
                None
            } else {
                last_solve.map(|s| s.strategy1)
            };
            MullerOutcome {
                query: MullerQuery::Optimal { value },
                qualitative_winner,
                strategy,
                player1_target_strategy,
                reduction,
            }
        }
    }
}
