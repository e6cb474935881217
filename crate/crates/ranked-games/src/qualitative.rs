//! Solvers and play-membership tests for the qualitative conditions used as
//! reduction targets: safety, Büchi, co-Büchi, and request-response.

use crate::arena::{attractor, remove_region_rerooted, Arena, Player, VertexSet};
use crate::memory::{build_memory_product, MemoryOracle};
use crate::play::{FiniteStateStrategy, PositionalStrategy, UpPlay};

/// One request-response pair: visits to `request` must eventually be
/// followed by (or coincide with) a visit to `response`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RrPair {
    pub request: VertexSet,
    pub response: VertexSet,
}

/// A qualitative winning condition for Player 0.
///
/// The internal safety primitive is avoid-based; inputs given as a safe set
/// are complemented at the boundary.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QualitativeCondition {
    /// Player 0 wins iff no vertex of the set is ever visited.
    SafetyAvoid(VertexSet),
    /// Player 0 wins iff some vertex of the set is visited infinitely often.
    Buchi(VertexSet),
    /// Player 0 wins iff no vertex of the set is visited infinitely often.
    CoBuchi(VertexSet),
    /// Player 0 wins iff every request is answered.
    RequestResponse(Vec<RrPair>),
}

impl QualitativeCondition {
    /// Safety given as a safe set: the avoid set is its complement.
    pub fn safety_safe(safe: &VertexSet) -> QualitativeCondition {
        QualitativeCondition::SafetyAvoid(safe.complement())
    }

    /// Whether membership is invariant under prepending finite prefixes.
    /// Gates the prefix-independent lim-sup solver.
    pub fn prefix_independent(&self) -> bool {
        matches!(
            self,
            QualitativeCondition::Buchi(_) | QualitativeCondition::CoBuchi(_)
        )
    }

    /// Re-indexes the condition onto a sub-arena.
    pub fn restrict(&self, old_to_new: &[Option<usize>], new_domain: usize) -> QualitativeCondition {
        let map = |set: &VertexSet| {
            VertexSet::from_iter(new_domain, set.iter().filter_map(|v| old_to_new[v]))
        };
        match self {
            QualitativeCondition::SafetyAvoid(b) => QualitativeCondition::SafetyAvoid(map(b)),
            QualitativeCondition::Buchi(b) => QualitativeCondition::Buchi(map(b)),
            QualitativeCondition::CoBuchi(f) => QualitativeCondition::CoBuchi(map(f)),
            QualitativeCondition::RequestResponse(pairs) => QualitativeCondition::RequestResponse(
                pairs
                    .iter()
                    .map(|p| RrPair {
                        request: map(&p.request),
                        response: map(&p.response),
                    })
                    .collect(),
            ),
        }
    }
}

/// Membership of an ultimately periodic play.
///
/// Request-response uses the periodicity of the tail: a request opened on
/// the cycle is answered iff the cycle contains a response at all (one
/// wrapped period scan reaches every cycle position), and a request opened
/// in the prefix can be answered later in the prefix or anywhere on the
/// cycle.
pub fn up_membership(condition: &QualitativeCondition, play: &UpPlay) -> bool {
    match condition {
        QualitativeCondition::SafetyAvoid(b) => {
            !play.prefix().iter().chain(play.cycle()).any(|&v| b.contains(v))
        }
        QualitativeCondition::Buchi(b) => play.cycle().iter().any(|&v| b.contains(v)),
        QualitativeCondition::CoBuchi(f) => !play.cycle().iter().any(|&v| f.contains(v)),
        QualitativeCondition::RequestResponse(pairs) => pairs.iter().all(|pair| {
            let cycle_answers = play.cycle().iter().any(|&v| pair.response.contains(v));
            let cycle_requests = play.cycle().iter().any(|&v| pair.request.contains(v));
            if cycle_requests && !cycle_answers {
                return false;
            }
            let prefix = play.prefix();
            for (j, &v) in prefix.iter().enumerate() {
                if pair.request.contains(v) {
                    let answered = prefix[j..].iter().any(|&w| pair.response.contains(w))
                        || cycle_answers;
                    if !answered {
                        return false;
                    }
                }
            }
            true
        }),
    }
}

/// Winning regions and uniform winning strategies of a determined
/// qualitative game. The regions partition the vertex set; each strategy is
/// winning from every vertex of its own region and total everywhere
/// (arbitrary outside the region).
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub w0: VertexSet,
    pub w1: VertexSet,
    pub strategy0: FiniteStateStrategy,
    pub strategy1: FiniteStateStrategy,
}

fn lowest_successor(arena: &Arena, v: usize) -> usize {
    *arena.successors(v).iter().min().unwrap()
}

fn lowest_successor_in(arena: &Arena, v: usize, set: &VertexSet) -> Option<usize> {
    arena
        .successors(v)
        .iter()
        .copied()
        .filter(|&t| set.contains(t))
        .min()
}

/// Fills undefined owned entries with the lowest-index successor, making a
/// positional move vector total.
fn totalize(arena: &Arena, player: Player, moves: &mut [Option<usize>]) {
    for v in 0..arena.vertex_count() {
        if arena.owner(v) == player && moves[v].is_none() {
            moves[v] = Some(lowest_successor(arena, v));
        }
    }
}

fn positional(arena: &Arena, player: Player, mut moves: Vec<Option<usize>>) -> FiniteStateStrategy {
    totalize(arena, player, &mut moves);
    PositionalStrategy::new(player, moves).to_finite_state()
}

/// Safety via a single attractor: Player 1 wins exactly on the 1-attractor
/// of the avoid set; Player 0 keeps the play inside the complement.
pub fn solve_safety(arena: &Arena, avoid: &VertexSet) -> SolveResult {
    let n = arena.vertex_count();
    let attr = attractor(arena, Player::One, avoid);
    let w1 = attr.set.clone();
    let w0 = w1.complement();

    let mut moves0 = vec![None; n];
    for v in w0.iter() {
        if arena.owner(v) == Player::Zero {
            moves0[v] = lowest_successor_in(arena, v, &w0);
            debug_assert!(moves0[v].is_some(), "safety region must be a trap");
        }
    }
    let strategy1 = positional(arena, Player::One, attr.strategy);
    let strategy0 = positional(arena, Player::Zero, moves0);
    SolveResult { w0, w1, strategy0, strategy1 }
}

/// Winning regions and positional strategies for the player trying to visit
/// `target` infinitely often, by the repeated attractor fixpoint.
fn solve_buchi_for(arena: &Arena, buchi_player: Player, target: &VertexSet) -> SolveResult {
    let n = arena.vertex_count();
    let opponent = buchi_player.opponent();
    let mut buchi_region = VertexSet::empty(n);
    let mut other_region = VertexSet::empty(n);
    let mut buchi_moves: Vec<Option<usize>> = vec![None; n];
    let mut other_moves: Vec<Option<usize>> = vec![None; n];

    let mut cur = arena.clone();
    let mut map: Vec<usize> = (0..n).collect();
    loop {
        let cn = cur.vertex_count();
        let b = VertexSet::from_iter(cn, (0..cn).filter(|&i| target.contains(map[i])));
        let attr = attractor(&cur, buchi_player, &b);
        if attr.set.len() == cn {
            // The remaining subgame is won entirely by the Büchi player:
            // attract to the target, then restart from any successor.
            for i in 0..cn {
                buchi_region.insert(map[i]);
                if cur.owner(i) == buchi_player {
                    let mv = if b.contains(i) {
                        lowest_successor(&cur, i)
                    } else {
                        attr.strategy[i].expect("attractor strategy covers non-target")
                    };
                    buchi_moves[map[i]] = Some(map[mv]);
                }
            }
            break;
        }
        let escape = attr.set.complement();
        let chunk = attractor(&cur, opponent, &escape);
        for i in chunk.set.iter() {
            other_region.insert(map[i]);
            if cur.owner(i) == opponent {
                let mv = if escape.contains(i) {
                    lowest_successor_in(&cur, i, &escape)
                        .expect("escape region is closed for its owner")
                } else {
                    chunk.strategy[i].expect("attractor strategy covers the rest")
                };
                other_moves[map[i]] = Some(map[mv]);
            }
        }
        match remove_region_rerooted(&cur, &chunk.set) {
            Some(removal) => {
                map = removal.new_to_old.iter().map(|&i| map[i]).collect();
                cur = removal.arena;
            }
            None => break,
        }
    }

    let strategy_buchi = positional(arena, buchi_player, buchi_moves);
    let strategy_other = positional(arena, opponent, other_moves);
    let (w0, w1, strategy0, strategy1) = match buchi_player {
        Player::Zero => (buchi_region, other_region, strategy_buchi, strategy_other),
        Player::One => (other_region, buchi_region, strategy_other, strategy_buchi),
    };
    SolveResult { w0, w1, strategy0, strategy1 }
}

/// Player 0 wins iff she can visit `target` infinitely often.
pub fn solve_buchi(arena: &Arena, target: &VertexSet) -> SolveResult {
    solve_buchi_for(arena, Player::Zero, target)
}

/// Player 0 wins iff she can eventually avoid `forbidden` forever; the dual
/// of the Büchi solve with the player roles swapped.
pub fn solve_cobuchi(arena: &Arena, forbidden: &VertexSet) -> SolveResult {
    solve_buchi_for(arena, Player::One, forbidden)
}

/// Round-robin memory for request-response: the set of open requests, the
/// index currently awaited, and whether the last step advanced the index.
/// Reachable states number at most `d · 2^d` because the flag is determined
/// by whether the awaited index just left the open set.
struct RoundRobin {
    q_mask: Vec<u64>,
    p_mask: Vec<u64>,
    d: usize,
}

impl RoundRobin {
    fn new(arena: &Arena, pairs: &[RrPair]) -> RoundRobin {
        assert!(pairs.len() <= 64, "at most 64 request-response pairs supported");
        let n = arena.vertex_count();
        let mut q_mask = vec![0u64; n];
        let mut p_mask = vec![0u64; n];
        for (c, pair) in pairs.iter().enumerate() {
            for v in pair.request.iter() {
                q_mask[v] |= 1 << c;
            }
            for v in pair.response.iter() {
                p_mask[v] |= 1 << c;
            }
        }
        RoundRobin { q_mask, p_mask, d: pairs.len() }
    }

    fn advance(&self, open: u64, robin: u32) -> (u32, bool) {
        if self.d == 0 || open & (1 << robin) == 0 {
            let next = if self.d == 0 { 0 } else { (robin + 1) % self.d as u32 };
            (next, true)
        } else {
            (robin, false)
        }
    }
}

impl MemoryOracle for RoundRobin {
    type State = (u64, u32, bool);

    fn start(&self, vertex: usize) -> Self::State {
        let open = self.q_mask[vertex] & !self.p_mask[vertex];
        let (robin, accept) = self.advance(open, 0);
        (open, robin, accept)
    }

    fn step(&self, state: &Self::State, _from: usize, vertex: usize) -> Self::State {
        let open = (state.0 | self.q_mask[vertex]) & !self.p_mask[vertex];
        let (robin, accept) = self.advance(open, state.1);
        (open, robin, accept)
    }
}

/// Solves a request-response game through the round-robin reduction to a
/// Büchi game on the expanded arena. Winning strategies carry the
/// round-robin memory.
pub fn solve_request_response(arena: &Arena, pairs: &[RrPair]) -> SolveResult {
    let n = arena.vertex_count();
    let oracle = RoundRobin::new(arena, pairs);
    let built = build_memory_product(arena, &oracle, true);
    let accepting = VertexSet::from_iter(
        built.product.arena.vertex_count(),
        (0..built.product.arena.vertex_count())
            .filter(|&p| built.states[built.product.state_of(p)].2),
    );
    let product_result = solve_buchi_for(&built.product.arena, Player::Zero, &accepting);

    let mut w0 = VertexSet::empty(n);
    let mut w1 = VertexSet::empty(n);
    for &(v, s) in &built.start_pairs {
        let p = built.product.pair_index(v, s).unwrap();
        if product_result.w0.contains(p) {
            w0.insert(v);
        } else {
            w1.insert(v);
        }
    }

    let compose = |player: Player, product_strategy: &FiniteStateStrategy| {
        let k = built.memory.state_count();
        let mut next = vec![None; k * n];
        for m in 0..k {
            for v in 0..n {
                if arena.owner(v) != player {
                    continue;
                }
                next[m * n + v] = built
                    .product
                    .pair_index(v, m)
                    .and_then(|p| product_strategy.next_move(p, 0))
                    .map(|q| built.product.vertex_of(q));
                if next[m * n + v].is_none() {
                    next[m * n + v] = Some(lowest_successor(arena, v));
                }
            }
        }
        FiniteStateStrategy::new(player, built.memory.clone(), next)
    };

    let strategy0 = compose(Player::Zero, &product_result.strategy0);
    let strategy1 = compose(Player::One, &product_result.strategy1);
    SolveResult { w0, w1, strategy0, strategy1 }
}

/// Dispatch over the condition variants.
pub fn solve_qualitative(arena: &Arena, condition: &QualitativeCondition) -> SolveResult {
    match condition {
        QualitativeCondition::SafetyAvoid(b) => solve_safety(arena, b),
        QualitativeCondition::Buchi(b) => solve_buchi(arena, b),
        QualitativeCondition::CoBuchi(f) => solve_cobuchi(arena, f),
        QualitativeCondition::RequestResponse(pairs) => solve_request_response(arena, pairs),
    }
}
