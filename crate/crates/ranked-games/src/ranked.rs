//! Vertex-ranked sup and lim-sup games: cost evaluation, threshold solvers,
//! and bound optimization.
//!
//! The value of a play is the highest rank visited at all (sup mode) or
//! visited infinitely often (lim mode), provided the play satisfies the
//! underlying qualitative condition; otherwise it is infinite. Solving with
//! respect to a bound `b` reduces to qualitative solving after pruning the
//! Player-1 attractor of the vertices ranked above `b`.

use thiserror::Error;

use crate::arena::{attractor, remove_region_rerooted, Arena, Player, VertexSet};
use crate::play::{PositionalStrategy, UpPlay};
use crate::qualitative::{
    solve_cobuchi, solve_qualitative, solve_safety, up_membership, QualitativeCondition,
    SolveResult,
};
use crate::value::Value;

/// Whether the cost aggregates over all visited ranks or only over the
/// infinitely recurring ones.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RankMode {
    Sup,
    Lim,
}

/// An arena with a qualitative winning condition and a total vertex ranking.
#[derive(Clone, Debug)]
pub struct VertexRankedGame {
    pub arena: Arena,
    pub condition: QualitativeCondition,
    pub ranks: Vec<u64>,
    pub mode: RankMode,
}

impl VertexRankedGame {
    pub fn new(
        arena: Arena,
        condition: QualitativeCondition,
        ranks: Vec<u64>,
        mode: RankMode,
    ) -> VertexRankedGame {
        assert_eq!(ranks.len(), arena.vertex_count(), "rank function must be total");
        VertexRankedGame { arena, condition, ranks, mode }
    }

    pub fn max_rank(&self) -> u64 {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// `{v | rk(v) > b}`.
    pub fn high_set(&self, b: u64) -> VertexSet {
        VertexSet::from_iter(
            self.arena.vertex_count(),
            (0..self.arena.vertex_count()).filter(|&v| self.ranks[v] > b),
        )
    }

    /// The qualitative game corresponding to this one: same arena and
    /// condition, ranks ignored.
    pub fn qualitative(&self) -> (&Arena, &QualitativeCondition) {
        (&self.arena, &self.condition)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RankedError {
    #[error("the underlying condition is not prefix-independent")]
    NotPrefixIndependent,
}

/// Value of an ultimately periodic play: the relevant rank maximum when the
/// underlying condition holds, infinite otherwise.
pub fn eval_rank(game: &VertexRankedGame, play: &UpPlay) -> Value {
    if !up_membership(&game.condition, play) {
        return Value::Infinite;
    }
    let max = match game.mode {
        RankMode::Sup => play
            .prefix()
            .iter()
            .chain(play.cycle())
            .map(|&v| game.ranks[v])
            .max(),
        RankMode::Lim => play.cycle().iter().map(|&v| game.ranks[v]).max(),
    };
    Value::Finite(max.expect("cycle is nonempty"))
}

fn totalized(arena: &Arena, player: Player, mut moves: Vec<Option<usize>>) -> crate::play::FiniteStateStrategy {
    for v in 0..arena.vertex_count() {
        if arena.owner(v) == player && moves[v].is_none() {
            moves[v] = arena.successors(v).iter().copied().min();
        }
    }
    PositionalStrategy::new(player, moves).to_finite_state()
}

/// Solves the sup game with respect to `b`, classifying every start vertex.
///
/// Player 1 wins from the 1-attractor `A` of the vertices ranked above `b`;
/// the rest is decided by the qualitative game on the arena minus `A`.
/// Player 0's strategy is the qualitative winning strategy restricted to
/// that sub-arena (cost at most `b`); Player 1 plays the attractor strategy
/// towards the high ranks on `A` (cost greater than `b`) and his qualitative
/// winning strategy elsewhere (cost infinite).
///
/// For a safety underlying condition this collapses to one attractor
/// computation on the original arena, using time linear in the edges and
/// auxiliary space linear in the vertices.
pub fn solve_sup_bound(game: &VertexRankedGame, b: u64) -> SolveResult {
    assert_eq!(game.mode, RankMode::Sup, "solver expects mode sup");
    let arena = &game.arena;
    let n = arena.vertex_count();
    let high = game.high_set(b);

    if let QualitativeCondition::SafetyAvoid(bad) = &game.condition {
        // Avoiding `bad ∪ high` forever is exactly winning with cost ≤ b.
        let mut target = bad.clone();
        target.union_with(&high);
        return solve_safety(arena, &target);
    }

    let attr = attractor(arena, Player::One, &high);
    let Some(removal) = remove_region_rerooted(arena, &attr.set) else {
        // Every start is pulled into a rank above b.
        return SolveResult {
            w0: VertexSet::empty(n),
            w1: VertexSet::full(n),
            strategy0: totalized(arena, Player::Zero, vec![None; n]),
            strategy1: totalized(arena, Player::One, attr.strategy),
        };
    };

    let sub_condition = game
        .condition
        .restrict(&removal.old_to_new, removal.arena.vertex_count());
    let sub = solve_qualitative(&removal.arena, &sub_condition);

    let w0 = removal.lift_set(&sub.w0);
    let mut w1 = attr.set.clone();
    w1.union_with(&removal.lift_set(&sub.w1));

    let strategy0 = {
        let mut s = sub
            .strategy0
            .lift_to_parent(&removal.old_to_new, &removal.new_to_old);
        let k = s.memory.state_count();
        for v in 0..n {
            if arena.owner(v) == Player::Zero {
                for m in 0..k {
                    if s.next[m * n + v].is_none() {
                        s.next[m * n + v] = arena.successors(v).iter().copied().min();
                    }
                }
            }
        }
        s
    };

    let strategy1 = {
        let mut s = sub
            .strategy1
            .lift_to_parent(&removal.old_to_new, &removal.new_to_old);
        let k = s.memory.state_count();
        for v in 0..n {
            if arena.owner(v) != Player::One {
                continue;
            }
            let override_move = if attr.set.contains(v) {
                Some(
                    attr.strategy[v]
                        .unwrap_or_else(|| arena.successors(v).iter().copied().min().unwrap()),
                )
            } else {
                None
            };
            for m in 0..k {
                if let Some(mv) = override_move {
                    s.next[m * n + v] = Some(mv);
                } else if s.next[m * n + v].is_none() {
                    s.next[m * n + v] = arena.successors(v).iter().copied().min();
                }
            }
        }
        s
    };

    SolveResult { w0, w1, strategy0, strategy1 }
}

/// One layer of the lim-sup decomposition: the vertices `x` where Player 0
/// wins the residual sup game, their 0-attractor `a`, and her positional
/// moves on the layer (inner winning moves on `x`, attractor moves on
/// `a \ x`).
#[derive(Clone, Debug)]
pub struct Layer {
    pub x: VertexSet,
    pub a: VertexSet,
    pub strategy: Vec<Option<usize>>,
}

/// The peeled layers and the untouched residual region, all in original
/// vertex indices.
#[derive(Clone, Debug)]
pub struct LayeredDecomposition {
    pub layers: Vec<Layer>,
    pub residual: VertexSet,
}

/// Solves the lim-sup game with respect to `b` for prefix-independent
/// underlying conditions (Büchi or co-Büchi), by repeatedly computing the
/// sup winning region of the residual game and removing its 0-attractor.
///
/// Player 0's stitched strategy descends through the layers: inside a layer
/// it follows that layer's sup-winning strategy, on the attractor part it
/// moves towards the layer core, and any escape leads to a strictly earlier
/// layer. Since the inner strategies are positional here, the stitched
/// strategy is positional as well. Player 1 keeps the play inside the
/// residual game, where every vertex is losing for Player 0 even in the sup
/// sense.
pub fn solve_lim_prefix_independent(
    game: &VertexRankedGame,
    b: u64,
) -> Result<(SolveResult, LayeredDecomposition), RankedError> {
    assert_eq!(game.mode, RankMode::Lim, "solver expects mode lim");
    if !game.condition.prefix_independent() {
        return Err(RankedError::NotPrefixIndependent);
    }
    let arena = &game.arena;
    let n = arena.vertex_count();

    let mut layers = Vec::new();
    let mut in_layers = VertexSet::empty(n);
    let mut moves0: Vec<Option<usize>> = vec![None; n];
    let mut moves1: Vec<Option<usize>> = vec![None; n];

    let mut cur = arena.clone();
    let mut map: Vec<usize> = (0..n).collect();
    let mut residual = VertexSet::empty(n);
    loop {
        let cn = cur.vertex_count();
        let cur_old_to_new = {
            let mut o = vec![None; n];
            for (i, &v) in map.iter().enumerate() {
                o[v] = Some(i);
            }
            o
        };
        let sub_game = VertexRankedGame::new(
            cur.clone(),
            game.condition.restrict(&cur_old_to_new, cn),
            map.iter().map(|&v| game.ranks[v]).collect(),
            RankMode::Sup,
        );
        let sup = solve_sup_bound(&sub_game, b);
        if sup.w0.is_empty() {
            // Stabilized: the rest is the residual game, won by Player 1
            // with cost above b from every vertex.
            debug_assert_eq!(sup.w1.len(), cn);
            for (i, &v) in map.iter().enumerate() {
                residual.insert(v);
                if cur.owner(i) == Player::One {
                    moves1[v] = sup.strategy1.next_move(i, 0).map(|t| map[t]);
                }
            }
            break;
        }

        debug_assert_eq!(sup.strategy0.size(), 1, "inner strategies are positional");
        let attr = attractor(&cur, Player::Zero, &sup.w0);
        let mut layer_moves = vec![None; n];
        for i in attr.set.iter() {
            let v = map[i];
            if cur.owner(i) == Player::Zero {
                let mv = if sup.w0.contains(i) {
                    sup.strategy0.next_move(i, 0)
                } else {
                    attr.strategy[i]
                };
                layer_moves[v] = mv.map(|t| map[t]);
                moves0[v] = layer_moves[v];
            }
        }
        let x = VertexSet::from_iter(n, sup.w0.iter().map(|i| map[i]));
        let a = VertexSet::from_iter(n, attr.set.iter().map(|i| map[i]));
        in_layers.union_with(&a);
        layers.push(Layer { x, a, strategy: layer_moves });

        match remove_region_rerooted(&cur, &attr.set) {
            Some(removal) => {
                map = removal.new_to_old.iter().map(|&i| map[i]).collect();
                cur = removal.arena;
            }
            None => break,
        }
    }

    let w0 = in_layers;
    let w1 = w0.complement();
    let result = SolveResult {
        w0,
        w1,
        strategy0: totalized(arena, Player::Zero, moves0),
        strategy1: totalized(arena, Player::One, moves1),
    };
    Ok((result, LayeredDecomposition { layers, residual }))
}

/// Solves the lim-sup game over a safety underlying condition by the
/// co-Büchi route: remove the 1-attractor of the avoid set, then require
/// that ranks above `b` recur only finitely often on the remainder.
pub fn solve_lim_cobuchi_route(game: &VertexRankedGame, b: u64) -> SolveResult {
    assert_eq!(game.mode, RankMode::Lim, "solver expects mode lim");
    let QualitativeCondition::SafetyAvoid(bad) = &game.condition else {
        panic!("the co-Büchi route requires a safety (avoid) underlying condition");
    };
    let arena = &game.arena;
    let n = arena.vertex_count();

    let attr = attractor(arena, Player::One, bad);
    let Some(removal) = remove_region_rerooted(arena, &attr.set) else {
        return SolveResult {
            w0: VertexSet::empty(n),
            w1: VertexSet::full(n),
            strategy0: totalized(arena, Player::Zero, vec![None; n]),
            strategy1: totalized(arena, Player::One, attr.strategy),
        };
    };

    let forbidden = VertexSet::from_iter(
        removal.arena.vertex_count(),
        game.high_set(b)
            .iter()
            .filter_map(|v| removal.old_to_new[v]),
    );
    let sub = solve_cobuchi(&removal.arena, &forbidden);

    let w0 = removal.lift_set(&sub.w0);
    let mut w1 = attr.set.clone();
    w1.union_with(&removal.lift_set(&sub.w1));

    let mut moves0 = vec![None; n];
    let mut moves1 = vec![None; n];
    for v in 0..n {
        match arena.owner(v) {
            Player::Zero => {
                if let Some(i) = removal.old_to_new[v] {
                    moves0[v] = sub.strategy0.next_move(i, 0).map(|t| removal.new_to_old[t]);
                }
            }
            Player::One => {
                if attr.set.contains(v) {
                    moves1[v] = attr.strategy[v];
                } else if let Some(i) = removal.old_to_new[v] {
                    moves1[v] = sub.strategy1.next_move(i, 0).map(|t| removal.new_to_old[t]);
                }
            }
        }
    }

    SolveResult {
        w0,
        w1,
        strategy0: totalized(arena, Player::Zero, moves0),
        strategy1: totalized(arena, Player::One, moves1),
    }
}

/// Which threshold solver `optimize_bound` drives.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RankedSolver {
    Sup,
    LimPrefixIndependent,
    LimCoBuchiRoute,
}

/// The applicable solver for a game: sup games solve directly, lim games
/// need a prefix-independent condition or the safety co-Büchi route.
pub fn vertex_ranked_to_solver(game: &VertexRankedGame) -> Result<RankedSolver, RankedError> {
    match game.mode {
        RankMode::Sup => Ok(RankedSolver::Sup),
        RankMode::Lim if game.condition.prefix_independent() => {
            Ok(RankedSolver::LimPrefixIndependent)
        }
        RankMode::Lim if matches!(game.condition, QualitativeCondition::SafetyAvoid(_)) => {
            Ok(RankedSolver::LimCoBuchiRoute)
        }
        RankMode::Lim => Err(RankedError::NotPrefixIndependent),
    }
}

/// Solves the game with respect to `b` using the selected solver.
pub fn solve_with(
    game: &VertexRankedGame,
    solver: RankedSolver,
    b: u64,
) -> Result<SolveResult, RankedError> {
    match solver {
        RankedSolver::Sup => Ok(solve_sup_bound(game, b)),
        RankedSolver::LimPrefixIndependent => {
            solve_lim_prefix_independent(game, b).map(|(r, _)| r)
        }
        RankedSolver::LimCoBuchiRoute => Ok(solve_lim_cobuchi_route(game, b)),
    }
}

/// Result of the bound optimization: the minimal achievable bound from the
/// initial vertex and the solve at that bound (absent when Player 0 wins
/// with respect to no bound).
#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub value: Value,
    pub solution: Option<SolveResult>,
}

/// Minimal `b` among the occurring rank values such that Player 0 wins with
/// respect to `b` from the initial vertex, or infinity if she never does.
/// Because winning is monotone in `b` and a finite optimum is always an
/// occurring rank, a binary search over the sorted distinct ranks suffices.
pub fn optimize_bound(
    game: &VertexRankedGame,
    solver: RankedSolver,
) -> Result<OptimizeResult, RankedError> {
    let mut candidates: Vec<u64> = game.ranks.clone();
    candidates.sort_unstable();
    candidates.dedup();

    let initial = game.arena.initial();
    let wins = |b: u64| -> Result<bool, RankedError> {
        Ok(solve_with(game, solver, b)?.w0.contains(initial))
    };

    if !wins(*candidates.last().unwrap())? {
        return Ok(OptimizeResult { value: Value::Infinite, solution: None });
    }
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if wins(candidates[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let best = candidates[lo];
    let solution = solve_with(game, solver, best)?;
    Ok(OptimizeResult {
        value: Value::Finite(best),
        solution: Some(solution),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qualitative::RrPair;

    fn safety_game(
        arena: Arena,
        avoid: &[usize],
        ranks: Vec<u64>,
        mode: RankMode,
    ) -> VertexRankedGame {
        let n = arena.vertex_count();
        VertexRankedGame::new(
            arena,
            QualitativeCondition::SafetyAvoid(VertexSet::from_iter(n, avoid.iter().copied())),
            ranks,
            mode,
        )
    }

    fn diamond() -> Arena {
        // v0 (P0) -> {v1, v2}; v1 (P1) -> {v3}; v2 (P1) -> {v3}; v3 -> v3.
        Arena::new(
            vec![Player::Zero, Player::One, Player::One, Player::Zero],
            vec![vec![1, 2], vec![3], vec![3], vec![3]],
            0,
        )
        .unwrap()
    }

    #[test]
    fn eval_rank_examples() {
        let a = diamond();
        let game = safety_game(a, &[2], vec![0, 5, 1, 2], RankMode::Sup);
        // Losing play (visits the avoid vertex): infinite.
        let losing = UpPlay::new(vec![0, 2], vec![3]);
        assert_eq!(eval_rank(&game, &losing), Value::Infinite);
        // Winning play: prefix max 5, cycle max 2.
        let winning = UpPlay::new(vec![0, 1], vec![3]);
        assert_eq!(eval_rank(&game, &winning), Value::Finite(5));
        let lim = VertexRankedGame { mode: RankMode::Lim, ..game.clone() };
        assert_eq!(eval_rank(&lim, &winning), Value::Finite(2));

        let zero = safety_game(diamond(), &[], vec![0, 0, 0, 0], RankMode::Sup);
        assert_eq!(eval_rank(&zero, &winning), Value::Finite(0));
    }

    #[test]
    fn sup_bound_above_max_rank_matches_qualitative() {
        let a = diamond();
        let game = safety_game(a.clone(), &[2], vec![0, 3, 1, 2], RankMode::Sup);
        let r = solve_sup_bound(&game, 3);
        let q = solve_safety(&a, &VertexSet::from_iter(4, [2]));
        assert_eq!(r.w0, q.w0);
        assert_eq!(r.w1, q.w1);
    }

    #[test]
    fn high_initial_rank_is_losing() {
        let a = diamond();
        let game = safety_game(a, &[], vec![7, 0, 0, 0], RankMode::Sup);
        let r = solve_sup_bound(&game, 6);
        assert!(r.w1.contains(0));
    }

    #[test]
    fn sup_bound_with_buchi_underlying() {
        // Büchi target {v3}; rank 2 on v1 forces Player 0 through v2 at b=1.
        let a = diamond();
        let n = a.vertex_count();
        let game = VertexRankedGame::new(
            a,
            QualitativeCondition::Buchi(VertexSet::from_iter(n, [3])),
            vec![0, 2, 1, 0],
            RankMode::Sup,
        );
        let r = solve_sup_bound(&game, 1);
        assert!(r.w0.contains(0));
        assert_eq!(r.strategy0.next_move(0, 0), Some(2));
        let tight = solve_sup_bound(&game, 0);
        assert!(tight.w1.contains(0));
    }

    #[test]
    fn lim_rejects_prefix_dependent_conditions() {
        let a = diamond();
        let game = safety_game(a.clone(), &[], vec![0; 4], RankMode::Lim);
        assert_eq!(
            solve_lim_prefix_independent(&game, 0).unwrap_err(),
            RankedError::NotPrefixIndependent
        );
        let rr = VertexRankedGame::new(
            a,
            QualitativeCondition::RequestResponse(vec![RrPair {
                request: VertexSet::empty(4),
                response: VertexSet::empty(4),
            }]),
            vec![0; 4],
            RankMode::Lim,
        );
        assert_eq!(
            solve_lim_prefix_independent(&rr, 0).unwrap_err(),
            RankedError::NotPrefixIndependent
        );
    }

    #[test]
    fn lim_all_ranks_low_is_single_layer() {
        let a = diamond();
        let n = a.vertex_count();
        let game = VertexRankedGame::new(
            a.clone(),
            QualitativeCondition::Buchi(VertexSet::from_iter(n, [3])),
            vec![0, 1, 1, 0],
            RankMode::Lim,
        );
        let (r, layers) = solve_lim_prefix_independent(&game, 1).unwrap();
        assert_eq!(layers.layers.len(), 1);
        let q = crate::qualitative::solve_buchi(&a, &VertexSet::from_iter(n, [3]));
        assert_eq!(r.w0, q.w0);
        assert_eq!(r.w1, q.w1);
    }

    #[test]
    fn lim_empty_sup_region_empty_lim_region() {
        // Büchi target is only reachable through a rank-2 vertex that must
        // recur, so at b=1 the sup region is empty from every vertex and so
        // is the lim region.
        let a = Arena::new(
            vec![Player::Zero, Player::Zero],
            vec![vec![1], vec![0]],
            0,
        )
        .unwrap();
        let game = VertexRankedGame::new(
            a,
            QualitativeCondition::Buchi(VertexSet::from_iter(2, [1])),
            vec![0, 2],
            RankMode::Lim,
        );
        let sup_game = VertexRankedGame { mode: RankMode::Sup, ..game.clone() };
        let sup = solve_sup_bound(&sup_game, 1);
        assert!(sup.w0.is_empty());
        let (lim, _) = solve_lim_prefix_independent(&game, 1).unwrap();
        assert!(lim.w0.is_empty());
    }

    #[test]
    fn lim_cobuchi_route_trivial_cases() {
        let a = diamond();
        let game = safety_game(a, &[], vec![0, 1, 1, 0], RankMode::Lim);
        let r = solve_lim_cobuchi_route(&game, 1);
        assert_eq!(r.w0, VertexSet::full(4));
        // A rank above the bound on the forced sink loses.
        let b = diamond();
        let game2 = safety_game(b, &[], vec![0, 0, 0, 2], RankMode::Lim);
        let r2 = solve_lim_cobuchi_route(&game2, 1);
        assert_eq!(r2.w1, VertexSet::full(4));
    }

    #[test]
    fn optimize_constant_ranks() {
        let a = diamond();
        let game = safety_game(a, &[], vec![4, 4, 4, 4], RankMode::Sup);
        let r = optimize_bound(&game, RankedSolver::Sup).unwrap();
        assert_eq!(r.value, Value::Finite(4));
    }

    #[test]
    fn optimize_lost_qualitative_game_is_infinite() {
        let a = diamond();
        let game = safety_game(a, &[3], vec![0, 0, 0, 0], RankMode::Sup);
        let r = optimize_bound(&game, RankedSolver::Sup).unwrap();
        assert_eq!(r.value, Value::Infinite);
        assert!(r.solution.is_none());
    }

    #[test]
    fn optimize_matches_linear_scan_on_random_instances() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let arena = crate::random::random_arena(&mut rng, 5, 3);
            let n = arena.vertex_count();
            let avoid = crate::random::random_set(&mut rng, n, 0.25);
            let ranks = crate::random::random_ranks(&mut rng, n, 4);
            let game = VertexRankedGame::new(
                arena,
                QualitativeCondition::SafetyAvoid(avoid),
                ranks,
                RankMode::Sup,
            );
            let fast = optimize_bound(&game, RankedSolver::Sup).unwrap();
            let mut scan = Value::Infinite;
            let mut cands: Vec<u64> = game.ranks.clone();
            cands.sort_unstable();
            cands.dedup();
            for &b in &cands {
                if solve_sup_bound(&game, b).w0.contains(game.arena.initial()) {
                    scan = Value::Finite(b);
                    break;
                }
            }
            assert_eq!(fast.value, scan);
        }
    }

    #[test]
    fn monotone_regions_in_bound() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let arena = crate::random::random_arena(&mut rng, 5, 3);
            let n = arena.vertex_count();
            let target = crate::random::random_set(&mut rng, n, 0.4);
            let ranks = crate::random::random_ranks(&mut rng, n, 3);
            let game = VertexRankedGame::new(
                arena,
                QualitativeCondition::Buchi(target),
                ranks,
                RankMode::Sup,
            );
            let mut prev: Option<VertexSet> = None;
            for b in 0..=3 {
                let r = solve_sup_bound(&game, b);
                if let Some(p) = &prev {
                    assert!(p.is_subset_of(&r.w0));
                }
                prev = Some(r.w0);
            }
            let lim_game = VertexRankedGame { mode: RankMode::Lim, ..game };
            let mut prev: Option<VertexSet> = None;
            for b in 0..=3 {
                let (r, _) = solve_lim_prefix_independent(&lim_game, b).unwrap();
                if let Some(p) = &prev {
                    assert!(p.is_subset_of(&r.w0));
                }
                prev = Some(r.w0);
            }
        }
    }

    #[test]
    fn layer_structure_invariants() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..40 {
            let arena = crate::random::random_arena(&mut rng, 5, 3);
            let n = arena.vertex_count();
            let target = crate::random::random_set(&mut rng, n, 0.4);
            let ranks = crate::random::random_ranks(&mut rng, n, 3);
            let game = VertexRankedGame::new(
                arena,
                QualitativeCondition::Buchi(target),
                ranks,
                RankMode::Lim,
            );
            let (r, deco) = solve_lim_prefix_independent(&game, 1).unwrap();
            let mut seen = VertexSet::empty(n);
            for layer in &deco.layers {
                assert!(layer.x.is_subset_of(&layer.a));
                assert!(!layer.a.iter().any(|v| seen.contains(v)), "layers overlap");
                seen.union_with(&layer.a);
            }
            assert_eq!(seen, r.w0);
            for v in deco.residual.iter() {
                assert!(r.w1.contains(v));
            }
        }
    }
}
