//! Fault-resilient safety synthesis: safety games in which the environment
//! may occasionally override Player 0's chosen move along designated fault
//! edges. Each vertex gets the minimal number of faults the environment
//! needs to defeat the safety objective from there; ranking vertices by that
//! value turns resilience synthesis into a vertex-ranked game.

use std::collections::HashMap;

use thiserror::Error;

use crate::arena::{attractor, Arena, Player, VertexSet};
use crate::play::{FiniteStateStrategy, PositionalStrategy};
use crate::qualitative::QualitativeCondition;
use crate::ranked::{optimize_bound, RankMode, RankedSolver, VertexRankedGame};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FaultError {
    #[error("fault edge from {vertex} does not originate at a Player 0 vertex")]
    FaultFromPlayerOne { vertex: usize },
    #[error("fault edge endpoint {vertex} out of range")]
    FaultOutOfRange { vertex: usize },
}

/// An arena with fault edges (all from Player 0 vertices) and a safe set.
#[derive(Clone, Debug)]
pub struct FaultArena {
    pub arena: Arena,
    pub faults: Vec<(usize, usize)>,
    pub safe: VertexSet,
}

impl FaultArena {
    pub fn new(
        arena: Arena,
        faults: Vec<(usize, usize)>,
        safe: VertexSet,
    ) -> Result<FaultArena, FaultError> {
        let n = arena.vertex_count();
        assert_eq!(safe.domain(), n);
        for &(u, w) in &faults {
            if u >= n || w >= n {
                return Err(FaultError::FaultOutOfRange { vertex: u.max(w) });
            }
            if arena.owner(u) != Player::Zero {
                return Err(FaultError::FaultFromPlayerOne { vertex: u });
            }
        }
        Ok(FaultArena { arena, faults, safe })
    }

    fn fault_targets(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.faults
            .iter()
            .filter(move |&&(u, _)| u == v)
            .map(|&(_, w)| w)
    }
}

/// Per-vertex minimal number of faults the environment needs, `None`
/// standing for "no number of faults suffices".
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValMap {
    values: Vec<Option<usize>>,
}

impl ValMap {
    pub fn get(&self, v: usize) -> Option<usize> {
        self.values[v]
    }

    pub fn values(&self) -> &[Option<usize>] {
        &self.values
    }
}

/// Layered fixpoint for the fault values: level zero is the 1-attractor of
/// the unsafe vertices; each further level adds the 1-attractor of the
/// previous level extended by the Player 0 vertices owning a fault edge
/// into it. Stabilizes within the vertex count.
pub fn compute_val(fa: &FaultArena) -> ValMap {
    let n = fa.arena.vertex_count();
    let mut values = vec![None; n];

    let unsafe_set = fa.safe.complement();
    let mut region = attractor(&fa.arena, Player::One, &unsafe_set).set;
    for v in region.iter() {
        values[v] = Some(0);
    }

    for level in 1..=n {
        let mut base = region.clone();
        for &(u, w) in &fa.faults {
            if region.contains(w) {
                base.insert(u);
            }
        }
        if base == region {
            break;
        }
        let next = attractor(&fa.arena, Player::One, &base).set;
        for v in next.iter() {
            if values[v].is_none() {
                values[v] = Some(level);
            }
        }
        region = next;
    }
    ValMap { values }
}

/// Independent semantics for the fault values: an explicit budget game in
/// which the environment may, at a Player 0 vertex, override the committed
/// move along a fault edge at budget cost one (commitment states make the
/// override explicit). The value of `v` is the least budget from which the
/// environment wins reachability to the unsafe set, if any within `n`.
pub fn val_oracle(fa: &FaultArena, vertex: usize) -> Option<usize> {
    val_oracle_all(fa).get(vertex)
}

/// The full budget-game computation behind [`val_oracle`].
pub fn val_oracle_all(fa: &FaultArena) -> ValMap {
    let n = fa.arena.vertex_count();
    let budgets = n + 1;

    // Node layout: (u, r) at u * budgets + r; commitment nodes appended.
    let base_nodes = n * budgets;
    let mut owner = Vec::new();
    let mut successors: Vec<Vec<usize>> = Vec::new();
    for u in 0..n {
        for _ in 0..budgets {
            owner.push(match fa.arena.owner(u) {
                Player::Zero => Player::Zero, // defender commits
                Player::One => Player::One,   // attacker moves freely
            });
            successors.push(Vec::new());
        }
    }
    let mut commit_index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for u in 0..n {
        for r in 0..budgets {
            let node = u * budgets + r;
            match fa.arena.owner(u) {
                Player::One => {
                    for &t in fa.arena.successors(u) {
                        successors[node].push(t * budgets + r);
                    }
                }
                Player::Zero => {
                    for &t in fa.arena.successors(u) {
                        let commit = *commit_index.entry((u, t, r)).or_insert_with(|| {
                            owner.push(Player::One); // attacker resolves
                            successors.push(Vec::new());
                            owner.len() - 1
                        });
                        successors[node].push(commit);
                        successors[commit].push(t * budgets + r);
                        if r > 0 {
                            for w in fa.fault_targets(u) {
                                let target = w * budgets + (r - 1);
                                if !successors[commit].contains(&target) {
                                    successors[commit].push(target);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let total = owner.len();
    let budget_arena = Arena::new(owner, successors, 0).expect("budget game is a valid arena");
    let target = VertexSet::from_iter(
        total,
        (0..base_nodes).filter(|&node| !fa.safe.contains(node / budgets)),
    );
    let win = attractor(&budget_arena, Player::One, &target).set;

    let values = (0..n)
        .map(|u| (0..budgets).find(|&r| win.contains(u * budgets + r)))
        .collect();
    ValMap { values }
}

/// The vertex-ranked formulation over the fault-free arena: rank
/// `|V| - val(v)` where the value is finite, rank zero otherwise, with the
/// original safety objective.
pub fn build_resilience_game(fa: &FaultArena, mode: RankMode) -> VertexRankedGame {
    let n = fa.arena.vertex_count();
    let val = compute_val(fa);
    let ranks = (0..n)
        .map(|v| match val.get(v) {
            Some(k) => (n - k) as u64,
            None => 0,
        })
        .collect();
    VertexRankedGame::new(
        fa.arena.clone(),
        QualitativeCondition::SafetyAvoid(fa.safe.complement()),
        ranks,
        mode,
    )
}

/// How many faults the synthesized controller withstands.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ResilienceLevel {
    /// Player 0 loses the fault-free safety game outright.
    None,
    /// Play can be confined to vertices no number of faults defeats.
    Unbounded,
    /// The environment needs at least this many faults: every schedule
    /// injecting fewer is survived.
    Faults(usize),
}

#[derive(Clone, Debug)]
pub struct ResilienceOutcome {
    pub level: ResilienceLevel,
    /// Optimal bound of the induced vertex-ranked game.
    pub bound: Value,
    pub strategy: Option<FiniteStateStrategy>,
    pub val: ValMap,
}

/// Positional strategy that always moves to a successor of maximal fault
/// value (infinite values on top, ties to the lowest index). Fault-free
/// moves never decrease the value and a fault decreases it by at most one,
/// so from `v` the play survives any schedule of fewer than `val(v)` faults.
pub fn val_greedy_strategy(fa: &FaultArena, val: &ValMap) -> FiniteStateStrategy {
    let n = fa.arena.vertex_count();
    let key = |v: usize| val.get(v).map_or(usize::MAX, |k| k);
    let moves = (0..n)
        .map(|v| {
            (fa.arena.owner(v) == Player::Zero).then(|| {
                let best = fa
                    .arena
                    .successors(v)
                    .iter()
                    .copied()
                    .map(key)
                    .max()
                    .unwrap();
                fa.arena
                    .successors(v)
                    .iter()
                    .copied()
                    .filter(|&t| key(t) == best)
                    .min()
                    .unwrap()
            })
        })
        .collect();
    PositionalStrategy::new(Player::Zero, moves).to_finite_state()
}

/// Synthesizes a maximally fault-resilient controller: optimize the induced
/// vertex-ranked game (sup mode directly, lim mode through the safety
/// co-Büchi route for eventual resilience) and translate the optimal bound
/// `b*` back: `|V| - b*` tolerated faults, unbounded when the play can be
/// confined to vertices of infinite value, none when even the fault-free
/// safety game is lost.
pub fn solve_resilient(fa: &FaultArena, mode: RankMode) -> ResilienceOutcome {
    let val = compute_val(fa);
    let game = build_resilience_game(fa, mode);
    let solver = match mode {
        RankMode::Sup => RankedSolver::Sup,
        RankMode::Lim => RankedSolver::LimCoBuchiRoute,
    };
    let opt = optimize_bound(&game, solver).expect("solver selection matches the mode");

    match opt.value {
        Value::Infinite => ResilienceOutcome {
            level: ResilienceLevel::None,
            bound: Value::Infinite,
            strategy: None,
            val,
        },
        Value::Finite(b) => {
            let level = if b == 0 {
                ResilienceLevel::Unbounded
            } else {
                ResilienceLevel::Faults(fa.arena.vertex_count() - b as usize)
            };
            let strategy = match mode {
                RankMode::Sup => val_greedy_strategy(fa, &val),
                RankMode::Lim => opt.solution.expect("finite optimum has a solve").strategy0,
            };
            ResilienceOutcome {
                level,
                bound: Value::Finite(b),
                strategy: Some(strategy),
                val,
            }
        }
    }
}

/// Exhaustively checks that every adversary behavior injecting at most
/// `max_faults` faults keeps the play inside the safe set for `horizon`
/// steps when Player 0 follows the strategy. Fault branches override the
/// committed move; regular branches range over all Player 1 choices.
pub fn survives_fault_schedules(
    fa: &FaultArena,
    strategy: &FiniteStateStrategy,
    max_faults: usize,
    horizon: usize,
) -> bool {
    let mut memo: HashMap<(usize, usize, usize, usize), bool> = HashMap::new();
    survives(fa, strategy, fa.arena.initial(), strategy.memory.initial(), max_faults, horizon, &mut memo)
}

#[allow(clippy::too_many_arguments)]
fn survives(
    fa: &FaultArena,
    strategy: &FiniteStateStrategy,
    v: usize,
    m: usize,
    faults_left: usize,
    steps_left: usize,
    memo: &mut HashMap<(usize, usize, usize, usize), bool>,
) -> bool {
    if !fa.safe.contains(v) {
        return false;
    }
    if steps_left == 0 {
        return true;
    }
    let key = (v, m, faults_left, steps_left);
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let ok = match fa.arena.owner(v) {
        Player::Zero => {
            let committed = strategy
                .next_move(v, m)
                .expect("strategy must cover Player 0 vertices");
            let mut ok = survives(
                fa,
                strategy,
                committed,
                strategy.memory.update(m, committed),
                faults_left,
                steps_left - 1,
                memo,
            );
            if ok && faults_left > 0 {
                for w in fa.fault_targets(v) {
                    if !survives(
                        fa,
                        strategy,
                        w,
                        strategy.memory.update(m, w),
                        faults_left - 1,
                        steps_left - 1,
                        memo,
                    ) {
                        ok = false;
                        break;
                    }
                }
            }
            ok
        }
        Player::One => fa.arena.successors(v).iter().all(|&t| {
            survives(
                fa,
                strategy,
                t,
                strategy.memory.update(m, t),
                faults_left,
                steps_left - 1,
                memo,
            )
        }),
    };
    memo.insert(key, ok);
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fault_arena(
        owners: Vec<Player>,
        succ: Vec<Vec<usize>>,
        faults: Vec<(usize, usize)>,
        safe: &[usize],
    ) -> FaultArena {
        let arena = Arena::new(owners, succ, 0).unwrap();
        let n = arena.vertex_count();
        FaultArena::new(arena, faults, VertexSet::from_iter(n, safe.iter().copied())).unwrap()
    }

    #[test]
    fn faults_from_player_one_rejected() {
        let arena = Arena::new(vec![Player::One], vec![vec![0]], 0).unwrap();
        let err = FaultArena::new(arena, vec![(0, 0)], VertexSet::full(1)).unwrap_err();
        assert_eq!(err, FaultError::FaultFromPlayerOne { vertex: 0 });
    }

    #[test]
    fn no_faults_means_binary_values() {
        // v0 safe with a self-loop, v1 unsafe sink.
        let fa = fault_arena(
            vec![Player::Zero, Player::Zero],
            vec![vec![0, 1], vec![1]],
            vec![],
            &[0],
        );
        let val = compute_val(&fa);
        assert_eq!(val.get(0), None);
        assert_eq!(val.get(1), Some(0));
    }

    #[test]
    fn unsafe_vertices_have_value_zero() {
        let fa = fault_arena(
            vec![Player::Zero, Player::One],
            vec![vec![0, 1], vec![1]],
            vec![],
            &[0],
        );
        assert_eq!(compute_val(&fa).get(1), Some(0));
    }

    #[test]
    fn single_fault_edge_gives_value_one() {
        // v0 would be safe forever, but one fault drops the play into the
        // unsafe sink v1.
        let fa = fault_arena(
            vec![Player::Zero, Player::Zero],
            vec![vec![0], vec![1]],
            vec![(0, 1)],
            &[0],
        );
        let val = compute_val(&fa);
        assert_eq!(val.get(0), Some(1));
        assert_eq!(val.get(1), Some(0));
        assert_eq!(val_oracle(&fa, 0), Some(1));
    }

    #[test]
    fn compute_val_matches_oracle_on_random_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for _ in 0..40 {
            let arena = crate::random::random_arena(&mut rng, 5, 3);
            let n = arena.vertex_count();
            let safe = crate::random::random_set(&mut rng, n, 0.8);
            let mut faults = Vec::new();
            for v in 0..n {
                if arena.owner(v) == Player::Zero && rng.gen_bool(0.4) {
                    faults.push((v, rng.gen_range(0..n)));
                }
            }
            let fa = FaultArena::new(arena, faults, safe).unwrap();
            let fast = compute_val(&fa);
            let slow = val_oracle_all(&fa);
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn lost_safety_game_reports_none() {
        let fa = fault_arena(
            vec![Player::One, Player::Zero],
            vec![vec![1], vec![1]],
            vec![],
            &[0],
        );
        let out = solve_resilient(&fa, RankMode::Sup);
        assert_eq!(out.level, ResilienceLevel::None);
        assert!(out.strategy.is_none());
    }

    #[test]
    fn faultless_winner_is_unbounded() {
        let fa = fault_arena(
            vec![Player::Zero, Player::Zero],
            vec![vec![0, 1], vec![1]],
            vec![],
            &[0],
        );
        let out = solve_resilient(&fa, RankMode::Sup);
        assert_eq!(out.level, ResilienceLevel::Unbounded);
        assert_eq!(out.bound, Value::Finite(0));
    }

    #[test]
    fn tolerance_counts_faults() {
        // Two fault hops are needed to push the play from v0 to the unsafe
        // sink v2.
        let fa = fault_arena(
            vec![Player::Zero, Player::Zero, Player::Zero],
            vec![vec![0], vec![1], vec![2]],
            vec![(0, 1), (1, 2)],
            &[0, 1],
        );
        let val = compute_val(&fa);
        assert_eq!(val.get(0), Some(2));
        let out = solve_resilient(&fa, RankMode::Sup);
        assert_eq!(out.level, ResilienceLevel::Faults(2));
        let strategy = out.strategy.unwrap();
        assert!(survives_fault_schedules(&fa, &strategy, 1, 12));
        assert!(!survives_fault_schedules(&fa, &strategy, 2, 12));
    }

    #[test]
    fn rank_val_duality_on_sampled_plays() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let arena = crate::random::random_arena(&mut rng, 5, 3);
            let n = arena.vertex_count();
            let safe = crate::random::random_set(&mut rng, n, 0.8);
            let mut faults = Vec::new();
            for v in 0..n {
                if arena.owner(v) == Player::Zero && rng.gen_bool(0.4) {
                    faults.push((v, rng.gen_range(0..n)));
                }
            }
            let fa = FaultArena::new(arena.clone(), faults, safe).unwrap();
            let val = compute_val(&fa);
            let game = build_resilience_game(&fa, RankMode::Sup);
            for play in crate::oracle::sample_up_plays(&arena, 20, 4, 4, 7) {
                let cost = crate::ranked::eval_rank(&game, &play);
                if let Value::Finite(b) = cost {
                    let floor = n as u64 - b;
                    for v in play.prefix().iter().chain(play.cycle()) {
                        match val.get(*v) {
                            Some(k) => assert!(k as u64 >= floor),
                            None => {}
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eventual_resilience_via_lim_mode() {
        // v0 must pass through the fragile v1 once, then can settle on the
        // fault-free v2: eventually resilient even though v1 is exposed.
        let fa = fault_arena(
            vec![Player::Zero, Player::Zero, Player::Zero, Player::Zero],
            vec![vec![1], vec![2], vec![2], vec![3]],
            vec![(1, 3)],
            &[0, 1, 2],
        );
        // val(v0) = val(v1) = 1, so plain resilience reports threshold 1,
        // while eventual resilience sees the fault-free tail at v2.
        let sup = solve_resilient(&fa, RankMode::Sup);
        let lim = solve_resilient(&fa, RankMode::Lim);
        assert_eq!(sup.level, ResilienceLevel::Faults(1));
        assert_eq!(lim.level, ResilienceLevel::Unbounded);
    }
}
