//! Property tests for the spec-level invariants that cut across modules:
//! attractor laws, solver soundness by exhaustive simulation, strategy
//! transfer, and the prefix-independence flags.

use proptest::prelude::*;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;

use ranked_games::arena::{attractor, remove_region, Arena, Player, VertexSet};
use ranked_games::memory::extend_play;
use ranked_games::oracle::sample_up_plays;
use ranked_games::play::{
    is_consistent, simulate_from, FiniteStateStrategy, PositionalStrategy, UpPlay,
};
use ranked_games::qualitative::{
    solve_buchi, solve_cobuchi, solve_request_response, solve_safety, up_membership,
    QualitativeCondition, RrPair, SolveResult,
};
use ranked_games::ranked::{
    eval_rank, solve_lim_cobuchi_route, solve_lim_prefix_independent, solve_sup_bound, RankMode,
    VertexRankedGame,
};
use ranked_games::reduction::{lift_strategy, push_strategy, verify_reduction_on_plays};
use ranked_games::reqres::{
    build_rr_reduction, eval_cost_reqres, solve_rr, RrCostGame, RrCostSpec, RrQuery, RrSemantics,
};
use ranked_games::value::Value;
use ranked_games::verify::vertex_ranked_strategy_cost;

fn arb_arena(max_n: usize) -> impl Strategy<Value = Arena> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(prop::collection::btree_set(0..n, 1..=n.min(3)), n),
            0..n,
        )
            .prop_map(move |(owners, succs, initial)| {
                Arena::new(
                    owners
                        .into_iter()
                        .map(|b| if b { Player::Zero } else { Player::One })
                        .collect(),
                    succs.into_iter().map(|s| s.into_iter().collect()).collect(),
                    initial,
                )
                .unwrap()
            })
    })
}

fn arb_player() -> impl Strategy<Value = Player> {
    prop::bool::ANY.prop_map(|b| if b { Player::Zero } else { Player::One })
}

proptest! {
    #[test]
    fn attractor_contains_its_target(arena in arb_arena(6), player in arb_player(), bits in prop::collection::vec(prop::bool::ANY, 6)) {
        let n = arena.vertex_count();
        let target = VertexSet::from_iter(n, (0..n).filter(|&v| bits[v]));
        let r = attractor(&arena, player, &target);
        prop_assert!(target.is_subset_of(&r.set));
    }

    #[test]
    fn attractor_is_idempotent(arena in arb_arena(6), player in arb_player(), bits in prop::collection::vec(prop::bool::ANY, 6)) {
        let n = arena.vertex_count();
        let target = VertexSet::from_iter(n, (0..n).filter(|&v| bits[v]));
        let once = attractor(&arena, player, &target).set;
        let twice = attractor(&arena, player, &once).set;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn attractor_is_monotone(arena in arb_arena(6), player in arb_player(), bits in prop::collection::vec(prop::bool::ANY, 6), more in prop::collection::vec(prop::bool::ANY, 6)) {
        let n = arena.vertex_count();
        let small = VertexSet::from_iter(n, (0..n).filter(|&v| bits[v]));
        let mut large = small.clone();
        for v in 0..n {
            if more[v] {
                large.insert(v);
            }
        }
        let rs = attractor(&arena, player, &small).set;
        let rl = attractor(&arena, player, &large).set;
        prop_assert!(rs.is_subset_of(&rl));
    }

    #[test]
    fn removing_an_attractor_leaves_no_dead_end(arena in arb_arena(6), player in arb_player(), bits in prop::collection::vec(prop::bool::ANY, 6)) {
        let n = arena.vertex_count();
        let target = VertexSet::from_iter(n, (0..n).filter(|&v| bits[v]));
        let attr = attractor(&arena, player, &target).set;
        match remove_region(&arena, &attr) {
            Ok(_) => {}
            Err(ranked_games::arena::RemoveError::InitialRemoved) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn stuttered_cycles_canonicalize_equal(prefix in prop::collection::vec(0usize..4, 0..4), cycle in prop::collection::vec(0usize..4, 1..4), reps in 1usize..3) {
        let mut repeated = Vec::new();
        for _ in 0..reps {
            repeated.extend_from_slice(&cycle);
        }
        prop_assert_eq!(UpPlay::new(prefix.clone(), cycle), UpPlay::new(prefix, repeated));
    }
}

/// The attractor strategy forces the target within `n` steps against every
/// opponent behavior.
#[test]
fn attractor_strategy_reaches_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..80 {
        let arena = ranked_games::random::random_arena(&mut rng, 5, 3);
        let n = arena.vertex_count();
        let target = ranked_games::random::random_set(&mut rng, n, 0.3);
        for player in [Player::Zero, Player::One] {
            let r = attractor(&arena, player, &target);
            let strategy = {
                let mut moves = r.strategy.clone();
                for v in 0..n {
                    if arena.owner(v) == player && moves[v].is_none() {
                        moves[v] = Some(arena.successors(v)[0]);
                    }
                }
                PositionalStrategy::new(player, moves).to_finite_state()
            };
            for start in r.set.iter() {
                for_each_positional(&arena, player.opponent(), |opponent| {
                    let (s0, s1) = match player {
                        Player::Zero => (&strategy, opponent),
                        Player::One => (opponent, &strategy),
                    };
                    let play = simulate_from(&arena, s0, s1, start);
                    let hit = (0..=n).any(|i| target.contains(play.at(i)));
                    assert!(hit, "attractor strategy failed to reach the target");
                });
            }
        }
    }
}

fn for_each_positional(arena: &Arena, player: Player, mut f: impl FnMut(&FiniteStateStrategy)) {
    let owned: Vec<usize> = (0..arena.vertex_count())
        .filter(|&v| arena.owner(v) == player)
        .collect();
    let mut digits = vec![0usize; owned.len()];
    loop {
        let moves = (0..arena.vertex_count())
            .map(|v| {
                (arena.owner(v) == player).then(|| {
                    let slot = owned.iter().position(|&o| o == v).unwrap();
                    arena.successors(v)[digits[slot]]
                })
            })
            .collect();
        f(&PositionalStrategy::new(player, moves).to_finite_state());
        let mut i = 0;
        loop {
            if i == owned.len() {
                return;
            }
            digits[i] += 1;
            if digits[i] < arena.out_degree(owned[i]) {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Every qualitative solver's regions partition the vertices, and each
/// winning strategy wins from its whole region against every positional
/// adversary. Positional strategies are uniform across start vertices;
/// memory-carrying strategies (request-response) are anchored at the
/// initial vertex — their initial state already accounts for requests it
/// opens — so per-start soundness is checked through re-rooted solves,
/// which must also reproduce the same regions.
#[test]
fn qualitative_solvers_are_sound_by_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let check = |arena: &Arena,
                 condition: &QualitativeCondition,
                 result: &SolveResult,
                 resolve: &dyn Fn(&Arena) -> SolveResult| {
        let n = arena.vertex_count();
        assert_eq!(result.w0.len() + result.w1.len(), n);
        assert!(!result.w0.iter().any(|v| result.w1.contains(v)));
        let uniform = result.strategy0.size() == 1 && result.strategy1.size() == 1;
        for v in 0..n {
            let rooted;
            let local = if uniform {
                result
            } else {
                rooted = resolve(&arena.with_initial(v));
                assert_eq!(rooted.w0, result.w0, "regions must not depend on the root");
                &rooted
            };
            if result.w0.contains(v) {
                for_each_positional(arena, Player::One, |adversary| {
                    let play = simulate_from(arena, &local.strategy0, adversary, v);
                    assert!(
                        up_membership(condition, &play),
                        "Player 0 strategy lost from its region"
                    );
                });
            } else {
                for_each_positional(arena, Player::Zero, |opponent| {
                    let play = simulate_from(arena, opponent, &local.strategy1, v);
                    assert!(
                        !up_membership(condition, &play),
                        "Player 1 strategy lost from his region"
                    );
                });
            }
        }
    };

    for _ in 0..40 {
        let arena = ranked_games::random::random_arena(&mut rng, 5, 3);
        let n = arena.vertex_count();
        let set = ranked_games::random::random_set(&mut rng, n, 0.4);

        let avoid = set.clone();
        check(
            &arena,
            &QualitativeCondition::SafetyAvoid(set.clone()),
            &solve_safety(&arena, &set),
            &move |a| solve_safety(a, &avoid),
        );

        let target = set.clone();
        check(
            &arena,
            &QualitativeCondition::Buchi(set.clone()),
            &solve_buchi(&arena, &set),
            &move |a| solve_buchi(a, &target),
        );

        let forbidden = set.clone();
        check(
            &arena,
            &QualitativeCondition::CoBuchi(set.clone()),
            &solve_cobuchi(&arena, &set),
            &move |a| solve_cobuchi(a, &forbidden),
        );

        let pairs = vec![RrPair {
            request: set,
            response: ranked_games::random::random_set(&mut rng, n, 0.4),
        }];
        let rr_pairs = pairs.clone();
        check(
            &arena,
            &QualitativeCondition::RequestResponse(pairs.clone()),
            &solve_request_response(&arena, &pairs),
            &move |a| solve_request_response(a, &rr_pairs),
        );
    }
}

/// Membership of prefix-independent conditions is invariant under
/// prepending finite play prefixes.
#[test]
fn prefix_independence_flags_hold_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..40 {
        let arena = ranked_games::random::random_arena(&mut rng, 5, 3);
        let n = arena.vertex_count();
        let set = ranked_games::random::random_set(&mut rng, n, 0.4);
        for condition in [
            QualitativeCondition::Buchi(set.clone()),
            QualitativeCondition::CoBuchi(set.clone()),
        ] {
            assert!(condition.prefix_independent());
            for play in sample_up_plays(&arena, 20, 4, 4, 11) {
                // Prepend a random walk ending at the play's first vertex.
                let mut walk = vec![arena.initial()];
                for _ in 0..rng.gen_range(0..4) {
                    let succ = arena.successors(*walk.last().unwrap());
                    walk.push(succ[rng.gen_range(0..succ.len())]);
                }
                if !arena.has_edge(*walk.last().unwrap(), play.first_vertex()) {
                    continue;
                }
                let mut prefix = walk;
                prefix.extend_from_slice(play.prefix());
                let extended = UpPlay::new(prefix, play.cycle().to_vec());
                assert_eq!(
                    up_membership(&condition, &play),
                    up_membership(&condition, &extended),
                    "prefix-independent membership changed under a prefix"
                );
            }
        }
    }
    // The safety primitive is genuinely prefix-dependent: a bad prefix
    // flips membership.
    let avoid = QualitativeCondition::SafetyAvoid(VertexSet::from_iter(2, [0]));
    assert!(!avoid.prefix_independent());
    let tail = UpPlay::new(vec![], vec![1]);
    let with_bad_prefix = UpPlay::new(vec![0], vec![1]);
    assert!(up_membership(&avoid, &tail));
    assert!(!up_membership(&avoid, &with_bad_prefix));
}

/// Threshold solvers are sound by exhaustive simulation: the Player 0
/// strategy never exceeds the bound from her region, the Player 1 strategy
/// always exceeds it from his.
#[test]
fn ranked_threshold_strategies_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for round in 0..40 {
        let arena = ranked_games::random::random_arena(&mut rng, 5, 3);
        let n = arena.vertex_count();
        let ranks = ranked_games::random::random_ranks(&mut rng, n, 3);
        let set = ranked_games::random::random_set(&mut rng, n, 0.4);
        let b = rng.gen_range(0..=3);

        let mut games = vec![
            (
                VertexRankedGame::new(
                    arena.clone(),
                    QualitativeCondition::SafetyAvoid(set.clone()),
                    ranks.clone(),
                    RankMode::Sup,
                ),
                0usize,
            ),
            (
                VertexRankedGame::new(
                    arena.clone(),
                    QualitativeCondition::Buchi(set.clone()),
                    ranks.clone(),
                    RankMode::Sup,
                ),
                0,
            ),
        ];
        if round % 2 == 0 {
            games.push((
                VertexRankedGame::new(
                    arena.clone(),
                    QualitativeCondition::Buchi(set.clone()),
                    ranks.clone(),
                    RankMode::Lim,
                ),
                1,
            ));
            games.push((
                VertexRankedGame::new(
                    arena.clone(),
                    QualitativeCondition::SafetyAvoid(set.clone()),
                    ranks.clone(),
                    RankMode::Lim,
                ),
                2,
            ));
        }

        for (game, solver) in &games {
            let result = match solver {
                0 => solve_sup_bound(game, b),
                1 => solve_lim_prefix_independent(game, b).unwrap().0,
                _ => solve_lim_cobuchi_route(game, b),
            };
            for v in result.w0.iter() {
                for_each_positional(&arena, Player::One, |adversary| {
                    let play = simulate_from(&arena, &result.strategy0, adversary, v);
                    assert!(
                        eval_rank(game, &play) <= Value::Finite(b),
                        "bound exceeded from the winning region"
                    );
                });
            }
            for v in result.w1.iter() {
                for_each_positional(&arena, Player::Zero, |opponent| {
                    let play = simulate_from(&arena, opponent, &result.strategy1, v);
                    assert!(
                        eval_rank(game, &play) > Value::Finite(b),
                        "Player 1 failed to exceed the bound"
                    );
                });
            }
        }
    }
}

/// Along any play consistent with the stitched lim-sup strategy the layer
/// index never increases.
#[test]
fn stitched_strategy_descends_through_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..40 {
        let arena = ranked_games::random::random_arena(&mut rng, 5, 3);
        let n = arena.vertex_count();
        let game = VertexRankedGame::new(
            arena.clone(),
            QualitativeCondition::Buchi(ranked_games::random::random_set(&mut rng, n, 0.4)),
            ranked_games::random::random_ranks(&mut rng, n, 3),
            RankMode::Lim,
        );
        let (result, deco) = solve_lim_prefix_independent(&game, 1).unwrap();
        let layer_of = |v: usize| -> Option<usize> {
            deco.layers.iter().position(|l| l.a.contains(v))
        };
        for v in result.w0.iter() {
            for_each_positional(&arena, Player::One, |adversary| {
                let play = simulate_from(&arena, &result.strategy0, adversary, v);
                let horizon = play.prefix().len() + 2 * play.cycle().len();
                let mut last = layer_of(play.at(0)).expect("winning region is layered");
                for i in 1..=horizon {
                    let here = layer_of(play.at(i)).expect("stitched play stays in the layers");
                    assert!(here <= last, "layer index increased along the play");
                    last = here;
                }
            });
        }
    }
}

/// Witnesses stay valid when the threshold parameter is lowered, with the
/// correction function unchanged.
#[test]
fn reductions_are_downward_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    for i in 0..30 {
        let arena = ranked_games::random::random_arena(&mut rng, 4, 3);
        let n = arena.vertex_count();
        let pairs = vec![RrPair {
            request: ranked_games::random::random_set(&mut rng, n, 0.4),
            response: ranked_games::random::random_set(&mut rng, n, 0.4),
        }];
        let costs = vec![(0..arena.edge_count())
            .map(|_| rng.gen_range(0..=1))
            .collect()];
        let game = RrCostGame::new(arena.clone(), RrCostSpec::new(&arena, pairs, costs));
        let reduction = build_rr_reduction(&game, RrSemantics::Repaired);
        let plays = sample_up_plays(&game.arena, 50, 6, 6, 500 + i);
        let full = reduction.witness.threshold.finite().unwrap();
        for lower in [0, full / 2, full] {
            let mut witness = reduction.witness.clone();
            witness.threshold = Value::Finite(lower);
            let outcome = verify_reduction_on_plays(
                &witness,
                |p| eval_cost_reqres(&game, p),
                |p| eval_rank(&reduction.target, p),
                &plays,
            );
            assert!(
                outcome.passed(),
                "witness failed at lowered threshold {lower}: {:?}",
                outcome.counterexample.map(|c| c.detail)
            );
        }
    }
}

/// A corrupted rank function makes the play-contract verification report a
/// counterexample (mutation control for the verifier).
#[test]
fn corrupted_ranks_are_caught() {
    let arena = Arena::new(
        vec![Player::Zero, Player::Zero, Player::Zero],
        vec![vec![1], vec![2], vec![0]],
        0,
    )
    .unwrap();
    let pairs = vec![RrPair {
        request: VertexSet::from_iter(3, [0]),
        response: VertexSet::from_iter(3, [2]),
    }];
    let spec = RrCostSpec::from_entries(&arena, pairs, &[(0, 0, 1, 1), (0, 1, 2, 1)]);
    let game = RrCostGame::new(arena, spec);
    let reduction = build_rr_reduction(&game, RrSemantics::Repaired);
    let mut corrupted = reduction.target.clone();
    corrupted.ranks[0] += 5;
    let plays = sample_up_plays(&game.arena, 20, 4, 4, 9);
    let outcome = verify_reduction_on_plays(
        &reduction.witness,
        |p| eval_cost_reqres(&game, p),
        |p| eval_rank(&corrupted, p),
        &plays,
    );
    assert!(!outcome.passed(), "corrupted ranks slipped through verification");
}

/// Lifting a target strategy and pushing it back yields the same measured
/// cost in the target game, and extensions of lift-consistent plays are
/// consistent with the original target strategy.
#[test]
fn lift_push_round_trip_and_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    let mut tested = 0;
    while tested < 25 {
        let arena = ranked_games::random::random_arena(&mut rng, 4, 2);
        let n = arena.vertex_count();
        let pairs = vec![RrPair {
            request: ranked_games::random::random_set(&mut rng, n, 0.4),
            response: ranked_games::random::random_set(&mut rng, n, 0.4),
        }];
        let costs = vec![(0..arena.edge_count())
            .map(|_| rng.gen_range(0..=1))
            .collect()];
        let game = RrCostGame::new(arena.clone(), RrCostSpec::new(&arena, pairs, costs));
        let out = solve_rr(&game, None);
        let RrQuery::Optimal { value } = out.query else { unreachable!() };
        if !value.is_finite() {
            continue;
        }
        tested += 1;
        let reduction = out.reduction;
        let solved = solve_sup_bound(&reduction.target, value.finite().unwrap());
        let target_strategy = solved.strategy0;
        let lifted = lift_strategy(&game.arena, &reduction.witness, &target_strategy);
        assert_eq!(
            lifted.size(),
            reduction.witness.memory.state_count() * target_strategy.size()
        );
        let pushed = push_strategy(&reduction.witness, &lifted);
        let direct = vertex_ranked_strategy_cost(&reduction.target, &target_strategy);
        let round_trip = vertex_ranked_strategy_cost(&reduction.target, &pushed);
        assert_eq!(direct, round_trip, "push ∘ lift changed the measured cost");

        // Plays consistent with the lift extend to plays consistent with
        // the original target strategy.
        for_each_positional(&game.arena, Player::One, |adversary| {
            let play = simulate_from(&game.arena, &lifted, adversary, game.arena.initial());
            let ext = extend_play(&reduction.witness.memory, &reduction.witness.product, &play);
            assert!(
                is_consistent(&reduction.target.arena, &ext, &target_strategy),
                "extension of a lift-consistent play deviates from the target strategy"
            );
        });
    }
}

/// Any strategy measured at a finite cost wins the qualitative
/// request-response game.
#[test]
fn finite_cost_implies_qualitative_win() {
    let mut rng = ChaCha8Rng::seed_from_u64(137);
    let mut finite = 0;
    while finite < 30 {
        let arena = ranked_games::random::random_arena(&mut rng, 4, 3);
        let n = arena.vertex_count();
        let pairs = vec![RrPair {
            request: ranked_games::random::random_set(&mut rng, n, 0.4),
            response: ranked_games::random::random_set(&mut rng, n, 0.4),
        }];
        let costs = vec![(0..arena.edge_count())
            .map(|_| rng.gen_range(0..=2))
            .collect()];
        let game = RrCostGame::new(arena.clone(), RrCostSpec::new(&arena, pairs.clone(), costs));
        let out = solve_rr(&game, None);
        let RrQuery::Optimal { value } = out.query else { unreachable!() };
        let Some(strategy) = out.strategy else { continue };
        assert!(value.is_finite());
        finite += 1;
        let condition = QualitativeCondition::RequestResponse(pairs);
        for_each_positional(&game.arena, Player::One, |adversary| {
            let play = simulate_from(&game.arena, &strategy, adversary, game.arena.initial());
            assert!(
                up_membership(&condition, &play),
                "finite-cost strategy lost the qualitative game"
            );
        });
    }
}

/// McNaughton characterization on ultimately periodic plays: the quantized
/// Muller value is infinite exactly when the infinity set is in the family.
#[test]
fn muller_divergence_characterizes_the_family() {
    use ranked_games::muller::{eval_quantmuller, MullerGame, MullerSpec};
    let mut rng = ChaCha8Rng::seed_from_u64(139);
    for _ in 0..40 {
        let arena = ranked_games::random::random_arena(&mut rng, 4, 3);
        let n = arena.vertex_count();
        let mut family = Vec::new();
        for _ in 0..3 {
            let f = ranked_games::random::random_set(&mut rng, n, 0.5);
            if !f.is_empty() && !family.contains(&f) {
                family.push(f);
            }
        }
        let game = MullerGame::new(arena.clone(), MullerSpec::new(n, family).unwrap());
        for play in sample_up_plays(&arena, 30, 5, 5, 77) {
            let inf = play.inf_set(n);
            let divergent = game.spec.family_contains(&inf);
            assert_eq!(
                eval_quantmuller(&game, &play) == Value::Infinite,
                divergent,
                "divergence must characterize family membership of the infinity set"
            );
        }
    }
}

/// The infinity set of an extended play projects back to the infinity set
/// of the original play.
#[test]
fn extended_inf_set_projects_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(149);
    for _ in 0..30 {
        let arena = ranked_games::random::random_arena(&mut rng, 4, 3);
        let n = arena.vertex_count();
        let memory = ranked_games::random::random_memory(&mut rng, n, 3);
        let product = ranked_games::memory::product_arena(&arena, &memory);
        for play in sample_up_plays(&arena, 20, 4, 4, 33) {
            let ext = extend_play(&memory, &product, &play);
            let projected = VertexSet::from_iter(
                n,
                ext.cycle().iter().map(|&p| product.vertex_of(p)),
            );
            assert_eq!(projected, play.inf_set(n));
        }
    }
}
