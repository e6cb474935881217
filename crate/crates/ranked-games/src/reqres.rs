//! Request-response games with costs: cost-of-response evaluation, the cap,
//! the reduction to vertex-ranked sup request-response games, and the
//! end-to-end solver.

use crate::arena::Arena;
use crate::memory::{build_memory_product, MemoryOracle};
use crate::play::{FiniteStateStrategy, UpPlay};
use crate::qualitative::{QualitativeCondition, RrPair};
use crate::ranked::{solve_sup_bound, RankMode, VertexRankedGame};
use crate::reduction::{lift_strategy, CorrectionFunction, ReductionWitness};
use crate::value::Value;

/// Request-response pairs with per-condition edge costs. Costs default to
/// zero for unlisted edges; `W` is the largest cost assigned to any edge.
#[derive(Clone, Debug)]
pub struct RrCostSpec {
    pub pairs: Vec<RrPair>,
    costs: Vec<Vec<u64>>,
    max_cost: u64,
}

impl RrCostSpec {
    /// Dense per-condition, per-edge tables aligned with the arena's edge
    /// indexing.
    pub fn new(arena: &Arena, pairs: Vec<RrPair>, costs: Vec<Vec<u64>>) -> RrCostSpec {
        assert_eq!(costs.len(), pairs.len());
        for table in &costs {
            assert_eq!(table.len(), arena.edge_count());
        }
        let max_cost = costs.iter().flatten().copied().max().unwrap_or(0);
        RrCostSpec { pairs, costs, max_cost }
    }

    /// Sparse construction: entries `(condition, from, to, cost)`, zero
    /// elsewhere.
    pub fn from_entries(
        arena: &Arena,
        pairs: Vec<RrPair>,
        entries: &[(usize, usize, usize, u64)],
    ) -> RrCostSpec {
        let mut costs = vec![vec![0; arena.edge_count()]; pairs.len()];
        for &(c, u, v, cost) in entries {
            let e = arena
                .edge_index(u, v)
                .unwrap_or_else(|| panic!("no edge from {u} to {v}"));
            costs[c][e] = cost;
        }
        RrCostSpec::new(arena, pairs, costs)
    }

    pub fn condition_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn max_edge_cost(&self) -> u64 {
        self.max_cost
    }

    pub fn edge_cost(&self, arena: &Arena, condition: usize, from: usize, to: usize) -> u64 {
        match arena.edge_index(from, to) {
            Some(e) => self.costs[condition][e],
            None => 0,
        }
    }
}

/// An arena and its request-response cost specification.
#[derive(Clone, Debug)]
pub struct RrCostGame {
    pub arena: Arena,
    pub spec: RrCostSpec,
}

impl RrCostGame {
    pub fn new(arena: Arena, spec: RrCostSpec) -> RrCostGame {
        RrCostGame { arena, spec }
    }

    /// The qualitative condition obtained by dropping the cost tables.
    pub fn qualitative_condition(&self) -> QualitativeCondition {
        QualitativeCondition::RequestResponse(self.spec.pairs.clone())
    }
}

/// Maximal cost-of-response over all requests of the play: for each
/// condition and each request position, the summed edge cost to the first
/// response at or after it, infinite when some request is never answered.
///
/// Periodic request positions have equal cost, so one representative per
/// cycle offset suffices, and the scan never needs to look further than the
/// prefix plus two full cycle periods.
pub fn eval_cost_reqres(game: &RrCostGame, play: &UpPlay) -> Value {
    let spec = &game.spec;
    let prefix_len = play.prefix().len();
    let cycle_len = play.cycle().len();
    let seq: Vec<usize> = play
        .prefix()
        .iter()
        .chain(play.cycle())
        .chain(play.cycle())
        .copied()
        .collect();

    let mut worst = 0u64;
    for (c, pair) in spec.pairs.iter().enumerate() {
        let scan = |j: usize| -> Option<u64> {
            if pair.response.contains(seq[j]) {
                return Some(0);
            }
            let mut sum = 0;
            for k in j + 1..seq.len() {
                sum += spec.edge_cost(&game.arena, c, seq[k - 1], seq[k]);
                if pair.response.contains(seq[k]) {
                    return Some(sum);
                }
            }
            None
        };
        let cycle_answers = play.cycle().iter().any(|&v| pair.response.contains(v));
        for j in 0..prefix_len + cycle_len {
            if !pair.request.contains(seq[j]) {
                continue;
            }
            let answered_at_all = if j < prefix_len {
                play.prefix()[j..].iter().any(|&v| pair.response.contains(v)) || cycle_answers
            } else {
                cycle_answers
            };
            if !answered_at_all {
                return Value::Infinite;
            }
            let cost = scan(j).expect("answered request found within the scan window");
            worst = worst.max(cost);
        }
    }
    Value::Finite(worst)
}

/// The cap `d · 2^d · n · W` on achievable finite values: a winning strategy
/// of the qualitative game with at most `d · 2^d` memory states cannot keep
/// a request open longer than its product with the vertex count.
pub fn cap_bound(game: &RrCostGame) -> u64 {
    let d = game.spec.condition_count() as u64;
    let n = game.arena.vertex_count() as u64;
    let w = game.spec.max_edge_cost();
    if d == 0 {
        return 0;
    }
    d.saturating_mul(1u64 << d.min(62))
        .saturating_mul(n)
        .saturating_mul(w)
}

/// Which memory semantics the reduction uses at response positions.
///
/// `Repaired` (the default) records the accumulated cost of a request in the
/// rank of the state where it is answered, and processes responses at the
/// initial vertex; this makes the cost correspondence exact. `StrictPaper`
/// resets pending costs without recording them and opens initial requests
/// unconditionally, for comparison experiments.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RrSemantics {
    Repaired,
    StrictPaper,
}

/// One memory state of the cost-tracking reduction: the current vertex, the
/// pending accumulated cost per condition (`None` when no request is open),
/// a sticky overflow flag, and the largest cost recorded at a response
/// processed in this step.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RrMemoryState {
    pub vertex: usize,
    pub pending: Vec<Option<u64>>,
    pub overflow: bool,
    pub answer_peak: u64,
}

impl RrMemoryState {
    /// Rank of the product vertices carrying this state: `b + 1` once the
    /// overflow flag is raised, otherwise the largest pending or
    /// just-answered cost.
    pub fn rank(&self, bound: u64) -> u64 {
        if self.overflow {
            bound + 1
        } else {
            self.pending
                .iter()
                .map(|p| p.unwrap_or(0))
                .max()
                .unwrap_or(0)
                .max(self.answer_peak)
        }
    }
}

struct CostTracker<'a> {
    game: &'a RrCostGame,
    bound: u64,
    mode: RrSemantics,
}

impl CostTracker<'_> {
    fn overflowed(&self, vertex: usize, d: usize) -> RrMemoryState {
        RrMemoryState {
            vertex,
            pending: vec![None; d],
            overflow: true,
            answer_peak: 0,
        }
    }

    fn settle(&self, vertex: usize, mut pending: Vec<Option<u64>>) -> RrMemoryState {
        // Overflow check, then request openings, then responses, in order.
        if pending.iter().flatten().any(|&x| x > self.bound) {
            return self.overflowed(vertex, pending.len());
        }
        let mut answer_peak = 0;
        for (c, pair) in self.game.spec.pairs.iter().enumerate() {
            if pair.request.contains(vertex) {
                pending[c] = Some(pending[c].unwrap_or(0));
            }
        }
        for (c, pair) in self.game.spec.pairs.iter().enumerate() {
            if pair.response.contains(vertex) {
                if let Some(x) = pending[c] {
                    if self.mode == RrSemantics::Repaired {
                        answer_peak = answer_peak.max(x);
                    }
                }
                pending[c] = None;
            }
        }
        RrMemoryState {
            vertex,
            pending,
            overflow: false,
            answer_peak,
        }
    }
}

impl MemoryOracle for CostTracker<'_> {
    type State = RrMemoryState;

    fn start(&self, vertex: usize) -> RrMemoryState {
        let d = self.game.spec.condition_count();
        match self.mode {
            RrSemantics::Repaired => self.settle(vertex, vec![None; d]),
            RrSemantics::StrictPaper => {
                // Verbatim initial request function: requests open at the
                // initial vertex, responses there are not processed.
                let pending = self
                    .game
                    .spec
                    .pairs
                    .iter()
                    .map(|pair| pair.request.contains(vertex).then_some(0))
                    .collect();
                RrMemoryState {
                    vertex,
                    pending,
                    overflow: false,
                    answer_peak: 0,
                }
            }
        }
    }

    fn step(&self, state: &RrMemoryState, from: usize, vertex: usize) -> RrMemoryState {
        if state.overflow {
            return self.overflowed(vertex, state.pending.len());
        }
        debug_assert_eq!(state.vertex, from);
        let pending = state
            .pending
            .iter()
            .enumerate()
            .map(|(c, p)| p.map(|x| x + self.game.spec.edge_cost(&self.game.arena, c, from, vertex)))
            .collect();
        self.settle(vertex, pending)
    }
}

/// The reduction of a request-response game with costs to a vertex-ranked
/// sup request-response game over the expanded arena.
#[derive(Clone, Debug)]
pub struct RrReduction {
    pub witness: ReductionWitness,
    pub target: VertexRankedGame,
    /// The cap `d · 2^d · n · W`; the reduction threshold is `cap + 1`.
    pub cap: u64,
    /// Interned memory states, aligned with the witness memory indices.
    pub states: Vec<RrMemoryState>,
}

/// Builds the cost-tracking memory (reachable states only), the lifted
/// request-response pairs, and the rank function over the expanded arena.
/// The correction function is `cap_{b+1}` at threshold `b + 1` for
/// `b = d · 2^d · n · W`.
pub fn build_rr_reduction(game: &RrCostGame, mode: RrSemantics) -> RrReduction {
    let cap = cap_bound(game);
    let tracker = CostTracker { game, bound: cap, mode };
    let built = build_memory_product(&game.arena, &tracker, false);

    let np = built.product.arena.vertex_count();
    let ranks: Vec<u64> = (0..np)
        .map(|p| built.states[built.product.state_of(p)].rank(cap))
        .collect();
    let lifted_pairs: Vec<RrPair> = game
        .spec
        .pairs
        .iter()
        .map(|pair| RrPair {
            request: crate::arena::VertexSet::from_iter(
                np,
                (0..np).filter(|&p| pair.request.contains(built.product.vertex_of(p))),
            ),
            response: crate::arena::VertexSet::from_iter(
                np,
                (0..np).filter(|&p| pair.response.contains(built.product.vertex_of(p))),
            ),
        })
        .collect();

    let target = VertexRankedGame::new(
        built.product.arena.clone(),
        QualitativeCondition::RequestResponse(lifted_pairs),
        ranks,
        RankMode::Sup,
    );
    let witness = ReductionWitness {
        memory: built.memory,
        product: built.product,
        correction: CorrectionFunction::Cap(cap + 1),
        threshold: Value::Finite(cap + 1),
        source_cap: Some(cap),
    };
    RrReduction {
        witness,
        target,
        cap,
        states: built.states,
    }
}

/// Outcome of a request-response query: either a decision with respect to a
/// bound or the optimal value, plus Player 0's lifted strategy when she
/// achieves the query.
#[derive(Clone, Debug)]
pub enum RrQuery {
    Decision { bound: u64, player0_wins: bool },
    Optimal { value: Value },
}

#[derive(Clone, Debug)]
pub struct RrOutcome {
    pub query: RrQuery,
    pub strategy: Option<FiniteStateStrategy>,
    pub reduction: RrReduction,
}

/// Solves a request-response game with costs: with a bound, decides whether
/// Player 0 has a strategy of cost at most the bound (bounds above the cap
/// are clamped, they are equivalent); without one, binary-searches the
/// optimal value on `[0, cap]`, reporting infinity exactly when Player 0
/// loses the qualitative request-response game.
pub fn solve_rr(game: &RrCostGame, bound: Option<u64>) -> RrOutcome {
    let reduction = build_rr_reduction(game, RrSemantics::Repaired);
    let target_initial = reduction.target.arena.initial();
    let solve_at = |beta: u64| solve_sup_bound(&reduction.target, beta);
    let wins = |beta: u64| solve_at(beta).w0.contains(target_initial);

    let lift_at = |beta: u64| {
        let solved = solve_at(beta);
        lift_strategy(&game.arena, &reduction.witness, &solved.strategy0)
    };

    match bound {
        Some(raw) => {
            let beta = raw.min(reduction.cap);
            let player0_wins = wins(beta);
            let strategy = player0_wins.then(|| lift_at(beta));
            RrOutcome {
                query: RrQuery::Decision { bound: raw, player0_wins },
                strategy,
                reduction,
            }
        }
        None => {
            if !wins(reduction.cap) {
                return RrOutcome {
                    query: RrQuery::Optimal { value: Value::Infinite },
                    strategy: None,
                    reduction,
                };
            }
            let (mut lo, mut hi) = (0u64, reduction.cap);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if wins(mid) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let strategy = Some(lift_at(lo));
            RrOutcome {
                query: RrQuery::Optimal { value: Value::Finite(lo) },
                strategy,
                reduction,
            }
        }
    }
}
