//! Exact cost measurement of Player 0 strategies.
//!
//! Fixing a finite-state strategy for Player 0 turns the game into a
//! one-player graph over (vertex, memory) configurations. On that graph the
//! worst consistent play is computable exactly: a reachability or cycle
//! analysis decides whether Player 1 can break the underlying condition
//! (cost infinite), and otherwise the worst rank is a maximum over reachable
//! configurations (sup mode) or over configurations lying on cycles (lim
//! mode). Costed request-response and Muller strategies are measured through
//! their reductions by pushing the strategy into the target game.

use crate::arena::{Arena, Player};
#[cfg(test)]
use crate::arena::VertexSet;
use crate::muller::{build_muller_reduction, MullerGame};
use crate::play::FiniteStateStrategy;
use crate::qualitative::QualitativeCondition;
use crate::ranked::{RankMode, VertexRankedGame};
use crate::reduction::push_strategy;
use crate::reqres::{build_rr_reduction, RrCostGame, RrSemantics};
use crate::value::Value;

/// The one-player graph induced by fixing Player 0's strategy.
struct Solitaire {
    /// Node `i` is the configuration `(vertex[i], memory state)`.
    vertex: Vec<usize>,
    succ: Vec<Vec<usize>>,
}

fn build_solitaire(arena: &Arena, strategy: &FiniteStateStrategy) -> Solitaire {
    assert_eq!(strategy.player, Player::Zero, "solitaire analysis fixes Player 0");
    let mut index = std::collections::HashMap::new();
    let mut nodes = vec![(arena.initial(), strategy.memory.initial())];
    index.insert(nodes[0], 0);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (v, m) = nodes[cursor];
        cursor += 1;
        let targets: Vec<usize> = match arena.owner(v) {
            Player::Zero => vec![strategy
                .next_move(v, m)
                .expect("strategy must cover reachable Player 0 vertices")],
            Player::One => arena.successors(v).to_vec(),
        };
        let mut list = Vec::with_capacity(targets.len());
        for t in targets {
            let mt = strategy.memory.update(m, t);
            let id = *index.entry((t, mt)).or_insert_with(|| {
                nodes.push((t, mt));
                nodes.len() - 1
            });
            if !list.contains(&id) {
                list.push(id);
            }
        }
        succ.push(list);
    }
    Solitaire {
        vertex: nodes.into_iter().map(|(v, _)| v).collect(),
        succ,
    }
}

/// Per-node flag: the node lies on a cycle of the masked subgraph
/// (a strongly connected component of size at least two, or a self-loop).
fn on_cycle(solitaire: &Solitaire, mask: impl Fn(usize) -> bool) -> Vec<bool> {
    let n = solitaire.vertex.len();
    // Iterative Tarjan over the masked subgraph.
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut comp = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut comp_count = 0;

    for root in 0..n {
        if !mask(root) || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&t) = solitaire.succ[v].get(*ei) {
                *ei += 1;
                if !mask(t) {
                    continue;
                }
                if index[t] == usize::MAX {
                    call.push((t, 0));
                } else if on_stack[t] {
                    low[v] = low[v].min(index[t]);
                }
            } else {
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
                call.pop();
                if let Some(&mut (p, _)) = call.last_mut() {
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }

    let mut size = vec![0usize; comp_count];
    for v in 0..n {
        if comp[v] != usize::MAX {
            size[comp[v]] += 1;
        }
    }
    (0..n)
        .map(|v| {
            mask(v)
                && (size[comp[v]] > 1
                    || solitaire.succ[v].iter().any(|&t| t == v))
        })
        .collect()
}

/// Whether some consistent play violates the condition (making the
/// strategy's cost infinite).
fn condition_breakable(solitaire: &Solitaire, condition: &QualitativeCondition) -> bool {
    match condition {
        QualitativeCondition::SafetyAvoid(bad) => solitaire
            .vertex
            .iter()
            .any(|&v| bad.contains(v)),
        QualitativeCondition::Buchi(target) => {
            on_cycle(solitaire, |i| !target.contains(solitaire.vertex[i]))
                .iter()
                .any(|&b| b)
        }
        QualitativeCondition::CoBuchi(forbidden) => {
            let cyc = on_cycle(solitaire, |_| true);
            // A cyclic component containing a forbidden node yields a play
            // visiting it infinitely often.
            let n = solitaire.vertex.len();
            let mut comp_has_forbidden = std::collections::HashMap::new();
            let comps = component_ids(solitaire);
            for i in 0..n {
                if forbidden.contains(solitaire.vertex[i]) {
                    comp_has_forbidden.insert(comps[i], ());
                }
            }
            (0..n).any(|i| cyc[i] && comp_has_forbidden.contains_key(&comps[i]) && {
                // The cycle must pass through a forbidden node of the same
                // component; strong connectivity guarantees one exists.
                (0..n).any(|j| comps[j] == comps[i] && forbidden.contains(solitaire.vertex[j]))
            })
        }
        QualitativeCondition::RequestResponse(pairs) => pairs.iter().any(|pair| {
            let free = |i: usize| !pair.response.contains(solitaire.vertex[i]);
            let cyc = on_cycle(solitaire, &free);
            // Backward reachability inside the response-free subgraph from
            // the response-free cycles.
            let n = solitaire.vertex.len();
            let mut can_starve = cyc.clone();
            loop {
                let mut changed = false;
                for i in 0..n {
                    if !can_starve[i] && free(i) && solitaire.succ[i].iter().any(|&t| can_starve[t])
                    {
                        can_starve[i] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            (0..n).any(|i| {
                can_starve[i]
                    && pair.request.contains(solitaire.vertex[i])
                    && !pair.response.contains(solitaire.vertex[i])
            })
        }),
    }
}

fn component_ids(solitaire: &Solitaire) -> Vec<usize> {
    // Tarjan again, unmasked, returning component ids.
    let n = solitaire.vertex.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut comp = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut comp_count = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&t) = solitaire.succ[v].get(*ei) {
                *ei += 1;
                if index[t] == usize::MAX {
                    call.push((t, 0));
                } else if on_stack[t] {
                    low[v] = low[v].min(index[t]);
                }
            } else {
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
                call.pop();
                if let Some(&mut (p, _)) = call.last_mut() {
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }
    comp
}

/// Exact cost of a Player 0 strategy in a vertex-ranked game: infinite when
/// some consistent play breaks the underlying condition, otherwise the worst
/// rank reachable (sup mode) or recurring (lim mode).
pub fn vertex_ranked_strategy_cost(
    game: &VertexRankedGame,
    strategy: &FiniteStateStrategy,
) -> Value {
    let solitaire = build_solitaire(&game.arena, strategy);
    if condition_breakable(&solitaire, &game.condition) {
        return Value::Infinite;
    }
    let worst = match game.mode {
        RankMode::Sup => solitaire
            .vertex
            .iter()
            .map(|&v| game.ranks[v])
            .max(),
        RankMode::Lim => {
            let cyc = on_cycle(&solitaire, |_| true);
            solitaire
                .vertex
                .iter()
                .zip(&cyc)
                .filter(|&(_, &c)| c)
                .map(|(&v, _)| game.ranks[v])
                .max()
        }
    };
    Value::Finite(worst.expect("a nonempty graph has reachable nodes"))
}

/// A measured strategy cost: exact below the window bound (and exact when
/// infinite), otherwise only a lower bound of `exact_below`.
#[derive(Clone, Copy, Debug)]
pub struct MeasuredCost {
    pub value: Value,
    pub exact_below: Option<u64>,
}

impl MeasuredCost {
    pub fn exact(&self) -> Option<Value> {
        match (self.value, self.exact_below) {
            (v, None) => Some(v),
            (Value::Infinite, _) => Some(Value::Infinite),
            (Value::Finite(n), Some(t)) if n < t => Some(Value::Finite(n)),
            _ => None,
        }
    }

    /// Whether the strategy's cost is at most `claim`, when decidable from
    /// the measurement.
    pub fn certifies(&self, claim: u64) -> Option<bool> {
        if let Some(v) = self.exact() {
            return Some(v <= Value::Finite(claim));
        }
        // The measurement is a lower bound of exact_below.
        let t = self.exact_below.unwrap();
        (claim < t).then_some(false)
    }
}

/// Cost of a strategy in a plain qualitative game: zero when winning,
/// infinite otherwise.
pub fn qualitative_strategy_cost(
    arena: &Arena,
    condition: &QualitativeCondition,
    strategy: &FiniteStateStrategy,
) -> Value {
    let solitaire = build_solitaire(arena, strategy);
    if condition_breakable(&solitaire, condition) {
        Value::Infinite
    } else {
        Value::Finite(0)
    }
}

/// Measures a request-response strategy by pushing it through the cost
/// reduction: exact below `cap + 1`, where the target rank saturates.
pub fn reqres_strategy_cost(game: &RrCostGame, strategy: &FiniteStateStrategy) -> MeasuredCost {
    let reduction = build_rr_reduction(game, RrSemantics::Repaired);
    let pushed = push_strategy(&reduction.witness, strategy);
    let value = vertex_ranked_strategy_cost(&reduction.target, &pushed);
    MeasuredCost {
        value,
        exact_below: Some(reduction.cap + 1),
    }
}

/// Measures a quantitative Muller strategy through the safety reduction:
/// exact below three, where the score tracking saturates.
pub fn muller_strategy_cost(game: &MullerGame, strategy: &FiniteStateStrategy) -> MeasuredCost {
    let reduction = build_muller_reduction(game);
    let pushed = push_strategy(&reduction.witness, strategy);
    let value = vertex_ranked_strategy_cost(&reduction.target, &pushed);
    MeasuredCost {
        value,
        exact_below: Some(3),
    }
}
