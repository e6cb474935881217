//! Correction functions, reduction witnesses, composition, strategy
//! transfer, and contract verification.
//!
//! A quantitative reduction relates a source game to a target game over the
//! expanded arena `A × M`: below a threshold `b`, play costs correspond
//! exactly through a correction function `f`; at or above it, target costs
//! are at least `f(b)`. Witnesses compose transitively and transport
//! strategies in both directions.

use thiserror::Error;

use crate::arena::Arena;
use crate::memory::{extend_play, product_arena, product_memory, MemoryStructure, ProductArena};
use crate::play::{FiniteStateStrategy, UpPlay};
use crate::value::Value;

/// Tail behavior of a table-based correction function beyond its table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TailBehavior {
    Constant(Value),
    /// `x ↦ x + c` for arguments past the table, `∞ ↦ ∞`.
    AddConstant(u64),
}

/// A closed, evaluable correction function over `N ∪ {∞}`.
///
/// `Cap(b)` is the default used by the built-in reductions:
/// `cap_b(x) = min(b, x)` for finite `x` and `cap_b(∞) = ∞`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CorrectionFunction {
    Identity,
    Cap(u64),
    /// `Composed(inner, outer)` evaluates `outer(inner(x))`.
    Composed(Box<CorrectionFunction>, Box<CorrectionFunction>),
    /// Explicit values on `[0, T]` with a described tail; checks against
    /// this form are finite-range and therefore advisory.
    TableTail {
        table: Vec<Value>,
        tail: TailBehavior,
    },
}

impl CorrectionFunction {
    pub fn eval(&self, x: Value) -> Value {
        match self {
            CorrectionFunction::Identity => x,
            CorrectionFunction::Cap(b) => match x {
                Value::Finite(n) => Value::Finite(n.min(*b)),
                Value::Infinite => Value::Infinite,
            },
            CorrectionFunction::Composed(inner, outer) => outer.eval(inner.eval(x)),
            CorrectionFunction::TableTail { table, tail } => match x {
                Value::Finite(n) if (n as usize) < table.len() => table[n as usize],
                Value::Finite(n) => match tail {
                    TailBehavior::Constant(v) => *v,
                    TailBehavior::AddConstant(c) => Value::Finite(n.saturating_add(*c)),
                },
                Value::Infinite => match tail {
                    TailBehavior::Constant(v) => *v,
                    TailBehavior::AddConstant(_) => Value::Infinite,
                },
            },
        }
    }
}

/// Verifies the three clauses of the `b`-correction definition over the
/// sample points `{0, …, range} ∪ {∞}`: strict monotonicity below `b`,
/// `f(b') < f(b)` for `b' < b`, and `f(b') ≥ f(b)` for `b' ≥ b`.
///
/// The check is exact for `Cap` and compositions of `Cap`s (whose behavior
/// past the range is determined), advisory for table-based functions.
pub fn correction_check(f: &CorrectionFunction, b: Value, range: u64) -> bool {
    if let Value::Finite(bf) = b {
        assert!(range >= bf, "range must cover the threshold");
    }
    let fb = f.eval(b);
    let below = |x: u64| Value::Finite(x) < b;

    // Strict monotonicity below b over consecutive sample points.
    for x in 0..range {
        if below(x + 1) && f.eval(Value::Finite(x)) >= f.eval(Value::Finite(x + 1)) {
            return false;
        }
    }
    for x in (0..=range).map(Value::Finite).chain([Value::Infinite]) {
        let fx = f.eval(x);
        if x < b && fx >= fb {
            return false;
        }
        if x >= b && fx < fb {
            return false;
        }
    }
    // With b = ∞, strict monotonicity forces f(∞) = ∞.
    if b == Value::Infinite && f.eval(Value::Infinite) != Value::Infinite {
        return false;
    }
    true
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the second reduction's source does not match the first one's target")]
    ChainMismatch,
    #[error("no threshold satisfies the composition formula (f1(0) exceeds b2)")]
    EmptyCompositionThreshold,
}

/// Ties a source game to a target game over `A × M`: the memory structure,
/// the expanded arena it induces, the correction function, the threshold,
/// and optionally a declared cap of the source game.
#[derive(Clone, Debug)]
pub struct ReductionWitness {
    pub memory: MemoryStructure,
    pub product: ProductArena,
    pub correction: CorrectionFunction,
    pub threshold: Value,
    pub source_cap: Option<u64>,
}

impl ReductionWitness {
    /// An identity reduction: trivial memory, identity correction, no bound.
    pub fn identity(arena: &Arena) -> ReductionWitness {
        let memory = MemoryStructure::trivial(arena.vertex_count());
        let product = product_arena(arena, &memory);
        ReductionWitness {
            memory,
            product,
            correction: CorrectionFunction::Identity,
            threshold: Value::Infinite,
            source_cap: None,
        }
    }
}

/// Composes two chained witnesses. The memory is the memory product, the
/// correction function the composition, and the threshold follows the case
/// split: `b1` when `b2 ≥ f1(b1)`, otherwise the largest `b'` with
/// `f1(b') ≤ b2`.
pub fn compose_reductions(
    source: &Arena,
    r1: &ReductionWitness,
    r2: &ReductionWitness,
) -> Result<ReductionWitness, ReductionError> {
    if r1.memory.vertex_count() != source.vertex_count()
        || r2.memory.vertex_count() != r1.product.arena.vertex_count()
    {
        return Err(ReductionError::ChainMismatch);
    }

    let f1 = &r1.correction;
    let threshold = if r2.threshold >= f1.eval(r1.threshold) {
        r1.threshold
    } else {
        // Here r2.threshold is finite and f1 is strictly monotone below
        // r1.threshold, so the scan fails within r2.threshold + 2 steps.
        let mut best: Option<u64> = None;
        let mut x = 0u64;
        loop {
            if f1.eval(Value::Finite(x)) <= r2.threshold {
                best = Some(x);
                x += 1;
            } else {
                break;
            }
        }
        Value::Finite(best.ok_or(ReductionError::EmptyCompositionThreshold)?)
    };

    let memory = product_memory(&r1.memory, &r1.product, &r2.memory);
    let product = product_arena(source, &memory);
    let correction = CorrectionFunction::Composed(
        Box::new(r1.correction.clone()),
        Box::new(r2.correction.clone()),
    );
    let check_range = match threshold {
        Value::Finite(b) => b.max(16),
        Value::Infinite => 16,
    };
    debug_assert!(correction_check(&correction, threshold, check_range));
    Ok(ReductionWitness {
        memory,
        product,
        correction,
        threshold,
        source_cap: r1.source_cap,
    })
}

/// Transfers a finite-state strategy of the target game back to the source:
/// the lift runs the reduction memory alongside the strategy memory and
/// projects the prescribed product moves to vertices. Its size is the
/// product of the two memory sizes, and for every `b' < b` a target cost of
/// `f(b')` becomes a source cost of `b'`.
pub fn lift_strategy(
    source: &Arena,
    witness: &ReductionWitness,
    target_strategy: &FiniteStateStrategy,
) -> FiniteStateStrategy {
    let n = source.vertex_count();
    let m2 = &target_strategy.memory;
    let combined = product_memory(&witness.memory, &witness.product, m2);
    let k2 = m2.state_count();
    let mut next = vec![None; combined.state_count() * n];
    for s1 in 0..witness.memory.state_count() {
        for s2 in 0..k2 {
            for v in 0..n {
                if source.owner(v) != target_strategy.player {
                    continue;
                }
                let mv = witness
                    .product
                    .pair_index(v, s1)
                    .and_then(|p| target_strategy.next_move(p, s2))
                    .map(|q| witness.product.vertex_of(q))
                    .or_else(|| source.successors(v).iter().copied().min());
                next[(s1 * k2 + s2) * n + v] = mv;
            }
        }
    }
    FiniteStateStrategy::new(target_strategy.player, combined, next)
}

/// Pushes a finite-state source strategy forward to the target game: the
/// strategy memory tracks the source memory over projected vertices, and a
/// prescribed source move is paired with the induced memory update.
pub fn push_strategy(
    witness: &ReductionWitness,
    source_strategy: &FiniteStateStrategy,
) -> FiniteStateStrategy {
    let product = &witness.product;
    let np = product.arena.vertex_count();
    let k = source_strategy.memory.state_count();
    let mut table = vec![0usize; k * np];
    let mut next = vec![None; k * np];
    for s in 0..k {
        for p in 0..np {
            let v = product.vertex_of(p);
            table[s * np + p] = source_strategy.memory.update(s, v);
            if product.arena.owner(p) != source_strategy.player {
                continue;
            }
            next[s * np + p] = source_strategy
                .next_move(v, s)
                .map(|t| {
                    let mt = witness.memory.update(product.state_of(p), t);
                    product
                        .pair_index(t, mt)
                        .expect("successor pair of a reachable pair is reachable")
                })
                .or_else(|| product.arena.successors(p).iter().copied().min());
        }
    }
    let memory = MemoryStructure::new(k, source_strategy.memory.initial(), np, table)
        .expect("tracked table is closed");
    FiniteStateStrategy::new(source_strategy.player, memory, next)
}

/// A failed check of the reduction contract on one play.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub play: UpPlay,
    pub source_cost: Value,
    pub target_cost: Value,
    pub detail: String,
}

/// Outcome of checking the reduction contract over a play sample.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks the reduction contract on each play: exact cost correspondence
/// through `f` below the threshold, `f(b)` as a lower bound at or above it,
/// and the threshold-transfer contrapositives (a target cost below `f(b')`
/// certifies a source cost below `b'`, and equality transfers). Returns the
/// first counterexample play, if any.
pub fn verify_reduction_on_plays<F, G>(
    witness: &ReductionWitness,
    source_eval: F,
    target_eval: G,
    plays: &[UpPlay],
) -> VerificationReport
where
    F: Fn(&UpPlay) -> Value,
    G: Fn(&UpPlay) -> Value,
{
    let f = &witness.correction;
    let b = witness.threshold;
    let fb = f.eval(b);
    for (i, play) in plays.iter().enumerate() {
        let cost = source_eval(play);
        let ext = extend_play(&witness.memory, &witness.product, play);
        let cost_t = target_eval(&ext);

        let fail = |detail: String| VerificationReport {
            checked: i + 1,
            counterexample: Some(Counterexample {
                play: play.clone(),
                source_cost: cost,
                target_cost: cost_t,
                detail,
            }),
        };

        if cost < b {
            let expected = f.eval(cost);
            if cost_t != expected {
                return fail(format!(
                    "cost {cost} below threshold {b} must map to {expected}, target gave {cost_t}"
                ));
            }
        } else if cost_t < fb {
            return fail(format!(
                "cost {cost} at or above threshold {b} must map to at least {fb}, target gave {cost_t}"
            ));
        }

        // Contrapositive checks over a bounded range of intermediate bounds.
        let limit = match b {
            Value::Finite(t) => t.min(256),
            Value::Infinite => match (cost, cost_t) {
                (Value::Finite(c), Value::Finite(ct)) => c.max(ct).saturating_add(2).min(256),
                _ => 16,
            },
        };
        for bp in 0..limit {
            let fbp = f.eval(Value::Finite(bp));
            if cost_t < fbp && cost >= Value::Finite(bp) {
                return fail(format!(
                    "target cost below f({bp}) = {fbp} but source cost {cost} is not below {bp}"
                ));
            }
            if cost_t == fbp && cost != Value::Finite(bp) {
                return fail(format!(
                    "target cost equals f({bp}) = {fbp} but source cost is {cost}, not {bp}"
                ));
            }
        }
        if cost_t >= fb && cost < b {
            // Lemma-style clause 3 only bites when clause 1 held exactly, so
            // reaching this means f(cost) ≥ f(b) for cost < b.
            return fail(format!(
                "target cost {cost_t} at least f(b) = {fb} but source cost {cost} is below {b}"
            ));
        }
    }
    VerificationReport {
        checked: plays.len(),
        counterexample: None,
    }
}
