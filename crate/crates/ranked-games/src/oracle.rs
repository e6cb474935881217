//! Brute-force ground truth: strategy-pair enumeration, determinacy checks,
//! and play sampling.
//!
//! The enumeration oracles are valid as ground truth only on arenas and
//! conditions where optimality within the enumerated strategy class holds
//! for both players (positional for safety-based vertex-ranked sup, Büchi,
//! co-Büchi, safety ∩ co-Büchi); callers apply them to reduced or product
//! games where that is established.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arena::{Arena, Player};
use crate::memory::MemoryStructure;
use crate::play::{FiniteStateStrategy, PositionalStrategy, UpPlay};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("strategy space too large to enumerate ({pairs} pairs)")]
    TooLarge { pairs: u128 },
}

const ENUMERATION_GUARD: u128 = 10_000_000;

/// Per-start-vertex min-max and max-min values with a witnessing strategy
/// pair for the arena's initial vertex. On determined instances the two
/// value vectors coincide.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub minmax: Vec<Value>,
    pub maxmin: Vec<Value>,
    pub strategy0: FiniteStateStrategy,
    pub strategy1: FiniteStateStrategy,
}

/// Mixed-radix odometer over per-slot alternatives.
struct Odometer {
    radix: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(radix: Vec<usize>) -> Odometer {
        let done = radix.iter().any(|&r| r == 0);
        Odometer {
            digits: vec![0; radix.len()],
            radix,
            done,
        }
    }

    fn count(radix: &[usize]) -> u128 {
        radix.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
    }

    fn advance(&mut self) {
        for i in 0..self.digits.len() {
            self.digits[i] += 1;
            if self.digits[i] < self.radix[i] {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

/// All positional move vectors for `player`, as full per-vertex successor
/// choices (arbitrary entries at non-owned vertices are fixed to the first
/// successor).
fn positional_slots(arena: &Arena, player: Player) -> (Vec<usize>, Vec<usize>) {
    let owned: Vec<usize> = (0..arena.vertex_count())
        .filter(|&v| arena.owner(v) == player)
        .collect();
    let radix = owned.iter().map(|&v| arena.out_degree(v)).collect();
    (owned, radix)
}

fn moves_from_digits(arena: &Arena, owned: &[usize], digits: &[usize]) -> Vec<usize> {
    let mut moves: Vec<usize> = (0..arena.vertex_count())
        .map(|v| arena.successors(v)[0])
        .collect();
    for (i, &v) in owned.iter().enumerate() {
        moves[v] = arena.successors(v)[digits[i]];
    }
    moves
}

/// The unique play of a positional pair from `start`, via first-repeat cycle
/// detection in O(n).
fn simulate_positional(moves: &[usize], start: usize, stamp: &mut [usize], generation: usize) -> UpPlay {
    let mut word = Vec::new();
    let mut v = start;
    loop {
        if stamp[v] >= generation {
            let at = stamp[v] - generation;
            let cycle = word.split_off(at);
            return UpPlay::new(word, cycle);
        }
        stamp[v] = generation + word.len();
        word.push(v);
        v = moves[v];
    }
}

/// Enumerates all positional strategy pairs and reports, per start vertex,
/// the min-max (Player 0 commits first) and max-min (Player 1 commits first)
/// values of the evaluator.
pub fn oracle_value_positional<F>(arena: &Arena, eval: F) -> Result<OracleResult, OracleError>
where
    F: Fn(&UpPlay) -> Value,
{
    let n = arena.vertex_count();
    let (owned0, radix0) = positional_slots(arena, Player::Zero);
    let (owned1, radix1) = positional_slots(arena, Player::One);
    let pairs = Odometer::count(&radix0) * Odometer::count(&radix1);
    if pairs > ENUMERATION_GUARD {
        return Err(OracleError::TooLarge { pairs });
    }

    let mut stamp = vec![0usize; n];
    let mut generation = 1;
    let mut play_value = |m0: &[usize], m1: &[usize], start: usize, stamp: &mut Vec<usize>| {
        let mut moves = m0.to_vec();
        for v in 0..n {
            if arena.owner(v) == Player::One {
                moves[v] = m1[v];
            }
        }
        generation += n + 1;
        eval(&simulate_positional(&moves, start, stamp, generation))
    };

    // Pass 1: min over σ of max over τ.
    let mut minmax = vec![Value::Infinite; n];
    let mut best0: Option<Vec<usize>> = None;
    let mut odo0 = Odometer::new(radix0.clone());
    while !odo0.done {
        let m0 = moves_from_digits(arena, &owned0, &odo0.digits);
        let mut worst = vec![Value::Finite(0); n];
        let mut odo1 = Odometer::new(radix1.clone());
        while !odo1.done {
            let m1 = moves_from_digits(arena, &owned1, &odo1.digits);
            for start in 0..n {
                let v = play_value(&m0, &m1, start, &mut stamp);
                if v > worst[start] {
                    worst[start] = v;
                }
            }
            odo1.advance();
        }
        if worst[arena.initial()] < minmax[arena.initial()] || best0.is_none() {
            best0 = Some(m0.clone());
        }
        for start in 0..n {
            if worst[start] < minmax[start] {
                minmax[start] = worst[start];
            }
        }
        odo0.advance();
    }

    // Pass 2: max over τ of min over σ.
    let mut maxmin = vec![Value::Finite(0); n];
    let mut first = true;
    let mut best1: Option<Vec<usize>> = None;
    let mut odo1 = Odometer::new(radix1.clone());
    while !odo1.done {
        let m1 = moves_from_digits(arena, &owned1, &odo1.digits);
        let mut best = vec![Value::Infinite; n];
        let mut odo0 = Odometer::new(radix0.clone());
        while !odo0.done {
            let m0 = moves_from_digits(arena, &owned0, &odo0.digits);
            for start in 0..n {
                let v = play_value(&m0, &m1, start, &mut stamp);
                if v < best[start] {
                    best[start] = v;
                }
            }
            odo0.advance();
        }
        if first || best[arena.initial()] > maxmin[arena.initial()] {
            best1 = Some(m1.clone());
        }
        for start in 0..n {
            if first || best[start] > maxmin[start] {
                maxmin[start] = best[start];
            }
        }
        first = false;
        odo1.advance();
    }

    let to_strategy = |player: Player, moves: Option<Vec<usize>>| {
        let moves = moves.unwrap_or_else(|| (0..n).map(|v| arena.successors(v)[0]).collect());
        PositionalStrategy::new(
            player,
            (0..n)
                .map(|v| (arena.owner(v) == player).then(|| moves[v]))
                .collect(),
        )
        .to_finite_state()
    };
    Ok(OracleResult {
        minmax,
        maxmin,
        strategy0: to_strategy(Player::Zero, best0),
        strategy1: to_strategy(Player::One, best1),
    })
}

/// A finite-state strategy skeleton under enumeration: an update table over
/// `k` states and a per-(owned vertex, state) move choice.
struct Skeleton {
    k: usize,
    update_slots: usize,
    owned: Vec<usize>,
}

impl Skeleton {
    fn new(arena: &Arena, player: Player, k: usize) -> Skeleton {
        let owned = (0..arena.vertex_count())
            .filter(|&v| arena.owner(v) == player)
            .collect();
        Skeleton {
            k,
            update_slots: k * arena.vertex_count(),
            owned,
        }
    }

    fn radix(&self, arena: &Arena) -> Vec<usize> {
        let mut radix = vec![self.k; self.update_slots];
        for &v in &self.owned {
            for _ in 0..self.k {
                radix.push(arena.out_degree(v));
            }
        }
        radix
    }

    /// Splits odometer digits into (update table, per-(owned, state) move).
    fn decode<'a>(&self, digits: &'a [usize]) -> (&'a [usize], &'a [usize]) {
        digits.split_at(self.update_slots)
    }
}

fn simulate_fs_vs_positional<F>(
    arena: &Arena,
    skeleton: &Skeleton,
    update: &[usize],
    choices: &[usize],
    fs_player: Player,
    pos_moves: &[usize],
    start: usize,
    eval: &F,
    stamp: &mut [usize],
    generation: usize,
) -> Value
where
    F: Fn(&UpPlay) -> Value,
{
    let n = arena.vertex_count();
    let k = skeleton.k;
    let mut word = Vec::new();
    let mut v = start;
    let mut m = 0usize;
    loop {
        let cfg = v * k + m;
        if stamp[cfg] >= generation {
            let at = stamp[cfg] - generation;
            let cycle = word.split_off(at);
            return eval(&UpPlay::new(word, cycle));
        }
        stamp[cfg] = generation + word.len();
        word.push(v);
        let next = if arena.owner(v) == fs_player {
            let slot = skeleton.owned.iter().position(|&o| o == v).unwrap();
            arena.successors(v)[choices[slot * k + m]]
        } else {
            pos_moves[v]
        };
        m = update[m * n + next];
        v = next;
    }
}

/// Brackets the value with a fixed `k`-state memory skeleton: the min-max
/// side enumerates finite-state strategies for Player 0 against positional
/// adversaries, the max-min side symmetrically enumerates finite-state
/// strategies for Player 1 against positional Player 0. On instances where
/// `k` states suffice for the minimizer and positional strategies for the
/// maximizer (or vice versa), the brackets coincide with the value.
pub fn oracle_value_finite_memory<F>(
    arena: &Arena,
    eval: F,
    k: usize,
) -> Result<OracleResult, OracleError>
where
    F: Fn(&UpPlay) -> Value,
{
    assert!(k >= 1);
    let n = arena.vertex_count();
    let sk0 = Skeleton::new(arena, Player::Zero, k);
    let sk1 = Skeleton::new(arena, Player::One, k);
    let (_, radix_pos0) = positional_slots(arena, Player::Zero);
    let (_, radix_pos1) = positional_slots(arena, Player::One);
    let pairs0 = Odometer::count(&sk0.radix(arena)) * Odometer::count(&radix_pos1);
    let pairs1 = Odometer::count(&sk1.radix(arena)) * Odometer::count(&radix_pos0);
    if pairs0 > ENUMERATION_GUARD || pairs1 > ENUMERATION_GUARD {
        return Err(OracleError::TooLarge {
            pairs: pairs0.max(pairs1),
        });
    }

    let mut stamp = vec![0usize; n * k];
    let mut generation = 1usize;

    // Min over finite-state σ of max over positional τ.
    let (owned1, _) = positional_slots(arena, Player::One);
    let mut minmax = vec![Value::Infinite; n];
    let mut best0: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut odo = Odometer::new(sk0.radix(arena));
    while !odo.done {
        let (update, choices) = sk0.decode(&odo.digits);
        let mut worst = vec![Value::Finite(0); n];
        let mut odo1 = Odometer::new(radix_pos1.clone());
        let mut aborted = false;
        while !odo1.done {
            let m1 = moves_from_digits(arena, &owned1, &odo1.digits);
            for start in 0..n {
                generation += n * k + 1;
                let v = simulate_fs_vs_positional(
                    arena, &sk0, update, choices, Player::Zero, &m1, start, &eval, &mut stamp,
                    generation,
                );
                if v > worst[start] {
                    worst[start] = v;
                }
            }
            // This skeleton cannot improve any bracket entry anymore.
            if (0..n).all(|s| worst[s] >= minmax[s]) && best0.is_some() {
                aborted = true;
                break;
            }
            odo1.advance();
        }
        if !aborted {
            if worst[arena.initial()] < minmax[arena.initial()] || best0.is_none() {
                best0 = Some((update.to_vec(), choices.to_vec()));
            }
            for start in 0..n {
                if worst[start] < minmax[start] {
                    minmax[start] = worst[start];
                }
            }
        }
        odo.advance();
    }

    // Max over finite-state τ of min over positional σ.
    let (owned0, _) = positional_slots(arena, Player::Zero);
    let mut maxmin = vec![Value::Finite(0); n];
    let mut first = true;
    let mut best1: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut odo = Odometer::new(sk1.radix(arena));
    while !odo.done {
        let (update, choices) = sk1.decode(&odo.digits);
        let mut best = vec![Value::Infinite; n];
        let mut odo0 = Odometer::new(radix_pos0.clone());
        let mut aborted = false;
        while !odo0.done {
            let m0 = moves_from_digits(arena, &owned0, &odo0.digits);
            for start in 0..n {
                generation += n * k + 1;
                let v = simulate_fs_vs_positional(
                    arena, &sk1, update, choices, Player::One, &m0, start, &eval, &mut stamp,
                    generation,
                );
                if v < best[start] {
                    best[start] = v;
                }
            }
            if !first && (0..n).all(|s| best[s] <= maxmin[s]) {
                aborted = true;
                break;
            }
            odo0.advance();
        }
        if !aborted {
            if first || best[arena.initial()] > maxmin[arena.initial()] {
                best1 = Some((update.to_vec(), choices.to_vec()));
            }
            for start in 0..n {
                if first || best[start] > maxmin[start] {
                    maxmin[start] = best[start];
                }
            }
            first = false;
        }
        odo.advance();
    }

    let to_strategy = |player: Player, sk: &Skeleton, digits: Option<(Vec<usize>, Vec<usize>)>| {
        let (update, choices) = digits.unwrap_or_else(|| {
            (
                vec![0; sk.update_slots],
                vec![0; sk.owned.len() * sk.k],
            )
        });
        let memory = MemoryStructure::new(sk.k, 0, n, update).expect("skeleton table in range");
        let mut next = vec![None; sk.k * n];
        for (slot, &v) in sk.owned.iter().enumerate() {
            for m in 0..sk.k {
                next[m * n + v] = Some(arena.successors(v)[choices[slot * sk.k + m]]);
            }
        }
        FiniteStateStrategy::new(player, memory, next)
    };
    let strategy0 = to_strategy(Player::Zero, &sk0, best0);
    let strategy1 = to_strategy(Player::One, &sk1, best1);
    Ok(OracleResult {
        minmax,
        maxmin,
        strategy0,
        strategy1,
    })
}

/// Deterministic random ultimately periodic plays: random walks from the
/// initial vertex, closed into a cycle at the first vertex repetition after
/// the prefix.
pub fn sample_up_plays(
    arena: &Arena,
    count: usize,
    max_prefix: usize,
    max_cycle: usize,
    seed: u64,
) -> Vec<UpPlay> {
    assert!(max_prefix > 0 && max_cycle > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = arena.vertex_count();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let prefix_len = rng.gen_range(0..=max_prefix);
        let mut word = vec![arena.initial()];
        for _ in 0..prefix_len {
            let succ = arena.successors(*word.last().unwrap());
            word.push(succ[rng.gen_range(0..succ.len())]);
        }
        // Walk until a vertex repeats past the prefix; a repeat arrives
        // within n steps once the walk budget is exhausted.
        let base = word.len() - 1;
        let mut last_seen = vec![usize::MAX; n];
        last_seen[word[base]] = base;
        let start_pos = loop {
            let succ = arena.successors(*word.last().unwrap());
            let budget_left = word.len() - base <= max_cycle.max(n);
            let next = if budget_left {
                succ[rng.gen_range(0..succ.len())]
            } else {
                succ[0]
            };
            word.push(next);
            if last_seen[next] != usize::MAX {
                break last_seen[next];
            }
            last_seen[next] = word.len() - 1;
        };
        word.pop();
        let cycle = word.split_off(start_pos);
        out.push(UpPlay::new(word, cycle));
    }
    out
}

/// Whether every start vertex lies in exactly one of the `b`-threshold
/// regions computed by the positional oracle: Player 0 can guarantee
/// at most `b` or Player 1 can guarantee strictly more.
pub fn check_determinacy<F>(arena: &Arena, eval: F, bound: u64) -> Result<bool, OracleError>
where
    F: Fn(&UpPlay) -> Value,
{
    let r = oracle_value_positional(arena, eval)?;
    let b = Value::Finite(bound);
    Ok((0..arena.vertex_count()).all(|v| !(r.maxmin[v] <= b && r.minmax[v] > b)))
}
