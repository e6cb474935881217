//! Command dispatch for the game solver CLI.
//!
//! Exit codes: 0 when Player 0 achieves the query, 1 when Player 1 does,
//! 2 on any error. All regular output is a single JSON document on stdout;
//! diagnostics go to stderr.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ranked_games::arena::{Player, VertexSet};
use ranked_games::io::{
    self, arena_to_file, strategy_to_file, to_json, GameFile, ParsedGame, ParsedInput,
    StrategyFile,
};
use ranked_games::muller::{solve_muller, MullerQuery};
use ranked_games::oracle::oracle_value_positional;
use ranked_games::play::{simulate, FiniteStateStrategy, UpPlay};
use ranked_games::qualitative::{solve_qualitative, up_membership, SolveResult};
use ranked_games::ranked::{
    optimize_bound, solve_lim_cobuchi_route, solve_lim_prefix_independent, solve_sup_bound,
    vertex_ranked_to_solver, RankMode, RankedSolver, VertexRankedGame,
};
use ranked_games::reqres::{build_rr_reduction, eval_cost_reqres, solve_rr, RrQuery, RrSemantics};
use ranked_games::resilience::{solve_resilient, ResilienceLevel};
use ranked_games::value::Value;
use ranked_games::verify::{
    muller_strategy_cost, qualitative_strategy_cost, reqres_strategy_cost,
    vertex_ranked_strategy_cost, MeasuredCost,
};

#[derive(Parser, Debug)]
#[command(name = "rgsolve", about = "Solver for quantitative infinite games on finite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Determine the winner, optionally with respect to a cost bound.
    Solve {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Find the minimal bound Player 0 can ensure.
    Optimize {
        #[arg(long)]
        game: PathBuf,
    },
    /// Build the quantitative reduction for the game and report it.
    Reduce {
        #[arg(long)]
        game: PathBuf,
        /// Print the reduced vertex-ranked game as a game file.
        #[arg(long)]
        emit_target: bool,
    },
    /// Play two strategy files against each other.
    Simulate {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        adversary: PathBuf,
    },
    /// Check that a Player 0 strategy achieves a claimed cost bound.
    VerifyStrategy {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        claim: u64,
    },
    /// Synthesize a maximally fault-resilient safety controller.
    Resilience {
        #[arg(long)]
        game: PathBuf,
        /// Optimize eventual resilience (lim-sup) instead.
        #[arg(long)]
        eventual: bool,
    },
    /// Brute-force positional ground truth for small games.
    Oracle {
        #[arg(long)]
        game: PathBuf,
    },
}

/// Runs one command line; returns the exit code and writes outputs to the
/// given sinks. The binary wires these to the process streams.
pub fn run_command(args: &[String], stdout: &mut String, stderr: &mut String) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return 2;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            2
        }
    }
}

fn load_game(path: &PathBuf) -> Result<ParsedInput, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    io::parse_game(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_strategy(
    path: &PathBuf,
    arena: &ranked_games::arena::Arena,
) -> Result<FiniteStateStrategy, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    io::strategy_from_json(&bytes, arena).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct Regions {
    w0: Vec<usize>,
    w1: Vec<usize>,
}

impl Regions {
    fn new(w0: &VertexSet, w1: &VertexSet) -> Regions {
        Regions {
            w0: w0.iter().collect(),
            w1: w1.iter().collect(),
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    command: &'static str,
    winner: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regions: Option<Regions>,
    /// Player 0's winning strategy, present when she achieves the query;
    /// re-verifiable through `verify-strategy`.
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<StrategyFile>,
    /// Player 1's counter-strategy where one is synthesized.
    #[serde(skip_serializing_if = "Option::is_none")]
    adversary_strategy: Option<StrategyFile>,
}

fn emit<T: Serialize>(stdout: &mut String, value: &T) {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    stdout.push_str(&s);
}

fn winner_code(player0_achieves: bool) -> i32 {
    if player0_achieves {
        0
    } else {
        1
    }
}

fn solve_ranked_at(game: &VertexRankedGame, bound: u64) -> Result<SolveResult, String> {
    match vertex_ranked_to_solver(game) {
        Ok(RankedSolver::Sup) => Ok(solve_sup_bound(game, bound)),
        Ok(RankedSolver::LimPrefixIndependent) => solve_lim_prefix_independent(game, bound)
            .map(|(r, _)| r)
            .map_err(|e| e.to_string()),
        Ok(RankedSolver::LimCoBuchiRoute) => Ok(solve_lim_cobuchi_route(game, bound)),
        Err(e) => Err(e.to_string()),
    }
}

fn dispatch(command: Command, stdout: &mut String, stderr: &mut String) -> Result<i32, String> {
    match command {
        Command::Solve { game, bound } => {
            let input = load_game(&game)?;
            solve_command(&input, bound, stdout)
        }
        Command::Optimize { game } => {
            let input = load_game(&game)?;
            optimize_command(&input, stdout)
        }
        Command::Reduce { game, emit_target } => {
            let input = load_game(&game)?;
            reduce_command(&input, emit_target, stdout, stderr)
        }
        Command::Simulate { game, strategy, adversary } => {
            let input = load_game(&game)?;
            let s0 = load_strategy(&strategy, input.game.arena())?;
            let s1 = load_strategy(&adversary, input.game.arena())?;
            simulate_command(&input, &s0, &s1, stdout)
        }
        Command::VerifyStrategy { game, strategy, claim } => {
            let input = load_game(&game)?;
            let s0 = load_strategy(&strategy, input.game.arena())?;
            verify_command(&input, &s0, claim, stdout)
        }
        Command::Resilience { game, eventual } => {
            let input = load_game(&game)?;
            resilience_command(&input, eventual, stdout)
        }
        Command::Oracle { game } => {
            let input = load_game(&game)?;
            oracle_command(&input, stdout)
        }
    }
}

fn solve_command(
    input: &ParsedInput,
    bound: Option<u64>,
    stdout: &mut String,
) -> Result<i32, String> {
    let initial = input.game.arena().initial();
    let (wins0, value, regions, strategy0, strategy1, bound_out) = match (&input.game, bound) {
        (ParsedGame::Qualitative { .. }, Some(_)) => {
            return Err("--bound requires a quantitative condition".to_string());
        }
        (ParsedGame::Qualitative { arena, condition }, None) => {
            let r = solve_qualitative(arena, condition);
            let wins = r.w0.contains(initial);
            (
                wins,
                None,
                Some(Regions::new(&r.w0, &r.w1)),
                wins.then(|| r.strategy0.clone()),
                Some(r.strategy1),
                None,
            )
        }
        (ParsedGame::VertexRanked(g), Some(b)) => {
            let r = solve_ranked_at(g, b)?;
            let wins = r.w0.contains(initial);
            (
                wins,
                None,
                Some(Regions::new(&r.w0, &r.w1)),
                wins.then(|| r.strategy0.clone()),
                Some(r.strategy1),
                Some(b),
            )
        }
        (ParsedGame::VertexRanked(g), None) => {
            let r = solve_qualitative(&g.arena, &g.condition);
            let wins = r.w0.contains(initial);
            (
                wins,
                None,
                Some(Regions::new(&r.w0, &r.w1)),
                wins.then(|| r.strategy0.clone()),
                Some(r.strategy1),
                None,
            )
        }
        (ParsedGame::RequestResponseCosts(g), Some(b)) => {
            let out = solve_rr(g, Some(b));
            let RrQuery::Decision { player0_wins, .. } = out.query else {
                unreachable!()
            };
            (player0_wins, None, None, out.strategy, None, Some(b))
        }
        (ParsedGame::RequestResponseCosts(g), None) => {
            let r = solve_qualitative(&g.arena, &g.qualitative_condition());
            let wins = r.w0.contains(initial);
            (
                wins,
                None,
                Some(Regions::new(&r.w0, &r.w1)),
                wins.then(|| r.strategy0.clone()),
                Some(r.strategy1),
                None,
            )
        }
        (ParsedGame::QuantMuller(g), Some(b)) => {
            let out = solve_muller(g, Some(b));
            let MullerQuery::Decision { player0_wins, .. } = out.query else {
                unreachable!()
            };
            (player0_wins, None, None, out.strategy, None, Some(b))
        }
        (ParsedGame::QuantMuller(g), None) => {
            let out = solve_muller(g, Some(2));
            let MullerQuery::Decision { player0_wins, .. } = out.query else {
                unreachable!()
            };
            (player0_wins, None, None, out.strategy, None, None)
        }
    };
    let output = SolveOutput {
        command: "solve",
        winner: if wins0 { 0 } else { 1 },
        bound: bound_out,
        value,
        regions,
        strategy: strategy0.map(|s| strategy_to_file(&s)),
        adversary_strategy: strategy1
            .filter(|_| !wins0)
            .map(|s| strategy_to_file(&s)),
    };
    emit(stdout, &output);
    Ok(winner_code(wins0))
}

fn optimize_command(input: &ParsedInput, stdout: &mut String) -> Result<i32, String> {
    let (value, strategy, regions) = match &input.game {
        ParsedGame::Qualitative { .. } => {
            return Err("optimize requires a quantitative condition".to_string());
        }
        ParsedGame::VertexRanked(g) => {
            let solver = vertex_ranked_to_solver(g).map_err(|e| e.to_string())?;
            let opt = optimize_bound(g, solver).map_err(|e| e.to_string())?;
            let regions = opt
                .solution
                .as_ref()
                .map(|r| Regions::new(&r.w0, &r.w1));
            (
                opt.value,
                opt.solution.map(|r| r.strategy0),
                regions,
            )
        }
        ParsedGame::RequestResponseCosts(g) => {
            let out = solve_rr(g, None);
            let RrQuery::Optimal { value } = out.query else { unreachable!() };
            (value, out.strategy, None)
        }
        ParsedGame::QuantMuller(g) => {
            let out = solve_muller(g, None);
            let MullerQuery::Optimal { value } = out.query else { unreachable!() };
            (value, out.strategy, None)
        }
    };
    let output = SolveOutput {
        command: "optimize",
        winner: if value.is_finite() { 0 } else { 1 },
        bound: None,
        value: Some(value),
        regions,
        strategy: strategy.map(|s| strategy_to_file(&s)),
        adversary_strategy: None,
    };
    emit(stdout, &output);
    Ok(winner_code(value.is_finite()))
}

#[derive(Serialize)]
struct ReduceOutput {
    command: &'static str,
    reduction: &'static str,
    memory_states: usize,
    reachable_pairs: usize,
    full_product: usize,
    threshold: Value,
    correction: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<u64>,
}

fn reduce_command(
    input: &ParsedInput,
    emit_target: bool,
    stdout: &mut String,
    stderr: &mut String,
) -> Result<i32, String> {
    let (summary, target_file) = match &input.game {
        ParsedGame::RequestResponseCosts(g) => {
            let red = build_rr_reduction(g, RrSemantics::Repaired);
            let summary = ReduceOutput {
                command: "reduce",
                reduction: "request-response-costs-to-vertex-ranked",
                memory_states: red.witness.memory.state_count(),
                reachable_pairs: red.witness.product.reachable_size(),
                full_product: red.witness.product.full_size(),
                threshold: red.witness.threshold,
                correction: format!("cap({})", red.cap + 1),
                cap: Some(red.cap),
            };
            let file = GameFile {
                arena: arena_to_file(&red.target.arena),
                condition: io::vertex_ranked_to_file(&red.target),
                faults: None,
            };
            (summary, file)
        }
        ParsedGame::QuantMuller(g) => {
            let red = ranked_games::muller::build_muller_reduction(g);
            let summary = ReduceOutput {
                command: "reduce",
                reduction: "quantitative-muller-to-vertex-ranked-safety",
                memory_states: red.witness.memory.state_count(),
                reachable_pairs: red.witness.product.reachable_size(),
                full_product: red.witness.product.full_size(),
                threshold: red.witness.threshold,
                correction: "cap(3)".to_string(),
                cap: Some(2),
            };
            let file = GameFile {
                arena: arena_to_file(&red.target.arena),
                condition: io::vertex_ranked_to_file(&red.target),
                faults: None,
            };
            (summary, file)
        }
        _ => match &input.fault_arena {
            Some(fa) => {
                let game = ranked_games::resilience::build_resilience_game(fa, RankMode::Sup);
                let summary = ReduceOutput {
                    command: "reduce",
                    reduction: "fault-safety-to-vertex-ranked",
                    memory_states: 1,
                    reachable_pairs: game.arena.vertex_count(),
                    full_product: game.arena.vertex_count(),
                    threshold: Value::Infinite,
                    correction: "identity".to_string(),
                    cap: None,
                };
                let file = GameFile {
                    arena: arena_to_file(&game.arena),
                    condition: io::vertex_ranked_to_file(&game),
                    faults: None,
                };
                (summary, file)
            }
            None => {
                return Err(
                    "reduce requires request-response costs, a Muller condition, or faults"
                        .to_string(),
                )
            }
        },
    };
    if emit_target {
        stdout.push_str(&to_json(&target_file));
        let mut s = serde_json::to_string(&summary).expect("summaries serialize");
        s.push('\n');
        stderr.push_str(&s);
    } else {
        emit(stdout, &summary);
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimulateOutput {
    command: &'static str,
    prefix: Vec<usize>,
    cycle: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    member: Option<bool>,
}

fn simulate_command(
    input: &ParsedInput,
    s0: &FiniteStateStrategy,
    s1: &FiniteStateStrategy,
    stdout: &mut String,
) -> Result<i32, String> {
    if s0.player != Player::Zero || s1.player != Player::One {
        return Err("--strategy must be a Player 0 file and --adversary a Player 1 file".into());
    }
    let arena = input.game.arena();
    s0.validate(arena).map_err(|e| format!("strategy: {e}"))?;
    s1.validate(arena).map_err(|e| format!("adversary: {e}"))?;
    let play = simulate(arena, s0, s1);
    let (value, member) = evaluate_play(&input.game, &play);
    let achieves = member.unwrap_or_else(|| value.unwrap().is_finite());
    let output = SimulateOutput {
        command: "simulate",
        prefix: play.prefix().to_vec(),
        cycle: play.cycle().to_vec(),
        value,
        member,
    };
    emit(stdout, &output);
    Ok(winner_code(achieves))
}

fn evaluate_play(game: &ParsedGame, play: &UpPlay) -> (Option<Value>, Option<bool>) {
    match game {
        ParsedGame::Qualitative { condition, .. } => (None, Some(up_membership(condition, play))),
        ParsedGame::VertexRanked(g) => (Some(ranked_games::ranked::eval_rank(g, play)), None),
        ParsedGame::RequestResponseCosts(g) => (Some(eval_cost_reqres(g, play)), None),
        ParsedGame::QuantMuller(g) => {
            (Some(ranked_games::muller::eval_quantmuller(g, play)), None)
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    command: &'static str,
    claim: u64,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured: Option<Value>,
    exact: bool,
}

fn verify_command(
    input: &ParsedInput,
    strategy: &FiniteStateStrategy,
    claim: u64,
    stdout: &mut String,
) -> Result<i32, String> {
    if strategy.player != Player::Zero {
        return Err("verify-strategy checks Player 0 strategies".to_string());
    }
    strategy
        .validate(input.game.arena())
        .map_err(|e| format!("strategy: {e}"))?;
    let measured: MeasuredCost = match &input.game {
        ParsedGame::Qualitative { arena, condition } => MeasuredCost {
            value: qualitative_strategy_cost(arena, condition, strategy),
            exact_below: None,
        },
        ParsedGame::VertexRanked(g) => MeasuredCost {
            value: vertex_ranked_strategy_cost(g, strategy),
            exact_below: None,
        },
        ParsedGame::RequestResponseCosts(g) => reqres_strategy_cost(g, strategy),
        ParsedGame::QuantMuller(g) => muller_strategy_cost(g, strategy),
    };
    let Some(verified) = measured.certifies(claim) else {
        return Err(format!(
            "claim {claim} lies beyond the reduction's exact window ({}); measured at least {}",
            measured.exact_below.unwrap(),
            measured.value
        ));
    };
    let output = VerifyOutput {
        command: "verify-strategy",
        claim,
        verified,
        measured: measured.exact(),
        exact: measured.exact().is_some(),
    };
    emit(stdout, &output);
    Ok(winner_code(verified))
}

#[derive(Serialize)]
struct ResilienceOutput {
    command: &'static str,
    mode: &'static str,
    resilience: String,
    bound: Value,
    values: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<StrategyFile>,
}

fn resilience_command(
    input: &ParsedInput,
    eventual: bool,
    stdout: &mut String,
) -> Result<i32, String> {
    let Some(fa) = &input.fault_arena else {
        return Err("resilience requires a faults block".to_string());
    };
    let mode = if eventual { RankMode::Lim } else { RankMode::Sup };
    let out = solve_resilient(fa, mode);
    let resilience = match out.level {
        ResilienceLevel::None => "none".to_string(),
        ResilienceLevel::Unbounded => "unbounded".to_string(),
        ResilienceLevel::Faults(k) => k.to_string(),
    };
    let achieves = out.level != ResilienceLevel::None;
    let output = ResilienceOutput {
        command: "resilience",
        mode: if eventual { "eventual" } else { "sup" },
        resilience,
        bound: out.bound,
        values: out
            .val
            .values()
            .iter()
            .map(|v| match v {
                Some(k) => Value::Finite(*k as u64),
                None => Value::Infinite,
            })
            .collect(),
        strategy: out.strategy.map(|s| strategy_to_file(&s)),
    };
    emit(stdout, &output);
    Ok(winner_code(achieves))
}

#[derive(Serialize)]
struct OracleOutput {
    command: &'static str,
    minmax: Vec<Value>,
    maxmin: Vec<Value>,
}

fn oracle_command(input: &ParsedInput, stdout: &mut String) -> Result<i32, String> {
    let arena = input.game.arena();
    let game = &input.game;
    let eval = |play: &UpPlay| -> Value {
        let (value, member) = evaluate_play(game, play);
        match (value, member) {
            (Some(v), _) => v,
            (None, Some(true)) => Value::Finite(0),
            _ => Value::Infinite,
        }
    };
    let result = oracle_value_positional(arena, eval).map_err(|e| e.to_string())?;
    let achieves = result.minmax[arena.initial()].is_finite();
    let output = OracleOutput {
        command: "oracle",
        minmax: result.minmax,
        maxmin: result.maxmin,
    };
    emit(stdout, &output);
    Ok(winner_code(achieves))
}

// Re-exported so integration tests can build game files programmatically.
pub use ranked_games;
