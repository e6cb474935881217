//! Game-file parsing and serialization.
//!
//! A game is a single JSON document: an arena block (vertices with owners,
//! an edge list, an initial vertex), exactly one condition block, and an
//! optional faults block. Values serialize `∞` as the string `"inf"`;
//! parse errors carry either the syntax location or the offending field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{Arena, Player, VertexSet};
use crate::muller::{MullerGame, MullerSpec};
use crate::play::FiniteStateStrategy;
use crate::qualitative::{QualitativeCondition, RrPair};
use crate::ranked::{RankMode, VertexRankedGame};
use crate::reqres::{RrCostGame, RrCostSpec};
use crate::resilience::FaultArena;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Semantic { field: String, message: String },
}

fn semantic(field: &str, message: impl Into<String>) -> ParseError {
    ParseError::Semantic {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct GameFile {
    pub arena: ArenaFile,
    pub condition: ConditionFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faults: Option<FaultsFile>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ArenaFile {
    pub vertices: Vec<VertexFile>,
    pub edges: Vec<(usize, usize)>,
    pub initial: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct VertexFile {
    pub id: usize,
    pub owner: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub enum ConditionFile {
    SafetyAvoid(Vec<usize>),
    SafetySafe(Vec<usize>),
    Buchi(Vec<usize>),
    Cobuchi(Vec<usize>),
    RequestResponse { pairs: Vec<PairFile> },
    RequestResponseCosts { pairs: Vec<CostPairFile> },
    QuantMuller { family: Vec<Vec<usize>> },
    VertexRanked {
        mode: String,
        underlying: Box<ConditionFile>,
        ranks: Vec<u64>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PairFile {
    pub request: Vec<usize>,
    pub response: Vec<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CostPairFile {
    pub request: Vec<usize>,
    pub response: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub costs: Vec<EdgeCostFile>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct EdgeCostFile {
    pub from: usize,
    pub to: usize,
    pub cost: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FaultsFile {
    pub edges: Vec<(usize, usize)>,
    pub safe: Vec<usize>,
}

/// A parsed game, dispatched by its condition block.
#[derive(Clone, Debug)]
pub enum ParsedGame {
    Qualitative {
        arena: Arena,
        condition: QualitativeCondition,
    },
    VertexRanked(VertexRankedGame),
    RequestResponseCosts(RrCostGame),
    QuantMuller(MullerGame),
}

impl ParsedGame {
    pub fn arena(&self) -> &Arena {
        match self {
            ParsedGame::Qualitative { arena, .. } => arena,
            ParsedGame::VertexRanked(g) => &g.arena,
            ParsedGame::RequestResponseCosts(g) => &g.arena,
            ParsedGame::QuantMuller(g) => &g.arena,
        }
    }
}

/// A parsed input file: the game plus the optional fault annotation.
#[derive(Clone, Debug)]
pub struct ParsedInput {
    pub game: ParsedGame,
    pub fault_arena: Option<FaultArena>,
}

fn vertex_set(field: &str, n: usize, ids: &[usize]) -> Result<VertexSet, ParseError> {
    let mut set = VertexSet::empty(n);
    for &v in ids {
        if v >= n {
            return Err(semantic(field, format!("dangling vertex id {v}")));
        }
        set.insert(v);
    }
    Ok(set)
}

fn parse_arena(file: &ArenaFile) -> Result<Arena, ParseError> {
    let n = file.vertices.len();
    if n == 0 {
        return Err(semantic("arena.vertices", "arena must have at least one vertex"));
    }
    let mut owner: Vec<Option<Player>> = vec![None; n];
    for v in &file.vertices {
        if v.id >= n {
            return Err(semantic(
                "arena.vertices",
                format!("vertex id {} outside the dense range 0..{n}", v.id),
            ));
        }
        if owner[v.id].is_some() {
            return Err(semantic("arena.vertices", format!("duplicate vertex id {}", v.id)));
        }
        owner[v.id] = Some(
            Player::from_index(v.owner)
                .ok_or_else(|| semantic("arena.vertices", format!("owner must be 0 or 1, got {}", v.owner)))?,
        );
    }
    let owner: Vec<Player> = owner.into_iter().map(|o| o.unwrap()).collect();

    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &file.edges {
        if u >= n || v >= n {
            return Err(semantic("arena.edges", format!("dangling vertex id in edge ({u}, {v})")));
        }
        if successors[u].contains(&v) {
            return Err(semantic("arena.edges", format!("duplicate edge ({u}, {v})")));
        }
        successors[u].push(v);
    }
    if file.initial >= n {
        return Err(semantic("arena.initial", format!("dangling vertex id {}", file.initial)));
    }
    Arena::new(owner, successors, file.initial).map_err(|e| match e {
        crate::arena::ArenaError::Terminal { vertex } => semantic(
            "arena.edges",
            format!("vertex {vertex} is terminal (every vertex needs a successor)"),
        ),
        other => semantic("arena", other.to_string()),
    })
}

fn parse_rr_pairs(arena: &Arena, pairs: &[PairFile]) -> Result<Vec<RrPair>, ParseError> {
    let n = arena.vertex_count();
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(RrPair {
                request: vertex_set(&format!("condition.pairs[{i}].request"), n, &p.request)?,
                response: vertex_set(&format!("condition.pairs[{i}].response"), n, &p.response)?,
            })
        })
        .collect()
}

fn parse_qualitative(
    arena: &Arena,
    condition: &ConditionFile,
    field: &str,
) -> Result<QualitativeCondition, ParseError> {
    let n = arena.vertex_count();
    match condition {
        ConditionFile::SafetyAvoid(ids) => Ok(QualitativeCondition::SafetyAvoid(vertex_set(
            field, n, ids,
        )?)),
        ConditionFile::SafetySafe(ids) => Ok(QualitativeCondition::safety_safe(&vertex_set(
            field, n, ids,
        )?)),
        ConditionFile::Buchi(ids) => Ok(QualitativeCondition::Buchi(vertex_set(field, n, ids)?)),
        ConditionFile::Cobuchi(ids) => {
            Ok(QualitativeCondition::CoBuchi(vertex_set(field, n, ids)?))
        }
        ConditionFile::RequestResponse { pairs } => Ok(QualitativeCondition::RequestResponse(
            parse_rr_pairs(arena, pairs)?,
        )),
        _ => Err(semantic(
            field,
            "expected a qualitative condition (safetyAvoid, safetySafe, buchi, cobuchi, requestResponse)",
        )),
    }
}

/// Parses and validates a game file, reporting the syntax location or the
/// offending field on failure.
pub fn parse_game(bytes: &[u8]) -> Result<ParsedInput, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::Syntax {
        line: 0,
        column: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let file: GameFile = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    parse_game_file(&file)
}

/// Validates an already-deserialized game file.
pub fn parse_game_file(file: &GameFile) -> Result<ParsedInput, ParseError> {
    let arena = parse_arena(&file.arena)?;
    let n = arena.vertex_count();

    let game = match &file.condition {
        ConditionFile::RequestResponseCosts { pairs } => {
            let rr_pairs = parse_rr_pairs(
                &arena,
                &pairs
                    .iter()
                    .map(|p| PairFile {
                        request: p.request.clone(),
                        response: p.response.clone(),
                    })
                    .collect::<Vec<_>>(),
            )?;
            let mut entries = Vec::new();
            for (c, p) in pairs.iter().enumerate() {
                for e in &p.costs {
                    if arena.edge_index(e.from, e.to).is_none() {
                        return Err(semantic(
                            &format!("condition.pairs[{c}].costs"),
                            format!("no edge from {} to {}", e.from, e.to),
                        ));
                    }
                    entries.push((c, e.from, e.to, e.cost));
                }
            }
            let spec = RrCostSpec::from_entries(&arena, rr_pairs, &entries);
            ParsedGame::RequestResponseCosts(RrCostGame::new(arena.clone(), spec))
        }
        ConditionFile::QuantMuller { family } => {
            let sets = family
                .iter()
                .enumerate()
                .map(|(i, ids)| vertex_set(&format!("condition.family[{i}]"), n, ids))
                .collect::<Result<Vec<_>, _>>()?;
            let spec = MullerSpec::new(n, sets)
                .map_err(|e| semantic("condition.family", e.to_string()))?;
            ParsedGame::QuantMuller(MullerGame::new(arena.clone(), spec))
        }
        ConditionFile::VertexRanked { mode, underlying, ranks } => {
            let mode = match mode.as_str() {
                "sup" => RankMode::Sup,
                "lim" => RankMode::Lim,
                other => {
                    return Err(semantic(
                        "condition.mode",
                        format!("expected \"sup\" or \"lim\", got {other:?}"),
                    ))
                }
            };
            if ranks.len() != n {
                return Err(semantic(
                    "condition.ranks",
                    format!("expected {n} ranks, got {}", ranks.len()),
                ));
            }
            let cond = parse_qualitative(&arena, underlying, "condition.underlying")?;
            ParsedGame::VertexRanked(VertexRankedGame::new(
                arena.clone(),
                cond,
                ranks.clone(),
                mode,
            ))
        }
        other => {
            let condition = parse_qualitative(&arena, other, "condition")?;
            ParsedGame::Qualitative {
                arena: arena.clone(),
                condition,
            }
        }
    };

    let fault_arena = match &file.faults {
        Some(f) => {
            let safe = vertex_set("faults.safe", n, &f.safe)?;
            for &(u, v) in &f.edges {
                if u >= n || v >= n {
                    return Err(semantic(
                        "faults.edges",
                        format!("dangling vertex id in fault edge ({u}, {v})"),
                    ));
                }
            }
            Some(
                FaultArena::new(arena, f.edges.clone(), safe)
                    .map_err(|e| semantic("faults.edges", e.to_string()))?,
            )
        }
        None => None,
    };

    Ok(ParsedInput { game, fault_arena })
}

fn set_ids(set: &VertexSet) -> Vec<usize> {
    set.iter().collect()
}

pub fn arena_to_file(arena: &Arena) -> ArenaFile {
    let n = arena.vertex_count();
    ArenaFile {
        vertices: (0..n)
            .map(|v| VertexFile {
                id: v,
                owner: arena.owner(v).index(),
            })
            .collect(),
        edges: (0..n)
            .flat_map(|u| arena.successors(u).iter().map(move |&v| (u, v)))
            .collect(),
        initial: arena.initial(),
    }
}

pub fn qualitative_to_file(condition: &QualitativeCondition) -> ConditionFile {
    match condition {
        QualitativeCondition::SafetyAvoid(b) => ConditionFile::SafetyAvoid(set_ids(b)),
        QualitativeCondition::Buchi(b) => ConditionFile::Buchi(set_ids(b)),
        QualitativeCondition::CoBuchi(f) => ConditionFile::Cobuchi(set_ids(f)),
        QualitativeCondition::RequestResponse(pairs) => ConditionFile::RequestResponse {
            pairs: pairs
                .iter()
                .map(|p| PairFile {
                    request: set_ids(&p.request),
                    response: set_ids(&p.response),
                })
                .collect(),
        },
    }
}

pub fn vertex_ranked_to_file(game: &VertexRankedGame) -> ConditionFile {
    ConditionFile::VertexRanked {
        mode: match game.mode {
            RankMode::Sup => "sup".to_string(),
            RankMode::Lim => "lim".to_string(),
        },
        underlying: Box::new(qualitative_to_file(&game.condition)),
        ranks: game.ranks.clone(),
    }
}

/// Serializes a parsed input back to its file form. Sets come out sorted,
/// so parsing a serialized file and serializing again is the identity.
pub fn input_to_file(input: &ParsedInput) -> GameFile {
    let arena = arena_to_file(input.game.arena());
    let condition = match &input.game {
        ParsedGame::Qualitative { condition, .. } => qualitative_to_file(condition),
        ParsedGame::VertexRanked(g) => vertex_ranked_to_file(g),
        ParsedGame::RequestResponseCosts(g) => ConditionFile::RequestResponseCosts {
            pairs: g
                .spec
                .pairs
                .iter()
                .enumerate()
                .map(|(c, p)| CostPairFile {
                    request: set_ids(&p.request),
                    response: set_ids(&p.response),
                    costs: (0..g.arena.vertex_count())
                        .flat_map(|u| {
                            g.arena.successors(u).iter().map(move |&v| (u, v))
                        })
                        .filter_map(|(u, v)| {
                            let cost = g.spec.edge_cost(&g.arena, c, u, v);
                            (cost > 0).then_some(EdgeCostFile { from: u, to: v, cost })
                        })
                        .collect(),
                })
                .collect(),
        },
        ParsedGame::QuantMuller(g) => ConditionFile::QuantMuller {
            family: g.spec.family().iter().map(set_ids).collect(),
        },
    };
    let faults = input.fault_arena.as_ref().map(|fa| FaultsFile {
        edges: fa.faults.clone(),
        safe: set_ids(&fa.safe),
    });
    GameFile { arena, condition, faults }
}

pub fn to_json(file: &GameFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("game files serialize");
    s.push('\n');
    s
}

/// The Mealy listing of a strategy: memory size, initial state, the full
/// update table in state-major order, and the moves on owned vertices.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct StrategyFile {
    pub player: usize,
    pub states: usize,
    pub initial: usize,
    pub update: Vec<Vec<usize>>,
    pub moves: Vec<MoveFile>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct MoveFile {
    pub state: usize,
    pub vertex: usize,
    pub to: usize,
}

pub fn strategy_to_file(strategy: &FiniteStateStrategy) -> StrategyFile {
    let k = strategy.memory.state_count();
    let n = strategy.memory.vertex_count();
    StrategyFile {
        player: strategy.player.index(),
        states: k,
        initial: strategy.memory.initial(),
        update: (0..k)
            .map(|m| (0..n).map(|v| strategy.memory.update(m, v)).collect())
            .collect(),
        moves: (0..k)
            .flat_map(|m| {
                (0..n).filter_map(move |v| {
                    strategy.next_move(v, m).map(|to| MoveFile { state: m, vertex: v, to })
                })
            })
            .collect(),
    }
}

pub fn strategy_from_file(
    file: &StrategyFile,
    arena: &Arena,
) -> Result<FiniteStateStrategy, ParseError> {
    let n = arena.vertex_count();
    let player = Player::from_index(file.player)
        .ok_or_else(|| semantic("strategy.player", "player must be 0 or 1"))?;
    if file.update.len() != file.states {
        return Err(semantic("strategy.update", "one row per memory state required"));
    }
    let mut table = Vec::with_capacity(file.states * n);
    for (m, row) in file.update.iter().enumerate() {
        if row.len() != n {
            return Err(semantic(
                "strategy.update",
                format!("row {m} must list {n} entries"),
            ));
        }
        table.extend_from_slice(row);
    }
    let memory = crate::memory::MemoryStructure::new(file.states, file.initial, n, table)
        .map_err(|e| semantic("strategy.update", e.to_string()))?;
    let mut next = vec![None; file.states * n];
    for mv in &file.moves {
        if mv.state >= file.states || mv.vertex >= n {
            return Err(semantic("strategy.moves", "state or vertex out of range"));
        }
        if !arena.has_edge(mv.vertex, mv.to) {
            return Err(semantic(
                "strategy.moves",
                format!("no edge from {} to {}", mv.vertex, mv.to),
            ));
        }
        next[mv.state * n + mv.vertex] = Some(mv.to);
    }
    Ok(FiniteStateStrategy::new(player, memory, next))
}

pub fn strategy_to_json(strategy: &FiniteStateStrategy) -> String {
    let mut s = serde_json::to_string_pretty(&strategy_to_file(strategy))
        .expect("strategies serialize");
    s.push('\n');
    s
}

pub fn strategy_from_json(bytes: &[u8], arena: &Arena) -> Result<FiniteStateStrategy, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::Syntax {
        line: 0,
        column: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let file: StrategyFile = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    strategy_from_file(&file, arena)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "arena": {
            "vertices": [{"id": 0, "owner": 0}],
            "edges": [[0, 0]],
            "initial": 0
        },
        "condition": {"safetyAvoid": []}
    }"#;

    #[test]
    fn minimal_safety_file_parses() {
        let input = parse_game(MINIMAL.as_bytes()).unwrap();
        match &input.game {
            ParsedGame::Qualitative { condition, .. } => {
                assert!(matches!(condition, QualitativeCondition::SafetyAvoid(s) if s.is_empty()));
            }
            _ => panic!("expected a qualitative game"),
        }
    }

    #[test]
    fn terminal_vertex_is_an_error() {
        let text = r#"{
            "arena": {
                "vertices": [{"id": 0, "owner": 0}, {"id": 1, "owner": 1}],
                "edges": [[0, 1]],
                "initial": 0
            },
            "condition": {"buchi": [1]}
        }"#;
        let err = parse_game(text.as_bytes()).unwrap_err();
        match err {
            ParseError::Semantic { field, message } => {
                assert_eq!(field, "arena.edges");
                assert!(message.contains("terminal"));
            }
            other => panic!("expected a semantic error, got {other}"),
        }
    }

    #[test]
    fn dangling_ids_are_rejected() {
        let text = r#"{
            "arena": {
                "vertices": [{"id": 0, "owner": 0}],
                "edges": [[0, 0]],
                "initial": 0
            },
            "condition": {"buchi": [3]}
        }"#;
        let err = parse_game(text.as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }));
    }

    #[test]
    fn syntax_errors_carry_locations() {
        let err = parse_game(b"{\n  \"arena\": ").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert!(line >= 1),
            other => panic!("expected a syntax error, got {other}"),
        }
    }

    #[test]
    fn safety_safe_complements_at_the_boundary() {
        let text = r#"{
            "arena": {
                "vertices": [{"id": 0, "owner": 0}, {"id": 1, "owner": 1}],
                "edges": [[0, 1], [1, 0]],
                "initial": 0
            },
            "condition": {"safetySafe": [0]}
        }"#;
        let input = parse_game(text.as_bytes()).unwrap();
        match &input.game {
            ParsedGame::Qualitative { condition, .. } => match condition {
                QualitativeCondition::SafetyAvoid(avoid) => {
                    assert!(avoid.contains(1));
                    assert!(!avoid.contains(0));
                }
                _ => panic!("expected the avoid primitive"),
            },
            _ => panic!("expected a qualitative game"),
        }
    }

    #[test]
    fn round_trip_on_canonical_files() {
        let text = r#"{
            "arena": {
                "vertices": [{"id": 0, "owner": 0}, {"id": 1, "owner": 1}, {"id": 2, "owner": 0}],
                "edges": [[0, 1], [1, 2], [2, 0], [2, 2]],
                "initial": 0
            },
            "condition": {
                "requestResponseCosts": {
                    "pairs": [{
                        "request": [0],
                        "response": [2],
                        "costs": [{"from": 0, "to": 1, "cost": 2}]
                    }]
                }
            },
            "faults": {"edges": [[0, 2]], "safe": [0, 1, 2]}
        }"#;
        let input = parse_game(text.as_bytes()).unwrap();
        let serialized = to_json(&input_to_file(&input));
        let reparsed = parse_game(serialized.as_bytes()).unwrap();
        let again = to_json(&input_to_file(&reparsed));
        assert_eq!(serialized, again);
    }

    #[test]
    fn fault_edges_from_player_one_rejected() {
        let text = r#"{
            "arena": {
                "vertices": [{"id": 0, "owner": 1}],
                "edges": [[0, 0]],
                "initial": 0
            },
            "condition": {"safetySafe": [0]},
            "faults": {"edges": [[0, 0]], "safe": [0]}
        }"#;
        let err = parse_game(text.as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::Semantic { field, .. } if field == "faults.edges"));
    }

    #[test]
    fn strategy_round_trip() {
        let arena = Arena::new(
            vec![Player::Zero, Player::One],
            vec![vec![1], vec![0, 1]],
            0,
        )
        .unwrap();
        let strategy = crate::play::PositionalStrategy::new(Player::One, vec![None, Some(0)])
            .to_finite_state();
        let json = strategy_to_json(&strategy);
        let back = strategy_from_json(json.as_bytes(), &arena).unwrap();
        assert_eq!(back, strategy);
    }
}
