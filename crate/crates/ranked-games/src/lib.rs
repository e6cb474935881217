//! Solvers for quantitative infinite games on finite graphs.
//!
//! The crate implements a reduction framework for quantitative games: plays
//! are assigned values in `N ∪ {∞}`, Player 0 minimizes and Player 1
//! maximizes, and complex quantitative objectives are solved by reducing
//! them — via a memory structure and a correction function — to *vertex
//! ranked* games, whose value is determined by a qualitative winning
//! condition and a ranking of the vertices.
//!
//! The pieces, bottom to top:
//!
//! - [`arena`]: game graphs, bit-indexed vertex sets, linear-time attractors.
//! - [`memory`]: finite-state memories, expanded arenas, memory products.
//! - [`play`]: ultimately periodic plays, Mealy strategies, simulation.
//! - [`qualitative`]: safety, Büchi, co-Büchi and request-response solvers.
//! - [`ranked`]: vertex-ranked sup / lim-sup games and bound optimization.
//! - [`reduction`]: correction functions, reduction witnesses, strategy
//!   lifting, and contract verification on sampled plays.
//! - [`reqres`]: request-response games with costs.
//! - [`muller`]: quantitative Muller games via McNaughton scores.
//! - [`resilience`]: fault-resilient safety synthesis.
//! - [`oracle`]: brute-force ground truth for desk-scale instances.
//! - [`io`]: the JSON game-file and strategy formats used by the CLI.
//!
//! See the `book/` directory of the repository for a guided tour; its code
//! snippets are compiled and run as doc-tests.

pub mod arena;
pub mod io;
pub mod memory;
pub mod muller;
pub mod oracle;
pub mod play;
pub mod qualitative;
pub mod random;
pub mod ranked;
pub mod reduction;
pub mod reqres;
pub mod resilience;
pub mod value;
pub mod verify;

pub use arena::{attractor, remove_region, Arena, Player, VertexSet};
pub use memory::{extend_play, product_arena, product_memory, MemoryStructure, ProductArena};
pub use play::{is_consistent, simulate, FiniteStateStrategy, PositionalStrategy, UpPlay};
pub use qualitative::{
    solve_buchi, solve_cobuchi, solve_request_response, solve_safety, up_membership,
    QualitativeCondition, RrPair, SolveResult,
};
pub use ranked::{
    eval_rank, optimize_bound, solve_lim_cobuchi_route, solve_lim_prefix_independent,
    solve_sup_bound, RankMode, VertexRankedGame,
};
pub use reduction::{
    compose_reductions, correction_check, lift_strategy, push_strategy,
    verify_reduction_on_plays, CorrectionFunction, ReductionWitness,
};
pub use value::Value;
