//! Adaptive adversary for cycle detection on colored grids.
//!
//! An `m x n` grid of symbols defines a graph whose edges join orthogonally
//! adjacent cells of equal symbol. This crate builds an adversary that
//! answers cell queries so that, for any `m, n >= 2`, whether the graph has a
//! cycle stays undecided until the very last cell is read, plus a game
//! runner for detection algorithms and a harness that certifies the
//! adversary by exhaustive and randomized sweeps.

pub mod algorithms;
pub mod block;
pub mod cli;
pub mod composer;
pub mod error;
pub mod game;
pub mod grid;
pub mod union_find;
pub mod verifier;

pub use algorithms::{
    dfs_region_detector, early_answer, random_order_scanner, run_on_grid, union_find_scanner, AlgorithmKind, AlgorithmMove,
    DetectionAlgorithm,
};
pub use block::{AdversaryPhase, BlockAdversary, BlockAlphabet, BlockKind, Branch, Fill, Response, Witnesses};
pub use composer::{cross_block_edges, decompose, tile, BandDecomposition, BlockSpec, ComposedAdversary, ComposedResponse, GridWitnesses, Tiling};
pub use error::{Error, Result};
pub use game::{replay_queries, run_game, BranchOutcome, FinalChoicePolicy, GameTranscript, QueryRecord, Verdict};
pub use grid::{
    complete, find_cycle, has_cycle, neighbors, parse_grid, parse_grid_in, same_color_edges, serialize_grid, Cell, Grid,
    GridDims, PartialGrid, Symbol,
};
pub use verifier::{
    ambiguity_oracle, verify_block, verify_block_exhaustive, verify_grid_random, verify_grid_random_with, AmbiguityReport,
    CheckMode, GridSweepOptions, OrderSelection, SweepReport,
};
