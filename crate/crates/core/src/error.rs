use thiserror::Error;

use crate::grid::{Cell, GridDims};

/// Errors raised by grid construction, the adversaries, and the game runner.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid grid dimensions {rows}x{cols}: {reason}")]
    InvalidDims {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },
    #[error("cell ({}, {}) is outside the {}x{} grid", .cell.row, .cell.col, .dims.rows, .dims.cols)]
    OutOfRange { cell: Cell, dims: GridDims },
    #[error("cell ({}, {}) was already read", .0.row, .0.col)]
    RepeatQuery(Cell),
    #[error("invalid symbol {0:?}: symbols must be printable and non-whitespace")]
    InvalidSymbol(char),
    #[error("symbol {symbol:?} is not in the declared alphabet")]
    SymbolNotInAlphabet { symbol: char },
    #[error("block alphabet needs two distinct symbols, got {0:?} twice")]
    DegenerateAlphabet(char),
    #[error("invalid completion: {0}")]
    InvalidFill(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("enumeration of {requested} completions exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
