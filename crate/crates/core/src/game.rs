//! The query game between a detection algorithm and the composed adversary.
//!
//! The algorithm sees only the cells it has read. If it answers while cells
//! remain unread, the adversary exhibits a completion that contradicts the
//! answer. If it reads everything, the adversary decides the last cell; under
//! [`FinalChoicePolicy::ForkBoth`] both decisions are played out by replaying
//! a fresh instance of the algorithm on the recorded responses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmMove, DetectionAlgorithm};
use crate::block::Branch;
use crate::composer::{ComposedAdversary, ComposedResponse, GridWitnesses};
use crate::error::{Error, Result};
use crate::grid::{has_cycle, Cell, Grid, GridDims, PartialGrid, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FinalChoicePolicy {
    #[default]
    ForkBoth,
    ForceCycle,
    ForceAcyclic,
}

impl FinalChoicePolicy {
    fn branches(self) -> &'static [Branch] {
        match self {
            FinalChoicePolicy::ForkBoth => &Branch::BOTH,
            FinalChoicePolicy::ForceCycle => &[Branch::Cycle],
            FinalChoicePolicy::ForceAcyclic => &[Branch::Acyclic],
        }
    }
}

impl fmt::Display for FinalChoicePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FinalChoicePolicy::ForkBoth => "fork",
            FinalChoicePolicy::ForceCycle => "cycle",
            FinalChoicePolicy::ForceAcyclic => "acyclic",
        })
    }
}

impl FromStr for FinalChoicePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fork" => Ok(FinalChoicePolicy::ForkBoth),
            "cycle" => Ok(FinalChoicePolicy::ForceCycle),
            "acyclic" => Ok(FinalChoicePolicy::ForceAcyclic),
            other => Err(format!("unknown policy {other:?} (expected fork, cycle or acyclic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Read every cell and answered correctly on both final branches.
    CorrectBothBranches,
    /// Read every cell and answered correctly on the single forced branch.
    CorrectOnBranch(Branch),
    /// Answered with cells unread; a contradicting completion exists.
    DefeatedEarlyAnswer,
    IncorrectOnBranch(Branch),
}

impl Verdict {
    pub fn is_correct(self) -> bool {
        matches!(self, Verdict::CorrectBothBranches | Verdict::CorrectOnBranch(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CorrectBothBranches => f.write_str("CorrectBothBranches"),
            Verdict::CorrectOnBranch(b) => write!(f, "CorrectOnBranch({b})"),
            Verdict::DefeatedEarlyAnswer => f.write_str("DefeatedEarlyAnswer"),
            Verdict::IncorrectOnBranch(b) => write!(f, "IncorrectOnBranch({b})"),
        }
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let branch = |b: &str| match b {
            "cycle" => Ok(Branch::Cycle),
            "acyclic" => Ok(Branch::Acyclic),
            _ => Err(format!("unknown branch in verdict {s:?}")),
        };
        match s {
            "CorrectBothBranches" => Ok(Verdict::CorrectBothBranches),
            "DefeatedEarlyAnswer" => Ok(Verdict::DefeatedEarlyAnswer),
            _ => {
                if let Some(b) = s.strip_prefix("CorrectOnBranch(").and_then(|r| r.strip_suffix(')')) {
                    Ok(Verdict::CorrectOnBranch(branch(b)?))
                } else if let Some(b) = s.strip_prefix("IncorrectOnBranch(").and_then(|r| r.strip_suffix(')')) {
                    Ok(Verdict::IncorrectOnBranch(branch(b)?))
                } else {
                    Err(format!("unknown verdict {s:?}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRecord {
    pub cell: Cell,
    pub response: ComposedResponse,
}

/// One realized final branch and what the algorithm answered on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchOutcome {
    pub branch: Branch,
    pub symbol: Symbol,
    pub answer: bool,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTranscript {
    pub dims: GridDims,
    pub algorithm: String,
    pub policy: FinalChoicePolicy,
    pub queries: Vec<QueryRecord>,
    /// The algorithm's answer when it is unique: an early answer, or the
    /// answer on a forced branch. Absent under `ForkBoth`.
    pub answer: Option<bool>,
    pub branches: Vec<BranchOutcome>,
    pub query_count: usize,
    pub verdict: Verdict,
    /// Both completions at the time of an early answer.
    pub witnesses: Option<GridWitnesses>,
    /// The witness that contradicts an early answer.
    pub counterexample: Option<Grid>,
}

impl GameTranscript {
    pub fn query_cells(&self) -> Vec<Cell> {
        self.queries.iter().map(|q| q.cell).collect()
    }

    /// The one-line summary printed by `simulate`.
    pub fn summary(&self) -> String {
        format!("{} {}", self.query_count, self.verdict)
    }
}

/// Plays `algorithm` (built fresh by `make_algorithm`) against a fresh
/// `adversary`.
///
/// Algorithms must be deterministic: replay for the final branches requires
/// a fresh instance to issue the same queries on the same responses.
pub fn run_game<A, F>(make_algorithm: F, adversary: ComposedAdversary, policy: FinalChoicePolicy) -> Result<GameTranscript>
where
    A: DetectionAlgorithm,
    F: Fn() -> A,
{
    let dims = adversary.dims();
    let total = dims.cell_count();
    if adversary.unread_total() != total {
        return Err(Error::Protocol("run_game needs a fresh adversary".into()));
    }
    let mut adversary = adversary;
    let mut algorithm = make_algorithm();
    let name = algorithm.name();
    let mut observed = PartialGrid::empty(dims);
    let mut queries = Vec::with_capacity(total);

    let transcript = |queries, answer, branches, verdict, witnesses, counterexample| GameTranscript {
        dims,
        algorithm: name.clone(),
        policy,
        query_count: Vec::len(&queries),
        queries,
        answer,
        branches,
        verdict,
        witnesses,
        counterexample,
    };

    let mut final_cell = None;
    for _ in 0..=total {
        match algorithm.next_move(&observed) {
            AlgorithmMove::Query(cell) => {
                dims.check(cell)?;
                if observed.is_read(cell) {
                    return Err(Error::RepeatQuery(cell));
                }
                let response = adversary.respond(cell)?;
                queries.push(QueryRecord { cell, response });
                match response {
                    ComposedResponse::Symbol(s) => observed.reveal(cell, s)?,
                    ComposedResponse::GlobalFinalChoice { .. } => {
                        final_cell = Some(cell);
                        break;
                    }
                }
            }
            AlgorithmMove::Answer(answer) => {
                let w = adversary.witnesses()?;
                let counter = if answer { w.acyclic.clone() } else { w.cycle.clone() };
                if has_cycle(&counter) == answer {
                    return Err(Error::InvariantViolation(format!(
                        "no completion contradicts the early answer {answer} after {} reads",
                        queries.len()
                    )));
                }
                return Ok(transcript(
                    queries,
                    Some(answer),
                    Vec::new(),
                    Verdict::DefeatedEarlyAnswer,
                    Some(w),
                    Some(counter),
                ));
            }
        }
    }
    let Some(final_cell) = final_cell else {
        return Err(Error::Protocol(format!("{name} did not answer within {} moves", total + 1)));
    };

    let prefix: Vec<(Cell, Symbol)> = queries
        .iter()
        .filter_map(|q| match q.response {
            ComposedResponse::Symbol(s) => Some((q.cell, s)),
            ComposedResponse::GlobalFinalChoice { .. } => None,
        })
        .collect();

    let mut branches = Vec::new();
    for &branch in policy.branches() {
        let mut realized = adversary.clone();
        let symbol = realized.commit(branch)?;
        let grid = realized
            .final_grid()
            .ok_or_else(|| Error::InvariantViolation("grid incomplete after final commit".into()))?;
        if has_cycle(&grid) != branch.has_cycle() {
            return Err(Error::InvariantViolation(format!("{branch} branch realized the wrong outcome")));
        }
        let mut moves = prefix.clone();
        moves.push((final_cell, symbol));
        let answer = replay_answer(make_algorithm(), dims, &moves)?;
        branches.push(BranchOutcome {
            branch,
            symbol,
            answer,
            grid,
        });
    }

    let wrong = branches.iter().find(|b| b.answer != b.branch.has_cycle()).map(|b| b.branch);
    let (verdict, answer) = match (policy, wrong) {
        (_, Some(b)) => (
            Verdict::IncorrectOnBranch(b),
            (policy != FinalChoicePolicy::ForkBoth).then(|| branches[0].answer),
        ),
        (FinalChoicePolicy::ForkBoth, None) => (Verdict::CorrectBothBranches, None),
        (_, None) => (Verdict::CorrectOnBranch(branches[0].branch), Some(branches[0].answer)),
    };
    Ok(transcript(queries, answer, branches, verdict, None, None))
}

/// Feeds a fresh algorithm the recorded `(cell, symbol)` sequence and
/// returns its answer once everything has been read.
fn replay_answer<A: DetectionAlgorithm>(mut algorithm: A, dims: GridDims, moves: &[(Cell, Symbol)]) -> Result<bool> {
    let mut observed = PartialGrid::empty(dims);
    for (step, &(expected, symbol)) in moves.iter().enumerate() {
        match algorithm.next_move(&observed) {
            AlgorithmMove::Query(cell) if cell == expected => observed.reveal(cell, symbol)?,
            AlgorithmMove::Query(cell) => {
                return Err(Error::Protocol(format!(
                    "{} is not deterministic: replay step {step} queried {cell}, recorded {expected}",
                    algorithm.name()
                )))
            }
            AlgorithmMove::Answer(_) => {
                return Err(Error::Protocol(format!(
                    "{} answered at replay step {step} but had queried on",
                    algorithm.name()
                )))
            }
        }
    }
    match algorithm.next_move(&observed) {
        AlgorithmMove::Answer(a) => Ok(a),
        AlgorithmMove::Query(cell) => {
            dims.check(cell)?;
            Err(Error::RepeatQuery(cell))
        }
    }
}

/// Responses of a fresh adversary to `cells`, in order.
pub fn replay_queries(dims: GridDims, cells: &[Cell]) -> Result<Vec<ComposedResponse>> {
    let mut adv = ComposedAdversary::new(dims)?;
    cells.iter().map(|&c| adv.respond(c)).collect()
}

// Serialized form. Field order is fixed for golden-file comparison.

#[derive(Serialize, Deserialize)]
struct TranscriptDoc {
    dims: [usize; 2],
    algorithm: String,
    policy: String,
    queries: Vec<(usize, usize, String)>,
    answer: Option<bool>,
    branches: Vec<BranchDoc>,
    query_count: usize,
    verdict: String,
    witnesses: Option<WitnessDoc>,
    counterexample: Option<Grid>,
}

#[derive(Serialize, Deserialize)]
struct BranchDoc {
    branch: Branch,
    symbol: String,
    answer: bool,
    grid: Grid,
}

#[derive(Serialize, Deserialize)]
struct WitnessDoc {
    cycle: Grid,
    acyclic: Grid,
}

fn symbol_from_str(s: &str) -> Result<Symbol> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Symbol::new(c),
        _ => Err(Error::Parse {
            line: 0,
            message: format!("expected a single symbol, got {s:?}"),
        }),
    }
}

impl GameTranscript {
    /// Pretty-printed JSON. A final query that surfaced the adversary's
    /// choice is written with symbol `"<cycle>|<acyclic>"`.
    pub fn to_json(&self) -> String {
        let doc = TranscriptDoc {
            dims: [self.dims.rows, self.dims.cols],
            algorithm: self.algorithm.clone(),
            policy: self.policy.to_string(),
            queries: self
                .queries
                .iter()
                .map(|q| {
                    let s = match q.response {
                        ComposedResponse::Symbol(s) => s.to_string(),
                        ComposedResponse::GlobalFinalChoice {
                            cycle_symbol,
                            acyclic_symbol,
                        } => format!("{cycle_symbol}|{acyclic_symbol}"),
                    };
                    (q.cell.row, q.cell.col, s)
                })
                .collect(),
            answer: self.answer,
            branches: self
                .branches
                .iter()
                .map(|b| BranchDoc {
                    branch: b.branch,
                    symbol: b.symbol.to_string(),
                    answer: b.answer,
                    grid: b.grid.clone(),
                })
                .collect(),
            query_count: self.query_count,
            verdict: self.verdict.to_string(),
            witnesses: self.witnesses.as_ref().map(|w| WitnessDoc {
                cycle: w.cycle.clone(),
                acyclic: w.acyclic.clone(),
            }),
            counterexample: self.counterexample.clone(),
        };
        // One field per line, one query per line; everything else compact.
        let value = serde_json::to_value(&doc).expect("transcript serializes");
        let compact = |v: &serde_json::Value| serde_json::to_string(v).expect("json value serializes");
        let fields = [
            "dims",
            "algorithm",
            "policy",
            "queries",
            "answer",
            "branches",
            "query_count",
            "verdict",
            "witnesses",
            "counterexample",
        ];
        let mut out = String::from("{\n");
        for (i, name) in fields.iter().enumerate() {
            let v = &value[*name];
            let rendered = match v.as_array() {
                Some(items) if !items.is_empty() && matches!(*name, "queries" | "branches") => {
                    let lines: Vec<String> = items.iter().map(|q| format!("    {}", compact(q))).collect();
                    format!("[\n{}\n  ]", lines.join(",\n"))
                }
                _ => compact(v),
            };
            let sep = if i + 1 == fields.len() { "" } else { "," };
            out.push_str(&format!("  \"{name}\": {rendered}{sep}\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse { line: 0, message };
        let doc: TranscriptDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let dims = GridDims::new(doc.dims[0], doc.dims[1])?;
        let queries = doc
            .queries
            .into_iter()
            .map(|(row, col, s)| {
                let response = match s.split_once('|') {
                    Some((c, a)) => ComposedResponse::GlobalFinalChoice {
                        cycle_symbol: symbol_from_str(c)?,
                        acyclic_symbol: symbol_from_str(a)?,
                    },
                    None => ComposedResponse::Symbol(symbol_from_str(&s)?),
                };
                Ok(QueryRecord {
                    cell: Cell::new(row, col),
                    response,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let branches = doc
            .branches
            .into_iter()
            .map(|b| {
                Ok(BranchOutcome {
                    branch: b.branch,
                    symbol: symbol_from_str(&b.symbol)?,
                    answer: b.answer,
                    grid: b.grid,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GameTranscript {
            dims,
            algorithm: doc.algorithm,
            policy: doc.policy.parse().map_err(parse_err)?,
            queries,
            answer: doc.answer,
            branches,
            query_count: doc.query_count,
            verdict: doc.verdict.parse().map_err(parse_err)?,
            witnesses: doc.witnesses.map(|w| GridWitnesses {
                cycle: w.cycle,
                acyclic: w.acyclic,
            }),
            counterexample: doc.counterexample,
        })
    }
}
