//! Certification of the adversaries.
//!
//! The ambiguity oracle enumerates completions by brute force and shares no
//! code with the witness constructions; sweeps run the adversaries over
//! every (or many seeded) query orders and check, after each proper prefix,
//! that a cyclic and an acyclic completion both still exist.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block::{BlockAdversary, BlockAlphabet, BlockKind, Branch, Response};
use crate::composer::{cross_block_edges, tile, ComposedAdversary, ComposedResponse, Tiling};
use crate::error::{Error, Result};
use crate::grid::{has_cycle, Cell, Grid, GridDims, PartialGrid, Symbol};

/// Default cap on the number of completions one oracle call may enumerate.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1 << 20;

/// Default cap used by randomized grid sweeps; prefixes with more
/// completions than this skip the oracle cross-check.
pub const DEFAULT_GRID_ORACLE_BUDGET: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityReport {
    /// Number of read cells in the examined prefix.
    pub prefix_length: usize,
    pub completions_checked: u64,
    pub cyclic_example: Option<Grid>,
    pub acyclic_example: Option<Grid>,
}

impl AmbiguityReport {
    pub fn cyclic_completion_exists(&self) -> bool {
        self.cyclic_example.is_some()
    }

    pub fn acyclic_completion_exists(&self) -> bool {
        self.acyclic_example.is_some()
    }

    pub fn is_ambiguous(&self) -> bool {
        self.cyclic_completion_exists() && self.acyclic_completion_exists()
    }
}

/// Enumerates every completion of `partial` drawing each unread cell's
/// symbol from `per_cell_alphabet`, stopping once both outcomes are found.
///
/// Refuses outright when the number of completions exceeds `budget`.
pub fn ambiguity_oracle(
    partial: &PartialGrid,
    per_cell_alphabet: &BTreeMap<Cell, Vec<Symbol>>,
    budget: u64,
) -> Result<AmbiguityReport> {
    let dims = partial.dims();
    let unread: Vec<Cell> = partial.unread_cells().collect();
    if per_cell_alphabet.len() != unread.len() || unread.iter().any(|c| !per_cell_alphabet.contains_key(c)) {
        return Err(Error::InvalidFill("oracle alphabets must cover exactly the unread cells".into()));
    }
    let choices: Vec<&[Symbol]> = unread.iter().map(|c| per_cell_alphabet[c].as_slice()).collect();
    if let Some(i) = choices.iter().position(|s| s.is_empty()) {
        return Err(Error::InvalidFill(format!("empty alphabet for cell {}", unread[i])));
    }
    let total = choices
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
        .unwrap_or(u128::MAX);
    if total > u128::from(budget) {
        return Err(Error::BudgetExceeded {
            requested: total,
            budget,
        });
    }

    let mut grid = Grid::filled(dims, Symbol::A);
    for (cell, s) in partial.read_cells() {
        grid.set(cell, s);
    }
    for (cell, alpha) in unread.iter().zip(&choices) {
        grid.set(*cell, alpha[0]);
    }

    let mut report = AmbiguityReport {
        prefix_length: partial.read_count(),
        completions_checked: 0,
        cyclic_example: None,
        acyclic_example: None,
    };
    let mut digits = vec![0usize; unread.len()];
    loop {
        report.completions_checked += 1;
        let slot = if has_cycle(&grid) {
            &mut report.cyclic_example
        } else {
            &mut report.acyclic_example
        };
        if slot.is_none() {
            *slot = Some(grid.clone());
        }
        if report.is_ambiguous() {
            break;
        }
        // Odometer step, first unread cell fastest.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(report);
            }
            digits[pos] += 1;
            if digits[pos] < choices[pos].len() {
                grid.set(unread[pos], choices[pos][digits[pos]]);
                break;
            }
            digits[pos] = 0;
            grid.set(unread[pos], choices[pos][0]);
            pos += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckMode {
    Witnesses,
    Oracle,
    Both,
}

impl CheckMode {
    fn witnesses(self) -> bool {
        matches!(self, CheckMode::Witnesses | CheckMode::Both)
    }

    fn oracle(self) -> bool {
        matches!(self, CheckMode::Oracle | CheckMode::Both)
    }
}

impl FromStr for CheckMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "witnesses" => Ok(CheckMode::Witnesses),
            "oracle" => Ok(CheckMode::Oracle),
            "both" => Ok(CheckMode::Both),
            other => Err(format!("unknown mode {other:?} (expected witnesses, oracle or both)")),
        }
    }
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Witnesses => "witnesses",
            CheckMode::Oracle => "oracle",
            CheckMode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderSelection {
    All,
    /// Each order is kept independently with probability `fraction`, drawn
    /// from a generator seeded with `seed`.
    Sample { fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    CycleWitnessAcyclic,
    AcyclicWitnessCyclic,
    NoCyclicCompletion,
    NoAcyclicCompletion,
    /// Witness and oracle reached different conclusions on the same prefix.
    WitnessOracleDisagreement,
    /// The oracle found an example that fails re-verification.
    OracleExampleInvalid,
    CrossBlockEdge(Cell, Cell),
    /// A final choice surfaced before the last cell.
    EarlyFinalChoice,
    MissingFinalChoice,
    FinalBranchWrong(Branch),
    Adversary(String),
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::CycleWitnessAcyclic => f.write_str("cycle witness has no cycle"),
            Problem::AcyclicWitnessCyclic => f.write_str("acyclic witness has a cycle"),
            Problem::NoCyclicCompletion => f.write_str("oracle found no cyclic completion"),
            Problem::NoAcyclicCompletion => f.write_str("oracle found no acyclic completion"),
            Problem::WitnessOracleDisagreement => f.write_str("witness and oracle disagree"),
            Problem::OracleExampleInvalid => f.write_str("oracle example failed re-verification"),
            Problem::CrossBlockEdge(u, v) => write!(f, "edge {u}-{v} crosses a block boundary"),
            Problem::EarlyFinalChoice => f.write_str("final choice before the last cell"),
            Problem::MissingFinalChoice => f.write_str("no final choice on the last cell"),
            Problem::FinalBranchWrong(b) => write!(f, "{b} branch realized the wrong outcome"),
            Problem::Adversary(e) => write!(f, "adversary error: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepFailure {
    pub order_index: u64,
    pub order: Vec<Cell>,
    /// Number of queries answered before the failing check.
    pub prefix_len: usize,
    pub problem: Problem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepTarget {
    Block { kind: BlockKind, mode: CheckMode },
    Grid { dims: GridDims, seed: u64 },
}

impl fmt::Display for SweepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepTarget::Block { kind, mode } => write!(f, "block {kind} (mode {mode})"),
            SweepTarget::Grid { dims, seed } => write!(f, "grid {dims} (seed {seed})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub target: SweepTarget,
    pub orders_checked: u64,
    pub prefixes_checked: u64,
    pub oracle_prefixes_checked: u64,
    pub failures: Vec<SweepFailure>,
    pub wall_time: Duration,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Nonzero iff any check failed.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed())
    }

    pub fn summary(&self) -> String {
        format!("{} orders, {} failures", self.orders_checked, self.failures.len())
    }

    /// Structured text: counts, the first ten failures, wall time.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "target: {}", self.target);
        let _ = writeln!(out, "{}", self.summary());
        let _ = writeln!(out, "prefixes checked: {}", self.prefixes_checked);
        let _ = writeln!(out, "oracle prefixes checked: {}", self.oracle_prefixes_checked);
        for fail in self.failures.iter().take(10) {
            let order: Vec<String> = fail.order.iter().map(|c| format!("{},{}", c.row, c.col)).collect();
            let _ = writeln!(
                out,
                "failure: order #{} [{}] after {} queries: {}",
                fail.order_index,
                order.join(" "),
                fail.prefix_len,
                fail.problem
            );
        }
        let _ = writeln!(out, "wall time: {:.3} s", self.wall_time.as_secs_f64());
        out
    }
}

/// The `rank`-th permutation of `0..n` in lexicographic order.
pub fn nth_permutation(n: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let f = factorial(remaining - 1);
        let i = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(i));
    }
    out
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[derive(Default)]
struct OrderOutcome {
    prefixes: u64,
    oracle_prefixes: u64,
    problems: Vec<(usize, Problem)>,
}

/// Checks one block query order; `order` holds row-major local indices.
fn check_block_order(kind: BlockKind, mode: CheckMode, order: &[usize], budget: u64) -> OrderOutcome {
    let dims = kind.dims();
    let alphabet = BlockAlphabet::AB;
    let mut adv = BlockAdversary::new(kind, alphabet);
    let mut out = OrderOutcome::default();
    let n = order.len();

    for (k, &idx) in order.iter().enumerate() {
        out.prefixes += 1;
        let mut witness_ok = None;
        if mode.witnesses() {
            match adv.witnesses() {
                Ok(w) => {
                    let cyc = adv.completed_with(&w.cycle_fill).map(|g| has_cycle(&g));
                    let acy = adv.completed_with(&w.acyclic_fill).map(|g| has_cycle(&g));
                    if cyc != Ok(true) {
                        out.problems.push((k, Problem::CycleWitnessAcyclic));
                    }
                    if acy != Ok(false) {
                        out.problems.push((k, Problem::AcyclicWitnessCyclic));
                    }
                    witness_ok = Some((cyc == Ok(true), acy == Ok(false)));
                }
                Err(e) => out.problems.push((k, Problem::Adversary(e.to_string()))),
            }
        }
        if mode.oracle() {
            out.oracle_prefixes += 1;
            let per_cell: BTreeMap<Cell, Vec<Symbol>> =
                adv.responses().unread_cells().map(|c| (c, alphabet.symbols().to_vec())).collect();
            match ambiguity_oracle(adv.responses(), &per_cell, budget) {
                Ok(r) => {
                    if !r.cyclic_completion_exists() {
                        out.problems.push((k, Problem::NoCyclicCompletion));
                    }
                    if !r.acyclic_completion_exists() {
                        out.problems.push((k, Problem::NoAcyclicCompletion));
                    }
                    if let Some(w) = witness_ok {
                        if w != (r.cyclic_completion_exists(), r.acyclic_completion_exists()) {
                            out.problems.push((k, Problem::WitnessOracleDisagreement));
                        }
                    }
                }
                Err(e) => out.problems.push((k, Problem::Adversary(e.to_string()))),
            }
        }

        let response = match adv.respond(dims.cell(idx)) {
            Ok(r) => r,
            Err(e) => {
                out.problems.push((k, Problem::Adversary(e.to_string())));
                return out;
            }
        };
        match (response, k + 1 == n) {
            (Response::FinalChoice { .. }, false) => {
                out.problems.push((k, Problem::EarlyFinalChoice));
                return out;
            }
            (Response::Determined(_), true) => {
                out.problems.push((k, Problem::MissingFinalChoice));
                return out;
            }
            _ => {}
        }
    }

    for branch in Branch::BOTH {
        let mut realized = adv.clone();
        let ok = realized
            .commit(branch)
            .ok()
            .and_then(|_| realized.final_grid())
            .is_some_and(|g| has_cycle(&g) == branch.has_cycle());
        if !ok {
            out.problems.push((n, Problem::FinalBranchWrong(branch)));
        }
    }
    out
}

fn merge(
    target: SweepTarget,
    orders: Vec<(u64, Vec<Cell>, OrderOutcome)>,
    started: Instant,
) -> SweepReport {
    let mut report = SweepReport {
        target,
        orders_checked: orders.len() as u64,
        prefixes_checked: 0,
        oracle_prefixes_checked: 0,
        failures: Vec::new(),
        wall_time: Duration::ZERO,
    };
    for (order_index, order, outcome) in orders {
        report.prefixes_checked += outcome.prefixes;
        report.oracle_prefixes_checked += outcome.oracle_prefixes;
        for (prefix_len, problem) in outcome.problems {
            report.failures.push(SweepFailure {
                order_index,
                order: order.clone(),
                prefix_len,
                problem,
            });
        }
    }
    report.wall_time = started.elapsed();
    report
}

/// Runs every query order of `kind` (lexicographic over row-major cell
/// indices) through a fresh block adversary.
pub fn verify_block_exhaustive(kind: BlockKind, mode: CheckMode) -> SweepReport {
    verify_block(kind, mode, OrderSelection::All)
}

pub fn verify_block(kind: BlockKind, mode: CheckMode, selection: OrderSelection) -> SweepReport {
    let started = Instant::now();
    let dims = kind.dims();
    let n = dims.cell_count();
    let total = factorial(n);
    let ranks: Vec<u64> = match selection {
        OrderSelection::All => (0..total).collect(),
        OrderSelection::Sample { fraction, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = fraction.clamp(0.0, 1.0);
            (0..total).filter(|_| rng.gen_bool(p)).collect()
        }
    };
    let results: Vec<_> = ranks
        .par_iter()
        .map(|&rank| {
            let order = nth_permutation(n, rank);
            let outcome = check_block_order(kind, mode, &order, DEFAULT_ORACLE_BUDGET);
            (rank, order.into_iter().map(|i| dims.cell(i)).collect(), outcome)
        })
        .collect();
    merge(SweepTarget::Block { kind, mode }, results, started)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSweepOptions {
    /// Prefixes with more completions than this skip the oracle.
    pub oracle_budget: u64,
    /// Sample distinct orders only; when `num_orders` reaches the number of
    /// permutations, every order is checked once.
    pub dedup: bool,
}

impl Default for GridSweepOptions {
    fn default() -> Self {
        Self {
            oracle_budget: DEFAULT_GRID_ORACLE_BUDGET,
            dedup: false,
        }
    }
}

fn check_grid_order(tiling: &Tiling, order: &[usize], oracle_budget: u64) -> OrderOutcome {
    let dims = tiling.dims();
    let n = order.len();
    let mut adv = ComposedAdversary::from_tiling(tiling.clone());
    let mut out = OrderOutcome::default();

    let check_edges = |grid: &Grid, k: usize, out: &mut OrderOutcome| {
        if let Some(&(u, v)) = cross_block_edges(tiling, grid).first() {
            out.problems.push((k, Problem::CrossBlockEdge(u, v)));
        }
    };

    for (k, &idx) in order.iter().enumerate() {
        out.prefixes += 1;
        match adv.witnesses() {
            Ok(w) => {
                if !has_cycle(&w.cycle) {
                    out.problems.push((k, Problem::CycleWitnessAcyclic));
                }
                if has_cycle(&w.acyclic) {
                    out.problems.push((k, Problem::AcyclicWitnessCyclic));
                }
                check_edges(&w.cycle, k, &mut out);
                check_edges(&w.acyclic, k, &mut out);
            }
            Err(e) => out.problems.push((k, Problem::Adversary(e.to_string()))),
        }

        let unread = adv.unread_total();
        if unread < 64 && (1u64 << unread) <= oracle_budget {
            out.oracle_prefixes += 1;
            let per_cell: BTreeMap<Cell, Vec<Symbol>> = adv
                .observed()
                .unread_cells()
                .map(|c| {
                    let alpha = tiling.block_of(c).expect("cell in range").0.alphabet;
                    (c, alpha.symbols().to_vec())
                })
                .collect();
            match ambiguity_oracle(adv.observed(), &per_cell, oracle_budget) {
                Ok(r) => {
                    if !r.cyclic_completion_exists() {
                        out.problems.push((k, Problem::NoCyclicCompletion));
                    }
                    if !r.acyclic_completion_exists() {
                        out.problems.push((k, Problem::NoAcyclicCompletion));
                    }
                    let recheck_cyc = r.cyclic_example.as_ref().is_none_or(has_cycle);
                    let recheck_acy = r.acyclic_example.as_ref().is_none_or(|g| !has_cycle(g));
                    if !(recheck_cyc && recheck_acy) {
                        out.problems.push((k, Problem::OracleExampleInvalid));
                    }
                }
                Err(e) => out.problems.push((k, Problem::Adversary(e.to_string()))),
            }
        }

        let response = match adv.respond(dims.cell(idx)) {
            Ok(r) => r,
            Err(e) => {
                out.problems.push((k, Problem::Adversary(e.to_string())));
                return out;
            }
        };
        match (response, k + 1 == n) {
            (ComposedResponse::GlobalFinalChoice { .. }, false) => {
                out.problems.push((k, Problem::EarlyFinalChoice));
                return out;
            }
            (ComposedResponse::Symbol(_), true) => {
                out.problems.push((k, Problem::MissingFinalChoice));
                return out;
            }
            _ => {}
        }
    }

    for branch in Branch::BOTH {
        let mut realized = adv.clone();
        match realized.commit(branch).ok().and_then(|_| realized.final_grid()) {
            Some(g) if has_cycle(&g) == branch.has_cycle() => check_edges(&g, n, &mut out),
            _ => out.problems.push((n, Problem::FinalBranchWrong(branch))),
        }
    }
    out
}

/// Plays `num_orders` seeded random query orders against fresh composed
/// adversaries.
pub fn verify_grid_random(dims: GridDims, num_orders: u64, seed: u64) -> Result<SweepReport> {
    verify_grid_random_with(dims, num_orders, seed, GridSweepOptions::default())
}

pub fn verify_grid_random_with(
    dims: GridDims,
    num_orders: u64,
    seed: u64,
    options: GridSweepOptions,
) -> Result<SweepReport> {
    let started = Instant::now();
    let tiling = tile(dims)?;
    let n = dims.cell_count();

    let exhaustive = options.dedup && n <= 20 && num_orders >= factorial(n);
    let orders: Vec<Vec<usize>> = if exhaustive {
        (0..factorial(n)).map(|r| nth_permutation(n, r)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut orders = Vec::with_capacity(num_orders as usize);
        let mut attempts = 0u64;
        while (orders.len() as u64) < num_orders && attempts < num_orders.saturating_mul(100) {
            attempts += 1;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            if !options.dedup || seen.insert(order.clone()) {
                orders.push(order);
            }
        }
        orders
    };

    let results: Vec<_> = orders
        .par_iter()
        .enumerate()
        .map(|(i, order)| {
            let outcome = check_grid_order(&tiling, order, options.oracle_budget);
            (i as u64, order.iter().map(|&c| dims.cell(c)).collect(), outcome)
        })
        .collect();
    Ok(merge(SweepTarget::Grid { dims, seed }, results, started))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_empty_two_by_two() {
        let d = GridDims::new(2, 2).unwrap();
        let p = PartialGrid::empty(d);
        let per_cell = d.cells().map(|c| (c, vec![Symbol::A, Symbol::B])).collect();
        let r = ambiguity_oracle(&p, &per_cell, DEFAULT_ORACLE_BUDGET).unwrap();
        assert!(r.is_ambiguous());
        assert_eq!(r.cyclic_example, Some(Grid::from_rows(&["aa", "aa"])));
    }

    #[test]
    fn oracle_on_full_grid() {
        for rows in [["aa", "aa"], ["aa", "ab"]] {
            let g = Grid::from_rows(&rows);
            let r = ambiguity_oracle(&g.to_partial(), &BTreeMap::new(), 1).unwrap();
            assert_eq!(r.completions_checked, 1);
            assert_eq!(r.cyclic_completion_exists(), has_cycle(&g));
            assert_ne!(r.cyclic_completion_exists(), r.acyclic_completion_exists());
        }
    }

    #[test]
    fn oracle_refuses_over_budget() {
        let d = GridDims::new(3, 3).unwrap();
        let p = PartialGrid::empty(d);
        let per_cell = d.cells().map(|c| (c, vec![Symbol::A, Symbol::B])).collect();
        assert_eq!(
            ambiguity_oracle(&p, &per_cell, 511),
            Err(Error::BudgetExceeded {
                requested: 512,
                budget: 511
            })
        );
    }

    #[test]
    fn oracle_rejects_mismatched_alphabet_map() {
        let d = GridDims::new(2, 2).unwrap();
        let p = PartialGrid::empty(d);
        let per_cell = BTreeMap::from([(Cell::new(0, 0), vec![Symbol::A])]);
        assert!(matches!(ambiguity_oracle(&p, &per_cell, 16), Err(Error::InvalidFill(_))));
    }

    #[test]
    fn permutation_unranking() {
        assert_eq!(nth_permutation(3, 0), vec![0, 1, 2]);
        assert_eq!(nth_permutation(3, 1), vec![0, 2, 1]);
        assert_eq!(nth_permutation(3, 5), vec![2, 1, 0]);
        assert_eq!(factorial(9), 362_880);
    }

    #[test]
    fn small_block_sweeps_pass() {
        let r = verify_block_exhaustive(BlockKind::B2x2, CheckMode::Both);
        assert_eq!(r.summary(), "24 orders, 0 failures");
        assert_eq!(r.prefixes_checked, 96);
        assert_eq!(r.oracle_prefixes_checked, 96);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn render_lists_counts() {
        let r = verify_block_exhaustive(BlockKind::B2x2, CheckMode::Witnesses);
        let text = r.render();
        assert!(text.contains("target: block 2x2 (mode witnesses)"));
        assert!(text.contains("24 orders, 0 failures"));
    }
}
