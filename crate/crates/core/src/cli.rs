//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure or defeat, 2 usage or
//! parse error.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::AlgorithmKind;
use crate::block::{BlockKind, Branch};
use crate::composer::{tile, ComposedAdversary, ComposedResponse, Tiling};
use crate::game::{run_game, FinalChoicePolicy};
use crate::grid::{has_cycle, parse_grid, Cell, GridDims};
use crate::verifier::{
    verify_block, verify_grid_random_with, CheckMode, GridSweepOptions, OrderSelection, DEFAULT_GRID_ORACLE_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gridcycle", version, about = "Cycle detection on colored grids against an adaptive adversary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report whether a grid file contains a same-color cycle.
    Detect {
        #[arg(long)]
        input: PathBuf,
    },
    /// Play a detection algorithm against the adversary.
    Simulate {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// union-find, dfs or random-order
        #[arg(long)]
        algorithm: AlgorithmKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// fork, cycle or acyclic
        #[arg(long, default_value = "fork")]
        policy: FinalChoicePolicy,
        /// Write the game transcript (JSON) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Certify the adversary over query orders.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Show the band decomposition and block alphabets for a grid size.
    Tile {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Play against the adversary interactively.
    Play {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Force the adversary's last-cell choice (cycle or acyclic) instead
        /// of a seeded coin flip.
        #[arg(long)]
        policy: Option<ForcedBranch>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyTarget {
    /// Every query order of one block kind.
    Block {
        /// 2x2, 2x3 (three rows of two), 3x2 (two rows of three) or 3x3
        #[arg(long)]
        size: BlockKind,
        /// witnesses, oracle or both
        #[arg(long, default_value = "both")]
        mode: CheckMode,
        /// Check a seeded random subset of orders, in percent.
        #[arg(long)]
        sample_percent: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded random query orders on a composed grid.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1000)]
        orders: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest completion count for which a prefix is also checked by
        /// brute force.
        #[arg(long, default_value_t = DEFAULT_GRID_ORACLE_BUDGET)]
        oracle_budget: u64,
        /// Only distinct orders; enumerates all of them when --orders is at
        /// least the number of permutations.
        #[arg(long)]
        dedup: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForcedBranch(pub Branch);

impl std::str::FromStr for ForcedBranch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cycle" => Ok(ForcedBranch(Branch::Cycle)),
            "acyclic" => Ok(ForcedBranch(Branch::Acyclic)),
            other => Err(format!("unknown policy {other:?} (expected cycle or acyclic)")),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, input, out, err),
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            code
        }
    }
}

pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Detect { input } => cmd_detect(&input, out, err),
        Command::Simulate {
            rows,
            cols,
            algorithm,
            seed,
            policy,
            trace,
        } => cmd_simulate(rows, cols, algorithm, seed, policy, trace.as_deref(), out, err),
        Command::Verify { target } => cmd_verify(target, out, err),
        Command::Tile { rows, cols } => cmd_tile(rows, cols, out, err),
        Command::Play {
            rows,
            cols,
            seed,
            policy,
        } => match GridDims::for_adversary(rows, cols) {
            Ok(dims) => play(dims, seed, policy.map(|p| p.0), input, out),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                Ok(EXIT_USAGE)
            }
        },
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_FAILURE
    })
}

pub fn cmd_detect(path: &std::path::Path, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", path.display())?;
            return Ok(EXIT_USAGE);
        }
    };
    match parse_grid(&text) {
        Ok(grid) => {
            writeln!(out, "{}", if has_cycle(&grid) { "cycle" } else { "no-cycle" })?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(err, "error: {}: {e}", path.display())?;
            Ok(EXIT_USAGE)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    rows: usize,
    cols: usize,
    algorithm: AlgorithmKind,
    seed: u64,
    policy: FinalChoicePolicy,
    trace: Option<&std::path::Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let adversary = match GridDims::for_adversary(rows, cols).and_then(ComposedAdversary::new) {
        Ok(a) => a,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let transcript = match run_game(|| algorithm.build(seed), adversary, policy) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_FAILURE);
        }
    };
    if let Some(path) = trace {
        std::fs::write(path, transcript.to_json())?;
    }
    writeln!(out, "{}", transcript.summary())?;
    Ok(if transcript.verdict.is_correct() { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_verify(target: VerifyTarget, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let report = match target {
        VerifyTarget::Block {
            size,
            mode,
            sample_percent,
            seed,
        } => {
            let selection = match sample_percent {
                None => OrderSelection::All,
                Some(p) if (0.0..=100.0).contains(&p) => OrderSelection::Sample {
                    fraction: p / 100.0,
                    seed,
                },
                Some(p) => {
                    writeln!(err, "error: --sample-percent must be within 0..=100, got {p}")?;
                    return Ok(EXIT_USAGE);
                }
            };
            verify_block(size, mode, selection)
        }
        VerifyTarget::Grid {
            rows,
            cols,
            orders,
            seed,
            oracle_budget,
            dedup,
        } => {
            let dims = match GridDims::for_adversary(rows, cols) {
                Ok(d) => d,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_USAGE);
                }
            };
            let options = GridSweepOptions { oracle_budget, dedup };
            match verify_grid_random_with(dims, orders, seed, options) {
                Ok(r) => r,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_USAGE);
                }
            }
        }
    };
    write!(out, "{}", report.render())?;
    Ok(report.exit_code())
}

/// Text rendering of a tiling: band sizes, the block map with footprints and
/// alphabets, and a per-cell map showing each block's primary symbol.
pub fn render_tiling(tiling: &Tiling) -> String {
    let mut s = String::new();
    let dims = tiling.dims();
    let _ = writeln!(s, "rows {}: bands {}", dims.rows, tiling.row_bands());
    let _ = writeln!(s, "cols {}: bands {}", dims.cols, tiling.col_bands());
    let (br, bc) = tiling.band_grid();
    let _ = writeln!(s, "block map ({br}x{bc} blocks):");
    for r in 0..br {
        let row: Vec<String> = (0..bc)
            .map(|c| {
                let b = tiling.block(r, c);
                format!("{}{}", b.dims(), b.alphabet)
            })
            .collect();
        let _ = writeln!(s, "  {}", row.join(" "));
    }
    let _ = writeln!(s, "cell map:");
    for r in 0..dims.rows {
        let line: String = (0..dims.cols)
            .map(|c| {
                let (b, _) = tiling.block_of(Cell::new(r, c)).expect("cell in range");
                b.alphabet.primary().as_char()
            })
            .collect();
        let _ = writeln!(s, "  {line}");
    }
    s
}

pub fn cmd_tile(rows: usize, cols: usize, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    match GridDims::for_adversary(rows, cols).and_then(tile) {
        Ok(t) => {
            write!(out, "{}", render_tiling(&t))?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(err, "error: {e}")?;
            Ok(EXIT_USAGE)
        }
    }
}

const PLAY_HELP: &str = "\
Read a cell with \"r c\" (0-based row and column).
Answer with \"yes\" (the grid has a cycle) or \"no\".
\"q\" quits.";

enum PlayInput {
    Read(Cell),
    Answer(bool),
    Quit,
}

fn parse_play_input(line: &str) -> Option<PlayInput> {
    match line {
        "q" | "quit" => return Some(PlayInput::Quit),
        "yes" | "y" => return Some(PlayInput::Answer(true)),
        "no" | "n" => return Some(PlayInput::Answer(false)),
        _ => {}
    }
    let mut parts = line.split_whitespace();
    let row = parts.next()?.parse().ok()?;
    let col = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some(PlayInput::Read(Cell::new(row, col)))
}

/// Interactive game on stdin/stdout-like streams. The adversary's last-cell
/// choice follows `forced` when given, else a coin flip seeded with `seed`.
pub fn play(
    dims: GridDims,
    seed: u64,
    forced: Option<Branch>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<i32> {
    let mut adv = match ComposedAdversary::new(dims) {
        Ok(a) => a,
        Err(e) => {
            writeln!(out, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = dims.cell_count();
    writeln!(out, "{dims} grid, every cell hidden. Does it contain a same-color cycle?")?;
    writeln!(out, "{PLAY_HELP}")?;

    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            writeln!(out, "session ended: {} of {total} cells read, no answer given", total - adv.unread_total())?;
            return Ok(EXIT_OK);
        }
        let Some(cmd) = parse_play_input(line.trim()) else {
            writeln!(out, "unrecognized input")?;
            writeln!(out, "{PLAY_HELP}")?;
            continue;
        };
        match cmd {
            PlayInput::Quit => {
                writeln!(out, "session ended: {} of {total} cells read, no answer given", total - adv.unread_total())?;
                return Ok(EXIT_OK);
            }
            PlayInput::Read(cell) => {
                if !dims.contains(cell) {
                    writeln!(out, "cell {cell} is outside the {dims} grid")?;
                    continue;
                }
                if adv.unread_total() == 0 {
                    writeln!(out, "every cell has been read; answer yes or no")?;
                    continue;
                }
                if adv.observed().is_read(cell) {
                    writeln!(out, "cell {cell} was already read")?;
                    continue;
                }
                match adv.respond(cell) {
                    Ok(ComposedResponse::Symbol(s)) => writeln!(out, "{cell} = {s}")?,
                    Ok(ComposedResponse::GlobalFinalChoice { .. }) => {
                        let branch = forced.unwrap_or_else(|| {
                            if rng.gen_bool(0.5) {
                                Branch::Cycle
                            } else {
                                Branch::Acyclic
                            }
                        });
                        match adv.commit(branch) {
                            Ok(s) => writeln!(out, "{cell} = {s} (last cell, adversary realized the {branch} branch)")?,
                            Err(e) => {
                                writeln!(out, "error: {e}")?;
                                return Ok(EXIT_FAILURE);
                            }
                        }
                    }
                    Err(e) => {
                        writeln!(out, "error: {e}")?;
                        continue;
                    }
                }
                write!(out, "{}", adv.observed().render('.'))?;
                if adv.unread_total() == 0 {
                    writeln!(out, "all {total} cells read; answer yes or no")?;
                }
            }
            PlayInput::Answer(answer) => {
                if let Some(grid) = adv.final_grid() {
                    let truth = has_cycle(&grid);
                    let verdict = if truth == answer { "correct" } else { "wrong" };
                    writeln!(
                        out,
                        "the grid {}: {verdict}",
                        if truth { "has a cycle" } else { "has no cycle" }
                    )?;
                    return Ok(if truth == answer { EXIT_OK } else { EXIT_FAILURE });
                }
                let w = match adv.witnesses() {
                    Ok(w) => w,
                    Err(e) => {
                        writeln!(out, "error: {e}")?;
                        return Ok(EXIT_FAILURE);
                    }
                };
                let counter = if answer { w.acyclic } else { w.cycle };
                writeln!(
                    out,
                    "{} cells still unread. You are defeated by this completion, which {}:",
                    adv.unread_total(),
                    if has_cycle(&counter) { "has a cycle" } else { "has no cycle" }
                )?;
                write!(out, "{counter}")?;
                return Ok(EXIT_FAILURE);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut input = io::Cursor::new(stdin.as_bytes().to_vec());
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["gridcycle"];
        argv.extend_from_slice(args);
        let code = run_from_args(argv, &mut input, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn simulate_summaries() {
        let (code, out, _) = run_args(&["simulate", "--rows", "4", "--cols", "4", "--algorithm", "union-find"], "");
        assert_eq!((code, out.as_str()), (0, "16 CorrectBothBranches\n"));
        let (code, out, _) = run_args(&["simulate", "--rows", "2", "--cols", "3", "--algorithm", "dfs"], "");
        assert_eq!((code, out.as_str()), (0, "6 CorrectBothBranches\n"));
        let (code, out, _) = run_args(
            &["simulate", "--rows", "3", "--cols", "3", "--algorithm", "random-order", "--seed", "7"],
            "",
        );
        assert_eq!((code, out.as_str()), (0, "9 CorrectBothBranches\n"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["simulate", "--rows", "1", "--cols", "4", "--algorithm", "dfs"], "").0, 2);
        assert_eq!(run_args(&["simulate", "--rows", "3", "--cols", "4", "--algorithm", "bfs"], "").0, 2);
        assert_eq!(run_args(&["tile", "--rows", "1", "--cols", "4"], "").0, 2);
        assert_eq!(run_args(&["verify", "block", "--size", "4x4"], "").0, 2);
        assert_eq!(run_args(&["play", "--rows", "2", "--cols", "1"], "").0, 2);
        assert_eq!(run_args(&["frobnicate"], "").0, 2);
    }

    #[test]
    fn tile_eight_by_six() {
        let (code, out, _) = run_args(&["tile", "--rows", "8", "--cols", "6"], "");
        assert_eq!(code, 0);
        assert!(out.contains("rows 8: bands [2, 2, 2, 2]"));
        assert!(out.contains("block map (4x3 blocks):"));
        assert!(out.contains("  2x2{a,b} 2x2{c,d} 2x2{a,b}\n  2x2{c,d} 2x2{a,b} 2x2{c,d}\n"));
        assert!(out.contains("  aaccaa\n  aaccaa\n  ccaacc\n"));
    }

    #[test]
    fn tile_five_by_five() {
        let (_, out, _) = run_args(&["tile", "--rows", "5", "--cols", "5"], "");
        assert!(out.contains("  2x2{a,b} 2x3{c,d}\n  3x2{c,d} 3x3{a,b}\n"));
    }

    #[test]
    fn play_early_no_is_defeated() {
        let (code, out, _) = run_args(&["play", "--rows", "2", "--cols", "2"], "0 0\n0 1\n1 0\nno\n");
        assert_eq!(code, 1);
        assert!(out.contains("You are defeated by this completion, which has a cycle:\naa\naa\n"));
    }

    #[test]
    fn play_full_read_is_judged() {
        let (code, out, _) = run_args(
            &["play", "--rows", "2", "--cols", "2", "--policy", "acyclic"],
            "0 0\n0 1\n1 0\n1 1\nno\n",
        );
        assert_eq!(code, 0);
        assert!(out.contains("(1, 1) = b (last cell, adversary realized the acyclic branch)"));
        assert!(out.contains("the grid has no cycle: correct"));
    }

    #[test]
    fn play_reprompts_and_quits() {
        let (code, out, _) = run_args(&["play", "--rows", "2", "--cols", "2"], "hello\n5 5\n0 0\n0 0\nq\n");
        assert_eq!(code, 0);
        assert!(out.contains("unrecognized input"));
        assert!(out.contains("outside the 2x2 grid"));
        assert!(out.contains("already read"));
        assert!(out.contains("session ended: 1 of 4 cells read"));
        let (code, out, _) = run_args(&["play", "--rows", "2", "--cols", "2"], "");
        assert_eq!(code, 0);
        assert!(out.contains("session ended: 0 of 4"));
    }
}
