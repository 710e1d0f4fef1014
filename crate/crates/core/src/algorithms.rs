//! Cycle-detection algorithms that read cells one query at a time.
//!
//! Every algorithm here is a deterministic function of the cells it has
//! observed (and its seed), which the game runner relies on to replay it.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{has_cycle, neighbor_iter, Cell, Grid, PartialGrid};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmMove {
    Query(Cell),
    Answer(bool),
}

pub trait DetectionAlgorithm {
    fn name(&self) -> String;

    /// Next query or final answer given everything read so far.
    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove;
}

impl<T: DetectionAlgorithm + ?Sized> DetectionAlgorithm for Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove {
        (**self).next_move(observed)
    }
}

/// Reads cells row-major, merging each new cell with its already-read up and
/// left neighbors; answers `true` as soon as a merge closes a cycle.
#[derive(Debug, Clone, Default)]
pub struct UnionFindScanner {
    next: usize,
    sets: Option<UnionFind>,
}

pub fn union_find_scanner() -> UnionFindScanner {
    UnionFindScanner::default()
}

impl DetectionAlgorithm for UnionFindScanner {
    fn name(&self) -> String {
        "union-find".into()
    }

    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove {
        let dims = observed.dims();
        let total = dims.cell_count();
        let sets = self.sets.get_or_insert_with(|| UnionFind::new(total));
        if self.next > 0 {
            let cell = dims.cell(self.next - 1);
            let Some(s) = observed.get(cell) else {
                return AlgorithmMove::Query(cell);
            };
            let up = (cell.row > 0).then(|| Cell::new(cell.row - 1, cell.col));
            let left = (cell.col > 0).then(|| Cell::new(cell.row, cell.col - 1));
            for n in [up, left].into_iter().flatten() {
                if observed.get(n) == Some(s) && !sets.union(dims.index(cell), dims.index(n)) {
                    return AlgorithmMove::Answer(true);
                }
            }
        }
        if self.next == total {
            return AlgorithmMove::Answer(false);
        }
        self.next += 1;
        AlgorithmMove::Query(dims.cell(self.next - 1))
    }
}

/// Depth-first search over same-color regions, reading each neighbor only
/// when the search needs its color.
///
/// Holds no state: every move reruns the search over the observed cells and
/// stops at the first cell it still has to read.
#[derive(Debug, Clone, Default)]
pub struct DfsRegionDetector;

pub fn dfs_region_detector() -> DfsRegionDetector {
    DfsRegionDetector
}

impl DetectionAlgorithm for DfsRegionDetector {
    fn name(&self) -> String {
        "dfs".into()
    }

    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove {
        let dims = observed.dims();
        let mut visited = vec![false; dims.cell_count()];
        for start in dims.cells() {
            if visited[dims.index(start)] {
                continue;
            }
            let Some(color) = observed.get(start) else {
                return AlgorithmMove::Query(start);
            };
            visited[dims.index(start)] = true;
            // (cell, parent, neighbors, next neighbor index)
            let mut stack: Vec<(Cell, Option<Cell>, Vec<Cell>, usize)> =
                vec![(start, None, neighbor_iter(start, dims).collect(), 0)];
            while let Some((cell, parent, nbs, idx)) = stack.last_mut() {
                let Some(&next) = nbs.get(*idx) else {
                    stack.pop();
                    continue;
                };
                *idx += 1;
                if Some(next) == *parent {
                    continue;
                }
                let u = *cell;
                match observed.get(next) {
                    None => return AlgorithmMove::Query(next),
                    Some(s) if s != color => continue,
                    Some(_) => {}
                }
                if visited[dims.index(next)] {
                    return AlgorithmMove::Answer(true);
                }
                visited[dims.index(next)] = true;
                stack.push((next, Some(u), neighbor_iter(next, dims).collect(), 0));
            }
        }
        AlgorithmMove::Answer(false)
    }
}

/// Reads every cell in a seeded shuffled order, then decides on the full grid.
#[derive(Debug, Clone)]
pub struct RandomOrderScanner {
    seed: u64,
    order: Vec<Cell>,
    pos: usize,
}

pub fn random_order_scanner(seed: u64) -> RandomOrderScanner {
    RandomOrderScanner {
        seed,
        order: Vec::new(),
        pos: 0,
    }
}

impl DetectionAlgorithm for RandomOrderScanner {
    fn name(&self) -> String {
        format!("random-order(seed={})", self.seed)
    }

    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove {
        let dims = observed.dims();
        if self.order.is_empty() {
            self.order = dims.cells().collect();
            self.order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        }
        if let Some(&cell) = self.order.get(self.pos) {
            self.pos += 1;
            return AlgorithmMove::Query(cell);
        }
        AlgorithmMove::Answer(observed.to_grid().is_some_and(|g| has_cycle(&g)))
    }
}

/// Reads `reads` cells in row-major order and then answers `answer`
/// regardless of what it saw.
#[derive(Debug, Clone)]
pub struct EarlyAnswer {
    reads: usize,
    answer: bool,
    done: usize,
}

pub fn early_answer(reads: usize, answer: bool) -> EarlyAnswer {
    EarlyAnswer {
        reads,
        answer,
        done: 0,
    }
}

impl DetectionAlgorithm for EarlyAnswer {
    fn name(&self) -> String {
        format!("early-answer(k={}, answer={})", self.reads, self.answer)
    }

    fn next_move(&mut self, observed: &PartialGrid) -> AlgorithmMove {
        if self.done < self.reads && self.done < observed.dims().cell_count() {
            self.done += 1;
            return AlgorithmMove::Query(observed.dims().cell(self.done - 1));
        }
        AlgorithmMove::Answer(self.answer)
    }
}

/// The algorithms selectable by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    UnionFind,
    Dfs,
    RandomOrder,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [AlgorithmKind::UnionFind, AlgorithmKind::Dfs, AlgorithmKind::RandomOrder];

    pub fn build(self, seed: u64) -> Box<dyn DetectionAlgorithm> {
        match self {
            AlgorithmKind::UnionFind => Box::new(union_find_scanner()),
            AlgorithmKind::Dfs => Box::new(dfs_region_detector()),
            AlgorithmKind::RandomOrder => Box::new(random_order_scanner(seed)),
        }
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "union-find" => Ok(AlgorithmKind::UnionFind),
            "dfs" => Ok(AlgorithmKind::Dfs),
            "random-order" => Ok(AlgorithmKind::RandomOrder),
            other => Err(format!("unknown algorithm {other:?} (expected union-find, dfs or random-order)")),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::UnionFind => "union-find",
            AlgorithmKind::Dfs => "dfs",
            AlgorithmKind::RandomOrder => "random-order",
        })
    }
}

/// Runs `algorithm` against a fixed grid. Returns its answer and the number
/// of cells it read.
pub fn run_on_grid(algorithm: &mut dyn DetectionAlgorithm, grid: &Grid) -> Result<(bool, usize)> {
    let dims = grid.dims();
    let mut observed = PartialGrid::empty(dims);
    for _ in 0..=dims.cell_count() {
        match algorithm.next_move(&observed) {
            AlgorithmMove::Query(cell) => {
                dims.check(cell)?;
                observed.reveal(cell, grid.get(cell))?;
            }
            AlgorithmMove::Answer(a) => return Ok((a, observed.read_count())),
        }
    }
    Err(Error::Protocol(format!(
        "{} did not answer within {} moves",
        algorithm.name(),
        dims.cell_count() + 1
    )))
}
