//! Shared helpers for the integration tests.

#![allow(dead_code)]

use gridcycle::{Cell, Grid, GridDims, Symbol};

/// Cycle detection by iterative DFS with back-edge detection. Shares no code
/// with the library's union-find detector.
pub fn dfs_has_cycle(grid: &Grid) -> bool {
    let dims = grid.dims();
    let (rows, cols) = (dims.rows, dims.cols);
    let at = |r: usize, c: usize| grid.get(Cell::new(r, c));
    let mut seen = vec![false; rows * cols];
    for start in 0..rows * cols {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        // (cell index, parent index)
        let mut stack = vec![(start, usize::MAX)];
        while let Some((u, parent)) = stack.pop() {
            let (r, c) = (u / cols, u % cols);
            let mut nbs = Vec::with_capacity(4);
            if r > 0 {
                nbs.push((r - 1, c));
            }
            if r + 1 < rows {
                nbs.push((r + 1, c));
            }
            if c > 0 {
                nbs.push((r, c - 1));
            }
            if c + 1 < cols {
                nbs.push((r, c + 1));
            }
            for (nr, nc) in nbs {
                let v = nr * cols + nc;
                if v == parent || at(nr, nc) != at(r, c) {
                    continue;
                }
                if seen[v] {
                    return true;
                }
                seen[v] = true;
                stack.push((v, u));
            }
        }
    }
    false
}

pub fn dims(rows: usize, cols: usize) -> GridDims {
    GridDims::new(rows, cols).unwrap()
}

/// Every grid of the given size over `alphabet`.
pub fn all_grids(rows: usize, cols: usize, alphabet: &[Symbol]) -> impl Iterator<Item = Grid> + '_ {
    let d = dims(rows, cols);
    let n = rows * cols;
    let total = alphabet.len().pow(n as u32);
    (0..total).map(move |mut code| {
        let mut symbols = Vec::with_capacity(n);
        for _ in 0..n {
            symbols.push(alphabet[code % alphabet.len()]);
            code /= alphabet.len();
        }
        Grid::new(d, symbols).unwrap()
    })
}

/// A reference grid with a single `?` cell, and the outcome stated for each
/// value of `?` (or for the grid itself when there is none).
pub struct Fixture {
    pub name: &'static str,
    pub rows: &'static [&'static str],
    pub expected: &'static [(char, bool)],
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "2x2 monochrome square",
        rows: &["aa", "aa"],
        expected: &[('-', true)],
    },
    Fixture {
        name: "2x2 with one breaker",
        rows: &["aa", "ab"],
        expected: &[('-', false)],
    },
    Fixture {
        name: "3x3 ring, last corner open",
        rows: &["aaa", "aba", "aa?"],
        expected: &[('a', true), ('b', false)],
    },
    Fixture {
        name: "3x3 ring, center open",
        rows: &["aaa", "a?a", "baa"],
        expected: &[('a', true), ('b', false)],
    },
    Fixture {
        name: "3x2 left pair, bottom open",
        rows: &["ab", "aa", "a?"],
        expected: &[('a', true), ('b', false)],
    },
    Fixture {
        name: "3x2 right pair, top open",
        rows: &["?a", "aa", "ab"],
        expected: &[('a', true), ('b', false)],
    },
];

/// The fixture's grid with `?` replaced by `fill`.
pub fn fixture_grid(f: &Fixture, fill: char) -> Grid {
    let rows: Vec<String> = f.rows.iter().map(|r| r.replace('?', &fill.to_string())).collect();
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    Grid::from_rows(&refs)
}
