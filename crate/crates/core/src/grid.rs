//! Colored grids and their implicit graphs.
//!
//! Cells are vertices; two orthogonally adjacent cells are joined by an edge
//! when they carry the same symbol. Coordinates are 0-based, `(row, col)`,
//! and every cell has a row-major index `row * cols + col`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    pub rows: usize,
    pub cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims {
                rows,
                cols,
                reason: "rows and cols must be positive",
            });
        }
        Ok(Self { rows, cols })
    }

    /// Dimensions accepted by the adversary: at least 2x2.
    pub fn for_adversary(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidDims {
                rows,
                cols,
                reason: "the adversary needs at least 2 rows and 2 cols",
            });
        }
        Self::new(rows, cols)
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn check(&self, cell: Cell) -> Result<()> {
        if self.contains(cell) {
            Ok(())
        } else {
            Err(Error::OutOfRange { cell, dims: *self })
        }
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index / self.cols, index % self.cols)
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let cols = self.cols;
        (0..self.cell_count()).map(move |i| Cell::new(i / cols, i % cols))
    }

    pub fn transposed(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
        }
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// A cell position. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn transposed(self) -> Self {
        Self::new(self.col, self.row)
    }

    pub fn offset(self, origin: Cell) -> Self {
        Self::new(self.row + origin.row, self.col + origin.col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// A single printable, non-whitespace character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(char);

impl Symbol {
    pub const A: Symbol = Symbol('a');
    pub const B: Symbol = Symbol('b');
    pub const C: Symbol = Symbol('c');
    pub const D: Symbol = Symbol('d');

    pub fn new(c: char) -> Result<Self> {
        if c.is_whitespace() || c.is_control() {
            Err(Error::InvalidSymbol(c))
        } else {
            Ok(Self(c))
        }
    }

    pub fn as_char(self) -> char {
        self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<char> for Symbol {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        Symbol::new(c)
    }
}

/// Orthogonal neighbors of `cell` in the order up, down, left, right,
/// skipping positions outside the grid.
pub fn neighbors(cell: Cell, dims: GridDims) -> Result<Vec<Cell>> {
    dims.check(cell)?;
    Ok(neighbor_iter(cell, dims).collect())
}

pub(crate) fn neighbor_iter(cell: Cell, dims: GridDims) -> impl Iterator<Item = Cell> {
    let Cell { row, col } = cell;
    [
        (row > 0).then(|| Cell::new(row - 1, col)),
        (row + 1 < dims.rows).then(|| Cell::new(row + 1, col)),
        (col > 0).then(|| Cell::new(row, col - 1)),
        (col + 1 < dims.cols).then(|| Cell::new(row, col + 1)),
    ]
    .into_iter()
    .flatten()
}

/// A fully assigned grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    dims: GridDims,
    symbols: Vec<Symbol>,
}

impl Grid {
    pub fn new(dims: GridDims, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.len() != dims.cell_count() {
            return Err(Error::InvalidFill(format!(
                "{} symbols for a {} grid",
                symbols.len(),
                dims
            )));
        }
        Ok(Self { dims, symbols })
    }

    pub fn filled(dims: GridDims, symbol: Symbol) -> Self {
        Self {
            dims,
            symbols: vec![symbol; dims.cell_count()],
        }
    }

    /// Builds a grid from rows of text; panics on malformed input. Meant for
    /// fixtures, use [`parse_grid`] for untrusted text.
    pub fn from_rows(rows: &[&str]) -> Self {
        parse_grid(&rows.join("\n")).expect("malformed fixture grid")
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, cell: Cell) -> Symbol {
        self.symbols[self.dims.index(cell)]
    }

    pub fn set(&mut self, cell: Cell, symbol: Symbol) {
        let i = self.dims.index(cell);
        self.symbols[i] = symbol;
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn transpose(&self) -> Grid {
        let dims = self.dims.transposed();
        let symbols = dims.cells().map(|c| self.get(c.transposed())).collect();
        Grid { dims, symbols }
    }

    pub fn map_symbols(&self, f: impl Fn(Symbol) -> Symbol) -> Grid {
        Grid {
            dims: self.dims,
            symbols: self.symbols.iter().map(|&s| f(s)).collect(),
        }
    }

    /// The sub-grid with top-left `origin` and the given size.
    pub fn restrict(&self, origin: Cell, dims: GridDims) -> Grid {
        let symbols = dims.cells().map(|c| self.get(c.offset(origin))).collect();
        Grid { dims, symbols }
    }

    pub fn to_partial(&self) -> PartialGrid {
        PartialGrid {
            dims: self.dims,
            assigned: self.symbols.iter().map(|&s| Some(s)).collect(),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_grid(self))
    }
}

/// A grid in which only some cells have been revealed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialGrid {
    dims: GridDims,
    assigned: Vec<Option<Symbol>>,
}

impl PartialGrid {
    pub fn empty(dims: GridDims) -> Self {
        Self {
            dims,
            assigned: vec![None; dims.cell_count()],
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, cell: Cell) -> Option<Symbol> {
        self.assigned[self.dims.index(cell)]
    }

    pub fn is_read(&self, cell: Cell) -> bool {
        self.get(cell).is_some()
    }

    /// Records a revealed symbol. Revealing a cell twice is an error.
    pub fn reveal(&mut self, cell: Cell, symbol: Symbol) -> Result<()> {
        self.dims.check(cell)?;
        let slot = &mut self.assigned[self.dims.index(cell)];
        if slot.is_some() {
            return Err(Error::RepeatQuery(cell));
        }
        *slot = Some(symbol);
        Ok(())
    }

    pub fn read_count(&self) -> usize {
        self.assigned.iter().filter(|s| s.is_some()).count()
    }

    pub fn unread_count(&self) -> usize {
        self.assigned.len() - self.read_count()
    }

    pub fn unread_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.dims.cells().filter(move |&c| !self.is_read(c))
    }

    pub fn read_cells(&self) -> impl Iterator<Item = (Cell, Symbol)> + '_ {
        self.dims
            .cells()
            .filter_map(move |c| self.get(c).map(|s| (c, s)))
    }

    pub fn is_complete(&self) -> bool {
        self.assigned.iter().all(Option::is_some)
    }

    /// The total grid, if every cell has been read.
    pub fn to_grid(&self) -> Option<Grid> {
        let symbols = self.assigned.iter().copied().collect::<Option<Vec<_>>>()?;
        Some(Grid {
            dims: self.dims,
            symbols,
        })
    }

    /// Renders the grid with `unread` in place of unread cells.
    pub fn render(&self, unread: char) -> String {
        let mut out = String::with_capacity(self.dims.cell_count() + self.dims.rows);
        for r in 0..self.dims.rows {
            for c in 0..self.dims.cols {
                out.push(self.get(Cell::new(r, c)).map_or(unread, Symbol::as_char));
            }
            out.push('\n');
        }
        out
    }
}

/// Fills the unread cells of `partial` with `fill`.
///
/// `fill` must cover exactly the unread cells.
pub fn complete(partial: &PartialGrid, fill: &BTreeMap<Cell, Symbol>) -> Result<Grid> {
    let dims = partial.dims;
    let mut symbols = Vec::with_capacity(dims.cell_count());
    for cell in dims.cells() {
        match (partial.get(cell), fill.get(&cell).copied()) {
            (Some(s), None) | (None, Some(s)) => symbols.push(s),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidFill(format!("fill covers read cell {cell}")))
            }
            (None, None) => {
                return Err(Error::InvalidFill(format!("fill is missing unread cell {cell}")))
            }
        }
    }
    if let Some(bad) = fill.keys().find(|c| !dims.contains(**c)) {
        return Err(Error::InvalidFill(format!("fill cell {bad} is out of range")));
    }
    Ok(Grid { dims, symbols })
}

/// Iterates same-color edges in row-major order of the first endpoint,
/// right edge before down edge.
fn edge_iter(grid: &Grid) -> impl Iterator<Item = (Cell, Cell)> + '_ {
    let dims = grid.dims;
    dims.cells().flat_map(move |cell| {
        let s = grid.get(cell);
        let right = Cell::new(cell.row, cell.col + 1);
        let down = Cell::new(cell.row + 1, cell.col);
        [right, down]
            .into_iter()
            .filter(move |&n| dims.contains(n) && grid.get(n) == s)
            .map(move |n| (cell, n))
    })
}

pub fn same_color_edges(grid: &Grid) -> Vec<(Cell, Cell)> {
    edge_iter(grid).collect()
}

/// Whether the grid graph contains a cycle.
///
/// Edges are fed to a union-find forest; the first edge whose endpoints are
/// already connected closes a cycle.
pub fn has_cycle(grid: &Grid) -> bool {
    let dims = grid.dims;
    let mut uf = UnionFind::new(dims.cell_count());
    edge_iter(grid).any(|(u, v)| !uf.union(dims.index(u), dims.index(v)))
}

/// Extracts one cycle as a closed vertex sequence (first vertex not repeated).
pub fn find_cycle(grid: &Grid) -> Option<Vec<Cell>> {
    let dims = grid.dims;
    let mut uf = UnionFind::new(dims.cell_count());
    let mut forest: Vec<Vec<usize>> = vec![Vec::new(); dims.cell_count()];
    for (u, v) in edge_iter(grid) {
        let (a, b) = (dims.index(u), dims.index(v));
        if uf.union(a, b) {
            forest[a].push(b);
            forest[b].push(a);
            continue;
        }
        // Tree path from a to b plus the closing edge (b, a).
        let mut prev = vec![usize::MAX; dims.cell_count()];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if x == b {
                break;
            }
            for &y in &forest[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            path.push(cur);
        }
        return Some(path.into_iter().rev().map(|i| dims.cell(i)).collect());
    }
    None
}

/// Parses the grid text format: equal-length lines of printable,
/// non-whitespace characters. A trailing newline is optional.
pub fn parse_grid(text: &str) -> Result<Grid> {
    parse_grid_inner(text, None)
}

/// Like [`parse_grid`], additionally rejecting symbols outside `alphabet`.
pub fn parse_grid_in(text: &str, alphabet: &[Symbol]) -> Result<Grid> {
    parse_grid_inner(text, Some(alphabet))
}

fn parse_grid_inner(text: &str, alphabet: Option<&[Symbol]>) -> Result<Grid> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let body = body.strip_suffix('\r').unwrap_or(body);
    if body.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty input".into(),
        });
    }
    let mut width = None;
    let mut symbols = Vec::new();
    let mut rows = 0;
    for (i, line) in body.split('\n').enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty row".into(),
            });
        }
        let mut count = 0;
        for ch in line.chars() {
            let sym = Symbol::new(ch).map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid character {ch:?} inside row"),
            })?;
            if let Some(alpha) = alphabet {
                if !alpha.contains(&sym) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("symbol {ch:?} is not in the declared alphabet"),
                    });
                }
            }
            symbols.push(sym);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("row has {count} cells, expected {w}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let dims = GridDims::new(rows, width.unwrap_or(0))?;
    Grid::new(dims, symbols)
}

/// One line per row, each newline-terminated.
pub fn serialize_grid(grid: &Grid) -> String {
    let mut out = String::with_capacity(grid.dims.cell_count() + grid.dims.rows);
    for row in grid.symbols.chunks(grid.dims.cols) {
        out.extend(row.iter().map(|s| s.0));
        out.push('\n');
    }
    out
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&serialize_grid(self))
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_grid(&text).map_err(serde::de::Error::custom)
    }
}
