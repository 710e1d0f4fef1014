//! Tiling of an `m x n` grid into blocks and the composed grid adversary.
//!
//! Each dimension is split into bands of width 2 or 3; the product of row
//! and column bands gives the blocks. Blocks whose band coordinates have an
//! even sum use `{a,b}`, the others `{c,d}`, so neighboring blocks never
//! share a symbol and no same-color edge crosses a block boundary.

use std::fmt;

use crate::block::{BlockAdversary, BlockAlphabet, BlockKind, Branch, Response};
use crate::error::{Error, Result};
use crate::grid::{Cell, Grid, GridDims, PartialGrid, Symbol};

/// A dimension written as an ordered sum of 2s and 3s.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BandDecomposition {
    sizes: Vec<usize>,
}

impl BandDecomposition {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Start offset of each band.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    /// The band containing `index` and the index's offset within it.
    pub fn locate(&self, index: usize) -> Option<(usize, usize)> {
        let mut start = 0;
        for (band, &size) in self.sizes.iter().enumerate() {
            if index < start + size {
                return Some((band, index - start));
            }
            start += size;
        }
        None
    }
}

impl fmt::Display for BandDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.sizes)
    }
}

/// Splits `length` into bands: all 2s when even, 2s then a single 3 when odd.
pub fn decompose(length: usize) -> Result<BandDecomposition> {
    if length < 2 {
        return Err(Error::InvalidDims {
            rows: length,
            cols: length,
            reason: "a band decomposition needs length at least 2",
        });
    }
    let mut sizes = vec![2; length / 2];
    if length % 2 == 1 {
        *sizes.last_mut().expect("length >= 2 gives at least one band") = 3;
    }
    Ok(BandDecomposition { sizes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    pub origin: Cell,
    pub kind: BlockKind,
    pub band_row: usize,
    pub band_col: usize,
    pub alphabet: BlockAlphabet,
}

impl BlockSpec {
    pub fn dims(&self) -> GridDims {
        self.kind.dims()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        let d = self.dims();
        cell.row >= self.origin.row
            && cell.col >= self.origin.col
            && cell.row < self.origin.row + d.rows
            && cell.col < self.origin.col + d.cols
    }

    pub fn to_global(&self, local: Cell) -> Cell {
        local.offset(self.origin)
    }

    /// Global cells of the footprint, row-major.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.dims().cells().map(move |c| c.offset(self.origin))
    }
}

/// Alphabet of the block at band coordinates `(band_row, band_col)`.
pub fn parity_alphabet(band_row: usize, band_col: usize) -> BlockAlphabet {
    if (band_row + band_col).is_multiple_of(2) {
        BlockAlphabet::AB
    } else {
        BlockAlphabet::CD
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tiling {
    dims: GridDims,
    row_bands: BandDecomposition,
    col_bands: BandDecomposition,
    blocks: Vec<BlockSpec>,
}

/// Product tiling of `decompose(rows) x decompose(cols)`.
pub fn tile(dims: GridDims) -> Result<Tiling> {
    let dims = GridDims::for_adversary(dims.rows, dims.cols)?;
    let row_bands = decompose(dims.rows)?;
    let col_bands = decompose(dims.cols)?;
    let row_offsets = row_bands.offsets();
    let col_offsets = col_bands.offsets();
    let mut blocks = Vec::with_capacity(row_bands.len() * col_bands.len());
    for (br, (&r0, &h)) in row_offsets.iter().zip(row_bands.sizes()).enumerate() {
        for (bc, (&c0, &w)) in col_offsets.iter().zip(col_bands.sizes()).enumerate() {
            let kind = BlockKind::for_footprint(h, w).expect("band sizes are 2 or 3");
            blocks.push(BlockSpec {
                origin: Cell::new(r0, c0),
                kind,
                band_row: br,
                band_col: bc,
                alphabet: parity_alphabet(br, bc),
            });
        }
    }
    Ok(Tiling {
        dims,
        row_bands,
        col_bands,
        blocks,
    })
}

impl Tiling {
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn row_bands(&self) -> &BandDecomposition {
        &self.row_bands
    }

    pub fn col_bands(&self) -> &BandDecomposition {
        &self.col_bands
    }

    /// Blocks in band-row-major order.
    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn band_grid(&self) -> (usize, usize) {
        (self.row_bands.len(), self.col_bands.len())
    }

    pub fn block_index(&self, band_row: usize, band_col: usize) -> usize {
        band_row * self.col_bands.len() + band_col
    }

    pub fn block(&self, band_row: usize, band_col: usize) -> &BlockSpec {
        &self.blocks[self.block_index(band_row, band_col)]
    }

    /// Index of the covering block and the cell's block-local coordinates.
    pub fn locate(&self, cell: Cell) -> Result<(usize, Cell)> {
        self.dims.check(cell)?;
        let (br, lr) = self.row_bands.locate(cell.row).expect("row in range");
        let (bc, lc) = self.col_bands.locate(cell.col).expect("col in range");
        Ok((self.block_index(br, bc), Cell::new(lr, lc)))
    }

    pub fn block_of(&self, cell: Cell) -> Result<(&BlockSpec, Cell)> {
        let (i, local) = self.locate(cell)?;
        Ok((&self.blocks[i], local))
    }
}

/// What the composed adversary reveals for a queried cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComposedResponse {
    Symbol(Symbol),
    /// Surfaced only on the grid's last unread cell.
    GlobalFinalChoice {
        cycle_symbol: Symbol,
        acyclic_symbol: Symbol,
    },
}

/// Cyclic and acyclic completions of the whole grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridWitnesses {
    pub cycle: Grid,
    pub acyclic: Grid,
}

/// Grid adversary built from one block adversary per tile.
///
/// Every block that reaches its own last cell before the grid's last cell is
/// resolved acyclic on the spot; only the block holding the grid's last
/// unread cell gets to choose.
#[derive(Debug, Clone)]
pub struct ComposedAdversary {
    tiling: Tiling,
    blocks: Vec<BlockAdversary>,
    committed: Vec<bool>,
    observed: PartialGrid,
    unread_total: usize,
    pending: Option<(usize, Cell)>,
}

impl ComposedAdversary {
    pub fn new(dims: GridDims) -> Result<Self> {
        Ok(Self::from_tiling(tile(dims)?))
    }

    pub fn from_tiling(tiling: Tiling) -> Self {
        let blocks = tiling
            .blocks()
            .iter()
            .map(|spec| BlockAdversary::new(spec.kind, spec.alphabet))
            .collect::<Vec<_>>();
        let committed = vec![false; blocks.len()];
        let dims = tiling.dims();
        Self {
            tiling,
            blocks,
            committed,
            observed: PartialGrid::empty(dims),
            unread_total: dims.cell_count(),
            pending: None,
        }
    }

    pub fn tiling(&self) -> &Tiling {
        &self.tiling
    }

    pub fn dims(&self) -> GridDims {
        self.tiling.dims()
    }

    pub fn block_adversaries(&self) -> &[BlockAdversary] {
        &self.blocks
    }

    pub fn committed_flags(&self) -> &[bool] {
        &self.committed
    }

    /// Symbols revealed so far; the pending final cell is absent.
    pub fn observed(&self) -> &PartialGrid {
        &self.observed
    }

    /// Cells not yet revealed, counting a pending final cell.
    pub fn unread_total(&self) -> usize {
        self.unread_total
    }

    pub fn pending_cell(&self) -> Option<Cell> {
        self.pending.map(|(i, local)| self.tiling.blocks()[i].to_global(local))
    }

    pub fn respond(&mut self, cell: Cell) -> Result<ComposedResponse> {
        if self.pending.is_some() {
            return Err(Error::Protocol("global final choice awaits commit".into()));
        }
        if self.unread_total == 0 {
            return Err(Error::Protocol("every cell has been revealed".into()));
        }
        let (i, local) = self.tiling.locate(cell)?;
        if self.observed.is_read(cell) {
            return Err(Error::RepeatQuery(cell));
        }
        match self.blocks[i].respond(local)? {
            Response::Determined(s) => {
                self.observed.reveal(cell, s)?;
                self.unread_total -= 1;
                Ok(ComposedResponse::Symbol(s))
            }
            Response::FinalChoice {
                cycle_symbol,
                acyclic_symbol,
            } => {
                if self.unread_total == 1 {
                    self.pending = Some((i, local));
                    return Ok(ComposedResponse::GlobalFinalChoice {
                        cycle_symbol,
                        acyclic_symbol,
                    });
                }
                let s = self.blocks[i].commit(Branch::Acyclic)?;
                self.committed[i] = true;
                self.observed.reveal(cell, s)?;
                self.unread_total -= 1;
                Ok(ComposedResponse::Symbol(s))
            }
        }
    }

    /// Resolves the grid's last cell. Returns the symbol placed there.
    pub fn commit(&mut self, branch: Branch) -> Result<Symbol> {
        let (i, local) = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("no global final choice is pending".into()))?;
        let s = self.blocks[i].commit(branch)?;
        self.committed[i] = true;
        let cell = self.tiling.blocks()[i].to_global(local);
        self.observed.reveal(cell, s)?;
        self.unread_total -= 1;
        Ok(s)
    }

    /// The realized grid once every cell has been resolved.
    pub fn final_grid(&self) -> Option<Grid> {
        self.observed.to_grid()
    }

    /// Index of the block that carries the cycle in the cycle witness: the
    /// first uncommitted block in band-row-major order.
    pub fn cycle_block(&self) -> Option<usize> {
        (0..self.blocks.len()).find(|&i| !self.committed[i] && self.blocks[i].unread_count() > 0)
    }

    /// Completions of every unread cell. The acyclic witness fills each open
    /// block with its acyclic fill; the cycle witness does the same except
    /// for [`Self::cycle_block`], which gets its cycle fill.
    pub fn witnesses(&self) -> Result<GridWitnesses> {
        let designated = self
            .cycle_block()
            .ok_or_else(|| Error::Protocol("no unread cells left".into()))?;
        let mut cycle = self.observed.clone();
        let mut acyclic = self.observed.clone();
        for (i, (adv, spec)) in self.blocks.iter().zip(self.tiling.blocks()).enumerate() {
            if self.committed[i] || adv.unread_count() == 0 {
                continue;
            }
            let w = adv.witnesses()?;
            let cycle_side = if i == designated { &w.cycle_fill } else { &w.acyclic_fill };
            for (&local, &s) in cycle_side {
                cycle.reveal(spec.to_global(local), s)?;
            }
            for (&local, &s) in &w.acyclic_fill {
                acyclic.reveal(spec.to_global(local), s)?;
            }
        }
        let incomplete = || Error::InvariantViolation("witness left a cell unfilled".into());
        Ok(GridWitnesses {
            cycle: cycle.to_grid().ok_or_else(incomplete)?,
            acyclic: acyclic.to_grid().ok_or_else(incomplete)?,
        })
    }
}

/// Same-color edges of `grid` whose endpoints lie in different blocks.
pub fn cross_block_edges(tiling: &Tiling, grid: &Grid) -> Vec<(Cell, Cell)> {
    crate::grid::same_color_edges(grid)
        .into_iter()
        .filter(|&(u, v)| {
            let bu = tiling.locate(u).map(|(i, _)| i);
            let bv = tiling.locate(v).map(|(i, _)| i);
            bu != bv
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::has_cycle;

    fn dims(r: usize, c: usize) -> GridDims {
        GridDims::new(r, c).unwrap()
    }

    /// All ordered compositions of `n` into parts of size 2 and 3.
    fn compositions(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for part in [2, 3] {
            if part <= n {
                for mut rest in compositions(n - part) {
                    rest.insert(0, part);
                    out.push(rest);
                }
            }
        }
        out
    }

    fn canonical_by_enumeration(n: usize) -> Vec<usize> {
        let mut found: Vec<_> = compositions(n)
            .into_iter()
            .filter(|c| c.iter().filter(|&&p| p == 3).count() <= 1)
            .filter(|c| c.windows(2).all(|w| w[0] <= w[1]))
            .collect();
        assert_eq!(found.len(), 1, "canonical form is unique for {n}");
        found.pop().unwrap()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(2).unwrap().sizes(), &[2]);
        assert_eq!(decompose(7).unwrap().sizes(), &[2, 2, 3]);
        assert_eq!(decompose(6).unwrap().sizes(), &[2, 2, 2]);
        assert!(decompose(1).is_err());
        assert!(decompose(0).is_err());
    }

    #[test]
    fn decompose_matches_enumerated_canonical_form() {
        for n in 2..=20 {
            assert_eq!(decompose(n).unwrap().sizes(), canonical_by_enumeration(n).as_slice());
        }
    }

    #[test]
    fn eight_by_six_checkerboard() {
        let t = tile(dims(8, 6)).unwrap();
        assert_eq!(t.band_grid(), (4, 3));
        for spec in t.blocks() {
            assert_eq!(spec.kind, BlockKind::B2x2);
            let expect = if (spec.band_row + spec.band_col) % 2 == 0 {
                BlockAlphabet::AB
            } else {
                BlockAlphabet::CD
            };
            assert_eq!(spec.alphabet, expect);
        }
    }

    #[test]
    fn five_by_five_kinds() {
        let t = tile(dims(5, 5)).unwrap();
        let kinds: Vec<_> = t.blocks().iter().map(|b| (b.origin, b.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (Cell::new(0, 0), BlockKind::B2x2),
                (Cell::new(0, 2), BlockKind::B3x2),
                (Cell::new(2, 0), BlockKind::B2x3),
                (Cell::new(2, 2), BlockKind::B3x3),
            ]
        );
        let (spec, local) = t.block_of(Cell::new(4, 4)).unwrap();
        assert_eq!((spec.origin, spec.kind, local), (Cell::new(2, 2), BlockKind::B3x3, Cell::new(2, 2)));
        let (spec, local) = t.block_of(Cell::new(1, 2)).unwrap();
        assert_eq!(spec.origin, Cell::new(0, 2));
        assert_eq!(spec.dims(), dims(2, 3));
        assert_eq!(local, Cell::new(1, 0));
        assert!(t.block_of(Cell::new(5, 0)).is_err());
    }

    #[test]
    fn single_block() {
        let t = tile(dims(2, 2)).unwrap();
        assert_eq!(t.blocks().len(), 1);
        assert_eq!(t.blocks()[0].alphabet, BlockAlphabet::AB);
        let (spec, local) = t.block_of(Cell::new(0, 0)).unwrap();
        assert_eq!((spec.band_row, spec.band_col, local), (0, 0, Cell::new(0, 0)));
        assert!(tile(dims(1, 4)).is_err());
    }

    #[test]
    fn four_by_four_block_resolution() {
        let mut adv = ComposedAdversary::new(dims(4, 4)).unwrap();
        for cell in [Cell::new(0, 0), Cell::new(0, 1), Cell::new(1, 0)] {
            assert_eq!(adv.respond(cell).unwrap(), ComposedResponse::Symbol(Symbol::A));
        }
        assert_eq!(adv.respond(Cell::new(1, 1)).unwrap(), ComposedResponse::Symbol(Symbol::B));
        assert_eq!(adv.committed_flags(), &[true, false, false, false]);
        assert_eq!(adv.unread_total(), 12);

        let w = adv.witnesses().unwrap();
        assert_eq!(adv.cycle_block(), Some(1));
        assert!(has_cycle(&w.cycle.restrict(Cell::new(0, 2), dims(2, 2))));
        assert!(has_cycle(&w.cycle));
        assert!(!has_cycle(&w.acyclic));

        let rest: Vec<_> = dims(4, 4).cells().filter(|c| !adv.observed().is_read(*c)).collect();
        for (k, &cell) in rest.iter().enumerate() {
            let r = adv.respond(cell).unwrap();
            if k + 1 == rest.len() {
                assert_eq!(
                    r,
                    ComposedResponse::GlobalFinalChoice {
                        cycle_symbol: Symbol::A,
                        acyclic_symbol: Symbol::B
                    }
                );
            } else {
                assert!(matches!(r, ComposedResponse::Symbol(_)));
            }
        }
        assert!(adv.respond(Cell::new(0, 0)).is_err());
        let mut cyc = adv.clone();
        cyc.commit(Branch::Cycle).unwrap();
        assert!(has_cycle(&cyc.final_grid().unwrap()));
        adv.commit(Branch::Acyclic).unwrap();
        assert!(!has_cycle(&adv.final_grid().unwrap()));
    }

    #[test]
    fn fresh_witnesses() {
        let adv = ComposedAdversary::new(dims(4, 4)).unwrap();
        let w = adv.witnesses().unwrap();
        assert!(!has_cycle(&w.acyclic));
        assert!(has_cycle(&w.cycle.restrict(Cell::new(0, 0), dims(2, 2))));
        assert!(cross_block_edges(adv.tiling(), &w.cycle).is_empty());
    }

    #[test]
    fn repeat_query_rejected() {
        let mut adv = ComposedAdversary::new(dims(3, 3)).unwrap();
        adv.respond(Cell::new(0, 0)).unwrap();
        assert_eq!(adv.respond(Cell::new(0, 0)), Err(Error::RepeatQuery(Cell::new(0, 0))));
        assert!(matches!(adv.respond(Cell::new(3, 0)), Err(Error::OutOfRange { .. })));
        assert!(matches!(adv.commit(Branch::Cycle), Err(Error::Protocol(_))));
    }
}
