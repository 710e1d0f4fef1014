//! Block adversaries: small state machines that answer cell queries on a
//! 2x2, 3x2, 2x3 or 3x3 block so that, until the block's last cell is read,
//! the block can still be completed both with and without a cycle.
//!
//! Each machine works over a two-symbol alphabet. The `primary` symbol is
//! returned almost always; the `breaker` is returned at most once before the
//! final cell, when the machine needs to break a cycle it can no longer keep
//! open, and is offered again as the acyclic option on the final cell.
//!
//! Pair layout for [`BlockKind::B2x3`] (3 rows, 2 cols, local coordinates):
//!
//! ```text
//! (0,0) (0,1)   <- pair 0
//! (1,0) (1,1)   <- unpaired
//! (2,0) (2,1)   <- pair 1
//! ```
//!
//! [`BlockKind::B3x2`] is the transpose: 2 rows, 3 cols, with pairs in
//! columns 0 and 2.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{complete, Cell, Grid, GridDims, PartialGrid, Symbol};

/// Assignment of symbols to a set of cells.
pub type Fill = BTreeMap<Cell, Symbol>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    B2x2,
    /// Three rows of two cells, paired top and bottom rows.
    B2x3,
    /// Two rows of three cells, paired left and right columns.
    B3x2,
    B3x3,
}

impl BlockKind {
    pub const ALL: [BlockKind; 4] = [BlockKind::B2x2, BlockKind::B2x3, BlockKind::B3x2, BlockKind::B3x3];

    /// Local footprint as `rows x cols`.
    pub fn dims(self) -> GridDims {
        let (rows, cols) = match self {
            BlockKind::B2x2 => (2, 2),
            BlockKind::B2x3 => (3, 2),
            BlockKind::B3x2 => (2, 3),
            BlockKind::B3x3 => (3, 3),
        };
        GridDims { rows, cols }
    }

    /// The kind whose footprint is `rows x cols`.
    pub fn for_footprint(rows: usize, cols: usize) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.dims() == GridDims { rows, cols })
    }

    pub fn cell_count(self) -> usize {
        self.dims().cell_count()
    }

    /// Parses the footprint notation used on the command line (`2x2`,
    /// `2x3`, `3x2`, `3x3`) where `2x3` names the paired-rows block.
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "2x2" => Some(BlockKind::B2x2),
            "2x3" => Some(BlockKind::B2x3),
            "3x2" => Some(BlockKind::B3x2),
            "3x3" => Some(BlockKind::B3x3),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BlockKind::B2x2 => "2x2",
            BlockKind::B2x3 => "2x3",
            BlockKind::B3x2 => "3x2",
            BlockKind::B3x3 => "3x3",
        }
    }
}

impl std::str::FromStr for BlockKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::from_label(s).ok_or_else(|| format!("unknown block size {s:?} (expected 2x2, 2x3, 3x2 or 3x3)"))
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockAlphabet {
    primary: Symbol,
    breaker: Symbol,
}

impl BlockAlphabet {
    pub const AB: BlockAlphabet = BlockAlphabet {
        primary: Symbol::A,
        breaker: Symbol::B,
    };
    pub const CD: BlockAlphabet = BlockAlphabet {
        primary: Symbol::C,
        breaker: Symbol::D,
    };

    pub fn new(primary: Symbol, breaker: Symbol) -> Result<Self> {
        if primary == breaker {
            return Err(Error::DegenerateAlphabet(primary.as_char()));
        }
        Ok(Self { primary, breaker })
    }

    pub fn primary(&self) -> Symbol {
        self.primary
    }

    pub fn breaker(&self) -> Symbol {
        self.breaker
    }

    pub fn symbols(&self) -> [Symbol; 2] {
        [self.primary, self.breaker]
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s == self.primary || s == self.breaker
    }
}

impl fmt::Display for BlockAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.primary, self.breaker)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdversaryPhase {
    /// Only primary symbols handed out so far.
    State0,
    /// The breaker has been spent; primary until the last cell.
    State1,
    /// The last cell was queried and awaits [`BlockAdversary::commit`].
    State2Final,
    Committed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Response {
    Determined(Symbol),
    /// Offered on the block's last cell: either symbol keeps the answer
    /// consistent, one with a cycle and one without.
    FinalChoice {
        cycle_symbol: Symbol,
        acyclic_symbol: Symbol,
    },
}

/// Which outcome a final choice realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Cycle,
    Acyclic,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Cycle, Branch::Acyclic];

    pub fn has_cycle(self) -> bool {
        self == Branch::Cycle
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Cycle => "cycle",
            Branch::Acyclic => "acyclic",
        })
    }
}

/// The two completions of a block's unread cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witnesses {
    pub cycle_fill: Fill,
    pub acyclic_fill: Fill,
}

const CENTER: Cell = Cell::new(1, 1);

#[derive(Debug, Clone)]
pub struct BlockAdversary {
    kind: BlockKind,
    alphabet: BlockAlphabet,
    phase: AdversaryPhase,
    responses: PartialGrid,
    order: Vec<Cell>,
    pending: Option<Cell>,
    /// For the paired kinds: index of the pair whose completion spent the breaker.
    completed_pair: Option<usize>,
}

impl BlockAdversary {
    pub fn new(kind: BlockKind, alphabet: BlockAlphabet) -> Self {
        Self {
            kind,
            alphabet,
            phase: AdversaryPhase::State0,
            responses: PartialGrid::empty(kind.dims()),
            order: Vec::with_capacity(kind.cell_count()),
            pending: None,
            completed_pair: None,
        }
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn alphabet(&self) -> BlockAlphabet {
        self.alphabet
    }

    pub fn phase(&self) -> AdversaryPhase {
        self.phase
    }

    pub fn dims(&self) -> GridDims {
        self.kind.dims()
    }

    /// Responses given so far. The pending final cell is absent until committed.
    pub fn responses(&self) -> &PartialGrid {
        &self.responses
    }

    /// Queried cells in query order, including a pending final cell.
    pub fn query_order(&self) -> &[Cell] {
        &self.order
    }

    pub fn pending_cell(&self) -> Option<Cell> {
        self.pending
    }

    /// Cells with no symbol yet; includes a pending final cell.
    pub fn unread_cells(&self) -> Vec<Cell> {
        self.responses.unread_cells().collect()
    }

    pub fn unread_count(&self) -> usize {
        self.responses.unread_count()
    }

    /// Cells not yet queried at all.
    pub fn unqueried_count(&self) -> usize {
        self.kind.cell_count() - self.order.len()
    }

    pub fn breaker_count(&self) -> usize {
        self.responses
            .read_cells()
            .filter(|&(_, s)| s == self.alphabet.breaker)
            .count()
    }

    pub fn completed_pair(&self) -> Option<usize> {
        self.completed_pair
    }

    pub fn respond(&mut self, cell: Cell) -> Result<Response> {
        match self.phase {
            AdversaryPhase::Committed => {
                return Err(Error::Protocol("block is already committed".into()))
            }
            AdversaryPhase::State2Final => {
                return Err(Error::Protocol("block final choice awaits commit".into()))
            }
            _ => {}
        }
        self.dims().check(cell)?;
        if self.responses.is_read(cell) {
            return Err(Error::RepeatQuery(cell));
        }
        self.order.push(cell);

        if self.unread_count() == 1 {
            self.pending = Some(cell);
            self.phase = AdversaryPhase::State2Final;
            return Ok(Response::FinalChoice {
                cycle_symbol: self.alphabet.primary,
                acyclic_symbol: self.alphabet.breaker,
            });
        }

        let spend_breaker = self.phase == AdversaryPhase::State0 && self.triggers(cell);
        let symbol = if spend_breaker {
            self.phase = AdversaryPhase::State1;
            self.alphabet.breaker
        } else {
            self.alphabet.primary
        };
        self.responses.reveal(cell, symbol)?;
        Ok(Response::Determined(symbol))
    }

    /// Whether a State0 query of `cell` spends the breaker. Records the
    /// completed pair for the paired kinds.
    fn triggers(&mut self, cell: Cell) -> bool {
        match self.kind {
            BlockKind::B2x2 => false,
            BlockKind::B3x3 => {
                if cell == CENTER {
                    return true;
                }
                let boundary_read = self
                    .responses
                    .read_cells()
                    .filter(|&(c, _)| c != CENTER)
                    .count();
                boundary_read == 7
            }
            BlockKind::B2x3 | BlockKind::B3x2 => match self.pair_of(cell) {
                Some((pair, partner)) if self.responses.is_read(partner) => {
                    self.completed_pair = Some(pair);
                    true
                }
                _ => false,
            },
        }
    }

    fn to_canonical(&self, cell: Cell) -> Cell {
        if self.kind == BlockKind::B3x2 {
            cell.transposed()
        } else {
            cell
        }
    }

    /// Pair index and partner for a paired-kind cell.
    fn pair_of(&self, cell: Cell) -> Option<(usize, Cell)> {
        let c = self.to_canonical(cell);
        let pair = match c.row {
            0 => 0,
            2 => 1,
            _ => return None,
        };
        let partner = self.to_canonical(Cell::new(c.row, 1 - c.col));
        Some((pair, partner))
    }

    /// Local cells of pair `pair` for the paired kinds, row-major.
    pub fn pair_cells(&self, pair: usize) -> [Cell; 2] {
        let row = if pair == 0 { 0 } else { 2 };
        let mut cells = [
            self.to_canonical(Cell::new(row, 0)),
            self.to_canonical(Cell::new(row, 1)),
        ];
        cells.sort();
        cells
    }

    /// Completions of the unread cells: one that leaves the block with a
    /// cycle and one that leaves it acyclic.
    pub fn witnesses(&self) -> Result<Witnesses> {
        if self.phase == AdversaryPhase::Committed {
            return Err(Error::Protocol("no unread cells in a committed block".into()));
        }
        let unread = self.unread_cells();
        let primary = self.alphabet.primary;
        let breaker = self.alphabet.breaker;

        let cycle_fill: Fill = unread.iter().map(|&c| (c, primary)).collect();

        let mut breakers: Vec<Cell> = Vec::new();
        match (self.kind, self.phase) {
            (BlockKind::B2x2, _) => breakers.push(unread[0]),
            (BlockKind::B3x3, AdversaryPhase::State0) => {
                // An unbroken ring of primaries is itself a cycle, so the
                // center alone is not enough.
                breakers.push(CENTER);
                if let Some(&b) = unread.iter().find(|&&c| c != CENTER) {
                    breakers.push(b);
                }
            }
            (BlockKind::B3x3, _) => breakers.push(unread[0]),
            (_, AdversaryPhase::State0) => {
                for pair in 0..2 {
                    if let Some(c) = self.pair_cells(pair).into_iter().find(|c| unread.contains(c)) {
                        breakers.push(c);
                    }
                }
            }
            (_, _) => {
                let done = self.completed_pair.unwrap_or(0);
                let survivor = self.pair_cells(1 - done);
                let pick = survivor
                    .into_iter()
                    .find(|c| unread.contains(c))
                    .unwrap_or(unread[0]);
                breakers.push(pick);
            }
        }
        let acyclic_fill: Fill = unread
            .iter()
            .map(|&c| (c, if breakers.contains(&c) { breaker } else { primary }))
            .collect();

        Ok(Witnesses {
            cycle_fill,
            acyclic_fill,
        })
    }

    /// The block completed with `fill`.
    pub fn completed_with(&self, fill: &Fill) -> Result<Grid> {
        complete(&self.responses, fill)
    }

    /// Resolves the pending final cell. Returns the symbol placed there.
    pub fn commit(&mut self, branch: Branch) -> Result<Symbol> {
        if self.phase != AdversaryPhase::State2Final {
            return Err(Error::Protocol(format!(
                "commit requires a pending final cell, block is in {:?}",
                self.phase
            )));
        }
        let cell = self.pending.take().expect("State2Final always has a pending cell");
        let symbol = match branch {
            Branch::Cycle => self.alphabet.primary,
            Branch::Acyclic => self.alphabet.breaker,
        };
        self.responses.reveal(cell, symbol)?;
        self.phase = AdversaryPhase::Committed;
        Ok(symbol)
    }

    /// The fully resolved block, once committed.
    pub fn final_grid(&self) -> Option<Grid> {
        self.responses.to_grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::has_cycle;

    fn c(r: usize, col: usize) -> Cell {
        Cell::new(r, col)
    }

    fn det(s: Symbol) -> Response {
        Response::Determined(s)
    }

    const FINAL_AB: Response = Response::FinalChoice {
        cycle_symbol: Symbol::A,
        acyclic_symbol: Symbol::B,
    };

    #[test]
    fn fresh_adversaries() {
        let adv = BlockAdversary::new(BlockKind::B2x2, BlockAlphabet::AB);
        assert_eq!(adv.phase(), AdversaryPhase::State0);
        assert_eq!(adv.unread_count(), 4);
        let adv = BlockAdversary::new(BlockKind::B3x3, BlockAlphabet::CD);
        assert_eq!(adv.unread_count(), 9);
        assert_eq!(adv.breaker_count(), 0);
    }

    #[test]
    fn two_by_two_final_read() {
        let mut adv = BlockAdversary::new(BlockKind::B2x2, BlockAlphabet::AB);
        for cell in [c(0, 0), c(0, 1), c(1, 0)] {
            assert_eq!(adv.respond(cell).unwrap(), det(Symbol::A));
        }
        assert_eq!(adv.respond(c(1, 1)).unwrap(), FINAL_AB);
        assert_eq!(adv.phase(), AdversaryPhase::State2Final);

        let mut cyc = adv.clone();
        assert_eq!(cyc.commit(Branch::Cycle).unwrap(), Symbol::A);
        assert!(has_cycle(&cyc.final_grid().unwrap()));
        assert_eq!(adv.commit(Branch::Acyclic).unwrap(), Symbol::B);
        assert_eq!(adv.final_grid().unwrap(), Grid::from_rows(&["aa", "ab"]));
        assert!(!has_cycle(&adv.final_grid().unwrap()));
    }

    #[test]
    fn three_by_three_ring_broken_last() {
        let mut adv = BlockAdversary::new(BlockKind::B3x3, BlockAlphabet::AB);
        let boundary = [c(0, 0), c(0, 1), c(0, 2), c(1, 0), c(1, 2), c(2, 1), c(2, 2)];
        for cell in boundary {
            assert_eq!(adv.respond(cell).unwrap(), det(Symbol::A));
        }
        assert_eq!(adv.respond(c(2, 0)).unwrap(), det(Symbol::B));
        assert_eq!(adv.phase(), AdversaryPhase::State1);
        assert_eq!(adv.respond(c(1, 1)).unwrap(), FINAL_AB);
        adv.commit(Branch::Cycle).unwrap();
        let g = adv.final_grid().unwrap();
        assert_eq!(g, Grid::from_rows(&["aaa", "aaa", "baa"]));
        assert!(has_cycle(&g));
    }

    #[test]
    fn three_by_three_center_first() {
        let mut adv = BlockAdversary::new(BlockKind::B3x3, BlockAlphabet::AB);
        assert_eq!(adv.respond(c(1, 1)).unwrap(), det(Symbol::B));
        assert_eq!(adv.phase(), AdversaryPhase::State1);
    }

    #[test]
    fn paired_block_top_pair_done() {
        let mut adv = BlockAdversary::new(BlockKind::B2x3, BlockAlphabet::AB);
        assert_eq!(adv.respond(c(0, 0)).unwrap(), det(Symbol::A));
        assert_eq!(adv.respond(c(2, 0)).unwrap(), det(Symbol::A));
        assert_eq!(adv.respond(c(0, 1)).unwrap(), det(Symbol::B));
        assert_eq!(adv.completed_pair(), Some(0));

        let w = adv.witnesses().unwrap();
        let unread = [c(1, 0), c(1, 1), c(2, 1)];
        assert_eq!(w.cycle_fill.keys().copied().collect::<Vec<_>>(), unread);
        assert!(w.cycle_fill.values().all(|&s| s == Symbol::A));
        assert_eq!(w.acyclic_fill[&c(2, 1)], Symbol::B);
        assert!(has_cycle(&adv.completed_with(&w.cycle_fill).unwrap()));
        assert!(!has_cycle(&adv.completed_with(&w.acyclic_fill).unwrap()));
    }

    #[test]
    fn ring_witnesses_after_center() {
        let mut adv = BlockAdversary::new(BlockKind::B3x3, BlockAlphabet::AB);
        adv.respond(c(1, 1)).unwrap();
        for cell in [c(0, 0), c(0, 1), c(0, 2), c(1, 0), c(1, 2), c(2, 0), c(2, 1)] {
            adv.respond(cell).unwrap();
        }
        let w = adv.witnesses().unwrap();
        assert_eq!(w.cycle_fill, Fill::from([(c(2, 2), Symbol::A)]));
        assert_eq!(w.acyclic_fill, Fill::from([(c(2, 2), Symbol::B)]));
    }

    #[test]
    fn fresh_three_by_three_acyclic_witness_breaks_ring_and_center() {
        let adv = BlockAdversary::new(BlockKind::B3x3, BlockAlphabet::AB);
        let w = adv.witnesses().unwrap();
        let g = adv.completed_with(&w.acyclic_fill).unwrap();
        assert_eq!(g, Grid::from_rows(&["baa", "aba", "aaa"]));
        assert!(!has_cycle(&g));
    }

    #[test]
    fn transposed_pairs() {
        let mut adv = BlockAdversary::new(BlockKind::B3x2, BlockAlphabet::AB);
        assert_eq!(adv.dims(), GridDims { rows: 2, cols: 3 });
        assert_eq!(adv.respond(c(0, 0)).unwrap(), det(Symbol::A));
        assert_eq!(adv.respond(c(0, 2)).unwrap(), det(Symbol::A));
        assert_eq!(adv.respond(c(1, 0)).unwrap(), det(Symbol::B));
        assert_eq!(adv.pair_cells(1), [c(0, 2), c(1, 2)]);
    }

    #[test]
    fn protocol_errors() {
        let mut adv = BlockAdversary::new(BlockKind::B2x2, BlockAlphabet::AB);
        assert!(matches!(adv.respond(c(2, 0)), Err(Error::OutOfRange { .. })));
        adv.respond(c(0, 0)).unwrap();
        assert_eq!(adv.respond(c(0, 0)), Err(Error::RepeatQuery(c(0, 0))));
        assert!(matches!(adv.commit(Branch::Cycle), Err(Error::Protocol(_))));
        for cell in [c(0, 1), c(1, 0), c(1, 1)] {
            adv.respond(cell).unwrap();
        }
        assert!(adv.witnesses().is_ok());
        assert_eq!(adv.respond(c(1, 1)).map_err(|e| matches!(e, Error::Protocol(_))), Err(true));
        adv.commit(Branch::Cycle).unwrap();
        assert!(matches!(adv.witnesses(), Err(Error::Protocol(_))));
        assert!(matches!(adv.respond(c(0, 0)), Err(Error::Protocol(_))));
    }

    #[test]
    fn degenerate_alphabet_rejected() {
        assert!(BlockAlphabet::new(Symbol::A, Symbol::A).is_err());
        assert!(BlockAlphabet::new(Symbol::new('x').unwrap(), Symbol::new('y').unwrap()).is_ok());
    }

    #[test]
    fn footprint_lookup() {
        assert_eq!(BlockKind::for_footprint(3, 2), Some(BlockKind::B2x3));
        assert_eq!(BlockKind::for_footprint(2, 3), Some(BlockKind::B3x2));
        assert_eq!(BlockKind::for_footprint(4, 2), None);
    }
}
