//! Base-4 dyadic grids on the unit square. A scale exponent S means the
//! 4^S x 4^S grid of closed cells of side 4^-S; cells are addressed by
//! (column, row) with the origin at the lower left, so the cell covers
//! [col, col+1] x [row, row+1] times 4^-S.

use crate::interval::IntervalUnion;
use crate::rational::{pow2, Rational};
use serde::Serialize;

/// Largest exponent whose cell coordinates fit u64 (4^31 = 2^62).
pub const MAX_EXPONENT: u32 = 31;

/// Hard cap on materialized cells; construction depth beyond this is the
/// schedule's business, not an enumeration's.
pub const CELL_CAP: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub col: u64,
    pub row: u64,
}

impl Cell {
    pub fn new(col: u64, row: u64) -> Self {
        Self { col, row }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Scale {
    pub exponent: u32,
}

impl Scale {
    pub fn new(exponent: u32) -> Result<Self, GridError> {
        if exponent > MAX_EXPONENT {
            return Err(GridError::ExponentTooLarge { exponent });
        }
        Ok(Self { exponent })
    }

    /// Cells per side, 4^S.
    pub fn width(&self) -> u64 {
        1u64 << (2 * self.exponent)
    }

    /// Side length 4^-S as an exact rational.
    pub fn side(&self) -> Rational {
        pow2(-2 * self.exponent as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("scale exponent {exponent} exceeds the enumerable maximum {MAX_EXPONENT}")]
    ExponentTooLarge { exponent: u32 },
    #[error("cell ({col}, {row}) out of range at exponent {exponent}")]
    CellOutOfRange { col: u64, row: u64, exponent: u32 },
    #[error("operation would materialize {count} cells, cap is {CELL_CAP}")]
    TooManyCells { count: usize },
    #[error("target exponent {target} is finer than the set's exponent {current}")]
    CoarsenUpward { target: u32, current: u32 },
}

/// A finite set of grid cells at one scale, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    scale: Scale,
    cells: Vec<Cell>,
}

impl CellSet {
    pub fn new(scale: Scale, mut cells: Vec<Cell>) -> Result<Self, GridError> {
        let w = scale.width();
        for c in &cells {
            if c.col >= w || c.row >= w {
                return Err(GridError::CellOutOfRange {
                    col: c.col,
                    row: c.row,
                    exponent: scale.exponent,
                });
            }
        }
        cells.sort_unstable();
        cells.dedup();
        if cells.len() > CELL_CAP {
            return Err(GridError::TooManyCells { count: cells.len() });
        }
        Ok(Self { scale, cells })
    }

    /// The whole unit square: one cell at exponent 0.
    pub fn unit_square() -> Self {
        Self {
            scale: Scale { exponent: 0 },
            cells: vec![Cell::new(0, 0)],
        }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn exponent(&self) -> u32 {
        self.scale.exponent
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    /// Refine every cell into its full 4^n x 4^n block of children.
    pub fn subdivide(&self, n: u32) -> Result<Self, GridError> {
        let target = Scale::new(self.scale.exponent + n)?;
        let b = 1u64 << (2 * n);
        let count = self
            .cells
            .len()
            .checked_mul((b * b) as usize)
            .filter(|&c| c <= CELL_CAP)
            .ok_or(GridError::TooManyCells { count: usize::MAX })?;
        let mut out = Vec::with_capacity(count);
        for c in &self.cells {
            let (c0, r0) = (c.col * b, c.row * b);
            for dc in 0..b {
                for dr in 0..b {
                    out.push(Cell::new(c0 + dc, r0 + dr));
                }
            }
        }
        // Children of distinct sorted parents are distinct and ordered per
        // parent, but not globally sorted (row-major within column blocks).
        out.sort_unstable();
        Ok(Self { scale: target, cells: out })
    }

    /// Project to the coarser grid at `target` exponent, deduplicating.
    pub fn coarsen(&self, target: u32) -> Result<Self, GridError> {
        if target > self.scale.exponent {
            return Err(GridError::CoarsenUpward {
                target,
                current: self.scale.exponent,
            });
        }
        let shift = 2 * (self.scale.exponent - target);
        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| Cell::new(c.col >> shift, c.row >> shift))
            .collect();
        cells.sort_unstable();
        cells.dedup();
        Ok(Self {
            scale: Scale { exponent: target },
            cells,
        })
    }

    /// Number of cells of the coarser grid the set meets.
    pub fn box_count(&self, target: u32) -> Result<usize, GridError> {
        Ok(self.coarsen(target)?.len())
    }

    pub fn transpose(&self) -> Self {
        let mut cells: Vec<Cell> =
            self.cells.iter().map(|c| Cell::new(c.row, c.col)).collect();
        cells.sort_unstable();
        Self { scale: self.scale, cells }
    }

    /// Shadow on the x-axis: the union of the columns' footprints.
    pub fn x_shadow(&self) -> IntervalUnion {
        let mut cols: Vec<u64> = self.cells.iter().map(|c| c.col).collect();
        cols.sort_unstable();
        cols.dedup();
        let side = self.scale.side();
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < cols.len() {
            let start = cols[i];
            let mut end = start;
            while i + 1 < cols.len() && cols[i + 1] == end + 1 {
                end = cols[i + 1];
                i += 1;
            }
            pieces.push((
                Rational::from_integer(start.into()) * &side,
                Rational::from_integer((end + 1).into()) * &side,
            ));
            i += 1;
        }
        IntervalUnion::from_pieces(pieces)
    }

    pub fn y_shadow(&self) -> IntervalUnion {
        self.transpose().x_shadow()
    }
}
