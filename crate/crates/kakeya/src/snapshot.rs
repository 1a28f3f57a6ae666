//! Stage snapshots as line-oriented text: a `scale_exponent=<S>` header,
//! then one `col row` pair per line. The writer emits cells in sorted
//! order, so equal sets produce identical bytes.

use crate::grid::{Cell, CellSet, GridError, Scale, CELL_CAP, MAX_EXPONENT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SnapshotError {
    #[error("line 1: expected `scale_exponent=<S>` header")]
    MissingHeader,
    #[error("line 1: bad scale exponent `{0}`")]
    BadExponent(String),
    #[error("line 1: scale exponent {0} exceeds {MAX_EXPONENT}")]
    ExponentTooLarge(u32),
    #[error("line {line}: expected `col row`, got `{content}`")]
    BadCell { line: usize, content: String },
    #[error("line {line}: cell ({col}, {row}) outside the 4^{exponent} grid")]
    CellOutOfRange { line: usize, col: u64, row: u64, exponent: u32 },
    #[error("more than {CELL_CAP} cells")]
    TooManyCells,
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn write_snapshot(cells: &CellSet) -> String {
    let mut out = format!("scale_exponent={}\n", cells.exponent());
    for c in cells.cells() {
        out.push_str(&format!("{} {}\n", c.col, c.row));
    }
    out
}

fn parse_u64(token: &str) -> Option<u64> {
    (!token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()))
        .then(|| token.parse().ok())
        .flatten()
}

pub fn parse_snapshot(text: &str) -> Result<CellSet, SnapshotError> {
    let mut lines = text.split('\n').enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(SnapshotError::MissingHeader),
            Some((_, l)) if l.is_empty() => continue,
            Some((_, l)) => break l,
        }
    };
    let token = header
        .strip_prefix("scale_exponent=")
        .ok_or(SnapshotError::MissingHeader)?;
    let exponent = parse_u64(token)
        .and_then(|e| u32::try_from(e).ok())
        .ok_or_else(|| SnapshotError::BadExponent(token.to_string()))?;
    let scale = Scale::new(exponent)
        .map_err(|_| SnapshotError::ExponentTooLarge(exponent))?;
    let width = scale.width();
    let mut cells = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let cell = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => parse_u64(a).zip(parse_u64(b)),
            _ => None,
        };
        let (col, row) = cell.ok_or_else(|| SnapshotError::BadCell {
            line: idx + 1,
            content: line.to_string(),
        })?;
        if col >= width || row >= width {
            return Err(SnapshotError::CellOutOfRange {
                line: idx + 1,
                col,
                row,
                exponent,
            });
        }
        if cells.len() >= CELL_CAP {
            return Err(SnapshotError::TooManyCells);
        }
        cells.push(Cell::new(col, row));
    }
    Ok(CellSet::new(scale, cells)?)
}
