//! The two-stage selection round and its verifier.
//!
//! One round with parameter n refines every parent cell by 4^{2n}: an odd
//! stage picks 2^{3n} of the 4^{2n} subsquares of each parent, 2^n in every
//! column of the 4^n x 4^n coarse grid; an even stage picks 2^n children
//! inside each chosen square so that all 4^{2n} fine columns of the parent
//! are hit. Counting is tight, so the even stage lands exactly one cell per
//! fine column. Every parent uses one shared pattern, and the chosen squares
//! of a parent must contain two with the same +45 shadow and two with the
//! same -45 shadow.

use crate::grid::{Cell, CellSet, GridError, Scale};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest n a pattern will materialize; 4^{2n} composite offsets must stay
/// well under the grid cell cap.
pub const MAX_ROUND_N: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("round parameter n={0} out of range 1..={MAX_ROUND_N}")]
    BadN(u32),
    #[error("random pattern search exhausted {0} attempts")]
    RetriesExhausted(u32),
    #[error("pattern violates the construction: {0}")]
    Invalid(String),
}

/// One round's selection, stored as offsets inside a single parent.
/// `odd` lives on the 4^n grid, `children` maps each odd offset to its
/// child offsets on the 4^{2n} grid of the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundPattern {
    n: u32,
    odd: Vec<Cell>,
    children: BTreeMap<Cell, Vec<Cell>>,
}

impl RoundPattern {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Odd-stage offsets on the 4^n x 4^n grid, sorted.
    pub fn odd_offsets(&self) -> &[Cell] {
        &self.odd
    }

    /// Composite offsets on the 4^{2n} grid of one parent, sorted.
    pub fn composite_offsets(&self) -> Vec<Cell> {
        let m = 1u64 << (2 * self.n);
        let mut out = Vec::new();
        for (odd, kids) in &self.children {
            for k in kids {
                out.push(Cell::new(odd.col * m + k.col, odd.row * m + k.row));
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks the four construction conditions on a single synthetic parent.
    pub fn validate(&self) -> Result<(), PatternError> {
        let m = 1u64 << (2 * self.n);
        for (odd, kids) in &self.children {
            if odd.col >= m || odd.row >= m {
                return Err(PatternError::Invalid(format!(
                    "odd offset ({}, {}) outside the 4^n grid",
                    odd.col, odd.row
                )));
            }
            for k in kids {
                if k.col >= m || k.row >= m {
                    return Err(PatternError::Invalid(format!(
                        "child offset ({}, {}) outside its square",
                        k.col, k.row
                    )));
                }
            }
        }
        let scale = Scale::new(2 * self.n).map_err(|e| PatternError::Invalid(e.to_string()))?;
        let cells = CellSet::new(scale, self.composite_offsets())
            .map_err(|e| PatternError::Invalid(e.to_string()))?;
        let report = verify_conditions(&cells, &[self.n])
            .map_err(|e| PatternError::Invalid(e.to_string()))?;
        if report.pass {
            Ok(())
        } else {
            Err(PatternError::Invalid(report.first_failure().expect("failed report")))
        }
    }
}

/// The canonical pattern for a round. n = 1 is a curated table whose two
/// diagonal shadows decay like (5/16)^r and (4/16)^r under iteration; for
/// n >= 2 a banded layout suffices.
pub fn make_round_pattern(n: u32) -> Result<RoundPattern, PatternError> {
    if n == 0 || n > MAX_ROUND_N {
        return Err(PatternError::BadN(n));
    }
    let m = 1u64 << (2 * n); // 4^n
    let k = 1u64 << n; // 2^n
    let rows_for = |col: u64| -> Vec<u64> {
        if n == 1 {
            // Chosen so both diagonal offset sets have heavy coincidences.
            [[0, 1], [0, 2], [1, 3], [2, 3]][col as usize].to_vec()
        } else {
            // Band rising with the column, rows spaced by 2.
            let base = (col.saturating_sub(k - 1)).min(m - 2 * k + 1);
            (0..k).map(|u| base + 2 * u).collect()
        }
    };
    let mut odd = Vec::new();
    let mut children = BTreeMap::new();
    for col in 0..m {
        let rows = rows_for(col);
        debug_assert_eq!(rows.len(), k as usize);
        for (rank, &row) in rows.iter().enumerate() {
            let offset = Cell::new(col, row);
            odd.push(offset);
            // Rank u owns fine columns [u*2^n, (u+1)*2^n); rows on the
            // antidiagonal keep every child's diagonal shadow aligned.
            let kids: Vec<Cell> = (rank as u64 * k..(rank as u64 + 1) * k)
                .map(|a| Cell::new(a, m - 1 - a))
                .collect();
            children.insert(offset, kids);
        }
    }
    odd.sort_unstable();
    let pat = RoundPattern { n, odd, children };
    debug_assert!(pat.validate().is_ok());
    Ok(pat)
}

/// Draws selections uniformly until the conditions hold. Deterministic in
/// the seed. The diagonal-coincidence condition is forced by counting
/// (2^{3n} squares, at most 2*4^n - 1 distinct shadow positions), so in
/// practice the first draw validates.
pub fn random_round_pattern(n: u32, seed: u64, max_tries: u32) -> Result<RoundPattern, PatternError> {
    if n == 0 || n > MAX_ROUND_N {
        return Err(PatternError::BadN(n));
    }
    let m = 1u64 << (2 * n);
    let k = 1u64 << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_tries {
        let mut odd = Vec::new();
        let mut children = BTreeMap::new();
        for col in 0..m {
            let mut all: Vec<u64> = (0..m).collect();
            all.shuffle(&mut rng);
            let mut rows: Vec<u64> = all[..k as usize].to_vec();
            rows.sort_unstable();
            // Partition the parent's fine columns of this coarse column
            // among the chosen squares so coverage holds by construction.
            let mut cols: Vec<u64> = (0..m).collect();
            cols.shuffle(&mut rng);
            for (rank, &row) in rows.iter().enumerate() {
                let offset = Cell::new(col, row);
                odd.push(offset);
                let mut kids: Vec<Cell> = cols[rank * k as usize..(rank + 1) * k as usize]
                    .iter()
                    .map(|&a| Cell::new(a, rng.random_range(0..m)))
                    .collect();
                kids.sort_unstable();
                children.insert(offset, kids);
            }
        }
        odd.sort_unstable();
        let pat = RoundPattern { n, odd, children };
        if pat.validate().is_ok() {
            return Ok(pat);
        }
    }
    Err(PatternError::RetriesExhausted(max_tries))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// A partially built construction: the current cell set plus the n used in
/// each completed round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildState {
    cells: CellSet,
    rounds: Vec<u32>,
}

impl BuildState {
    pub fn initial() -> Self {
        Self {
            cells: CellSet::unit_square(),
            rounds: Vec::new(),
        }
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn rounds(&self) -> &[u32] {
        &self.rounds
    }

    /// Resumes bookkeeping around an existing cell set, e.g. one read back
    /// from a snapshot. The exponent must match the claimed rounds.
    pub fn resume(cells: CellSet, rounds: Vec<u32>) -> Result<Self, GridError> {
        let expect: u32 = rounds.iter().map(|n| 2 * n).sum();
        if cells.exponent() != expect {
            return Err(GridError::ExponentTooLarge {
                exponent: cells.exponent(),
            });
        }
        Ok(Self { cells, rounds })
    }

    pub fn apply_round(&mut self, pat: &RoundPattern) -> Result<(), GridError> {
        let n = pat.n();
        let target = Scale::new(self.cells.exponent() + 2 * n)?;
        let offsets = pat.composite_offsets();
        let shift = 4 * n;
        let mut cells = Vec::with_capacity(self.cells.len() * offsets.len());
        for p in self.cells.cells() {
            let (c0, r0) = (p.col << shift, p.row << shift);
            for o in &offsets {
                cells.push(Cell::new(c0 + o.col, r0 + o.row));
            }
        }
        self.cells = CellSet::new(target, cells)?;
        self.rounds.push(n);
        Ok(())
    }

    /// The odd half of the next round, without committing it.
    pub fn odd_stage(&self, pat: &RoundPattern) -> Result<CellSet, GridError> {
        let n = pat.n();
        let target = Scale::new(self.cells.exponent() + n)?;
        let shift = 2 * n;
        let mut cells = Vec::with_capacity(self.cells.len() * pat.odd_offsets().len());
        for p in self.cells.cells() {
            let (c0, r0) = (p.col << shift, p.row << shift);
            for o in pat.odd_offsets() {
                cells.push(Cell::new(c0 + o.col, r0 + o.row));
            }
        }
        CellSet::new(target, cells)
    }
}

/// Runs `rounds` rounds of the canonical pattern for `n` from the unit square.
pub fn build_rounds(n: u32, rounds: u32) -> Result<BuildState, BuildError> {
    let pat = make_round_pattern(n)?;
    let mut state = BuildState::initial();
    for _ in 0..rounds {
        state.apply_round(&pat)?;
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagonalDirection {
    Sum,
    Difference,
}

impl fmt::Display for DiagonalDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagonalDirection::Sum => write!(f, "+45"),
            DiagonalDirection::Difference => write!(f, "-45"),
        }
    }
}

/// Evidence attached to a condition check. Coordinates are offsets within
/// the named parent except for the parent itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Witness {
    ColumnCount {
        parent: Cell,
        column: u64,
        got: usize,
        want: usize,
    },
    UncoveredColumn {
        parent: Cell,
        column: u64,
    },
    MissingDiagonalPair {
        parent: Cell,
        direction: DiagonalDirection,
    },
    DiagonalPair {
        parent: Cell,
        direction: DiagonalDirection,
        first: Cell,
        second: Cell,
    },
    PatternMismatch {
        parent: Cell,
        reference: Cell,
        offset: Cell,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::ColumnCount { parent, column, got, want } => write!(
                f,
                "parent ({}, {}): column {column} holds {got} chosen squares, want {want}",
                parent.col, parent.row
            ),
            Witness::UncoveredColumn { parent, column } => write!(
                f,
                "parent ({}, {}): fine column {column} has no cell",
                parent.col, parent.row
            ),
            Witness::MissingDiagonalPair { parent, direction } => write!(
                f,
                "parent ({}, {}): no two chosen squares share a {direction} shadow",
                parent.col, parent.row
            ),
            Witness::DiagonalPair { parent, direction, first, second } => write!(
                f,
                "parent ({}, {}): squares ({}, {}) and ({}, {}) share a {direction} shadow",
                parent.col, parent.row, first.col, first.row, second.col, second.row
            ),
            Witness::PatternMismatch { parent, reference, offset } => write!(
                f,
                "parent ({}, {}) differs from parent ({}, {}) at offset ({}, {})",
                parent.col, parent.row, reference.col, reference.row, offset.col, offset.row
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl ConditionCheck {
    fn pass_with(witness: Option<Witness>) -> Self {
        Self { pass: true, witness }
    }

    fn fail(witness: Witness) -> Self {
        Self { pass: false, witness: Some(witness) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundCheck {
    pub round: usize,
    pub n: u32,
    pub parents: usize,
    /// (*) every coarse column of a parent holds exactly 2^n chosen squares.
    pub column_counts: ConditionCheck,
    /// (**) every fine column of a parent is hit.
    pub column_coverage: ConditionCheck,
    /// (***) two chosen squares share a +45 shadow and two share a -45 shadow.
    pub diagonal_pairs: ConditionCheck,
    /// (M) every parent applies the same pattern.
    pub shared_pattern: ConditionCheck,
}

impl RoundCheck {
    pub fn pass(&self) -> bool {
        self.column_counts.pass
            && self.column_coverage.pass
            && self.diagonal_pairs.pass
            && self.shared_pattern.pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionReport {
    pub rounds: Vec<RoundCheck>,
    pub pass: bool,
}

impl ConstructionReport {
    pub fn first_failure(&self) -> Option<String> {
        for rc in &self.rounds {
            for (name, check) in [
                ("column counts", &rc.column_counts),
                ("column coverage", &rc.column_coverage),
                ("diagonal pairs", &rc.diagonal_pairs),
                ("shared pattern", &rc.shared_pattern),
            ] {
                if !check.pass {
                    let w = check
                        .witness
                        .as_ref()
                        .map(|w| w.to_string())
                        .unwrap_or_default();
                    return Some(format!("round {} ({name}): {w}", rc.round));
                }
            }
        }
        None
    }
}

impl fmt::Display for ConstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rc in &self.rounds {
            let flag = |c: &ConditionCheck| if c.pass { "ok" } else { "FAIL" };
            writeln!(
                f,
                "round {} (n={}, parents={}): column-counts {}, coverage {}, diagonal-pairs {}, shared-pattern {}",
                rc.round,
                rc.n,
                rc.parents,
                flag(&rc.column_counts),
                flag(&rc.column_coverage),
                flag(&rc.diagonal_pairs),
                flag(&rc.shared_pattern),
            )?;
            for (name, check) in [
                ("column counts", &rc.column_counts),
                ("column coverage", &rc.column_coverage),
                ("diagonal pairs", &rc.diagonal_pairs),
                ("shared pattern", &rc.shared_pattern),
            ] {
                if !check.pass {
                    if let Some(w) = &check.witness {
                        writeln!(f, "  {name}: {w}")?;
                    }
                }
            }
        }
        write!(f, "{}", if self.pass { "all conditions hold" } else { "CONDITIONS VIOLATED" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("cell set exponent {got} does not match the rounds' total {expected}")]
    ExponentMismatch { expected: u32, got: u32 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Checks a finished cell set against the construction conditions for the
/// given per-round parameters. The stage chain is recovered by coarsening,
/// so the input is judged only on where its cells sit.
pub fn verify_conditions(cells: &CellSet, ns: &[u32]) -> Result<ConstructionReport, VerifyError> {
    let mut exps = vec![0u32];
    for &n in ns {
        exps.push(exps.last().unwrap() + 2 * n);
    }
    let expected = *exps.last().unwrap();
    if cells.exponent() != expected {
        return Err(VerifyError::ExponentMismatch {
            expected,
            got: cells.exponent(),
        });
    }
    let mut rounds = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let parents = cells.coarsen(exps[i])?;
        let stage = cells.coarsen(exps[i + 1])?;
        rounds.push(check_round(i + 1, n, &parents, &stage));
    }
    let pass = rounds.iter().all(RoundCheck::pass);
    Ok(ConstructionReport { rounds, pass })
}

fn check_round(round: usize, n: u32, parents: &CellSet, stage: &CellSet) -> RoundCheck {
    let shift = 4 * n; // parent-to-child exponent gap in bits
    let mask = (1u64 << shift) - 1;
    let m = 1u64 << (2 * n); // coarse columns per parent
    let b = 1u64 << shift; // fine columns per parent
    let k = 1usize << n;

    // Group children by parent. Offsets end up sorted within each parent.
    let mut pairs: Vec<(Cell, Cell)> = stage
        .cells()
        .iter()
        .map(|c| {
            (
                Cell::new(c.col >> shift, c.row >> shift),
                Cell::new(c.col & mask, c.row & mask),
            )
        })
        .collect();
    pairs.sort_unstable();

    let mut column_counts = ConditionCheck::pass_with(None);
    let mut column_coverage = ConditionCheck::pass_with(None);
    let mut sum_pair: Option<Witness> = None;
    let mut diff_pair: Option<Witness> = None;
    let mut diagonal_pairs = ConditionCheck::pass_with(None);
    let mut shared_pattern = ConditionCheck::pass_with(None);

    let mut reference: Option<(Cell, Vec<Cell>)> = None;
    let mut covered = vec![false; b as usize];
    let mut col_count = vec![0usize; m as usize];

    debug_assert_eq!(parents.len(), {
        let mut ps: Vec<Cell> = pairs.iter().map(|(p, _)| *p).collect();
        ps.dedup();
        ps.len()
    });

    let mut i = 0;
    while i < pairs.len() {
        let parent = pairs[i].0;
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == parent {
            j += 1;
        }
        let offsets: Vec<Cell> = pairs[i..j].iter().map(|(_, o)| *o).collect();
        i = j;

        // (**) directly on the fine offsets.
        if column_coverage.pass {
            covered.iter_mut().for_each(|c| *c = false);
            for o in &offsets {
                covered[o.col as usize] = true;
            }
            if let Some(col) = covered.iter().position(|c| !c) {
                column_coverage = ConditionCheck::fail(Witness::UncoveredColumn {
                    parent,
                    column: col as u64,
                });
            }
        }

        // The odd squares are the children's coarse image.
        let mut odd: Vec<Cell> = offsets
            .iter()
            .map(|o| Cell::new(o.col >> (2 * n), o.row >> (2 * n)))
            .collect();
        odd.sort_unstable();
        odd.dedup();

        // (*)
        if column_counts.pass {
            col_count.iter_mut().for_each(|c| *c = 0);
            for o in &odd {
                col_count[o.col as usize] += 1;
            }
            if let Some(col) = col_count.iter().position(|&c| c != k) {
                column_counts = ConditionCheck::fail(Witness::ColumnCount {
                    parent,
                    column: col as u64,
                    got: col_count[col],
                    want: k,
                });
            }
        }

        // (***) on the odd squares: equal col+row, equal col-row.
        if diagonal_pairs.pass {
            let mut by_sum: BTreeMap<u64, Cell> = BTreeMap::new();
            let mut found_sum = None;
            for o in &odd {
                if let Some(prev) = by_sum.insert(o.col + o.row, *o) {
                    found_sum.get_or_insert((prev, *o));
                }
            }
            let mut by_diff: BTreeMap<i64, Cell> = BTreeMap::new();
            let mut found_diff = None;
            for o in &odd {
                if let Some(prev) = by_diff.insert(o.col as i64 - o.row as i64, *o) {
                    found_diff.get_or_insert((prev, *o));
                }
            }
            match (found_sum, found_diff) {
                (Some((a, c)), Some((d, e))) => {
                    sum_pair.get_or_insert(Witness::DiagonalPair {
                        parent,
                        direction: DiagonalDirection::Sum,
                        first: a,
                        second: c,
                    });
                    diff_pair.get_or_insert(Witness::DiagonalPair {
                        parent,
                        direction: DiagonalDirection::Difference,
                        first: d,
                        second: e,
                    });
                }
                (None, _) => {
                    diagonal_pairs = ConditionCheck::fail(Witness::MissingDiagonalPair {
                        parent,
                        direction: DiagonalDirection::Sum,
                    });
                }
                (_, None) => {
                    diagonal_pairs = ConditionCheck::fail(Witness::MissingDiagonalPair {
                        parent,
                        direction: DiagonalDirection::Difference,
                    });
                }
            }
        }

        // (M)
        if shared_pattern.pass {
            match &reference {
                None => reference = Some((parent, offsets)),
                Some((ref_parent, ref_offsets)) => {
                    if &offsets != ref_offsets {
                        let offset = first_difference(&offsets, ref_offsets);
                        shared_pattern = ConditionCheck::fail(Witness::PatternMismatch {
                            parent,
                            reference: *ref_parent,
                            offset,
                        });
                    }
                }
            }
        }
    }

    if diagonal_pairs.pass {
        // Surface one example pair as supporting evidence.
        diagonal_pairs.witness = sum_pair.or(diff_pair);
    }

    RoundCheck {
        round,
        n,
        parents: parents.len(),
        column_counts,
        column_coverage,
        diagonal_pairs,
        shared_pattern,
    }
}

/// First offset present in exactly one of two sorted lists.
fn first_difference(a: &[Cell], b: &[Cell]) -> Cell {
    let mut ia = 0;
    let mut ib = 0;
    loop {
        match (a.get(ia), b.get(ib)) {
            (Some(x), Some(y)) if x == y => {
                ia += 1;
                ib += 1;
            }
            (Some(x), Some(y)) => return if x < y { *x } else { *y },
            (Some(x), None) => return *x,
            (None, Some(y)) => return *y,
            (None, None) => unreachable!("lists differ"),
        }
    }
}
