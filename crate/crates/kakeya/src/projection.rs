//! Exact shadows of cell sets under the maps (x, y) -> x + t*y. Slope 0 is
//! the x-axis shadow, slopes +1 and -1 are the two diagonal shadows measured
//! along the value axis (multiply by sqrt(2)/2 for orthogonal length; that
//! factor never enters a comparison, so it stays out of the arithmetic).

use crate::grid::{Cell, CellSet};
use crate::interval::IntervalUnion;
use crate::rational::{pow_rational, rat, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

/// Shadow of the set under (x, y) -> x + slope*y, as an exact interval union.
pub fn project(cells: &CellSet, slope: &Rational) -> IntervalUnion {
    let s2 = 2 * cells.exponent();
    match (slope.numer().to_i64(), slope.denom().to_i64()) {
        (Some(p), Some(q)) => {
            // Everything fits i128: coordinates are < 2^62 and |p|, q < 2^63.
            let merged = merge_sorted(
                cells
                    .cells()
                    .iter()
                    .map(|c| segment_i128(c, p, q))
                    .collect(),
            );
            let den = BigInt::from(q) << s2;
            IntervalUnion::from_pieces(
                merged
                    .into_iter()
                    .map(|(lo, hi)| {
                        (
                            Rational::new(BigInt::from(lo), den.clone()),
                            Rational::new(BigInt::from(hi), den.clone()),
                        )
                    })
                    .collect(),
            )
        }
        _ => {
            let p = slope.numer();
            let q = slope.denom();
            let merged = merge_sorted(
                cells
                    .cells()
                    .iter()
                    .map(|c| segment_big(c, p, q))
                    .collect(),
            );
            let den = q.clone() << s2;
            IntervalUnion::from_pieces(
                merged
                    .into_iter()
                    .map(|(lo, hi)| (Rational::new(lo, den.clone()), Rational::new(hi, den.clone())))
                    .collect(),
            )
        }
    }
}

fn segment_i128(c: &Cell, p: i64, q: i64) -> (i128, i128) {
    let (col, row) = (c.col as i128, c.row as i128);
    let (p, q) = (p as i128, q as i128);
    let (rlo, rhi) = if p >= 0 { (row, row + 1) } else { (row + 1, row) };
    (col * q + p * rlo, (col + 1) * q + p * rhi)
}

fn segment_big(c: &Cell, p: &BigInt, q: &BigInt) -> (BigInt, BigInt) {
    let (col, row) = (BigInt::from(c.col), BigInt::from(c.row));
    let (rlo, rhi) = if p.is_negative() {
        (&row + 1, row.clone())
    } else {
        (row.clone(), &row + 1)
    };
    (&col * q + p * rlo, (col + BigInt::one()) * q + p * rhi)
}

fn merge_sorted<T: Ord>(mut segs: Vec<(T, T)>) -> Vec<(T, T)> {
    segs.sort_unstable();
    let mut out: Vec<(T, T)> = Vec::new();
    for (lo, hi) in segs {
        match out.last_mut() {
            Some((_, phi)) if lo <= *phi => {
                if hi > *phi {
                    *phi = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Shadow along x + y.
pub fn diag_plus(cells: &CellSet) -> IntervalUnion {
    project(cells, &Rational::one())
}

/// Shadow along x - y.
pub fn diag_minus(cells: &CellSet) -> IntervalUnion {
    project(cells, &-Rational::one())
}

/// Cells grouped by exactly coinciding diagonal shadows; every group has at
/// least two members, and any two members of a group overlap exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapGroups {
    pub plus: Vec<Vec<Cell>>,
    pub minus: Vec<Vec<Cell>>,
}

pub fn exact_overlap_pairs(cells: &CellSet) -> OverlapGroups {
    let mut by_sum: Vec<(u64, Cell)> =
        cells.cells().iter().map(|c| (c.col + c.row, *c)).collect();
    by_sum.sort_unstable();
    let mut by_diff: Vec<(i64, Cell)> = cells
        .cells()
        .iter()
        .map(|c| (c.col as i64 - c.row as i64, *c))
        .collect();
    by_diff.sort_unstable();
    OverlapGroups {
        plus: collect_groups(by_sum),
        minus: collect_groups(by_diff),
    }
}

fn collect_groups<K: Eq>(pairs: Vec<(K, Cell)>) -> Vec<Vec<Cell>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        if j - i >= 2 {
            out.push(pairs[i..j].iter().map(|(_, c)| *c).collect());
        }
        i = j;
    }
    out
}

/// The counting upper bound for either diagonal shadow after rounds with
/// the given parameters: 2 * prod_j (1 - 16^{-n_j}). The 2 is the full
/// diagonal extent of the unit square on the value axis.
pub fn diag_measure_bound(ns: &[u32]) -> Rational {
    let mut b = rat(2, 1);
    for &n in ns {
        let m = pow_rational(&rat(1, 16), n as u64);
        b *= Rational::one() - m;
    }
    b
}

/// Shadow measures along a chain of stages, in stage order.
pub fn measure_profile(stages: &[CellSet], slope: &Rational) -> Vec<Rational> {
    stages.iter().map(|s| project(s, slope).measure()).collect()
}
