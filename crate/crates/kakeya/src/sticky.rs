//! The sticky family: a Cantor set of directions whose offsets track the
//! direction digits. One-dimensional stage covers (base-4 digits 0 and 3),
//! plate pairs, Minkowski sums with a rational weight, exact slices, and
//! the four-corner parameter square. Higher dimensions are carried as
//! factor descriptors, never as materialized grids.

use crate::assembly::Slice;
use crate::dimension::{CubeCounts, DimensionError};
use crate::grid::{Cell, CellSet, GridError, Scale};
use crate::interval::IntervalUnion;
use crate::rational::{format_fraction, rat, Rational};
use num_traits::One;

/// Stage covers double their interval count per stage.
pub const MAX_C0_STAGE: u32 = 20;
/// Four-corner grids quadruple per stage.
pub const MAX_CORNER_STAGE: u32 = 10;
/// Pairwise enumerations (sums, product checks) refuse beyond this.
pub const MAX_PAIRS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StickyError {
    #[error("stage {stage} exceeds the supported depth {max}")]
    StageTooDeep { stage: u32, max: u32 },
    #[error("pairwise enumeration would exceed {MAX_PAIRS} interval pairs")]
    TooManyPairs,
    #[error("slice height must be strictly between 0 and 1, got {0}")]
    BadLambda(String),
    #[error("ambient dimension {0} too small")]
    BadAmbient(u32),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

/// Stage-k cover of the set of numbers whose base-4 digits are all 0 or 3:
/// 2^k closed intervals of length 4^{-k}.
pub fn c0_stage(stage: u32) -> Result<IntervalUnion, StickyError> {
    if stage > MAX_C0_STAGE {
        return Err(StickyError::StageTooDeep { stage, max: MAX_C0_STAGE });
    }
    let mut cover = IntervalUnion::unit();
    let quarter = rat(1, 4);
    let shift = rat(3, 4);
    for _ in 0..stage {
        let scaled = cover.scale(&quarter);
        cover = scaled.union(&scaled.translate(&shift));
    }
    Ok(cover)
}

/// {x + t y : x in a, y in b}, piece by piece. Exact; quadratic in the
/// piece counts, hence the cap.
pub fn minkowski_sum(
    a: &IntervalUnion,
    b: &IntervalUnion,
    t: &Rational,
) -> Result<IntervalUnion, StickyError> {
    let pairs = a
        .piece_count()
        .checked_mul(b.piece_count())
        .ok_or(StickyError::TooManyPairs)?;
    if pairs > MAX_PAIRS {
        return Err(StickyError::TooManyPairs);
    }
    let negative = t < &Rational::from_integer(0.into());
    let mut pieces = Vec::with_capacity(pairs);
    for (alo, ahi) in a.pieces() {
        for (blo, bhi) in b.pieces() {
            if negative {
                pieces.push((alo + t * bhi, ahi + t * blo));
            } else {
                pieces.push((alo + t * blo, ahi + t * bhi));
            }
        }
    }
    Ok(IntervalUnion::from_pieces(pieces))
}

/// The two plates: the scaled copy at height 0, the full copy at height 1,
/// each a (d-1)-fold product of the same 1-D factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlatePair {
    pub stage: u32,
    pub ambient: u32,
    pub bottom: IntervalUnion,
    pub top: IntervalUnion,
}

pub fn plate_pair(stage: u32, ambient: u32) -> Result<PlatePair, StickyError> {
    if ambient < 2 {
        return Err(StickyError::BadAmbient(ambient));
    }
    let top = c0_stage(stage)?;
    let bottom = top.scale(&rat(1, 2));
    Ok(PlatePair { stage, ambient, bottom, top })
}

/// Directions of lines from the bottom plate to the top plate, per
/// coordinate: top minus bottom = C0 - (1/2)C0. Already at stage 1 this
/// is the whole interval [-1/2, 1], and it stays that way.
pub fn direction_span(stage: u32) -> Result<IntervalUnion, StickyError> {
    let c = c0_stage(stage)?;
    minkowski_sum(&c, &c, &rat(-1, 2))
}

/// Exact check that the direction set fills the box [-1/2, 1]^{d-1}.
/// Every factor is the same, so one factor equality decides the box.
pub fn direction_box_is_full(stage: u32, ambient: u32) -> Result<bool, StickyError> {
    if ambient < 2 {
        return Err(StickyError::BadAmbient(ambient));
    }
    Ok(direction_span(stage)? == IntervalUnion::interval(rat(-1, 2), rat(1, 1)))
}

/// Horizontal slice of the plate-to-plate segment family at height
/// lambda, 0 < lambda < 1. With t = (1-lambda)/lambda the per-coordinate
/// factor is lambda * (C0 + t C0); for d > 2 the slice is the (d-1)-fold
/// product of that factor.
pub fn sticky_slice(
    lambda: &Rational,
    stage: u32,
    ambient: u32,
) -> Result<Slice, StickyError> {
    if ambient < 2 {
        return Err(StickyError::BadAmbient(ambient));
    }
    let zero = Rational::from_integer(0.into());
    if *lambda <= zero || *lambda >= Rational::one() {
        return Err(StickyError::BadLambda(format_fraction(lambda)));
    }
    let t = (Rational::one() - lambda) / lambda;
    let c = c0_stage(stage)?;
    let factor = minkowski_sum(&c, &c, &t)?.scale(lambda);
    Ok(Slice { factor, copies: ambient - 1, box_dims: 0 })
}

/// One parameter box of the plate family, in construction coordinates:
/// the top anchor c runs over a piece of C0, the offset a over a piece of
/// (1/2)C0. In line coordinates the direction box is v = c - a.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamBox {
    pub c: (Rational, Rational),
    pub a: (Rational, Rational),
}

impl ParamBox {
    pub fn v(&self) -> (Rational, Rational) {
        (&self.c.0 - &self.a.1, &self.c.1 - &self.a.0)
    }
}

/// All stage-k parameter boxes: every (top piece, bottom piece) pair.
pub fn sticky_params(stage: u32) -> Result<Vec<ParamBox>, StickyError> {
    let top = c0_stage(stage)?;
    let bottom = top.scale(&rat(1, 2));
    let pairs = top
        .piece_count()
        .checked_mul(bottom.piece_count())
        .filter(|&p| p <= MAX_PAIRS)
        .ok_or(StickyError::TooManyPairs)?;
    let mut out = Vec::with_capacity(pairs);
    for c in top.pieces() {
        for a in bottom.pieces() {
            out.push(ParamBox { c: c.clone(), a: a.clone() });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCheck {
    pub pass: bool,
    pub boxes: usize,
    /// First mismatch, when failing.
    pub witness: Option<String>,
}

/// The change of variables (v, a) -> (v + a, 2a) sends each parameter box
/// to (c, 2a); the check is that those images tile exactly the product
/// C0 x C0 of stage covers. The published map for this identity reads
/// (x, y) -> (y - 2x, 2x), which does not land in the product; the form
/// used here is the one that verifies.
pub fn check_param_product(params: &[ParamBox], stage: u32) -> Result<ProductCheck, StickyError> {
    let c0 = c0_stage(stage)?;
    let mut image: Vec<((Rational, Rational), (Rational, Rational))> = params
        .iter()
        .map(|p| {
            let two = rat(2, 1);
            (p.c.clone(), (&two * &p.a.0, &two * &p.a.1))
        })
        .collect();
    image.sort();
    let mut want = Vec::with_capacity(c0.piece_count() * c0.piece_count());
    for x in c0.pieces() {
        for y in c0.pieces() {
            want.push((x.clone(), y.clone()));
        }
    }
    let fmt = |b: &((Rational, Rational), (Rational, Rational))| {
        format!(
            "[{}, {}] x [{}, {}]",
            format_fraction(&b.0 .0),
            format_fraction(&b.0 .1),
            format_fraction(&b.1 .0),
            format_fraction(&b.1 .1)
        )
    };
    if image.len() != want.len() {
        return Ok(ProductCheck {
            pass: false,
            boxes: image.len(),
            witness: Some(format!("{} boxes, product needs {}", image.len(), want.len())),
        });
    }
    for (got, expect) in image.iter().zip(&want) {
        if got != expect {
            return Ok(ProductCheck {
                pass: false,
                boxes: image.len(),
                witness: Some(format!("box {}, product needs {}", fmt(got), fmt(expect))),
            });
        }
    }
    Ok(ProductCheck { pass: true, boxes: image.len(), witness: None })
}

/// Product structure of the stage-k parameters; identical per coordinate,
/// so one factor check covers any ambient dimension.
pub fn sticky_param_product_check(stage: u32, ambient: u32) -> Result<ProductCheck, StickyError> {
    if ambient < 2 {
        return Err(StickyError::BadAmbient(ambient));
    }
    check_param_product(&sticky_params(stage)?, stage)
}

/// Subdivision counts of the 1-D stage covers: N=4, M=2 per stage on the
/// line, ratio 1/2 at every stage.
pub fn c0_dimension_counts(stage: u32) -> Result<CubeCounts, StickyError> {
    let mut counts = CubeCounts::new(1)?;
    for _ in 0..stage {
        counts.push_logs(2, 1)?;
    }
    Ok(counts)
}

/// Counts of the planar four-corner set C0 x C0: N=4, M=4 per stage,
/// ratio 1 at every stage.
pub fn four_corner_counts(stage: u32) -> Result<CubeCounts, StickyError> {
    let mut counts = CubeCounts::new(2)?;
    for _ in 0..stage {
        counts.push_logs(2, 2)?;
    }
    Ok(counts)
}

/// The planar four-corner set as stage-k cells: both coordinates keep
/// digits 0 and 3 only. 4^k cells.
pub fn four_corner_stage(stage: u32) -> Result<CellSet, StickyError> {
    if stage > MAX_CORNER_STAGE {
        return Err(StickyError::StageTooDeep { stage, max: MAX_CORNER_STAGE });
    }
    let mut cells = vec![Cell::new(0, 0)];
    for _ in 0..stage {
        let mut next = Vec::with_capacity(cells.len() * 4);
        for c in &cells {
            for dc in [0u64, 3] {
                for dr in [0u64, 3] {
                    next.push(Cell::new(c.col * 4 + dc, c.row * 4 + dr));
                }
            }
        }
        cells = next;
    }
    Ok(CellSet::new(Scale::new(stage)?, cells)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn digit_oracle(stage: u32) -> IntervalUnion {
        let width = crate::rational::pow2(-2 * stage as i64);
        let pieces = (0u64..1 << stage)
            .map(|mask| {
                let mut lo = Rational::from_integer(0.into());
                for j in 0..stage {
                    if mask >> j & 1 == 1 {
                        lo += rat(3, 1) * crate::rational::pow2(-2 * (j as i64 + 1));
                    }
                }
                let hi = &lo + &width;
                (lo, hi)
            })
            .collect();
        IntervalUnion::from_pieces(pieces)
    }

    #[test]
    fn stage_covers_match_digit_enumeration() {
        assert_eq!(c0_stage(0).unwrap(), IntervalUnion::unit());
        assert_eq!(
            c0_stage(1).unwrap().pieces(),
            &[(int(0), rat(1, 4)), (rat(3, 4), int(1))]
        );
        assert_eq!(
            c0_stage(2).unwrap().pieces(),
            &[
                (int(0), rat(1, 16)),
                (rat(3, 16), rat(1, 4)),
                (rat(3, 4), rat(13, 16)),
                (rat(15, 16), int(1)),
            ]
        );
        for k in 0..=6 {
            let cover = c0_stage(k).unwrap();
            assert_eq!(cover, digit_oracle(k), "k={k}");
            assert_eq!(cover.piece_count(), 1 << k);
            assert_eq!(cover.measure(), crate::rational::pow2(-(k as i64)));
            if k > 0 {
                assert!(cover.is_subset_of(&c0_stage(k - 1).unwrap()));
            }
        }
        assert!(c0_stage(MAX_C0_STAGE + 1).is_err());
    }

    #[test]
    fn weighted_sums_are_exact() {
        let c1 = c0_stage(1).unwrap();
        let sum = minkowski_sum(&c1, &c1, &int(1)).unwrap();
        assert_eq!(
            sum.pieces(),
            &[
                (int(0), rat(1, 2)),
                (rat(3, 4), rat(5, 4)),
                (rat(3, 2), int(2)),
            ]
        );
        assert_eq!(sum.measure(), rat(3, 2));
        let c2 = c0_stage(2).unwrap();
        assert_eq!(minkowski_sum(&c2, &c2, &int(0)).unwrap(), c2);
        assert_eq!(
            minkowski_sum(&c2, &IntervalUnion::empty(), &int(1)).unwrap(),
            IntervalUnion::empty()
        );
    }

    #[test]
    fn minus_half_weight_fills_the_interval() {
        let full = IntervalUnion::interval(rat(-1, 2), int(1));
        for k in 0..=6 {
            assert_eq!(direction_span(k).unwrap(), full, "k={k}");
            assert!(direction_box_is_full(k, 3).unwrap(), "k={k}");
        }
        assert!(direction_box_is_full(1, 1).is_err());
    }

    #[test]
    fn sum_enumeration_is_capped() {
        let deep = c0_stage(12).unwrap();
        assert_eq!(
            minkowski_sum(&deep, &deep, &int(1)),
            Err(StickyError::TooManyPairs)
        );
    }

    #[test]
    fn slices_rescale_the_weighted_sum() {
        // lambda = 2/3 gives t = 1/2; at stage 1 the four sum pieces chain
        // into [0, 3/2], so the slice factor is the whole unit interval.
        let s = sticky_slice(&rat(2, 3), 1, 2).unwrap();
        assert_eq!(s.factor, IntervalUnion::unit());
        assert_eq!(s.measure(), int(1));
        let s3 = sticky_slice(&rat(2, 3), 1, 3).unwrap();
        assert_eq!(s3.copies, 2);
        assert_eq!(s3.measure(), int(1));
        // lambda = 1/2 gives t = 1: half of the t=1 sum.
        let s2 = sticky_slice(&rat(1, 2), 1, 2).unwrap();
        assert_eq!(
            s2.factor.pieces(),
            &[
                (int(0), rat(1, 4)),
                (rat(3, 8), rat(5, 8)),
                (rat(3, 4), int(1)),
            ]
        );
        assert_eq!(s2.measure(), rat(3, 4));
        for bad in [int(0), int(1), rat(-1, 2), rat(3, 2)] {
            assert!(sticky_slice(&bad, 1, 2).is_err(), "lambda={bad}");
        }
    }

    #[test]
    fn slice_measures_shrink_with_stage() {
        for lambda in [rat(2, 3), rat(1, 2), rat(3, 5)] {
            let mut prev: Option<Rational> = None;
            for k in 0..=5 {
                let m = sticky_slice(&lambda, k, 2).unwrap().measure();
                if let Some(p) = &prev {
                    assert!(m <= *p, "lambda={lambda} k={k}");
                }
                prev = Some(m);
            }
        }
    }

    #[test]
    fn plates_are_half_scale_copies() {
        let p = plate_pair(3, 3).unwrap();
        assert_eq!(p.bottom, p.top.scale(&rat(1, 2)));
        assert_eq!(p.top, c0_stage(3).unwrap());
        assert!(plate_pair(3, 1).is_err());
    }

    #[test]
    fn parameters_form_an_exact_product() {
        for k in 0..=3 {
            let check = sticky_param_product_check(k, 2).unwrap();
            assert!(check.pass, "k={k}");
            assert_eq!(check.boxes, 1 << (2 * k));
            assert_eq!(check.witness, None);
        }
        // Degenerate stage: one box, image the unit square.
        let params = sticky_params(0).unwrap();
        assert_eq!(params.len(), 1);
        assert_eq!(params[0].v(), (rat(-1, 2), int(1)));
    }

    #[test]
    fn tampered_parameters_fail_the_product_check() {
        let mut params = sticky_params(1).unwrap();
        params.pop();
        let short = check_param_product(&params, 1).unwrap();
        assert!(!short.pass);
        assert!(short.witness.unwrap().contains("3 boxes"));
        let mut shifted = sticky_params(1).unwrap();
        shifted[0].a.0 += rat(1, 32);
        let bad = check_param_product(&shifted, 1).unwrap();
        assert!(!bad.pass);
        assert!(bad.witness.is_some());
    }

    #[test]
    fn dimension_counts_have_the_expected_ratios() {
        let line = c0_dimension_counts(5).unwrap();
        assert_eq!(line.packing_lower_ratio(5).unwrap(), rat(1, 2));
        assert_eq!(line.packing_lower_ratio(1).unwrap(), rat(1, 2));
        let plane = four_corner_counts(4).unwrap();
        assert_eq!(plane.packing_lower_ratio(4).unwrap(), int(1));
        assert_eq!(plane.cube_entropy(4).unwrap(), 8);
        assert_eq!(plane.hausdorff_upper_bound(4).unwrap(), int(1));
    }

    #[test]
    fn four_corner_cells_shadow_the_line_cover() {
        let s1 = four_corner_stage(1).unwrap();
        assert_eq!(
            s1.cells(),
            &[
                Cell::new(0, 0),
                Cell::new(0, 3),
                Cell::new(3, 0),
                Cell::new(3, 3),
            ]
        );
        for k in 0..=4 {
            let s = four_corner_stage(k).unwrap();
            assert_eq!(s.len(), 1 << (2 * k));
            assert_eq!(s.x_shadow(), c0_stage(k).unwrap(), "k={k}");
            assert_eq!(s.y_shadow(), c0_stage(k).unwrap(), "k={k}");
        }
        assert_eq!(four_corner_stage(2).unwrap().box_count(1).unwrap(), 4);
        assert!(four_corner_stage(MAX_CORNER_STAGE + 1).is_err());
    }
}
