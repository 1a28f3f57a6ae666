//! From parameter cells to line families. A parameter cell at (col, row)
//! stands for the lines t -> (a + t v, t) with direction digit v from the
//! column and offset digit a from the row. Everything here slices, lifts,
//! and measures those families exactly; the companion shadow machinery in
//! `projection` is deliberately not reused, so the two can check each other.

use crate::grid::CellSet;
use crate::interval::IntervalUnion;
use crate::rational::{pow_rational, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Rotation covers beyond this count are refused rather than materialized.
pub const MAX_COVER_COUNT: u32 = 8192;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssemblyError {
    #[error("direction interval is empty or a point")]
    DegenerateArc,
    #[error("rotation cover needs more than {MAX_COVER_COUNT} sectors")]
    CoverTooFine,
    #[error("ambient dimension {0} too small for this lift")]
    BadAmbient(u32),
    #[error("lines live in different dimensions")]
    DimensionMismatch,
    #[error("sample grid must have at least one interval")]
    EmptyGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    /// Lines in the plane, as built.
    Planar,
    /// Planar family times a solid unit box in the remaining coordinates.
    Box { ambient: u32 },
    /// Product of d-1 copies of the planar slice in each hyperplane.
    Power { ambient: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineFamily {
    base: CellSet,
    lift: Lift,
}

impl LineFamily {
    pub fn from_cells(base: CellSet) -> Self {
        Self { base, lift: Lift::Planar }
    }

    /// d >= 3: the two parameter coordinates plus at least one box factor.
    pub fn with_box_lift(base: CellSet, ambient: u32) -> Result<Self, AssemblyError> {
        if ambient < 3 {
            return Err(AssemblyError::BadAmbient(ambient));
        }
        Ok(Self { base, lift: Lift::Box { ambient } })
    }

    /// d >= 2; d = 2 coincides with the planar family.
    pub fn with_power_lift(base: CellSet, ambient: u32) -> Result<Self, AssemblyError> {
        if ambient < 2 {
            return Err(AssemblyError::BadAmbient(ambient));
        }
        Ok(Self { base, lift: Lift::Power { ambient } })
    }

    pub fn base(&self) -> &CellSet {
        &self.base
    }

    pub fn lift(&self) -> Lift {
        self.lift
    }

    pub fn ambient(&self) -> u32 {
        match self.lift {
            Lift::Planar => 2,
            Lift::Box { ambient } | Lift::Power { ambient } => ambient,
        }
    }

    /// Directions present in the family, as a subset of the v axis.
    pub fn direction_shadow(&self) -> IntervalUnion {
        self.base.x_shadow()
    }

    /// Intercepts present at t = 0.
    pub fn offset_shadow(&self) -> IntervalUnion {
        self.base.y_shadow()
    }

    /// Cross-section of the union of lines at height t.
    pub fn slice(&self, t: &Rational) -> Slice {
        let factor = planar_slice(&self.base, t);
        match self.lift {
            Lift::Planar => Slice { factor, copies: 1, box_dims: 0 },
            Lift::Box { ambient } => Slice { factor, copies: 1, box_dims: ambient - 2 },
            Lift::Power { ambient } => Slice { factor, copies: ambient - 1, box_dims: 0 },
        }
    }
}

/// A slice is factor^copies times a unit box; the box carries measure 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub factor: IntervalUnion,
    pub copies: u32,
    pub box_dims: u32,
}

impl Slice {
    pub fn measure(&self) -> Rational {
        pow_rational(&self.factor.measure(), self.copies as u64)
    }
}

/// The set {a + t v} over one cell is an interval with endpoints at the
/// cell's corners; a + t v is linear in each coordinate.
fn planar_slice(cells: &CellSet, t: &Rational) -> IntervalUnion {
    let side = cells.scale().side();
    let pieces = cells
        .cells()
        .iter()
        .map(|c| {
            let v_lo = Rational::from_integer(c.col.into()) * &side;
            let v_hi = Rational::from_integer((c.col + 1).into()) * &side;
            let a_lo = Rational::from_integer(c.row.into()) * &side;
            let a_hi = Rational::from_integer((c.row + 1).into()) * &side;
            if t.is_negative() {
                (a_lo + t * &v_hi, a_hi + t * &v_lo)
            } else {
                (a_lo + t * &v_lo, a_hi + t * &v_hi)
            }
        })
        .collect();
    IntervalUnion::from_pieces(pieces)
}

/// A single line in R^d, d >= 2: t -> (a + t v, t).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub v: Vec<Rational>,
    pub a: Vec<Rational>,
}

impl Line {
    pub fn planar(v: Rational, a: Rational) -> Self {
        Self { v: vec![v], a: vec![a] }
    }

    /// The point (a + t v, t), all d coordinates.
    pub fn point_at(&self, t: &Rational) -> Vec<Rational> {
        let mut p: Vec<Rational> =
            self.a.iter().zip(&self.v).map(|(a, v)| a + t * v).collect();
        p.push(t.clone());
        p
    }
}

/// The parameter metric ||a - b|| + ||v - w||, held as the two exact
/// squared norms so comparisons stay rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineDistance {
    pub offset_norm_sq: Rational,
    pub direction_norm_sq: Rational,
}

pub fn line_distance(x: &Line, y: &Line) -> Result<LineDistance, AssemblyError> {
    if x.v.len() != y.v.len() || x.a.len() != y.a.len() || x.v.len() != x.a.len() {
        return Err(AssemblyError::DimensionMismatch);
    }
    let norm_sq = |p: &[Rational], q: &[Rational]| -> Rational {
        p.iter()
            .zip(q)
            .map(|(u, w)| {
                let d = u - w;
                &d * &d
            })
            .sum()
    };
    Ok(LineDistance {
        offset_norm_sq: norm_sq(&x.a, &y.a),
        direction_norm_sq: norm_sq(&x.v, &y.v),
    })
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    (&num * &num == *r.numer() && &den * &den == *r.denom())
        .then(|| Rational::new(num, den))
}

impl LineDistance {
    /// The distance itself when both norms are rational, e.g. in the plane.
    pub fn exact(&self) -> Option<Rational> {
        Some(rational_sqrt(&self.offset_norm_sq)? + rational_sqrt(&self.direction_norm_sq)?)
    }

    /// Exact comparison of sqrt(A) + sqrt(B) with r, by squaring twice.
    pub fn cmp_distance(&self, r: &Rational) -> Ordering {
        let a = &self.offset_norm_sq;
        let b = &self.direction_norm_sq;
        if r.is_negative() {
            return Ordering::Greater;
        }
        // (sqrt A + sqrt B)^2 = A + B + 2 sqrt(AB) vs r^2
        let c = r * r - a - b;
        if c.is_negative() {
            return Ordering::Greater;
        }
        (Rational::from_integer(4.into()) * a * b).cmp(&(&c * &c))
    }
}

/// Minimal cover of the half-circle by rotations of the arc of directions
/// (v, 1), v in [v_lo, v_hi]. The arc angle alpha is represented by the
/// Gaussian integer z with arg z = alpha; the count is the least N with
/// N * alpha >= pi, read off the sign of Im(z^N).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationCover {
    pub v_lo: Rational,
    pub v_hi: Rational,
    pub count: u32,
    /// z in Gaussian integers, arg z = arc angle.
    pub base: (BigInt, BigInt),
    /// z^1 ..= z^count, the certificate trail.
    pub powers: Vec<(BigInt, BigInt)>,
    /// Some(1/N) when the arc divides pi exactly (z^N lands on the
    /// negative real axis), i.e. alpha = pi/N.
    pub arc_pi_fraction: Option<Rational>,
}

pub fn rotation_cover(v_lo: &Rational, v_hi: &Rational) -> Result<RotationCover, AssemblyError> {
    if v_lo >= v_hi {
        return Err(AssemblyError::DegenerateArc);
    }
    // Angle between (v_lo, 1) and (v_hi, 1): their quotient as a complex
    // number, cleared of denominators. Im > 0 because v_hi > v_lo.
    let re = Rational::one() + v_lo * v_hi;
    let im = v_hi - v_lo;
    let den = re.denom() * im.denom(); // positive
    let base = (
        re.numer() * (&den / re.denom()),
        im.numer() * (&den / im.denom()),
    );
    let mut powers = Vec::new();
    let mut w = base.clone();
    let mut count = 1u32;
    powers.push(w.clone());
    while w.1.is_positive() {
        if count >= MAX_COVER_COUNT {
            return Err(AssemblyError::CoverTooFine);
        }
        w = complex_mul(&w, &base);
        count += 1;
        powers.push(w.clone());
    }
    let arc_pi_fraction = (w.1.is_zero() && w.0.is_negative())
        .then(|| Rational::new(BigInt::one(), BigInt::from(count)));
    Ok(RotationCover {
        v_lo: v_lo.clone(),
        v_hi: v_hi.clone(),
        count,
        base,
        powers,
        arc_pi_fraction,
    })
}

fn complex_mul(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// Recomputes the certificate by an independent route: the base from the
/// inputs, each power by binary exponentiation, the minimality from the
/// signs. A cover that fails this is corrupted.
pub fn verify_rotation_cover(cover: &RotationCover) -> bool {
    if cover.v_lo >= cover.v_hi || cover.count == 0 {
        return false;
    }
    let re = Rational::one() + &cover.v_lo * &cover.v_hi;
    let im = &cover.v_hi - &cover.v_lo;
    let den = re.denom() * im.denom();
    let base = (
        re.numer() * (&den / re.denom()),
        im.numer() * (&den / im.denom()),
    );
    if base != cover.base || cover.powers.len() != cover.count as usize {
        return false;
    }
    for (i, p) in cover.powers.iter().enumerate() {
        if *p != complex_pow(&base, i as u32 + 1) {
            return false;
        }
        let is_last = i + 1 == cover.count as usize;
        if is_last != !p.1.is_positive() {
            return false;
        }
    }
    match &cover.arc_pi_fraction {
        Some(f) => {
            let last = cover.powers.last().unwrap();
            *f == Rational::new(BigInt::one(), BigInt::from(cover.count))
                && last.1.is_zero()
                && last.0.is_negative()
        }
        None => {
            let last = cover.powers.last().unwrap();
            !last.1.is_zero() || !last.0.is_negative()
        }
    }
}

fn complex_pow(z: &(BigInt, BigInt), mut e: u32) -> (BigInt, BigInt) {
    let mut acc = (BigInt::one(), BigInt::zero());
    let mut sq = z.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = complex_mul(&acc, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = complex_mul(&sq, &sq);
        }
    }
    acc
}

/// Area of the planar union of lines over t in [0, 1]: a left Riemann
/// sample of the slice measures and a certified upper bound from per-cell
/// slabs (the hull of a cell's contributions at both interval ends
/// contains every slice inside the interval).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AreaEstimate {
    pub riemann: Rational,
    pub upper: Rational,
    pub samples: u32,
}

pub fn area_estimate(family: &LineFamily, grid: u32) -> Result<AreaEstimate, AssemblyError> {
    if grid == 0 {
        return Err(AssemblyError::EmptyGrid);
    }
    let g = Rational::from_integer(grid.into());
    let step = Rational::one() / &g;
    let mut riemann = Rational::zero();
    let mut upper = Rational::zero();
    for i in 0..grid {
        let t0 = Rational::from_integer(i.into()) / &g;
        let t1 = Rational::from_integer((i + 1).into()) / &g;
        riemann += family.slice(&t0).measure() * &step;
        upper += slab_union(&family.base, &t0, &t1).measure() * &step;
    }
    // Lifts scale the slice measure nonlinearly; keep this planar-only by
    // construction: the factor is the planar slice either way.
    Ok(AreaEstimate { riemann, upper, samples: grid })
}

fn slab_union(cells: &CellSet, t0: &Rational, t1: &Rational) -> IntervalUnion {
    let side = cells.scale().side();
    let pieces = cells
        .cells()
        .iter()
        .map(|c| {
            let v_lo = Rational::from_integer(c.col.into()) * &side;
            let v_hi = Rational::from_integer((c.col + 1).into()) * &side;
            let a_lo = Rational::from_integer(c.row.into()) * &side;
            let a_hi = Rational::from_integer((c.row + 1).into()) * &side;
            let mut lo = None;
            let mut hi = None;
            for t in [t0, t1] {
                let (clo, chi) = if t.is_negative() {
                    (&a_lo + t * &v_hi, &a_hi + t * &v_lo)
                } else {
                    (&a_lo + t * &v_lo, &a_hi + t * &v_hi)
                };
                lo = Some(match lo {
                    None => clo,
                    Some(x) => std::cmp::min(x, clo),
                });
                hi = Some(match hi {
                    None => chi,
                    Some(x) => std::cmp::max(x, chi),
                });
            }
            (lo.unwrap(), hi.unwrap())
        })
        .collect();
    IntervalUnion::from_pieces(pieces)
}
