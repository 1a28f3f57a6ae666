//! Finite unions of closed intervals with rational endpoints. The invariant
//! after any operation: pieces are nonempty (lo < hi), sorted, and pairwise
//! separated by a positive gap, so `measure` and `piece_count` are canonical.

use crate::rational::Rational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntervalUnion {
    pieces: Vec<(Rational, Rational)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    /// Single interval [lo, hi]. Panics if lo > hi; lo == hi normalizes to empty.
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self::from_pieces(vec![(lo, hi)])
    }

    pub fn unit() -> Self {
        Self::interval(Rational::zero(), Rational::from_integer(1.into()))
    }

    /// Normalizes an arbitrary piece list: drops empty pieces, sorts, merges
    /// touching or overlapping ones. Idempotent.
    pub fn from_pieces(raw: Vec<(Rational, Rational)>) -> Self {
        let mut v: Vec<(Rational, Rational)> = raw
            .into_iter()
            .inspect(|(lo, hi)| assert!(lo <= hi, "interval endpoints out of order"))
            .filter(|(lo, hi)| lo < hi)
            .collect();
        v.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some((_, phi)) if lo <= *phi => {
                    if hi > *phi {
                        *phi = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        Self { pieces: out }
    }

    pub fn pieces(&self) -> &[(Rational, Rational)] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure(&self) -> Rational {
        let mut m = Rational::zero();
        for (lo, hi) in &self.pieces {
            m += hi - lo;
        }
        m
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.pieces.clone();
        v.extend_from_slice(&other.pieces);
        Self::from_pieces(v)
    }

    pub fn translate(&self, off: &Rational) -> Self {
        // Order and gaps are preserved, no renormalization needed.
        Self {
            pieces: self.pieces.iter().map(|(lo, hi)| (lo + off, hi + off)).collect(),
        }
    }

    /// Scale by a nonzero factor; a negative factor reverses orientation.
    pub fn scale(&self, f: &Rational) -> Self {
        assert!(!f.is_zero(), "scaling an interval union by zero");
        let mut v: Vec<(Rational, Rational)> = self
            .pieces
            .iter()
            .map(|(lo, hi)| {
                let a = lo * f;
                let b = hi * f;
                if a <= b { (a, b) } else { (b, a) }
            })
            .collect();
        if f < &Rational::zero() {
            v.reverse();
        }
        Self { pieces: v }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.pieces.iter().any(|(lo, hi)| lo <= x && x <= hi)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        // Both sides normalized, so every piece must sit inside one piece.
        self.pieces.iter().all(|(lo, hi)| {
            other.pieces.iter().any(|(olo, ohi)| olo <= lo && hi <= ohi)
        })
    }

    pub fn min(&self) -> Option<&Rational> {
        self.pieces.first().map(|(lo, _)| lo)
    }

    pub fn max(&self) -> Option<&Rational> {
        self.pieces.last().map(|(_, hi)| hi)
    }
}
