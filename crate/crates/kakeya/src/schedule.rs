//! Stage schedules: how many rounds to run at each parameter n, and how the
//! next n is forced by the accumulated digit budget.
//!
//! Block k of a schedule runs m_k rounds at parameter n_k, where m_k is the
//! least m with (1 - 16^{-n_k})^m < 2^{-k}, and n_{k+1} is the least n with
//! (4 * sum_j n_j m_j) / n < epsilon. The first quantity is transcendental
//! in disguise; it is decided by certified dyadic arithmetic (directed
//! rounding on BigUint mantissas), never by floating point. No exact tie is
//! possible: (2^q - 1)^m = 2^{qm - k} would need an odd number above one to
//! be a power of two.

use crate::rational::{parse_fraction, FractionError, Rational};
use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// minimal_m needs about 4n + 128 bits of working precision; this cap keeps
/// a single mantissa under a megabyte. Cost grows quadratically in n, so
/// the cap is generous headroom, not a promise of speed near it.
pub const MAX_PREC_BITS: u64 = 1 << 22;

/// Parsed numbers larger than this many digits are rejected outright.
pub const MAX_NUMBER_DIGITS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("block parameter n={n} needs more than {MAX_PREC_BITS} bits of precision")]
    NTooLarge { n: BigUint },
    #[error("n must be positive")]
    ZeroN,
    #[error("m must be positive")]
    ZeroM,
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(String),
    #[error("stage {stage}: m rounds do not push the shadow below 2^-{stage}")]
    StageBoundUnmet { stage: usize },
    #[error("stage {stage}: digit ratio is not below epsilon")]
    RatioUnmet { stage: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleBlock {
    pub n: BigUint,
    pub m: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub blocks: Vec<ScheduleBlock>,
    pub epsilon: Rational,
}

// ---- certified dyadic bounds ----

/// A positive value mant * 2^exp. Directed truncation keeps mantissas at a
/// working precision; the direction is the caller's proof obligation.
#[derive(Clone, Debug)]
struct Bound {
    mant: BigUint,
    exp: i64,
}

impl Bound {
    fn one() -> Self {
        Bound { mant: BigUint::one(), exp: 0 }
    }

    fn trunc_down(mut self, prec: u64) -> Self {
        let bits = self.mant.bits();
        if bits > prec {
            let sh = bits - prec;
            self.mant >>= sh;
            self.exp += sh as i64;
        }
        self
    }

    fn trunc_up(mut self, prec: u64) -> Self {
        let bits = self.mant.bits();
        if bits > prec {
            let sh = bits - prec;
            let down = &self.mant >> sh;
            let exact = &down << sh == self.mant;
            self.mant = if exact { down } else { down + 1u32 };
            self.exp += sh as i64;
        }
        self
    }

    fn mul_down(&self, other: &Self, prec: u64) -> Self {
        Bound {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
        .trunc_down(prec)
    }

    fn mul_up(&self, other: &Self, prec: u64) -> Self {
        Bound {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
        .trunc_up(prec)
    }

    /// Compare the value against 2^e.
    fn cmp_pow2(&self, e: i64) -> Ordering {
        let t = e - self.exp;
        if t >= 0 {
            self.mant.cmp(&(BigUint::one() << t as u64))
        } else {
            (&self.mant << (-t) as u64).cmp(&BigUint::one())
        }
    }
}

/// (1 - 2^-q)^m compared against 2^-k with directed rounding at `prec`
/// bits; None when the interval straddles the threshold.
fn try_power_below(q: u64, m: &BigUint, k: u32, prec: u64) -> Option<bool> {
    let base = Bound {
        mant: (BigUint::one() << q) - 1u32,
        exp: -(q as i64),
    };
    let thresh = -(k as i64);
    let mut lo = Bound::one();
    let mut hi = Bound::one();
    for i in (0..m.bits()).rev() {
        lo = lo.mul_down(&lo, prec);
        hi = hi.mul_up(&hi, prec);
        if m.bit(i) {
            lo = lo.mul_down(&base, prec);
            hi = hi.mul_up(&base, prec);
        }
        // The prefix value is below both 1 and the threshold; the remaining
        // squarings and base factors only shrink it further. Deciding here
        // also keeps the dyadic exponents from running off to -infinity.
        if hi.cmp_pow2(thresh) == Ordering::Less {
            return Some(true);
        }
    }
    if hi.cmp_pow2(thresh) == Ordering::Less {
        Some(true)
    } else if lo.cmp_pow2(thresh) != Ordering::Less {
        Some(false)
    } else {
        None
    }
}

/// Certified: is (1 - 16^-n)^m < 2^-k? Escalates precision until the
/// interval separates; a tie is impossible, so this terminates.
pub fn power_below(n: &BigUint, m: &BigUint, k: u32) -> Result<bool, ScheduleError> {
    let q = four_n(n)?;
    if m.is_zero() {
        return Ok(false); // empty product is 1, never below 2^-k
    }
    let mut prec = q + 128;
    loop {
        if let Some(ans) = try_power_below(q, m, k, prec) {
            return Ok(ans);
        }
        prec *= 2;
        assert!(
            prec <= MAX_PREC_BITS * 64,
            "power comparison failed to converge"
        );
    }
}

fn four_n(n: &BigUint) -> Result<u64, ScheduleError> {
    if n.is_zero() {
        return Err(ScheduleError::ZeroN);
    }
    n.to_u64()
        .and_then(|v| v.checked_mul(4))
        .filter(|q| 2 * q + 128 <= MAX_PREC_BITS)
        .ok_or_else(|| ScheduleError::NTooLarge { n: n.clone() })
}

/// Integer bounds (lo, hi) with lo <= ln2 * 2^scale <= hi, from
/// ln2 = sum_j 2 / (3 * (2j+1) * 9^j). Nested floors keep the per-term
/// deficit under 2 ulps, and the tail after the terms vanish is under 2.
fn ln2_scaled(scale: u64) -> (BigUint, BigUint) {
    let mut pow = (BigUint::one() << (scale + 1)) / 3u32; // floor(2^{scale+1} / (3 * 9^j))
    let mut sum = BigUint::zero();
    let mut j: u64 = 0;
    while !pow.is_zero() {
        sum += &pow / (2 * j + 1);
        pow /= 9u32;
        j += 1;
    }
    let slack = 2 * j + 8;
    (sum.clone(), sum + slack)
}

/// Integer bounds for -ln(1 - 2^-q) * 2^scale = sum_i 2^{scale - q i} / i.
fn neg_ln_one_minus_scaled(q: u64, scale: u64) -> (BigUint, BigUint) {
    let mut sum = BigUint::zero();
    let mut i: u64 = 1;
    while q.checked_mul(i).map_or(false, |qi| qi <= scale) {
        sum += (BigUint::one() << (scale - q * i)) / i;
        i += 1;
    }
    let slack = i + 4;
    (sum.clone(), sum + slack)
}

/// Least m with (1 - 16^-n)^m < 2^-k.
pub fn minimal_m(n: &BigUint, k: u32) -> Result<BigUint, ScheduleError> {
    let q = four_n(n)?;
    // The denominator -ln(1 - 2^-q) has magnitude about 2^-q, and the
    // quotient has about q bits, so the series need q significant bits
    // past the magnitude: scale 2q plus guard.
    let scale = 2 * q + 128;
    let (ln2_lo, ln2_hi) = ln2_scaled(scale);
    let (l_lo, l_hi) = neg_ln_one_minus_scaled(q, scale);
    // m* = k ln2 / -ln(1 - 2^-q), bracketed conservatively. The scale
    // cancels in the quotient.
    let mut cand_lo = (ln2_lo * k) / l_hi + 1u32;
    let mut cand_hi = (ln2_hi * k) / l_lo + 1u32;
    // The window is one or two wide in practice; widen defensively so
    // correctness never rests on the slack analysis alone.
    while !power_below(n, &cand_hi, k)? {
        cand_hi += 8u32;
    }
    let eight = BigUint::from(8u32);
    while cand_lo > BigUint::one() && power_below(n, &(&cand_lo - 1u32), k)? {
        cand_lo = if cand_lo > eight {
            &cand_lo - &eight
        } else {
            BigUint::one()
        };
    }
    // Binary search the certified predicate over [cand_lo, cand_hi].
    while cand_lo < cand_hi {
        let mid = (&cand_lo + &cand_hi) / 2u32;
        if power_below(n, &mid, k)? {
            cand_hi = mid;
        } else {
            cand_lo = mid + 1u32;
        }
    }
    Ok(cand_lo)
}

/// Least n' with (4 sum_j n_j m_j) / n' < epsilon. The odd and even digit
/// conditions both reduce to the same sum, so one check covers both.
pub fn minimal_next_n(blocks: &[ScheduleBlock], epsilon: &Rational) -> Result<BigUint, ScheduleError> {
    if !epsilon.is_positive() {
        return Err(ScheduleError::BadEpsilon(epsilon.to_string()));
    }
    let s = digit_sum(blocks)?;
    let p = epsilon.numer().to_biguint().expect("positive");
    let q = epsilon.denom().to_biguint().expect("positive");
    Ok(s * q / p + 1u32)
}

fn digit_sum(blocks: &[ScheduleBlock]) -> Result<BigUint, ScheduleError> {
    let mut s = BigUint::zero();
    for b in blocks {
        if b.n.is_zero() {
            return Err(ScheduleError::ZeroN);
        }
        if b.m.is_zero() {
            return Err(ScheduleError::ZeroM);
        }
        s += 4u32 * &b.n * &b.m;
    }
    Ok(s)
}

/// Builds the schedule of the given depth: n_1 = 1, then each block takes
/// the least admissible m and the least admissible next n.
pub fn build_schedule(depth: u32, epsilon: &Rational) -> Result<Schedule, ScheduleError> {
    if !epsilon.is_positive() {
        return Err(ScheduleError::BadEpsilon(epsilon.to_string()));
    }
    let mut blocks: Vec<ScheduleBlock> = Vec::new();
    for k in 1..=depth {
        let n = minimal_next_n(&blocks, epsilon)?;
        let m = minimal_m(&n, k)?;
        blocks.push(ScheduleBlock { n, m });
    }
    Ok(Schedule {
        blocks,
        epsilon: epsilon.clone(),
    })
}

impl Schedule {
    /// Checks every block bound and every ratio condition. Accepts any
    /// admissible schedule, not only minimal ones.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if !self.epsilon.is_positive() {
            return Err(ScheduleError::BadEpsilon(self.epsilon.to_string()));
        }
        let p = self.epsilon.numer().to_biguint().expect("positive");
        let q = self.epsilon.denom().to_biguint().expect("positive");
        for (i, b) in self.blocks.iter().enumerate() {
            let k = i + 1;
            if !power_below(&b.n, &b.m, k as u32)? {
                return Err(ScheduleError::StageBoundUnmet { stage: k });
            }
            if i > 0 {
                let s = digit_sum(&self.blocks[..i])?;
                // s / n_k < epsilon, exactly.
                if s * &q >= &b.n * &p {
                    return Err(ScheduleError::RatioUnmet { stage: k });
                }
            }
        }
        digit_sum(&self.blocks)?;
        Ok(())
    }

    /// One `n=<int> m=<int>` line per block, then `epsilon=<p>/<q>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            out.push_str(&format!("n={} m={}\n", b.n, b.m));
        }
        out.push_str(&format!(
            "epsilon={}/{}\n",
            self.epsilon.numer(),
            self.epsilon.denom()
        ));
        out
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleParseError {
    #[error("line {line}: expected `n=<int> m=<int>` or `epsilon=<p>/<q>`")]
    BadLine { line: usize },
    #[error("line {line}: bad integer")]
    BadNumber { line: usize },
    #[error("line {line}: number exceeds {MAX_NUMBER_DIGITS} digits")]
    NumberTooLong { line: usize },
    #[error("line {line}: n and m must be positive")]
    ZeroValue { line: usize },
    #[error("line {1}: {0}")]
    BadFraction(FractionError, usize),
    #[error("line {line}: epsilon must be positive")]
    NonPositiveEpsilon { line: usize },
    #[error("line {line}: content after the epsilon line")]
    TrailingContent { line: usize },
    #[error("missing epsilon line")]
    MissingEpsilon,
}

fn parse_positive_int(s: &str, line: usize) -> Result<BigUint, ScheduleParseError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ScheduleParseError::BadNumber { line });
    }
    if s.len() > MAX_NUMBER_DIGITS {
        return Err(ScheduleParseError::NumberTooLong { line });
    }
    let v: BigUint = s.parse().map_err(|_| ScheduleParseError::BadNumber { line })?;
    if v.is_zero() {
        return Err(ScheduleParseError::ZeroValue { line });
    }
    Ok(v)
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ScheduleParseError> {
    let mut blocks = Vec::new();
    let mut epsilon: Option<Rational> = None;
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            continue; // covers the trailing newline; blank interior lines too
        }
        if epsilon.is_some() {
            return Err(ScheduleParseError::TrailingContent { line });
        }
        if let Some(rest) = raw.strip_prefix("epsilon=") {
            if rest.len() > 2 * MAX_NUMBER_DIGITS + 1 {
                return Err(ScheduleParseError::NumberTooLong { line });
            }
            let eps = parse_fraction(rest)
                .map_err(|e| ScheduleParseError::BadFraction(e, line))?;
            if !eps.is_positive() {
                return Err(ScheduleParseError::NonPositiveEpsilon { line });
            }
            epsilon = Some(eps);
        } else if let Some(rest) = raw.strip_prefix("n=") {
            let (n_str, m_part) = rest
                .split_once(' ')
                .ok_or(ScheduleParseError::BadLine { line })?;
            let m_str = m_part
                .strip_prefix("m=")
                .ok_or(ScheduleParseError::BadLine { line })?;
            blocks.push(ScheduleBlock {
                n: parse_positive_int(n_str, line)?,
                m: parse_positive_int(m_str, line)?,
            });
        } else {
            return Err(ScheduleParseError::BadLine { line });
        }
    }
    let epsilon = epsilon.ok_or(ScheduleParseError::MissingEpsilon)?;
    Ok(Schedule { blocks, epsilon })
}
