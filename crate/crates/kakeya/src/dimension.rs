//! Cube-counting bookkeeping. A construction is a chain of stages; stage j
//! refines the grid by a factor N_j = 2^{log2_n} and multiplies the cell
//! count by M_j = 2^{log2_m}, with 1 < M_j < N_j^d in ambient dimension d.
//! Prefix sums of the logs give the packing lower bound, the cube entropy,
//! and the first-moment Hausdorff bound, all exactly.

use crate::grid::{CellSet, GridError};
use crate::rational::{decimal_fixed, Rational};
use crate::schedule::Schedule;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Stage enumeration cap: a schedule must materialize its stages to be
/// reported on, which deep blocks cannot.
pub const MAX_STAGES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimensionError {
    #[error("ambient dimension must be at least 1")]
    BadAmbient,
    #[error("stage factors must satisfy 1 < M < N^d, got log2 N = {log2_n}, log2 M = {log2_m}, d = {ambient}")]
    BadStage { log2_n: u64, log2_m: u64, ambient: u32 },
    #[error("count {0} is not a power of two")]
    NotPowerOfTwo(BigUint),
    #[error("stage index {got} out of range, chain has {len} stages")]
    StageOutOfRange { got: usize, len: usize },
    #[error("schedule needs {0} stages, enumeration cap is {MAX_STAGES}")]
    TooManyStages(BigUint),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StagePair {
    pub log2_n: u64,
    pub log2_m: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeCounts {
    ambient: u32,
    stages: Vec<StagePair>,
}

impl CubeCounts {
    pub fn new(ambient: u32) -> Result<Self, DimensionError> {
        if ambient == 0 {
            return Err(DimensionError::BadAmbient);
        }
        Ok(Self { ambient, stages: Vec::new() })
    }

    pub fn ambient(&self) -> u32 {
        self.ambient
    }

    pub fn stages(&self) -> &[StagePair] {
        &self.stages
    }

    pub fn push_logs(&mut self, log2_n: u64, log2_m: u64) -> Result<(), DimensionError> {
        let ok = log2_n >= 1
            && log2_m >= 1
            && log2_m < self.ambient as u64 * log2_n;
        if !ok {
            return Err(DimensionError::BadStage {
                log2_n,
                log2_m,
                ambient: self.ambient,
            });
        }
        self.stages.push(StagePair { log2_n, log2_m });
        Ok(())
    }

    /// Push a stage given the factors themselves; both must be powers of two.
    pub fn push_powers(&mut self, n: &BigUint, m: &BigUint) -> Result<(), DimensionError> {
        let log = |v: &BigUint| -> Result<u64, DimensionError> {
            if v.is_zero() || v.count_ones() != 1 {
                return Err(DimensionError::NotPowerOfTwo(v.clone()));
            }
            Ok(v.bits() - 1)
        };
        self.push_logs(log(n)?, log(m)?)
    }

    /// The stage chain of a planar construction schedule: every round is an
    /// odd stage (N = 4^n, M = 8^n) then an even stage (N = 4^n, M = 2^n),
    /// optionally closed by one odd half-stage at `half_stage_n`.
    pub fn from_schedule(
        schedule: &Schedule,
        half_stage_n: Option<&BigUint>,
    ) -> Result<Self, DimensionError> {
        let mut total = BigUint::zero();
        for b in &schedule.blocks {
            total += 2u32 * &b.m;
        }
        if half_stage_n.is_some() {
            total += 1u32;
        }
        if total > BigUint::from(MAX_STAGES) {
            return Err(DimensionError::TooManyStages(total));
        }
        let mut counts = Self::new(2)?;
        let stage_n = |n: &BigUint| -> Result<u64, DimensionError> {
            n.to_u64()
                .filter(|v| *v >= 1 && 3 * v < u64::MAX / 2)
                .ok_or_else(|| DimensionError::TooManyStages(n.clone()))
        };
        for b in &schedule.blocks {
            let n = stage_n(&b.n)?;
            let rounds = b.m.to_u64().expect("under stage cap");
            for _ in 0..rounds {
                counts.push_logs(2 * n, 3 * n)?;
                counts.push_logs(2 * n, n)?;
            }
        }
        if let Some(n) = half_stage_n {
            let n = stage_n(n)?;
            counts.push_logs(2 * n, 3 * n)?;
        }
        Ok(counts)
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    fn prefix(&self, k: usize) -> Result<(u64, u64), DimensionError> {
        if k == 0 || k > self.stages.len() {
            return Err(DimensionError::StageOutOfRange {
                got: k,
                len: self.stages.len(),
            });
        }
        let mut sn = 0u64;
        let mut sm = 0u64;
        for s in &self.stages[..k] {
            sn += s.log2_n;
            sm += s.log2_m;
        }
        Ok((sn, sm))
    }

    /// Packing dimension lower bound after k stages:
    /// log M_1..M_k / log N_1..N_k.
    pub fn packing_lower_ratio(&self, k: usize) -> Result<Rational, DimensionError> {
        let (sn, sm) = self.prefix(k)?;
        Ok(Rational::new(BigInt::from(sm), BigInt::from(sn)))
    }

    /// Total cell count after k stages, in bits: log2 of prod M_j.
    pub fn cube_entropy(&self, k: usize) -> Result<u64, DimensionError> {
        Ok(self.prefix(k)?.1)
    }

    /// First-moment bound (count times side) on the 1-dimensional Hausdorff
    /// content after k stages: 2^{sum log M - sum log N}, exactly.
    pub fn hausdorff_upper_bound(&self, k: usize) -> Result<Rational, DimensionError> {
        let (sn, sm) = self.prefix(k)?;
        Ok(if sm >= sn {
            Rational::from_integer(BigInt::one() << (sm - sn))
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (sn - sm))
        })
    }

    pub fn report(&self) -> Result<Vec<DimensionRow>, DimensionError> {
        (1..=self.stages.len()).map(|k| self.row(k)).collect()
    }

    pub fn row(&self, k: usize) -> Result<DimensionRow, DimensionError> {
        let ratio = self.packing_lower_ratio(k)?;
        let bound = self.hausdorff_upper_bound(k)?;
        Ok(DimensionRow {
            stage: k as u64,
            ratio_num: ratio.numer().to_string(),
            ratio_den: ratio.denom().to_string(),
            ratio_decimal: decimal_fixed(&ratio, 6),
            entropy_bits: self.cube_entropy(k)?.to_string(),
            hmeasure_bound_num: bound.numer().to_string(),
            hmeasure_bound_den: bound.denom().to_string(),
        })
    }
}

/// One row of the dimension report; all numbers are exact decimal strings
/// except the convenience decimal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub stage: u64,
    pub ratio_num: String,
    pub ratio_den: String,
    pub ratio_decimal: String,
    pub entropy_bits: String,
    pub hmeasure_bound_num: String,
    pub hmeasure_bound_den: String,
}

/// Boxes of side 4^-target meeting the set.
pub fn box_count(cells: &CellSet, target: u32) -> Result<u64, DimensionError> {
    Ok(cells.box_count(target)? as u64)
}
