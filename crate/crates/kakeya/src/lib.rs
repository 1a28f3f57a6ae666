//! Exact finite-stage models of Kakeya-type constructions in the plane:
//! Moran-style selections on base-4 grids, their projection measures, the
//! stage schedules that drive dimension bounds, and the sticky Cantor-set
//! variant. Everything is integer or rational arithmetic; there is no
//! floating point anywhere in a result.

pub mod assembly;
pub mod dimension;
pub mod grid;
pub mod interval;
pub mod moran;
pub mod projection;
pub mod rational;
pub mod render;
pub mod schedule;
pub mod snapshot;
pub mod sticky;

pub use grid::{Cell, CellSet, Scale};
pub use interval::IntervalUnion;
pub use rational::Rational;
