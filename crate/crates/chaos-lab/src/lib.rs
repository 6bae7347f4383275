//! Exact-arithmetic toolkit for a pair of coupled dynamical systems: a
//! skew product acting on a converging family of unit-height cylinders and
//! its factor acting on the corresponding family of unit fibers.
//!
//! Everything is computed over arbitrary-precision rationals. There is no
//! floating point anywhere in the core: distances, rotation angles, block
//! boundaries and distribution-function statistics are all exact, and the
//! long identity blocks of the schedule are handled in closed form (via
//! lattice counting) rather than by stepping, so statistics over
//! astronomically long time windows stay cheap.
//!
//! Module map:
//! - [`rational`]: the universal scalar type and circle angles
//! - [`counting`]: floor-sum lattice counting, arc hitting counts and the
//!   3δ rotation proximity bound
//! - [`interval_map`]: the piecewise-linear interval maps driving heights
//! - [`schedule`]: the block schedule (which map and which rotation act at
//!   each time index)
//! - [`dynamics`]: state types, exact stepping, projection
//! - [`analytics`]: distribution profiles, scrambled-pair classification,
//!   finite-horizon certificates
//! - [`sampling`]: seeded, reproducible samplers used by the CLI and tests

pub mod analytics;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod interval_map;
pub mod par;
pub mod rational;
pub mod sampling;
pub mod schedule;

pub use error::{Error, Result};
pub use rational::{Angle, Rational};
