//! Distribution-function statistics, scrambled-pair classification and
//! finite-horizon certificates.
//!
//! Prefix profiles count times `1..=m` at which a pair is `δ`-close and
//! report the exact fraction over `m`. Hold windows use the open range
//! with the hold length as normalizer, matching the rotation-count
//! estimates in [`crate::counting`]. Profiles come in two modes that must
//! agree exactly wherever both are computable: `Empirical` (step-by-step)
//! and `BlockExact` (hold blocks crossed in closed form).

mod classify;
mod extension;
mod factor;
mod profiles;

pub use classify::{
    classify_pair, li_yorke_extremes, DcClass, DcFlags, DeltaSummary, HoldStatReport, Horizons,
    LiYorkeReport, PairVerdict,
};
pub use extension::{
    classify_pair_case, isometry_certificate, phi_star_block_bound, substitution_angle_counts,
    HoldWindowBound, IsometryReport, PairCase, SubstitutionReport,
};
pub use factor::{factor_block_profile, find_witness_levels, FactorBlockReport, LevelWitness, PrefixBounds};
pub use profiles::{block_exact_profiles, empirical_profiles, HoldStat};

use num_bigint::BigInt;
use serde::Serialize;

use crate::dynamics::{dist_cylinder, dist_fiber, CylinderPoint, FiberPoint};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::schedule::big_serde;

/// A pair of points of the same system.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum PairState {
    Cylinder { u: CylinderPoint, v: CylinderPoint },
    Fiber { u: FiberPoint, v: FiberPoint },
}

impl PairState {
    pub fn cylinder(u: CylinderPoint, v: CylinderPoint) -> Result<Self> {
        if u == v {
            return Err(Error::domain("pair must consist of distinct points"));
        }
        Ok(PairState::Cylinder { u, v })
    }

    pub fn fiber(u: FiberPoint, v: FiberPoint) -> Result<Self> {
        if u == v {
            return Err(Error::domain("pair must consist of distinct points"));
        }
        Ok(PairState::Fiber { u, v })
    }

    pub fn initial_distance(&self) -> Rational {
        match self {
            PairState::Cylinder { u, v } => dist_cylinder(u, v),
            PairState::Fiber { u, v } => dist_fiber(u, v),
        }
    }
}

/// The index window a profile was computed over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Times `1..=horizon`, normalizer `horizon`.
    Prefix {
        #[serde(with = "big_serde")]
        horizon: BigInt,
    },
    /// Shared hold-block times of one level, half-open `[start, end)`.
    Hold {
        level: u32,
        #[serde(with = "big_serde")]
        start: BigInt,
        #[serde(with = "big_serde")]
        end: BigInt,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Empirical,
    BlockExact,
}

/// Exact count and fraction of `δ`-close times over one window.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionProfile {
    pub delta: Rational,
    pub window: Window,
    #[serde(with = "big_serde")]
    pub count: BigInt,
    #[serde(with = "big_serde")]
    pub total: BigInt,
    pub fraction: Rational,
    pub mode: ProfileMode,
}

impl DistributionProfile {
    pub(crate) fn prefix(
        delta: Rational,
        horizon: BigInt,
        count: BigInt,
        mode: ProfileMode,
    ) -> DistributionProfile {
        let fraction = Rational::from_bigint(count.clone())
            / Rational::from_bigint(horizon.clone());
        DistributionProfile {
            delta,
            window: Window::Prefix {
                horizon: horizon.clone(),
            },
            count,
            total: horizon,
            fraction,
            mode,
        }
    }
}
