//! Finite-horizon distributional classification of a pair.
//!
//! The liminf/limsup distribution functions are not computable from a
//! finite run, so verdicts here are exact statements about the examined
//! horizons: the minimum and maximum prefix fractions per delta, whether
//! some hold window was fully saturated (the mechanism that drives the
//! upper distribution function toward 1), and the resulting
//! "consistent with DC1/DC2/DC3 at these horizons" flags, ordered so that
//! type 1 implies type 2 implies type 3.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::dynamics::OrbitState;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::schedule::{big_serde, big_vec_serde, Schedule};

use super::profiles::{block_exact_profiles, empirical_profiles, HoldStat};
use super::{classify_pair_case, DistributionProfile, PairCase, PairState, Window};

/// Exact running distance extremes over a stepped horizon, the
/// finite-horizon stand-in for the liminf/limsup pair conditions.
#[derive(Debug, Clone, Serialize)]
pub struct LiYorkeReport {
    pub horizon: u64,
    pub min_distance: Rational,
    pub max_distance: Rational,
}

/// Strongest distributional-chaos type consistent with the examined data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DcClass {
    Dc1,
    Dc2,
    Dc3,
    None,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DcFlags {
    pub dc1: bool,
    pub dc2: bool,
    pub dc3: bool,
}

/// Per-delta digest of the examined prefix fractions.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaSummary {
    pub delta: Rational,
    pub min_fraction: Rational,
    #[serde(with = "big_serde")]
    pub min_horizon: BigInt,
    pub max_fraction: Rational,
    #[serde(with = "big_serde")]
    pub max_horizon: BigInt,
    /// Some examined hold window was hit at every counted time.
    pub saturated_window: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoldStatReport {
    pub level: u32,
    #[serde(with = "big_serde")]
    pub window_len: BigInt,
    #[serde(with = "big_vec_serde")]
    pub hits: Vec<BigInt>,
    pub saturated: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    /// Structural case for cylinder pairs; absent for fiber pairs.
    pub case: Option<PairCase>,
    pub deltas: Vec<Rational>,
    pub profiles: Vec<DistributionProfile>,
    pub summaries: Vec<DeltaSummary>,
    pub hold_stats: Vec<HoldStatReport>,
    pub li_yorke: Option<LiYorkeReport>,
    pub flags: DcFlags,
    pub classification: DcClass,
    pub notes: Vec<String>,
}

/// Which horizons to examine.
#[derive(Debug, Clone, Copy)]
pub enum Horizons {
    /// Step both orbits `m` times (capped schedules welcome); prefix
    /// fractions are snapshotted at block boundaries and at `m`.
    Steps(u64),
    /// Closed-form profiles at the end of each of the first `L` levels'
    /// hold windows.
    Levels(u32),
}

/// Exact min/max distance over `0..=horizon` steps.
pub fn li_yorke_extremes(s: &Schedule, pair: &PairState, horizon: u64) -> Result<LiYorkeReport> {
    fn go<S: OrbitState>(s: &Schedule, u: &S, v: &S, horizon: u64) -> Result<(Rational, Rational)> {
        let mut cu = u.clone();
        let mut cv = v.clone();
        let mut min_d = cu.dist(&cv);
        let mut max_d = min_d.clone();
        for _ in 0..horizon {
            cu = cu.step(s)?;
            cv = cv.step(s)?;
            let d = cu.dist(&cv);
            if d < min_d {
                min_d = d.clone();
            }
            if d > max_d {
                max_d = d;
            }
        }
        Ok((min_d, max_d))
    }
    let (min_distance, max_distance) = match pair {
        PairState::Cylinder { u, v } => go(s, u, v, horizon)?,
        PairState::Fiber { u, v } => go(s, u, v, horizon)?,
    };
    Ok(LiYorkeReport {
        horizon,
        min_distance,
        max_distance,
    })
}

fn max_finite_start(pair: &PairState) -> BigInt {
    use crate::dynamics::Cyl;
    let mut k_ref = BigInt::from(1u32);
    let mut see = |c: &Cyl| {
        if let Cyl::Finite(k) = c {
            if *k > k_ref {
                k_ref = k.clone();
            }
        }
    };
    match pair {
        PairState::Cylinder { u, v } => {
            see(&u.cyl);
            see(&v.cyl);
        }
        PairState::Fiber { u, v } => {
            see(&u.cyl);
            see(&v.cyl);
        }
    }
    k_ref
}

/// Horizon checkpoints at the level hold-window ends, shifted for the
/// pair's largest starting cylinder.
fn level_checkpoints(s: &Schedule, pair: &PairState, levels: u32) -> Vec<BigInt> {
    let k_ref = max_finite_start(pair);
    let mut cps = Vec::new();
    for l in 0..levels.min(s.level_count()) {
        let rec = s.level(l).expect("level exists");
        let t = &rec.hold_end - &k_ref;
        if t > BigInt::zero() {
            cps.push(t);
        }
    }
    cps
}

/// Classifies a distinct pair at the requested horizons with the given
/// delta grid. The verdict is a statement about the examined horizons
/// only; every number in it is exact.
pub fn classify_pair(
    s: &Schedule,
    pair: &PairState,
    deltas: &[Rational],
    horizons: Horizons,
    li_yorke_steps: Option<u64>,
) -> Result<PairVerdict> {
    if deltas.is_empty() {
        return Err(Error::domain("at least one delta required"));
    }
    let case = match pair {
        PairState::Cylinder { u, v } => Some(classify_pair_case(u, v)?),
        PairState::Fiber { u, v } => {
            if u == v {
                return Err(Error::domain("pair must consist of distinct points"));
            }
            None
        }
    };

    let (profiles, stats): (Vec<DistributionProfile>, Vec<HoldStat>) = match horizons {
        Horizons::Steps(m) => {
            if m == 0 {
                return Err(Error::domain("horizon must be >= 1"));
            }
            let mut cps: Vec<u64> = level_checkpoints(s, pair, s.level_count())
                .into_iter()
                .filter_map(|t| {
                    use num_traits::ToPrimitive;
                    t.to_u64().filter(|&t| t <= m)
                })
                .collect();
            cps.push(m);
            let profiles = match pair {
                PairState::Cylinder { u, v } => empirical_profiles(s, u, v, &cps, deltas)?,
                PairState::Fiber { u, v } => empirical_profiles(s, u, v, &cps, deltas)?,
            };
            (profiles, Vec::new())
        }
        Horizons::Levels(levels) => {
            let cps = level_checkpoints(s, pair, levels);
            if cps.is_empty() {
                return Err(Error::domain(
                    "no usable level checkpoints for this pair; build more levels",
                ));
            }
            block_exact_profiles(s, pair, &cps, deltas)?
        }
    };

    let mut summaries = Vec::with_capacity(deltas.len());
    let mut any_floor_zero = false;
    let mut any_gap = false;
    let mut all_saturated = true;
    for (i, delta) in deltas.iter().enumerate() {
        let mine: Vec<&DistributionProfile> =
            profiles.iter().filter(|p| &p.delta == delta).collect();
        let lo = mine
            .iter()
            .min_by(|a, b| a.fraction.cmp(&b.fraction))
            .expect("at least one horizon");
        let hi = mine
            .iter()
            .max_by(|a, b| a.fraction.cmp(&b.fraction))
            .expect("at least one horizon");
        let horizon_of = |p: &DistributionProfile| match &p.window {
            Window::Prefix { horizon } => horizon.clone(),
            Window::Hold { end, .. } => end.clone(),
        };
        let saturated_window = stats.iter().any(|st| st.saturated(i));
        if lo.fraction.is_zero() {
            any_floor_zero = true;
        }
        if lo.fraction < hi.fraction {
            any_gap = true;
        }
        if !saturated_window {
            all_saturated = false;
        }
        summaries.push(DeltaSummary {
            delta: delta.clone(),
            min_fraction: lo.fraction.clone(),
            min_horizon: horizon_of(lo),
            max_fraction: hi.fraction.clone(),
            max_horizon: horizon_of(hi),
            saturated_window,
        });
    }

    let dc1 = all_saturated && any_floor_zero;
    let dc2 = dc1 || (all_saturated && any_gap);
    let dc3 = dc2 || any_gap;
    let classification = if dc1 {
        DcClass::Dc1
    } else if dc2 {
        DcClass::Dc2
    } else if dc3 {
        DcClass::Dc3
    } else {
        DcClass::None
    };

    let mut notes = Vec::new();
    if let Some(PairCase::AngleOnly { .. }) = case {
        notes.push("angle-only pair: stepping preserves the distance exactly".to_string());
    }
    if let Some(PairCase::BothLimit) = case {
        notes.push("both points fixed on the limit cylinder".to_string());
    }
    if matches!(horizons, Horizons::Steps(_)) {
        notes.push(
            "stepped horizons carry no hold-window saturation evidence; type-1/2 flags stay off"
                .to_string(),
        );
    }

    let li_yorke = match li_yorke_steps {
        Some(h) => Some(li_yorke_extremes(s, pair, h)?),
        None => None,
    };

    let hold_stats = stats
        .into_iter()
        .map(|st| HoldStatReport {
            saturated: (0..deltas.len()).map(|i| st.saturated(i)).collect(),
            level: st.level,
            window_len: st.window_len,
            hits: st.hits,
        })
        .collect();

    Ok(PairVerdict {
        case,
        deltas: deltas.to_vec(),
        profiles,
        summaries,
        hold_stats,
        li_yorke,
        flags: DcFlags { dc1, dc2, dc3 },
        classification,
        notes,
    })
}
