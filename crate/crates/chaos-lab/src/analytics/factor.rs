//! Per-level witness analysis for pairs on the first fiber.
//!
//! Heights return to their starting value at the end of every level
//! (forward, hold, backward compose to the identity exactly), so the
//! frozen hold height of level `l` is just the level map iterated from
//! the original height. A level is an `s`-witness when both frozen
//! heights fall into the same endpoint neighborhood `[0, 1/l)` or
//! `(1 - 1/l, 1]`, which pins the pair distance below `1/l` for the whole
//! hold block, and a `q`-witness when they straddle both neighborhoods,
//! which pins the distance above `1 - 2/l` there.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::schedule::{big_serde, Schedule};

/// What one level does to a fiber-1 pair.
#[derive(Debug, Clone, Serialize)]
pub struct LevelWitness {
    pub level: u32,
    /// Frozen heights during the level's hold block.
    pub hold_heights: (Rational, Rational),
    /// Exact pair distance during the hold block.
    pub hold_distance: Rational,
    #[serde(with = "big_serde")]
    pub hold_len: BigInt,
    /// `1 / max(level, 1)`, the endpoint-neighborhood width.
    pub near_threshold: Rational,
    /// Both frozen heights in the same endpoint neighborhood.
    pub s_type: bool,
    /// Frozen heights in opposite endpoint neighborhoods.
    pub q_type: bool,
}

/// Conservative prefix bounds at the horizon `m3 - 1` of one level:
/// the lower bound counts only hold times of hold blocks whose constant
/// distance is below delta, the upper bound additionally counts every
/// non-hold time as a hit.
#[derive(Debug, Clone, Serialize)]
pub struct PrefixBounds {
    pub level: u32,
    pub delta: Rational,
    #[serde(with = "big_serde")]
    pub horizon: BigInt,
    pub lower_fraction: Rational,
    pub upper_fraction: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorBlockReport {
    pub z_u: Rational,
    pub z_v: Rational,
    pub levels: Vec<LevelWitness>,
    pub bounds: Vec<PrefixBounds>,
}

impl FactorBlockReport {
    pub fn s_levels(&self) -> Vec<u32> {
        self.levels.iter().filter(|w| w.s_type).map(|w| w.level).collect()
    }

    pub fn q_levels(&self) -> Vec<u32> {
        self.levels.iter().filter(|w| w.q_type).map(|w| w.level).collect()
    }
}

fn witness_for_level(s: &Schedule, level: u32, z_u: &Rational, z_v: &Rational) -> Result<LevelWitness> {
    let rec = s.level(level).expect("level exists");
    let h_u = rec.maps.forward.iterate(z_u, rec.maps.escape_time)?;
    let h_v = rec.maps.forward.iterate(z_v, rec.maps.escape_time)?;
    let near = Rational::frac(1, i64::from(level.max(1)));
    let far = Rational::one() - &near;
    let both_low = h_u < near && h_v < near;
    let both_high = h_u > far && h_v > far;
    let low = h_u.clone().min(h_v.clone());
    let high = h_u.clone().max(h_v.clone());
    let straddle = low < near && high > far;
    Ok(LevelWitness {
        level,
        hold_distance: (&h_u - &h_v).abs(),
        hold_heights: (h_u, h_v),
        hold_len: rec.hold_len(),
        near_threshold: near,
        s_type: both_low || both_high,
        q_type: straddle,
    })
}

/// Exact per-level hold data and conservative prefix bounds for a pair of
/// distinct heights on fiber 1, across every built level.
pub fn factor_block_profile(
    s: &Schedule,
    z_u: &Rational,
    z_v: &Rational,
    deltas: &[Rational],
) -> Result<FactorBlockReport> {
    if z_u == z_v {
        return Err(Error::domain("fiber pair must have distinct heights"));
    }
    let mut levels = Vec::new();
    for l in 0..s.level_count() {
        levels.push(witness_for_level(s, l, z_u, z_v)?);
    }
    let mut bounds = Vec::new();
    for delta in deltas {
        // running hold-hit/miss totals over level prefixes
        let mut hold_hits = BigInt::from(0u32);
        let mut hold_misses = BigInt::from(0u32);
        for w in &levels {
            if &w.hold_distance < delta {
                hold_hits += &w.hold_len;
            } else {
                hold_misses += &w.hold_len;
            }
            let rec = s.level(w.level).expect("level exists");
            // horizon: the last time index still inside this hold block
            // for a point that started on cylinder 1
            let horizon = &rec.hold_end - BigInt::one();
            let total = Rational::from_bigint(horizon.clone());
            let lower_fraction = Rational::from_bigint(hold_hits.clone()) / &total;
            let upper_fraction =
                (&total - Rational::from_bigint(hold_misses.clone())) / &total;
            bounds.push(PrefixBounds {
                level: w.level,
                delta: delta.clone(),
                horizon,
                lower_fraction,
                upper_fraction,
            });
        }
    }
    Ok(FactorBlockReport {
        z_u: z_u.clone(),
        z_v: z_v.clone(),
        levels,
        bounds,
    })
}

/// Scans levels `0..l_max` and returns the `s`-witness and `q`-witness
/// level lists. Either list may be empty at a finite scan depth; that is
/// reported as found, not padded.
pub fn find_witness_levels(
    s: &Schedule,
    z_u: &Rational,
    z_v: &Rational,
    l_max: u32,
) -> Result<(Vec<u32>, Vec<u32>)> {
    if z_u == z_v {
        return Err(Error::domain("fiber pair must have distinct heights"));
    }
    let top = l_max.min(s.level_count());
    let mut s_levels = Vec::new();
    let mut q_levels = Vec::new();
    for l in 0..top {
        let w = witness_for_level(s, l, z_u, z_v)?;
        if w.s_type {
            s_levels.push(l);
        }
        if w.q_type {
            q_levels.push(l);
        }
    }
    Ok((s_levels, q_levels))
}
