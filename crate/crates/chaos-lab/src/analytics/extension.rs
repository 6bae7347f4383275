//! Case analysis for pairs of the cylinder system and hold-window
//! proximity certificates.
//!
//! Distinct pairs split into: angle-only pairs (rotation is a shared
//! rigid motion, so stepping is isometric), split-height pairs on one
//! cylinder, split-height pairs with a cylinder offset, pairs involving
//! the limit cylinder (reduced through a fixed substitute point with the
//! limit point's angle and height zero), pairs of limit points (both
//! fixed), and distinct-cylinder pairs with equal heights.
//!
//! For split-height pairs the hold block of a level rotates the two
//! angles at a constant relative speed, so the fraction of `δ`-close
//! times over the block is an exact arc-hitting count.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::counting::{arc_hits_from_start, arc_hits_in_range, guaranteed_regime};
use crate::dynamics::{Cyl, CylinderPoint, OrbitState};
use crate::error::{Error, Result};
use crate::rational::{Angle, Rational};
use crate::schedule::{big_serde, big_vec_serde, Schedule};

/// Structural class of a distinct pair.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum PairCase {
    /// Same cylinder, same height, distinct angles: stepping preserves
    /// the pair distance exactly.
    AngleOnly {
        #[serde(with = "big_serde")]
        k: BigInt,
        height: Rational,
    },
    /// Same cylinder, distinct heights. `gap_level` is the least `L`
    /// with `|z_u - z_v| > 1/L`.
    HeightSplit {
        #[serde(with = "big_serde")]
        k: BigInt,
        #[serde(with = "big_serde")]
        gap_level: BigInt,
    },
    /// Distinct cylinders, distinct heights.
    OffsetHeightSplit {
        #[serde(with = "big_serde")]
        k_u: BigInt,
        #[serde(with = "big_serde")]
        k_v: BigInt,
        #[serde(with = "big_serde")]
        offset: BigInt,
        #[serde(with = "big_serde")]
        gap_level: BigInt,
    },
    /// Exactly one point on the limit cylinder. The witness shares the
    /// inner point's cylinder, takes the limit point's angle and height
    /// zero, so it is fixed under rotation and has the same angle orbit
    /// as the limit point.
    LimitSubstitute { witness: CylinderPoint },
    /// Both points on the limit cylinder: the pair is fixed.
    BothLimit,
    /// Distinct cylinders with equal heights: the pair distance is
    /// bounded below by the radius gap at every finite time.
    RadiusOnly {
        #[serde(with = "big_serde")]
        k_u: BigInt,
        #[serde(with = "big_serde")]
        k_v: BigInt,
    },
}

/// Least `L >= 1` with `|dz| > 1/L`.
fn gap_level(dz: &Rational) -> BigInt {
    dz.recip().expect("nonzero gap").abs().floor_int() + BigInt::one()
}

pub fn classify_pair_case(u: &CylinderPoint, v: &CylinderPoint) -> Result<PairCase> {
    if u == v {
        return Err(Error::domain("pair must consist of distinct points"));
    }
    match (&u.cyl, &v.cyl) {
        (Cyl::Limit, Cyl::Limit) => Ok(PairCase::BothLimit),
        (Cyl::Finite(k), Cyl::Limit) => Ok(PairCase::LimitSubstitute {
            witness: CylinderPoint::new(Cyl::Finite(k.clone()), v.angle.clone(), Rational::zero())?,
        }),
        (Cyl::Limit, Cyl::Finite(k)) => Ok(PairCase::LimitSubstitute {
            witness: CylinderPoint::new(Cyl::Finite(k.clone()), u.angle.clone(), Rational::zero())?,
        }),
        (Cyl::Finite(ku), Cyl::Finite(kv)) => {
            let dz = &u.height - &v.height;
            if ku == kv {
                if dz.is_zero() {
                    Ok(PairCase::AngleOnly {
                        k: ku.clone(),
                        height: u.height.clone(),
                    })
                } else {
                    Ok(PairCase::HeightSplit {
                        k: ku.clone(),
                        gap_level: gap_level(&dz),
                    })
                }
            } else if dz.is_zero() {
                Ok(PairCase::RadiusOnly {
                    k_u: ku.clone(),
                    k_v: kv.clone(),
                })
            } else {
                Ok(PairCase::OffsetHeightSplit {
                    k_u: ku.clone(),
                    k_v: kv.clone(),
                    offset: (ku - kv).abs(),
                    gap_level: gap_level(&dz),
                })
            }
        }
    }
}

/// Exact proximity statistics over one level's shared hold window.
#[derive(Debug, Clone, Serialize)]
pub struct HoldWindowBound {
    pub level: u32,
    pub delta: Rational,
    /// Hold block length `m3 - m2`, the normalizer.
    #[serde(with = "big_serde")]
    pub hold_len: BigInt,
    /// First and last shared time counted (both heights frozen and both
    /// rotation divisors equal to the level's).
    #[serde(with = "big_serde")]
    pub window_start: BigInt,
    #[serde(with = "big_serde")]
    pub window_end: BigInt,
    /// Frozen heights during the window.
    pub hold_heights: (Rational, Rational),
    /// Constant relative rotation per step, `|H_u - H_v| / max(l, 1)`.
    pub relative_rotation: Rational,
    /// The level margin over the divisor, `eps_l / max(l, 1)`.
    pub margin_ratio: Rational,
    pub rotation_exceeds_margin: bool,
    /// Whether the counted window length exceeds `2/Δψ`, the hypothesis
    /// of the 3δ estimate.
    pub estimate_applicable: bool,
    /// Whether the parameters fall in the provable `3δ` regime.
    pub guaranteed: bool,
    /// `δ >= 1/2`: every angle is within `δ`, the verdict is vacuous.
    pub saturated: bool,
    /// Exact `#{window times : angle distance < δ}`.
    #[serde(with = "big_serde")]
    pub angle_hits: BigInt,
    /// Exact `#{window times : full max-metric distance < δ}`.
    #[serde(with = "big_serde")]
    pub metric_hits: BigInt,
    /// `angle_hits / hold_len`.
    pub fraction: Rational,
    /// Hold times outside the shared window (cylinder offset), counted
    /// as hits in the conservative fraction.
    #[serde(with = "big_serde")]
    pub edge_indices: BigInt,
    /// `(angle_hits + edge_indices) / hold_len`, a rigorous upper bound
    /// for the whole hold block.
    pub upper_fraction: Rational,
    /// `3δ`.
    pub bound: Rational,
    /// `upper_fraction < 3δ`.
    pub holds: bool,
    /// Rigorous upper bound on the prefix fraction at the window end:
    /// all times outside the window counted as hits.
    pub prefix_upper_fraction: Rational,
}

/// Smallest `j` in `[0, n)` satisfying the monotone predicate, or `n`.
fn first_from_zero(n: &BigInt, pred: impl Fn(&BigInt) -> bool) -> BigInt {
    if n.is_zero() || pred(&BigInt::zero()) {
        return BigInt::zero();
    }
    if !pred(&(n - BigInt::one())) {
        return n.clone();
    }
    let mut lo = BigInt::zero();
    let mut hi = n - BigInt::one();
    while lo < hi {
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        if pred(&mid) {
            hi = mid;
        } else {
            lo = mid + BigInt::one();
        }
    }
    lo
}

/// Exact `δ`-proximity count over the shared hold window of `level` for a
/// split-height pair, with the `3δ` comparison and rigorous whole-window
/// and prefix upper bounds. Requires an uncapped schedule, a pair of
/// class `HeightSplit` or `OffsetHeightSplit`, and an initial height gap
/// above `1 / max(level, 1)`.
pub fn phi_star_block_bound(
    s: &Schedule,
    u: &CylinderPoint,
    v: &CylinderPoint,
    delta: &Rational,
    level: u32,
) -> Result<HoldWindowBound> {
    if s.is_capped() {
        return Err(Error::CappedSchedule);
    }
    if !delta.is_positive() {
        return Err(Error::domain("delta must be positive"));
    }
    match classify_pair_case(u, v)? {
        PairCase::HeightSplit { .. } | PairCase::OffsetHeightSplit { .. } => {}
        PairCase::AngleOnly { .. } => {
            return Err(Error::domain(
                "angle-only pair: stepping is isometric, use the isometry certificate",
            ))
        }
        _ => {
            return Err(Error::domain(
                "hold-window certificates apply to split-height pairs of inner cylinders",
            ))
        }
    }
    let rec = s
        .level(level)
        .ok_or_else(|| Error::domain(format!("level {level} not built")))?;
    let divisor = rec.rotation_divisor();
    let dz = (&u.height - &v.height).abs();
    if dz * Rational::int(divisor) <= Rational::one() {
        return Err(Error::precondition(format!(
            "height gap must exceed 1/{divisor} for a level-{level} certificate"
        )));
    }
    let (k_u, k_v) = match (&u.cyl, &v.cyl) {
        (Cyl::Finite(a), Cyl::Finite(b)) => (a.clone(), b.clone()),
        _ => unreachable!("classified as split-height"),
    };
    let k_min = k_u.clone().min(k_v.clone());
    let k_max = k_u.clone().max(k_v.clone());
    let offset = &k_max - &k_min;
    let p = rec.hold_len();
    if k_max > rec.hold_start {
        return Err(Error::precondition(
            "pair starts beyond the level's hold block",
        ));
    }
    if offset >= p {
        return Err(Error::precondition(
            "cylinder offset exceeds the hold length",
        ));
    }
    // shared window of times with both heights frozen in this level
    let t_lo = &rec.hold_start - &k_min + BigInt::one();
    let t_hi = &rec.hold_end - &k_max;
    let window_len = &p - &offset;

    let u_at = u.advance_blockwise(s, &t_lo)?;
    let v_at = v.advance_blockwise(s, &t_lo)?;
    let h_u = u_at.height.clone();
    let h_v = v_at.height.clone();
    let div_rat = Rational::int(divisor);
    let dpsi_signed = (&h_u - &h_v) / &div_rat;
    let dpsi = dpsi_signed.abs();
    let base = Angle::new(u_at.angle.value() - v_at.angle.value());

    let angle_hits = arc_hits_from_start(&window_len, &Angle::zero(), &base, &dpsi_signed, delta)?;
    // the full metric additionally needs the height gap and radius gap
    // below delta; the radius gap decays monotonically
    let dh = (&h_u - &h_v).abs();
    let metric_hits = if &dh >= delta {
        BigInt::zero()
    } else if offset.is_zero() {
        angle_hits.clone()
    } else {
        let off_rat = Rational::from_bigint(offset.clone());
        let j0 = first_from_zero(&window_len, |j| {
            let a = Rational::from_bigint(&k_u + &t_lo + j);
            let b = Rational::from_bigint(&k_v + &t_lo + j);
            off_rat < delta * &(a * b)
        });
        arc_hits_in_range(&j0, &window_len, &Angle::zero(), &base, &dpsi_signed, delta)?
    };

    let p_rat = Rational::from_bigint(p.clone());
    let fraction = Rational::from_bigint(angle_hits.clone()) / &p_rat;
    let upper_fraction = Rational::from_bigint(&angle_hits + &offset) / &p_rat;
    let bound = Rational::int(3) * delta;
    let holds = upper_fraction < bound;
    let margin_ratio = &rec.maps.margin / &div_rat;
    let window_rat = Rational::from_bigint(window_len.clone());
    let prefix_total = Rational::from_bigint(t_hi.clone());
    let prefix_upper_fraction =
        (&prefix_total - &window_rat + Rational::from_bigint(metric_hits.clone())) / &prefix_total;
    Ok(HoldWindowBound {
        level,
        delta: delta.clone(),
        hold_len: p,
        window_start: t_lo,
        window_end: t_hi,
        hold_heights: (h_u, h_v),
        relative_rotation: dpsi.clone(),
        margin_ratio: margin_ratio.clone(),
        rotation_exceeds_margin: dpsi > margin_ratio,
        estimate_applicable: &window_rat * &dpsi > Rational::int(2),
        guaranteed: guaranteed_regime(delta, &dpsi, &window_len),
        saturated: delta >= &Rational::frac(1, 2),
        angle_hits,
        metric_hits,
        fraction,
        edge_indices: offset,
        upper_fraction,
        bound,
        holds,
        prefix_upper_fraction,
    })
}

/// Checks that stepping preserves the pair distance exactly for `steps`
/// steps. Holds for angle-only pairs by construction.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    pub distance: Rational,
    pub steps: u64,
    pub exact: bool,
}

pub fn isometry_certificate(
    s: &Schedule,
    u: &CylinderPoint,
    v: &CylinderPoint,
    steps: u64,
) -> Result<IsometryReport> {
    let d0 = u.dist(v);
    let mut cu = u.clone();
    let mut cv = v.clone();
    let mut exact = true;
    for _ in 0..steps {
        cu = cu.step(s)?;
        cv = cv.step(s)?;
        if cu.dist(&cv) != d0 {
            exact = false;
            break;
        }
    }
    Ok(IsometryReport {
        distance: d0,
        steps,
        exact,
    })
}

/// For a pair with exactly one limit point, compares the angle proximity
/// counts of `(inner, limit)` and `(inner, witness)` over a stepped
/// horizon. The witness never rotates, so both counts must agree exactly
/// at every `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct SubstitutionReport {
    pub witness: CylinderPoint,
    pub horizon: u64,
    pub deltas: Vec<Rational>,
    #[serde(with = "big_vec_serde")]
    pub counts_with_limit: Vec<BigInt>,
    #[serde(with = "big_vec_serde")]
    pub counts_with_witness: Vec<BigInt>,
    pub equal: bool,
}

pub fn substitution_angle_counts(
    s: &Schedule,
    u: &CylinderPoint,
    v: &CylinderPoint,
    horizon: u64,
    deltas: &[Rational],
) -> Result<SubstitutionReport> {
    let (inner, limit) = match (&u.cyl, &v.cyl) {
        (Cyl::Finite(_), Cyl::Limit) => (u, v),
        (Cyl::Limit, Cyl::Finite(_)) => (v, u),
        _ => {
            return Err(Error::domain(
                "substitution applies to pairs with exactly one limit point",
            ))
        }
    };
    let witness = match classify_pair_case(inner, limit)? {
        PairCase::LimitSubstitute { witness } => witness,
        _ => unreachable!(),
    };
    let mut counts_limit = vec![BigInt::zero(); deltas.len()];
    let mut counts_witness = vec![BigInt::zero(); deltas.len()];
    let mut cur = inner.clone();
    let mut wit = witness.clone();
    for _ in 0..horizon {
        cur = cur.step(s)?;
        wit = wit.step(s)?;
        let d_limit = cur.angle.dist(&limit.angle);
        let d_wit = cur.angle.dist(&wit.angle);
        for (i, delta) in deltas.iter().enumerate() {
            if &d_limit < delta {
                counts_limit[i] += 1;
            }
            if &d_wit < delta {
                counts_witness[i] += 1;
            }
        }
    }
    let equal = counts_limit == counts_witness;
    Ok(SubstitutionReport {
        witness,
        horizon,
        deltas: deltas.to_vec(),
        counts_with_limit: counts_limit,
        counts_with_witness: counts_witness,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Angle;

    fn point(k: u64, phi: (i64, i64), z: (i64, i64)) -> CylinderPoint {
        CylinderPoint::new(
            Cyl::finite(k),
            Angle::frac(phi.0, phi.1),
            Rational::frac(z.0, z.1),
        )
        .unwrap()
    }

    #[test]
    fn case_classification() {
        let a = point(2, (0, 1), (1, 3));
        let b = point(2, (1, 2), (1, 3));
        assert!(matches!(
            classify_pair_case(&a, &b).unwrap(),
            PairCase::AngleOnly { .. }
        ));

        let c = point(1, (0, 1), (1, 3));
        let d = point(1, (0, 2), (2, 3));
        match classify_pair_case(&c, &d).unwrap() {
            PairCase::HeightSplit { gap_level, .. } => {
                // |1/3 - 2/3| = 1/3, least L with 1/3 > 1/L is 4
                assert_eq!(gap_level, BigInt::from(4));
            }
            other => panic!("expected height split, got {other:?}"),
        }

        let e = point(1, (0, 1), (1, 3));
        let f = point(4, (1, 7), (2, 3));
        assert!(matches!(
            classify_pair_case(&e, &f).unwrap(),
            PairCase::OffsetHeightSplit { .. }
        ));

        let lim = CylinderPoint::new(Cyl::Limit, Angle::frac(2, 5), Rational::frac(1, 2)).unwrap();
        match classify_pair_case(&e, &lim).unwrap() {
            PairCase::LimitSubstitute { witness } => {
                assert_eq!(witness.cyl, Cyl::finite(1));
                assert_eq!(witness.angle, Angle::frac(2, 5));
                assert!(witness.height.is_zero());
            }
            other => panic!("expected substitution, got {other:?}"),
        }

        let lim2 = CylinderPoint::new(Cyl::Limit, Angle::frac(1, 5), Rational::zero()).unwrap();
        assert!(matches!(
            classify_pair_case(&lim, &lim2).unwrap(),
            PairCase::BothLimit
        ));

        let g = point(3, (0, 1), (1, 3));
        assert!(matches!(
            classify_pair_case(&e, &g).unwrap(),
            PairCase::RadiusOnly { .. }
        ));

        assert!(classify_pair_case(&a, &a).is_err());
    }

    #[test]
    fn angle_only_pairs_are_isometric() {
        let s = Schedule::build(4).unwrap();
        let a = point(1, (0, 1), (2, 7));
        let b = point(1, (2, 5), (2, 7));
        let rep = isometry_certificate(&s, &a, &b, 200).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.distance, Angle::zero().dist(&Angle::frac(2, 5)));
    }

    #[test]
    fn hold_window_bound_endpoint_heights() {
        // heights 1 and 0 are fixed by every map: Δψ = 1/l exactly
        let s = Schedule::build(4).unwrap();
        let u = point(1, (1, 3), (1, 1));
        let v = point(1, (0, 1), (0, 1));
        let b = phi_star_block_bound(&s, &u, &v, &Rational::frac(1, 10), 3).unwrap();
        assert_eq!(b.relative_rotation, Rational::frac(1, 3));
        assert_eq!(b.hold_heights, (Rational::one(), Rational::zero()));
        assert_eq!(b.edge_indices, BigInt::zero());
        assert!(b.estimate_applicable);
        // full metric never comes close: the height gap alone is 1
        assert_eq!(b.metric_hits, BigInt::zero());
        assert!(b.prefix_upper_fraction < Rational::one());
    }

    #[test]
    fn hold_window_bound_rejects_bad_inputs() {
        let s = Schedule::build(3).unwrap();
        let capped = Schedule::build_capped(3, 10).unwrap();
        let u = point(1, (1, 3), (1, 1));
        let v = point(1, (0, 1), (0, 1));
        assert!(matches!(
            phi_star_block_bound(&capped, &u, &v, &Rational::frac(1, 10), 2),
            Err(Error::CappedSchedule)
        ));
        // angle-only pair refused
        let a = point(1, (0, 1), (1, 3));
        let b = point(1, (1, 2), (1, 3));
        assert!(phi_star_block_bound(&s, &a, &b, &Rational::frac(1, 10), 2).is_err());
        // insufficient height gap for the level
        let c = point(1, (0, 1), (1, 2));
        let d = point(1, (1, 2), (1, 3));
        assert!(matches!(
            phi_star_block_bound(&s, &c, &d, &Rational::frac(1, 10), 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn saturated_delta_is_flagged() {
        let s = Schedule::build(4).unwrap();
        let u = point(1, (1, 3), (1, 1));
        let v = point(1, (0, 1), (0, 1));
        let b = phi_star_block_bound(&s, &u, &v, &Rational::frac(3, 5), 3).unwrap();
        assert!(b.saturated);
        assert_eq!(b.fraction, Rational::one());
        assert!(b.holds, "3δ > 1 makes the verdict vacuous");
    }

    #[test]
    fn substitution_counts_agree_exactly() {
        let s = Schedule::build(4).unwrap();
        let inner = point(2, (1, 7), (3, 8));
        let limit =
            CylinderPoint::new(Cyl::Limit, Angle::frac(2, 5), Rational::frac(1, 2)).unwrap();
        let rep = substitution_angle_counts(
            &s,
            &inner,
            &limit,
            300,
            &[Rational::frac(1, 10), Rational::frac(1, 4)],
        )
        .unwrap();
        assert!(rep.equal);
        assert!(rep.witness.height.is_zero());
    }
}
