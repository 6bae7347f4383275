//! Prefix distribution profiles in the two modes.
//!
//! The empirical walker steps both orbits and tallies `δ`-close times.
//! The block-exact walker advances a pair through the schedule block by
//! block: whenever both points have frozen heights it counts the close
//! times of the whole shared segment with two floor sums (relative angle
//! advances by a constant per step there), and it steps explicitly only
//! through the short forward/backward blocks. Both walkers count times
//! `1..=horizon` with strict `< δ` comparisons, so their outputs agree
//! exactly wherever both are computable.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::counting::arc_hits_in_range;
use crate::dynamics::{Cyl, CylinderPoint, FiberPoint, OrbitState};
use crate::error::{Error, Result};
use crate::rational::{Angle, Rational};
use crate::schedule::{Phase, Schedule};

use super::{DistributionProfile, PairState, ProfileMode};

/// Exact hit statistics over the shared hold-window times of one level.
#[derive(Debug, Clone)]
pub struct HoldStat {
    pub level: u32,
    /// Number of shared hold times examined.
    pub window_len: BigInt,
    /// Metric hits per requested delta, in input order.
    pub hits: Vec<BigInt>,
}

impl HoldStat {
    /// Every examined time of the window was a hit.
    pub fn saturated(&self, delta_index: usize) -> bool {
        self.window_len.is_positive() && self.hits[delta_index] == self.window_len
    }
}

fn sorted_checkpoints(raw: &[BigInt]) -> Result<Vec<BigInt>> {
    let mut cps = raw.to_vec();
    cps.sort();
    cps.dedup();
    if cps.is_empty() {
        return Err(Error::domain("at least one horizon checkpoint required"));
    }
    if !cps[0].is_positive() {
        return Err(Error::domain("profile horizons must be >= 1"));
    }
    Ok(cps)
}

/// Step-by-step profiles at each checkpoint. Works on any schedule whose
/// horizon covers the largest checkpoint.
pub fn empirical_profiles<S: OrbitState>(
    s: &Schedule,
    u: &S,
    v: &S,
    checkpoints: &[u64],
    deltas: &[Rational],
) -> Result<Vec<DistributionProfile>> {
    let raw: Vec<BigInt> = checkpoints.iter().map(|&c| BigInt::from(c)).collect();
    let cps = sorted_checkpoints(&raw)?;
    let last = cps.last().unwrap().clone();
    let mut counts = vec![BigInt::zero(); deltas.len()];
    let mut out = Vec::new();
    let mut cu = u.clone();
    let mut cv = v.clone();
    let mut next = 0usize;
    let mut t = BigInt::zero();
    while t < last {
        cu = cu.step(s)?;
        cv = cv.step(s)?;
        t += 1;
        let d = cu.dist(&cv);
        for (i, delta) in deltas.iter().enumerate() {
            if &d < delta {
                counts[i] += 1;
            }
        }
        while next < cps.len() && cps[next] == t {
            for (i, delta) in deltas.iter().enumerate() {
                out.push(DistributionProfile::prefix(
                    delta.clone(),
                    t.clone(),
                    counts[i].clone(),
                    ProfileMode::Empirical,
                ));
            }
            next += 1;
        }
    }
    Ok(out)
}

#[derive(Clone)]
enum Tracked {
    /// Limit-cylinder point: fully fixed.
    Fixed { angle: Angle, height: Rational, radius: Rational },
    /// Inner point that started on cylinder `k0`; at time `t` it sits on
    /// cylinder `k0 + t` with the stored angle and height.
    Moving { k0: BigInt, angle: Angle, height: Rational },
}

impl Tracked {
    fn from_cylinder(p: &CylinderPoint) -> Tracked {
        match &p.cyl {
            Cyl::Limit => Tracked::Fixed {
                angle: p.angle.clone(),
                height: p.height.clone(),
                radius: Rational::int(2),
            },
            Cyl::Finite(k) => Tracked::Moving {
                k0: k.clone(),
                angle: p.angle.clone(),
                height: p.height.clone(),
            },
        }
    }

    fn from_fiber(p: &FiberPoint) -> Tracked {
        match &p.cyl {
            Cyl::Limit => Tracked::Fixed {
                angle: Angle::zero(),
                height: p.height.clone(),
                radius: Rational::int(2),
            },
            Cyl::Finite(k) => Tracked::Moving {
                k0: k.clone(),
                angle: Angle::zero(),
                height: p.height.clone(),
            },
        }
    }

    fn height(&self) -> &Rational {
        match self {
            Tracked::Fixed { height, .. } | Tracked::Moving { height, .. } => height,
        }
    }

    fn angle(&self) -> &Angle {
        match self {
            Tracked::Fixed { angle, .. } | Tracked::Moving { angle, .. } => angle,
        }
    }

    fn radius_at(&self, t: &BigInt) -> Rational {
        match self {
            Tracked::Fixed { radius, .. } => radius.clone(),
            Tracked::Moving { k0, .. } => Cyl::Finite(k0 + t).radius(),
        }
    }
}

/// Block position of a moving point: phase, steps left in the block, the
/// rotation divisor and the level index.
struct BlockPos {
    phase: Phase,
    avail: BigInt,
    divisor: i64,
    level: u32,
}

/// Smallest `j` in `[1, seg]` satisfying the monotone predicate, or
/// `seg + 1` when none does.
fn first_true(seg: &BigInt, pred: impl Fn(&BigInt) -> bool) -> BigInt {
    let one = BigInt::one();
    if !pred(seg) {
        return seg + &one;
    }
    let mut lo = one.clone();
    let mut hi = seg.clone();
    while lo < hi {
        let mid = (&lo + &hi) / BigInt::from(2);
        if pred(&mid) {
            hi = mid;
        } else {
            lo = mid + &one;
        }
    }
    lo
}

struct Walker<'a> {
    s: &'a Schedule,
    with_angle: bool,
    t: BigInt,
    u: Tracked,
    v: Tracked,
    counts: Vec<BigInt>,
    hold: BTreeMap<u32, (BigInt, Vec<BigInt>)>,
}

impl<'a> Walker<'a> {
    fn block_pos(&self, p: &Tracked) -> Result<Option<BlockPos>> {
        match p {
            Tracked::Fixed { .. } => Ok(None),
            Tracked::Moving { k0, .. } => {
                let g = k0 + &self.t;
                let (rec, phase) = self.s.block_at(&g)?;
                let (_, hi) = rec.block_bounds(phase);
                Ok(Some(BlockPos {
                    phase,
                    avail: hi - g,
                    divisor: rec.rotation_divisor(),
                    level: rec.level(),
                }))
            }
        }
    }

    /// Radius-gap predicate `R(j) < delta` over the coming segment;
    /// the gap is nonincreasing in `j` in every case.
    fn radius_clear_from(&self, seg: &BigInt, delta: &Rational) -> BigInt {
        let t = &self.t;
        match (&self.u, &self.v) {
            (Tracked::Fixed { radius: ra, .. }, Tracked::Fixed { radius: rb, .. }) => {
                if &(ra - rb).abs() < delta {
                    BigInt::one()
                } else {
                    seg + BigInt::one()
                }
            }
            (Tracked::Fixed { .. }, Tracked::Moving { k0, .. })
            | (Tracked::Moving { k0, .. }, Tracked::Fixed { .. }) => {
                first_true(seg, |j| {
                    // 1/(k0 + t + j) < delta
                    Rational::one() < delta * &Rational::from_bigint(k0 + t + j)
                })
            }
            (Tracked::Moving { k0: ka, .. }, Tracked::Moving { k0: kb, .. }) => {
                let off = (ka - kb).abs();
                if off.is_zero() {
                    return BigInt::one();
                }
                let off = Rational::from_bigint(off);
                first_true(seg, |j| {
                    off < delta
                        * &(Rational::from_bigint(ka + t + j) * Rational::from_bigint(kb + t + j))
                })
            }
        }
    }

    /// One explicit step of both points.
    fn step_single(&mut self, deltas: &[Rational]) -> Result<()> {
        for point in [&mut self.u, &mut self.v] {
            if let Tracked::Moving { k0, angle, height } = point {
                let g = &*k0 + &self.t;
                let (rec, _, action) = self.s.map_at(&g)?;
                if self.with_angle {
                    let psi = &*height / &Rational::int(rec.rotation_divisor());
                    *angle = angle.rotate(&psi);
                }
                *height = action.apply(height)?;
            }
        }
        self.t += 1;
        let d = self.pair_dist();
        for (i, delta) in deltas.iter().enumerate() {
            if &d < delta {
                self.counts[i] += 1;
            }
        }
        Ok(())
    }

    fn pair_dist(&self) -> Rational {
        let radius = (self.u.radius_at(&self.t) - self.v.radius_at(&self.t)).abs();
        let height = (self.u.height() - self.v.height()).abs();
        let d = radius.max(height);
        if self.with_angle {
            d.max(self.u.angle().dist(self.v.angle()))
        } else {
            d
        }
    }

    /// Crosses `seg` times in closed form; both points have frozen
    /// heights, so the relative angle advances by a constant per step.
    fn hold_segment(
        &mut self,
        seg: &BigInt,
        pos_u: &Option<BlockPos>,
        pos_v: &Option<BlockPos>,
        deltas: &[Rational],
    ) -> Result<()> {
        let psi = |p: &Tracked, pos: &Option<BlockPos>| -> Rational {
            match (p, pos) {
                (Tracked::Moving { height, .. }, Some(b)) => height / &Rational::int(b.divisor),
                _ => Rational::zero(),
            }
        };
        let psi_u = psi(&self.u, pos_u);
        let psi_v = psi(&self.v, pos_v);
        let dpsi = &psi_u - &psi_v;
        let base = Angle::new(self.u.angle().value() - self.v.angle().value());
        let dh = (self.u.height() - self.v.height()).abs();

        let mut seg_hits = Vec::with_capacity(deltas.len());
        for delta in deltas {
            let hits = if &dh >= delta {
                BigInt::zero()
            } else {
                let j_min = self.radius_clear_from(seg, delta);
                if j_min > *seg {
                    BigInt::zero()
                } else if self.with_angle {
                    arc_hits_in_range(
                        &j_min,
                        &(seg + BigInt::one()),
                        &Angle::zero(),
                        &base,
                        &dpsi,
                        delta,
                    )?
                } else {
                    seg - &j_min + BigInt::one()
                }
            };
            seg_hits.push(hits);
        }
        for (i, hits) in seg_hits.iter().enumerate() {
            self.counts[i] += hits;
        }

        // saturation statistics where both points share one level's hold
        let stat_level = match (pos_u, pos_v, &self.u, &self.v) {
            (Some(a), Some(b), ..) if a.phase == Phase::Hold && b.phase == Phase::Hold => {
                (a.level == b.level).then_some(a.level)
            }
            (Some(a), None, ..) | (None, Some(a), ..) if a.phase == Phase::Hold => Some(a.level),
            _ => None,
        };
        if let Some(level) = stat_level {
            let entry = self
                .hold
                .entry(level)
                .or_insert_with(|| (BigInt::zero(), vec![BigInt::zero(); deltas.len()]));
            entry.0 += seg;
            for (i, hits) in seg_hits.iter().enumerate() {
                entry.1[i] += hits;
            }
        }

        if self.with_angle {
            let advance = |p: &mut Tracked, by: &Rational| {
                if let Tracked::Moving { angle, .. } = p {
                    *angle = angle.rotate(by);
                }
            };
            advance(&mut self.u, &(psi_u * Rational::from_bigint(seg.clone())));
            advance(&mut self.v, &(psi_v * Rational::from_bigint(seg.clone())));
        }
        self.t += seg;
        Ok(())
    }

    fn run(
        &mut self,
        checkpoints: &[BigInt],
        deltas: &[Rational],
    ) -> Result<Vec<DistributionProfile>> {
        let last = checkpoints.last().unwrap().clone();
        let mut out = Vec::new();
        let mut next = 0usize;
        while self.t < last {
            let pos_u = self.block_pos(&self.u)?;
            let pos_v = self.block_pos(&self.v)?;
            let stepping = [&pos_u, &pos_v].into_iter().flatten().any(|b| {
                matches!(b.phase, Phase::Forward | Phase::Backward)
            });
            if stepping {
                self.step_single(deltas)?;
            } else {
                let mut seg = &checkpoints[next] - &self.t;
                for pos in [&pos_u, &pos_v].into_iter().flatten() {
                    seg = seg.min(pos.avail.clone());
                }
                self.hold_segment(&seg, &pos_u, &pos_v, deltas)?;
            }
            while next < checkpoints.len() && checkpoints[next] == self.t {
                for (i, delta) in deltas.iter().enumerate() {
                    out.push(DistributionProfile::prefix(
                        delta.clone(),
                        self.t.clone(),
                        self.counts[i].clone(),
                        ProfileMode::BlockExact,
                    ));
                }
                next += 1;
            }
        }
        Ok(out)
    }
}

/// Closed-form profiles at each checkpoint, plus the per-level hold
/// statistics gathered along the way.
pub fn block_exact_profiles(
    s: &Schedule,
    pair: &PairState,
    checkpoints: &[BigInt],
    deltas: &[Rational],
) -> Result<(Vec<DistributionProfile>, Vec<HoldStat>)> {
    let cps = sorted_checkpoints(checkpoints)?;
    let (u, v, with_angle) = match pair {
        PairState::Cylinder { u, v } => (Tracked::from_cylinder(u), Tracked::from_cylinder(v), true),
        PairState::Fiber { u, v } => (Tracked::from_fiber(u), Tracked::from_fiber(v), false),
    };
    let mut walker = Walker {
        s,
        with_angle,
        t: BigInt::zero(),
        u,
        v,
        counts: vec![BigInt::zero(); deltas.len()],
        hold: BTreeMap::new(),
    };
    let profiles = walker.run(&cps, deltas)?;
    let stats = walker
        .hold
        .into_iter()
        .map(|(level, (window_len, hits))| HoldStat {
            level,
            window_len,
            hits,
        })
        .collect();
    Ok((profiles, stats))
}
