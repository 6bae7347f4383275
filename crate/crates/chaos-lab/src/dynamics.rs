//! States and exact iteration of the two systems: the cylinder system
//! (angle, height, cylinder index) and its fiber factor (height only).
//!
//! A point on cylinder `k` moves to cylinder `k + 1` each step; its height
//! passes through the schedule's map for index `k` and its angle advances
//! by the height-dependent rotation. The limit cylinder (and limit fiber)
//! is fixed pointwise. Projection discards the angle and commutes exactly
//! with stepping.
//!
//! [`advance_blockwise`](CylinderPoint::advance_blockwise) crosses hold
//! blocks in closed form, so exact states at astronomically distant
//! indices stay cheap; only the short forward/backward blocks are stepped.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{Angle, Rational};
use crate::schedule::{Phase, Schedule};

/// Cylinder (or fiber) index: a positive integer or the limit object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cyl {
    Finite(BigInt),
    Limit,
}

impl Cyl {
    pub fn finite(k: u64) -> Cyl {
        Cyl::Finite(BigInt::from(k))
    }

    /// Radius `2 - 1/k` of cylinder `k`, or `2` for the limit cylinder.
    pub fn radius(&self) -> Rational {
        match self {
            Cyl::Finite(k) => Rational::int(2) - Rational::from_bigint(k.clone()).recip().expect("k >= 1"),
            Cyl::Limit => Rational::int(2),
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, Cyl::Limit)
    }

    fn check(&self) -> Result<()> {
        if let Cyl::Finite(k) = self {
            if k < &BigInt::one() {
                return Err(Error::domain(format!("cylinder index {k} must be >= 1")));
            }
        }
        Ok(())
    }

    fn repr(&self) -> String {
        match self {
            Cyl::Finite(k) => k.to_string(),
            Cyl::Limit => "limit".to_string(),
        }
    }

    fn parse(s: &str) -> Result<Cyl> {
        if s == "limit" {
            return Ok(Cyl::Limit);
        }
        let k: BigInt = s
            .parse()
            .map_err(|_| Error::domain(format!("bad cylinder index {s:?}")))?;
        let c = Cyl::Finite(k);
        c.check()?;
        Ok(c)
    }
}

/// A point of the cylinder system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderPoint {
    pub cyl: Cyl,
    pub angle: Angle,
    pub height: Rational,
}

/// A point of the fiber factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPoint {
    pub cyl: Cyl,
    pub height: Rational,
}

fn check_height(z: &Rational) -> Result<()> {
    if z < &Rational::zero() || z > &Rational::one() {
        return Err(Error::domain(format!("height {z} outside [0, 1]")));
    }
    Ok(())
}

impl CylinderPoint {
    pub fn new(cyl: Cyl, angle: Angle, height: Rational) -> Result<Self> {
        cyl.check()?;
        check_height(&height)?;
        Ok(CylinderPoint { cyl, angle, height })
    }

    pub fn project(&self) -> FiberPoint {
        FiberPoint {
            cyl: self.cyl.clone(),
            height: self.height.clone(),
        }
    }
}

impl FiberPoint {
    pub fn new(cyl: Cyl, height: Rational) -> Result<Self> {
        cyl.check()?;
        check_height(&height)?;
        Ok(FiberPoint { cyl, height })
    }
}

/// Max-metric on the cylinder system: radius gap, height gap, circle
/// distance of the angles.
pub fn dist_cylinder(u: &CylinderPoint, v: &CylinderPoint) -> Rational {
    let radius = (u.cyl.radius() - v.cyl.radius()).abs();
    let height = (&u.height - &v.height).abs();
    let angle = u.angle.dist(&v.angle);
    radius.max(height).max(angle)
}

/// Max-metric on the fiber factor: radius gap and height gap.
pub fn dist_fiber(u: &FiberPoint, v: &FiberPoint) -> Rational {
    let radius = (u.cyl.radius() - v.cyl.radius()).abs();
    let height = (&u.height - &v.height).abs();
    radius.max(height)
}

/// Common stepping interface for orbits of either system.
pub trait OrbitState: Clone {
    fn step(&self, s: &Schedule) -> Result<Self>;
    fn dist(&self, other: &Self) -> Rational;
}

impl OrbitState for CylinderPoint {
    fn step(&self, s: &Schedule) -> Result<Self> {
        match &self.cyl {
            Cyl::Limit => Ok(self.clone()),
            Cyl::Finite(k) => {
                let psi = s.rotation_at(k, &self.height)?;
                let (_, _, action) = s.map_at(k)?;
                Ok(CylinderPoint {
                    cyl: Cyl::Finite(k + BigInt::one()),
                    angle: self.angle.rotate(&psi),
                    height: action.apply(&self.height)?,
                })
            }
        }
    }

    fn dist(&self, other: &Self) -> Rational {
        dist_cylinder(self, other)
    }
}

impl OrbitState for FiberPoint {
    fn step(&self, s: &Schedule) -> Result<Self> {
        match &self.cyl {
            Cyl::Limit => Ok(self.clone()),
            Cyl::Finite(k) => {
                let (_, _, action) = s.map_at(k)?;
                Ok(FiberPoint {
                    cyl: Cyl::Finite(k + BigInt::one()),
                    height: action.apply(&self.height)?,
                })
            }
        }
    }

    fn dist(&self, other: &Self) -> Rational {
        dist_fiber(self, other)
    }
}

/// Applies `step` `n` times, invoking `visitor(i, state_i)` after the
/// `i`-th step, and returns the final state. Step-by-step iteration is
/// meant for capped schedules and moderate horizons; long hold blocks are
/// crossed in closed form by `advance_blockwise`.
pub fn orbit<S: OrbitState>(
    s: &Schedule,
    start: &S,
    n: u64,
    mut visitor: impl FnMut(u64, &S),
) -> Result<S> {
    let mut cur = start.clone();
    for i in 1..=n {
        cur = cur.step(s)?;
        visitor(i, &cur);
    }
    Ok(cur)
}

/// True iff projection and stepping commute exactly along the first `n`
/// steps from `p`.
pub fn semiconjugacy_check(s: &Schedule, p: &CylinderPoint, n: u64) -> Result<bool> {
    let mut upstairs = p.clone();
    let mut downstairs = p.project();
    for _ in 0..n {
        upstairs = upstairs.step(s)?;
        downstairs = downstairs.step(s)?;
        if upstairs.project() != downstairs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn take_as_u64(take: &BigInt) -> u64 {
    take.to_u64().expect("forward/backward blocks are short")
}

impl CylinderPoint {
    /// Exact state after `steps` applications, crossing hold blocks in
    /// closed form (heights frozen, constant rotation per step).
    pub fn advance_blockwise(&self, s: &Schedule, steps: &BigInt) -> Result<CylinderPoint> {
        if steps.is_negative() {
            return Err(Error::domain("step count must be nonnegative"));
        }
        let mut k = match &self.cyl {
            Cyl::Limit => return Ok(self.clone()),
            Cyl::Finite(k) => k.clone(),
        };
        let mut angle = self.angle.clone();
        let mut z = self.height.clone();
        let mut remaining = steps.clone();
        while remaining.is_positive() {
            let (rec, phase) = s.block_at(&k)?;
            let (_, hi) = rec.block_bounds(phase);
            let take = (hi - &k).min(remaining.clone());
            match phase {
                Phase::Hold => {
                    let psi = &z / &Rational::int(rec.rotation_divisor());
                    angle = angle.rotate(&(psi * Rational::from_bigint(take.clone())));
                    k += &take;
                }
                Phase::Forward | Phase::Backward => {
                    let map = match phase {
                        Phase::Forward => &rec.maps.forward,
                        _ => &rec.maps.backward,
                    };
                    for _ in 0..take_as_u64(&take) {
                        let psi = &z / &Rational::int(rec.rotation_divisor());
                        angle = angle.rotate(&psi);
                        z = map.apply(&z)?;
                        k += 1;
                    }
                }
            }
            remaining -= &take;
        }
        Ok(CylinderPoint {
            cyl: Cyl::Finite(k),
            angle,
            height: z,
        })
    }

    /// Exact state when the point's schedule index reaches `index`.
    pub fn state_at_index(&self, s: &Schedule, index: &BigInt) -> Result<CylinderPoint> {
        match &self.cyl {
            Cyl::Limit => Ok(self.clone()),
            Cyl::Finite(k) => {
                if index < k {
                    return Err(Error::domain(format!(
                        "cannot rewind from index {k} to {index}"
                    )));
                }
                self.advance_blockwise(s, &(index - k))
            }
        }
    }
}

impl FiberPoint {
    /// Exact state after `steps` applications; hold blocks are skipped
    /// outright since heights are frozen there.
    pub fn advance_blockwise(&self, s: &Schedule, steps: &BigInt) -> Result<FiberPoint> {
        if steps.is_negative() {
            return Err(Error::domain("step count must be nonnegative"));
        }
        let mut k = match &self.cyl {
            Cyl::Limit => return Ok(self.clone()),
            Cyl::Finite(k) => k.clone(),
        };
        let mut z = self.height.clone();
        let mut remaining = steps.clone();
        while remaining.is_positive() {
            let (rec, phase) = s.block_at(&k)?;
            let (_, hi) = rec.block_bounds(phase);
            let take = (hi - &k).min(remaining.clone());
            match phase {
                Phase::Hold => {
                    k += &take;
                }
                Phase::Forward | Phase::Backward => {
                    let map = match phase {
                        Phase::Forward => &rec.maps.forward,
                        _ => &rec.maps.backward,
                    };
                    for _ in 0..take_as_u64(&take) {
                        z = map.apply(&z)?;
                        k += 1;
                    }
                }
            }
            remaining -= &take;
        }
        Ok(FiberPoint {
            cyl: Cyl::Finite(k),
            height: z,
        })
    }

    pub fn state_at_index(&self, s: &Schedule, index: &BigInt) -> Result<FiberPoint> {
        match &self.cyl {
            Cyl::Limit => Ok(self.clone()),
            Cyl::Finite(k) => {
                if index < k {
                    return Err(Error::domain(format!(
                        "cannot rewind from index {k} to {index}"
                    )));
                }
                self.advance_blockwise(s, &(index - k))
            }
        }
    }
}

// --- serde: points read and write as {"k":"1"|"limit","phi":"1/3","z":"2/5"}

#[derive(Serialize, Deserialize)]
struct CylinderRepr {
    k: String,
    phi: Angle,
    z: Rational,
}

#[derive(Serialize, Deserialize)]
struct FiberRepr {
    k: String,
    z: Rational,
}

impl Serialize for CylinderPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        CylinderRepr {
            k: self.cyl.repr(),
            phi: self.angle.clone(),
            z: self.height.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CylinderPoint {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = CylinderRepr::deserialize(de)?;
        let cyl = Cyl::parse(&repr.k).map_err(serde::de::Error::custom)?;
        CylinderPoint::new(cyl, repr.phi, repr.z).map_err(serde::de::Error::custom)
    }
}

impl Serialize for FiberPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        FiberRepr {
            k: self.cyl.repr(),
            z: self.height.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FiberPoint {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = FiberRepr::deserialize(de)?;
        let cyl = Cyl::parse(&repr.k).map_err(serde::de::Error::custom)?;
        FiberPoint::new(cyl, repr.z).map_err(serde::de::Error::custom)
    }
}
