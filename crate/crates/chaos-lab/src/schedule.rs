//! The block schedule: which interval map and which rotation divisor act
//! at each time index.
//!
//! Time is tiled by levels. Level `l` occupies `[m1, m4)` and splits into
//! a forward block `[m1, m2)` applying the level map, a hold block
//! `[m2, m3)` applying the identity (heights frozen), and a backward block
//! `[m3, m4)` applying the inverse map. Block lengths satisfy
//! `m2 - m1 = m4 - m3 = n_l` and the hold length exceeds `2l / eps_l`.
//! Hold lengths explode quickly; a capped build mode clamps them for
//! step-by-step smoke runs, and such schedules are flagged so certificate
//! emitters can refuse them.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval_map::{LevelMaps, PlMap};
use crate::rational::Rational;

/// Serialize a `BigInt` as a decimal string.
pub mod big_serde {
    use num_bigint::BigInt;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(D::Error::custom)
    }
}

/// Serialize a `Vec<BigInt>` as decimal strings.
pub mod big_vec_serde {
    use num_bigint::BigInt;
    use serde::{ser::SerializeSeq, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

/// Which of the three per-level blocks a time index falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// `[m1, m2)`: the level map is applied each step.
    Forward,
    /// `[m2, m3)`: identity on heights; rotation only.
    Hold,
    /// `[m3, m4)`: the inverse map is applied each step.
    Backward,
}

/// One level of the schedule with its absolute block boundaries.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub maps: LevelMaps,
    /// `m1`: first index of the forward block.
    pub start: BigInt,
    /// `m2`: first index of the hold block.
    pub hold_start: BigInt,
    /// `m3`: first index of the backward block.
    pub hold_end: BigInt,
    /// `m4`: one past the last index of the level.
    pub end: BigInt,
}

impl LevelRecord {
    pub fn level(&self) -> u32 {
        self.maps.level
    }

    /// Hold block length `m3 - m2`.
    pub fn hold_len(&self) -> BigInt {
        &self.hold_end - &self.hold_start
    }

    /// Divisor of the rotation angle on this level: heights rotate by
    /// `z / max(l, 1)`.
    pub fn rotation_divisor(&self) -> i64 {
        i64::from(self.maps.level.max(1))
    }

    /// The phase of an index already known to lie in `[start, end)`.
    fn phase_of(&self, k: &BigInt) -> Phase {
        if k < &self.hold_start {
            Phase::Forward
        } else if k < &self.hold_end {
            Phase::Hold
        } else {
            Phase::Backward
        }
    }

    /// `[lo, hi)` bounds of the block containing `k`.
    pub fn block_bounds(&self, phase: Phase) -> (&BigInt, &BigInt) {
        match phase {
            Phase::Forward => (&self.start, &self.hold_start),
            Phase::Hold => (&self.hold_start, &self.hold_end),
            Phase::Backward => (&self.hold_end, &self.end),
        }
    }
}

/// The map acting at a single time index.
#[derive(Debug, Clone, Copy)]
pub enum MapAction<'a> {
    Identity,
    Apply(&'a PlMap),
}

impl MapAction<'_> {
    pub fn apply(&self, z: &Rational) -> Result<Rational> {
        match self {
            MapAction::Identity => Ok(z.clone()),
            MapAction::Apply(map) => map.apply(z),
        }
    }
}

/// The `i`-th reduced fraction in `(0, 1)`, ordered by denominator
/// `q = 2, 3, ...` and then by numerator. `i` is 1-based: the sequence
/// starts `1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...`.
pub fn rational_enumeration(i: u64) -> Result<Rational> {
    if i == 0 {
        return Err(Error::domain("enumeration index starts at 1"));
    }
    let mut remaining = i;
    let mut q: u64 = 2;
    loop {
        for p in 1..q {
            if num_integer::gcd(p, q) == 1 {
                remaining -= 1;
                if remaining == 0 {
                    return Ok(Rational::frac(p as i64, q as i64));
                }
            }
        }
        q += 1;
    }
}

/// The built schedule: an immutable list of levels tiling `[1, horizon)`.
#[derive(Debug, Clone)]
pub struct Schedule {
    levels: Vec<LevelRecord>,
    cap: Option<u64>,
}

impl Schedule {
    /// Builds `level_count` levels with the exact hold lengths.
    pub fn build(level_count: u32) -> Result<Schedule> {
        Schedule::build_inner(level_count, None)
    }

    /// Builds with every hold length clamped to `cap`. The result is
    /// flagged and refused by certificate emitters.
    pub fn build_capped(level_count: u32, cap: u64) -> Result<Schedule> {
        if cap == 0 {
            return Err(Error::domain("hold cap must be at least 1"));
        }
        Schedule::build_inner(level_count, Some(cap))
    }

    fn build_inner(level_count: u32, cap: Option<u64>) -> Result<Schedule> {
        if level_count == 0 {
            return Err(Error::domain("schedule needs at least one level"));
        }
        let mut levels = Vec::with_capacity(level_count as usize);
        let mut next_start = BigInt::one();
        for l in 0..level_count {
            let r = rational_enumeration(u64::from(l) + 1)?;
            let maps = LevelMaps::build(l, &r)?;
            let start = next_start.clone();
            let hold_start = &start + BigInt::from(maps.escape_time);
            let mut gap = if l == 0 {
                BigInt::from(3).max(hold_start.clone())
            } else {
                // gap > 2l/eps, and at least (l+1)*m2 to force m2/m3 -> 0
                let margin_floor =
                    (Rational::int(2 * i64::from(l)) / &maps.margin).floor_int() + BigInt::one();
                margin_floor.max(BigInt::from(l + 1) * &hold_start)
            };
            if let Some(c) = cap {
                gap = gap.min(BigInt::from(c));
            }
            let hold_end = &hold_start + gap;
            let end = &hold_end + BigInt::from(maps.escape_time);
            next_start = end.clone();
            levels.push(LevelRecord {
                maps,
                start,
                hold_start,
                hold_end,
                end,
            });
        }
        let schedule = Schedule { levels, cap };
        schedule.verify()?;
        Ok(schedule)
    }

    /// Exhaustive constraint check; loading a file runs the same test.
    fn verify(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::constraint("schedule has no levels"));
        }
        let mut expected_start = BigInt::one();
        for (idx, rec) in self.levels.iter().enumerate() {
            if rec.level() != idx as u32 {
                return Err(Error::constraint(format!(
                    "level indices must be contiguous from 0, found {} at position {idx}",
                    rec.level()
                )));
            }
            if rec.start != expected_start {
                return Err(Error::constraint(format!(
                    "level {} starts at {} but the previous level ends at {expected_start}",
                    rec.level(),
                    rec.start
                )));
            }
            let n = BigInt::from(rec.maps.escape_time);
            if &rec.hold_start - &rec.start != n || &rec.end - &rec.hold_end != n {
                return Err(Error::constraint(format!(
                    "level {}: forward/backward lengths must both equal the escape time",
                    rec.level()
                )));
            }
            if rec.hold_end < rec.hold_start {
                return Err(Error::constraint("negative hold length"));
            }
            if self.cap.is_none() && rec.level() >= 1 {
                // hold length strictly greater than 2l/eps, compared exactly
                let need = Rational::int(2 * i64::from(rec.level())) / &rec.maps.margin;
                if Rational::from_bigint(rec.hold_len()) <= need {
                    return Err(Error::constraint(format!(
                        "level {}: hold length {} does not exceed 2l/eps = {need}",
                        rec.level(),
                        rec.hold_len()
                    )));
                }
            }
            expected_start = rec.end.clone();
        }
        Ok(())
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn level(&self, l: u32) -> Option<&LevelRecord> {
        self.levels.get(l as usize)
    }

    pub fn level_count(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn is_capped(&self) -> bool {
        self.cap.is_some()
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    /// One past the largest resolvable index (the last level's `m4`).
    pub fn horizon(&self) -> &BigInt {
        &self.levels.last().expect("nonempty").end
    }

    /// The level and phase containing index `k`, for `1 <= k < horizon`.
    pub fn block_at(&self, k: &BigInt) -> Result<(&LevelRecord, Phase)> {
        if k < &BigInt::one() {
            return Err(Error::domain(format!("schedule index {k} must be >= 1")));
        }
        if k >= self.horizon() {
            return Err(Error::Horizon {
                index: k.clone(),
                horizon: self.horizon().clone(),
            });
        }
        let pos = self.levels.partition_point(|rec| rec.start <= *k) - 1;
        let rec = &self.levels[pos];
        Ok((rec, rec.phase_of(k)))
    }

    /// The height map acting at index `k`.
    pub fn map_at(&self, k: &BigInt) -> Result<(&LevelRecord, Phase, MapAction<'_>)> {
        let (rec, phase) = self.block_at(k)?;
        let action = match phase {
            Phase::Forward => MapAction::Apply(&rec.maps.forward),
            Phase::Hold => MapAction::Identity,
            Phase::Backward => MapAction::Apply(&rec.maps.backward),
        };
        Ok((rec, phase, action))
    }

    /// The rotation angle applied at index `k` to a point of height `z`:
    /// `z` itself on level 0 and `z / l` on level `l >= 1`.
    pub fn rotation_at(&self, k: &BigInt, z: &Rational) -> Result<Rational> {
        if z < &Rational::zero() || z > &Rational::one() {
            return Err(Error::domain(format!("height {z} outside [0, 1]")));
        }
        let (rec, _) = self.block_at(k)?;
        Ok(z / &Rational::int(rec.rotation_divisor()))
    }

    /// Canonical JSON text of the schedule file.
    pub fn to_json(&self) -> String {
        let file = ScheduleFile::from(self);
        serde_json::to_string(&file).expect("schedule serialization cannot fail")
    }

    /// Parses and fully validates a schedule file.
    pub fn from_json(text: &str) -> Result<Schedule> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        file.into_schedule()
    }

    /// SHA-256 of the canonical JSON, used to stamp reports.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct LevelFileRecord {
    l: u32,
    r: Rational,
    alpha: Rational,
    n: String,
    eps: Rational,
    m: [String; 4],
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    levels: Vec<LevelFileRecord>,
    truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap: Option<u64>,
}

impl From<&Schedule> for ScheduleFile {
    fn from(s: &Schedule) -> Self {
        ScheduleFile {
            levels: s
                .levels
                .iter()
                .map(|rec| LevelFileRecord {
                    l: rec.level(),
                    r: rec.maps.repeller.clone(),
                    alpha: rec.maps.deviation.clone(),
                    n: rec.maps.escape_time.to_string(),
                    eps: rec.maps.margin.clone(),
                    m: [
                        rec.start.to_string(),
                        rec.hold_start.to_string(),
                        rec.hold_end.to_string(),
                        rec.end.to_string(),
                    ],
                })
                .collect(),
            truncated: s.cap.is_some(),
            cap: s.cap,
        }
    }
}

impl ScheduleFile {
    fn into_schedule(self) -> Result<Schedule> {
        if self.truncated && self.cap.is_none() {
            return Err(Error::constraint(
                "truncated schedule file must record its cap",
            ));
        }
        if !self.truncated && self.cap.is_some() {
            return Err(Error::constraint("cap recorded on an untruncated file"));
        }
        let parse_big = |s: &str| -> Result<BigInt> {
            s.parse()
                .map_err(|_| Error::constraint(format!("bad integer literal {s:?}")))
        };
        let mut levels = Vec::with_capacity(self.levels.len());
        for rec in &self.levels {
            let maps = LevelMaps::build(rec.l, &rec.r)?;
            if maps.deviation != rec.alpha {
                return Err(Error::constraint(format!(
                    "level {}: recorded alpha {} does not match the derived value {}",
                    rec.l, rec.alpha, maps.deviation
                )));
            }
            if maps.escape_time.to_string() != rec.n {
                return Err(Error::constraint(format!(
                    "level {}: recorded escape time {} does not match the derived value {}",
                    rec.l, rec.n, maps.escape_time
                )));
            }
            if maps.margin != rec.eps {
                return Err(Error::constraint(format!(
                    "level {}: recorded margin does not match the derived value",
                    rec.l
                )));
            }
            levels.push(LevelRecord {
                maps,
                start: parse_big(&rec.m[0])?,
                hold_start: parse_big(&rec.m[1])?,
                hold_end: parse_big(&rec.m[2])?,
                end: parse_big(&rec.m[3])?,
            });
        }
        let schedule = Schedule {
            levels,
            cap: self.cap,
        };
        schedule.verify()?;
        Ok(schedule)
    }
}
