//! Strictly increasing piecewise-linear self-maps of `[0, 1]` and the
//! per-level map family used by the schedule.
//!
//! Each level `l` carries a map with exactly three fixed points `0`,
//! `r`, `1` that pushes heights away from the interior fixed point toward
//! the endpoints, together with its exact inverse, the escape time needed
//! to drive the outer intervals into the endpoint neighborhoods, and the
//! resulting margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Continuous, strictly increasing piecewise-linear bijection of `[0, 1]`
/// given by its breakpoints. First breakpoint is `(0, 0)`, last is `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlMap {
    points: Vec<(Rational, Rational)>,
}

impl PlMap {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("piecewise-linear map needs >= 2 breakpoints"));
        }
        let zero = Rational::zero();
        let one = Rational::one();
        if points[0] != (zero.clone(), zero) || points[points.len() - 1] != (one.clone(), one) {
            return Err(Error::domain(
                "breakpoints must start at (0,0) and end at (1,1)",
            ));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(Error::domain(
                    "breakpoint coordinates must be strictly increasing",
                ));
            }
        }
        Ok(PlMap { points })
    }

    pub fn identity() -> Self {
        PlMap {
            points: vec![
                (Rational::zero(), Rational::zero()),
                (Rational::one(), Rational::one()),
            ],
        }
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    /// Exact piecewise-linear interpolation at `x` in `[0, 1]`.
    pub fn apply(&self, x: &Rational) -> Result<Rational> {
        if x < &Rational::zero() || x > &Rational::one() {
            return Err(Error::domain(format!("map argument {x} outside [0, 1]")));
        }
        // index of the last breakpoint with x0 <= x
        let idx = self.points.partition_point(|(x0, _)| x0 <= x);
        if idx == self.points.len() {
            // x == 1
            return Ok(self.points[idx - 1].1.clone());
        }
        let (x0, y0) = &self.points[idx - 1];
        if x == x0 {
            return Ok(y0.clone());
        }
        let (x1, y1) = &self.points[idx];
        Ok(y0 + (x - x0) * (y1 - y0) / (x1 - x0))
    }

    /// `n`-fold application. Exact; returns `x` unchanged for `n = 0` or
    /// when `x` is a fixed point.
    pub fn iterate(&self, x: &Rational, n: u64) -> Result<Rational> {
        let mut cur = x.clone();
        for _ in 0..n {
            let next = self.apply(&cur)?;
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// The exact inverse, obtained by swapping breakpoint coordinates.
    pub fn inverse(&self) -> PlMap {
        PlMap {
            points: self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
        }
    }

    /// Sup-norm distance from the identity. For a piecewise-linear map the
    /// difference from the identity is itself piecewise linear, so the
    /// maximum is attained at a breakpoint.
    pub fn deviation(&self) -> Rational {
        self.points
            .iter()
            .map(|(x, y)| (y - x).abs())
            .max()
            .expect("at least two breakpoints")
    }
}

/// Per-level map data: the forward map, its inverse, the sup-norm
/// deviation, the escape time and the margin. Serializes with the escape
/// time as a decimal string, matching the schedule file convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelMaps {
    pub level: u32,
    /// The interior repelling fixed point `r` of the forward map.
    pub repeller: Rational,
    /// Sup-norm deviation from the identity, `min(r, 1-r)/(2(l+2))`.
    pub deviation: Rational,
    pub forward: PlMap,
    pub backward: PlMap,
    /// Smallest iterate count driving `[0, r - 1/l]` below `1/l` and
    /// `[r + 1/l, 1]` above `1 - 1/l` (vacuous sides skipped).
    #[serde(with = "count_string")]
    pub escape_time: u64,
    /// `min(h^n(1/l), 1 - h^n(1 - 1/l))` for the escape time `n`.
    pub margin: Rational,
}

mod count_string {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// Threshold divisor for level `l`: level 0 borrows the level-1 value so
/// that `1/l` stays defined.
fn threshold_divisor(level: u32) -> i64 {
    i64::from(level.max(1))
}

/// The symmetric five-breakpoint map for level `l` with interior fixed
/// point `r`: breakpoints `(0,0)`, `(r/2, r/2 - a)`, `(r, r)`,
/// `((1+r)/2, (1+r)/2 + a)`, `(1,1)` with `a = min(r, 1-r)/(2(l+2))`.
pub fn make_h(level: u32, r: &Rational) -> Result<(PlMap, PlMap, Rational)> {
    if r <= &Rational::zero() || r >= &Rational::one() {
        return Err(Error::domain(format!(
            "interior fixed point {r} must lie strictly inside (0, 1)"
        )));
    }
    let one = Rational::one();
    let alpha = (r.clone().min(&one - r)) / Rational::int(2 * (i64::from(level) + 2));
    let two = Rational::int(2);
    let lower_x = r / &two;
    let upper_x = (&one + r) / &two;
    let forward = PlMap::new(vec![
        (Rational::zero(), Rational::zero()),
        (lower_x.clone(), &lower_x - &alpha),
        (r.clone(), r.clone()),
        (upper_x.clone(), &upper_x + &alpha),
        (one.clone(), one),
    ])?;
    let backward = forward.inverse();
    Ok((forward, backward, alpha))
}

/// Smallest `n >= 0` such that `h^n(r - 1/l) < 1/l` and
/// `h^n(r + 1/l) > 1 - 1/l`, each condition skipped when its endpoint
/// falls outside `(0, 1)`. Returns 1 when both are vacuous.
pub fn escape_time(forward: &PlMap, level: u32, r: &Rational) -> Result<u64> {
    let div = threshold_divisor(level);
    let inv = Rational::frac(1, div);
    let lo_start = r - &inv;
    let hi_start = r + &inv;
    let lo_active = lo_start.is_positive();
    let hi_active = hi_start < Rational::one();
    if !lo_active && !hi_active {
        return Ok(1);
    }
    let lo_target = inv.clone();
    let hi_target = Rational::one() - &inv;
    let mut lo = lo_start;
    let mut hi = hi_start;
    let mut n: u64 = 0;
    loop {
        let lo_ok = !lo_active || lo < lo_target;
        let hi_ok = !hi_active || hi > hi_target;
        if lo_ok && hi_ok {
            return Ok(n);
        }
        if lo_active {
            lo = forward.apply(&lo)?;
        }
        if hi_active {
            hi = forward.apply(&hi)?;
        }
        n += 1;
        if n > 1_000_000 {
            return Err(Error::constraint(
                "escape time did not converge within 10^6 iterations",
            ));
        }
    }
}

/// `min(h^n(1/l), 1 - h^n(1 - 1/l))`, always in `(0, 1]`.
pub fn escape_margin(forward: &PlMap, level: u32, escape_time: u64) -> Result<Rational> {
    let div = threshold_divisor(level);
    let inv = Rational::frac(1, div);
    let low = forward.iterate(&inv, escape_time)?;
    let high = forward.iterate(&(Rational::one() - &inv), escape_time)?;
    Ok(low.min(Rational::one() - high))
}

impl LevelMaps {
    /// Builds the complete level data for level `l` with interior fixed
    /// point `r`.
    pub fn build(level: u32, r: &Rational) -> Result<LevelMaps> {
        let (forward, backward, deviation) = make_h(level, r)?;
        let n = escape_time(&forward, level, r)?;
        let margin = escape_margin(&forward, level, n)?;
        Ok(LevelMaps {
            level,
            repeller: r.clone(),
            deviation,
            forward,
            backward,
            escape_time: n,
            margin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_is_identity() {
        let id = PlMap::identity();
        let x = Rational::frac(2, 5);
        assert_eq!(id.apply(&x).unwrap(), x);
        assert_eq!(id.apply(&Rational::zero()).unwrap(), Rational::zero());
        assert_eq!(id.apply(&Rational::one()).unwrap(), Rational::one());
        assert!(id.apply(&Rational::frac(3, 2)).is_err());
    }

    #[test]
    fn level_one_half_alpha_and_values() {
        // level 1, r = 1/2: alpha = (1/2)/(2*3) = 1/12
        let (h, h_inv, alpha) = make_h(1, &Rational::frac(1, 2)).unwrap();
        assert_eq!(alpha, Rational::frac(1, 12));
        // the lower breakpoint: h(1/4) = 1/4 - 1/12 = 1/6
        assert_eq!(h.apply(&Rational::frac(1, 4)).unwrap(), Rational::frac(1, 6));
        // fixed points
        assert_eq!(h.apply(&Rational::frac(1, 2)).unwrap(), Rational::frac(1, 2));
        assert_eq!(h.apply(&Rational::zero()).unwrap(), Rational::zero());
        // inverse identity at an off-breakpoint rational
        let x = Rational::frac(1, 7);
        assert_eq!(h_inv.apply(&h.apply(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn pushes_away_from_interior_fixed_point() {
        let r = Rational::frac(2, 7);
        let (h, _, _) = make_h(3, &r).unwrap();
        for k in 1..20 {
            let x = &r * &Rational::frac(k, 20);
            if x.is_positive() && x < r {
                assert!(h.apply(&x).unwrap() < x, "must move down below r");
            }
            let y = &r + (Rational::one() - &r) * Rational::frac(k, 20);
            if y < Rational::one() {
                assert!(h.apply(&y).unwrap() > y, "must move up above r");
            }
        }
    }

    #[test]
    fn deviation_is_attained_and_decreasing_in_level() {
        let r = Rational::frac(1, 2);
        let mut last: Option<Rational> = None;
        for level in 0..8 {
            let (h, _, alpha) = make_h(level, &r).unwrap();
            assert_eq!(h.deviation(), alpha);
            if let Some(prev) = last {
                assert!(alpha < prev);
            }
            last = Some(alpha);
        }
    }

    #[test]
    fn escape_time_vacuous_cases() {
        // level 0 (thresholds of level 1 are r ± 1, both outside): n = 1
        let r = Rational::frac(1, 2);
        let (h, _, _) = make_h(0, &r).unwrap();
        assert_eq!(escape_time(&h, 0, &r).unwrap(), 1);
        // level 2 with r = 1/2: endpoints land exactly on 0 and 1, vacuous
        let (h2, _, _) = make_h(2, &r).unwrap();
        assert_eq!(escape_time(&h2, 2, &r).unwrap(), 1);
    }

    #[test]
    fn escape_time_zero_when_endpoints_already_inside() {
        // level 3, r = 1/2: endpoints 1/6 and 5/6 already sit inside the
        // endpoint neighborhoods of width 1/3
        let r = Rational::frac(1, 2);
        let (h, _, _) = make_h(3, &r).unwrap();
        assert_eq!(escape_time(&h, 3, &r).unwrap(), 0);
        assert!(Rational::frac(1, 6) < Rational::frac(1, 3));
        assert!(Rational::frac(5, 6) > Rational::frac(2, 3));
    }

    #[test]
    fn escape_time_is_minimal_and_satisfies_inclusions() {
        // level 4, r = 3/4: the lower endpoint 1/2 must be pushed below
        // 1/4 (the upper side is vacuous)
        let r = Rational::frac(3, 4);
        let (h, _, _) = make_h(4, &r).unwrap();
        let n = escape_time(&h, 4, &r).unwrap();
        assert!(n >= 1);
        let quarter = Rational::frac(1, 4);
        let half = Rational::frac(1, 2);
        assert!(h.iterate(&half, n).unwrap() < quarter);
        // minimality: fails one iterate earlier
        assert!(h.iterate(&half, n - 1).unwrap() >= quarter);
    }

    #[test]
    fn margin_examples() {
        // level 1: endpoints are fixed, so the margin is exactly 1
        let r = Rational::frac(1, 2);
        let (h, _, _) = make_h(1, &r).unwrap();
        let n = escape_time(&h, 1, &r).unwrap();
        assert_eq!(escape_margin(&h, 1, n).unwrap(), Rational::one());

        // level 2 with r = 1/3, computed against direct iteration
        let r = Rational::frac(1, 3);
        let maps = LevelMaps::build(2, &r).unwrap();
        let half = Rational::frac(1, 2);
        let lo = maps.forward.iterate(&half, maps.escape_time).unwrap();
        let hi = maps.forward.iterate(&half, maps.escape_time).unwrap();
        let expect = lo.min(Rational::one() - hi);
        assert_eq!(maps.margin, expect);
        assert!(maps.margin.is_positive());
    }

    #[test]
    fn monotone_descent_below_repeller() {
        let maps = LevelMaps::build(1, &Rational::frac(1, 2)).unwrap();
        let x = Rational::frac(1, 4);
        let once = maps.forward.iterate(&x, 1).unwrap();
        assert_eq!(once, maps.forward.apply(&x).unwrap());
        let many = maps.forward.iterate(&x, 6).unwrap();
        assert!(many < once && many < Rational::one());
        // iterates of the repeller stay put
        assert_eq!(
            maps.forward.iterate(&maps.repeller, 1000).unwrap(),
            maps.repeller
        );
    }
}
