//! Seeded, reproducible samplers for test suites and CLI verification
//! commands. All randomness flows through ChaCha8 seeded from a single
//! `u64`, so identical seeds give identical samples on every platform.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counting::guaranteed_regime;
use crate::dynamics::{Cyl, CylinderPoint, FiberPoint};
use crate::rational::{Angle, Rational};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform rational `p/q` with `q` in `[2, max_den]` and `0 < p < q`.
    pub fn unit_rational(&mut self, max_den: u64) -> Rational {
        let q = self.rng.gen_range(2..=max_den.max(2)) as i64;
        let p = self.rng.gen_range(1..q);
        Rational::frac(p, q)
    }

    /// Uniform rational in `[0, 1)` including 0.
    pub fn angle(&mut self, max_den: u64) -> Angle {
        let q = self.rng.gen_range(2..=max_den.max(2)) as i64;
        let p = self.rng.gen_range(0..q);
        Angle::new(Rational::frac(p, q))
    }

    pub fn u64_below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    /// Parameter set for the rotation proximity estimate, drawn from the
    /// regime in which the `3δ` bound is provable (`Δr <= δ/2` and
    /// `p >= 8/(δ·Δr)`); see [`guaranteed_regime`]. The scale exponent
    /// drives `p` log-uniformly up to around `10^12`.
    pub fn rotation_bound_params(&mut self) -> RotationBoundParams {
        let d = self.rng.gen_range(8..=64i64);
        let num = self.rng.gen_range(1..=d / 2);
        let delta = Rational::frac(num, d);
        // Δr = δ * a / (2a * 2^e) <= δ/2
        let a = self.rng.gen_range(1..=1000i64);
        let e = self.rng.gen_range(1..=26u32);
        let b = 2 * a * (1i64 << e.min(40));
        let dr = &delta * &Rational::frac(a, b);
        // p >= 8/(δ·Δr), padded by a random factor in [1, 2)
        let p_min = (Rational::int(8) / (&delta * &dr)).ceil_int();
        let pad = self.rng.gen_range(0..=1000u64);
        let p = &p_min + (&p_min * BigInt::from(pad)) / BigInt::from(1000u64);
        debug_assert!(guaranteed_regime(&delta, &dr, &p));
        // place the pair of rotation numbers inside [0, 1)
        let max_start = Rational::one() - &dr;
        let frac = self.unit_rational(10_000);
        let r_lo = max_start * frac;
        let (r_u, r_v) = if self.rng.gen_bool(0.5) {
            (r_lo.clone(), &r_lo + &dr)
        } else {
            (&r_lo + &dr, r_lo.clone())
        };
        RotationBoundParams {
            theta_u: self.angle(10_000),
            theta_v: self.angle(10_000),
            r_u,
            r_v,
            delta,
            p,
        }
    }

    /// Distinct interior heights on fiber 1.
    pub fn fiber_pair(&mut self, max_den: u64) -> (FiberPoint, FiberPoint) {
        loop {
            let a = self.unit_rational(max_den);
            let b = self.unit_rational(max_den);
            if a != b {
                let u = FiberPoint::new(Cyl::finite(1), a).unwrap();
                let v = FiberPoint::new(Cyl::finite(1), b).unwrap();
                return (u, v);
            }
        }
    }

    /// Distinct heights with gap above 1/2, as required by hold-window
    /// certificates at level 2 and beyond.
    pub fn separated_heights(&mut self, max_den: u64) -> (Rational, Rational) {
        // z_v in (0, 1/5), z_u in (4/5, 1): gap > 3/5 > 1/2
        let lo = self.unit_rational(max_den) * Rational::frac(1, 5);
        let hi = Rational::one() - self.unit_rational(max_den) * Rational::frac(1, 5);
        let lo = if lo.is_zero() { Rational::frac(1, 7) * Rational::frac(1, 5) } else { lo };
        (hi, lo)
    }

    /// Same cylinder, same height, distinct angles.
    pub fn pair_case_angle_only(&mut self) -> (CylinderPoint, CylinderPoint) {
        let k = 1 + self.u64_below(5);
        let z = self.unit_rational(1000);
        let phi_u = self.angle(1000);
        let mut phi_v = self.angle(1000);
        while phi_v == phi_u {
            phi_v = self.angle(1000);
        }
        (
            CylinderPoint::new(Cyl::finite(k), phi_u, z.clone()).unwrap(),
            CylinderPoint::new(Cyl::finite(k), phi_v, z).unwrap(),
        )
    }

    /// Same cylinder, well-separated heights, distinct angles.
    pub fn pair_case_height_split(&mut self, max_den: u64) -> (CylinderPoint, CylinderPoint) {
        let (z_u, z_v) = self.separated_heights(max_den);
        let phi_u = self.angle(10_000);
        let mut phi_v = self.angle(10_000);
        while phi_v == phi_u {
            phi_v = self.angle(10_000);
        }
        (
            CylinderPoint::new(Cyl::finite(1), phi_u, z_u).unwrap(),
            CylinderPoint::new(Cyl::finite(1), phi_v, z_v).unwrap(),
        )
    }

    /// Distinct cylinders, separated heights, distinct angles.
    pub fn pair_case_offset(&mut self, max_den: u64) -> (CylinderPoint, CylinderPoint) {
        let (z_u, z_v) = self.separated_heights(max_den);
        let k_u = 1u64;
        let k_v = 2 + self.u64_below(4);
        (
            CylinderPoint::new(Cyl::finite(k_u), self.angle(10_000), z_u).unwrap(),
            CylinderPoint::new(Cyl::finite(k_v), self.angle(10_000), z_v).unwrap(),
        )
    }

    /// One inner point, one point on the limit cylinder.
    pub fn pair_case_limit(&mut self) -> (CylinderPoint, CylinderPoint) {
        let inner = CylinderPoint::new(
            Cyl::finite(1 + self.u64_below(4)),
            self.angle(1000),
            self.unit_rational(1000),
        )
        .unwrap();
        let limit =
            CylinderPoint::new(Cyl::Limit, self.angle(1000), self.unit_rational(1000)).unwrap();
        (inner, limit)
    }
}

/// One sampled input for [`crate::counting::rotation_bound_check`].
#[derive(Debug, Clone)]
pub struct RotationBoundParams {
    pub theta_u: Angle,
    pub theta_v: Angle,
    pub r_u: Rational,
    pub r_v: Rational,
    pub delta: Rational,
    pub p: BigInt,
}
