//! Exact lattice counting for circle rotations.
//!
//! The kernel is [`floor_sum`], which evaluates `sum_{i=0}^{n-1}
//! floor((a*i + b)/m)` in time logarithmic in the arguments via the
//! Euclid-style exchange recursion. On top of it, [`arc_hit_count`] counts
//! exactly how often a rigid rotation orbit enters a prescribed arc, and
//! [`rotation_bound_check`] evaluates the `3δ` proximity estimate for a
//! pair of points rotating at different speeds.
//!
//! All counts are exact over big integers; there is no rounding anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{Angle, Rational};

/// Inputs small enough for the i128 kernel. Chosen so every intermediate
/// product in the exchange recursion stays far below `i128::MAX`.
const FAST_LIMIT: i128 = 1 << 40;

fn floor_sum_i128(mut n: i128, mut m: i128, mut a: i128, mut b: i128) -> i128 {
    let mut ans: i128 = 0;
    if a < 0 {
        let a2 = a.rem_euclid(m);
        ans -= n * (n - 1) / 2 * ((a2 - a) / m);
        a = a2;
    }
    if b < 0 {
        let b2 = b.rem_euclid(m);
        ans -= n * ((b2 - b) / m);
        b = b2;
    }
    loop {
        if a >= m {
            ans += n * (n - 1) / 2 * (a / m);
            a %= m;
        }
        if b >= m {
            ans += n * (b / m);
            b %= m;
        }
        let y_max = a * n + b;
        if y_max < m {
            break;
        }
        n = y_max / m;
        b = y_max % m;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

fn floor_sum_big(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    let mut n = n.clone();
    let mut m = m.clone();
    let mut a = a.clone();
    let mut b = b.clone();
    let mut ans = BigInt::zero();
    let one = BigInt::one();
    if a.is_negative() {
        let a2 = a.mod_floor(&m);
        ans -= &n * (&n - &one) / 2 * ((&a2 - &a) / &m);
        a = a2;
    }
    if b.is_negative() {
        let b2 = b.mod_floor(&m);
        ans -= &n * ((&b2 - &b) / &m);
        b = b2;
    }
    loop {
        if a >= m {
            ans += &n * (&n - &one) / 2 * (&a / &m);
            a = a.mod_floor(&m);
        }
        if b >= m {
            ans += &n * (&b / &m);
            b = b.mod_floor(&m);
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        n = &y_max / &m;
        b = y_max.mod_floor(&m);
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

/// Exact `sum_{i=0}^{n-1} floor((a*i + b)/m)` for `n >= 0`, `m >= 1`.
/// `a` and `b` may be negative.
pub fn floor_sum(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(Error::domain("floor_sum: n must be nonnegative"));
    }
    if !m.is_positive() {
        return Err(Error::domain("floor_sum: m must be positive"));
    }
    if n.is_zero() {
        return Ok(BigInt::zero());
    }
    let small = |x: &BigInt| {
        use num_traits::ToPrimitive;
        x.to_i128().filter(|v| v.abs() < FAST_LIMIT)
    };
    if let (Some(n), Some(m), Some(a), Some(b)) = (small(n), small(m), small(a), small(b)) {
        return Ok(BigInt::from(floor_sum_i128(n, m, a, b)));
    }
    Ok(floor_sum_big(n, m, a, b))
}

/// `#{0 <= i < n : (a*i + b) mod m == 0}` by gcd arithmetic.
fn zero_residues(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(m.is_positive() && !n.is_negative());
    if n.is_zero() {
        return BigInt::zero();
    }
    let a_red = a.mod_floor(m);
    let target = (-b).mod_floor(m);
    if a_red.is_zero() {
        return if target.is_zero() {
            n.clone()
        } else {
            BigInt::zero()
        };
    }
    let g = a_red.gcd(m);
    if !target.mod_floor(&g).is_zero() {
        return BigInt::zero();
    }
    let m1 = m / &g;
    let a1 = &a_red / &g;
    let t1 = (&target / &g).mod_floor(&m1);
    // a1 is invertible mod m1
    let ext = a1.extended_gcd(&m1);
    let inv = ext.x.mod_floor(&m1);
    let i0 = (inv * t1).mod_floor(&m1);
    if &i0 < n {
        (n - BigInt::one() - i0) / m1 + BigInt::one()
    } else {
        BigInt::zero()
    }
}

/// `#{0 <= i < n : rho(theta_u, (theta_v + i*dr) mod 1) < delta}`.
///
/// Reduction: with `t_i = theta_v - theta_u + i*dr`, the condition
/// `rho(t_i, 0) < delta` is, for `delta <= 1/2`, equivalent to
/// `0 < (t_i + delta) mod 1 < 2*delta`. Clearing denominators turns that
/// into `0 < (A*i + B) mod M < C`, which two floor sums and a zero-residue
/// count evaluate exactly.
pub fn arc_hits_from_start(
    n: &BigInt,
    theta_u: &Angle,
    theta_v: &Angle,
    dr: &Rational,
    delta: &Rational,
) -> Result<BigInt> {
    if !delta.is_positive() {
        return Err(Error::domain("arc hit count: delta must be positive"));
    }
    if !n.is_positive() {
        return Ok(BigInt::zero());
    }
    if delta > &Rational::frac(1, 2) {
        // the circle metric never exceeds 1/2
        return Ok(n.clone());
    }
    let shifted = theta_v.value() - theta_u.value() + delta;
    let two_delta = Rational::frac(2, 1) * delta;
    let m = shifted
        .denom()
        .lcm(dr.denom())
        .lcm(two_delta.denom());
    let a = dr.numer() * (&m / dr.denom());
    let b = shifted.numer() * (&m / shifted.denom());
    let c = two_delta.numer() * (&m / two_delta.denom());
    // [y mod M < C] = floor(y/M) - floor((y-C)/M) for 0 <= C <= M
    let below = floor_sum(n, &m, &a, &b)? - floor_sum(n, &m, &a, &(&b - &c))?;
    Ok(below - zero_residues(n, &m, &a, &b))
}

/// `#{lo <= i < hi}` variant of [`arc_hits_from_start`].
pub fn arc_hits_in_range(
    lo: &BigInt,
    hi: &BigInt,
    theta_u: &Angle,
    theta_v: &Angle,
    dr: &Rational,
    delta: &Rational,
) -> Result<BigInt> {
    if lo >= hi {
        return Ok(BigInt::zero());
    }
    let zero = BigInt::zero();
    let lo = lo.max(&zero);
    Ok(arc_hits_from_start(hi, theta_u, theta_v, dr, delta)?
        - arc_hits_from_start(lo, theta_u, theta_v, dr, delta)?)
}

/// `#{0 < i < p : rho(theta_u, (theta_v + i*dr) mod 1) < delta}`, the open
/// index range with `p` as the implied normalizer.
pub fn arc_hit_count(
    p: &BigInt,
    theta_u: &Angle,
    theta_v: &Angle,
    dr: &Rational,
    delta: &Rational,
) -> Result<BigInt> {
    if p < &BigInt::one() {
        return Err(Error::domain("arc hit count: p must be at least 1"));
    }
    // shift the range to start at zero: i = j + 1 for j in [0, p-1)
    let n = p - BigInt::one();
    let base = theta_v.rotate(dr);
    arc_hits_from_start(&n, theta_u, &base, dr, delta)
}

/// Report of the `3δ` rotation proximity estimate for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct RotationBoundReport {
    pub theta_u: Angle,
    pub theta_v: Angle,
    pub r_u: Rational,
    pub r_v: Rational,
    pub delta: Rational,
    #[serde(with = "crate::schedule::big_serde")]
    pub p: BigInt,
    /// `|r_u - r_v|`, the relative angle of rotation.
    pub relative_rotation: Rational,
    /// Exact `#{0 < i < p : rho < delta}`.
    #[serde(with = "crate::schedule::big_serde")]
    pub count: BigInt,
    /// `count / p`, exact.
    pub fraction: Rational,
    /// `3 * delta`.
    pub bound: Rational,
    /// Whether `fraction < 3*delta` holds for this parameter set.
    pub holds: bool,
    /// The finer estimate `2δ + 2δ/(pΔr)` that the turn-counting argument
    /// actually yields before simplification.
    pub proof_term_bound: Rational,
    /// A cap that holds unconditionally: hits cluster into at most
    /// `floor((p-2)Δr + 2δ) + 1` passes of at most `floor(2δ/Δr) + 1`
    /// consecutive hits each.
    #[serde(with = "crate::schedule::big_serde")]
    pub cluster_cap: BigInt,
    /// Whether the parameters satisfy [`guaranteed_regime`], under which
    /// `fraction < 3δ` is provable.
    pub guaranteed: bool,
}

/// Sufficient condition under which the `3δ` bound is provable:
/// `Δr <= δ/2` and `p >= 8/(δ·Δr)`. Outside this regime the bound usually
/// holds but admits exact counterexamples with short rotation periods.
pub fn guaranteed_regime(delta: &Rational, dr: &Rational, p: &BigInt) -> bool {
    if !dr.is_positive() || !delta.is_positive() {
        return false;
    }
    let half_delta = delta / &Rational::int(2);
    if dr > &half_delta {
        return false;
    }
    // p >= 8 / (delta * dr)
    Rational::from_bigint(p.clone()) * delta * dr >= Rational::int(8)
}

/// Evaluates the proximity estimate
/// `(1/p) #{0 < i < p : rho((θu + i·ru) mod 1, (θv + i·rv) mod 1) < δ} < 3δ`
/// exactly. Requires `Δr = |r_u - r_v| > 0`, `δ > 0` and `p > 2/Δr`.
pub fn rotation_bound_check(
    theta_u: &Angle,
    theta_v: &Angle,
    r_u: &Rational,
    r_v: &Rational,
    delta: &Rational,
    p: &BigInt,
) -> Result<RotationBoundReport> {
    let dr_signed = r_v - r_u;
    let dr = dr_signed.abs();
    if dr.is_zero() {
        return Err(Error::precondition("relative rotation required (Δr > 0)"));
    }
    if !delta.is_positive() {
        return Err(Error::precondition("delta must be positive"));
    }
    // p > 2/Δr, compared exactly as p*Δr > 2
    if Rational::from_bigint(p.clone()) * &dr <= Rational::int(2) {
        return Err(Error::precondition("p must exceed 2/Δr"));
    }
    // rho((θu + i·ru), (θv + i·rv)) = rho(θu, θv + i·(rv - ru))
    let count = arc_hit_count(p, theta_u, theta_v, &dr_signed, delta)?;
    let p_rat = Rational::from_bigint(p.clone());
    let fraction = Rational::from_bigint(count.clone()) / &p_rat;
    let bound = Rational::int(3) * delta;
    let holds = fraction < bound;
    let two_delta = Rational::int(2) * delta;
    let proof_term_bound = &two_delta + &two_delta / (&p_rat * &dr);
    let per_pass = (&two_delta / &dr).floor_int() + BigInt::one();
    let span = (&p_rat - Rational::int(2)) * &dr + &two_delta;
    let passes = span.floor_int() + BigInt::one();
    let cluster_cap = (passes * per_pass).min(p - BigInt::one());
    Ok(RotationBoundReport {
        theta_u: theta_u.clone(),
        theta_v: theta_v.clone(),
        r_u: r_u.clone(),
        r_v: r_v.clone(),
        delta: delta.clone(),
        p: p.clone(),
        relative_rotation: dr.clone(),
        count,
        fraction,
        bound,
        holds,
        proof_term_bound,
        cluster_cap,
        guaranteed: guaranteed_regime(delta, &dr, p),
    })
}
