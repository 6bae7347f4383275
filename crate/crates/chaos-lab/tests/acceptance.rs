//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//! The CLI determinism criterion lives in the CLI crate's acceptance
//! suite; everything else is here.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use num_integer::Integer;

use chaos_lab::analytics::{
    block_exact_profiles, empirical_profiles, factor_block_profile, find_witness_levels,
    isometry_certificate, phi_star_block_bound, substitution_angle_counts, PairState,
};
use chaos_lab::counting::{arc_hit_count, floor_sum, rotation_bound_check};
use chaos_lab::dynamics::{semiconjugacy_check, Cyl, CylinderPoint, FiberPoint};
use chaos_lab::par::map_batch;
use chaos_lab::rational::{Angle, Rational};
use chaos_lab::sampling::Sampler;
use chaos_lab::schedule::Schedule;

fn rat(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

/// 1000 seeded parameter sets for the 3δ rotation proximity estimate,
/// sampled inside the provable regime (relative rotation at most δ/2 and
/// p at least 8/(δΔr), which implies the stated p > 2/Δr): zero
/// violations, p reaching beyond 10^11, in under 30 seconds.
#[test]
fn c1_rotation_bound_suite() {
    let start = Instant::now();
    let mut sampler = Sampler::new(42);
    let inputs: Vec<_> = (0..1000).map(|_| sampler.rotation_bound_params()).collect();
    let reports = map_batch(&inputs, |p| {
        rotation_bound_check(&p.theta_u, &p.theta_v, &p.r_u, &p.r_v, &p.delta, &p.p)
            .expect("sampled preconditions hold")
    });
    let violations = reports.iter().filter(|r| !r.holds).count();
    assert_eq!(violations, 0, "exact fraction must stay below 3δ");
    let max_p = reports.iter().map(|r| r.p.clone()).max().unwrap();
    assert!(
        max_p >= BigInt::from(10u64).pow(12),
        "suite must exercise p up to 10^12, got {max_p}"
    );
    let worst = reports
        .iter()
        .map(|r| &r.fraction / &r.bound)
        .max()
        .unwrap();
    let elapsed = start.elapsed();
    if cfg!(feature = "parallel") {
        assert!(elapsed.as_secs() < 30, "runtime budget exceeded: {elapsed:?}");
    }
    println!(
        "ACCEPTANCE c1 PASS: 1000/1000 sampled sets satisfy the exact 3δ bound \
         (max p = {max_p}, worst fraction/bound = {}, {elapsed:?})",
        worst.to_decimal(6)
    );
}

/// Exhaustive agreement of floor_sum with direct summation over
/// n, m <= 50, |a|, |b| <= 50, in under 10 seconds.
#[test]
fn c2_floor_sum_exhaustive_oracle() {
    let start = Instant::now();
    let ms: Vec<i64> = (1..=50).collect();
    let failures: Vec<usize> = map_batch(&ms, |&m| {
        let mut bad = 0usize;
        for a in -50i64..=50 {
            for b in -50i64..=50 {
                let mut running = 0i64;
                // running naive sum: S(n) = S(n-1) + floor((a(n-1)+b)/m)
                for n in 1i64..=50 {
                    running += (a * (n - 1) + b).div_euclid(m);
                    let got = floor_sum(
                        &BigInt::from(n),
                        &BigInt::from(m),
                        &BigInt::from(a),
                        &BigInt::from(b),
                    )
                    .unwrap();
                    if got != BigInt::from(running) {
                        bad += 1;
                    }
                }
            }
        }
        bad
    });
    let total_bad: usize = failures.iter().sum();
    assert_eq!(total_bad, 0);
    let elapsed = start.elapsed();
    if cfg!(feature = "parallel") {
        assert!(elapsed.as_secs() < 10, "runtime budget exceeded: {elapsed:?}");
    }
    println!(
        "ACCEPTANCE c2 PASS: floor_sum agrees with direct summation on all \
         50*50*101*101 grid points ({elapsed:?})"
    );
}

/// arc_hit_count agrees with direct orbit iteration on 500 random cases
/// with p <= 10^4, in under 10 seconds.
#[test]
fn c3_arc_hit_oracle() {
    let start = Instant::now();
    let mut sampler = Sampler::new(7);
    let cases: Vec<(Angle, Angle, Rational, Rational, i64)> = (0..500)
        .map(|_| {
            let dr_sign = if sampler.u64_below(2) == 0 { 1 } else { -1 };
            (
                sampler.angle(1000),
                sampler.angle(1000),
                sampler.unit_rational(60) * rat(dr_sign, 1),
                sampler.unit_rational(40) * rat(1, 2),
                2 + sampler.u64_below(9_999) as i64,
            )
        })
        .collect();
    // direct orbit walk over a fixed common denominator: t_{i+1} = t_i + dr
    // mod 1 and the test min(t, 1-t) < delta, all exact in integers
    let mismatches: usize = map_batch(&cases, |(tu, tv, dr, delta, p)| {
        let got = arc_hit_count(&BigInt::from(*p), tu, tv, dr, delta).unwrap();
        let diff = tv.value() - tu.value();
        let m = diff.denom().clone()
            .lcm(dr.denom())
            .lcm(delta.denom())
            .to_i128()
            .expect("moderate denominators");
        let to_scaled = |r: &Rational| -> i128 {
            let num = r.numer().to_i128().unwrap();
            let den = r.denom().to_i128().unwrap();
            num * (m / den)
        };
        let step = to_scaled(dr).rem_euclid(m);
        let delta_scaled = to_scaled(delta);
        let mut t = to_scaled(&diff).rem_euclid(m);
        let mut expect = 0i64;
        for _ in 1..*p {
            t = (t + step) % m;
            if t.min(m - t) < delta_scaled {
                expect += 1;
            }
        }
        usize::from(got != BigInt::from(expect))
    })
    .iter()
    .sum();
    assert_eq!(mismatches, 0);
    let elapsed = start.elapsed();
    if cfg!(feature = "parallel") {
        assert!(elapsed.as_secs() < 10, "runtime budget exceeded: {elapsed:?}");
    }
    println!(
        "ACCEPTANCE c3 PASS: arc_hit_count matches direct iteration on 500 \
         random cases with p up to 10^4 ({elapsed:?})"
    );
}

/// Six built levels satisfy every schedule constraint exactly: endpoint
/// inclusions at the minimal escape time (failing one iterate earlier
/// where meaningful), hold lengths above 2l/eps, and m2/m3 <= 1/(l+1).
#[test]
fn c4_schedule_constraints() {
    let s = Schedule::build(6).unwrap();
    assert_eq!(s.level_count(), 6);
    let one = Rational::one();
    for rec in s.levels() {
        let l = rec.level();
        let div = i64::from(l.max(1));
        let inv = rat(1, div);
        let maps = &rec.maps;
        let n = maps.escape_time;
        let lo_start = &maps.repeller - &inv;
        let hi_start = &maps.repeller + &inv;
        let lo_active = lo_start.is_positive();
        let hi_active = hi_start < one;
        // inclusions at n
        if lo_active {
            assert!(maps.forward.iterate(&lo_start, n).unwrap() < inv);
        }
        if hi_active {
            assert!(maps.forward.iterate(&hi_start, n).unwrap() > &one - &inv);
        }
        // minimality at n - 1 for non-vacuous, non-degenerate levels
        if n >= 1 && (lo_active || hi_active) {
            let lo_ok = !lo_active || maps.forward.iterate(&lo_start, n - 1).unwrap() < inv;
            let hi_ok = !hi_active || maps.forward.iterate(&hi_start, n - 1).unwrap() > &one - &inv;
            assert!(!(lo_ok && hi_ok), "level {l}: escape time not minimal");
        }
        // hold length strictly above 2l/eps
        if l >= 1 {
            let need = rat(2 * i64::from(l), 1) / &maps.margin;
            assert!(Rational::from_bigint(rec.hold_len()) > need);
        }
        // hold-start to hold-end ratio
        let ratio = Rational::from_bigint(rec.hold_start.clone())
            / Rational::from_bigint(rec.hold_end.clone());
        assert!(ratio <= rat(1, i64::from(l) + 1));
    }
    println!(
        "ACCEPTANCE c4 PASS: 6-level schedule satisfies inclusions (minimal), \
         margin gaps and hold ratios exactly (horizon {})",
        s.horizon()
    );
}

/// Projection commutes with stepping exactly for 200 random points over
/// 10^3 steps on a capped schedule.
#[test]
fn c5_semiconjugacy() {
    let s = Schedule::build_capped(6, 400).unwrap();
    assert!(s.horizon() > &BigInt::from(1010), "capped horizon too small");
    let mut sampler = Sampler::new(13);
    let points: Vec<CylinderPoint> = (0..200)
        .map(|_| {
            CylinderPoint::new(
                Cyl::finite(1 + sampler.u64_below(5)),
                sampler.angle(997),
                sampler.unit_rational(997),
            )
            .unwrap()
        })
        .collect();
    let all_commute = map_batch(&points, |p| semiconjugacy_check(&s, p, 1000).unwrap())
        .into_iter()
        .all(|ok| ok);
    assert!(all_commute);
    println!(
        "ACCEPTANCE c5 PASS: projection and stepping commute exactly for \
         200 random points over 10^3 steps"
    );
}

/// Factor-side scrambling evidence: the endpoint pair's close-time count
/// is exactly zero at δ = 9/10 at every examined horizon; all 50 seeded
/// fiber pairs produce a q-type witness level within 6 levels together
/// with windowed lower bounds; s-type witness levels l >= 3 push the
/// prefix lower bound at δ = 2/l above 1 - 2/(l+1).
#[test]
fn c6_factor_scrambling_evidence() {
    let s = Schedule::build(6).unwrap();
    let delta_grid = vec![rat(9, 10)];

    // endpoint rigidity
    let endpoint = PairState::fiber(
        FiberPoint::new(Cyl::finite(1), Rational::one()).unwrap(),
        FiberPoint::new(Cyl::finite(1), Rational::zero()).unwrap(),
    )
    .unwrap();
    let cps: Vec<BigInt> = s
        .levels()
        .iter()
        .map(|rec| &rec.hold_end - BigInt::one())
        .collect();
    let (profiles, _) = block_exact_profiles(&s, &endpoint, &cps, &delta_grid).unwrap();
    assert_eq!(profiles.len(), 6);
    for p in &profiles {
        assert!(p.count.is_zero(), "endpoint pair must never be 9/10-close");
    }

    // seeded pairs: q witnesses and windowed lower bounds
    let mut s_checked = 0u32;
    for seed in 0..50u64 {
        let mut sampler = Sampler::new(1000 + seed);
        let (u, v) = sampler.fiber_pair(1000);
        let (s_levels, q_levels) = find_witness_levels(&s, &u.height, &v.height, 6).unwrap();
        assert!(
            !q_levels.is_empty(),
            "seed {seed}: no q witness within 6 levels"
        );
        let report =
            factor_block_profile(&s, &u.height, &v.height, &[rat(1, 10), rat(1, 2)]).unwrap();
        assert!(!report.bounds.is_empty());
        for b in &report.bounds {
            assert!(b.lower_fraction >= Rational::zero() && b.upper_fraction <= Rational::one());
        }
        // s-witness levels at l >= 3: prefix lower bound at δ = 2/l
        for &l in s_levels.iter().filter(|&&l| l >= 3) {
            let delta = rat(2, i64::from(l));
            let rep = factor_block_profile(&s, &u.height, &v.height, std::slice::from_ref(&delta)).unwrap();
            let bound = rep
                .bounds
                .iter()
                .find(|b| b.level == l && b.delta == delta)
                .expect("bound for the witness level");
            assert!(
                bound.lower_fraction >= Rational::one() - rat(2, i64::from(l) + 1),
                "seed {seed} level {l}: lower bound {} too small",
                bound.lower_fraction
            );
            s_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE c6 PASS: endpoint pair count 0 at every horizon; 50/50 \
         seeded pairs have q witnesses; {s_checked} deep s-witness windows \
         meet the 1-2/(l+1) prefix share"
    );
}

/// Extension-side no-scrambling evidence: sampled angle-only pairs are
/// exactly isometric over 10^3 steps; sampled split-height pairs certify
/// the exact hold-window fraction below 3δ at δ = 1/10 on levels 2..5
/// with prefix upper bounds below 1; limit-cylinder pairs reduce through
/// the substitute point with exactly equal angle statistics.
#[test]
fn c7_extension_no_scrambling_evidence() {
    let s = Schedule::build(6).unwrap();
    let delta = rat(1, 10);

    for seed in 0..10u64 {
        let mut sampler = Sampler::new(300 + seed);
        let (a, b) = sampler.pair_case_angle_only();
        let iso = isometry_certificate(&s, &a, &b, 1000).unwrap();
        assert!(iso.exact, "seed {seed}: distance drifted");
    }

    let mut worst = Rational::zero();
    for seed in 0..10u64 {
        let mut sampler = Sampler::new(seed);
        let (u, v) = sampler.pair_case_height_split(1_000_000);
        for level in 2..=5u32 {
            let bound = phi_star_block_bound(&s, &u, &v, &delta, level).unwrap();
            assert!(bound.holds, "seed {seed} level {level}");
            assert!(bound.prefix_upper_fraction < Rational::one());
            let ratio = &bound.upper_fraction / &bound.bound;
            if ratio > worst {
                worst = ratio;
            }
        }
    }

    for seed in 0..10u64 {
        let mut sampler = Sampler::new(600 + seed);
        let (inner, limit) = sampler.pair_case_limit();
        let rep =
            substitution_angle_counts(&s, &inner, &limit, 1000, &[delta.clone(), rat(1, 4)])
                .unwrap();
        assert!(rep.equal, "seed {seed}: substitute counts differ");
    }
    println!(
        "ACCEPTANCE c7 PASS: 10 isometric pairs exact over 10^3 steps; 10 \
         split pairs x levels 2..5 certified below 3δ (worst ratio {}); 10 \
         limit pairs reduce with exactly equal counts",
        worst.to_decimal(4)
    );
}

/// Block-exact profiles equal empirical profiles exactly on a capped
/// schedule at horizon 10^4 for 20 random pairs.
#[test]
fn c8_profile_mode_equivalence() {
    let s = Schedule::build_capped(8, 2500).unwrap();
    let m: u64 = 10_000;
    assert!(
        s.horizon() > &BigInt::from(m + 6),
        "capped horizon {} too small",
        s.horizon()
    );
    let deltas = vec![rat(1, 10), rat(1, 4), rat(1, 2), rat(9, 10)];
    let mut sampler = Sampler::new(99);
    let mut pairs: Vec<PairState> = Vec::new();
    while pairs.len() < 20 {
        let even = pairs.len().is_multiple_of(2);
        if even {
            let u = CylinderPoint::new(
                Cyl::finite(1 + sampler.u64_below(3)),
                sampler.angle(150),
                sampler.unit_rational(150),
            )
            .unwrap();
            let v = CylinderPoint::new(
                Cyl::finite(1 + sampler.u64_below(3)),
                sampler.angle(150),
                sampler.unit_rational(150),
            )
            .unwrap();
            if let Ok(p) = PairState::cylinder(u, v) {
                pairs.push(p);
            }
        } else {
            let (u, v) = sampler.fiber_pair(150);
            pairs.push(PairState::fiber(u, v).unwrap());
        }
    }
    let checks = map_batch(&pairs, |pair| {
        let emp = match pair {
            PairState::Cylinder { u, v } => empirical_profiles(&s, u, v, &[m], &deltas).unwrap(),
            PairState::Fiber { u, v } => empirical_profiles(&s, u, v, &[m], &deltas).unwrap(),
        };
        let (blk, _) = block_exact_profiles(&s, pair, &[BigInt::from(m)], &deltas).unwrap();
        emp.iter()
            .zip(blk.iter())
            .all(|(a, b)| a.count == b.count && a.fraction == b.fraction)
    });
    assert!(checks.into_iter().all(|ok| ok));
    println!(
        "ACCEPTANCE c8 PASS: block-exact and empirical profiles agree \
         exactly for 20 random pairs at horizon 10^4"
    );
}

/// The documented failure of the unconditional 3δ claim outside the
/// provable regime: a resonant parameter set meeting only the stated
/// preconditions exceeds the bound, while the unconditional clustering
/// cap still covers the exact count.
#[test]
fn resonant_counterexample_is_reproducible() {
    let rep = rotation_bound_check(
        &Angle::zero(),
        &Angle::zero(),
        &rat(1, 3),
        &rat(2, 3),
        &rat(1, 20),
        &BigInt::from(7),
    )
    .unwrap();
    assert_eq!(rep.fraction, rat(2, 7));
    assert!(!rep.holds);
    assert!(rep.count <= rep.cluster_cap);
    println!(
        "NOTE: outside the guaranteed regime the 3δ form admits exact \
         resonant violations (fraction {} > {}); the clustering cap holds",
        rep.fraction, rep.bound
    );
}

/// Companion note to c7: with resonant heights (both fixed points of
/// every level map) the hold-window fraction can exceed 3δ at a level
/// whose rotation divisor matches the angle offset denominator. The
/// certificate reports it honestly rather than suppressing it.
#[test]
fn resonant_endpoint_pair_can_exceed_3delta() {
    let s = Schedule::build(6).unwrap();
    let u = CylinderPoint::new(Cyl::finite(1), Angle::frac(1, 3), Rational::one()).unwrap();
    let v = CylinderPoint::new(Cyl::finite(1), Angle::zero(), Rational::zero()).unwrap();
    let b = phi_star_block_bound(&s, &u, &v, &rat(1, 10), 3).unwrap();
    assert_eq!(b.relative_rotation, rat(1, 3));
    assert_eq!(b.fraction, rat(123, 368));
    assert!(!b.holds);
    // the same pair passes at the neighboring levels
    for level in [2u32, 4, 5] {
        let ok = phi_star_block_bound(&s, &u, &v, &rat(1, 10), level).unwrap();
        assert!(ok.holds, "level {level}");
    }
}
