//! Command-line surface: schedule construction, orbit simulation,
//! rotation-bound verification, pair classification and certificate
//! bundles.
//!
//! Every JSON report embeds a schema version, an echo of the resolved
//! configuration and the SHA-256 fingerprint of the schedule it used, and
//! contains exact rationals as "p/q" strings. CSV output is for plotting:
//! decimal approximations to 12 digits, flagged as approximate in the
//! header comments. Identical arguments and seeds produce byte-identical
//! output. `CHAOS_LAB_THREADS` caps the worker pool.
//!
//! Exit codes: 0 success, 2 usage error, 3 constraint or certificate
//! failure, 4 horizon error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use chaos_lab::analytics::{
    block_exact_profiles, classify_pair, factor_block_profile, find_witness_levels,
    isometry_certificate, phi_star_block_bound, substitution_angle_counts, DistributionProfile,
    FactorBlockReport, HoldWindowBound, Horizons, IsometryReport, PairState, SubstitutionReport,
};
use chaos_lab::counting::{rotation_bound_check, RotationBoundReport};
use chaos_lab::dynamics::{Cyl, CylinderPoint, FiberPoint, OrbitState};
use chaos_lab::par::map_batch;
use chaos_lab::rational::Rational;
use chaos_lab::sampling::Sampler;
use chaos_lab::schedule::Schedule;
use chaos_lab::Error;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "chaos-lab",
    version,
    about = "Exact-arithmetic simulation and analysis of a skew product on converging cylinders and its fiber factor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the level schedule and write it as JSON.
    ScheduleBuild {
        /// Number of levels to construct (>= 1).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        levels: u32,
        /// Clamp every hold length to this bound, or "none" for the exact
        /// schedule. Capped schedules are flagged and refused by certify.
        #[arg(long, default_value = "none", value_parser = parse_cap)]
        cap: CapArg,
        /// Output path for the schedule file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample rotation-bound parameter sets and verify the exact 3δ
    /// estimate on each (expected violations: zero).
    RotationBound {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Trace an orbit (or a pair of orbits) step by step.
    Simulate {
        #[arg(long)]
        schedule: PathBuf,
        /// Point literal, e.g. {"k":"1","phi":"1/3","z":"2/5"} or
        /// {"k":"1","z":"2/5"} for a fiber point, "limit" for k.
        #[arg(long)]
        point: String,
        /// Optional second point of the same kind; adds a distance column.
        #[arg(long)]
        point2: Option<String>,
        #[arg(long)]
        steps: u64,
        /// Emit every stride-th row.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Classify a pair: exact prefix profiles, hold-window saturation,
    /// Li-Yorke extremes and distributional-chaos flags.
    Classify {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        point2: String,
        /// Proximity thresholds "p/q"; repeatable. Defaults to
        /// 1/10, 1/4, 1/3, 1/2, 9/10.
        #[arg(long = "delta")]
        deltas: Vec<String>,
        /// Examine stepped prefix horizons up to this step count.
        #[arg(long, conflicts_with = "levels")]
        steps: Option<u64>,
        /// Examine closed-form horizons at the first L hold windows
        /// (default: every built level).
        #[arg(long)]
        levels: Option<u32>,
        /// Also report exact min/max distance over this many steps.
        #[arg(long = "li-yorke-steps")]
        li_yorke_steps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Emit a certificate bundle (refuses capped schedules).
    Certify {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_enum)]
        mode: CertifyMode,
        /// Sampled pairs per class.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "delta")]
        deltas: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CertifyMode {
    /// Factor-side evidence: witness levels and window bounds for fiber
    /// pairs, plus the endpoint pair's exact zero counts.
    FactorDc1,
    /// Extension-side evidence: isometry, hold-window 3δ bounds and
    /// limit-point substitution, per sampled pair class.
    ExtensionNodc,
}

#[derive(Clone, Copy)]
struct CapArg(Option<u64>);

fn parse_cap(s: &str) -> Result<CapArg, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(CapArg(None));
    }
    s.parse::<u64>()
        .map(|v| CapArg(Some(v)))
        .map_err(|_| format!("expected an integer or \"none\", got {s:?}"))
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_code(&err))
        }
    }
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Horizon { .. } => 4,
        Error::Constraint(_) | Error::CappedSchedule => 3,
        Error::Domain(_) | Error::Precondition(_) => 2,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("CHAOS_LAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::ScheduleBuild { levels, cap, out } => schedule_build(levels, cap.0, &out),
        Command::RotationBound {
            samples,
            seed,
            out,
            format,
        } => rotation_bound(samples, seed, out.as_deref(), format),
        Command::Simulate {
            schedule,
            point,
            point2,
            steps,
            stride,
            out,
            format,
        } => simulate(&schedule, &point, point2.as_deref(), steps, stride, out.as_deref(), format),
        Command::Classify {
            schedule,
            point,
            point2,
            deltas,
            steps,
            levels,
            li_yorke_steps,
            out,
            format,
        } => {
            if format == Format::Csv {
                return Err(Error::domain("classify reports are JSON only"));
            }
            classify(
                &schedule,
                &point,
                &point2,
                &deltas,
                steps,
                levels,
                li_yorke_steps,
                out.as_deref(),
            )
        }
        Command::Certify {
            schedule,
            mode,
            samples,
            seed,
            deltas,
            out,
            format,
        } => {
            if format == Format::Csv {
                return Err(Error::domain("certificates are JSON only"));
            }
            certify(&schedule, mode, samples, seed, &deltas, out.as_deref())
        }
    }
}

// --- shared helpers

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema_version: u32,
    command: String,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule_sha256: Option<String>,
    result: T,
}

fn emit(text: String, out: Option<&std::path::Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(envelope: &Envelope<T>, out: Option<&std::path::Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(envelope)?;
    text.push('\n');
    emit(text, out)
}

fn parse_deltas(raw: &[String]) -> Result<Vec<Rational>, Error> {
    if raw.is_empty() {
        return Ok(vec![
            Rational::frac(1, 10),
            Rational::frac(1, 4),
            Rational::frac(1, 3),
            Rational::frac(1, 2),
            Rational::frac(9, 10),
        ]);
    }
    let mut out = Vec::with_capacity(raw.len());
    for s in raw {
        let d: Rational = s.parse()?;
        if !d.is_positive() {
            return Err(Error::domain(format!("delta {d} must be positive")));
        }
        out.push(d);
    }
    Ok(out)
}

fn load_schedule(path: &std::path::Path) -> Result<Schedule, Error> {
    let text = std::fs::read_to_string(path)?;
    Schedule::from_json(&text)
}

enum PointArg {
    Cylinder(CylinderPoint),
    Fiber(FiberPoint),
}

fn parse_point(s: &str) -> Result<PointArg, Error> {
    if let Ok(p) = serde_json::from_str::<CylinderPoint>(s) {
        return Ok(PointArg::Cylinder(p));
    }
    if let Ok(p) = serde_json::from_str::<FiberPoint>(s) {
        return Ok(PointArg::Fiber(p));
    }
    Err(Error::domain(format!(
        "cannot parse point literal {s:?}; expected {{\"k\":\"1\",\"phi\":\"1/3\",\"z\":\"2/5\"}} or {{\"k\":\"1\",\"z\":\"2/5\"}}"
    )))
}

fn cyl_repr(c: &Cyl) -> String {
    match c {
        Cyl::Finite(k) => k.to_string(),
        Cyl::Limit => "limit".to_string(),
    }
}

// --- schedule-build

fn schedule_build(levels: u32, cap: Option<u64>, out: &std::path::Path) -> Result<(), Error> {
    let schedule = match cap {
        None => Schedule::build(levels)?,
        Some(c) => Schedule::build_capped(levels, c)?,
    };
    let mut text = schedule.to_json();
    text.push('\n');
    std::fs::write(out, text)?;
    for rec in schedule.levels() {
        let digits = [
            rec.start.to_string().len(),
            rec.hold_start.to_string().len(),
            rec.hold_end.to_string().len(),
            rec.end.to_string().len(),
        ];
        println!(
            "level {}: r={} n={} eps~{} m_digits={:?}",
            rec.level(),
            rec.maps.repeller,
            rec.maps.escape_time,
            rec.maps.margin.to_decimal(6),
            digits
        );
    }
    println!("horizon {}", schedule.horizon());
    println!("sha256 {}", schedule.fingerprint());
    if schedule.is_capped() {
        println!("capped schedule: certificates will be refused");
    }
    Ok(())
}

// --- rotation-bound

#[derive(Serialize)]
struct RotationSuite {
    samples: u64,
    seed: u64,
    violations: u64,
    worst_fraction_over_bound: Rational,
    max_p: String,
    reports: Vec<RotationBoundReport>,
}

fn rotation_bound(
    samples: u64,
    seed: u64,
    out: Option<&std::path::Path>,
    format: Format,
) -> Result<(), Error> {
    let mut sampler = Sampler::new(seed);
    let inputs: Vec<_> = (0..samples).map(|_| sampler.rotation_bound_params()).collect();
    let reports = map_batch(&inputs, |p| {
        rotation_bound_check(&p.theta_u, &p.theta_v, &p.r_u, &p.r_v, &p.delta, &p.p)
            .expect("sampled preconditions hold")
    });
    let violations = reports.iter().filter(|r| !r.holds).count() as u64;
    let worst = reports
        .iter()
        .map(|r| &r.fraction / &r.bound)
        .max()
        .expect("samples >= 1");
    let max_p = reports.iter().map(|r| r.p.clone()).max().expect("samples >= 1");
    let config = json!({
        "samples": samples,
        "seed": seed,
        "sampling": "relative rotation <= delta/2, p >= 8/(delta*dr)",
    });
    match format {
        Format::Json => {
            let suite = RotationSuite {
                samples,
                seed,
                violations,
                worst_fraction_over_bound: worst,
                max_p: max_p.to_string(),
                reports,
            };
            let envelope = Envelope {
                schema_version: SCHEMA_VERSION,
                command: "rotation-bound".to_string(),
                config,
                schedule_sha256: None,
                result: suite,
            };
            emit_json(&envelope, out)?;
        }
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# schema_version={SCHEMA_VERSION}");
            let _ = writeln!(text, "# command=rotation-bound samples={samples} seed={seed}");
            let _ = writeln!(text, "# numeric columns are decimal approximations to 12 digits");
            let _ = writeln!(text, "sample,delta,relative_rotation,p,fraction,bound,holds");
            for (i, r) in reports.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    i,
                    r.delta.to_decimal(12),
                    r.relative_rotation.to_decimal(12),
                    r.p,
                    r.fraction.to_decimal(12),
                    r.bound.to_decimal(12),
                    r.holds
                );
            }
            emit(text, out)?;
        }
    }
    if violations > 0 {
        return Err(Error::constraint(format!(
            "{violations} rotation-bound violations (expected zero)"
        )));
    }
    Ok(())
}

// --- simulate

fn simulate(
    schedule_path: &std::path::Path,
    point: &str,
    point2: Option<&str>,
    steps: u64,
    stride: u64,
    out: Option<&std::path::Path>,
    format: Format,
) -> Result<(), Error> {
    let schedule = load_schedule(schedule_path)?;
    let fingerprint = schedule.fingerprint();
    let config = json!({
        "steps": steps,
        "stride": stride,
        "point": point,
        "point2": point2,
    });

    struct Row {
        i: u64,
        cols: Vec<(String, String, bool)>, // name, exact value, integer-like
    }

    let mut rows: Vec<Row> = Vec::new();
    let a = parse_point(point)?;
    let b = point2.map(parse_point).transpose()?;

    match (a, b) {
        (PointArg::Cylinder(u), None) => {
            let mut record = |i: u64, p: &CylinderPoint| {
                if i.is_multiple_of(stride) {
                    rows.push(Row {
                        i,
                        cols: vec![
                            ("k".into(), cyl_repr(&p.cyl), true),
                            ("phi".into(), p.angle.to_string(), false),
                            ("z".into(), p.height.to_string(), false),
                        ],
                    });
                }
            };
            record(0, &u);
            chaos_lab::dynamics::orbit(&schedule, &u, steps, |i, p| record(i, p))?;
        }
        (PointArg::Fiber(u), None) => {
            let mut record = |i: u64, p: &FiberPoint| {
                if i.is_multiple_of(stride) {
                    rows.push(Row {
                        i,
                        cols: vec![
                            ("k".into(), cyl_repr(&p.cyl), true),
                            ("z".into(), p.height.to_string(), false),
                        ],
                    });
                }
            };
            record(0, &u);
            chaos_lab::dynamics::orbit(&schedule, &u, steps, |i, p| record(i, p))?;
        }
        (PointArg::Cylinder(u), Some(PointArg::Cylinder(v))) => {
            let mut cu = u.clone();
            let mut cv = v.clone();
            let mut record = |i: u64, p: &CylinderPoint, q: &CylinderPoint| {
                if i.is_multiple_of(stride) {
                    rows.push(Row {
                        i,
                        cols: vec![
                            ("k".into(), cyl_repr(&p.cyl), true),
                            ("phi".into(), p.angle.to_string(), false),
                            ("z".into(), p.height.to_string(), false),
                            ("k2".into(), cyl_repr(&q.cyl), true),
                            ("phi2".into(), q.angle.to_string(), false),
                            ("z2".into(), q.height.to_string(), false),
                            ("distance".into(), p.dist(q).to_string(), false),
                        ],
                    });
                }
            };
            record(0, &cu, &cv);
            for i in 1..=steps {
                cu = cu.step(&schedule)?;
                cv = cv.step(&schedule)?;
                record(i, &cu, &cv);
            }
        }
        (PointArg::Fiber(u), Some(PointArg::Fiber(v))) => {
            let mut cu = u.clone();
            let mut cv = v.clone();
            let mut record = |i: u64, p: &FiberPoint, q: &FiberPoint| {
                if i.is_multiple_of(stride) {
                    rows.push(Row {
                        i,
                        cols: vec![
                            ("k".into(), cyl_repr(&p.cyl), true),
                            ("z".into(), p.height.to_string(), false),
                            ("k2".into(), cyl_repr(&q.cyl), true),
                            ("z2".into(), q.height.to_string(), false),
                            ("distance".into(), p.dist(q).to_string(), false),
                        ],
                    });
                }
            };
            record(0, &cu, &cv);
            for i in 1..=steps {
                cu = cu.step(&schedule)?;
                cv = cv.step(&schedule)?;
                record(i, &cu, &cv);
            }
        }
        _ => {
            return Err(Error::domain(
                "both points must live in the same space (cylinder or fiber)",
            ))
        }
    }

    match format {
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# schema_version={SCHEMA_VERSION}");
            let _ = writeln!(
                text,
                "# command=simulate steps={steps} stride={stride} schedule_sha256={fingerprint}"
            );
            let _ = writeln!(text, "# non-integer columns are decimal approximations to 12 digits");
            let header: Vec<&str> = std::iter::once("i")
                .chain(rows[0].cols.iter().map(|(n, _, _)| n.as_str()))
                .collect();
            let _ = writeln!(text, "{}", header.join(","));
            for row in &rows {
                let mut fields = vec![row.i.to_string()];
                for (_, value, integer_like) in &row.cols {
                    if *integer_like || value == "limit" {
                        fields.push(value.clone());
                    } else {
                        let r: Rational = value.parse().expect("own output parses");
                        fields.push(r.to_decimal(12));
                    }
                }
                let _ = writeln!(text, "{}", fields.join(","));
            }
            emit(text, out)?;
        }
        Format::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("i".into(), json!(row.i.to_string()));
                    for (name, value, _) in &row.cols {
                        obj.insert(name.clone(), json!(value));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let envelope = Envelope {
                schema_version: SCHEMA_VERSION,
                command: "simulate".to_string(),
                config,
                schedule_sha256: Some(fingerprint),
                result: json!({ "rows": json_rows }),
            };
            emit_json(&envelope, out)?;
        }
    }
    Ok(())
}

// --- classify

#[allow(clippy::too_many_arguments)]
fn classify(
    schedule_path: &std::path::Path,
    point: &str,
    point2: &str,
    deltas_raw: &[String],
    steps: Option<u64>,
    levels: Option<u32>,
    li_yorke_steps: Option<u64>,
    out: Option<&std::path::Path>,
) -> Result<(), Error> {
    let schedule = load_schedule(schedule_path)?;
    let deltas = parse_deltas(deltas_raw)?;
    let pair = match (parse_point(point)?, parse_point(point2)?) {
        (PointArg::Cylinder(u), PointArg::Cylinder(v)) => PairState::cylinder(u, v)?,
        (PointArg::Fiber(u), PointArg::Fiber(v)) => PairState::fiber(u, v)?,
        _ => {
            return Err(Error::domain(
                "both points must live in the same space (cylinder or fiber)",
            ))
        }
    };
    let horizon = match steps {
        Some(m) => Horizons::Steps(m),
        None => Horizons::Levels(levels.unwrap_or(schedule.level_count())),
    };
    let verdict = classify_pair(&schedule, &pair, &deltas, horizon, li_yorke_steps)?;
    let config = json!({
        "point": point,
        "point2": point2,
        "deltas": deltas.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "steps": steps,
        "levels": levels,
        "li_yorke_steps": li_yorke_steps,
    });
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command: "classify".to_string(),
        config,
        schedule_sha256: Some(schedule.fingerprint()),
        result: verdict,
    };
    emit_json(&envelope, out)
}

// --- certify

#[derive(Serialize)]
struct EndpointStatement {
    deltas: Vec<Rational>,
    profiles: Vec<DistributionProfile>,
    all_counts_zero: bool,
}

#[derive(Serialize)]
struct FactorPairCertificate {
    z_u: Rational,
    z_v: Rational,
    s_levels: Vec<u32>,
    q_levels: Vec<u32>,
    report: FactorBlockReport,
}

#[derive(Serialize)]
struct FactorBundle {
    endpoint: EndpointStatement,
    pairs: Vec<FactorPairCertificate>,
}

#[derive(Serialize)]
struct SplitPairCertificate {
    u: CylinderPoint,
    v: CylinderPoint,
    bounds: Vec<HoldWindowBound>,
}

#[derive(Serialize)]
struct AngleOnlyCertificate {
    u: CylinderPoint,
    v: CylinderPoint,
    isometry: IsometryReport,
}

#[derive(Serialize)]
struct LimitPairCertificate {
    u: CylinderPoint,
    v: CylinderPoint,
    substitution: SubstitutionReport,
}

#[derive(Serialize)]
struct ExtensionBundle {
    angle_only: Vec<AngleOnlyCertificate>,
    split_height: Vec<SplitPairCertificate>,
    limit_pairs: Vec<LimitPairCertificate>,
}

fn certify(
    schedule_path: &std::path::Path,
    mode: CertifyMode,
    samples: u64,
    seed: u64,
    deltas_raw: &[String],
    out: Option<&std::path::Path>,
) -> Result<(), Error> {
    let schedule = load_schedule(schedule_path)?;
    if schedule.is_capped() {
        return Err(Error::CappedSchedule);
    }
    let deltas = parse_deltas(deltas_raw)?;
    let fingerprint = schedule.fingerprint();
    let config = json!({
        "mode": match mode {
            CertifyMode::FactorDc1 => "factor-dc1",
            CertifyMode::ExtensionNodc => "extension-nodc",
        },
        "samples": samples,
        "seed": seed,
        "deltas": deltas.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
    });
    let mut sampler = Sampler::new(seed);
    let mut failed = 0u64;

    match mode {
        CertifyMode::FactorDc1 => {
            let checkpoints: Vec<BigInt> = schedule
                .levels()
                .iter()
                .map(|rec| &rec.hold_end - BigInt::from(1u32))
                .collect();
            let endpoint_pair = PairState::fiber(
                FiberPoint::new(Cyl::finite(1), Rational::one())?,
                FiberPoint::new(Cyl::finite(1), Rational::zero())?,
            )?;
            let sub_one: Vec<Rational> = deltas
                .iter()
                .filter(|d| **d <= Rational::one())
                .cloned()
                .collect();
            let (profiles, _) =
                block_exact_profiles(&schedule, &endpoint_pair, &checkpoints, &sub_one)?;
            let all_counts_zero = profiles.iter().all(|p| p.count == BigInt::from(0u32));
            if !all_counts_zero {
                failed += 1;
            }
            let mut pairs = Vec::new();
            for _ in 0..samples {
                let (u, v) = sampler.fiber_pair(1000);
                let (s_levels, q_levels) =
                    find_witness_levels(&schedule, &u.height, &v.height, schedule.level_count())?;
                if q_levels.is_empty() {
                    failed += 1;
                }
                let report = factor_block_profile(&schedule, &u.height, &v.height, &deltas)?;
                pairs.push(FactorPairCertificate {
                    z_u: u.height,
                    z_v: v.height,
                    s_levels,
                    q_levels,
                    report,
                });
            }
            let envelope = Envelope {
                schema_version: SCHEMA_VERSION,
                command: "certify".to_string(),
                config,
                schedule_sha256: Some(fingerprint),
                result: FactorBundle {
                    endpoint: EndpointStatement {
                        deltas: sub_one,
                        profiles,
                        all_counts_zero,
                    },
                    pairs,
                },
            };
            emit_json(&envelope, out)?;
        }
        CertifyMode::ExtensionNodc => {
            let top_level = schedule.level_count().saturating_sub(1).min(5);
            if top_level < 2 {
                return Err(Error::domain(
                    "extension certificates need at least 3 built levels",
                ));
            }
            let mut angle_only = Vec::new();
            let mut split_height = Vec::new();
            let mut limit_pairs = Vec::new();
            for _ in 0..samples {
                let (u, v) = sampler.pair_case_angle_only();
                let isometry = isometry_certificate(&schedule, &u, &v, 1000)?;
                if !isometry.exact {
                    failed += 1;
                }
                angle_only.push(AngleOnlyCertificate { u, v, isometry });

                let (u, v) = sampler.pair_case_height_split(1_000_000);
                let mut bounds = Vec::new();
                for level in 2..=top_level {
                    for delta in &deltas {
                        let b = phi_star_block_bound(&schedule, &u, &v, delta, level)?;
                        if !b.holds {
                            failed += 1;
                        }
                        bounds.push(b);
                    }
                }
                split_height.push(SplitPairCertificate { u, v, bounds });

                let (inner, limit) = sampler.pair_case_limit();
                let substitution =
                    substitution_angle_counts(&schedule, &inner, &limit, 1000, &deltas)?;
                if !substitution.equal {
                    failed += 1;
                }
                limit_pairs.push(LimitPairCertificate {
                    u: inner,
                    v: limit,
                    substitution,
                });
            }
            let envelope = Envelope {
                schema_version: SCHEMA_VERSION,
                command: "certify".to_string(),
                config,
                schedule_sha256: Some(fingerprint),
                result: ExtensionBundle {
                    angle_only,
                    split_height,
                    limit_pairs,
                },
            };
            emit_json(&envelope, out)?;
        }
    }

    if failed > 0 {
        return Err(Error::constraint(format!(
            "{failed} certificate statements failed; see the report"
        )));
    }
    Ok(())
}
