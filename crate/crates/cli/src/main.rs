//! Command-line front end: spectrum tables, no-ghost checks, bracket
//! closure reports, invariant-measure checks, commutator evaluations and
//! scans, and the second-quantized field verifications.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage or
//! configuration errors. All artifacts are deterministic: rerunning a
//! command with the same configuration produces byte-identical files.

mod json;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use json::{format_f64, Json};
use stringlab::field::{
    constrained_test_function, field_commutator_residual, observable_lift_check,
};
use stringlab::fock::FockVector;
use stringlab::mass_shell::{
    check_invariance, fiber_decomposition_check, integrate_energy_param,
    integrate_lightcone_param, QuadRule, QuadratureSpec, ShellRegion, ShellSpec,
};
use stringlab::orbits::build_orbit_lab;
use stringlab::propagator::{
    decay_scan, is_spacelike_direction, log_log_slope, smeared_commutator, ProfileKind,
    SeparableSpec, ShellSampling, TestFunctionSpec,
};
use stringlab::spectrum::{
    default_shell_point, physical_gram, transverse_count, PhysicalLevelReport, Route,
};
use stringlab::virasoro::{virasoro_bracket_jobs, Momentum};

#[derive(Parser)]
#[command(
    name = "stringlab",
    version,
    about = "Desk-scale checks for the covariantly quantized free string: spectra, signatures, measures, commutators, fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level spectrum table: dimensions and physical-Gram signatures.
    Spectrum(SpectrumArgs),
    /// Positivity check of the physical Gram at one level.
    Noghost(NoghostArgs),
    /// Bracket closure sweep with measured central coefficients.
    VirasoroCheck(VirasoroArgs),
    /// Invariant-measure checks on the mass shells.
    Measure(MeasureArgs),
    /// Smeared field commutator: single evaluation or spacelike scan.
    Commutator(CommutatorArgs),
    /// Commutator decay along a spacelike direction, log-log table.
    DecayScan(DecayScanArgs),
    /// Field commutation-relation residual battery.
    FieldCcr(FieldCcrArgs),
    /// Observable-field conditions on the physical quotient.
    ObservableCheck(ObservableArgs),
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 26)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    max_level: u64,
    /// Comma-separated rational components "num/den,…" used at the level
    /// whose mass shell it satisfies.
    #[arg(long)]
    momentum: Option<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoghostArgs {
    #[arg(long, default_value_t = 26)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    level: u64,
    #[arg(long)]
    momentum: Option<String>,
    /// Corrupt the computed signature before checking; exercises the
    /// failure exit path.
    #[arg(long, hide = true)]
    fault_inject: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VirasoroArgs {
    #[arg(long, default_value_t = 26)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    mmax: i64,
    #[arg(long, default_value_t = 2)]
    level: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureCheck {
    Invariance,
    Lightcone,
    Fiber,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_enum)]
    check: MeasureCheck,
    #[arg(long, default_value_t = 160)]
    nodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CommutatorArgs {
    /// JSON configuration with the test-function pair.
    #[arg(long)]
    config: PathBuf,
    /// Run the spacelike translation scan instead of one evaluation.
    #[arg(long)]
    scan: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecayScanArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Polarization level; the sampled shell is r = 2(level − 1).
    #[arg(long, default_value_t = 2)]
    level: u64,
    #[arg(long, default_value_t = 0.7)]
    width: f64,
    #[arg(long, default_value = "0.45,1.0")]
    direction: String,
    #[arg(long, default_value = "2,4,8,16")]
    radii: String,
    #[arg(long, default_value_t = 1024)]
    nodes: usize,
    #[arg(long, default_value_t = 16.0)]
    momentum_box: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldCcrArgs {
    /// Optional JSON configuration; defaults are documented in the README.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ObservableArgs {
    #[arg(long, default_value_t = 1)]
    level: u64,
    #[arg(long, default_value_t = 26)]
    d: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Noghost(args) => cmd_noghost(args),
        Command::VirasoroCheck(args) => cmd_virasoro(args),
        Command::Measure(args) => cmd_measure(args),
        Command::Commutator(args) => cmd_commutator(args),
        Command::DecayScan(args) => cmd_decay_scan(args),
        Command::FieldCcr(args) => cmd_field_ccr(args),
        Command::ObservableCheck(args) => cmd_observable(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn out_path(requested: Option<PathBuf>, default_name: &str) -> PathBuf {
    match requested {
        Some(p) => p,
        None => {
            let dir = std::env::var("STRINGLAB_OUT_DIR").unwrap_or_else(|_| ".".into());
            Path::new(&dir).join(default_name)
        }
    }
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_rational(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| format!("bad rational '{text}'"))?;
    let d: BigInt = den.parse().map_err(|_| format!("bad rational '{text}'"))?;
    if d == BigInt::from(0) {
        return Err(format!("zero denominator in '{text}'"));
    }
    Ok(BigRational::new(n, d))
}

fn parse_momentum(text: &str, d: usize) -> Result<Momentum<BigRational>, String> {
    let comps: Result<Vec<_>, _> = text.split(',').map(parse_rational).collect();
    let comps = comps?;
    if comps.len() != d {
        return Err(format!("momentum has {} components, expected {d}", comps.len()));
    }
    Ok(Momentum::new(comps))
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}'")))
        .collect()
}

fn report_to_json(report: &PhysicalLevelReport) -> Json {
    let momentum = Json::Array(report.p.components().iter().map(Json::rational).collect());
    Json::object(vec![
        ("d", Json::Int(report.d as i64)),
        ("level", Json::Int(report.level as i64)),
        ("r", Json::rational(&report.r)),
        ("momentum", momentum),
        ("dim_total", Json::Int(report.dim_total as i64)),
        ("dim_constrained", Json::Int(report.dim_constrained as i64)),
        ("dim_null", Json::Int(report.dim_null as i64)),
        ("dim_physical", Json::Int(report.dim_physical as i64)),
        (
            "inertia",
            Json::Array(vec![
                Json::Int(report.inertia.0 as i64),
                Json::Int(report.inertia.1 as i64),
                Json::Int(report.inertia.2 as i64),
            ]),
        ),
    ])
}

fn spectrum_csv(reports: &[PhysicalLevelReport]) -> String {
    let mut out = String::from(
        "d,level,r,dim_total,dim_constrained,dim_null,dim_physical,n_plus,n_zero,n_minus,momentum\n",
    );
    for r in reports {
        let momentum = r
            .p
            .components()
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{},{},{}/{},{},{},{},{},{},{},{},{}\n",
            r.d,
            r.level,
            r.r.numer(),
            r.r.denom(),
            r.dim_total,
            r.dim_constrained,
            r.dim_null,
            r.dim_physical,
            r.inertia.0,
            r.inertia.1,
            r.inertia.2,
            momentum
        ));
    }
    out
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<bool, String> {
    if args.d < 3 {
        return Err("spectrum needs d >= 3".into());
    }
    if args.max_level > 12 {
        return Err("level truncations beyond 12 are outside the desk-scale envelope".into());
    }
    let override_p = args
        .momentum
        .as_deref()
        .map(|m| parse_momentum(m, args.d))
        .transpose()?;
    if let Some(p) = &override_p {
        let p2 = p.minkowski_square();
        let matches = (0..=args.max_level).any(|l| {
            p2 == -<BigRational as stringlab::scalar::Scalar>::from_int(2 * (l as i64 - 1))
        });
        if !matches {
            return Err(format!(
                "momentum with p² = {p2} is not on any shell for levels 0..={}",
                args.max_level
            ));
        }
    }

    let levels: Vec<u64> = (0..=args.max_level).collect();
    let jobs = args.jobs.max(1);
    let mut reports: Vec<Option<PhysicalLevelReport>> = Vec::new();
    reports.resize_with(levels.len(), || None);
    std::thread::scope(|scope| -> Result<(), String> {
        let mut handles = Vec::new();
        for chunk in levels.chunks(levels.len().div_ceil(jobs)) {
            let override_p = &override_p;
            handles.push((
                chunk,
                scope.spawn(move || -> Result<Vec<PhysicalLevelReport>, String> {
                    chunk
                        .iter()
                        .map(|&level| {
                            let default_p = default_shell_point(args.d, level, 0);
                            let p = match override_p {
                                Some(p)
                                    if p.minkowski_square()
                                        == default_p.minkowski_square() =>
                                {
                                    p.clone()
                                }
                                _ => default_p,
                            };
                            physical_gram(args.d, level, &p, Route::Auto)
                                .map_err(|e| e.to_string())
                        })
                        .collect()
                }),
            ));
        }
        for (chunk, handle) in handles {
            let result = handle.join().map_err(|_| "worker panicked".to_string())??;
            for (level, report) in chunk.iter().zip(result) {
                reports[*level as usize] = Some(report);
            }
        }
        Ok(())
    })?;
    let reports: Vec<PhysicalLevelReport> = reports.into_iter().map(Option::unwrap).collect();

    let path = out_path(args.out, "spectrum.json");
    let doc = Json::Array(reports.iter().map(report_to_json).collect());
    write_artifact(&path, &doc.render())?;
    let csv_path = path.with_extension("csv");
    write_artifact(&csv_path, &spectrum_csv(&reports))?;
    for r in &reports {
        println!(
            "level {}: r = {}, dims total/constrained/null/physical = {}/{}/{}/{}, inertia = ({}, {}, {})",
            r.level,
            r.r,
            r.dim_total,
            r.dim_constrained,
            r.dim_null,
            r.dim_physical,
            r.inertia.0,
            r.inertia.1,
            r.inertia.2
        );
    }
    Ok(true)
}

fn cmd_noghost(args: NoghostArgs) -> Result<bool, String> {
    if args.d < 3 {
        return Err("noghost needs d >= 3".into());
    }
    if args.level > 12 {
        return Err("level truncations beyond 12 are outside the desk-scale envelope".into());
    }
    let p = match args.momentum.as_deref() {
        Some(m) => parse_momentum(m, args.d)?,
        None => default_shell_point(args.d, args.level, 0),
    };
    let mut report =
        physical_gram(args.d, args.level, &p, Route::Auto).map_err(|e| e.to_string())?;
    if args.fault_inject {
        report.inertia.2 += 1;
        eprintln!("fault injected: signature corrupted for contract testing");
    }
    let transverse = transverse_count(args.d, args.level);
    let positive = report.inertia.2 == 0 && report.inertia.1 == 0;
    let dimension_ok = args.d != 26 || report.dim_physical as u128 == transverse;
    let pass = positive && dimension_ok;

    let doc = Json::object(vec![
        ("report", report_to_json(&report)),
        ("transverse_count", Json::Int(transverse as i64)),
        ("positive_definite", Json::Bool(positive)),
        ("dimension_matches_transverse", Json::Bool(dimension_ok)),
        ("pass", Json::Bool(pass)),
    ]);
    let path = out_path(args.out, "noghost.json");
    write_artifact(&path, &doc.render())?;
    println!(
        "no-ghost d={} level={}: inertia ({}, {}, {}) physical={} transverse={} -> {}",
        args.d,
        args.level,
        report.inertia.0,
        report.inertia.1,
        report.inertia.2,
        report.dim_physical,
        transverse,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}

fn cmd_virasoro(args: VirasoroArgs) -> Result<bool, String> {
    if args.mmax < 1 {
        return Err("mmax must be >= 1".into());
    }
    if args.mmax > 4 || args.level > 8 {
        return Err("bracket sweeps are bounded at mmax <= 4, level <= 8".into());
    }
    // Fixed rational on-shell point for the sweep; the closure identity is
    // momentum-independent, the report records which p was used.
    let p = default_shell_point(args.d, 1, 0);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for m in -args.mmax..=args.mmax {
        for n in -args.mmax..=args.mmax {
            if m == 0 || n == 0 || m >= n {
                continue;
            }
            let report = virasoro_bracket_jobs(m, n, &p, args.level, args.jobs.max(1));
            all_ok &= report.matches_closure;
            rows.push(Json::object(vec![
                ("m", Json::Int(m)),
                ("n", Json::Int(n)),
                ("matches_closure", Json::Bool(report.matches_closure)),
                (
                    "central_coefficient",
                    Json::rational(&report.central_coefficient),
                ),
                ("probes", Json::Int(report.probes as i64)),
                (
                    "failure",
                    report
                        .first_failure
                        .map(Json::Str)
                        .unwrap_or(Json::Null),
                ),
            ]));
        }
    }
    let doc = Json::object(vec![
        ("d", Json::Int(args.d as i64)),
        ("probe_level", Json::Int(args.level as i64)),
        (
            "momentum",
            Json::Array(p.components().iter().map(Json::rational).collect()),
        ),
        ("pairs", Json::Array(rows)),
        ("all_match", Json::Bool(all_ok)),
    ]);
    let path = out_path(args.out, "virasoro.json");
    write_artifact(&path, &doc.render())?;
    println!(
        "bracket closure d={} level<={}: {}",
        args.d,
        args.level,
        if all_ok { "PASS" } else { "FAIL" }
    );
    Ok(all_ok)
}

fn gaussian_profile(d: usize) -> impl Fn(&[f64]) -> f64 {
    move |p: &[f64]| {
        debug_assert_eq!(p.len(), d);
        let mut s = -(p[0] * p[0]) / 8.0;
        for x in &p[1..] {
            s -= x * x;
        }
        s.exp()
    }
}

fn cmd_measure(args: MeasureArgs) -> Result<bool, String> {
    let (doc, pass) = match args.check {
        MeasureCheck::Invariance => {
            if !(2..=4).contains(&args.d) {
                return Err("invariance check supports d in 2..=4".into());
            }
            if args.r < 0.0 {
                return Err("invariance uses the energy parametrization; r must be >= 0".into());
            }
            let shell = ShellSpec {
                r: args.r,
                region: ShellRegion::PlusSheet,
                d: args.d,
            };
            let half = 16.0;
            let quad = QuadratureSpec::gauss(
                args.nodes,
                vec![-half; args.d - 1],
                vec![half; args.d - 1],
            );
            let mut boost = vec![vec![0.0; args.d]; args.d];
            for (i, row) in boost.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            boost[0][0] = 1.25;
            boost[0][1] = 0.75;
            boost[1][0] = 0.75;
            boost[1][1] = 1.25;
            let rep = check_invariance(gaussian_profile(args.d), &shell, &boost, &quad)
                .map_err(|e| e.to_string())?;
            let pass = rep.rel_err <= 1e-8;
            (
                Json::object(vec![
                    ("check", Json::Str("invariance".into())),
                    ("d", Json::Int(args.d as i64)),
                    ("r", Json::Float(args.r)),
                    ("base", Json::Float(rep.base)),
                    ("transformed", Json::Float(rep.transformed)),
                    ("rel_err", Json::Float(rep.rel_err)),
                    ("tolerance", Json::Float(1e-8)),
                    ("pass", Json::Bool(pass)),
                ]),
                pass,
            )
        }
        MeasureCheck::Lightcone => {
            if !(2..=4).contains(&args.d) {
                return Err("lightcone check supports d in 2..=4".into());
            }
            if args.r <= 0.0 {
                return Err("cross-parametrization agreement needs r > 0".into());
            }
            let f = |p: &[f64]| (-p.iter().map(|x| x * x).sum::<f64>() / 1.69).exp();
            let shell_e = ShellSpec {
                r: args.r,
                region: ShellRegion::PlusSheet,
                d: args.d,
            };
            let quad_e =
                QuadratureSpec::gauss(args.nodes, vec![-7.0; args.d - 1], vec![7.0; args.d - 1]);
            let a = integrate_energy_param(f, &shell_e, &quad_e).map_err(|e| e.to_string())?;
            let shell_lc = ShellSpec {
                r: args.r,
                region: ShellRegion::LightconePlus,
                d: args.d,
            };
            let mut lo = vec![-7.0; args.d - 1];
            let mut hi = vec![7.0; args.d - 1];
            lo[args.d - 2] = 1e-3;
            hi[args.d - 2] = 12.0;
            let quad_lc = QuadratureSpec {
                rule: QuadRule::TanhSinh,
                nodes_per_axis: args.nodes.max(140),
                lo,
                hi,
                target_rel_err: 1e-9,
            };
            let b = integrate_lightcone_param(f, &shell_lc, &quad_lc).map_err(|e| e.to_string())?;
            let rel = (a - b.value).abs() / a.abs().max(1e-300);
            let pass = rel <= 1e-8;
            (
                Json::object(vec![
                    ("check", Json::Str("lightcone".into())),
                    ("d", Json::Int(args.d as i64)),
                    ("r", Json::Float(args.r)),
                    ("energy_parametrization", Json::Float(a)),
                    ("lightcone_parametrization", Json::Float(b.value)),
                    ("rel_err", Json::Float(rel)),
                    ("tolerance", Json::Float(1e-8)),
                    ("pass", Json::Bool(pass)),
                ]),
                pass,
            )
        }
        MeasureCheck::Fiber => {
            if args.d != 2 {
                return Err("fiber check is configured for d = 2".into());
            }
            let f = |p: &[f64]| {
                let u = (p[0] - 4.0, p[1] - 1.0);
                (-2.0 * (u.0 * u.0 + u.1 * u.1)).exp()
            };
            let lc_quad = QuadratureSpec::gauss(args.nodes.min(128), vec![0.05], vec![9.0]);
            let rep = fiber_decomposition_check(
                f,
                2,
                (&[0.5, -3.0], &[8.0, 5.0]),
                args.nodes.min(128),
                &lc_quad,
                (-20.0, 55.0),
                args.nodes.max(120),
            )
            .map_err(|e| e.to_string())?;
            let pass = rep.rel_err <= 1e-6;
            (
                Json::object(vec![
                    ("check", Json::Str("fiber".into())),
                    ("d", Json::Int(2)),
                    ("lebesgue", Json::Float(rep.lebesgue)),
                    ("iterated_over_shells", Json::Float(rep.iterated)),
                    ("rel_err", Json::Float(rep.rel_err)),
                    ("tolerance", Json::Float(1e-6)),
                    ("pass", Json::Bool(pass)),
                ]),
                pass,
            )
        }
    };
    let path = out_path(args.out, "measure.json");
    write_artifact(&path, &doc.render())?;
    println!("measure check: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

struct CommutatorConfig {
    d: usize,
    level: u64,
    f: SeparableSpec,
    g: SeparableSpec,
    sampling_half_width: f64,
    sampling_nodes: usize,
    direction: Vec<f64>,
    radii: Vec<f64>,
    epsilon: f64,
}

fn spec_from_value(
    v: &serde_json::Value,
    d: usize,
    level: u64,
) -> Result<SeparableSpec, String> {
    let kind = match v.get("kind").and_then(|k| k.as_str()) {
        Some("bump") => ProfileKind::Bump,
        Some("gaussian") => ProfileKind::Gaussian,
        other => return Err(format!("profile kind must be bump|gaussian, got {other:?}")),
    };
    let get_list = |key: &str| -> Result<Vec<f64>, String> {
        v.get(key)
            .and_then(|x| x.as_array())
            .ok_or(format!("missing array '{key}'"))?
            .iter()
            .map(|x| x.as_f64().ok_or(format!("non-numeric entry in '{key}'")))
            .collect()
    };
    let center = get_list("center")?;
    let widths = get_list("widths")?;
    if center.len() != d || widths.len() != d {
        return Err(format!("center/widths must have {d} entries"));
    }
    // Polarization: a single spatial oscillator of mode `level`, rotated to
    // be real in the distinguished conjugation.
    let polarization = FockVector::<Complex64>::from_factors(d, &[(level as u32, 1)])
        .scaled(&Complex64::new(0.0, 1.0));
    SeparableSpec::new(kind, center, widths, Complex64::new(1.0, 0.0), polarization)
        .map_err(|e| e.to_string())
}

fn load_commutator_config(path: &Path) -> Result<CommutatorConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let d = v.get("d").and_then(|x| x.as_u64()).unwrap_or(2) as usize;
    if d != 2 {
        return Err("commutator configurations support d = 2".into());
    }
    let level = v.get("level").and_then(|x| x.as_u64()).unwrap_or(2);
    if level < 1 {
        return Err("polarization level must be >= 1 (no tachyon)".into());
    }
    let f = spec_from_value(v.get("f").ok_or("missing 'f'")?, d, level)?;
    let g = spec_from_value(v.get("g").ok_or("missing 'g'")?, d, level)?;
    let sampling = v.get("sampling").cloned().unwrap_or(serde_json::json!({}));
    let sampling_half_width = sampling
        .get("half_width")
        .and_then(|x| x.as_f64())
        .unwrap_or(200.0);
    let sampling_nodes = sampling
        .get("nodes")
        .and_then(|x| x.as_u64())
        .unwrap_or(2048) as usize;
    let direction = match v.get("direction") {
        Some(arr) => arr
            .as_array()
            .ok_or("'direction' must be an array")?
            .iter()
            .map(|x| x.as_f64().ok_or("non-numeric direction entry".to_string()))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![0.45, 1.0],
    };
    let radii = match v.get("radii") {
        Some(arr) => arr
            .as_array()
            .ok_or("'radii' must be an array")?
            .iter()
            .map(|x| x.as_f64().ok_or("non-numeric radius".to_string()))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![2.0, 4.0, 8.0, 16.0],
    };
    let epsilon = v.get("epsilon").and_then(|x| x.as_f64()).unwrap_or(0.1);
    Ok(CommutatorConfig {
        d,
        level,
        f,
        g,
        sampling_half_width,
        sampling_nodes,
        direction,
        radii,
        epsilon,
    })
}

fn cmd_commutator(args: CommutatorArgs) -> Result<bool, String> {
    let cfg = load_commutator_config(&args.config)?;
    let r = 2.0 * (cfg.level as f64 - 1.0);
    let sampling = ShellSampling::forward_energy_box(
        r,
        cfg.d,
        &[-cfg.sampling_half_width],
        &[cfg.sampling_half_width],
        cfg.sampling_nodes,
    );
    let samplings = [sampling];
    let f = TestFunctionSpec::Separable(cfg.f.clone());
    let g = TestFunctionSpec::Separable(cfg.g.clone());

    match args.scan.as_deref() {
        None => {
            let value = smeared_commutator(&f, &g, &samplings).map_err(|e| e.to_string())?;
            let doc = Json::object(vec![
                ("r", Json::Float(r)),
                ("re", Json::Float(value.re)),
                ("im", Json::Float(value.im)),
                ("abs", Json::Float(value.norm())),
            ]);
            let path = out_path(args.out, "commutator.json");
            write_artifact(&path, &doc.render())?;
            println!("commutator = {} + {}i", format_f64(value.re), format_f64(value.im));
            Ok(true)
        }
        Some("spacelike") => {
            if !is_spacelike_direction(&cfg.direction, cfg.epsilon) {
                return Err("configured direction is not spacelike".into());
            }
            let reference = smeared_commutator(&f, &g, &samplings)
                .map_err(|e| e.to_string())?
                .norm();
            let table = decay_scan(
                &cfg.f,
                &g,
                &cfg.direction,
                &cfg.radii,
                &samplings,
                cfg.epsilon,
            )
            .map_err(|e| e.to_string())?;
            let mut csv = String::from("radius,re,im,reference_scale\n");
            for (radius, value) in &table {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    format_f64(*radius),
                    format_f64(value.re),
                    format_f64(value.im),
                    format_f64(reference)
                ));
            }
            let path = out_path(args.out, "commutator_scan.csv");
            write_artifact(&path, &csv)?;
            println!("log-log slope: {}", format_f64(log_log_slope(&table)));
            Ok(true)
        }
        Some(other) => Err(format!("unknown scan mode '{other}'")),
    }
}

fn cmd_decay_scan(args: DecayScanArgs) -> Result<bool, String> {
    if args.d != 2 {
        return Err("decay scan is configured for d = 2".into());
    }
    let direction = parse_f64_list(&args.direction)?;
    if direction.len() != args.d {
        return Err(format!("direction needs {} components", args.d));
    }
    let radii = parse_f64_list(&args.radii)?;
    let polarization = FockVector::<Complex64>::from_factors(args.d, &[(args.level as u32, 1)])
        .scaled(&Complex64::new(0.0, 1.0));
    let f = SeparableSpec::new(
        ProfileKind::Gaussian,
        vec![0.0; args.d],
        vec![args.width; args.d],
        Complex64::new(1.0, 0.0),
        polarization.clone(),
    )
    .map_err(|e| e.to_string())?;
    let g = TestFunctionSpec::Separable(f.clone());
    let r = 2.0 * (args.level as f64 - 1.0);
    let samplings = [ShellSampling::forward_energy_box(
        r,
        args.d,
        &[-args.momentum_box],
        &[args.momentum_box],
        args.nodes,
    )];
    let table = decay_scan(&f, &g, &direction, &radii, &samplings, args.epsilon)
        .map_err(|e| e.to_string())?;
    let slope = log_log_slope(&table);
    let mut csv = String::from("radius,re,im,abs\n");
    for (radius, value) in &table {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_f64(*radius),
            format_f64(value.re),
            format_f64(value.im),
            format_f64(value.norm())
        ));
    }
    csv.push_str(&format!("# log-log slope: {}\n", format_f64(slope)));
    let path = out_path(args.out, "decay_scan.csv");
    write_artifact(&path, &csv)?;
    println!("fitted log-log slope: {}", format_f64(slope));
    Ok(true)
}

fn cmd_field_ccr(args: FieldCcrArgs) -> Result<bool, String> {
    let (d, level) = match &args.config {
        None => (4usize, 1u64),
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            (
                v.get("d").and_then(|x| x.as_u64()).unwrap_or(4) as usize,
                v.get("level").and_then(|x| x.as_u64()).unwrap_or(1),
            )
        }
    };
    let lab = build_orbit_lab(d, level, 0, 1).map_err(|e| e.to_string())?;
    let b = lab.dss.num_orbitals();
    // Deterministic pseudo-random coefficient battery.
    let mut seed = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
    };
    let (kprime, _) = lab.probe_battery(4);
    let mut max_residual = 0.0f64;
    let mut checks = 0usize;
    for _ in 0..5 {
        let fv: Vec<Complex64> = (0..b).map(|_| Complex64::new(next(), next())).collect();
        let gv: Vec<Complex64> = (0..b).map(|_| Complex64::new(next(), next())).collect();
        for psi in &kprime {
            let r = field_commutator_residual(&fv, &gv, psi, &lab.dss)
                .map_err(|e| e.to_string())?;
            max_residual = max_residual.max(r);
            checks += 1;
        }
    }
    let pass = max_residual <= 1e-10;
    let doc = Json::object(vec![
        ("d", Json::Int(d as i64)),
        ("level", Json::Int(level as i64)),
        ("orbitals", Json::Int(b as i64)),
        ("checks", Json::Int(checks as i64)),
        ("max_residual", Json::Float(max_residual)),
        ("tolerance", Json::Float(1e-10)),
        ("pass", Json::Bool(pass)),
    ]);
    let path = out_path(args.out, "field_ccr.json");
    write_artifact(&path, &doc.render())?;
    println!(
        "field commutation residual over {checks} probes: max {} -> {}",
        format_f64(max_residual),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}

fn cmd_observable(args: ObservableArgs) -> Result<bool, String> {
    let lab = build_orbit_lab(args.d, args.level, 0, 1).map_err(|e| e.to_string())?;
    let r = 2.0 * (args.level as f64 - 1.0);
    let f = constrained_test_function(r, args.level, &lab.physical_section, 1.0)
        .map_err(|e| e.to_string())?;
    let (kprime, knull) = lab.probe_battery(4);
    let report = observable_lift_check(&f, &lab.dss, args.level, &kprime, &knull)
        .map_err(|e| e.to_string())?;
    let (c1, c2, c3) = report.passes(1e-8);
    let pass = c1 && c2 && c3;
    let doc = Json::object(vec![
        ("d", Json::Int(args.d as i64)),
        ("level", Json::Int(args.level as i64)),
        ("orbitals", Json::Int(lab.dss.num_orbitals() as i64)),
        (
            "outside_constrained_max",
            Json::Float(report.outside_constrained_max),
        ),
        ("null_pairing_max", Json::Float(report.null_pairing_max)),
        (
            "annihilator_residual_max",
            Json::Float(report.annihilator_residual_max),
        ),
        ("tolerance", Json::Float(1e-8)),
        (
            "conditions",
            Json::Array(vec![Json::Bool(c1), Json::Bool(c2), Json::Bool(c3)]),
        ),
        ("pass", Json::Bool(pass)),
    ]);
    let path = out_path(args.out, "observable.json");
    write_artifact(&path, &doc.render())?;
    println!(
        "observable-field conditions: preserve-constrained {c1}, preserve-null {c2}, annihilator {c3} -> {}",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}
