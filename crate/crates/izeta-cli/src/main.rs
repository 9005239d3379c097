//! Command-line driver: reproducible ensemble experiments with
//! machine-readable reports.
//!
//! Every command prints a JSON report to stdout (with wall-clock timing) and
//! can mirror the same report, minus timing, to a file via --out. Reports
//! with identical flag sets are byte-identical, whatever the thread count.

use clap::{Args, Parser, Subcommand, ValueEnum};
use izeta::ensemble::{
    build_h, empirical_moments, esd, log_zeta_normalized, theta_term, xi_finite, SpectralMeasure,
};
use izeta::graph::{
    complete_graph, cycle_graph, path_graph, petersen_graph, replica_rng, sample_er_graph,
    EnsembleParams, GraphSample,
};
use izeta::ihara::{bass_identity_check, ihara_rhs_log, zeta_log_series_check};
use izeta::limits::{
    correction_r1, limit_moment_closed, semicircle_cdf, xi_limit, CorrectionWeighting,
};
use izeta::linalg::sym_eigenvalues;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const SCHEMA: &str = "izeta/1";
const VERIFY_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "izeta",
    version,
    about = "Spectral statistics of sparse random graphs and their zeta functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replica-averaged spectral moments with limit values and corrections
    Moments(MomentsArgs),
    /// Pooled empirical spectral distribution, histogram and KS distance
    Esd(EsdArgs),
    /// Verify the zeta identities on one graph; nonzero exit on residuals
    ZetaVerify(ZetaVerifyArgs),
    /// Scan the shifted log-determinant over a grid of v values
    Xi(XiArgs),
}

#[derive(Args)]
struct CommonOut {
    /// Mirror the report (without timing) to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the --out file
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on worker threads; replica results never depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct MomentsArgs {
    /// Vertices per replica
    #[arg(long)]
    n: usize,
    /// Edge density: each pair is an edge with probability rho/n
    #[arg(long)]
    rho: f64,
    /// Matrix scale v
    #[arg(long, allow_negative_numbers = true)]
    v: f64,
    /// Master seed; replica r draws from stream r
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of independent replicas
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    /// Highest moment order
    #[arg(long = "k-max", default_value_t = 6)]
    k_max: u32,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct EsdArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long, allow_negative_numbers = true)]
    v: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    replicas: usize,
    /// Histogram bin count
    #[arg(long, default_value_t = 60)]
    bins: usize,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct ZetaVerifyArgs {
    /// Built-in graph: c3, c5, k4, petersen, path2
    #[arg(long, conflicts_with = "graph")]
    builtin: Option<String>,
    /// Edge-list file: header "n m", then one "a b" line per edge
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Series truncation order
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Edge density for the matched-point consistency check
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Scale for the matched-point consistency check
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    v: f64,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct XiArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rho: f64,
    /// Grid point; repeat for a grid (default -0.45 .. -0.05 step 0.05)
    #[arg(long = "v", allow_negative_numbers = true)]
    v: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    replicas: usize,
    /// Quadrature nodes for the limit integral
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    schema: &'a str,
    config: &'a C,
    results: &'a R,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Moments(a) => run_moments(a, started),
        Command::Esd(a) => run_esd(a, started),
        Command::ZetaVerify(a) => run_zeta_verify(a, started),
        Command::Xi(a) => run_xi(a, started),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                izeta::Error::InvalidParam(_) | izeta::Error::Parse(_) | izeta::Error::Io(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn install_pool(threads: Option<usize>) -> izeta::Result<Option<rayon::ThreadPool>> {
    match threads {
        None => Ok(None),
        Some(0) => Err(izeta::Error::InvalidParam(
            "--threads must be at least 1".into(),
        )),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(Some)
            .map_err(|e| izeta::Error::InvalidParam(format!("thread pool: {e}"))),
    }
}

fn in_pool<T: Send>(
    pool: &Option<rayon::ThreadPool>,
    f: impl FnOnce() -> izeta::Result<T> + Send,
) -> izeta::Result<T> {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn emit<C: Serialize, R: Serialize>(
    out: &CommonOut,
    config: &C,
    results: &R,
    csv: impl FnOnce() -> String,
    started: Instant,
) -> izeta::Result<()> {
    if let Some(path) = &out.out {
        let body = match out.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&Report {
                    schema: SCHEMA,
                    config,
                    results,
                    timing_ms: None,
                })
                .map_err(|e| izeta::Error::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Csv => csv(),
        };
        std::fs::write(path, body)?;
    }
    let stdout_report = serde_json::to_string_pretty(&Report {
        schema: SCHEMA,
        config,
        results,
        timing_ms: Some(started.elapsed().as_millis()),
    })
    .map_err(|e| izeta::Error::Io(e.to_string()))?;
    println!("{stdout_report}");
    Ok(())
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

// ---------------- moments ----------------

#[derive(Serialize)]
struct MomentsConfig {
    command: &'static str,
    n: usize,
    rho: f64,
    v: f64,
    seed: u64,
    replicas: usize,
    k_max: u32,
}

#[derive(Serialize)]
struct MomentRow {
    k: u32,
    mean: f64,
    stderr: f64,
    limit: f64,
    gap: f64,
    rho_gap: f64,
    correction: f64,
}

#[derive(Serialize)]
struct MomentsResults {
    rows: Vec<MomentRow>,
}

fn run_moments(a: MomentsArgs, started: Instant) -> izeta::Result<ExitCode> {
    let pool = install_pool(a.out.threads)?;
    let params = EnsembleParams::new(a.n, a.rho)?;
    let est = in_pool(&pool, || {
        empirical_moments(&params, a.v, a.k_max, a.replicas, a.seed)
    })?;
    let mut rows = Vec::new();
    for k in 1..=a.k_max {
        let limit = limit_moment_closed(k, a.v)?;
        let mean = est.mean[k as usize];
        let gap = mean - limit;
        rows.push(MomentRow {
            k,
            mean,
            stderr: est.stderr[k as usize],
            limit,
            gap,
            rho_gap: a.rho * gap,
            correction: correction_r1(k, a.v, CorrectionWeighting::PerTermPower)?,
        });
    }
    let config = MomentsConfig {
        command: "moments",
        n: a.n,
        rho: a.rho,
        v: a.v,
        seed: a.seed,
        replicas: a.replicas,
        k_max: a.k_max,
    };
    let results = MomentsResults { rows };
    emit(
        &a.out,
        &config,
        &results,
        || {
            let mut s = csv_line(&[
                "k".into(),
                "mean".into(),
                "stderr".into(),
                "limit".into(),
                "gap".into(),
                "rho_gap".into(),
                "correction".into(),
            ]);
            for r in &results.rows {
                s.push_str(&csv_line(&[
                    r.k.to_string(),
                    r.mean.to_string(),
                    r.stderr.to_string(),
                    r.limit.to_string(),
                    r.gap.to_string(),
                    r.rho_gap.to_string(),
                    r.correction.to_string(),
                ]));
            }
            s
        },
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

// ---------------- esd ----------------

#[derive(Serialize)]
struct EsdConfig {
    command: &'static str,
    n: usize,
    rho: f64,
    v: f64,
    seed: u64,
    replicas: usize,
    bins: usize,
}

#[derive(Serialize)]
struct HistogramBin {
    bin_left: f64,
    bin_right: f64,
    empirical_density: f64,
    limit_density: f64,
}

#[derive(Serialize)]
struct EsdResults {
    ks_distance: f64,
    eigenvalue_count: usize,
    bins: Vec<HistogramBin>,
}

fn run_esd(a: EsdArgs, started: Instant) -> izeta::Result<ExitCode> {
    if a.bins == 0 {
        return Err(izeta::Error::InvalidParam("--bins must be positive".into()));
    }
    if a.replicas == 0 {
        return Err(izeta::Error::InvalidParam(
            "--replicas must be positive".into(),
        ));
    }
    let pool = install_pool(a.out.threads)?;
    let params = EnsembleParams::new(a.n, a.rho)?;
    let spectra: Vec<Vec<f64>> = in_pool(&pool, || {
        (0..a.replicas)
            .into_par_iter()
            .map(|r| {
                let mut rng = replica_rng(a.seed, r as u64);
                let g = sample_er_graph(&params, &mut rng);
                Ok(esd(&g, a.rho, a.v)?.values().to_vec())
            })
            .collect::<izeta::Result<_>>()
    })?;
    let pooled: Vec<f64> = spectra.into_iter().flatten().collect();
    let measure = SpectralMeasure::from_values(pooled)?;

    // against an atomic limit (v = 0) the supremum is read at the
    // breakpoints themselves; against the continuous density both sides of
    // each jump count
    let ks = if a.v == 0.0 {
        measure.ks_distance_at_breakpoints(|x| semicircle_cdf(a.v, x))
    } else {
        measure.ks_distance(|x| semicircle_cdf(a.v, x))
    };

    let vals = measure.values();
    let lo = vals[0].min(a.v * a.v - 2.0 * a.v.abs());
    let hi = vals[vals.len() - 1].max(a.v * a.v + 2.0 * a.v.abs());
    let width = (hi - lo).max(1e-9) / a.bins as f64;
    let total = vals.len() as f64;
    // bins are [left, right), except the last which also takes the right edge
    let start_index = |x: f64| vals.partition_point(|&l| l < x);
    let mut bins = Vec::with_capacity(a.bins);
    for b in 0..a.bins {
        let left = lo + b as f64 * width;
        let right = lo + (b + 1) as f64 * width;
        let count = if b + 1 == a.bins {
            vals.len() - start_index(left)
        } else {
            start_index(right) - start_index(left)
        };
        bins.push(HistogramBin {
            bin_left: left,
            bin_right: right,
            empirical_density: count as f64 / (total * width),
            limit_density: (semicircle_cdf(a.v, right) - semicircle_cdf(a.v, left)) / width,
        });
    }
    let config = EsdConfig {
        command: "esd",
        n: a.n,
        rho: a.rho,
        v: a.v,
        seed: a.seed,
        replicas: a.replicas,
        bins: a.bins,
    };
    let results = EsdResults {
        ks_distance: ks,
        eigenvalue_count: measure.len(),
        bins,
    };
    emit(
        &a.out,
        &config,
        &results,
        || {
            let mut s = csv_line(&[
                "bin_left".into(),
                "bin_right".into(),
                "empirical_density".into(),
                "limit_density".into(),
            ]);
            for b in &results.bins {
                s.push_str(&csv_line(&[
                    b.bin_left.to_string(),
                    b.bin_right.to_string(),
                    b.empirical_density.to_string(),
                    b.limit_density.to_string(),
                ]));
            }
            s
        },
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

// ---------------- zeta-verify ----------------

#[derive(Serialize)]
struct ZetaVerifyConfig {
    command: &'static str,
    graph: String,
    order: usize,
    rho: f64,
    v: f64,
}

#[derive(Serialize)]
struct ZetaVerifyResults {
    edge_operator_residual_max: f64,
    series_residual: f64,
    series_tail_bound: f64,
    series_excess: f64,
    matched_point_residual: f64,
    pass: bool,
}

fn load_graph(a: &ZetaVerifyArgs) -> izeta::Result<(String, GraphSample)> {
    match (&a.builtin, &a.graph) {
        (Some(name), None) => {
            let g = match name.as_str() {
                "c3" => cycle_graph(3)?,
                "c5" => cycle_graph(5)?,
                "k4" => complete_graph(4)?,
                "petersen" => petersen_graph(),
                "path2" => path_graph(2)?,
                other => {
                    return Err(izeta::Error::InvalidParam(format!(
                        "unknown builtin graph '{other}' (try c3, c5, k4, petersen, path2)"
                    )))
                }
            };
            Ok((name.clone(), g))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            Ok((path.display().to_string(), GraphSample::from_text(&text)?))
        }
        (None, None) => Err(izeta::Error::InvalidParam(
            "zeta-verify needs --builtin or --graph".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn run_zeta_verify(a: ZetaVerifyArgs, started: Instant) -> izeta::Result<ExitCode> {
    let (label, g) = load_graph(&a)?;
    if a.order == 0 {
        return Err(izeta::Error::InvalidParam("--order must be positive".into()));
    }

    // fixed probe points well inside the convergence disc of every small graph
    let probes = [
        Complex64::new(0.2, 0.0),
        Complex64::new(-0.15, 0.0),
        Complex64::new(0.1, 0.2),
        Complex64::new(0.0, 0.3),
    ];
    let mut edge_residual_max = 0.0f64;
    for &u in &probes {
        edge_residual_max = edge_residual_max.max(bass_identity_check(&g, u)?);
    }

    let u_series = (0.1f64).min(1.0 / (2.0 * g.max_degree().max(1) as f64));
    let series = zeta_log_series_check(&g, u_series, a.order)?;
    let series_excess = (series.residual - series.tail_bound).max(0.0);

    // the spectral split at the matched point must agree with the direct
    // determinant evaluation
    let u = a.v / a.rho.sqrt();
    let parts = log_zeta_normalized(&g, a.rho, a.v)?;
    let direct = ihara_rhs_log(&g, Complex64::new(u, 0.0))?;
    let matched_point_residual =
        (parts.total - direct.log_modulus / g.n() as f64).abs() + direct.arg.abs();

    let pass = edge_residual_max <= VERIFY_TOL
        && series_excess <= VERIFY_TOL
        && matched_point_residual <= VERIFY_TOL;

    let config = ZetaVerifyConfig {
        command: "zeta-verify",
        graph: label,
        order: a.order,
        rho: a.rho,
        v: a.v,
    };
    let results = ZetaVerifyResults {
        edge_operator_residual_max: edge_residual_max,
        series_residual: series.residual,
        series_tail_bound: series.tail_bound,
        series_excess,
        matched_point_residual,
        pass,
    };
    emit(
        &a.out,
        &config,
        &results,
        || {
            let mut s = csv_line(&[
                "edge_operator_residual_max".into(),
                "series_residual".into(),
                "series_tail_bound".into(),
                "series_excess".into(),
                "matched_point_residual".into(),
                "pass".into(),
            ]);
            s.push_str(&csv_line(&[
                results.edge_operator_residual_max.to_string(),
                results.series_residual.to_string(),
                results.series_tail_bound.to_string(),
                results.series_excess.to_string(),
                results.matched_point_residual.to_string(),
                results.pass.to_string(),
            ]));
            s
        },
        started,
    )?;
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---------------- xi ----------------

#[derive(Serialize)]
struct XiConfig {
    command: &'static str,
    n: usize,
    rho: f64,
    v_grid: Vec<f64>,
    seed: u64,
    replicas: usize,
    nodes: usize,
}

#[derive(Serialize)]
struct XiRow {
    v: f64,
    xi_limit: f64,
    limit_defect: f64,
    xi_finite_mean: f64,
    replicas_with_negatives: usize,
    max_negative_count: usize,
    log_zeta_mean: Option<f64>,
    log_zeta_defined: usize,
}

#[derive(Serialize)]
struct XiResults {
    rows: Vec<XiRow>,
}

fn run_xi(a: XiArgs, started: Instant) -> izeta::Result<ExitCode> {
    if a.replicas == 0 {
        return Err(izeta::Error::InvalidParam(
            "--replicas must be positive".into(),
        ));
    }
    let pool = install_pool(a.out.threads)?;
    let params = EnsembleParams::new(a.n, a.rho)?;
    let grid: Vec<f64> = if a.v.is_empty() {
        (1..=9).map(|i| -0.05 * i as f64).rev().collect()
    } else {
        a.v.clone()
    };

    let mut rows = Vec::new();
    for &v in &grid {
        let xl = xi_limit(v, a.nodes)?;
        // one spectrum per replica, reused for both statistics
        let per: Vec<(f64, usize, Option<f64>)> = in_pool(&pool, || {
            (0..a.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = replica_rng(a.seed, r as u64);
                    let g = sample_er_graph(&params, &mut rng);
                    let h = build_h(&g, a.rho, v)?;
                    let evals = sym_eigenvalues(&h)?;
                    let rec = xi_finite(&evals, a.rho, v)?;
                    let log_zeta = if rec.negative_count == 0 {
                        let theta = theta_term(&g, Complex64::new(v / a.rho.sqrt(), 0.0))?;
                        Some(theta.re + rec.xi)
                    } else {
                        None
                    };
                    Ok((rec.xi, rec.negative_count, log_zeta))
                })
                .collect::<izeta::Result<_>>()
        })?;
        let xi_finite_mean = per.iter().map(|p| p.0).sum::<f64>() / a.replicas as f64;
        let replicas_with_negatives = per.iter().filter(|p| p.1 > 0).count();
        let max_negative_count = per.iter().map(|p| p.1).max().unwrap_or(0);
        let defined: Vec<f64> = per.iter().filter_map(|p| p.2).collect();
        let log_zeta_mean = if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        };
        rows.push(XiRow {
            v,
            xi_limit: xl,
            limit_defect: (v * v / 2.0 - xl).abs(),
            xi_finite_mean,
            replicas_with_negatives,
            max_negative_count,
            log_zeta_mean,
            log_zeta_defined: defined.len(),
        });
    }

    let config = XiConfig {
        command: "xi",
        n: a.n,
        rho: a.rho,
        v_grid: grid,
        seed: a.seed,
        replicas: a.replicas,
        nodes: a.nodes,
    };
    let results = XiResults { rows };
    emit(
        &a.out,
        &config,
        &results,
        || {
            let mut s = csv_line(&[
                "v".into(),
                "xi_limit".into(),
                "limit_defect".into(),
                "xi_finite_mean".into(),
                "replicas_with_negatives".into(),
                "max_negative_count".into(),
                "log_zeta_mean".into(),
                "log_zeta_defined".into(),
            ]);
            for r in &results.rows {
                s.push_str(&csv_line(&[
                    r.v.to_string(),
                    r.xi_limit.to_string(),
                    r.limit_defect.to_string(),
                    r.xi_finite_mean.to_string(),
                    r.replicas_with_negatives.to_string(),
                    r.max_negative_count.to_string(),
                    r.log_zeta_mean.map_or(String::new(), |x| x.to_string()),
                    r.log_zeta_defined.to_string(),
                ]));
            }
            s
        },
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}
