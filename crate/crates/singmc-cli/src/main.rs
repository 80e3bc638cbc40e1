//! `singmc` — Monte Carlo evaluation of weakly singular Volterra and ball
//! integrals from the command line.
//!
//! Reports go to standard output (JSON by default, CSV with `--format csv`),
//! diagnostics to standard error. Every run requires an explicit `--seed`;
//! identical invocations produce byte-identical output.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain error, 4 numerical
//! failure.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use singmc::estimate::{
    estimate_ball, estimate_direct, estimate_volterra, EstimateReport, EstimatorConfig, Integrand,
};
use singmc::expr::ExprAst;
use singmc::oracle::{quad_ball_refined, quad_volterra_refined, QuadScheme, QuadSpec};
use singmc::parametric::{estimate_parametric, ParamConfig, ParametricIntegrand, ThetaGrid};
use singmc::rng::RngStream;
use singmc::sampling::{
    sample_ball_beta, sample_polygonal_beta, sample_uniform_simplex, PolygonalMethod,
};
use singmc::specfun::{ball_constant, simplex_constant, w_n, AlphaVector, BallExponents};
use singmc::{Error, Real};

#[derive(Parser)]
#[command(
    name = "singmc",
    version,
    about = "Monte Carlo computation of multiple weakly singular integrals",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Importance estimate of a Volterra integral over the ordered simplex
    Simplex(SimplexArgs),
    /// Importance estimate of a weighted integral over the unit ball
    Ball(BallArgs),
    /// Direct (uniform-sampling) estimate of a Volterra integral, for comparison
    Direct(SimplexArgs),
    /// Dependent-trial parametric curve with a uniform confidence band
    Param(ParamArgs),
    /// Emit raw sample points from one of the samplers
    Sample(SampleArgs),
    /// Print the exact normalization constants
    Constants(ConstantsArgs),
    /// Deterministic quadrature oracle (low dimensions)
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Chain,
    Increments,
}

impl From<Method> for PolygonalMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Chain => PolygonalMethod::Chain,
            Method::Increments => PolygonalMethod::Increments,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    GaussJacobi,
    PowerSubstitution,
}

impl From<Scheme> for QuadScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::GaussJacobi => QuadScheme::GaussJacobi,
            Scheme::PowerSubstitution => QuadScheme::PowerSubstitution,
        }
    }
}

#[derive(Args)]
struct EstimateCommon {
    /// Integrand expression in s1..sn (see the expression language docs)
    #[arg(long)]
    integrand: String,
    /// Number of Monte Carlo samples
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Confidence level of the interval, in (0, 1)
    #[arg(long, default_value_t = 0.95)]
    confidence: Real,
    /// RNG seed (required: reproducibility is explicit)
    #[arg(long)]
    seed: u64,
    /// RNG substream index
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Worker threads the sample budget is split over
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SimplexArgs {
    /// Simplex exponents alpha_1..alpha_n, comma-separated (each < 1)
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Polygonal beta construction
    #[arg(long, value_enum, default_value_t = Method::Chain)]
    method: Method,
    #[command(flatten)]
    common: EstimateCommon,
}

#[derive(Args)]
struct BallArgs {
    /// Ball exponents A_1..A_n, comma-separated (each > -1)
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[command(flatten)]
    common: EstimateCommon,
}

#[derive(Args)]
struct ParamArgs {
    /// Simplex exponents alpha_1..alpha_n, comma-separated (each < 1)
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Parameter grid, `start:stop:count` per dimension, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Gaussian draws for the sup-norm quantile
    #[arg(long, default_value_t = ParamConfig::<Real>::DEFAULT_GAUSSIAN_DRAWS)]
    gaussian_draws: u64,
    /// Include the full covariance matrix in the JSON report
    #[arg(long)]
    include_covariance: bool,
    /// Polygonal beta construction
    #[arg(long, value_enum, default_value_t = Method::Chain)]
    method: Method,
    #[command(flatten)]
    common: EstimateCommon,
}

#[derive(Args)]
struct SampleArgs {
    /// Polygonal beta exponents (samples the simplex law)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Ball beta exponents (samples the ball law)
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Uniform law on the ordered simplex of this dimension
    #[arg(long)]
    uniform: Option<usize>,
    /// Polygonal beta construction (simplex law only)
    #[arg(long, value_enum, default_value_t = Method::Chain)]
    method: Method,
    /// Number of points
    #[arg(long, default_value_t = 10)]
    samples: u64,
    /// RNG seed
    #[arg(long)]
    seed: u64,
    /// RNG substream index
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Output format (json emits one JSON array per line)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Simplex exponents: prints K_{n,S} (and W_n when all equal)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Ball exponents: prints K_{n,B}
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    /// Simplex exponents (Volterra oracle, n <= 3)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Ball exponents (ball oracle, n <= 2)
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Integrand expression in s1..sn
    #[arg(long)]
    integrand: String,
    /// Quadrature nodes per axis
    #[arg(long, default_value_t = 32)]
    nodes: usize,
    /// Singularity-absorption scheme
    #[arg(long, value_enum, default_value_t = Scheme::GaussJacobi)]
    scheme: Scheme,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

// ---------------------------------------------------------------------------
// Error handling / exit codes
// ---------------------------------------------------------------------------

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Domain(_)) | CliError::Lib(Error::Unsupported(_)) => 3,
            CliError::Lib(Error::NonFinite { .. }) | CliError::Lib(Error::Numerical(_)) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("singmc: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers
// ---------------------------------------------------------------------------

fn parse_reals(text: &str, what: &str) -> Result<Vec<Real>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<Real>()
                .map_err(|_| CliError::usage(format!("{what}: `{p}` is not a number")))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<ThetaGrid<Real>, CliError> {
    let mut axes = Vec::new();
    for part in text.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(CliError::usage(format!(
                "grid axis `{part}` must be start:stop:count"
            )));
        }
        let start: Real = fields[0]
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("grid start `{}` is not a number", fields[0])))?;
        let stop: Real = fields[1]
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("grid stop `{}` is not a number", fields[1])))?;
        let count: usize = fields[2]
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("grid count `{}` is not an integer", fields[2])))?;
        axes.push((start, stop, count));
    }
    Ok(ThetaGrid::cartesian(&axes)?)
}

fn parse_integrand(text: &str, arity: usize, theta_dim: usize) -> Result<ExprAst, CliError> {
    let ast = ExprAst::parse(text)
        .map_err(|e| CliError::usage(format!("invalid --integrand expression: {e}")))?;
    ast.validate_arity(arity, theta_dim)?;
    Ok(ast)
}

fn scalar_integrand(text: &str, arity: usize) -> Result<Integrand<Real>, CliError> {
    let ast = parse_integrand(text, arity, 0)?;
    Ok(Integrand::new(arity, move |s: &[Real]| ast.eval(s, &[])))
}

fn estimator_config(
    common: &EstimateCommon,
    method: PolygonalMethod,
) -> Result<EstimatorConfig<Real>, CliError> {
    Ok(EstimatorConfig::new(common.samples, common.confidence)?
        .with_workers(common.workers)?
        .with_method(method))
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("report serialization cannot fail")
    );
}

fn csv_row(values: &[String]) -> String {
    values.join(",")
}

fn fmt_real(x: Real) -> String {
    format!("{x}")
}

fn print_estimate(report: &EstimateReport<Real>, format: Format) {
    match format {
        Format::Json => print_json(report),
        Format::Csv => {
            println!(
                "estimate,std_error,ci_low,ci_high,n_samples,constant,second_moment,seed,n_workers"
            );
            println!(
                "{}",
                csv_row(&[
                    fmt_real(report.estimate),
                    fmt_real(report.std_error),
                    fmt_real(report.ci_low),
                    fmt_real(report.ci_high),
                    report.n_samples.to_string(),
                    fmt_real(report.constant),
                    fmt_real(report.second_moment),
                    report.seed.to_string(),
                    report.n_workers.to_string(),
                ])
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simplex(args) => run_simplex(args),
        Command::Ball(args) => run_ball(args),
        Command::Direct(args) => run_direct(args),
        Command::Param(args) => run_param(args),
        Command::Sample(args) => run_sample(args),
        Command::Constants(args) => run_constants(args),
        Command::Oracle(args) => run_oracle(args),
    }
}

fn run_simplex(args: SimplexArgs) -> Result<(), CliError> {
    let alpha = AlphaVector::new(parse_reals(&args.alpha, "--alpha")?)?;
    let z = scalar_integrand(&args.common.integrand, alpha.dim())?;
    let cfg = estimator_config(&args.common, args.method.into())?;
    let mut rng = RngStream::new(args.common.seed, args.common.stream);
    let report = estimate_volterra(&z, &alpha, &cfg, &mut rng)?;
    print_estimate(&report, args.common.format);
    Ok(())
}

fn run_ball(args: BallArgs) -> Result<(), CliError> {
    let a = BallExponents::new(parse_reals(&args.a, "--a")?)?;
    let z = scalar_integrand(&args.common.integrand, a.dim())?;
    let cfg = estimator_config(&args.common, PolygonalMethod::Chain)?;
    let mut rng = RngStream::new(args.common.seed, args.common.stream);
    let report = estimate_ball(&z, &a, &cfg, &mut rng)?;
    print_estimate(&report, args.common.format);
    Ok(())
}

fn run_direct(args: SimplexArgs) -> Result<(), CliError> {
    let alpha = AlphaVector::new(parse_reals(&args.alpha, "--alpha")?)?;
    let z = scalar_integrand(&args.common.integrand, alpha.dim())?;
    let cfg = estimator_config(&args.common, args.method.into())?;
    let mut rng = RngStream::new(args.common.seed, args.common.stream);
    let report = estimate_direct(&z, &alpha, &cfg, &mut rng)?;
    match args.common.format {
        Format::Json => print_json(&report),
        Format::Csv => {
            println!(
                "estimate,std_error,ci_low,ci_high,n_samples,constant,second_moment,seed,n_workers,unreliable"
            );
            let r = &report.report;
            println!(
                "{}",
                csv_row(&[
                    fmt_real(r.estimate),
                    fmt_real(r.std_error),
                    fmt_real(r.ci_low),
                    fmt_real(r.ci_high),
                    r.n_samples.to_string(),
                    fmt_real(r.constant),
                    fmt_real(r.second_moment),
                    r.seed.to_string(),
                    r.n_workers.to_string(),
                    report.unreliable.to_string(),
                ])
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ParamOutput {
    q_hat: Vec<Real>,
    band_halfwidth: Real,
    sup_quantile: Real,
    n_samples: u64,
    n_gaussian_draws: u64,
    seed: u64,
    grid: Vec<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance: Option<Vec<Vec<Real>>>,
}

fn run_param(args: ParamArgs) -> Result<(), CliError> {
    let alpha = AlphaVector::new(parse_reals(&args.alpha, "--alpha")?)?;
    let grid = parse_grid(&args.grid)?;
    let ast = parse_integrand(&args.common.integrand, alpha.dim(), grid.dim())?;
    let zfam = ParametricIntegrand::new(alpha.dim(), grid.dim(), move |s: &[Real], t: &[Real]| {
        ast.eval(s, t)
    });
    let cfg = ParamConfig::new(args.common.samples, args.common.confidence, args.gaussian_draws)?
        .with_workers(args.common.workers)?
        .with_method(args.method.into());
    let mut rng = RngStream::new(args.common.seed, args.common.stream);
    let report = estimate_parametric(&zfam, &alpha, &grid, &cfg, &mut rng)?;
    match args.common.format {
        Format::Json => {
            let out = ParamOutput {
                q_hat: report.q_hat.clone(),
                band_halfwidth: report.band_halfwidth,
                sup_quantile: report.sup_quantile,
                n_samples: report.n_samples,
                n_gaussian_draws: report.n_gaussian_draws,
                seed: report.seed,
                grid: grid.points().to_vec(),
                covariance: args.include_covariance.then(|| report.covariance.clone()),
            };
            print_json(&out);
        }
        Format::Csv => {
            let mut header = String::new();
            for d in 1..=grid.dim() {
                let _ = write!(header, "theta_{d},");
            }
            println!("{header}q_hat,lower,upper");
            for (point, &q) in grid.points().iter().zip(&report.q_hat) {
                let mut row: Vec<String> = point.iter().map(|&t| fmt_real(t)).collect();
                row.push(fmt_real(q));
                row.push(fmt_real(q - report.band_halfwidth));
                row.push(fmt_real(q + report.band_halfwidth));
                println!("{}", csv_row(&row));
            }
        }
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> Result<(), CliError> {
    let chosen = [
        args.alpha.is_some(),
        args.a.is_some(),
        args.uniform.is_some(),
    ]
    .iter()
    .filter(|&&x| x)
    .count();
    if chosen != 1 {
        return Err(CliError::usage(
            "sample needs exactly one of --alpha, --a, --uniform",
        ));
    }
    let mut rng = RngStream::new(args.seed, args.stream);
    type PointSampler = Box<dyn FnMut(&mut RngStream) -> Result<Vec<Real>, Error>>;
    let mut emit = |label: &str, dim: usize, mut next: PointSampler| -> Result<(), CliError> {
        if let Format::Csv = args.format {
            let header: Vec<String> = (1..=dim).map(|k| format!("{label}{k}")).collect();
            println!("{}", csv_row(&header));
        }
        for _ in 0..args.samples {
            let point = next(&mut rng)?;
            match args.format {
                Format::Json => print_json(&point),
                Format::Csv => {
                    let row: Vec<String> = point.iter().map(|&c| fmt_real(c)).collect();
                    println!("{}", csv_row(&row));
                }
            }
        }
        Ok(())
    };

    if let Some(alpha) = &args.alpha {
        let alpha = AlphaVector::new(parse_reals(alpha, "--alpha")?)?;
        let method: PolygonalMethod = args.method.into();
        let dim = alpha.dim();
        emit(
            "s",
            dim,
            Box::new(move |rng| Ok(sample_polygonal_beta(&alpha, rng, method)?.into_inner())),
        )
    } else if let Some(a) = &args.a {
        let a = BallExponents::new(parse_reals(a, "--a")?)?;
        let dim = a.dim();
        emit(
            "x",
            dim,
            Box::new(move |rng| Ok(sample_ball_beta(&a, rng)?.into_inner())),
        )
    } else {
        let n = args.uniform.expect("checked above");
        emit(
            "s",
            n,
            Box::new(move |rng| Ok(sample_uniform_simplex(n, rng)?.into_inner())),
        )
    }
}

#[derive(Serialize)]
struct ConstantsOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_simplex: Option<Real>,
    /// W_n(beta) when all simplex exponents are equal (beta = 1 - alpha)
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_ball: Option<Real>,
}

fn run_constants(args: ConstantsArgs) -> Result<(), CliError> {
    if args.alpha.is_none() && args.a.is_none() {
        return Err(CliError::usage("constants needs --alpha and/or --a"));
    }
    let mut out = ConstantsOutput {
        alpha: None,
        k_simplex: None,
        w: None,
        a: None,
        k_ball: None,
    };
    if let Some(alpha) = &args.alpha {
        let alpha = AlphaVector::new(parse_reals(alpha, "--alpha")?)?;
        out.k_simplex = Some(simplex_constant(&alpha));
        let exps = alpha.exponents();
        if exps.iter().all(|&x| x == exps[0]) {
            let beta = 1.0 - exps[0];
            if beta > 0.0 && beta <= 1.0 {
                out.w = Some(w_n(beta, alpha.dim())?);
            }
        }
        out.alpha = Some(exps.to_vec());
    }
    if let Some(a) = &args.a {
        let a = BallExponents::new(parse_reals(a, "--a")?)?;
        out.k_ball = Some(ball_constant(&a));
        out.a = Some(a.exponents().to_vec());
    }
    match args.format {
        Format::Json => print_json(&out),
        Format::Csv => {
            let mut header = Vec::new();
            let mut row = Vec::new();
            if let Some(k) = out.k_simplex {
                header.push("k_simplex".to_string());
                row.push(fmt_real(k));
            }
            if let Some(w) = out.w {
                header.push("w".to_string());
                row.push(fmt_real(w));
            }
            if let Some(k) = out.k_ball {
                header.push("k_ball".to_string());
                row.push(fmt_real(k));
            }
            println!("{}", csv_row(&header));
            println!("{}", csv_row(&row));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    value: Real,
    value_refined: Real,
    error_estimate: Real,
    nodes: usize,
    scheme: &'static str,
}

fn run_oracle(args: OracleArgs) -> Result<(), CliError> {
    if args.alpha.is_some() == args.a.is_some() {
        return Err(CliError::usage("oracle needs exactly one of --alpha, --a"));
    }
    let spec = QuadSpec::new(args.nodes, args.scheme.into())?;
    let quad = if let Some(alpha) = &args.alpha {
        let alpha = AlphaVector::new(parse_reals(alpha, "--alpha")?)?;
        let z = scalar_integrand(&args.integrand, alpha.dim())?;
        quad_volterra_refined(&z, &alpha, &spec)?
    } else {
        let a = BallExponents::new(parse_reals(args.a.as_ref().unwrap(), "--a")?)?;
        let z = scalar_integrand(&args.integrand, a.dim())?;
        quad_ball_refined(&z, &a, &spec)?
    };
    let out = OracleOutput {
        value: quad.value,
        value_refined: quad.refined,
        error_estimate: quad.error_estimate(),
        nodes: args.nodes,
        scheme: match args.scheme {
            Scheme::GaussJacobi => "gauss-jacobi",
            Scheme::PowerSubstitution => "power-substitution",
        },
    };
    match args.format {
        Format::Json => print_json(&out),
        Format::Csv => {
            println!("value,value_refined,error_estimate,nodes,scheme");
            println!(
                "{}",
                csv_row(&[
                    fmt_real(out.value),
                    fmt_real(out.value_refined),
                    fmt_real(out.error_estimate),
                    out.nodes.to_string(),
                    out.scheme.to_string(),
                ])
            );
        }
    }
    Ok(())
}
