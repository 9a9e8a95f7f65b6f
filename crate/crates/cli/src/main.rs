//! `memdiff`: resolvent curves, cross-validation reports and regime
//! classification for the memory diffusion equation.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memdiff_core::inversion::InversionConfig;
use memdiff_core::resolvent::{uniform_grid, Curve};
use memdiff_core::route::{scalar_curve, Route, DEFAULT_MAX_DT};
use memdiff_core::special::{prabhakar_ml_detailed, MLParams, SeriesControl};
use memdiff_core::spectral::{operator_norm_curve, SpectralModel};
use memdiff_core::stability::{classify, theoretical_bound, RegimeClass};
use memdiff_core::symbols::{KernelParams, ScalarProblem};
use memdiff_core::verification::{verify_problem, VerifySettings};
use memdiff_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "memdiff", version, about = "Resolvent families of diffusion with tempered fractional memory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate E^{(k+1)}_{mu+1,k+1}(z) and report the number of terms used.
    #[command(allow_negative_numbers = true)]
    EvalMl {
        #[arg(long, short = 'm')]
        mu: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        z: f64,
    },
    /// Sample S(t) of a scalar problem on a uniform grid.
    #[command(allow_negative_numbers = true)]
    ScalarCurve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Series)]
        method: MethodArg,
        /// Compute even when the parameters are outside both generation regimes.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cross-check the three routes, the symbol inequalities and the decay bound.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Spectral bound used for the regime checks; defaults to rho.
        #[arg(long, short = 'w')]
        omega: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Report the generation regime and the decay estimate.
    #[command(allow_negative_numbers = true)]
    Classify {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, short = 'w')]
        omega: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// sup_n |S_n(t)| for the Dirichlet Laplacian on (0, L).
    #[command(allow_negative_numbers = true)]
    NormCurve {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        length: f64,
        #[arg(long, default_value_t = 16)]
        modes: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Laplace)]
        method: MethodArg,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, short = 'a')]
    alpha: f64,
    #[arg(long, short = 'b')]
    beta: f64,
    #[arg(long, short = 'm')]
    mu: f64,
}

#[derive(Args)]
struct ProblemArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, short = 'r')]
    rho: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 5.0)]
    tmax: f64,
    #[arg(long, default_value_t = 32)]
    points: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Series,
    Volterra,
    Laplace,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl MethodArg {
    fn route(self) -> Route {
        match self {
            MethodArg::Series => Route::Series(SeriesControl::default()),
            MethodArg::Volterra => Route::Volterra { max_dt: DEFAULT_MAX_DT, richardson: false },
            MethodArg::Laplace => Route::Laplace(InversionConfig::default()),
        }
    }
}

impl KernelArgs {
    fn params(&self) -> Result<KernelParams, Failure> {
        Ok(KernelParams::new(self.alpha, self.beta, self.mu)?)
    }
}

impl ProblemArgs {
    fn problem(&self) -> Result<ScalarProblem, Failure> {
        Ok(ScalarProblem::new(self.kernel.params()?, self.rho)?)
    }
}

impl GridArgs {
    fn times(&self) -> Result<Vec<f64>, Failure> {
        if self.points < 2 {
            return Err(Failure::usage(format!("--points must be at least 2, got {}", self.points)));
        }
        Ok(uniform_grid(self.tmax, self.points)?)
    }
}

/// A failed run: message plus process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Domain(_) => EXIT_USAGE,
            Error::Hypothesis(_) => EXIT_HYPOTHESIS,
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_NUMERICAL, message: format!("i/o error: {e}") }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("MEMDIFF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("MEMDIFF_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn require_supported(params: &KernelParams) -> Result<(), Failure> {
    if classify(params, 0.0).class.is_supported() {
        return Ok(());
    }
    Err(Failure {
        code: EXIT_HYPOTHESIS,
        message: format!(
            "alpha = {}, beta = {}, mu = {} is outside both generation regimes (use --force to compute anyway)",
            params.alpha, params.beta, params.mu
        ),
    })
}

fn write_curve(curve: &Curve, out: &OutArgs) -> Result<(), Failure> {
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => output::curve_csv(curve),
        Format::Json => output::curve_json(curve),
    };
    output::emit(&text, out.out.as_deref())?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    match cli.command {
        Command::EvalMl { mu, k, z } => {
            let v = prabhakar_ml_detailed(MLParams::new(mu, k)?, z, &SeriesControl::default())?;
            println!("{} {}", output::number(v.value), v.terms);
        }
        Command::ScalarCurve { problem, grid, method, force, out } => {
            let prob = problem.problem()?;
            if !force {
                require_supported(&prob.params)?;
            }
            let curve = scalar_curve(&prob, &grid.times()?, &method.route())?;
            write_curve(&curve, &out)?;
        }
        Command::Verify { problem, omega, grid, seed, out } => {
            if out.format == Some(Format::Csv) {
                return Err(Failure::usage("the verification report is JSON only"));
            }
            let prob = problem.problem()?;
            let mut settings = VerifySettings::for_problem(&prob);
            settings.omega = omega.unwrap_or(prob.rho);
            settings.t_max = grid.tmax;
            settings.points = grid.points;
            settings.seed = seed;
            let report = verify_problem(&prob, &settings)?;
            output::emit(&output::to_json(&report), out.out.as_deref())?;
            if !report.passes.all {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Classify { kernel, omega, out } => {
            let params = kernel.params()?;
            let regime = classify(&params, omega);
            let bound = if regime.decay_estimate_applies && regime.class.is_supported() {
                Some(theoretical_bound(&params, omega, 1.0)?)
            } else {
                None
            };
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => output::to_json(&output::Classification { regime, bound }),
                Format::Csv => output::classification_text(&regime, bound.as_ref()),
            };
            output::emit(&text, out.out.as_deref())?;
            if regime.class == RegimeClass::Unsupported {
                return Ok(EXIT_HYPOTHESIS);
            }
        }
        Command::NormCurve { kernel, length, modes, grid, method, out } => {
            let params = kernel.params()?;
            require_supported(&params)?;
            let model = SpectralModel::new(length, vec![1.0; modes])?;
            let norm = operator_norm_curve(&model, &params, &grid.times()?, &method.route())?;
            if norm.truncation_warning {
                eprintln!(
                    "warning: mode {modes} attains the norm on {:.1}% of the grid",
                    100.0 * norm.boundary_fraction
                );
            }
            write_curve(&norm.curve, &out)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("memdiff: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
