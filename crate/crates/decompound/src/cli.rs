//! The `decompound` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid input or arguments,
//! 3 undefined distinguished logarithm under `--strict`.

use std::ffi::OsString;
use std::io;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use decompound_core::distlog::{DEFAULT_JUMP_THRESHOLD, DEFAULT_MODULUS_FLOOR};
use decompound_core::estimator::{
    calibrate_c_h, truncation_level, BandwidthRule, DEFAULT_BETA, DEFAULT_C_M, DEFAULT_ETA,
    DEFAULT_FFT_SIZE,
};
use decompound_core::experiments::{self, PsiSource};
use decompound_core::{
    default_bandwidth, deconvolve_gaussian, ecf, estimate_density, simulate_observations, unwrap_log,
    EstimatorConfig, JumpLaw, LogStatus, ModelSpec, ObservationSet, UnwrapOptions, XGrid,
};

use crate::io::{self as fmt, ConfigPairs};
use crate::parallel;

/// `c_h` for which the bandwidth rule gives `h = 1/2` at `n = 5000`, `β = 0.45`.
fn default_c_h() -> f64 {
    calibrate_c_h(5000, DEFAULT_BETA, 0.5)
}

const BOOL_FLAGS: &[&str] = &["strict", "fft-grid", "oracle"];

#[derive(Debug, Parser)]
#[command(
    name = "decompound",
    version,
    about = "Jump-density estimation for compound Poisson processes observed in Gaussian noise",
    args_override_self = true
)]
struct Cli {
    /// File of `key=value` lines (or a previous output's `# config:` header).
    /// Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate increments X = Y + Z.
    Simulate(SimulateArgs),
    /// Estimate the jump density from a sample.
    Estimate(EstimateArgs),
    /// Monte Carlo study of the estimator at one point.
    McNormality(McArgs),
    /// Frequency of a vanishing ψ across sample sizes.
    Vanishing(VanishingArgs),
    /// Oracle bias against the rate implied by the decay of the jump cf.
    BiasStudy(BiasArgs),
    /// Estimate on the standard-normal example with n = 5000, h = 0.5.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Jump intensity λ.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Jump law: `normal` or `laplace`.
    #[arg(long, default_value = "normal")]
    jump: String,
    /// Sample size.
    #[arg(long, default_value_t = 5000)]
    n: usize,
}

#[derive(Debug, Args)]
struct SeedArg {
    #[arg(long, env = "DECOMPOUND_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output path; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BandwidthArgs {
    /// Bandwidth; when absent, h = c_h (ln n)^(-beta).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long = "c-h", default_value_t = default_c_h())]
    c_h: f64,
}

#[derive(Debug, Args)]
struct NumericArgs {
    /// Truncation constant: M_n = c_m ln n.
    #[arg(long = "c-m", default_value_t = DEFAULT_C_M)]
    c_m: f64,
    /// Frequency step.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// FFT length; a power of two.
    #[arg(long = "fft-size", default_value_t = DEFAULT_FFT_SIZE)]
    fft_size: usize,
    #[arg(long = "modulus-floor", default_value_t = DEFAULT_MODULUS_FLOOR)]
    modulus_floor: f64,
    /// Largest accepted phase increment between grid points.
    #[arg(long = "jump-threshold", default_value_t = DEFAULT_JUMP_THRESHOLD)]
    jump_threshold: f64,
}

#[derive(Debug, Args)]
struct JobsArg {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    bandwidth: BandwidthArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Observations CSV (an `x` column) instead of a simulated sample.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long = "x-min", default_value_t = -4.0, allow_negative_numbers = true)]
    x_min: f64,
    #[arg(long = "x-max", default_value_t = 4.0, allow_negative_numbers = true)]
    x_max: f64,
    #[arg(long = "x-step", default_value_t = 0.02)]
    x_step: f64,
    /// Evaluate on the FFT grid x_min + 2πk/(Nη) instead.
    #[arg(long = "fft-grid")]
    fft_grid: bool,
    /// Fail with exit code 3 when ψ vanishes on the grid.
    #[arg(long)]
    strict: bool,
    /// Also write the unwrapped logarithm of ψ.
    #[arg(long = "dump-log")]
    dump_log: Option<PathBuf>,
    /// Also write the empirical characteristic function.
    #[arg(long = "dump-ecf")]
    dump_ecf: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    bandwidth: BandwidthArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Evaluation point.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, default_value_t = 300)]
    reps: usize,
    #[command(flatten)]
    jobs: JobsArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct VanishingArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value = "normal")]
    jump: String,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "50,500,5000")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Use the true characteristic function instead of the empirical one.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    bandwidth: BandwidthArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    jobs: JobsArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct BiasArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value = "normal")]
    jump: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    /// Comma-separated, strictly increasing bandwidths.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "0.4,0.5,0.6,0.7,0.8")]
    hs: Vec<f64>,
    /// Sample size used only for the truncation level.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, env = "DECOMPOUND_SEED", default_value_t = experiments::DEFAULT_FIGURE_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] decompound_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Undefined(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use decompound_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter { .. } | E::GridBeyondCutoff { .. }) => 2,
            CliError::Core(E::DistLogUndefined { .. }) | CliError::Undefined(_) => 3,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = match inject_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Splices `--key value` pairs from a `--config` file in right after the
/// subcommand, so explicit flags later on the line override them.
fn inject_config(mut argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut path = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_str().unwrap_or("");
        if arg == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
            i += 2;
            continue;
        }
        if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if sub_at.is_none() && !arg.starts_with('-') {
            sub_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (path, sub_at) else {
        return Ok(argv);
    };
    let text = fmt::read_to_string(&path).map_err(CliError::Usage)?;
    let pairs = fmt::parse_config(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (key, value) in pairs {
        let key = key.replace('_', "-");
        if key == "config" {
            continue;
        }
        if BOOL_FLAGS.contains(&key.as_str()) {
            match value.as_str() {
                "true" => injected.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => return Err(CliError::Usage(format!("`{key}` expects true or false, got `{value}`"))),
            }
        } else {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        }
    }
    argv.splice(sub_at + 1..sub_at + 1, injected);
    Ok(argv)
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::McNormality(a) => mc_normality(a),
        Command::Vanishing(a) => vanishing(a),
        Command::BiasStudy(a) => bias_study(a),
        Command::ReproduceFigure(a) => reproduce_figure(a),
    }
}

fn jump_law(name: &str) -> CliResult<JumpLaw> {
    JumpLaw::from_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown jump law `{name}` (expected normal or laplace)")))
}

fn pairs(items: &[(&str, String)]) -> ConfigPairs {
    items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fmt::write_atomic(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn document(command: &str, config: &ConfigPairs, summary: &[(&str, String)], body: &str) -> String {
    format!(
        "# decompound {command}\n{}{}{body}",
        fmt::config_header(config),
        fmt::summary_header(summary)
    )
}

/// Resolves bandwidth, truncation and numerical options into a config.
fn build_config(n: usize, bw: Option<&BandwidthArgs>, num: &NumericArgs) -> CliResult<EstimatorConfig> {
    let (h, rule) = match bw {
        Some(bw) => {
            if !(bw.beta > 0.0 && bw.beta < 0.5) {
                return Err(CliError::Usage(format!(
                    "beta = {} violates the bandwidth condition β<1/2",
                    bw.beta
                )));
            }
            match bw.h {
                Some(h) => (h, None),
                None => (
                    default_bandwidth(n, bw.beta, bw.c_h)?,
                    Some(BandwidthRule { beta: bw.beta, c_h: bw.c_h }),
                ),
            }
        }
        None => (0.5, None),
    };
    let config = EstimatorConfig {
        h,
        bandwidth_rule: rule,
        truncation: truncation_level(n, num.c_m)?,
        c_m: Some(num.c_m),
        eta: num.eta,
        fft_size: num.fft_size,
        x_grid: XGrid::default(),
        unwrap: UnwrapOptions {
            jump_threshold: num.jump_threshold,
            modulus_floor: num.modulus_floor,
        },
    };
    config.validate()?;
    Ok(config)
}

fn bandwidth_pairs(config: &EstimatorConfig, bw: &BandwidthArgs) -> Vec<(&'static str, String)> {
    vec![
        ("h", config.h.to_string()),
        ("beta", bw.beta.to_string()),
        ("c-h", bw.c_h.to_string()),
    ]
}

fn numeric_pairs(num: &NumericArgs) -> Vec<(&'static str, String)> {
    vec![
        ("c-m", num.c_m.to_string()),
        ("eta", num.eta.to_string()),
        ("fft-size", num.fft_size.to_string()),
        ("modulus-floor", num.modulus_floor.to_string()),
        ("jump-threshold", num.jump_threshold.to_string()),
    ]
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let spec = ModelSpec::new(a.model.lambda, jump_law(&a.model.jump)?, a.model.n)?;
    let obs = simulate_observations(&spec, a.seed.seed)?;
    let config = pairs(&[
        ("lambda", a.model.lambda.to_string()),
        ("jump", spec.jump_law.name().to_string()),
        ("n", a.model.n.to_string()),
        ("seed", a.seed.seed.to_string()),
    ]);
    write(&a.out.out, &document("simulate", &config, &[], &fmt::observations_csv(&obs)))
}

fn estimate(a: EstimateArgs) -> CliResult<()> {
    let law = jump_law(&a.model.jump)?;
    let obs = match &a.input {
        Some(path) => {
            let text = fmt::read_to_string(path).map_err(CliError::Usage)?;
            let values = fmt::parse_observations(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            ObservationSet::from_values(values)?
        }
        None => {
            let spec = ModelSpec::new(a.model.lambda, law.clone(), a.model.n)?;
            simulate_observations(&spec, a.seed.seed)?
        }
    };
    let n = obs.len();
    let grid = if a.fft_grid {
        XGrid::Fft { x_min: a.x_min }
    } else {
        XGrid::linspace(a.x_min, a.x_max, a.x_step)?
    };
    let config = build_config(n, Some(&a.bandwidth), &a.numeric)?.x_grid(grid);

    let mut items = vec![("lambda", a.model.lambda.to_string())];
    match &a.input {
        Some(path) => items.push(("input", path.display().to_string())),
        None => items.push(("jump", law.name().to_string())),
    }
    items.push(("n", n.to_string()));
    items.push(("seed", a.seed.seed.to_string()));
    items.extend(bandwidth_pairs(&config, &a.bandwidth));
    items.extend(numeric_pairs(&a.numeric));
    items.extend([
        ("x-min", a.x_min.to_string()),
        ("x-max", a.x_max.to_string()),
        ("x-step", a.x_step.to_string()),
        ("fft-grid", a.fft_grid.to_string()),
        ("strict", a.strict.to_string()),
    ]);
    let header = pairs(&items);

    if a.dump_log.is_some() || a.dump_ecf.is_some() {
        let freq = config.frequency_grid()?;
        let phi = ecf(&obs, &freq);
        if let Some(path) = &a.dump_ecf {
            write(path, &document("estimate", &header, &[], &fmt::series_csv(&phi)))?;
        }
        if let Some(path) = &a.dump_log {
            let psi = deconvolve_gaussian(&phi, a.model.lambda)?;
            let log = unwrap_log(&psi, &config.unwrap)?;
            write(path, &document("estimate", &header, &[], &fmt::unwrapped_log_csv(&log)))?;
        }
    }

    let est = estimate_density(&obs, a.model.lambda, &config)?;
    if let LogStatus::Vanished(index) = est.distlog_status {
        let msg = format!(
            "ψ vanished at frequency index {index} (min modulus {:e} below floor {:e})",
            est.min_modulus, config.unwrap.modulus_floor
        );
        if a.strict {
            return Err(CliError::Undefined(format!("distinguished logarithm undefined: {msg}")));
        }
        eprintln!("warning: {msg}; writing a zero estimate");
    }
    let summary = [
        ("distlog_status", est.distlog_status.to_string()),
        ("min_modulus", fmt::fmt_f64(est.min_modulus)),
        ("truncation_level", fmt::fmt_f64(est.config.truncation)),
    ];
    write(&a.out.out, &document("estimate", &header, &summary, &fmt::estimate_csv(&est)))?;
    if a.out.out != Path::new("-") {
        let mut sidecar = a.out.out.clone().into_os_string();
        sidecar.push(".json");
        write(Path::new(&sidecar), &fmt::estimate_sidecar(&est, &header))?;
    }
    Ok(())
}

fn mc_normality(a: McArgs) -> CliResult<()> {
    let spec = ModelSpec::new(a.model.lambda, jump_law(&a.model.jump)?, a.model.n)?;
    let config = build_config(a.model.n, Some(&a.bandwidth), &a.numeric)?;
    let report = parallel::mc_normality(&spec, &config, a.x, a.reps, a.seed.seed, a.jobs.jobs)?;

    let mut items = vec![
        ("lambda", a.model.lambda.to_string()),
        ("jump", spec.jump_law.name().to_string()),
        ("n", a.model.n.to_string()),
        ("seed", a.seed.seed.to_string()),
        ("x", a.x.to_string()),
        ("reps", a.reps.to_string()),
    ];
    items.extend(bandwidth_pairs(&config, &a.bandwidth));
    items.extend(numeric_pairs(&a.numeric));
    let summary = fmt::normality_summary(&report);
    for (k, v) in &summary {
        eprintln!("{k}: {v}");
    }
    write(&a.out.out, &document("mc-normality", &pairs(&items), &summary, &fmt::normality_csv(&report)))
}

fn vanishing(a: VanishingArgs) -> CliResult<()> {
    let law = jump_law(&a.jump)?;
    let n_max = a.ns.iter().copied().max().ok_or_else(|| CliError::Usage("--ns is empty".into()))?;
    if a.ns.contains(&0) {
        return Err(CliError::Usage("sample sizes must be positive".into()));
    }
    let config = build_config(n_max, Some(&a.bandwidth), &a.numeric)?;
    let source = if a.oracle { PsiSource::Oracle } else { PsiSource::Empirical };
    let table = parallel::vanishing_frequency(a.lambda, &law, &a.ns, &config, a.reps, a.seed.seed, source, a.jobs.jobs)?;

    let ns: Vec<String> = a.ns.iter().map(|n| n.to_string()).collect();
    let mut items = vec![
        ("lambda", a.lambda.to_string()),
        ("jump", law.name().to_string()),
        ("ns", ns.join(",")),
        ("reps", a.reps.to_string()),
        ("oracle", a.oracle.to_string()),
        ("seed", a.seed.seed.to_string()),
    ];
    items.extend(bandwidth_pairs(&config, &a.bandwidth));
    items.extend(numeric_pairs(&a.numeric));
    let summary = [
        ("vanished_nonincreasing", table.is_nonincreasing(2.0, 1).to_string()),
        ("failures_nonincreasing", table.failures_nonincreasing(2.0, 1).to_string()),
    ];
    write(&a.out.out, &document("vanishing", &pairs(&items), &summary, &fmt::vanishing_csv(&table)))
}

fn bias_study(a: BiasArgs) -> CliResult<()> {
    let law = jump_law(&a.jump)?;
    let base = build_config(a.n, None, &a.numeric)?;
    let report = experiments::bias_study(&law, a.lambda, a.x, &a.hs, &base)?;
    let hs: Vec<String> = a.hs.iter().map(|h| h.to_string()).collect();
    let mut items = vec![
        ("lambda", a.lambda.to_string()),
        ("jump", law.name().to_string()),
        ("x", a.x.to_string()),
        ("hs", hs.join(",")),
        ("n", a.n.to_string()),
    ];
    items.extend(numeric_pairs(&a.numeric));
    let summary = [
        ("decay", report.decay.to_string()),
        ("ratio_spread", fmt::fmt_f64(report.ratio_spread())),
    ];
    write(&a.out.out, &document("bias-study", &pairs(&items), &summary, &fmt::bias_csv(&report)))
}

fn reproduce_figure(a: FigureArgs) -> CliResult<()> {
    let fig = experiments::reproduce_figure(a.seed)?;
    let config = pairs(&[("seed", a.seed.to_string())]);
    let summary = [
        ("lambda", experiments::FIGURE_LAMBDA.to_string()),
        ("n", experiments::FIGURE_N.to_string()),
        ("h", experiments::FIGURE_H.to_string()),
        ("distlog_status", fig.estimate.distlog_status.to_string()),
        (
            "mae_-2_2",
            fig.mean_abs_error(-2.0, 2.0).map(fmt::fmt_f64).unwrap_or_else(|| "nan".into()),
        ),
    ];
    write(&a.out.out, &document("reproduce-figure", &config, &summary, &fmt::figure_csv(&fig)))
}
