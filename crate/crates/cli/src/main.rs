//! `frontier`: sample boundary models, run single estimates and drive Monte
//! Carlo experiments.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frontier::estimators::{
    blockwise_ppp, blockwise_regression, lepski_select, mle_hoelder_ppp, mle_hoelder_regression, mle_monotone_ppp,
    mle_monotone_regression, BlockConfig, EstimateReport, Intercept, LepskiConfig,
};
use frontier::harness::{
    auto_lepski_grid, coverage_study, default_class_params, emit, fit_rate, oracle_bandwidth, run_mc, write_json_value,
    CoverageSpec, ExperimentSpec, Format, Quantity,
};
use frontier::inference::self_normalized_ci;
use frontier::model::{
    default_band_height, sample_ppp_from, sample_regression_from, with_band_extension, BoundaryFunction, NoiseModel,
    Point, PointSample, RegressionSample, WeightFunction,
};
use frontier::parallel::Execution;
use frontier::rng::Provenance;
use frontier::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "frontier", version, about = "Boundary model simulation and functional estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample and write it as x,y rows
    Simulate(SimulateArgs),
    /// Estimate theta = int g w from one sample and print the report as JSON
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment from a JSON config
    Mc(McArgs),
    /// Run an experiment and fit log-log rate slopes
    Rates(RatesArgs),
    /// Empirical coverage of the self-normalized MLE interval
    Coverage(CoverageArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Model {
    Ppp,
    Regression,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Estimator {
    Blockwise,
    Lepski,
    Mle,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum InterceptArg {
    Class,
    Adaptive,
}

#[derive(Args, Serialize)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "ppp")]
    model: Model,
    /// Boundary: const:c, sqrt, sin4x, linear:a:b
    #[arg(long, default_value = "const:0")]
    g: String,
    /// Intensity scale (point process) or design size (regression)
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Noise law for regression: exp:lambda, uniform, zero
    #[arg(long, default_value = "exp:1")]
    noise: String,
    /// Hölder exponent; the boundary's registry value when unset
    #[arg(long)]
    beta: Option<f64>,
    /// Hölder constant; the boundary's registry value when unset
    #[arg(long = "R")]
    #[serde(rename = "R")]
    r: Option<f64>,
    /// Initial band height for point process samples
    #[arg(long)]
    band_height: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Output CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "mle")]
    estimator: Estimator,
    /// Weight: const:c, box:c:a:b, indicator:a:b, cos-basis:m
    #[arg(long, default_value = "const:1")]
    w: String,
    /// Block bandwidth; oracle choice when unset
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_enum, default_value = "class")]
    intercept: InterceptArg,
    /// Comma-separated bandwidth grid for the adaptive estimator
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Lepski exponent constant
    #[arg(long)]
    c: Option<f64>,
    /// Attach a self-normalized interval at level 1 - alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Read observations from a CSV (x,y for ppp, y for regression) instead of simulating
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output file; format follows the extension (.json or .csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Rmse,
    Variance,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Estimators to fit; every estimator in the config when omitted
    #[arg(long, value_delimiter = ',')]
    estimator: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "variance")]
    quantity: QuantityArg,
}

#[derive(Args)]
struct CoverageArgs {
    /// Coverage config (JSON)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// JSON output; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::CriticalValueDomain { .. }
            | Error::ClassViolation(_)
            | Error::UnknownId(_)
            | Error::Io { .. }
            | Error::Csv { .. }
            | Error::Json { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn class_params(g: &BoundaryFunction, args: &ModelArgs) -> (f64, f64) {
    let (b, r) = default_class_params(g).unwrap_or((1.0, 1.0));
    (args.beta.unwrap_or(b), args.r.unwrap_or(r))
}

fn band_height(args: &ModelArgs, r: f64, h_min: f64) -> f64 {
    args.band_height
        .unwrap_or_else(|| default_band_height(r, args.n as f64, h_min))
}

enum Sample {
    Ppp(PointSample, Option<Box<frontier::rng::SimRng>>),
    Regression(RegressionSample),
}

fn draw(args: &ModelArgs, g: &BoundaryFunction, h_min: f64) -> Result<Sample, Failure> {
    if args.n == 0 {
        return Err(invalid("invalid parameter `n`: must be positive"));
    }
    let prov = Provenance::new(args.seed, 0);
    match args.model {
        Model::Ppp => {
            let (_, r) = class_params(g, args);
            let (s, rng) = sample_ppp_from(g, args.n as f64, band_height(args, r, h_min), prov)?;
            Ok(Sample::Ppp(s, Some(Box::new(rng))))
        }
        Model::Regression => {
            let noise = NoiseModel::from_id(&args.noise)?;
            Ok(Sample::Regression(sample_regression_from(g, args.n, &noise, prov)?))
        }
    }
}

fn write_rows(out: Option<&Path>, rows: &[(f64, f64)]) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Failure::from(Error::Io { path: p.to_path_buf(), source: e }))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut wr = csv::Writer::from_writer(sink);
    let csv_fail = |e: csv::Error| invalid(format!("writing sample: {e}"));
    wr.write_record(["x", "y"]).map_err(csv_fail)?;
    for (x, y) in rows {
        wr.write_record([x.to_string(), y.to_string()]).map_err(csv_fail)?;
    }
    wr.flush().map_err(|e| invalid(format!("writing sample: {e}")))
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let g = BoundaryFunction::from_id(&args.model.g)?;
    let n = args.model.n as f64;
    let rows: Vec<(f64, f64)> = match draw(&args.model, &g, n.powf(-0.5))? {
        Sample::Ppp(s, _) => s.points().iter().map(|p| (p.x, p.y)).collect(),
        Sample::Regression(s) => s.values().iter().enumerate().map(|(i, &y)| (s.design(i + 1), y)).collect(),
    };
    write_rows(args.out.as_deref(), &rows)
}

fn read_input(path: &Path, model: Model, n: usize) -> Result<Sample, Failure> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let headers = rd.headers().map_err(|e| invalid(format!("{}: {e}", path.display())))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let y_col = col("y").ok_or_else(|| invalid(format!("{}: missing column `y`", path.display())))?;
    let x_col = col("x");
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let parse = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| invalid(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        let x = x_col.map(parse).transpose()?;
        rows.push((x, parse(y_col)?));
    }
    match model {
        Model::Ppp => {
            let pts = rows
                .into_iter()
                .map(|(x, y)| x.map(|x| Point::new(x, y)).ok_or_else(|| invalid("point process input needs an `x` column")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Sample::Ppp(PointSample::from_points(pts, n as f64)?, None))
        }
        Model::Regression => Ok(Sample::Regression(RegressionSample::from_values(rows.into_iter().map(|r| r.1).collect())?)),
    }
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    parameters: &'a EstimateArgs,
    resolved: Resolved,
    report: EstimateReport,
}

/// Class parameters and bandwidth after defaults are applied.
#[derive(Serialize)]
struct Resolved {
    beta: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{text}");
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let g = BoundaryFunction::from_id(&args.model.g)?;
    let w = WeightFunction::from_id(&args.w)?;
    let noise = NoiseModel::from_id(&args.model.noise)?;
    let (beta, r) = class_params(&g, &args.model);
    let intercept = match args.intercept {
        InterceptArg::Class => Intercept::ClassBased,
        InterceptArg::Adaptive => Intercept::Adaptive,
    };
    if let Some(a) = args.alpha {
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("invalid parameter `alpha`: must lie in (0,1], got {a}")));
        }
    }
    let n = args.model.n;
    if matches!((args.model.model, args.estimator), (Model::Ppp, Estimator::Lepski)) {
        return Err(invalid("invalid parameter `estimator`: the adaptive estimator is defined for regression only"));
    }
    let block = match args.estimator {
        Estimator::Blockwise => {
            let divisor = matches!(args.model.model, Model::Regression).then_some(n.max(1));
            let h = args.h.unwrap_or_else(|| oracle_bandwidth(beta, r, n.max(1), divisor));
            Some(BlockConfig::new(h, beta, r, intercept)?)
        }
        _ => None,
    };
    let h_min = block.as_ref().map_or((n.max(1) as f64).powf(-0.5), |b| b.h);
    let sample = match &args.input {
        Some(p) => read_input(p, args.model.model, n)?,
        None => draw(&args.model, &g, h_min)?,
    };

    let mut report = match sample {
        Sample::Ppp(mut s, rng) => {
            let est = |s: &PointSample| -> frontier::Result<EstimateReport> {
                match args.estimator {
                    Estimator::Mle => mle_hoelder_ppp(s, beta, r, &w),
                    Estimator::Monotone => mle_monotone_ppp(s, &w),
                    _ => blockwise_ppp(s, block.as_ref().expect("blockwise config"), &w),
                }
            };
            match rng {
                Some(mut rng) => with_band_extension(&mut s, &g, &mut *rng, est)?,
                None => est(&s)?,
            }
        }
        Sample::Regression(s) => match args.estimator {
            Estimator::Blockwise => blockwise_regression(&s, &noise, block.as_ref().expect("blockwise config"), &w)?,
            Estimator::Mle => mle_hoelder_regression(&s, &noise, beta, r, &w)?,
            Estimator::Monotone => mle_monotone_regression(&s, &noise, &w)?,
            Estimator::Lepski => {
                let grid = args.grid.clone().unwrap_or_else(|| auto_lepski_grid(s.n(), 0.25));
                lepski_select(&s, &noise, &w, &LepskiConfig { grid, c: args.c })?
            }
        },
    };
    if let Some(alpha) = args.alpha {
        report.ci = Some(self_normalized_ci(&report, alpha)?);
    }
    let resolved = Resolved {
        beta,
        r,
        h: block.as_ref().map(|b| b.h).or(report.chosen_h),
    };
    print_json(&EstimateOutput {
        parameters: &args,
        resolved,
        report,
    })
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: invalid config: {e}", path.display())))
}

fn load_experiment(run: &RunArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec: ExperimentSpec = load_json(&run.config)?;
    if let Some(s) = run.seed {
        spec.master_seed = s;
    }
    if let Some(m) = run.replications {
        spec.replications = m;
    }
    if let Some(o) = &run.out {
        spec.output = Some(o.clone());
    }
    spec.validate()?;
    Ok(spec)
}

fn mc(args: McArgs) -> Result<(), Failure> {
    let spec = load_experiment(&args.run)?;
    let out = spec
        .output
        .clone()
        .ok_or_else(|| invalid("invalid parameter `output`: set it in the config or pass --out"))?;
    let result = run_mc(&spec, Execution::with_threads(args.run.threads))?;
    emit(&result, Format::from_path(&out), &out)?;
    eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct RateLine {
    estimator: String,
    quantity: Quantity,
    slope: f64,
    stderr: f64,
    points: usize,
}

fn rates(args: RatesArgs) -> Result<(), Failure> {
    let spec = load_experiment(&args.run)?;
    let quantity = match args.quantity {
        QuantityArg::Rmse => Quantity::Rmse,
        QuantityArg::Variance => Quantity::Variance,
    };
    let names = args
        .estimator
        .clone()
        .unwrap_or_else(|| spec.estimators.iter().map(|e| e.name.clone()).collect());
    for name in &names {
        if !spec.estimators.iter().any(|e| &e.name == name) {
            return Err(invalid(format!("invalid parameter `estimator`: `{name}` is not in the config")));
        }
    }
    let result = run_mc(&spec, Execution::with_threads(args.run.threads))?;
    if let Some(out) = &spec.output {
        emit(&result, Format::from_path(out), out)?;
    }
    let lines = names
        .iter()
        .map(|name| {
            let fit = fit_rate(&result, name, quantity)?;
            Ok(RateLine {
                estimator: name.clone(),
                quantity,
                slope: fit.slope,
                stderr: fit.stderr,
                points: fit.points,
            })
        })
        .collect::<frontier::Result<Vec<_>>>()?;
    print_json(&lines)
}

fn coverage(args: CoverageArgs) -> Result<(), Failure> {
    let mut spec: CoverageSpec = load_json(&args.config)?;
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    if let Some(m) = args.replications {
        spec.replications = m;
    }
    if let Some(a) = args.alpha {
        spec.alpha = a;
    }
    let result = coverage_study(&spec, Execution::with_threads(args.threads))?;
    match &args.out {
        Some(p) => write_json_value(&result, p)?,
        None => print_json(&result)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Mc(a) => mc(a),
        Command::Rates(a) => rates(a),
        Command::Coverage(a) => coverage(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
