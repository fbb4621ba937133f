//! Command-line front end. `run` parses arguments, dispatches and maps
//! outcomes to exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{
    default_ladder, ExperimentConfig, OracleSpec, ReferenceSpec, DEFAULT_HORIZON,
    DEFAULT_LADDER_PATHS, DEFAULT_ONE_STEP_PATHS, DEFAULT_ONE_STEP_STARTS,
    DEFAULT_ORACLE_DELTA_REF, DEFAULT_ORACLE_PATHS, DEFAULT_REFERENCE_PATHS, DEFAULT_REF_FACTOR,
    DEFAULT_SIMULATE_PATHS,
};
use crate::error::{Error, Result};
use crate::euler::{simulate_terminal, write_path_csv, EulerConfig};
use crate::models::assumptions::probe_points;
use crate::models::{Coefficients, ProcessModel};
use crate::montecarlo::{default_workers, estimate, McRecord};
use crate::oracle::{
    exact_sampling_reference, fine_euler_reference, spectral_expectation, ReferenceValue,
};
use crate::rates::{
    fit_order, one_step_experiment, weak_error_ladder, LadderReference, PathBudget, RateFit,
    Verdict,
};
use crate::rng::RngStream;
use crate::stable_rng::{sample_isotropic_into, sample_positive_stable, StableLaw};
use crate::stats;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

/// Salt separating the independent reference estimate from the ladder paths.
const REFERENCE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const KS_LEVEL: f64 = 0.01;
const HILL_TOLERANCE: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(
    name = "weak-euler",
    version,
    about = "Weak Euler schemes for stable-driven SDEs and their empirical convergence order"
)]
#[command(
    after_help = "Exit status: 0 pass, 1 runtime error, 2 validation error, 3 inconclusive statistics, 4 assertion failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw stable variates, or run a distribution test on them.
    Sample(SampleArgs),
    /// Weak-error ladder and fitted order; writes rates.csv and converge.json.
    Converge(RunArgs),
    /// Reference value of E g(X_T); writes oracle.json.
    Oracle(RunArgs),
    /// One-step conditional increments over a step ladder; writes one_step.csv and one_step.json.
    OneStep(RunArgs),
    /// Euler estimate on one grid, optionally recording path 0; writes simulate.json and path.csv.
    Simulate(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleTest {
    /// KS against the Cauchy law (alpha = 1).
    KsCauchy,
    /// KS against the centred Gaussian of variance 2 (alpha = 2).
    KsGauss,
    /// KS of the positive sampler against Levy(1/2) (--positive, alpha = 0.5).
    KsLevy,
    /// Hill tail-index estimate with a 95% interval.
    Hill,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Stability index, in (0, 2] (in (0, 1) with --positive).
    #[arg(long)]
    pub alpha: f64,
    /// Number of variates.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Dimension of the isotropic law.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Sample the one-sided law with Laplace transform exp(-s^alpha).
    #[arg(long)]
    pub positive: bool,
    #[arg(long, value_enum)]
    pub test: Option<SampleTest>,
    /// Upper order statistics used by the Hill test [default: n / 100].
    #[arg(long)]
    pub hill_k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (samples as CSV, or the test summary as JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(after_help = concat!(
    "Config defaults: horizon = 1; ladder deltas = 2^-3 .. 2^-8 times the horizon; ladder n_paths = 4000; ",
    "reference = coupled_fine with delta_ref = smallest delta / 8; reference_paths = 1000000; ",
    "simulate n_paths = 10000; one_step n_paths = 20000 with 64 start points drawn from [-2, 2]^d; ",
    "oracle n_paths = 100000 with delta_ref = 1/1024; seed = 0."
))]
pub struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory [default: the config's `out`, else the current directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// keep the help text honest if a default moves
const _: () = {
    assert!(DEFAULT_LADDER_PATHS == 4000);
    assert!(DEFAULT_REFERENCE_PATHS == 1_000_000);
    assert!(DEFAULT_SIMULATE_PATHS == 10_000);
    assert!(DEFAULT_ONE_STEP_PATHS == 20_000);
    assert!(DEFAULT_ONE_STEP_STARTS == 64);
    assert!(DEFAULT_ORACLE_PATHS == 100_000);
    assert!(DEFAULT_HORIZON == 1.0);
    assert!(DEFAULT_REF_FACTOR == 8.0);
    assert!(DEFAULT_ORACLE_DELTA_REF == 1.0 / 1024.0);
};

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::Grid(_)
        | Error::Model(_)
        | Error::Config(_)
        | Error::Quadrature(_) => EXIT_VALIDATION,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::Overflow { .. } | Error::AllOverflow(_) | Error::Io(_) => EXIT_RUNTIME,
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass | Verdict::Exact | Verdict::Reported => EXIT_OK,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::Fail => EXIT_ASSERTION,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(&cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch<W: Write>(cmd: &Command, w: &mut W) -> Result<i32> {
    match cmd {
        Command::Sample(a) => cmd_sample(a, w),
        Command::Converge(a) => cmd_converge(a, w),
        Command::Oracle(a) => cmd_oracle(a, w),
        Command::OneStep(a) => cmd_one_step(a, w),
        Command::Simulate(a) => cmd_simulate(a, w),
    }
}

#[derive(Serialize)]
struct SampleSummary {
    test: &'static str,
    alpha: f64,
    n: usize,
    seed: u64,
    statistic: f64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci95: Option<(f64, f64)>,
    pass: bool,
}

pub fn cmd_sample<W: Write>(a: &SampleArgs, w: &mut W) -> Result<i32> {
    if a.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = RngStream::new(a.seed, 0);
    let (xs, width): (Vec<f64>, usize) = if a.positive {
        let mut v = Vec::with_capacity(a.n);
        for _ in 0..a.n {
            v.push(sample_positive_stable(a.alpha, &mut rng)?);
        }
        (v, 1)
    } else {
        let law = StableLaw::standard(a.alpha, a.dim)?;
        let mut v = vec![0.0; a.n * a.dim];
        for row in v.chunks_exact_mut(a.dim) {
            sample_isotropic_into(&law, &mut rng, row);
        }
        (v, a.dim)
    };

    let Some(test) = a.test else {
        let mut s = String::new();
        for row in xs.chunks_exact(width) {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        match &a.out {
            Some(p) => fs::write(p, s)?,
            None => w.write_all(s.as_bytes())?,
        }
        return Ok(EXIT_OK);
    };

    let need = |ok: bool, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(msg.into()))
        }
    };
    let summary = match test {
        SampleTest::KsCauchy | SampleTest::KsGauss | SampleTest::KsLevy => {
            let (name, cdf): (&str, fn(f64) -> f64) = match test {
                SampleTest::KsCauchy => {
                    need(
                        a.alpha == 1.0 && !a.positive && a.dim == 1,
                        "ks-cauchy needs --alpha 1 and dim 1",
                    )?;
                    ("ks-cauchy", stats::cauchy_cdf)
                }
                SampleTest::KsGauss => {
                    need(
                        a.alpha == 2.0 && !a.positive && a.dim == 1,
                        "ks-gauss needs --alpha 2 and dim 1",
                    )?;
                    ("ks-gauss", stats::gauss2_cdf)
                }
                _ => {
                    need(
                        a.alpha == 0.5 && a.positive,
                        "ks-levy needs --positive --alpha 0.5",
                    )?;
                    ("ks-levy", stats::levy_half_cdf)
                }
            };
            let d = stats::ks_statistic(&xs, cdf);
            let threshold = stats::ks_critical(KS_LEVEL) / (a.n as f64).sqrt();
            SampleSummary {
                test: name,
                alpha: a.alpha,
                n: a.n,
                seed: a.seed,
                statistic: d,
                threshold,
                ci95: None,
                pass: d < threshold,
            }
        }
        SampleTest::Hill => {
            need(a.dim == 1, "hill needs dim 1")?;
            let k = a.hill_k.unwrap_or(a.n / 100);
            let abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
            let est = stats::hill_estimator(&abs, k)?;
            // the Hill statistic is asymptotically normal with sd (1/alpha)/sqrt(k)
            let half = 1.96 * est / (k as f64).sqrt();
            SampleSummary {
                test: "hill",
                alpha: a.alpha,
                n: a.n,
                seed: a.seed,
                statistic: est,
                threshold: HILL_TOLERANCE,
                ci95: Some((est - half, est + half)),
                pass: (est - a.alpha).abs() <= HILL_TOLERANCE,
            }
        }
    };
    let verdict = if summary.pass { "PASS" } else { "FAIL" };
    match summary.ci95 {
        Some((lo, hi)) => writeln!(
            w,
            "{}: estimate {:.4} (95% CI [{lo:.4}, {hi:.4}]), target {} +/- {}: {verdict}",
            summary.test, summary.statistic, a.alpha, HILL_TOLERANCE
        )?,
        None => writeln!(
            w,
            "{}: D = {:.6}, critical value at 1% = {:.6}: {verdict}",
            summary.test, summary.statistic, summary.threshold
        )?,
    }
    if let Some(p) = &a.out {
        fs::write(p, serde_json::to_string_pretty(&summary).map_err(json_err)?)?;
    }
    Ok(if summary.pass {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    })
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

struct Loaded {
    cfg: ExperimentConfig,
    model: ProcessModel,
    workers: usize,
    out: PathBuf,
}

fn load(a: &RunArgs) -> Result<Loaded> {
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.workers == Some(0) {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let workers = a.workers.or(cfg.workers).unwrap_or_else(default_workers);
    let out = a
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let model = cfg.build_model()?;
    Ok(Loaded {
        cfg,
        model,
        workers,
        out,
    })
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    seed: u64,
    result: &'a T,
    config: &'a ExperimentConfig,
}

fn write_json<T: Serialize>(path: &Path, cfg: &ExperimentConfig, result: &T) -> Result<()> {
    let a = Artifact {
        seed: cfg.seed,
        result,
        config: cfg,
    };
    fs::write(path, serde_json::to_string_pretty(&a).map_err(json_err)?)?;
    Ok(())
}

fn print_table<W: Write>(w: &mut W, fit: &RateFit) -> Result<()> {
    writeln!(w, "{:>12} {:>13} {:>11} masked", "delta", "error", "stderr")?;
    for i in 0..fit.deltas.len() {
        writeln!(
            w,
            "{:>12.6e} {:>13.6e} {:>11.3e} {}",
            fit.deltas[i], fit.errors[i], fit.stderrs[i], fit.noise_mask[i]
        )?;
    }
    let k = fit
        .kappa_predicted
        .value()
        .map_or("boundary".to_string(), |k| format!("{k:.4}"));
    match (fit.slope, fit.r_squared) {
        (Some(s), Some(r2)) => writeln!(
            w,
            "slope {s:.4} (r^2 {r2:.4}), predicted order {k}: {}",
            fit.verdict()
        )?,
        _ => writeln!(
            w,
            "no slope ({} unmasked points), predicted order {k}: {}",
            fit.unmasked(),
            fit.verdict()
        )?,
    }
    Ok(())
}

/// Fits the order when possible; too few unmasked points is a verdict, not
/// an error.
fn fit_if_possible(fit: &mut RateFit) -> Result<()> {
    match fit_order(fit) {
        Ok(_) | Err(Error::Inconclusive(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

pub fn cmd_converge<W: Write>(a: &RunArgs, w: &mut W) -> Result<i32> {
    let Loaded {
        cfg,
        model,
        workers,
        out,
    } = load(a)?;
    let g = cfg.build_test_function(&model)?;
    let gf = |y: &[f64]| g.eval(y);
    let ladder = cfg.ladder.clone().unwrap_or_default();
    let deltas = ladder.deltas();
    let horizon = ladder.horizon;
    let ref_seed = cfg.seed ^ REFERENCE_SALT;
    let reference = match ladder.reference {
        ReferenceSpec::CoupledFine => LadderReference::CoupledFine {
            delta_ref: ladder.delta_ref(),
        },
        ReferenceSpec::FineEuler => LadderReference::Value(fine_euler_reference(
            &model,
            &gf,
            horizon,
            ladder.delta_ref(),
            ladder.reference_paths,
            ref_seed,
            workers,
        )?),
        ReferenceSpec::Spectral => {
            LadderReference::Value(spectral_expectation(&model.as_constant()?, &g, horizon)?)
        }
        ReferenceSpec::ExactSampling => LadderReference::Value(exact_sampling_reference(
            &model.as_constant()?,
            &gf,
            horizon,
            ladder.reference_paths,
            ref_seed,
            workers,
        )?),
    };
    let budget = PathBudget {
        n_paths: ladder.n_paths,
        max_paths: ladder.max_paths.unwrap_or(ladder.n_paths),
    };
    let mut fit = weak_error_ladder(
        &model,
        &gf,
        model.beta(),
        horizon,
        &deltas,
        &reference,
        budget,
        cfg.seed,
        workers,
    )?;
    fit_if_possible(&mut fit)?;
    print_table(w, &fit)?;
    fs::write(out.join("rates.csv"), fit.to_csv())?;
    write_json(&out.join("converge.json"), &cfg, &fit.summary())?;
    Ok(verdict_code(fit.verdict()))
}

pub fn cmd_one_step<W: Write>(a: &RunArgs, w: &mut W) -> Result<i32> {
    let Loaded {
        cfg,
        model,
        workers,
        out,
    } = load(a)?;
    let f = cfg.build_test_function(&model)?;
    let spec = cfg.one_step.clone().unwrap_or_default();
    let deltas = spec
        .deltas
        .clone()
        .unwrap_or_else(|| default_ladder(DEFAULT_HORIZON));
    let starts = match &spec.start_points {
        Some(p) => p.clone(),
        None => probe_points(model.dim(), DEFAULT_ONE_STEP_STARTS, 2.0, cfg.seed),
    };
    let reg = f.regularity();
    let beta = reg.is_finite().then_some(reg);
    let mut fit = one_step_experiment(
        &model,
        &|y: &[f64]| f.eval(y),
        beta,
        &starts,
        &deltas,
        spec.n_paths,
        cfg.seed,
        workers,
    )?;
    fit_if_possible(&mut fit)?;
    print_table(w, &fit)?;
    fs::write(out.join("one_step.csv"), fit.to_csv())?;
    write_json(&out.join("one_step.json"), &cfg, &fit.summary())?;
    Ok(verdict_code(fit.verdict()))
}

pub fn cmd_oracle<W: Write>(a: &RunArgs, w: &mut W) -> Result<i32> {
    let Loaded {
        cfg,
        model,
        workers,
        out,
    } = load(a)?;
    let g = cfg.build_test_function(&model)?;
    let gf = |y: &[f64]| g.eval(y);
    let spec = cfg.oracle.clone().unwrap_or_else(OracleSpec::default);
    let r: ReferenceValue = if model.is_constant() {
        let cc = model.as_constant()?;
        match spectral_expectation(&cc, &g, spec.horizon) {
            Ok(r) => r,
            // no closed form for this g or dimension
            Err(Error::InvalidParameter(_)) | Err(Error::Quadrature(_)) => {
                exact_sampling_reference(&cc, &gf, spec.horizon, spec.n_paths, cfg.seed, workers)?
            }
            Err(e) => return Err(e),
        }
    } else {
        fine_euler_reference(
            &model,
            &gf,
            spec.horizon,
            spec.delta_ref,
            spec.n_paths,
            cfg.seed,
            workers,
        )?
    };
    writeln!(
        w,
        "{:.10} (+/- {:.3e}, {:?})",
        r.value, r.error_bound, r.kind
    )?;
    write_json(&out.join("oracle.json"), &cfg, &r)?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate<W: Write>(a: &RunArgs, w: &mut W) -> Result<i32> {
    let Loaded {
        cfg,
        model,
        workers,
        out,
    } = load(a)?;
    let Some(spec) = cfg.simulate.clone() else {
        return Err(Error::Config("simulate needs a [simulate] table".into()));
    };
    let grid = spec.grid.build()?;
    if spec.record_path {
        let ec = EulerConfig {
            model: &model,
            grid: &grid,
            record_path: true,
        };
        let tr = simulate_terminal(&ec, &mut RngStream::new(cfg.seed, 0))?;
        let file = fs::File::create(out.join("path.csv"))?;
        write_path_csv(
            tr.path.as_deref().unwrap_or_default(),
            std::io::BufWriter::new(file),
        )?;
        writeln!(w, "path.csv: {} rows", grid.n_steps() + 1)?;
    }
    if cfg.test_function.is_some() && spec.n_paths > 0 {
        let g = cfg.build_test_function(&model)?;
        let ec = EulerConfig {
            model: &model,
            grid: &grid,
            record_path: false,
        };
        let r = estimate(&ec, &|y: &[f64]| g.eval(y), spec.n_paths, cfg.seed, workers)?;
        let rec = McRecord::new(model.alpha(), model.beta(), grid.delta(), &r);
        writeln!(w, "{}\n{}", McRecord::CSV_HEADER, rec.csv_row())?;
        write_json(&out.join("simulate.json"), &cfg, &r)?;
    }
    Ok(EXIT_OK)
}
