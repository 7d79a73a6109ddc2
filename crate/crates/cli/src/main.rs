//! `fracwalk` command-line front end. Every command writes a CSV table, a JSON
//! metadata sidecar and a run manifest, or prints the table when `--out` is
//! absent.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fracwalk::diagnostics::{self, ScalingChoice, WalkModel};
use fracwalk::kernels::{
    build_kernel, coeff_bound, default_radius, default_tail_tol, CoeffName, ModelTag,
};
use fracwalk::lattice::default_half_width;
use fracwalk::montecarlo::{self, CGDensitySpec, CGVariant, WalkConfig};
use fracwalk::stable::{self, QuadratureConfig, StableParams};
use fracwalk::{LatticeState, TransitionKernel};

use output::{Artifacts, RunManifest};
use parse::Reals;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Library(#[from] fracwalk::Error),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Library(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fracwalk",
    version,
    about = "Random walks for symmetric space-fractional diffusion"
)]
struct Cli {
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FRACWALK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate a lattice transition kernel.
    Kernel(KernelArgs),
    /// Evolve a delta start on the lattice.
    Evolve(EvolveArgs),
    /// Monte Carlo terminal positions.
    Sample(SampleArgs),
    /// Stable density and CDF at given points.
    Density(DensityArgs),
    /// Characteristic-function error table over a refinement sequence.
    Converge(ConvergeArgs),
    /// Small-nu asymptotics of the Gillis-Weiss generating function.
    Appendix(AppendixArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum LatticeModel {
    Gl,
    Gw,
    Binom,
}

impl LatticeModel {
    fn tag(self) -> ModelTag {
        match self {
            LatticeModel::Gl => ModelTag::GrunwaldLetnikov,
            LatticeModel::Gw => ModelTag::GillisWeiss,
            LatticeModel::Binom => ModelTag::GloballyBinomial,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SampleModel {
    Gl,
    Gw,
    Binom,
    /// Chechkin-Gonchar walk; pick the jump density with --variant.
    Cg,
    PowerRatio,
    ShiftedPower,
    ExactCauchy,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Variant {
    PowerRatio,
    ShiftedPower,
    ExactCauchy,
}

impl From<Variant> for CGVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::PowerRatio => CGVariant::PowerRatio,
            Variant::ShiftedPower => CGVariant::ShiftedPower,
            Variant::ExactCauchy => CGVariant::ExactCauchy,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Scaling {
    Auto,
    Naive,
}

#[derive(Args, Debug, Serialize)]
struct CoeffArgs {
    /// Model coefficient mu.
    #[arg(long, value_parser = parse::real, conflicts_with = "lambda")]
    mu: Option<f64>,
    /// Model coefficient lambda.
    #[arg(long, value_parser = parse::real)]
    lambda: Option<f64>,
}

impl CoeffArgs {
    fn get(&self) -> Result<(CoeffName, f64), CliError> {
        match (self.mu, self.lambda) {
            (Some(m), None) => Ok((CoeffName::Mu, m)),
            (None, Some(l)) => Ok((CoeffName::Lambda, l)),
            (Some(_), Some(_)) => Err(CliError::Validation("--mu and --lambda conflict".into())),
            (None, None) => Err(CliError::Validation(
                "one of --mu or --lambda is required".into(),
            )),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct KernelArgs {
    #[arg(long)]
    model: LatticeModel,
    #[arg(long, value_parser = parse::real)]
    alpha: f64,
    #[command(flatten)]
    coeff: CoeffArgs,
    /// Truncation radius K (default: smallest K whose tail is below the model tolerance).
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvolveArgs {
    #[arg(long)]
    model: LatticeModel,
    #[arg(long, value_parser = parse::real)]
    alpha: f64,
    #[command(flatten)]
    coeff: CoeffArgs,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, value_parser = parse::real)]
    h: f64,
    /// Target time; steps = round(t / tau).
    #[arg(long, value_parser = parse::real, conflicts_with = "steps")]
    t: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Half-width N or MIN:MAX in lattice units.
    #[arg(long, value_parser = parse::window, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    /// Also report l1/linf errors against the stable density.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    model: SampleModel,
    #[arg(long)]
    variant: Option<Variant>,
    /// Stability index (defaults to 1 for exact Cauchy jumps).
    #[arg(long, value_parser = parse::real)]
    alpha: Option<f64>,
    #[command(flatten)]
    coeff: CoeffArgs,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, value_parser = parse::real, default_value = "0.1")]
    h: f64,
    #[arg(long, value_parser = parse::real)]
    t: f64,
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report the KS distance from the stable law at the realized time.
    #[arg(long)]
    ks: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    #[arg(long, value_parser = parse::real)]
    alpha: f64,
    #[arg(long, value_parser = parse::real)]
    t: f64,
    /// Comma-separated points.
    #[arg(long, value_parser = parse::real_list, allow_hyphen_values = true, conflicts_with = "x_range")]
    x: Option<Reals>,
    /// START,END,COUNT.
    #[arg(long, value_parser = parse::range, allow_hyphen_values = true)]
    x_range: Option<Reals>,
    #[arg(long, value_parser = parse::real)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConvergeArgs {
    #[arg(long)]
    model: LatticeModel,
    #[arg(long, value_parser = parse::real)]
    alpha: f64,
    #[command(flatten)]
    coeff: CoeffArgs,
    #[arg(long, value_parser = parse::real, default_value = "1")]
    t: f64,
    #[arg(long, value_parser = parse::real_list)]
    h_seq: Reals,
    #[arg(long, value_parser = parse::real_list)]
    kappa_grid: Reals,
    #[arg(long, value_enum, default_value = "auto")]
    scaling: Scaling,
    /// Bound on the final max-over-kappa error.
    #[arg(long, value_parser = parse::real, default_value = "0.02")]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct AppendixArgs {
    #[arg(long, value_parser = parse::real_list, default_value = "0.5,1,1.5,2")]
    alpha_grid: Reals,
    #[arg(long, value_parser = parse::real_list, default_value = "1e-1,1e-2,1e-3,1e-4")]
    nu_seq: Reals,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Result of a command, before writing.
struct Run {
    artifacts: Artifacts,
    out: Option<PathBuf>,
    seed: u64,
    realized_tn: Option<f64>,
    /// Set when the run completed but failed its tolerance check.
    tolerance_failure: Option<String>,
}

fn describe_bound(e: fracwalk::Error, model: ModelTag, alpha: f64) -> CliError {
    if let fracwalk::Error::CoeffOutOfBound { name: "lambda", .. } = e {
        if model == ModelTag::GillisWeiss {
            return CliError::Validation(format!("{e} (bound = 1/(2 zeta({})))", 1.0 + alpha));
        }
    }
    CliError::Library(e)
}

fn kernel_for(
    model: LatticeModel,
    alpha: f64,
    coeff: &CoeffArgs,
    radius: Option<usize>,
) -> Result<TransitionKernel, CliError> {
    let tag = model.tag();
    let (name, value) = coeff.get()?;
    // bound violations are reported before any radius search
    let bound = coeff_bound(tag, alpha, name).map_err(|e| describe_bound(e, tag, alpha))?;
    if !(value > 0.0 && value <= bound) {
        let e = fracwalk::Error::CoeffOutOfBound {
            model: tag,
            name: if name == CoeffName::Mu {
                "mu"
            } else {
                "lambda"
            },
            value,
            bound,
        };
        return Err(describe_bound(e, tag, alpha));
    }
    let radius = match radius {
        Some(r) => r,
        None => default_radius(tag, alpha, value, name, default_tail_tol(tag))?,
    };
    build_kernel(tag, alpha, name, value, radius).map_err(|e| describe_bound(e, tag, alpha))
}

fn cmd_kernel(a: &KernelArgs) -> Result<Run, CliError> {
    let k = kernel_for(a.model, a.alpha, &a.coeff, a.radius)?;
    Ok(Run {
        artifacts: Artifacts {
            table: k.to_csv(),
            metadata: k.metadata_json(),
            summary: None,
        },
        out: a.out.clone(),
        seed: 0,
        realized_tn: None,
        tolerance_failure: None,
    })
}

fn cmd_evolve(a: &EvolveArgs) -> Result<Run, CliError> {
    let k = kernel_for(a.model, a.alpha, &a.coeff, a.radius)?;
    let tau = k.scaling_law()?.tau(a.h)?;
    let steps = match (a.steps, a.t) {
        (Some(n), _) => n,
        (None, Some(t)) => {
            if !(t > 0.0) {
                return Err(fracwalk::Error::NonPositiveTime(t).into());
            }
            let n = (t / tau).round();
            if n < 1.0 {
                return Err(fracwalk::Error::ZeroSteps { t, tau }.into());
            }
            n as u64
        }
        (None, None) => {
            return Err(CliError::Validation(
                "one of --t or --steps is required".into(),
            ))
        }
    };
    let tn = steps as f64 * tau;
    let window = match a.window {
        Some(w) => w,
        None => {
            let n = default_half_width(a.alpha, tn.max(tau), a.h, k.radius());
            (-n, n)
        }
    };
    let mut state = LatticeState::init_delta(a.h, tau, window)?;
    state.evolve(&k, steps);
    let mut meta = serde_json::json!({
        "kernel": k.metadata_json(),
        "h": a.h,
        "tau": tau,
        "steps": steps,
        "realized_t": tn,
        "window": [window.0, window.1],
        "mass": state.mass(),
        "boundary_loss": state.boundary_loss(),
    });
    if a.compare && steps > 0 {
        let e = diagnostics::lattice_error(&state, &StableParams::new(a.alpha, tn)?)?;
        meta["l1"] = e.l1.into();
        meta["linf"] = e.linf.into();
    }
    Ok(Run {
        artifacts: Artifacts {
            table: state.profile_csv(),
            metadata: meta,
            summary: None,
        },
        out: a.out.clone(),
        seed: 0,
        realized_tn: Some(tn),
        tolerance_failure: None,
    })
}

fn cmd_sample(a: &SampleArgs, threads: Option<usize>) -> Result<Run, CliError> {
    let variant = match (a.model, a.variant) {
        (SampleModel::PowerRatio, _) => Some(CGVariant::PowerRatio),
        (SampleModel::ShiftedPower, _) => Some(CGVariant::ShiftedPower),
        (SampleModel::ExactCauchy, _) => Some(CGVariant::ExactCauchy),
        (SampleModel::Cg, Some(v)) => Some(v.into()),
        (SampleModel::Cg, None) => {
            return Err(CliError::Validation("--model cg needs --variant".into()))
        }
        _ => None,
    };
    let config = match variant {
        Some(v) => {
            let alpha = match (v, a.alpha) {
                (_, Some(al)) => al,
                (CGVariant::ExactCauchy, None) => 1.0,
                _ => return Err(CliError::Validation("--alpha is required".into())),
            };
            WalkConfig::chechkin_gonchar(
                CGDensitySpec::new(v, alpha)?,
                a.h,
                a.t,
                a.samples,
                a.seed,
            )?
        }
        None => {
            let model = match a.model {
                SampleModel::Gl => LatticeModel::Gl,
                SampleModel::Gw => LatticeModel::Gw,
                _ => LatticeModel::Binom,
            };
            let alpha = a
                .alpha
                .ok_or_else(|| CliError::Validation("--alpha is required".into()))?;
            let k = kernel_for(model, alpha, &a.coeff, a.radius)?;
            WalkConfig::lattice(k, a.h, a.t, a.samples, a.seed)?
        }
    };
    let set = montecarlo::run_walks_with_threads(&config, threads.unwrap_or_else(default_threads))?;
    let mut meta = set.metadata_json();
    if a.ks {
        let target = StableParams::new(config.alpha, set.realized_t())?;
        let r = diagnostics::ks_statistic(&set, &target)?;
        meta["ks"] = r.into();
    }
    Ok(Run {
        artifacts: Artifacts {
            table: set.to_csv(),
            metadata: meta,
            summary: None,
        },
        out: a.out.clone(),
        seed: a.seed,
        realized_tn: Some(set.realized_t()),
        tolerance_failure: None,
    })
}

fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn cmd_density(a: &DensityArgs) -> Result<Run, CliError> {
    let params = StableParams::new(a.alpha, a.t)?;
    let q = match a.tol {
        Some(t) => QuadratureConfig::with_tol(t),
        None => QuadratureConfig::default(),
    };
    q.validate()?;
    let xs = match (&a.x, &a.x_range) {
        (Some(x), _) => x.0.clone(),
        (None, Some(r)) => r.0.clone(),
        (None, None) => {
            return Err(CliError::Validation(
                "one of --x or --x-range is required".into(),
            ))
        }
    };
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        rows.push(vec![
            x,
            stable::stable_density(&params, x, &q)?,
            stable::stable_cdf(&params, x, &q)?,
        ]);
    }
    let summary = if rows.len() == 1 {
        format!("{}\n", rows[0][1])
    } else {
        fracwalk::export::csv_table(&["x", "density", "cdf"], rows.clone())
    };
    Ok(Run {
        artifacts: Artifacts {
            table: fracwalk::export::csv_table(&["x", "density", "cdf"], rows),
            metadata: serde_json::json!({ "alpha": a.alpha, "t": a.t, "quadrature": q, "points": xs.len() }),
            summary: Some(summary),
        },
        out: a.out.clone(),
        seed: 0,
        realized_tn: Some(a.t),
        tolerance_failure: None,
    })
}

fn cmd_converge(a: &ConvergeArgs) -> Result<Run, CliError> {
    let (coeff_name, coeff) = a.coeff.get()?;
    let walk = WalkModel {
        model: a.model.tag(),
        alpha: a.alpha,
        coeff_name,
        coeff,
        scaling: match a.scaling {
            Scaling::Auto => ScalingChoice::Auto,
            Scaling::Naive => ScalingChoice::Naive,
        },
    };
    // validates the coefficient with the bound in the message
    kernel_for(a.model, a.alpha, &a.coeff, Some(1))?;
    let report = diagnostics::cf_convergence(&walk, &a.kappa_grid.0, &a.h_seq.0, a.t)?;
    let check = report.check(a.tol);
    let failure = (!check.pass()).then(|| {
        format!(
            "monotone = {}, final max error = {:?} (tolerance {})",
            check.monotone, check.final_error, a.tol
        )
    });
    let table = report.to_csv();
    Ok(Run {
        artifacts: Artifacts {
            summary: Some(table.clone()),
            table,
            metadata: serde_json::json!({
                "report": report,
                "check": check,
                "tolerance": a.tol,
                "rates_note": "observed rates are empirical least-squares slopes over the last three levels",
            }),
        },
        out: a.out.clone(),
        seed: 0,
        realized_tn: report.realized_t.last().copied().flatten(),
        tolerance_failure: failure,
    })
}

fn cmd_appendix(a: &AppendixArgs) -> Result<Run, CliError> {
    let rep = diagnostics::appendix_limits_check(&a.alpha_grid.0, &a.nu_seq.0)?;
    let table = rep.to_csv();
    Ok(Run {
        artifacts: Artifacts {
            summary: Some(table.clone()),
            table,
            metadata: serde_json::to_value(&rep).expect("report serializes"),
        },
        out: a.out.clone(),
        seed: 0,
        realized_tn: None,
        tolerance_failure: None,
    })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (name, params) = match &cli.command {
        Command::Kernel(a) => ("kernel", serde_json::to_value(a)),
        Command::Evolve(a) => ("evolve", serde_json::to_value(a)),
        Command::Sample(a) => ("sample", serde_json::to_value(a)),
        Command::Density(a) => ("density", serde_json::to_value(a)),
        Command::Converge(a) => ("converge", serde_json::to_value(a)),
        Command::Appendix(a) => ("appendix", serde_json::to_value(a)),
    };
    let params = params.expect("arguments serialize");
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(CliError::Validation("--threads must be at least 1".into()));
    }
    let run = fracwalk::with_threads(threads, || match &cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Sample(a) => cmd_sample(a, threads),
        Command::Density(a) => cmd_density(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Appendix(a) => cmd_appendix(a),
    })??;
    match &run.out {
        Some(out) => {
            let manifest = RunManifest {
                command: name.to_string(),
                parameters: params,
                seed: run.seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                realized_tn: run.realized_tn,
                output_paths: Vec::new(),
                timestamp: output::now(),
            };
            output::write_all(out, &run.artifacts, manifest)?;
        }
        None => {
            use std::io::Write;
            let text = run
                .artifacts
                .summary
                .as_deref()
                .unwrap_or(&run.artifacts.table);
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    match run.tolerance_failure {
        Some(msg) => Err(CliError::Tolerance(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv = match config::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = Cli::parse_from(argv);
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
