//! Command-line front end.
//!
//! Parameters resolve as built-in defaults, then the `--config` file, then
//! flags. Every output carries the fully resolved configuration in the same
//! schema as the config file, so feeding it back reproduces the run.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, ModelVariant};
use crate::model::{validate_params, RawParams, SystemParams};
use crate::polariton::{build_basis, build_transitions};
use crate::selfcheck::run_self_check;
use crate::steady::{convergence_check, solve_steady_with, SolveMethod};
use crate::sweep::{
    compare_variants, optimal_detuning, optimal_detuning_curve, parse_variants, run_sweep,
    with_threads, Axis, Grid, OptimalDetuning, Spacing, SweepSpec, SweepVariant, DETUNING_WINDOW,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "tlscool",
    version,
    about = "Steady-state sideband cooling of a resonator coupled to a TLS defect"
)]
pub struct Cli {
    /// JSON config with top-level keys `params`, `sweep`, `output`.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output file (stdout if absent).
    #[arg(short, long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Output format; inferred from the output extension if absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(flatten)]
    pub params: ParamFlags,

    #[command(subcommand)]
    pub command: Command,
}

/// Physical parameters, all in units of ω_m.
#[derive(Debug, Default, Args)]
pub struct ParamFlags {
    /// TLS frequency ω_z [default: 1.0]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub omega_z: Option<f64>,
    /// Resonator–TLS coupling λ̄ [default: 0.05]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub lambda_bar: Option<f64>,
    /// TLS asymmetry Δ_z; with --delta-x and --lambda replaces ω_z and λ̄
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub delta_z: Option<f64>,
    /// TLS tunnelling Δ_x
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub delta_x: Option<f64>,
    /// Deformation-potential coupling λ
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub lambda: Option<f64>,
    /// Optomechanical coupling g0 [default: 0.05]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub g0: Option<f64>,
    /// Cavity damping κ0 [default: 0.15]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub kappa0: Option<f64>,
    /// Cavity detuning Δ_b [default: -1.0]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub delta_b: Option<f64>,
    /// Intrinsic resonator damping γ_m [default: 1e-6]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub gamma_m: Option<f64>,
    /// TLS damping γ_τ [default: 2.5e-4]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub gamma_tau: Option<f64>,
    /// k_B T in units of ħω_m [default: 10].
    #[arg(
        long = "kt",
        alias = "kT",
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub kt: Option<f64>,
    /// Polariton doublets kept by the eliminated model [default: 40]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub n_exc: Option<usize>,
    /// Resonator Fock levels for the full and simple models [default: 12]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub n_mech: Option<usize>,
    /// Cavity Fock levels for the full model [default: 3]
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub n_cav: Option<usize>,
    /// Physical ω_m in Hz; recorded in metadata only.
    #[arg(
        long,
        global = true,
        help_heading = "Parameters",
        allow_hyphen_values = true
    )]
    pub omega_m_hz: Option<f64>,
}

impl ParamFlags {
    fn to_raw(&self) -> RawParams {
        RawParams {
            omega_m_hz: self.omega_m_hz,
            omega_z: self.omega_z,
            lambda_bar: self.lambda_bar,
            delta_z: self.delta_z,
            delta_x: self.delta_x,
            lambda: self.lambda,
            g0: self.g0,
            kappa0: self.kappa0,
            delta_b: self.delta_b,
            gamma_m: self.gamma_m,
            gamma_tau: self.gamma_tau,
            kt: self.kt,
            n_exc: self.n_exc,
            n_mech: self.n_mech,
            n_cav: self.n_cav,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct GridFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// linear or log
    #[arg(long)]
    pub spacing: Option<String>,
    /// Comma-separated list of full, eliminated, simple, bare-analytic.
    #[arg(long)]
    pub variants: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state of one model at one parameter point.
    Steady {
        /// full, eliminated or simple
        #[arg(long)]
        variant: Option<String>,
        /// trace-row, regularized or inverse-iteration
        #[arg(long, default_value = "trace-row")]
        method: String,
        /// Also re-solve with doubled truncations.
        #[arg(long)]
        convergence: bool,
        /// Write the polariton transition table as CSV.
        #[arg(long, value_name = "FILE")]
        dump_transitions: Option<PathBuf>,
        /// Write the Liouvillian as (row, col, re, im) CSV.
        #[arg(long, value_name = "FILE")]
        dump_liouvillian: Option<PathBuf>,
    },
    /// One-dimensional parameter sweep.
    Sweep {
        /// tls-frequency, tls-damping-values or tls-damping
        #[arg(long)]
        preset: Option<String>,
        /// omega_z, gamma_tau or delta_b
        #[arg(long)]
        axis: Option<String>,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Cavity detuning minimizing n_ss, at one ω_z or along an ω_z grid.
    OptimalDetuning {
        /// Search window lower edge (≥ −1.5).
        #[arg(long, allow_hyphen_values = true)]
        window_from: Option<f64>,
        /// Search window upper edge (≤ −0.5).
        #[arg(long, allow_hyphen_values = true)]
        window_to: Option<f64>,
        /// --from/--to/--points give an ω_z grid.
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Full, eliminated and simple models side by side.
    Compare,
    /// Run the built-in invariant checks.
    SelfCheck {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

/// Run selection shared by `sweep`, `optimal-detuning` and `steady`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    /// For `steady`, the first entry selects the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<SweepVariant>>,
    /// Optimal-detuning search window [from, to].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

impl SweepConfig {
    fn overlay(&self, other: &SweepConfig) -> SweepConfig {
        SweepConfig {
            preset: other.preset.clone().or_else(|| self.preset.clone()),
            axis: other.axis.or(self.axis),
            from: other.from.or(self.from),
            to: other.to.or(self.to),
            points: other.points.or(self.points),
            spacing: other.spacing.or(self.spacing),
            variants: other.variants.clone().or_else(|| self.variants.clone()),
            window: other.window.or(self.window),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: RawParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Defaults, then `file`, then `flags`. The built-in (ω_z, λ̄) is dropped
/// when the user gives the TLS through (Δ_z, Δ_x, λ).
pub fn resolve_params(file: &RawParams, flags: &RawParams) -> Result<(SystemParams, Vec<String>)> {
    let user = file.overlay(flags);
    let mut defaults = RawParams::defaults();
    if user.uses_microscopic_path() {
        defaults.omega_z = None;
        defaults.lambda_bar = None;
    }
    let v = validate_params(&defaults.overlay(&user))?;
    Ok((v.params, v.warnings.iter().map(|w| w.to_string()).collect()))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidSweep(msg.into())
}

fn parse_or_usage<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T> {
    s.parse().map_err(usage)
}

fn grid_config(g: &GridFlags) -> Result<SweepConfig> {
    Ok(SweepConfig {
        from: g.from,
        to: g.to,
        points: g.points,
        spacing: g.spacing.as_deref().map(parse_or_usage).transpose()?,
        variants: g
            .variants
            .as_deref()
            .map(|s| parse_variants(s).map_err(usage))
            .transpose()?,
        ..SweepConfig::default()
    })
}

/// Sweep block implied by the subcommand flags.
fn command_sweep_config(cmd: &Command) -> Result<SweepConfig> {
    match cmd {
        Command::Sweep { preset, axis, grid } => Ok(SweepConfig {
            preset: preset.clone(),
            axis: axis.as_deref().map(parse_or_usage).transpose()?,
            ..grid_config(grid)?
        }),
        Command::OptimalDetuning {
            window_from,
            window_to,
            grid,
        } => {
            let mut c = grid_config(grid)?;
            if window_from.is_some() || window_to.is_some() {
                c.window = Some([
                    window_from.unwrap_or(DETUNING_WINDOW.0),
                    window_to.unwrap_or(DETUNING_WINDOW.1),
                ]);
            }
            Ok(c)
        }
        Command::Steady { variant, .. } => Ok(SweepConfig {
            variants: variant
                .as_deref()
                .map(|v| parse_or_usage::<ModelVariant>(v).map(|m| vec![m.into()]))
                .transpose()?,
            ..SweepConfig::default()
        }),
        Command::Compare | Command::SelfCheck { .. } => Ok(SweepConfig::default()),
    }
}

fn resolve_sweep_spec(base: &SystemParams, c: &SweepConfig) -> Result<(SweepSpec, SweepConfig)> {
    let mut spec = match &c.preset {
        Some(name) => SweepSpec::preset(name, base.clone())?,
        None => {
            let axis = c
                .axis
                .ok_or_else(|| usage("sweep needs --axis or --preset"))?;
            let (from, to, points) = match (c.from, c.to, c.points) {
                (Some(f), Some(t), Some(n)) => (f, t, n),
                _ => return Err(usage("sweep needs --from, --to and --points")),
            };
            SweepSpec {
                base: base.clone(),
                axis,
                grid: Grid {
                    start: from,
                    stop: to,
                    points,
                    spacing: c.spacing.unwrap_or_default(),
                },
                variants: vec![SweepVariant::Eliminated],
            }
        }
    };
    if let Some(axis) = c.axis {
        spec.axis = axis;
    }
    if let Some(f) = c.from {
        spec.grid.start = f;
    }
    if let Some(t) = c.to {
        spec.grid.stop = t;
    }
    if let Some(n) = c.points {
        spec.grid.points = n;
    }
    if let Some(s) = c.spacing {
        spec.grid.spacing = s;
    }
    if let Some(v) = &c.variants {
        spec.variants = v.clone();
    }
    let echo = SweepConfig {
        preset: None,
        axis: Some(spec.axis),
        from: Some(spec.grid.start),
        to: Some(spec.grid.stop),
        points: Some(spec.grid.points),
        spacing: Some(spec.grid.spacing),
        variants: Some(spec.variants.clone()),
        window: None,
    };
    Ok((spec, echo))
}

fn model_variants(vs: &[SweepVariant]) -> Result<Vec<ModelVariant>> {
    vs.iter()
        .map(|v| {
            v.model()
                .ok_or_else(|| usage("bare-analytic has no steady state or detuning search"))
        })
        .collect()
}

/// Writes to `path` if given, else to `stdout`.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        None => f(stdout),
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Echo written next to CSV output files.
fn write_sidecar(path: &Path, config: &RunConfig) -> Result<()> {
    let mut w = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut w, config)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    config: &'a RunConfig,
    warnings: &'a [String],
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(
    w: &mut dyn Write,
    config: &RunConfig,
    warnings: &[String],
    body: T,
) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut *w,
        &JsonDoc {
            config,
            warnings,
            body,
        },
    )?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct SteadyOutput {
    variant: ModelVariant,
    n_ss: f64,
    sigma_z_ss: f64,
    diagnostics: crate::steady::SolveDiagnostics,
    populations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<crate::steady::ConvergenceReport>,
}

#[derive(Serialize)]
struct DetuningRow {
    variant: ModelVariant,
    omega_z: f64,
    #[serde(flatten)]
    result: Option<OptimalDetuning>,
    status: String,
}

/// Parses `args` (including the program name) and runs the command. Text
/// meant for the terminal goes to `stdout`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();

    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_error() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut io::stdout().lock())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    let (params, warnings) = resolve_params(&file.params, &cli.params.to_raw())?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let sweep_cfg = file
        .sweep
        .clone()
        .unwrap_or_default()
        .overlay(&command_sweep_config(&cli.command)?);
    let output = OutputConfig {
        path: cli.output.clone().or(file.output.path.clone()),
        format: cli.format.or(file.output.format),
    };
    let format = output.format.unwrap_or_else(|| match &output.path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    let path = output.path.as_deref();
    let mut echo = RunConfig {
        params: params.to_raw(),
        sweep: None,
        output: OutputConfig {
            path: output.path.clone(),
            format: Some(format),
        },
    };

    match &cli.command {
        Command::Steady {
            method,
            convergence,
            dump_transitions,
            dump_liouvillian,
            ..
        } => {
            let variant = match &sweep_cfg.variants {
                Some(v) if !v.is_empty() => model_variants(&v[..1])?[0],
                _ => ModelVariant::Eliminated,
            };
            echo.sweep = Some(SweepConfig {
                variants: Some(vec![variant.into()]),
                ..SweepConfig::default()
            });
            let method: SolveMethod = parse_or_usage(method)?;
            if let Some(path) = dump_transitions {
                build_transitions(&build_basis(&params)).write_csv(File::create(path)?)?;
            }
            let l = Liouvillian::build(&params, variant)?;
            if let Some(path) = dump_liouvillian {
                l.write_triplets_csv(BufWriter::new(File::create(path)?))?;
            }
            let s = solve_steady_with(&l, method)?;
            let report = if *convergence {
                Some(convergence_check(&params, variant)?)
            } else {
                None
            };
            let out = SteadyOutput {
                variant,
                n_ss: s.n_ss,
                sigma_z_ss: s.sigma_z_ss,
                diagnostics: s.diagnostics,
                populations: s.populations(),
                convergence: report,
            };
            let is_file = path.is_some();
            emit(path, stdout, |w| match (format, is_file) {
                (Format::Json, _) => write_json(w, &echo, &warnings, &out),
                (Format::Csv, true) => write_steady_csv(w, &out),
                (Format::Csv, false) => write_steady_text(w, &out),
            })?;
            if format == Format::Csv {
                if let Some(p) = &output.path {
                    write_sidecar(p, &echo)?;
                }
            }
            if let Some(r) = report {
                if !r.passed {
                    log::warn!("truncation not converged: {r:?}");
                }
            }
            Ok(0)
        }
        Command::Sweep { .. } => {
            let (spec, sweep_echo) = resolve_sweep_spec(&params, &sweep_cfg)?;
            echo.sweep = Some(sweep_echo);
            let result = with_threads(cli.threads, || run_sweep(&spec))??;
            let failed = result.rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                log::warn!(
                    "{failed} of {} points failed; see the status column",
                    result.rows.len()
                );
            }
            emit(path, stdout, |w| match format {
                Format::Csv => result.write_csv(w),
                Format::Json => write_json(w, &echo, &warnings, &result),
            })?;
            if format == Format::Csv {
                if let Some(p) = &output.path {
                    write_sidecar(p, &echo)?;
                }
            }
            Ok(0)
        }
        Command::OptimalDetuning { .. } => {
            let window = sweep_cfg
                .window
                .unwrap_or([DETUNING_WINDOW.0, DETUNING_WINDOW.1]);
            let variants = match &sweep_cfg.variants {
                Some(v) => model_variants(v)?,
                None => vec![ModelVariant::Eliminated],
            };
            let omega_z = match (sweep_cfg.from, sweep_cfg.to, sweep_cfg.points) {
                (None, None, None) => vec![params.omega_z],
                (Some(f), Some(t), Some(n)) => {
                    let g = Grid {
                        start: f,
                        stop: t,
                        points: n,
                        spacing: sweep_cfg.spacing.unwrap_or_default(),
                    };
                    g.validate()?;
                    g.values()
                }
                _ => return Err(usage("an omega_z grid needs --from, --to and --points")),
            };
            let single = sweep_cfg.from.is_none();
            echo.sweep = Some(SweepConfig {
                axis: (!single).then_some(Axis::OmegaZ),
                from: sweep_cfg.from,
                to: sweep_cfg.to,
                points: sweep_cfg.points,
                spacing: (!single).then(|| sweep_cfg.spacing.unwrap_or_default()),
                variants: Some(variants.iter().map(|&v| v.into()).collect()),
                window: Some(window),
                preset: None,
            });
            let mut rows = Vec::new();
            for &v in &variants {
                let results: Vec<Result<OptimalDetuning>> = if single {
                    vec![Ok(optimal_detuning(&params, v, (window[0], window[1]))?)]
                } else {
                    with_threads(cli.threads, || {
                        optimal_detuning_curve(&params, v, &omega_z, (window[0], window[1]))
                    })??
                };
                for (wz, r) in omega_z.iter().zip(results) {
                    rows.push(match r {
                        Ok(o) => DetuningRow {
                            variant: v,
                            omega_z: *wz,
                            status: if o.on_boundary {
                                "boundary".into()
                            } else {
                                "ok".into()
                            },
                            result: Some(o),
                        },
                        Err(e) => DetuningRow {
                            variant: v,
                            omega_z: *wz,
                            result: None,
                            status: format!("error: {e}"),
                        },
                    });
                }
            }
            emit(path, stdout, |w| match format {
                Format::Csv => write_detuning_csv(w, &rows),
                Format::Json => {
                    write_json(w, &echo, &warnings, serde_json::json!({ "rows": rows }))
                }
            })?;
            if format == Format::Csv {
                if let Some(p) = &output.path {
                    write_sidecar(p, &echo)?;
                }
            }
            Ok(0)
        }
        Command::Compare => {
            let c = with_threads(cli.threads, || compare_variants(&params))??;
            writeln!(stdout, "{c}")?;
            writeln!(stdout)?;
            emit(path, stdout, |w| write_json(w, &echo, &warnings, &c))?;
            Ok(0)
        }
        Command::SelfCheck { seed } => {
            let results = run_self_check(*seed);
            let mut ok = true;
            emit(path, stdout, |w| {
                for r in &results {
                    ok &= r.passed;
                    writeln!(
                        w,
                        "{} {:<28} {}",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.name,
                        r.detail
                    )?;
                }
                Ok(())
            })?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn write_steady_text(w: &mut dyn Write, s: &SteadyOutput) -> Result<()> {
    writeln!(w, "variant      {}", s.variant)?;
    writeln!(w, "n_ss         {:.6e}", s.n_ss)?;
    writeln!(w, "sigma_z_ss   {:.6}", s.sigma_z_ss)?;
    let d = &s.diagnostics;
    writeln!(w, "method       {}", d.method)?;
    writeln!(w, "residual     {:.2e}", d.residual)?;
    writeln!(w, "min_eig      {:.2e}", d.min_eig)?;
    writeln!(w, "trace_err    {:.2e}", d.trace_err)?;
    writeln!(w, "pivot_ratio  {:.2e}", d.pivot_ratio)?;
    if let Some(c) = &s.convergence {
        writeln!(
            w,
            "convergence  {} (rel. change n_ss {:.1e}, sigma_z {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.rel_change_n,
            c.rel_change_sigma_z
        )?;
    }
    Ok(())
}

fn write_steady_csv(w: &mut dyn Write, s: &SteadyOutput) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record([
        "variant",
        "n_ss",
        "sigma_z_ss",
        "trace_err",
        "min_eig",
        "residual",
        "method",
        "status",
    ])?;
    let d = &s.diagnostics;
    c.write_record([
        s.variant.name().to_string(),
        format!("{:e}", s.n_ss),
        format!("{:e}", s.sigma_z_ss),
        format!("{:e}", d.trace_err),
        format!("{:e}", d.min_eig),
        format!("{:e}", d.residual),
        d.method.name().to_string(),
        "ok".into(),
    ])?;
    c.flush()?;
    Ok(())
}

fn write_detuning_csv(w: &mut dyn Write, rows: &[DetuningRow]) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record([
        "variant",
        "omega_z",
        "delta_b",
        "n_ss",
        "grid_delta_b",
        "grid_n_ss",
        "status",
    ])?;
    for r in rows {
        let o = r.result.as_ref();
        c.write_record([
            r.variant.name().to_string(),
            format!("{:e}", r.omega_z),
            opt(o.map(|o| o.delta_b)),
            opt(o.map(|o| o.n_ss)),
            opt(o.map(|o| o.grid_delta_b)),
            opt(o.map(|o| o.grid_n_ss)),
            r.status.clone(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run_with(
            std::iter::once("tlscool").chain(args.iter().copied()),
            &mut out,
        );
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn documented_defaults_match_the_built_in_ones() {
        use clap::CommandFactory;
        let defaults = serde_json::to_value(RawParams::defaults()).unwrap();
        let cmd = Cli::command();
        let mut seen = 0;
        for arg in cmd.get_arguments() {
            let help = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
            let Some(start) = help.find("[default: ") else {
                continue;
            };
            let text = &help[start + 10..help.len() - 1];
            let key = match arg.get_id().as_str() {
                "kt" => "kT".to_string(),
                id => id.to_string(),
            };
            let want = defaults[&key].as_f64().unwrap();
            assert_eq!(text.parse::<f64>().unwrap(), want, "{key}");
            seen += 1;
        }
        assert_eq!(seen, 11);
    }

    #[test]
    fn layering_flags_over_file_over_defaults() {
        let file = RawParams {
            omega_z: Some(0.8),
            g0: Some(0.03),
            ..RawParams::default()
        };
        let flags = RawParams {
            g0: Some(0.04),
            ..RawParams::default()
        };
        let (p, _) = resolve_params(&file, &flags).unwrap();
        assert_eq!((p.omega_z, p.g0, p.kappa0), (0.8, 0.04, 0.15));
    }

    #[test]
    fn microscopic_input_replaces_the_default_tls() {
        let flags = RawParams {
            delta_z: Some(0.6),
            delta_x: Some(0.8),
            lambda: Some(0.05),
            ..RawParams::default()
        };
        let (p, _) = resolve_params(&RawParams::default(), &flags).unwrap();
        assert!((p.lambda_bar - 0.04).abs() < 1e-15);
        let both = RawParams {
            omega_z: Some(1.0),
            ..flags
        };
        assert!(matches!(
            resolve_params(&RawParams::default(), &both),
            Err(Error::TlsInputPath(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["--bogus"]).0, 1);
        assert_eq!(run(&["steady", "--kappa0", "-1"]).0, 1);
        assert_eq!(run(&["steady", "--variant", "nope"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
        let (code, out) = run(&["steady", "--n-exc", "6"]);
        assert_eq!(code, 0);
        assert!(out.contains("n_ss"));
    }

    #[test]
    fn self_check_lists_every_check() {
        let (code, out) = run(&["self-check"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().count(), crate::selfcheck::check_names().len());
        assert!(out.lines().all(|l| l.starts_with("PASS")));
    }

    #[test]
    fn sweep_needs_a_grid() {
        assert_eq!(run(&["sweep", "--axis", "omega_z"]).0, 1);
        assert_eq!(run(&["sweep", "--preset", "nope"]).0, 1);
    }
}
