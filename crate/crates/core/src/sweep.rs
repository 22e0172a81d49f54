//! Parameter sweeps, the optimal-detuning search and cross-model comparison.
//!
//! Grid points are independent, so a sweep is a parallel map over
//! (point, variant) pairs collected back in grid order. A failed solve is
//! recorded in its row and never aborts the sweep.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::ModelVariant;
use crate::model::{RawParams, SystemParams};
use crate::rates::bare_steady_occupation;
use crate::steady::{steady_state, SolveDiagnostics};

/// Step of the optimal-detuning grid scan, in units of ω_m.
pub const DETUNING_STEP: f64 = 0.005;
/// Bounds of the optimal-detuning search window.
pub const DETUNING_WINDOW: (f64, f64) = (-1.5, -0.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    OmegaZ,
    GammaTau,
    DeltaB,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::OmegaZ => "omega_z",
            Axis::GammaTau => "gamma_tau",
            Axis::DeltaB => "delta_b",
        }
    }

    /// Returns `base` with this axis set to `value`, revalidated.
    pub fn apply(self, base: &SystemParams, value: f64) -> Result<SystemParams> {
        base.modified(|r: &mut RawParams| match self {
            Axis::OmegaZ => {
                r.omega_z = Some(value);
                // a microscopic TLS input would otherwise override ω_z
                r.delta_z = None;
                r.delta_x = None;
                r.lambda = None;
                r.lambda_bar = Some(base.lambda_bar);
            }
            Axis::GammaTau => r.gamma_tau = Some(value),
            Axis::DeltaB => r.delta_b = Some(value),
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "omega_z" | "omega-z" => Ok(Axis::OmegaZ),
            "gamma_tau" | "gamma-tau" => Ok(Axis::GammaTau),
            "delta_b" | "delta-b" => Ok(Axis::DeltaB),
            other => Err(format!(
                "unknown axis `{other}` (expected omega_z, gamma_tau or delta_b)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(format!(
                "unknown spacing `{other}` (expected linear or log)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Grid {
            start,
            stop,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Grid {
            start,
            stop,
            points,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidSweep(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidSweep("grid bounds must be finite".into()));
        }
        if self.spacing == Spacing::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::InvalidSweep(
                "log grid bounds must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Grid values; the end points are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == last {
                    return self.stop;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => {
                        (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariant {
    Full,
    Eliminated,
    Simple,
    /// Closed-form bare-resonator occupation; no solver involved.
    BareAnalytic,
}

impl SweepVariant {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariant::Full => "full",
            SweepVariant::Eliminated => "eliminated",
            SweepVariant::Simple => "simple",
            SweepVariant::BareAnalytic => "bare-analytic",
        }
    }

    pub fn model(self) -> Option<ModelVariant> {
        match self {
            SweepVariant::Full => Some(ModelVariant::Full),
            SweepVariant::Eliminated => Some(ModelVariant::Eliminated),
            SweepVariant::Simple => Some(ModelVariant::Simple),
            SweepVariant::BareAnalytic => None,
        }
    }
}

impl From<ModelVariant> for SweepVariant {
    fn from(v: ModelVariant) -> Self {
        match v {
            ModelVariant::Full => SweepVariant::Full,
            ModelVariant::Eliminated => SweepVariant::Eliminated,
            ModelVariant::Simple => SweepVariant::Simple,
        }
    }
}

impl fmt::Display for SweepVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bare-analytic" | "bare_analytic" | "bare" => Ok(SweepVariant::BareAnalytic),
            other => other.parse::<ModelVariant>().map(Into::into),
        }
    }
}

/// Parses a comma-separated variant list.
pub fn parse_variants(s: &str) -> std::result::Result<Vec<SweepVariant>, String> {
    s.split(',').map(|v| v.trim().parse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub axis: Axis,
    pub grid: Grid,
    pub variants: Vec<SweepVariant>,
}

impl SweepSpec {
    /// ω_z ∈ [0.5, 1.5] with 101 points at the base γ_τ.
    pub fn tls_frequency(base: SystemParams) -> Self {
        SweepSpec {
            base,
            axis: Axis::OmegaZ,
            grid: Grid::linear(0.5, 1.5, 101),
            variants: vec![
                SweepVariant::Eliminated,
                SweepVariant::Simple,
                SweepVariant::BareAnalytic,
            ],
        }
    }

    /// The three TLS damping rates 2.5e-6, 2.5e-5, 2.5e-4 at the base ω_z.
    pub fn tls_damping_values(base: SystemParams) -> Self {
        SweepSpec {
            base,
            axis: Axis::GammaTau,
            grid: Grid::log(2.5e-6, 2.5e-4, 3),
            variants: vec![SweepVariant::Eliminated],
        }
    }

    /// γ_τ ∈ [5e-8, 5e-4], 25 log-spaced points at the base ω_z.
    pub fn tls_damping(base: SystemParams) -> Self {
        SweepSpec {
            base,
            axis: Axis::GammaTau,
            grid: Grid::log(5e-8, 5e-4, 25),
            variants: vec![SweepVariant::Eliminated],
        }
    }

    pub fn preset(name: &str, base: SystemParams) -> Result<Self> {
        match name {
            "tls-frequency" => Ok(Self::tls_frequency(base)),
            "tls-damping-values" => Ok(Self::tls_damping_values(base)),
            "tls-damping" => Ok(Self::tls_damping(base)),
            other => Err(Error::InvalidSweep(format!(
                "unknown preset `{other}` (expected tls-frequency, tls-damping-values or tls-damping; the detuning curves are the optimal-detuning subcommand)"
            ))),
        }
    }

    /// Checks the grid and every grid point against the parameter rules.
    pub fn validate(&self) -> Result<Vec<SystemParams>> {
        self.grid.validate()?;
        if self.variants.is_empty() {
            return Err(Error::InvalidSweep("no variants requested".into()));
        }
        self.grid
            .values()
            .into_iter()
            .map(|v| {
                self.axis
                    .apply(&self.base, v)
                    .map_err(|e| Error::InvalidSweep(format!("{} = {v}: {e}", self.axis)))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_name: Axis,
    pub axis_value: f64,
    pub variant: SweepVariant,
    pub n_ss: Option<f64>,
    pub sigma_z_ss: Option<f64>,
    pub trace_err: Option<f64>,
    pub min_eig: Option<f64>,
    pub residual: Option<f64>,
    /// `ok`, or `error: <message>`.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub code_version: &'static str,
    pub params: SystemParams,
    pub axis: Axis,
    pub grid: Grid,
    pub variants: Vec<SweepVariant>,
    /// The eliminated model uses the unshifted polariton frequencies.
    pub modified_frequencies: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: [&str; 9] = [
    "axis_name",
    "axis_value",
    "variant",
    "n_ss",
    "sigma_z_ss",
    "trace_err",
    "min_eig",
    "residual",
    "status",
];

/// Shortest round-trip representation; empty for missing values.
fn fmt_num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

impl SweepResult {
    /// Rows of one variant, in grid order.
    pub fn variant_rows(&self, variant: SweepVariant) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.variant == variant)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.axis_name.name().to_string(),
                format!("{:e}", r.axis_value),
                r.variant.name().to_string(),
                fmt_num(r.n_ss),
                fmt_num(r.sigma_z_ss),
                fmt_num(r.trace_err),
                fmt_num(r.min_eig),
                fmt_num(r.residual),
                r.status.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn solve_point(axis: Axis, value: f64, p: &SystemParams, variant: SweepVariant) -> SweepRow {
    let mut row = SweepRow {
        axis_name: axis,
        axis_value: value,
        variant,
        n_ss: None,
        sigma_z_ss: None,
        trace_err: None,
        min_eig: None,
        residual: None,
        status: "ok".into(),
    };
    match variant.model() {
        None => match bare_steady_occupation(p) {
            Ok(n) => row.n_ss = Some(n),
            Err(e) => row.status = format!("error: {e}"),
        },
        Some(model) => match steady_state(p, model) {
            Ok(s) => {
                row.n_ss = Some(s.n_ss);
                row.sigma_z_ss = Some(s.sigma_z_ss);
                fill_diagnostics(&mut row, &s.diagnostics);
            }
            Err(e) => {
                log::warn!("{axis} = {value}, {variant}: {e}");
                row.status = format!("error: {e}");
            }
        },
    }
    row
}

fn fill_diagnostics(row: &mut SweepRow, d: &SolveDiagnostics) {
    row.trace_err = Some(d.trace_err);
    row.min_eig = Some(d.min_eig);
    row.residual = Some(d.residual);
}

/// Runs `f` on a pool of at most `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidSweep(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solves every grid point for every requested variant. Rows are ordered by
/// grid point, then by the order of `spec.variants`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let points = spec.validate()?;
    let values = spec.grid.values();
    let jobs: Vec<(usize, SweepVariant)> = (0..points.len())
        .flat_map(|i| spec.variants.iter().map(move |&v| (i, v)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, v)| solve_point(spec.axis, values[i], &points[i], v))
        .collect();
    Ok(SweepResult {
        metadata: SweepMetadata {
            code_version: env!("CARGO_PKG_VERSION"),
            params: spec.base.clone(),
            axis: spec.axis,
            grid: spec.grid,
            variants: spec.variants.clone(),
            modified_frequencies: "omega_tilde = omega",
        },
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalDetuning {
    pub omega_z: f64,
    /// Δ_b^(m) after parabolic refinement.
    pub delta_b: f64,
    pub n_ss: f64,
    /// Best point of the grid scan before refinement.
    pub grid_delta_b: f64,
    pub grid_n_ss: f64,
    /// The grid minimum sits on the window edge, so the true optimum may lie
    /// outside.
    pub on_boundary: bool,
}

fn detuning_grid(window: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(DETUNING_WINDOW.0 <= lo && lo < hi && hi <= DETUNING_WINDOW.1) {
        return Err(Error::InvalidSweep(format!(
            "detuning window [{lo}, {hi}] must lie within [{}, {}]",
            DETUNING_WINDOW.0, DETUNING_WINDOW.1
        )));
    }
    let steps = ((hi - lo) / DETUNING_STEP).round().max(2.0) as usize;
    Ok(Grid::linear(lo, hi, steps + 1).values())
}

/// Scans Δ_b over `window` in steps of 0.005·ω_m and refines the minimum of
/// n_ss with a parabola through the best point and its neighbours.
pub fn optimal_detuning(
    p: &SystemParams,
    variant: ModelVariant,
    window: (f64, f64),
) -> Result<OptimalDetuning> {
    let grid = detuning_grid(window)?;
    let n: Vec<f64> = grid
        .par_iter()
        .map(|&db| {
            Axis::DeltaB
                .apply(p, db)
                .and_then(|q| steady_state(&q, variant))
                .map(|s| s.n_ss)
                .unwrap_or(f64::NAN)
        })
        .collect();
    refine_minimum(p, variant, &grid, &n)
}

fn refine_minimum(
    p: &SystemParams,
    variant: ModelVariant,
    grid: &[f64],
    n: &[f64],
) -> Result<OptimalDetuning> {
    let (i, &best) = n
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NotConverged { residual: f64::NAN })?;
    let mut out = OptimalDetuning {
        omega_z: p.omega_z,
        delta_b: grid[i],
        n_ss: best,
        grid_delta_b: grid[i],
        grid_n_ss: best,
        on_boundary: i == 0 || i == grid.len() - 1,
    };
    if out.on_boundary || !n[i - 1].is_finite() || !n[i + 1].is_finite() {
        return Ok(out);
    }
    let (fm, f0, fp) = (n[i - 1], n[i], n[i + 1]);
    let curvature = fp - 2.0 * f0 + fm;
    if curvature <= 0.0 {
        return Ok(out);
    }
    let h = grid[i + 1] - grid[i];
    let x = grid[i] - 0.5 * h * (fp - fm) / curvature;
    if let Ok(s) = Axis::DeltaB
        .apply(p, x)
        .and_then(|q| steady_state(&q, variant))
    {
        if s.n_ss <= best {
            out.delta_b = x;
            out.n_ss = s.n_ss;
        }
    }
    Ok(out)
}

/// Optimal detuning at each ω_z of `omega_z`, in order. Points whose search
/// fails are returned as errors in place.
pub fn optimal_detuning_curve(
    p: &SystemParams,
    variant: ModelVariant,
    omega_z: &[f64],
    window: (f64, f64),
) -> Result<Vec<Result<OptimalDetuning>>> {
    detuning_grid(window)?;
    Ok(omega_z
        .par_iter()
        .map(|&wz| {
            Axis::OmegaZ
                .apply(p, wz)
                .and_then(|q| optimal_detuning(&q, variant, window))
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: ModelVariant,
    pub n_ss: f64,
    pub sigma_z_ss: f64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub params: SystemParams,
    pub full: VariantSummary,
    pub eliminated: VariantSummary,
    pub simple: VariantSummary,
    /// n_ss from the closed-form bare-resonator result, if cooling is net.
    pub bare_n_ss: Option<f64>,
    /// |n_full − n_elim| / n_full
    pub rel_full_eliminated: f64,
    /// |n_simple − n_elim| / n_elim
    pub rel_simple_eliminated: f64,
    /// |n_simple − n_full| / n_full
    pub rel_simple_full: f64,
}

/// Solves all three models at one parameter point.
pub fn compare_variants(p: &SystemParams) -> Result<Comparison> {
    let solved: Vec<Result<VariantSummary>> = ModelVariant::ALL
        .par_iter()
        .map(|&v| {
            steady_state(p, v).map(|s| VariantSummary {
                variant: v,
                n_ss: s.n_ss,
                sigma_z_ss: s.sigma_z_ss,
                diagnostics: s.diagnostics,
            })
        })
        .collect();
    let mut it = solved.into_iter();
    let (full, eliminated, simple) = (
        it.next().unwrap()?,
        it.next().unwrap()?,
        it.next().unwrap()?,
    );
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    Ok(Comparison {
        params: p.clone(),
        rel_full_eliminated: rel(eliminated.n_ss, full.n_ss),
        rel_simple_eliminated: rel(simple.n_ss, eliminated.n_ss),
        rel_simple_full: rel(simple.n_ss, full.n_ss),
        bare_n_ss: bare_steady_occupation(p).ok(),
        full,
        eliminated,
        simple,
    })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>14} {:>12} {:>10}",
            "variant", "n_ss", "sigma_z_ss", "residual"
        )?;
        for s in [&self.full, &self.eliminated, &self.simple] {
            writeln!(
                f,
                "{:<12} {:>14.6e} {:>12.6} {:>10.1e}",
                s.variant.name(),
                s.n_ss,
                s.sigma_z_ss,
                s.diagnostics.residual
            )?;
        }
        if let Some(n) = self.bare_n_ss {
            writeln!(f, "{:<12} {:>14.6e}", "bare", n)?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "|full - eliminated| / full     = {:.4}",
            self.rel_full_eliminated
        )?;
        writeln!(
            f,
            "|simple - eliminated| / elim   = {:.4}",
            self.rel_simple_eliminated
        )?;
        write!(
            f,
            "|simple - full| / full         = {:.4}",
            self.rel_simple_full
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemParams {
        SystemParams::default()
            .modified(|r| r.n_exc = Some(10))
            .unwrap()
    }

    #[test]
    fn grids() {
        let g = Grid::linear(0.5, 1.5, 101).values();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[100]), (0.5, 1.5));
        assert!((g[50] - 1.0).abs() < 1e-15);
        let l = Grid::log(5e-8, 5e-4, 25).values();
        assert_eq!((l[0], l[24]), (5e-8, 5e-4));
        assert!((l[6] - 5e-7).abs() < 1e-20);
        let three = Grid::log(2.5e-6, 2.5e-4, 3).values();
        assert!((three[1] - 2.5e-5).abs() < 1e-18);
        assert!(Grid::linear(0.0, 1.0, 1).validate().is_err());
        assert!(Grid::log(0.0, 1.0, 5).validate().is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!(
            parse_variants("eliminated, simple,bare").unwrap(),
            vec![
                SweepVariant::Eliminated,
                SweepVariant::Simple,
                SweepVariant::BareAnalytic
            ]
        );
        assert!(parse_variants("eliminated,nope").is_err());
        for a in [Axis::OmegaZ, Axis::GammaTau, Axis::DeltaB] {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
    }

    #[test]
    fn rows_are_ordered_and_complete() {
        let spec = SweepSpec {
            base: small(),
            axis: Axis::OmegaZ,
            grid: Grid::linear(0.8, 1.2, 5),
            variants: vec![SweepVariant::Eliminated, SweepVariant::BareAnalytic],
        };
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 10);
        for (k, row) in r.rows.iter().enumerate() {
            assert_eq!(row.variant, spec.variants[k % 2]);
            assert!(row.is_ok());
        }
        let bare = bare_steady_occupation(&small()).unwrap();
        assert!(r
            .variant_rows(SweepVariant::BareAnalytic)
            .all(|row| row.n_ss == Some(bare)));
    }

    #[test]
    fn csv_is_deterministic() {
        let spec = SweepSpec {
            base: small(),
            axis: Axis::GammaTau,
            grid: Grid::log(1e-6, 1e-4, 3),
            variants: vec![SweepVariant::Simple],
        };
        let dump = || {
            let mut b = Vec::new();
            run_sweep(&spec).unwrap().write_csv(&mut b).unwrap();
            b
        };
        let a = dump();
        assert_eq!(a, dump());
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn failed_points_stay_in_the_output() {
        // blue detuning with no intrinsic damping heats without bound
        let base = small().modified(|r| r.gamma_m = Some(0.0)).unwrap();
        let spec = SweepSpec {
            base,
            axis: Axis::DeltaB,
            grid: Grid::linear(-1.0, 1.0, 3),
            variants: vec![SweepVariant::BareAnalytic],
        };
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows[0].is_ok());
        assert!(r.rows[2].status.starts_with("error:"));
        assert_eq!(r.rows[2].n_ss, None);
    }

    #[test]
    fn invalid_grid_points_are_rejected_up_front() {
        let spec = SweepSpec {
            base: small(),
            axis: Axis::OmegaZ,
            grid: Grid::linear(-0.5, 1.0, 4),
            variants: vec![SweepVariant::Eliminated],
        };
        assert!(matches!(run_sweep(&spec), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn detuning_window_rules() {
        assert!(detuning_grid((-1.6, -1.0)).is_err());
        assert!(detuning_grid((-1.0, -1.0)).is_err());
        let g = detuning_grid((-1.1, -0.9)).unwrap();
        assert_eq!(g.len(), 41);
        assert!((g[1] - g[0] - DETUNING_STEP).abs() < 1e-12);
    }

    #[test]
    fn bare_optimum_is_the_red_sideband() {
        let p = small().with_tls(1.0, 0.0).unwrap();
        let o = optimal_detuning(&p, ModelVariant::Eliminated, (-1.1, -0.9)).unwrap();
        assert!((o.delta_b + 1.0).abs() < DETUNING_STEP, "{o:?}");
        assert!(!o.on_boundary);
        assert!(o.n_ss <= o.grid_n_ss);
    }

    #[test]
    fn boundary_minimum_is_flagged() {
        let p = small().with_tls(1.0, 0.0).unwrap();
        let o = optimal_detuning(&p, ModelVariant::Eliminated, (-0.9, -0.5)).unwrap();
        assert!(o.on_boundary);
        assert_eq!(o.delta_b, -0.9);
    }
}
