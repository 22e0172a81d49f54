//! Steady states of the master equations and the observables n_ss, ⟨σ̄_z⟩.
//!
//! The default method replaces one row of L with the trace functional and
//! solves the resulting nonsingular system. Two alternatives exist for
//! cross-checking: a rank-one regularization L + s·vec(I)vec(I)ᵀ, and
//! shifted inverse iteration on L itself.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, ModelVariant, ObservableOps};
use crate::model::SystemParams;
use crate::sparse::{CscMatrix, SparseLu, C64};

/// Relative residual ‖Lx‖ / ‖L‖_F accepted for a steady state.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Smallest-to-largest pivot ratio below which the null space is taken to be
/// more than one-dimensional.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;
/// Negative eigenvalues of magnitude up to this are clipped to zero.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

const MAX_REFINEMENT_STEPS: usize = 3;
const MAX_INVERSE_ITERATIONS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    TraceRow,
    Regularized,
    InverseIteration,
}

impl SolveMethod {
    pub const ALL: [SolveMethod; 3] = [
        SolveMethod::TraceRow,
        SolveMethod::Regularized,
        SolveMethod::InverseIteration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::TraceRow => "trace-row",
            SolveMethod::Regularized => "regularized",
            SolveMethod::InverseIteration => "inverse-iteration",
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolveMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SolveMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown solve method `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub method: SolveMethod,
    /// ‖L vec(ρ)‖₂ / ‖L‖_F for the returned ρ.
    pub residual: f64,
    /// Smallest eigenvalue of the Hermitian part before clipping.
    pub min_eig: f64,
    /// |tr ρ − 1| of the raw solution.
    pub trace_err: f64,
    pub pivot_ratio: f64,
    /// Refinement steps (trace-row, regularized) or power steps (inverse
    /// iteration).
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub variant: ModelVariant,
    /// Full density matrix in the model's basis.
    pub rho: DMatrix<C64>,
    /// Resonator–TLS state (the cavity traced out for the full model).
    pub reduced: DMatrix<C64>,
    pub n_ss: f64,
    pub sigma_z_ss: f64,
    pub diagnostics: SolveDiagnostics,
}

impl SteadyState {
    /// Diagonal of `rho` in the solver basis.
    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub n_ss: f64,
    pub sigma_z_ss: f64,
    pub populations: Vec<f64>,
}

/// ⟨a†a⟩, ⟨σ̄_z⟩ and the diagonal of `rho`, with the operators of `ops`
/// (the cavity is traced out first if `ops.traced_dim > 1`).
pub fn observables(rho: &DMatrix<C64>, ops: &ObservableOps) -> Result<Observables> {
    let want = ops.number.nrows() * ops.traced_dim;
    if rho.nrows() != want || rho.ncols() != want {
        return Err(Error::DimensionMismatch {
            expected: want,
            found: rho.nrows(),
        });
    }
    let reduced = partial_trace_last(rho, ops.traced_dim);
    Ok(Observables {
        n_ss: expectation(&reduced, &ops.number),
        sigma_z_ss: expectation(&reduced, &ops.sigma_z),
        populations: rho.diagonal().iter().map(|z| z.re).collect(),
    })
}

/// Builds the generator for `variant` and solves it with the default method.
pub fn steady_state(p: &SystemParams, variant: ModelVariant) -> Result<SteadyState> {
    let l = Liouvillian::build(p, variant)?;
    solve_steady(&l)
}

/// Trace-row solve, falling back to inverse iteration if the residual is not
/// met.
pub fn solve_steady(l: &Liouvillian) -> Result<SteadyState> {
    match solve_steady_with(l, SolveMethod::TraceRow) {
        Err(Error::NotConverged { residual }) => {
            log::warn!("trace-row residual {residual:e}; retrying with inverse iteration");
            solve_steady_with(l, SolveMethod::InverseIteration)
        }
        other => other,
    }
}

pub fn solve_steady_with(l: &Liouvillian, method: SolveMethod) -> Result<SteadyState> {
    let d = l.dim();
    let n = d * d;
    let norm = l.matrix.frobenius_norm();
    let vec_identity: Vec<usize> = (0..d).map(|i| i + d * i).collect();

    let (x, pivot_ratio, iterations) = match method {
        SolveMethod::TraceRow => {
            let mut t: Vec<_> = l.matrix.triplets().filter(|&(i, _, _)| i != 0).collect();
            t.extend(vec_identity.iter().map(|&k| (0, k, C64::new(1.0, 0.0))));
            let m = CscMatrix::from_triplets(n, n, t, 0.0);
            let mut rhs = vec![C64::new(0.0, 0.0); n];
            rhs[0] = C64::new(1.0, 0.0);
            solve_refined(&m, &rhs)?
        }
        SolveMethod::Regularized => {
            let s = l.matrix.max_abs().max(f64::MIN_POSITIVE);
            let mut t: Vec<_> = l.matrix.triplets().collect();
            for &i in &vec_identity {
                for &k in &vec_identity {
                    t.push((i, k, C64::new(s, 0.0)));
                }
            }
            let m = CscMatrix::from_triplets(n, n, t, 0.0);
            let mut rhs = vec![C64::new(0.0, 0.0); n];
            for &i in &vec_identity {
                rhs[i] = C64::new(s, 0.0);
            }
            solve_refined(&m, &rhs)?
        }
        SolveMethod::InverseIteration => inverse_iteration(l, &vec_identity, norm)?,
    };

    let trace: C64 = vec_identity.iter().map(|&k| x[k]).sum();
    let trace_err = (trace - C64::new(1.0, 0.0)).norm();
    let residual = l
        .matrix
        .mul_vec(&x)
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm.max(f64::MIN_POSITIVE);
    if residual.is_nan() || residual > RESIDUAL_TOLERANCE {
        return Err(Error::NotConverged { residual });
    }

    let raw = DMatrix::from_vec(d, d, x);
    let (rho, min_eig) = physical_state(&raw)?;
    let obs = observables(&rho, &l.observables)?;
    let reduced = partial_trace_last(&rho, l.observables.traced_dim);

    Ok(SteadyState {
        variant: l.variant,
        rho,
        reduced,
        n_ss: obs.n_ss,
        sigma_z_ss: obs.sigma_z_ss,
        diagnostics: SolveDiagnostics {
            method,
            residual,
            min_eig,
            trace_err,
            pivot_ratio,
            iterations,
        },
    })
}

fn factorize_checked(m: &CscMatrix) -> Result<SparseLu> {
    let lu = SparseLu::factorize(m)?;
    let ratio = lu.pivot_ratio();
    log::debug!(
        "LU of order {} with fill {} and pivot ratio {ratio:e}",
        lu.dim(),
        lu.fill()
    );
    if ratio < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateSteadyState { pivot_ratio: ratio });
    }
    Ok(lu)
}

fn solve_refined(m: &CscMatrix, rhs: &[C64]) -> Result<(Vec<C64>, f64, usize)> {
    let lu = factorize_checked(m)?;
    let mut x = lu.solve(rhs);
    let rhs_norm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut steps = 0;
    while steps < MAX_REFINEMENT_STEPS {
        let mx = m.mul_vec(&x);
        let r: Vec<C64> = rhs.iter().zip(&mx).map(|(b, y)| b - y).collect();
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if rn <= 1e-15 * rhs_norm {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        steps += 1;
    }
    Ok((x, lu.pivot_ratio(), steps))
}

fn inverse_iteration(
    l: &Liouvillian,
    vec_identity: &[usize],
    norm: f64,
) -> Result<(Vec<C64>, f64, usize)> {
    let n = l.matrix.nrows();
    let d = l.dim();
    let shift = 1e-10 * l.matrix.max_abs().max(f64::MIN_POSITIVE);
    let mut t: Vec<_> = l.matrix.triplets().collect();
    t.extend((0..n).map(|k| (k, k, C64::new(-shift, 0.0))));
    let m = CscMatrix::from_triplets(n, n, t, 0.0);
    // the shifted matrix is nearly singular by construction, so only an exact
    // zero pivot is fatal here
    let lu = SparseLu::factorize(&m)?;

    let mut x = vec![C64::new(0.0, 0.0); n];
    for &k in vec_identity {
        x[k] = C64::new(1.0 / d as f64, 0.0);
    }
    let mut steps = 0;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let y = lu.solve(&x);
        let tr: C64 = vec_identity.iter().map(|&k| y[k]).sum();
        if tr.norm() == 0.0 {
            return Err(Error::NotConverged {
                residual: f64::INFINITY,
            });
        }
        x = y.into_iter().map(|v| v / tr).collect();
        steps += 1;
        let res = l
            .matrix
            .mul_vec(&x)
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm.max(f64::MIN_POSITIVE);
        if res <= 1e-2 * RESIDUAL_TOLERANCE {
            break;
        }
    }
    Ok((x, lu.pivot_ratio(), steps))
}

/// Hermitizes and normalizes a raw solution, clipping tiny negative
/// eigenvalues. Returns the state and the smallest eigenvalue before
/// clipping.
pub fn physical_state(raw: &DMatrix<C64>) -> Result<(DMatrix<C64>, f64)> {
    let mut rho = (raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace().re;
    if tr == 0.0 || tr.is_nan() {
        return Err(Error::NotPositive(f64::NAN));
    }
    rho /= C64::new(tr, 0.0);
    let eig = rho.clone().symmetric_eigen();
    let min_eig = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -POSITIVITY_TOLERANCE {
        return Err(Error::NotPositive(min_eig));
    }
    if min_eig < 0.0 {
        let clipped = eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0));
        let v = &eig.eigenvectors;
        rho = v * DMatrix::from_diagonal(&clipped) * v.adjoint();
        let tr = rho.trace().re;
        rho /= C64::new(tr, 0.0);
    }
    Ok((rho, min_eig))
}

/// Traces out a trailing factor of dimension `k` (the fastest index).
pub fn partial_trace_last(rho: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
    if k == 1 {
        return rho.clone();
    }
    let r = rho.nrows() / k;
    DMatrix::from_fn(r, r, |i, j| {
        (0..k).map(|c| rho[(i * k + c, j * k + c)]).sum()
    })
}

/// Re tr(ρ O).
pub fn expectation(rho: &DMatrix<C64>, op: &DMatrix<C64>) -> f64 {
    rho.iter()
        .zip(op.transpose().iter())
        .map(|(r, o)| r * o)
        .sum::<C64>()
        .re
}

/// Steady-state observables under a doubled truncation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceReport {
    pub variant: ModelVariant,
    pub n_ss: f64,
    pub sigma_z_ss: f64,
    pub n_ss_doubled: f64,
    pub sigma_z_ss_doubled: f64,
    pub rel_change_n: f64,
    pub rel_change_sigma_z: f64,
    pub passed: bool,
}

/// Relative change below which a truncation counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Re-solves with the truncation doubled: n_exc for the eliminated model,
/// n_mech for the simple one, n_mech and n_cav for the full one.
pub fn convergence_check(p: &SystemParams, variant: ModelVariant) -> Result<ConvergenceReport> {
    let doubled = p.modified(|r| match variant {
        ModelVariant::Eliminated => r.n_exc = Some(2 * p.n_exc),
        ModelVariant::Simple => r.n_mech = Some(2 * p.n_mech),
        ModelVariant::Full => {
            r.n_mech = Some(2 * p.n_mech);
            r.n_cav = Some(2 * p.n_cav);
        }
    })?;
    let a = steady_state(p, variant)?;
    let b = steady_state(&doubled, variant)?;
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    let rel_change_n = rel(a.n_ss, b.n_ss);
    let rel_change_sigma_z = rel(a.sigma_z_ss, b.sigma_z_ss);
    Ok(ConvergenceReport {
        variant,
        n_ss: a.n_ss,
        sigma_z_ss: a.sigma_z_ss,
        n_ss_doubled: b.n_ss,
        sigma_z_ss_doubled: b.sigma_z_ss,
        rel_change_n,
        rel_change_sigma_z,
        passed: rel_change_n < CONVERGENCE_TOLERANCE && rel_change_sigma_z < CONVERGENCE_TOLERANCE,
    })
}
