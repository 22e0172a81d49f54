//! Physical parameters and bare operators.
//!
//! Frequencies and rates are dimensionless, measured in units of the
//! mechanical frequency ω_m, with ħ = 1. The physical value of ω_m (in Hz) is
//! carried only as metadata.
//!
//! Tensor-product layout is fixed as (mechanics, TLS, cavity), with the
//! cavity index running fastest. The TLS basis is ordered `[↓, ↑]` in the
//! eigenbasis of the rotated σ̄_z, so σ̄_z = diag(−1, +1) and σ̄_− = |↓⟩⟨↑|.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::ModelVariant;
use crate::sparse::C64;

pub const DEFAULT_N_EXC: usize = 40;
pub const DEFAULT_N_MECH: usize = 12;
pub const DEFAULT_N_CAV: usize = 3;

/// Microscopic TLS description: asymmetry Δ_z, tunneling Δ_x and raw
/// deformation-potential coupling λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlsMicroscopic {
    pub delta_z: f64,
    pub delta_x: f64,
    pub lambda: f64,
}

impl TlsMicroscopic {
    /// ω_z = √(Δ_z² + Δ_x²).
    pub fn omega_z(&self) -> f64 {
        self.delta_z.hypot(self.delta_x)
    }

    /// λ̄ = λ Δ_x / ω_z, the coupling projected on the rotated basis.
    pub fn lambda_bar(&self) -> f64 {
        self.lambda * self.delta_x / self.omega_z()
    }
}

/// Unvalidated parameter set as read from a config file or the command
/// line. Every field is optional; see [`RawParams::defaults`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_m_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_tau: Option<f64>,
    #[serde(rename = "kT", alias = "kt", skip_serializing_if = "Option::is_none")]
    pub kt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_exc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mech: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cav: Option<usize>,
}

impl RawParams {
    /// The reference operating point: g0 = 0.05, κ0 = 0.15, γ_m = 1e−6,
    /// γ_τ = 2.5e−4, λ̄ = 0.05, ω_z = 1, k_BT = 10, Δ_b = −1, with the default
    /// truncations.
    pub fn defaults() -> Self {
        RawParams {
            omega_m_hz: None,
            omega_z: Some(1.0),
            lambda_bar: Some(0.05),
            delta_z: None,
            delta_x: None,
            lambda: None,
            g0: Some(0.05),
            kappa0: Some(0.15),
            delta_b: Some(-1.0),
            gamma_m: Some(1e-6),
            gamma_tau: Some(2.5e-4),
            kt: Some(10.0),
            n_exc: Some(DEFAULT_N_EXC),
            n_mech: Some(DEFAULT_N_MECH),
            n_cav: Some(DEFAULT_N_CAV),
        }
    }

    /// True if any of Δ_z, Δ_x, λ is set.
    pub fn uses_microscopic_path(&self) -> bool {
        self.delta_z.is_some() || self.delta_x.is_some() || self.lambda.is_some()
    }

    pub fn uses_direct_path(&self) -> bool {
        self.omega_z.is_some() || self.lambda_bar.is_some()
    }

    /// Field-wise overlay: values present in `other` win.
    pub fn overlay(&self, other: &RawParams) -> RawParams {
        macro_rules! pick {
            ($($f:ident),*) => { RawParams { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            omega_m_hz, omega_z, lambda_bar, delta_z, delta_x, lambda, g0, kappa0, delta_b,
            gamma_m, gamma_tau, kt, n_exc, n_mech, n_cav
        )
    }
}

/// Validated parameters. Construct with [`validate_params`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Always 1: every other frequency is a ratio to ω_m.
    pub omega_m: f64,
    pub omega_m_hz: Option<f64>,
    pub omega_z: f64,
    pub lambda_bar: f64,
    /// Present iff the TLS was specified through (Δ_z, Δ_x, λ).
    pub tls_microscopic: Option<TlsMicroscopic>,
    pub g0: f64,
    pub kappa0: f64,
    pub delta_b: f64,
    pub gamma_m: f64,
    pub gamma_tau: f64,
    #[serde(rename = "kT")]
    pub kt: f64,
    pub n_exc: usize,
    pub n_mech: usize,
    pub n_cav: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        validate_params(&RawParams::defaults())
            .expect("reference parameters are valid")
            .params
    }
}

impl SystemParams {
    /// δω = ω_m − ω_z.
    pub fn delta_omega(&self) -> f64 {
        self.omega_m - self.omega_z
    }

    /// Back to a raw parameter set that validates to `self`.
    pub fn to_raw(&self) -> RawParams {
        let (omega_z, lambda_bar, delta_z, delta_x, lambda) = match self.tls_microscopic {
            Some(m) => (None, None, Some(m.delta_z), Some(m.delta_x), Some(m.lambda)),
            None => (Some(self.omega_z), Some(self.lambda_bar), None, None, None),
        };
        RawParams {
            omega_m_hz: self.omega_m_hz,
            omega_z,
            lambda_bar,
            delta_z,
            delta_x,
            lambda,
            g0: Some(self.g0),
            kappa0: Some(self.kappa0),
            delta_b: Some(self.delta_b),
            gamma_m: Some(self.gamma_m),
            gamma_tau: Some(self.gamma_tau),
            kt: Some(self.kt),
            n_exc: Some(self.n_exc),
            n_mech: Some(self.n_mech),
            n_cav: Some(self.n_cav),
        }
    }

    /// Builder-style copy with the TLS given directly by (ω_z, λ̄).
    pub fn with_tls(&self, omega_z: f64, lambda_bar: f64) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.delta_z = None;
        raw.delta_x = None;
        raw.lambda = None;
        raw.omega_z = Some(omega_z);
        raw.lambda_bar = Some(lambda_bar);
        Ok(validate_params(&raw)?.params)
    }

    /// Applies `edit` to a raw copy and re-validates.
    pub fn modified(&self, edit: impl FnOnce(&mut RawParams)) -> Result<Self> {
        let mut raw = self.to_raw();
        edit(&mut raw);
        Ok(validate_params(&raw)?.params)
    }

    /// Whether κ0 dominates g0, γ_m and γ_τ, as adiabatic elimination of the
    /// cavity requires.
    pub fn adiabatic_valid(&self) -> bool {
        self.kappa0 > self.g0 && self.kappa0 > self.gamma_m && self.kappa0 > self.gamma_tau
    }

    pub fn regime_warnings(&self) -> Vec<RegimeWarning> {
        let mut out = Vec::new();
        for (name, value) in [
            ("g0", self.g0),
            ("gamma_m", self.gamma_m),
            ("gamma_tau", self.gamma_tau),
        ] {
            if self.kappa0 <= value {
                out.push(RegimeWarning::AdiabaticElimination {
                    kappa0: self.kappa0,
                    rate: name,
                    value,
                });
            }
        }
        if self.kappa0 >= self.omega_m {
            out.push(RegimeWarning::UnresolvedSideband {
                kappa0: self.kappa0,
            });
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RegimeWarning {
    /// κ0 does not exceed one of the rates it must dominate.
    AdiabaticElimination {
        kappa0: f64,
        rate: &'static str,
        value: f64,
    },
    /// κ0 ≥ ω_m: the cavity does not resolve the mechanical sidebands.
    UnresolvedSideband { kappa0: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::AdiabaticElimination {
                kappa0,
                rate,
                value,
            } => write!(
                f,
                "kappa0 = {kappa0} does not dominate {rate} = {value}; the eliminated model is outside its validity regime"
            ),
            RegimeWarning::UnresolvedSideband { kappa0 } => {
                write!(f, "kappa0 = {kappa0} >= omega_m; sidebands are not resolved")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Validated {
    pub params: SystemParams,
    pub warnings: Vec<RegimeWarning>,
}

fn required(value: Option<f64>, name: &'static str) -> Result<f64> {
    let v = value.ok_or(Error::InvalidParam {
        name,
        reason: "missing".into(),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidParam {
            name,
            reason: format!("{v} is not finite"),
        });
    }
    Ok(v)
}

fn non_negative(value: Option<f64>, name: &'static str) -> Result<f64> {
    let v = required(value, name)?;
    if v < 0.0 {
        return Err(Error::InvalidParam {
            name,
            reason: format!("{v} is negative"),
        });
    }
    Ok(v)
}

fn positive(value: Option<f64>, name: &'static str) -> Result<f64> {
    let v = required(value, name)?;
    if v <= 0.0 {
        return Err(Error::InvalidParam {
            name,
            reason: format!("{v} is not positive"),
        });
    }
    Ok(v)
}

fn truncation(value: Option<usize>, name: &'static str) -> Result<usize> {
    let v = value.ok_or(Error::InvalidParam {
        name,
        reason: "missing".into(),
    })?;
    if v < 2 {
        return Err(Error::Truncation {
            name,
            value: v,
            min: 2,
        });
    }
    Ok(v)
}

/// Checks ranges and resolves the TLS input path.
///
/// Couplings (λ̄, g0), intrinsic damping rates and k_BT may be zero, which
/// gives the decoupled and zero-temperature limits. κ0 and ω_z must be
/// strictly positive. Δ_b and Δ_z may take either sign.
pub fn validate_params(raw: &RawParams) -> Result<Validated> {
    let micro = raw.uses_microscopic_path();
    let direct = raw.uses_direct_path();
    let (omega_z, lambda_bar, tls_microscopic) = match (direct, micro) {
        (true, true) => {
            return Err(Error::TlsInputPath(
                "both (omega_z, lambda_bar) and (delta_z, delta_x, lambda) were given",
            ))
        }
        (false, false) => {
            return Err(Error::TlsInputPath(
                "neither (omega_z, lambda_bar) nor (delta_z, delta_x, lambda) was given",
            ))
        }
        (true, false) => (
            positive(raw.omega_z, "omega_z")?,
            non_negative(raw.lambda_bar, "lambda_bar")?,
            None,
        ),
        (false, true) => {
            let m = TlsMicroscopic {
                delta_z: required(raw.delta_z, "delta_z")?,
                delta_x: non_negative(raw.delta_x, "delta_x")?,
                lambda: non_negative(raw.lambda, "lambda")?,
            };
            if m.omega_z() <= 0.0 {
                return Err(Error::InvalidParam {
                    name: "delta_z",
                    reason: "delta_z and delta_x are both zero".into(),
                });
            }
            (m.omega_z(), m.lambda_bar(), Some(m))
        }
    };
    if let Some(hz) = raw.omega_m_hz {
        positive(Some(hz), "omega_m_hz")?;
    }

    let params = SystemParams {
        omega_m: 1.0,
        omega_m_hz: raw.omega_m_hz,
        omega_z,
        lambda_bar,
        tls_microscopic,
        g0: non_negative(raw.g0, "g0")?,
        kappa0: positive(raw.kappa0, "kappa0")?,
        delta_b: required(raw.delta_b, "delta_b")?,
        gamma_m: non_negative(raw.gamma_m, "gamma_m")?,
        gamma_tau: non_negative(raw.gamma_tau, "gamma_tau")?,
        kt: non_negative(raw.kt, "kT")?,
        n_exc: truncation(raw.n_exc, "n_exc")?,
        n_mech: truncation(raw.n_mech, "n_mech")?,
        n_cav: truncation(raw.n_cav, "n_cav")?,
    };
    let warnings = params.regime_warnings();
    Ok(Validated { params, warnings })
}

/// Bare operators on the truncated product space. Cavity operators are
/// present only for the full model.
#[derive(Clone, Debug)]
pub struct BareOperators {
    pub a: DMatrix<C64>,
    pub a_dag: DMatrix<C64>,
    pub sigma_minus_bar: DMatrix<C64>,
    pub sigma_plus_bar: DMatrix<C64>,
    pub sigma_z_bar: DMatrix<C64>,
    pub b: Option<DMatrix<C64>>,
    pub b_dag: Option<DMatrix<C64>>,
    /// Subsystem dimensions in tensor order (mech, TLS[, cav]).
    pub dims: Vec<usize>,
}

impl BareOperators {
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat index of `|m, s[, c]⟩`.
    pub fn index(&self, mech: usize, spin: usize, cav: usize) -> usize {
        let n_cav = self.dims.get(2).copied().unwrap_or(1);
        (mech * 2 + spin) * n_cav + cav
    }
}

/// Truncated annihilation operator on `n` Fock levels.
pub fn destroy(n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Kronecker product of a list of factors, left factor slowest.
pub fn kron_all(factors: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        out = out.kronecker(*f);
    }
    out
}

pub fn dagger(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.adjoint()
}

/// Operators for the full (mech ⊗ TLS ⊗ cav) or simple (mech ⊗ TLS)
/// models. The eliminated model lives in the polariton basis and has no
/// bare operators, so it falls back to the simple layout.
pub fn build_bare_operators(p: &SystemParams, variant: ModelVariant) -> BareOperators {
    let with_cavity = variant == ModelVariant::Full;
    let n_m = p.n_mech;
    let n_c = if with_cavity { p.n_cav } else { 1 };

    let one = C64::new(1.0, 0.0);
    let a1 = destroy(n_m);
    let mut sm1 = DMatrix::zeros(2, 2);
    sm1[(0, 1)] = one;
    let sz1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-one, one]));
    let im = identity(n_m);
    let it = identity(2);
    let ic = identity(n_c);

    let a = kron_all(&[&a1, &it, &ic]);
    let sigma_minus_bar = kron_all(&[&im, &sm1, &ic]);
    let sigma_z_bar = kron_all(&[&im, &sz1, &ic]);
    let (b, b_dag) = if with_cavity {
        let b = kron_all(&[&im, &it, &destroy(n_c)]);
        let bd = dagger(&b);
        (Some(b), Some(bd))
    } else {
        (None, None)
    };
    let dims = if with_cavity {
        vec![n_m, 2, n_c]
    } else {
        vec![n_m, 2]
    };
    BareOperators {
        a_dag: dagger(&a),
        a,
        sigma_plus_bar: dagger(&sigma_minus_bar),
        sigma_minus_bar,
        sigma_z_bar,
        b,
        b_dag,
        dims,
    }
}

/// Resonator–TLS Hamiltonian after the rotating-wave approximation,
///
/// H_τ = ω_m a†a + (ω_z/2) σ̄_z + λ̄ (a σ̄_+ + a† σ̄_−),
///
/// plus, for the full model, −Δ_b b†b + g0 (a + a†)(b + b†).
pub fn build_hamiltonian(
    p: &SystemParams,
    ops: &BareOperators,
    variant: ModelVariant,
) -> DMatrix<C64> {
    let re = |x: f64| C64::new(x, 0.0);
    let mut h = &ops.a_dag * &ops.a * re(p.omega_m) + &ops.sigma_z_bar * re(p.omega_z / 2.0);
    h += (&ops.a * &ops.sigma_plus_bar + &ops.a_dag * &ops.sigma_minus_bar) * re(p.lambda_bar);
    if variant == ModelVariant::Full {
        let b = ops.b.as_ref().expect("full model carries cavity operators");
        let bd = ops
            .b_dag
            .as_ref()
            .expect("full model carries cavity operators");
        h += bd * b * re(-p.delta_b);
        h += (&ops.a + &ops.a_dag) * (b + bd) * re(p.g0);
    }
    // exact symmetrization; the products above are already Hermitian up to rounding
    (&h + h.adjoint()) * re(0.5)
}
