//! Closed-form rates and occupations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::polariton::TransitionTable;

/// Bose–Einstein occupation 1/(e^{ω/kT} − 1). Zero temperature gives 0.
pub fn bose_occupation(omega: f64, kt: f64) -> Result<f64> {
    if omega <= 0.0 || omega.is_nan() {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if kt <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / kt).exp_m1())
}

/// Lorentzian cavity response g0²κ0 / (κ0²/4 + x²).
fn cavity_response(p: &SystemParams, x: f64) -> f64 {
    p.g0 * p.g0 * p.kappa0 / (p.kappa0 * p.kappa0 / 4.0 + x * x)
}

/// Cooling rate of a transition at frequency `omega`: the cavity response at
/// ω + Δ_b.
pub fn cooling_rate(p: &SystemParams, omega: f64) -> f64 {
    cavity_response(p, omega + p.delta_b)
}

/// Heating rate of a transition at frequency `omega`: the response at ω − Δ_b.
pub fn heating_rate(p: &SystemParams, omega: f64) -> f64 {
    cavity_response(p, omega - p.delta_b)
}

/// Sideband rates (Γ−, Γ+) of the bare mechanical mode.
pub fn bare_rates(p: &SystemParams) -> (f64, f64) {
    (cooling_rate(p, p.omega_m), heating_rate(p, p.omega_m))
}

/// Steady phonon number of the bare resonator under cavity cooling,
/// n = (Γ+ + γ_m n_th) / ((Γ− − Γ+) + γ_m).
pub fn bare_steady_occupation(p: &SystemParams) -> Result<f64> {
    let (cool, heat) = bare_rates(p);
    let nth = bose_occupation(p.omega_m, p.kt)?;
    let denom = (cool - heat) + p.gamma_m;
    if denom <= 0.0 {
        return Err(Error::NetHeating(denom));
    }
    Ok((heat + p.gamma_m * nth) / denom)
}

/// Rates for one polariton transition, in the order of the transition table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransitionRates {
    /// Γ_{−,αβ}ⁿ (without the |A|² weight).
    pub gamma_cool: f64,
    /// Γ_{+,αβ}ⁿ (without the |A|² weight).
    pub gamma_heat: f64,
    /// Γ₀ⁿᵅᵝ = |A|² γ_m + |σ|² γ_τ.
    pub gamma0: f64,
    pub nth: f64,
}

impl TransitionRates {
    /// Total rate of the lowering jump |nα⟩ → |(n−1)β⟩ given the matrix
    /// element `a`.
    pub fn down(&self, a: f64) -> f64 {
        self.gamma0 * (self.nth + 1.0) + a * a * self.gamma_cool
    }

    /// Total rate of the raising jump.
    pub fn up(&self, a: f64) -> f64 {
        self.gamma0 * self.nth + a * a * self.gamma_heat
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSet {
    pub rates: Vec<TransitionRates>,
}

impl RateSet {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

pub fn polariton_rates(p: &SystemParams, table: &TransitionTable) -> Result<RateSet> {
    let rates = table
        .iter()
        .map(|t| {
            Ok(TransitionRates {
                gamma_cool: cooling_rate(p, t.omega),
                gamma_heat: heating_rate(p, t.omega),
                gamma0: t.a * t.a * p.gamma_m + t.sigma * t.sigma * p.gamma_tau,
                nth: bose_occupation(t.omega, p.kt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateSet { rates })
}

/// First-order dispersive estimates. Only meaningful for |δω| ≫ λ̄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersivePrediction {
    /// λ̄ / δω (0 when λ̄ = 0).
    pub mixing: f64,
    /// Γ−·(λ̄/δω)², the cavity-induced TLS cooling rate.
    pub tls_cooling_rate: f64,
    /// Bare-resonator steady occupation, which the dispersive resonator
    /// recovers.
    pub n_ss: f64,
    /// Two-level rate-balance polarization
    /// −(Γ_c + γ_τ) / (Γ_c + γ_τ(2n_th^z + 1)). Approximate.
    pub sigma_z_ss: f64,
}

/// Minimum |δω|/λ̄ accepted by [`dispersive_predictions`].
pub const DISPERSIVE_GATE: f64 = 4.0;

pub fn dispersive_predictions(p: &SystemParams) -> Result<DispersivePrediction> {
    let delta = p.delta_omega();
    let limit = DISPERSIVE_GATE * p.lambda_bar;
    if p.lambda_bar > 0.0 && delta.abs() < limit {
        return Err(Error::NotDispersive {
            detuning: delta.abs(),
            limit,
        });
    }
    let mixing = if p.lambda_bar == 0.0 {
        0.0
    } else {
        p.lambda_bar / delta
    };
    let (cool, _) = bare_rates(p);
    let tls_cooling_rate = cool * mixing * mixing;
    let nz = bose_occupation(p.omega_z, p.kt)?;
    let down = tls_cooling_rate + p.gamma_tau;
    let total = tls_cooling_rate + p.gamma_tau * (2.0 * nz + 1.0);
    // an isolated, undamped TLS has no preferred state; report it unpolarized
    let sigma_z_ss = if total > 0.0 { -down / total } else { 0.0 };
    Ok(DispersivePrediction {
        mixing,
        tls_cooling_rate,
        n_ss: bare_steady_occupation(p)?,
        sigma_z_ss,
    })
}
