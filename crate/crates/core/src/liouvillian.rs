//! Master-equation generators as sparse superoperators.
//!
//! Density matrices are vectorized by stacking columns: entry ρ[i, j] sits
//! at position `i + d·j`. With this convention vec(AρB) = (Bᵀ ⊗ A) vec(ρ), so
//!
//! ```text
//! −i[H, ρ]                 → −i (I ⊗ H − Hᵀ ⊗ I)
//! (r/2)(2OρO† − {O†O, ρ})  → (r/2)(2 Ō ⊗ O − (O†O)ᵀ ⊗ I − I ⊗ O†O)
//! ```
//!
//! Three models are provided:
//!
//! * `Full`: resonator, TLS and cavity with the linearized optomechanical
//!   coupling and a damped cavity; intrinsic damping acts through polariton
//!   jump operators embedded in the bare space.
//! * `Eliminated`: cavity adiabatically eliminated; everything lives on the
//!   polariton ladder and each transition carries its own sideband rates.
//! * `Simple`: resonator and TLS with the bare sideband rates applied to
//!   `a`, and independent thermal baths on `a` and σ̄_−.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_bare_operators, build_hamiltonian, BareOperators, SystemParams};
use crate::polariton::{
    build_basis, build_transitions, PolaritonBasis, PolaritonLabel, TransitionTable,
};
use crate::rates::{bare_rates, bose_occupation, polariton_rates, RateSet};
use crate::sparse::{CscMatrix, C64};

/// Entries at or below this magnitude are dropped during assembly.
pub const DROP_TOLERANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Full,
    Eliminated,
    Simple,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [
        ModelVariant::Full,
        ModelVariant::Eliminated,
        ModelVariant::Simple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Full => "full",
            ModelVariant::Eliminated => "eliminated",
            ModelVariant::Simple => "simple",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(ModelVariant::Full),
            "eliminated" | "elim" => Ok(ModelVariant::Eliminated),
            "simple" => Ok(ModelVariant::Simple),
            other => Err(format!("unknown model variant `{other}`")),
        }
    }
}

/// Label of a basis state of a model's Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StateLabel {
    Polariton(PolaritonLabel),
    /// |m, s⟩ or |m, s, c⟩ with s = 0 for ↓ and 1 for ↑.
    Bare {
        mech: usize,
        spin: usize,
        cav: Option<usize>,
    },
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Polariton(l) => write!(f, "{l}"),
            StateLabel::Bare { mech, spin, cav } => {
                let s = if *spin == 0 { "down" } else { "up" };
                match cav {
                    Some(c) => write!(f, "|{mech},{s},{c}>"),
                    None => write!(f, "|{mech},{s}>"),
                }
            }
        }
    }
}

/// Observables in the basis of the reduced (cavity-free) state.
#[derive(Clone, Debug)]
pub struct ObservableOps {
    pub number: DMatrix<C64>,
    pub sigma_z: DMatrix<C64>,
    /// Dimension of the traced-out factor (the cavity for `Full`, else 1).
    pub traced_dim: usize,
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub matrix: CscMatrix,
    pub variant: ModelVariant,
    pub basis_labels: Vec<StateLabel>,
    pub params_hash: u64,
    pub observables: ObservableOps,
}

impl Liouvillian {
    /// Hilbert-space dimension d (the superoperator is d² × d²).
    pub fn dim(&self) -> usize {
        self.basis_labels.len()
    }

    /// Builds the generator of `variant` from validated parameters.
    pub fn build(p: &SystemParams, variant: ModelVariant) -> Result<Self> {
        match variant {
            ModelVariant::Eliminated => {
                let basis = build_basis(p);
                let table = build_transitions(&basis);
                let rates = polariton_rates(p, &table)?;
                build_eliminated(p, &basis, &table, &rates)
            }
            ModelVariant::Full => {
                let ops = build_bare_operators(p, ModelVariant::Full);
                let basis = PolaritonBasis::with_doublets(p, p.n_mech - 1);
                build_full(p, &ops, &basis)
            }
            ModelVariant::Simple => {
                let ops = build_bare_operators(p, ModelVariant::Simple);
                build_simple(p, &ops)
            }
        }
    }

    /// L applied to ρ, using the column-stacked layout.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let v = self.matrix.mul_vec(rho.as_slice());
        DMatrix::from_vec(d, d, v)
    }

    /// max_j |Σ_i L[(i,i), j]|: how far the trace functional is from a left
    /// null vector.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim();
        let mut t = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            t[i + d * i] = C64::new(1.0, 0.0);
        }
        self.matrix
            .tr_mul_vec(&t)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Debug dump of the superoperator: `row,col,re,im`.
    pub fn write_triplets_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "re", "im"])?;
        for (i, j, v) in self.matrix.triplets() {
            w.write_record([
                i.to_string(),
                j.to_string(),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// FNV-1a over the JSON form of the parameters.
pub fn params_fingerprint(p: &SystemParams) -> u64 {
    let json = serde_json::to_vec(p).expect("parameters serialize");
    json.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn nonzeros(m: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != C64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Triplet accumulator for a superoperator on d × d matrices.
struct SuperOpBuilder {
    d: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl SuperOpBuilder {
    fn new(d: usize) -> Self {
        SuperOpBuilder {
            d,
            triplets: Vec::new(),
        }
    }

    /// Adds vec(A ρ B) · scale.
    fn add_sandwich(&mut self, a: &[(usize, usize, C64)], b: &[(usize, usize, C64)], scale: C64) {
        let d = self.d;
        for &(i, k, av) in a {
            for &(l, j, bv) in b {
                self.triplets.push((i + d * j, k + d * l, scale * av * bv));
            }
        }
    }

    /// Adds vec(A ρ) · scale.
    fn add_left(&mut self, a: &[(usize, usize, C64)], scale: C64) {
        let d = self.d;
        for &(i, k, av) in a {
            for j in 0..d {
                self.triplets.push((i + d * j, k + d * j, scale * av));
            }
        }
    }

    /// Adds vec(ρ B) · scale.
    fn add_right(&mut self, b: &[(usize, usize, C64)], scale: C64) {
        let d = self.d;
        for &(l, j, bv) in b {
            for i in 0..d {
                self.triplets.push((i + d * j, i + d * l, scale * bv));
            }
        }
    }

    fn add_hamiltonian(&mut self, h: &DMatrix<C64>) {
        let nz = nonzeros(h);
        self.add_left(&nz, C64::new(0.0, -1.0));
        self.add_right(&nz, C64::new(0.0, 1.0));
    }

    /// (rate/2)·(2OρO† − O†Oρ − ρO†O).
    fn add_lindblad(&mut self, op: &DMatrix<C64>, rate: f64) -> Result<()> {
        if rate < 0.0 || rate.is_nan() {
            return Err(Error::NegativeRate(rate));
        }
        if rate == 0.0 {
            return Ok(());
        }
        let o = nonzeros(op);
        let od = nonzeros(&op.adjoint());
        let ood = nonzeros(&(op.adjoint() * op));
        self.add_sandwich(&o, &od, C64::new(rate, 0.0));
        self.add_left(&ood, C64::new(-rate / 2.0, 0.0));
        self.add_right(&ood, C64::new(-rate / 2.0, 0.0));
        Ok(())
    }

    /// Lindblad term for the rank-one jump |to⟩⟨from| given as sparse
    /// vectors.
    fn add_jump(&mut self, to: &[(usize, f64)], from: &[(usize, f64)], rate: f64) -> Result<()> {
        if rate < 0.0 || rate.is_nan() {
            return Err(Error::NegativeRate(rate));
        }
        if rate == 0.0 {
            return Ok(());
        }
        let re = |x: f64| C64::new(x, 0.0);
        let o: Vec<_> = to
            .iter()
            .flat_map(|&(i, u)| from.iter().map(move |&(k, v)| (i, k, re(u * v))))
            .collect();
        let od: Vec<_> = o.iter().map(|&(i, k, v)| (k, i, v.conj())).collect();
        // O†O = |from⟩⟨from| for a normalized |to⟩
        let norm_to: f64 = to.iter().map(|(_, u)| u * u).sum();
        let ood: Vec<_> = from
            .iter()
            .flat_map(|&(i, u)| from.iter().map(move |&(k, v)| (i, k, re(norm_to * u * v))))
            .collect();
        self.add_sandwich(&o, &od, re(rate));
        self.add_left(&ood, re(-rate / 2.0));
        self.add_right(&ood, re(-rate / 2.0));
        Ok(())
    }

    fn finish(self) -> CscMatrix {
        let n = self.d * self.d;
        CscMatrix::from_triplets(n, n, self.triplets, DROP_TOLERANCE)
    }
}

/// Superoperator of (rate/2)·L(op) on its own.
pub fn lindblad_term(op: &DMatrix<C64>, rate: f64) -> Result<CscMatrix> {
    if op.nrows() != op.ncols() {
        return Err(Error::DimensionMismatch {
            expected: op.nrows(),
            found: op.ncols(),
        });
    }
    let mut b = SuperOpBuilder::new(op.nrows());
    b.add_lindblad(op, rate)?;
    Ok(b.finish())
}

fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Eliminated-cavity master equation on the polariton ladder: diagonal
/// polariton Hamiltonian, intrinsic thermal jumps with Γ₀ and n_th, and
/// cavity-induced jumps weighted by |A|² with the state-dependent sideband
/// rates.
///
/// The modified frequencies ω̃_nα are taken equal to ω_nα: the dissipators
/// are diagonal in this basis, so the second-order shifts do not affect the
/// steady populations.
pub fn build_eliminated(
    p: &SystemParams,
    basis: &PolaritonBasis,
    table: &TransitionTable,
    rates: &RateSet,
) -> Result<Liouvillian> {
    let d = basis.dim();
    if table.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: table.dim(),
        });
    }
    if rates.len() != table.len() {
        return Err(Error::DimensionMismatch {
            expected: table.len(),
            found: rates.len(),
        });
    }
    let labels = basis.labels();
    let h = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        labels.iter().map(|&l| C64::new(basis.energy(l), 0.0)),
    ));

    let mut b = SuperOpBuilder::new(d);
    b.add_hamiltonian(&h);
    for (t, r) in table.iter().zip(&rates.rates) {
        let (lo, hi) = (t.to.index(), t.from.index());
        b.add_jump(&[(lo, 1.0)], &[(hi, 1.0)], r.down(t.a))?;
        b.add_jump(&[(hi, 1.0)], &[(lo, 1.0)], r.up(t.a))?;
    }

    Ok(Liouvillian {
        matrix: b.finish(),
        variant: ModelVariant::Eliminated,
        basis_labels: labels.into_iter().map(StateLabel::Polariton).collect(),
        params_hash: params_fingerprint(p),
        observables: ObservableOps {
            number: real_to_complex(&basis.number_operator()),
            sigma_z: real_to_complex(&basis.sigma_z_operator()),
            traced_dim: 1,
        },
    })
}

/// A resonator–TLS eigenstate written in the bare mech ⊗ TLS basis.
#[derive(Clone, Debug)]
struct EmbeddedState {
    excitations: usize,
    energy: f64,
    /// (index into mech ⊗ TLS, amplitude)
    components: Vec<(usize, f64)>,
}

/// Eigenstates of H_τ on the truncated space mech(n_mech) ⊗ TLS: the ground
/// state, doublets 1..n_mech−1, and the unpaired top state |n_mech−1, ↑⟩.
fn embedded_polaritons(p: &SystemParams, basis: &PolaritonBasis) -> Vec<Vec<EmbeddedState>> {
    let top = p.n_mech - 1;
    let idx = |m: usize, s: usize| m * 2 + s;
    let mut shells = vec![vec![EmbeddedState {
        excitations: 0,
        energy: 0.0,
        components: vec![(idx(0, 0), 1.0)],
    }]];
    for n in 1..=top {
        let d = basis.doublet(n);
        shells.push(
            crate::polariton::Branch::BOTH
                .iter()
                .map(|&br| EmbeddedState {
                    excitations: n,
                    energy: d.energy(br),
                    components: vec![(idx(n, 0), d.c(br)), (idx(n - 1, 1), d.s(br))],
                })
                .collect(),
        );
    }
    shells.push(vec![EmbeddedState {
        excitations: top + 1,
        energy: top as f64 * p.omega_m + p.omega_z,
        components: vec![(idx(top, 1), 1.0)],
    }]);
    shells
}

// ⟨to| op |from⟩ for an operator on mech ⊗ TLS.
fn bare_element(op: &DMatrix<C64>, to: &EmbeddedState, from: &EmbeddedState) -> f64 {
    let mut acc = 0.0;
    for &(i, u) in &to.components {
        for &(k, v) in &from.components {
            acc += u * v * op[(i, k)].re;
        }
    }
    acc
}

/// Full tripartite master equation: H_t, cavity damping (κ0/2)L(b) at zero
/// temperature, and the intrinsic polariton jumps ⊗ 1_cav.
///
/// `basis` must hold at least `n_mech − 1` doublets. The matrix elements of
/// the jumps are evaluated directly from the bare `a` and σ̄_−.
pub fn build_full(
    p: &SystemParams,
    ops: &BareOperators,
    basis: &PolaritonBasis,
) -> Result<Liouvillian> {
    if ops.dims.len() != 3 || ops.dims[0] != p.n_mech || ops.dims[2] != p.n_cav {
        return Err(Error::DimensionMismatch {
            expected: p.n_mech * 2 * p.n_cav,
            found: ops.dim(),
        });
    }
    if basis.n_exc() < p.n_mech - 1 {
        return Err(Error::DimensionMismatch {
            expected: p.n_mech - 1,
            found: basis.n_exc(),
        });
    }
    let n_c = p.n_cav;
    let d = ops.dim();
    let h = build_hamiltonian(p, ops, ModelVariant::Full);
    let b_op = ops.b.as_ref().expect("full operators carry the cavity");

    let reduced = build_bare_operators(p, ModelVariant::Simple);
    let shells = embedded_polaritons(p, basis);

    let mut sb = SuperOpBuilder::new(d);
    sb.add_hamiltonian(&h);
    sb.add_lindblad(b_op, p.kappa0)?;

    for pair in shells.windows(2) {
        let (lower, upper) = (&pair[0], &pair[1]);
        for from in upper {
            for to in lower {
                debug_assert_eq!(from.excitations, to.excitations + 1);
                let a = bare_element(&reduced.a, to, from);
                let sigma = bare_element(&reduced.sigma_minus_bar, to, from);
                let omega = from.energy - to.energy;
                let gamma0 = a * a * p.gamma_m + sigma * sigma * p.gamma_tau;
                if gamma0 == 0.0 {
                    continue;
                }
                let nth = bose_occupation(omega, p.kt)?;
                add_cavity_identity_jump(&mut sb, to, from, n_c, gamma0 * (nth + 1.0))?;
                add_cavity_identity_jump(&mut sb, from, to, n_c, gamma0 * nth)?;
            }
        }
    }

    let mut labels = Vec::with_capacity(d);
    for m in 0..p.n_mech {
        for s in 0..2 {
            for c in 0..n_c {
                labels.push(StateLabel::Bare {
                    mech: m,
                    spin: s,
                    cav: Some(c),
                });
            }
        }
    }
    Ok(Liouvillian {
        matrix: sb.finish(),
        variant: ModelVariant::Full,
        basis_labels: labels,
        params_hash: params_fingerprint(p),
        observables: ObservableOps {
            number: &reduced.a_dag * &reduced.a,
            sigma_z: reduced.sigma_z_bar.clone(),
            traced_dim: n_c,
        },
    })
}

/// Lindblad term of O = |to⟩⟨from| ⊗ 1_cav.
fn add_cavity_identity_jump(
    sb: &mut SuperOpBuilder,
    to: &EmbeddedState,
    from: &EmbeddedState,
    n_c: usize,
    rate: f64,
) -> Result<()> {
    if rate < 0.0 || rate.is_nan() {
        return Err(Error::NegativeRate(rate));
    }
    if rate == 0.0 {
        return Ok(());
    }
    let re = |x: f64| C64::new(x, 0.0);
    let mut o = Vec::new();
    for c in 0..n_c {
        for &(i, u) in &to.components {
            for &(k, v) in &from.components {
                o.push((i * n_c + c, k * n_c + c, re(u * v)));
            }
        }
    }
    let od: Vec<_> = o.iter().map(|&(i, k, v)| (k, i, v.conj())).collect();
    let norm_to: f64 = to.components.iter().map(|(_, u)| u * u).sum();
    let mut ood = Vec::new();
    for c in 0..n_c {
        for &(i, u) in &from.components {
            for &(k, v) in &from.components {
                ood.push((i * n_c + c, k * n_c + c, re(norm_to * u * v)));
            }
        }
    }
    sb.add_sandwich(&o, &od, re(rate));
    sb.add_left(&ood, re(-rate / 2.0));
    sb.add_right(&ood, re(-rate / 2.0));
    Ok(())
}

/// Naive model: H_τ with the TLS added directly to the bare cooling
/// equation,
///
/// (Γ−/2)L(a) + (Γ+/2)L(a†) + (γ_m/2)[(n_th+1)L(a) + n_th L(a†)]
/// + (γ_τ/2)[(n_th^z+1)L(σ̄_−) + n_th^z L(σ̄_+)],
///
/// with Γ∓ taken at ω_m and n_th^z at ω_z.
pub fn build_simple(p: &SystemParams, ops: &BareOperators) -> Result<Liouvillian> {
    if ops.dims.len() != 2 || ops.dims[0] != p.n_mech {
        return Err(Error::DimensionMismatch {
            expected: 2 * p.n_mech,
            found: ops.dim(),
        });
    }
    let d = ops.dim();
    let h = build_hamiltonian(p, ops, ModelVariant::Simple);
    let (cool, heat) = bare_rates(p);
    let nth = bose_occupation(p.omega_m, p.kt)?;
    let nz = bose_occupation(p.omega_z, p.kt)?;

    let mut sb = SuperOpBuilder::new(d);
    sb.add_hamiltonian(&h);
    sb.add_lindblad(&ops.a, cool + p.gamma_m * (nth + 1.0))?;
    sb.add_lindblad(&ops.a_dag, heat + p.gamma_m * nth)?;
    sb.add_lindblad(&ops.sigma_minus_bar, p.gamma_tau * (nz + 1.0))?;
    sb.add_lindblad(&ops.sigma_plus_bar, p.gamma_tau * nz)?;

    let mut labels = Vec::with_capacity(d);
    for m in 0..p.n_mech {
        for s in 0..2 {
            labels.push(StateLabel::Bare {
                mech: m,
                spin: s,
                cav: None,
            });
        }
    }
    Ok(Liouvillian {
        matrix: sb.finish(),
        variant: ModelVariant::Simple,
        basis_labels: labels,
        params_hash: params_fingerprint(p),
        observables: ObservableOps {
            number: &ops.a_dag * &ops.a,
            sigma_z: ops.sigma_z_bar.clone(),
            traced_dim: 1,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn vec_of(m: &DMatrix<C64>) -> Vec<C64> {
        m.as_slice().to_vec()
    }

    #[test]
    fn column_stacking_convention() {
        let m = DMatrix::from_fn(3, 3, |i, j| C64::new((i + 3 * j) as f64, 0.0));
        let v = vec_of(&m);
        for (k, x) in v.iter().enumerate() {
            assert_eq!(x.re, k as f64);
        }
    }

    #[test]
    fn lindblad_term_matches_the_dense_dissipator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let op = random_matrix(4, &mut rng);
        let rho = random_matrix(4, &mut rng);
        let l = lindblad_term(&op, 0.7).unwrap();
        let got = DMatrix::from_vec(4, 4, l.mul_vec(rho.as_slice()));
        let od = op.adjoint();
        let want = (&op * &rho * &od * C64::new(2.0, 0.0) - &od * &op * &rho - &rho * &od * &op)
            * C64::new(0.35, 0.0);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn zero_rate_gives_zero_superoperator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = lindblad_term(&random_matrix(3, &mut rng), 0.0).unwrap();
        assert_eq!(l.nnz(), 0);
        assert!(matches!(
            lindblad_term(&random_matrix(3, &mut rng), -1.0),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn lindblad_term_is_trace_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = random_matrix(5, &mut rng);
        let l = lindblad_term(&op, 1.3).unwrap();
        for _ in 0..100 {
            let rho = random_matrix(5, &mut rng);
            let out = DMatrix::from_vec(5, 5, l.mul_vec(rho.as_slice()));
            assert!(out.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn jump_builder_matches_dense_lindblad() {
        let to = [(0usize, 0.6), (2, -0.8)];
        let from = [(1usize, 0.8), (3, 0.6)];
        let mut op = DMatrix::zeros(4, 4);
        for &(i, u) in &to {
            for &(k, v) in &from {
                op[(i, k)] = C64::new(u * v, 0.0);
            }
        }
        let dense = lindblad_term(&op, 0.4).unwrap();
        let mut sb = SuperOpBuilder::new(4);
        sb.add_jump(&to, &from, 0.4).unwrap();
        let sparse = sb.finish();
        assert!((dense.to_dense() - sparse.to_dense()).norm() < 1e-14);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in ModelVariant::ALL {
            assert_eq!(v.name().parse::<ModelVariant>().unwrap(), v);
        }
        assert!("bogus".parse::<ModelVariant>().is_err());
    }

    #[test]
    fn dimensions_per_variant() {
        let p = SystemParams::default()
            .modified(|r| {
                r.n_exc = Some(5);
                r.n_mech = Some(4);
                r.n_cav = Some(2);
            })
            .unwrap();
        let e = Liouvillian::build(&p, ModelVariant::Eliminated).unwrap();
        assert_eq!(e.dim(), 11);
        assert_eq!(e.matrix.nrows(), 121);
        let f = Liouvillian::build(&p, ModelVariant::Full).unwrap();
        assert_eq!(f.dim(), 16);
        let s = Liouvillian::build(&p, ModelVariant::Simple).unwrap();
        assert_eq!(s.dim(), 8);
        for l in [&e, &f, &s] {
            assert!(l.trace_defect() < 1e-12, "{}", l.variant);
        }
        assert_eq!(e.params_hash, f.params_hash);
    }

    #[test]
    fn triplet_dump() {
        let p = SystemParams::default()
            .modified(|r| r.n_exc = Some(2))
            .unwrap();
        let l = Liouvillian::build(&p, ModelVariant::Eliminated).unwrap();
        let mut buf = Vec::new();
        l.write_triplets_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().count(),
            1 + l.matrix.nnz()
        );
    }
}
