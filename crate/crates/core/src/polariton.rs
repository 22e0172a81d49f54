//! Resonator–TLS polariton ladder.
//!
//! The Jaynes–Cummings Hamiltonian H_τ conserves a†a + σ̄_+σ̄_−, so its
//! eigenstates are the ground state `G = |0↓⟩` and, for every excitation
//! number n ≥ 1, a doublet
//!
//! ```text
//! |n±⟩ = c_±ⁿ |n↓⟩ + s_±ⁿ |(n−1)↑⟩
//! c_+ⁿ = −s_−ⁿ = cos(δ_n/2),   s_+ⁿ = c_−ⁿ = sin(δ_n/2)
//! cos(δ_n/2) = √((ω_tn + δω) / 2ω_tn),   ω_tn = √(δω² + 4λ̄²n)
//! ω_{n±} = n ω_m + (±ω_tn − δω)/2
//! ```
//!
//! with δω = ω_m − ω_z and energies measured from `G`.
//!
//! States are indexed `G = 0`, `|n−⟩ = 2n − 1`, `|n+⟩ = 2n`.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::model::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "-",
            Branch::Plus => "+",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PolaritonLabel {
    Ground,
    Doublet { n: usize, branch: Branch },
}

impl PolaritonLabel {
    pub fn index(self) -> usize {
        match self {
            PolaritonLabel::Ground => 0,
            PolaritonLabel::Doublet { n, branch } => match branch {
                Branch::Minus => 2 * n - 1,
                Branch::Plus => 2 * n,
            },
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            PolaritonLabel::Ground
        } else {
            let n = i.div_ceil(2);
            let branch = if i % 2 == 1 {
                Branch::Minus
            } else {
                Branch::Plus
            };
            PolaritonLabel::Doublet { n, branch }
        }
    }

    /// Excitation number (0 for the ground state).
    pub fn excitations(self) -> usize {
        match self {
            PolaritonLabel::Ground => 0,
            PolaritonLabel::Doublet { n, .. } => n,
        }
    }
}

impl fmt::Display for PolaritonLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolaritonLabel::Ground => f.write_str("G"),
            PolaritonLabel::Doublet { n, branch } => write!(f, "{n}{branch}"),
        }
    }
}

/// One doublet: splitting, mixing angle and energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Doublet {
    pub n: usize,
    /// Rabi splitting ω_tn = ω_{n+} − ω_{n−}.
    pub omega_t: f64,
    /// c_+ⁿ = cos(δ_n/2).
    pub cos_half: f64,
    /// s_+ⁿ = sin(δ_n/2).
    pub sin_half: f64,
    pub energy_minus: f64,
    pub energy_plus: f64,
}

impl Doublet {
    fn new(n: usize, omega_m: f64, delta_omega: f64, lambda_bar: f64) -> Self {
        let coupling_sq = 4.0 * lambda_bar * lambda_bar * n as f64;
        let omega_t = (delta_omega * delta_omega + coupling_sq).sqrt();
        let (cos_half, sin_half) = if omega_t == 0.0 {
            // λ̄ = 0 on resonance: any basis of the degenerate pair diagonalizes
            // H_τ; keep the uncoupled product states.
            (1.0, 0.0)
        } else if delta_omega >= 0.0 {
            // ω_t − δω = 4λ̄²n / (ω_t + δω) avoids cancellation
            let small = coupling_sq / (omega_t + delta_omega);
            (
                ((omega_t + delta_omega) / (2.0 * omega_t)).sqrt(),
                (small / (2.0 * omega_t)).sqrt(),
            )
        } else {
            let small = coupling_sq / (omega_t - delta_omega);
            (
                (small / (2.0 * omega_t)).sqrt(),
                ((omega_t - delta_omega) / (2.0 * omega_t)).sqrt(),
            )
        };
        let base = n as f64 * omega_m - delta_omega / 2.0;
        Doublet {
            n,
            omega_t,
            cos_half,
            sin_half,
            energy_minus: base - omega_t / 2.0,
            energy_plus: base + omega_t / 2.0,
        }
    }

    /// Amplitude on |n↓⟩.
    pub fn c(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.cos_half,
            Branch::Minus => self.sin_half,
        }
    }

    /// Amplitude on |(n−1)↑⟩.
    pub fn s(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.sin_half,
            Branch::Minus => -self.cos_half,
        }
    }

    pub fn energy(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.energy_plus,
            Branch::Minus => self.energy_minus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolaritonBasis {
    pub omega_m: f64,
    pub omega_z: f64,
    pub lambda_bar: f64,
    /// δω = ω_m − ω_z.
    pub delta_omega: f64,
    doublets: Vec<Doublet>,
}

/// Builds doublets `1..=p.n_exc`.
pub fn build_basis(p: &SystemParams) -> PolaritonBasis {
    PolaritonBasis::with_doublets(p, p.n_exc)
}

impl PolaritonBasis {
    pub fn with_doublets(p: &SystemParams, n_exc: usize) -> Self {
        let delta_omega = p.omega_m - p.omega_z;
        PolaritonBasis {
            omega_m: p.omega_m,
            omega_z: p.omega_z,
            lambda_bar: p.lambda_bar,
            delta_omega,
            doublets: (1..=n_exc)
                .map(|n| Doublet::new(n, p.omega_m, delta_omega, p.lambda_bar))
                .collect(),
        }
    }

    pub fn n_exc(&self) -> usize {
        self.doublets.len()
    }

    pub fn dim(&self) -> usize {
        1 + 2 * self.n_exc()
    }

    pub fn doublet(&self, n: usize) -> &Doublet {
        &self.doublets[n - 1]
    }

    pub fn doublets(&self) -> &[Doublet] {
        &self.doublets
    }

    pub fn labels(&self) -> Vec<PolaritonLabel> {
        (0..self.dim()).map(PolaritonLabel::from_index).collect()
    }

    pub fn energy(&self, label: PolaritonLabel) -> f64 {
        match label {
            PolaritonLabel::Ground => 0.0,
            PolaritonLabel::Doublet { n, branch } => self.doublet(n).energy(branch),
        }
    }

    /// (c, s) amplitudes on (|n↓⟩, |(n−1)↑⟩); the ground state is (1, 0).
    pub fn amplitudes(&self, label: PolaritonLabel) -> (f64, f64) {
        match label {
            PolaritonLabel::Ground => (1.0, 0.0),
            PolaritonLabel::Doublet { n, branch } => {
                let d = self.doublet(n);
                (d.c(branch), d.s(branch))
            }
        }
    }

    /// a†a in the polariton basis (block diagonal, exact for every retained
    /// doublet).
    pub fn number_operator(&self) -> DMatrix<f64> {
        self.doublet_diagonal_operator(|n| (n as f64, n as f64 - 1.0))
    }

    /// σ̄_z in the polariton basis.
    pub fn sigma_z_operator(&self) -> DMatrix<f64> {
        let mut m = self.doublet_diagonal_operator(|_| (-1.0, 1.0));
        m[(0, 0)] = -1.0;
        m
    }

    /// Columns are the basis states written in the bare mech(`n_mech`) ⊗ TLS
    /// basis, index `2m + s` with s = 0 for ↓. Needs `n_mech > n_exc`.
    pub fn bare_vectors(&self, n_mech: usize) -> DMatrix<f64> {
        assert!(n_mech > self.n_exc(), "n_mech must exceed n_exc");
        let mut v = DMatrix::zeros(2 * n_mech, self.dim());
        v[(0, 0)] = 1.0;
        for label in self.labels().into_iter().skip(1) {
            let (c, s) = self.amplitudes(label);
            let n = label.excitations();
            v[(2 * n, label.index())] = c;
            v[(2 * (n - 1) + 1, label.index())] = s;
        }
        v
    }

    // Operator diagonal in the bare basis, with values (on |n↓⟩, on |(n−1)↑⟩).
    fn doublet_diagonal_operator(&self, values: impl Fn(usize) -> (f64, f64)) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for d in &self.doublets {
            let (down, up) = values(d.n);
            for a in Branch::BOTH {
                for b in Branch::BOTH {
                    let i = PolaritonLabel::Doublet { n: d.n, branch: a }.index();
                    let j = PolaritonLabel::Doublet { n: d.n, branch: b }.index();
                    m[(i, j)] = down * d.c(a) * d.c(b) + up * d.s(a) * d.s(b);
                }
            }
        }
        m
    }
}

/// Lowering transition |nα⟩ → |(n−1)β⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub n: usize,
    pub from: PolaritonLabel,
    pub to: PolaritonLabel,
    /// A_βα⁽ⁿ⁾ = ⟨(n−1)β| a |nα⟩.
    pub a: f64,
    /// σ_βα⁽ⁿ⁾ = ⟨(n−1)β| σ̄_− |nα⟩.
    pub sigma: f64,
    /// ω_nαβ = ω_nα − ω_(n−1)β.
    pub omega: f64,
}

impl Transition {
    /// Source branch α.
    pub fn alpha(&self) -> Branch {
        match self.from {
            PolaritonLabel::Doublet { branch, .. } => branch,
            PolaritonLabel::Ground => unreachable!("transitions start in a doublet"),
        }
    }

    /// Target branch β, `None` for the ground state.
    pub fn beta(&self) -> Option<Branch> {
        match self.to {
            PolaritonLabel::Doublet { branch, .. } => Some(branch),
            PolaritonLabel::Ground => None,
        }
    }

    /// Whether source and target lie on the same branch.
    pub fn identical_polarization(&self) -> bool {
        self.beta() == Some(self.alpha())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionTable {
    n_exc: usize,
    transitions: Vec<Transition>,
}

/// All lowering transitions between neighbouring doublets. Doublet 0 is the
/// ground state alone, with c⁰ = 1 and s⁰ = 0, so the two n = 1 elements
/// reduce to A = c_α¹ and σ = s_α¹.
pub fn build_transitions(basis: &PolaritonBasis) -> TransitionTable {
    let mut transitions = Vec::with_capacity(4 * basis.n_exc());
    for d in basis.doublets() {
        let n = d.n;
        let targets: Vec<PolaritonLabel> = if n == 1 {
            vec![PolaritonLabel::Ground]
        } else {
            Branch::BOTH
                .iter()
                .map(|&branch| PolaritonLabel::Doublet { n: n - 1, branch })
                .collect()
        };
        for alpha in Branch::BOTH {
            let from = PolaritonLabel::Doublet { n, branch: alpha };
            for &to in &targets {
                let (cb, sb) = basis.amplitudes(to);
                let a =
                    (n as f64).sqrt() * cb * d.c(alpha) + ((n - 1) as f64).sqrt() * sb * d.s(alpha);
                transitions.push(Transition {
                    n,
                    from,
                    to,
                    a,
                    sigma: cb * d.s(alpha),
                    omega: basis.energy(from) - basis.energy(to),
                });
            }
        }
    }
    TransitionTable {
        n_exc: basis.n_exc(),
        transitions,
    }
}

impl TransitionTable {
    pub fn n_exc(&self) -> usize {
        self.n_exc
    }

    pub fn dim(&self) -> usize {
        1 + 2 * self.n_exc
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transition> {
        self.transitions.iter()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Transition |nα⟩ → |(n−1)β⟩; `beta` is ignored for n = 1.
    pub fn get(&self, n: usize, alpha: Branch, beta: Branch) -> &Transition {
        let offset = if n == 1 {
            match alpha {
                Branch::Minus => 0,
                Branch::Plus => 1,
            }
        } else {
            2 + 4 * (n - 2)
                + match (alpha, beta) {
                    (Branch::Minus, Branch::Minus) => 0,
                    (Branch::Minus, Branch::Plus) => 1,
                    (Branch::Plus, Branch::Minus) => 2,
                    (Branch::Plus, Branch::Plus) => 3,
                }
        };
        &self.transitions[offset]
    }

    /// Matrix of `a` in the ordered polariton basis.
    pub fn mechanical_operator(&self) -> DMatrix<f64> {
        self.assemble(|t| t.a)
    }

    /// Matrix of σ̄_− in the ordered polariton basis.
    pub fn sigma_minus_operator(&self) -> DMatrix<f64> {
        self.assemble(|t| t.sigma)
    }

    fn assemble(&self, element: impl Fn(&Transition) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for t in &self.transitions {
            m[(t.to.index(), t.from.index())] = element(t);
        }
        m
    }

    /// Debug dump: `n,alpha,beta,A,sigma,omega`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "alpha", "beta", "A", "sigma", "omega"])?;
        for t in &self.transitions {
            let beta = t.beta().map_or_else(|| "G".to_string(), |b| b.to_string());
            w.write_record([
                t.n.to_string(),
                t.alpha().to_string(),
                beta,
                format!("{:.17e}", t.a),
                format!("{:.17e}", t.sigma),
                format!("{:.17e}", t.omega),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Matrix of `a` in the polariton basis (see [`TransitionTable::mechanical_operator`]).
pub fn mechanical_operator_in_eigenbasis(table: &TransitionTable) -> DMatrix<f64> {
    table.mechanical_operator()
}
