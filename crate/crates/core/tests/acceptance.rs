//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` doubles as a
//! report.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlscool::model::{build_bare_operators, build_hamiltonian};
use tlscool::polariton::{build_basis, build_transitions};
use tlscool::rates::{bare_steady_occupation, dispersive_predictions};
use tlscool::selfcheck::sample_params;
use tlscool::sparse::C64;
use tlscool::steady::{solve_steady_with, SolveMethod};
use tlscool::sweep::{
    optimal_detuning_curve, run_sweep, Grid, OptimalDetuning, SweepSpec, SweepVariant,
    DETUNING_STEP, DETUNING_WINDOW,
};
use tlscool::{steady_state, Liouvillian, ModelVariant, SystemParams};

fn report(criterion: &str, pass: bool, detail: String) {
    println!(
        "{} {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn reference() -> SystemParams {
    SystemParams::default()
}

fn with(p: &SystemParams, edit: impl FnOnce(&mut tlscool::RawParams)) -> SystemParams {
    p.modified(edit).unwrap()
}

fn n_ss(p: &SystemParams, v: ModelVariant) -> f64 {
    steady_state(p, v).unwrap().n_ss
}

#[test]
fn criterion_1_bare_limit() {
    let p = with(&reference(), |r| r.lambda_bar = Some(0.0));
    let want = bare_steady_occupation(&p).unwrap();
    let got = n_ss(&p, ModelVariant::Eliminated);
    let rel = (got - want).abs() / want;
    report(
        "criterion 1 (bare limit)",
        rel <= 1e-4,
        format!("n_ss {got:.6e} vs closed form {want:.6e}, rel {rel:.1e}"),
    );
}

#[test]
fn criterion_2_gibbs() {
    let p = with(&reference(), |r| r.g0 = Some(0.0));
    let s = steady_state(&p, ModelVariant::Eliminated).unwrap();
    let pops = s.populations();
    let table = build_transitions(&build_basis(&p));
    let worst = table
        .iter()
        .map(|t| {
            let ratio = pops[t.from.index()] / pops[t.to.index()];
            let want = (-t.omega / p.kt).exp();
            (ratio - want).abs() / want
        })
        .fold(0.0, f64::max);
    report(
        "criterion 2 (Gibbs)",
        worst <= 1e-8,
        format!(
            "{} transitions, worst relative deviation {worst:.1e}",
            table.len()
        ),
    );
}

/// Dense eigenvectors of H_τ on a bare Fock space, matched to each polariton
/// label by energy and sign-fixed against the closed-form amplitudes.
fn oracle_vectors(p: &SystemParams, n_mech: usize) -> (DMatrix<f64>, f64) {
    let q = with(p, |r| r.n_mech = Some(n_mech));
    let ops = build_bare_operators(&q, ModelVariant::Simple);
    let h = build_hamiltonian(&q, &ops, ModelVariant::Simple).map(|z| z.re);
    let dim = h.nrows();
    let eig = h.symmetric_eigen();
    let basis = build_basis(p);
    let mut v = DMatrix::zeros(dim, basis.dim());
    let mut energy_err: f64 = 0.0;
    for label in basis.labels() {
        let e = basis.energy(label) - p.omega_z / 2.0;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| {
            (eig.eigenvalues[i] - e)
                .abs()
                .total_cmp(&(eig.eigenvalues[j] - e).abs())
        });
        let (k, next) = (order[0], order[1]);
        assert!(
            (eig.eigenvalues[next] - eig.eigenvalues[k]).abs() > 1e-6,
            "accidental degeneracy at {label}"
        );
        energy_err = energy_err.max((eig.eigenvalues[k] - e).abs());
        let mut col = eig.eigenvectors.column(k).into_owned();
        let (c, s) = basis.amplitudes(label);
        let n = label.excitations();
        let anchor = if c.abs() >= s.abs() {
            (2 * n, c)
        } else {
            (2 * (n - 1) + 1, s)
        };
        if col[anchor.0] * anchor.1 < 0.0 {
            col = -col;
        }
        v.set_column(label.index(), &col);
    }
    (v, energy_err)
}

#[test]
fn criterion_3_eigenbasis_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = sample_params(&mut rng, 8, 2, 2);
        let n_mech = p.n_exc + 2;
        let (v, energy_err) = oracle_vectors(&p, n_mech);
        let q = with(&p, |r| r.n_mech = Some(n_mech));
        let ops = build_bare_operators(&q, ModelVariant::Simple);
        let table = build_transitions(&build_basis(&p));
        let a = v.transpose() * ops.a.map(|z| z.re) * &v;
        let s = v.transpose() * ops.sigma_minus_bar.map(|z| z.re) * &v;
        let mut err = energy_err;
        for t in table.iter() {
            let (i, j) = (t.to.index(), t.from.index());
            err = err.max((a[(i, j)] - t.a).abs());
            err = err.max((s[(i, j)] - t.sigma).abs());
        }
        worst = worst.max(err);
    }
    report(
        "criterion 3 (eigenbasis oracle)",
        worst <= 1e-10,
        format!("20 draws, worst deviation in ω, A, σ {worst:.1e}"),
    );
}

#[test]
fn criterion_4_resonant_heating() {
    let p = reference();
    let heated = n_ss(&p, ModelVariant::Eliminated);
    let bare = n_ss(
        &with(&p, |r| r.lambda_bar = Some(0.0)),
        ModelVariant::Eliminated,
    );
    let ratio = heated / bare;
    report(
        "criterion 4 (resonant heating)",
        (30.0..=70.0).contains(&ratio),
        format!("n_ss {heated:.4e} / n_ss(λ̄=0) {bare:.4e} = {ratio:.2}"),
    );
}

#[test]
fn criterion_5_tls_polarization() {
    let s = steady_state(&reference(), ModelVariant::Eliminated).unwrap();
    report(
        "criterion 5 (TLS polarization)",
        s.sigma_z_ss <= -0.85,
        format!("⟨σ̄_z⟩ = {:.4}", s.sigma_z_ss),
    );
}

fn detuning_curve(variant: ModelVariant) -> &'static [OptimalDetuning] {
    static ELIM: OnceLock<Vec<OptimalDetuning>> = OnceLock::new();
    static SIMPLE: OnceLock<Vec<OptimalDetuning>> = OnceLock::new();
    let cell = match variant {
        ModelVariant::Eliminated => &ELIM,
        ModelVariant::Simple => &SIMPLE,
        ModelVariant::Full => unreachable!(),
    };
    cell.get_or_init(|| {
        let omega_z = Grid::linear(0.5, 1.5, 101).values();
        optimal_detuning_curve(&reference(), variant, &omega_z, DETUNING_WINDOW)
            .unwrap()
            .into_iter()
            .map(Result::unwrap)
            .collect()
    })
}

fn drift(o: &OptimalDetuning) -> f64 {
    (o.delta_b + 1.0).abs()
}

#[test]
fn criterion_6_optimal_detuning_drift() {
    let elim = detuning_curve(ModelVariant::Eliminated);
    let simple = detuning_curve(ModelVariant::Simple);
    let worst_elim = elim
        .iter()
        .max_by(|a, b| drift(a).total_cmp(&drift(b)))
        .unwrap();
    let worst_simple = simple.iter().map(drift).fold(0.0, f64::max);
    let boundary = elim.iter().chain(simple).any(|o| o.on_boundary);
    let pass =
        (0.05..=0.15).contains(&drift(worst_elim)) && worst_simple <= DETUNING_STEP && !boundary;
    report(
        "criterion 6 (optimal-detuning drift)",
        pass,
        format!(
            "eliminated max |Δ_b+1| = {:.4} at ω_z = {:.2}; simple max = {worst_simple:.4}",
            drift(worst_elim),
            worst_elim.omega_z
        ),
    );
}

#[test]
fn detuning_returns_to_the_sideband_far_from_resonance() {
    let elim = detuning_curve(ModelVariant::Eliminated);
    let peak = elim.iter().map(drift).fold(0.0, f64::max);
    let (first, last) = (drift(&elim[0]), drift(&elim[elim.len() - 1]));
    report(
        "detuning curve shape",
        first < peak / 5.0 && last < peak / 5.0,
        format!("|Δ_b+1| = {first:.4} at ω_z=0.5, peak {peak:.4}, {last:.4} at ω_z=1.5"),
    );
}

fn full_elim_gap(g0: f64) -> (f64, f64, f64) {
    let p = with(&reference(), |r| {
        r.g0 = Some(g0);
        r.n_mech = Some(12);
        r.n_cav = Some(3);
    });
    let full = n_ss(&p, ModelVariant::Full);
    let elim = n_ss(&p, ModelVariant::Eliminated);
    (full, elim, (full - elim).abs() / full)
}

#[test]
fn criterion_7_full_vs_eliminated_agreement() {
    let (full, elim, rel) = full_elim_gap(0.05);
    report(
        "criterion 7 (FULL vs ELIMINATED within 10%)",
        rel <= 0.10,
        format!("full {full:.5e}, eliminated {elim:.5e}, rel {rel:.4}"),
    );
}

#[test]
fn criterion_7_gap_shrinks_with_g0() {
    let gaps: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&g| full_elim_gap(g).2)
        .collect();
    report(
        "criterion 7 (gap shrinks as g0 halves)",
        gaps[0] > gaps[1] && gaps[1] > gaps[2],
        format!(
            "gaps {:.4}, {:.4}, {:.4} at g0 = 0.05, 0.025, 0.0125",
            gaps[0], gaps[1], gaps[2]
        ),
    );
}

fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    use rand::Rng;
    DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

#[test]
fn criterion_8_superoperator_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut trace, mut herm, mut min_eig, mut agree) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for variant in ModelVariant::ALL {
        for _ in 0..10 {
            let p = sample_params(&mut rng, 12, 6, 3);
            let l = Liouvillian::build(&p, variant).unwrap();
            let d = l.dim();
            let scale = l.matrix.max_abs();
            trace = trace.max(l.trace_defect() / scale);
            let x = random_matrix(&mut rng, d);
            let lhs = l.apply(&x.adjoint());
            let rhs = l.apply(&x).adjoint();
            herm = herm.max(max_norm(&(lhs - rhs)) / scale);
            let a = solve_steady_with(&l, SolveMethod::TraceRow).unwrap();
            let b = solve_steady_with(&l, SolveMethod::Regularized).unwrap();
            min_eig = min_eig
                .min(a.diagnostics.min_eig)
                .min(b.diagnostics.min_eig);
            agree = agree.max(max_norm(&(a.rho - b.rho)));
        }
    }
    let pass = trace <= 1e-12 && herm <= 1e-12 && min_eig >= -1e-8 && agree <= 1e-8;
    report(
        "criterion 8 (superoperator invariants)",
        pass,
        format!(
            "30 draws: trace defect {trace:.1e}, Hermiticity {herm:.1e}, \
             min eig {min_eig:.1e}, solver gap {agree:.1e}"
        ),
    );
}

#[test]
fn criterion_9_dispersive_polarization() {
    let p = with(&reference(), |r| r.omega_z = Some(0.7));
    let s = steady_state(&p, ModelVariant::Eliminated).unwrap();
    let pred = dispersive_predictions(&p).unwrap();
    let gap = 1.0 + s.sigma_z_ss;
    let err = (s.sigma_z_ss - pred.sigma_z_ss).abs() / gap;
    report(
        "criterion 9 (dispersive polarization)",
        err <= 0.20,
        format!(
            "⟨σ̄_z⟩ {:.5} vs predictor {:.5}, {:.1}% of the gap",
            s.sigma_z_ss,
            pred.sigma_z_ss,
            100.0 * err
        ),
    );
}

fn gamma_tau_curve(omega_z: f64, from: f64, to: f64, points: usize) -> Vec<f64> {
    let spec = SweepSpec {
        base: with(&reference(), |r| r.omega_z = Some(omega_z)),
        axis: tlscool::sweep::Axis::GammaTau,
        grid: Grid::log(from, to, points),
        variants: vec![SweepVariant::Eliminated],
    };
    run_sweep(&spec)
        .unwrap()
        .rows
        .iter()
        .map(|r| r.n_ss.unwrap())
        .collect()
}

#[test]
fn heating_grows_faster_with_gamma_tau_at_resonance() {
    let n = gamma_tau_curve(1.0, 5e-8, 5e-4, 25);
    let monotone = n.windows(2).all(|w| w[1] > w[0]);
    let off = gamma_tau_curve(0.7, 5e-8, 5e-4, 25);
    let (on_growth, off_growth) = (n[24] / n[0], off[24] / off[0]);
    report(
        "gamma_tau ordering",
        monotone && on_growth > off_growth,
        format!("growth over the γ_τ range: {on_growth:.1}x at ω_z=1, {off_growth:.1}x at ω_z=0.7"),
    );
}

#[test]
fn off_resonance_gamma_tau_growth_below_factor_three() {
    let n = gamma_tau_curve(0.7, 5e-8, 5e-5, 25);
    let (lo, hi) = n.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    report(
        "gamma_tau off-resonance range",
        hi / lo < 3.0,
        format!(
            "n_ss spans {lo:.4e}..{hi:.4e} ({:.2}x) for γ_τ ∈ [5e-8, 5e-5]",
            hi / lo
        ),
    );
}

#[test]
fn dips_beside_resonance() {
    let spec = SweepSpec {
        variants: vec![SweepVariant::Eliminated],
        ..SweepSpec::tls_frequency(reference())
    };
    let rows = run_sweep(&spec).unwrap().rows;
    let n: Vec<f64> = rows.iter().map(|r| r.n_ss.unwrap()).collect();
    let at = |wz: f64| n[((wz - 0.5) / 0.01).round() as usize];
    let peak = n.iter().cloned().fold(0.0, f64::max);
    let below = at(0.99) < at(0.95) && at(0.99) < at(0.93);
    let above = at(1.01) < at(1.05) && at(1.01) < at(1.07);
    let near_peak = at(1.0) > 0.8 * peak;
    report(
        "dip structure",
        below && above && near_peak,
        format!(
            "n_ss at ω_z = 0.93, 0.99, 1.00, 1.01, 1.07: {:.4e} {:.4e} {:.4e} {:.4e} {:.4e}; peak {peak:.4e}",
            at(0.93),
            at(0.99),
            at(1.0),
            at(1.01),
            at(1.07)
        ),
    );
}

#[test]
fn simple_model_misses_resonant_heating() {
    let p = reference();
    let simple = n_ss(&p, ModelVariant::Simple);
    let elim = n_ss(&p, ModelVariant::Eliminated);
    let full = n_ss(&p, ModelVariant::Full);
    let (simple_gap, full_gap) = ((simple - elim).abs() / elim, (full - elim).abs() / full);
    report(
        "simple vs eliminated at resonance",
        simple != elim && simple_gap > 0.01,
        format!(
            "simple {simple:.4e}, eliminated {elim:.4e}, full {full:.4e}; \
             |simple−elim|/elim {simple_gap:.3}, |full−elim|/full {full_gap:.3}"
        ),
    );
}

#[test]
fn simple_deviates_more_than_full() {
    let p = reference();
    let simple = n_ss(&p, ModelVariant::Simple);
    let elim = n_ss(&p, ModelVariant::Eliminated);
    let full = n_ss(&p, ModelVariant::Full);
    let (simple_gap, full_gap) = ((simple - elim).abs() / elim, (full - elim).abs() / full);
    report(
        "simple deviates more than full",
        simple_gap > full_gap,
        format!("|simple−elim|/elim {simple_gap:.3} vs |full−elim|/full {full_gap:.3}"),
    );
}

#[test]
fn compare_without_tls_coupling_agrees() {
    let p = with(&reference(), |r| r.lambda_bar = Some(0.0));
    let c = tlscool::sweep::compare_variants(&p).unwrap();
    let n = [c.full.n_ss, c.eliminated.n_ss, c.simple.n_ss];
    let spread = n.iter().cloned().fold(0.0, f64::max)
        / n.iter().cloned().fold(f64::INFINITY, f64::min)
        - 1.0;
    report(
        "compare at λ̄=0 (all three variants within 1e-6)",
        spread <= 1e-6,
        format!(
            "full {:.6e}, eliminated {:.6e}, simple {:.6e}, spread {spread:.2e}",
            n[0], n[1], n[2]
        ),
    );
}
