//! Property tests over the parameter ranges of the reference study.

use nalgebra::DMatrix;
use proptest::prelude::*;
use tlscool::model::{build_bare_operators, build_hamiltonian, validate_params};
use tlscool::polariton::{build_basis, build_transitions, Branch, PolaritonLabel};
use tlscool::rates::{bose_occupation, polariton_rates};
use tlscool::sparse::C64;
use tlscool::steady::solve_steady;
use tlscool::sweep::Grid;
use tlscool::{Liouvillian, ModelVariant, RawParams, SystemParams};

#[allow(clippy::too_many_arguments)]
fn params(
    omega_z: f64,
    lambda_bar: f64,
    g0: f64,
    kappa0: f64,
    delta_b: f64,
    log_gamma_m: f64,
    log_gamma_tau: f64,
    kt: f64,
) -> SystemParams {
    let raw = RawParams {
        omega_z: Some(omega_z),
        lambda_bar: Some(lambda_bar),
        g0: Some(g0),
        kappa0: Some(kappa0),
        delta_b: Some(delta_b),
        gamma_m: Some(10f64.powf(log_gamma_m)),
        gamma_tau: Some(10f64.powf(log_gamma_tau)),
        kt: Some(kt),
        n_exc: Some(8),
        n_mech: Some(5),
        n_cav: Some(2),
        ..RawParams::default()
    };
    validate_params(&raw).unwrap().params
}

fn system() -> impl Strategy<Value = SystemParams> {
    (
        0.5..1.5f64,
        0.0..0.1f64,
        0.01..0.06f64,
        0.1..0.3f64,
        -1.3..-0.7f64,
        -7.0..-5.0f64,
        -7.0..-3.0f64,
        1.0..20.0f64,
    )
        .prop_map(|(wz, lb, g0, k0, db, gm, gt, kt)| params(wz, lb, g0, k0, db, gm, gt, kt))
}

fn matrix(d: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        DMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| C64::new(re, im)))
    })
}

fn variant() -> impl Strategy<Value = ModelVariant> {
    prop::sample::select(ModelVariant::ALL.to_vec())
}

fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doublets_are_normalized_and_split_by_omega_t(p in system()) {
        let basis = build_basis(&p);
        for d in basis.doublets() {
            prop_assert!((d.cos_half.powi(2) + d.sin_half.powi(2) - 1.0).abs() < 1e-15);
            prop_assert!((d.energy_plus - d.energy_minus - d.omega_t).abs() < 1e-13);
        }
    }

    #[test]
    fn lowering_weights_sum_to_the_phonon_number(p in system()) {
        let basis = build_basis(&p);
        let table = build_transitions(&basis);
        for n in 1..=p.n_exc {
            for alpha in Branch::BOTH {
                let from = PolaritonLabel::Doublet { n, branch: alpha };
                let total: f64 = table.iter().filter(|t| t.from == from).map(|t| t.a * t.a).sum();
                let (_, s) = basis.amplitudes(from);
                prop_assert!((total - (n as f64 - s * s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_level_inversion(p in system()) {
        let table = build_transitions(&build_basis(&p));
        prop_assert!(table.iter().all(|t| t.omega > 0.0));
    }

    #[test]
    fn red_detuning_favours_cooling(p in system()) {
        let table = build_transitions(&build_basis(&p));
        for r in polariton_rates(&p, &table).unwrap().rates {
            prop_assert!(r.gamma_heat >= 0.0 && r.gamma0 >= 0.0);
            prop_assert!(r.gamma_cool >= r.gamma_heat);
        }
    }

    #[test]
    fn bose_detailed_balance(omega in 0.01..3.0f64, kt in 0.05..50.0f64) {
        let n = bose_occupation(omega, kt).unwrap();
        prop_assert!((n * (omega / kt).exp() - (n + 1.0)).abs() <= 1e-12 * (n + 1.0));
    }

    #[test]
    fn hamiltonian_conserves_excitations(p in system()) {
        let ops = build_bare_operators(&p, ModelVariant::Simple);
        let h = build_hamiltonian(&p, &ops, ModelVariant::Simple);
        let n_exc = &ops.a_dag * &ops.a + &ops.sigma_plus_bar * &ops.sigma_minus_bar;
        let comm = &h * &n_exc - &n_exc * &h;
        prop_assert_eq!(max_norm(&(&h - h.adjoint())), 0.0);
        prop_assert!(max_norm(&comm) < 1e-12);
    }

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(
        p in system(),
        v in variant(),
        x in matrix(8),
    ) {
        let l = Liouvillian::build(&p, v).unwrap();
        let scale = l.matrix.max_abs();
        prop_assert!(l.trace_defect() <= 1e-12 * scale);
        let d = l.dim();
        let x = DMatrix::from_fn(d, d, |i, j| x[(i % 8, j % 8)] * C64::new(1.0 + (i / 8) as f64, 0.0));
        let herm = max_norm(&(l.apply(&x.adjoint()) - l.apply(&x).adjoint()));
        prop_assert!(herm <= 1e-12 * scale);
    }

    #[test]
    fn steady_state_is_a_physical_density_matrix(p in system(), v in variant()) {
        let l = Liouvillian::build(&p, v).unwrap();
        let s = solve_steady(&l).unwrap();
        prop_assert!((s.rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(max_norm(&(&s.rho - s.rho.adjoint())) < 1e-10);
        prop_assert!(s.diagnostics.min_eig >= -1e-8);
        prop_assert!(s.diagnostics.residual <= 1e-10);
        prop_assert!(s.n_ss >= 0.0 && s.sigma_z_ss.abs() <= 1.0);
    }

    #[test]
    fn grid_endpoints_are_exact(a in 1e-8..1.0f64, w in 1e-3..10.0f64, n in 2usize..60, log in any::<bool>()) {
        let g = if log { Grid::log(a, a + w, n) } else { Grid::linear(a, a + w, n) };
        let v = g.values();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], a);
        prop_assert_eq!(v[n - 1], a + w);
        prop_assert!(v.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn microscopic_tls_roundtrip(dz in -2.0..2.0f64, dx in 0.1..2.0f64, lambda in 0.0..0.2f64) {
        let raw = RawParams {
            omega_z: None,
            lambda_bar: None,
            delta_z: Some(dz),
            delta_x: Some(dx),
            lambda: Some(lambda),
            ..RawParams::defaults()
        };
        let p = validate_params(&raw).unwrap().params;
        let wz = (dz * dz + dx * dx).sqrt();
        prop_assert!((p.omega_z - wz).abs() <= 4.0 * f64::EPSILON * wz);
        prop_assert!((p.lambda_bar - lambda * dx / wz).abs() <= 4.0 * f64::EPSILON * lambda.max(1e-300));
    }
}
