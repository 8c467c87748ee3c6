use num_complex::Complex64;
use proptest::prelude::*;

use nvmem_core::eigensolver::eigh;
use nvmem_core::metrics;
use nvmem_core::raman_dynamics::{prepare, resolve_step, run_protocol};
use nvmem_core::{
    dipole_projections, excited_eigensystem, ground_states, CMatrix, FieldSplittings, RunConfig,
    SpinSpinConstants,
};

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let mut h = CMatrix::zeros(n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(v[i * n + i], 0.0);
            for j in i + 1..n {
                let z = Complex64::new(v[i * n + j], v[j * n + i]);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    })
}

/// Eigenvalues of a 3x3 Hermitian matrix from its characteristic
/// polynomial, trigonometric form.
fn cubic_roots(h: &CMatrix) -> [f64; 3] {
    let a = |i, j| h[(i, j)];
    let c2 = -(a(0, 0) + a(1, 1) + a(2, 2)).re;
    let c1 = (a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2)
        - a(0, 1) * a(1, 0)
        - a(0, 2) * a(2, 0)
        - a(1, 2) * a(2, 1))
    .re;
    let det = (a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)))
    .re;
    // x^3 + c2 x^2 + c1 x - det, shifted to a depressed cubic
    let shift = -c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 - det;
    if p.abs() < 1e-300 {
        return [shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, root) in r.iter_mut().enumerate() {
        *root = shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
    }
    r.sort_by(f64::total_cmp);
    r
}

fn random_unitary(seed: &CMatrix) -> CMatrix {
    eigh(seed).unwrap().eigenvectors
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigh_reconstructs_and_is_unitary(h in (2usize..=6).prop_flat_map(hermitian)) {
        let s = eigh(&h).unwrap();
        let n = h.dim();
        let scale = h.frobenius_norm().max(1e-300);
        prop_assert!((&s.reconstruct() - &h).frobenius_norm() <= 1e-11 * scale);
        let v = &s.eigenvectors;
        prop_assert!((&(&v.adjoint() * v) - &CMatrix::identity(n)).max_abs() <= 1e-11);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = s.eigenvalues.iter().sum();
        prop_assert!((trace - h.trace().re).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn eigenvalues_are_unitarily_invariant(h in hermitian(6), u in hermitian(6)) {
        let u = random_unitary(&u);
        let rotated = &(&u * &h) * &u.adjoint();
        let a = eigh(&h).unwrap().eigenvalues;
        let b = eigh(&rotated).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * h.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn three_by_three_matches_characteristic_polynomial(h in hermitian(3)) {
        let ev = eigh(&h).unwrap().eigenvalues;
        let roots = cubic_roots(&h);
        for (x, y) in ev.iter().zip(&roots) {
            prop_assert!((x - y).abs() <= 1e-7 * h.frobenius_norm().max(1e-3), "{ev:?} vs {roots:?}");
        }
    }

    #[test]
    fn ground_states_are_orthonormal_eigenvectors(
        ex in -1e8f64..1e8, ey in -1e8f64..1e8, bz in -1e8f64..1e8,
    ) {
        let g = ground_states(ex, ey, bz);
        for i in 0..3 {
            for j in 0..3 {
                let dot: Complex64 = (0..3).map(|c| g.states[i][c].conj() * g.states[j][c]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        prop_assert!((g.energies.iter().sum::<f64>()).abs() <= 1e-6);
        prop_assert!((g.splitting() - 2.0 * (ex * ex + ey * ey + bz * bz).sqrt()).abs() <= 1e-6);
    }

    #[test]
    fn each_polarization_carries_unit_weight(
        ex_es in 0.0f64..300e9, ey_es in -50e9f64..50e9, bz_es in -1e9f64..1e9,
        ex_gs in 0.0f64..1e7, bz_gs in -1e6f64..1e6,
    ) {
        let f = FieldSplittings { ex_es, ey_es, bz_es, ex_gs, ey_gs: 0.0, bz_gs };
        let g = ground_states(f.ex_gs, f.ey_gs, f.bz_gs);
        let e = excited_eigensystem(&SpinSpinConstants::default(), &f).unwrap();
        let t = dipole_projections(&g, &e);
        for j in 1..=3 {
            let (wx, wy) = t.row_weight(j);
            prop_assert!((wx - 1.0).abs() < 1e-10 && (wy - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn numeric_keys_round_trip_through_text(
        detuning in -5e9f64..5e9, gamma_s in 0.0f64..1e7, width in 1e-9f64..1e-7,
        n in 0.0f64..1e4, q in 10.0f64..1e5,
    ) {
        let mut c = RunConfig::default();
        c.set_numeric("detuning", detuning).unwrap();
        c.set_numeric("gamma_s", gamma_s).unwrap();
        c.set_numeric("pulse_width", width).unwrap();
        c.set_numeric("ensemble_size", n).unwrap();
        c.set_numeric("quality_factor", q).unwrap();
        let back = RunConfig::parse(&c.to_config_text()).unwrap();
        prop_assert_eq!(back.to_config_text(), c.to_config_text());
        prop_assert_eq!(back.get_numeric("detuning").unwrap().to_bits(), detuning.to_bits());
        prop_assert_eq!(back.echo_json(), c.echo_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn passive_runs_never_amplify(
        detuning in 0.3e9f64..3e9, flip in any::<bool>(), gamma_e in 0.0f64..2e9,
        p_store in 0.0f64..8.0, p_read in 0.0f64..8.0, n in 1.0f64..400.0,
    ) {
        let mut c = RunConfig {
            include_lower_branch: false,
            detuning: if flip { -detuning } else { detuning },
            gamma_e,
            pulse_width: 6e-9,
            storage_delay: 10e-9,
            truncation: 5.0,
            ..RunConfig::default()
        };
        c.control.power_storage_mw = p_store;
        c.control.power_retrieval_mw = p_read;
        c.cavity.ensemble_size = n.round();
        let p = prepare(&c).unwrap();
        let r = run_protocol(&c, &p.system, resolve_step(&c, &p.system), true).unwrap();
        let f = r.fields();
        let e_in = metrics::trapezoid(&f.t, &f.input);
        let e_out = metrics::trapezoid(&f.t, &f.output);
        prop_assert!(e_out <= e_in + 1e-4);
        let b = c.window_boundary();
        let eta_s = metrics::storage_efficiency(&f, b).unwrap();
        let eta_t = metrics::total_efficiency(&f, b).unwrap();
        prop_assert!((-1e-6..=1.0 + 1e-6).contains(&eta_s));
        prop_assert!((0.0..=1.0 + 1e-6).contains(&eta_t));
        prop_assert!(eta_t <= eta_s + 1e-6);
    }
}
