//! Ground and excited manifold Hamiltonians of the NV⁻ center.
//!
//! Ground basis: {|1,0⟩, |1,1⟩, |1,−1⟩}.
//! Excited configuration basis, in this order:
//! {E,x;0, E,x;+1, E,x;−1, E,y;0, E,y;+1, E,y;−1}.
//! All energies are in Hz.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ZERO};
use crate::params::FieldSplittings;

/// Spin-orbit and spin-spin constants of the excited triplet, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSpinConstants {
    pub d_2a1: f64,
    pub d_2e2: f64,
    pub d_2e1: f64,
    pub lambda_par: f64,
}

impl Default for SpinSpinConstants {
    fn default() -> Self {
        Self {
            d_2a1: 1.42e9 / 3.0,
            d_2e2: 0.2e9 / SQRT_2,
            d_2e1: 1.55e9 / 2.0,
            lambda_par: 5.3e9,
        }
    }
}

impl SpinSpinConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_2a1", self.d_2a1),
            ("d_2e2", self.d_2e2),
            ("d_2e1", self.d_2e1),
            ("lambda_par", self.lambda_par),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Eigenstates of the ground triplet under a transverse electric and an
/// axial magnetic field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundEigenSystem {
    pub theta: f64,
    pub phi_e: f64,
    /// Energies of |0⟩, |+⟩, |−⟩ in Hz. The zero-field offset of |0⟩ is
    /// absorbed into the optical frames, so e₁ = 0.
    pub energies: [f64; 3],
    /// states[j] is the j-th eigenvector in the ground basis.
    pub states: [[Complex64; 3]; 3],
    /// Set when E⊥ = B_z = 0 and θ falls back to 0.
    pub degenerate: bool,
}

impl GroundEigenSystem {
    /// e₂ − e₃ in Hz.
    pub fn splitting(&self) -> f64 {
        self.energies[1] - self.energies[2]
    }
}

pub fn ground_states(ex_gs: f64, ey_gs: f64, bz_gs: f64) -> GroundEigenSystem {
    let e_perp = ex_gs.hypot(ey_gs);
    let degenerate = e_perp == 0.0 && bz_gs == 0.0;
    let theta = if degenerate { 0.0 } else { e_perp.atan2(bz_gs) };
    let phi_e = if e_perp == 0.0 { 0.0 } else { ey_gs.atan2(ex_gs) };
    let r = e_perp.hypot(bz_gs);

    let (s, c) = (0.5 * theta).sin_cos();
    let up = Complex64::from_polar(1.0, 0.5 * phi_e);
    let down = Complex64::from_polar(1.0, -0.5 * phi_e);

    let zero = [Complex64::new(1.0, 0.0), ZERO, ZERO];
    let plus = [ZERO, up * c, -down * s];
    let minus = [ZERO, up * s, down * c];

    GroundEigenSystem {
        theta,
        phi_e,
        energies: [0.0, r, -r],
        states: [zero, plus, minus],
        degenerate,
    }
}

/// Spin-orbit plus spin-spin Hamiltonian in the configuration basis.
pub fn h_so_ss(k: &SpinSpinConstants) -> CMatrix {
    let a = Complex64::new(k.d_2a1, 0.0);
    let e2 = Complex64::new(k.d_2e2 / SQRT_2, 0.0);
    let e1 = Complex64::new(k.d_2e1, 0.0);
    let l = Complex64::new(k.lambda_par, 0.0);
    let ie2 = I * e2;
    let ie1 = I * e1;
    let il = I * l;

    CMatrix::from_rows(&[
        [-2.0 * a, e2, -e2, ZERO, -ie2, -ie2],
        [e2, a, e1, ie2, il, -ie1],
        [-e2, e1, a, ie2, ie1, -il],
        [ZERO, -ie2, -ie2, -2.0 * a, -e2, e2],
        [ie2, -il, -ie1, -e2, a, -e1],
        [ie2, ie1, il, e2, -e1, a],
    ])
}

/// Electric and magnetic field shifts of the excited manifold.
pub fn h_fields(ex_es: f64, ey_es: f64, bz_es: f64) -> CMatrix {
    let mut h = CMatrix::from_real_diagonal(&[
        -ex_es,
        -ex_es + bz_es,
        -ex_es - bz_es,
        ex_es,
        ex_es + bz_es,
        ex_es - bz_es,
    ]);
    let ey = Complex64::new(ey_es, 0.0);
    for i in 0..3 {
        h[(i, i + 3)] = ey;
        h[(i + 3, i)] = ey;
    }
    h
}

pub fn excited_total(k: &SpinSpinConstants, fields: &FieldSplittings) -> CMatrix {
    &h_so_ss(k) + &h_fields(fields.ex_es, fields.ey_es, fields.bz_es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;

    #[test]
    fn ground_states_follow_closed_form_at_reference_fields() {
        let g = ground_states(3.4e6, 0.0, 9.9e3);
        assert!((g.theta - (3.4e6f64 / 9.9e3).atan()).abs() < 1e-15);
        assert!((g.theta - 1.56789).abs() < 1e-5);
        let expect = 2.0 * (3.4e6f64.powi(2) + 9.9e3f64.powi(2)).sqrt();
        assert!((g.splitting() - expect).abs() / expect < 1e-14);
        assert!((g.splitting() - 6.8e6).abs() / 6.8e6 < 1e-3);
        assert!(!g.degenerate);
    }

    #[test]
    fn pure_axial_field_gives_bare_spin_states() {
        let g = ground_states(0.0, 0.0, 1e4);
        assert_eq!(g.theta, 0.0);
        assert_eq!(g.states[1], [ZERO, Complex64::new(1.0, 0.0), ZERO]);
    }

    #[test]
    fn zero_field_is_flagged_degenerate() {
        let g = ground_states(0.0, 0.0, 0.0);
        assert!(g.degenerate);
        assert_eq!(g.theta, 0.0);
        assert_eq!(g.splitting(), 0.0);
    }

    #[test]
    fn plus_state_is_eigenvector_of_field_hamiltonian() {
        let (ex, ey, bz) = (2.0e6, -1.3e6, 4.0e5);
        let g = ground_states(ex, ey, bz);
        let ep = Complex64::new(ex, ey).norm();
        let phi = ey.atan2(ex);
        // Effective |±1⟩ block Hamiltonian whose upper eigenvector is |+⟩.
        let h = CMatrix::from_rows(&[
            [Complex64::new(bz, 0.0), -Complex64::from_polar(ep, phi)],
            [-Complex64::from_polar(ep, -phi), Complex64::new(-bz, 0.0)],
        ]);
        for j in 1..3 {
            let v = [g.states[j][1], g.states[j][2]];
            let hv = h.mul_vec(&v);
            for i in 0..2 {
                assert!((hv[i] - v[i] * g.energies[j]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn so_ss_pins_basis_order() {
        let k = SpinSpinConstants::default();
        let h = h_so_ss(&k);
        assert_eq!(h[(1, 4)], Complex64::new(0.0, k.lambda_par));
        assert_eq!(h[(4, 1)], Complex64::new(0.0, -k.lambda_par));
        assert_eq!(h.hermitian_residual(), 0.0);
        assert!(h.trace().norm() < 1e-6);
    }

    #[test]
    fn field_matrix_entries() {
        let h = h_fields(120e9, 0.0, 10e3);
        assert_eq!(h[(0, 0)].re, -120e9);
        assert_eq!(h[(4, 4)].re, 120e9 + 10e3);
        assert_eq!(h.trace(), ZERO);
        assert_eq!(h_fields(0.0, 0.0, 0.0).max_abs(), 0.0);
        let hy = h_fields(0.0, 3.0, 0.0);
        assert_eq!(hy[(2, 5)].re, 3.0);
        assert_eq!(hy[(5, 2)].re, 3.0);
    }

    #[test]
    fn total_is_linear_in_fields() {
        let k = SpinSpinConstants::default();
        let s = FieldSplittings::paper();
        let diff = &excited_total(&k, &s.scaled(2.0)) - &excited_total(&k, &s);
        let f = h_fields(s.ex_es, s.ey_es, s.bz_es);
        assert!((&diff - &f).max_abs() <= 1e-4);
        assert_eq!(excited_total(&k, &FieldSplittings::default()), h_so_ss(&k));
    }

    #[test]
    fn ground_vectors_orthonormal() {
        let g = ground_states(1.0e6, 2.0e6, -3.0e5);
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((inner(&g.states[a], &g.states[b]) - expect).norm() < 1e-12);
            }
        }
    }
}
