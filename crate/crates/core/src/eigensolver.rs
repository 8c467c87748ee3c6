//! Eigendecomposition of small complex Hermitian matrices.
//!
//! Cyclic Jacobi: every off-diagonal pair (p, q) is annihilated in turn by a
//! two-sided unitary rotation `U = D Q`, where `D` removes the phase of
//! `a_pq` and `Q` is the real symmetric Jacobi rotation. Sweeps repeat until
//! the off-diagonal Frobenius norm drops below `1e-13 * ||H||_F`.
//!
//! Output is deterministic for identical input bits: eigenvalues ascend
//! (exact ties keep their original column order) and every eigenvector is
//! rephased so its largest-magnitude entry is real and nonnegative.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::params::FieldSplittings;
use crate::spin_hamiltonian::{excited_total, SpinSpinConstants};

/// Relative Hermiticity tolerance on input matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to ||H||_F.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

/// Entries within this relative distance of the column maximum count as tied
/// for the phase convention, so the lowest index wins.
const PHASE_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending eigenvalues, in the units of the input matrix.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
    /// max_i ||H v_i - lambda_i v_i|| / ||H||_F.
    pub residual_norm: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    /// V diag(lambda) V^dagger.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                let vik = self.eigenvectors[(i, k)] * lambda;
                for j in 0..n {
                    out[(i, j)] += vik * self.eigenvectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// The input is validated against [`HERMITIAN_TOLERANCE`] (relative to its
/// largest entry) and symmetrized as (H + H^dagger)/2 before rotating.
pub fn eigh(h: &CMatrix) -> Result<EigenSystem> {
    let n = h.dim();
    let scale = h.max_abs();
    let asymmetry = h.hermitian_residual();
    let tolerance = HERMITIAN_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    if asymmetry > tolerance {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance,
        });
    }

    let mut a = (h + &h.adjoint()).scale(0.5);
    let mut v = CMatrix::identity(n);
    let h_norm = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOLERANCE * h_norm;

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_diagonal_norm(&a),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let diagonal: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: exact ties keep first-encounter order.
    order.sort_by(|&i, &j| diagonal[i].total_cmp(&diagonal[j]));

    let mut eigenvectors = CMatrix::zeros(n);
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diagonal[i]).collect();
    for (dst, &src) in order.iter().enumerate() {
        let mut column = v.column(src);
        fix_phase(&mut column);
        for (i, z) in column.into_iter().enumerate() {
            eigenvectors[(i, dst)] = z;
        }
    }

    let mut system = EigenSystem {
        eigenvalues,
        eigenvectors,
        residual_norm: 0.0,
    };
    system.residual_norm = residual(h, &system) / h_norm.max(f64::MIN_POSITIVE);
    Ok(system)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation zeroing a[p][q] (and a[q][p]).
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // e^{-i phi} with a_pq = b e^{i phi}
    let phase_conj = apq.conj() / b;

    let zeta = (aqq - app) / (2.0 * b);
    let t = if zeta.is_infinite() {
        0.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase_conj * s;
    let u_qq = phase_conj * c;

    let n = a.dim();
    // A <- A U (columns p, q); V <- V U.
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * u_pp + aiq * u_qp;
        a[(i, q)] = aip * u_pq + aiq * u_qq;

        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * u_pp + viq * u_qp;
        v[(i, q)] = vip * u_pq + viq * u_qq;
    }
    // A <- U^dagger A (rows p, q).
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = u_pp.conj() * apj + u_qp.conj() * aqj;
        a[(q, j)] = u_pq.conj() * apj + u_qq.conj() * aqj;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Rotates `v` so its largest-magnitude entry is real and nonnegative.
pub(crate) fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - PHASE_TIE_TOLERANCE))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);
}

fn residual(h: &CMatrix, system: &EigenSystem) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &lambda) in system.eigenvalues.iter().enumerate() {
        let vec = system.vector(i);
        let hv = h.mul_vec(&vec);
        let r: f64 = hv
            .iter()
            .zip(&vec)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst
}

/// Excited-state manifold diagonalized in the configuration basis.
///
/// Index 0 corresponds to level label k = 4 (lowest energy) and index 5 to
/// k = 9 (highest).
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitedEigenSystem {
    /// Energies in Hz, ascending.
    pub energies: [f64; 6],
    /// `states[i][c]`: component of excited eigenstate `i` on configuration
    /// basis state `c` (order E,x;0 E,x;+1 E,x;-1 E,y;0 E,y;+1 E,y;-1).
    pub states: [[Complex64; 6]; 6],
    pub residual_norm: f64,
}

impl ExcitedEigenSystem {
    /// Energy of the excited level with paper label `k` in 4..=9.
    pub fn energy(&self, k: usize) -> f64 {
        assert!((4..=9).contains(&k), "excited label {k} out of range 4..=9");
        self.energies[k - 4]
    }

    /// Mean energy of the upper branch minus mean of the lower branch.
    pub fn branch_separation(&self) -> f64 {
        let lower: f64 = self.energies[..3].iter().sum::<f64>() / 3.0;
        let upper: f64 = self.energies[3..].iter().sum::<f64>() / 3.0;
        upper - lower
    }
}

pub fn excited_eigensystem(
    constants: &SpinSpinConstants,
    splittings: &FieldSplittings,
) -> Result<ExcitedEigenSystem> {
    let h = excited_total(constants, splittings);
    let system = eigh(&h)?;
    let mut energies = [0.0; 6];
    let mut states = [[Complex64::new(0.0, 0.0); 6]; 6];
    for k in 0..6 {
        energies[k] = system.eigenvalues[k];
        for c in 0..6 {
            states[k][c] = system.eigenvectors[(c, k)];
        }
    }
    Ok(ExcitedEigenSystem {
        energies,
        states,
        residual_norm: system.residual_norm,
    })
}
