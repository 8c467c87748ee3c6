//! Dipole projections between the three ground eigenstates (rows j = 1..3,
//! i.e. |0⟩, |+⟩, |−⟩) and the six excited eigenstates (columns k = 4..9).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::eigensolver::ExcitedEigenSystem;
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::spin_hamiltonian::GroundEigenSystem;

/// Normalizers below this magnitude make a ratio table undefined.
pub const NORMALIZER_FLOOR: f64 = 1e-12;
/// Ratios below this are reported as "<1e-4".
pub const REPORT_FLOOR: f64 = 1e-4;

pub type Projections = [[Complex64; 6]; 3];
pub type Ratios = [[f64; 6]; 3];

/// Row labels for j = 1, 2, 3.
pub const ROW_LABELS: [&str; 3] = ["0", "+", "-"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTable {
    pub g_x: Projections,
    pub g_y: Projections,
}

/// Ground row j (1-based) and excited label k (4..=9) to array indices.
fn idx(j: usize, k: usize) -> (usize, usize) {
    assert!((1..=3).contains(&j) && (4..=9).contains(&k), "bad label ({j},{k})");
    (j - 1, k - 4)
}

impl CouplingTable {
    pub fn gx(&self, j: usize, k: usize) -> Complex64 {
        let (a, b) = idx(j, k);
        self.g_x[a][b]
    }

    pub fn gy(&self, j: usize, k: usize) -> Complex64 {
        let (a, b) = idx(j, k);
        self.g_y[a][b]
    }

    /// |g_x(j,k)| / |g_x(+,9)|.
    pub fn ratio_x(&self) -> Result<Ratios> {
        ratios(&self.g_x, self.gx(2, 9), "g_x(+,9)")
    }

    /// |g_y(j,k)| / |g_y(-,9)|.
    pub fn ratio_y(&self) -> Result<Ratios> {
        ratios(&self.g_y, self.gy(3, 9), "g_y(-,9)")
    }

    /// (Σ_k |g_x(j,k)|², Σ_k |g_y(j,k)|²) for ground row j (1-based). Each
    /// is 1 for a unit ground vector because the excited states span the
    /// configuration space.
    pub fn row_weight(&self, j: usize) -> (f64, f64) {
        (4..=9).fold((0.0, 0.0), |(x, y), k| {
            (x + self.gx(j, k).norm_sqr(), y + self.gy(j, k).norm_sqr())
        })
    }
}

fn ratios(g: &Projections, normalizer: Complex64, which: &'static str) -> Result<Ratios> {
    let n = normalizer.norm();
    if !(n >= NORMALIZER_FLOOR) {
        return Err(Error::ZeroNormalizer { which, value: n });
    }
    let mut out = [[0.0; 6]; 3];
    for (row, g_row) in out.iter_mut().zip(g) {
        for (r, z) in row.iter_mut().zip(g_row) {
            *r = z.norm() / n;
        }
    }
    Ok(out)
}

/// Projects each ground eigenvector onto the spin components of each excited
/// eigenvector. Dipole transitions conserve m_s, so the overlap is summed
/// over matching spin projections within one orbital block. x-polarized
/// light couples through the E,y block and y-polarized light through the
/// E,x block.
pub fn dipole_projections(
    ground: &GroundEigenSystem,
    excited: &ExcitedEigenSystem,
) -> CouplingTable {
    const E_X_BLOCK: usize = 0;
    const E_Y_BLOCK: usize = 3;
    let project = |block: usize| {
        let mut g = [[ZERO; 6]; 3];
        for (j, gs) in ground.states.iter().enumerate() {
            for (k, es) in excited.states.iter().enumerate() {
                g[j][k] = (0..3).map(|m| gs[m].conj() * es[block + m]).sum();
            }
        }
        g
    };
    CouplingTable {
        g_x: project(E_Y_BLOCK),
        g_y: project(E_X_BLOCK),
    }
}

/// One ratio table as CSV: header `j,k4..k9`, rows `0,+,-`.
pub fn ratio_csv(ratios: &Ratios) -> String {
    let mut out = String::from("j,k4,k5,k6,k7,k8,k9\n");
    for (label, row) in ROW_LABELS.iter().zip(ratios) {
        out.push_str(label);
        for &r in row {
            if r < REPORT_FLOOR {
                out.push_str(",<1e-4");
            } else {
                let _ = write!(out, ",{r:.4}");
            }
        }
        out.push('\n');
    }
    out
}

/// Both ratio tables rendered as CSV, `(ratio_x, ratio_y)`.
pub fn table_report(table: &CouplingTable) -> Result<(String, String)> {
    Ok((ratio_csv(&table.ratio_x()?), ratio_csv(&table.ratio_y()?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::excited_eigensystem;
    use crate::params::FieldSplittings;
    use crate::spin_hamiltonian::{ground_states, SpinSpinConstants};

    fn paper_table() -> CouplingTable {
        let f = FieldSplittings::paper();
        let g = ground_states(f.ex_gs, f.ey_gs, f.bz_gs);
        let e = excited_eigensystem(&SpinSpinConstants::default(), &f).unwrap();
        dipole_projections(&g, &e)
    }

    #[test]
    fn normalizers_are_unity() {
        let t = paper_table();
        assert_eq!(t.ratio_x().unwrap()[1][5], 1.0);
        assert_eq!(t.ratio_y().unwrap()[2][5], 1.0);
    }

    #[test]
    fn zero_normalizer_is_reported() {
        let t = CouplingTable {
            g_x: [[ZERO; 6]; 3],
            g_y: [[Complex64::new(1.0, 0.0); 6]; 3],
        };
        assert!(matches!(t.ratio_x(), Err(Error::ZeroNormalizer { .. })));
        assert!(t.ratio_y().is_ok());
        assert!(table_report(&t).is_err());
    }

    #[test]
    fn orbital_block_selects_polarization() {
        let g = ground_states(3.4e6, 0.0, 9.9e3);
        let mut e = excited_eigensystem(&SpinSpinConstants::default(), &FieldSplittings::paper())
            .unwrap();
        // Replace every excited state by a pure E,x configuration.
        for (k, s) in e.states.iter_mut().enumerate() {
            *s = [ZERO; 6];
            s[k % 3] = Complex64::new(1.0, 0.0);
        }
        let t = dipole_projections(&g, &e);
        assert!(t.g_x.iter().flatten().all(|z| *z == ZERO));
        assert!(t.g_y.iter().flatten().any(|z| z.norm() > 0.5));
    }

    #[test]
    fn identity_table_csv() {
        let mut r = [[0.0; 6]; 3];
        r[0][0] = 1.0;
        r[1][5] = 0.25;
        r[2][3] = 12.34567;
        let csv = ratio_csv(&r);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "j,k4,k5,k6,k7,k8,k9");
        assert_eq!(lines[1], "0,1.0000,<1e-4,<1e-4,<1e-4,<1e-4,<1e-4");
        assert_eq!(lines[2], "+,<1e-4,<1e-4,<1e-4,<1e-4,<1e-4,0.2500");
        assert_eq!(lines[3], "-,<1e-4,<1e-4,<1e-4,12.3457,<1e-4,<1e-4");
    }

    #[test]
    fn magnetic_imbalance_between_top_levels() {
        let r = paper_table().ratio_y().unwrap();
        assert!(r[1][4] > 100.0 * r[1][5]);
    }

    #[test]
    fn each_polarization_row_sums_to_unity() {
        let t = paper_table();
        for j in 1..=3 {
            let (x, y) = t.row_weight(j);
            assert!((x - 1.0).abs() < 1e-10, "row {j}: {x}");
            assert!((y - 1.0).abs() < 1e-10, "row {j}: {y}");
        }
    }
}
