//! Precomputed right-hand side used inside the RK4 loop. Only active
//! excited columns are stored, packed at the front of each array. It
//! evaluates the same expressions as [`super::integrate::derivative_with`].

use num_complex::Complex64;

use super::integrate::StateVector;
use super::system::DynamicalSystem;
use crate::linalg::{I, ZERO};

type Row = [Complex64; 6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Packed {
    pub s1: Row,
    pub s2: Row,
    pub s3: Row,
    pub s23: Complex64,
}

#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    m: usize,
    cols: [usize; 6],
    /// −Γ + iΔ_jk
    a1: Row,
    a2: Row,
    a3: Row,
    /// i·G(2,k)·N
    source: Row,
    /// G*(j,k)
    g1c: Row,
    g2c: Row,
    g3c: Row,
    /// g_y(3,k)
    y3: Row,
    /// i·g_y(2,k)·N
    noise: Row,
    in_coupling: f64,
    inv_kappa: f64,
    spin: Complex64,
    noise_on: bool,
    spectators: bool,
}

/// Drive values at one instant; `phase` is e^{−iδ_g t}.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stage {
    pub e_in: f64,
    pub control: Complex64,
    pub phase: Complex64,
}

impl Kernel {
    pub fn new(system: &DynamicalSystem) -> Self {
        let mut k = Kernel {
            m: 0,
            cols: [0; 6],
            a1: [ZERO; 6],
            a2: [ZERO; 6],
            a3: [ZERO; 6],
            source: [ZERO; 6],
            g1c: [ZERO; 6],
            g2c: [ZERO; 6],
            g3c: [ZERO; 6],
            y3: [ZERO; 6],
            noise: [ZERO; 6],
            in_coupling: (2.0 * system.kappa).sqrt(),
            inv_kappa: 1.0 / system.kappa,
            spin: Complex64::new(-system.spin_decay, -system.two_photon_detuning),
            noise_on: system.include_control_noise_drive,
            spectators: system.include_spectator_coherences,
        };
        let decay = -system.optical_decay;
        for c in (0..6).filter(|&c| system.active[c]) {
            let i = k.m;
            k.cols[i] = c;
            k.a1[i] = Complex64::new(decay, system.delta[0][c]);
            k.a2[i] = Complex64::new(decay, system.delta[1][c]);
            k.a3[i] = Complex64::new(decay, system.delta[2][c]);
            k.source[i] = I * system.g[1][c] * system.ensemble_size;
            k.g1c[i] = system.g[0][c].conj();
            k.g2c[i] = system.g[1][c].conj();
            k.g3c[i] = system.g[2][c].conj();
            k.y3[i] = system.g_y[2][c];
            k.noise[i] = I * system.g_y[1][c] * system.ensemble_size;
            k.m += 1;
        }
        k
    }

    /// Whether e^{−iδ_g t} is needed for this state.
    pub fn needs_phase(&self, spectators_live: bool) -> bool {
        self.noise_on || spectators_live
    }

    pub fn pack(&self, y: &StateVector) -> Packed {
        let mut p = Packed { s1: [ZERO; 6], s2: [ZERO; 6], s3: [ZERO; 6], s23: y.sigma23 };
        for i in 0..self.m {
            let c = self.cols[i];
            p.s1[i] = y.sigma[0][c];
            p.s2[i] = y.sigma[1][c];
            p.s3[i] = y.sigma[2][c];
        }
        p
    }

    /// Writes packed values back; inactive columns keep their values.
    pub fn unpack(&self, p: &Packed, y: &mut StateVector) {
        for i in 0..self.m {
            let c = self.cols[i];
            y.sigma[0][c] = p.s1[i];
            y.sigma[1][c] = p.s2[i];
            y.sigma[2][c] = p.s3[i];
        }
        y.sigma23 = p.s23;
    }

    /// True when any spectator amplitude is nonzero. While they are all
    /// exactly zero their rates are exactly zero and they can be skipped.
    pub fn spectators_live(&self, p: &Packed) -> bool {
        self.spectators
            && (0..self.m).any(|i| p.s1[i] != ZERO || p.s3[i] != ZERO)
    }

    #[inline(always)]
    pub fn cavity(&self, p: &Packed, st: &Stage, live: bool) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..self.m {
            acc += self.g2c[i] * p.s2[i];
        }
        if live {
            let mut shifted = ZERO;
            for i in 0..self.m {
                acc += self.g1c[i] * p.s1[i];
                shifted += self.g3c[i] * p.s3[i];
            }
            acc += shifted * st.phase;
        }
        (Complex64::new(self.in_coupling * st.e_in, 0.0) + I * acc) * self.inv_kappa
    }

    #[inline(always)]
    pub fn rate(&self, p: &Packed, st: &Stage, live: bool) -> Packed {
        let e = self.cavity(p, st, live);
        let mut r = Packed { s1: [ZERO; 6], s2: [ZERO; 6], s3: [ZERO; 6], s23: ZERO };
        let ctrl_spin = I * st.control * p.s23;
        let mut spin_source = ZERO;
        for i in 0..self.m {
            let s2 = p.s2[i];
            let mut v = self.a2[i] * s2 + self.source[i] * e + self.y3[i] * ctrl_spin;
            if self.noise_on {
                v += self.noise[i] * st.control * st.phase;
            }
            r.s2[i] = v;
            spin_source += self.y3[i].conj() * s2;
        }
        if live {
            for i in 0..self.m {
                r.s1[i] = self.a1[i] * p.s1[i];
                r.s3[i] = self.a3[i] * p.s3[i];
            }
        }
        r.s23 = self.spin * p.s23 + I * st.control.conj() * spin_source;
        r
    }

    /// One classical RK4 step.
    #[inline(always)]
    pub fn step(&self, y: &Packed, h: f64, s0: &Stage, s_mid: &Stage, s1: &Stage, live: bool) -> Packed {
        if !live {
            let mut out = *y;
            let (s2, s23) = self.step_core(&y.s2, y.s23, h, s0, s_mid, s1);
            out.s2 = s2;
            out.s23 = s23;
            return out;
        }
        let k1 = self.rate(y, s0, live);
        let k2 = self.rate(&self.axpy(y, 0.5 * h, &k1, live), s_mid, live);
        let k3 = self.rate(&self.axpy(y, 0.5 * h, &k2, live), s_mid, live);
        let k4 = self.rate(&self.axpy(y, h, &k3, live), s1, live);
        let w = h / 6.0;
        let mut out = *y;
        for i in 0..self.m {
            out.s2[i] += (k1.s2[i] + 2.0 * (k2.s2[i] + k3.s2[i]) + k4.s2[i]) * w;
        }
        if live {
            for i in 0..self.m {
                out.s1[i] += (k1.s1[i] + 2.0 * (k2.s1[i] + k3.s1[i]) + k4.s1[i]) * w;
                out.s3[i] += (k1.s3[i] + 2.0 * (k2.s3[i] + k3.s3[i]) + k4.s3[i]) * w;
            }
        }
        out.s23 += (k1.s23 + 2.0 * (k2.s23 + k3.s23) + k4.s23) * w;
        out
    }

    /// Rate of (σ_2k, σ₂₃) with the spectators at zero.
    #[inline(always)]
    fn rate_core(&self, s2: &Row, s23: Complex64, st: &Stage) -> (Row, Complex64) {
        let mut acc = ZERO;
        for i in 0..self.m {
            acc += self.g2c[i] * s2[i];
        }
        let e = (Complex64::new(self.in_coupling * st.e_in, 0.0) + I * acc) * self.inv_kappa;
        let ctrl_spin = I * st.control * s23;
        let noise = st.control * st.phase;
        let mut r = [ZERO; 6];
        let mut spin_source = ZERO;
        for i in 0..self.m {
            let mut v = self.a2[i] * s2[i] + self.source[i] * e + self.y3[i] * ctrl_spin;
            if self.noise_on {
                v += self.noise[i] * noise;
            }
            r[i] = v;
            spin_source += self.y3[i].conj() * s2[i];
        }
        (r, self.spin * s23 + I * st.control.conj() * spin_source)
    }

    #[inline(always)]
    fn step_core(&self, s2: &Row, s23: Complex64, h: f64, s0: &Stage, s_mid: &Stage, s1: &Stage) -> (Row, Complex64) {
        let m = self.m;
        let shift = |c: f64, k: &(Row, Complex64)| {
            let mut y = *s2;
            for i in 0..m {
                y[i] += k.0[i] * c;
            }
            (y, s23 + k.1 * c)
        };
        let k1 = self.rate_core(s2, s23, s0);
        let y2 = shift(0.5 * h, &k1);
        let k2 = self.rate_core(&y2.0, y2.1, s_mid);
        let y3 = shift(0.5 * h, &k2);
        let k3 = self.rate_core(&y3.0, y3.1, s_mid);
        let y4 = shift(h, &k3);
        let k4 = self.rate_core(&y4.0, y4.1, s1);
        let w = h / 6.0;
        let mut out = *s2;
        for i in 0..m {
            out[i] += (k1.0[i] + 2.0 * (k2.0[i] + k3.0[i]) + k4.0[i]) * w;
        }
        (out, s23 + (k1.1 + 2.0 * (k2.1 + k3.1) + k4.1) * w)
    }

    #[inline(always)]
    fn axpy(&self, y: &Packed, h: f64, k: &Packed, live: bool) -> Packed {
        let mut out = *y;
        for i in 0..self.m {
            out.s2[i] += k.s2[i] * h;
        }
        if live {
            for i in 0..self.m {
                out.s1[i] += k.s1[i] * h;
                out.s3[i] += k.s3[i] * h;
            }
        }
        out.s23 += k.s23 * h;
        out
    }

    pub fn is_bounded(&self, p: &Packed) -> bool {
        let ok = |z: &Complex64| z.re.abs() < super::integrate::BLOWUP_LIMIT && z.im.abs() < super::integrate::BLOWUP_LIMIT;
        ok(&p.s23) && (0..self.m).all(|i| ok(&p.s1[i]) && ok(&p.s2[i]) && ok(&p.s3[i]))
    }

    /// Largest |σ_1k|², |σ_3k|².
    pub fn spectator_norm_sqr(&self, p: &Packed) -> f64 {
        (0..self.m)
            .map(|i| p.s1[i].norm_sqr().max(p.s3[i].norm_sqr()))
            .fold(0.0, f64::max)
    }
}
