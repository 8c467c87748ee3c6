//! Rotating-frame parameters of the linearized equations of motion.
//!
//! Frames: σ_1k and σ_2k rotate with the cavity frequency ω_c, σ_3k with
//! the control frequency ω_2 = ω_c + δ_g. Detunings are
//! Δ_jk = ω_frame(j) − 2π(e_k − e_j), and ω_c is placed so that
//! Δ_29 = −Δ, i.e. a positive configured Δ puts the cavity below the
//! |+⟩ → 9 transition.
//!
//! Collective scaling: σ_jk are collective (summed) coherences. The cavity
//! field couples to them through the single-emitter G, and the polarization
//! source carries G·N. The conserved norm of a passive run is therefore
//! ∫|E_in|² = ∫|E_out|² + Σ|σ|²/N + losses.

use num_complex::Complex64;

use crate::eigensolver::ExcitedEigenSystem;
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::params::{derive_cavity_coupling, PhaseModulation, RunConfig};
use crate::selection_rules::CouplingTable;
use crate::spin_hamiltonian::GroundEigenSystem;

use std::f64::consts::PI;

/// Stability limit on dt times the fastest rate in the system.
pub const STEP_LIMIT: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    /// Δ_jk in rad/s, rows j = 1..3, columns k = 4..9.
    pub delta: [[f64; 6]; 3],
    /// Single-emitter cavity couplings G(j,k), rad/s.
    pub g: [[Complex64; 6]; 3],
    /// Control projections g_y(j,k); Ω(j,k)(t) = g_y(j,k)·Ω(t).
    pub g_y: [[Complex64; 6]; 3],
    /// Excited columns taking part in the dynamics.
    pub active: [bool; 6],
    pub ensemble_size: f64,
    pub kappa: f64,
    /// Optical coherence decay γ/2 + γ_e, rad/s.
    pub optical_decay: f64,
    /// Spin coherence decay γ_s, rad/s.
    pub spin_decay: f64,
    /// ω_2 − ω_c, rad/s.
    pub delta_g: f64,
    /// Two-photon mismatch δ_g − 2π(e₂ − e₃), rad/s.
    pub two_photon_detuning: f64,
    /// Peak control Rabi frequency for unit projection, rad/s.
    pub peak_rabi_storage: f64,
    pub peak_rabi_retrieval: f64,
    pub include_control_noise_drive: bool,
    pub include_spectator_coherences: bool,
    pub phase_modulation: Option<PhaseModulation>,
    /// Conjugate the phase modulation (set by [`DynamicalSystem::mirror`]).
    pub conjugate_modulation: bool,
}

pub fn build_system(
    config: &RunConfig,
    couplings: &CouplingTable,
    ground: &GroundEigenSystem,
    excited: &ExcitedEigenSystem,
) -> Result<DynamicalSystem> {
    let two_pi = 2.0 * PI;
    let active: [bool; 6] = std::array::from_fn(|k| config.include_lower_branch || k >= 3);

    let two_photon_detuning = config.rate(config.two_photon_offset);
    let delta_g = two_pi * ground.splitting() + two_photon_detuning;
    let omega_c = two_pi * (excited.energy(9) - ground.energies[1]) - config.rate(config.detuning);
    let omega_frame = [omega_c, omega_c, omega_c + delta_g];

    let mut delta = [[0.0; 6]; 3];
    let mut g = [[ZERO; 6]; 3];
    let mut g_y = [[ZERO; 6]; 3];
    for j in 0..3 {
        for k in 0..6 {
            delta[j][k] = omega_frame[j] - two_pi * (excited.energies[k] - ground.energies[j]);
            if active[k] {
                g[j][k] = derive_cavity_coupling(&config.constants, &config.cavity, couplings.g_x[j][k]);
                g_y[j][k] = couplings.g_y[j][k];
            }
        }
    }

    let kappa = config.cavity.kappa(&config.constants);
    if delta_g.abs() > kappa {
        return Err(Error::InvalidFrame { delta_g, kappa });
    }

    let rabi = |p: f64| two_pi * config.control.peak_rabi_hz(p);
    Ok(DynamicalSystem {
        delta,
        g,
        g_y,
        active,
        ensemble_size: config.cavity.ensemble_size,
        kappa,
        optical_decay: 0.5 * config.constants.radiative_decay_gamma + config.rate(config.gamma_e),
        spin_decay: config.rate(config.gamma_s),
        delta_g,
        two_photon_detuning,
        peak_rabi_storage: rabi(config.control.power_storage_mw),
        peak_rabi_retrieval: rabi(config.control.power_retrieval_mw),
        include_control_noise_drive: config.include_control_noise_drive,
        include_spectator_coherences: config.include_spectator_coherences,
        phase_modulation: config.control.phase_modulation.clone(),
        conjugate_modulation: false,
    })
}

impl DynamicalSystem {
    /// Same physics with every detuning negated and every coupling
    /// conjugated. Efficiencies are invariant under this map.
    pub fn mirror(&self) -> Self {
        let mut m = self.clone();
        for j in 0..3 {
            for k in 0..6 {
                m.delta[j][k] = -self.delta[j][k];
                m.g[j][k] = self.g[j][k].conj();
                m.g_y[j][k] = self.g_y[j][k].conj();
            }
        }
        m.delta_g = -self.delta_g;
        m.two_photon_detuning = -self.two_photon_detuning;
        m.conjugate_modulation = !self.conjugate_modulation;
        m
    }

    /// Δ_jk for ground row j in 1..=3 and excited label k in 4..=9.
    pub fn detuning(&self, j: usize, k: usize) -> f64 {
        self.delta[j - 1][k - 4]
    }

    pub fn coupling(&self, j: usize, k: usize) -> Complex64 {
        self.g[j - 1][k - 4]
    }

    /// Control phase factor at time t.
    pub fn modulation(&self, t: f64) -> Complex64 {
        match &self.phase_modulation {
            None => Complex64::new(1.0, 0.0),
            Some(m) if self.conjugate_modulation => m.factor(t).conj(),
            Some(m) => m.factor(t),
        }
    }

    fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&j| j == 1 || self.include_spectator_coherences)
    }

    /// Fastest rate entering the equations, rad/s: detunings of active
    /// coherences, decay rates, peak control couplings and the
    /// cavity-mediated coupling |G|²N/κ.
    pub fn max_rate(&self) -> f64 {
        let peak_rabi = self.peak_rabi_storage.max(self.peak_rabi_retrieval);
        let mut rate = self
            .optical_decay
            .max(self.spin_decay)
            .max(self.two_photon_detuning.abs());
        let mut g_sq = 0.0;
        for j in self.rows() {
            for k in (0..6).filter(|&k| self.active[k]) {
                rate = rate.max(self.delta[j][k].abs());
                rate = rate.max(self.g_y[j][k].norm() * peak_rabi);
                g_sq += self.g[j][k].norm_sqr();
            }
        }
        if self.kappa > 0.0 {
            rate = rate.max(g_sq * self.ensemble_size / self.kappa);
        }
        rate
    }

    /// Largest step allowed by [`STEP_LIMIT`].
    pub fn max_step(&self) -> f64 {
        STEP_LIMIT / self.max_rate()
    }

    pub fn check_step(&self, dt: f64) -> Result<()> {
        let product = dt * self.max_rate();
        if !(dt > 0.0) || product > STEP_LIMIT {
            return Err(Error::StepTooLarge {
                dt,
                product,
                limit: STEP_LIMIT,
            });
        }
        Ok(())
    }
}
