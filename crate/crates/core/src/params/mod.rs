//! Physical constants, run configuration, and the conversions from
//! user-facing quantities (Q, mode volume, control power) into the angular
//! rates the dynamics consume.
//!
//! Unit conventions: frequencies quoted by the user are in Hz, times in s,
//! powers in mW. Every rate handed to the dynamics is angular (rad/s).

mod config;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin_hamiltonian::SpinSpinConstants;

pub use config::{parse_quantity, ConfigKey, Dimension, CONFIG_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// F/m
    pub vacuum_permittivity: f64,
    /// J s
    pub reduced_planck: f64,
    /// m/s
    pub speed_of_light: f64,
    pub diamond_refractive_index: f64,
    /// m
    pub zpl_wavelength: f64,
    /// Total radiative decay rate gamma of the excited state, s^-1
    /// (population). Optical coherences decay at gamma/2.
    pub radiative_decay_gamma: f64,
    /// Fraction of emission into the zero-phonon line.
    pub zpl_branching: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            vacuum_permittivity: 8.854_187_812_8e-12,
            reduced_planck: 1.054_571_817e-34,
            speed_of_light: 299_792_458.0,
            diamond_refractive_index: 2.4,
            zpl_wavelength: 637e-9,
            radiative_decay_gamma: 1.0 / 12e-9,
            zpl_branching: 0.035,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("reduced_planck", self.reduced_planck),
            ("speed_of_light", self.speed_of_light),
            ("refractive_index", self.diamond_refractive_index),
            ("zpl_wavelength", self.zpl_wavelength),
            ("radiative_decay_gamma", self.radiative_decay_gamma),
            ("zpl_branching", self.zpl_branching),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if self.zpl_branching >= 1.0 {
            return Err(Error::invalid("zpl_branching", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Angular frequency of the zero-phonon line, 2 pi c / lambda.
    pub fn zpl_angular_frequency(&self) -> f64 {
        2.0 * PI * self.speed_of_light / self.zpl_wavelength
    }

    /// Permittivity of the cavity medium, eps0 * n^2.
    pub fn medium_permittivity(&self) -> f64 {
        self.vacuum_permittivity * self.diamond_refractive_index.powi(2)
    }
}

/// Transition dipole moment of the zero-phonon line in C m:
/// sqrt(3 pi^2 eps0 hbar c^3 gamma_zpl / (n omega0^3)), gamma_zpl = b * gamma.
pub fn derive_dipole_moment(c: &PhysicalConstants) -> f64 {
    let gamma_zpl = c.zpl_branching * c.radiative_decay_gamma;
    let omega0 = c.zpl_angular_frequency();
    (3.0 * PI * PI * c.vacuum_permittivity * c.reduced_planck * c.speed_of_light.powi(3)
        * gamma_zpl
        / (c.diamond_refractive_index * omega0.powi(3)))
    .sqrt()
}

/// Energy shifts from applied fields, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldSplittings {
    pub ex_es: f64,
    pub ey_es: f64,
    pub bz_es: f64,
    pub ex_gs: f64,
    pub ey_gs: f64,
    pub bz_gs: f64,
}

impl FieldSplittings {
    /// E_x^es = 120 GHz, B_z^es = 10 kHz, E_x^gs = 3.4 MHz, B_z^gs = 9.9 kHz.
    pub fn paper() -> Self {
        Self {
            ex_es: 120e9,
            ey_es: 0.0,
            bz_es: 10e3,
            ex_gs: 3.4e6,
            ey_gs: 0.0,
            bz_gs: 9.9e3,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ex_es: self.ex_es * factor,
            ey_es: self.ey_es * factor,
            bz_es: self.bz_es * factor,
            ex_gs: self.ex_gs * factor,
            ey_gs: self.ey_gs * factor,
            bz_gs: self.bz_gs * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("ex_es", self.ex_es),
            ("ey_es", self.ey_es),
            ("bz_es", self.bz_es),
            ("ex_gs", self.ex_gs),
            ("ey_gs", self.ey_gs),
            ("bz_gs", self.bz_gs),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityParams {
    pub quality_factor: f64,
    /// In units of (lambda / n_d)^3.
    pub mode_volume: f64,
    /// Number of emitters N.
    pub ensemble_size: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            quality_factor: 1100.0,
            mode_volume: 100.0,
            ensemble_size: 100.0,
        }
    }
}

impl CavityParams {
    /// Cavity amplitude decay kappa = omega_c / (2Q), rad/s.
    pub fn kappa(&self, constants: &PhysicalConstants) -> f64 {
        constants.zpl_angular_frequency() / (2.0 * self.quality_factor)
    }

    /// Physical mode volume in m^3.
    pub fn mode_volume_m3(&self, constants: &PhysicalConstants) -> f64 {
        self.mode_volume * (constants.zpl_wavelength / constants.diamond_refractive_index).powi(3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quality_factor.is_finite() && self.quality_factor > 0.0) {
            return Err(Error::invalid("quality_factor", "must be positive"));
        }
        if !(self.mode_volume.is_finite() && self.mode_volume > 0.0) {
            return Err(Error::invalid("mode_volume", "must be positive"));
        }
        // N = 0 is accepted for the empty-cavity check; the dynamics are then
        // a pure pass-through.
        if !(self.ensemble_size.is_finite() && self.ensemble_size >= 0.0) {
            return Err(Error::invalid("ensemble_size", "must be >= 0"));
        }
        Ok(())
    }
}

/// Single-emitter cavity coupling G(j,k) = g_x(j,k) d sqrt(omega_c / (2 hbar eps V)), rad/s.
pub fn derive_cavity_coupling(
    constants: &PhysicalConstants,
    cavity: &CavityParams,
    g_x: Complex64,
) -> Complex64 {
    let d = derive_dipole_moment(constants);
    let omega_c = constants.zpl_angular_frequency();
    let field = (omega_c
        / (2.0 * constants.reduced_planck
            * constants.medium_permittivity()
            * cavity.mode_volume_m3(constants)))
    .sqrt();
    g_x * (d * field)
}

/// Time-dependent phase applied to the control field, phi(t) in rad.
#[derive(Clone)]
pub struct PhaseModulation(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl PhaseModulation {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn factor(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, (self.0)(t))
    }
}

impl fmt::Debug for PhaseModulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PhaseModulation(<fn>)")
    }
}

#[derive(Debug, Clone)]
pub struct ControlParams {
    /// Peak Rabi frequency per sqrt(mW), Hz.
    pub rabi_per_sqrt_mw: f64,
    pub power_storage_mw: f64,
    pub power_retrieval_mw: f64,
    pub phase_modulation: Option<PhaseModulation>,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            rabi_per_sqrt_mw: 1e9,
            power_storage_mw: 0.8,
            power_retrieval_mw: 6.7,
            phase_modulation: None,
        }
    }
}

impl PartialEq for ControlParams {
    fn eq(&self, other: &Self) -> bool {
        self.rabi_per_sqrt_mw == other.rabi_per_sqrt_mw
            && self.power_storage_mw == other.power_storage_mw
            && self.power_retrieval_mw == other.power_retrieval_mw
            && self.phase_modulation.is_none() == other.phase_modulation.is_none()
    }
}

impl ControlParams {
    /// Peak Rabi frequency for unit projection at `power_mw`, in Hz.
    pub fn peak_rabi_hz(&self, power_mw: f64) -> f64 {
        self.rabi_per_sqrt_mw * power_mw.max(0.0).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_per_sqrt_mw.is_finite() && self.rabi_per_sqrt_mw >= 0.0) {
            return Err(Error::invalid("rabi_per_sqrt_mw", "must be >= 0"));
        }
        for (name, p) in [
            ("power_storage", self.power_storage_mw),
            ("power_retrieval", self.power_retrieval_mw),
        ] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid(name, "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Control Rabi frequency Omega(j,k)(t) in rad/s for a transition with
/// projection `g_y`, given the peak angular Rabi frequency and the
/// normalized envelope value at time t.
pub fn derive_control_rabi(peak_angular: f64, g_y: Complex64, envelope: f64) -> Complex64 {
    g_y * (peak_angular * envelope)
}

/// How Hz figures (detuning, gamma_e, gamma_s, Rabi calibration) become rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Multiply by 2 pi.
    #[default]
    TwoPi,
    /// Use the number directly as rad/s.
    Bare,
}

impl RateConvention {
    pub fn factor(self) -> f64 {
        match self {
            RateConvention::TwoPi => 2.0 * PI,
            RateConvention::Bare => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateConvention::TwoPi => "two_pi",
            RateConvention::Bare => "bare",
        }
    }
}

/// Integrator step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Largest step satisfying the stability precondition.
    Auto,
    Fixed(f64),
}

/// Complete, resolved description of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub spin_spin: SpinSpinConstants,
    pub fields: FieldSplittings,
    pub cavity: CavityParams,
    pub control: ControlParams,
    /// Detuning of cavity and control from the addressed excited level, Hz.
    pub detuning: f64,
    /// Optical inhomogeneous broadening, Hz.
    pub gamma_e: f64,
    /// Spin inhomogeneous broadening, Hz.
    pub gamma_s: f64,
    /// Signal pulse width: intensity falls to 1/e at center +- width, s.
    pub pulse_width: f64,
    /// Hold time between the end of the storage window and the start of the
    /// retrieval window, s.
    pub storage_delay: f64,
    /// Artificial offset added to the two-photon frame, Hz.
    pub two_photon_offset: f64,
    pub t_start: f64,
    /// Half-width of each integration window in units of `pulse_width`.
    pub truncation: f64,
    pub dt: StepSize,
    /// Spacing of recorded output samples, s.
    pub sample_interval: f64,
    /// Longest spin storage time used in the time-bandwidth estimate, s.
    pub max_storage_time: f64,
    pub rate_convention: RateConvention,
    pub include_lower_branch: bool,
    pub include_control_noise_drive: bool,
    pub include_spectator_coherences: bool,
    /// Repeat the run at dt/2 and record the metric change.
    pub convergence_check: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            spin_spin: SpinSpinConstants::default(),
            fields: FieldSplittings::paper(),
            cavity: CavityParams::default(),
            control: ControlParams::default(),
            detuning: 0.8e9,
            gamma_e: 1e9,
            gamma_s: 200e3,
            pulse_width: 40e-9,
            storage_delay: 200e-9,
            two_photon_offset: 0.0,
            t_start: 0.0,
            truncation: 6.0,
            dt: StepSize::Auto,
            sample_interval: 0.1e-9,
            max_storage_time: 0.6,
            rate_convention: RateConvention::TwoPi,
            include_lower_branch: true,
            include_control_noise_drive: false,
            include_spectator_coherences: true,
            convergence_check: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.spin_spin.validate()?;
        self.fields.validate()?;
        self.cavity.validate()?;
        self.control.validate()?;
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        for (name, v) in [("gamma_e", self.gamma_e), ("gamma_s", self.gamma_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be >= 0"));
            }
        }
        for (name, v) in [
            ("pulse_width", self.pulse_width),
            ("truncation", self.truncation),
            ("sample_interval", self.sample_interval),
            ("max_storage_time", self.max_storage_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(self.storage_delay.is_finite() && self.storage_delay >= 0.0) {
            return Err(Error::invalid("storage_delay", "must be >= 0"));
        }
        if !self.t_start.is_finite() || !self.two_photon_offset.is_finite() {
            return Err(Error::invalid("t_start", "must be finite"));
        }
        if let StepSize::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid("dt", "must be positive"));
            }
        }
        if self.t_end() <= self.t_start {
            return Err(Error::invalid("t_end", "must exceed t_start"));
        }
        Ok(())
    }

    /// Half-width of an integration window, s.
    pub fn window_half_width(&self) -> f64 {
        self.truncation * self.pulse_width
    }

    /// Center of the input pulse and storage control.
    pub fn storage_center(&self) -> f64 {
        self.t_start + self.window_half_width()
    }

    /// Center of the retrieval control.
    pub fn retrieval_center(&self) -> f64 {
        self.storage_center() + 2.0 * self.window_half_width() + self.storage_delay
    }

    /// Boundary between the storage and retrieval metric windows: the
    /// midpoint between the two control centers.
    pub fn window_boundary(&self) -> f64 {
        0.5 * (self.storage_center() + self.retrieval_center())
    }

    pub fn t_end(&self) -> f64 {
        self.retrieval_center() + self.window_half_width()
    }

    /// Angular rate for a Hz figure under the configured convention.
    pub fn rate(&self, hz: f64) -> f64 {
        hz * self.rate_convention.factor()
    }
}
