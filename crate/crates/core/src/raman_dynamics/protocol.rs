//! Storage, hold and retrieval as one protocol, plus the noise run.
//!
//! Timeline with W = truncation·τ:
//! storage    [t_start, t_start + 2W], input and control centered at t_start + W
//! hold       delay, applied analytically to σ₂₃
//! retrieval  [t_start + 2W + delay, t_start + 4W + delay], control centered
//!            at the middle of that interval

use num_complex::Complex64;

use super::integrate::{integrate, Drive, SimulationResult, StateVector, TimeGrid};
use super::pulse::gaussian_pulse;
use super::system::{build_system, DynamicalSystem};
use crate::eigensolver::{excited_eigensystem, ExcitedEigenSystem};
use crate::error::Result;
use crate::metrics::{self, MetricsBlock};
use crate::params::{RunConfig, StepSize};
use crate::selection_rules::{dipole_projections, CouplingTable};
use crate::spin_hamiltonian::{ground_states, GroundEigenSystem};

/// Everything derived from a config before any time integration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub ground: GroundEigenSystem,
    pub excited: ExcitedEigenSystem,
    pub couplings: CouplingTable,
    pub system: DynamicalSystem,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let f = &config.fields;
    let ground = ground_states(f.ex_gs, f.ey_gs, f.bz_gs);
    let excited = excited_eigensystem(&config.spin_spin, f)?;
    let couplings = dipole_projections(&ground, &excited);
    let system = build_system(config, &couplings, &ground, &excited)?;
    Ok(Prepared {
        ground,
        excited,
        couplings,
        system,
    })
}

/// Step bound for a config: the configured value or the stability limit.
pub fn resolve_step(config: &RunConfig, system: &DynamicalSystem) -> f64 {
    match config.dt {
        StepSize::Auto => system.max_step(),
        StepSize::Fixed(dt) => dt,
    }
}

/// Runs storage, hold and retrieval. With `signal` false the input is
/// dark and only the control-driven emission remains.
pub fn run_protocol(
    config: &RunConfig,
    system: &DynamicalSystem,
    dt: f64,
    signal: bool,
) -> Result<SimulationResult> {
    let w = config.window_half_width();
    let t_s = config.storage_center();
    let t_r = config.retrieval_center();
    let storage = Drive {
        input: signal.then(|| gaussian_pulse(config.pulse_width, t_s)),
        control: gaussian_pulse(config.pulse_width, t_s),
        peak_rabi: system.peak_rabi_storage,
    };
    let grid = TimeGrid {
        t0: t_s - w,
        t1: t_s + w,
        dt,
        sample_interval: config.sample_interval,
    };
    let mut result = integrate(system, &storage, StateVector::ZERO, &grid)?;

    let held = hold(&result.final_state, system, config.storage_delay);
    let retrieval = Drive {
        input: None,
        control: gaussian_pulse(config.pulse_width, t_r),
        peak_rabi: system.peak_rabi_retrieval,
    };
    let grid = TimeGrid {
        t0: t_r - w,
        t1: t_r + w,
        dt,
        sample_interval: config.sample_interval,
    };
    result.extend(integrate(system, &retrieval, held, &grid)?);
    Ok(result)
}

/// Free evolution between the windows: the spin coherence decays and
/// dephases, optical coherences (decayed at γ/2 + γ_e for the whole hold)
/// are dropped.
pub fn hold(state: &StateVector, system: &DynamicalSystem, duration: f64) -> StateVector {
    let mut out = StateVector::ZERO;
    out.sigma23 = state.sigma23
        * Complex64::new(-system.spin_decay * duration, -system.two_photon_detuning * duration).exp();
    out
}

/// Signal and noise trajectories with their figures of merit.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub signal: SimulationResult,
    pub noise: SimulationResult,
    pub metrics: MetricsBlock,
    pub prepared: Prepared,
}

pub fn simulate_protocol(config: &RunConfig) -> Result<ProtocolOutcome> {
    let prepared = prepare(config)?;
    let mut system = prepared.system.clone();
    let dt = resolve_step(config, &system);
    system.include_control_noise_drive = false;
    let signal = run_protocol(config, &system, dt, true)?;

    let mut noisy = prepared.system.clone();
    noisy.include_control_noise_drive = true;
    let noise = run_protocol(config, &noisy, dt, false)?;

    let mut metrics = metrics::evaluate(config, &signal, &noise)?;
    if config.convergence_check {
        let fine = run_protocol(config, &system, 0.5 * dt, true)?;
        let boundary = config.window_boundary();
        let eta_s = metrics::storage_efficiency(&fine.fields(), boundary)?;
        let eta_tot = metrics::total_efficiency(&fine.fields(), boundary)?;
        metrics.dt_convergence_delta =
            Some((eta_s - metrics.eta_storage).abs().max((eta_tot - metrics.eta_total).abs()));
    }
    Ok(ProtocolOutcome {
        signal,
        noise,
        metrics,
        prepared,
    })
}

/// Noise run only, with the control-driven source forced on.
pub fn simulate_noise(config: &RunConfig) -> Result<SimulationResult> {
    let prepared = prepare(config)?;
    let mut system = prepared.system;
    system.include_control_noise_drive = true;
    let dt = resolve_step(config, &system);
    run_protocol(config, &system, dt, false)
}
