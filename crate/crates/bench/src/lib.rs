//! Shared fixtures for the benchmarks.

use nvmem_core::raman_dynamics::{gaussian_pulse, prepare, resolve_step, Drive, Prepared, TimeGrid};
use nvmem_core::{excited_total, CMatrix, FieldSplittings, RunConfig, SpinSpinConstants};

/// Excited-state Hamiltonian at the reference fields, Hz.
pub fn reference_hamiltonian() -> CMatrix {
    excited_total(&SpinSpinConstants::default(), &FieldSplittings::paper())
}

/// A storage window short enough to time in a loop.
pub fn short_config(lower_branch: bool) -> RunConfig {
    RunConfig {
        include_lower_branch: lower_branch,
        pulse_width: 2e-9,
        truncation: 3.0,
        storage_delay: 0.0,
        ..RunConfig::default()
    }
}

/// Everything needed to integrate the storage window of `config`.
pub fn storage_window(config: &RunConfig) -> (Prepared, Drive, TimeGrid) {
    let prepared = prepare(config).expect("fixture config is valid");
    let t_s = config.storage_center();
    let w = config.window_half_width();
    let drive = Drive {
        input: Some(gaussian_pulse(config.pulse_width, t_s)),
        control: gaussian_pulse(config.pulse_width, t_s),
        peak_rabi: prepared.system.peak_rabi_storage,
    };
    let grid = TimeGrid {
        t0: t_s - w,
        t1: t_s + w,
        dt: resolve_step(config, &prepared.system),
        sample_interval: config.sample_interval,
    };
    (prepared, drive, grid)
}
