//! Figures of merit computed from recorded time series.
//!
//! The storage window holds every sample before the midpoint between the
//! two control centers, the retrieval window every sample after it. Each
//! window is integrated separately with the trapezoid rule.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::params::RunConfig;
use crate::raman_dynamics::{gaussian_pulse, SimulationResult};

/// Input energies below this make efficiencies undefined.
pub const MIN_INPUT_ENERGY: f64 = 1e-12;

/// Intensities |E_in|², |E_out|² on a common time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSeries {
    pub t: Vec<f64>,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

impl SimulationResult {
    pub fn fields(&self) -> FieldSeries {
        FieldSeries {
            t: self.t.clone(),
            input: self.e_in.iter().map(|z| z.norm_sqr()).collect(),
            output: self.e_out.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsBlock {
    pub eta_storage: f64,
    pub eta_total: f64,
    pub p_signal: f64,
    pub p_noise: f64,
    /// `None` when nothing was retrieved.
    pub fidelity_conditional: Option<f64>,
    pub spin_decay_factor: f64,
    pub dt_convergence_delta: Option<f64>,
    pub time_bandwidth_estimate: f64,
    pub pulse_bandwidth_hz: f64,
    /// Noise emitted during the retrieval window only.
    pub p_noise_retrieval: f64,
    pub max_spectator: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Trapezoid integrals of `values` over samples before and after `boundary`.
pub fn window_energy(t: &[f64], values: &[f64], boundary: f64) -> (f64, f64) {
    let split = t.partition_point(|&x| x < boundary);
    (trapezoid(&t[..split], &values[..split]), trapezoid(&t[split..], &values[split..]))
}

pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

fn input_energy(series: &FieldSeries) -> Result<f64> {
    let energy = trapezoid(&series.t, &series.input);
    if !(energy >= MIN_INPUT_ENERGY) {
        return Err(Error::ZeroInput { energy });
    }
    Ok(energy)
}

/// 1 − (output during storage)/(input).
pub fn storage_efficiency(series: &FieldSeries, boundary: f64) -> Result<f64> {
    let e_in = input_energy(series)?;
    let (leaked, _) = window_energy(&series.t, &series.output, boundary);
    Ok(1.0 - leaked / e_in)
}

/// (output during retrieval)/(input).
pub fn total_efficiency(series: &FieldSeries, boundary: f64) -> Result<f64> {
    let e_in = input_energy(series)?;
    let (_, retrieved) = window_energy(&series.t, &series.output, boundary);
    Ok(retrieved / e_in)
}

/// 1 − P_noise/P_sig clamped to [0, 1].
pub fn conditional_fidelity(p_signal: f64, p_noise: f64) -> Result<f64> {
    if !(p_signal > 0.0) {
        return Err(Error::ZeroSignal);
    }
    Ok((1.0 - p_noise / p_signal).clamp(0.0, 1.0))
}

pub fn time_bandwidth(storage_time_limit: f64, pulse_bandwidth: f64) -> f64 {
    storage_time_limit * pulse_bandwidth
}

/// Intensity factor e^{−2γ_s t} applied to the stored excitation by a hold
/// of length t.
pub fn spin_decay_factor(config: &RunConfig) -> f64 {
    (-2.0 * config.rate(config.gamma_s) * config.storage_delay).exp()
}

pub fn evaluate(
    config: &RunConfig,
    signal: &SimulationResult,
    noise: &SimulationResult,
) -> Result<MetricsBlock> {
    let boundary = config.window_boundary();
    let fields = signal.fields();
    let eta_storage = storage_efficiency(&fields, boundary)?;
    let eta_total = total_efficiency(&fields, boundary)?;
    let (_, p_signal) = window_energy(&fields.t, &fields.output, boundary);

    let noise_fields = noise.fields();
    let (noise_storage, p_noise_retrieval) = window_energy(&noise_fields.t, &noise_fields.output, boundary);
    let p_noise = noise_storage + p_noise_retrieval;

    let pulse_bandwidth_hz =
        gaussian_pulse(config.pulse_width, 0.0).numerical_bandwidth(config.truncation, 4001);
    Ok(MetricsBlock {
        eta_storage,
        eta_total,
        p_signal,
        p_noise,
        fidelity_conditional: conditional_fidelity(p_signal, p_noise).ok(),
        spin_decay_factor: spin_decay_factor(config),
        dt_convergence_delta: None,
        time_bandwidth_estimate: time_bandwidth(config.max_storage_time, pulse_bandwidth_hz),
        pulse_bandwidth_hz,
        p_noise_retrieval,
        max_spectator: signal.max_spectator,
        dt: signal.dt,
        steps: signal.steps + noise.steps,
    })
}

/// Summary object with the fixed leading keys followed by diagnostics.
pub fn summary_json(metrics: &MetricsBlock, config: &RunConfig) -> Value {
    let mut map = Map::new();
    map.insert("eta_storage".into(), Value::from(metrics.eta_storage));
    map.insert("eta_total".into(), Value::from(metrics.eta_total));
    map.insert("p_signal".into(), Value::from(metrics.p_signal));
    map.insert("p_noise".into(), Value::from(metrics.p_noise));
    map.insert("fidelity_conditional".into(), option_value(metrics.fidelity_conditional));
    map.insert("spin_decay_factor".into(), Value::from(metrics.spin_decay_factor));
    map.insert("dt_convergence_delta".into(), option_value(metrics.dt_convergence_delta));
    map.insert("config_echo".into(), config.echo_json());
    map.insert("time_bandwidth_estimate".into(), Value::from(metrics.time_bandwidth_estimate));
    map.insert("pulse_bandwidth_hz".into(), Value::from(metrics.pulse_bandwidth_hz));
    map.insert("p_noise_retrieval".into(), Value::from(metrics.p_noise_retrieval));
    map.insert("max_spectator".into(), Value::from(metrics.max_spectator));
    map.insert("dt".into(), Value::from(metrics.dt));
    map.insert("steps".into(), Value::from(metrics.steps));
    Value::Object(map)
}

fn option_value(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(output_scale: f64, retrieval: f64) -> FieldSeries {
        let p = gaussian_pulse(1.0, 6.0);
        let q = gaussian_pulse(1.0, 18.0);
        let t: Vec<f64> = (0..=2400).map(|i| i as f64 * 0.01).collect();
        FieldSeries {
            input: t.iter().map(|&x| p.intensity(x)).collect(),
            output: t
                .iter()
                .map(|&x| output_scale * p.intensity(x) + retrieval * q.intensity(x))
                .collect(),
            t,
        }
    }

    #[test]
    fn efficiencies_of_synthetic_series() {
        assert!((storage_efficiency(&series(0.0, 0.0), 12.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(storage_efficiency(&series(1.0, 0.0), 12.0).unwrap().abs() < 1e-9);
        let s = series(0.1, 0.5);
        assert!((storage_efficiency(&s, 12.0).unwrap() - 0.9).abs() < 1e-9);
        assert!((total_efficiency(&s, 12.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(total_efficiency(&series(0.0, 0.0), 12.0).unwrap() < 1e-12);
    }

    #[test]
    fn zero_input_is_rejected() {
        let mut s = series(0.0, 0.0);
        s.input.iter_mut().for_each(|x| *x = 0.0);
        assert!(matches!(storage_efficiency(&s, 12.0), Err(Error::ZeroInput { .. })));
    }

    #[test]
    fn fidelity_clamps() {
        assert_eq!(conditional_fidelity(1.0, 0.0).unwrap(), 1.0);
        assert!((conditional_fidelity(0.5, 0.005).unwrap() - 0.99).abs() < 1e-15);
        assert_eq!(conditional_fidelity(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(conditional_fidelity(0.3, 0.9).unwrap(), 0.0);
        assert_eq!(conditional_fidelity(0.0, 0.1), Err(Error::ZeroSignal));
    }

    #[test]
    fn time_bandwidth_products() {
        assert_eq!(time_bandwidth(1.0, 1.0), 1.0);
        let tb = time_bandwidth(0.6, 110e6);
        assert!((tb - 6.6e7).abs() < 1.0);
    }

    #[test]
    fn summary_key_order() {
        let m = MetricsBlock {
            eta_storage: 0.9,
            eta_total: 0.8,
            p_signal: 0.8,
            p_noise: 0.008,
            fidelity_conditional: Some(0.99),
            spin_decay_factor: 0.92,
            dt_convergence_delta: None,
            time_bandwidth_estimate: 1.0,
            pulse_bandwidth_hz: 1.0,
            p_noise_retrieval: 0.004,
            max_spectator: 0.0,
            dt: 1e-12,
            steps: 10,
        };
        let v = summary_json(&m, &RunConfig::default());
        let keys: Vec<_> = v.as_object().unwrap().keys().take(8).cloned().collect();
        assert_eq!(
            keys,
            [
                "eta_storage",
                "eta_total",
                "p_signal",
                "p_noise",
                "fidelity_conditional",
                "spin_decay_factor",
                "dt_convergence_delta",
                "config_echo"
            ]
        );
    }
}
