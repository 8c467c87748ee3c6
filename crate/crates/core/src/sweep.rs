//! One-parameter sweeps over a numeric config key.
//!
//! Points run concurrently on a dedicated pool; every point is an
//! independent pure computation, so the index is the same whatever the
//! worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::MetricsBlock;
use crate::params::RunConfig;
use crate::raman_dynamics::simulate_protocol;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn new(parameter: &str, start: f64, stop: f64, step: f64) -> Result<Self> {
        // rejects non-numeric and unknown keys
        RunConfig::default().get_numeric(parameter)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("step", "must be positive"));
        }
        if !(start.is_finite() && stop.is_finite() && start <= stop) {
            return Err(Error::invalid("start", "must not exceed stop"));
        }
        Ok(SweepSpec { parameter: parameter.to_string(), start, stop, step })
    }

    /// Parses bounds with the unit rules of the swept key.
    pub fn parse(parameter: &str, start: &str, stop: &str, step: &str) -> Result<Self> {
        let p = |text| RunConfig::parse_numeric(parameter, text);
        Self::new(parameter, p(start)?, p(stop)?, p(step)?)
    }

    /// start, start + step, ... up to stop (with a little slack for rounding).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub config: RunConfig,
    pub outcome: Result<MetricsBlock>,
}

/// Runs every grid point with `workers` threads. `on_point` is called from
/// the worker as each point finishes; results come back in grid order.
pub fn run_sweep<F>(base: &RunConfig, spec: &SweepSpec, workers: usize, on_point: F) -> Result<Vec<SweepPoint>>
where
    F: Fn(&SweepPoint) + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let values = spec.values();
    let mut points: Vec<SweepPoint> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let mut config = base.clone();
                let outcome = config
                    .set_numeric(&spec.parameter, value)
                    .and_then(|_| simulate_protocol(&config))
                    .map(|o| o.metrics);
                let point = SweepPoint { index, value, config, outcome };
                on_point(&point);
                point
            })
            .collect()
    });
    points.sort_by_key(|p| p.index);
    Ok(points)
}

pub const INDEX_COLUMNS: [&str; 7] =
    ["eta_storage", "eta_total", "p_signal", "p_noise", "fidelity_conditional", "spin_decay_factor", "status"];

/// index.csv text: one row per point sorted by parameter value, failed
/// points keep their row with empty metrics and the error name.
pub fn index_csv(parameter: &str, points: &[SweepPoint]) -> String {
    let mut rows: Vec<&SweepPoint> = points.iter().collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
    let mut out = format!("{parameter},{}\n", INDEX_COLUMNS.join(","));
    for p in rows {
        out.push_str(&format!("{:.9e}", p.value));
        match &p.outcome {
            Ok(m) => {
                let fid = m.fidelity_conditional.map(|f| format!("{f:.9e}")).unwrap_or_default();
                out.push_str(&format!(
                    ",{:.9e},{:.9e},{:.9e},{:.9e},{fid},{:.9e},ok\n",
                    m.eta_storage, m.eta_total, m.p_signal, m.p_noise, m.spin_decay_factor
                ));
            }
            Err(e) => out.push_str(&format!(",,,,,,,{}\n", e.name())),
        }
    }
    out
}
