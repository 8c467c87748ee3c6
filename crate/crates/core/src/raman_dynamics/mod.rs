//! Linearized single-excitation dynamics of the cavity-coupled ensemble.

pub mod integrate;
mod kernel;
pub mod protocol;
pub mod pulse;
pub mod series;
pub mod system;

pub use integrate::{
    cavity_field, derivative, integrate, output_field, Drive, SimulationResult, StateVector,
    TimeGrid,
};
pub use protocol::{
    hold, prepare, resolve_step, run_protocol, simulate_noise, simulate_protocol, Prepared,
    ProtocolOutcome,
};
pub use pulse::{gaussian_pulse, PulseShape};
pub use series::{read_series_csv, write_series_csv, TimeSeries};
pub use system::{build_system, DynamicalSystem, STEP_LIMIT};
