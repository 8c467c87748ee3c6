//! Simulation core for an off-resonant Raman quantum memory in an NV⁻
//! ensemble coupled to an optical microcavity.
//!
//! Pipeline: [`spin_hamiltonian`] builds the ground and excited manifolds,
//! [`eigensolver`] diagonalizes the excited one, [`selection_rules`] derives
//! dipole projections, [`raman_dynamics`] integrates storage and retrieval,
//! and [`metrics`] reduces the time series to efficiencies and fidelity.
//! [`sweep`] runs many configs in parallel.

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops
// mirror the packed array layout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod eigensolver;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod params;
pub mod raman_dynamics;
pub mod selection_rules;
pub mod spin_hamiltonian;
pub mod sweep;

pub use eigensolver::{eigh, excited_eigensystem, EigenSystem, ExcitedEigenSystem};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use metrics::{
    conditional_fidelity, storage_efficiency, summary_json, time_bandwidth, total_efficiency,
    FieldSeries, MetricsBlock,
};
pub use params::{
    derive_cavity_coupling, derive_control_rabi, derive_dipole_moment, CavityParams,
    ControlParams, FieldSplittings, PhaseModulation, PhysicalConstants, RateConvention,
    RunConfig, StepSize,
};
pub use raman_dynamics::{
    build_system, gaussian_pulse, integrate, simulate_noise, simulate_protocol, DynamicalSystem,
    ProtocolOutcome, PulseShape, SimulationResult, StateVector,
};
pub use selection_rules::{dipole_projections, table_report, CouplingTable};
pub use spin_hamiltonian::{
    excited_total, ground_states, h_fields, h_so_ss, GroundEigenSystem, SpinSpinConstants,
};
pub use sweep::{index_csv, run_sweep, SweepPoint, SweepSpec};
