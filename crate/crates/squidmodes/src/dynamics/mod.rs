//! Open-quantum-system engine for the bichromatic two-qubit gate:
//! composite-space operators, a dense Lindblad RK4 integrator, and
//! entanglement metrics.

pub mod gate;
pub mod linalg;
pub mod lindblad;
pub mod metrics;
pub mod operators;

pub use gate::{
    build_ms_hamiltonian, collapse_operators, run_gate, trajectory_csv, GateConfig, GateMetrics,
    GateRun, GateSeries, InitialState, MsHamiltonian,
};
pub use linalg::CMat;
pub use lindblad::{
    evolve_with, lindblad_evolve, EvolveConfig, StaticHamiltonian, TimeDependent, Trajectory,
};
pub use metrics::{bell_fidelity, concurrence, partial_trace_oscillator};
pub use operators::{annihilation, GateSpace, OperatorSpec};
