pub mod config;
pub mod dynamic;
pub mod experiments;
pub mod flow;
pub mod library;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod output;
pub mod pauli;
pub mod propagator;
pub mod schedule;

pub use config::{ConfigDocument, ConfigError, OutputFormat, OutputSpec};
pub use dynamic::{simulate_dynamic, DynamicGate, DynamicSpec, Envelope};
pub use experiments::{
    epsilon_study, mc_estimate, preset, sweep, sweep_all, ExperimentConfig, ExperimentError, Perturbation, PointEstimate,
    PreparedPoint, Sweep, SweepResult, SweepVariable, Target,
};
pub use flow::{
    parse_sequence, render_sequence, track_clifford, validate_sequence, GateSequence, LogicalTransformation,
    StageHamiltonian, ValidationReport,
};
pub use library::{get_gate, GateSpec, Ideal, GATE_NAMES};
pub use linalg::{CMatrix, CVector};
pub use metrics::{gate_error, ideal_matrix, ideal_unitary, GateErrorReport, LogicalBases};
pub use noise::{NoiseMode, NoiseSpec};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use propagator::{evolve, Propagator, Units};
pub use schedule::{build_schedule, ControlTrace, PulseShape, PulseSpec};
