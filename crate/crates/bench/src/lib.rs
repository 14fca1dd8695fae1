//! Shared fixtures for the criterion benches.

use pauliflow::experiments::{ExperimentConfig, Target};
use pauliflow::noise::{NoiseMode, NoiseSpec};

/// CNOT-1a at `t_g = 10`, `g = 5` with the given noise mode.
pub fn cnot_config(mode: NoiseMode, samples: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        target: Target::adiabatic("cnot1"),
        noise: NoiseSpec {
            mode,
            sigma: 0.15,
            bandwidth: 0.4,
            ..NoiseSpec::default()
        },
        runs: 16,
        seed: 1,
        ..ExperimentConfig::default()
    };
    c.pulse.samples = samples;
    c
}
