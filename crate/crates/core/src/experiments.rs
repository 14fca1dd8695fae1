//! Monte Carlo estimation and parameter sweeps.

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamic::{DynamicError, DynamicGate, DynamicSpec, Envelope};
use crate::flow::FlowError;
use crate::library::{get_gate, perturb_generator, GateSpec, LibraryError};
use crate::linalg::CMatrix;
use crate::metrics::{gate_error, ideal_matrix, LogicalBases, MetricsError};
use crate::noise::{apply, NoiseError, NoiseGenerator, NoiseMode, NoiseSpec};
use crate::pauli::{PauliError, PauliString};
use crate::propagator::{Propagator, PropagatorError, Units};
use crate::schedule::{build_schedule, ControlTrace, PulseSpec, ScheduleError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dynamic(#[from] DynamicError),
}

impl ExperimentError {
    /// Configuration problems as opposed to failures during simulation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Library(_)
                | ExperimentError::Pauli(_)
                | ExperimentError::Schedule(ScheduleError::InvalidPulse(_))
                | ExperimentError::Noise(NoiseError::Bandwidth(_) | NoiseError::Sigma(_) | NoiseError::TooFewSamples(_))
        )
    }
}

/// `epsilon * extra` added to one generator of a stage (both 1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub stage: usize,
    pub term: usize,
    /// Sparse text such as `"+Z2"`.
    pub extra: String,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Adiabatic {
        gate: String,
        theta: Option<f64>,
        perturb: Option<Perturbation>,
    },
    Dynamic {
        t0: f64,
        envelope: Envelope,
        /// Noise-free recalibration at every gate time.
        retune: bool,
    },
}

impl Target {
    pub fn adiabatic(gate: &str) -> Self {
        Target::Adiabatic {
            gate: gate.to_string(),
            theta: None,
            perturb: None,
        }
    }

    pub fn dynamic(retune: bool) -> Self {
        Target::Dynamic {
            t0: 10.0,
            envelope: Envelope::Square,
            retune,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    GateTime,
    SigmaF,
    Bandwidth,
    Epsilon,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 4] = [
        SweepVariable::GateTime,
        SweepVariable::SigmaF,
        SweepVariable::Bandwidth,
        SweepVariable::Epsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::GateTime => "gate_time",
            SweepVariable::SigmaF => "sigma_f",
            SweepVariable::Bandwidth => "bandwidth",
            SweepVariable::Epsilon => "epsilon",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub target: Target,
    pub pulse: PulseSpec,
    pub noise: NoiseSpec,
    pub units: Units,
    pub runs: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: String::new(),
            target: Target::adiabatic("cnot1"),
            pulse: PulseSpec {
                gap: 5.0,
                gate_time: 10.0,
                ..PulseSpec::default()
            },
            noise: NoiseSpec::default(),
            units: Units::Cycles,
            runs: 1000,
            seed: 0,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.runs == 0 {
            return Err(ExperimentError::Config("mc.runs must be at least 1".into()));
        }
        self.pulse.validate()?;
        self.noise.validate()?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(ExperimentError::Config("sweep.values is empty".into()));
            }
            if sweep.values.windows(2).any(|w| w[0] >= w[1]) || sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(ExperimentError::Config("sweep.values must be finite and strictly increasing".into()));
            }
            if sweep.variable == SweepVariable::Epsilon
                && !matches!(&self.target, Target::Adiabatic { perturb: Some(_), .. })
            {
                return Err(ExperimentError::Config("epsilon sweep needs a perturbation".into()));
            }
        }
        Ok(())
    }

    /// The configuration at one sweep value, with the sweep removed.
    pub fn at(&self, variable: SweepVariable, value: f64) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        match variable {
            SweepVariable::GateTime => c.pulse.gate_time = value,
            SweepVariable::SigmaF => c.noise.sigma = value,
            SweepVariable::Bandwidth => c.noise.bandwidth = value,
            SweepVariable::Epsilon => {
                if let Target::Adiabatic { perturb: Some(p), .. } = &mut c.target {
                    p.epsilon = value;
                }
            }
        }
        c
    }

    fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            seed: self.seed,
            ..self.noise.clone()
        }
    }

    fn effective_runs(&self) -> usize {
        if self.noise.mode == NoiseMode::None || self.noise.sigma == 0.0 {
            1
        } else {
            self.runs
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOutcome {
    pub error: f64,
    pub leakage: f64,
    pub unitarity_defect: f64,
}

struct AdiabaticPoint {
    gate: GateSpec,
    propagator: Propagator,
    trace: ControlTrace,
    bases: LogicalBases,
    ideal: CMatrix,
    noise: NoiseGenerator,
}

enum Engine {
    Adiabatic(Box<AdiabaticPoint>),
    Dynamic(Box<DynamicGate>),
}

/// One configuration with every run-independent object built once.
pub struct PreparedPoint {
    engine: Engine,
}

impl PreparedPoint {
    pub fn new(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        config.validate()?;
        let noise = config.noise_spec();
        let engine = match &config.target {
            Target::Adiabatic { gate, theta, perturb } => {
                let nominal = get_gate(gate, *theta)?;
                // Bases and target come from the unperturbed gate.
                let bases = LogicalBases::of(&nominal.sequence)?;
                let ideal = ideal_matrix(&nominal.ideal)?;
                let gate = match perturb {
                    Some(p) => {
                        if p.term == 0 {
                            return Err(ExperimentError::Config("perturb.term is 1-based".into()));
                        }
                        let extra = PauliString::parse_sparse(nominal.n_qubits(), &p.extra)?;
                        perturb_generator(&nominal, p.stage, p.term - 1, &extra, p.epsilon)?
                    }
                    None => nominal,
                };
                let propagator = Propagator::new(&gate.sequence, config.units)?;
                let trace = build_schedule(gate.sequence.stages().len(), &config.pulse)?;
                let noise = NoiseGenerator::new(&noise, trace.n_samples(), trace.dt())?;
                Engine::Adiabatic(Box::new(AdiabaticPoint {
                    gate,
                    propagator,
                    trace,
                    bases,
                    ideal,
                    noise,
                }))
            }
            Target::Dynamic { t0, envelope, retune } => {
                let spec = DynamicSpec::calibrate(*t0, *envelope, &config.pulse, config.units)?;
                Engine::Dynamic(Box::new(DynamicGate::new(&spec, config.pulse.gate_time, &noise, *retune)?))
            }
        };
        Ok(Self { engine })
    }

    pub fn gate(&self) -> Option<&GateSpec> {
        match &self.engine {
            Engine::Adiabatic(p) => Some(&p.gate),
            Engine::Dynamic(_) => None,
        }
    }

    /// Noise-free control trace.
    pub fn trace(&self) -> &ControlTrace {
        match &self.engine {
            Engine::Adiabatic(p) => &p.trace,
            Engine::Dynamic(d) => d.envelope(),
        }
    }

    pub fn multipliers(&self, run_index: u64) -> Vec<Vec<f64>> {
        match &self.engine {
            Engine::Adiabatic(p) => p.noise.multipliers(p.trace.n_stages(), run_index),
            Engine::Dynamic(d) => d.multipliers(run_index),
        }
    }

    pub fn run(&self, run_index: u64) -> Result<RunOutcome, ExperimentError> {
        match &self.engine {
            Engine::Adiabatic(p) => {
                let spec = p.noise.spec();
                let result = if spec.mode == NoiseMode::None || spec.sigma == 0.0 {
                    p.propagator.evolve(&p.trace)?
                } else {
                    let m = p.noise.multipliers(p.trace.n_stages(), run_index);
                    p.propagator.evolve(&apply(&p.trace, &m)?)?
                };
                let r = gate_error(&result.unitary, &p.bases.input, &p.bases.output, &p.ideal)?;
                Ok(RunOutcome {
                    error: r.error,
                    leakage: r.leakage,
                    unitarity_defect: result.unitarity_defect,
                })
            }
            Engine::Dynamic(d) => {
                let r = d.run(run_index)?;
                Ok(RunOutcome {
                    error: r.error,
                    leakage: r.leakage,
                    unitarity_defect: 0.0,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub mean_error: f64,
    pub sem_error: f64,
    pub mean_leakage: f64,
    pub runs: usize,
    pub max_unitarity_defect: f64,
}

/// Mean and standard error of the mean (sample std over `sqrt(n)`).
pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `0..runs` in parallel and reduces in run order. Noise-free
/// configurations are evaluated once.
pub fn mc_estimate(config: &ExperimentConfig) -> Result<PointEstimate, ExperimentError> {
    let point = PreparedPoint::new(config)?;
    let runs = config.effective_runs();
    let outcomes = (0..runs as u64)
        .into_par_iter()
        .map(|k| point.run(k))
        .collect::<Result<Vec<_>, _>>()?;
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    let leaks: Vec<f64> = outcomes.iter().map(|o| o.leakage).collect();
    let (mean_error, sem_error) = mean_sem(&errors);
    let (mean_leakage, _) = mean_sem(&leaks);
    let max_unitarity_defect = outcomes.iter().map(|o| o.unitarity_defect).fold(0.0, f64::max);
    Ok(PointEstimate {
        mean_error,
        sem_error,
        mean_leakage,
        runs,
        max_unitarity_defect,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub series: String,
    pub variable: SweepVariable,
    pub value: f64,
    pub estimate: PointEstimate,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointFailure {
    pub series: String,
    pub value: f64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    pub fn extend(&mut self, other: SweepResult) {
        self.rows.extend(other.rows);
        self.failures.extend(other.failures);
    }

    pub fn series(&self, name: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }
}

/// One estimate per sweep value; a failing point is recorded and skipped.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| ExperimentError::Config("no sweep defined".into()))?;
    let digest = config.digest();
    let mut out = SweepResult::default();
    for &value in &sweep.values {
        match mc_estimate(&config.at(sweep.variable, value)) {
            Ok(estimate) => out.rows.push(SweepRow {
                series: config.label.clone(),
                variable: sweep.variable,
                value,
                estimate,
                seed: config.seed,
                config_digest: digest.clone(),
            }),
            Err(e) if e.is_config() => return Err(e),
            Err(e) => out.failures.push(PointFailure {
                series: config.label.clone(),
                value,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn sweep_all(configs: &[ExperimentConfig]) -> Result<SweepResult, ExperimentError> {
    let mut out = SweepResult::default();
    for c in configs {
        out.extend(sweep(c)?);
    }
    Ok(out)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonStudy {
    pub result: SweepResult,
    /// Log-log slope over the positive epsilon values.
    pub slope: f64,
}

pub fn epsilon_study(config: &ExperimentConfig) -> Result<EpsilonStudy, ExperimentError> {
    if config.noise.mode != NoiseMode::None {
        return Err(ExperimentError::Config("epsilon study runs without noise".into()));
    }
    match &config.sweep {
        Some(s) if s.variable == SweepVariable::Epsilon => {}
        _ => return Err(ExperimentError::Config("epsilon study needs an epsilon sweep".into())),
    }
    let result = sweep(config)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = result
        .rows
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| (r.value, r.estimate.mean_error))
        .unzip();
    let slope = if xs.len() >= 2 { loglog_slope(&xs, &ys) } else { f64::NAN };
    Ok(EpsilonStudy { result, slope })
}

pub const PRESETS: [&str; 4] = ["fig3a", "fig3b", "fig3c", "epsilon"];

fn series(label: &str, target: Target, mode: NoiseMode, sigma: f64, bandwidth: f64, sweep: Sweep) -> ExperimentConfig {
    ExperimentConfig {
        label: label.to_string(),
        target,
        noise: NoiseSpec {
            mode,
            sigma,
            bandwidth,
            ..NoiseSpec::default()
        },
        sweep: Some(sweep),
        ..ExperimentConfig::default()
    }
}

/// Representative sweeps over gate time, noise amplitude, bandwidth and
/// term imperfection.
pub fn preset(name: &str, seed: u64, runs: usize) -> Option<Vec<ExperimentConfig>> {
    let gt = || Sweep {
        variable: SweepVariable::GateTime,
        values: vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
    };
    let sf = || Sweep {
        variable: SweepVariable::SigmaF,
        values: vec![0.0, 0.0375, 0.075, 0.15],
    };
    let bw = || Sweep {
        variable: SweepVariable::Bandwidth,
        values: vec![0.1, 0.2, 0.4, 0.8, 1.2, 1.6],
    };
    let eps = || Sweep {
        variable: SweepVariable::Epsilon,
        values: vec![0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
    };
    use NoiseMode::{Dc, Filtered, None as Off};
    let cnot = || Target::adiabatic("cnot1");
    let mut configs = match name {
        "fig3a" => vec![
            series("cnot1/none", cnot(), Off, 0.0, 1.0, gt()),
            series("cnot1/dc0.15", cnot(), Dc, 0.15, 1.0, gt()),
            series("dynamic/none", Target::dynamic(false), Off, 0.0, 1.0, gt()),
            series("dynamic/dc0.15", Target::dynamic(true), Dc, 0.15, 1.0, gt()),
        ],
        "fig3b" => vec![
            series("cnot1/dc", cnot(), Dc, 0.0, 1.0, sf()),
            series("cnot1/b0.2", cnot(), Filtered, 0.0, 0.2, sf()),
            series("cnot1/b0.4", cnot(), Filtered, 0.0, 0.4, sf()),
            series("dynamic/dc", Target::dynamic(true), Dc, 0.0, 1.0, sf()),
        ],
        "fig3c" => {
            let mut v: Vec<_> = [0.0375, 0.075, 0.15]
                .into_iter()
                .map(|s| series(&format!("cnot1/s{s}"), cnot(), Filtered, s, 1.0, bw()))
                .collect();
            v.push(series("dynamic/s0.15", Target::dynamic(true), Filtered, 0.15, 1.0, bw()));
            v
        }
        "epsilon" => [("p1", 1, "+Z2"), ("p3", 3, "+Y2Y3")]
            .into_iter()
            .map(|(label, stage, extra)| {
                let target = Target::Adiabatic {
                    gate: "cnot1".into(),
                    theta: None,
                    perturb: Some(Perturbation {
                        stage,
                        term: 1,
                        extra: extra.into(),
                        epsilon: 0.0,
                    }),
                };
                series(&format!("cnot1/{label}"), target, Off, 0.0, 1.0, eps())
            })
            .collect(),
        _ => return None,
    };
    for c in &mut configs {
        c.seed = seed;
        c.noise.seed = seed;
        c.runs = runs;
    }
    Some(configs)
}
