//! Two-qubit dynamic ZZ gate used as the comparison baseline.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::metrics::{gate_error, identity, GateErrorReport, MetricsError};
use crate::noise::{apply, NoiseError, NoiseGenerator, NoiseSpec};
use crate::propagator::Units;
use crate::schedule::{build_schedule, ControlTrace, PulseSpec, ScheduleError};

pub const TARGET_PHASE: f64 = FRAC_PI_4;
pub const CALIBRATION_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DynamicError {
    #[error("calibration interval [{lo}, {hi}] does not bracket the target phase")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("time {0} must be positive")]
    InvalidTime(f64),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    Square,
    /// Rise and fall of one crossfade leg each, using the pulse shape.
    Shaped,
}

impl Envelope {
    pub fn name(self) -> &'static str {
        match self {
            Envelope::Square => "square",
            Envelope::Shaped => "shaped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "square" => Some(Envelope::Square),
            "shaped" | "rosen_zener" | "rz" => Some(Envelope::Shaped),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicSpec {
    pub t0: f64,
    pub amplitude: f64,
    pub envelope: Envelope,
    /// Shape, ratio and sample count; gap and gate time are ignored.
    pub pulse: PulseSpec,
    pub units: Units,
}

/// Unit-peak envelope samples over `[0, t_g]`.
pub fn envelope_trace(envelope: Envelope, pulse: &PulseSpec, t_g: f64) -> Result<ControlTrace, DynamicError> {
    if !(t_g > 0.0 && t_g.is_finite()) {
        return Err(DynamicError::InvalidTime(t_g));
    }
    let p = PulseSpec {
        gap: 1.0,
        gate_time: t_g,
        ..pulse.clone()
    };
    p.validate()?;
    match envelope {
        Envelope::Square => Ok(ControlTrace {
            times: p.grid(),
            strengths: vec![vec![1.0; p.samples]],
            warnings: Vec::new(),
        }),
        Envelope::Shaped => {
            let mut trace = build_schedule(3, &p)?;
            let middle = trace.strengths.swap_remove(1);
            trace.strengths = vec![middle];
            Ok(trace)
        }
    }
}

/// `omega * (a/2) * integral(line)` by the midpoint rule of the propagator.
pub fn accumulated_phase(amplitude: f64, units: Units, trace: &ControlTrace) -> f64 {
    let g = &trace.strengths[0];
    let area: f64 = trace
        .times
        .windows(2)
        .zip(g.windows(2))
        .map(|(t, g)| (t[1] - t[0]) * 0.5 * (g[0] + g[1]))
        .sum();
    0.5 * units.omega() * amplitude * area
}

/// `exp(+i phi ZZ)` in the computational basis.
pub fn zz_unitary(phi: f64) -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for (k, z) in [1.0, -1.0, -1.0, 1.0].into_iter().enumerate() {
        u[(k, k)] = Complex64::from_polar(1.0, phi * z);
    }
    u
}

impl DynamicSpec {
    /// Bisects the amplitude so the noise-free phase at `t_g = t0` is `pi/4`.
    pub fn calibrate(t0: f64, envelope: Envelope, pulse: &PulseSpec, units: Units) -> Result<Self, DynamicError> {
        let trace = envelope_trace(envelope, pulse, t0)?;
        let unit = accumulated_phase(1.0, units, &trace);
        Self::calibrate_in(t0, envelope, pulse, units, 0.0, 4.0 * TARGET_PHASE / unit)
    }

    pub fn calibrate_in(
        t0: f64,
        envelope: Envelope,
        pulse: &PulseSpec,
        units: Units,
        lo: f64,
        hi: f64,
    ) -> Result<Self, DynamicError> {
        let trace = envelope_trace(envelope, pulse, t0)?;
        let f = |a: f64| accumulated_phase(a, units, &trace) - TARGET_PHASE;
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (f(a), f(b));
        if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
            return Err(DynamicError::NotBracketed { lo, hi });
        }
        let rising = fa < fb;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm.abs() < 0.01 * CALIBRATION_TOL || m == a || m == b {
                a = m;
                b = m;
                break;
            }
            if (fm < 0.0) == rising {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(Self {
            t0,
            amplitude: 0.5 * (a + b),
            envelope,
            pulse: pulse.clone(),
            units,
        })
    }

    pub fn ideal(&self) -> CMatrix {
        zz_unitary(TARGET_PHASE)
    }
}

/// A dynamic gate at one gate time with its noise source, reused across runs.
pub struct DynamicGate {
    amplitude: f64,
    units: Units,
    envelope: ControlTrace,
    noise: NoiseGenerator,
    ideal: CMatrix,
}

impl DynamicGate {
    /// With `retune`, the amplitude is recalibrated noise-free at `t_g`.
    pub fn new(spec: &DynamicSpec, t_g: f64, noise: &NoiseSpec, retune: bool) -> Result<Self, DynamicError> {
        let amplitude = if retune {
            DynamicSpec::calibrate(t_g, spec.envelope, &spec.pulse, spec.units)?.amplitude
        } else {
            spec.amplitude
        };
        let envelope = envelope_trace(spec.envelope, &spec.pulse, t_g)?;
        let noise = NoiseGenerator::new(noise, envelope.n_samples(), envelope.dt())?;
        Ok(Self {
            amplitude,
            units: spec.units,
            envelope,
            noise,
            ideal: spec.ideal(),
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn envelope(&self) -> &ControlTrace {
        &self.envelope
    }

    pub fn multipliers(&self, run_index: u64) -> Vec<Vec<f64>> {
        self.noise.multipliers(1, run_index)
    }

    pub fn phase(&self, run_index: u64) -> Result<f64, DynamicError> {
        let m = self.multipliers(run_index);
        let noisy = apply(&self.envelope, &m)?;
        Ok(accumulated_phase(self.amplitude, self.units, &noisy))
    }

    /// Every step of `-(a g m / 2) ZZ` commutes, so the product of the
    /// step propagators is the exponential of the summed phase.
    pub fn run(&self, run_index: u64) -> Result<GateErrorReport, DynamicError> {
        let u = zz_unitary(self.phase(run_index)?);
        Ok(gate_error(&u, &identity(4), &identity(4), &self.ideal)?)
    }
}

pub fn simulate_dynamic(
    spec: &DynamicSpec,
    t_g: f64,
    noise: &NoiseSpec,
    run_index: u64,
    retune: bool,
) -> Result<GateErrorReport, DynamicError> {
    DynamicGate::new(spec, t_g, noise, retune)?.run(run_index)
}
