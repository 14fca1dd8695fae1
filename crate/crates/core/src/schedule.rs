//! Control envelopes for the stage-to-stage crossfade.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use thiserror::Error;

/// Edge-to-peak sweep-rate ratio above which a leg counts as truncated.
pub const TRUNCATION_WARNING_RATIO: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("leg too short: tau = {tau} exceeds half the leg duration {half_leg}")]
    LegTooShort { tau: f64, half_leg: f64 },
    #[error("a schedule needs at least two stages")]
    TooFewStages,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseShape {
    RosenZener,
    Erf,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::RosenZener => "rosen_zener",
            PulseShape::Erf => "erf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rosen_zener" | "rz" => Some(PulseShape::RosenZener),
            "erf" => Some(PulseShape::Erf),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Peak strength `g`.
    pub gap: f64,
    pub gate_time: f64,
    /// Rosen-Zener time constant as a fraction of the gate time.
    pub rz_ratio: f64,
    /// Erf width; defaults to an eighth of the leg duration.
    pub erf_width: Option<f64>,
    pub samples: usize,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            shape: PulseShape::RosenZener,
            gap: 1.0,
            gate_time: 20.0,
            rz_ratio: 0.052,
            erf_width: None,
            samples: 4096,
        }
    }
}

impl PulseSpec {
    pub fn tau(&self) -> f64 {
        self.rz_ratio * self.gate_time
    }

    pub fn leg_duration(&self, n_legs: usize) -> f64 {
        self.gate_time / n_legs as f64
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let bad = |m: String| Err(ScheduleError::InvalidPulse(m));
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return bad(format!("gap {} must be positive", self.gap));
        }
        if !(self.gate_time > 0.0 && self.gate_time.is_finite()) {
            return bad(format!("gate time {} must be positive", self.gate_time));
        }
        if self.samples < 256 {
            return bad(format!("{} samples < 256", self.samples));
        }
        if !(self.rz_ratio > 0.0 && self.rz_ratio < 0.5) {
            return bad(format!("rz ratio {} outside (0, 0.5)", self.rz_ratio));
        }
        if let Some(w) = self.erf_width {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!("erf width {w} must be positive"));
            }
        }
        Ok(())
    }

    /// Uniform grid over `[0, t_g]`, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|k| if k + 1 == n { self.gate_time } else { self.gate_time * k as f64 / (n - 1) as f64 })
            .collect()
    }
}

fn gd(x: f64) -> f64 {
    2.0 * (0.5 * x).tanh().atan()
}

/// Crossfade angle on one leg: 0 at `s = -T/2`, `pi/2` at `s = T/2`.
#[derive(Clone, Copy, Debug)]
pub struct LegProfile {
    shape: PulseShape,
    half_leg: f64,
    scale: f64,
    edge: f64,
}

impl LegProfile {
    pub fn new(pulse: &PulseSpec, n_legs: usize) -> Result<Self, ScheduleError> {
        pulse.validate()?;
        if n_legs == 0 {
            return Err(ScheduleError::TooFewStages);
        }
        let half_leg = 0.5 * pulse.leg_duration(n_legs);
        let tau = pulse.tau();
        if tau > half_leg {
            return Err(ScheduleError::LegTooShort { tau, half_leg });
        }
        let (scale, edge) = match pulse.shape {
            PulseShape::RosenZener => (PI / tau, gd(PI * half_leg / tau)),
            PulseShape::Erf => {
                let w = pulse.erf_width.unwrap_or(2.0 * half_leg / 8.0);
                let scale = 1.0 / (std::f64::consts::SQRT_2 * w);
                (scale, libm::erf(scale * half_leg))
            }
        };
        Ok(Self {
            shape: pulse.shape,
            half_leg,
            scale,
            edge,
        })
    }

    fn raw(&self, s: f64) -> f64 {
        match self.shape {
            PulseShape::RosenZener => gd(self.scale * s),
            PulseShape::Erf => libm::erf(self.scale * s),
        }
    }

    /// `theta(s)` for centered local time `s`.
    pub fn theta(&self, s: f64) -> f64 {
        if s <= -self.half_leg {
            return 0.0;
        }
        if s >= self.half_leg {
            return FRAC_PI_2;
        }
        (FRAC_PI_2 * (self.raw(s) + self.edge) / (2.0 * self.edge)).clamp(0.0, FRAC_PI_2)
    }

    /// Analytic `d theta / ds`.
    pub fn rate(&self, s: f64) -> f64 {
        let d = match self.shape {
            PulseShape::RosenZener => self.scale / (self.scale * s).cosh(),
            PulseShape::Erf => self.scale * 2.0 / PI.sqrt() * (-(self.scale * s).powi(2)).exp(),
        };
        FRAC_PI_2 * d / (2.0 * self.edge)
    }

    /// Sweep rate at the leg edge relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        self.rate(self.half_leg) / self.rate(0.0)
    }
}

fn cos_sin(theta: f64) -> (f64, f64) {
    if theta == 0.0 {
        (1.0, 0.0)
    } else if theta == FRAC_PI_2 {
        (0.0, 1.0)
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Sampled stage strengths `g_i(t_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTrace {
    pub times: Vec<f64>,
    /// `strengths[i][k]` is stage `i` at `times[k]`.
    pub strengths: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl ControlTrace {
    pub fn n_stages(&self) -> usize {
        self.strengths.len()
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Columns `t, g_1..g_S`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.n_stages()).map(|i| format!("g_{i}")));
        w.write_record(&header)?;
        for k in 0..self.n_samples() {
            let mut row = vec![self.times[k].to_string()];
            row.extend(self.strengths.iter().map(|g| g[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn leg_of(t: f64, leg: f64, n_legs: usize) -> usize {
    ((t / leg).floor().max(0.0) as usize).min(n_legs - 1)
}

/// Equal-length legs with no plateau; within leg `l`, stage `l` follows
/// `g cos(theta)` and stage `l+1` follows `g sin(theta)`.
pub fn build_schedule(n_stages: usize, pulse: &PulseSpec) -> Result<ControlTrace, ScheduleError> {
    if n_stages < 2 {
        return Err(ScheduleError::TooFewStages);
    }
    let n_legs = n_stages - 1;
    let profile = LegProfile::new(pulse, n_legs)?;
    let leg = pulse.leg_duration(n_legs);
    let times = pulse.grid();
    let mut strengths = vec![vec![0.0; times.len()]; n_stages];
    for (k, &t) in times.iter().enumerate() {
        let l = leg_of(t, leg, n_legs);
        let s = t - (l as f64 + 0.5) * leg;
        let (c, sn) = cos_sin(profile.theta(s));
        strengths[l][k] = pulse.gap * c;
        strengths[l + 1][k] = pulse.gap * sn;
    }
    let mut warnings = Vec::new();
    let ratio = profile.edge_ratio();
    if ratio > TRUNCATION_WARNING_RATIO {
        warnings.push(format!(
            "pulse truncated: edge sweep rate is {ratio:.2e} of the peak (threshold {TRUNCATION_WARNING_RATIO:.0e})"
        ));
    }
    Ok(ControlTrace {
        times,
        strengths,
        warnings,
    })
}

/// Peak `|d theta / dt|` over the sample grid, by central differences.
pub fn dtheta_max(pulse: &PulseSpec, n_legs: usize) -> Result<f64, ScheduleError> {
    let profile = LegProfile::new(pulse, n_legs)?;
    let leg = pulse.leg_duration(n_legs);
    let times = pulse.grid();
    let theta_at = |t: f64| {
        let l = leg_of(t, leg, n_legs);
        l as f64 * FRAC_PI_2 + profile.theta(t - (l as f64 + 0.5) * leg)
    };
    let mut best = 0.0f64;
    for w in times.windows(3) {
        best = best.max(((theta_at(w[2]) - theta_at(w[0])) / (w[2] - w[0])).abs());
    }
    Ok(best)
}
