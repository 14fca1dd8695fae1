//! Multiplicative amplitude noise on the control lines.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::schedule::ControlTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("bandwidth must be positive in filtered mode, got {0}")]
    Bandwidth(f64),
    #[error("sigma must be non-negative, got {0}")]
    Sigma(f64),
    #[error("noise needs at least 256 samples, got {0}")]
    TooFewSamples(usize),
    #[error("multipliers have shape {got:?}, trace has {want:?}")]
    ShapeMismatch { got: (usize, usize), want: (usize, usize) },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    None,
    Dc,
    Filtered,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMode::None => "none",
            NoiseMode::Dc => "dc",
            NoiseMode::Filtered => "filtered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(NoiseMode::None),
            "dc" => Some(NoiseMode::Dc),
            "filtered" => Some(NoiseMode::Filtered),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    /// Standard deviation as a fraction of the pulse amplitude.
    pub sigma: f64,
    /// Filter cutoff frequency (cycles per unit time).
    pub bandwidth: f64,
    pub seed: u64,
    pub per_line_independent: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            mode: NoiseMode::None,
            sigma: 0.0,
            bandwidth: 1.0,
            seed: 0,
            per_line_independent: true,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(NoiseError::Sigma(self.sigma));
        }
        if self.mode == NoiseMode::Filtered && !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(NoiseError::Bandwidth(self.bandwidth));
        }
        Ok(())
    }
}

/// Fourth-order Butterworth magnitude `1/sqrt(1 + (f/B)^8)`.
pub fn butterworth(f: f64, bandwidth: f64) -> f64 {
    1.0 / (1.0 + (f / bandwidth).powi(8)).sqrt()
}

fn stream(spec: &NoiseSpec, run_index: u64, line: usize) -> ChaCha8Rng {
    let line = if spec.per_line_independent { line as u64 } else { 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream((run_index << 10) | (line & 0x3ff));
    rng
}

/// Reusable generator for one grid; caches the FFT plans and filter.
pub struct NoiseGenerator {
    spec: NoiseSpec,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    filter: Vec<f64>,
    gain: f64,
}

impl NoiseGenerator {
    pub fn new(spec: &NoiseSpec, n_samples: usize, dt: f64) -> Result<Self, NoiseError> {
        spec.validate()?;
        if n_samples < 256 {
            return Err(NoiseError::TooFewSamples(n_samples));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_samples);
        let inverse = planner.plan_fft_inverse(n_samples);
        let filter: Vec<f64> = if spec.mode == NoiseMode::Filtered {
            let df = 1.0 / (n_samples as f64 * dt);
            (0..n_samples)
                .map(|k| {
                    let signed = if k <= n_samples / 2 { k as f64 } else { k as f64 - n_samples as f64 };
                    butterworth((signed * df).abs(), spec.bandwidth)
                })
                .collect()
        } else {
            Vec::new()
        };
        let gain = if filter.is_empty() {
            1.0
        } else {
            (filter.iter().map(|h| h * h).sum::<f64>() / n_samples as f64).sqrt()
        };
        Ok(Self {
            spec: spec.clone(),
            n: n_samples,
            forward,
            inverse,
            filter,
            gain,
        })
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    /// RMS filter gain `sqrt(mean |H|^2)`.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Unit-variance stationary filtered noise for one line.
    fn filtered(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut buf: Vec<Complex64> = (0..self.n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        self.forward.process(&mut buf);
        for (c, h) in buf.iter_mut().zip(&self.filter) {
            *c *= *h;
        }
        self.inverse.process(&mut buf);
        let norm = 1.0 / (self.n as f64 * self.gain);
        buf.iter().map(|c| c.re * norm).collect()
    }

    /// Per-line multipliers `m_i[t_k]` for one Monte Carlo run.
    pub fn multipliers(&self, n_lines: usize, run_index: u64) -> Vec<Vec<f64>> {
        let sigma = self.spec.sigma;
        (0..n_lines)
            .map(|line| {
                if self.spec.mode == NoiseMode::None || sigma == 0.0 {
                    return vec![1.0; self.n];
                }
                let mut rng = stream(&self.spec, run_index, line);
                match self.spec.mode {
                    NoiseMode::None => unreachable!(),
                    NoiseMode::Dc => {
                        let d: f64 = rng.sample(StandardNormal);
                        vec![1.0 + sigma * d; self.n]
                    }
                    NoiseMode::Filtered => self.filtered(&mut rng).into_iter().map(|x| 1.0 + sigma * x).collect(),
                }
            })
            .collect()
    }
}

/// One-shot form of [`NoiseGenerator::multipliers`].
pub fn generate_multipliers(
    spec: &NoiseSpec,
    n_samples: usize,
    dt: f64,
    n_lines: usize,
    run_index: u64,
) -> Result<Vec<Vec<f64>>, NoiseError> {
    Ok(NoiseGenerator::new(spec, n_samples, dt)?.multipliers(n_lines, run_index))
}

/// `g_i[t_k] * m_i[t_k]`; samples where `g_i` is zero stay exactly zero.
pub fn apply(trace: &ControlTrace, multipliers: &[Vec<f64>]) -> Result<ControlTrace, NoiseError> {
    let want = (trace.n_stages(), trace.n_samples());
    let got = (multipliers.len(), multipliers.first().map_or(0, Vec::len));
    if got != want || multipliers.iter().any(|m| m.len() != want.1) {
        return Err(NoiseError::ShapeMismatch { got, want });
    }
    let strengths = trace
        .strengths
        .iter()
        .zip(multipliers)
        .map(|(g, m)| g.iter().zip(m).map(|(&g, &m)| if g == 0.0 { 0.0 } else { g * m }).collect())
        .collect();
    Ok(ControlTrace {
        times: trace.times.clone(),
        strengths,
        warnings: trace.warnings.clone(),
    })
}

/// Columns `t, m_1..m_S`.
pub fn write_multipliers_csv<W: Write>(times: &[f64], multipliers: &[Vec<f64>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=multipliers.len()).map(|i| format!("m_{i}")));
    w.write_record(&header)?;
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(multipliers.iter().map(|m| m[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_schedule, PulseSpec};

    fn spec(mode: NoiseMode, sigma: f64, bandwidth: f64) -> NoiseSpec {
        NoiseSpec {
            mode,
            sigma,
            bandwidth,
            seed: 7,
            per_line_independent: true,
        }
    }

    fn std_dev(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn zero_sigma_is_exactly_one() {
        for mode in [NoiseMode::None, NoiseMode::Dc, NoiseMode::Filtered] {
            let m = generate_multipliers(&spec(mode, 0.0, 0.5), 256, 0.1, 3, 4).unwrap();
            assert!(m.iter().flatten().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn cutoff_is_half_power() {
        assert!((butterworth(2.0, 2.0).powi(2) - 0.5).abs() < 1e-15);
        assert_eq!(butterworth(0.0, 2.0), 1.0);
    }

    #[test]
    fn deterministic_and_distinct_streams() {
        let g = NoiseGenerator::new(&spec(NoiseMode::Filtered, 0.1, 0.2), 512, 1.0).unwrap();
        let a = g.multipliers(3, 11);
        assert_eq!(a, g.multipliers(3, 11));
        assert_ne!(a, g.multipliers(3, 12));
        assert_ne!(a[0], a[1]);
        let shared = NoiseGenerator::new(
            &NoiseSpec {
                per_line_independent: false,
                ..spec(NoiseMode::Filtered, 0.1, 0.2)
            },
            512,
            1.0,
        )
        .unwrap()
        .multipliers(3, 11);
        assert_eq!(shared[0], shared[2]);
    }

    #[test]
    fn dc_is_constant_per_line() {
        let m = generate_multipliers(&spec(NoiseMode::Dc, 0.2, 1.0), 256, 0.1, 2, 0).unwrap();
        for line in &m {
            assert!(line.iter().all(|&x| x == line[0]));
        }
        assert_ne!(m[0][0], m[1][0]);
    }

    #[test]
    fn long_realization_variance() {
        let n = 1 << 16;
        let m = generate_multipliers(&spec(NoiseMode::Filtered, 0.15, 0.05), n, 1.0, 1, 0).unwrap();
        let var = std_dev(&m[0]).powi(2);
        assert!((var / 0.15f64.powi(2) - 1.0).abs() < 0.1, "{var}");
        assert!(m[0].iter().all(|x| x.is_finite()));
    }

    #[test]
    fn marginal_std_independent_of_bandwidth() {
        let runs = 10_000;
        let n = 256;
        for b in [0.1, 0.2, 0.4, 0.8] {
            let g = NoiseGenerator::new(&spec(NoiseMode::Filtered, 0.15, b), n, 1.0).unwrap();
            let samples: Vec<f64> = (0..runs).map(|r| g.multipliers(1, r)[0][n / 2]).collect();
            let s = std_dev(&samples);
            assert!((s - 0.15).abs() < 0.005, "B={b}: {s}");
        }
    }

    #[test]
    fn apply_rules() {
        let tr = build_schedule(3, &PulseSpec { samples: 256, ..Default::default() }).unwrap();
        let ones = vec![vec![1.0; 256]; 3];
        assert_eq!(apply(&tr, &ones).unwrap(), tr);
        let mut m = ones.clone();
        m[1] = vec![1.15; 256];
        let scaled = apply(&tr, &m).unwrap();
        for k in 0..256 {
            assert_eq!(scaled.strengths[1][k], tr.strengths[1][k] * 1.15);
            assert_eq!(scaled.strengths[0][k], tr.strengths[0][k]);
        }
        let wild = vec![vec![-3.0; 256]; 3];
        let noisy = apply(&tr, &wild).unwrap();
        for (g, n) in tr.strengths.iter().flatten().zip(noisy.strengths.iter().flatten()) {
            if *g == 0.0 {
                assert!(*n == 0.0 && n.is_sign_positive());
            }
        }
        assert!(apply(&tr, &ones[..2]).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(NoiseGenerator::new(&spec(NoiseMode::Filtered, 0.1, 0.0), 256, 1.0).is_err());
        assert!(NoiseGenerator::new(&spec(NoiseMode::Dc, -0.1, 1.0), 256, 1.0).is_err());
        assert!(NoiseGenerator::new(&spec(NoiseMode::Dc, 0.1, 1.0), 100, 1.0).is_err());
    }
}
