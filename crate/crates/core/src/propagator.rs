//! Time-ordered evolution under the sampled stage strengths.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::flow::GateSequence;
use crate::linalg::{hermitian_propagator, unitarity_defect, CMatrix};
use crate::pauli::{matrix_of, PauliString, SparsePauli};
use crate::schedule::ControlTrace;

/// Largest accepted `dt * ||H||` per step.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;
pub const MAX_QUBITS: usize = 4;
const MAX_DOUBLINGS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("{0} qubits exceeds the dense-propagation limit of {MAX_QUBITS}")]
    TooLarge(usize),
    #[error("trace has {trace} stages, sequence has {sequence}")]
    StageMismatch { trace: usize, sequence: usize },
    #[error("trace needs at least two samples")]
    TooFewSamples,
    #[error("grid too coarse: dt*||H|| = {phase:.3} at step {step}")]
    GridTooCoarse { step: usize, phase: f64 },
    #[error("no convergence after {MAX_DOUBLINGS} doublings (last change {change:.3e})")]
    NotConverged { change: f64 },
    #[error("stage matrix: {0}")]
    Matrix(String),
}

/// How strengths map to angular frequency in `H_i = -(omega * g_i / 2) P_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Units {
    /// `omega = g`: strengths are angular frequencies.
    Angular,
    /// `omega = 2 pi g`: strengths are ordinary frequencies (GHz with ns).
    Cycles,
}

impl Units {
    pub fn omega(self) -> f64 {
        match self {
            Units::Angular => 1.0,
            Units::Cycles => 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub unitary: CMatrix,
    pub steps: usize,
    pub unitarity_defect: f64,
}

/// Precomputed stage operators for repeated evolutions of one sequence.
pub struct Propagator {
    dim: usize,
    units: Units,
    /// Row tables of every distinct string: `(P U)[r] = phase * U[src]`.
    terms: Vec<Vec<(usize, Complex64)>>,
    anticommute: Vec<Vec<bool>>,
    /// Per stage: (term index, coefficient) of its generator sum.
    stage_terms: Vec<Vec<(usize, f64)>>,
    stage_matrices: Vec<CMatrix>,
    dense_only: bool,
}

impl Propagator {
    pub fn new(seq: &GateSequence, units: Units) -> Result<Self, PropagatorError> {
        let n = seq.n_qubits();
        if n > MAX_QUBITS {
            return Err(PropagatorError::TooLarge(n));
        }
        let dim = 1usize << n;
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut strings: Vec<PauliString> = Vec::new();
        let mut stage_terms = Vec::new();
        let mut stage_matrices = Vec::new();
        for stage in seq.stages() {
            let sum = stage.generator_sum();
            let mut list = Vec::new();
            for (c, s) in sum.terms() {
                let id = *index.entry(s.letters_string()).or_insert_with(|| {
                    strings.push(s.clone());
                    strings.len() - 1
                });
                list.push((id, c));
            }
            stage_terms.push(list);
            stage_matrices.push(matrix_of(&sum).map_err(|e| PropagatorError::Matrix(e.to_string()))?);
        }
        let anticommute = strings
            .iter()
            .map(|a| strings.iter().map(|b| !a.commutes(b).expect("same register")).collect())
            .collect();
        let terms = strings
            .iter()
            .map(|s| SparsePauli::new(s).row_table(dim))
            .collect();
        Ok(Self {
            dim,
            units,
            terms,
            anticommute,
            stage_terms,
            stage_matrices,
            dense_only: false,
        })
    }

    /// Disables the anticommuting-sum shortcut (for cross-checks).
    pub fn dense_only(mut self) -> Self {
        self.dense_only = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_stages(&self) -> usize {
        self.stage_terms.len()
    }

    fn apply_anticommuting(&self, u: &CMatrix, active: &[(usize, f64)], dt: f64) -> (CMatrix, f64) {
        let r = active.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
        let (s, c) = (r * dt).sin_cos();
        let mut out = u * Complex64::new(c, 0.0);
        for &(id, a) in active {
            let w = Complex64::new(0.0, -s * a / r);
            let rows = &self.terms[id];
            for col in 0..self.dim {
                for (row, &(src, ph)) in rows.iter().enumerate() {
                    out[(row, col)] += w * ph * u[(src, col)];
                }
            }
        }
        (out, r)
    }

    /// Midpoint-rule product of exact step exponentials, in time order.
    pub fn evolve(&self, trace: &ControlTrace) -> Result<EvolutionResult, PropagatorError> {
        if trace.n_stages() != self.n_stages() {
            return Err(PropagatorError::StageMismatch {
                trace: trace.n_stages(),
                sequence: self.n_stages(),
            });
        }
        if trace.n_samples() < 2 {
            return Err(PropagatorError::TooFewSamples);
        }
        let omega = self.units.omega();
        let mut u = CMatrix::identity(self.dim, self.dim);
        let mut coeffs = vec![0.0f64; self.terms.len()];
        let mut active: Vec<(usize, f64)> = Vec::new();
        let steps = trace.n_samples() - 1;
        for k in 0..steps {
            let dt = trace.times[k + 1] - trace.times[k];
            let mids: Vec<f64> = trace
                .strengths
                .iter()
                .map(|g| 0.5 * (g[k] + g[k + 1]))
                .collect();
            if mids.iter().all(|&g| g == 0.0) {
                continue;
            }
            coeffs.iter_mut().for_each(|c| *c = 0.0);
            for (i, &g) in mids.iter().enumerate() {
                if g != 0.0 {
                    for &(id, c) in &self.stage_terms[i] {
                        coeffs[id] += -0.5 * omega * g * c;
                    }
                }
            }
            active.clear();
            active.extend(coeffs.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(id, &a)| (id, a)));
            let fast = !self.dense_only
                && active
                    .iter()
                    .enumerate()
                    .all(|(x, &(a, _))| active[x + 1..].iter().all(|&(b, _)| self.anticommute[a][b]));
            let (next, norm) = if fast {
                self.apply_anticommuting(&u, &active, dt)
            } else {
                let mut h = CMatrix::zeros(self.dim, self.dim);
                for (i, &g) in mids.iter().enumerate() {
                    if g != 0.0 {
                        h += &self.stage_matrices[i] * Complex64::new(-0.5 * omega * g, 0.0);
                    }
                }
                let (e, norm) = hermitian_propagator(&h, dt);
                (e * &u, norm)
            };
            let phase = norm * dt;
            if phase > MAX_PHASE_PER_STEP {
                return Err(PropagatorError::GridTooCoarse { step: k, phase });
            }
            u = next;
        }
        let defect = unitarity_defect(&u);
        Ok(EvolutionResult {
            unitary: u,
            steps,
            unitarity_defect: defect,
        })
    }
}

pub fn evolve(seq: &GateSequence, trace: &ControlTrace, units: Units) -> Result<EvolutionResult, PropagatorError> {
    Propagator::new(seq, units)?.evolve(trace)
}

/// Inserts the midpoint between every pair of samples (linear interpolation).
pub fn refine(trace: &ControlTrace) -> ControlTrace {
    let n = trace.n_samples();
    let mut times = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        times.push(trace.times[k]);
        if k + 1 < n {
            times.push(0.5 * (trace.times[k] + trace.times[k + 1]));
        }
    }
    let strengths = trace
        .strengths
        .iter()
        .map(|g| {
            let mut out = Vec::with_capacity(2 * n - 1);
            for k in 0..n {
                out.push(g[k]);
                if k + 1 < n {
                    out.push(0.5 * (g[k] + g[k + 1]));
                }
            }
            out
        })
        .collect();
    ControlTrace {
        times,
        strengths,
        warnings: trace.warnings.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct Converged {
    pub result: EvolutionResult,
    pub samples: usize,
    pub metric: f64,
    pub change: f64,
    pub doublings: usize,
}

/// Refines the grid until `metric(U)` changes by less than `tol`.
pub fn converge(
    seq: &GateSequence,
    trace: &ControlTrace,
    units: Units,
    tol: f64,
    metric: impl Fn(&CMatrix) -> f64,
) -> Result<Converged, PropagatorError> {
    let prop = Propagator::new(seq, units)?;
    let mut current = trace.clone();
    let mut value = metric(&prop.evolve(&current)?.unitary);
    let mut change = f64::INFINITY;
    for doublings in 1..=MAX_DOUBLINGS {
        current = refine(&current);
        let result = prop.evolve(&current)?;
        let next = metric(&result.unitary);
        change = (next - value).abs();
        if change < tol {
            return Ok(Converged {
                result,
                samples: current.n_samples(),
                metric: next,
                change,
                doublings,
            });
        }
        value = next;
    }
    Err(PropagatorError::NotConverged { change })
}
