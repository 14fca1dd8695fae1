//! Gate error, leakage and closed-form reference curves.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::flow::{ground_basis, FlowError, GateSequence, LogicalTransformation};
use crate::library::Ideal;
use crate::linalg::{fix_phase_first_nonzero, CMatrix, CVector, ONE};
use crate::pauli::{string_matrix, Pauli, PauliString};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("basis dimension mismatch: {0}")]
    Dimension(String),
    #[error("logical transformation is not symplectic")]
    NonSymplectic,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Clone, Debug)]
pub struct GateErrorReport {
    pub error: f64,
    pub leakage: f64,
    /// `O[j, i] = <out_j| U |in_i>`.
    pub overlap: CMatrix,
}

/// `1 - |Tr(U_ideal^dag O)|^2 / d^2` and `1 - (1/d) sum |O_ji|^2`.
pub fn gate_error(
    u_sim: &CMatrix,
    in_basis: &CMatrix,
    out_basis: &CMatrix,
    u_ideal: &CMatrix,
) -> Result<GateErrorReport, MetricsError> {
    let d = in_basis.ncols();
    if out_basis.ncols() != d || u_ideal.shape() != (d, d) {
        return Err(MetricsError::Dimension(format!(
            "in {d}, out {}, ideal {:?}",
            out_basis.ncols(),
            u_ideal.shape()
        )));
    }
    if in_basis.nrows() != u_sim.ncols() || out_basis.nrows() != u_sim.nrows() {
        return Err(MetricsError::Dimension(format!(
            "bases have {} / {} rows, unitary is {:?}",
            in_basis.nrows(),
            out_basis.nrows(),
            u_sim.shape()
        )));
    }
    let overlap = out_basis.adjoint() * u_sim * in_basis;
    let tr = (u_ideal.adjoint() * &overlap).trace();
    let df = d as f64;
    let error = (1.0 - tr.norm_sqr() / (df * df)).clamp(0.0, 1.0);
    let leakage = (1.0 - overlap.iter().map(|z| z.norm_sqr()).sum::<f64>() / df).clamp(0.0, 1.0);
    Ok(GateErrorReport {
        error,
        leakage,
        overlap,
    })
}

/// Encoded input/output bases: ground states of the first stage labeled by
/// `data_in`, and of the last stage labeled by `data_out`.
#[derive(Clone, Debug)]
pub struct LogicalBases {
    pub input: CMatrix,
    pub output: CMatrix,
}

impl LogicalBases {
    pub fn of(seq: &GateSequence) -> Result<Self, MetricsError> {
        let stages = seq.stages();
        let input = columns(&ground_basis(&stages[0], seq.data_in())?);
        let output = columns(&ground_basis(stages.last().expect("two stages"), seq.data_out())?);
        Ok(Self { input, output })
    }
}

fn columns(vs: &[CVector]) -> CMatrix {
    CMatrix::from_columns(vs)
}

/// The unitary, up to phase, conjugating `X_k`, `Z_k` to their images.
/// Columns are `X'^w |v0>` with `|v0>` stabilized by every `Z'_k`.
pub fn ideal_unitary(t: &LogicalTransformation) -> Result<CMatrix, MetricsError> {
    if !t.is_symplectic() {
        return Err(MetricsError::NonSymplectic);
    }
    let m = t.n_logical();
    let d = 1usize << m;
    let mut proj = CMatrix::identity(d, d);
    for z in t.z_images() {
        proj = proj * (CMatrix::identity(d, d) + string_matrix(z)) * Complex64::new(0.5, 0.0);
    }
    let (best, _) = (0..d)
        .map(|c| (c, proj.column(c).norm()))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut v0: CVector = proj.column(best).into_owned();
    let norm = v0.norm();
    v0.unscale_mut(norm);
    let xs: Vec<CMatrix> = t.x_images().iter().map(string_matrix).collect();
    let mut u = CMatrix::zeros(d, d);
    for w in 0..d {
        let mut v = v0.clone();
        for (k, x) in xs.iter().enumerate() {
            if w & (1 << (m - 1 - k)) != 0 {
                v = x * v;
            }
        }
        u.set_column(w, &v);
    }
    fix_phase_first_nonzero(&mut u);
    Ok(u)
}

/// `exp(-i phi sigma / 2)` on one qubit.
pub fn rotation_unitary(axis: Pauli, phi: f64) -> CMatrix {
    let sigma = string_matrix(&PauliString::single(1, 0, axis));
    let mut u = CMatrix::identity(2, 2) * Complex64::new((phi / 2.0).cos(), 0.0)
        - sigma * Complex64::new(0.0, (phi / 2.0).sin());
    fix_phase_first_nonzero(&mut u);
    u
}

pub fn ideal_matrix(ideal: &Ideal) -> Result<CMatrix, MetricsError> {
    match ideal {
        Ideal::Clifford(t) => ideal_unitary(t),
        Ideal::Rotation { axis, sign, theta } => Ok(rotation_unitary(*axis, sign * theta)),
    }
}

/// Rosen-Zener suppression `sech^2(pi g r t_g)`.
pub fn rz_reference(g: f64, r: f64, t_g: f64) -> f64 {
    let x = PI * g * r * t_g;
    let s = 1.0 / x.cosh();
    s * s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicReferences {
    /// `1 - cos(pi (t_g/t_0 - 1) / 4)`.
    pub time_error: f64,
    /// `pi^2 sigma^2 / 16`.
    pub dc_error: f64,
    /// Exact trace error of a ZZ phase off by the same fraction:
    /// `sin^2(pi (t_g/t_0 - 1) / 4)`.
    pub time_error_exact: f64,
}

pub fn dynamic_references(t_g: f64, t_0: f64, sigma: f64) -> DynamicReferences {
    let x = PI * (t_g / t_0 - 1.0) / 4.0;
    DynamicReferences {
        time_error: 1.0 - x.cos(),
        dc_error: PI * PI * sigma * sigma / 16.0,
        time_error_exact: x.sin().powi(2),
    }
}

/// Unit matrix on `d` states.
pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d) * ONE
}
