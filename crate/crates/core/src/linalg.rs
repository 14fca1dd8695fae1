//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// `exp(-i * h * dt)` for Hermitian `h`, and the spectral norm of `h`.
pub fn hermitian_propagator(h: &CMatrix, dt: f64) -> (CMatrix, f64) {
    let eig = SymmetricEigen::new(h.clone());
    let norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * dt)),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, ph) in phases.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= ph;
        }
    }
    (scaled * v.adjoint(), norm)
}

/// `max |(U^dagger U - I)_{ij}|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

/// Projector onto the span of orthonormal columns.
pub fn projector(columns: &CMatrix) -> CMatrix {
    columns * columns.adjoint()
}

/// Rescales `v` by a unit phase so its largest-magnitude entry is real
/// positive; ties go to the lowest index.
pub fn fix_phase_largest(v: &mut CVector) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("nonzero vector has a pivot");
    let ph = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= ph;
    }
}

/// Rescales `m` by a unit phase so its first entry (column-major order)
/// with non-negligible magnitude is real positive.
pub fn fix_phase_first_nonzero(m: &mut CMatrix) {
    let Some(first) = m.iter().find(|z| z.norm() > 1e-12).copied() else {
        return;
    };
    let ph = first.conj() / first.norm();
    for z in m.iter_mut() {
        *z *= ph;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_of_diagonal_matrix() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE * 0.5, ONE * -0.5]));
        let (u, norm) = hermitian_propagator(&h, 2.0);
        assert!((norm - 0.5).abs() < 1e-15);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -1.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert!(unitarity_defect(&u) < 1e-14);
    }

    #[test]
    fn eigenvalues_sorted() {
        let h = CMatrix::from_fn(3, 3, |r, c| if r == c { ONE * (2.0 - r as f64) } else { ZERO });
        let e = hermitian_eigen(&h);
        assert_eq!(e.values, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn phase_conventions() {
        let mut v = CVector::from_vec(vec![Complex64::new(0.0, 0.6), Complex64::new(0.0, -0.8)]);
        fix_phase_largest(&mut v);
        assert!((v[1] - ONE * 0.8).norm() < 1e-15);
        let mut m = CMatrix::from_fn(2, 2, |r, c| if r == c { Complex64::new(0.0, 1.0) } else { ZERO });
        fix_phase_first_nonzero(&mut m);
        assert!((m[(0, 0)] - ONE).norm() < 1e-15);
    }
}
