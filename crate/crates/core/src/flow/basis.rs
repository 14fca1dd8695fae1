use super::{FlowError, StageHamiltonian};
use crate::linalg::{fix_phase_largest, hermitian_eigen, CMatrix, CVector};
use crate::pauli::{matrix_of, Pauli, PauliString, PauliSum};

const GROUND_TOL: f64 = 1e-9;
const LABEL_SEPARATION: f64 = 1e-6;

/// Orthonormal basis of a stage's ground space, ordered by the binary word
/// of the data qubits' computational labels (first data qubit most
/// significant). Each vector's largest-magnitude amplitude is real positive.
pub fn ground_basis(stage: &StageHamiltonian, data_qubits: &[usize]) -> Result<Vec<CVector>, FlowError> {
    let n = stage.n_qubits();
    let m = data_qubits.len();
    let expected = 1usize << m;
    let eig = hermitian_eigen(&stage.unit_hamiltonian()?);
    let min = eig.values[0];
    let found = eig.values.iter().take_while(|&&v| v - min <= GROUND_TOL).count();
    if found != expected {
        return Err(FlowError::GroundDimension { expected, found });
    }
    let ground = eig.vectors.columns(0, expected).into_owned();

    // Label operator: sum_k 2^(m-1-k) (1 - Z_k)/2 has eigenvalue equal to the
    // binary data word on computational states.
    let mut label = PauliSum::zero(n);
    for (k, &q) in data_qubits.iter().enumerate() {
        let w = (1usize << (m - 1 - k)) as f64;
        label.add_term(0.5 * w, &PauliString::identity(n));
        label.add_term(-0.5 * w, &PauliString::single(n, q, Pauli::Z));
    }
    let label_matrix = matrix_of(&label)?;
    let restricted: CMatrix = ground.adjoint() * &label_matrix * &ground;
    let label_eig = hermitian_eigen(&restricted);
    if label_eig
        .values
        .windows(2)
        .any(|w| w[1] - w[0] < LABEL_SEPARATION)
    {
        return Err(FlowError::DegenerateLabeling);
    }

    Ok((0..expected)
        .map(|j| {
            let mut v: CVector = &ground * label_eig.vectors.column(j);
            let norm = v.norm();
            v.unscale_mut(norm);
            fix_phase_largest(&mut v);
            v
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn stage(s: &str) -> StageHamiltonian {
        StageHamiltonian::single(s.parse().unwrap())
    }

    fn assert_vec(v: &CVector, expected: &[(usize, Complex64)]) {
        let mut full = vec![Complex64::new(0.0, 0.0); v.len()];
        for &(i, a) in expected {
            full[i] = a;
        }
        for (i, a) in full.iter().enumerate() {
            assert!((v[i] - a).norm() < 1e-12, "index {i}: {} vs {a}", v[i]);
        }
    }

    #[test]
    fn x_field_on_ancilla() {
        let b = ground_basis(&stage("IX"), &[0]).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert_vec(&b[0], &[(0, h), (1, h)]);
        assert_vec(&b[1], &[(2, h), (3, h)]);
    }

    #[test]
    fn zz_coupling() {
        let b = ground_basis(&stage("ZZ"), &[0]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_vec(&b[0], &[(0, one)]);
        assert_vec(&b[1], &[(3, one)]);
    }

    #[test]
    fn pinned_ancilla_with_two_data_qubits() {
        let b = ground_basis(&stage("IZI"), &[0, 2]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        // |000>, |001>, |100>, |101>
        for (v, idx) in b.iter().zip([0usize, 1, 4, 5]) {
            assert_vec(v, &[(idx, one)]);
        }
    }

    #[test]
    fn minus_y_ancilla_phase_convention() {
        let b = ground_basis(&stage("-IY"), &[0]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_vec(&b[0], &[(0, Complex64::new(h, 0.0)), (1, Complex64::new(0.0, -h))]);
        assert_vec(&b[1], &[(2, Complex64::new(h, 0.0)), (3, Complex64::new(0.0, -h))]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ground_basis(&stage("IX"), &[0, 1]),
            Err(FlowError::GroundDimension { expected: 4, found: 2 })
        ));
        // Z on the data qubit does not commute with an X1 field on it.
        assert!(matches!(ground_basis(&stage("XZ"), &[0]), Err(FlowError::DegenerateLabeling)));
    }
}
