use super::{FlowError, GateSequence, LogicalTransformation};
use crate::pauli::{Pauli, PauliString};

/// Product of the generators selected by the bits of `mask`; bit `j`
/// selects generator `j`. Generators within a stage commute, so the result
/// is Hermitian.
pub(crate) fn subset_product(gens: &[PauliString], mask: usize, n: usize) -> Result<PauliString, FlowError> {
    let mut acc = PauliString::identity(n);
    for (j, g) in gens.iter().enumerate() {
        if mask & (1 << j) != 0 {
            acc = acc.multiply_hermitian(g)?;
        }
    }
    Ok(acc)
}

fn commutes_with_all(p: &PauliString, gens: &[PauliString]) -> bool {
    gens.iter().all(|g| p.commutes_unchecked(g))
}

/// One handoff: if `rep` anticommutes with a generator of the next stage,
/// replace it by `rep * (subset product of current generators)`, trying
/// subsets in binary-counting order. `Ok(None)` means no subset works.
pub(crate) fn hand_off(
    rep: &PauliString,
    current: &[PauliString],
    next: &[PauliString],
) -> Result<Option<PauliString>, crate::pauli::PauliError> {
    if commutes_with_all(rep, next) {
        return Ok(Some(rep.clone()));
    }
    let n = rep.n_qubits();
    for mask in 1..(1usize << current.len()) {
        let Ok(prod) = subset_product(current, mask, n) else {
            continue;
        };
        let candidate = rep.multiply_hermitian(&prod)?;
        if commutes_with_all(&candidate, current) && commutes_with_all(&candidate, next) {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Multiplies `rep` by the first subset product of `gens` that confines it
/// to `allowed` qubits.
pub(crate) fn reduce_to(rep: &PauliString, gens: &[PauliString], allowed: &[usize]) -> Option<PauliString> {
    let n = rep.n_qubits();
    for mask in 0..(1usize << gens.len()) {
        let prod = subset_product(gens, mask, n).ok()?;
        let Ok(candidate) = rep.multiply_hermitian(&prod) else {
            continue;
        };
        if candidate.support().iter().all(|q| allowed.contains(q)) {
            return Some(candidate);
        }
    }
    None
}

pub(crate) fn clifford_stages(seq: &GateSequence) -> Result<Vec<Vec<PauliString>>, FlowError> {
    seq.stages()
        .iter()
        .enumerate()
        .map(|(si, stage)| {
            stage.clifford_generators().ok_or_else(|| {
                let generator = stage
                    .generators()
                    .iter()
                    .position(|g| g.as_signed_string().is_none())
                    .unwrap_or(0);
                FlowError::NotClifford { stage: si, generator }
            })
        })
        .collect()
}

/// Initial representatives `X_k`, `Z_k` on the input data qubits, with labels.
pub(crate) fn initial_reps(n: usize, data_in: &[usize]) -> Vec<(String, PauliString)> {
    let mut reps = Vec::new();
    for &q in data_in {
        for p in [Pauli::X, Pauli::Z] {
            reps.push((format!("{}{}", p.as_char(), q + 1), PauliString::single(n, q, p)));
        }
    }
    reps
}

/// Derives the logical gate of a sequence whose generators are all single
/// Pauli strings by tracking one representative per logical generator.
pub fn track_clifford(seq: &GateSequence) -> Result<LogicalTransformation, FlowError> {
    let stages = clifford_stages(seq)?;
    let n = seq.n_qubits();
    let mut reps = initial_reps(n, seq.data_in());

    for (label, rep) in &reps {
        if !commutes_with_all(rep, &stages[0]) {
            return Err(FlowError::HandoffFailure {
                logical: label.clone(),
                leg: 0,
            });
        }
    }

    for leg in 0..seq.n_legs() {
        for (label, rep) in reps.iter_mut() {
            match hand_off(rep, &stages[leg], &stages[leg + 1]) {
                Ok(Some(next)) => *rep = next,
                Ok(None) => {
                    return Err(FlowError::HandoffFailure {
                        logical: label.clone(),
                        leg: leg + 1,
                    })
                }
                Err(_) => {
                    return Err(FlowError::PhaseFailure {
                        logical: label.clone(),
                        stage: leg + 1,
                    })
                }
            }
        }
    }

    let last = stages.last().expect("at least two stages");
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for (i, (label, rep)) in reps.iter().enumerate() {
        let reduced = reduce_to(rep, last, seq.data_out()).ok_or_else(|| FlowError::ReductionFailure {
            logical: label.clone(),
        })?;
        if i % 2 == 0 {
            xs.push(reduced);
        } else {
            zs.push(reduced);
        }
    }
    LogicalTransformation::from_physical(n, seq.data_in().to_vec(), seq.data_out().to_vec(), &xs, &zs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::StageHamiltonian;

    fn seq(n: usize, data_in: Vec<usize>, data_out: Vec<usize>, stages: &[&str]) -> GateSequence {
        let stages = stages
            .iter()
            .map(|s| {
                let strings: Vec<PauliString> = s.split(',').map(|t| t.parse().unwrap()).collect();
                StageHamiltonian::from_strings(&strings).unwrap()
            })
            .collect();
        GateSequence::new("t", n, data_in, data_out, stages).unwrap()
    }

    #[test]
    fn move_gate() {
        let t = track_clifford(&seq(2, vec![0], vec![1], &["IX", "ZZ", "XI"])).unwrap();
        assert_eq!(t.to_text(), "X1 -> +X2, Z1 -> +Z2");
    }

    #[test]
    fn s_gate() {
        let t = track_clifford(&seq(2, vec![0], vec![0], &["IX", "ZZ", "-IY"])).unwrap();
        assert_eq!(t.to_text(), "X1 -> +Y1, Z1 -> +Z1");
    }

    #[test]
    fn hadamard_gate() {
        let t = track_clifford(&seq(2, vec![0], vec![1], &["IX", "XZ", "ZI"])).unwrap();
        assert_eq!(t.to_text(), "X1 -> +Z2, Z1 -> +X2");
    }

    #[test]
    fn one_ancilla_cnot() {
        let t = track_clifford(&seq(3, vec![0, 2], vec![0, 2], &["IXI", "ZZI", "IXX", "IZI"])).unwrap();
        assert_eq!(t.to_text(), "X1 -> +X1X3, Z1 -> +Z1, X3 -> +X3, Z3 -> +Z1Z3");
    }

    #[test]
    fn two_ancilla_cnot() {
        let t = track_clifford(&seq(
            4,
            vec![0, 1],
            vec![2, 3],
            &["IIXX,IIZZ", "ZIZI,IXIX", "XIII,IZII"],
        ))
        .unwrap();
        assert_eq!(t.to_text(), "X1 -> +X3X4, Z1 -> +Z3, X2 -> +X4, Z2 -> +Z3Z4");
    }

    #[test]
    fn handoff_failure_when_information_has_nowhere_to_go() {
        // X1 lands directly on the data qubit; Z1 has no partner to hand off to.
        let s = seq(2, vec![0], vec![0], &["IX", "XI"]);
        assert!(matches!(track_clifford(&s), Err(FlowError::HandoffFailure { leg: 1, .. })));
    }

    #[test]
    fn reduction_failure_when_output_qubit_is_wrong() {
        // MOVE sends the data to qubit 2, but qubit 1 is declared as output.
        let s = seq(2, vec![0], vec![0], &["IX", "ZZ", "XI"]);
        assert!(matches!(track_clifford(&s), Err(FlowError::ReductionFailure { .. })));
    }

    #[test]
    fn non_clifford_stage_rejected() {
        let rz = crate::pauli::PauliSum::from_terms(
            2,
            &[(0.6, "IX".parse().unwrap()), (-0.8, "IY".parse().unwrap())],
        )
        .unwrap();
        let stages = vec![
            StageHamiltonian::single("IX".parse().unwrap()),
            StageHamiltonian::single("ZZ".parse().unwrap()),
            StageHamiltonian::canonical(vec![rz]).unwrap(),
        ];
        let s = GateSequence::new("rz", 2, vec![0], vec![0], stages).unwrap();
        assert!(matches!(
            track_clifford(&s),
            Err(FlowError::NotClifford { stage: 2, generator: 0 })
        ));
    }

    #[test]
    fn deterministic_representatives() {
        let s = seq(3, vec![0, 2], vec![0, 2], &["IXI", "ZZI", "IXX", "IZI"]);
        let a = track_clifford(&s).unwrap();
        for _ in 0..5 {
            assert_eq!(track_clifford(&s).unwrap(), a);
        }
    }
}
