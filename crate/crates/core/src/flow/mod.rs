//! Symbolic verification of adiabatic Hamiltonian sequences.
//!
//! A sequence is a list of stages; each stage is a set of mutually commuting
//! generators whose joint +1 eigenspace is the ground space. Logical
//! operators are carried from stage to stage by multiplying them with
//! generators of the stage that is currently on ("handoffs").

mod basis;
mod certificate;
mod search;
mod text;
mod track;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::linalg::CMatrix;
use crate::pauli::{matrix_of, Pauli, PauliError, PauliString, PauliSum};

pub use basis::ground_basis;
pub use certificate::{verify_certificate, CertificateReport, Claim};
pub use search::{search_sequences, SearchConstraints};
pub use text::{parse_sequence, render_sequence};
pub use track::track_clifford;
pub use validate::{validate_sequence, LegReport, ValidationReport, GAP_GRID_POINTS, MIN_GAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("stage has no generators")]
    EmptyStage,
    #[error("a sequence needs at least two stages, got {0}")]
    TooFewStages(usize),
    #[error("consecutive stages {0} and {1} are identical")]
    RepeatedStage(usize, usize),
    #[error("invalid qubit roles: {0}")]
    QubitRoles(String),
    #[error("stage {stage} generator {generator} is not a single unit-coefficient Pauli string")]
    NotClifford { stage: usize, generator: usize },
    #[error("stage is not canonical: {0}")]
    NotCanonical(String),
    #[error("no generator product restores commutation for logical {logical} on leg {leg}")]
    HandoffFailure { logical: String, leg: usize },
    #[error("logical {logical} cannot be confined to the output data qubits")]
    ReductionFailure { logical: String },
    #[error("imaginary phase while handing off logical {logical} at stage {stage}")]
    PhaseFailure { logical: String, stage: usize },
    #[error("ground space has dimension {found}, expected {expected}")]
    GroundDimension { expected: usize, found: usize },
    #[error("data-qubit Z labels do not distinguish the ground states")]
    DegenerateLabeling,
    #[error("logical transformation is not symplectic")]
    NonSymplectic,
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One stage `H_i`: generators sharing a single control envelope.
#[derive(Clone, Debug)]
pub struct StageHamiltonian {
    generators: Vec<PauliSum>,
    canonical: bool,
}

impl PartialEq for StageHamiltonian {
    fn eq(&self, other: &Self) -> bool {
        self.generators.len() == other.generators.len()
            && self.generators.iter().all(|g| other.generators.contains(g))
    }
}

impl StageHamiltonian {
    /// Unchecked stage; commutation and ground-space structure are left to
    /// [`validate_sequence`].
    pub fn new(generators: Vec<PauliSum>) -> Result<Self, FlowError> {
        let first = generators.first().ok_or(FlowError::EmptyStage)?;
        let n = first.n_qubits();
        if let Some(g) = generators.iter().find(|g| g.n_qubits() != n) {
            return Err(PauliError::DimensionMismatch(n, g.n_qubits()).into());
        }
        if generators.iter().any(PauliSum::is_zero) {
            return Err(FlowError::NotCanonical("zero generator".into()));
        }
        Ok(Self {
            generators,
            canonical: false,
        })
    }

    /// Stage whose generators are unit generators (pairwise anticommuting
    /// strings, unit coefficient norm) that mutually commute.
    pub fn canonical(generators: Vec<PauliSum>) -> Result<Self, FlowError> {
        let mut stage = Self::new(generators)?;
        stage.check_canonical()?;
        stage.canonical = true;
        Ok(stage)
    }

    pub fn from_strings(strings: &[PauliString]) -> Result<Self, FlowError> {
        Self::canonical(strings.iter().map(PauliSum::from_string).collect())
    }

    pub fn single(s: PauliString) -> Self {
        Self::from_strings(&[s]).expect("a single Pauli string is a canonical stage")
    }

    fn check_canonical(&self) -> Result<(), FlowError> {
        for (i, g) in self.generators.iter().enumerate() {
            let terms: Vec<PauliString> = g.terms().map(|(_, s)| s).collect();
            for a in 0..terms.len() {
                if terms[a].is_identity() {
                    return Err(FlowError::NotCanonical(format!("generator {i} has an identity term")));
                }
                for b in a + 1..terms.len() {
                    if terms[a].commutes(&terms[b])? {
                        return Err(FlowError::NotCanonical(format!(
                            "generator {i} has commuting terms {} and {}",
                            terms[a], terms[b]
                        )));
                    }
                }
            }
            if (g.coefficient_norm() - 1.0).abs() > 1e-12 {
                return Err(FlowError::NotCanonical(format!("generator {i} is not unit norm")));
            }
            for (j, h) in self.generators.iter().enumerate().skip(i + 1) {
                if !g.commutes(h)? {
                    return Err(FlowError::NotCanonical(format!("generators {i} and {j} do not commute")));
                }
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[PauliSum] {
        &self.generators
    }

    pub fn n_qubits(&self) -> usize {
        self.generators[0].n_qubits()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Sum of all generators (the stage operator at unit strength, up to
    /// the `-1/2` prefactor).
    pub fn generator_sum(&self) -> PauliSum {
        let mut sum = PauliSum::zero(self.n_qubits());
        for g in &self.generators {
            sum = sum.plus(g).expect("generators share a register");
        }
        sum
    }

    /// `-(1/2) * sum of generators` as a dense matrix.
    pub fn unit_hamiltonian(&self) -> Result<CMatrix, FlowError> {
        Ok(matrix_of(&self.generator_sum())? * num_complex::Complex64::new(-0.5, 0.0))
    }

    /// Generators as signed strings, when every generator is `±P`.
    pub fn clifford_generators(&self) -> Option<Vec<PauliString>> {
        self.generators.iter().map(PauliSum::as_signed_string).collect()
    }

    /// Qubits touched by any generator.
    pub fn support(&self) -> Vec<usize> {
        let mut touched = vec![false; self.n_qubits()];
        for g in &self.generators {
            for (_, s) in g.terms() {
                for q in s.support() {
                    touched[q] = true;
                }
            }
        }
        touched.iter().enumerate().filter(|(_, &t)| t).map(|(q, _)| q).collect()
    }
}

/// Ordered stages plus the qubits holding logical data at the start and end.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    pub name: String,
    n_qubits: usize,
    data_in: Vec<usize>,
    data_out: Vec<usize>,
    stages: Vec<StageHamiltonian>,
}

impl GateSequence {
    /// Qubit indices are 0-based.
    pub fn new(
        name: impl Into<String>,
        n_qubits: usize,
        data_in: Vec<usize>,
        data_out: Vec<usize>,
        stages: Vec<StageHamiltonian>,
    ) -> Result<Self, FlowError> {
        if stages.len() < 2 {
            return Err(FlowError::TooFewStages(stages.len()));
        }
        if let Some(s) = stages.iter().find(|s| s.n_qubits() != n_qubits) {
            return Err(PauliError::DimensionMismatch(n_qubits, s.n_qubits()).into());
        }
        check_roles(n_qubits, &data_in, "data_in")?;
        check_roles(n_qubits, &data_out, "data_out")?;
        if data_in.len() != data_out.len() {
            return Err(FlowError::QubitRoles("data_in and data_out differ in length".into()));
        }
        for i in 1..stages.len() {
            if stages[i] == stages[i - 1] {
                return Err(FlowError::RepeatedStage(i - 1, i));
            }
        }
        Ok(Self {
            name: name.into(),
            n_qubits,
            data_in,
            data_out,
            stages,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn data_in(&self) -> &[usize] {
        &self.data_in
    }

    pub fn data_out(&self) -> &[usize] {
        &self.data_out
    }

    pub fn n_data(&self) -> usize {
        self.data_in.len()
    }

    /// Dimension of the encoded subspace, `2^(#data)`.
    pub fn logical_dim(&self) -> usize {
        1 << self.data_in.len()
    }

    pub fn stages(&self) -> &[StageHamiltonian] {
        &self.stages
    }

    pub fn n_legs(&self) -> usize {
        self.stages.len() - 1
    }

    pub(crate) fn replace_stages(&self, stages: Vec<StageHamiltonian>) -> Result<Self, FlowError> {
        Self::new(self.name.clone(), self.n_qubits, self.data_in.clone(), self.data_out.clone(), stages)
    }
}

fn check_roles(n: usize, qubits: &[usize], what: &str) -> Result<(), FlowError> {
    if qubits.is_empty() {
        return Err(FlowError::QubitRoles(format!("{what} is empty")));
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(FlowError::QubitRoles(format!("{what} qubit {} out of range", q + 1)));
        }
        if qubits[..i].contains(&q) {
            return Err(FlowError::QubitRoles(format!("{what} repeats qubit {}", q + 1)));
        }
    }
    Ok(())
}

/// Images of the logical generators `X_k`, `Z_k`. Images are stored in the
/// compact logical register (letter `k` acts on `data_out[k]`); input `k`
/// lives on `data_in[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalTransformation {
    n_qubits: usize,
    data_in: Vec<usize>,
    data_out: Vec<usize>,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl LogicalTransformation {
    /// Builds from compact images (`m` letters each).
    pub fn new(
        n_qubits: usize,
        data_in: Vec<usize>,
        data_out: Vec<usize>,
        x_images: Vec<PauliString>,
        z_images: Vec<PauliString>,
    ) -> Result<Self, FlowError> {
        let m = data_in.len();
        if data_out.len() != m || x_images.len() != m || z_images.len() != m {
            return Err(FlowError::QubitRoles("image count does not match data qubits".into()));
        }
        if x_images.iter().chain(&z_images).any(|s| s.n_qubits() != m) {
            return Err(FlowError::QubitRoles("images must act on the logical register".into()));
        }
        Ok(Self {
            n_qubits,
            data_in,
            data_out,
            x_images,
            z_images,
        })
    }

    /// Builds from images given as full-register strings supported on `data_out`.
    pub fn from_physical(
        n_qubits: usize,
        data_in: Vec<usize>,
        data_out: Vec<usize>,
        x_images: &[PauliString],
        z_images: &[PauliString],
    ) -> Result<Self, FlowError> {
        let compact = |s: &PauliString| -> Result<PauliString, FlowError> {
            if s.support().iter().any(|q| !data_out.contains(q)) {
                return Err(FlowError::QubitRoles(format!("{s} acts outside the output data qubits")));
            }
            let letters = data_out.iter().map(|&q| s.letter(q)).collect();
            Ok(PauliString::new(letters, s.sign())?)
        };
        let xs = x_images.iter().map(compact).collect::<Result<Vec<_>, _>>()?;
        let zs = z_images.iter().map(compact).collect::<Result<Vec<_>, _>>()?;
        Self::new(n_qubits, data_in, data_out, xs, zs)
    }

    /// Convenience constructor from sparse text such as `"+X1X3"`.
    pub fn from_sparse(
        n_qubits: usize,
        data_in: Vec<usize>,
        data_out: Vec<usize>,
        x_images: &[&str],
        z_images: &[&str],
    ) -> Result<Self, FlowError> {
        let parse = |t: &&str| PauliString::parse_sparse(n_qubits, t);
        let xs = x_images.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        let zs = z_images.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        Self::from_physical(n_qubits, data_in, data_out, &xs, &zs)
    }

    pub fn identity(n_qubits: usize, data_in: Vec<usize>, data_out: Vec<usize>) -> Self {
        let m = data_in.len();
        let xs = (0..m).map(|k| PauliString::single(m, k, Pauli::X)).collect();
        let zs = (0..m).map(|k| PauliString::single(m, k, Pauli::Z)).collect();
        Self::new(n_qubits, data_in, data_out, xs, zs).expect("consistent identity")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_logical(&self) -> usize {
        self.data_in.len()
    }

    pub fn data_in(&self) -> &[usize] {
        &self.data_in
    }

    pub fn data_out(&self) -> &[usize] {
        &self.data_out
    }

    pub fn x_images(&self) -> &[PauliString] {
        &self.x_images
    }

    pub fn z_images(&self) -> &[PauliString] {
        &self.z_images
    }

    /// Full-register version of a compact output string.
    pub fn to_physical_output(&self, compact: &PauliString) -> PauliString {
        let ops: Vec<(usize, Pauli)> = self
            .data_out
            .iter()
            .enumerate()
            .map(|(k, &q)| (q, compact.letter(k)))
            .collect();
        PauliString::from_sparse(self.n_qubits, &ops)
            .expect("output qubits in range")
            .with_sign(compact.sign())
    }

    /// Image of an arbitrary signed logical Pauli (compact register).
    pub fn apply(&self, p: &PauliString) -> Result<PauliString, FlowError> {
        let m = self.n_logical();
        if p.n_qubits() != m {
            return Err(PauliError::DimensionMismatch(m, p.n_qubits()).into());
        }
        let mut acc = PauliString::identity(m).with_sign(p.sign());
        // Y = i X Z; the i factors combine with the product phase.
        let mut i_count = 0u8;
        for k in 0..m {
            let factors: &[&PauliString] = match p.letter(k) {
                Pauli::I => &[],
                Pauli::X => &[&self.x_images[k]],
                Pauli::Z => &[&self.z_images[k]],
                Pauli::Y => {
                    i_count += 1;
                    &[&self.x_images[k], &self.z_images[k]]
                }
            };
            for f in factors {
                let (phase, prod) = acc.multiply(f)?;
                acc = prod;
                i_count += match phase {
                    crate::pauli::Phase::One => 0,
                    crate::pauli::Phase::I => 1,
                    crate::pauli::Phase::MinusOne => 2,
                    crate::pauli::Phase::MinusI => 3,
                };
            }
        }
        match i_count % 4 {
            0 => Ok(acc),
            2 => Ok(acc.negated()),
            _ => Err(FlowError::NonSymplectic),
        }
    }

    /// Checks that images obey the Pauli commutation relations of the inputs.
    pub fn is_symplectic(&self) -> bool {
        let m = self.n_logical();
        for j in 0..m {
            for k in 0..m {
                let xx = self.x_images[j].commutes_unchecked(&self.x_images[k]);
                let zz = self.z_images[j].commutes_unchecked(&self.z_images[k]);
                let xz = self.x_images[j].commutes_unchecked(&self.z_images[k]);
                if !xx || !zz || xz == (j == k) {
                    return false;
                }
            }
        }
        self.x_images.iter().chain(&self.z_images).all(|s| !s.is_identity())
    }

    fn label_input(&self, k: usize, p: Pauli) -> String {
        format!("{}{}", p.as_char(), self.data_in[k] + 1)
    }

    /// Rendering used by the CLI, e.g. `X1 -> +X2, Z1 -> +Z2`.
    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        for k in 0..self.n_logical() {
            parts.push(format!(
                "{} -> {}",
                self.label_input(k, Pauli::X),
                self.to_physical_output(&self.x_images[k]).to_sparse_string()
            ));
            parts.push(format!(
                "{} -> {}",
                self.label_input(k, Pauli::Z),
                self.to_physical_output(&self.z_images[k]).to_sparse_string()
            ));
        }
        parts.join(", ")
    }
}

impl fmt::Display for LogicalTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn sequence_structure_checks() {
        let x2 = StageHamiltonian::single(ps("IX"));
        let zz = StageHamiltonian::single(ps("ZZ"));
        assert!(matches!(
            GateSequence::new("bad", 2, vec![0], vec![1], vec![x2.clone()]),
            Err(FlowError::TooFewStages(1))
        ));
        assert!(matches!(
            GateSequence::new("bad", 2, vec![0], vec![1], vec![x2.clone(), x2.clone()]),
            Err(FlowError::RepeatedStage(0, 1))
        ));
        assert!(GateSequence::new("bad", 2, vec![2], vec![1], vec![x2.clone(), zz.clone()]).is_err());
        assert!(GateSequence::new("ok", 2, vec![0], vec![1], vec![x2, zz]).is_ok());
    }

    #[test]
    fn canonical_stage_checks() {
        let c = 0.6;
        let s = 0.8;
        let ok = PauliSum::from_terms(2, &[(c, ps("IX")), (-s, ps("IY"))]).unwrap();
        assert!(StageHamiltonian::canonical(vec![ok]).is_ok());
        let not_unit = PauliSum::from_terms(2, &[(1.0, ps("IX")), (0.001, ps("IZ"))]).unwrap();
        assert!(StageHamiltonian::canonical(vec![not_unit.clone()]).is_err());
        assert!(StageHamiltonian::new(vec![not_unit]).is_ok());
        let anti = vec![PauliSum::from_string(&ps("XI")), PauliSum::from_string(&ps("ZI"))];
        assert!(StageHamiltonian::canonical(anti.clone()).is_err());
        assert!(StageHamiltonian::new(anti).is_ok());
        assert!(matches!(StageHamiltonian::new(vec![]), Err(FlowError::EmptyStage)));
    }

    #[test]
    fn stage_equality_ignores_generator_order() {
        let a = StageHamiltonian::from_strings(&[ps("XXII"), ps("ZZII")]).unwrap();
        let b = StageHamiltonian::from_strings(&[ps("ZZII"), ps("XXII")]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transformation_apply_and_symplectic() {
        // CNOT with control 1, target 3.
        let t = LogicalTransformation::from_sparse(3, vec![0, 2], vec![0, 2], &["+X1X3", "+X3"], &["+Z1", "+Z1Z3"])
            .unwrap();
        assert!(t.is_symplectic());
        assert_eq!(t.to_text(), "X1 -> +X1X3, Z1 -> +Z1, X3 -> +X3, Z3 -> +Z1Z3");
        // Y on control: Y1 = iX1Z1 -> i (X1X3)(Z1) = Y1X3.
        let y = t.apply(&ps("YI")).unwrap();
        assert_eq!(y, ps("YX"));
        let bad = LogicalTransformation::from_sparse(2, vec![0], vec![1], &["+X2"], &["+X2"]).unwrap();
        assert!(!bad.is_symplectic());
    }
}
