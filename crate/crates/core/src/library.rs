//! Named gate sequences and their ideal actions.

use thiserror::Error;

use crate::flow::{
    track_clifford, verify_certificate, Claim, FlowError, GateSequence, LogicalTransformation, StageHamiltonian,
};
use crate::pauli::{Pauli, PauliError, PauliString, PauliSum, Phase, Sign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibraryError {
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("gate {0} needs an angle")]
    MissingAngle(String),
    #[error("gate {0} takes no angle")]
    UnexpectedAngle(String),
    #[error("stage {index} out of range (1..={len})")]
    StageOutOfRange { index: usize, len: usize },
    #[error("generator {index} out of range for stage {stage}")]
    GeneratorOutOfRange { stage: usize, index: usize },
    #[error("invalid axis relabeling: {0}")]
    InvalidRelabel(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

pub const GATE_NAMES: [&str; 9] = ["move", "s", "rz", "rx", "ry", "hadamard", "cnot1", "cz1", "cnot2"];

/// What the sequence should do on the logical register.
#[derive(Clone, Debug, PartialEq)]
pub enum Ideal {
    Clifford(LogicalTransformation),
    /// `exp(-i * sign * theta * axis / 2)` on a single data qubit that stays put.
    Rotation { axis: Pauli, sign: f64, theta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub name: String,
    pub sequence: GateSequence,
    pub ideal: Ideal,
    pub theta: Option<f64>,
    /// Stages found by search rather than taken from a reference sequence.
    pub reconstructed: bool,
}

fn ps(s: &str) -> PauliString {
    s.parse().expect("registry strings are well formed")
}

fn clifford_sequence(name: &str, n: usize, data_in: Vec<usize>, data_out: Vec<usize>, stages: &[&[&str]]) -> GateSequence {
    let stages = stages
        .iter()
        .map(|gens| StageHamiltonian::from_strings(&gens.iter().map(|g| ps(g)).collect::<Vec<_>>()).expect("registry stage"))
        .collect();
    GateSequence::new(name, n, data_in, data_out, stages).expect("registry sequence")
}

fn clifford(
    name: &str,
    n: usize,
    data_in: Vec<usize>,
    data_out: Vec<usize>,
    stages: &[&[&str]],
    xs: &[&str],
    zs: &[&str],
) -> GateSpec {
    let ideal = LogicalTransformation::from_sparse(n, data_in.clone(), data_out.clone(), xs, zs).expect("registry ideal");
    GateSpec {
        name: name.to_string(),
        sequence: clifford_sequence(name, n, data_in, data_out, stages),
        ideal: Ideal::Clifford(ideal),
        theta: None,
        reconstructed: false,
    }
}

fn rz(theta: f64) -> GateSpec {
    let last = PauliSum::from_terms(2, &[(theta.cos(), ps("IX")), (-theta.sin(), ps("IY"))]).expect("two qubits");
    let stages = vec![
        StageHamiltonian::single(ps("IX")),
        StageHamiltonian::single(ps("ZZ")),
        StageHamiltonian::canonical(vec![last]).expect("unit rotation generator"),
    ];
    GateSpec {
        name: "rz".into(),
        sequence: GateSequence::new("rz", 2, vec![0], vec![0], stages).expect("rz sequence"),
        ideal: Ideal::Rotation {
            axis: Pauli::Z,
            sign: 1.0,
            theta,
        },
        theta: Some(theta),
        reconstructed: false,
    }
}

pub fn get_gate(name: &str, theta: Option<f64>) -> Result<GateSpec, LibraryError> {
    let rotation = matches!(name, "rz" | "rx" | "ry");
    if !GATE_NAMES.contains(&name) {
        return Err(LibraryError::UnknownGate(name.to_string()));
    }
    if rotation && theta.is_none() {
        return Err(LibraryError::MissingAngle(name.to_string()));
    }
    if !rotation && theta.is_some() {
        return Err(LibraryError::UnexpectedAngle(name.to_string()));
    }
    let spec = match name {
        "move" => clifford("move", 2, vec![0], vec![1], &[&["IX"], &["ZZ"], &["XI"]], &["+X2"], &["+Z2"]),
        "s" => clifford("s", 2, vec![0], vec![0], &[&["IX"], &["ZZ"], &["-IY"]], &["+Y1"], &["+Z1"]),
        "hadamard" => clifford("hadamard", 2, vec![0], vec![1], &[&["IX"], &["XZ"], &["ZI"]], &["+Z2"], &["+X2"]),
        "cnot1" => clifford(
            "cnot1",
            3,
            vec![0, 2],
            vec![0, 2],
            &[&["IXI"], &["ZZI"], &["IXX"], &["IZI"]],
            &["+X1X3", "+X3"],
            &["+Z1", "+Z1Z3"],
        ),
        "cz1" => clifford(
            "cz1",
            3,
            vec![0, 2],
            vec![0, 2],
            &[&["IXI"], &["ZZI"], &["IXZ"], &["IZI"]],
            &["+X1Z3", "+Z1X3"],
            &["+Z1", "+Z3"],
        ),
        "cnot2" => {
            let mut g = clifford(
                "cnot2",
                4,
                vec![0, 1],
                vec![2, 3],
                &[&["IIXX", "IIZZ"], &["ZIZI", "IXIX"], &["XIII", "IZII"]],
                &["+X3X4", "+X4"],
                &["+Z3", "+Z3Z4"],
            );
            g.reconstructed = true;
            g
        }
        "rz" => rz(theta.expect("checked")),
        "rx" => {
            let mut g = permute_axes(&rz(theta.expect("checked")), &[AxisRelabel::swap_xz(), AxisRelabel::identity()])?;
            g.name = "rx".into();
            g.sequence.name = "rx".into();
            g
        }
        "ry" => {
            let mut g = permute_axes(&rz(theta.expect("checked")), &[AxisRelabel::z_to_y(), AxisRelabel::identity()])?;
            g.name = "ry".into();
            g.sequence.name = "ry".into();
            g
        }
        _ => unreachable!(),
    };
    Ok(spec)
}

/// Signed single-qubit axis permutation given by the images of X and Z; the
/// image of Y follows from `Y = iXZ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRelabel {
    x: (Sign, Pauli),
    z: (Sign, Pauli),
}

impl AxisRelabel {
    pub fn new(x: (Sign, Pauli), z: (Sign, Pauli)) -> Result<Self, LibraryError> {
        if x.1 == Pauli::I || z.1 == Pauli::I || x.1 == z.1 {
            return Err(LibraryError::InvalidRelabel(format!("X -> {:?}, Z -> {:?}", x.1, z.1)));
        }
        Ok(Self { x, z })
    }

    pub fn identity() -> Self {
        Self {
            x: (Sign::Plus, Pauli::X),
            z: (Sign::Plus, Pauli::Z),
        }
    }

    /// X <-> Z, Y -> -Y.
    pub fn swap_xz() -> Self {
        Self {
            x: (Sign::Plus, Pauli::Z),
            z: (Sign::Plus, Pauli::X),
        }
    }

    /// X -> -X, Z -> Y, Y -> Z.
    pub fn z_to_y() -> Self {
        Self {
            x: (Sign::Minus, Pauli::X),
            z: (Sign::Plus, Pauli::Y),
        }
    }

    pub fn map(&self, p: Pauli) -> (Sign, Pauli) {
        match p {
            Pauli::I => (Sign::Plus, Pauli::I),
            Pauli::X => self.x,
            Pauli::Z => self.z,
            Pauli::Y => {
                // Y = i X Z, so Y' = i (sx X')(sz Z').
                let (phase, letter) = self.x.1.product(self.z.1);
                let total = Phase::I.times(phase);
                let s = if total.real().expect("distinct axes give a real product") > 0.0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                let sign = [s, self.x.0, self.z.0]
                    .iter()
                    .fold(Sign::Plus, |acc, &x| if x == Sign::Minus { acc.flip() } else { acc });
                (sign, letter)
            }
        }
    }

    /// The letter mapped onto `p`, with the sign of that mapping.
    fn preimage(&self, p: Pauli) -> (Sign, Pauli) {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .map(|q| (self.map(q), q))
            .find(|((_, img), _)| *img == p)
            .map(|((s, _), q)| (s, q))
            .expect("relabeling is a bijection")
    }
}

fn relabel_string(s: &PauliString, relabel: &[AxisRelabel], qubits: &[usize]) -> PauliString {
    let mut sign = s.sign();
    let mut letters = s.letters().to_vec();
    for (k, &q) in qubits.iter().enumerate() {
        let (sg, l) = relabel[q].map(letters[k]);
        letters[k] = l;
        if sg == Sign::Minus {
            sign = sign.flip();
        }
    }
    PauliString::new(letters, sign).expect("nonempty")
}

fn relabel_sum(sum: &PauliSum, relabel: &[AxisRelabel]) -> PauliSum {
    let all: Vec<usize> = (0..sum.n_qubits()).collect();
    let mut out = PauliSum::zero(sum.n_qubits());
    for (c, s) in sum.terms() {
        out.add_term(c, &relabel_string(&s, relabel, &all));
    }
    out
}

/// Relabels Pauli axes qubit by qubit (`relabel[q]` acts on qubit `q`),
/// conjugating the sequence and its ideal by the same single-qubit Cliffords.
pub fn permute_axes(spec: &GateSpec, relabel: &[AxisRelabel]) -> Result<GateSpec, LibraryError> {
    let seq = &spec.sequence;
    let n = seq.n_qubits();
    if relabel.len() != n {
        return Err(LibraryError::InvalidRelabel(format!("{} relabelings for {n} qubits", relabel.len())));
    }
    let stages = seq
        .stages()
        .iter()
        .map(|stage| {
            let gens: Vec<PauliSum> = stage.generators().iter().map(|g| relabel_sum(g, relabel)).collect();
            if stage.is_canonical() {
                StageHamiltonian::canonical(gens)
            } else {
                StageHamiltonian::new(gens)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sequence = GateSequence::new(seq.name.clone(), n, seq.data_in().to_vec(), seq.data_out().to_vec(), stages)?;

    let ideal = match &spec.ideal {
        Ideal::Clifford(t) => {
            let m = t.n_logical();
            // New map: P -> V T(V^dag P V) V^dag, with input letters relabeled on
            // data_in qubits and output letters on data_out qubits.
            let image_of = |k: usize, p: Pauli| -> Result<PauliString, LibraryError> {
                let (s, q) = relabel[t.data_in()[k]].preimage(p);
                let input = PauliString::single(m, k, q).with_sign(s);
                let mapped = t.apply(&input)?;
                Ok(relabel_string(&mapped, relabel, t.data_out()))
            };
            let xs = (0..m).map(|k| image_of(k, Pauli::X)).collect::<Result<Vec<_>, _>>()?;
            let zs = (0..m).map(|k| image_of(k, Pauli::Z)).collect::<Result<Vec<_>, _>>()?;
            Ideal::Clifford(LogicalTransformation::new(n, t.data_in().to_vec(), t.data_out().to_vec(), xs, zs)?)
        }
        Ideal::Rotation { axis, sign, theta } => {
            let q = seq.data_in()[0];
            if seq.data_out()[0] != q {
                return Err(LibraryError::InvalidRelabel("rotation data qubit moves".into()));
            }
            let (s, a) = relabel[q].map(*axis);
            Ideal::Rotation {
                axis: a,
                sign: sign * s.value(),
                theta: *theta,
            }
        }
    };
    Ok(GateSpec {
        name: spec.name.clone(),
        sequence,
        ideal,
        theta: spec.theta,
        reconstructed: spec.reconstructed,
    })
}

/// Adds `epsilon * extra` to generator 0 of stage `stage` (1-based).
pub fn perturb_stage(spec: &GateSpec, stage: usize, extra: &PauliString, epsilon: f64) -> Result<GateSpec, LibraryError> {
    perturb_generator(spec, stage, 0, extra, epsilon)
}

/// Adds `epsilon * extra` to one generator of stage `stage` (1-based). The
/// result is no longer flagged canonical.
pub fn perturb_generator(
    spec: &GateSpec,
    stage: usize,
    generator: usize,
    extra: &PauliString,
    epsilon: f64,
) -> Result<GateSpec, LibraryError> {
    let seq = &spec.sequence;
    let len = seq.stages().len();
    if stage == 0 || stage > len {
        return Err(LibraryError::StageOutOfRange { index: stage, len });
    }
    if extra.n_qubits() != seq.n_qubits() {
        return Err(PauliError::DimensionMismatch(seq.n_qubits(), extra.n_qubits()).into());
    }
    let target = &seq.stages()[stage - 1];
    if generator >= target.generators().len() {
        return Err(LibraryError::GeneratorOutOfRange { stage, index: generator });
    }
    if epsilon == 0.0 {
        return Ok(spec.clone());
    }
    let mut gens = target.generators().to_vec();
    gens[generator].add_term(epsilon, extra);
    let mut stages = seq.stages().to_vec();
    stages[stage - 1] = StageHamiltonian::new(gens)?;
    Ok(GateSpec {
        sequence: seq.replace_stages(stages)?,
        ..spec.clone()
    })
}

/// `U^dag P U` for `U = exp(-i phi A / 2)`, as a real Pauli sum.
fn rotate_back(p: &PauliString, axis: &PauliString, phi: f64) -> PauliSum {
    if p.commutes_unchecked(axis) {
        return PauliSum::from_string(p);
    }
    // exp(i phi A/2) P exp(-i phi A/2) = (cos phi + i sin phi A) P.
    let (phase, ap) = axis.multiply(p).expect("same register");
    let i_phase = Phase::I.times(phase).real().expect("anticommuting product is imaginary");
    let mut out = PauliSum::zero(p.n_qubits());
    out.add_term(phi.cos(), p);
    out.add_term(i_phase * phi.sin(), &ap);
    out
}

impl GateSpec {
    pub fn n_qubits(&self) -> usize {
        self.sequence.n_qubits()
    }

    /// Claims `U^dag P U -> P` for `P` in {X, Z} on the data qubit.
    pub fn rotation_claims(&self) -> Option<Vec<Claim>> {
        let Ideal::Rotation { axis, sign, theta } = self.ideal else {
            return None;
        };
        let n = self.n_qubits();
        let q = self.sequence.data_in()[0];
        let a = PauliString::single(n, q, axis);
        Some(
            [Pauli::X, Pauli::Z]
                .into_iter()
                .map(|p| {
                    let out = PauliString::single(n, q, p);
                    Claim::new(rotate_back(&out, &a, sign * theta), PauliSum::from_string(&out))
                })
                .collect(),
        )
    }

    /// Confirms that the sequence realises the ideal: exact tracking for
    /// Clifford gates, the rotation certificate otherwise.
    pub fn check(&self) -> Result<(), String> {
        match &self.ideal {
            Ideal::Clifford(t) => {
                let got = track_clifford(&self.sequence).map_err(|e| e.to_string())?;
                if &got == t {
                    Ok(())
                } else {
                    Err(format!("tracked {got}, expected {t}"))
                }
            }
            Ideal::Rotation { .. } => {
                let report = verify_certificate(&self.sequence, &self.rotation_claims().expect("rotation"));
                if report.passed {
                    Ok(())
                } else {
                    Err(report.trace.join("; "))
                }
            }
        }
    }

    /// One-line description: name, qubits, stages, data roles.
    pub fn summary(&self) -> String {
        let roles = |qs: &[usize]| qs.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(",");
        let mut line = format!(
            "{:<9} qubits={} stages={} data_in={} data_out={}",
            self.name,
            self.n_qubits(),
            self.sequence.stages().len(),
            roles(self.sequence.data_in()),
            roles(self.sequence.data_out())
        );
        if self.theta.is_some() {
            line.push_str(" (angle)");
        }
        if self.reconstructed {
            line.push_str(" (reconstructed)");
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::validate_sequence;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn all_clifford() -> Vec<GateSpec> {
        ["move", "s", "hadamard", "cnot1", "cz1", "cnot2"]
            .iter()
            .map(|n| get_gate(n, None).unwrap())
            .collect()
    }

    #[test]
    fn clifford_registry_is_consistent() {
        for g in all_clifford() {
            assert!(validate_sequence(&g.sequence).passed(), "{}", g.name);
            g.check().unwrap_or_else(|e| panic!("{}: {e}", g.name));
        }
    }

    #[test]
    fn rotations_verify() {
        for name in ["rz", "rx", "ry"] {
            for k in 0..8 {
                let theta = 2.0 * PI * (k as f64 + 0.5) / 8.0;
                let g = get_gate(name, Some(theta)).unwrap();
                assert!(validate_sequence(&g.sequence).passed());
                g.check().unwrap_or_else(|e| panic!("{name}({theta}): {e}"));
            }
        }
    }

    #[test]
    fn s_is_quarter_rz() {
        let s = get_gate("s", None).unwrap();
        let r = get_gate("rz", Some(FRAC_PI_2)).unwrap();
        assert_eq!(s.sequence.stages(), r.sequence.stages());
    }

    #[test]
    fn rz_zero_ends_on_x2() {
        let r = get_gate("rz", Some(0.0)).unwrap();
        assert_eq!(r.sequence.stages()[2], StageHamiltonian::single(ps("IX")));
    }

    #[test]
    fn rx_ry_structure() {
        let rx = get_gate("rx", Some(0.3)).unwrap();
        assert_eq!(rx.sequence.stages()[1], StageHamiltonian::single(ps("XZ")));
        assert_eq!(rx.ideal, Ideal::Rotation { axis: Pauli::X, sign: 1.0, theta: 0.3 });
        let ry = get_gate("ry", Some(0.3)).unwrap();
        assert_eq!(ry.sequence.stages()[1], StageHamiltonian::single(ps("YZ")));
        assert_eq!(ry.ideal, Ideal::Rotation { axis: Pauli::Y, sign: 1.0, theta: 0.3 });
    }

    #[test]
    fn cz_from_cnot_by_relabeling_target() {
        let cnot = get_gate("cnot1", None).unwrap();
        let relabel = [AxisRelabel::identity(), AxisRelabel::identity(), AxisRelabel::swap_xz()];
        let cz = permute_axes(&cnot, &relabel).unwrap();
        let reg = get_gate("cz1", None).unwrap();
        assert_eq!(cz.sequence.stages(), reg.sequence.stages());
        assert_eq!(cz.ideal, reg.ideal);
        let Ideal::Clifford(t) = &reg.ideal else { panic!() };
        assert_eq!(t.to_text(), "X1 -> +X1Z3, Z1 -> +Z1, X3 -> +Z1X3, Z3 -> +Z3");
    }

    #[test]
    fn identity_relabel_is_noop() {
        for g in all_clifford() {
            let id = vec![AxisRelabel::identity(); g.n_qubits()];
            assert_eq!(permute_axes(&g, &id).unwrap(), g);
        }
    }

    #[test]
    fn relabel_y_images() {
        assert_eq!(AxisRelabel::identity().map(Pauli::Y), (Sign::Plus, Pauli::Y));
        assert_eq!(AxisRelabel::swap_xz().map(Pauli::Y), (Sign::Minus, Pauli::Y));
        assert_eq!(AxisRelabel::z_to_y().map(Pauli::Y), (Sign::Plus, Pauli::Z));
        assert!(AxisRelabel::new((Sign::Plus, Pauli::X), (Sign::Plus, Pauli::X)).is_err());
    }

    #[test]
    fn perturbations() {
        let cnot = get_gate("cnot1", None).unwrap();
        let p = perturb_stage(&cnot, 1, &ps("IZI"), 1e-3).unwrap();
        let want = PauliSum::from_terms(3, &[(1.0, ps("IXI")), (1e-3, ps("IZI"))]).unwrap();
        assert_eq!(p.sequence.stages()[0].generators(), &[want]);
        assert!(!p.sequence.stages()[0].is_canonical());
        let p = perturb_stage(&cnot, 3, &ps("IYY"), 1e-4).unwrap();
        let want = PauliSum::from_terms(3, &[(1.0, ps("IXX")), (1e-4, ps("IYY"))]).unwrap();
        assert_eq!(p.sequence.stages()[2].generators(), &[want]);
        assert_eq!(perturb_stage(&cnot, 2, &ps("IZI"), 0.0).unwrap(), cnot);
        assert!(matches!(
            perturb_stage(&cnot, 5, &ps("IZI"), 1e-3),
            Err(LibraryError::StageOutOfRange { index: 5, len: 4 })
        ));
        assert!(perturb_stage(&cnot, 1, &ps("IZ"), 1e-3).is_err());
    }

    #[test]
    fn name_and_angle_errors() {
        assert!(matches!(get_gate("toffoli", None), Err(LibraryError::UnknownGate(_))));
        assert!(matches!(get_gate("rz", None), Err(LibraryError::MissingAngle(_))));
        assert!(matches!(get_gate("move", Some(1.0)), Err(LibraryError::UnexpectedAngle(_))));
    }

    #[test]
    fn symplectic_images() {
        for g in all_clifford() {
            let Ideal::Clifford(t) = &g.ideal else { panic!() };
            assert!(t.is_symplectic(), "{}", g.name);
        }
    }
}
