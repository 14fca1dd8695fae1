use rayon::prelude::*;

use super::track::{hand_off, initial_reps, reduce_to};
use super::{validate_sequence, FlowError, GateSequence, LogicalTransformation, StageHamiltonian};
use crate::pauli::{Pauli, PauliString, Sign};

const MAX_QUBITS: usize = 4;
const MAX_WEIGHT: usize = 2;
const MAX_STAGES: usize = 6;
const MAX_GENERATORS: usize = 2;

#[derive(Clone, Debug)]
pub struct SearchConstraints {
    pub n_qubits: usize,
    pub max_stages: usize,
    pub max_weight: usize,
    /// Also enumerate generators with a minus sign.
    pub allow_negative: bool,
    /// Stop after this many matches (in enumeration order).
    pub limit: Option<usize>,
}

impl SearchConstraints {
    pub fn new(n_qubits: usize, max_stages: usize, max_weight: usize) -> Self {
        Self {
            n_qubits,
            max_stages,
            max_weight,
            allow_negative: false,
            limit: None,
        }
    }
}

#[derive(Clone)]
struct Candidate {
    gens: Vec<PauliString>,
    support: Vec<usize>,
}

impl Candidate {
    fn new(gens: Vec<PauliString>) -> Self {
        let mut support: Vec<usize> = gens.iter().flat_map(|g| g.support()).collect();
        support.sort_unstable();
        support.dedup();
        Self { gens, support }
    }

    fn avoids(&self, qubits: &[usize]) -> bool {
        self.support.iter().all(|q| !qubits.contains(q))
    }

    fn same_as(&self, other: &Candidate) -> bool {
        self.gens.len() == other.gens.len() && self.gens.iter().all(|g| other.gens.contains(g))
    }

    /// At least one anticommuting pair; a fully commuting leg either shrinks
    /// the ground space or leaves it unchanged.
    fn couples_to(&self, other: &Candidate) -> bool {
        self.gens
            .iter()
            .any(|a| other.gens.iter().any(|b| !a.commutes_unchecked(b)))
    }
}

fn strings(n: usize, max_weight: usize) -> Vec<PauliString> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for code in 1..4usize.pow(n as u32) {
        let mut c = code;
        let mut word = vec![Pauli::I; n];
        for q in (0..n).rev() {
            word[q] = letters[c % 4];
            c /= 4;
        }
        let s = PauliString::new(word, Sign::Plus).expect("nonempty");
        if s.weight() <= max_weight {
            out.push(s);
        }
    }
    out
}

fn sign_variants(gens: &[PauliString], allow_negative: bool) -> Vec<Vec<PauliString>> {
    if !allow_negative {
        return vec![gens.to_vec()];
    }
    (0..1usize << gens.len())
        .map(|mask| {
            gens.iter()
                .enumerate()
                .map(|(j, g)| if mask & (1 << j) != 0 { g.clone().negated() } else { g.clone() })
                .collect()
        })
        .collect()
}

fn candidates(c: &SearchConstraints, k: usize) -> Vec<Candidate> {
    let pool = strings(c.n_qubits, c.max_weight);
    let mut out = Vec::new();
    match k {
        1 => {
            for a in &pool {
                for v in sign_variants(std::slice::from_ref(a), c.allow_negative) {
                    out.push(Candidate::new(v));
                }
            }
        }
        2 => {
            for (i, a) in pool.iter().enumerate() {
                for b in &pool[i + 1..] {
                    if a.commutes_unchecked(b) {
                        for v in sign_variants(&[a.clone(), b.clone()], c.allow_negative) {
                            out.push(Candidate::new(v));
                        }
                    }
                }
            }
        }
        _ => unreachable!("generator count checked by caller"),
    }
    out
}

struct Search<'a> {
    target: &'a LogicalTransformation,
    pool: Vec<Candidate>,
    max_stages: usize,
}

impl Search<'_> {
    fn matches(&self, reps: &[PauliString], last: &Candidate) -> bool {
        let data_out = self.target.data_out();
        for (i, rep) in reps.iter().enumerate() {
            let Some(reduced) = reduce_to(rep, &last.gens, data_out) else {
                return false;
            };
            let k = i / 2;
            let image = if i % 2 == 0 {
                &self.target.x_images()[k]
            } else {
                &self.target.z_images()[k]
            };
            if reduced != self.target.to_physical_output(image) {
                return false;
            }
        }
        true
    }

    fn walk(&self, path: &mut Vec<usize>, reps: &[PauliString], found: &mut Vec<Vec<usize>>) {
        let last = &self.pool[*path.last().expect("nonempty path")];
        if path.len() >= 2 && last.avoids(self.target.data_out()) && self.matches(reps, last) {
            found.push(path.clone());
        }
        if path.len() == self.max_stages {
            return;
        }
        for (ci, next) in self.pool.iter().enumerate() {
            if next.same_as(last) || !next.couples_to(last) {
                continue;
            }
            let handed: Option<Vec<PauliString>> = reps
                .iter()
                .map(|r| hand_off(r, &last.gens, &next.gens).ok().flatten())
                .collect();
            if let Some(handed) = handed {
                path.push(ci);
                self.walk(path, &handed, found);
                path.pop();
            }
        }
    }
}

/// Enumerates sequences of single-string or two-string stages that realise
/// `target`, ordered by length, then lexicographically by stage. Every
/// returned sequence passes [`validate_sequence`].
pub fn search_sequences(
    target: &LogicalTransformation,
    constraints: &SearchConstraints,
) -> Result<Vec<GateSequence>, FlowError> {
    let n = constraints.n_qubits;
    if n != target.n_qubits() {
        return Err(FlowError::QubitRoles("target and constraints disagree on qubit count".into()));
    }
    if n > MAX_QUBITS {
        return Err(FlowError::ResourceBound(format!("{n} qubits > {MAX_QUBITS}")));
    }
    if constraints.max_weight > MAX_WEIGHT {
        return Err(FlowError::ResourceBound(format!(
            "weight {} > {MAX_WEIGHT}",
            constraints.max_weight
        )));
    }
    if constraints.max_stages > MAX_STAGES {
        return Err(FlowError::ResourceBound(format!(
            "{} stages > {MAX_STAGES}",
            constraints.max_stages
        )));
    }
    let k = n - target.n_logical();
    if k == 0 || k > MAX_GENERATORS {
        return Err(FlowError::ResourceBound(format!("{k} generators per stage")));
    }

    let search = Search {
        target,
        pool: candidates(constraints, k),
        max_stages: constraints.max_stages,
    };
    let start: Vec<PauliString> = initial_reps(n, target.data_in()).into_iter().map(|(_, r)| r).collect();

    let mut paths: Vec<Vec<usize>> = (0..search.pool.len())
        .into_par_iter()
        .filter(|&ci| search.pool[ci].avoids(target.data_in()))
        .map(|ci| {
            let mut found = Vec::new();
            search.walk(&mut vec![ci], &start, &mut found);
            found
        })
        .flatten()
        .collect();
    paths.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut out = Vec::new();
    for path in paths {
        if constraints.limit.is_some_and(|l| out.len() >= l) {
            break;
        }
        let stages = path
            .iter()
            .map(|&ci| StageHamiltonian::from_strings(&search.pool[ci].gens))
            .collect::<Result<Vec<_>, _>>()?;
        let seq = GateSequence::new(
            format!("search-{}", out.len() + 1),
            n,
            target.data_in().to_vec(),
            target.data_out().to_vec(),
            stages,
        )?;
        if validate_sequence(&seq).passed() {
            out.push(seq);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::track_clifford;

    fn stages_of(seq: &GateSequence) -> Vec<Vec<String>> {
        seq.stages()
            .iter()
            .map(|s| s.clifford_generators().unwrap().iter().map(|g| g.letters_string()).collect())
            .collect()
    }

    fn contains(found: &[GateSequence], want: &[&[&str]]) -> bool {
        found.iter().any(|s| {
            let st = stages_of(s);
            st.len() == want.len()
                && st.iter().zip(want).all(|(a, b)| a.len() == b.len() && b.iter().all(|g| a.iter().any(|x| x == g)))
        })
    }

    #[test]
    fn finds_one_ancilla_cnot() {
        let target =
            LogicalTransformation::from_sparse(3, vec![0, 2], vec![0, 2], &["+X1X3", "+X3"], &["+Z1", "+Z1Z3"]).unwrap();
        let found = search_sequences(&target, &SearchConstraints::new(3, 4, 2)).unwrap();
        assert!(contains(&found, &[&["IXI"], &["ZZI"], &["IXX"], &["IZI"]]));
        for s in &found {
            assert_eq!(track_clifford(s).unwrap(), target);
        }
    }

    #[test]
    fn finds_two_ancilla_cnot() {
        let target =
            LogicalTransformation::from_sparse(4, vec![0, 1], vec![2, 3], &["+X3X4", "+X4"], &["+Z3", "+Z3Z4"]).unwrap();
        let found = search_sequences(&target, &SearchConstraints::new(4, 3, 2)).unwrap();
        assert!(contains(
            &found,
            &[&["IIXX", "IIZZ"], &["ZIZI", "IXIX"], &["XIII", "IZII"]]
        ));
    }

    #[test]
    fn finds_round_trip_move() {
        let target = LogicalTransformation::identity(2, vec![0], vec![0]);
        let found = search_sequences(&target, &SearchConstraints::new(2, 5, 2)).unwrap();
        assert!(contains(&found, &[&["IX"], &["ZZ"], &["XI"], &["ZZ"], &["IX"]]));
        assert!(found.iter().all(|s| s.stages().windows(2).all(|w| w[0] != w[1])));
    }

    #[test]
    fn two_stage_identity_never_repeats_a_stage() {
        let target = LogicalTransformation::identity(2, vec![0], vec![0]);
        let found = search_sequences(&target, &SearchConstraints::new(2, 2, 2)).unwrap();
        assert!(!contains(&found, &[&["IX"], &["IX"]]));
        assert!(found.iter().all(|s| s.stages().len() == 2));
    }

    #[test]
    fn deterministic_order() {
        let target = LogicalTransformation::identity(2, vec![0], vec![0]);
        let c = SearchConstraints::new(2, 4, 2);
        let a = search_sequences(&target, &c).unwrap();
        let b = search_sequences(&target, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resource_bounds() {
        let target = LogicalTransformation::identity(5, vec![0], vec![0]);
        assert!(matches!(
            search_sequences(&target, &SearchConstraints::new(5, 3, 2)),
            Err(FlowError::ResourceBound(_))
        ));
        let target = LogicalTransformation::identity(2, vec![0], vec![0]);
        assert!(matches!(
            search_sequences(&target, &SearchConstraints::new(2, 3, 3)),
            Err(FlowError::ResourceBound(_))
        ));
        assert!(matches!(
            search_sequences(&target, &SearchConstraints::new(2, 7, 2)),
            Err(FlowError::ResourceBound(_))
        ));
    }
}
