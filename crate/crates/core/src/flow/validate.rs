use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::GateSequence;
use crate::linalg::{hermitian_eigen, CMatrix};

/// Interpolation points per leg.
pub const GAP_GRID_POINTS: usize = 33;
/// Smallest acceptable leg gap at unit strengths.
pub const MIN_GAP: f64 = 1e-9;
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LegReport {
    /// Minimum gap above the expected ground space; `None` when the
    /// register is too small to have one.
    pub min_gap: Option<f64>,
    /// Largest spread of the lowest `2^(#data)` levels along the leg.
    pub max_ground_splitting: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub expected_ground_dim: usize,
    pub ground_dims: Vec<usize>,
    pub legs: Vec<LegReport>,
    /// (stage, generator a, generator b) pairs that fail to commute.
    pub noncommuting: Vec<(usize, usize, usize)>,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "ground dims {:?} (expected {})\n",
            self.ground_dims, self.expected_ground_dim
        );
        for (i, leg) in self.legs.iter().enumerate() {
            let gap = leg.min_gap.map_or("n/a".to_string(), |g| format!("{g:.6}"));
            out.push_str(&format!(
                "leg {}: min gap {gap}, ground splitting {:.3e}\n",
                i + 1,
                leg.max_ground_splitting
            ));
        }
        for issue in &self.issues {
            out.push_str(&format!("issue: {issue}\n"));
        }
        out.push_str(if self.passed() { "status: valid\n" } else { "status: INVALID\n" });
        out
    }
}

fn ground_dimension(values: &[f64]) -> usize {
    let min = values[0];
    values.iter().take_while(|&&v| v - min <= DEGENERACY_TOL).count()
}

/// Checks generator commutation, ground-space dimensions, and leg gaps at
/// unit strengths (`g_i = cos`, `g_{i+1} = sin` of the crossfade angle).
/// Failures are reported, never thrown.
pub fn validate_sequence(seq: &GateSequence) -> ValidationReport {
    let expected = seq.logical_dim();
    let mut report = ValidationReport {
        expected_ground_dim: expected,
        ground_dims: Vec::new(),
        legs: Vec::new(),
        noncommuting: Vec::new(),
        issues: Vec::new(),
    };

    for (si, stage) in seq.stages().iter().enumerate() {
        let gens = stage.generators();
        for a in 0..gens.len() {
            for b in a + 1..gens.len() {
                if !gens[a].commutes(&gens[b]).unwrap_or(false) {
                    report.noncommuting.push((si, a, b));
                    report.issues.push(format!(
                        "stage {} generators {} and {} do not commute",
                        si + 1,
                        a + 1,
                        b + 1
                    ));
                }
            }
        }
    }

    let matrices: Vec<CMatrix> = match seq
        .stages()
        .iter()
        .map(|s| s.unit_hamiltonian())
        .collect::<Result<_, _>>()
    {
        Ok(m) => m,
        Err(e) => {
            report.issues.push(e.to_string());
            return report;
        }
    };

    for (si, m) in matrices.iter().enumerate() {
        let dim = ground_dimension(&hermitian_eigen(m).values);
        report.ground_dims.push(dim);
        if dim != expected {
            report
                .issues
                .push(format!("stage {} ground dimension {dim} != {expected}", si + 1));
        }
    }

    for leg in 0..seq.n_legs() {
        let mut min_gap: Option<f64> = None;
        let mut splitting = 0.0f64;
        for k in 0..GAP_GRID_POINTS {
            let angle = FRAC_PI_2 * k as f64 / (GAP_GRID_POINTS - 1) as f64;
            let h = &matrices[leg] * Complex64::new(angle.cos(), 0.0)
                + &matrices[leg + 1] * Complex64::new(angle.sin(), 0.0);
            let values = hermitian_eigen(&h).values;
            splitting = splitting.max(values[expected.min(values.len()) - 1] - values[0]);
            if values.len() > expected {
                let gap = values[expected] - values[expected - 1];
                min_gap = Some(min_gap.map_or(gap, |g: f64| g.min(gap)));
            }
        }
        if splitting > DEGENERACY_TOL {
            report
                .issues
                .push(format!("leg {} splits the ground space by {splitting:.3e}", leg + 1));
        }
        match min_gap {
            Some(g) if g < MIN_GAP => report
                .issues
                .push(format!("leg {} gap closes (min {g:.3e})", leg + 1)),
            _ => {}
        }
        report.legs.push(LegReport {
            min_gap,
            max_ground_splitting: splitting,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::StageHamiltonian;
    use crate::pauli::PauliString;

    fn stage(s: &str) -> StageHamiltonian {
        StageHamiltonian::single(s.parse::<PauliString>().unwrap())
    }

    #[test]
    fn move_sequence_has_unit_gap() {
        let seq = GateSequence::new("move", 2, vec![0], vec![1], vec![stage("IX"), stage("ZZ"), stage("XI")]).unwrap();
        let r = validate_sequence(&seq);
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.ground_dims, vec![2, 2, 2]);
        for leg in &r.legs {
            assert!((leg.min_gap.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_sequence_is_flagged() {
        let seq = GateSequence::new("bad", 1, vec![0], vec![0], vec![stage("X"), stage("Z")]).unwrap();
        let r = validate_sequence(&seq);
        assert_eq!(r.ground_dims, vec![1, 1]);
        assert!(!r.passed());
        assert!(r.legs.iter().all(|l| l.min_gap.is_none()));
    }

    #[test]
    fn noncommuting_generators_are_reported() {
        let bad = StageHamiltonian::new(vec![
            crate::pauli::PauliSum::from_string(&"XI".parse().unwrap()),
            crate::pauli::PauliSum::from_string(&"ZI".parse().unwrap()),
        ])
        .unwrap();
        let seq = GateSequence::new("bad", 2, vec![1], vec![1], vec![bad, stage("ZI")]).unwrap();
        let r = validate_sequence(&seq);
        assert_eq!(r.noncommuting, vec![(0, 0, 1)]);
        assert!(!r.passed());
    }
}
