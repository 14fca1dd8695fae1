use super::{GateSequence, StageHamiltonian};
use crate::linalg::{hermitian_eigen, projector, CMatrix};
use crate::pauli::{matrix_of, PauliString, PauliSum};

/// Ground-space equivalence tolerance on `||P (A - B) P||_F`.
pub const EQUIVALENCE_TOL: f64 = 1e-9;
const MAX_CANDIDATES: usize = 1 << 14;

/// Claimed operator transformation `input -> output`. `chain`, when given,
/// lists one representative per leg; otherwise the chain is built by
/// multiplying terms with products of the active stage's generators.
#[derive(Clone, Debug)]
pub struct Claim {
    pub input: PauliSum,
    pub output: PauliSum,
    pub chain: Option<Vec<PauliSum>>,
}

impl Claim {
    pub fn new(input: PauliSum, output: PauliSum) -> Self {
        Self {
            input,
            output,
            chain: None,
        }
    }

    pub fn with_chain(mut self, chain: Vec<PauliSum>) -> Self {
        self.chain = Some(chain);
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct CertificateReport {
    pub passed: bool,
    pub trace: Vec<String>,
}

fn ground_projector(stage: &StageHamiltonian, dim: usize) -> Option<CMatrix> {
    let eig = hermitian_eigen(&stage.unit_hamiltonian().ok()?);
    Some(projector(&eig.vectors.columns(0, dim).into_owned()))
}

fn ground_distance(p: &CMatrix, a: &PauliSum, b: &PauliSum) -> f64 {
    let diff = a.plus(&b.scaled(-1.0)).expect("same register");
    match matrix_of(&diff) {
        Ok(m) => (p * m * p).norm(),
        Err(_) => f64::INFINITY,
    }
}

fn commutes_with_stage(rep: &PauliSum, stage: &StageHamiltonian) -> bool {
    stage.generators().iter().all(|g| rep.commutes(g).unwrap_or(false))
}

/// Products of every subset of the stage generators, in binary-counting
/// order; subsets with non-real products are skipped.
fn subset_products(stage: &StageHamiltonian) -> Vec<PauliSum> {
    let gens = stage.generators();
    let n = stage.n_qubits();
    let mut out = Vec::new();
    for mask in 0..(1usize << gens.len()) {
        let mut acc = Some(PauliSum::from_string(&PauliString::identity(n)));
        for (j, g) in gens.iter().enumerate() {
            if mask & (1 << j) != 0 {
                acc = acc.and_then(|a| a.multiply(g).ok().flatten());
            }
        }
        if let Some(p) = acc {
            out.push(p);
        }
    }
    out
}

/// First per-term rewrite of `prev` (each term times one subset product of
/// `current`) that commutes with both stages.
fn extend(prev: &PauliSum, current: &StageHamiltonian, next: &StageHamiltonian) -> Option<PauliSum> {
    let products = subset_products(current);
    let terms: Vec<(f64, PauliString)> = prev.terms().collect();
    let radix = products.len();
    let total = radix.checked_pow(terms.len() as u32)?;
    if total > MAX_CANDIDATES {
        return None;
    }
    for combo in 0..total {
        let mut code = combo;
        let mut candidate = PauliSum::zero(prev.n_qubits());
        let mut real = true;
        for (c, s) in &terms {
            let choice = &products[code % radix];
            code /= radix;
            match PauliSum::from_string(s).multiply(choice).ok().flatten() {
                Some(p) => candidate = candidate.plus(&p.scaled(*c)).expect("same register"),
                None => {
                    real = false;
                    break;
                }
            }
        }
        if real && commutes_with_stage(&candidate, current) && commutes_with_stage(&candidate, next) {
            return Some(candidate);
        }
    }
    None
}

/// Checks operator-transformation claims against a sequence. Each leg's
/// representative must commute with both stages active on that leg,
/// consecutive representatives must agree on the ground space of the stage
/// between them, and the ends must agree with `input`/`output` on the first
/// and last ground spaces.
pub fn verify_certificate(seq: &GateSequence, claims: &[Claim]) -> CertificateReport {
    let mut report = CertificateReport {
        passed: true,
        trace: Vec::new(),
    };
    let dim = seq.logical_dim();
    let stages = seq.stages();
    let Some(projectors) = stages
        .iter()
        .map(|s| ground_projector(s, dim))
        .collect::<Option<Vec<_>>>()
    else {
        report.passed = false;
        report.trace.push("stage matrices unavailable (register too large)".into());
        return report;
    };

    for (ci, claim) in claims.iter().enumerate() {
        let mut ok = true;
        let mut chain: Vec<PauliSum> = Vec::new();
        if let Some(given) = &claim.chain {
            if given.len() != seq.n_legs() {
                report
                    .trace
                    .push(format!("claim {ci}: chain has {} entries, need {}", given.len(), seq.n_legs()));
                report.passed = false;
                continue;
            }
            chain = given.clone();
        } else {
            let mut prev = claim.input.clone();
            for leg in 0..seq.n_legs() {
                match extend(&prev, &stages[leg], &stages[leg + 1]) {
                    Some(rep) => {
                        prev = rep.clone();
                        chain.push(rep);
                    }
                    None => {
                        report
                            .trace
                            .push(format!("claim {ci}: no representative commutes on leg {}", leg + 1));
                        ok = false;
                        break;
                    }
                }
            }
        }

        if ok {
            for (leg, rep) in chain.iter().enumerate() {
                report.trace.push(format!("claim {ci}: leg {} representative {rep}", leg + 1));
                if !commutes_with_stage(rep, &stages[leg]) || !commutes_with_stage(rep, &stages[leg + 1]) {
                    report
                        .trace
                        .push(format!("claim {ci}: representative fails to commute on leg {}", leg + 1));
                    ok = false;
                }
                let before = if leg == 0 { &claim.input } else { &chain[leg - 1] };
                let d = ground_distance(&projectors[leg], before, rep);
                if d >= EQUIVALENCE_TOL {
                    report.trace.push(format!(
                        "claim {ci}: representative changes action on stage {} ground space ({d:.3e})",
                        leg + 1
                    ));
                    ok = false;
                }
            }
        }

        if ok {
            let last = chain.last().expect("at least one leg");
            let d = ground_distance(projectors.last().expect("stages"), last, &claim.output);
            if d >= EQUIVALENCE_TOL {
                report
                    .trace
                    .push(format!("claim {ci}: final representative differs from output ({d:.3e})"));
                ok = false;
            } else {
                report.trace.push(format!("claim {ci}: verified"));
            }
        }
        report.passed &= ok;
    }
    report
}
