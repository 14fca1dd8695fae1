//! Signed Pauli strings, real Pauli sums, and their dense matrix realization.
//!
//! Qubits are indexed from 0 internally. In text form the leftmost letter is
//! qubit 1, and in matrix form qubit 1 is the most significant bit of the
//! computational basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CMatrix;

/// Largest register the dense realization accepts by default.
pub const DEFAULT_MAX_DENSE_QUBITS: usize = 4;

/// Coefficients at or below this magnitude are treated as cancelled.
pub const CANCELLATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("dimension mismatch: {0} qubits vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("register of {n} qubits exceeds the dense bound of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("imaginary phase in product of Hermitian strings")]
    ImaginaryPhase,
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
    #[error("Pauli string must act on at least one qubit")]
    Empty,
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Single-qubit product `self * other` as (phase, letter).
    pub fn product(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::One, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::One, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MinusI, Y),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Element of {+1, +i, -1, -i}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn exponent(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_exponent(e: u8) -> Phase {
        match e % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn times(self, other: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + other.exponent())
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::One | Phase::MinusOne)
    }

    /// The real value of a real phase.
    pub fn real(self) -> Option<f64> {
        match self {
            Phase::One => Some(1.0),
            Phase::MinusOne => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn phase(self) -> Phase {
        match self {
            Sign::Plus => Phase::One,
            Sign::Minus => Phase::MinusOne,
        }
    }
}

/// Signed tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
    sign: Sign,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, sign: Sign) -> Result<Self, PauliError> {
        if letters.is_empty() {
            return Err(PauliError::Empty);
        }
        Ok(Self { letters, sign })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n_qubits.max(1)],
            sign: Sign::Plus,
        }
    }

    /// Builds a string from (qubit, letter) pairs; unlisted qubits are identity.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self, PauliError> {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(PauliError::QubitOutOfRange { index: q, n: n_qubits });
            }
            s.letters[q] = p;
        }
        Ok(s)
    }

    /// Single-qubit operator on qubit `q` of an `n`-qubit register.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Self {
        Self::from_sparse(n_qubits, &[(q, p)]).expect("qubit index in range")
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn negated(mut self) -> Self {
        self.sign = self.sign.flip();
        self
    }

    pub fn unsigned(&self) -> Self {
        Self {
            letters: self.letters.clone(),
            sign: Sign::Plus,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits on which the string acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    fn check_dims(&self, other: &Self) -> Result<(), PauliError> {
        if self.n_qubits() != other.n_qubits() {
            return Err(PauliError::DimensionMismatch(self.n_qubits(), other.n_qubits()));
        }
        Ok(())
    }

    /// Operator product `self * other`, returned as a phase times an
    /// unsigned string.
    pub fn multiply(&self, other: &Self) -> Result<(Phase, PauliString), PauliError> {
        self.check_dims(other)?;
        let mut phase = self.sign.phase().times(other.sign.phase());
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = a.product(b);
                phase = phase.times(ph);
                p
            })
            .collect();
        Ok((phase, PauliString { letters, sign: Sign::Plus }))
    }

    /// Product of two strings that must be Hermitian; an imaginary phase is an error.
    pub fn multiply_hermitian(&self, other: &Self) -> Result<PauliString, PauliError> {
        let (phase, mut product) = self.multiply(other)?;
        match phase {
            Phase::One => Ok(product),
            Phase::MinusOne => {
                product.sign = Sign::Minus;
                Ok(product)
            }
            _ => Err(PauliError::ImaginaryPhase),
        }
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        self.letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a.anticommutes(b))
            .count()
            % 2
            == 0
    }

    /// Letters only, no sign, e.g. `XIZ`.
    pub fn letters_string(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// Sparse rendering with 1-based qubit labels, e.g. `+X1Z3`; identity is `+I`.
    pub fn to_sparse_string(&self) -> String {
        let mut out = String::new();
        out.push(if self.sign == Sign::Plus { '+' } else { '-' });
        if self.is_identity() {
            out.push('I');
        }
        for (q, p) in self.letters.iter().enumerate() {
            if *p != Pauli::I {
                out.push(p.as_char());
                out.push_str(&(q + 1).to_string());
            }
        }
        out
    }

    /// Parses the sparse form produced by [`to_sparse_string`](Self::to_sparse_string).
    pub fn parse_sparse(n_qubits: usize, text: &str) -> Result<Self, PauliError> {
        let err = || PauliError::Parse(text.to_string());
        let (sign, rest) = split_sign(text.trim());
        let mut s = Self::identity(n_qubits).with_sign(sign);
        if rest == "I" {
            return Ok(s);
        }
        let mut chars = rest.chars().peekable();
        if chars.peek().is_none() {
            return Err(err());
        }
        while let Some(c) = chars.next() {
            let p = Pauli::from_char(c).filter(|&p| p != Pauli::I).ok_or_else(err)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().copied().filter(|d| d.is_ascii_digit()) {
                digits.push(d);
                chars.next();
            }
            let q: usize = digits.parse().map_err(|_| err())?;
            if q == 0 || q > n_qubits || s.letters[q - 1] != Pauli::I {
                return Err(err());
            }
            s.letters[q - 1] = p;
        }
        Ok(s)
    }
}

fn split_sign(text: &str) -> (Sign, &str) {
    if let Some(rest) = text.strip_prefix('+') {
        (Sign::Plus, rest)
    } else if let Some(rest) = text.strip_prefix('-') {
        (Sign::Minus, rest)
    } else if let Some(rest) = text.strip_prefix('\u{2212}') {
        (Sign::Minus, rest)
    } else {
        (Sign::Plus, text)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign == Sign::Plus { '+' } else { '-' };
        write!(f, "{sign}{}", self.letters_string())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sign, rest) = split_sign(s.trim());
        let letters = rest
            .chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| PauliError::Parse(s.to_string()))?;
        if letters.is_empty() {
            return Err(PauliError::Parse(s.to_string()));
        }
        PauliString::new(letters, sign)
    }
}

/// Real linear combination of unsigned Pauli strings, kept in canonical
/// (sorted, merged, zero-free) form.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<Vec<Pauli>, f64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_string(s: &PauliString) -> Self {
        let mut sum = Self::zero(s.n_qubits());
        sum.add_term(1.0, s);
        sum
    }

    pub fn from_terms(n_qubits: usize, terms: &[(f64, PauliString)]) -> Result<Self, PauliError> {
        let mut sum = Self::zero(n_qubits);
        for (c, s) in terms {
            if s.n_qubits() != n_qubits {
                return Err(PauliError::DimensionMismatch(n_qubits, s.n_qubits()));
            }
            sum.add_term(*c, s);
        }
        Ok(sum)
    }

    /// Adds `coeff * s`, folding the sign of `s` into the coefficient.
    pub fn add_term(&mut self, coeff: f64, s: &PauliString) {
        assert_eq!(s.n_qubits(), self.n_qubits, "term dimension");
        let c = coeff * s.sign.value();
        let entry = self.terms.entry(s.letters.clone()).or_insert(0.0);
        *entry += c;
        if entry.abs() <= CANCELLATION_TOLERANCE {
            self.terms.remove(&s.letters);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (coefficient, unsigned string) in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (f64, PauliString)> + '_ {
        self.terms.iter().map(|(l, &c)| {
            (
                c,
                PauliString {
                    letters: l.clone(),
                    sign: Sign::Plus,
                },
            )
        })
    }

    /// The sum as a single signed string, if it is `±P` with unit coefficient.
    pub fn as_signed_string(&self) -> Option<PauliString> {
        if self.terms.len() != 1 {
            return None;
        }
        let (letters, &c) = self.terms.iter().next()?;
        let sign = if (c - 1.0).abs() <= CANCELLATION_TOLERANCE {
            Sign::Plus
        } else if (c + 1.0).abs() <= CANCELLATION_TOLERANCE {
            Sign::Minus
        } else {
            return None;
        };
        Some(PauliString {
            letters: letters.clone(),
            sign,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.n_qubits);
        for (l, &c) in &self.terms {
            let v = c * factor;
            if v.abs() > CANCELLATION_TOLERANCE {
                out.terms.insert(l.clone(), v);
            }
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Result<Self, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = self.clone();
        for (c, s) in other.terms() {
            out.add_term(c, &s);
        }
        Ok(out)
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_weight(&self) -> usize {
        self.terms()
            .map(|(_, s)| s.weight())
            .max()
            .unwrap_or(0)
    }

    /// Operator product; `None` when the product has non-real coefficients.
    pub fn multiply(&self, other: &Self) -> Result<Option<Self>, PauliError> {
        let product = self.multiply_complex(other)?;
        let mut out = Self::zero(self.n_qubits);
        for (letters, c) in product {
            if c.im.abs() > CANCELLATION_TOLERANCE {
                return Ok(None);
            }
            if c.re.abs() > CANCELLATION_TOLERANCE {
                out.terms.insert(letters, c.re);
            }
        }
        Ok(Some(out))
    }

    fn multiply_complex(&self, other: &Self) -> Result<BTreeMap<Vec<Pauli>, Complex64>, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let mut acc: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for (ca, a) in self.terms() {
            for (cb, b) in other.terms() {
                let (phase, p) = a.multiply(&b)?;
                *acc.entry(p.letters).or_insert(Complex64::new(0.0, 0.0)) +=
                    phase.to_complex() * (ca * cb);
            }
        }
        Ok(acc)
    }

    /// Exact symbolic commutation test: expands `[self, other]` term by term.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let mut acc: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for (ca, a) in self.terms() {
            for (cb, b) in other.terms() {
                if a.commutes_unchecked(&b) {
                    continue;
                }
                // PQ - QP = 2PQ for anticommuting strings.
                let (phase, p) = a.multiply(&b)?;
                *acc.entry(p.letters).or_insert(Complex64::new(0.0, 0.0)) +=
                    phase.to_complex() * (2.0 * ca * cb);
            }
        }
        Ok(acc.values().all(|c| c.norm() <= CANCELLATION_TOLERANCE))
    }

    pub fn matrix(&self) -> Result<CMatrix, PauliError> {
        matrix_of(self)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|(c, s)| format!("{c} {}", s.letters_string())).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Commutation test for single strings.
pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool, PauliError> {
    a.commutes(b)
}

/// Symbolic commutation test for Pauli sums.
pub fn commutes_sum(a: &PauliSum, b: &PauliSum) -> Result<bool, PauliError> {
    a.commutes(b)
}

/// Product of two signed strings as (phase, unsigned string).
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString), PauliError> {
    a.multiply(b)
}

/// Dense realization with the default four-qubit bound.
pub fn matrix_of(sum: &PauliSum) -> Result<CMatrix, PauliError> {
    matrix_of_bounded(sum, DEFAULT_MAX_DENSE_QUBITS)
}

pub fn matrix_of_bounded(sum: &PauliSum, max_qubits: usize) -> Result<CMatrix, PauliError> {
    let n = sum.n_qubits();
    if n > max_qubits {
        return Err(PauliError::TooLarge { n, max: max_qubits });
    }
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for (c, s) in sum.terms() {
        let op = SparsePauli::new(&s);
        for col in 0..dim {
            let (row, phase) = op.apply_basis(col);
            m[(row, col)] += phase * c;
        }
    }
    Ok(m)
}

/// Dense matrix of a signed string, computed as a Kronecker product.
pub fn string_matrix(s: &PauliString) -> CMatrix {
    let mut m = CMatrix::from_element(1, 1, Complex64::new(s.sign.value(), 0.0));
    for p in &s.letters {
        let a = p.matrix();
        let single = CMatrix::from_fn(2, 2, |r, c| a[r][c]);
        m = m.kronecker(&single);
    }
    m
}

/// Bit-mask form of an unsigned string used for fast application to
/// basis states: `P|k> = phase(k) |k ^ x_mask>`.
#[derive(Clone, Debug)]
pub struct SparsePauli {
    x_mask: usize,
    z_mask: usize,
    y_phase: Complex64,
}

impl SparsePauli {
    pub fn new(s: &PauliString) -> Self {
        let n = s.n_qubits();
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut n_y = 0u8;
        for (q, p) in s.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        let y_phase = Phase::from_exponent(n_y).to_complex() * s.sign.value();
        Self { x_mask, z_mask, y_phase }
    }

    /// Image of basis state `k`: (target index, amplitude).
    #[inline]
    pub fn apply_basis(&self, k: usize) -> (usize, Complex64) {
        let parity = (k & self.z_mask).count_ones() % 2;
        let ph = if parity == 0 { self.y_phase } else { -self.y_phase };
        (k ^ self.x_mask, ph)
    }

    /// For each target row `r`, the source column `r ^ x` and its amplitude.
    pub fn row_table(&self, dim: usize) -> Vec<(usize, Complex64)> {
        (0..dim)
            .map(|r| {
                let k = r ^ self.x_mask;
                let (_, ph) = self.apply_basis(k);
                (k, ph)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn all_two_qubit() -> Vec<PauliString> {
        let mut v = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                v.push(PauliString::new(vec![a, b], Sign::Plus).unwrap());
            }
        }
        v
    }

    #[test]
    fn product_examples() {
        let (ph, p) = ps("XX").multiply(&ps("YY")).unwrap();
        assert_eq!(ph, Phase::MinusOne);
        assert_eq!(p, ps("ZZ"));

        let x1 = PauliString::single(2, 0, Pauli::X);
        let x2 = PauliString::single(2, 1, Pauli::X);
        let (ph, p) = x1.multiply(&x2).unwrap();
        assert_eq!(ph, Phase::One);
        assert_eq!(p, ps("XX"));

        let my2 = ps("-IY");
        let (ph, p) = my2.multiply(&my2).unwrap();
        assert_eq!(ph, Phase::One);
        assert!(p.is_identity());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            ps("X").multiply(&ps("XX")),
            Err(PauliError::DimensionMismatch(1, 2))
        ));
        assert!(ps("X").commutes(&ps("XX")).is_err());
        let a = PauliSum::from_string(&ps("X"));
        let b = PauliSum::from_string(&ps("XX"));
        assert!(commutes_sum(&a, &b).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!ps("IX").commutes(&ps("ZZ")).unwrap());
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(ps("ZI").commutes(&ps("IX")).unwrap());
    }

    #[test]
    fn sum_commutation_with_rotated_terms() {
        let theta = std::f64::consts::PI / 3.0;
        let (c, s) = (theta.cos(), theta.sin());
        let a = PauliSum::from_terms(2, &[(c, ps("XX")), (-s, ps("XY"))]).unwrap();
        let b = PauliSum::from_terms(2, &[(c, ps("IX")), (-s, ps("IY"))]).unwrap();
        assert!(commutes_sum(&a, &b).unwrap());
        // Numerical cross-check.
        let ma = matrix_of(&a).unwrap();
        let mb = matrix_of(&b).unwrap();
        let comm = &ma * &mb - &mb * &ma;
        assert!(comm.norm() < 1e-12);

        let x1 = PauliSum::from_string(&ps("XI"));
        let zz = PauliSum::from_string(&ps("ZZ"));
        assert!(!commutes_sum(&x1, &zz).unwrap());
        assert!(commutes_sum(&x1, &PauliSum::zero(2)).unwrap());
    }

    #[test]
    fn matrix_examples() {
        let z = matrix_of(&PauliSum::from_string(&ps("Z"))).unwrap();
        assert_eq!(z[(0, 0)].re, 1.0);
        assert_eq!(z[(1, 1)].re, -1.0);
        let x = matrix_of(&PauliSum::from_string(&ps("X"))).unwrap();
        assert_eq!(x[(0, 1)].re, 1.0);
        assert_eq!(x[(1, 0)].re, 1.0);
        assert_eq!(x[(0, 0)].norm(), 0.0);
        let zz = matrix_of(&PauliSum::from_string(&ps("ZZ"))).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn dense_bound_enforced() {
        let big = PauliSum::from_string(&ps("XXXXX"));
        assert!(matches!(matrix_of(&big), Err(PauliError::TooLarge { n: 5, max: 4 })));
        assert!(matrix_of_bounded(&big, 5).is_ok());
    }

    #[test]
    fn exhaustive_two_qubit_products_match_matrices() {
        let strings = all_two_qubit();
        for a in &strings {
            for b in &strings {
                for (sa, sb) in [(Sign::Plus, Sign::Minus), (Sign::Plus, Sign::Plus)] {
                    let a = a.clone().with_sign(sa);
                    let b = b.clone().with_sign(sb);
                    let (ph, p) = a.multiply(&b).unwrap();
                    let lhs = string_matrix(&p) * ph.to_complex();
                    let rhs = string_matrix(&a) * string_matrix(&b);
                    assert!((lhs - rhs).norm() == 0.0, "{a} * {b}");
                    let (ph_rev, p_rev) = b.multiply(&a).unwrap();
                    assert_eq!(p, p_rev);
                    let anti = !a.commutes(&b).unwrap();
                    let expected = if anti { ph.times(Phase::MinusOne) } else { ph };
                    assert_eq!(ph_rev, expected);
                    if !anti {
                        assert!(ph.is_real());
                    }
                }
            }
        }
    }

    #[test]
    fn sparse_and_kronecker_agree() {
        for s in all_two_qubit() {
            let sum = PauliSum::from_string(&s);
            assert_eq!(matrix_of(&sum).unwrap(), string_matrix(&s));
        }
    }

    #[test]
    fn text_round_trip() {
        for text in ["+XIZ", "-YI", "+I"] {
            assert_eq!(ps(text).to_string(), text);
        }
        assert_eq!(ps("XIZ").to_string(), "+XIZ");
        assert_eq!(ps("\u{2212}YI").to_string(), "-YI");
        assert!("+XQ".parse::<PauliString>().is_err());
        assert!("+".parse::<PauliString>().is_err());
    }

    #[test]
    fn sparse_text_round_trip() {
        let s = ps("-XIZ");
        assert_eq!(s.to_sparse_string(), "-X1Z3");
        assert_eq!(PauliString::parse_sparse(3, "-X1Z3").unwrap(), s);
        assert_eq!(PauliString::parse_sparse(3, "+I").unwrap(), PauliString::identity(3));
        assert!(PauliString::parse_sparse(3, "X4").is_err());
        assert!(PauliString::parse_sparse(3, "X1X1").is_err());
    }

    #[test]
    fn sum_cancellation_and_signed_view() {
        let mut s = PauliSum::from_string(&ps("-IY"));
        assert_eq!(s.as_signed_string(), Some(ps("-IY")));
        s.add_term(1.0, &ps("IY"));
        assert!(s.is_zero());
        let tiny = PauliSum::from_terms(1, &[(1e-17, ps("X")), (-1.0, ps("Y"))]).unwrap();
        assert_eq!(tiny.len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn letter() -> impl Strategy<Value = Pauli> {
            prop::sample::select(Pauli::ALL.to_vec())
        }

        fn string(n: usize) -> impl Strategy<Value = PauliString> {
            (prop::collection::vec(letter(), n), any::<bool>()).prop_map(|(l, neg)| {
                PauliString::new(l, if neg { Sign::Minus } else { Sign::Plus }).unwrap()
            })
        }

        fn sum(n: usize) -> impl Strategy<Value = PauliSum> {
            prop::collection::vec((-2.0f64..2.0, string(n)), 0..4)
                .prop_map(move |t| PauliSum::from_terms(n, &t).unwrap())
        }

        proptest! {
            #[test]
            fn associativity(a in string(3), b in string(3), c in string(3)) {
                let (p1, ab) = a.multiply(&b).unwrap();
                let (p2, ab_c) = ab.multiply(&c).unwrap();
                let (q1, bc) = b.multiply(&c).unwrap();
                let (q2, a_bc) = a.multiply(&bc).unwrap();
                prop_assert_eq!(ab_c, a_bc);
                prop_assert_eq!(p1.times(p2), q1.times(q2));
            }

            #[test]
            fn text_round_trips(s in string(4)) {
                prop_assert_eq!(s.to_string().parse::<PauliString>().unwrap(), s.clone());
                prop_assert_eq!(PauliString::parse_sparse(4, &s.to_sparse_string()).unwrap(), s);
            }

            #[test]
            fn symbolic_commutator_matches_numeric(a in sum(2), b in sum(2)) {
                let ma = matrix_of(&a).unwrap();
                let mb = matrix_of(&b).unwrap();
                let norm = (&ma * &mb - &mb * &ma).norm();
                prop_assert_eq!(commutes_sum(&a, &b).unwrap(), norm < 1e-12);
            }

            #[test]
            fn matrices_are_hermitian(a in sum(3)) {
                let m = matrix_of(&a).unwrap();
                prop_assert!((m.adjoint() - &m).norm() < 1e-14);
            }
        }
    }
}
