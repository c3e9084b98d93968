//! Pauli strings, real-weighted Pauli sums and dense operator views.
//!
//! Qubit `k` (0-based) of a string maps to bit `k` of a dense basis index.
//! Strings print left to right as q1..qL.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub const MAX_QUBITS: usize = 64;
pub const DEFAULT_DENSE_CAP: usize = 12;
const EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid Pauli letter {0:?}")]
    InvalidLetter(char),
    #[error("{0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dense view of {0} qubits exceeds the cap of {1}")]
    DenseCapExceeded(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, PauliError> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(PauliError::InvalidLetter(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// A power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A signed tensor product of single-qubit Paulis, stored as x/z bitmasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    len: u8,
    negative: bool,
}

impl PauliString {
    pub fn identity(len: usize) -> Result<Self, PauliError> {
        if len > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(len));
        }
        Ok(PauliString { x: 0, z: 0, len: len as u8, negative: false })
    }

    /// Build from raw masks. Bits at or above `len` must be clear.
    pub fn from_masks(len: usize, x: u64, z: u64, negative: bool) -> Result<Self, PauliError> {
        if len > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(len));
        }
        let valid = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        if (x | z) & !valid != 0 {
            return Err(PauliError::LengthMismatch(64 - (x | z).leading_zeros() as usize, len));
        }
        Ok(PauliString { x, z, len: len as u8, negative })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self, PauliError> {
        let mut p = PauliString::identity(letters.len())?;
        for (q, l) in letters.iter().enumerate() {
            p.set(q, *l);
        }
        Ok(p)
    }

    pub fn single(len: usize, qubit: usize, letter: Pauli) -> Result<Self, PauliError> {
        let mut p = PauliString::identity(len)?;
        if qubit >= len {
            return Err(PauliError::LengthMismatch(qubit + 1, len));
        }
        p.set(qubit, letter);
        Ok(p)
    }

    fn set(&mut self, q: usize, letter: Pauli) {
        let (bx, bz) = letter.bits();
        let m = 1u64 << q;
        self.x = if bx { self.x | m } else { self.x & !m };
        self.z = if bz { self.z | m } else { self.z & !m };
    }

    pub fn with_letter(mut self, q: usize, letter: Pauli) -> Self {
        self.set(q, letter);
        self
    }

    pub fn letter(&self, q: usize) -> Pauli {
        let bx = self.x >> q & 1 == 1;
        let bz = self.z >> q & 1 == 1;
        match (bx, bz) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.len()).map(|q| self.letter(q)).collect()
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn is_z_only(&self) -> bool {
        self.x == 0
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn unsigned(mut self) -> Self {
        self.negative = false;
        self
    }

    /// Count of Y letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Action on a computational basis index: `P|i> = amplitude |j>`.
    #[inline]
    pub fn act(&self, index: u64) -> (u64, Complex64) {
        let mut k = self.y_count() as i64;
        if (index & self.z).count_ones() % 2 == 1 {
            k += 2;
        }
        if self.negative {
            k += 2;
        }
        (index ^ self.x, Phase::from_power(k).to_complex())
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool, PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Returns `(phase, product)` with `dense(a)·dense(b) = phase·dense(product)`.
    /// The product string always carries a positive sign.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString), PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let mut k = self.y_count() as i64 + other.y_count() as i64
            - (x & z).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        if self.negative != other.negative {
            k += 2;
        }
        Ok((Phase::from_power(k), PauliString { x, z, len: self.len, negative: false }))
    }

    /// Per spin sector, whether the string preserves the parity of the occupation.
    pub fn spin_sector_parity_signature(&self, partition: &SpinPartition) -> (bool, bool) {
        (
            (self.x & partition.up).count_ones() % 2 == 0,
            (self.x & partition.down).count_ones() % 2 == 0,
        )
    }

    pub fn dense(&self, cap: usize) -> Result<DMatrix<Complex64>, PauliError> {
        let n = self.len();
        if n > cap {
            return Err(PauliError::DenseCapExceeded(n, cap));
        }
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim as u64 {
            let (j, a) = self.act(i);
            m[(j as usize, i as usize)] = a;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for q in 0..self.len() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body.chars().map(Pauli::from_char).collect::<Result<Vec<_>, _>>()?;
        let mut p = PauliString::from_letters(&letters)?;
        p.negative = negative;
        Ok(p)
    }
}

/// Up and down spin-orbital masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinPartition {
    pub up: u64,
    pub down: u64,
}

impl SpinPartition {
    /// Alternating up, down, up, down ordering.
    pub fn interleaved(len: usize) -> Self {
        let mut up = 0;
        let mut down = 0;
        for q in 0..len {
            if q % 2 == 0 {
                up |= 1 << q;
            } else {
                down |= 1 << q;
            }
        }
        SpinPartition { up, down }
    }

    /// All up orbitals first, then all down orbitals.
    pub fn blocked(len: usize) -> Self {
        let half = len / 2;
        let up = (1u64 << half) - 1;
        let all = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        SpinPartition { up, down: all & !up }
    }

    /// Occupation parities `(up odd, down odd)` of a basis state.
    pub fn parities(&self, bits: u64) -> (bool, bool) {
        ((bits & self.up).count_ones() % 2 == 1, (bits & self.down).count_ones() % 2 == 1)
    }
}

/// A Pauli string with a non-negative weight; the sign lives in the string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn signed_coefficient(&self) -> f64 {
        self.coefficient * self.string.sign()
    }
}

/// A real linear combination of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    qubit_count: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(qubit_count: usize) -> Self {
        PauliSum { qubit_count, terms: Vec::new() }
    }

    /// Merge duplicate strings, drop zero weights and normalise signs.
    /// Terms keep the order of first appearance.
    pub fn from_signed<I>(qubit_count: usize, items: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        if qubit_count > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(qubit_count));
        }
        let mut order: Vec<PauliString> = Vec::new();
        let mut acc: HashMap<PauliString, f64> = HashMap::new();
        for (c, p) in items {
            if p.len() != qubit_count {
                return Err(PauliError::LengthMismatch(p.len(), qubit_count));
            }
            let key = p.unsigned();
            let entry = acc.entry(key).or_insert_with(|| {
                order.push(key);
                0.0
            });
            *entry += c * p.sign();
        }
        let terms = order
            .into_iter()
            .filter_map(|key| {
                let c = acc[&key];
                if c.abs() < EPS {
                    None
                } else if c < 0.0 {
                    Some(PauliTerm { coefficient: -c, string: key.negated() })
                } else {
                    Some(PauliTerm { coefficient: c, string: key })
                }
            })
            .collect();
        Ok(PauliSum { qubit_count, terms })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(signed coefficient, positive string)` pairs.
    pub fn signed_terms(&self) -> impl Iterator<Item = (f64, PauliString)> + '_ {
        self.terms.iter().map(|t| (t.signed_coefficient(), t.string.unsigned()))
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.signed_coefficient())
            .sum()
    }

    pub fn without_identity(&self) -> PauliSum {
        PauliSum {
            qubit_count: self.qubit_count,
            terms: self.terms.iter().filter(|t| !t.string.is_identity()).copied().collect(),
        }
    }

    pub fn filter<F: Fn(&PauliTerm) -> bool>(&self, keep: F) -> PauliSum {
        PauliSum {
            qubit_count: self.qubit_count,
            terms: self.terms.iter().filter(|t| keep(t)).copied().collect(),
        }
    }

    /// Sum of absolute coefficients over all terms.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum::from_signed(self.qubit_count, self.signed_terms().map(|(c, p)| (c * factor, p)))
            .expect("lengths already validated")
    }

    pub fn plus(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.qubit_count != other.qubit_count {
            return Err(PauliError::LengthMismatch(self.qubit_count, other.qubit_count));
        }
        PauliSum::from_signed(self.qubit_count, self.signed_terms().chain(other.signed_terms()))
    }

    pub fn minus(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        self.plus(&other.scaled(-1.0))
    }

    pub fn add_identity(&self, value: f64) -> PauliSum {
        let id = PauliString::identity(self.qubit_count).expect("valid length");
        PauliSum::from_signed(self.qubit_count, self.signed_terms().chain(std::iter::once((value, id))))
            .expect("lengths already validated")
    }

    pub fn is_z_only(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_z_only())
    }

    /// Diagonal of a Z-only sum over all basis states.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        if !self.is_z_only() {
            return None;
        }
        let dim = 1usize << self.qubit_count;
        let mut d = vec![0.0; dim];
        for (i, v) in d.iter_mut().enumerate() {
            *v = self.diagonal_entry(i as u64);
        }
        Some(d)
    }

    /// Energy of a basis state under the Z-only part of the sum.
    pub fn diagonal_entry(&self, bits: u64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_z_only())
            .map(|t| {
                let odd = (bits & t.string.z_mask()).count_ones() % 2 == 1;
                if odd {
                    -t.signed_coefficient()
                } else {
                    t.signed_coefficient()
                }
            })
            .sum()
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let c = t.coefficient;
            for (i, a) in psi.iter().enumerate() {
                let (j, ph) = t.string.act(i as u64);
                out[j as usize] += ph * a * c;
            }
        }
    }

    /// `<psi|H|phi>`.
    pub fn matrix_element(&self, psi: &[Complex64], phi: &[Complex64]) -> Complex64 {
        let mut tmp = vec![Complex64::new(0.0, 0.0); phi.len()];
        self.apply(phi, &mut tmp);
        psi.iter().zip(tmp.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        self.matrix_element(psi, psi).re
    }

    pub fn dense(&self, cap: usize) -> Result<DMatrix<Complex64>, PauliError> {
        let n = self.qubit_count;
        if n > cap {
            return Err(PauliError::DenseCapExceeded(n, cap));
        }
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for i in 0..dim as u64 {
                let (j, a) = t.string.act(i);
                m[(j as usize, i as usize)] += a * t.coefficient;
            }
        }
        Ok(m)
    }

    /// One `<coefficient> <letters>` line per term with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.qubit_count);
        for (c, p) in self.signed_terms() {
            out.push_str(&format!("{:.16e} {}\n", c, p));
        }
        out
    }

    pub fn parse(text: &str) -> Result<PauliSum, PauliError> {
        let mut items = Vec::new();
        let mut qubits: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("qubits") {
                    if let Some(n) = words.next().and_then(|w| w.parse::<usize>().ok()) {
                        qubits = Some(n);
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let (Some(cw), Some(lw), None) = (words.next(), words.next(), words.next()) else {
                return Err(PauliError::Parse {
                    line: line_no,
                    message: format!("expected `<coefficient> <letters>`, got {line:?}"),
                });
            };
            let c: f64 = cw.parse().map_err(|_| PauliError::Parse {
                line: line_no,
                message: format!("bad coefficient {cw:?}"),
            })?;
            if !c.is_finite() {
                return Err(PauliError::Parse { line: line_no, message: "non-finite coefficient".into() });
            }
            let p: PauliString = lw.parse().map_err(|e: PauliError| PauliError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            match qubits {
                Some(n) if n != p.len() => {
                    return Err(PauliError::Parse {
                        line: line_no,
                        message: format!("string has {} qubits, expected {n}", p.len()),
                    })
                }
                _ => qubits = Some(p.len()),
            }
            items.push((c, p));
        }
        let n = qubits.ok_or(PauliError::Parse { line: 0, message: "no terms and no qubit count".into() })?;
        PauliSum::from_signed(n, items)
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    vals
}

/// Lowest eigenpair of a Hermitian matrix.
pub fn hermitian_ground_state(m: &DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let (k, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalues"))
        .expect("non-empty matrix");
    (*e, eig.eigenvectors.column(k).iter().copied().collect())
}

/// Spectral norm of a complex matrix.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().fold(0.0, |a: f64, b| a.max(*b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn product_example_x1z2_y1z2() {
        let (ph, prod) = p("XZ").multiply(&p("YZ")).unwrap();
        assert_eq!(ph, Phase::I);
        assert_eq!(prod, p("ZI"));
    }

    #[test]
    fn product_matches_dense() {
        let letters = ["IXYZ", "XXYY", "ZIZY", "YYYY", "-XZIY"];
        for a in letters {
            for b in letters {
                let (pa, pb) = (p(a), p(b));
                if pa.len() != pb.len() {
                    continue;
                }
                let (ph, c) = pa.multiply(&pb).unwrap();
                let lhs = pa.dense(4).unwrap() * pb.dense(4).unwrap();
                let rhs = c.dense(4).unwrap() * ph.to_complex();
                assert!((lhs - rhs).norm() < 1e-12, "{a} * {b}");
            }
        }
    }

    #[test]
    fn x_and_z_anticommute() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
    }

    #[test]
    fn merge_cancels_and_normalises() {
        let h = PauliSum::from_signed(2, [(0.5, p("XZ")), (-0.5, p("XZ")), (-0.3, p("ZZ")), (0.1, p("-ZZ"))])
            .unwrap();
        assert_eq!(h.len(), 1);
        assert!((h.terms()[0].coefficient - 0.4).abs() < 1e-15);
        assert!(h.terms()[0].string.is_negative());
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let h = PauliSum::from_signed(3, [(0.1 + 0.2, p("XYZ")), (-1.0 / 3.0, p("IIZ")), (7.25e-9, p("ZZI"))])
            .unwrap();
        let back = PauliSum::parse(&h.to_text()).unwrap();
        assert_eq!(h, back);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = PauliSum::parse("# header\n0.5 XZ\n0.1 XQ\n").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 3, .. }));
        let err = PauliSum::parse("0.5 XZ\n0.1 XZZ\n").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 2, .. }));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let h = PauliSum::from_signed(13, [(1.0, PauliString::identity(13).unwrap())]).unwrap();
        assert!(matches!(h.dense(DEFAULT_DENSE_CAP), Err(PauliError::DenseCapExceeded(13, 12))));
    }

    #[test]
    fn parity_signature() {
        let part = SpinPartition::interleaved(4);
        assert_eq!(p("XXYY").spin_sector_parity_signature(&part), (true, true));
        assert_eq!(p("XZXZ").spin_sector_parity_signature(&part), (true, true));
        assert_eq!(p("XIII").spin_sector_parity_signature(&part), (false, true));
    }
}
