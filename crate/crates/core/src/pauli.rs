//! Signed n-qubit Pauli operators in symplectic form.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit, packed into
//! 64-bit words, plus a global factor `i^phase`. The per-qubit letter is
//! `I`, `X`, `Z` or `Y` for `(x, z)` = `(0,0)`, `(1,0)`, `(0,1)`, `(1,1)`, where
//! `Y` is the Hermitian Pauli-Y matrix, so the operator is exactly
//! `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{check_dim, Error, Result};

type Words = SmallVec<[u64; 2]>;

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Signed Pauli operator `i^phase * P_0 ⊗ ... ⊗ P_{n-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Words,
    z: Words,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        Self {
            n,
            x: smallvec![0; w],
            z: smallvec![0; w],
            phase: 0,
        }
    }

    /// `letter` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(q, letter);
        p
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `e` of the global factor `i^e`, in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Hermitian operators carry an overall sign of +1 or -1.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    /// Same letters with phase 0.
    pub fn unsigned(&self) -> Self {
        self.clone().with_phase(0)
    }

    pub fn negated(&self) -> Self {
        self.clone().with_phase(self.phase + 2)
    }

    pub fn get(&self, q: usize) -> Pauli {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, letter: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (x, z) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(move |q| self.get(q))
    }

    /// Qubits where the operator acts non-trivially.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&q| self.get(q) != Pauli::I)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Equal letters, phases ignored.
    pub fn same_letters(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Exact operator product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        // Per qubit: XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut x = Words::with_capacity(self.x.len());
        let mut z = Words::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (a_x, a_y, a_z) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (b_x, b_y, b_z) = (x2 & !z2, x2 & z2, !x2 & z2);
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones();
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        Self {
            n: self.n,
            x,
            z,
            phase: phase as u8,
        }
    }

    /// Symplectic inner product is zero. Phases are ignored.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        parity & 1 == 0
    }

    /// The Hermitian operator `i·p·q` for anticommuting Hermitian `p`, `q`.
    pub fn merged_rotation_axis(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        if !self.is_hermitian() || !other.is_hermitian() {
            return Err(Error::InvalidPauli("rotation axes must be Hermitian".into()));
        }
        if self.commutes_unchecked(other) {
            return Err(Error::CommutingAxes);
        }
        let prod = self.mul_unchecked(other);
        let phase = prod.phase + 1;
        Ok(prod.with_phase(phase))
    }

    /// Row of the `2n`-column symplectic matrix: X words then Z words.
    pub(crate) fn symplectic_row(&self) -> Vec<u64> {
        self.x.iter().chain(&self.z).copied().collect()
    }
}

/// Full row rank of the symplectic matrix over GF(2).
pub fn independent(set: &[PauliString]) -> Result<bool> {
    let Some(first) = set.first() else {
        return Ok(true);
    };
    let mut basis = SymplecticBasis::new(first.num_qubits());
    for p in set {
        if !basis.insert(p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// GF(2) row-reduced span of Pauli operators, phases ignored.
#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    n: usize,
    // (pivot column, row) kept in insertion order; each row is reduced
    // against all earlier pivots.
    rows: Vec<(usize, Vec<u64>)>,
}

impl SymplecticBasis {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new() }
    }

    pub fn from_generators(gens: &[PauliString]) -> Result<Self> {
        let n = gens.first().map_or(0, PauliString::num_qubits);
        let mut b = Self::new(n);
        for g in gens {
            b.insert(g)?;
        }
        Ok(b)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut row: Vec<u64>) -> Vec<u64> {
        for (pivot, basis_row) in &self.rows {
            if (row[pivot / 64] >> (pivot % 64)) & 1 == 1 {
                for (r, b) in row.iter_mut().zip(basis_row) {
                    *r ^= b;
                }
            }
        }
        row
    }

    /// Adds `p`; returns false when it was already in the span.
    pub fn insert(&mut self, p: &PauliString) -> Result<bool> {
        check_dim(self.n, p.num_qubits())?;
        let row = self.reduce(p.symplectic_row());
        let pivot = row
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        match pivot {
            Some(col) => {
                self.rows.push((col, row));
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub fn contains(&self, p: &PauliString) -> Result<bool> {
        check_dim(self.n, p.num_qubits())?;
        Ok(self.reduce(p.symplectic_row()).iter().all(|&w| w == 0))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for l in self.letters() {
            write!(f, "{}", l.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(rest) = t.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (0, rest)
        } else {
            (0, t)
        };
        // Lower-case `i` after the sign marks an imaginary phase.
        let (phase, body) = match body.strip_prefix('i') {
            Some(rest) => (phase + 1, rest),
            None => (phase, body),
        };
        if body.is_empty() {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        let letters = body
            .chars()
            .map(|c| Pauli::from_letter(c).ok_or_else(|| Error::InvalidPauli(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_letters(&letters).with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn products() {
        let xx = p("X").multiply(&p("X")).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.phase(), 0);

        let zx = p("Z").multiply(&p("X")).unwrap();
        assert_eq!(zx.get(0), Pauli::Y);
        assert_eq!(zx.phase(), 1);

        assert_eq!(p("ZI").multiply(&p("IX")).unwrap(), p("ZX"));
        assert!(matches!(
            p("Z").multiply(&p("ZZ")),
            Err(Error::Dimension { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn commutation() {
        assert!(!p("Z").commutes(&p("X")).unwrap());
        assert!(p("ZZ").commutes(&p("XX")).unwrap());
        assert!(!p("ZZI").commutes(&p("IXX")).unwrap());
        assert!(p("-Y").commutes(&p("Y")).unwrap());
        assert!(p("X").commutes(&p("XI")).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(p("III").weight(), 0);
        assert_eq!(p("XIZ").weight(), 2);
        assert_eq!(p("YY").weight(), 2);
    }

    #[test]
    fn merged_axes() {
        assert_eq!(p("Z").merged_rotation_axis(&p("X")).unwrap(), p("-Y"));
        assert_eq!(p("ZZ").merged_rotation_axis(&p("XI")).unwrap(), p("-YZ"));
        assert_eq!(
            p("Z").merged_rotation_axis(&p("Z")),
            Err(Error::CommutingAxes)
        );
    }

    #[test]
    fn independence() {
        assert!(independent(&[p("ZZI"), p("IZZ")]).unwrap());
        assert!(!independent(&[p("ZZ"), p("ZZ")]).unwrap());
        assert!(!independent(&[p("ZZI"), p("IZZ"), p("ZIZ")]).unwrap());
        assert!(!independent(&[p("ZZI"), p("-ZZI")]).unwrap());
        assert!(!independent(&[p("III")]).unwrap());
    }

    #[test]
    fn text_form() {
        assert_eq!(p("-YIZ").to_string(), "-YIZ");
        assert_eq!(p("XY").to_string(), "+XY");
        assert_eq!(p("+XY"), p("XY"));
        assert!("".parse::<PauliString>().is_err());
        assert!("+XQ".parse::<PauliString>().is_err());
        let iy = p("Z").multiply(&p("X")).unwrap();
        assert_eq!(iy.to_string(), "+iY");
    }

    #[test]
    fn wide_strings_span_words() {
        let mut a = PauliString::identity(130);
        a.set(0, Pauli::X);
        a.set(129, Pauli::Z);
        let mut b = PauliString::identity(130);
        b.set(129, Pauli::X);
        assert_eq!(a.weight(), 2);
        assert!(!a.commutes(&b).unwrap());
        let text = a.to_string();
        assert_eq!(text.parse::<PauliString>().unwrap(), a);
        let prod = a.multiply(&b).unwrap();
        assert_eq!(prod.get(129), Pauli::Y);
        assert_eq!(prod.phase(), 1);
    }

    #[test]
    fn basis_membership() {
        let basis = SymplecticBasis::from_generators(&[p("ZZI"), p("IZZ")]).unwrap();
        assert_eq!(basis.rank(), 2);
        assert!(basis.contains(&p("ZIZ")).unwrap());
        assert!(basis.contains(&p("III")).unwrap());
        assert!(!basis.contains(&p("XXX")).unwrap());
    }
}
