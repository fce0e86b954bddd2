//! Dense-matrix ground truth for small circuits.
//!
//! Qubit 0 is the most significant bit of a basis index. Gate and rotation
//! matrices are built from their textbook definitions and the letters of a
//! Pauli string, never from the symplectic product code they are checking.

use num_complex::Complex64;

use crate::canon::CanonicalForm;
use crate::circuit::{Gate, GateCircuit, GateKind, PauliRotation};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli, PauliString};

pub const MAX_ORACLE_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseUnitary {
    pub fn identity(n: usize) -> Result<Self> {
        if n > MAX_ORACLE_QUBITS {
            return Err(Error::Guard(format!(
                "dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}"
            )));
        }
        let dim = 1 << n;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Ok(Self { n, dim, data })
    }

    pub fn from_rows(n: usize, rows: &[Vec<Complex64>]) -> Self {
        let dim = 1 << n;
        assert_eq!(rows.len(), dim);
        Self {
            n,
            dim,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn row_pair_update(&mut self, r0: usize, r1: usize, m: [[Complex64; 2]; 2]) {
        for c in 0..self.dim {
            let (a, b) = (self.data[r0 * self.dim + c], self.data[r1 * self.dim + c]);
            self.data[r0 * self.dim + c] = m[0][0] * a + m[0][1] * b;
            self.data[r1 * self.dim + c] = m[1][0] * a + m[1][1] * b;
        }
    }

    /// `U ← M_q · U` for a single-qubit matrix.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.bit(q);
        for r0 in (0..self.dim).filter(|r| r & mask == 0) {
            self.row_pair_update(r0, r0 | mask, m);
        }
    }

    /// `U ← M · U` for a matrix applied to `target` when `control` is set.
    fn apply_controlled(&mut self, control: usize, target: usize, m: [[Complex64; 2]; 2]) {
        let (cm, tm) = (self.bit(control), self.bit(target));
        for r0 in (0..self.dim).filter(|r| r & cm != 0 && r & tm == 0) {
            self.row_pair_update(r0, r0 | tm, m);
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = [[ONE * s, ONE * s], [ONE * s, -ONE * s]];
        let diag = |phase: Complex64| [[ONE, ZERO], [ZERO, phase]];
        let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let x = [[ZERO, ONE], [ONE, ZERO]];
        let y = [[ZERO, -I], [I, ZERO]];
        let z = diag(-ONE);
        let q = gate.qubits[0];
        match gate.kind {
            GateKind::H => self.apply_single(q, h),
            GateKind::S => self.apply_single(q, diag(I)),
            GateKind::Sdg => self.apply_single(q, diag(-I)),
            GateKind::T => self.apply_single(q, diag(t)),
            GateKind::Tdg => self.apply_single(q, diag(t.conj())),
            GateKind::X => self.apply_single(q, x),
            GateKind::Y => self.apply_single(q, y),
            GateKind::Z => self.apply_single(q, z),
            GateKind::Cnot => self.apply_controlled(q, gate.qubits[1], x),
            GateKind::Cz => self.apply_controlled(q, gate.qubits[1], z),
        }
    }

    /// `U ← P · U`.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let action = PauliAction::new(p);
        let mut out = vec![ZERO; self.data.len()];
        for r in 0..self.dim {
            let (target, coeff) = action.on_basis(r);
            for c in 0..self.dim {
                out[target * self.dim + c] = coeff * self.data[r * self.dim + c];
            }
        }
        self.data = out;
    }

    /// `U ← U · P`.
    pub fn apply_pauli_right(&mut self, p: &PauliString) {
        let action = PauliAction::new(p);
        let mut out = vec![ZERO; self.data.len()];
        for c in 0..self.dim {
            // column c of P has a single entry coeff at row target
            let (target, coeff) = action.on_basis(c);
            for r in 0..self.dim {
                out[r * self.dim + c] = self.data[r * self.dim + target] * coeff;
            }
        }
        self.data = out;
    }

    /// `U ← exp(-iφP) · U = (cos φ·I − i sin φ·P) · U`.
    pub fn apply_rotation(&mut self, r: &PauliRotation) {
        let phi = r.angle().radians();
        let mut rotated = self.clone();
        rotated.apply_pauli(r.axis());
        let (c, s) = (Complex64::new(phi.cos(), 0.0), Complex64::new(0.0, -phi.sin()));
        for (a, b) in self.data.iter_mut().zip(&rotated.data) {
            *a = c * *a + s * b;
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.data[r * self.dim + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    out[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Ok(Self {
            n: self.n,
            dim: d,
            data: out,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.adjoint().matmul(self).expect("same size");
        prod.max_abs_diff(&Self::identity(self.n).expect("size already checked"))
            .expect("same size")
    }

    /// `|tr(U†V)| / 2^n`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        let tr: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(tr.norm() / self.dim as f64)
    }
}

/// Action of a signed Pauli string on computational basis states.
struct PauliAction {
    n: usize,
    flip: usize,
    letters: Vec<Pauli>,
    global: Complex64,
}

impl PauliAction {
    fn new(p: &PauliString) -> Self {
        let n = p.num_qubits();
        let letters: Vec<Pauli> = p.letters().collect();
        let flip = letters
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, Pauli::X | Pauli::Y))
            .map(|(q, _)| 1 << (n - 1 - q))
            .sum();
        let global = [ONE, I, -ONE, -I][p.phase() as usize];
        Self {
            n,
            flip,
            letters,
            global,
        }
    }

    /// `P|b⟩ = coeff · |target⟩`.
    fn on_basis(&self, b: usize) -> (usize, Complex64) {
        let mut coeff = self.global;
        for (q, l) in self.letters.iter().enumerate() {
            let set = (b >> (self.n - 1 - q)) & 1 == 1;
            match l {
                Pauli::I | Pauli::X => {}
                // Z|1⟩ = -|1⟩
                Pauli::Z if set => coeff = -coeff,
                Pauli::Z => {}
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                Pauli::Y => coeff *= if set { -I } else { I },
            }
        }
        (b ^ self.flip, coeff)
    }
}

pub fn pauli_matrix(p: &PauliString) -> Result<DenseUnitary> {
    let mut u = DenseUnitary::identity(p.num_qubits())?;
    u.apply_pauli(p);
    Ok(u)
}

pub fn unitary_of_gates(gc: &GateCircuit) -> Result<DenseUnitary> {
    let mut u = DenseUnitary::identity(gc.num_qubits())?;
    for g in gc.gates() {
        u.apply_gate(g);
    }
    Ok(u)
}

pub fn unitary_of_rotations(rotations: &[PauliRotation], n: usize) -> Result<DenseUnitary> {
    let mut u = DenseUnitary::identity(n)?;
    for r in rotations {
        check_dim(n, r.num_qubits())?;
        u.apply_rotation(r);
    }
    Ok(u)
}

pub fn equivalent_up_to_phase(u: &DenseUnitary, v: &DenseUnitary, tol: f64) -> Result<bool> {
    Ok(u.overlap(v)? >= 1.0 - tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `|tr(U†V)| / 2^n` between the gate circuit and `pi8 ++ trace`.
    pub fidelity: f64,
    pub unitary_ok: bool,
    pub tableau_ok: bool,
    pub bases_ok: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.unitary_ok && self.tableau_ok && self.bases_ok
    }
}

/// Dense check of a canonical form against its source circuit.
///
/// The tableau is checked through `W · τ(g) = g · W` for every generator `g`,
/// which is `W† g W = τ(g)` with signs included.
pub fn verify_canonical_form(gc: &GateCircuit, cf: &CanonicalForm, tol: f64) -> Result<VerifyReport> {
    let n = gc.num_qubits();
    check_dim(n, cf.n)?;
    let reference = unitary_of_gates(gc)?;
    let rotations: Vec<PauliRotation> = cf.pi8.iter().chain(&cf.clifford_trace).cloned().collect();
    let candidate = unitary_of_rotations(&rotations, n)?;
    let fidelity = reference.overlap(&candidate)?;

    let w = unitary_of_rotations(&cf.clifford_trace, n)?;
    let mut tableau_ok = cf.tableau.num_qubits() == n;
    for q in 0..n.min(cf.tableau.num_qubits()) {
        for (letter, image) in [(Pauli::X, cf.tableau.x_image(q)), (Pauli::Z, cf.tableau.z_image(q))] {
            let mut lhs = w.clone();
            lhs.apply_pauli_right(image);
            let mut rhs = w.clone();
            rhs.apply_pauli(&PauliString::single(n, q, letter));
            tableau_ok &= lhs.max_abs_diff(&rhs)? <= tol;
        }
    }
    let bases_ok = cf.measurement_bases.len() == n
        && (0..n).all(|q| tableau_ok && &cf.measurement_bases[q] == cf.tableau.z_image(q));
    Ok(VerifyReport {
        fidelity,
        unitary_ok: fidelity >= 1.0 - tol,
        tableau_ok,
        bases_ok,
    })
}
