//! Canonical form: every Clifford rotation is pushed past the pi/8 rotations
//! that follow it, leaving `pi/8 rotations ++ Clifford trace` in time order.
//!
//! Conjugation convention: for a Clifford `W` (the operator product of the
//! trace), the tableau stores `g ↦ W† g W`. Moving `C` from before to after a
//! rotation about `Q` rewrites the axis to `C† Q C`, so the axis of each pi/8
//! rotation in the output is the tableau image of its input axis at the point
//! where it occurs. Measuring `Z_q` after the whole circuit is the same as
//! measuring `W† Z_q W` right after the pi/8 prefix.

use serde::{Deserialize, Serialize};

use crate::circuit::{gate_to_rotations, GateCircuit, PauliRotation, RotationCircuit};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Heisenberg-picture images of `X_i` and `Z_i` under a Clifford.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x_images: (0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect(),
            z_images: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
        }
    }

    pub fn from_images(x_images: Vec<PauliString>, z_images: Vec<PauliString>) -> Result<Self> {
        let n = x_images.len();
        check_dim(n, z_images.len())?;
        for p in x_images.iter().chain(&z_images) {
            check_dim(n, p.num_qubits())?;
        }
        let t = Self {
            n,
            x_images,
            z_images,
        };
        if !t.is_valid() {
            return Err(Error::InvalidPauli(
                "tableau images do not preserve commutation relations".into(),
            ));
        }
        Ok(t)
    }

    /// Tableau of the operator product of `trace` (time order).
    pub fn from_trace(n: usize, trace: &[PauliRotation]) -> Result<Self> {
        let mut t = Self::identity(n);
        for r in trace {
            t.append(r)?;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.z_images[q]
    }

    /// Hermitian images with the X/Z anticommutation pattern.
    pub fn is_valid(&self) -> bool {
        let all: Vec<&PauliString> = self.x_images.iter().chain(&self.z_images).collect();
        if all.iter().any(|p| !p.is_hermitian()) {
            return false;
        }
        for (a, pa) in all.iter().enumerate() {
            for (b, pb) in all.iter().enumerate().skip(a + 1) {
                let should_anticommute = b == a + self.n;
                if pa.commutes_unchecked(pb) == should_anticommute {
                    return false;
                }
            }
        }
        true
    }

    /// Image of `p`, built from the generator images with exact phases.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        check_dim(self.n, p.num_qubits())?;
        let mut ys = 0u8;
        let mut out = PauliString::identity(self.n);
        for q in 0..self.n {
            let (x, z) = p.get(q).bits();
            // Y = i·X·Z
            if x && z {
                ys += 1;
            }
            if x {
                out = out.mul_unchecked(&self.x_images[q]);
            }
            if z {
                out = out.mul_unchecked(&self.z_images[q]);
            }
        }
        let phase = out.phase() + p.phase() + ys;
        Ok(out.with_phase(phase % 4))
    }

    /// Composes a later Clifford rotation onto this tableau.
    pub fn append(&mut self, rotation: &PauliRotation) -> Result<()> {
        check_dim(self.n, rotation.num_qubits())?;
        let axis = rotation.axis();
        // C† g C = i^e · P · g for generators g anticommuting with P, so the
        // new image is i^e · T(P) · T(g); pi/2 rotations negate g instead.
        let factor = match rotation_conjugation_factor(rotation)? {
            Some(e) => {
                let img = self.conjugate(axis)?;
                let phase = img.phase() + e;
                Some(img.with_phase(phase))
            }
            None => None,
        };
        let update = |img: &PauliString| match &factor {
            Some(f) => f.mul_unchecked(img),
            None => img.negated(),
        };
        for q in 0..self.n {
            let letter = axis.get(q);
            if matches!(letter, Pauli::Z | Pauli::Y) {
                self.x_images[q] = update(&self.x_images[q]);
            }
            if matches!(letter, Pauli::X | Pauli::Y) {
                self.z_images[q] = update(&self.z_images[q]);
            }
        }
        Ok(())
    }
}

/// For a pi/4-type rotation, the phase `e` with `C† g C = i^e · P · g` on
/// anticommuting `g`; `None` for pi/2 rotations, which negate `g`.
fn rotation_conjugation_factor(rotation: &PauliRotation) -> Result<Option<u8>> {
    let angle = rotation.angle();
    match angle.den() {
        4 => Ok(Some(if angle.num().rem_euclid(4) == 1 { 1 } else { 3 })),
        2 => Ok(None),
        _ => Err(Error::UnsupportedAngle {
            num: angle.num(),
            den: angle.den(),
        }),
    }
}

/// `C† Q C` for one Clifford rotation `C`, computed directly from the rule.
pub fn conjugate_by_rotation(clifford: &PauliRotation, q: &PauliString) -> Result<PauliString> {
    check_dim(clifford.num_qubits(), q.num_qubits())?;
    let p = clifford.axis();
    if p.commutes_unchecked(q) {
        return Ok(q.clone());
    }
    Ok(match rotation_conjugation_factor(clifford)? {
        Some(1) => p.merged_rotation_axis(q)?,
        Some(_) => p.merged_rotation_axis(q)?.negated(),
        None => q.negated(),
    })
}

pub fn tableau_conjugate(t: &CliffordTableau, p: &PauliString) -> Result<PauliString> {
    t.conjugate(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub n: usize,
    pub pi8: Vec<PauliRotation>,
    pub clifford_trace: Vec<PauliRotation>,
    pub tableau: CliffordTableau,
    pub measurement_bases: Vec<PauliString>,
}

impl CanonicalForm {
    pub fn t_count(&self) -> usize {
        self.pi8.len()
    }

    /// `pi8 ++ clifford_trace` as a rotation circuit.
    pub fn to_rotation_circuit(&self) -> RotationCircuit {
        RotationCircuit {
            n: self.n,
            rotations: self.pi8.iter().chain(&self.clifford_trace).cloned().collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CanonicalDoc::from(self)).expect("canonical form serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let doc: CanonicalDoc = serde_json::from_value(value)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        doc.try_into()
    }

    /// Structural invariants; the dense check lives in [`crate::oracle`].
    pub fn check_structure(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidPauli(m.to_string()));
        if self.pi8.iter().any(|r| !r.is_pi8()) {
            return fail("pi8 list contains a Clifford rotation");
        }
        if self.clifford_trace.iter().any(|r| r.is_pi8()) {
            return fail("Clifford trace contains a pi/8 rotation");
        }
        for r in self.pi8.iter().chain(&self.clifford_trace) {
            check_dim(self.n, r.num_qubits())?;
        }
        check_dim(self.n, self.tableau.num_qubits())?;
        if !self.tableau.is_valid() {
            return fail("tableau is not a Clifford");
        }
        if self.measurement_bases.len() != self.n
            || (0..self.n).any(|q| &self.measurement_bases[q] != self.tableau.z_image(q))
        {
            return fail("measurement bases disagree with the tableau");
        }
        Ok(())
    }
}

pub const CANONICAL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalDoc {
    schema_version: u32,
    n: usize,
    pi8: Vec<PauliRotation>,
    clifford_trace: Vec<PauliRotation>,
    tableau: CliffordTableau,
    measurement_bases: Vec<PauliString>,
}

impl From<&CanonicalForm> for CanonicalDoc {
    fn from(cf: &CanonicalForm) -> Self {
        Self {
            schema_version: CANONICAL_SCHEMA_VERSION,
            n: cf.n,
            pi8: cf.pi8.clone(),
            clifford_trace: cf.clifford_trace.clone(),
            tableau: cf.tableau.clone(),
            measurement_bases: cf.measurement_bases.clone(),
        }
    }
}

impl TryFrom<CanonicalDoc> for CanonicalForm {
    type Error = Error;
    fn try_from(doc: CanonicalDoc) -> Result<Self> {
        if doc.schema_version != CANONICAL_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        let tableau =
            CliffordTableau::from_images(doc.tableau.x_images, doc.tableau.z_images)?;
        let cf = CanonicalForm {
            n: doc.n,
            pi8: doc.pi8,
            clifford_trace: doc.clifford_trace,
            tableau,
            measurement_bases: doc.measurement_bases,
        };
        cf.check_structure()?;
        Ok(cf)
    }
}

/// Concatenated gate dictionary expansion.
pub fn to_rotation_circuit(gc: &GateCircuit) -> RotationCircuit {
    let n = gc.num_qubits();
    RotationCircuit {
        n,
        rotations: gc.gates().iter().flat_map(|g| gate_to_rotations(g, n)).collect(),
    }
}

pub fn push_cliffords(rc: &RotationCircuit) -> Result<CanonicalForm> {
    let n = rc.n;
    let mut tableau = CliffordTableau::identity(n);
    let mut pi8 = Vec::new();
    let mut trace = Vec::new();
    for r in &rc.rotations {
        check_dim(n, r.num_qubits())?;
        if r.is_pi8() {
            let axis = tableau.conjugate(r.axis())?;
            pi8.push(PauliRotation::new(axis, r.angle())?);
        } else {
            tableau.append(r)?;
            trace.push(r.clone());
        }
    }
    let measurement_bases = measurement_bases_of(&tableau);
    Ok(CanonicalForm {
        n,
        pi8,
        clifford_trace: trace,
        tableau,
        measurement_bases,
    })
}

pub fn canonicalize(gc: &GateCircuit) -> Result<CanonicalForm> {
    push_cliffords(&to_rotation_circuit(gc))
}

fn measurement_bases_of(t: &CliffordTableau) -> Vec<PauliString> {
    (0..t.num_qubits()).map(|q| t.z_image(q).clone()).collect()
}

pub fn measurement_bases(cf: &CanonicalForm) -> Vec<PauliString> {
    measurement_bases_of(&cf.tableau)
}
