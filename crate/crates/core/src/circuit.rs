//! Gate-level circuits, Pauli product rotations and the gate dictionary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::build_layers;
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Y,
    Z,
    Cnot,
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Cnot,
        GateKind::Cz,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
        }
    }

    /// Parses a lowercase mnemonic; `cx` is accepted for `cnot`.
    pub fn from_mnemonic(s: &str) -> Option<Self> {
        if s == "cx" {
            return Some(GateKind::Cnot);
        }
        Self::ALL.into_iter().find(|k| k.mnemonic() == s)
    }

    pub fn is_t_type(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Self {
            kind,
            qubits: qubits.to_vec(),
        }
    }

    fn check(&self, n: usize) -> std::result::Result<(), String> {
        if self.qubits.len() != self.kind.arity() {
            return Err(format!(
                "{} expects {} qubit index(es), got {}",
                self.kind.mnemonic(),
                self.kind.arity(),
                self.qubits.len()
            ));
        }
        if let Some(&q) = self.qubits.iter().find(|&&q| q >= n) {
            return Err(format!("qubit index {q} out of range for {n} qubits"));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(format!("duplicate qubit index {}", self.qubits[0]));
        }
        Ok(())
    }
}

/// Gates in time order, earliest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n).map_err(|message| Error::Parse { line: 0, message })?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.is_t_type()).count()
    }
}

/// Parses the line format: `qubits N` header, then `mnemonic q [q]` per line.
pub fn parse_circuit(text: &str) -> Result<GateCircuit> {
    let mut circuit: Option<GateCircuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        let args: Vec<&str> = tokens.collect();
        let err = |message: String| Error::Parse { line, message };

        let Some(c) = circuit.as_mut() else {
            if head != "qubits" || args.len() != 1 {
                return Err(err("expected header `qubits N`".into()));
            }
            let n = args[0]
                .parse::<usize>()
                .map_err(|_| err(format!("invalid qubit count {:?}", args[0])))?;
            circuit = Some(GateCircuit::new(n));
            continue;
        };

        let kind =
            GateKind::from_mnemonic(head).ok_or_else(|| err(format!("unknown gate {head:?}")))?;
        let qubits = args
            .iter()
            .map(|a| {
                a.parse::<usize>()
                    .map_err(|_| err(format!("invalid qubit index {a:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let gate = Gate { kind, qubits };
        gate.check(c.n).map_err(err)?;
        c.gates.push(gate);
    }
    circuit.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing `qubits N` header".into(),
    })
}

pub fn render_circuit(c: &GateCircuit) -> String {
    let mut out = format!("qubits {}\n", c.n);
    for g in &c.gates {
        out.push_str(g.kind.mnemonic());
        for q in &g.qubits {
            out.push_str(&format!(" {q}"));
        }
        out.push('\n');
    }
    out
}

impl FromStr for GateCircuit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_circuit(s)
    }
}

impl fmt::Display for GateCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_circuit(self))
    }
}

/// Rotation angle `num/den · π` with `den ∈ {2, 4, 8}` and odd `num`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Angle {
    num: i64,
    den: u32,
}

impl Angle {
    pub const PI_8: Angle = Angle { num: 1, den: 8 };
    pub const PI_4: Angle = Angle { num: 1, den: 4 };
    pub const PI_2: Angle = Angle { num: 1, den: 2 };

    pub fn new(num: i64, den: u32) -> Result<Self> {
        let unsupported = Error::UnsupportedAngle { num, den };
        if den == 0 || !den.is_power_of_two() || num == 0 {
            return Err(unsupported);
        }
        let shift = num.trailing_zeros().min(den.trailing_zeros());
        let (rn, rd) = (num >> shift, den >> shift);
        if ![2, 4, 8].contains(&rd) {
            return Err(unsupported);
        }
        Ok(Self { num: rn, den: rd })
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn is_pi8(self) -> bool {
        self.den == 8
    }

    pub fn is_clifford(self) -> bool {
        self.den != 8
    }

    pub fn radians(self) -> f64 {
        std::f64::consts::PI * self.num as f64 / self.den as f64
    }
}

impl std::ops::Neg for Angle {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            num: -self.num,
            den: self.den,
        }
    }
}

/// `exp(-i·angle·axis)` with a Hermitian, non-identity, positively signed axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RotationRepr", into = "RotationRepr")]
pub struct PauliRotation {
    axis: PauliString,
    angle: Angle,
}

impl PauliRotation {
    /// A negative axis is folded into the angle: `(-P, θ)` becomes `(P, -θ)`.
    pub fn new(axis: PauliString, angle: Angle) -> Result<Self> {
        if !axis.is_hermitian() {
            return Err(Error::InvalidPauli(format!("{axis} is not Hermitian")));
        }
        if axis.is_identity() {
            return Err(Error::InvalidPauli("rotation axis is the identity".into()));
        }
        Ok(if axis.is_negative() {
            Self {
                axis: axis.unsigned(),
                angle: -angle,
            }
        } else {
            Self { axis, angle }
        })
    }

    pub fn pi8(axis: PauliString) -> Result<Self> {
        Self::new(axis, Angle::PI_8)
    }

    pub fn axis(&self) -> &PauliString {
        &self.axis
    }

    pub fn angle(&self) -> Angle {
        self.angle
    }

    pub fn num_qubits(&self) -> usize {
        self.axis.num_qubits()
    }

    pub fn is_pi8(&self) -> bool {
        self.angle.is_pi8()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.axis.commutes_unchecked(&other.axis)
    }
}

impl fmt::Display for PauliRotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}/{}]", self.axis, self.angle.num, self.angle.den)
    }
}

#[derive(Serialize, Deserialize)]
struct RotationRepr {
    axis: PauliString,
    num: i64,
    den: u32,
}

impl TryFrom<RotationRepr> for PauliRotation {
    type Error = Error;
    fn try_from(r: RotationRepr) -> Result<Self> {
        PauliRotation::new(r.axis, Angle::new(r.num, r.den)?)
    }
}

impl From<PauliRotation> for RotationRepr {
    fn from(r: PauliRotation) -> Self {
        RotationRepr {
            axis: r.axis,
            num: r.angle.num,
            den: r.angle.den,
        }
    }
}

/// Rotations in time order, earliest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationCircuit {
    pub n: usize,
    pub rotations: Vec<PauliRotation>,
}

impl RotationCircuit {
    pub fn new(n: usize, rotations: Vec<PauliRotation>) -> Result<Self> {
        if let Some(r) = rotations.iter().find(|r| r.num_qubits() != n) {
            return Err(Error::Dimension {
                expected: n,
                found: r.num_qubits(),
            });
        }
        Ok(Self { n, rotations })
    }
}

fn embed(n: usize, letters: &[(usize, Pauli)]) -> PauliString {
    let mut p = PauliString::identity(n);
    for &(q, l) in letters {
        p.set(q, l);
    }
    p
}

fn rot(n: usize, letters: &[(usize, Pauli)], num: i64, den: u32) -> PauliRotation {
    PauliRotation {
        axis: embed(n, letters),
        angle: Angle { num, den },
    }
}

/// Dictionary expansion of one gate into Pauli product rotations (time order).
pub fn gate_to_rotations(gate: &Gate, n: usize) -> Vec<PauliRotation> {
    use Pauli::{X, Y, Z};
    let q = gate.qubits[0];
    match gate.kind {
        GateKind::T => vec![rot(n, &[(q, Z)], 1, 8)],
        GateKind::Tdg => vec![rot(n, &[(q, Z)], -1, 8)],
        GateKind::S => vec![rot(n, &[(q, Z)], 1, 4)],
        GateKind::Sdg => vec![rot(n, &[(q, Z)], -1, 4)],
        GateKind::H => vec![
            rot(n, &[(q, Z)], 1, 4),
            rot(n, &[(q, X)], 1, 4),
            rot(n, &[(q, Z)], 1, 4),
        ],
        GateKind::X => vec![rot(n, &[(q, X)], 1, 2)],
        GateKind::Y => vec![rot(n, &[(q, Y)], 1, 2)],
        GateKind::Z => vec![rot(n, &[(q, Z)], 1, 2)],
        GateKind::Cnot | GateKind::Cz => {
            let t = gate.qubits[1];
            let target = if gate.kind == GateKind::Cnot { X } else { Z };
            vec![
                rot(n, &[(q, Z), (t, target)], 1, 4),
                rot(n, &[(t, target)], -1, 4),
                rot(n, &[(q, Z)], -1, 4),
            ]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub t_count: usize,
    /// ASAP layer count of the pi/8 rotations; an upper bound on T-depth.
    pub naive_t_depth: usize,
}

pub fn circuit_metrics(rc: &RotationCircuit) -> CircuitMetrics {
    let pi8: Vec<PauliRotation> = rc.rotations.iter().filter(|r| r.is_pi8()).cloned().collect();
    let t_count = pi8.len();
    let naive_t_depth = build_layers(rc.n, pi8)
        .map(|l| l.depth())
        .expect("filtered rotations are all pi/8");
    CircuitMetrics {
        t_count,
        naive_t_depth,
    }
}
