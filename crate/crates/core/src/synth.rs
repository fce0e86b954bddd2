//! Seeded random instances for tests, benchmarks and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Gate, GateCircuit, GateKind, PauliRotation};
use crate::layers::Layering;
use crate::pauli::{Pauli, PauliString};

/// Uniform random Clifford+T circuit over the full gate set.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, gates: usize) -> GateCircuit {
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| n >= 2 || k.arity() == 1)
        .collect();
    let mut c = GateCircuit::new(n);
    for _ in 0..gates {
        let kind = *kinds.choose(rng).expect("gate set is non-empty");
        let a = rng.gen_range(0..n);
        let qubits = if kind.arity() == 2 {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            vec![a, b]
        } else {
            vec![a]
        };
        c.push(Gate { kind, qubits }).expect("generated gates are in range");
    }
    c
}

pub fn random_pauli<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
            .collect();
        let p = PauliString::from_letters(&letters);
        if !p.is_identity() {
            return p;
        }
    }
}

/// Random pi/8 rotations with random signs.
pub fn random_pi8_rotations<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<PauliRotation> {
    (0..count)
        .map(|_| {
            let axis = random_pauli(rng, n);
            let axis = if rng.gen_bool(0.5) { axis.negated() } else { axis };
            PauliRotation::pi8(axis).expect("random axis is Hermitian and non-identity")
        })
        .collect()
}

/// Full-support instance: `depth` layers, each a single pi/8 rotation about
/// a uniformly random Pauli product that is non-identity on every qubit.
pub fn full_support_instance<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Layering {
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let rotations = (0..depth)
        .map(|_| {
            let axis: Vec<Pauli> = (0..n).map(|_| *letters.choose(rng).unwrap()).collect();
            PauliRotation::pi8(PauliString::from_letters(&axis)).unwrap()
        })
        .collect();
    Layering::sequential(n, rotations).expect("one rotation per layer")
}
