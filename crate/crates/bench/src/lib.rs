//! Seeded fixtures shared by the benchmarks.

use ftflow_core::synth::{random_circuit, random_pauli, random_pi8_rotations};
use ftflow_core::{GateCircuit, Layering, PauliString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pairs of random `n`-qubit Pauli strings.
pub fn pauli_pairs(n: usize, count: usize, seed: u64) -> Vec<(PauliString, PauliString)> {
    let mut r = rng(seed);
    (0..count).map(|_| (random_pauli(&mut r, n), random_pauli(&mut r, n))).collect()
}

pub fn circuit(n: usize, gates: usize, seed: u64) -> GateCircuit {
    random_circuit(&mut rng(seed), n, gates)
}

/// Sequential layering of `count` random pi/8 rotations.
pub fn sequential_layering(n: usize, count: usize, seed: u64) -> Layering {
    Layering::sequential(n, random_pi8_rotations(&mut rng(seed), n, count)).expect("valid rotations")
}
