//! Fault-tolerant compilation toolkit: Pauli algebra, Clifford+T
//! canonicalization, T-depth optimization, magic-state distillation
//! scheduling, resource estimates and small stabilizer-code experiments.

pub mod canon;
pub mod circuit;
pub mod codes;
pub mod error;
mod ga;
pub mod layers;
pub mod msd;
pub mod oracle;
pub mod pauli;
pub mod resources;
pub mod synth;

pub use canon::{canonicalize, CanonicalForm, CliffordTableau};
pub use circuit::{parse_circuit, Angle, Gate, GateCircuit, GateKind, PauliRotation, RotationCircuit};
pub use codes::{build_lookup, monte_carlo, NoiseModel, StabilizerCode};
pub use error::{Error, Result};
pub use layers::{build_layers, ga_optimize, greedy_optimize, GaConfig, Layering, MergeSet, OptimizeReport};
pub use msd::{Catalog, Demand, Objective, Protocol, Schedule};
pub use oracle::{verify_canonical_form, DenseUnitary, VerifyReport};
pub use pauli::{Pauli, PauliString, SymplecticBasis};
pub use resources::{CodeParams, Variant, WorkloadProfile};
