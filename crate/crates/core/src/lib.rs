//! Multi-product formula simulation of Pauli-sum Hamiltonians: product
//! formulas, BCH error operators, nested-commutator norms and resource bounds.

pub mod bch;
pub mod bounds;
pub mod commutators;
pub mod dense;
pub mod error;
pub mod fit;
pub mod hamiltonian;
pub mod mpf;
pub mod pauli;
pub mod trotter;

pub use error::{Error, Result};
pub use hamiltonian::HamiltonianSpec;
pub use pauli::{NormConfig, NormMode, Pauli, PauliString, PauliSum, PauliTerm};
pub use trotter::{ProductFormulaPlan, TrotterEvaluator};
