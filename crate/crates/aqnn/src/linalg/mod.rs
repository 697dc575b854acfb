//! Dense complex linear algebra: matrices, eigensolvers, random ensembles,
//! and quantum-state utilities.
//!
//! Index convention, fixed globally: on a tensor space `A ⊗ B` the `A` index
//! is the major (slow) index, so the product basis vector `|a⟩|b⟩` has flat
//! index `a * dim_b + b`. Everything downstream (Choi operators, partial
//! traces, transfer matrices) relies on this single convention.

mod eig;
mod matrix;
mod rng;
mod state;

pub use eig::{eig_general, eig_hermitian, invert, singular_values, HermitianEig};
pub use matrix::{Complex64, ComplexMatrix};
pub use rng::{haar_unitary, random_ginibre, random_pure_state, SeedStream};
pub use state::{
    is_psd, operator_rank, partial_trace, purify, tensor_product, trace_distance, BipartiteDims,
    DensityMatrix, PureState, Subsystem, Tolerances,
};
