//! Dense-free linear algebra for the walk propagators.
//!
//! Everything here is specialized to the two matrix shapes the walks
//! produce: symmetric tridiagonal (reduced chains, Lanczos projections) and
//! sparse symmetric (full-graph adjacency and classical generators).

mod krylov;
mod sparse;
mod tridiagonal;

pub use krylov::{expm_action_krylov, KrylovOptions};
pub use sparse::SparseSymmetric;
pub use tridiagonal::{eigh_tridiagonal, expm_action_eigen, EigenSystem, Propagation, SymTridiagonal};
