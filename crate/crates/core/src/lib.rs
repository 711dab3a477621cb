//! Simulation and analysis toolkit for continuous-time walks on
//! central-random glued trees.
//!
//! A glued tree joins two depth-`n`, `B`-ary trees leaf to leaf through a
//! random `B`-regular bipartite connection. A continuous-time quantum walk
//! started at one root reaches the opposite root in time linear in `n`,
//! while the classical random walk on the same graph stays exponentially
//! unlikely to arrive; this crate builds the graphs, propagates both walks,
//! locates and fits the transport peaks, and maps the reduced dynamics onto
//! an array of evanescently coupled waveguides.
//!
//! Module map:
//!
//! - [`graphs`]: glued-tree construction, validation, serialization, and the
//!   exact reduction of the quantum walk to a weighted chain.
//! - [`linalg`]: symmetric tridiagonal eigensolver, sparse symmetric
//!   matrices, and matrix-exponential actions (eigenbasis and Krylov).
//! - [`walks`]: quantum and classical propagators on the full graph and on
//!   the reduced chains, plus hitting-curve sweeps.
//! - [`analysis`]: first-peak location, depth/branching scaling sweeps, and
//!   power-law / linear fits.
//! - [`photonics`]: waveguide spacing design from an exponential coupling
//!   model, intensity-frame readout, and heralded coincidence statistics.

pub mod analysis;
pub mod error;
pub mod graphs;
pub mod linalg;
pub mod photonics;
pub mod walks;

pub use error::{Error, Result};
