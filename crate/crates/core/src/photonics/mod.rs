//! Waveguide-array experiment support: coupling calibration and layout
//! design on the way in, camera frames and coincidence counts on the way
//! out.
//!
//! The chain Hamiltonian maps onto an array of evanescently coupled
//! waveguides: site index becomes waveguide index, the hopping rates
//! become couplings per millimeter, and dimensionless time becomes
//! propagation distance times the physical rate. This module turns target
//! couplings into gap spacings through an exponential coupling model,
//! and turns measured output frames and heralded coincidences back into
//! probabilities and a single-photon purity figure.

mod counts;
mod coupling;
mod frame;

pub use counts::{alpha, AlphaEstimate, CoincidenceCounts};
pub use coupling::{
    design_layout, fit_coupling_model, CalibrationSample, CouplingFit, CouplingModel,
    WaveguideLayout,
};
pub use frame::{frame_probabilities, hitting_from_frame, Frame, FrameProbabilities, Spot};
