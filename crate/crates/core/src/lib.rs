//! Joint temperature and phase estimation in a dispersive Mach-Zehnder
//! interferometer.
//!
//! A two-level atom sits in one arm of the interferometer. When the atom is
//! excited it imprints a phase `x` per photon on the field, so the output
//! fringe carries information about both the phase and the atom's inverse
//! temperature `β`. The crate is organised in layers:
//!
//! * [`analytic`]: closed-form fringe, visibility and 2x2 Fisher information.
//! * [`circuit`]: density-matrix simulation of the four-qubit circuit and
//!   seeded shot sampling.
//! * [`fock`]: truncated Fock-space probes, loss and dephasing channels, and
//!   the SLD-based quantum Fisher information matrix.
//! * [`analysis`]: susceptibility, scaling fits, critical photon number,
//!   robustness and decoherence heatmaps.
//! * [`estimate`]: estimators working on shot records, the contrast
//!   shrinkage bias model and bootstrap uncertainties.

pub mod analysis;
pub mod analytic;
pub mod circuit;
pub mod error;
pub mod estimate;
pub mod fock;

pub use analytic::{FisherMatrix, FringeProbabilities, LandscapeGrid, ModelParams};
pub use error::{Error, Result};
