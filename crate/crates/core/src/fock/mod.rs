//! Truncated Fock-space engine: probe states, loss and dephasing channels,
//! and the quantum Fisher information of the encoded, noisy probe.
//!
//! Convention for the `(η, γ)` noise landscape: both interferometer arms see
//! the same channel, with intensity transmission `√η` and dephasing `γ/2`
//! each, so that an `N`-photon coherence decays as `η^{N/2} e^{−γN²}`.
//! Coincidence-style bookkeeping, where the coherence scales as `η^N`, is
//! obtained by passing `η²` instead.

mod channels;
mod density;
mod family;
mod sld;
mod state;

pub use channels::{
    amplitude_damp, amplitude_damping_kraus, apply_kraus_dense, effective_visibility, effective_visibility_pipeline,
    kraus_completeness_error, phase_damp, phase_damping_kraus, phase_encode, thermal_phase_encode, ChannelSettings,
    NoiseParams, RawRates,
};
pub use density::{Charge, FockDensity};
pub use family::{Encoding, Probe, ProbeFamily};
pub use sld::{
    classical_fim, eigenvalues, incompatibility, qfim_finite_difference, qfim_from_derivatives, qfim_numeric,
    sld_from_derivatives, sld_pair, support_blocks, DensityOperator, QfimReport, SldConfig, SldPair,
    SUPPORT_TOLERANCE,
};
pub use state::{
    default_cat_cutoff, default_tmsv_cutoff, make_cat, make_noon, make_tmsv, make_tmsv_with_bound, FockSpace,
    FockState, LEAKAGE_BOUND,
};
