//! Noise sensitivity of the probes: Fisher-information susceptibility,
//! power-law fits, critical photon number, robustness and `(η, γ)` heatmaps.
//!
//! Susceptibilities are measured on the pure phase encoding `e^{−ix n_a}`
//! (the `V → 1` limit), where a NOON probe has `Q_xx = N²`. Under loss `ε`
//! on each arm it keeps `N²(1 − ε)^N`, and under collective dephasing
//! `N² e^{−εN²}`.

mod heatmap;
mod robustness;
mod susceptibility;

pub use heatmap::{decoherence_heatmap, heatmap_cell, CellValues, HeatmapCell, HeatmapSpec};
pub use robustness::{
    cat_coherence, cat_coherence_pipeline, hierarchy_table, robustness_index, squeezed_qfi_lossy, HierarchyRow,
    OperatingPoint,
};
pub use susceptibility::{
    critical_photon_number, estimate_susceptibility, estimate_susceptibility_adaptive, fit_scaling_exponent,
    noon_critical_photon_number, susceptibility, susceptibility_adaptive, susceptibility_scan, Channel, ProbeKind,
    QfiTarget, ScalingFit, SusceptibilityEstimate, SusceptibilityFit, ADAPTIVE_HALVINGS, ADAPTIVE_TARGET,
    CROSSOVER_TOLERANCE, CURVATURE_LIMIT, DEFAULT_WINDOW, MAX_EPS,
};
