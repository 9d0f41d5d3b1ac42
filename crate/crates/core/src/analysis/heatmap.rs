use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::robustness::OperatingPoint;
use crate::analytic::{linspace, scalar_figures};
use crate::error::{invalid, Result};
use crate::fock::{ChannelSettings, Encoding, NoiseParams, Probe, ProbeFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSpec {
    pub eta_range: (f64, f64),
    pub gamma_range: (f64, f64),
    pub n_eta: usize,
    pub n_gamma: usize,
    pub probe: Probe,
    pub cutoff: Option<usize>,
    pub at: OperatingPoint,
    pub eigen_floor_rel: f64,
}

impl HeatmapSpec {
    pub fn new(probe: Probe) -> Self {
        Self {
            eta_range: (0.5, 1.0),
            gamma_range: (0.0, 0.1),
            n_eta: 20,
            n_gamma: 20,
            probe,
            cutoff: None,
            at: OperatingPoint::default(),
            eigen_floor_rel: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (e0, e1) = self.eta_range;
        if !(e0 > 0.0 && e0 < e1 && e1 <= 1.0) {
            return Err(invalid("eta_range", format!("[{e0}, {e1}] must be a non-empty part of (0, 1]")));
        }
        let (g0, g1) = self.gamma_range;
        if !(g0 >= 0.0 && g0 < g1 && g1.is_finite()) {
            return Err(invalid("gamma_range", format!("[{g0}, {g1}] must be a non-empty part of [0, ∞)")));
        }
        if self.n_eta < 2 || self.n_gamma < 2 {
            return Err(invalid("resolution", "need at least 2 points per axis"));
        }
        if !(self.eigen_floor_rel > 0.0) {
            return Err(invalid("eigen_floor", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellValues {
    pub f_bb: f64,
    pub f_xx: f64,
    pub f_bx: f64,
    pub f_eff: f64,
    pub incompatibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub eta: f64,
    pub gamma: f64,
    /// Per-cell failures are kept as messages so the sweep can continue.
    pub values: std::result::Result<CellValues, String>,
}

pub fn heatmap_cell(family: &ProbeFamily, at: &OperatingPoint, noise: &NoiseParams, eigen_floor_rel: f64) -> Result<CellValues> {
    let fam = family.with_channels(ChannelSettings::from_noise(noise));
    let report = fam.qfim(at.beta, at.x, eigen_floor_rel)?;
    let q = report.qfim;
    Ok(CellValues {
        f_bb: q.f_bb,
        f_xx: q.f_xx,
        f_bx: q.f_bx,
        f_eff: scalar_figures(&q)?.f_eff,
        incompatibility: report.incompatibility,
    })
}

/// QFIM over an `(η, γ)` grid, η outer. Cells are evaluated in parallel and
/// returned in row-major order.
pub fn decoherence_heatmap(spec: &HeatmapSpec) -> Result<Vec<HeatmapCell>> {
    spec.validate()?;
    let family = ProbeFamily::from_probe(
        &spec.probe,
        spec.cutoff,
        Encoding::Thermal {
            hbar_omega0: spec.at.hbar_omega0,
        },
        ChannelSettings::identity(),
    )?;
    let etas = linspace(spec.eta_range, spec.n_eta);
    let gammas = linspace(spec.gamma_range, spec.n_gamma);
    let cells: Vec<(f64, f64)> = etas
        .iter()
        .flat_map(|&e| gammas.iter().map(move |&g| (e, g)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(eta, gamma)| {
            let values = NoiseParams::new(eta, gamma)
                .and_then(|n| heatmap_cell(&family, &spec.at, &n, spec.eigen_floor_rel))
                .map_err(|e| e.to_string());
            HeatmapCell { eta, gamma, values }
        })
        .collect())
}
