use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channels::ChannelSettings;
use super::density::FockDensity;
use super::sld::{qfim_finite_difference, qfim_from_derivatives, QfimReport, SldConfig};
use super::state::{
    default_cat_cutoff, default_tmsv_cutoff, make_cat, make_noon, make_tmsv, FockState, LEAKAGE_BOUND,
};
use crate::analytic::thermal_populations;
use crate::error::Result;

/// Input states of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Probe {
    Noon { n: u32 },
    Cat { alpha_re: f64, alpha_im: f64 },
    Squeezed { r: f64 },
}

impl Probe {
    pub fn cat(alpha: Complex64) -> Self {
        Probe::Cat {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
        }
    }

    /// Two-mode squeezed vacuum with `sinh² r = n_bar` photons per mode.
    pub fn squeezed_with_photons(n_bar: f64) -> Self {
        Probe::Squeezed { r: n_bar.sqrt().asinh() }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Probe::Noon { .. } => "noon",
            Probe::Cat { .. } => "cat",
            Probe::Squeezed { .. } => "squeezed",
        }
    }

    pub fn default_cutoff(&self) -> usize {
        match *self {
            Probe::Noon { n } => n as usize,
            Probe::Cat { alpha_re, alpha_im } => default_cat_cutoff(Complex64::new(alpha_re, alpha_im)),
            Probe::Squeezed { r } => default_tmsv_cutoff(r, LEAKAGE_BOUND),
        }
    }

    pub fn build(&self, cutoff: Option<usize>) -> Result<FockState> {
        let c = cutoff.unwrap_or_else(|| self.default_cutoff());
        match *self {
            Probe::Noon { n } => make_noon(n, c),
            Probe::Cat { alpha_re, alpha_im } => make_cat(Complex64::new(alpha_re, alpha_im), c),
            Probe::Squeezed { r } => make_tmsv(r, c),
        }
    }
}

/// How `(β, x)` act on the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoding {
    /// Phase `x` per photon on mode `a`, applied only when the thermal atom
    /// is excited.
    Thermal { hbar_omega0: f64 },
    /// Unconditional phase `x` per photon on mode `a`; β is inert.
    PhaseOnly,
}

/// A probe pushed through an encoding and a fixed noise stage, viewed as a
/// density-valued function of `(β, x)`.
#[derive(Debug, Clone)]
pub struct ProbeFamily {
    rho0: FockDensity,
    pub encoding: Encoding,
    pub channels: ChannelSettings,
}

impl ProbeFamily {
    pub fn new(state: &FockState, encoding: Encoding, channels: ChannelSettings) -> Self {
        Self {
            rho0: FockDensity::from_state(state),
            encoding,
            channels,
        }
    }

    pub fn from_probe(probe: &Probe, cutoff: Option<usize>, encoding: Encoding, channels: ChannelSettings) -> Result<Self> {
        Ok(Self::new(&probe.build(cutoff)?, encoding, channels))
    }

    pub fn with_channels(&self, channels: ChannelSettings) -> Self {
        Self {
            channels,
            ..self.clone()
        }
    }

    pub fn input(&self) -> &FockDensity {
        &self.rho0
    }

    fn encode_factor(&self, beta: f64, x: f64, qa: i32) -> Complex64 {
        let phase = Complex64::from_polar(1.0, -x * qa as f64);
        match self.encoding {
            Encoding::Thermal { hbar_omega0 } => {
                let (pg, pe) = thermal_populations(beta, hbar_omega0);
                pg + pe * phase
            }
            Encoding::PhaseOnly => phase,
        }
    }

    pub fn density(&self, beta: f64, x: f64) -> FockDensity {
        let enc = self.rho0.scale_sectors(|(qa, _)| self.encode_factor(beta, x, qa));
        self.channels.apply(&enc)
    }

    /// `(ρ, ∂_β ρ, ∂_x ρ)`, differentiated through the encoding analytically.
    /// The noise stage is linear and parameter free, so it is applied to the
    /// derivatives unchanged.
    pub fn density_with_derivatives(&self, beta: f64, x: f64) -> (FockDensity, FockDensity, FockDensity) {
        let (pe, dpe) = match self.encoding {
            Encoding::Thermal { hbar_omega0 } => {
                let (pg, pe) = thermal_populations(beta, hbar_omega0);
                (pe, -hbar_omega0 * pg * pe)
            }
            Encoding::PhaseOnly => (1.0, 0.0),
        };
        let d_beta = if dpe == 0.0 {
            FockDensity::zeros(self.rho0.space())
        } else {
            self.rho0
                .scale_sectors(|(qa, _)| dpe * (Complex64::from_polar(1.0, -x * qa as f64) - 1.0))
        };
        let d_x = self
            .rho0
            .scale_sectors(|(qa, _)| Complex64::new(0.0, -(qa as f64)) * pe * Complex64::from_polar(1.0, -x * qa as f64));
        (
            self.density(beta, x),
            self.channels.apply(&d_beta),
            self.channels.apply(&d_x),
        )
    }

    /// QFIM and incompatibility from exact derivatives.
    pub fn qfim(&self, beta: f64, x: f64, eigen_floor_rel: f64) -> Result<QfimReport> {
        let (rho, db, dx) = self.density_with_derivatives(beta, x);
        qfim_from_derivatives(&rho, &db, &dx, eigen_floor_rel)
    }

    /// QFIM from central differences with the step-halving guard.
    pub fn qfim_finite_difference(&self, beta: f64, x: f64, cfg: &SldConfig) -> Result<QfimReport> {
        qfim_finite_difference(|b, xx| Ok(self.density(b, xx)), (beta, x), cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::channels::NoiseParams;

    #[test]
    fn exact_and_finite_difference_routes_agree() {
        let fam = ProbeFamily::from_probe(
            &Probe::Squeezed { r: 0.6 },
            Some(20),
            Encoding::Thermal { hbar_omega0: 1.0 },
            ChannelSettings::from_noise(&NoiseParams::new(0.85, 0.01).unwrap()),
        )
        .unwrap();
        let a = fam.qfim(0.5, 0.7, 1e-10).unwrap();
        let b = fam.qfim_finite_difference(0.5, 0.7, &SldConfig::default()).unwrap();
        assert!(a.qfim.max_abs_diff(&b.qfim) < 1e-6);
        assert!((a.incompatibility - b.incompatibility).abs() < 1e-6);
    }

    #[test]
    fn pure_noon_with_doubled_phase_reaches_four_n_squared() {
        for n in 1..=5u32 {
            let state = make_noon(n, n as usize).unwrap();
            let fam = ProbeFamily::new(&state, Encoding::PhaseOnly, ChannelSettings::identity());
            // Encoding 2x instead of x quadruples the phase information.
            let r = qfim_finite_difference(|b, x| Ok(fam.density(b, 2.0 * x)), (0.0, 0.3), &SldConfig::default()).unwrap();
            assert!((r.qfim.f_xx - 4.0 * (n * n) as f64).abs() < 1e-4);
        }
    }

    #[test]
    fn noiseless_column_matches_pure_state() {
        let p = Probe::cat(Complex64::new(2.0, 0.0));
        let fam = ProbeFamily::from_probe(&p, None, Encoding::PhaseOnly, ChannelSettings::identity()).unwrap();
        let r = fam.qfim(0.0, 0.4, 1e-10).unwrap();
        let state = p.build(None).unwrap();
        let pops = fam.input().populations();
        let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let second: f64 = pops.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
        assert!((r.qfim.f_xx - 4.0 * (second - mean * mean)).abs() < 1e-8);
        assert!((mean - state.mean_photons().0).abs() < 1e-12);
    }
}
