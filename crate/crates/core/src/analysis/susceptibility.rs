use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{ChannelSettings, Encoding, Probe, ProbeFamily};

/// Noise channel whose first-order effect is being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Loss probability `ε` on every arm.
    #[serde(rename = "ad")]
    AmplitudeDamping,
    /// Collective dephasing `e^{−(ε/2)(ΔJ_z)²}` generated by `(n_a − n_b)/2`.
    #[serde(rename = "pd")]
    DifferentialDephasing,
}

impl Channel {
    pub fn settings(&self, eps: f64) -> ChannelSettings {
        match self {
            Channel::AmplitudeDamping => ChannelSettings::loss(eps),
            Channel::DifferentialDephasing => ChannelSettings::differential(eps),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Channel::AmplitudeDamping => "ad",
            Channel::DifferentialDephasing => "pd",
        }
    }
}

/// Default regression window for `χ`.
pub const DEFAULT_WINDOW: [f64; 4] = [0.002, 0.005, 0.01, 0.02];
/// Largest `|b| ε_max / |a|` accepted from the fit `aε + bε²`.
pub const CURVATURE_LIMIT: f64 = 0.2;
pub const MAX_EPS: f64 = 0.05;

/// A probe family whose phase information is tracked under growing noise.
#[derive(Debug, Clone)]
pub struct QfiTarget {
    family: ProbeFamily,
    pub beta: f64,
    pub x: f64,
    pub eigen_floor_rel: f64,
}

impl QfiTarget {
    /// Pure phase encoding `e^{−ix n_a}`, the `V → 1` limit of the thermal
    /// encoding.
    pub fn phase_only(probe: &Probe, cutoff: Option<usize>) -> Result<Self> {
        Ok(Self {
            family: ProbeFamily::from_probe(probe, cutoff, Encoding::PhaseOnly, ChannelSettings::identity())?,
            beta: 0.0,
            x: 0.0,
            eigen_floor_rel: 1e-10,
        })
    }

    pub fn thermal(probe: &Probe, cutoff: Option<usize>, beta: f64, x: f64, hbar_omega0: f64) -> Result<Self> {
        Ok(Self {
            family: ProbeFamily::from_probe(
                probe,
                cutoff,
                Encoding::Thermal { hbar_omega0 },
                ChannelSettings::identity(),
            )?,
            beta,
            x,
            eigen_floor_rel: 1e-10,
        })
    }

    /// `Q_xx` after `channel` at strength `eps`.
    pub fn phase_qfi(&self, channel: Channel, eps: f64) -> Result<f64> {
        let fam = self.family.with_channels(channel.settings(eps));
        Ok(fam.qfim(self.beta, self.x, self.eigen_floor_rel)?.qfim.f_xx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityEstimate {
    pub chi: f64,
    pub f0: f64,
    /// Quadratic coefficient of the loss curve.
    pub quadratic: f64,
    /// `|quadratic| ε_max / |chi|`.
    pub curvature: f64,
    pub eps_max: f64,
}

/// Regresses `F(0) − F(ε) = χ ε + b ε²` through the origin.
pub fn estimate_susceptibility(f: impl Fn(f64) -> Result<f64>, eps_samples: &[f64]) -> Result<SusceptibilityEstimate> {
    if eps_samples.len() < 3 {
        return Err(invalid("eps_samples", "need at least 3 noise strengths"));
    }
    if eps_samples.iter().any(|&e| !(e > 0.0 && e <= MAX_EPS)) {
        return Err(invalid("eps_samples", format!("every sample must lie in (0, {MAX_EPS}]")));
    }
    let f0 = f(0.0)?;
    let ys = eps_samples.iter().map(|&e| Ok(f0 - f(e)?)).collect::<Result<Vec<f64>>>()?;
    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&e, &y) in eps_samples.iter().zip(&ys) {
        s2 += e * e;
        s3 += e * e * e;
        s4 += e * e * e * e;
        sy1 += e * y;
        sy2 += e * e * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() < 1e-30 * s2 * s4 {
        return Err(Error::DegenerateFit("noise strengths are not distinct".into()));
    }
    let chi = (sy1 * s4 - sy2 * s3) / det;
    let quadratic = (s2 * sy2 - s3 * sy1) / det;
    let eps_max = eps_samples.iter().copied().fold(0.0, f64::max);
    let curvature = if chi == 0.0 {
        if quadratic == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (quadratic * eps_max / chi).abs()
    };
    if curvature > CURVATURE_LIMIT {
        return Err(Error::Nonlinear {
            curvature,
            limit: CURVATURE_LIMIT,
        });
    }
    Ok(SusceptibilityEstimate {
        chi,
        f0,
        quadratic,
        curvature,
        eps_max,
    })
}

/// Like [`estimate_susceptibility`], halving the window until the relative
/// curvature drops below `target` (at most `max_halvings` times).
pub fn estimate_susceptibility_adaptive(
    f: impl Fn(f64) -> Result<f64>,
    window: &[f64],
    target: f64,
    max_halvings: u32,
) -> Result<SusceptibilityEstimate> {
    let mut w = window.to_vec();
    let mut last = None;
    for _ in 0..=max_halvings {
        match estimate_susceptibility(&f, &w) {
            Ok(est) if est.curvature <= target => return Ok(est),
            Ok(est) => last = Some(Ok(est)),
            Err(e @ Error::Nonlinear { .. }) => last = Some(Err(e)),
            Err(e) => return Err(e),
        }
        w.iter_mut().for_each(|e| *e *= 0.5);
    }
    last.expect("loop runs at least once")
}

/// First-order loss coefficient of the phase QFI of `probe` under `channel`.
pub fn susceptibility(probe: &Probe, channel: Channel, eps_samples: &[f64]) -> Result<f64> {
    let target = QfiTarget::phase_only(probe, None)?;
    Ok(estimate_susceptibility(|e| target.phase_qfi(channel, e), eps_samples)?.chi)
}

pub const ADAPTIVE_TARGET: f64 = 0.05;
pub const ADAPTIVE_HALVINGS: u32 = 6;

pub fn susceptibility_adaptive(probe: &Probe, channel: Channel) -> Result<SusceptibilityEstimate> {
    let target = QfiTarget::phase_only(probe, None)?;
    estimate_susceptibility_adaptive(
        |e| target.phase_qfi(channel, e),
        &DEFAULT_WINDOW,
        ADAPTIVE_TARGET,
        ADAPTIVE_HALVINGS,
    )
}

/// Power-law fit `log χ = log c + k log N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

pub fn fit_scaling_exponent(n_values: &[f64], chi_values: &[f64]) -> Result<ScalingFit> {
    if n_values.len() != chi_values.len() {
        return Err(invalid("chi_values", "length differs from n_values"));
    }
    if n_values.len() < 4 {
        return Err(invalid("n_values", "need at least 4 points"));
    }
    if n_values.iter().chain(chi_values).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("chi_values", "all values must be positive"));
    }
    let lx: Vec<f64> = n_values.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = chi_values.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-24 {
        return Err(Error::DegenerateFit("log N has zero variance".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    Ok(ScalingFit {
        exponent,
        prefactor: intercept.exp(),
        r2: if syy == 0.0 { 1.0 } else { 1.0 - sse / syy },
    })
}

/// Probe classes scanned over their size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Noon,
    Cat,
    Squeezed,
}

impl ProbeKind {
    /// NOON: `N = size`; cat: `|α|² = size`; squeezed: `size` photons per mode.
    pub fn probe(&self, size: f64) -> Result<Probe> {
        match self {
            ProbeKind::Noon => {
                if size < 1.0 || size.fract() != 0.0 {
                    return Err(invalid("n", format!("NOON size {size} must be a positive integer")));
                }
                Ok(Probe::Noon { n: size as u32 })
            }
            ProbeKind::Cat => Ok(Probe::cat(num_complex::Complex64::new(size.sqrt(), 0.0))),
            ProbeKind::Squeezed => Ok(Probe::squeezed_with_photons(size)),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProbeKind::Noon => "noon",
            ProbeKind::Cat => "cat",
            ProbeKind::Squeezed => "squeezed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityFit {
    pub channel: Channel,
    pub probe: ProbeKind,
    pub n_values: Vec<f64>,
    pub chi_values: Vec<f64>,
    pub exponent: f64,
    pub fit_r2: f64,
}

/// `χ` for every size (adaptive window), then the power-law fit.
pub fn susceptibility_scan(kind: ProbeKind, channel: Channel, sizes: &[f64]) -> Result<SusceptibilityFit> {
    use rayon::prelude::*;
    let chi_values = sizes
        .par_iter()
        .map(|&s| Ok(susceptibility_adaptive(&kind.probe(s)?, channel)?.chi))
        .collect::<Result<Vec<f64>>>()?;
    let fit = fit_scaling_exponent(sizes, &chi_values)?;
    Ok(SusceptibilityFit {
        channel,
        probe: kind,
        n_values: sizes.to_vec(),
        chi_values,
        exponent: fit.exponent,
        fit_r2: fit.r2,
    })
}

/// Relative slack when comparing `ε χ(N)` with `F₀(N)`, so that an exact
/// crossover is not lost to fit round-off.
pub const CROSSOVER_TOLERANCE: f64 = 1e-6;

/// Smallest `N ≤ n_max` with `ε χ(N) ≥ F₀(N)`.
pub fn critical_photon_number(
    f0: impl Fn(u32) -> Result<f64>,
    chi: impl Fn(u32) -> Result<f64>,
    eps: f64,
    n_max: u32,
) -> Result<u32> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("eps", format!("{eps} is outside (0, 0.5)")));
    }
    for n in 1..=n_max {
        let f = f0(n)?;
        if eps * chi(n)? >= f * (1.0 - CROSSOVER_TOLERANCE) {
            return Ok(n);
        }
    }
    Err(Error::SearchExhausted { n_max })
}

/// Critical photon number of NOON probes from the simulated QFI.
pub fn noon_critical_photon_number(channel: Channel, eps: f64, n_max: u32) -> Result<u32> {
    critical_photon_number(
        |n| QfiTarget::phase_only(&Probe::Noon { n }, None)?.phase_qfi(channel, 0.0),
        |n| Ok(susceptibility_adaptive(&Probe::Noon { n }, channel)?.chi),
        eps,
        n_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_polynomial() {
        let est = estimate_susceptibility(|e| Ok(10.0 - 3.0 * e + 5.0 * e * e), &DEFAULT_WINDOW).unwrap();
        assert!((est.chi - 3.0).abs() < 1e-9);
        assert!((est.quadratic + 5.0).abs() < 1e-6);
        assert!(matches!(
            estimate_susceptibility(|e| Ok(1.0 - e - 50.0 * e * e), &DEFAULT_WINDOW),
            Err(Error::Nonlinear { .. })
        ));
        assert!(estimate_susceptibility(|e| Ok(1.0 - e), &[0.01, 0.02]).is_err());
        assert!(estimate_susceptibility(|e| Ok(1.0 - e), &[0.01, 0.02, 0.1]).is_err());
    }

    #[test]
    fn adaptive_window_shrinks_until_linear() {
        let f = |e: f64| Ok(1.0 - e - 30.0 * e * e);
        let est = estimate_susceptibility_adaptive(f, &DEFAULT_WINDOW, 0.05, 6).unwrap();
        assert!(est.curvature <= 0.05);
        assert!((est.chi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn synthetic_power_law() {
        let ns = [2.0, 4.0, 6.0, 8.0];
        let chis: Vec<f64> = ns.iter().map(|n: &f64| 2.0 * n.powi(3)).collect();
        let fit = fit_scaling_exponent(&ns, &chis).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-9);
        assert!((fit.prefactor - 2.0).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(matches!(
            fit_scaling_exponent(&[3.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn synthetic_crossover() {
        for eps in [0.02, 0.05, 0.1, 0.3] {
            let n = critical_photon_number(|n| Ok((n * n) as f64), |n| Ok(2.0 * (n as f64).powi(3)), eps, 1000).unwrap();
            assert_eq!(n, (1.0 / (2.0 * eps) - 1e-9).ceil() as u32);
        }
        assert!(matches!(
            critical_photon_number(|_| Ok(1.0), |_| Ok(0.0), 0.1, 10),
            Err(Error::SearchExhausted { n_max: 10 })
        ));
    }

    #[test]
    fn noon_loss_is_n_cubed() {
        // Q_xx = N² (1 − ε)^N, so the first-order loss is N³.
        for n in 1..=4u32 {
            let est = susceptibility_adaptive(&Probe::Noon { n }, Channel::AmplitudeDamping).unwrap();
            assert!((est.chi - (n as f64).powi(3)).abs() < 1e-3 * (n as f64).powi(3));
            assert!((est.f0 - (n * n) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn noon_differential_dephasing_is_n_fourth() {
        for n in 1..=4u32 {
            let est = susceptibility_adaptive(&Probe::Noon { n }, Channel::DifferentialDephasing).unwrap();
            assert!((est.chi - (n as f64).powi(4)).abs() < 1e-2 * (n as f64).powi(4));
        }
    }

    #[test]
    fn noon_critical_number_near_half() {
        assert_eq!(noon_critical_photon_number(Channel::AmplitudeDamping, 0.49, 50).unwrap(), 3);
    }
}
