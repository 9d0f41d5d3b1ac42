use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::susceptibility::{estimate_susceptibility_adaptive, Channel, QfiTarget, ADAPTIVE_HALVINGS, ADAPTIVE_TARGET, DEFAULT_WINDOW};
use crate::error::{invalid, Error, Result};
use crate::fock::{make_cat, ChannelSettings, FockDensity, NoiseParams, Probe};

/// Point in `(β, x)` at which noisy probes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub beta: f64,
    pub x: f64,
    pub hbar_omega0: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            beta: 0.5,
            x: std::f64::consts::FRAC_PI_4,
            hbar_omega0: 1.0,
        }
    }
}

impl OperatingPoint {
    pub fn target(&self, probe: &Probe) -> Result<QfiTarget> {
        QfiTarget::thermal(probe, None, self.beta, self.x, self.hbar_omega0)
    }
}

/// `Q_xx` with loss `eps` on every arm divided by its lossless value.
pub fn robustness_index(probe: &Probe, noise_eps: f64, at: &OperatingPoint) -> Result<f64> {
    if !(noise_eps >= 0.0 && noise_eps < 1.0) {
        return Err(invalid("noise_eps", format!("{noise_eps} is outside [0, 1)")));
    }
    let target = at.target(probe)?;
    let ideal = target.phase_qfi(Channel::AmplitudeDamping, 0.0)?;
    if !(ideal > 0.0) {
        return Err(Error::Degenerate(format!("ideal phase QFI of the {} probe is {ideal}", probe.label())));
    }
    Ok(target.phase_qfi(Channel::AmplitudeDamping, noise_eps)? / ideal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRow {
    pub probe: String,
    pub f_ideal: f64,
    pub chi: f64,
    pub robustness: f64,
}

/// Ideal QFI, loss susceptibility and robustness of each probe at one
/// operating point.
pub fn hierarchy_table(probes: &[Probe], eps: f64, at: &OperatingPoint) -> Result<Vec<HierarchyRow>> {
    probes
        .iter()
        .map(|p| {
            let target = at.target(p)?;
            let f = |e: f64| target.phase_qfi(Channel::AmplitudeDamping, e);
            let est = estimate_susceptibility_adaptive(f, &DEFAULT_WINDOW, ADAPTIVE_TARGET, ADAPTIVE_HALVINGS)?;
            Ok(HierarchyRow {
                probe: p.label().to_string(),
                f_ideal: est.f0,
                chi: est.chi,
                robustness: robustness_index(p, eps, at)?,
            })
        })
        .collect()
}

/// Phase QFI of a lossy squeezed probe, `η(n̄² + n̄)/(1 − η + 1/(2n̄ + 1))`.
pub fn squeezed_qfi_lossy(n_bar: f64, eta: f64) -> Result<f64> {
    if !(n_bar >= 0.0) {
        return Err(invalid("n_bar", "must be non-negative"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
    }
    Ok(eta * (n_bar * n_bar + n_bar) / (1.0 - eta + 1.0 / (2.0 * n_bar + 1.0)))
}

/// Surviving cat coherence `exp[−2|α|²(1 − √η)]`.
pub fn cat_coherence(alpha: Complex64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
    }
    Ok((-2.0 * alpha.norm_sqr() * (1.0 - eta.sqrt())).exp())
}

/// Cat coherence read off a simulated lossy cat through its parity.
///
/// After loss the state is `𝒩²(|α'⟩⟨α'| + |−α'⟩⟨−α'| + C |α'⟩⟨−α'| + h.c.)`,
/// whose parity is `2𝒩²(e^{−2|α'|²} + C)`, so `C` follows from `⟨(−1)^n⟩`.
/// The loss uses the same per-arm split as the noise landscape.
pub fn cat_coherence_pipeline(alpha: Complex64, eta: f64, cutoff: Option<usize>) -> Result<f64> {
    let noise = NoiseParams::new(eta, 0.0)?;
    let settings = ChannelSettings::from_noise(&noise);
    let probe = Probe::cat(alpha);
    let state = make_cat(alpha, cutoff.unwrap_or_else(|| probe.default_cutoff()))?;
    let rho = settings.apply(&FockDensity::from_state(&state));
    let parity: f64 = rho
        .populations()
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    let a2 = alpha.norm_sqr();
    let norm2 = 0.5 / (1.0 + (-2.0 * a2).exp());
    let a2_out = a2 * settings.transmission;
    Ok(parity / (2.0 * norm2) - (-2.0 * a2_out).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeezed_closed_form() {
        assert!((squeezed_qfi_lossy(1.0, 1.0).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(squeezed_qfi_lossy(0.0, 0.7).unwrap(), 0.0);
        // At fixed η the formula grows like η n̄(n̄ + 1)/(1 − η).
        let f = squeezed_qfi_lossy(100.0, 0.9).unwrap();
        assert!((f / (0.9 * 10100.0 / 0.1) - 1.0).abs() < 0.05);
        assert!(squeezed_qfi_lossy(3.0, 0.8).unwrap() < squeezed_qfi_lossy(3.0, 0.9).unwrap());
        assert!(squeezed_qfi_lossy(3.0, 0.8).unwrap() < squeezed_qfi_lossy(4.0, 0.8).unwrap());
    }

    #[test]
    fn cat_closed_form() {
        let a = Complex64::new(2.0, 0.0);
        assert_eq!(cat_coherence(a, 1.0).unwrap(), 1.0);
        assert!((cat_coherence(a, 0.81).unwrap() - (-0.8f64).exp()).abs() < 1e-12);
        assert!((cat_coherence(a, 0.81).unwrap() - 0.4493).abs() < 5e-5);
    }

    #[test]
    fn cat_pipeline_matches_closed_form() {
        let a = Complex64::new(2.0, 0.0);
        for eps in [0.0, 0.02, 0.05, 0.1] {
            let sim = cat_coherence_pipeline(a, 1.0 - eps, None).unwrap();
            let closed = cat_coherence(a, 1.0 - eps).unwrap();
            assert!((sim - closed).abs() < 0.1 * closed);
            assert!((sim - closed).abs() < 1e-6);
        }
    }

    #[test]
    fn robustness_limits() {
        let op = OperatingPoint::default();
        let p = Probe::Noon { n: 3 };
        assert!((robustness_index(&p, 0.0, &op).unwrap() - 1.0).abs() < 1e-12);
        let r = robustness_index(&p, 0.1, &op).unwrap();
        assert!(r > 0.0 && r < 1.0);
        assert!(robustness_index(&p, 1.0, &op).is_err());
    }
}
