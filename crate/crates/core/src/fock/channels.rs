use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{loss_amplitudes, FockDensity};
use super::state::{make_noon, FockSpace};
use crate::analytic::{thermal_populations, visibility_pair};
use crate::error::{invalid, Result};

/// Loss and dephasing of one interferometer run.
///
/// `eta` is the transmission of the whole interferometer and `gamma` the
/// accumulated dephasing; optionally they come from raw rates as
/// `eta = e^{-γ_AD t}` and `gamma = γ_PD t / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub eta: f64,
    pub gamma: f64,
    pub raw: Option<RawRates>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRates {
    pub gamma_ad: f64,
    pub gamma_pd: f64,
    pub t: f64,
}

impl NoiseParams {
    pub fn new(eta: f64, gamma: f64) -> Result<Self> {
        let n = Self { eta, gamma, raw: None };
        n.validate()?;
        Ok(n)
    }

    pub fn noiseless() -> Self {
        Self {
            eta: 1.0,
            gamma: 0.0,
            raw: None,
        }
    }

    pub fn from_rates(gamma_ad: f64, gamma_pd: f64, t: f64) -> Result<Self> {
        if !(gamma_ad >= 0.0 && gamma_pd >= 0.0 && t >= 0.0) {
            return Err(invalid("rates", "rates and time must be non-negative"));
        }
        let n = Self {
            eta: (-gamma_ad * t).exp(),
            gamma: gamma_pd * t / 2.0,
            raw: Some(RawRates { gamma_ad, gamma_pd, t }),
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("eta", format!("{} is outside (0, 1]", self.eta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("{} must be finite and non-negative", self.gamma)));
        }
        if let Some(r) = self.raw {
            let eta = (-r.gamma_ad * r.t).exp();
            let gamma = r.gamma_pd * r.t / 2.0;
            if (eta - self.eta).abs() > 1e-12 || (gamma - self.gamma).abs() > 1e-12 {
                return Err(invalid("raw", "raw rates disagree with eta/gamma"));
            }
        }
        Ok(())
    }
}

/// Channel strengths applied identically to every represented mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSettings {
    /// Intensity transmission of each arm.
    pub transmission: f64,
    /// Per-arm dephasing: coherences scale by `e^{-dephasing (n−m)²}`.
    pub dephasing: f64,
    /// Collective dephasing generated by `J_z = (n_a − n_b)/2`.
    pub differential: f64,
}

impl ChannelSettings {
    pub fn identity() -> Self {
        Self {
            transmission: 1.0,
            dephasing: 0.0,
            differential: 0.0,
        }
    }

    /// Splits `(η, γ)` evenly over the two arms, `(√η, γ/2)` each, so that
    /// an `N`-photon coherence shared by both arms decays as
    /// `η^{N/2} e^{−γN²}`.
    pub fn from_noise(noise: &NoiseParams) -> Self {
        Self {
            transmission: noise.eta.sqrt(),
            dephasing: noise.gamma / 2.0,
            differential: 0.0,
        }
    }

    /// Loss probability `eps` on every arm.
    pub fn loss(eps: f64) -> Self {
        Self {
            transmission: 1.0 - eps,
            ..Self::identity()
        }
    }

    pub fn differential(eps: f64) -> Self {
        Self {
            differential: eps,
            ..Self::identity()
        }
    }

    pub fn apply(&self, rho: &FockDensity) -> FockDensity {
        let mut out = rho.clone();
        for m in 0..rho.space().modes {
            out = out.amplitude_damp_mode(m, self.transmission);
        }
        let g = self.dephasing;
        let e = self.differential;
        if g != 0.0 || e != 0.0 {
            out = out.dephase(|(qa, qb)| {
                let jz = 0.5 * (qa - qb) as f64;
                g * ((qa * qa + qb * qb) as f64) + 0.5 * e * jz * jz
            });
        }
        out
    }
}

/// Mixture `p_g ρ + p_e Φ_x(ρ)` where `Φ_x` imprints `e^{-ix}` per photon on
/// mode `a`.
pub fn thermal_phase_encode(rho: &FockDensity, beta: f64, hbar_omega0: f64, x: f64) -> FockDensity {
    let (pg, pe) = thermal_populations(beta, hbar_omega0);
    rho.scale_sectors(|(qa, _)| pg + pe * Complex64::from_polar(1.0, -x * qa as f64))
}

/// Unitary `e^{-ix n_a}`.
pub fn phase_encode(rho: &FockDensity, x: f64) -> FockDensity {
    rho.scale_sectors(|(qa, _)| Complex64::from_polar(1.0, -x * qa as f64))
}

/// Photon loss with transmission `eta` on every mode.
pub fn amplitude_damp(rho: &FockDensity, eta: f64) -> Result<FockDensity> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
    }
    let mut out = rho.clone();
    for m in 0..rho.space().modes {
        out = out.amplitude_damp_mode(m, eta);
    }
    Ok(out)
}

/// Number dephasing `ρ_nm → e^{−γ(n−m)²} ρ_nm` on every mode, exponents summed.
pub fn phase_damp(rho: &FockDensity, gamma: f64) -> Result<FockDensity> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be finite and non-negative"));
    }
    Ok(rho.dephase(|(qa, qb)| gamma * (qa * qa + qb * qb) as f64))
}

/// Loss Kraus operators of a single mode.
pub fn amplitude_damping_kraus(cutoff: usize, eta: f64) -> Vec<DMatrix<f64>> {
    let table = loss_amplitudes(cutoff, eta);
    let d = cutoff + 1;
    (0..d)
        .map(|k| {
            let mut m = DMatrix::zeros(d, d);
            for n in k..d {
                m[(n - k, n)] = table[k][n];
            }
            m
        })
        .collect()
}

/// Diagonal Kraus operators of single-mode number dephasing, from the
/// spectral decomposition of the positive kernel `e^{−γ(n−m)²}`.
pub fn phase_damping_kraus(cutoff: usize, gamma: f64) -> Vec<DMatrix<f64>> {
    let d = cutoff + 1;
    let kernel = DMatrix::from_fn(d, d, |n, m| (-gamma * ((n as f64 - m as f64).powi(2))).exp());
    let eig = kernel.symmetric_eigen();
    (0..d)
        .filter(|&k| eig.eigenvalues[k] > 0.0)
        .map(|k| {
            let s = eig.eigenvalues[k].sqrt();
            DMatrix::from_diagonal(&eig.eigenvectors.column(k).map(|v| v * s))
        })
        .collect()
}

/// `max |Σ K†K − 𝕀|`.
pub fn kraus_completeness_error(kraus: &[DMatrix<f64>]) -> f64 {
    let d = kraus[0].nrows();
    let sum = kraus
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, k| acc + k.transpose() * k);
    (sum - DMatrix::identity(d, d)).abs().max()
}

/// Applies single-mode Kraus operators to `mode` of a dense density matrix.
pub fn apply_kraus_dense(
    rho: &DMatrix<Complex64>,
    kraus: &[DMatrix<f64>],
    mode: usize,
    space: FockSpace,
) -> DMatrix<Complex64> {
    let d = space.levels();
    let lift = |k: &DMatrix<f64>| -> DMatrix<Complex64> {
        let k = k.map(|v| Complex64::new(v, 0.0));
        if space.modes == 1 {
            k
        } else if mode == 0 {
            k.kronecker(&DMatrix::identity(d, d))
        } else {
            DMatrix::identity(d, d).kronecker(&k)
        }
    };
    kraus.iter().fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
        let k = lift(k);
        acc + &k * rho * k.adjoint()
    })
}

/// Closed-form visibility of a noisy `N`-photon fringe,
/// `η^{N/2} e^{−γN²} V(β)`.
pub fn effective_visibility(beta: f64, hbar_omega0: f64, n: u32, noise: &NoiseParams) -> f64 {
    let n = n as f64;
    noise.eta.powf(n / 2.0) * (-noise.gamma * n * n).exp() * visibility_pair(beta * hbar_omega0).0
}

/// Visibility read off a simulated fringe.
///
/// A NOON state is encoded at each phase of one full fringe period, sent
/// through loss and dephasing, and read out as the probability of finding
/// all `N` photons in the bright port, `P(x) = ½(ρ_{N0,N0} + ρ_{0N,0N}) +
/// Re ρ_{N0,0N}`. The contrast `P_max − P_min` is normalised by the
/// noiseless fringe's `P_max + P_min`, so lost photons reduce the reported
/// visibility instead of being renormalised away.
pub fn effective_visibility_pipeline(beta: f64, hbar_omega0: f64, n: u32, noise: &NoiseParams) -> Result<f64> {
    noise.validate()?;
    let state = make_noon(n, n as usize)?;
    let rho0 = FockDensity::from_state(&state);
    let space = state.space;
    let (hi, lo) = (space.index(n as usize, 0), space.index(0, n as usize));
    let channels = ChannelSettings::from_noise(noise);
    let samples = 32 * n as usize + 1;
    let period = 2.0 * std::f64::consts::PI / n as f64;
    let fringe = |settings: &ChannelSettings| -> (f64, f64) {
        let probs: Vec<f64> = (0..samples)
            .map(|k| {
                let x = period * k as f64 / (samples - 1) as f64;
                let rho = settings.apply(&thermal_phase_encode(&rho0, beta, hbar_omega0, x));
                0.5 * (rho.get(hi, hi).re + rho.get(lo, lo).re) + rho.get(hi, lo).re
            })
            .collect();
        let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
        (max, min)
    };
    let (max, min) = fringe(&channels);
    let (ideal_max, ideal_min) = fringe(&ChannelSettings::identity());
    Ok((max - min) / (ideal_max + ideal_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::{make_cat, make_noon};

    fn noon_rho(n: u32) -> (FockDensity, usize, usize) {
        let s = make_noon(n, n as usize).unwrap();
        let sp = s.space;
        (FockDensity::from_state(&s), sp.index(n as usize, 0), sp.index(0, n as usize))
    }

    #[test]
    fn noise_params_validation() {
        assert!(NoiseParams::new(0.0, 0.0).is_err());
        assert!(NoiseParams::new(1.0, -0.1).is_err());
        let n = NoiseParams::from_rates(0.2, 0.4, 0.5).unwrap();
        assert!((n.eta - (-0.1f64).exp()).abs() < 1e-15);
        assert!((n.gamma - 0.1).abs() < 1e-15);
        let mut bad = n;
        bad.eta = 0.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn encoding_limits() {
        let (rho, hi, lo) = noon_rho(3);
        let frozen = thermal_phase_encode(&rho, 60.0, 1.0, 0.7);
        assert!(frozen.max_abs_diff(&rho) < 1e-15);
        assert!(thermal_phase_encode(&rho, -1.0, 1.0, 0.0).max_abs_diff(&rho) < 1e-15);
        let excited = thermal_phase_encode(&rho, -50.0, 1.0, 0.7);
        let expect = rho.get(hi, lo) * Complex64::from_polar(1.0, -3.0 * 0.7);
        assert!((excited.get(hi, lo) - expect).norm() < 1e-12);
        assert!((excited.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn channel_identities() {
        let (rho, _, _) = noon_rho(2);
        assert_eq!(amplitude_damp(&rho, 1.0).unwrap(), rho);
        assert_eq!(phase_damp(&rho, 0.0).unwrap().max_abs_diff(&rho), 0.0);
        assert!(amplitude_damp(&rho, 0.0).is_err());
        assert!(phase_damp(&rho, -1.0).is_err());
    }

    #[test]
    fn noon_coherence_decay_with_split_noise() {
        for n in 1..=5u32 {
            let (rho, hi, lo) = noon_rho(n);
            let noise = NoiseParams::new(0.8, 0.03).unwrap();
            let out = ChannelSettings::from_noise(&noise).apply(&rho);
            let nf = n as f64;
            let expect = 0.5 * 0.8f64.powf(nf / 2.0) * (-0.03 * nf * nf).exp();
            assert!((out.get(hi, lo).re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn dephasing_leaves_diagonal_states_alone() {
        let space = FockSpace::new(2, 3).unwrap();
        let mut rho = FockDensity::zeros(space);
        rho.add(1, 1, Complex64::new(0.4, 0.0));
        rho.add(6, 6, Complex64::new(0.6, 0.0));
        assert_eq!(phase_damp(&rho, 0.3).unwrap(), rho);
    }

    #[test]
    fn kraus_sets_are_complete() {
        for &eta in &[1.0, 0.9, 0.3, 1e-3] {
            assert!(kraus_completeness_error(&amplitude_damping_kraus(7, eta)) < 1e-10);
        }
        for &g in &[0.0, 0.05, 0.7] {
            assert!(kraus_completeness_error(&phase_damping_kraus(7, g)) < 1e-10);
        }
    }

    #[test]
    fn sector_channels_match_dense_kraus() {
        let alpha = Complex64::new(1.1, 0.4);
        let s = make_cat(alpha, 12).unwrap();
        let rho = FockDensity::from_state(&s);
        let fast = phase_damp(&amplitude_damp(&rho, 0.83).unwrap(), 0.04).unwrap();
        let dense = apply_kraus_dense(&rho.to_dense(), &amplitude_damping_kraus(12, 0.83), 0, s.space);
        let dense = apply_kraus_dense(&dense, &phase_damping_kraus(12, 0.04), 0, s.space);
        let diff = (fast.to_dense() - dense).map(|z| z.norm()).max();
        assert!(diff < 1e-12);
    }

    #[test]
    fn two_mode_sector_loss_matches_dense_kraus() {
        let (rho, _, _) = noon_rho(3);
        let sp = rho.space();
        let fast = rho.amplitude_damp_mode(0, 0.6).amplitude_damp_mode(1, 0.75);
        let dense = apply_kraus_dense(&rho.to_dense(), &amplitude_damping_kraus(3, 0.6), 0, sp);
        let dense = apply_kraus_dense(&dense, &amplitude_damping_kraus(3, 0.75), 1, sp);
        assert!((fast.to_dense() - dense).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn effective_visibility_examples() {
        let v0 = 1.0 / 3.0;
        assert!((effective_visibility(0.3, 1.0, 3, &NoiseParams::noiseless()) - visibility_pair(0.3).0).abs() < 1e-15);
        let n = NoiseParams::new(0.81, 0.0).unwrap();
        assert!((effective_visibility(0.0, 1.0, 2, &n) - 0.27).abs() < 1e-12);
        let n = NoiseParams::new(1.0, 0.05).unwrap();
        assert!((effective_visibility(0.0, 1.0, 4, &n) - (-0.8f64).exp() * v0).abs() < 1e-12);
        assert!((effective_visibility(0.0, 1.0, 4, &n) - 0.14977).abs() < 1e-5);
    }

    #[test]
    fn pipeline_reproduces_closed_form() {
        let noise = NoiseParams::new(0.7, 0.02).unwrap();
        for n in 1..=4 {
            let a = effective_visibility(0.4, 1.0, n, &noise);
            let b = effective_visibility_pipeline(0.4, 1.0, n, &noise).unwrap();
            assert!((a - b).abs() < 1e-8, "N = {n}: {a} vs {b}");
        }
    }
}
