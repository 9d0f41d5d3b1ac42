//! Estimators working on shot records: empirical Fisher information, fringe
//! fits, visibility inversion, the contrast-shrinkage bias model and
//! bootstrap uncertainties.

mod bootstrap;
mod shrinkage;

pub use bootstrap::{bootstrap_fim, BootstrapSummary, MAX_DROP_FRACTION, MIN_RESAMPLES};
pub use shrinkage::{apply_shrinkage, bias_sweep, correct_shrinkage, BiasRow, ShrinkageModel, BASELINE_VISIBILITY};

use serde::{Deserialize, Serialize};

use crate::analytic::{probability_gradient, FisherMatrix, ModelParams};
use crate::circuit::ShotRecord;
use crate::error::{invalid, Error, Result};

pub fn empirical_probability(rec: &ShotRecord) -> f64 {
    rec.n0 as f64 / rec.mu as f64
}

/// Gradient magnitude below which the Fisher matrix is reported as zero.
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// Fisher matrix at the record's grid point, built from analytic gradients
/// and the observed frequency `P̂0`. `p` supplies `ħω₀` and `N`.
pub fn empirical_fim(rec: &ShotRecord, p: &ModelParams) -> Result<FisherMatrix> {
    empirical_fim_from(rec.n0, rec.mu, &p.at(rec.beta, rec.x))
}

pub(crate) fn empirical_fim_from(n0: u64, mu: u64, p: &ModelParams) -> Result<FisherMatrix> {
    let (gb, gx) = probability_gradient(p);
    if gb.abs() < GRADIENT_FLOOR && gx.abs() < GRADIENT_FLOOR {
        return Ok(FisherMatrix::zero());
    }
    if n0 == 0 || n0 == mu {
        return Err(Error::DegenerateCounts { n0, mu });
    }
    let ph = n0 as f64 / mu as f64;
    let inv = 1.0 / (ph * (1.0 - ph));
    Ok(FisherMatrix::new(gb * gb * inv, gx * gx * inv, gb * gx * inv))
}

/// Least-squares fit of `P0 ≈ A + B cos 2Nx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub v_meas: f64,
    /// RMS residual.
    pub residual: f64,
    /// Set when the fitted visibility is outside `(0, 1]` or the offset is
    /// not positive.
    pub out_of_model: bool,
}

pub fn fit_fringe(x_samples: &[f64], p0_hats: &[f64], n_photons: u32) -> Result<FringeFit> {
    if x_samples.len() != p0_hats.len() {
        return Err(invalid("p0_hats", "length differs from x_samples"));
    }
    if n_photons == 0 {
        return Err(invalid("n_photons", "must be at least 1"));
    }
    let mut distinct = x_samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::IllConditioned("need at least 3 distinct phases".into()));
    }
    let n = n_photons as f64;
    let span = distinct[distinct.len() - 1] - distinct[0];
    let half_period = std::f64::consts::PI / (2.0 * n);
    if span < half_period * (1.0 - 1e-12) {
        return Err(Error::IllConditioned(format!(
            "phases span {span}, less than half a fringe period {half_period}"
        )));
    }
    let m = x_samples.len() as f64;
    let c: Vec<f64> = x_samples.iter().map(|x| (2.0 * n * x).cos()).collect();
    let c_mean = c.iter().sum::<f64>() / m;
    let p_mean = p0_hats.iter().sum::<f64>() / m;
    let var_c = c.iter().map(|v| (v - c_mean).powi(2)).sum::<f64>() / m;
    if var_c < 1e-10 {
        return Err(Error::IllConditioned(format!("cosine regressor variance {var_c:e}")));
    }
    let cov = c.iter().zip(p0_hats).map(|(cv, p)| (cv - c_mean) * (p - p_mean)).sum::<f64>() / m;
    let amplitude = cov / var_c;
    let offset = p_mean - amplitude * c_mean;
    let residual = (c
        .iter()
        .zip(p0_hats)
        .map(|(cv, p)| (p - offset - amplitude * cv).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let v_meas = amplitude / offset;
    Ok(FringeFit {
        offset,
        amplitude,
        v_meas,
        residual,
        out_of_model: !(offset > 0.0 && v_meas > 0.0 && v_meas <= 1.0),
    })
}

/// `β̂ = −ln(2V/(1−V)) / ħω₀`, the inverse of the visibility.
pub fn invert_visibility(v_meas: f64, hbar_omega0: f64) -> Result<f64> {
    if !(v_meas > 0.0 && v_meas < 1.0) {
        return Err(Error::OutOfDomain {
            name: "v_meas",
            value: v_meas,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(hbar_omega0 > 0.0) {
        return Err(invalid("hbar_omega0", "must be positive"));
    }
    Ok(-(2.0 * v_meas / (1.0 - v_meas)).ln() / hbar_omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub x_hat: f64,
    /// The arccos argument left `[−1, 1]` and was clamped.
    pub clamped: bool,
}

/// Inverts the fringe for `x` on the principal branch `[0, π/(2N)]`; a
/// negative `sign_hint` flips the result.
pub fn estimate_x(p0_hat: f64, v: f64, n_photons: u32, sign_hint: f64) -> Result<PhaseEstimate> {
    if !(v > 0.0) {
        return Err(Error::ZeroVisibility);
    }
    if n_photons == 0 {
        return Err(invalid("n_photons", "must be at least 1"));
    }
    let arg = (p0_hat * (1.0 + v) - 1.0) / v;
    let clamped = !(-1.0..=1.0).contains(&arg);
    let x = arg.clamp(-1.0, 1.0).acos() / (2.0 * n_photons as f64);
    Ok(PhaseEstimate {
        x_hat: if sign_hint < 0.0 { -x } else { x },
        clamped,
    })
}

/// Per-row estimates: one fringe fit, one `β̂`, and `x̂` per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowEstimate {
    pub fit: FringeFit,
    pub beta_hat: Option<f64>,
    pub x_hats: Vec<Option<PhaseEstimate>>,
}

/// Fits the fringe of one β row and inverts it. `β̂` is `None` when the
/// fitted visibility leaves `(0, 1)`; `x̂` uses the sign of each nominal x.
pub fn estimate_row(records: &[ShotRecord], n_photons: u32, hbar_omega0: f64) -> Result<RowEstimate> {
    let xs: Vec<f64> = records.iter().map(|r| r.x).collect();
    let ps: Vec<f64> = records.iter().map(empirical_probability).collect();
    let fit = fit_fringe(&xs, &ps, n_photons)?;
    let beta_hat = invert_visibility(fit.v_meas, hbar_omega0).ok();
    let x_hats = records
        .iter()
        .zip(&ps)
        .map(|(r, &p)| estimate_x(p, fit.v_meas, n_photons, r.x).ok())
        .collect();
    Ok(RowEstimate { fit, beta_hat, x_hats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{fim_analytic, output_probabilities, visibility};
    use crate::circuit::ShotKey;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn rec(n0: u64, mu: u64, beta: f64, x: f64) -> ShotRecord {
        ShotRecord {
            n0,
            n1: mu - n0,
            mu,
            key: ShotKey::new(0),
            beta,
            x,
        }
    }

    #[test]
    fn empirical_probability_examples() {
        assert_eq!(empirical_probability(&rec(10, 10, 0.0, 0.0)), 1.0);
        assert_eq!(empirical_probability(&rec(0, 10, 0.0, 0.0)), 0.0);
        assert_eq!(empirical_probability(&rec(9620, 10_000, -4.0, -0.083)), 0.962);
    }

    #[test]
    fn empirical_fim_cases() {
        let p = ModelParams::new(0.0, FRAC_PI_4, 1).unwrap();
        // P0 = 0.75 exactly at this point.
        let f = empirical_fim(&rec(750, 1000, 0.0, FRAC_PI_4), &p).unwrap();
        assert!(f.max_abs_diff(&fim_analytic(&p).unwrap()) < 1e-14);
        assert_eq!(empirical_fim(&rec(1000, 1000, 0.3, 0.0), &p).unwrap(), FisherMatrix::zero());
        assert!(matches!(
            empirical_fim(&rec(0, 1000, 0.0, 1.0), &p),
            Err(Error::DegenerateCounts { .. })
        ));
    }

    #[test]
    fn fringe_fit_recovers_visibility() {
        let xs: Vec<f64> = (0..20).map(|k| -FRAC_PI_2 + k as f64 * std::f64::consts::PI / 19.0).collect();
        let p = ModelParams::new(0.0, 0.0, 1).unwrap();
        let ps: Vec<f64> = xs.iter().map(|&x| output_probabilities(&p.at(0.0, x)).p0).collect();
        let fit = fit_fringe(&xs, &ps, 1).unwrap();
        assert!((fit.v_meas - 1.0 / 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);

        let flat = fit_fringe(&xs, &vec![1.0; 20], 1).unwrap();
        assert!(flat.amplitude.abs() < 1e-15 && flat.v_meas.abs() < 1e-15);
        assert!(flat.out_of_model);

        let v = apply_shrinkage(visibility(&p.at(-4.0, 0.0)), &ShrinkageModel::new(0.5).unwrap());
        let ps: Vec<f64> = xs.iter().map(|&x| (1.0 + v * (2.0 * x).cos()) / (1.0 + v)).collect();
        let fit = fit_fringe(&xs, &ps, 1).unwrap();
        assert!((fit.v_meas - 0.64900).abs() < 5e-6);
    }

    #[test]
    fn fringe_fit_rejects_poor_designs() {
        assert!(matches!(fit_fringe(&[0.1, 0.1, 0.1], &[0.5; 3], 1), Err(Error::IllConditioned(_))));
        assert!(matches!(fit_fringe(&[0.0, 0.1, 0.2], &[0.5; 3], 1), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn visibility_inversion() {
        assert!(invert_visibility(1.0 / 3.0, 1.0).unwrap().abs() < 1e-15);
        assert!((invert_visibility(0.964663, 1.0).unwrap() + 4.0).abs() < 1e-5);
        let v = visibility(&ModelParams::new(-4.0, 0.0, 1).unwrap());
        assert!((invert_visibility(v, 1.0).unwrap() + 4.0).abs() < 1e-12);
        assert!(invert_visibility(1.0, 1.0).is_err());
        assert!(invert_visibility(0.0, 1.0).is_err());
    }

    #[test]
    fn phase_inversion() {
        assert_eq!(estimate_x(1.0, 0.5, 1, 1.0).unwrap().x_hat, 0.0);
        let p = ModelParams::new(-4.0, -FRAC_PI_2, 1).unwrap();
        let e = estimate_x(output_probabilities(&p).p0, visibility(&p), 1, -1.0).unwrap();
        assert!((e.x_hat + FRAC_PI_2).abs() < 1e-6);
        let e = estimate_x(1.0 + 1e-3, 0.5, 1, 1.0).unwrap();
        assert!(e.clamped && e.x_hat == 0.0);
        assert!(matches!(estimate_x(0.5, 0.0, 1, 1.0), Err(Error::ZeroVisibility)));
    }
}
