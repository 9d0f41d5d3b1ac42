use serde::{Deserialize, Serialize};

use super::invert_visibility;
use crate::analytic::visibility_pair;
use crate::error::{invalid, Error, Result};

/// Infinite-temperature visibility `V(0)`.
pub const BASELINE_VISIBILITY: f64 = 1.0 / 3.0;

/// `V_meas = κ V + (1 − κ) V(0)`: unmitigated hardware noise pulls the
/// contrast toward its infinite-temperature value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageModel {
    pub kappa: f64,
    pub baseline: f64,
}

impl ShrinkageModel {
    /// `kappa = 1` is accepted as the no-shrinkage limit.
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(invalid("kappa", format!("{kappa} is outside (0, 1]")));
        }
        Ok(Self {
            kappa,
            baseline: BASELINE_VISIBILITY,
        })
    }
}

pub fn apply_shrinkage(v_true: f64, model: &ShrinkageModel) -> f64 {
    model.kappa * v_true + (1.0 - model.kappa) * model.baseline
}

/// Undoes the shrinkage and inverts the visibility.
pub fn correct_shrinkage(v_meas: f64, model: &ShrinkageModel, hbar_omega0: f64) -> Result<f64> {
    let v = (v_meas - (1.0 - model.kappa) * model.baseline) / model.kappa;
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::OutOfDomain {
            name: "de-shrunk visibility",
            value: v,
            lo: 0.0,
            hi: 1.0,
        });
    }
    invert_visibility(v, hbar_omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub beta_true: f64,
    pub v_true: f64,
    pub v_meas: f64,
    pub beta_hat: f64,
    pub beta_corr: Option<f64>,
    pub in_domain: bool,
    /// `β̂` has the sign of `β_true` and a strictly smaller magnitude.
    pub contracted: bool,
}

/// Forward-models each `β_true` through shrinkage, then inverts both
/// naively and with the correction.
pub fn bias_sweep(beta_true_values: &[f64], kappa: f64, hbar_omega0: f64) -> Result<Vec<BiasRow>> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid("kappa", format!("{kappa} is outside (0, 1)")));
    }
    let model = ShrinkageModel::new(kappa)?;
    beta_true_values
        .iter()
        .map(|&beta_true| {
            let v_true = visibility_pair(beta_true * hbar_omega0).0;
            let v_meas = apply_shrinkage(v_true, &model);
            let beta_hat = invert_visibility(v_meas, hbar_omega0)?;
            let beta_corr = correct_shrinkage(v_meas, &model, hbar_omega0).ok();
            let contracted = if beta_true == 0.0 {
                beta_hat.abs() < 1e-12
            } else {
                beta_hat.signum() == beta_true.signum() && beta_hat.abs() < beta_true.abs()
            };
            Ok(BiasRow {
                beta_true,
                v_true,
                v_meas,
                beta_hat,
                beta_corr,
                in_domain: beta_corr.is_some(),
                contracted,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinkage_map() {
        let id = ShrinkageModel::new(1.0).unwrap();
        assert_eq!(apply_shrinkage(0.9, &id), 0.9);
        for k in [0.1, 0.5, 0.9] {
            let m = ShrinkageModel::new(k).unwrap();
            assert!((apply_shrinkage(1.0 / 3.0, &m) - 1.0 / 3.0).abs() < 1e-16);
        }
        let m = ShrinkageModel::new(0.5).unwrap();
        assert!((apply_shrinkage(0.964663, &m) - 0.64900).abs() < 5e-6);
        assert!(ShrinkageModel::new(0.0).is_err());
    }

    #[test]
    fn correction_round_trip_and_domain() {
        let m = ShrinkageModel::new(0.5).unwrap();
        let v = apply_shrinkage(visibility_pair(-4.0).0, &m);
        assert!((correct_shrinkage(v, &m, 1.0).unwrap() + 4.0).abs() < 1e-9);
        assert!(correct_shrinkage(1.0 / 3.0, &m, 1.0).unwrap().abs() < 1e-15);
        let m = ShrinkageModel::new(0.1).unwrap();
        match correct_shrinkage(0.99, &m, 1.0) {
            Err(Error::OutOfDomain { value, .. }) => assert!((value - 6.9).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sweep_contracts_toward_zero() {
        let rows = bias_sweep(&[-4.0, -2.0, 0.0, 2.0, 4.0], 0.5, 1.0).unwrap();
        assert!(rows.iter().all(|r| r.contracted && r.in_domain));
        assert!(rows[2].beta_hat.abs() < 1e-12);
        let near = bias_sweep(&[-3.0, 2.5], 0.999999, 1.0).unwrap();
        for r in near {
            assert!((r.beta_hat - r.beta_true).abs() < 1e-4);
        }
        assert!(bias_sweep(&[1.0], 1.0, 1.0).is_err());
    }
}
