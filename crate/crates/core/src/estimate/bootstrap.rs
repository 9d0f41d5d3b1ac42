use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::empirical_fim_from;
use crate::analytic::{FisherMatrix, ModelParams};
use crate::circuit::{keyed_rng, sample_binomial, ShotRecord};
use crate::error::{invalid, Error, Result};

pub const MIN_RESAMPLES: usize = 100;
pub const MAX_DROP_FRACTION: f64 = 0.1;

/// Element-wise bootstrap statistics of the empirical Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: FisherMatrix,
    pub std: FisherMatrix,
    pub used: usize,
    pub dropped: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parametric bootstrap: redraws `n0 ~ Binomial(μ, n0/μ)` and recomputes the
/// empirical Fisher matrix. Each resample has its own RNG stream, so the
/// result does not depend on scheduling.
pub fn bootstrap_fim(rec: &ShotRecord, p: &ModelParams, n_resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    if n_resamples < MIN_RESAMPLES {
        return Err(invalid("n_resamples", format!("need at least {MIN_RESAMPLES}")));
    }
    let at = p.at(rec.beta, rec.x);
    let cell = (u64::from(rec.key.beta_index) << 32) | u64::from(rec.key.x_index);
    let cell_seed = splitmix(seed ^ splitmix(cell));
    let p_hat = rec.n0 as f64 / rec.mu as f64;
    let draws: Vec<Option<FisherMatrix>> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = keyed_rng(cell_seed, r as u64);
            let n0 = sample_binomial(&mut rng, rec.mu, p_hat);
            match empirical_fim_from(n0, rec.mu, &at) {
                Ok(f) => Some(f),
                Err(Error::DegenerateCounts { .. }) => None,
                Err(e) => unreachable!("empirical_fim_from only fails on counts: {e}"),
            }
        })
        .collect();
    let kept: Vec<FisherMatrix> = draws.into_iter().flatten().collect();
    let dropped = n_resamples - kept.len();
    if dropped as f64 > MAX_DROP_FRACTION * n_resamples as f64 || kept.len() < 2 {
        return Err(Error::BootstrapDropped {
            dropped,
            total: n_resamples,
        });
    }
    let m = kept.len() as f64;
    let mean = kept.iter().fold(FisherMatrix::zero(), |a, f| {
        FisherMatrix::new(a.f_bb + f.f_bb / m, a.f_xx + f.f_xx / m, a.f_bx + f.f_bx / m)
    });
    let var = kept.iter().fold(FisherMatrix::zero(), |a, f| {
        FisherMatrix::new(
            a.f_bb + (f.f_bb - mean.f_bb).powi(2) / (m - 1.0),
            a.f_xx + (f.f_xx - mean.f_xx).powi(2) / (m - 1.0),
            a.f_bx + (f.f_bx - mean.f_bx).powi(2) / (m - 1.0),
        )
    });
    Ok(BootstrapSummary {
        mean,
        std: FisherMatrix::new(var.f_bb.sqrt(), var.f_xx.sqrt(), var.f_bx.sqrt()),
        used: kept.len(),
        dropped,
    })
}
