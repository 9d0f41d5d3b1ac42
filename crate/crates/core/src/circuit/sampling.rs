use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact_probability_with_energy;
use crate::analytic::LandscapeGrid;
use crate::error::{invalid, Result};

/// Reproducibility key: master seed plus the grid cell being sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ShotKey {
    pub seed: u64,
    pub beta_index: u32,
    pub x_index: u32,
}

impl ShotKey {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            beta_index: 0,
            x_index: 0,
        }
    }

    pub fn at(self, beta_index: usize, x_index: usize) -> Self {
        Self {
            beta_index: beta_index as u32,
            x_index: x_index as u32,
            ..self
        }
    }

    fn stream(&self) -> u64 {
        (u64::from(self.beta_index) << 32) | u64::from(self.x_index)
    }
}

/// Independent ChaCha stream for `(seed, stream)`.
pub fn keyed_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub n0: u64,
    pub n1: u64,
    pub mu: u64,
    pub key: ShotKey,
    pub beta: f64,
    pub x: f64,
}

pub fn sample_binomial<R: Rng>(rng: &mut R, mu: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(mu, p).expect("probability clamped to [0, 1]");
    rng.sample(dist)
}

/// Draws `n0 ~ Binomial(mu, P0)` from the exact circuit output.
pub fn sample_shots(beta: f64, hbar_omega0: f64, x: f64, mu: u64, key: ShotKey) -> Result<ShotRecord> {
    if mu == 0 {
        return Err(invalid("mu", "at least one shot is required"));
    }
    let p0 = exact_probability_with_energy(beta, hbar_omega0, x).p0;
    let mut rng = keyed_rng(key.seed, key.stream());
    let n0 = sample_binomial(&mut rng, mu, p0);
    Ok(ShotRecord {
        n0,
        n1: mu - n0,
        mu,
        key,
        beta,
        x,
    })
}

/// Samples every grid cell in parallel. Records come back row-major.
pub fn sample_grid(grid: &LandscapeGrid, hbar_omega0: f64, mu: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    grid.validate()?;
    grid.points()
        .into_par_iter()
        .map(|pt| {
            sample_shots(
                pt.beta,
                hbar_omega0,
                pt.x,
                mu,
                ShotKey::new(seed).at(pt.beta_index, pt.x_index),
            )
        })
        .collect()
}
