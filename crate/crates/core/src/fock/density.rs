//! Density operators stored by photon-number charge.
//!
//! Every channel used here is covariant under independent phase rotations of
//! the two modes, so it maps the set of matrix elements `|ket⟩⟨bra|` with a
//! fixed charge `q = n(ket) − n(bra)` (per mode) into itself. Storing each
//! charge sector as a dense vector indexed by the bra keeps the cost
//! proportional to the populated sectors instead of `dim²`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::state::{FockSpace, FockState};

/// Per-mode photon-number difference between ket and bra.
pub type Charge = (i32, i32);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    space: FockSpace,
    sectors: BTreeMap<Charge, Vec<Complex64>>,
}

impl FockDensity {
    pub fn zeros(space: FockSpace) -> Self {
        Self {
            space,
            sectors: BTreeMap::new(),
        }
    }

    pub fn from_state(state: &FockState) -> Self {
        let mut rho = Self::zeros(state.space);
        let support: Vec<(usize, Complex64)> = state
            .amplitudes
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, a)| *a != ZERO)
            .collect();
        for &(i, a) in &support {
            for &(j, b) in &support {
                rho.add(i, j, a * b.conj());
            }
        }
        rho
    }

    pub fn from_dense(space: FockSpace, m: &DMatrix<Complex64>) -> Self {
        let mut rho = Self::zeros(space);
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                if m[(i, j)] != ZERO {
                    rho.add(i, j, m[(i, j)]);
                }
            }
        }
        rho
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn charge(&self, ket: usize, bra: usize) -> Charge {
        let (ka, kb) = self.space.occupations(ket);
        let (ba, bb) = self.space.occupations(bra);
        (ka as i32 - ba as i32, kb as i32 - bb as i32)
    }

    pub fn get(&self, ket: usize, bra: usize) -> Complex64 {
        self.sectors
            .get(&self.charge(ket, bra))
            .map_or(ZERO, |v| v[bra])
    }

    pub fn add(&mut self, ket: usize, bra: usize, value: Complex64) {
        let q = self.charge(ket, bra);
        let dim = self.space.dim();
        self.sectors.entry(q).or_insert_with(|| vec![ZERO; dim])[bra] += value;
    }

    pub fn sectors(&self) -> impl Iterator<Item = (&Charge, &Vec<Complex64>)> {
        self.sectors.iter()
    }

    fn ket_offset(&self, q: Charge) -> isize {
        q.0 as isize * self.space.stride(0) as isize + if self.space.modes == 2 { q.1 as isize } else { 0 }
    }

    /// Calls `f(ket, bra, value)` for every stored non-zero element.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, usize, Complex64)) {
        for (&q, v) in &self.sectors {
            let off = self.ket_offset(q);
            for (bra, &z) in v.iter().enumerate() {
                if z != ZERO {
                    f((bra as isize + off) as usize, bra, z);
                }
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.sectors.get(&(0, 0)).map_or(ZERO, |v| v.iter().sum())
    }

    /// Diagonal entries, i.e. joint photon-number probabilities.
    pub fn populations(&self) -> Vec<f64> {
        self.sectors
            .get(&(0, 0))
            .map_or_else(|| vec![0.0; self.space.dim()], |v| v.iter().map(|z| z.re).collect())
    }

    /// Multiplies every sector by `f(q)`.
    pub fn scale_sectors(&self, f: impl Fn(Charge) -> Complex64) -> Self {
        let sectors = self
            .sectors
            .iter()
            .map(|(&q, v)| {
                let s = f(q);
                (q, v.iter().map(|z| z * s).collect())
            })
            .collect();
        Self {
            space: self.space,
            sectors,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.space, other.space, "densities live on different spaces");
        let dim = self.space.dim();
        let mut sectors: BTreeMap<Charge, Vec<Complex64>> = self
            .sectors
            .iter()
            .map(|(&q, v)| (q, v.iter().map(|z| z * a).collect()))
            .collect();
        for (&q, v) in &other.sectors {
            let dst = sectors.entry(q).or_insert_with(|| vec![ZERO; dim]);
            for (d, z) in dst.iter_mut().zip(v) {
                *d += z * b;
            }
        }
        Self {
            space: self.space,
            sectors,
        }
    }

    /// Photon loss on one mode with intensity transmission `t`:
    /// Kraus operators `A_k = Σ_n √(C(n,k) (1−t)^k t^{n−k}) |n−k⟩⟨n|`.
    pub fn amplitude_damp_mode(&self, mode: usize, t: f64) -> Self {
        if t == 1.0 || mode >= self.space.modes {
            return self.clone();
        }
        let c = self.space.cutoff;
        let table = loss_amplitudes(c, t);
        let stride = self.space.stride(mode);
        let space = self.space;
        let sectors = self
            .sectors
            .par_iter()
            .map(|(&q, old)| {
                let qm = if mode == 0 { q.0 } else { q.1 };
                let mut new = vec![ZERO; old.len()];
                for (bra, slot) in new.iter_mut().enumerate() {
                    let occ = space.occupations(bra);
                    let bm = if mode == 0 { occ.0 } else { occ.1 } as i32;
                    let km = bm + qm;
                    if km < 0 || km as usize > c {
                        continue;
                    }
                    let (bm, km) = (bm as usize, km as usize);
                    let mut acc = ZERO;
                    for k in 0..=(c - bm.max(km)) {
                        let w = table[k][km + k] * table[k][bm + k];
                        if w != 0.0 {
                            acc += old[bra + k * stride] * w;
                        }
                    }
                    *slot = acc;
                }
                (q, new)
            })
            .collect();
        Self { space, sectors }
    }

    /// Multiplies sector `q` by `exp(-f(q))`.
    pub fn dephase(&self, f: impl Fn(Charge) -> f64) -> Self {
        self.scale_sectors(|q| Complex64::new((-f(q)).exp(), 0.0))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.space.dim();
        let mut m = DMatrix::zeros(dim, dim);
        self.for_each_nonzero(|i, j, z| m[(i, j)] = z);
        m
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        self.for_each_nonzero(|i, j, z| err = err.max((z - self.get(j, i).conj()).norm()));
        err
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut err: f64 = 0.0;
        self.for_each_nonzero(|i, j, z| err = err.max((z - other.get(i, j)).norm()));
        other.for_each_nonzero(|i, j, z| err = err.max((z - self.get(i, j)).norm()));
        err
    }
}

/// `table[k][n] = √(C(n,k) (1−t)^k t^{n−k})`, zero for `k > n`.
pub(crate) fn loss_amplitudes(cutoff: usize, t: f64) -> Vec<Vec<f64>> {
    let d = cutoff + 1;
    let mut table = vec![vec![0.0; d]; d];
    for n in 0..d {
        let mut binom = 1.0f64;
        for k in 0..=n {
            if k > 0 {
                binom = binom * (n + 1 - k) as f64 / k as f64;
            }
            table[k][n] = (binom * (1.0 - t).powi(k as i32) * t.powi((n - k) as i32)).sqrt();
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::{make_noon, make_tmsv};

    #[test]
    fn pure_state_round_trip() {
        let s = make_noon(2, 3).unwrap();
        let rho = FockDensity::from_state(&s);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        let back = FockDensity::from_dense(s.space, &rho.to_dense());
        assert_eq!(back.max_abs_diff(&rho), 0.0);
        assert_eq!(rho.hermiticity_error(), 0.0);
    }

    #[test]
    fn single_photon_loss() {
        let space = FockSpace::new(1, 1).unwrap();
        let mut rho = FockDensity::zeros(space);
        rho.add(1, 1, Complex64::new(1.0, 0.0));
        let out = rho.amplitude_damp_mode(0, 0.81);
        assert!((out.get(0, 0).re - 0.19).abs() < 1e-15);
        assert!((out.get(1, 1).re - 0.81).abs() < 1e-15);
    }

    #[test]
    fn loss_keeps_trace_of_squeezed_vacuum() {
        let rho = FockDensity::from_state(&make_tmsv(0.8, 30).unwrap());
        let out = rho.amplitude_damp_mode(0, 0.7).amplitude_damp_mode(1, 0.7);
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!(out.hermiticity_error() < 1e-14);
    }

    #[test]
    fn loss_table_columns_are_normalised() {
        let table = loss_amplitudes(12, 0.37);
        for n in 0..13 {
            let s: f64 = (0..13).map(|k| table[k][n].powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}
