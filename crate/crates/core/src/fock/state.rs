use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default bound on the probability weight cut off by truncation.
pub const LEAKAGE_BOUND: f64 = 1e-8;

/// One or two bosonic modes truncated at `cutoff` photons each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    pub modes: usize,
    pub cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if modes != 1 && modes != 2 {
            return Err(invalid("modes", "only one or two modes are supported"));
        }
        Ok(Self { modes, cutoff })
    }

    /// Levels per mode.
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.modes as u32)
    }

    /// Basis index of `|a, b⟩`; `b` is ignored for a single mode.
    pub fn index(&self, a: usize, b: usize) -> usize {
        if self.modes == 1 {
            a
        } else {
            a * self.levels() + b
        }
    }

    /// Photon numbers `(n_a, n_b)` of a basis index.
    pub fn occupations(&self, i: usize) -> (usize, usize) {
        if self.modes == 1 {
            (i, 0)
        } else {
            (i / self.levels(), i % self.levels())
        }
    }

    /// Index offset for one extra photon in `mode`.
    pub(crate) fn stride(&self, mode: usize) -> usize {
        if self.modes == 1 || mode == 1 {
            1
        } else {
            self.levels()
        }
    }
}

/// Normalised pure state on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub space: FockSpace,
    pub amplitudes: Vec<Complex64>,
    /// Weight of the untruncated state lying above the cutoff.
    pub leakage: f64,
}

impl FockState {
    fn normalised(space: FockSpace, mut amplitudes: Vec<Complex64>, leakage: f64) -> Self {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self {
            space,
            amplitudes,
            leakage,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Mean photon number of each mode.
    pub fn mean_photons(&self) -> (f64, f64) {
        self.amplitudes
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(na, nb), (i, a)| {
                let (a_occ, b_occ) = self.space.occupations(i);
                let w = a.norm_sqr();
                (na + w * a_occ as f64, nb + w * b_occ as f64)
            })
    }

    pub fn total_photons(&self) -> f64 {
        let (a, b) = self.mean_photons();
        a + b
    }

    /// `⟨(-1)^{n_a + n_b}⟩`.
    pub fn parity(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (x, y) = self.space.occupations(i);
                if (x + y) % 2 == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum()
    }
}

/// `(|N,0⟩ + |0,N⟩)/√2`.
pub fn make_noon(n: u32, cutoff: usize) -> Result<FockState> {
    if n == 0 {
        return Err(invalid("n", "NOON states need at least one photon"));
    }
    let n = n as usize;
    if cutoff < n {
        return Err(Error::CutoffTooSmall {
            cutoff,
            reason: format!("NOON state with N = {n} needs cutoff >= N"),
        });
    }
    let space = FockSpace::new(2, cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[space.index(n, 0)] = h;
    amps[space.index(0, n)] = h;
    Ok(FockState::normalised(space, amps, 0.0))
}

/// Smallest cutoff that is at least `|α|² + 6|α|` and keeps the truncation
/// leakage below [`LEAKAGE_BOUND`].
pub fn default_cat_cutoff(alpha: Complex64) -> usize {
    let a = alpha.norm();
    let mut c = (a * a + 6.0 * a).ceil().max(1.0) as usize;
    while cat_leakage(a, c) > LEAKAGE_BOUND {
        c += 1;
    }
    c
}

/// Weight of the even cat above `cutoff`.
fn cat_leakage(a: f64, cutoff: usize) -> f64 {
    let norm2 = 0.5 / (1.0 + (-2.0 * a * a).exp());
    let mut term = (-a * a).exp();
    let mut kept = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            term *= a * a / n as f64;
        }
        if n % 2 == 0 {
            kept += 4.0 * norm2 * term;
        }
    }
    (1.0 - kept).max(0.0)
}

/// Even cat `∝ |α⟩ + |−α⟩` on a single mode, renormalised after truncation.
pub fn make_cat(alpha: Complex64, cutoff: usize) -> Result<FockState> {
    let a = alpha.norm();
    if !a.is_finite() {
        return Err(invalid("alpha", "must be finite"));
    }
    if (cutoff as f64) < a * a + 6.0 * a {
        return Err(Error::CutoffTooSmall {
            cutoff,
            reason: format!("cat with |alpha| = {a} needs cutoff >= |alpha|^2 + 6|alpha|"),
        });
    }
    let space = FockSpace::new(1, cutoff)?;
    let norm = (2.0 * (1.0 + (-2.0 * a * a).exp())).sqrt().recip();
    let mut coherent = Complex64::new((-0.5 * a * a).exp(), 0.0);
    let mut amps = Vec::with_capacity(space.dim());
    for n in 0..space.dim() {
        if n > 0 {
            coherent *= alpha / (n as f64).sqrt();
        }
        amps.push(if n % 2 == 0 { coherent * (2.0 * norm) } else { Complex64::new(0.0, 0.0) });
    }
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let leakage = (1.0 - kept).max(0.0);
    if leakage > LEAKAGE_BOUND {
        return Err(Error::CutoffTooSmall {
            cutoff,
            reason: format!("truncation leakage {leakage:e} exceeds {LEAKAGE_BOUND:e}"),
        });
    }
    Ok(FockState::normalised(space, amps, leakage))
}

/// Smallest cutoff with `tanh(r)^{2(cutoff+1)}` below `bound`.
pub fn default_tmsv_cutoff(r: f64, bound: f64) -> usize {
    let t2 = r.tanh().powi(2);
    if t2 == 0.0 {
        return 0;
    }
    let mut c = 0usize;
    while t2.powi(c as i32 + 1) >= bound {
        c += 1;
    }
    c
}

/// Two-mode squeezed vacuum `sech r Σ tanh^n r |n,n⟩`.
pub fn make_tmsv(r: f64, cutoff: usize) -> Result<FockState> {
    make_tmsv_with_bound(r, cutoff, LEAKAGE_BOUND)
}

pub fn make_tmsv_with_bound(r: f64, cutoff: usize, leakage_bound: f64) -> Result<FockState> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid("r", "squeezing must be finite and non-negative"));
    }
    let t = r.tanh();
    let leakage = t.powi(2 * (cutoff as i32 + 1));
    if leakage >= leakage_bound {
        return Err(Error::CutoffTooSmall {
            cutoff,
            reason: format!("tanh(r)^(2(cutoff+1)) = {leakage:e} is not below {leakage_bound:e}"),
        });
    }
    let space = FockSpace::new(2, cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
    let mut c = 1.0 / r.cosh();
    for n in 0..=cutoff {
        amps[space.index(n, n)] = Complex64::new(c, 0.0);
        c *= t;
    }
    Ok(FockState::normalised(space, amps, leakage))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noon_structure() {
        let s = make_noon(1, 1).unwrap();
        assert_eq!(s.amplitudes.iter().filter(|a| a.norm() > 0.0).count(), 2);
        let s = make_noon(4, 4).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitudes.iter().filter(|a| a.norm() > 0.0).count(), 2);
        assert!((s.total_photons() - 4.0).abs() < 1e-14);
        assert!(matches!(make_noon(4, 3), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn cat_moments() {
        let s = make_cat(Complex64::new(0.0, 0.0), 1).unwrap();
        assert!((s.amplitudes[0].norm() - 1.0).abs() < 1e-15);
        let alpha = Complex64::new(2.0, 0.0);
        let s = make_cat(alpha, default_cat_cutoff(alpha)).unwrap();
        assert!(s.space.cutoff > 16 && s.leakage < LEAKAGE_BOUND);
        assert!(matches!(make_cat(alpha, 16), Err(Error::CutoffTooSmall { .. })));
        let a2: f64 = 4.0;
        let closed = a2 * (1.0 - (-2.0 * a2).exp()) / (1.0 + (-2.0 * a2).exp());
        assert!((s.mean_photons().0 - closed).abs() < 1e-6);
        assert_eq!(s.parity(), 1.0);
        assert!(s.amplitudes.iter().skip(1).step_by(2).all(|a| *a == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn cat_with_complex_phase_has_same_photon_statistics() {
        let a = make_cat(Complex64::new(2.0, 0.0), 24).unwrap();
        let b = make_cat(Complex64::from_polar(2.0, 0.7), 24).unwrap();
        assert!((a.mean_photons().0 - b.mean_photons().0).abs() < 1e-12);
    }

    #[test]
    fn tmsv_moments() {
        let s = make_tmsv(0.0, 0).unwrap();
        assert_eq!(s.amplitudes, vec![Complex64::new(1.0, 0.0)]);
        let s = make_tmsv_with_bound(1.1, 30, 1e-5).unwrap();
        assert!((s.mean_photons().0 - 1.1f64.sinh().powi(2)).abs() < 1e-3);
        assert!(make_tmsv(1.1, 30).is_err());
        let c = default_tmsv_cutoff(1.1, LEAKAGE_BOUND);
        assert_eq!(c, 41);
        let s = make_tmsv(1.1, c).unwrap();
        for (i, a) in s.amplitudes.iter().enumerate() {
            let (x, y) = s.space.occupations(i);
            if x != y {
                assert_eq!(a.norm(), 0.0);
            }
        }
    }
}
