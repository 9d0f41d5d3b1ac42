//! Closed-form model of the ideal interferometer.
//!
//! With a NOON input of `N` photons and the atom thermalised at inverse
//! temperature `β`, the probability of finding all photons in output port 0 is
//!
//! ```text
//! P0 = (1 + V cos 2Nx) / (1 + V),   V(β) = e^{-βħω} / (2 + e^{-βħω})
//! ```
//!
//! A single binary outcome gives a rank-1 Fisher matrix, so `det F` vanishes
//! identically. It is still computed from the closed-form elements so that
//! the identity can be tested rather than assumed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical parameters of the ideal interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub hbar_omega0: f64,
    pub x: f64,
    pub n_photons: u32,
}

impl ModelParams {
    /// Parameters with `ħω₀ = 1`.
    pub fn new(beta: f64, x: f64, n_photons: u32) -> Result<Self> {
        let p = Self {
            beta,
            hbar_omega0: 1.0,
            x,
            n_photons,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_energy(mut self, hbar_omega0: f64) -> Result<Self> {
        self.hbar_omega0 = hbar_omega0;
        self.validate()?;
        Ok(self)
    }

    pub fn at(self, beta: f64, x: f64) -> Self {
        Self { beta, x, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar_omega0 > 0.0 && self.hbar_omega0.is_finite()) {
            return Err(invalid("hbar_omega0", "must be finite and positive"));
        }
        if self.n_photons == 0 {
            return Err(invalid("n_photons", "must be at least 1"));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta", "must be finite"));
        }
        if !self.x.is_finite() {
            return Err(invalid("x", "must be finite"));
        }
        Ok(())
    }

    fn phase(&self) -> f64 {
        self.n_photons as f64 * self.x
    }
}

/// Outcome probabilities of the two output ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeProbabilities {
    pub p0: f64,
    #[serde(rename = "pN")]
    pub p_n: f64,
}

/// Symmetric 2x2 Fisher information matrix in the (β, x) basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub f_bb: f64,
    pub f_xx: f64,
    pub f_bx: f64,
}

impl FisherMatrix {
    pub fn new(f_bb: f64, f_xx: f64, f_bx: f64) -> Self {
        Self { f_bb, f_xx, f_bx }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn trace(&self) -> f64 {
        self.f_bb + self.f_xx
    }

    pub fn det(&self) -> f64 {
        self.f_bb * self.f_xx - self.f_bx * self.f_bx
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_tr = 0.5 * self.trace();
        let gap = (0.25 * (self.f_bb - self.f_xx).powi(2) + self.f_bx * self.f_bx).sqrt();
        [half_tr - gap, half_tr + gap]
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.f_bb, self.f_bx], [self.f_bx, self.f_xx]]
    }

    pub fn max_abs_diff(&self, other: &FisherMatrix) -> f64 {
        (self.f_bb - other.f_bb)
            .abs()
            .max((self.f_xx - other.f_xx).abs())
            .max((self.f_bx - other.f_bx).abs())
    }
}

/// Scalar figures of merit derived from a Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarFigures {
    pub f_eff: f64,
    pub trace: f64,
    pub f_x_fraction: f64,
}

/// Uniform, endpoint-inclusive grid over (β, x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub beta_range: (f64, f64),
    pub x_range: (f64, f64),
    pub n_beta: usize,
    pub n_x: usize,
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        Self {
            beta_range: (-4.0, 4.0),
            x_range: (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
            n_beta: 20,
            n_x: 20,
        }
    }
}

impl LandscapeGrid {
    pub fn new(beta_range: (f64, f64), x_range: (f64, f64), n_beta: usize, n_x: usize) -> Result<Self> {
        let g = Self {
            beta_range,
            x_range,
            n_beta,
            n_x,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("beta_range", self.beta_range)?;
        check_range("x_range", self.x_range)?;
        if self.n_beta < 2 {
            return Err(invalid("n_beta", "grid needs at least 2 points"));
        }
        if self.n_x < 2 {
            return Err(invalid("n_x", "grid needs at least 2 points"));
        }
        Ok(())
    }

    pub fn betas(&self) -> Vec<f64> {
        linspace(self.beta_range, self.n_beta)
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_range, self.n_x)
    }

    pub fn len(&self) -> usize {
        self.n_beta * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order (β outer, x inner) with their indices.
    pub fn points(&self) -> Vec<GridPoint> {
        let xs = self.xs();
        self.betas()
            .into_iter()
            .enumerate()
            .flat_map(|(i, beta)| {
                xs.iter().enumerate().map(move |(j, &x)| GridPoint {
                    beta_index: i,
                    x_index: j,
                    beta,
                    x,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub beta_index: usize,
    pub x_index: usize,
    pub beta: f64,
    pub x: f64,
}

fn check_range(name: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid(name, "bounds must be finite"));
    }
    if lo >= hi {
        return Err(invalid(name, format!("empty range [{lo}, {hi}]")));
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Returns `(V, 1 - V)` for `z = βħω`, each computed without cancellation.
pub(crate) fn visibility_pair(z: f64) -> (f64, f64) {
    if z > 0.0 {
        let t = (-z).exp();
        (t / (2.0 + t), 2.0 / (2.0 + t))
    } else {
        let s = z.exp();
        (1.0 / (1.0 + 2.0 * s), 2.0 * s / (1.0 + 2.0 * s))
    }
}

/// Visibility of the fringe, `e^{-βħω}/(2 + e^{-βħω})`.
pub fn visibility(p: &ModelParams) -> f64 {
    visibility_pair(p.beta * p.hbar_omega0).0
}

/// `dV/dβ = -ħω V (1 - V)`.
pub fn visibility_derivative(p: &ModelParams) -> f64 {
    let (v, w) = visibility_pair(p.beta * p.hbar_omega0);
    -p.hbar_omega0 * v * w
}

/// Thermal populations `(p_g, p_e)` of the two-level atom.
pub fn thermal_populations(beta: f64, hbar_omega0: f64) -> (f64, f64) {
    let z = beta * hbar_omega0;
    if z >= 0.0 {
        let t = (-z).exp();
        (1.0 / (1.0 + t), t / (1.0 + t))
    } else {
        let s = z.exp();
        (s / (1.0 + s), 1.0 / (1.0 + s))
    }
}

pub fn output_probabilities(p: &ModelParams) -> FringeProbabilities {
    let (v, w) = visibility_pair(p.beta * p.hbar_omega0);
    let (s, c) = p.phase().sin_cos();
    // Split 1 + V cos 2Nx as (1 - V) + 2V cos² so that neither port loses
    // precision near the fringe extrema.
    let p0 = ((w + 2.0 * v * c * c) / (1.0 + v)).min(1.0);
    let p_n = (2.0 * v * s * s / (1.0 + v)).min(1.0);
    FringeProbabilities { p0, p_n }
}

/// `(∂P0/∂β, ∂P0/∂x)`.
pub fn probability_gradient(p: &ModelParams) -> (f64, f64) {
    let (v, w) = visibility_pair(p.beta * p.hbar_omega0);
    let n = p.n_photons as f64;
    let s = p.phase().sin();
    let d_beta = 2.0 * p.hbar_omega0 * v * w / ((1.0 + v) * (1.0 + v)) * s * s;
    let d_x = -2.0 * n * v / (1.0 + v) * (2.0 * p.phase()).sin();
    (d_beta, d_x)
}

/// Default floor on `1 + V cos 2Nx` below which the Fisher matrix is
/// reported as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

pub fn fim_analytic(p: &ModelParams) -> Result<FisherMatrix> {
    fim_analytic_with_floor(p, DEGENERACY_FLOOR)
}

/// Closed-form Fisher matrix. The elements have removable singularities at
/// `Nx = kπ`, so only a vanishing denominator `1 + V cos 2Nx` (which needs
/// `V → 1` at a dark fringe) is treated as degenerate.
pub fn fim_analytic_with_floor(p: &ModelParams, floor: f64) -> Result<FisherMatrix> {
    p.validate()?;
    let (v, w) = visibility_pair(p.beta * p.hbar_omega0);
    let hw = p.hbar_omega0;
    let n = p.n_photons as f64;
    let (s, c) = p.phase().sin_cos();
    let denom = w + 2.0 * v * c * c;
    if !(denom >= floor) {
        return Err(Error::Degenerate(format!(
            "1 + V cos(2Nx) = {denom:e} at beta = {}, x = {}",
            p.beta, p.x
        )));
    }
    let opv = 1.0 + v;
    let f_bb = 2.0 * hw * hw * v * w * w * s * s / (opv * opv * denom);
    let f_xx = 8.0 * n * n * v * c * c / denom;
    let f_bx = -2.0 * n * hw * v * w * (2.0 * p.phase()).sin() / (opv * denom);
    Ok(FisherMatrix { f_bb, f_xx, f_bx })
}

/// Two-outcome Fisher matrix from a probability and its gradient. Serves as
/// an independent route to the closed form.
pub fn binary_fim(p0: f64, grad: (f64, f64)) -> FisherMatrix {
    let inv = 1.0 / (p0 * (1.0 - p0));
    FisherMatrix {
        f_bb: grad.0 * grad.0 * inv,
        f_xx: grad.1 * grad.1 * inv,
        f_bx: grad.0 * grad.1 * inv,
    }
}

pub fn scalar_figures(f: &FisherMatrix) -> Result<ScalarFigures> {
    let trace = f.trace();
    if !(trace > 0.0) {
        return Err(Error::ZeroTrace(trace));
    }
    Ok(ScalarFigures {
        f_eff: f.det() / trace,
        trace,
        f_x_fraction: f.f_xx / trace,
    })
}

/// One evaluated grid point of the analytic landscape. `fim` is `None` where
/// the model is degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeSample {
    pub point: GridPoint,
    pub probs: FringeProbabilities,
    pub fim: Option<FisherMatrix>,
    pub figures: Option<ScalarFigures>,
}

/// Evaluates the analytic model on every grid point, row-major.
pub fn landscape(grid: &LandscapeGrid, template: &ModelParams) -> Result<Vec<LandscapeSample>> {
    grid.validate()?;
    template.validate()?;
    Ok(grid
        .points()
        .into_iter()
        .map(|point| {
            let p = template.at(point.beta, point.x);
            let fim = fim_analytic(&p).ok();
            LandscapeSample {
                point,
                probs: output_probabilities(&p),
                fim,
                figures: fim.and_then(|f| scalar_figures(&f).ok()),
            }
        })
        .collect())
}

/// Grid points where `Tr F` reaches at least `(1 - δ)` of its maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauMask {
    pub n_beta: usize,
    pub n_x: usize,
    /// Row-major flags, β outer.
    pub marked: Vec<bool>,
    pub max_trace: f64,
}

impl PlateauMask {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.marked[i * self.n_x + j]
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    /// True when the marked cells form one 4-connected region.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.marked.iter().position(|&m| m) else {
            return false;
        };
        let mut seen = vec![false; self.marked.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut reached = 0;
        while let Some(k) = stack.pop() {
            reached += 1;
            let (i, j) = (k / self.n_x, k % self.n_x);
            let mut push = |ii: usize, jj: usize| {
                let kk = ii * self.n_x + jj;
                if self.marked[kk] && !seen[kk] {
                    seen[kk] = true;
                    stack.push(kk);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < self.n_beta {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < self.n_x {
                push(i, j + 1);
            }
        }
        reached == self.count()
    }
}

pub const DEFAULT_PLATEAU_DELTA: f64 = 0.05;

pub fn plateau_mask(grid: &LandscapeGrid, template: &ModelParams, delta: f64) -> Result<PlateauMask> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    let samples = landscape(grid, template)?;
    let traces: Vec<Option<f64>> = samples.iter().map(|s| s.fim.map(|f| f.trace())).collect();
    let max_trace = traces.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let marked = traces
        .iter()
        .map(|t| matches!(t, Some(t) if *t >= (1.0 - delta) * max_trace))
        .collect();
    Ok(PlateauMask {
        n_beta: grid.n_beta,
        n_x: grid.n_x,
        marked,
        max_trace,
    })
}
