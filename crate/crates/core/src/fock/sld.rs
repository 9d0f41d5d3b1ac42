//! Symmetric logarithmic derivatives and the quantum Fisher information
//! matrix.
//!
//! The density and its derivatives are split into blocks, the connected
//! components of their joint support graph. Each block is diagonalised on its
//! own, so a two-mode state with a few thousand basis vectors never needs a
//! dense eigendecomposition of the full space.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::FockDensity;
use crate::analytic::FisherMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse view of a Hermitian operator.
pub trait DensityOperator: Sized {
    fn dim(&self) -> usize;
    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64));
    /// `a·self + b·other`.
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl DensityOperator for FockDensity {
    fn dim(&self) -> usize {
        self.space().dim()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64)) {
        self.for_each_nonzero(f)
    }

    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        FockDensity::combine(self, a, other, b)
    }
}

impl DensityOperator for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64)) {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                let z = self[(i, j)];
                if z != ZERO {
                    f(i, j, z);
                }
            }
        }
    }

    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        self * Complex64::new(a, 0.0) + other * Complex64::new(b, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SldConfig {
    /// Central-difference step in β and x.
    pub step: f64,
    /// Pairs with `λ_j + λ_k` below this fraction of `λ_max` are dropped.
    pub eigen_floor_rel: f64,
    /// Largest tolerated QFIM change when the step is halved, relative to
    /// `max(1, |Q|)`.
    pub drift_tol: f64,
}

impl Default for SldConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            eigen_floor_rel: 1e-10,
            drift_tol: 1e-5,
        }
    }
}

/// Minimum weight of `ρ` on the retained eigenspace.
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    rho: DMatrix<Complex64>,
    d: [DMatrix<Complex64>; 2],
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    l: [DMatrix<Complex64>; 2],
}

/// SLDs `L_β`, `L_x` stored block by block in the original basis.
#[derive(Debug, Clone)]
pub struct SldPair {
    dim: usize,
    blocks: Vec<Block>,
    locate: Vec<(u32, u32)>,
    pub eigen_floor: f64,
    pub retained_trace: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the joint support, each sorted, ordered by their
/// smallest index.
pub fn support_blocks<D: DensityOperator>(ops: &[&D]) -> Vec<Vec<usize>> {
    let dim = ops[0].dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    let mut touched = vec![false; dim];
    for op in ops {
        op.for_each_entry(&mut |i, j, _| {
            touched[i] = true;
            touched[j] = true;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        });
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for i in 0..dim {
        if !touched[i] {
            continue;
        }
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn gather<D: DensityOperator>(
    op: &D,
    blocks: &[Vec<usize>],
    locate: &[(u32, u32)],
) -> Vec<DMatrix<Complex64>> {
    let mut out: Vec<DMatrix<Complex64>> = blocks.iter().map(|b| DMatrix::zeros(b.len(), b.len())).collect();
    op.for_each_entry(&mut |i, j, z| {
        let (bi, li) = locate[i];
        let (bj, lj) = locate[j];
        if bi == bj && bi != u32::MAX {
            out[bi as usize][(li as usize, lj as usize)] = z;
        }
    });
    out
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// SLDs from a density and its exact derivatives with respect to β and x.
pub fn sld_from_derivatives<D: DensityOperator>(
    rho: &D,
    d_beta: &D,
    d_x: &D,
    eigen_floor_rel: f64,
) -> Result<SldPair> {
    let dim = rho.dim();
    let groups = support_blocks(&[rho, d_beta, d_x]);
    let mut locate = vec![(u32::MAX, u32::MAX); dim];
    for (b, g) in groups.iter().enumerate() {
        for (l, &i) in g.iter().enumerate() {
            locate[i] = (b as u32, l as u32);
        }
    }
    let rhos = gather(rho, &groups, &locate);
    let dbs = gather(d_beta, &groups, &locate);
    let dxs = gather(d_x, &groups, &locate);

    let eigs: Vec<SymmetricEigen<Complex64, nalgebra::Dyn>> =
        rhos.iter().map(|r| SymmetricEigen::new(hermitian_part(r))).collect();
    let lambda_max = eigs
        .iter()
        .flat_map(|e| e.eigenvalues.iter().copied())
        .fold(0.0, f64::max);
    let floor = eigen_floor_rel * lambda_max;

    let mut retained_trace = 0.0;
    let mut blocks = Vec::with_capacity(groups.len());
    for (((indices, r), (db, dx)), eig) in groups.into_iter().zip(rhos).zip(dbs.into_iter().zip(dxs)).zip(eigs) {
        let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        retained_trace += lam.iter().filter(|&&l| 2.0 * l > floor).sum::<f64>();
        let u = eig.eigenvectors;
        let ut = u.adjoint();
        let n = lam.len();
        let mut l_pair = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for (slot, d) in l_pair.iter_mut().zip([&db, &dx]) {
            let de = &ut * hermitian_part(d) * &u;
            let mut le = DMatrix::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    let s = lam[j] + lam[k];
                    if s > floor {
                        le[(j, k)] = de[(j, k)] * (2.0 / s);
                    }
                }
            }
            *slot = &u * le * &ut;
        }
        blocks.push(Block {
            indices,
            rho: r,
            d: [db, dx],
            eigenvalues: lam,
            eigenvectors: u,
            l: l_pair,
        });
    }
    if retained_trace < 1.0 - SUPPORT_TOLERANCE {
        return Err(Error::DegenerateSupport {
            retained: retained_trace,
        });
    }
    Ok(SldPair {
        dim,
        blocks,
        locate,
        eigen_floor: floor,
        retained_trace,
    })
}

/// SLDs of a parameterised family using central differences at `at`.
pub fn sld_pair<D, F>(rho_fn: F, at: (f64, f64), step: f64, eigen_floor_rel: f64) -> Result<SldPair>
where
    D: DensityOperator,
    F: Fn(f64, f64) -> Result<D>,
{
    let (rho, db, dx) = central_differences(&rho_fn, at, step)?;
    sld_from_derivatives(&rho, &db, &dx, eigen_floor_rel)
}

fn central_differences<D, F>(rho_fn: &F, (beta, x): (f64, f64), h: f64) -> Result<(D, D, D)>
where
    D: DensityOperator,
    F: Fn(f64, f64) -> Result<D>,
{
    if !(h > 0.0) {
        return Err(crate::error::invalid("step", "must be positive"));
    }
    let rho = rho_fn(beta, x)?;
    let s = 0.5 / h;
    let db = rho_fn(beta + h, x)?.combine(s, &rho_fn(beta - h, x)?, -s);
    let dx = rho_fn(beta, x + h)?.combine(s, &rho_fn(beta, x - h)?, -s);
    Ok((rho, db, dx))
}

/// QFIM and incompatibility of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfimReport {
    pub qfim: FisherMatrix,
    pub incompatibility: f64,
    /// Largest projected SLD-equation residual.
    pub residual: f64,
}

impl QfimReport {
    pub fn from_slds<D: DensityOperator>(slds: &SldPair, rho: &D) -> Self {
        Self {
            qfim: qfim_numeric(slds, rho),
            incompatibility: incompatibility(slds, rho),
            residual: slds.residual(),
        }
    }
}

/// Central-difference QFIM with a step-halving convergence check.
pub fn qfim_finite_difference<D, F>(rho_fn: F, at: (f64, f64), cfg: &SldConfig) -> Result<QfimReport>
where
    D: DensityOperator,
    F: Fn(f64, f64) -> Result<D>,
{
    let (rho, db, dx) = central_differences(&rho_fn, at, cfg.step)?;
    let slds = sld_from_derivatives(&rho, &db, &dx, cfg.eigen_floor_rel)?;
    let report = QfimReport::from_slds(&slds, &rho);
    let half = sld_pair(&rho_fn, at, 0.5 * cfg.step, cfg.eigen_floor_rel)?;
    let q2 = qfim_numeric(&half, &rho);
    let drift = report.qfim.max_abs_diff(&q2);
    let scale = 1f64.max(report.qfim.f_bb.abs()).max(report.qfim.f_xx.abs());
    if drift > cfg.drift_tol * scale {
        return Err(Error::NotConverged {
            drift,
            tol: cfg.drift_tol * scale,
        });
    }
    Ok(report)
}

pub fn qfim_from_derivatives<D: DensityOperator>(rho: &D, d_beta: &D, d_x: &D, eigen_floor_rel: f64) -> Result<QfimReport> {
    let slds = sld_from_derivatives(rho, d_beta, d_x, eigen_floor_rel)?;
    Ok(QfimReport::from_slds(&slds, rho))
}

impl SldPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    fn assemble(&self, which: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (lj, &j) in b.indices.iter().enumerate() {
                for (lk, &k) in b.indices.iter().enumerate() {
                    m[(j, k)] = b.l[which][(lj, lk)];
                }
            }
        }
        m
    }

    /// Dense `L_β`; intended for small spaces.
    pub fn l_beta(&self) -> DMatrix<Complex64> {
        self.assemble(0)
    }

    pub fn l_x(&self) -> DMatrix<Complex64> {
        self.assemble(1)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.l.iter().map(|l| (l - l.adjoint()).map(|z| z.norm()).max()))
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `∂ρ − ½(ρL + Lρ)` restricted to retained
    /// eigenvector pairs, maximised over both parameters.
    pub fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let u = &b.eigenvectors;
            let ut = u.adjoint();
            for (d, l) in b.d.iter().zip(&b.l) {
                let r = d - (&b.rho * l + l * &b.rho) * Complex64::new(0.5, 0.0);
                let re = &ut * r * u;
                let mut s = 0.0;
                for j in 0..b.eigenvalues.len() {
                    for k in 0..b.eigenvalues.len() {
                        if b.eigenvalues[j] + b.eigenvalues[k] > self.eigen_floor {
                            s += re[(j, k)].norm_sqr();
                        }
                    }
                }
                worst = worst.max(s.sqrt());
            }
        }
        worst
    }
}

/// `Q_ab = ½ Tr ρ{L_a, L_b}`.
pub fn qfim_numeric<D: DensityOperator>(slds: &SldPair, rho: &D) -> FisherMatrix {
    let groups: Vec<Vec<usize>> = slds.blocks.iter().map(|b| b.indices.clone()).collect();
    let rhos = gather(rho, &groups, &slds.locate);
    let mut q = [[0.0; 2]; 2];
    for (b, r) in slds.blocks.iter().zip(&rhos) {
        for a in 0..2 {
            for c in a..2 {
                let rl = r * &b.l[a];
                let t = (rl * &b.l[c]).trace() + (r * &b.l[c] * &b.l[a]).trace();
                q[a][c] += 0.5 * t.re;
            }
        }
    }
    FisherMatrix::new(q[0][0], q[1][1], q[0][1])
}

/// `½ |Tr ρ [L_β, L_x]|`, summed over blocks before taking the modulus.
pub fn incompatibility<D: DensityOperator>(slds: &SldPair, rho: &D) -> f64 {
    let groups: Vec<Vec<usize>> = slds.blocks.iter().map(|b| b.indices.clone()).collect();
    let rhos = gather(rho, &groups, &slds.locate);
    let mut total = ZERO;
    for (b, r) in slds.blocks.iter().zip(&rhos) {
        let comm = &b.l[0] * &b.l[1] - &b.l[1] * &b.l[0];
        total += (r * comm).trace();
    }
    0.5 * total.norm()
}

/// Eigenvalues of a density, computed block by block.
pub fn eigenvalues<D: DensityOperator>(rho: &D) -> Vec<f64> {
    let groups = support_blocks(&[rho]);
    let mut locate = vec![(u32::MAX, u32::MAX); rho.dim()];
    for (b, g) in groups.iter().enumerate() {
        for (l, &i) in g.iter().enumerate() {
            locate[i] = (b as u32, l as u32);
        }
    }
    let covered: usize = groups.iter().map(|g| g.len()).sum();
    let mut out: Vec<f64> = gather(rho, &groups, &locate)
        .into_iter()
        .flat_map(|m| hermitian_part(&m).symmetric_eigenvalues().iter().copied().collect::<Vec<_>>())
        .collect();
    out.extend(std::iter::repeat(0.0).take(rho.dim() - covered));
    out
}

/// Classical Fisher matrix of a projective measurement in the orthonormal
/// basis given by the columns of `basis`.
pub fn classical_fim(
    rho: &DMatrix<Complex64>,
    d_beta: &DMatrix<Complex64>,
    d_x: &DMatrix<Complex64>,
    basis: &DMatrix<Complex64>,
) -> FisherMatrix {
    let mut f = FisherMatrix::zero();
    for k in 0..basis.ncols() {
        let v = basis.column(k);
        let p = (v.adjoint() * rho * v)[(0, 0)].re;
        if p <= 1e-14 {
            continue;
        }
        let gb = (v.adjoint() * d_beta * v)[(0, 0)].re;
        let gx = (v.adjoint() * d_x * v)[(0, 0)].re;
        f.f_bb += gb * gb / p;
        f.f_xx += gx * gx / p;
        f.f_bx += gb * gx / p;
    }
    f
}
