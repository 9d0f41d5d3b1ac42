use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::thermal_populations;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Hadamard(usize),
    PauliX(usize),
    Cnot { control: usize, target: usize },
    /// Prepares the thermal amplitudes `(√p_g, √p_e)` from `|0⟩`.
    ThermalRotation { qubit: usize, beta: f64, hbar_omega0: f64 },
    /// `diag(1, e^{-i angle})` on the target, conditioned on the control.
    ControlledPhase { angle: f64, control: usize, target: usize },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Hadamard(q) | GateOp::PauliX(q) => vec![q],
            GateOp::ThermalRotation { qubit, .. } => vec![qubit],
            GateOp::Cnot { control, target } | GateOp::ControlledPhase { control, target, .. } => {
                vec![control, target]
            }
        }
    }

    /// Local matrix on `qubits()`, first listed qubit most significant.
    pub fn local_matrix(&self) -> DMatrix<Complex64> {
        match *self {
            GateOp::Hadamard(_) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                DMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            GateOp::PauliX(_) => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            GateOp::ThermalRotation { beta, hbar_omega0, .. } => thermal_rotation_matrix(beta, hbar_omega0),
            GateOp::Cnot { .. } => {
                let mut m = DMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 1)] = ONE;
                m[(2, 3)] = ONE;
                m[(3, 2)] = ONE;
                m
            }
            GateOp::ControlledPhase { angle, .. } => {
                let mut m = DMatrix::identity(4, 4);
                m[(3, 3)] = Complex64::from_polar(1.0, -angle);
                m
            }
        }
    }
}

/// `R(β) = [[√p_g, -√p_e], [√p_e, √p_g]]`.
pub fn thermal_rotation_matrix(beta: f64, hbar_omega0: f64) -> DMatrix<Complex64> {
    let (pg, pe) = thermal_populations(beta, hbar_omega0);
    let (a, b) = (pg.sqrt(), pe.sqrt());
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(a, 0.0),
            Complex64::new(-b, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(a, 0.0),
        ],
    )
}

/// Embeds a local gate into the full register, qubit 0 most significant.
pub fn embed(local: &DMatrix<Complex64>, qubits: &[usize], n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let k = qubits.len();
    let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (n_qubits - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let local_index = |i: usize| {
        masks
            .iter()
            .enumerate()
            .fold(0, |acc, (pos, &m)| acc | (usize::from(i & m != 0) << (k - 1 - pos)))
    };
    let mut full = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let li = local_index(i);
        for j in 0..dim {
            if i & !all == j & !all {
                full[(i, j)] = local[(li, local_index(j))];
            }
        }
    }
    full
}

pub fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thermal_rotation_limits() {
        let r = thermal_rotation_matrix(60.0, 1.0);
        assert_abs_diff_eq!(r[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(1, 0)].re, 0.0, epsilon = 1e-12);
        let r = thermal_rotation_matrix(0.0, 1.0);
        assert_abs_diff_eq!(r[(0, 0)].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(r[(1, 0)].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        let r = thermal_rotation_matrix(-4.0, 1.0);
        assert_abs_diff_eq!(r[(1, 0)].re.powi(2), 0.98201, epsilon = 5e-6);
    }

    #[test]
    fn every_gate_is_unitary() {
        let gates = [
            GateOp::Hadamard(2),
            GateOp::PauliX(3),
            GateOp::Cnot { control: 0, target: 1 },
            GateOp::ThermalRotation { qubit: 0, beta: -1.3, hbar_omega0: 0.7 },
            GateOp::ControlledPhase { angle: 0.9, control: 1, target: 2 },
        ];
        for g in gates {
            assert!(unitarity_error(&g.local_matrix()) < 1e-12);
            assert!(unitarity_error(&embed(&g.local_matrix(), &g.qubits(), 4)) < 1e-12);
        }
    }

    #[test]
    fn cnot_embedding_respects_qubit_order() {
        // CNOT(q0 -> q1) on |10⟩ gives |11⟩; reversed roles leave |10⟩ alone.
        let g = GateOp::Cnot { control: 0, target: 1 };
        let u = embed(&g.local_matrix(), &g.qubits(), 2);
        assert_eq!(u[(3, 2)], ONE);
        let g = GateOp::Cnot { control: 1, target: 0 };
        let u = embed(&g.local_matrix(), &g.qubits(), 2);
        assert_eq!(u[(2, 2)], ONE);
        assert_eq!(u[(3, 1)], ONE);
    }
}
