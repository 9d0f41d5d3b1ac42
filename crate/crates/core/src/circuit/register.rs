use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gates::{embed, GateOp};
use crate::error::{invalid, Result};

pub const MAX_QUBITS: usize = 8;

/// Density matrix over `n_qubits` qubits, qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    n_qubits: usize,
    state: DMatrix<Complex64>,
}

impl QubitRegister {
    /// The all-zero state.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(invalid("n_qubits", format!("must be in 1..={MAX_QUBITS}")));
        }
        let dim = 1 << n_qubits;
        let mut state = DMatrix::zeros(dim, dim);
        state[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, state })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn state(&self) -> &DMatrix<Complex64> {
        &self.state
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        let qubits = gate.qubits();
        for (k, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(invalid("gate", format!("qubit {q} outside a {}-qubit register", self.n_qubits)));
            }
            if qubits[..k].contains(&q) {
                return Err(invalid("gate", format!("qubit {q} used twice")));
            }
        }
        let u = embed(&gate.local_matrix(), &qubits, self.n_qubits);
        self.state = &u * &self.state * u.adjoint();
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.state.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.state - self.state.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.state
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Reduced 2x2 state of one qubit, tracing out all others.
    pub fn reduced(&self, qubit: usize) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut out = DMatrix::zeros(2, 2);
        for i in 0..dim {
            for j in 0..dim {
                if i & !mask == j & !mask {
                    let (a, b) = (usize::from(i & mask != 0), usize::from(j & mask != 0));
                    out[(a, b)] += self.state[(i, j)];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_indices() {
        let mut r = QubitRegister::new(2).unwrap();
        assert!(r.apply(&GateOp::Hadamard(2)).is_err());
        assert!(r.apply(&GateOp::Cnot { control: 1, target: 1 }).is_err());
        assert!(QubitRegister::new(9).is_err());
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let mut r = QubitRegister::new(2).unwrap();
        r.apply(&GateOp::Hadamard(0)).unwrap();
        r.apply(&GateOp::Cnot { control: 0, target: 1 }).unwrap();
        let rho = r.reduced(1);
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho[(0, 1)].norm() < 1e-15);
        assert!((r.trace().re - 1.0).abs() < 1e-15);
    }
}
