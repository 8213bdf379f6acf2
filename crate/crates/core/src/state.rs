//! Statevector storage and in-place gate application.
//!
//! Amplitude index bits are big-endian in qubit order: qubit 0 is the most
//! significant bit, so the binary rendering of an index reads q0 first.

use crate::math::{Mat2, Mat4, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(width: usize) -> Self {
        Self::basis(width, 0)
    }

    pub fn basis(width: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << width];
        amps[index] = ONE;
        StateVector { width, amps }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.width - 1 - qubit)
    }

    pub fn apply_1q(&mut self, qubit: usize, m: &Mat2) {
        let bit = self.mask(qubit);
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        for base in 0..self.amps.len() {
            if base & bit != 0 {
                continue;
            }
            let a0 = self.amps[base];
            let a1 = self.amps[base | bit];
            self.amps[base] = m00 * a0 + m01 * a1;
            self.amps[base | bit] = m10 * a0 + m11 * a1;
        }
    }

    /// Applies `m` with `q0` as the high bit of the 4×4 basis.
    pub fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) {
        debug_assert_ne!(q0, q1);
        let b0 = self.mask(q0);
        let b1 = self.mask(q1);
        let mut local = [ZERO; 4];
        for base in 0..self.amps.len() {
            if base & (b0 | b1) != 0 {
                continue;
            }
            let idx = [base, base | b1, base | b0, base | b0 | b1];
            for (k, &i) in idx.iter().enumerate() {
                local[k] = self.amps[i];
            }
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = m[(r, 0)] * local[0]
                    + m[(r, 1)] * local[1]
                    + m[(r, 2)] * local[2]
                    + m[(r, 3)] * local[3];
            }
        }
    }

    pub fn apply_x(&mut self, qubit: usize) {
        let bit = self.mask(qubit);
        for base in 0..self.amps.len() {
            if base & bit == 0 {
                self.amps.swap(base, base | bit);
            }
        }
    }

    pub fn apply_z(&mut self, qubit: usize) {
        let bit = self.mask(qubit);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }

    pub fn apply_y(&mut self, qubit: usize) {
        // Y = i·X·Z
        self.apply_z(qubit);
        self.apply_x(qubit);
        let i = C64::new(0.0, 1.0);
        for a in self.amps.iter_mut() {
            *a *= i;
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::math::kron2;

    #[test]
    fn two_qubit_kernel_matches_dense_product() {
        let u = gates::cx() * kron2(&gates::hadamard(), &gates::rx(0.3));
        let mut s = StateVector::zero(2);
        s.apply_2q(0, 1, &u);
        for (k, a) in s.amplitudes().iter().enumerate() {
            assert!((a - u[(k, 0)]).norm() < 1e-15);
        }
    }

    #[test]
    fn reversed_qubit_order_flips_control() {
        // CX with q1 as control on |01⟩ flips q0 → |11⟩.
        let mut s = StateVector::basis(2, 0b01);
        s.apply_2q(1, 0, &gates::cx());
        assert!((s.amplitudes()[0b11] - ONE).norm() < 1e-15);
    }

    #[test]
    fn pauli_shortcuts_match_matrices() {
        for q in 0..3 {
            let mut a = StateVector::zero(3);
            a.apply_1q(0, &gates::hadamard());
            a.apply_1q(2, &gates::rx(0.4));
            let mut b = a.clone();
            a.apply_y(q);
            b.apply_1q(q, &gates::pauli_y());
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }
}
