//! Small dense complex linear algebra used across the crate.

use nalgebra::{DMatrix, Matrix2, Matrix4};
pub type C64 = nalgebra::Complex<f64>;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Dense square unitary of any power-of-two dimension.
pub type UnitaryMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// `a ⊗ b` with `a` acting on the more significant (left) qubit.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

pub fn to_dynamic<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> UnitaryMatrix
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::storage::Storage<C64, R, C>,
{
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, col| m[(r, col)])
}

/// Largest elementwise deviation of `m·m†` from the identity.
pub fn unitarity_error<R, S>(m: &nalgebra::Matrix<C64, R, R, S>) -> f64
where
    R: nalgebra::Dim,
    S: nalgebra::storage::Storage<C64, R, R>,
{
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for col in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += m[(r, k)] * m[(col, k)].conj();
            }
            if r == col {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

pub fn is_unitary<R, S>(m: &nalgebra::Matrix<C64, R, R, S>, tol: f64) -> bool
where
    R: nalgebra::Dim,
    S: nalgebra::storage::Storage<C64, R, R>,
{
    unitarity_error(m) <= tol
}

/// Elementwise distance between `a` and `b` after removing the best global phase.
///
/// The phase is taken from `tr(b† a)`; for matrices that are equal up to phase this
/// recovers it exactly, otherwise the value is an upper bound on the true minimum.
pub fn phase_distance<R, C, S1, S2>(
    a: &nalgebra::Matrix<C64, R, C, S1>,
    b: &nalgebra::Matrix<C64, R, C, S2>,
) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S1: nalgebra::storage::Storage<C64, R, C>,
    S2: nalgebra::storage::Storage<C64, R, C>,
{
    assert_eq!(a.shape(), b.shape());
    let mut overlap = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        overlap += y.conj() * x;
    }
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

pub fn equal_up_to_phase<R, C, S1, S2>(
    a: &nalgebra::Matrix<C64, R, C, S1>,
    b: &nalgebra::Matrix<C64, R, C, S2>,
    tol: f64,
) -> bool
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S1: nalgebra::storage::Storage<C64, R, C>,
    S2: nalgebra::storage::Storage<C64, R, C>,
{
    phase_distance(a, b) <= tol
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}
