//! Two-qubit synthesis through the Cartan (KAK) decomposition.
//!
//! Any `U ∈ U(4)` factors as `(A1⊗B1)·exp(i(a·XX + b·YY + c·ZZ))·(A2⊗B2)` up to a
//! global phase. The non-local core is then realized with exactly three
//! applications of the target entangler, each interleaved with single-qubit
//! layers.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};
use crate::gates::{self, GateKind};
use crate::math::{c, cis, kron2, unitarity_error, Mat2, Mat4, C64, I, ONE, ZERO};

/// Accepted deviation from unitarity for decomposition inputs.
const UNITARY_TOL: f64 = 1e-8;

/// `U = e^{iφ}·(k1l⊗k1r)·exp(i(a·XX + b·YY + c·ZZ))·(k2l⊗k2r)` with `φ` dropped.
#[derive(Debug, Clone)]
pub struct KakDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k1l: Mat2,
    pub k1r: Mat2,
    pub k2l: Mat2,
    pub k2r: Mat2,
}

/// Three entangling gates interleaved with four single-qubit layers.
///
/// In time order: `locals[0]`, `entanglers[0]`, `locals[1]`, …, `locals[3]`.
/// Each local layer is `(first qubit, second qubit)`.
#[derive(Debug, Clone)]
pub struct TwoQubitTemplate {
    pub locals: [(Mat2, Mat2); 4],
    pub entanglers: [(GateKind, Vec<f64>); 3],
}

impl TwoQubitTemplate {
    pub fn matrix(&self) -> Result<Mat4> {
        let mut u = kron2(&self.locals[0].0, &self.locals[0].1);
        for k in 0..3 {
            let (g, p) = &self.entanglers[k];
            u = gates::matrix2(*g, p)? * u;
            u = kron2(&self.locals[k + 1].0, &self.locals[k + 1].1) * u;
        }
        Ok(u)
    }
}

/// The canonical interaction `exp(i(a·XX + b·YY + c·ZZ))`.
pub fn canonical_gate(a: f64, b: f64, c: f64) -> Mat4 {
    // Diagonal in the magic basis with eigenphase a·xx + b·yy + c·zz.
    let m = magic();
    let d = Vector4::from_fn(|j, _| {
        let (xx, yy, zz) = MAGIC_PAULI_EIGS[j];
        cis(a * xx + b * yy + c * zz)
    });
    m * Mat4::from_diagonal(&d) * m.adjoint()
}

/// Eigenvalues of XX, YY, ZZ on the magic-basis columns.
const MAGIC_PAULI_EIGS: [(f64, f64, f64); 4] = [
    (1.0, -1.0, 1.0),
    (-1.0, 1.0, 1.0),
    (1.0, 1.0, -1.0),
    (-1.0, -1.0, -1.0),
];

fn magic() -> Mat4 {
    let h = FRAC_1_SQRT_2;
    let (o, z, i) = (c(h, 0.0), ZERO, c(0.0, h));
    Mat4::new(
        o, i, z, z, //
        z, z, i, c(h, 0.0), //
        z, z, i, c(-h, 0.0), //
        o, -i, z, z,
    )
}

fn det4(u: &Mat4) -> C64 {
    u.determinant()
}

/// Splits a 4×4 tensor product `A⊗B` into its factors, with `det A = 1`.
pub fn factor_tensor(k: &Mat4) -> (Mat2, Mat2) {
    let (mut best, mut at) = (0.0, (0, 0));
    for r in 0..4 {
        for col in 0..4 {
            let v = k[(r, col)].norm();
            if v > best {
                best = v;
                at = (r, col);
            }
        }
    }
    let (i0, j0) = (at.0 / 2, at.0 % 2);
    let (k0, l0) = (at.1 / 2, at.1 % 2);
    let mut a = Mat2::from_fn(|i, kk| k[(2 * i + j0, 2 * kk + l0)]);
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    a /= det.sqrt();
    let pivot = a[(i0, k0)];
    let b = Mat2::from_fn(|j, l| k[(2 * i0 + j, 2 * k0 + l)] / pivot);
    (a, b)
}

/// Real orthogonal `P` with `Pᵀ·M·P` diagonal, for a complex symmetric unitary `M`.
///
/// The real and imaginary parts of `M` are commuting real symmetric matrices,
/// so a generic real combination of them shares their eigenbasis.
fn diagonalize_symmetric_unitary(m: &Mat4) -> Result<Matrix4<f64>> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    // Fixed irrational-ish mixing angles; the first generic one almost always works.
    #[allow(clippy::approx_constant)]
    const MIXES: [f64; 8] = [0.6180339887, 1.4142135623, 2.2360679774, 0.3183098861,
        2.7182818284, 1.7320508075, 0.5772156649, 1.2020569031];
    let mut best: Option<(f64, Matrix4<f64>)> = None;
    for &t in &MIXES {
        let mix = re * t.cos() + im * t.sin();
        let eig = SymmetricEigen::new(mix);
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            p.column_mut(0).neg_mut();
        }
        let pc = p.map(|x| c(x, 0.0));
        let d = pc.transpose() * m * pc;
        let mut off = 0.0f64;
        for r in 0..4 {
            for col in 0..4 {
                if r != col {
                    off = off.max(d[(r, col)].norm());
                }
            }
        }
        if off < 1e-13 {
            return Ok(p);
        }
        if best.as_ref().is_none_or(|(o, _)| off < *o) {
            best = Some((off, p));
        }
    }
    match best {
        Some((off, p)) if off < 1e-9 => Ok(p),
        _ => Err(Error::NumericDomain(
            "failed to diagonalize the magic-basis square".into(),
        )),
    }
}

/// Cartan decomposition of a two-qubit unitary.
pub fn kak(u: &Mat4) -> Result<KakDecomposition> {
    let err = unitarity_error(u);
    if !err.is_finite() || err > UNITARY_TOL {
        return Err(Error::NumericDomain(format!(
            "input is not unitary (deviation {err:.3e})"
        )));
    }
    let su = u / det4(u).powf(0.25);
    let m = magic();
    let um = m.adjoint() * su * m;
    let m2 = um.transpose() * um;
    let p = diagonalize_symmetric_unitary(&m2)?;
    let pc = p.map(|x| c(x, 0.0));
    let diag = pc.transpose() * m2 * pc;
    let mut half: [f64; 4] = std::array::from_fn(|j| diag[(j, j)].arg() / 2.0);

    let mut k1 = um * pc * Mat4::from_diagonal(&Vector4::from_fn(|j, _| cis(-half[j])));
    if k1.determinant().re < 0.0 {
        half[0] += PI;
        k1.column_mut(0).neg_mut();
    }
    let k1 = k1.map(|z| c(z.re, 0.0));
    let left = m * k1 * m.adjoint();
    let right = m * pc.transpose() * m.adjoint();
    let (k1l, k1r) = factor_tensor(&left);
    let (k2l, k2r) = factor_tensor(&right);

    // Solve half[j] = g + a·xx_j + b·yy_j + c·zz_j; the ±1 coefficient
    // matrix has orthogonal rows, so its inverse is its transpose over 4.
    let mut coef = [0.0f64; 4];
    for (j, &(xx, yy, zz)) in MAGIC_PAULI_EIGS.iter().enumerate() {
        let row = [1.0, xx, yy, zz];
        for k in 0..4 {
            coef[k] += row[k] * half[j] / 4.0;
        }
    }
    Ok(KakDecomposition {
        a: coef[1],
        b: coef[2],
        c: coef[3],
        k1l,
        k1r,
        k2l,
        k2r,
    })
}

impl KakDecomposition {
    pub fn matrix(&self) -> Mat4 {
        kron2(&self.k1l, &self.k1r)
            * canonical_gate(self.a, self.b, self.c)
            * kron2(&self.k2l, &self.k2r)
    }
}

/// Local dressing `(a, b, c, d)` with `CX ∝ (a⊗b)·G·(c⊗d)` for a CX-equivalent `G`.
fn cx_dressing(g: GateKind) -> Option<(Mat2, Mat2, Mat2, Mat2)> {
    use crate::gates::{hadamard, pauli_x, sx};
    let id = Mat2::identity();
    let s = Mat2::new(ONE, ZERO, ZERO, I);
    let h = hadamard();
    match g {
        GateKind::Cx => Some((id, id, id, id)),
        GateKind::Cz => Some((id, h, id, h)),
        GateKind::Ecr => Some((s, id, pauli_x(), sx())),
        GateKind::Zz => Some((id, h, s.adjoint(), h * sx().adjoint())),
        _ => None,
    }
}

/// Decomposes `u` into exactly three `target` gates plus single-qubit layers.
///
/// The composite equals `u` up to global phase.
pub fn decompose_su4(u: &Mat4, target: GateKind) -> Result<TwoQubitTemplate> {
    let k = kak(u)?;
    let h = gates::hadamard();
    let s = Mat2::new(ONE, ZERO, ZERO, I);
    match target {
        GateKind::Cx | GateKind::Cz | GateKind::Ecr | GateKind::Zz => {
            // exp(i(a XX + b YY + c ZZ)) with three CX gates; reversed-direction
            // CX gates are turned around with Hadamards.
            let t1 = FRAC_PI_2 - 2.0 * k.c;
            let t2 = 2.0 * k.a - FRAC_PI_2;
            let t3 = FRAC_PI_2 - 2.0 * k.b;
            let mut locals = [
                (h * k.k2l, h * gates::rz(-FRAC_PI_2) * k.k2r),
                (gates::rz(t1) * h, gates::ry(t2) * h),
                (h, h * gates::ry(t3)),
                (k.k1l * gates::rz(FRAC_PI_2) * h, k.k1r * h),
            ];
            let (da, db, dc, dd) = cx_dressing(target).expect("CX-equivalent target");
            for j in 0..3 {
                locals[j] = (dc * locals[j].0, dd * locals[j].1);
                locals[j + 1] = (locals[j + 1].0 * da, locals[j + 1].1 * db);
            }
            Ok(TwoQubitTemplate {
                locals,
                entanglers: std::array::from_fn(|_| (target, Vec::new())),
            })
        }
        GateKind::Rxx => {
            // exp(i a XX)·exp(i b YY)·exp(i c ZZ), each term a conjugated RXX.
            let hs = s.adjoint() * h;
            Ok(TwoQubitTemplate {
                locals: [
                    (h * k.k2l, h * k.k2r),
                    (hs, hs),
                    (s, s),
                    (k.k1l, k.k1r),
                ],
                entanglers: [
                    (GateKind::Rxx, vec![-2.0 * k.c]),
                    (GateKind::Rxx, vec![-2.0 * k.b]),
                    (GateKind::Rxx, vec![-2.0 * k.a]),
                ],
            })
        }
        GateKind::Xy => {
            // a XX + b YY + c ZZ = s1(XX+YY) + s2(YY+ZZ) + s3(XX+ZZ).
            let s1 = (k.a + k.b - k.c) / 2.0;
            let s2 = (k.b + k.c - k.a) / 2.0;
            let s3 = (k.a + k.c - k.b) / 2.0;
            let r = gates::rx(FRAC_PI_2);
            let rd = r.adjoint();
            Ok(TwoQubitTemplate {
                locals: [
                    (rd * k.k2l, rd * k.k2r),
                    (h * r, h * r),
                    (h, h),
                    (k.k1l, k.k1r),
                ],
                entanglers: [
                    (GateKind::Xy, vec![4.0 * s3]),
                    (GateKind::Xy, vec![4.0 * s2]),
                    (GateKind::Xy, vec![4.0 * s1]),
                ],
            })
        }
        other => Err(Error::UnknownTarget(format!(
            "{other} is not a supported two-qubit synthesis target"
        ))),
    }
}
