//! Single-qubit resynthesis into each family's native rotations.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::Operation;
use crate::gates::{GateKind, VendorFamily};
use crate::math::{wrap_angle, Mat2};

/// Rotations smaller than this are dropped from synthesized sequences.
const ANGLE_EPS: f64 = 1e-12;

/// `V ∝ Rz(phi)·Ry(theta)·Rz(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

pub fn zyz_angles(v: &Mat2) -> ZyzAngles {
    let (v00, v01, v10, v11) = (v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);
    let theta = 2.0 * v10.norm().atan2(v00.norm());
    // Phase differences are insensitive to the global phase of `v`.
    let (phi, lambda) = if v00.norm() < 1e-14 {
        (v10.arg() - (-v01).arg(), 0.0)
    } else if v10.norm() < 1e-14 {
        (0.0, v11.arg() - v00.arg())
    } else {
        (v10.arg() - v00.arg(), v11.arg() - v10.arg())
    };
    ZyzAngles {
        theta,
        phi: wrap_angle(phi),
        lambda: wrap_angle(lambda),
    }
}

/// A native gate sequence for `v` in time order, equal to `v` up to global phase.
pub fn synthesize_1q(v: &Mat2, family: VendorFamily) -> Vec<(GateKind, Vec<f64>)> {
    let ZyzAngles { theta, phi, lambda } = zyz_angles(v);
    let mut out = Vec::new();
    let rz = |out: &mut Vec<(GateKind, Vec<f64>)>, a: f64| {
        let a = wrap_angle(a);
        if a.abs() > ANGLE_EPS {
            out.push((GateKind::Rz, vec![a]));
        }
    };
    let diagonal = theta.abs() < ANGLE_EPS;
    match family {
        VendorFamily::U3Cx => {
            if !(diagonal && wrap_angle(phi + lambda).abs() < ANGLE_EPS) {
                out.push((GateKind::U3, vec![theta, phi, lambda]));
            }
        }
        _ if diagonal => rz(&mut out, phi + lambda),
        VendorFamily::SuperconductingHeavyHex | VendorFamily::RingEcr => {
            // Ry(θ) = Rx(-π/2)·Rz(θ)·Rx(π/2) and Rx(-π/2) ∝ Rz(π)·SX·Rz(-π).
            rz(&mut out, lambda);
            out.push((GateKind::Sx, vec![]));
            rz(&mut out, theta - PI);
            out.push((GateKind::Sx, vec![]));
            rz(&mut out, phi + PI);
        }
        VendorFamily::Octagonal => {
            // Ry(θ) = Rz(π/2)·Rx(θ)·Rz(-π/2).
            rz(&mut out, lambda - FRAC_PI_2);
            out.push((GateKind::Rx, vec![theta]));
            rz(&mut out, phi + FRAC_PI_2);
        }
        VendorFamily::IonAllPairsRxx => {
            rz(&mut out, lambda);
            out.push((GateKind::Ry, vec![theta]));
            rz(&mut out, phi);
        }
        VendorFamily::IonAllPairsZz => {
            // Rz(φ)·Ry(θ)·Rz(λ) = U1q(θ, φ+π/2)·Rz(φ+λ).
            rz(&mut out, phi + lambda);
            out.push((GateKind::U1q2p, vec![theta, wrap_angle(phi + FRAC_PI_2)]));
        }
    }
    out
}

pub fn to_ops(seq: Vec<(GateKind, Vec<f64>)>, qubit: usize) -> impl Iterator<Item = Operation> {
    seq.into_iter()
        .map(move |(g, p)| Operation::one(g, p, qubit))
}
