//! Gate definitions and the native gatesets of the supported device families.
//!
//! Two-qubit matrices are written in the basis `|q0 q1⟩` with the first listed
//! qubit as the most significant bit, so `CX` on `(0, 1)` uses qubit 0 as control.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{c, cis, Mat2, Mat4, UnitaryMatrix, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Xy,
    Rxx,
    Cphase,
    Cz,
    Cx,
    Ecr,
    Zz,
    Rz,
    Ry,
    Rx,
    U1q2p,
    U3,
    Sx,
    X,
    H,
    Swap,
    Id,
    /// Idle period. The single parameter is a duration; the action is the identity.
    Delay,
}

impl GateKind {
    pub const ALL: [GateKind; 18] = [
        GateKind::Xy,
        GateKind::Rxx,
        GateKind::Cphase,
        GateKind::Cz,
        GateKind::Cx,
        GateKind::Ecr,
        GateKind::Zz,
        GateKind::Rz,
        GateKind::Ry,
        GateKind::Rx,
        GateKind::U1q2p,
        GateKind::U3,
        GateKind::Sx,
        GateKind::X,
        GateKind::H,
        GateKind::Swap,
        GateKind::Id,
        GateKind::Delay,
    ];

    pub fn arity(self) -> usize {
        use GateKind::*;
        match self {
            Xy | Rxx | Cphase | Cz | Cx | Ecr | Zz | Swap => 2,
            Rz | Ry | Rx | U1q2p | U3 | Sx | X | H | Id | Delay => 1,
        }
    }

    pub fn param_count(self) -> usize {
        use GateKind::*;
        match self {
            Xy | Rxx | Cphase | Rz | Ry | Rx | Delay => 1,
            U1q2p => 2,
            U3 => 3,
            Cz | Cx | Ecr | Zz | Swap | Sx | X | H | Id => 0,
        }
    }

    /// Lowercase mnemonic used in the circuit text format.
    pub fn mnemonic(self) -> &'static str {
        use GateKind::*;
        match self {
            Xy => "xy",
            Rxx => "rxx",
            Cphase => "cphase",
            Cz => "cz",
            Cx => "cx",
            Ecr => "ecr",
            Zz => "zz",
            Rz => "rz",
            Ry => "ry",
            Rx => "rx",
            U1q2p => "u1q",
            U3 => "u3",
            Sx => "sx",
            X => "x",
            H => "h",
            Swap => "swap",
            Id => "id",
            Delay => "delay",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<GateKind> {
        GateKind::ALL.iter().copied().find(|g| g.mnemonic() == s)
    }

    /// Gates with no physical action that are left out of depth and 1-qubit counts.
    pub fn is_timing_only(self) -> bool {
        self == GateKind::Delay
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

pub fn rz(lambda: f64) -> Mat2 {
    Mat2::new(cis(-lambda / 2.0), ZERO, ZERO, cis(lambda / 2.0))
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

pub fn u1q2p(theta: f64, phi: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(
        c(co, 0.0),
        -I * cis(-phi) * s,
        -I * cis(phi) * s,
        c(co, 0.0),
    )
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(
        c(co, 0.0),
        -cis(lambda) * s,
        cis(phi) * s,
        cis(phi + lambda) * co,
    )
}

pub fn sx() -> Mat2 {
    Mat2::new(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5))
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> Mat2 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    Mat2::new(h, h, h, -h)
}

pub fn xy(theta: f64) -> Mat4 {
    let (s, co) = (theta / 2.0).sin_cos();
    let mut m = Mat4::identity();
    m[(1, 1)] = c(co, 0.0);
    m[(1, 2)] = c(0.0, s);
    m[(2, 1)] = c(0.0, s);
    m[(2, 2)] = c(co, 0.0);
    m
}

pub fn rxx(theta: f64) -> Mat4 {
    let (s, co) = (theta / 2.0).sin_cos();
    let mut m = Mat4::zeros();
    for k in 0..4 {
        m[(k, k)] = c(co, 0.0);
        m[(k, 3 - k)] = c(0.0, -s);
    }
    m
}

pub fn cphase(phi: f64) -> Mat4 {
    let mut m = Mat4::identity();
    m[(3, 3)] = cis(phi);
    m
}

pub fn cz() -> Mat4 {
    cphase(std::f64::consts::PI)
}

pub fn cx() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn swap() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// Echoed cross-resonance gate, normalized by 1/√2 so that it is unitary.
pub fn ecr() -> Mat4 {
    let r = Mat4::new(
        ZERO, ZERO, ONE, I, //
        ZERO, ZERO, I, ONE, //
        ONE, -I, ZERO, ZERO, //
        -I, ONE, ZERO, ZERO,
    );
    r * c(FRAC_1_SQRT_2, 0.0)
}

pub fn zz() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, I, I, ONE))
}

fn check_params(kind: GateKind, params: &[f64]) -> Result<()> {
    if params.len() != kind.param_count() {
        return Err(Error::ParameterArity {
            gate: kind,
            expected: kind.param_count(),
            got: params.len(),
        });
    }
    Ok(())
}

/// 2×2 matrix of a single-qubit gate.
pub fn matrix1(kind: GateKind, params: &[f64]) -> Result<Mat2> {
    check_params(kind, params)?;
    use GateKind::*;
    Ok(match kind {
        Rz => rz(params[0]),
        Ry => ry(params[0]),
        Rx => rx(params[0]),
        U1q2p => u1q2p(params[0], params[1]),
        U3 => u3(params[0], params[1], params[2]),
        Sx => sx(),
        X => pauli_x(),
        H => hadamard(),
        Id | Delay => Mat2::identity(),
        _ => {
            return Err(Error::InvalidCircuit(format!(
                "{kind} is not a single-qubit gate"
            )))
        }
    })
}

/// 4×4 matrix of a two-qubit gate.
pub fn matrix2(kind: GateKind, params: &[f64]) -> Result<Mat4> {
    check_params(kind, params)?;
    use GateKind::*;
    Ok(match kind {
        Xy => xy(params[0]),
        Rxx => rxx(params[0]),
        Cphase => cphase(params[0]),
        Cz => cz(),
        Cx => cx(),
        Ecr => ecr(),
        Zz => zz(),
        Swap => swap(),
        _ => {
            return Err(Error::InvalidCircuit(format!(
                "{kind} is not a two-qubit gate"
            )))
        }
    })
}

/// Matrix of `kind` with the given angles, as a dense 2×2 or 4×4 unitary.
pub fn matrix_of(kind: GateKind, params: &[f64]) -> Result<UnitaryMatrix> {
    if kind.arity() == 1 {
        matrix1(kind, params).map(|m| crate::math::to_dynamic(&m))
    } else {
        matrix2(kind, params).map(|m| crate::math::to_dynamic(&m))
    }
}

/// Device families, each with a closed native gateset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VendorFamily {
    #[serde(rename = "superconducting-heavyhex")]
    SuperconductingHeavyHex,
    #[serde(rename = "octagonal")]
    Octagonal,
    #[serde(rename = "ion-allpairs-rxx")]
    IonAllPairsRxx,
    #[serde(rename = "ion-allpairs-zz")]
    IonAllPairsZz,
    #[serde(rename = "ring-ecr")]
    RingEcr,
    /// The raw U3 + CX form that uncompiled model circuits are written in.
    #[serde(rename = "u3-cx")]
    U3Cx,
}

impl VendorFamily {
    pub const ALL: [VendorFamily; 6] = [
        VendorFamily::SuperconductingHeavyHex,
        VendorFamily::Octagonal,
        VendorFamily::IonAllPairsRxx,
        VendorFamily::IonAllPairsZz,
        VendorFamily::RingEcr,
        VendorFamily::U3Cx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VendorFamily::SuperconductingHeavyHex => "superconducting-heavyhex",
            VendorFamily::Octagonal => "octagonal",
            VendorFamily::IonAllPairsRxx => "ion-allpairs-rxx",
            VendorFamily::IonAllPairsZz => "ion-allpairs-zz",
            VendorFamily::RingEcr => "ring-ecr",
            VendorFamily::U3Cx => "u3-cx",
        }
    }

    /// The two-qubit gate the compiler emits for this family.
    pub fn entangler(self) -> GateKind {
        match self {
            VendorFamily::SuperconductingHeavyHex | VendorFamily::U3Cx => GateKind::Cx,
            VendorFamily::Octagonal => GateKind::Cz,
            VendorFamily::IonAllPairsRxx => GateKind::Rxx,
            VendorFamily::IonAllPairsZz => GateKind::Zz,
            VendorFamily::RingEcr => GateKind::Ecr,
        }
    }

    /// Gates accepted on input in addition to the native set.
    pub fn accepted_extras(self) -> &'static [GateKind] {
        match self {
            VendorFamily::Octagonal => &[GateKind::Xy, GateKind::Cphase],
            _ => &[],
        }
    }
}

impl fmt::Display for VendorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VendorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VendorFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownTarget(s.to_string()))
    }
}

/// Native gateset of a device family given by name.
pub fn native_gateset(family: &str) -> Result<BTreeSet<GateKind>> {
    Ok(family.parse::<VendorFamily>()?.native_gates())
}

impl VendorFamily {
    pub fn native_gates(self) -> BTreeSet<GateKind> {
        use GateKind::*;
        let gates: &[GateKind] = match self {
            VendorFamily::SuperconductingHeavyHex => &[Rz, Sx, X, Cx],
            VendorFamily::Octagonal => &[Cz, Rz, Rx],
            VendorFamily::IonAllPairsRxx => &[Rxx, Rx, Ry, Rz],
            VendorFamily::IonAllPairsZz => &[Zz, U1q2p, Rz],
            VendorFamily::RingEcr => &[Ecr, Rz, Sx, X],
            VendorFamily::U3Cx => &[U3, Cx],
        };
        gates.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{equal_up_to_phase, is_unitary, to_dynamic};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_params(kind: GateKind, rng: &mut impl Rng) -> Vec<f64> {
        (0..kind.param_count())
            .map(|_| rng.random_range(-2.0 * PI..2.0 * PI))
            .collect()
    }

    #[test]
    fn arity_and_param_counts() {
        use GateKind::*;
        for g in [Xy, Rxx, Cphase, Cz, Cx, Ecr, Zz, Swap] {
            assert_eq!(g.arity(), 2, "{g}");
        }
        for g in [Rz, Ry, Rx, U1q2p, U3, Sx, X, H, Id, Delay] {
            assert_eq!(g.arity(), 1, "{g}");
        }
        assert_eq!(Xy.param_count(), 1);
        assert_eq!(Cphase.param_count(), 1);
        assert_eq!(U3.param_count(), 3);
        assert_eq!(Cz.param_count(), 0);
        assert_eq!(U1q2p.param_count(), 2);
    }

    #[test]
    fn every_matrix_is_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for kind in GateKind::ALL {
            for _ in 0..50 {
                let p = random_params(kind, &mut rng);
                let m = matrix_of(kind, &p).unwrap();
                assert_eq!(m.nrows(), 1 << kind.arity());
                assert!(is_unitary(&m, 1e-12), "{kind} {p:?}");
            }
        }
    }

    #[test]
    fn wrong_param_count_is_rejected() {
        let err = matrix_of(GateKind::Rz, &[0.1, 0.2]).unwrap_err();
        assert!(matches!(err, Error::ParameterArity { expected: 1, got: 2, .. }));
        assert!(matrix_of(GateKind::Cz, &[1.0]).is_err());
    }

    #[test]
    fn reference_matrices() {
        let id2 = Mat2::identity();
        assert!((rz(0.0) - id2).norm() < 1e-15);
        let cz = matrix2(GateKind::Cz, &[]).unwrap();
        let expect = Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE, -ONE));
        assert!((cz - expect).norm() < 1e-15);
        let iswap = matrix2(GateKind::Xy, &[PI]).unwrap();
        let mut expect = Mat4::zeros();
        expect[(0, 0)] = ONE;
        expect[(1, 2)] = I;
        expect[(2, 1)] = I;
        expect[(3, 3)] = ONE;
        assert!((iswap - expect).norm() < 1e-15);
        let zz = matrix2(GateKind::Zz, &[]).unwrap();
        assert!((zz[(1, 1)] - I).norm() < 1e-15 && (zz[(3, 3)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn inverse_rotations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(-10.0..10.0);
            assert!((rx(t) * rx(-t) - Mat2::identity()).norm() < 1e-12);
            assert!((rz(t) * rz(-t) - Mat2::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn algebraic_identities() {
        assert!(equal_up_to_phase(&(sx() * sx()), &pauli_x(), 1e-14));
        assert!((hadamard() * hadamard() - Mat2::identity()).norm() < 1e-15);
        assert!((u3(0.0, 0.0, 0.0) - Mat2::identity()).norm() < 1e-15);
        assert!((rxx(0.0) - Mat4::identity()).norm() < 1e-15);
        assert!((xy(0.0) - Mat4::identity()).norm() < 1e-15);
        assert!((cphase(0.0) - Mat4::identity()).norm() < 1e-15);
        let d = matrix_of(GateKind::Delay, &[120.0]).unwrap();
        assert!((d - to_dynamic(&Mat2::identity())).norm() < 1e-15);
    }

    #[test]
    fn u3_is_zyz_up_to_phase() {
        let (t, p, l) = (0.3, -1.2, 2.5);
        assert!(equal_up_to_phase(&u3(t, p, l), &(rz(p) * ry(t) * rz(l)), 1e-14));
    }

    #[test]
    fn native_sets() {
        use GateKind::*;
        let set = |g: &[GateKind]| g.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(native_gateset("octagonal").unwrap(), set(&[Cz, Rz, Rx]));
        assert_eq!(native_gateset("ring-ecr").unwrap(), set(&[Ecr, Rz, Sx, X]));
        assert_eq!(
            native_gateset("superconducting-heavyhex").unwrap(),
            set(&[Rz, Sx, X, Cx])
        );
        assert!(matches!(
            native_gateset("trapped-photons"),
            Err(Error::UnknownTarget(_))
        ));
        for f in VendorFamily::ALL {
            assert!(f.native_gates().contains(&f.entangler()));
        }
    }
}
