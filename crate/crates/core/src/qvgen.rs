//! Quantum volume model circuits.
//!
//! A width-`m`, depth-`d` model circuit has `d` layers; each layer draws a
//! uniform permutation of the qubits and applies independent Haar-random
//! SU(4) blocks to consecutive pairs of the permuted order. With odd `m` the
//! last qubit of each permutation idles for that layer.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{serialize, Circuit, CircuitSource, Operation};
use crate::compile::kak::decompose_su4;
use crate::compile::euler::synthesize_1q;
use crate::error::{Error, Result};
use crate::gates::{GateKind, VendorFamily};
use crate::math::{c, Mat4, C64, ZERO};
use crate::rng::{stream, Domain, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QvSpec {
    pub m: usize,
    pub d: usize,
    pub count: usize,
    pub base_seed: u64,
}

impl QvSpec {
    /// Square spec (`d = m`) with the standard 1000-circuit suite size.
    pub fn square(m: usize, base_seed: u64) -> Self {
        QvSpec {
            m,
            d: m,
            count: 1000,
            base_seed,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.d < 1 || self.count < 1 {
            return Err(Error::InvalidCircuit(format!(
                "quantum volume spec needs m ≥ 2, d ≥ 1, count ≥ 1 (got m={}, d={}, count={})",
                self.m, self.d, self.count
            )));
        }
        Ok(())
    }
}

/// Haar-random SU(4): QR of a complex Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`, then rescaled to unit determinant.
pub fn sample_haar_su4(rng: &mut RngStream) -> Mat4 {
    let mut z = Mat4::from_fn(|_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    // Modified Gram–Schmidt produces a positive real diagonal of R directly,
    // which is the phase-corrected (Haar) choice of Q.
    for j in 0..4 {
        for k in 0..j {
            let mut proj = ZERO;
            for r in 0..4 {
                proj += z[(r, k)].conj() * z[(r, j)];
            }
            for r in 0..4 {
                let zk = z[(r, k)];
                z[(r, j)] -= proj * zk;
            }
        }
        let norm = (0..4).map(|r| z[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..4 {
            z[(r, j)] /= norm;
        }
    }
    let det: C64 = z.determinant();
    z / det.powf(0.25)
}

/// Fisher–Yates shuffle of `0..m`.
pub fn sample_permutation(rng: &mut RngStream, m: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// One sampled layer: the permutation and the SU(4) block on each pair.
#[derive(Debug, Clone)]
pub struct SampledLayer {
    pub permutation: Vec<usize>,
    pub blocks: Vec<((usize, usize), Mat4)>,
}

/// Draws the layer structure of circuit `index` without building gates.
pub fn sample_layers(spec: &QvSpec, index: u64) -> Vec<SampledLayer> {
    let mut rng = stream(spec.base_seed, Domain::Circuit, index);
    (0..spec.d)
        .map(|_| {
            let permutation = sample_permutation(&mut rng, spec.m);
            let blocks = (0..spec.m / 2)
                .map(|i| {
                    let u = sample_haar_su4(&mut rng);
                    ((permutation[2 * i], permutation[2 * i + 1]), u)
                })
                .collect();
            SampledLayer {
                permutation,
                blocks,
            }
        })
        .collect()
}

/// Raw U3/CX ops for one SU(4) block on `(a, b)`: 3 CX and 8 U3.
pub(crate) fn raw_block_ops(u: &Mat4, a: usize, b: usize) -> Vec<Operation> {
    let tpl = decompose_su4(u, GateKind::Cx).expect("Haar samples are unitary");
    let mut ops = Vec::with_capacity(11);
    let push_u3 = |ops: &mut Vec<Operation>, v, q| {
        let seq = synthesize_1q(v, VendorFamily::U3Cx);
        let params = seq
            .into_iter()
            .next()
            .map(|(_, p)| p)
            .unwrap_or_else(|| vec![0.0, 0.0, 0.0]);
        ops.push(Operation::one(GateKind::U3, params, q));
    };
    for k in 0..4 {
        push_u3(&mut ops, &tpl.locals[k].0, a);
        push_u3(&mut ops, &tpl.locals[k].1, b);
        if k < 3 {
            ops.push(Operation::two(GateKind::Cx, vec![], a, b));
        }
    }
    ops
}

pub fn generate_qv_circuit(spec: &QvSpec, circuit_index: u64) -> Circuit {
    let mut c = Circuit::new(spec.m);
    let mut boundaries = Vec::with_capacity(spec.d);
    for layer in sample_layers(spec, circuit_index) {
        boundaries.push(c.ops.len());
        for ((a, b), u) in &layer.blocks {
            c.ops.extend(raw_block_ops(u, *a, *b));
        }
    }
    c.measure_all();
    c.meta.seed = Some(spec.base_seed);
    c.meta.circuit_index = Some(circuit_index);
    c.meta.layer_boundaries = Some(boundaries);
    c.meta.source = CircuitSource::Generated;
    c
}

/// All `count` circuits, generated in parallel and returned in index order.
pub fn generate_suite(spec: &QvSpec) -> Result<Vec<Circuit>> {
    spec.validate()?;
    Ok((0..spec.count as u64)
        .into_par_iter()
        .map(|i| generate_qv_circuit(spec, i))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub schema: u32,
    pub spec: QvSpec,
    pub files: Vec<ManifestEntry>,
    /// SHA-256 over the concatenated circuit files in index order.
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u64,
    pub file: String,
    pub sha256: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn circuit_file_name(m: usize, index: u64) -> String {
    format!("qv_m{m}_{index:05}.qasm")
}

/// Writes one circuit file per index and a manifest into `dir`.
pub fn write_suite(spec: &QvSpec, dir: &Path) -> Result<SuiteManifest> {
    let circuits = generate_suite(spec)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut whole = Sha256::new();
    let mut files = Vec::with_capacity(circuits.len());
    for (i, c) in circuits.iter().enumerate() {
        let text = serialize(c);
        let name = circuit_file_name(spec.m, i as u64);
        let path = dir.join(&name);
        fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
        whole.update(text.as_bytes());
        files.push(ManifestEntry {
            index: i as u64,
            file: name,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
    }
    let manifest = SuiteManifest {
        schema: 1,
        spec: *spec,
        files,
        checksum: hex::encode(whole.finalize()),
    };
    let path: PathBuf = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gate_census, unitary_of};
    use crate::math::{is_unitary, phase_distance, UnitaryMatrix};
    use crate::state::StateVector;

    #[test]
    fn haar_samples_are_special_unitary() {
        let mut rng = stream(1, Domain::Circuit, 0);
        for _ in 0..1000 {
            let u = sample_haar_su4(&mut rng);
            assert!(is_unitary(&u, 1e-12));
            assert!((u.determinant() - crate::math::ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn haar_sampling_is_deterministic() {
        let a = sample_haar_su4(&mut stream(9, Domain::Circuit, 2));
        let b = sample_haar_su4(&mut stream(9, Domain::Circuit, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn haar_second_moment_of_trace() {
        // For Haar U(N), E|tr U|² = 1 and E|tr U|⁴ = 2 (N ≥ 2), so the sample
        // mean of |tr U|²/16 has standard error 1/(16·√n).
        let n = 10_000;
        let mut rng = stream(2024, Domain::Circuit, 0);
        let mean = (0..n)
            .map(|_| sample_haar_su4(&mut rng).trace().norm_sqr() / 16.0)
            .sum::<f64>()
            / n as f64;
        let se = 1.0 / (16.0 * (n as f64).sqrt());
        assert!((mean - 1.0 / 16.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn permutation_of_two_is_fair() {
        // Chi-square against the two equally likely outcomes, 1 dof, α = 0.001.
        let mut rng = stream(77, Domain::Circuit, 0);
        let n = 10_000;
        let swapped = (0..n)
            .filter(|_| sample_permutation(&mut rng, 2) == vec![1, 0])
            .count() as f64;
        let e = n as f64 / 2.0;
        let chi2 = (swapped - e).powi(2) / e + (n as f64 - swapped - e).powi(2) / e;
        assert!(chi2 < 10.83, "chi2 {chi2}");
    }

    #[test]
    fn permutation_edge_cases() {
        assert_eq!(sample_permutation(&mut stream(1, Domain::Circuit, 0), 1), vec![0]);
        let a = sample_permutation(&mut stream(4, Domain::Circuit, 8), 9);
        let b = sample_permutation(&mut stream(4, Domain::Circuit, 8), 9);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn odd_width_layers_idle_one_qubit() {
        let spec = QvSpec::square(7, 5).with_count(1);
        let c = generate_qv_circuit(&spec, 0);
        let layers = c.layers().unwrap();
        assert_eq!(layers.len(), 7);
        for r in layers {
            let ops = &c.ops[r];
            let cx = ops.iter().filter(|o| o.gate == GateKind::Cx).count();
            assert_eq!(cx, 3 * 3);
            let mut touched: Vec<usize> = ops.iter().flat_map(|o| o.qubits.clone()).collect();
            touched.sort();
            touched.dedup();
            assert_eq!(7 - touched.len(), 7 % 2);
        }
        assert!(c.measured.iter().all(|&m| m));
    }

    #[test]
    fn raw_template_is_u3_and_cx() {
        let c = generate_qv_circuit(&QvSpec::square(4, 2), 3);
        let census = gate_census(&c);
        assert_eq!(census.two_qubit_count, 4 * 2 * 3);
        assert_eq!(census.one_qubit_count, 4 * 2 * 8);
        assert!(c.ops.iter().all(|o| matches!(o.gate, GateKind::U3 | GateKind::Cx)));
    }

    /// Direct product of permutation-free embedded layer blocks.
    fn layer_product(m: usize, layers: &[SampledLayer]) -> UnitaryMatrix {
        let dim = 1 << m;
        let mut u = UnitaryMatrix::identity(dim, dim);
        for layer in layers {
            for ((a, b), block) in &layer.blocks {
                let mut e = UnitaryMatrix::zeros(dim, dim);
                for col in 0..dim {
                    let mut s = StateVector::basis(m, col);
                    s.apply_2q(*a, *b, block);
                    for (row, amp) in s.amplitudes().iter().enumerate() {
                        e[(row, col)] = *amp;
                    }
                }
                u = e * u;
            }
        }
        u
    }

    #[test]
    fn circuit_matches_sampled_layers() {
        for m in 2..=5 {
            let spec = QvSpec::square(m, 31).with_count(4);
            for i in 0..4 {
                let c = generate_qv_circuit(&spec, i);
                let expect = layer_product(m, &sample_layers(&spec, i));
                let got = unitary_of(&c).unwrap();
                assert!(phase_distance(&got, &expect) < 1e-9, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn two_qubit_circuit_is_product_of_blocks() {
        let spec = QvSpec::square(2, 8).with_count(1);
        let layers = sample_layers(&spec, 0);
        assert_eq!(layers.len(), 2);
        let mut expect = Mat4::identity();
        for l in &layers {
            assert_eq!(l.blocks.len(), 1);
            let ((a, b), u) = &l.blocks[0];
            // A block on (1, 0) is the swap-conjugate of the same block on (0, 1).
            let u = if (*a, *b) == (0, 1) {
                *u
            } else {
                crate::gates::swap() * u * crate::gates::swap()
            };
            expect = u * expect;
        }
        let got = unitary_of(&generate_qv_circuit(&spec, 0)).unwrap();
        assert!(phase_distance(&got, &crate::math::to_dynamic(&expect)) < 1e-9);
    }

    #[test]
    fn suites_are_reproducible() {
        let spec = QvSpec::square(3, 99).with_count(1000);
        let a = generate_suite(&spec).unwrap();
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|c| c.width == 3 && c.layer_count() == Some(3)));
        let b = generate_suite(&spec).unwrap();
        assert_eq!(a, b);
        let one = generate_suite(&spec.with_count(1)).unwrap();
        assert_eq!(one[0], generate_qv_circuit(&spec, 0));
        assert!(generate_suite(&spec.with_count(0)).is_err());
    }
}
