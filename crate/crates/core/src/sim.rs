//! Ideal output distributions, heavy-output sets and noisy shot sampling.
//!
//! Bitstrings put qubit 0 leftmost, matching the statevector index order.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_op, ensure_valid, evolve, Circuit};
use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::rng::{substream, Domain};
use crate::state::StateVector;

/// Largest width the statevector simulator accepts.
pub const STATEVECTOR_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub m: usize,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeavySet {
    pub m: usize,
    pub p_median: f64,
    mask: Vec<bool>,
}

impl HeavySet {
    pub fn contains(&self, index: usize) -> bool {
        self.mask.get(index).copied().unwrap_or(false)
    }

    pub fn contains_bitstring(&self, bits: &str) -> bool {
        bits.len() == self.m
            && usize::from_str_radix(bits, 2).is_ok_and(|i| self.contains(i))
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn bitstrings(&self) -> BTreeSet<String> {
        self.members().map(|i| bitstring(i, self.m)).collect()
    }
}

/// Per-gate and readout fidelities; `1 - f` is used directly as the error probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub f2: f64,
    pub f1: f64,
    pub f_spam: f64,
}

impl NoiseModel {
    pub const IDEAL: NoiseModel = NoiseModel {
        f2: 1.0,
        f1: 1.0,
        f_spam: 1.0,
    };

    pub fn new(f2: f64, f1: f64, f_spam: f64) -> Result<Self> {
        let n = NoiseModel { f2, f1, f_spam };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad: Vec<&str> = [("f2", self.f2), ("f1", self.f1), ("f_spam", self.f_spam)]
            .iter()
            .filter(|(_, v)| !(0.0..=1.0).contains(v))
            .map(|(k, _)| *k)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Profile(format!(
                "fidelities outside [0, 1]: {}",
                bad.join(", ")
            )))
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.f2 == 1.0 && self.f1 == 1.0 && self.f_spam == 1.0
    }

    fn gate_error(&self, gate: GateKind) -> f64 {
        match gate {
            GateKind::Id | GateKind::Delay => 0.0,
            g if g.arity() == 2 => 1.0 - self.f2,
            _ => 1.0 - self.f1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl Counts {
    pub fn from_outcomes(outcomes: &[usize], m: usize) -> Self {
        let mut counts = BTreeMap::new();
        for &o in outcomes {
            *counts.entry(bitstring(o, m)).or_insert(0) += 1;
        }
        Counts {
            counts,
            shots: outcomes.len() as u64,
        }
    }
}

/// On-disk counts record for one circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub circuit_index: u64,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountsRecord {
    pub fn new(circuit_index: u64, counts: &Counts) -> Self {
        CountsRecord {
            circuit_index,
            shots: counts.shots,
            counts: counts.counts.clone(),
        }
    }
}

pub fn bitstring(index: usize, m: usize) -> String {
    format!("{index:0m$b}")
}

fn check_width(c: &Circuit) -> Result<()> {
    if c.width > STATEVECTOR_LIMIT {
        return Err(Error::Capacity {
            what: "the statevector simulator",
            width: c.width,
            limit: STATEVECTOR_LIMIT,
        });
    }
    ensure_valid(c)
}

pub fn final_state(c: &Circuit) -> Result<StateVector> {
    check_width(c)?;
    let mut s = StateVector::zero(c.width);
    evolve(c, &mut s)?;
    Ok(s)
}

pub fn ideal_distribution(c: &Circuit) -> Result<Distribution> {
    Ok(Distribution {
        m: c.width,
        probs: final_state(c)?.probabilities(),
    })
}

/// Strictly-above-median outcomes; the median of an even-length list is the
/// midpoint of its two central values.
pub fn heavy_set(dist: &Distribution) -> HeavySet {
    let mut sorted = dist.probs.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let p_median = if n == 0 {
        0.0
    } else if n & 1 == 0 {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    } else {
        sorted[n / 2]
    };
    HeavySet {
        m: dist.m,
        p_median,
        mask: dist.probs.iter().map(|&p| p > p_median).collect(),
    }
}

/// Total ideal probability mass of the heavy set.
pub fn ideal_hop(dist: &Distribution, hs: &HeavySet) -> f64 {
    hs.members().map(|i| dist.probs[i]).sum()
}

/// Identifies the random streams used to sample one circuit's shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotKey {
    pub base_seed: u64,
    pub circuit_index: u64,
}

fn sample_index(cdf: &[f64], r: f64) -> usize {
    let total = *cdf.last().unwrap_or(&1.0);
    let i = cdf.partition_point(|&x| x <= r * total);
    i.min(cdf.len() - 1)
}

fn random_pauli(state: &mut StateVector, qubit: usize, which: u8) {
    match which {
        1 => state.apply_x(qubit),
        2 => state.apply_y(qubit),
        3 => state.apply_z(qubit),
        _ => {}
    }
}

/// Samples `shots` measurement outcomes (basis indices over all `c.width` qubits).
///
/// Each shot draws its own trajectory: after every gate, with probability
/// `1 - f` for the gate's arity a uniformly random non-identity Pauli hits the
/// gate's qubits; finally every bit flips independently with probability
/// `1 - f_spam`. Shots without gate errors are drawn from the ideal
/// distribution, which is exact and skips the re-simulation.
pub fn sample_outcomes(
    c: &Circuit,
    shots: u64,
    noise: &NoiseModel,
    key: ShotKey,
) -> Result<Vec<usize>> {
    check_width(c)?;
    noise.validate()?;
    if shots == 0 {
        return Ok(Vec::new());
    }
    let ideal = final_state(c)?.probabilities();
    let mut cdf = ideal;
    let mut acc = 0.0;
    for p in cdf.iter_mut() {
        acc += *p;
        *p = acc;
    }
    let error_probs: Vec<f64> = c.ops.iter().map(|op| noise.gate_error(op.gate)).collect();
    let any_gate_noise = error_probs.iter().any(|&p| p > 0.0);
    let flip = 1.0 - noise.f_spam;

    let mut out = Vec::with_capacity(shots as usize);
    let mut faults: Vec<(usize, u8)> = Vec::new();
    for shot in 0..shots {
        let mut rng = substream(key.base_seed, Domain::Shots, key.circuit_index, shot);
        faults.clear();
        if any_gate_noise {
            for (i, &p) in error_probs.iter().enumerate() {
                if p > 0.0 && rng.random::<f64>() < p {
                    let choices = if c.ops[i].qubits.len() == 2 { 15 } else { 3 };
                    faults.push((i, rng.random_range(1..=choices) as u8));
                }
            }
        }
        let mut outcome = if faults.is_empty() {
            sample_index(&cdf, rng.random::<f64>())
        } else {
            let mut s = StateVector::zero(c.width);
            let mut next = 0;
            for (i, op) in c.ops.iter().enumerate() {
                apply_op(op, &mut s)?;
                while next < faults.len() && faults[next].0 == i {
                    let which = faults[next].1;
                    if op.qubits.len() == 2 {
                        random_pauli(&mut s, op.qubits[0], which / 4);
                        random_pauli(&mut s, op.qubits[1], which % 4);
                    } else {
                        random_pauli(&mut s, op.qubits[0], which);
                    }
                    next += 1;
                }
            }
            let mut cum = s.probabilities();
            let mut acc = 0.0;
            for p in cum.iter_mut() {
                acc += *p;
                *p = acc;
            }
            sample_index(&cum, rng.random::<f64>())
        };
        if flip > 0.0 {
            for q in 0..c.width {
                if rng.random::<f64>() < flip {
                    outcome ^= 1 << (c.width - 1 - q);
                }
            }
        }
        out.push(outcome);
    }
    Ok(out)
}

pub fn sample_counts(c: &Circuit, shots: u64, noise: &NoiseModel, key: ShotKey) -> Result<Counts> {
    let outcomes = sample_outcomes(c, shots, noise, key)?;
    Ok(Counts::from_outcomes(&outcomes, c.width))
}
