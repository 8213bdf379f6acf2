//! Circuit intermediate representation.

mod text;

pub use text::{parse, parse_with_warnings, serialize};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, GateKind};
use crate::math::UnitaryMatrix;
use crate::state::StateVector;

/// Largest width accepted by [`unitary_of`].
pub const DENSE_UNITARY_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub gate: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

impl Operation {
    pub fn new(gate: GateKind, params: impl Into<Vec<f64>>, qubits: impl Into<Vec<usize>>) -> Self {
        Operation {
            gate,
            params: params.into(),
            qubits: qubits.into(),
        }
    }

    pub fn one(gate: GateKind, params: impl Into<Vec<f64>>, q: usize) -> Self {
        Self::new(gate, params, vec![q])
    }

    pub fn two(gate: GateKind, params: impl Into<Vec<f64>>, q0: usize, q1: usize) -> Self {
        Self::new(gate, params, vec![q0, q1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitSource {
    #[default]
    Generated,
    Compiled,
    External,
}

impl CircuitSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CircuitSource::Generated => "generated",
            CircuitSource::Compiled => "compiled",
            CircuitSource::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub seed: Option<u64>,
    pub circuit_index: Option<u64>,
    /// Start index (into `ops`) of each layer; the first entry is always 0.
    pub layer_boundaries: Option<Vec<usize>>,
    pub source: CircuitSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub width: usize,
    pub ops: Vec<Operation>,
    pub measured: Vec<bool>,
    pub meta: CircuitMeta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    QubitOutOfRange { op: usize, qubit: usize },
    DuplicateQubit { op: usize, qubit: usize },
    GateArity { op: usize, expected: usize, got: usize },
    ParamArity { op: usize, expected: usize, got: usize },
    MeasuredLength { expected: usize, got: usize },
    BadLayerBoundaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCensus {
    pub two_qubit_count: usize,
    pub one_qubit_count: usize,
    pub depth: usize,
}

impl Circuit {
    /// Empty circuit with no measurements.
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            ops: Vec::new(),
            measured: vec![false; width],
            meta: CircuitMeta::default(),
        }
    }

    pub fn push(&mut self, op: Operation) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.measured = vec![true; self.width];
        self
    }

    pub fn layer_count(&self) -> Option<usize> {
        self.meta.layer_boundaries.as_ref().map(Vec::len)
    }

    /// Op index ranges of each layer, when boundaries are recorded.
    pub fn layers(&self) -> Option<Vec<std::ops::Range<usize>>> {
        let starts = self.meta.layer_boundaries.as_ref()?;
        Some(
            starts
                .iter()
                .enumerate()
                .map(|(i, &s)| s..starts.get(i + 1).copied().unwrap_or(self.ops.len()))
                .collect(),
        )
    }
}

/// Reports every structural problem in `c`.
pub fn validate(c: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    if c.measured.len() != c.width {
        out.push(Violation::MeasuredLength {
            expected: c.width,
            got: c.measured.len(),
        });
    }
    for (i, op) in c.ops.iter().enumerate() {
        if op.qubits.len() != op.gate.arity() {
            out.push(Violation::GateArity {
                op: i,
                expected: op.gate.arity(),
                got: op.qubits.len(),
            });
        }
        if op.params.len() != op.gate.param_count() {
            out.push(Violation::ParamArity {
                op: i,
                expected: op.gate.param_count(),
                got: op.params.len(),
            });
        }
        for (k, &q) in op.qubits.iter().enumerate() {
            if q >= c.width {
                out.push(Violation::QubitOutOfRange { op: i, qubit: q });
            }
            if op.qubits[..k].contains(&q) {
                out.push(Violation::DuplicateQubit { op: i, qubit: q });
            }
        }
    }
    if let Some(starts) = &c.meta.layer_boundaries {
        let ordered = starts.windows(2).all(|w| w[0] <= w[1]);
        let anchored = starts.first().is_none_or(|&s| s == 0);
        let bounded = starts.last().is_none_or(|&s| s <= c.ops.len());
        if !(ordered && anchored && bounded) {
            out.push(Violation::BadLayerBoundaries);
        }
    }
    out
}

pub(crate) fn ensure_valid(c: &Circuit) -> Result<()> {
    let v = validate(c);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidCircuit(format!("{v:?}")))
    }
}

/// Applies every gate of `c` to `state`.
pub(crate) fn evolve(c: &Circuit, state: &mut StateVector) -> Result<()> {
    for op in &c.ops {
        apply_op(op, state)?;
    }
    Ok(())
}

pub(crate) fn apply_op(op: &Operation, state: &mut StateVector) -> Result<()> {
    match op.gate.arity() {
        1 => {
            if matches!(op.gate, GateKind::Id | GateKind::Delay) {
                return Ok(());
            }
            let m = gates::matrix1(op.gate, &op.params)?;
            state.apply_1q(op.qubits[0], &m);
        }
        _ => {
            let m = gates::matrix2(op.gate, &op.params)?;
            state.apply_2q(op.qubits[0], op.qubits[1], &m);
        }
    }
    Ok(())
}

/// Dense unitary of the whole circuit; measurements are ignored.
pub fn unitary_of(c: &Circuit) -> Result<UnitaryMatrix> {
    if c.width > DENSE_UNITARY_LIMIT {
        return Err(Error::Capacity {
            what: "the dense unitary",
            width: c.width,
            limit: DENSE_UNITARY_LIMIT,
        });
    }
    ensure_valid(c)?;
    let dim = 1usize << c.width;
    let mut u = UnitaryMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(c.width, col);
        evolve(c, &mut s)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// Gate counts by arity and the circuit depth.
///
/// Delays are skipped entirely; measurements are not operations and never count.
pub fn gate_census(c: &Circuit) -> GateCensus {
    let mut census = GateCensus::default();
    let mut level = vec![0usize; c.width];
    for op in &c.ops {
        if op.gate.is_timing_only() {
            continue;
        }
        match op.gate.arity() {
            1 => census.one_qubit_count += 1,
            _ => census.two_qubit_count += 1,
        }
        let next = op.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &op.qubits {
            level[q] = next;
        }
        census.depth = census.depth.max(next);
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{kron2, to_dynamic};
    use GateKind::*;

    #[test]
    fn validate_reports_violations() {
        assert!(validate(&Circuit::new(3)).is_empty());
        let mut c = Circuit::new(2);
        c.push(Operation::two(Cx, vec![], 0, 0));
        assert!(validate(&c).contains(&Violation::DuplicateQubit { op: 0, qubit: 0 }));
        let mut c = Circuit::new(2);
        c.push(Operation::one(Rz, vec![0.1, 0.2], 1));
        assert!(validate(&c).contains(&Violation::ParamArity {
            op: 0,
            expected: 1,
            got: 2
        }));
        let mut c = Circuit::new(2);
        c.push(Operation::one(X, vec![], 2));
        assert!(validate(&c).contains(&Violation::QubitOutOfRange { op: 0, qubit: 2 }));
    }

    #[test]
    fn unitary_examples() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.push(Operation::one(Id, vec![], q));
        }
        let u = unitary_of(&c).unwrap();
        assert!((u - UnitaryMatrix::identity(8, 8)).norm() < 1e-15);

        let mut c = Circuit::new(2);
        c.push(Operation::two(Cx, vec![], 0, 1));
        assert!((unitary_of(&c).unwrap() - to_dynamic(&gates::cx())).norm() < 1e-15);

        let mut c = Circuit::new(2);
        c.push(Operation::two(Swap, vec![], 0, 1));
        c.push(Operation::two(Swap, vec![], 0, 1));
        assert!((unitary_of(&c).unwrap() - UnitaryMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn unitary_respects_application_order() {
        let mut c = Circuit::new(2);
        c.push(Operation::one(H, vec![], 0));
        c.push(Operation::two(Cx, vec![], 0, 1));
        let expect = gates::cx() * kron2(&gates::hadamard(), &nalgebra::Matrix2::identity());
        assert!((unitary_of(&c).unwrap() - to_dynamic(&expect)).norm() < 1e-15);
    }

    #[test]
    fn unitary_capacity_error() {
        let c = Circuit::new(DENSE_UNITARY_LIMIT + 1);
        assert!(matches!(unitary_of(&c), Err(Error::Capacity { .. })));
    }

    #[test]
    fn census_examples() {
        assert_eq!(gate_census(&Circuit::new(3)), GateCensus::default());
        let mut c = Circuit::new(3);
        c.push(Operation::two(Cx, vec![], 0, 1));
        c.push(Operation::two(Cx, vec![], 1, 2));
        assert_eq!(
            gate_census(&c),
            GateCensus {
                two_qubit_count: 2,
                one_qubit_count: 0,
                depth: 2
            }
        );
        let mut c = Circuit::new(2);
        c.push(Operation::one(Rz, vec![0.1], 0));
        c.push(Operation::one(Rz, vec![0.2], 1));
        c.push(Operation::one(Delay, vec![64.0], 1));
        c.measure_all();
        assert_eq!(
            gate_census(&c),
            GateCensus {
                two_qubit_count: 0,
                one_qubit_count: 2,
                depth: 1
            }
        );
    }

    #[test]
    fn layers_partition_ops() {
        let mut c = Circuit::new(2);
        for _ in 0..5 {
            c.push(Operation::one(X, vec![], 0));
        }
        c.meta.layer_boundaries = Some(vec![0, 2, 4]);
        assert_eq!(c.layers().unwrap(), vec![0..2, 2..4, 4..5]);
        c.meta.layer_boundaries = Some(vec![1, 3]);
        assert!(validate(&c).contains(&Violation::BadLayerBoundaries));
    }
}
