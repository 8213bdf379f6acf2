//! Lowering of model circuits onto device gate sets and coupling graphs.

pub mod blocks;
pub mod euler;
pub mod kak;
pub mod route;

pub use blocks::{extract_blocks, Block};
pub use euler::{synthesize_1q, zyz_angles, ZyzAngles};
pub use kak::{canonical_gate, decompose_su4, kak, KakDecomposition, TwoQubitTemplate};
pub use route::{route, LayoutStep, RoutedCircuit, RoutedOp};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_census, Circuit, CircuitSource, GateCensus, Operation};
use crate::error::{Error, Result};
use crate::gates::{self, VendorFamily};
use crate::math::{Mat2, UnitaryMatrix, C64};
use crate::rng::{stream, Domain};
use crate::state::StateVector;
use crate::topology::{connected_subsets, CouplingGraph, DeviceProfile};

pub const DEFAULT_MAX_RETRIES: usize = 16;

#[derive(Debug, Clone)]
pub struct CompileRequest<'a> {
    pub circuit: &'a Circuit,
    pub profile: &'a DeviceProfile,
    /// Ordered physical qubits; logical qubit `i` starts on `qubit_subset[i]`.
    pub qubit_subset: Option<Vec<usize>>,
    pub allow_spill: bool,
    pub seed: u64,
    pub max_retries: usize,
}

impl<'a> CompileRequest<'a> {
    pub fn new(circuit: &'a Circuit, profile: &'a DeviceProfile) -> Self {
        CompileRequest {
            circuit,
            profile,
            qubit_subset: None,
            allow_spill: false,
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn subset(mut self, subset: Vec<usize>) -> Self {
        self.qubit_subset = Some(subset);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn spill(mut self, allow: bool) -> Self {
        self.allow_spill = allow;
        self
    }
}

/// A native-gate circuit over `physical_qubits.len()` wires.
///
/// Wire `w` of `circuit` is device qubit `physical_qubits[w]`. Layouts map
/// logical qubits to device qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub family: VendorFamily,
    pub physical_qubits: Vec<usize>,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub layout_history: Vec<LayoutStep>,
    pub swap_count: usize,
    pub census: GateCensus,
    pub attempts: usize,
}

impl CompiledCircuit {
    fn wire_of(&self, device_qubit: usize) -> usize {
        self.physical_qubits
            .binary_search(&device_qubit)
            .expect("layout qubits are wires")
    }

    /// Wire index holding each logical qubit at the end of the circuit.
    pub fn final_wires(&self) -> Vec<usize> {
        self.final_layout.iter().map(|&p| self.wire_of(p)).collect()
    }

    pub fn initial_wires(&self) -> Vec<usize> {
        self.initial_layout.iter().map(|&p| self.wire_of(p)).collect()
    }

    /// Converts a basis index over the wires into a logical basis index
    /// (logical qubit 0 as the high bit).
    pub fn logical_outcome(&self, wire_outcome: usize) -> usize {
        let w = self.circuit.width;
        let m = self.final_layout.len();
        self.final_wires()
            .iter()
            .enumerate()
            .fold(0, |acc, (l, &wire)| acc | ((wire_outcome >> (w - 1 - wire)) & 1) << (m - 1 - l))
    }

    /// Every two-qubit op on a device edge and every gate native to the family.
    pub fn is_legal(&self, g: &CouplingGraph) -> bool {
        let native = self.family.native_gates();
        self.circuit.ops.iter().all(|op| {
            native.contains(&op.gate)
                && (op.qubits.len() != 2
                    || g.has_edge(self.physical_qubits[op.qubits[0]], self.physical_qubits[op.qubits[1]]))
        })
    }

    /// The logical unitary implemented, with the initial and final layouts
    /// undone; unused wires start and must end in |0⟩.
    pub fn logical_unitary(&self) -> Result<UnitaryMatrix> {
        let m = self.initial_layout.len();
        let w = self.circuit.width;
        if w > crate::sim::STATEVECTOR_LIMIT {
            return Err(Error::Capacity {
                what: "logical_unitary",
                width: w,
                limit: crate::sim::STATEVECTOR_LIMIT,
            });
        }
        let (init, fin) = (self.initial_wires(), self.final_wires());
        let spread = |x: usize, wires: &[usize]| {
            (0..m).fold(0, |acc, l| acc | ((x >> (m - 1 - l)) & 1) << (w - 1 - wires[l]))
        };
        let dim = 1usize << m;
        let mut u = UnitaryMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for col in 0..dim {
            let mut s = StateVector::basis(w, spread(col, &init));
            crate::circuit::evolve(&self.circuit, &mut s)?;
            for row in 0..dim {
                u[(row, col)] = s.amplitudes()[spread(row, &fin)];
            }
        }
        Ok(u)
    }
}

/// Native ops for routed blocks, with adjacent single-qubit gates fused.
struct Lowering {
    family: VendorFamily,
    ops: Vec<Operation>,
    pending: Vec<Option<Mat2>>,
}

impl Lowering {
    fn local(&mut self, wire: usize, u: &Mat2) {
        let p = self.pending[wire].get_or_insert_with(Mat2::identity);
        *p = u * *p;
    }

    fn flush(&mut self, wire: usize) {
        if let Some(u) = self.pending[wire].take() {
            self.ops.extend(euler::to_ops(synthesize_1q(&u, self.family), wire));
        }
    }

    fn template(&mut self, t: &TwoQubitTemplate, a: usize, b: usize) {
        for k in 0..4 {
            self.local(a, &t.locals[k].0);
            self.local(b, &t.locals[k].1);
            if k < 3 {
                self.flush(a);
                self.flush(b);
                let (g, p) = &t.entanglers[k];
                self.ops.push(Operation::two(*g, p.clone(), a, b));
            }
        }
    }
}

fn lower(
    routed: &RoutedCircuit,
    family: VendorFamily,
    width: usize,
    wire: impl Fn(usize) -> usize,
) -> Result<Vec<Operation>> {
    let target = family.entangler();
    let swap = decompose_su4(&gates::swap(), target)?;
    let mut l = Lowering {
        family,
        ops: Vec::new(),
        pending: vec![None; width],
    };
    for op in &routed.ops {
        match op {
            RoutedOp::Pair { nodes: [a, b], u } => {
                let t = decompose_su4(u, target)?;
                l.template(&t, wire(*a), wire(*b));
            }
            RoutedOp::Swap { nodes: [a, b] } => l.template(&swap, wire(*a), wire(*b)),
            RoutedOp::Single { node, u } => l.local(wire(*node), u),
        }
    }
    for w in 0..width {
        l.flush(w);
    }
    Ok(l.ops)
}

/// Lowers a routed circuit, renumbering the device qubits it touches as wires.
fn assemble(
    source: &Circuit,
    routed: RoutedCircuit,
    family: VendorFamily,
    to_device: impl Fn(usize) -> usize,
    attempts: usize,
) -> Result<CompiledCircuit> {
    let mut used: Vec<usize> = routed.initial_layout.clone();
    for op in &routed.ops {
        if let RoutedOp::Swap { nodes } = op {
            used.extend(nodes);
        }
    }
    used.sort_unstable();
    used.dedup();
    let wire_of_node = |n: usize| used.binary_search(&n).expect("used node");
    let ops = lower(&routed, family, used.len(), wire_of_node)?;

    let mut circuit = Circuit::new(used.len());
    circuit.ops = ops;
    for &p in &routed.final_layout {
        circuit.measured[wire_of_node(p)] = true;
    }
    circuit.meta.seed = source.meta.seed;
    circuit.meta.circuit_index = source.meta.circuit_index;
    circuit.meta.source = CircuitSource::Compiled;

    let device = |layout: &[usize]| layout.iter().map(|&n| to_device(n)).collect::<Vec<_>>();
    let history = routed
        .history
        .iter()
        .map(|s| LayoutStep {
            op_index: s.op_index,
            layout: device(&s.layout),
        })
        .collect();
    let census = gate_census(&circuit);
    Ok(CompiledCircuit {
        census,
        family,
        physical_qubits: used.iter().map(|&n| to_device(n)).collect(),
        initial_layout: device(&routed.initial_layout),
        final_layout: device(&routed.final_layout),
        layout_history: history,
        swap_count: routed.swap_count,
        circuit,
        attempts,
    })
}

/// Block extraction, SU(4) decomposition, single-qubit resynthesis and
/// routing onto `req.profile`.
///
/// Without an explicit subset the lexicographically first connected subset
/// of the right size is used. When the first attempt needs more than one
/// SWAP per block layer per qubit (`swap_count > m·d`) the subset order is
/// reshuffled up to `max_retries` times and the attempt with the fewest
/// SWAPs is kept. The shuffles are seeded from `req.seed` and the circuit
/// index, so identical requests give identical output.
pub fn compile_to_device(req: &CompileRequest) -> Result<CompiledCircuit> {
    let c = req.circuit;
    let g = &req.profile.graph;
    let m = c.width;
    if m == 0 || m > g.n_qubits() {
        return Err(Error::Layout(format!(
            "a {m}-qubit circuit does not fit on {} ({} qubits)",
            req.profile.name,
            g.n_qubits()
        )));
    }
    let subset = match &req.qubit_subset {
        Some(s) => s.clone(),
        None => connected_subsets(g, m).into_iter().next().ok_or_else(|| {
            Error::Layout(format!("{} has no connected {m}-qubit subset", req.profile.name))
        })?,
    };
    if subset.len() != m {
        return Err(Error::Layout(format!(
            "subset has {} qubits, circuit has {m}",
            subset.len()
        )));
    }
    if subset.iter().any(|&p| p >= g.n_qubits()) {
        return Err(Error::Layout("subset names a qubit outside the device".into()));
    }
    if !req.allow_spill && !g.is_connected_subset(&subset) {
        return Err(Error::Layout(format!("subset {subset:?} is not connected")));
    }

    let blocks = extract_blocks(c)?;
    let family = req.profile.gateset_family;
    let depth = c.layer_count().unwrap_or(m);
    let threshold = m * depth;

    // Without spill, route on the induced subgraph with nodes in ascending device order.
    let mut sorted = subset.clone();
    sorted.sort_unstable();
    let local_graph;
    let (graph, to_node): (&CouplingGraph, Box<dyn Fn(usize) -> usize>) = if req.allow_spill {
        (g, Box::new(|p| p))
    } else {
        local_graph = g.induced(&sorted);
        let s = sorted.clone();
        (&local_graph, Box::new(move |p| s.binary_search(&p).expect("subset member")))
    };
    let to_device = |n: usize| if req.allow_spill { n } else { sorted[n] };

    let attempt = |order: &[usize]| {
        let layout: Vec<usize> = order.iter().map(|&p| to_node(p)).collect();
        route::route_blocks(m, blocks.clone(), graph, &layout)
    };
    let mut best = attempt(&subset)?;
    let mut attempts = 1;
    if best.swap_count > threshold && req.max_retries > 0 {
        let mut rng = stream(req.seed, Domain::Layout, c.meta.circuit_index.unwrap_or(0));
        let mut order = subset.clone();
        for _ in 0..req.max_retries {
            order.shuffle(&mut rng);
            let r = attempt(&order)?;
            attempts += 1;
            if r.swap_count < best.swap_count {
                best = r;
            }
            if best.swap_count <= threshold {
                break;
            }
        }
    }
    assemble(c, best, family, to_device, attempts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateKind;
    use crate::math::{is_unitary, phase_distance};
    use crate::qvgen::{generate_qv_circuit, QvSpec};
    use crate::sim::NoiseModel;
    use crate::circuit::unitary_of;
    use crate::topology::builtin_profile;

    fn profile(g: CouplingGraph, f: VendorFamily) -> DeviceProfile {
        DeviceProfile::new("test", g, f, NoiseModel::IDEAL)
    }

    fn check(c: &Circuit, cc: &CompiledCircuit, p: &DeviceProfile) {
        assert!(cc.is_legal(&p.graph), "illegal output on {}", p.name);
        let u = cc.logical_unitary().unwrap();
        assert!(is_unitary(&u, 1e-9));
        let d = phase_distance(&u, &unitary_of(c).unwrap());
        assert!(d < 1e-9, "{}: {d:e}", cc.family);
    }

    #[test]
    fn t_graph_three_qubits() {
        let p = builtin_profile("lima-like").unwrap();
        let c = generate_qv_circuit(&QvSpec::square(3, 10), 0);
        let cc = compile_to_device(&CompileRequest::new(&c, &p).subset(vec![0, 1, 2])).unwrap();
        check(&c, &cc, &p);
        assert_eq!(cc.physical_qubits, vec![0, 1, 2]);
    }

    #[test]
    fn deterministic() {
        let p = builtin_profile("guadalupe-like").unwrap();
        let c = generate_qv_circuit(&QvSpec::square(4, 10), 3);
        let req = CompileRequest::new(&c, &p).subset(vec![1, 2, 3, 5]).seed(9);
        assert_eq!(compile_to_device(&req).unwrap(), compile_to_device(&req).unwrap());
    }

    #[test]
    fn all_to_all_counts() {
        let p = builtin_profile("h1-2-like").unwrap();
        for d in 1..=6 {
            let spec = QvSpec { m: 2, d, count: 1, base_seed: 4 };
            let c = generate_qv_circuit(&spec, 0);
            let cc = compile_to_device(&CompileRequest::new(&c, &p)).unwrap();
            assert_eq!(cc.swap_count, 0);
            assert_eq!(cc.census.two_qubit_count, 3 * d);
        }
        let c = generate_qv_circuit(&QvSpec::square(5, 4), 0);
        let cc = compile_to_device(&CompileRequest::new(&c, &p).subset(vec![11, 3, 7, 0, 5])).unwrap();
        assert_eq!(cc.census.two_qubit_count, 3 * 5 * 2);
        check(&c, &cc, &p);
    }

    #[test]
    fn line_needs_swaps_and_stays_correct() {
        let p = profile(CouplingGraph::line(3), VendorFamily::SuperconductingHeavyHex);
        let mut c = Circuit::new(3);
        c.push(Operation::two(GateKind::Cx, vec![], 0, 2));
        c.push(Operation::one(GateKind::H, vec![], 1));
        let cc = compile_to_device(&CompileRequest::new(&c, &p)).unwrap();
        assert!(cc.swap_count >= 1);
        assert!(cc.census.two_qubit_count > 3);
        check(&c, &cc, &p);
    }

    #[test]
    fn every_family_on_line_and_complete_graphs() {
        for fam in VendorFamily::ALL {
            for i in 0..6u64 {
                let m = 2 + (i % 3) as usize;
                let c = generate_qv_circuit(&QvSpec::square(m, 55), i);
                for g in [CouplingGraph::all_to_all(m), CouplingGraph::line(m)] {
                    let p = profile(g, fam);
                    let cc = compile_to_device(&CompileRequest::new(&c, &p).seed(i)).unwrap();
                    check(&c, &cc, &p);
                }
            }
        }
    }

    #[test]
    fn spill_uses_outside_qubits_only_when_allowed() {
        let p = profile(CouplingGraph::line(5), VendorFamily::SuperconductingHeavyHex);
        let c = generate_qv_circuit(&QvSpec::square(2, 3), 0);
        let req = CompileRequest::new(&c, &p).subset(vec![0, 2]);
        assert!(matches!(compile_to_device(&req), Err(Error::Layout(_))));
        let cc = compile_to_device(&req.clone().spill(true)).unwrap();
        assert!(cc.physical_qubits.contains(&1));
        check(&c, &cc, &p);
    }

    #[test]
    fn bad_requests() {
        let p = builtin_profile("lima-like").unwrap();
        let c = generate_qv_circuit(&QvSpec::square(3, 1), 0);
        for s in [vec![0, 1], vec![0, 1, 9], vec![0, 2, 4]] {
            assert!(matches!(compile_to_device(&CompileRequest::new(&c, &p).subset(s)), Err(Error::Layout(_))));
        }
        let big = generate_qv_circuit(&QvSpec::square(6, 1), 0);
        assert!(compile_to_device(&CompileRequest::new(&big, &p)).is_err());
    }

    #[test]
    fn logical_outcome_follows_final_layout() {
        let p = profile(CouplingGraph::line(3), VendorFamily::U3Cx);
        let mut c = Circuit::new(3);
        c.push(Operation::one(GateKind::X, vec![], 0));
        c.push(Operation::two(GateKind::Cx, vec![], 0, 2));
        c.measure_all();
        let cc = compile_to_device(&CompileRequest::new(&c, &p)).unwrap();
        let s = crate::sim::final_state(&cc.circuit).unwrap();
        let probs = s.probabilities();
        let wire_outcome = probs.iter().position(|&x| x > 0.5).unwrap();
        assert_eq!(cc.logical_outcome(wire_outcome), 0b101);
    }
}
