//! Greedy SWAP insertion over two-qubit blocks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::blocks::{extract_blocks, Block};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::math::{Mat2, Mat4};
use crate::topology::CouplingGraph;

/// Weight of the next layer in the SWAP score.
const LOOKAHEAD_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum RoutedOp {
    /// Block on physical nodes, first node the high bit.
    Pair { nodes: [usize; 2], u: Mat4 },
    Single { node: usize, u: Mat2 },
    Swap { nodes: [usize; 2] },
}

/// Layout after a SWAP: `layout[logical] = node`, effective from routed op `op_index` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutStep {
    pub op_index: usize,
    pub layout: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    pub ops: Vec<RoutedOp>,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub history: Vec<LayoutStep>,
    pub swap_count: usize,
}

/// Routes `c` on `g` starting from `layout0[logical] = node`.
///
/// Blocks whose qubits sit on adjacent nodes run as soon as their
/// predecessors have; otherwise the SWAP touching a waiting block that
/// minimises the summed distance of the waiting blocks plus half the mean
/// distance of their successors is applied, ties going to the lowest node
/// pair. When SWAPs stop making progress the oldest waiting block is walked
/// together along a shortest path.
pub fn route(c: &Circuit, g: &CouplingGraph, layout0: &[usize]) -> Result<RoutedCircuit> {
    let blocks = extract_blocks(c)?;
    route_blocks(c.width, blocks, g, layout0)
}

pub(crate) fn route_blocks(
    width: usize,
    blocks: Vec<Block>,
    g: &CouplingGraph,
    layout0: &[usize],
) -> Result<RoutedCircuit> {
    let n = g.n_qubits();
    if layout0.len() != width {
        return Err(Error::Layout(format!(
            "layout covers {} qubits, circuit has {width}",
            layout0.len()
        )));
    }
    let mut p2l: Vec<Option<usize>> = vec![None; n];
    for (l, &p) in layout0.iter().enumerate() {
        if p >= n {
            return Err(Error::Layout(format!("node {p} is not on the device")));
        }
        if p2l[p].replace(l).is_some() {
            return Err(Error::Layout(format!("node {p} assigned twice")));
        }
    }
    let mut l2p = layout0.to_vec();
    let dist = g.distances();

    // Dependency graph: each block waits for the previous block on each of its qubits.
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];
    let mut indeg = vec![0usize; blocks.len()];
    let mut last: Vec<Option<usize>> = vec![None; width];
    for (i, b) in blocks.iter().enumerate() {
        for &q in b.qubits() {
            if let Some(p) = last[q] {
                if !succ[p].contains(&i) {
                    succ[p].push(i);
                    indeg[i] += 1;
                }
            }
            last[q] = Some(i);
        }
        if let Block::Pair { qubits: [a, b], .. } = b {
            if dist[layout0[*a]][layout0[*b]] == usize::MAX {
                return Err(Error::Layout(format!(
                    "qubits {a} and {b} are placed on disconnected nodes"
                )));
            }
        }
    }
    let mut front: Vec<usize> = (0..blocks.len()).filter(|&i| indeg[i] == 0).collect();

    let mut ops = Vec::with_capacity(blocks.len());
    let mut history = Vec::new();
    let mut swap_count = 0;
    let mut stalled = 0usize;
    let mut last_swap: Option<(usize, usize)> = None;
    let stall_limit = 2 * n + 8;

    let apply_swap = |p: usize, r: usize, l2p: &mut Vec<usize>, p2l: &mut Vec<Option<usize>>| {
        p2l.swap(p, r);
        for node in [p, r] {
            if let Some(l) = p2l[node] {
                l2p[l] = node;
            }
        }
    };

    while !front.is_empty() {
        // Execute everything runnable, repeating as successors become ready.
        let mut ran = false;
        loop {
            let ready: Vec<usize> = front
                .iter()
                .copied()
                .filter(|&i| match &blocks[i] {
                    Block::Pair { qubits: [a, b], .. } => g.has_edge(l2p[*a], l2p[*b]),
                    Block::Single { .. } => true,
                })
                .collect();
            if ready.is_empty() {
                break;
            }
            ran = true;
            front.retain(|i| !ready.contains(i));
            for i in ready {
                ops.push(match &blocks[i] {
                    Block::Pair { qubits: [a, b], u } => RoutedOp::Pair {
                        nodes: [l2p[*a], l2p[*b]],
                        u: *u,
                    },
                    Block::Single { qubit, u } => RoutedOp::Single {
                        node: l2p[*qubit],
                        u: *u,
                    },
                });
                for &s in &succ[i] {
                    indeg[s] -= 1;
                    if indeg[s] == 0 {
                        front.push(s);
                    }
                }
            }
            front.sort_unstable();
        }
        if front.is_empty() {
            break;
        }
        if ran {
            stalled = 0;
            last_swap = None;
        }

        let pairs: Vec<[usize; 2]> = front
            .iter()
            .filter_map(|&i| match &blocks[i] {
                Block::Pair { qubits, .. } => Some(*qubits),
                Block::Single { .. } => None,
            })
            .collect();
        let mut swaps: Vec<(usize, usize)> = Vec::new();
        if stalled >= stall_limit {
            // Walk the oldest waiting block's first qubit toward its partner.
            let [a, b] = pairs[0];
            let path = shortest_path(g, l2p[a], l2p[b]);
            for w in path.windows(2).take(path.len().saturating_sub(2)) {
                swaps.push((w[0], w[1]));
            }
        } else {
            let next: Vec<[usize; 2]> = front
                .iter()
                .flat_map(|&i| succ[i].iter().copied())
                .filter_map(|s| match &blocks[s] {
                    Block::Pair { qubits, .. } => Some(*qubits),
                    Block::Single { .. } => None,
                })
                .collect();
            let mut candidates: Vec<(usize, usize)> = pairs
                .iter()
                .flat_map(|qs| qs.iter().map(|&q| l2p[q]))
                .flat_map(|p| g.neighbors(p).iter().map(move |&r| (p.min(r), p.max(r))))
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            if candidates.len() > 1 {
                candidates.retain(|&e| Some(e) != last_swap);
            }
            let mut best: Option<((usize, usize), f64)> = None;
            for &(p, r) in &candidates {
                apply_swap(p, r, &mut l2p, &mut p2l);
                let cost = |set: &[[usize; 2]]| -> f64 {
                    set.iter().map(|[a, b]| dist[l2p[*a]][l2p[*b]] as f64).sum()
                };
                let mut score = cost(&pairs);
                if !next.is_empty() {
                    score += LOOKAHEAD_WEIGHT * cost(&next) / next.len() as f64;
                }
                apply_swap(p, r, &mut l2p, &mut p2l);
                if best.is_none_or(|(_, s)| score < s) {
                    best = Some(((p, r), score));
                }
            }
            swaps.push(best.expect("a waiting block has neighbors").0);
        }
        for (p, r) in swaps {
            apply_swap(p, r, &mut l2p, &mut p2l);
            ops.push(RoutedOp::Swap { nodes: [p, r] });
            history.push(LayoutStep {
                op_index: ops.len(),
                layout: l2p.clone(),
            });
            swap_count += 1;
            last_swap = Some((p.min(r), p.max(r)));
            stalled += 1;
        }
    }

    Ok(RoutedCircuit {
        ops,
        initial_layout: layout0.to_vec(),
        final_layout: l2p,
        history,
        swap_count,
    })
}

fn shortest_path(g: &CouplingGraph, from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; g.n_qubits()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &u in g.neighbors(v) {
            if prev[u] == usize::MAX {
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    path
}
