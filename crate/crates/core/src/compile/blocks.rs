//! Grouping of circuits into two-qubit unitary blocks.

use crate::circuit::{ensure_valid, Circuit};
use crate::error::Result;
use crate::gates::{self, GateKind};
use crate::math::{kron2, Mat2, Mat4};

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// Unitary on `(qubits[0], qubits[1])`, the first qubit being the high bit.
    Pair { qubits: [usize; 2], u: Mat4 },
    Single { qubit: usize, u: Mat2 },
}

impl Block {
    pub fn qubits(&self) -> &[usize] {
        match self {
            Block::Pair { qubits, .. } => qubits,
            Block::Single { qubit, .. } => std::slice::from_ref(qubit),
        }
    }
}

struct Open {
    qubits: [usize; 2],
    u: Mat4,
}

struct Grouper {
    out: Vec<Block>,
    open: Vec<Option<usize>>,
    blocks: Vec<Option<Open>>,
    pending: Vec<Option<Mat2>>,
}

impl Grouper {
    fn close(&mut self, id: usize) {
        if let Some(b) = self.blocks[id].take() {
            for q in b.qubits {
                self.open[q] = None;
            }
            self.out.push(Block::Pair {
                qubits: b.qubits,
                u: b.u,
            });
        }
    }

    fn close_all(&mut self) {
        for id in 0..self.blocks.len() {
            self.close(id);
        }
        for (q, p) in self.pending.iter_mut().enumerate() {
            if let Some(u) = p.take() {
                self.out.push(Block::Single { qubit: q, u });
            }
        }
    }

    fn one(&mut self, q: usize, g: Mat2) {
        match self.open[q] {
            Some(id) => {
                let b = self.blocks[id].as_mut().expect("open block");
                let full = if b.qubits[0] == q {
                    kron2(&g, &Mat2::identity())
                } else {
                    kron2(&Mat2::identity(), &g)
                };
                b.u = full * b.u;
            }
            None => {
                let p = self.pending[q].get_or_insert_with(Mat2::identity);
                *p = g * *p;
            }
        }
    }

    fn two(&mut self, a: usize, b: usize, g: Mat4) {
        if let (Some(x), Some(y)) = (self.open[a], self.open[b]) {
            if x == y {
                let blk = self.blocks[x].as_mut().expect("open block");
                let g = if blk.qubits == [a, b] {
                    g
                } else {
                    let s = gates::swap();
                    s * g * s
                };
                blk.u = g * blk.u;
                return;
            }
        }
        for q in [a, b] {
            if let Some(id) = self.open[q] {
                self.close(id);
            }
        }
        let pa = self.pending[a].take().unwrap_or_else(Mat2::identity);
        let pb = self.pending[b].take().unwrap_or_else(Mat2::identity);
        let id = self.blocks.len();
        self.blocks.push(Some(Open {
            qubits: [a, b],
            u: g * kron2(&pa, &pb),
        }));
        self.open[a] = Some(id);
        self.open[b] = Some(id);
    }
}

/// Splits `c` into maximal two-qubit blocks, never merging across recorded
/// layer boundaries. Single-qubit gates join the adjacent block on their
/// qubit; leftovers become `Single` entries. The returned order respects
/// every qubit's gate order.
pub fn extract_blocks(c: &Circuit) -> Result<Vec<Block>> {
    ensure_valid(c)?;
    let mut g = Grouper {
        out: Vec::new(),
        open: vec![None; c.width],
        blocks: Vec::new(),
        pending: vec![None; c.width],
    };
    let ranges = c.layers().unwrap_or_else(|| std::iter::once(0..c.ops.len()).collect());
    for range in ranges {
        for op in &c.ops[range] {
            if matches!(op.gate, GateKind::Id | GateKind::Delay) {
                continue;
            }
            match op.qubits[..] {
                [q] => g.one(q, gates::matrix1(op.gate, &op.params)?),
                [a, b] => g.two(a, b, gates::matrix2(op.gate, &op.params)?),
                _ => unreachable!("validated arity"),
            }
        }
        g.close_all();
    }
    Ok(g.out)
}

/// Rebuilds a circuit of raw unitary blocks; used to check block extraction.
#[cfg(test)]
pub(crate) fn blocks_unitary(width: usize, blocks: &[Block]) -> crate::math::UnitaryMatrix {
    use crate::state::StateVector;
    let dim = 1usize << width;
    let mut u = crate::math::UnitaryMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(width, col);
        for b in blocks {
            match b {
                Block::Pair { qubits, u } => s.apply_2q(qubits[0], qubits[1], u),
                Block::Single { qubit, u } => s.apply_1q(*qubit, u),
            }
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}
