//! Influence matrices and the temporal relations they generate.
//!
//! `T[b][a] = 1` means the outcome at `a` enters the basis choice at `b`,
//! i.e. `a ≺ b`. Column `a` is the forward cone of `a`, row `b` the backward
//! cone of `b`.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{BitMat, Bits};
use crate::stabilizer::GraphSpec;

/// Exhaustive cycle-free search in [`flow_check`] is attempted only up to
/// this many qubits.
pub const FLOW_SEARCH_MAX_QUBITS: usize = 10;
/// Upper bound on `log2` of the solution space searched by [`flow_check`].
pub const FLOW_SEARCH_MAX_FREE_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderKind {
    PartialOrder { rounds: Vec<Vec<usize>> },
    Ctc { witness: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalRelation {
    pub closure: BitMat,
    pub kind: OrderKind,
}

impl TemporalRelation {
    pub fn is_partial_order(&self) -> bool {
        matches!(self.kind, OrderKind::PartialOrder { .. })
    }

    /// `a ≺ b` under transitivity.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.closure.get(b, a)
    }

    pub fn rounds(&self) -> Option<&[Vec<usize>]> {
        match &self.kind {
            OrderKind::PartialOrder { rounds } => Some(rounds),
            OrderKind::Ctc { .. } => None,
        }
    }

    /// A measurement order compatible with the relation, if it is a partial order.
    pub fn linear_extension(&self) -> Option<Vec<usize>> {
        self.rounds().map(|r| r.iter().flatten().copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("restricted adjacency matrix has no right inverse")]
    NoInverse,
    #[error("every solution generates a cycle")]
    OnlyCyclicSolutions,
    #[error("search space too large; the particular solution has a cycle")]
    Unknown { particular: BitMat },
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
}

/// Forward and backward cones, indexed by qubit.
pub fn cones(t: &BitMat) -> (Vec<Bits>, Vec<Bits>) {
    assert!(t.is_square(), "influence matrix must be square");
    let fc = (0..t.ncols()).map(|a| t.col(a)).collect();
    let bc = t.rows().to_vec();
    (fc, bc)
}

/// Qubits with empty backward cones and qubits with empty forward cones.
pub fn io_sets(t: &BitMat) -> (Vec<usize>, Vec<usize>) {
    let n = t.nrows();
    let inputs = (0..n).filter(|&b| t.row(b).is_zero()).collect();
    let mut has_successor = vec![false; n];
    for row in t.rows() {
        for a in row.ones() {
            has_successor[a] = true;
        }
    }
    let outputs = (0..n).filter(|&a| !has_successor[a]).collect();
    (inputs, outputs)
}

/// Transitive closure by repeated boolean squaring.
pub fn transitive_closure(t: &BitMat) -> BitMat {
    let mut c = t.clone();
    loop {
        let mut next = c.bool_mul(&c);
        for (i, row) in c.rows().iter().enumerate() {
            next.row_mut(i).or_assign(row);
        }
        if next == c {
            return c;
        }
        c = next;
    }
}

pub fn closure(t: &BitMat) -> TemporalRelation {
    assert!(t.is_square(), "influence matrix must be square");
    let c = transitive_closure(t);
    let kind = if c.diagonal().is_zero() {
        OrderKind::PartialOrder { rounds: rounds(&c) }
    } else {
        OrderKind::Ctc {
            witness: shortest_cycle(t).expect("closure has a reflexive pair"),
        }
    };
    TemporalRelation { closure: c, kind }
}

/// Longest-path layering of an acyclic closure.
fn rounds(c: &BitMat) -> Vec<Vec<usize>> {
    let n = c.nrows();
    let mut level = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut placed = 0;
    while placed < n {
        let k = out.len();
        let layer: Vec<usize> = (0..n)
            .filter(|&b| level[b] == usize::MAX && c.row(b).ones().all(|a| level[a] < k))
            .collect();
        assert!(!layer.is_empty(), "closure is not acyclic");
        for &b in &layer {
            level[b] = k;
        }
        placed += layer.len();
        out.push(layer);
    }
    out
}

/// Shortest directed cycle, smallest start vertex on ties; BFS explores
/// successors in ascending order.
fn shortest_cycle(t: &BitMat) -> Option<Vec<usize>> {
    let n = t.nrows();
    let succ: Vec<Vec<usize>> = (0..n).map(|a| t.col(a).ones().collect()).collect();
    let mut best: Option<Vec<usize>> = None;
    for start in 0..n {
        let mut parent = vec![usize::MAX; n];
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        let mut found = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in &succ[u] {
                if v == start {
                    found = Some(u);
                    break 'bfs;
                }
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if let Some(last) = found {
            let mut path = vec![last];
            while *path.last().unwrap() != start {
                path.push(parent[*path.last().unwrap()]);
            }
            path.reverse();
            if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                best = Some(path);
            }
        }
    }
    best
}

/// Searches for an influence matrix `T` with `A_G|_{O^c x I^c} T = I` whose
/// closure is acyclic. `T` is returned embedded in `n x n` form with rows
/// indexed by `I^c` and columns by `O^c`.
pub fn flow_check(g: &GraphSpec, inputs: &[usize], outputs: &[usize]) -> Result<BitMat, FlowError> {
    let n = g.n();
    if let Some(&q) = inputs.iter().chain(outputs).find(|&&q| q >= n) {
        return Err(FlowError::OutOfRange(q));
    }
    let complement = |set: &[usize]| -> Vec<usize> { (0..n).filter(|q| !set.contains(q)).collect() };
    let not_in = complement(inputs);
    let not_out = complement(outputs);
    let a = g.adjacency().select(&not_out, &not_in);

    if a.rank() < not_out.len() {
        return Err(FlowError::NoInverse);
    }
    // Particular right inverse, one column per unit vector.
    let particular: Vec<Bits> = (0..not_out.len())
        .map(|j| a.solve(&Bits::unit(not_out.len(), j)).expect("full row rank"))
        .collect();
    let kernel = a.kernel();

    let embed = |cols: &[Bits]| -> BitMat {
        let mut t = BitMat::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in col.ones() {
                t.set(not_in[i], not_out[j], true);
            }
        }
        t
    };

    let free_bits = kernel.len() * not_out.len();
    if n > FLOW_SEARCH_MAX_QUBITS || free_bits > FLOW_SEARCH_MAX_FREE_BITS {
        let t = embed(&particular);
        return if closure(&t).is_partial_order() {
            Ok(t)
        } else {
            Err(FlowError::Unknown { particular: t })
        };
    }
    for code in 0u64..(1u64 << free_bits) {
        let cols: Vec<Bits> = particular
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let mut c = p.clone();
                for (k, kv) in kernel.iter().enumerate() {
                    if (code >> (j * kernel.len() + k)) & 1 == 1 {
                        c.xor_assign(kv);
                    }
                }
                c
            })
            .collect();
        let t = embed(&cols);
        if closure(&t).is_partial_order() {
            return Ok(t);
        }
    }
    Err(FlowError::OnlyCyclicSolutions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trel_ex0() -> BitMat {
        BitMat::from_u8_rows(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    }

    #[test]
    fn cones_of_worked_example() {
        let (fc, bc) = cones(&trel_ex0());
        assert_eq!(fc[0].ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(fc[1].ones().collect::<Vec<_>>(), vec![2]);
        assert!(fc[2].is_zero());
        assert_eq!(bc[1].ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(bc[2].ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(io_sets(&trel_ex0()), (vec![0], vec![2]));
        assert_eq!(io_sets(&BitMat::zeros(3, 3)), (vec![0, 1, 2], vec![0, 1, 2]));
    }

    #[test]
    fn closure_of_chain() {
        let r = closure(&trel_ex0());
        assert!(r.precedes(0, 2));
        assert_eq!(r.rounds().unwrap(), &[vec![0], vec![1], vec![2]]);
        let flat = closure(&BitMat::zeros(3, 3));
        assert_eq!(flat.rounds().unwrap(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn ctc_witnesses() {
        let mut t = BitMat::zeros(3, 3);
        t.set(1, 1, true);
        assert_eq!(closure(&t).kind, OrderKind::Ctc { witness: vec![1] });
        let mut t = BitMat::zeros(3, 3);
        t.set(2, 0, true);
        t.set(0, 2, true);
        assert_eq!(closure(&t).kind, OrderKind::Ctc { witness: vec![0, 2] });
    }

    #[test]
    fn flow_on_path() {
        let g = GraphSpec::path(3);
        assert_eq!(flow_check(&g, &[0], &[2]).unwrap(), trel_ex0());
        assert_eq!(flow_check(&g, &[1], &[1]), Err(FlowError::NoInverse));
        let empty = GraphSpec::new(3, []).unwrap();
        assert_eq!(flow_check(&empty, &[0, 1, 2], &[0, 1, 2]).unwrap(), BitMat::zeros(3, 3));
    }
}
