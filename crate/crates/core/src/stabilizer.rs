//! Measurement frames, stabilizer tableaux in the measurement basis, and
//! graph states.
//!
//! A single-qubit Pauli factor is stored as a pair `(w, v)` relative to the
//! qubit's frame: `(1,0)` is the in-plane axis `σφ`, `(0,1)` the normal axis
//! `σs`, and `(1,1)` the second in-plane axis `σsφ`. Generator phases are not
//! tracked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMat, Bits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilizerError {
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("generators are linearly dependent")]
    DependentGenerators,
    #[error("generator on qubit {0} cannot be expressed in its frame")]
    FrameIncompatible(usize),
    #[error("invalid frame {0:?}")]
    InvalidFrame(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn third(self, other: Axis) -> Axis {
        match (self, other) {
            (Axis::X, Axis::Y) | (Axis::Y, Axis::X) => Axis::Z,
            (Axis::X, Axis::Z) | (Axis::Z, Axis::X) => Axis::Y,
            (Axis::Y, Axis::Z) | (Axis::Z, Axis::Y) => Axis::X,
            _ => panic!("axes must differ"),
        }
    }

    fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// Ordered pair of Pauli axes spanning a measurement plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    phi: Axis,
    sphi: Axis,
}

impl Frame {
    pub const XY: Frame = Frame {
        phi: Axis::X,
        sphi: Axis::Y,
    };
    pub const YX: Frame = Frame {
        phi: Axis::Y,
        sphi: Axis::X,
    };

    pub fn new(phi: Axis, sphi: Axis) -> Result<Self, StabilizerError> {
        if phi == sphi {
            return Err(StabilizerError::InvalidFrame(format!(
                "{}{}",
                phi.letter(),
                sphi.letter()
            )));
        }
        Ok(Self { phi, sphi })
    }

    pub fn phi_axis(self) -> Axis {
        self.phi
    }

    pub fn sphi_axis(self) -> Axis {
        self.sphi
    }

    /// The axis normal to the plane.
    pub fn s_axis(self) -> Axis {
        self.phi.third(self.sphi)
    }

    /// Exchanges the roles of `σφ` and `σsφ`.
    pub fn swapped(self) -> Frame {
        Frame {
            phi: self.sphi,
            sphi: self.phi,
        }
    }

    /// Exchanges the roles of `σs` and `σsφ`.
    pub fn s_sphi_swapped(self) -> Frame {
        Frame {
            phi: self.phi,
            sphi: self.s_axis(),
        }
    }

    pub fn involves_z(self) -> bool {
        self.phi == Axis::Z || self.sphi == Axis::Z
    }

    /// `(w, v)` code of a physical axis in this frame.
    pub fn encode(self, axis: Axis) -> (bool, bool) {
        if axis == self.phi {
            (true, false)
        } else if axis == self.sphi {
            (true, true)
        } else {
            (false, true)
        }
    }

    /// Physical axis for a `(w, v)` code; `None` for the identity.
    pub fn decode(self, w: bool, v: bool) -> Option<Axis> {
        match (w, v) {
            (false, false) => None,
            (true, false) => Some(self.phi),
            (true, true) => Some(self.sphi),
            (false, true) => Some(self.s_axis()),
        }
    }
}

impl Default for Frame {
    fn default() -> Self {
        Frame::XY
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phi.letter(), self.sphi.letter())
    }
}

impl FromStr for Frame {
    type Err = StabilizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let axis = |c: char| match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        };
        let chars: Vec<char> = s.chars().collect();
        match chars.as_slice() {
            [a, b] => match (axis(*a), axis(*b)) {
                (Some(p), Some(q)) => Frame::new(p, q),
                _ => Err(StabilizerError::InvalidFrame(s.to_string())),
            },
            _ => Err(StabilizerError::InvalidFrame(s.to_string())),
        }
    }
}

impl Serialize for Frame {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Simple undirected graph on `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    /// Edges are normalized to `(min, max)`, sorted and deduplicated.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, StabilizerError> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(StabilizerError::InvalidGraph(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(StabilizerError::InvalidGraph(format!("self-loop at {a}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { n, edges: out })
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle graph")
    }

    /// Periodic `rows x cols` grid; both dimensions must be at least 3.
    pub fn torus(rows: usize, cols: usize) -> Self {
        assert!(rows >= 3 && cols >= 3);
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                edges.push((id(r, c), id(r, (c + 1) % cols)));
                edges.push((id(r, c), id((r + 1) % rows, c)));
            }
        }
        Self::new(rows * cols, edges).expect("torus graph")
    }

    pub fn from_adjacency(adj: &BitMat) -> Result<Self, StabilizerError> {
        if !adj.is_square() || adj != &adj.transpose() {
            return Err(StabilizerError::InvalidGraph("adjacency must be symmetric".into()));
        }
        let n = adj.nrows();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in adj.row(a).ones() {
                if b > a {
                    edges.push((a, b));
                } else if b == a {
                    return Err(StabilizerError::InvalidGraph(format!("self-loop at {a}")));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> BitMat {
        let mut m = BitMat::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            m.set(a, b, true);
            m.set(b, a, true);
        }
        m
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }
}

/// Stabilizer generator matrix `(Φ || S)` with per-qubit frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    phi: BitMat,
    s: BitMat,
    frames: Vec<Frame>,
}

impl Tableau {
    /// Builds and validates a tableau.
    pub fn new(phi: BitMat, s: BitMat, frames: Vec<Frame>) -> Result<Self, StabilizerError> {
        let t = Self::from_parts(phi, s, frames)?;
        t.validate()?;
        Ok(t)
    }

    /// Shape-checked but not validated.
    pub fn from_parts(phi: BitMat, s: BitMat, frames: Vec<Frame>) -> Result<Self, StabilizerError> {
        let n = phi.nrows();
        if !phi.is_square() || s.nrows() != n || s.ncols() != n || frames.len() != n {
            return Err(StabilizerError::Shape(format!(
                "phi {}x{}, s {}x{}, {} frames",
                phi.nrows(),
                phi.ncols(),
                s.nrows(),
                s.ncols(),
                frames.len()
            )));
        }
        Ok(Self { phi, s, frames })
    }

    /// Builds a tableau from physical Pauli strings such as `"XZI"`.
    pub fn from_paulis(rows: &[&str], frames: Vec<Frame>) -> Result<Self, StabilizerError> {
        let n = rows.len();
        let mut phi = BitMat::zeros(n, n);
        let mut s = BitMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != n || frames.len() != n {
                return Err(StabilizerError::Shape(format!("pauli string {row:?} for {n} qubits")));
            }
            for (q, c) in chars.into_iter().enumerate() {
                let axis = match c.to_ascii_uppercase() {
                    'I' => continue,
                    'X' => Axis::X,
                    'Y' => Axis::Y,
                    'Z' => Axis::Z,
                    _ => return Err(StabilizerError::Shape(format!("bad pauli letter {c:?}"))),
                };
                let (w, v) = frames[q].encode(axis);
                phi.set(i, q, w);
                s.set(i, q, v);
            }
        }
        Self::new(phi, s, frames)
    }

    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    pub fn phi(&self) -> &BitMat {
        &self.phi
    }

    pub fn s(&self) -> &BitMat {
        &self.s
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// `(Φ || S)` as one `n x 2n` matrix.
    pub fn generator_matrix(&self) -> BitMat {
        self.phi.hstack(&self.s)
    }

    /// Symplectic product of two generator rows.
    pub fn rows_anticommute(&self, i: usize, j: usize) -> bool {
        self.phi.row(i).dot(self.s.row(j)) ^ self.s.row(i).dot(self.phi.row(j))
    }

    pub fn validate(&self) -> Result<(), StabilizerError> {
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                if self.rows_anticommute(i, j) {
                    return Err(StabilizerError::NonCommuting(i, j));
                }
            }
        }
        if self.generator_matrix().rank() < n {
            return Err(StabilizerError::DependentGenerators);
        }
        Ok(())
    }

    /// XOR of the selected generators, phases dropped.
    pub fn row_product(&self, rows: &[usize]) -> (Bits, Bits) {
        let n = self.n();
        let mut w = Bits::zeros(n);
        let mut v = Bits::zeros(n);
        for &r in rows {
            w.xor_assign(self.phi.row(r));
            v.xor_assign(self.s.row(r));
        }
        (w, v)
    }

    /// Whether `(w, v)` lies in the stabilizer group (up to phase).
    pub fn contains(&self, w: &Bits, v: &Bits) -> bool {
        let g = self.generator_matrix();
        g.transpose().solve(&w.concat(v)).is_ok()
    }

    pub fn same_group(&self, other: &Tableau) -> bool {
        self.generator_matrix().same_row_space(&other.generator_matrix())
    }

    /// Physical axis of generator `row` on qubit `q`.
    pub fn physical_factor(&self, row: usize, q: usize) -> Option<Axis> {
        self.frames[q].decode(self.phi.get(row, q), self.s.get(row, q))
    }

    /// Physical Pauli string of a generator, e.g. `"XZI"`.
    pub fn pauli_string(&self, row: usize) -> String {
        (0..self.n())
            .map(|q| self.physical_factor(row, q).map_or('I', Axis::letter))
            .collect()
    }

    /// Re-expresses the same group with `σφ` and `σsφ` swapped at `q`.
    pub fn flip_frame(&self, q: usize) -> Tableau {
        let mut out = self.clone();
        for r in 0..self.n() {
            if self.phi.get(r, q) {
                out.s.flip(r, q);
            }
        }
        out.frames[q] = self.frames[q].swapped();
        out
    }

    /// Re-expresses the same group in new frames.
    pub fn with_frames(&self, frames: Vec<Frame>) -> Result<Tableau, StabilizerError> {
        let n = self.n();
        if frames.len() != n {
            return Err(StabilizerError::Shape(format!("{} frames for {n} qubits", frames.len())));
        }
        let mut phi = BitMat::zeros(n, n);
        let mut s = BitMat::zeros(n, n);
        for r in 0..n {
            for q in 0..n {
                if let Some(axis) = self.physical_factor(r, q) {
                    let (w, v) = frames[q].encode(axis);
                    phi.set(r, q, w);
                    s.set(r, q, v);
                }
            }
        }
        Tableau::from_parts(phi, s, frames)
    }
}

/// Generators `K_a = X_a Z_{N(a)}` written in the given frames.
pub fn graph_state_tableau(g: &GraphSpec, frames: &[Frame]) -> Result<Tableau, StabilizerError> {
    let n = g.n();
    if frames.len() != n {
        return Err(StabilizerError::Shape(format!("{} frames for {n} qubits", frames.len())));
    }
    let adj = g.adjacency();
    let mut phi = BitMat::zeros(n, n);
    let mut s = BitMat::zeros(n, n);
    for a in 0..n {
        let (w, v) = frames[a].encode(Axis::X);
        phi.set(a, a, w);
        s.set(a, a, v);
        for b in adj.row(a).ones() {
            let (w, v) = frames[b].encode(Axis::Z);
            phi.set(a, b, w);
            s.set(a, b, v);
        }
    }
    Tableau::new(phi, s, frames.to_vec())
}
