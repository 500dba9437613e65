//! Mod-2 graph Laplacian and the wave equation obeyed by forward cones on
//! graph states measured in `X`/`Y` planes.

use thiserror::Error;

use crate::gf2::{BitMat, Bits};
use crate::stabilizer::{Axis, Frame, GraphSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WaveError {
    #[error("frame on qubit {0} involves Z")]
    UnsupportedFrame(usize),
    #[error("no forward cone supplied for qubit {0}")]
    MissingCone(usize),
    #[error("wave equation violated at {0:?}")]
    Residual(Vec<(usize, usize)>),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mod2Laplacian {
    pub delta: BitMat,
    pub deg: Vec<usize>,
    /// 0 for an `XY` plane, 1 for `YX`.
    pub b: Bits,
}

impl Mod2Laplacian {
    /// `m(v) = deg(v) + b(v) mod 2`.
    pub fn mass(&self) -> Bits {
        let n = self.deg.len();
        Bits::from_indices(n, (0..n).filter(|&v| (self.deg[v] % 2 == 1) ^ self.b.get(v)))
    }
}

/// `Δ = Γ + diag(deg mod 2)` with all plane bits zero.
pub fn laplacian(g: &GraphSpec) -> Mod2Laplacian {
    let mut delta = g.adjacency();
    let deg = g.degrees();
    for (v, &d) in deg.iter().enumerate() {
        if d % 2 == 1 {
            delta.flip(v, v);
        }
    }
    Mod2Laplacian {
        delta,
        deg,
        b: Bits::zeros(g.n()),
    }
}

/// Plane-orientation bits of `XY`/`YX` frames.
pub fn plane_bits(frames: &[Frame]) -> Result<Bits, WaveError> {
    let mut b = Bits::zeros(frames.len());
    for (q, f) in frames.iter().enumerate() {
        if f.involves_z() {
            return Err(WaveError::UnsupportedFrame(q));
        }
        b.set(q, f.phi_axis() == Axis::Y);
    }
    Ok(b)
}

pub fn laplacian_with_frames(g: &GraphSpec, frames: &[Frame]) -> Result<Mod2Laplacian, WaveError> {
    if frames.len() != g.n() {
        return Err(WaveError::Shape(format!("{} frames for {} vertices", frames.len(), g.n())));
    }
    let mut lap = laplacian(g);
    lap.b = plane_bits(frames)?;
    Ok(lap)
}

/// `K(a) ≡ X(f) Z(Γ f)` in plain `X`/`Z` coordinates.
pub fn forward_cone_operator(g: &GraphSpec, f: &Bits) -> (Bits, Bits) {
    (f.clone(), g.adjacency().mul_vec(f))
}

/// Verifies `m(v) f_a(v) + (Δ f_a)(v) = δ_{a,v}` for all `v ∉ O_comp` and
/// every `a ∉ O_comp`. Failures are reported as `(a, v)` pairs.
pub fn check_wave(
    g: &GraphSpec,
    b: &Bits,
    o_comp: &[usize],
    cones: &[(usize, Bits)],
) -> Result<(), WaveError> {
    let n = g.n();
    if b.len() != n {
        return Err(WaveError::Shape(format!("{} plane bits for {n} vertices", b.len())));
    }
    let mut lap = laplacian(g);
    lap.b = b.clone();
    let mass = lap.mass();
    let not_comp: Vec<usize> = (0..n).filter(|q| !o_comp.contains(q)).collect();
    let mut residuals = Vec::new();
    for &a in &not_comp {
        let f = &cones
            .iter()
            .find(|(q, _)| *q == a)
            .ok_or(WaveError::MissingCone(a))?
            .1;
        if f.len() != n {
            return Err(WaveError::Shape(format!("cone of {a} has length {}", f.len())));
        }
        let df = lap.delta.mul_vec(f);
        for &v in &not_comp {
            if (mass.get(v) && f.get(v)) ^ df.get(v) ^ (a == v) {
                residuals.push((a, v));
            }
        }
    }
    if residuals.is_empty() {
        Ok(())
    } else {
        Err(WaveError::Residual(residuals))
    }
}

/// Forward cones `f_a` (columns of `T`) for all `a ∉ O_comp`.
pub fn cones_from_influence(t: &BitMat, o_comp: &[usize]) -> Vec<(usize, Bits)> {
    (0..t.ncols())
        .filter(|a| !o_comp.contains(a))
        .map(|a| (a, t.col(a)))
        .collect()
}
