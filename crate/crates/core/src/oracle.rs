//! Exact statevector simulation of adaptive measurement patterns.
//!
//! Basis index bit `q` is the computational value of qubit `q`. A measured
//! outcome `s = 0` corresponds to eigenvalue `+1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::gf2::Bits;
use crate::processing::ProcessingRelations;
use crate::stabilizer::{Axis, GraphSpec, Tableau};
use crate::temporal;
use crate::transforms::{self, InvarianceViolation};

/// Default qubit cap; override with `MBQC_MAX_QUBITS`.
pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Branches with squared norm below this are treated as impossible.
const PRUNE: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{n} qubits exceeds the simulator cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("basis choice at qubit {qubit} depends on qubit {depends_on}, which is not measured earlier")]
    OrderViolation { qubit: usize, depends_on: usize },
    #[error("temporal relation has a cycle; use post-selection")]
    NeedsPostSelection,
    #[error("post-selection discards every branch")]
    ZeroSuccess,
    #[error("candidate bit is invariant under the stabilizer group")]
    InvariantBit,
    #[error("generator phases are inconsistent")]
    PhaseInconsistent,
    #[error("gauge vector has length {got}, expected {expected}")]
    GaugeLength { expected: usize, got: usize },
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error(transparent)]
    Invariance(#[from] InvarianceViolation),
}

pub fn max_qubits() -> usize {
    std::env::var("MBQC_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

fn check_size(n: usize) -> Result<(), OracleError> {
    let cap = max_qubits();
    if n > cap {
        return Err(OracleError::TooLarge { n, cap });
    }
    Ok(())
}

pub type StateVector = Vec<Complex64>;

/// `CZ_E |+>^n`.
pub fn graph_state_vector(g: &GraphSpec) -> Result<StateVector, OracleError> {
    let n = g.n();
    check_size(n)?;
    let amp = (1u64 << n) as f64;
    let amp = 1.0 / amp.sqrt();
    Ok((0..1usize << n)
        .map(|x| {
            let parity = g
                .edges()
                .iter()
                .filter(|&&(a, b)| (x >> a) & 1 == 1 && (x >> b) & 1 == 1)
                .count();
            Complex64::new(if parity % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect())
}

/// Applies a physical Pauli string (`None` = identity) to a state.
fn apply_pauli(state: &[Complex64], paulis: &[Option<Axis>]) -> StateVector {
    let mut flip = 0usize;
    for (q, p) in paulis.iter().enumerate() {
        if matches!(p, Some(Axis::X | Axis::Y)) {
            flip |= 1 << q;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for (x, amp) in state.iter().enumerate() {
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, p) in paulis.iter().enumerate() {
            let bit = (x >> q) & 1 == 1;
            match p {
                Some(Axis::Z) if bit => phase = -phase,
                Some(Axis::Y) => {
                    // Y|0> = i|1>, Y|1> = -i|0>.
                    phase *= if bit { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
                }
                _ => {}
            }
        }
        out[x ^ flip] += phase * amp;
    }
    out
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn generator_paulis(t: &Tableau, row: usize) -> Vec<Option<Axis>> {
    (0..t.n()).map(|q| t.physical_factor(row, q)).collect()
}

/// Joint `+1` eigenstate of the generators, read as physical Paulis with
/// `+1` phases.
pub fn stabilizer_state(t: &Tableau) -> Result<StateVector, OracleError> {
    let n = t.n();
    check_size(n)?;
    let gens: Vec<_> = (0..n).map(|r| generator_paulis(t, r)).collect();
    for x in 0..1usize << n {
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
        psi[x] = Complex64::new(1.0, 0.0);
        for p in &gens {
            let moved = apply_pauli(&psi, p);
            for (a, b) in psi.iter_mut().zip(moved) {
                *a = (*a + b) * 0.5;
            }
        }
        let nrm = norm_sqr(&psi);
        if nrm > 1e-6 {
            let scale = 1.0 / nrm.sqrt();
            psi.iter_mut().for_each(|a| *a *= scale);
            return Ok(psi);
        }
    }
    Err(OracleError::PhaseInconsistent)
}

/// `<ψ|P|ψ>` for a Pauli string such as `"XZI"` (qubit 0 first).
pub fn expectation(state: &[Complex64], pauli: &str) -> f64 {
    let paulis: Vec<Option<Axis>> = pauli
        .chars()
        .map(|c| match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        })
        .collect();
    let moved = apply_pauli(state, &paulis);
    state.iter().zip(&moved).map(|(a, b)| (a.conj() * b).re).sum()
}

type Mat2 = [[Complex64; 2]; 2];

fn pauli_matrix(axis: Axis) -> Mat2 {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Axis::X => [[o, l], [l, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[l, o], [o, -l]],
    }
}

/// Eigenvector of `cos φ σφ + (-1)^q sin φ σsφ` with eigenvalue `(-1)^s`.
fn eigenvector(phi_axis: Axis, sphi_axis: Axis, angle: f64, q: bool, s: bool) -> [Complex64; 2] {
    let a = pauli_matrix(phi_axis);
    let b = pauli_matrix(sphi_axis);
    let sign_q = if q { -1.0 } else { 1.0 };
    let lambda = if s { -1.0 } else { 1.0 };
    let mut proj = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let obs = a[r][c] * angle.cos() + b[r][c] * (sign_q * angle.sin());
            let id = if r == c { 1.0 } else { 0.0 };
            proj[r][c] = (Complex64::new(id, 0.0) + obs * lambda) * 0.5;
        }
    }
    let col0 = proj[0][0].norm_sqr() + proj[1][0].norm_sqr();
    let col1 = proj[0][1].norm_sqr() + proj[1][1].norm_sqr();
    let c = if col0 >= col1 { 0 } else { 1 };
    let nrm = (if c == 0 { col0 } else { col1 }).sqrt();
    [proj[0][c] / nrm, proj[1][c] / nrm]
}

/// Contracts `<e|` on the qubit at bit position `pos`.
fn contract(state: &[Complex64], pos: usize, e: &[Complex64; 2]) -> StateVector {
    let half = state.len() / 2;
    let low_mask = (1usize << pos) - 1;
    let (e0, e1) = (e[0].conj(), e[1].conj());
    (0..half)
        .map(|j| {
            let i0 = ((j >> pos) << (pos + 1)) | (j & low_mask);
            e0 * state[i0] + e1 * state[i0 | (1 << pos)]
        })
        .collect()
}

/// Resource state, measurement angles and processing relations.
#[derive(Debug, Clone)]
pub struct MbqcProgram {
    pub tableau: Tableau,
    pub angles: Vec<f64>,
    pub relations: ProcessingRelations,
}

impl MbqcProgram {
    /// Requires the basis-choice relation to be invariant under the
    /// stabilizer group. The output relation is not checked, so that
    /// deliberately broken outputs can be studied.
    pub fn new(tableau: Tableau, angles: Vec<f64>, relations: ProcessingRelations) -> Result<Self, OracleError> {
        let n = tableau.n();
        if angles.len() != n {
            return Err(OracleError::InvalidProgram(format!("{} angles for {n} qubits", angles.len())));
        }
        if relations.n() != n {
            return Err(OracleError::InvalidProgram(format!(
                "relations on {} qubits for a {n}-qubit state",
                relations.n()
            )));
        }
        relations
            .check_shapes()
            .map_err(|e| OracleError::InvalidProgram(e.to_string()))?;
        transforms::check_basis_invariance(&tableau, &relations)?;
        Ok(Self {
            tableau,
            angles,
            relations,
        })
    }

    pub fn n(&self) -> usize {
        self.tableau.n()
    }

    pub fn gauge_len(&self) -> usize {
        self.relations.pair.i_gauge.len()
    }
}

/// One leaf of the outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub s: Bits,
    /// Basis-choice bits actually used.
    pub q: Bits,
    /// Born probability given the basis choices used.
    pub prob: f64,
    /// Probability including the `1/2` factor of every guessed basis choice.
    pub weight: f64,
    /// Whether every guessed basis choice agrees with `q = T s + H g`.
    pub consistent: bool,
}

struct Walk<'a> {
    prog: &'a MbqcProgram,
    g: &'a Bits,
    order: &'a [usize],
    guessed: Vec<bool>,
    leaves: Vec<Branch>,
}

impl Walk<'_> {
    fn descend(&mut self, state: StateVector, alive: Vec<usize>, depth: usize, s: Bits, q: Bits, weight: f64) {
        if depth == self.order.len() {
            let prob = norm_sqr(&state);
            let recomputed = self.prog.relations.basis_choice(&s, self.g);
            let consistent = (0..s.len()).all(|a| !self.guessed[a] || recomputed.get(a) == q.get(a));
            self.leaves.push(Branch {
                s,
                q,
                prob,
                weight: prob * weight,
                consistent,
            });
            return;
        }
        let a = self.order[depth];
        let rel = &self.prog.relations;
        let options: Vec<(bool, f64)> = if self.guessed[a] {
            vec![(false, 0.5), (true, 0.5)]
        } else {
            let qa = rel.t.row(a).dot(&s) ^ rel.h.row(a).dot(self.g);
            vec![(qa, 1.0)]
        };
        let pos = alive.iter().position(|&x| x == a).expect("qubit not yet measured");
        let mut rest = alive.clone();
        rest.remove(pos);
        let frame = self.prog.tableau.frames()[a];
        for (qa, w) in options {
            for sa in [false, true] {
                let e = eigenvector(frame.phi_axis(), frame.sphi_axis(), self.prog.angles[a], qa, sa);
                let next = contract(&state, pos, &e);
                if norm_sqr(&next) < PRUNE {
                    continue;
                }
                let mut s2 = s.clone();
                s2.set(a, sa);
                let mut q2 = q.clone();
                q2.set(a, qa);
                self.descend(next, rest.clone(), depth + 1, s2, q2, weight * w);
            }
        }
    }
}

fn check_gauge(prog: &MbqcProgram, g: &Bits) -> Result<(), OracleError> {
    if g.len() != prog.gauge_len() {
        return Err(OracleError::GaugeLength {
            expected: prog.gauge_len(),
            got: g.len(),
        });
    }
    Ok(())
}

fn check_order(prog: &MbqcProgram, order: &[usize]) -> Result<(), OracleError> {
    let n = prog.n();
    let mut seen = vec![false; n];
    for &a in order {
        if a >= n || seen[a] {
            return Err(OracleError::InvalidProgram("order is not a permutation".into()));
        }
        seen[a] = true;
    }
    if order.len() != n {
        return Err(OracleError::InvalidProgram("order is not a permutation".into()));
    }
    Ok(())
}

/// Every leaf of the outcome tree for a given measurement order; basis
/// choices that are not yet determined at measurement time are guessed.
pub fn branches(prog: &MbqcProgram, g: &Bits, order: &[usize], guessed: &[usize]) -> Result<Vec<Branch>, OracleError> {
    let n = prog.n();
    check_size(n)?;
    check_gauge(prog, g)?;
    check_order(prog, order)?;
    let mut guess_mask = vec![false; n];
    for &a in guessed {
        guess_mask[a] = true;
    }
    let mut pos = vec![0; n];
    for (i, &a) in order.iter().enumerate() {
        pos[a] = i;
    }
    for &a in order {
        if guess_mask[a] {
            continue;
        }
        if let Some(b) = prog.relations.t.row(a).ones().find(|&b| pos[b] >= pos[a]) {
            return Err(OracleError::OrderViolation { qubit: a, depends_on: b });
        }
    }
    let state = stabilizer_state(&prog.tableau)?;
    let mut walk = Walk {
        prog,
        g,
        order,
        guessed: guess_mask,
        leaves: Vec::new(),
    };
    walk.descend(state, (0..n).collect(), 0, Bits::zeros(n), Bits::zeros(n), 1.0);
    Ok(walk.leaves)
}

/// Exact distribution of bit strings, keyed `"o_1 o_2 ..."` without spaces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    pub probs: BTreeMap<String, f64>,
}

impl OutcomeDistribution {
    fn add(&mut self, key: String, p: f64) {
        *self.probs.entry(key).or_insert(0.0) += p;
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn prob(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn normalized(&self) -> OutcomeDistribution {
        let t = self.total();
        OutcomeDistribution {
            probs: self.probs.iter().map(|(k, v)| (k.clone(), v / t)).collect(),
        }
    }

    /// Total-variation distance.
    pub fn distance(&self, other: &OutcomeDistribution) -> f64 {
        let keys: std::collections::BTreeSet<&String> = self.probs.keys().chain(other.probs.keys()).collect();
        0.5 * keys
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }
}

pub fn bit_key(b: &Bits) -> String {
    (0..b.len()).map(|i| if b.get(i) { '1' } else { '0' }).collect()
}

fn default_order(prog: &MbqcProgram) -> Result<Vec<usize>, OracleError> {
    temporal::closure(&prog.relations.t)
        .linear_extension()
        .ok_or(OracleError::NeedsPostSelection)
}

pub fn run_exact(prog: &MbqcProgram, g: &Bits) -> Result<OutcomeDistribution, OracleError> {
    run_exact_with_order(prog, g, &default_order(prog)?)
}

pub fn run_exact_with_order(prog: &MbqcProgram, g: &Bits, order: &[usize]) -> Result<OutcomeDistribution, OracleError> {
    let mut dist = OutcomeDistribution::default();
    for b in branches(prog, g, order, &[])? {
        dist.add(bit_key(&prog.relations.output(&b.s, g)), b.prob);
    }
    Ok(dist)
}

/// All gauge vectors of length `k`.
pub fn all_gauges(k: usize) -> impl Iterator<Item = Bits> {
    (0u64..1 << k).map(move |x| Bits::from_u64(k, x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminismReport {
    /// Largest total-variation distance between the output distribution
    /// conditioned on the non-output outcomes and the marginal one.
    pub max_deviation: f64,
    pub deterministic: bool,
}

pub const DETERMINISM_TOLERANCE: f64 = 1e-10;

pub fn verify_determinism(prog: &MbqcProgram) -> Result<DeterminismReport, OracleError> {
    let order = default_order(prog)?;
    let not_comp = prog.relations.pair.comp_complement(prog.n());
    let mut worst: f64 = 0.0;
    for g in all_gauges(prog.gauge_len()) {
        let leaves = branches(prog, &g, &order, &[])?;
        let mut marginal = OutcomeDistribution::default();
        let mut conditional: BTreeMap<String, OutcomeDistribution> = BTreeMap::new();
        for b in &leaves {
            let o = bit_key(&prog.relations.output(&b.s, &g));
            marginal.add(o.clone(), b.prob);
            conditional
                .entry(bit_key(&b.s.select(&not_comp)))
                .or_default()
                .add(o, b.prob);
        }
        let marginal = marginal.normalized();
        for cond in conditional.values() {
            if cond.total() > 1e-12 {
                worst = worst.max(cond.normalized().distance(&marginal));
            }
        }
    }
    Ok(DeterminismReport {
        max_deviation: worst,
        deterministic: worst < DETERMINISM_TOLERANCE,
    })
}

/// Probability that `z·s + r·g = 0`, averaged over all gauge vectors, for a
/// bit that some stabilizer element flips without compensation.
pub fn randomness_check(prog: &MbqcProgram, z: &Bits, r: &Bits) -> Result<f64, OracleError> {
    let n = prog.n();
    let k = prog.gauge_len();
    if z.len() != n || r.len() != k {
        return Err(OracleError::InvalidProgram(format!(
            "candidate bit has lengths ({}, {}), expected ({n}, {k})",
            z.len(),
            r.len()
        )));
    }
    let invariant = (0..n).all(|row| {
        let act = transforms::gauge_action(&prog.tableau, &prog.relations.pair, &[row]);
        !(z.dot(&act.delta_s) ^ r.dot(&act.delta_g))
    });
    if invariant {
        return Err(OracleError::InvariantBit);
    }
    let order = default_order(prog)?;
    let mut total = 0.0;
    let gauges: Vec<Bits> = all_gauges(k).collect();
    for g in &gauges {
        let p0: f64 = branches(prog, g, &order, &[])?
            .iter()
            .filter(|b| !(z.dot(&b.s) ^ r.dot(g)))
            .map(|b| b.prob)
            .sum();
        total += p0;
    }
    Ok(total / gauges.len() as f64)
}

/// Measurement order for programs with cycles: strongly connected components
/// in topological order, ascending within a component. Also returns the
/// qubits whose basis choice must be guessed.
pub fn postselection_schedule(t: &crate::gf2::BitMat) -> (Vec<usize>, Vec<usize>) {
    let n = t.nrows();
    let c = temporal::transitive_closure(t);
    let same = |a: usize, b: usize| a == b || (c.get(a, b) && c.get(b, a));
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if comp[a] == usize::MAX {
            let members: Vec<usize> = (a..n).filter(|&b| same(a, b)).collect();
            for &b in &members {
                comp[b] = comps.len();
            }
            comps.push(members);
        }
    }
    // Kahn's algorithm on the condensation, smallest component first.
    let k = comps.len();
    let mut preds = vec![std::collections::BTreeSet::new(); k];
    for b in 0..n {
        for a in t.row(b).ones() {
            if comp[a] != comp[b] {
                preds[comp[b]].insert(comp[a]);
            }
        }
    }
    let mut done = vec![false; k];
    let mut order = Vec::with_capacity(n);
    for _ in 0..k {
        let next = (0..k)
            .find(|&x| !done[x] && preds[x].iter().all(|&p| done[p]))
            .expect("condensation is acyclic");
        done[next] = true;
        order.extend(&comps[next]);
    }
    let mut pos = vec![0; n];
    for (i, &a) in order.iter().enumerate() {
        pos[a] = i;
    }
    let guessed = (0..n)
        .filter(|&a| t.row(a).ones().any(|b| pos[b] >= pos[a]))
        .collect();
    (order, guessed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostSelected {
    /// Renormalized over kept branches.
    pub distribution: OutcomeDistribution,
    pub success_prob: f64,
}

pub fn run_postselected(prog: &MbqcProgram, g: &Bits) -> Result<PostSelected, OracleError> {
    let (order, guessed) = postselection_schedule(&prog.relations.t);
    let mut dist = OutcomeDistribution::default();
    let mut success = 0.0;
    for b in branches(prog, g, &order, &guessed)? {
        if b.consistent {
            success += b.weight;
            dist.add(bit_key(&prog.relations.output(&b.s, g)), b.weight);
        }
    }
    if success < PRUNE {
        return Err(OracleError::ZeroSuccess);
    }
    Ok(PostSelected {
        distribution: dist.normalized(),
        success_prob: success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processing::{relations_for_pair, ExtremalPair};
    use crate::stabilizer::{graph_state_tableau, Frame};

    fn cluster_program(angles: Vec<f64>) -> MbqcProgram {
        let t = graph_state_tableau(&GraphSpec::path(3), &[Frame::XY; 3]).unwrap();
        let rel = relations_for_pair(&t, &ExtremalPair::new(vec![0], vec![2])).unwrap();
        MbqcProgram::new(t, angles, rel).unwrap()
    }

    #[test]
    fn states_are_stabilized() {
        let g = GraphSpec::path(3);
        let psi = graph_state_vector(&g).unwrap();
        for k in ["XZI", "ZXZ", "IZX"] {
            assert!((expectation(&psi, k) - 1.0).abs() < 1e-12);
        }
        let t = graph_state_tableau(&g, &[Frame::XY; 3]).unwrap();
        let phi = stabilizer_state(&t).unwrap();
        let overlap: Complex64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let ghz = Tableau::from_paulis(&["ZIZ", "IZZ", "XXX"], vec![Frame::XY; 3]).unwrap();
        let psi = stabilizer_state(&ghz).unwrap();
        for k in ["ZIZ", "IZZ", "XXX"] {
            assert!((expectation(&psi, k) - 1.0).abs() < 1e-12);
        }
        let plus = graph_state_vector(&GraphSpec::new(1, []).unwrap()).unwrap();
        assert!((expectation(&plus, "X") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_angles_are_deterministic() {
        let prog = cluster_program(vec![0.0; 3]);
        for g in all_gauges(1) {
            let d = run_exact(&prog, &g).unwrap();
            assert!((d.prob("0") - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_qubit_overlap() {
        let t = graph_state_tableau(&GraphSpec::new(1, []).unwrap(), &[Frame::XY]).unwrap();
        let rel = relations_for_pair(&t, &ExtremalPair::new(vec![0], vec![0])).unwrap();
        let phi = 0.7;
        let prog = MbqcProgram::new(t, vec![phi], rel).unwrap();
        // o = s with g = 0 gives basis cos φ X + sin φ Y.
        let d = run_exact(&prog, &Bits::zeros(1)).unwrap();
        let expected = (1.0 + phi.cos()) / 2.0;
        assert!((d.prob("0") - expected).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let g = GraphSpec::path(11);
        assert!(matches!(graph_state_vector(&g), Err(OracleError::TooLarge { n: 11, .. })));
    }

    #[test]
    fn postselection_on_partial_order_keeps_everything() {
        let prog = cluster_program(vec![0.3, -0.4, 1.1]);
        let g = Bits::zeros(1);
        let ps = run_postselected(&prog, &g).unwrap();
        assert!((ps.success_prob - 1.0).abs() < 1e-12);
        assert!(ps.distribution.distance(&run_exact(&prog, &g).unwrap()) < 1e-12);
    }
}
