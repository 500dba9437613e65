//! Gauge transformations, measurement-plane flips and removal of
//! self-loops in the temporal relation.

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{BitMat, Bits};
use crate::processing::{self, ExtremalPair, ProcessingError, ProcessingRelations};
use crate::stabilizer::Tableau;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("qubit {0} influences its own basis choice; use CTC removal")]
    SelfLoop(usize),
    #[error("qubit {0} has no self-loop; use a plane flip")]
    NoSelfLoop(usize),
    #[error("qubit {0} already belongs to the pair")]
    PairConflict(usize),
    #[error("influence matrix has a nonzero diagonal")]
    NonzeroDiagonal,
    #[error("S-block is singular for this pair")]
    SingularS2,
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
    #[error(transparent)]
    Processing(#[from] ProcessingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// `q = T s + H g`
    BasisChoice,
    /// `o = Z s + R g`
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("generator {row} violates invariance of the {relation:?} relation")]
pub struct InvarianceViolation {
    pub row: usize,
    pub relation: RelationKind,
}

/// Shift of `(s, q, g)` induced by multiplying a stabilizer element into the
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeAction {
    pub delta_s: Bits,
    pub delta_q: Bits,
    pub delta_g: Bits,
}

pub fn gauge_action(t: &Tableau, pair: &ExtremalPair, rows: &[usize]) -> GaugeAction {
    let (w, v) = t.row_product(rows);
    GaugeAction {
        delta_g: w.select(&pair.i_gauge),
        delta_s: v,
        delta_q: w,
    }
}

fn check_generator(
    t: &Tableau,
    rel: &ProcessingRelations,
    row: usize,
    track_gauge: bool,
) -> Result<(), InvarianceViolation> {
    let mut act = gauge_action(t, &rel.pair, &[row]);
    if !track_gauge {
        act.delta_g = Bits::zeros(act.delta_g.len());
    }
    if rel.basis_choice(&act.delta_s, &act.delta_g) != act.delta_q {
        return Err(InvarianceViolation {
            row,
            relation: RelationKind::BasisChoice,
        });
    }
    if !rel.output(&act.delta_s, &act.delta_g).is_zero() {
        return Err(InvarianceViolation {
            row,
            relation: RelationKind::Output,
        });
    }
    Ok(())
}

/// Invariance of both relations under every generator; by linearity this
/// covers the whole stabilizer group.
pub fn check_invariance(t: &Tableau, rel: &ProcessingRelations) -> Result<(), InvarianceViolation> {
    (0..t.n()).try_for_each(|row| check_generator(t, rel, row, true))
}

/// As [`check_invariance`], but with the gauge shift suppressed for the listed
/// generators.
pub fn check_invariance_ungauged(
    t: &Tableau,
    rel: &ProcessingRelations,
    ungauged: &[usize],
) -> Result<(), InvarianceViolation> {
    (0..t.n()).try_for_each(|row| check_generator(t, rel, row, !ungauged.contains(&row)))
}

/// Only the basis-choice relation, for every generator.
pub fn check_basis_invariance(t: &Tableau, rel: &ProcessingRelations) -> Result<(), InvarianceViolation> {
    for row in 0..t.n() {
        let act = gauge_action(t, &rel.pair, &[row]);
        if rel.basis_choice(&act.delta_s, &act.delta_g) != act.delta_q {
            return Err(InvarianceViolation {
                row,
                relation: RelationKind::BasisChoice,
            });
        }
    }
    Ok(())
}

/// Solves the invariance conditions directly for the relations of a pair.
pub fn relations_from_invariance(t: &Tableau, pair: &ExtremalPair) -> Result<ProcessingRelations, TransformError> {
    let n = t.n();
    if let Some(&q) = pair.i_gauge.iter().chain(&pair.o_comp).find(|&&q| q >= n) {
        return Err(TransformError::OutOfRange(q));
    }
    if !pair.is_extremal() {
        return Err(ProcessingError::NotExtremal {
            i_gauge: pair.i_gauge.len(),
            o_comp: pair.o_comp.len(),
        }
        .into());
    }
    let k = pair.i_gauge.len();
    let not_gauge = pair.gauge_complement(n);
    let not_comp = pair.comp_complement(n);

    // Columns of Φᵀ and Sᵀ are generators; W mixes generators so that the
    // I_gauge rows of Φᵀ become (I | 0).
    let a_t = t.phi().select_cols(&pair.i_gauge);
    let rr = a_t.rref();
    if rr.rank() < k {
        return Err(TransformError::SingularS2);
    }
    let w = rr.transform.transpose();
    let phi_w = t.phi().transpose().mul(&w);
    let s_w = t.s().transpose().mul(&w);

    let head: Vec<usize> = (0..k).collect();
    let tail: Vec<usize> = (k..n).collect();
    let phi1 = phi_w.select(&not_gauge, &head);
    let phi2 = phi_w.select(&not_gauge, &tail);
    let s1 = s_w.select(&not_comp, &head);
    let s2 = s_w.select(&not_comp, &tail);
    let p1 = s_w.select(&pair.o_comp, &head);
    let p2 = s_w.select(&pair.o_comp, &tail);

    let s2_inv = s2.inverse().map_err(|_| TransformError::SingularS2)?;
    let tt_t = phi2.mul(&s2_inv);
    let tt_h = phi1.add(&tt_t.mul(&s1));
    let tt_z = p2.mul(&s2_inv);
    let tt_r = tt_z.mul(&s1).add(&p1);
    Ok(ProcessingRelations::from_blocks(pair, n, &tt_t, &tt_h, &tt_z, &tt_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipCase {
    Regular,
    CtcRemoval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameChange {
    /// `σφ ↔ σsφ`
    SwapPhiSphi,
    /// `σs ↔ σsφ`
    SwapSSphi,
}

/// The extra output bit produced by CTC removal: `z·s' + r·g'` in the new
/// variables, which vanishes on every post-selected branch of the original
/// program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagBit {
    pub qubit: usize,
    pub z: Bits,
    pub r: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipReport {
    pub site: usize,
    pub case: FlipCase,
    pub relations: ProcessingRelations,
    pub frame_changes: Vec<(usize, FrameChange)>,
    pub flag_bit: Option<FlagBit>,
    /// Flipped tableau, present when the relations were re-derived from it.
    pub tableau: Option<Tableau>,
    /// Qubit with neither incoming nor outgoing adaption information.
    pub horizon: Option<usize>,
}

/// New measurement angle at a flipped site. The rule is independent of the
/// basis-choice bit: the flipped observable then equals `(-1)^q` times the
/// original one, as the relation update assumes.
pub fn flipped_angle(phi: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - phi
}

/// Plane flip at `a` acting on the relations.
pub fn flip_plane(rel: &ProcessingRelations, a: usize) -> Result<FlipReport, TransformError> {
    let n = rel.n();
    if a >= n {
        return Err(TransformError::OutOfRange(a));
    }
    if rel.t.get(a, a) {
        return Err(TransformError::SelfLoop(a));
    }
    let t_col = rel.t.col(a);
    let t_row = rel.t.row(a);
    let h_row = rel.h.row(a);
    let z_col = rel.z.col(a);
    let relations = ProcessingRelations {
        pair: rel.pair.clone(),
        t: rel.t.add(&BitMat::outer(&t_col, t_row)),
        h: rel.h.add(&BitMat::outer(&t_col, h_row)),
        z: rel.z.add(&BitMat::outer(&z_col, t_row)),
        r: rel.r.add(&BitMat::outer(&z_col, h_row)),
    };
    Ok(FlipReport {
        site: a,
        case: FlipCase::Regular,
        relations,
        frame_changes: vec![(a, FrameChange::SwapPhiSphi)],
        flag_bit: None,
        tableau: None,
        horizon: None,
    })
}

/// Influence matrix of the extended computation, indexed `I' | Ω | O'` with
/// `|I'| = k`, `|O'| = m`.
pub fn extended_influence(rel: &ProcessingRelations) -> BitMat {
    let n = rel.n();
    let k = rel.h.ncols();
    let m = rel.z.nrows();
    let mut ext = BitMat::zeros(k + n + m, k + n + m);
    for b in 0..n {
        for j in rel.h.row(b).ones() {
            ext.set(k + b, j, true);
        }
        for a in rel.t.row(b).ones() {
            ext.set(k + b, k + a, true);
        }
    }
    for c in 0..m {
        for j in rel.r.row(c).ones() {
            ext.set(k + n + c, j, true);
        }
        for a in rel.z.row(c).ones() {
            ext.set(k + n + c, k + a, true);
        }
    }
    ext
}

/// Row and column orders presenting the extended matrix in block layout:
/// rows `I' | I_gauge | (I_gauge)^c | O'`, columns `I' | (O_comp)^c | O_comp | O'`.
pub fn extended_layout(rel: &ProcessingRelations) -> (Vec<usize>, Vec<usize>) {
    let n = rel.n();
    let k = rel.pair.i_gauge.len();
    let m = rel.pair.o_comp.len();
    let mut rows: Vec<usize> = (0..k).collect();
    rows.extend(rel.pair.i_gauge.iter().map(|&q| k + q));
    rows.extend(rel.pair.gauge_complement(n).into_iter().map(|q| k + q));
    rows.extend(k + n..k + n + m);
    let mut cols: Vec<usize> = (0..k).collect();
    cols.extend(rel.pair.comp_complement(n).into_iter().map(|q| k + q));
    cols.extend(rel.pair.o_comp.iter().map(|&q| k + q));
    cols.extend(k + n..k + n + m);
    (rows, cols)
}

/// `M + M e_x e_xᵀ M`.
pub fn flip_rule(m: &BitMat, x: usize) -> BitMat {
    m.add(&BitMat::outer(&m.col(x), m.row(x)))
}

/// Reads `(T, H, Z, R)` back out of an extended matrix.
pub fn split_extended(ext: &BitMat, pair: &ExtremalPair, n: usize) -> ProcessingRelations {
    let k = pair.i_gauge.len();
    let m = pair.o_comp.len();
    let gauge: Vec<usize> = (0..k).collect();
    let omega: Vec<usize> = (k..k + n).collect();
    let outs: Vec<usize> = (k + n..k + n + m).collect();
    ProcessingRelations {
        pair: pair.clone(),
        t: ext.select(&omega, &omega),
        h: ext.select(&omega, &gauge),
        z: ext.select(&outs, &omega),
        r: ext.select(&outs, &gauge),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedFlip {
    pub t: BitMat,
    /// Qubits in `fc(i) ∩ bc(i)` whose `σs` and `σsφ` roles are exchanged.
    pub plane_changes: Vec<usize>,
}

/// Local-complementation-like flip that keeps the diagonal zero.
pub fn modified_flip(t: &BitMat, i: usize) -> Result<ModifiedFlip, TransformError> {
    if i >= t.nrows() {
        return Err(TransformError::OutOfRange(i));
    }
    if !t.diagonal().is_zero() {
        return Err(TransformError::NonzeroDiagonal);
    }
    let col = t.col(i);
    let row = t.row(i).clone();
    let mut out = t.add(&BitMat::outer(&col, &row));
    let mut plane_changes = Vec::new();
    for j in 0..t.nrows() {
        if col.get(j) && row.get(j) {
            out.flip(j, j);
            plane_changes.push(j);
        }
    }
    Ok(ModifiedFlip { t: out, plane_changes })
}

/// Whether two influence matrices generate the same temporal relation.
pub fn same_relation(t1: &BitMat, t2: &BitMat) -> bool {
    crate::temporal::transitive_closure(t1) == crate::temporal::transitive_closure(t2)
}

/// Removes the self-loop at `i` by flipping its plane and promoting it to
/// both gauge input and computational output.
pub fn remove_ctc1(t: &Tableau, rel: &ProcessingRelations, i: usize) -> Result<FlipReport, TransformError> {
    let n = rel.n();
    if i >= n {
        return Err(TransformError::OutOfRange(i));
    }
    if !rel.t.get(i, i) {
        return Err(TransformError::NoSelfLoop(i));
    }
    if rel.pair.gauge_index(i).is_some() || rel.pair.comp_index(i).is_some() {
        return Err(TransformError::PairConflict(i));
    }
    let flipped = t.flip_frame(i);
    let mut i_gauge = rel.pair.i_gauge.clone();
    i_gauge.push(i);
    let mut o_comp = rel.pair.o_comp.clone();
    o_comp.push(i);
    let pair = ExtremalPair::new(i_gauge, o_comp);
    let relations = processing::relations_for_pair(&flipped, &pair)?;
    let c = pair.comp_index(i).expect("i was added to o_comp");
    let flag_bit = FlagBit {
        qubit: i,
        z: relations.z.row(c).clone(),
        r: relations.r.row(c).clone(),
    };
    Ok(FlipReport {
        site: i,
        case: FlipCase::CtcRemoval,
        relations,
        frame_changes: vec![(i, FrameChange::SwapPhiSphi)],
        flag_bit: Some(flag_bit),
        tableau: Some(flipped),
        horizon: Some(i),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processing::relations_for_pair;
    use crate::stabilizer::{graph_state_tableau, Frame, GraphSpec};

    fn cluster3() -> Tableau {
        graph_state_tableau(&GraphSpec::path(3), &[Frame::XY; 3]).unwrap()
    }

    fn pair13() -> ExtremalPair {
        ExtremalPair::new(vec![0], vec![2])
    }

    #[test]
    fn gauge_action_of_cluster_generators() {
        let t = cluster3();
        let a = gauge_action(&t, &pair13(), &[0]);
        assert_eq!(a.delta_q, Bits::from_u8(&[1, 0, 0]));
        assert_eq!(a.delta_s, Bits::from_u8(&[0, 1, 0]));
        assert_eq!(a.delta_g, Bits::from_u8(&[1]));
        let a = gauge_action(&t, &pair13(), &[1]);
        assert_eq!(a.delta_q, Bits::from_u8(&[0, 1, 0]));
        assert_eq!(a.delta_s, Bits::from_u8(&[1, 0, 1]));
        assert_eq!(a.delta_g, Bits::from_u8(&[0]));
        let a = gauge_action(&t, &pair13(), &[]);
        assert!(a.delta_q.is_zero() && a.delta_s.is_zero() && a.delta_g.is_zero());
    }

    #[test]
    fn invariance_and_ungauged_violation() {
        let t = cluster3();
        let rel = relations_for_pair(&t, &pair13()).unwrap();
        check_invariance(&t, &rel).unwrap();
        let err = check_invariance_ungauged(&t, &rel, &[0]).unwrap_err();
        assert_eq!(err.row, 0);
    }

    #[test]
    fn closed_form_matches_normal_form() {
        let t = cluster3();
        let a = relations_from_invariance(&t, &pair13()).unwrap();
        assert_eq!(a, relations_for_pair(&t, &pair13()).unwrap());
        assert_eq!(
            relations_from_invariance(&t, &ExtremalPair::new(vec![1], vec![1])),
            Err(TransformError::SingularS2)
        );
    }

    #[test]
    fn plane_flip_on_cluster() {
        let rel = relations_for_pair(&cluster3(), &pair13()).unwrap();
        let f = flip_plane(&rel, 1).unwrap();
        assert_eq!(
            f.relations.t,
            BitMat::from_u8_rows(&[[0, 0, 0], [1, 0, 0], [1, 1, 0]])
        );
        let back = flip_plane(&f.relations, 1).unwrap();
        assert_eq!(back.relations, rel);
        assert!(same_relation(&rel.t, &f.relations.t));
        let m = modified_flip(&rel.t, 1).unwrap();
        assert_eq!(m.t, f.relations.t);
        assert!(m.plane_changes.is_empty());
    }

    #[test]
    fn extended_matrix_flip() {
        let rel = relations_for_pair(&cluster3(), &pair13()).unwrap();
        let ext = extended_influence(&rel);
        assert_eq!(ext.nrows(), 5);
        let flipped = split_extended(&flip_rule(&ext, 1 + 1), &rel.pair, 3);
        assert_eq!(flipped, flip_plane(&rel, 1).unwrap().relations);
        let (rows, cols) = extended_layout(&rel);
        let laid = ext.select(&rows, &cols);
        // H block: rows (I_gauge)^c, column I'.
        assert_eq!(laid.select(&[2, 3], &[0]), BitMat::from_u8_rows(&[[0], [1]]));
        assert_eq!(laid.select(&[2, 3], &[1, 2]), BitMat::identity(2));
        assert_eq!(laid.select(&[4], &[1, 2]), BitMat::from_u8_rows(&[[1, 0]]));
    }

    #[test]
    fn modified_flip_on_triangle() {
        let tri = GraphSpec::cycle(3).adjacency();
        let m = modified_flip(&tri, 0).unwrap();
        assert_eq!(m.t, BitMat::from_u8_rows(&[[0, 1, 1], [1, 0, 0], [1, 0, 0]]));
        assert_eq!(m.plane_changes, vec![1, 2]);
        assert_eq!(modified_flip(&BitMat::zeros(2, 2), 0).unwrap().t, BitMat::zeros(2, 2));
        assert_eq!(
            modified_flip(&BitMat::identity(2), 0),
            Err(TransformError::NonzeroDiagonal)
        );
    }

    #[test]
    fn self_loop_guards() {
        let t = Tableau::new(
            BitMat::from_u8_rows(&[[1, 1], [1, 0]]),
            BitMat::from_u8_rows(&[[1, 0], [0, 1]]),
            vec![Frame::XY; 2],
        )
        .unwrap();
        let rel = relations_for_pair(&t, &ExtremalPair::new(vec![], vec![])).unwrap();
        assert!(rel.t.get(0, 0));
        assert_eq!(flip_plane(&rel, 0).unwrap_err(), TransformError::SelfLoop(0));
        let rep = remove_ctc1(&t, &rel, 0).unwrap();
        assert_eq!(rep.relations.pair, ExtremalPair::new(vec![0], vec![0]));
        assert!(!rep.relations.t.get(0, 0));
        assert!(rep.relations.t.col(0).is_zero() && rep.relations.t.row(0).is_zero());
        let cluster = relations_for_pair(&cluster3(), &pair13()).unwrap();
        assert_eq!(
            remove_ctc1(&cluster3(), &cluster, 1).unwrap_err(),
            TransformError::NoSelfLoop(1)
        );
    }
}
