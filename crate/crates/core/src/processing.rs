//! Extremal pairs, the stabilizer normal form, and the classical processing
//! relations `q = T s + H g`, `o = Z s + R g`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMat, Bits, ColumnBases, Gf2Error};
use crate::stabilizer::{Frame, StabilizerError, Tableau};
use crate::temporal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcessingError {
    #[error("pair does not correspond to a column basis of the generator matrix")]
    InvalidPair,
    #[error("pair is not extremal: |i_gauge| = {i_gauge}, |o_comp| = {o_comp}")]
    NotExtremal { i_gauge: usize, o_comp: usize },
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
    #[error("qubit {0} outside the input set can be gauged individually")]
    GaugeableOutsideInput(usize),
    #[error("recovered pair does not reproduce the influence matrix")]
    Inconsistent,
    #[error("rank H = {h} differs from rank Z = {z}")]
    RankMismatch { h: usize, z: usize },
    #[error("Z restricted to o_comp cannot be brought to the identity")]
    NotOptimalOutput,
    #[error("H restricted to i_gauge cannot be brought to the identity")]
    GaugeNotNormalizable,
    #[error("malformed relations: {0}")]
    Shape(String),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

/// The sets `(I_gauge, O_comp)`; both are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtremalPair {
    pub i_gauge: Vec<usize>,
    pub o_comp: Vec<usize>,
}

impl ExtremalPair {
    pub fn new(mut i_gauge: Vec<usize>, mut o_comp: Vec<usize>) -> Self {
        i_gauge.sort_unstable();
        i_gauge.dedup();
        o_comp.sort_unstable();
        o_comp.dedup();
        Self { i_gauge, o_comp }
    }

    pub fn is_extremal(&self) -> bool {
        self.i_gauge.len() == self.o_comp.len()
    }

    pub fn gauge_complement(&self, n: usize) -> Vec<usize> {
        complement(n, &self.i_gauge)
    }

    pub fn comp_complement(&self, n: usize) -> Vec<usize> {
        complement(n, &self.o_comp)
    }

    /// Position of `q` within `i_gauge`.
    pub fn gauge_index(&self, q: usize) -> Option<usize> {
        self.i_gauge.binary_search(&q).ok()
    }

    pub fn comp_index(&self, q: usize) -> Option<usize> {
        self.o_comp.binary_search(&q).ok()
    }

    fn check(&self, n: usize) -> Result<(), ProcessingError> {
        if let Some(&q) = self.i_gauge.iter().chain(&self.o_comp).find(|&&q| q >= n) {
            return Err(ProcessingError::OutOfRange(q));
        }
        if !self.is_extremal() {
            return Err(ProcessingError::NotExtremal {
                i_gauge: self.i_gauge.len(),
                o_comp: self.o_comp.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| set.binary_search(q).is_err()).collect()
}

/// Full-size processing relations for one pair.
///
/// Shapes: `T` is `n x n`, `H` is `n x k`, `Z` is `m x n`, `R` is `m x k`,
/// with columns of `H`/`R` following `i_gauge` and rows of `Z`/`R`
/// following `o_comp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessingRelations {
    pub pair: ExtremalPair,
    pub t: BitMat,
    pub h: BitMat,
    pub z: BitMat,
    pub r: BitMat,
}

impl ProcessingRelations {
    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// Checks the dimensions of all four matrices against the pair.
    pub fn check_shapes(&self) -> Result<(), ProcessingError> {
        let n = self.t.nrows();
        let k = self.pair.i_gauge.len();
        let m = self.pair.o_comp.len();
        self.pair.check(n)?;
        let shapes = [
            ("T", &self.t, n, n),
            ("H", &self.h, n, k),
            ("Z", &self.z, m, n),
            ("R", &self.r, m, k),
        ];
        for (name, mat, r, c) in shapes {
            if mat.nrows() != r || mat.ncols() != c {
                return Err(ProcessingError::Shape(format!(
                    "{name} is {}x{}, expected {r}x{c}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        Ok(())
    }

    /// `q = T s + H g`.
    pub fn basis_choice(&self, s: &Bits, g: &Bits) -> Bits {
        self.t.mul_vec(s).xor(&self.h.mul_vec(g))
    }

    /// `o = Z s + R g`.
    pub fn output(&self, s: &Bits, g: &Bits) -> Bits {
        self.z.mul_vec(s).xor(&self.r.mul_vec(g))
    }

    pub fn temporal_relation(&self) -> temporal::TemporalRelation {
        temporal::closure(&self.t)
    }
}

/// Block form of a tableau relative to a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub pair: ExtremalPair,
    /// Rows `(I_gauge)^c`, columns `(O_comp)^c`.
    pub tt_t: BitMat,
    /// Rows `(I_gauge)^c`, columns `I_gauge`.
    pub tt_h: BitMat,
    /// Rows `O_comp`, columns `(O_comp)^c`.
    pub tt_z: BitMat,
    /// Rows `O_comp`, columns `I_gauge`.
    pub tt_r: BitMat,
    /// Row-reduced `(Φ || S)`: correction rows for `(O_comp)^c` ascending,
    /// then gauge rows for `I_gauge` ascending.
    pub generators: BitMat,
    /// Qubits in `I_gauge ∩ O_comp` whose gauge operator carries `σsφ` on the
    /// qubit itself.
    pub overlap_flags: Vec<usize>,
}

impl NormalForm {
    pub fn n(&self) -> usize {
        self.generators.nrows()
    }

    /// Reassembles the block pattern as a `Tableau` with the given frames.
    pub fn to_tableau(&self, frames: Vec<Frame>) -> Result<Tableau, StabilizerError> {
        let n = self.n();
        Tableau::from_parts(
            self.generators.select_cols(&(0..n).collect::<Vec<_>>()),
            self.generators.select_cols(&(n..2 * n).collect::<Vec<_>>()),
            frames,
        )
    }
}

/// Row-reduces `(Φ || S)` so that the `S`-columns of `(O_comp)^c` and the
/// `Φ`-columns of `I_gauge` form an identity.
pub fn normal_form(t: &Tableau, pair: &ExtremalPair) -> Result<NormalForm, ProcessingError> {
    let n = t.n();
    pair.check(n)?;
    let g = t.generator_matrix();
    let not_comp = pair.comp_complement(n);
    let not_gauge = pair.gauge_complement(n);
    let basis: Vec<usize> = not_comp
        .iter()
        .map(|&a| n + a)
        .chain(pair.i_gauge.iter().copied())
        .collect();
    let b_inv = g.select_cols(&basis).inverse().map_err(|e| match e {
        Gf2Error::Singular => ProcessingError::InvalidPair,
        other => ProcessingError::Shape(other.to_string()),
    })?;
    let nf = b_inv.mul(&g);

    let corr = |j: usize| j;
    let gauge = |j: usize| not_comp.len() + j;
    let phi_col = |q: usize| q;
    let s_col = |q: usize| n + q;

    let block = |rows: &dyn Fn(usize) -> usize, nrows: usize, cols: &[usize], col_of: &dyn Fn(usize) -> usize| {
        let mut out = BitMat::zeros(cols.len(), nrows);
        for (i, &q) in cols.iter().enumerate() {
            for j in 0..nrows {
                if nf.get(rows(j), col_of(q)) {
                    out.set(i, j, true);
                }
            }
        }
        out
    };
    let k = pair.i_gauge.len();
    let tt_t = block(&corr, not_comp.len(), &not_gauge, &phi_col);
    let tt_z = block(&corr, not_comp.len(), &pair.o_comp, &s_col);
    let tt_h = block(&gauge, k, &not_gauge, &phi_col);
    let tt_r = block(&gauge, k, &pair.o_comp, &s_col);

    let overlap_flags = pair
        .i_gauge
        .iter()
        .enumerate()
        .filter(|&(j, &i)| pair.comp_index(i).is_some() && nf.get(gauge(j), s_col(i)))
        .map(|(_, &i)| i)
        .collect();

    Ok(NormalForm {
        pair: pair.clone(),
        tt_t,
        tt_h,
        tt_z,
        tt_r,
        generators: nf,
        overlap_flags,
    })
}

/// Embeds the normal-form blocks into full-size relations.
pub fn extract_relations(nf: &NormalForm) -> ProcessingRelations {
    ProcessingRelations::from_blocks(&nf.pair, nf.n(), &nf.tt_t, &nf.tt_h, &nf.tt_z, &nf.tt_r)
}

impl ProcessingRelations {
    /// Full-size relations from the blocks `𝚃, 𝙷, 𝚉, 𝚁` of a pair.
    pub fn from_blocks(
        pair: &ExtremalPair,
        n: usize,
        tt_t: &BitMat,
        tt_h: &BitMat,
        tt_z: &BitMat,
        tt_r: &BitMat,
    ) -> ProcessingRelations {
        let k = pair.i_gauge.len();
        let m = pair.o_comp.len();
        let not_comp = pair.comp_complement(n);
        let not_gauge = pair.gauge_complement(n);

        let mut t = BitMat::zeros(n, n);
        let mut h = BitMat::zeros(n, k);
        let mut z = BitMat::zeros(m, n);
        for (bi, &b) in not_gauge.iter().enumerate() {
            for (ai, &a) in not_comp.iter().enumerate() {
                t.set(b, a, tt_t.get(bi, ai));
            }
            for j in 0..k {
                h.set(b, j, tt_h.get(bi, j));
            }
        }
        for (j, &i) in pair.i_gauge.iter().enumerate() {
            h.set(i, j, true);
        }
        for (c, &oc) in pair.o_comp.iter().enumerate() {
            for (ai, &a) in not_comp.iter().enumerate() {
                z.set(c, a, tt_z.get(c, ai));
            }
            z.set(c, oc, true);
        }
        ProcessingRelations {
            pair: pair.clone(),
            t,
            h,
            z,
            r: tt_r.clone(),
        }
    }
}

/// Normal form followed by extraction.
pub fn relations_for_pair(t: &Tableau, pair: &ExtremalPair) -> Result<ProcessingRelations, ProcessingError> {
    Ok(extract_relations(&normal_form(t, pair)?))
}

/// Streams every extremal pair of a tableau together with its relations,
/// in lexicographic order of the underlying column bases.
pub struct PairStream<'a> {
    tableau: &'a Tableau,
    bases: ColumnBases,
    remaining: Option<usize>,
}

impl Iterator for PairStream<'_> {
    type Item = (ExtremalPair, ProcessingRelations);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == Some(0) {
            return None;
        }
        let basis = self.bases.next()?;
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        let pair = pair_from_basis(self.tableau.n(), &basis);
        let rel = relations_for_pair(self.tableau, &pair).expect("column basis yields a valid pair");
        Some((pair, rel))
    }
}

/// Maps a column basis of `(Φ || S)` to its pair.
pub fn pair_from_basis(n: usize, basis: &[usize]) -> ExtremalPair {
    let i_gauge = basis.iter().copied().filter(|&c| c < n).collect();
    let o_comp = (0..n).filter(|a| !basis.contains(&(n + a))).collect();
    ExtremalPair::new(i_gauge, o_comp)
}

pub fn enumerate_pairs(t: &Tableau, limit: Option<usize>) -> PairStream<'_> {
    let bases = t
        .generator_matrix()
        .column_bases()
        .expect("tableau generator matrix has full row rank");
    PairStream {
        tableau: t,
        bases,
        remaining: limit,
    }
}

/// Recovers a pair generating the given influence matrix.
pub fn find_extremal_pair(t: &Tableau, infl: &BitMat) -> Result<ExtremalPair, ProcessingError> {
    let n = t.n();
    if infl.nrows() != n || infl.ncols() != n {
        return Err(ProcessingError::Shape(format!(
            "influence matrix is {}x{} for {n} qubits",
            infl.nrows(),
            infl.ncols()
        )));
    }
    let (inputs, outputs) = temporal::io_sets(infl);
    let not_out = complement(n, &outputs);
    let g = t.generator_matrix();

    // Group elements without σs content on O^c.
    let s_not_out: Vec<usize> = not_out.iter().map(|&a| n + a).collect();
    let w_coeffs = g.select_cols(&s_not_out).transpose().kernel();
    let w: Vec<Bits> = w_coeffs.iter().map(|x| g.transpose().mul_vec(x)).collect();
    let w = BitMat::from_rows(w, 2 * n);

    // Elements of W with no Φ content on I must have no Φ content at all.
    let inputs_phi = w.select_cols(&inputs);
    let w0_coeffs = inputs_phi.transpose().kernel();
    let mut w0_rows = Vec::new();
    for x in &w0_coeffs {
        let elem = w.transpose().mul_vec(x);
        if let Some(q) = (0..n).find(|&q| elem.get(q)) {
            return Err(ProcessingError::GaugeableOutsideInput(q));
        }
        w0_rows.push(elem);
    }
    let w0 = BitMat::from_rows(w0_rows, 2 * n);

    let s_out: Vec<usize> = outputs.iter().map(|&a| n + a).collect();
    let delta_o: Vec<usize> = w0
        .select_cols(&s_out)
        .rref()
        .pivots
        .iter()
        .map(|&p| outputs[p])
        .collect();
    let o_comp: Vec<usize> = outputs.iter().copied().filter(|q| !delta_o.contains(q)).collect();
    let i_gauge: Vec<usize> = inputs_phi.rref().pivots.iter().map(|&p| inputs[p]).collect();

    let pair = ExtremalPair::new(i_gauge, o_comp);
    match relations_for_pair(t, &pair) {
        Ok(rel) if &rel.t == infl => Ok(pair),
        Ok(_) | Err(ProcessingError::InvalidPair | ProcessingError::NotExtremal { .. }) => {
            Err(ProcessingError::Inconsistent)
        }
        Err(e) => Err(e),
    }
}

/// Rebuilds a generator matrix (with `XY` frames) from relations.
pub fn reconstruct_tableau(rel: &ProcessingRelations) -> Result<Tableau, ProcessingError> {
    let n = rel.t.nrows();
    if rel.h.nrows() != n || rel.z.ncols() != n || !rel.t.is_square() {
        return Err(ProcessingError::Shape("inconsistent matrix dimensions".into()));
    }
    let (h_rank, z_rank) = (rel.h.rank(), rel.z.rank());
    if h_rank != z_rank {
        return Err(ProcessingError::RankMismatch { h: h_rank, z: z_rank });
    }
    rel.check_shapes()?;
    let pair = &rel.pair;
    let not_comp = pair.comp_complement(n);
    let not_gauge = pair.gauge_complement(n);

    let l = rel
        .z
        .select_cols(&pair.o_comp)
        .inverse()
        .map_err(|_| ProcessingError::NotOptimalOutput)?;
    let z = l.mul(&rel.z);
    let r = l.mul(&rel.r);
    let lambda = rel
        .h
        .select_rows(&pair.i_gauge)
        .inverse()
        .map_err(|_| ProcessingError::GaugeNotNormalizable)?;
    let h = rel.h.mul(&lambda);
    let r = r.mul(&lambda);

    if let Some(&b) = pair.i_gauge.iter().find(|&&b| !rel.t.row(b).is_zero()) {
        return Err(ProcessingError::Shape(format!("T has a nonzero row at gauge qubit {b}")));
    }
    if let Some(&a) = pair.o_comp.iter().find(|&&a| !rel.t.col(a).is_zero()) {
        return Err(ProcessingError::Shape(format!("T has a nonzero column at output qubit {a}")));
    }

    let mut phi = BitMat::zeros(n, n);
    let mut s = BitMat::zeros(n, n);
    for (row, &a) in not_comp.iter().enumerate() {
        for &b in &not_gauge {
            phi.set(row, b, rel.t.get(b, a));
        }
        s.set(row, a, true);
        for (c, &oc) in pair.o_comp.iter().enumerate() {
            s.set(row, oc, z.get(c, a));
        }
    }
    for (j, _) in pair.i_gauge.iter().enumerate() {
        let row = not_comp.len() + j;
        for b in 0..n {
            phi.set(row, b, h.get(b, j));
        }
        for (c, &oc) in pair.o_comp.iter().enumerate() {
            s.set(row, oc, r.get(c, j));
        }
    }
    Ok(Tableau::new(phi, s, vec![Frame::XY; n])?)
}

/// Checks that two pairs of the same tableau reconstruct the same group.
pub fn pair_invariance_audit(
    t: &Tableau,
    p1: &ExtremalPair,
    p2: &ExtremalPair,
) -> Result<(), ProcessingError> {
    let a = reconstruct_tableau(&relations_for_pair(t, p1)?)?;
    let b = reconstruct_tableau(&relations_for_pair(t, p2)?)?;
    if a.same_group(&b) {
        Ok(())
    } else {
        Err(ProcessingError::Inconsistent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{graph_state_tableau, GraphSpec};

    fn cluster3() -> Tableau {
        graph_state_tableau(&GraphSpec::path(3), &[Frame::XY; 3]).unwrap()
    }

    fn ghz3() -> Tableau {
        Tableau::from_paulis(&["ZIZ", "IZZ", "XXX"], vec![Frame::XY; 3]).unwrap()
    }

    fn pair13() -> ExtremalPair {
        ExtremalPair::new(vec![0], vec![2])
    }

    #[test]
    fn cluster_normal_form_blocks() {
        let nf = normal_form(&cluster3(), &pair13()).unwrap();
        assert_eq!(nf.tt_t, BitMat::identity(2));
        assert_eq!(nf.tt_h, BitMat::from_u8_rows(&[[0], [1]]));
        assert_eq!(nf.tt_z, BitMat::from_u8_rows(&[[1, 0]]));
        assert_eq!(nf.tt_r, BitMat::zeros(1, 1));
        let rel = extract_relations(&nf);
        assert_eq!(rel.t, BitMat::from_u8_rows(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]]));
        assert_eq!(rel.h, BitMat::from_u8_rows(&[[1], [0], [1]]));
        assert_eq!(rel.z, BitMat::from_u8_rows(&[[1, 0, 1]]));
        assert!(nf.overlap_flags.is_empty());
    }

    #[test]
    fn ghz_relations_are_flat() {
        let rel = relations_for_pair(&ghz3(), &pair13()).unwrap();
        assert!(rel.t.is_zero());
        assert_eq!(rel.h, BitMat::from_u8_rows(&[[1], [1], [1]]));
        assert_eq!(rel.z, BitMat::from_u8_rows(&[[1, 1, 1]]));
        assert!(rel.r.is_zero());
    }

    #[test]
    fn invalid_and_non_extremal_pairs() {
        let t = cluster3();
        assert_eq!(
            normal_form(&t, &ExtremalPair::new(vec![1], vec![1])).unwrap_err(),
            ProcessingError::InvalidPair
        );
        assert!(matches!(
            normal_form(&t, &ExtremalPair::new(vec![0], vec![])),
            Err(ProcessingError::NotExtremal { .. })
        ));
    }

    #[test]
    fn single_qubit_plus() {
        let t = graph_state_tableau(&GraphSpec::new(1, []).unwrap(), &[Frame::XY]).unwrap();
        let pairs: Vec<_> = enumerate_pairs(&t, None).map(|(p, _)| p).collect();
        assert_eq!(pairs, vec![ExtremalPair::new(vec![0], vec![0])]);
    }

    #[test]
    fn extremal_pair_recovery() {
        let t = cluster3();
        let rel = relations_for_pair(&t, &pair13()).unwrap();
        assert_eq!(find_extremal_pair(&t, &rel.t).unwrap(), pair13());
        let g = ghz3();
        let p = find_extremal_pair(&g, &BitMat::zeros(3, 3)).unwrap();
        assert_eq!(p, pair13());
        assert!(relations_for_pair(&g, &p).unwrap().t.is_zero());
    }

    #[test]
    fn reconstruct_worked_examples() {
        for t in [cluster3(), ghz3()] {
            let rel = relations_for_pair(&t, &pair13()).unwrap();
            assert!(reconstruct_tableau(&rel).unwrap().same_group(&t));
        }
    }

    #[test]
    fn reconstruct_rejects_perturbed_ghz() {
        let mut rel = relations_for_pair(&ghz3(), &pair13()).unwrap();
        rel.z.flip(0, 0);
        assert!(matches!(
            reconstruct_tableau(&rel),
            Err(ProcessingError::Stabilizer(StabilizerError::NonCommuting(_, _)))
        ));
    }

    #[test]
    fn reconstruct_rank_mismatch() {
        let mut rel = relations_for_pair(&cluster3(), &pair13()).unwrap();
        rel.z = BitMat::zeros(1, 3);
        assert_eq!(
            reconstruct_tableau(&rel).unwrap_err(),
            ProcessingError::RankMismatch { h: 1, z: 0 }
        );
    }
}
