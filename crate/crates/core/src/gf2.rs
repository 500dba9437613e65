//! Dense linear algebra over GF(2).
//!
//! Vectors are packed into `u64` words; matrices are stored row-major as a
//! sequence of packed rows, so row XOR is the inner kernel of every
//! elimination routine.

use std::fmt;

use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("matrix is singular")]
    Singular,
    #[error("right-hand side is outside the column space")]
    NoSolution,
    #[error("matrix has rank {rank} but {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut b = Self::zeros(len);
        b.set(index, true);
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                b.set(i, true);
            }
        }
        b
    }

    /// Builds a vector from 0/1 bytes; any nonzero byte is a set bit.
    pub fn from_u8(bits: &[u8]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            if bit != 0 {
                b.set(i, true);
            }
        }
        b
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::zeros(len);
        for i in indices {
            b.set(i, true);
        }
        b
    }

    /// Low `len` bits of `value`, bit `i` of the integer at index `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD);
        let mut b = Self::zeros(len);
        if len > 0 {
            let mask = if len == WORD { u64::MAX } else { (1u64 << len) - 1 };
            b.words[0] = value & mask;
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    #[inline]
    pub fn or_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND (the GF(2) inner product).
    pub fn dot(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    /// Sub-vector at the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Bits {
        let mut out = Bits::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = Bits::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn to_u8(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Packs up to 64 bits into an integer, bit `i` at position `i`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD);
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

/// Reduced row-echelon form together with the row transformation producing it.
#[derive(Debug, Clone)]
pub struct Rref {
    pub reduced: BitMat,
    pub pivots: Vec<usize>,
    /// Invertible `U` with `U * M = reduced`.
    pub transform: BitMat,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    rows: Vec<Bits>,
    cols: usize,
}

impl BitMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![Bits::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<Bits>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length {} != {cols}", r.len());
        }
        Self { rows, cols }
    }

    /// Parses row-major 0/1 data. All rows must have the same length.
    pub fn from_u8_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows(rows.iter().map(|r| Bits::from_u8(r.as_ref())).collect(), cols)
    }

    /// Builds an `rows x cols` matrix from columns.
    pub fn from_cols(columns: &[Bits], rows: usize) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in c.ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r].flip(c)
    }

    pub fn row(&self, r: usize) -> &Bits {
        &self.rows[r]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut Bits {
        &mut self.rows[r]
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    pub fn col(&self, c: usize) -> Bits {
        let mut out = Bits::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            if row.get(c) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Bits::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| r.weight() == 1 && r.get(i))
    }

    pub fn transpose(&self) -> BitMat {
        let mut t = BitMat::zeros(self.cols, self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    fn check_mul(&self, other: &BitMat) -> Result<(), Gf2Error> {
        if self.cols != other.nrows() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.nrows(),
                self.cols,
                other.nrows(),
                other.cols
            )));
        }
        Ok(())
    }

    /// Matrix product mod 2. Panics on mismatched inner dimensions.
    pub fn mul(&self, other: &BitMat) -> BitMat {
        self.check_mul(other).expect("matrix product");
        let mut out = BitMat::zeros(self.nrows(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            let acc = &mut out.rows[i];
            for k in row.ones() {
                acc.xor_assign(&other.rows[k]);
            }
        }
        out
    }

    /// Boolean (OR-AND) product, used for reachability.
    pub fn bool_mul(&self, other: &BitMat) -> BitMat {
        self.check_mul(other).expect("boolean product");
        let mut out = BitMat::zeros(self.nrows(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            let acc = &mut out.rows[i];
            for k in row.ones() {
                acc.or_assign(&other.rows[k]);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Bits) -> Bits {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = Bits::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn add(&self, other: &BitMat) -> BitMat {
        assert_eq!((self.nrows(), self.cols), (other.nrows(), other.cols));
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b);
        }
        out
    }

    /// `col * row^T` as a matrix.
    pub fn outer(col: &Bits, row: &Bits) -> BitMat {
        let mut out = BitMat::zeros(col.len(), row.len());
        for i in col.ones() {
            out.rows[i] = row.clone();
        }
        out
    }

    pub fn diagonal(&self) -> Bits {
        let n = self.nrows().min(self.cols);
        Bits::from_indices(n, (0..n).filter(|&i| self.get(i, i)))
    }

    pub fn hstack(&self, other: &BitMat) -> BitMat {
        assert_eq!(self.nrows(), other.nrows(), "hstack row mismatch");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.concat(b))
            .collect();
        BitMat::from_rows(rows, self.cols + other.cols)
    }

    pub fn vstack(&self, other: &BitMat) -> BitMat {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMat::from_rows(rows, self.cols)
    }

    /// Submatrix on the given rows and columns, in the given orders.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> BitMat {
        BitMat::from_rows(
            rows.iter().map(|&r| self.rows[r].select(cols)).collect(),
            cols.len(),
        )
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMat {
        BitMat::from_rows(rows.iter().map(|&r| self.rows[r].clone()).collect(), self.cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> BitMat {
        BitMat::from_rows(self.rows.iter().map(|r| r.select(cols)).collect(), cols.len())
    }

    pub fn to_u8_rows(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(Bits::to_u8).collect()
    }

    pub fn rref(&self) -> Rref {
        let n = self.nrows();
        let mut reduced = self.clone();
        let mut transform = BitMat::identity(n);
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..self.cols {
            if prow == n {
                break;
            }
            let Some(found) = (prow..n).find(|&i| reduced.rows[i].get(c)) else {
                continue;
            };
            reduced.rows.swap(prow, found);
            transform.rows.swap(prow, found);
            let (pr, pt) = (reduced.rows[prow].clone(), transform.rows[prow].clone());
            for i in 0..n {
                if i != prow && reduced.rows[i].get(c) {
                    reduced.rows[i].xor_assign(&pr);
                    transform.rows[i].xor_assign(&pt);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        Rref {
            reduced,
            pivots,
            transform,
        }
    }

    pub fn rank(&self) -> usize {
        let mut basis = Echelon::new();
        self.rows.iter().map(|r| basis.insert(r.clone()) as usize).sum()
    }

    pub fn inverse(&self) -> Result<BitMat, Gf2Error> {
        if !self.is_square() {
            return Err(Gf2Error::NotSquare {
                rows: self.nrows(),
                cols: self.cols,
            });
        }
        let r = self.rref();
        if r.rank() < self.nrows() {
            return Err(Gf2Error::Singular);
        }
        Ok(r.transform)
    }

    /// Some `x` with `self * x = b`.
    pub fn solve(&self, b: &Bits) -> Result<Bits, Gf2Error> {
        if b.len() != self.nrows() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "rhs length {} for {} rows",
                b.len(),
                self.nrows()
            )));
        }
        let r = self.rref();
        let ub = r.transform.mul_vec(b);
        if (r.rank()..self.nrows()).any(|i| ub.get(i)) {
            return Err(Gf2Error::NoSolution);
        }
        let mut x = Bits::zeros(self.cols);
        for (j, &p) in r.pivots.iter().enumerate() {
            if ub.get(j) {
                x.set(p, true);
            }
        }
        Ok(x)
    }

    /// Basis of `{x : self * x = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Bits> {
        let r = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &r.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = Bits::unit(self.cols, f);
                for (j, &p) in r.pivots.iter().enumerate() {
                    if r.reduced.get(j, f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect()
    }

    /// Row spaces compared through their canonical reduced form.
    pub fn same_row_space(&self, other: &BitMat) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let a = self.rref();
        let b = other.rref();
        a.rank() == b.rank()
            && a.reduced.rows[..a.rank()] == b.reduced.rows[..b.rank()]
    }

    /// Lazily enumerates the column bases of a full-row-rank matrix.
    pub fn column_bases(&self) -> Result<ColumnBases, Gf2Error> {
        ColumnBases::new(self)
    }
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMat {}x{} [", self.nrows(), self.cols)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r:?}")?;
        }
        write!(f, "]")
    }
}

/// Incrementally maintained echelon basis of a subspace.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    basis: Vec<(usize, Bits)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `v` against the current basis.
    pub fn reduce(&self, mut v: Bits) -> Bits {
        for (p, b) in &self.basis {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    /// Adds `v` if it is independent; returns whether it was added.
    pub fn insert(&mut self, v: Bits) -> bool {
        let v = self.reduce(v);
        match v.first_one() {
            Some(p) => {
                self.basis.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Depth-first enumeration of column bases in lexicographic order of the
/// sorted index sets.
pub struct ColumnBases {
    columns: Vec<Bits>,
    rank: usize,
    stack: Vec<Frame>,
}

struct Frame {
    next: usize,
    chosen: Vec<usize>,
    span: Echelon,
}

impl ColumnBases {
    fn new(m: &BitMat) -> Result<Self, Gf2Error> {
        let rank = m.rank();
        if rank < m.nrows() {
            return Err(Gf2Error::RankDeficient {
                rank,
                rows: m.nrows(),
            });
        }
        let t = m.transpose();
        Ok(Self {
            columns: t.rows,
            rank,
            stack: vec![Frame {
                next: 0,
                chosen: Vec::new(),
                span: Echelon::new(),
            }],
        })
    }

    fn completable(&self, span: &Echelon, from: usize) -> bool {
        if span.rank() == self.rank {
            return true;
        }
        let mut probe = span.clone();
        for c in &self.columns[from..] {
            if probe.insert(c.clone()) && probe.rank() == self.rank {
                return true;
            }
        }
        false
    }
}

impl Iterator for ColumnBases {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        while let Some(frame) = self.stack.pop() {
            if frame.chosen.len() == self.rank {
                return Some(frame.chosen);
            }
            let j = frame.next;
            if j == self.columns.len() {
                continue;
            }
            // Exclude branch goes on the stack first so that include is explored first.
            if self.completable(&frame.span, j + 1) {
                self.stack.push(Frame {
                    next: j + 1,
                    chosen: frame.chosen.clone(),
                    span: frame.span.clone(),
                });
            }
            let mut span = frame.span;
            if span.insert(self.columns[j].clone()) {
                let mut chosen = frame.chosen;
                chosen.push(j);
                self.stack.push(Frame {
                    next: j + 1,
                    chosen,
                    span,
                });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u8]]) -> BitMat {
        BitMat::from_u8_rows(rows)
    }

    #[test]
    fn rref_identity() {
        let r = BitMat::identity(3).rref();
        assert_eq!(r.reduced, BitMat::identity(3));
        assert_eq!(r.pivots, vec![0, 1, 2]);
        assert_eq!(r.transform, BitMat::identity(3));
    }

    #[test]
    fn rref_rank_one() {
        let r = m(&[&[1, 1], &[1, 1]]).rref();
        assert_eq!(r.reduced, m(&[&[1, 1], &[0, 0]]));
        assert_eq!(r.pivots, vec![0]);
    }

    #[test]
    fn rref_of_empty() {
        let r = BitMat::zeros(0, 0).rref();
        assert_eq!(r.rank(), 0);
        assert!(r.pivots.is_empty());
    }

    #[test]
    fn inverse_small() {
        assert_eq!(BitMat::identity(4).inverse().unwrap(), BitMat::identity(4));
        let a = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(a.inverse().unwrap(), a);
        assert_eq!(m(&[&[1, 1], &[1, 1]]).inverse(), Err(Gf2Error::Singular));
        assert!(matches!(
            BitMat::zeros(2, 3).inverse(),
            Err(Gf2Error::NotSquare { .. })
        ));
    }

    #[test]
    fn solve_inconsistent() {
        let a = m(&[&[1, 1], &[1, 1]]);
        assert_eq!(a.solve(&Bits::from_u8(&[1, 0])), Err(Gf2Error::NoSolution));
        let x = a.solve(&Bits::from_u8(&[1, 1])).unwrap();
        assert_eq!(a.mul_vec(&x), Bits::from_u8(&[1, 1]));
    }

    #[test]
    fn kernel_vectors_are_null() {
        let a = m(&[&[1, 0, 1, 1], &[0, 1, 1, 0]]);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn bases_of_identity_and_triangle() {
        let b: Vec<_> = BitMat::identity(2).column_bases().unwrap().collect();
        assert_eq!(b, vec![vec![0, 1]]);
        let b: Vec<_> = m(&[&[1, 0, 1], &[0, 1, 1]]).column_bases().unwrap().collect();
        assert_eq!(b, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn bases_reject_rank_deficient() {
        assert!(matches!(
            m(&[&[1, 1], &[1, 1]]).column_bases(),
            Err(Gf2Error::RankDeficient { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn bits_basics() {
        let b = Bits::from_u8(&[1, 0, 1, 1]);
        assert_eq!(b.weight(), 3);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(b.first_one(), Some(0));
        assert_eq!(b.select(&[3, 1]), Bits::from_u8(&[1, 0]));
        assert_eq!(Bits::from_u64(4, 0b1101), b);
        assert_eq!(b.to_u64(), 0b1101);
        let long = Bits::unit(130, 129);
        assert_eq!(long.ones().collect::<Vec<_>>(), vec![129]);
    }
}
