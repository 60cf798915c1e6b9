//! Dense and sparse exact linear algebra over cyclotomic scalars.
//!
//! Everything here is deterministic: pivoting always picks the first usable
//! row/column, and nullspace bases come out in reduced echelon form with the
//! free columns in increasing order.

use crate::scalar::Scalar;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Dense matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Scalar>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}, ", self.at(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c));
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "add {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.mul(s)).collect(),
        }
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "matmul {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.at(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.at(r, c).add(&a.mul(b));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; the left factor is the most significant index.
    pub fn kron(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.at(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = other.at(r2, c2);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(r1 * other.rows + r2, c1 * other.cols + c2, a.mul(b));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "apply {}x{} to vec {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Scalar::zero(); self.rows];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let a = self.at(r, c);
                if !a.is_zero() && !v[c].is_zero() {
                    out[r] = out[r].add(&a.mul(&v[c]));
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let piv = (row..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(piv) = piv else { continue };
            if piv != row {
                for c in 0..m.cols {
                    let a = m.at(row, c).clone();
                    let b = m.at(piv, c).clone();
                    m.set(row, c, b);
                    m.set(piv, c, a);
                }
            }
            let inv = m.at(row, col).inv().expect("pivot is nonzero");
            for c in col..m.cols {
                let v = m.at(row, c).mul(&inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).clone();
                for c in col..m.cols {
                    let v = m.at(r, c).sub(&m.at(row, c).mul(&f));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace, reduced and deterministic: one vector per
    /// free column, in increasing column order, with a 1 in the free slot.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let pivot_set: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free] {
                continue;
            }
            let mut vec_ = vec![Scalar::zero(); self.cols];
            vec_[free] = Scalar::one();
            for (row_idx, &pcol) in pivots.iter().enumerate() {
                vec_[pcol] = r.at(row_idx, free).neg();
            }
            basis.push(vec_);
        }
        basis
    }

    /// Solve self * x = b; returns the particular solution with all free
    /// variables zero, or None if inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let (rr, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row_idx, &p) in pivots.iter().enumerate() {
            x[p] = rr.at(row_idx, self.cols).clone();
        }
        Some(x)
    }

    pub fn inv(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, n + r, Scalar::one());
        }
        let (rr, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::DivisionByZero);
        }
        let mut out = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, rr.at(r, n + c).clone());
            }
        }
        Ok(out)
    }

    /// Signature (n_plus, n_minus, n_zero) of a symmetric matrix, by exact
    /// congruence diagonalization. If no nonzero diagonal entry is available,
    /// a row/column addition manufactures one from an off-diagonal 2m entry.
    /// Entries must be rational (they are, for linking matrices and Maslov
    /// forms); panics otherwise.
    pub fn signature(&self) -> (usize, usize, usize) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut plus = 0;
        let mut minus = 0;
        let mut zero = 0;
        let mut active: Vec<usize> = (0..n).collect();
        while let Some(&_first) = active.first() {
            // find a nonzero diagonal entry among active indices
            let diag = active.iter().position(|&i| !m.at(i, i).is_zero());
            let mut offdiag = None;
            if diag.is_none() {
                'search: for (pi, &i) in active.iter().enumerate() {
                    for &j in active.iter().skip(pi + 1) {
                        if !m.at(i, j).is_zero() {
                            offdiag = Some((i, j));
                            break 'search;
                        }
                    }
                }
            }
            let pivot = if let Some(pos) = diag {
                active[pos]
            } else if let Some((ai, aj)) = offdiag {
                // row_i += row_j, col_i += col_j gives diagonal 2*m[i][j]
                for c in 0..n {
                    let v = m.at(ai, c).add(m.at(aj, c));
                    m.set(ai, c, v);
                }
                for r in 0..n {
                    let v = m.at(r, ai).add(m.at(r, aj));
                    m.set(r, ai, v);
                }
                ai
            } else {
                zero += active.len();
                break;
            };
            let d = m.at(pivot, pivot).clone();
            let dr = d
                .rational_part()
                .expect("signature requires rational entries");
            use num::Signed;
            if dr.is_positive() {
                plus += 1;
            } else {
                minus += 1;
            }
            // clear row/column of the pivot among remaining indices
            let dinv = d.inv().unwrap();
            let rest: Vec<usize> = active.iter().copied().filter(|&i| i != pivot).collect();
            for &i in &rest {
                let f = m.at(i, pivot).mul(&dinv);
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let v = m.at(i, c).sub(&m.at(pivot, c).mul(&f));
                    m.set(i, c, v);
                }
                for r in 0..n {
                    let v = m.at(r, i).sub(&m.at(r, pivot).mul(&f));
                    m.set(r, i, v);
                }
            }
            active = rest;
        }
        (plus, minus, zero)
    }
}

/// Sparse matrix as ordered (row, col, value) triples; used for structure
/// constants and the column evaluation engine.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), Scalar>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, entries: BTreeMap::new() }
    }

    pub fn from_dense(m: &Mat) -> Self {
        let mut s = SparseMat::new(m.rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                if !m.at(r, c).is_zero() {
                    s.entries.insert((r, c), m.at(r, c).clone());
                }
            }
        }
        s
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols);
        for (&(r, c), v) in &self.entries {
            m.set(r, c, v.clone());
        }
        m
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Scalar) {
        if v.is_zero() {
            return;
        }
        let cur = self.entries.entry((r, c)).or_insert_with(Scalar::zero);
        let nv = cur.add(v);
        if nv.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            *cur = nv;
        }
    }
}

/// Sparse column vector indexed by a flat multi-index.
pub type SparseCol = BTreeMap<usize, Scalar>;

/// A state in the column evaluation engine: a sparse vector over the tensor
/// product of factor spaces, indexed with the leftmost factor most
/// significant.
#[derive(Clone, Debug)]
pub struct State {
    pub dims: Vec<usize>,
    pub col: SparseCol,
}

impl State {
    pub fn unit() -> Self {
        let mut col = BTreeMap::new();
        col.insert(0, Scalar::one());
        State { dims: vec![], col }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Apply a dense operator on the contiguous block of factors starting at
    /// `pos`, consuming `in_dims` and replacing them with `out_dims`.
    /// The operator matrix has rows indexed by out_dims (flat) and columns by
    /// in_dims (flat).
    pub fn apply_op(
        &mut self,
        pos: usize,
        in_dims: &[usize],
        out_dims: &[usize],
        op: &SparseMat,
    ) -> Result<()> {
        let in_flat: usize = in_dims.iter().product();
        let out_flat: usize = out_dims.iter().product();
        if op.cols != in_flat || op.rows != out_flat {
            return Err(Error::ShapeMismatch(format!(
                "apply_op: op {}x{}, expected {}x{}",
                op.rows, op.cols, out_flat, in_flat
            )));
        }
        let consumed = in_dims.len();
        if pos + consumed > self.dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "apply_op at {}: consumes {} of {} factors",
                pos,
                consumed,
                self.dims.len()
            )));
        }
        for (i, &d) in in_dims.iter().enumerate() {
            if self.dims[pos + i] != d {
                return Err(Error::ShapeMismatch(format!(
                    "apply_op at {}: factor {} has dim {}, op expects {}",
                    pos,
                    pos + i,
                    self.dims[pos + i],
                    d
                )));
            }
        }
        let right: usize = self.dims[pos + consumed..].iter().product();
        // current index = left * (in_flat * right) + mid * right + r
        // column index by operator column, grouped
        let mut out: SparseCol = BTreeMap::new();
        // bucket current entries by (left, r) and mid
        let mut by_mid: BTreeMap<usize, Vec<(usize, usize, Scalar)>> = BTreeMap::new();
        for (&idx, v) in &self.col {
            let r = idx % right;
            let rest = idx / right;
            let mid = rest % in_flat;
            let left = rest / in_flat;
            by_mid.entry(mid).or_default().push((left, r, v.clone()));
        }
        for (&(orow, ocol), coef) in &op.entries {
            if let Some(items) = by_mid.get(&ocol) {
                for (left, r, v) in items {
                    let nidx = left * (out_flat * right) + orow * right + r;
                    let add = coef.mul(v);
                    if add.is_zero() {
                        continue;
                    }
                    let cur = out.entry(nidx).or_insert_with(Scalar::zero);
                    let nv = cur.add(&add);
                    if nv.is_zero() {
                        out.remove(&nidx);
                    } else {
                        *cur = nv;
                    }
                }
            }
        }
        let mut new_dims = Vec::with_capacity(self.dims.len() - consumed + out_dims.len());
        new_dims.extend_from_slice(&self.dims[..pos]);
        new_dims.extend_from_slice(out_dims);
        new_dims.extend_from_slice(&self.dims[pos + consumed..]);
        self.dims = new_dims;
        self.col = out;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn si(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn rref_and_rank() {
        let m = Mat::from_rows(vec![
            vec![si(1), si(2), si(3)],
            vec![si(2), si(4), si(6)],
            vec![si(1), si(0), si(1)],
        ]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        // check the nullspace vector really annihilates
        let out = m.apply(&ns[0]).unwrap();
        assert!(out.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn inverse() {
        let m = Mat::from_rows(vec![vec![si(2), si(1)], vec![si(1), si(1)]]);
        let inv = m.inv().unwrap();
        assert_eq!(m.matmul(&inv).unwrap(), Mat::identity(2));
    }

    #[test]
    fn kron_dims() {
        let a = Mat::identity(2);
        let b = Mat::from_rows(vec![vec![si(0), si(1)], vec![si(1), si(0)]]);
        let k = a.kron(&b);
        assert_eq!(k.rows, 4);
        assert_eq!(*k.at(0, 1), si(1));
        assert_eq!(*k.at(2, 3), si(1));
    }

    #[test]
    fn signature_diagonal() {
        let m = Mat::from_rows(vec![
            vec![si(2), si(0), si(0)],
            vec![si(0), si(-3), si(0)],
            vec![si(0), si(0), si(0)],
        ]);
        assert_eq!(m.signature(), (1, 1, 1));
    }

    #[test]
    fn signature_hyperbolic() {
        // [[0,1],[1,0]] has signature (1,1,0)
        let m = Mat::from_rows(vec![vec![si(0), si(1)], vec![si(1), si(0)]]);
        assert_eq!(m.signature(), (1, 1, 0));
    }

    #[test]
    fn state_engine_matches_dense() {
        // apply B at position 1 of a 3-factor state and compare with kron
        let a = Mat::from_rows(vec![vec![si(1), si(2)], vec![si(3), si(4)]]);
        let start: Vec<Scalar> = (0..8).map(si).collect();
        let mut st = State {
            dims: vec![2, 2, 2],
            col: start
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        };
        st.apply_op(1, &[2], &[2], &SparseMat::from_dense(&a)).unwrap();
        let full = Mat::identity(2).kron(&a).kron(&Mat::identity(2));
        let expect = full.apply(&start).unwrap();
        for (i, e) in expect.iter().enumerate() {
            let got = st.col.get(&i).cloned().unwrap_or_else(Scalar::zero);
            assert_eq!(&got, e, "index {}", i);
        }
    }

    #[test]
    fn solve_particular() {
        let m = Mat::from_rows(vec![vec![si(1), si(1)], vec![si(0), si(0)]]);
        let x = m.solve(&[si(3), si(0)]).unwrap();
        assert_eq!(m.apply(&x).unwrap()[0], si(3));
        assert!(m.solve(&[si(3), si(1)]).is_none());
    }
}
