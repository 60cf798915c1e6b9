//! Finite-dimensional ribbon Hopf algebras over cyclotomic fields.
//!
//! An algebra is presented by sparse structure constants on a fixed basis
//! e_0, ..., e_{dim-1}. Elements are dense coefficient vectors. The struct
//! also carries a generating set (enough to test intertwining), the known
//! group-like elements and characters (used by the ribbon search, and
//! propagated through the Drinfeld double), and an optional pivot.

use crate::linalg::{Mat, SparseCol};
use crate::scalar::Scalar;
use crate::{Error, Result};
use std::collections::BTreeMap;

pub type Elem = Vec<Scalar>;

#[derive(Clone, Debug)]
pub struct RibbonHopfAlgebra {
    pub name: String,
    pub cyclotomic_order: u32,
    pub dim: usize,
    /// e_i * e_j = sum_k c e_k, entries (i, j, k, c).
    pub mul: Vec<(usize, usize, usize, Scalar)>,
    pub unit: Elem,
    /// Delta(e_i) = sum c e_j (x) e_k, entries (i, j, k, c).
    pub comul: Vec<(usize, usize, usize, Scalar)>,
    pub counit: Elem,
    /// S(e_i) is column i.
    pub antipode: Mat,
    /// R = sum c e_i (x) e_j, entries (i, j, c).
    pub r_matrix: Vec<(usize, usize, Scalar)>,
    pub ribbon: Elem,
    pub pivot: Option<Elem>,
    /// Algebra generators; intertwining with these suffices.
    pub gens: Vec<Elem>,
    /// Known group-like elements (complete for the builtin catalogue).
    pub group_likes: Vec<Elem>,
    /// Known characters (algebra maps to the ground field), as row vectors.
    pub characters: Vec<Elem>,
}

/// Indexed multiplication/comultiplication tables for fast element ops.
pub struct Tables {
    pub dim: usize,
    pub mul: BTreeMap<(usize, usize), Vec<(usize, Scalar)>>,
    pub comul: Vec<Vec<(usize, usize, Scalar)>>,
}

fn vec_is_zero(v: &[Scalar]) -> bool {
    v.iter().all(|x| x.is_zero())
}

fn vec_add_scaled(acc: &mut [Scalar], v: &[Scalar], c: &Scalar) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v.iter()) {
        if !b.is_zero() {
            *a = a.add(&b.mul(c));
        }
    }
}

impl RibbonHopfAlgebra {
    pub fn tables(&self) -> Tables {
        let mut mul: BTreeMap<(usize, usize), Vec<(usize, Scalar)>> = BTreeMap::new();
        for (i, j, k, c) in &self.mul {
            mul.entry((*i, *j)).or_default().push((*k, c.clone()));
        }
        let mut comul = vec![Vec::new(); self.dim];
        for (i, j, k, c) in &self.comul {
            comul[*i].push((*j, *k, c.clone()));
        }
        Tables { dim: self.dim, mul, comul }
    }

    pub fn basis_elem(&self, i: usize) -> Elem {
        let mut v = vec![Scalar::zero(); self.dim];
        v[i] = Scalar::one();
        v
    }

    pub fn mul_vec(&self, a: &[Scalar], b: &[Scalar]) -> Elem {
        self.tables().mul_vec(a, b)
    }

    pub fn comul_vec(&self, a: &[Scalar]) -> Elem {
        self.tables().comul_vec(a)
    }

    pub fn counit_of(&self, a: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for (c, e) in a.iter().zip(self.counit.iter()) {
            if !c.is_zero() && !e.is_zero() {
                acc = acc.add(&c.mul(e));
            }
        }
        acc
    }

    pub fn antipode_of(&self, a: &[Scalar]) -> Elem {
        self.antipode.apply(a).expect("antipode shape")
    }

    pub fn antipode_inv(&self) -> Result<Mat> {
        self.antipode.inv()
    }

    /// Matrix of left multiplication by a.
    pub fn left_mul_mat(&self, a: &[Scalar]) -> Mat {
        let t = self.tables();
        let mut m = Mat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = t.mul_vec(a, &self.basis_elem(j));
            for (r, v) in col.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, j, v);
                }
            }
        }
        m
    }

    /// Matrix of right multiplication by a.
    pub fn right_mul_mat(&self, a: &[Scalar]) -> Mat {
        let t = self.tables();
        let mut m = Mat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = t.mul_vec(&self.basis_elem(j), a);
            for (r, v) in col.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, j, v);
                }
            }
        }
        m
    }

    pub fn invert_elem(&self, a: &[Scalar]) -> Result<Elem> {
        self.left_mul_mat(a)
            .solve(&self.unit)
            .ok_or(Error::DivisionByZero)
    }

    /// R as a sparse tensor-square column.
    pub fn r_col(&self) -> SparseCol {
        let mut col = BTreeMap::new();
        for (i, j, c) in &self.r_matrix {
            if !c.is_zero() {
                col.insert(i * self.dim + j, c.clone());
            }
        }
        col
    }

    /// Drinfeld element u = sum S(R_2) R_1.
    pub fn drinfeld_u(&self) -> Elem {
        let t = self.tables();
        let mut u = vec![Scalar::zero(); self.dim];
        for (i, j, c) in &self.r_matrix {
            let s_r2 = self.antipode_of(&self.basis_elem(*j));
            let term = t.mul_vec(&s_r2, &self.basis_elem(*i));
            vec_add_scaled(&mut u, &term, c);
        }
        u
    }

    /// Verify all Hopf / quasitriangular / ribbon / pivot axioms; on the
    /// first failure, return a witness naming the axiom and location.
    pub fn check_axioms(&self) -> Result<()> {
        let t = self.tables();
        let n = self.dim;
        let fail = |msg: String| Err(Error::AxiomsViolated(msg));
        // unit
        for i in 0..n {
            let e = self.basis_elem(i);
            if t.mul_vec(&self.unit, &e) != e {
                return fail(format!("unit: 1 * e_{} != e_{}", i, i));
            }
            if t.mul_vec(&e, &self.unit) != e {
                return fail(format!("unit: e_{} * 1 != e_{}", i, i));
            }
        }
        // associativity, via the sparse basis-product table
        let empty: Vec<(usize, Scalar)> = Vec::new();
        let pt = |i: usize, j: usize| t.mul.get(&(i, j)).unwrap_or(&empty);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut lhs: SparseCol = BTreeMap::new();
                    for (m, c) in pt(i, j) {
                        for (w, d) in pt(*m, k) {
                            add_sparse(&mut lhs, *w, &c.mul(d));
                        }
                    }
                    let mut rhs: SparseCol = BTreeMap::new();
                    for (m, c) in pt(j, k) {
                        for (w, d) in pt(i, *m) {
                            add_sparse(&mut rhs, *w, &c.mul(d));
                        }
                    }
                    if lhs != rhs {
                        return fail(format!("associativity at (e_{}, e_{}, e_{})", i, j, k));
                    }
                }
            }
        }
        // coassociativity and counit
        for i in 0..n {
            let mut lhs = vec![Scalar::zero(); n * n * n];
            let mut rhs = vec![Scalar::zero(); n * n * n];
            for (j, k, c) in &t.comul[i] {
                for (p, q, d) in &t.comul[*j] {
                    lhs[(p * n + q) * n + k] = lhs[(p * n + q) * n + k].add(&c.mul(d));
                }
                for (p, q, d) in &t.comul[*k] {
                    rhs[(j * n + p) * n + q] = rhs[(j * n + p) * n + q].add(&c.mul(d));
                }
            }
            if lhs != rhs {
                return fail(format!("coassociativity at e_{}", i));
            }
            // (eps (x) id) Delta = id, (id (x) eps) Delta = id
            let mut left = vec![Scalar::zero(); n];
            let mut right = vec![Scalar::zero(); n];
            for (j, k, c) in &t.comul[i] {
                left[*k] = left[*k].add(&c.mul(&self.counit[*j]));
                right[*j] = right[*j].add(&c.mul(&self.counit[*k]));
            }
            if left != self.basis_elem(i) || right != self.basis_elem(i) {
                return fail(format!("counit at e_{}", i));
            }
        }
        // bialgebra: Delta is an algebra map, eps is an algebra map
        let delta_unit = t.comul_vec(&self.unit);
        if delta_unit != tensor_of(&self.unit, &self.unit) {
            return fail("bialgebra: Delta(1) != 1 (x) 1".into());
        }
        for i in 0..n {
            for j in 0..n {
                let prod = t.mul_vec(&self.basis_elem(i), &self.basis_elem(j));
                let lhs = t.comul_vec(&prod);
                let rhs = t.mul_tensor2(&t.comul_vec(&self.basis_elem(i)), &t.comul_vec(&self.basis_elem(j)));
                if lhs != rhs {
                    return fail(format!("bialgebra: Delta(e_{} e_{}) mismatch", i, j));
                }
                let e_prod = self.counit_of(&prod);
                if e_prod != self.counit[i].mul(&self.counit[j]) {
                    return fail(format!("bialgebra: eps(e_{} e_{}) mismatch", i, j));
                }
            }
        }
        // antipode axiom
        self.verify_antipode_axiom()?;
        // quasitriangularity
        let r = self.r_col();
        // (eps (x) id) R = 1 and (id (x) eps) R = 1
        {
            let mut left = vec![Scalar::zero(); n];
            let mut right = vec![Scalar::zero(); n];
            for (&idx, c) in &r {
                let (i, j) = (idx / n, idx % n);
                left[j] = left[j].add(&c.mul(&self.counit[i]));
                right[i] = right[i].add(&c.mul(&self.counit[j]));
            }
            if left != self.unit {
                return fail("quasitriangular: (eps (x) id) R != 1".into());
            }
            if right != self.unit {
                return fail("quasitriangular: (id (x) eps) R != 1".into());
            }
        }
        // Delta^op(a) R = R Delta(a)
        for i in 0..n {
            let d = t.comul_vec(&self.basis_elem(i));
            let dop = flip2(&d, n);
            let lhs = t.mul_tensor2_sparse(&dense_to_sparse(&dop), &r);
            let rhs = t.mul_tensor2_sparse(&r, &dense_to_sparse(&d));
            if lhs != rhs {
                return fail(format!("quasitriangular: Delta^op(e_{}) R != R Delta(e_{})", i, i));
            }
        }
        // (Delta (x) id) R = R13 R23, (id (x) Delta) R = R13 R12
        {
            let mut dr: SparseCol = BTreeMap::new();
            let mut rd: SparseCol = BTreeMap::new();
            for (&idx, c) in &r {
                let (i, j) = (idx / n, idx % n);
                for (p, q, d) in &t.comul[i] {
                    add_sparse(&mut dr, (p * n + q) * n + j, &c.mul(d));
                }
                for (p, q, d) in &t.comul[j] {
                    add_sparse(&mut rd, (i * n + p) * n + q, &c.mul(d));
                }
            }
            let r13_23 = t.mul_tensor3(
                &place3(&r, n, 0, 2, &self.unit),
                &place3(&r, n, 1, 2, &self.unit),
            );
            if dr != r13_23 {
                return fail("quasitriangular: (Delta (x) id) R != R13 R23".into());
            }
            let r13_12 = t.mul_tensor3(
                &place3(&r, n, 0, 2, &self.unit),
                &place3(&r, n, 0, 1, &self.unit),
            );
            if rd != r13_12 {
                return fail("quasitriangular: (id (x) Delta) R != R13 R12".into());
            }
        }
        // R (S (x) id)(R) = 1 (x) 1, i.e. (S (x) id)R is the inverse of R
        {
            let mut rinv: SparseCol = BTreeMap::new();
            for (&idx, c) in &r {
                let (i, j) = (idx / n, idx % n);
                let si = self.antipode_of(&self.basis_elem(i));
                for (k, v) in si.iter().enumerate() {
                    if !v.is_zero() {
                        add_sparse(&mut rinv, k * n + j, &c.mul(v));
                    }
                }
            }
            let prod = t.mul_tensor2_sparse(&r, &rinv);
            let unit2 = dense_to_sparse(&tensor_of(&self.unit, &self.unit));
            if prod != unit2 {
                return fail("quasitriangular: R (S (x) id)R != 1 (x) 1".into());
            }
        }
        // ribbon axioms
        self.check_ribbon(&self.ribbon)?;
        let v = &self.ribbon;
        let u = self.drinfeld_u();
        // S^2 = ad(u)
        {
            let uinv = self.invert_elem(&u)?;
            for i in 0..n {
                let s2 = self.antipode_of(&self.antipode_of(&self.basis_elem(i)));
                let ad = t.mul_vec(&t.mul_vec(&u, &self.basis_elem(i)), &uinv);
                if s2 != ad {
                    return fail(format!("S^2 != u ( ) u^-1 at e_{}", i));
                }
            }
        }
        // pivot, if present: g = u v^-1, group-like, S^2 = ad(g)
        if let Some(g) = &self.pivot {
            let vinv = self.invert_elem(v)?;
            let expect = t.mul_vec(&u, &vinv);
            if *g != expect {
                return fail("pivot: g != u v^-1".into());
            }
            let dg = t.comul_vec(g);
            if dg != tensor_of(g, g) {
                return fail("pivot: Delta(g) != g (x) g".into());
            }
        }
        Ok(())
    }

    /// Verify only the antipode axiom m(S (x) id)Delta = m(id (x) S)Delta = eta eps.
    pub fn verify_antipode_axiom(&self) -> Result<()> {
        let t = self.tables();
        let n = self.dim;
        for i in 0..n {
            let mut left = vec![Scalar::zero(); n];
            let mut right = vec![Scalar::zero(); n];
            for (j, k, c) in &t.comul[i] {
                let s1 = self.antipode_of(&self.basis_elem(*j));
                let term = t.mul_vec(&s1, &self.basis_elem(*k));
                vec_add_scaled(&mut left, &term, c);
                let s2 = self.antipode_of(&self.basis_elem(*k));
                let term = t.mul_vec(&self.basis_elem(*j), &s2);
                vec_add_scaled(&mut right, &term, c);
            }
            let mut target = vec![Scalar::zero(); n];
            vec_add_scaled(&mut target, &self.unit, &self.counit[i]);
            if left != target || right != target {
                return Err(Error::AxiomsViolated(format!("antipode axiom fails at e_{}", i)));
            }
        }
        Ok(())
    }

    /// The Drinfeld map f |-> (f (x) id)(R21 R) as a matrix H^* -> H in the
    /// basis (f^i) -> (e_j); the algebra is factorizable iff it is invertible.
    pub fn drinfeld_map(&self) -> Mat {
        let n = self.dim;
        let t = self.tables();
        let r = self.r_col();
        let r21 = flip2_sparse(&r, n);
        let m = t.mul_tensor2_sparse(&r21, &r);
        let mut fmat = Mat::zeros(n, n);
        for (&idx, c) in &m {
            let (a, b) = (idx / n, idx % n);
            fmat.set(b, a, fmat.at(b, a).add(c));
        }
        fmat
    }

    /// Factorizability (the monodromy pairing is non-degenerate).
    pub fn is_factorizable(&self) -> bool {
        self.drinfeld_map().rank() == self.dim
    }

    /// The group-likes of the catalogue list that are central in H.
    pub fn central_group_likes(&self) -> Vec<Elem> {
        let t = self.tables();
        let n = self.dim;
        self.group_likes
            .iter()
            .filter(|g| {
                (0..n).all(|i| {
                    t.mul_vec(g, &self.basis_elem(i)) == t.mul_vec(&self.basis_elem(i), g)
                })
            })
            .cloned()
            .collect()
    }

    /// Verify the ribbon axioms for a candidate element v: counital, S-fixed,
    /// central, v^2 = u S(u), and (R21 R) Delta(v) = v (x) v.
    pub fn check_ribbon(&self, v: &[Scalar]) -> Result<()> {
        let t = self.tables();
        let n = self.dim;
        let fail = |msg: String| Err(Error::AxiomsViolated(msg));
        if self.counit_of(v) != Scalar::one() {
            return fail("ribbon: eps(v) != 1".into());
        }
        if self.antipode_of(v) != *v {
            return fail("ribbon: S(v) != v".into());
        }
        for i in 0..n {
            let l = t.mul_vec(v, &self.basis_elem(i));
            let rr = t.mul_vec(&self.basis_elem(i), v);
            if l != rr {
                return fail(format!("ribbon: v not central (fails at e_{})", i));
            }
        }
        let u = self.drinfeld_u();
        let usu = t.mul_vec(&u, &self.antipode_of(&u));
        let v2 = t.mul_vec(v, v);
        if v2 != usu {
            return fail("ribbon: v^2 != u S(u)".into());
        }
        // (R21 R) Delta(v) = v (x) v
        let r = self.r_col();
        let r21 = flip2_sparse(&r, n);
        let m = t.mul_tensor2_sparse(&r21, &r);
        let dv = dense_to_sparse(&t.comul_vec(v));
        let lhs = t.mul_tensor2_sparse(&m, &dv);
        let vv = dense_to_sparse(&tensor_of(v, v));
        if lhs != vv {
            return fail("ribbon: (R21 R) Delta(v) != v (x) v".into());
        }
        Ok(())
    }

    /// Left/right integrals and cointegrals, each normalized so the first
    /// nonzero coordinate is 1.
    pub fn integrals(&self) -> Result<Integrals> {
        let n = self.dim;
        let one_dim = |rows: Vec<Vec<Scalar>>, what: &str| -> Result<Elem> {
            let m = Mat::from_rows(rows);
            let ns = m.nullspace();
            if ns.len() != 1 {
                let _ = what;
                return Err(Error::NonUniqueIntegral(ns.len()));
            }
            Ok(normalize_first(&ns[0]))
        };
        // left integral: (L(e_i) - eps(e_i) I) x = 0 for all i
        let mut rows = Vec::new();
        for i in 0..n {
            let l = self.left_mul_mat(&self.basis_elem(i));
            for r in 0..n {
                let mut row = Vec::with_capacity(n);
                for c in 0..n {
                    let mut v = l.at(r, c).clone();
                    if r == c {
                        v = v.sub(&self.counit[i]);
                    }
                    row.push(v);
                }
                rows.push(row);
            }
        }
        let left_integral = one_dim(rows, "left integral")?;
        let mut rows = Vec::new();
        for i in 0..n {
            let l = self.right_mul_mat(&self.basis_elem(i));
            for r in 0..n {
                let mut row = Vec::with_capacity(n);
                for c in 0..n {
                    let mut v = l.at(r, c).clone();
                    if r == c {
                        v = v.sub(&self.counit[i]);
                    }
                    row.push(v);
                }
                rows.push(row);
            }
        }
        let right_integral = one_dim(rows, "right integral")?;
        // left cointegral lambda: (id (x) lambda) Delta(a) = lambda(a) 1
        let t = self.tables();
        let mut rows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![Scalar::zero(); n];
                for (p, q, c) in &t.comul[i] {
                    if *p == j {
                        row[*q] = row[*q].add(c);
                    }
                }
                row[i] = row[i].sub(&self.unit[j]);
                rows.push(row);
            }
        }
        let left_cointegral = one_dim(rows, "left cointegral")?;
        // right cointegral: (lambda (x) id) Delta(a) = lambda(a) 1
        let mut rows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![Scalar::zero(); n];
                for (p, q, c) in &t.comul[i] {
                    if *q == j {
                        row[*p] = row[*p].add(c);
                    }
                }
                row[i] = row[i].sub(&self.unit[j]);
                rows.push(row);
            }
        }
        let right_cointegral = one_dim(rows, "right cointegral")?;
        Ok(Integrals { left_integral, right_integral, left_cointegral, right_cointegral })
    }

    /// Maschke criterion: semisimple iff eps(left integral) != 0.
    pub fn is_semisimple(&self) -> Result<bool> {
        let ints = self.integrals()?;
        Ok(!self.counit_of(&ints.left_integral).is_zero())
    }

    /// Search for a ribbon element: candidates are u scaled by the known
    /// group-likes (any ribbon element differs from u by a group-like), each
    /// fully verified; deterministic candidate order.
    pub fn find_ribbon(&self) -> Result<Elem> {
        let t = self.tables();
        let u = self.drinfeld_u();
        let mut candidates: Vec<Elem> = vec![u.clone()];
        for gl in &self.group_likes {
            candidates.push(t.mul_vec(gl, &u));
            candidates.push(t.mul_vec(&u, gl));
            if let Ok(gi) = self.invert_elem(gl) {
                candidates.push(t.mul_vec(&gi, &u));
                candidates.push(t.mul_vec(&u, &gi));
            }
        }
        for cand in candidates {
            if vec_is_zero(&cand) {
                continue;
            }
            if self.check_ribbon(&cand).is_ok() {
                return Ok(cand);
            }
        }
        Err(Error::NoRibbonElement)
    }

    /// Drinfeld double D(H) = (H^*)^cop (join) H on the basis f^i (x) e_j,
    /// flat index i*dim + j, with the canonical quasitriangular structure
    /// R = sum_i (eps (x) e_i) (x) (f^i (x) 1). The ribbon element is found
    /// by the group-like search and the pivot set to u v^-1.
    pub fn drinfeld_double(&self) -> Result<RibbonHopfAlgebra> {
        let mut dd = self.double_skeleton()?;
        dd.ribbon = dd.find_ribbon()?;
        let u = dd.drinfeld_u();
        let vinv = dd.invert_elem(&dd.ribbon)?;
        dd.pivot = Some(dd.tables().mul_vec(&u, &vinv));
        dd.check_axioms()?;
        Ok(dd)
    }

    /// The double with everything except the ribbon element (set to the unit
    /// as a placeholder) and pivot.
    pub fn double_skeleton(&self) -> Result<RibbonHopfAlgebra> {
        let n = self.dim;
        let nn = n * n;
        let t = self.tables();
        let s_inv = self.antipode_inv()?;
        // Delta^2(e_j) as (p, q, r, c)
        let mut d2: Vec<Vec<(usize, usize, usize, Scalar)>> = vec![Vec::new(); n];
        for j in 0..n {
            for (a, b, c) in &t.comul[j] {
                for (p, q, d) in &t.comul[*a] {
                    d2[j].push((*p, *q, *b, c.mul(d)));
                }
            }
        }
        // sparse basis-product lookup
        let empty: Vec<(usize, Scalar)> = Vec::new();
        let pt = |i: usize, j: usize| t.mul.get(&(i, j)).unwrap_or(&empty);
        // dual multiplication index: f^i f^m = sum_s [Delta(e_s)]_{(i,m)} f^s
        let mut fmul: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); n * n];
        for s in 0..n {
            for (x, y, c) in &t.comul[s] {
                fmul[x * n + y].push((s, c.clone()));
            }
        }
        // triple products S^-1(e_r) e_m e_p, indexed r*n^2 + m*n + p, sparse
        let sinv_basis: Vec<Elem> = (0..n).map(|r| s_inv.apply(&self.basis_elem(r)).unwrap()).collect();
        let mut triple: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); n * n * n];
        for r in 0..n {
            for m in 0..n {
                let rm = t.mul_vec(&sinv_basis[r], &self.basis_elem(m));
                for p in 0..n {
                    let mut acc: SparseCol = BTreeMap::new();
                    for (w, c) in rm.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (k, d) in pt(w, p) {
                            add_sparse(&mut acc, *k, &c.mul(d));
                        }
                    }
                    triple[(r * n + m) * n + p] = acc.into_iter().collect();
                }
            }
        }
        let mut mul_d: Vec<(usize, usize, usize, Scalar)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let a = i * n + j; // f^i (x) e_j
                for k in 0..n {
                    for l in 0..n {
                        let b = k * n + l;
                        // sum over Delta^2(e_j)
                        let mut out: BTreeMap<usize, Scalar> = BTreeMap::new();
                        for (p, q, r, c1) in &d2[j] {
                            // functional part: sum_m [S^-1(e_r) e_m e_p]_k f^m
                            for m in 0..n {
                                let mut c2 = Scalar::zero();
                                for (w, c) in &triple[(*r * n + m) * n + *p] {
                                    if *w == k {
                                        c2 = c2.add(c);
                                    }
                                }
                                if c2.is_zero() {
                                    continue;
                                }
                                for (s, c3) in &fmul[i * n + m] {
                                    for (tt, c4) in pt(*q, l) {
                                        let coef = c1.mul(&c2).mul(c3).mul(c4);
                                        if !coef.is_zero() {
                                            add_sparse(&mut out, s * n + tt, &coef);
                                        }
                                    }
                                }
                            }
                        }
                        for (idx, c) in out {
                            mul_d.push((a, b, idx, c));
                        }
                    }
                }
            }
        }
        // coproduct (cop on the dual factor):
        // Delta_D(f^s (x) e_h) = sum [e_i e_m]_s [Delta(e_h)]_{(h1,h2)}
        //   (f^m (x) e_{h1}) (x) (f^i (x) e_{h2})
        let mut comul_d: Vec<(usize, usize, usize, Scalar)> = Vec::new();
        for s in 0..n {
            // dual coproduct coefficients: [e_i e_m]_s
            let mut dual: Vec<(usize, usize, Scalar)> = Vec::new();
            for i in 0..n {
                for m in 0..n {
                    for (w, c) in pt(i, m) {
                        if *w == s {
                            dual.push((i, m, c.clone()));
                        }
                    }
                }
            }
            for h in 0..n {
                let a = s * n + h;
                for (i, m, c1) in &dual {
                    for (h1, h2, c2) in &t.comul[h] {
                        comul_d.push((a, m * n + h1, i * n + h2, c1.mul(c2)));
                    }
                }
            }
        }
        let mut unit_d = vec![Scalar::zero(); nn];
        for i in 0..n {
            for j in 0..n {
                let v = self.counit[i].mul(&self.unit[j]);
                if !v.is_zero() {
                    unit_d[i * n + j] = v;
                }
            }
        }
        let mut counit_d = vec![Scalar::zero(); nn];
        for i in 0..n {
            for j in 0..n {
                // f^i(1) eps(e_j)
                let v = self.unit[i].mul(&self.counit[j]);
                if !v.is_zero() {
                    counit_d[i * n + j] = v;
                }
            }
        }
        let mut r_d: Vec<(usize, usize, Scalar)> = Vec::new();
        for i in 0..n {
            // (eps (x) e_i) (x) (f^i (x) 1)
            for k in 0..n {
                if self.counit[k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if self.unit[j].is_zero() {
                        continue;
                    }
                    r_d.push((k * n + i, i * n + j, self.counit[k].mul(&self.unit[j])));
                }
            }
        }
        // group-likes and characters of the double
        let mut group_likes_d = Vec::new();
        for gamma in &self.characters {
            for g in &self.group_likes {
                let mut cand = vec![Scalar::zero(); nn];
                for i in 0..n {
                    for j in 0..n {
                        let v = gamma[i].mul(&g[j]);
                        if !v.is_zero() {
                            cand[i * n + j] = v;
                        }
                    }
                }
                group_likes_d.push(cand);
            }
        }
        let mut characters_d = Vec::new();
        for g in &self.group_likes {
            for gamma in &self.characters {
                // chi(f^i (x) e_j) = f^i(g) gamma(e_j) = g_i gamma_j
                let mut chi = vec![Scalar::zero(); nn];
                for i in 0..n {
                    for j in 0..n {
                        let v = g[i].mul(&gamma[j]);
                        if !v.is_zero() {
                            chi[i * n + j] = v;
                        }
                    }
                }
                characters_d.push(chi);
            }
        }
        // generators: all f^i (x) 1 plus eps (x) gen
        let mut gens_d: Vec<Elem> = Vec::new();
        for i in 0..n {
            let mut v = vec![Scalar::zero(); nn];
            for j in 0..n {
                if !self.unit[j].is_zero() {
                    v[i * n + j] = self.unit[j].clone();
                }
            }
            gens_d.push(v);
        }
        for g in &self.gens {
            let mut v = vec![Scalar::zero(); nn];
            for i in 0..n {
                for j in 0..n {
                    let c = self.counit[i].mul(&g[j]);
                    if !c.is_zero() {
                        v[i * n + j] = c;
                    }
                }
            }
            gens_d.push(v);
        }
        let mut dd = RibbonHopfAlgebra {
            name: format!("double_{}", self.name),
            cyclotomic_order: self.cyclotomic_order,
            dim: nn,
            mul: mul_d,
            unit: unit_d,
            comul: comul_d,
            counit: counit_d,
            antipode: Mat::identity(nn), // placeholder; solved below
            r_matrix: r_d,
            ribbon: vec![Scalar::zero(); nn],
            pivot: None,
            gens: gens_d,
            group_likes: group_likes_d,
            characters: characters_d,
        };
        // closed-form antipode of the double:
        // S_D(f^i (x) e_j) = (eps (x) S e_j) *_D (f^i o S^-1 (x) 1),
        // where f^i o S^-1 = sum_k (S^-1)_{ik} f^k. Verified below; the
        // generic linear solve is kept as a fallback for small dimensions.
        {
            let td = dd.tables();
            let mut s_d = Mat::zeros(nn, nn);
            let s_mat = &self.antipode;
            for i in 0..n {
                // right factor: sum_k (S^-1)_{ik} f^k (x) 1
                let mut rf = vec![Scalar::zero(); nn];
                for k in 0..n {
                    let c = s_inv.at(i, k);
                    if c.is_zero() {
                        continue;
                    }
                    for w in 0..n {
                        if !self.unit[w].is_zero() {
                            rf[k * n + w] = c.mul(&self.unit[w]);
                        }
                    }
                }
                for j in 0..n {
                    // left factor: eps (x) S(e_j)
                    let mut lf = vec![Scalar::zero(); nn];
                    for p in 0..n {
                        if self.counit[p].is_zero() {
                            continue;
                        }
                        for w in 0..n {
                            let c = s_mat.at(w, j);
                            if !c.is_zero() {
                                lf[p * n + w] = self.counit[p].mul(c);
                            }
                        }
                    }
                    let col = td.mul_vec(&lf, &rf);
                    for (r, c) in col.into_iter().enumerate() {
                        if !c.is_zero() {
                            s_d.set(r, i * n + j, c);
                        }
                    }
                }
            }
            dd.antipode = s_d;
        }
        if dd.verify_antipode_axiom().is_err() {
            dd.antipode = dd.solve_antipode()?;
        }
        // verify group-likes / characters, drop any that fail
        let td = dd.tables();
        let gls = dd.group_likes.clone();
        dd.group_likes = gls
            .into_iter()
            .filter(|g| td.comul_vec(g) == tensor_of(g, g) && dd.counit_of(g).is_one())
            .collect();
        let chars = dd.characters.clone();
        dd.characters = chars
            .into_iter()
            .filter(|chi| {
                let ev = |x: &[Scalar]| -> Scalar {
                    let mut acc = Scalar::zero();
                    for (a, b) in x.iter().zip(chi.iter()) {
                        if !a.is_zero() && !b.is_zero() {
                            acc = acc.add(&a.mul(b));
                        }
                    }
                    acc
                };
                if !ev(&dd.unit).is_one() {
                    return false;
                }
                // multiplicativity on basis pairs, via the sparse product table
                for i in 0..nn {
                    for j in 0..nn {
                        let mut lhs = Scalar::zero();
                        if let Some(list) = td.mul.get(&(i, j)) {
                            for (k, c) in list {
                                if !chi[*k].is_zero() {
                                    lhs = lhs.add(&c.mul(&chi[*k]));
                                }
                            }
                        }
                        if lhs != chi[i].mul(&chi[j]) {
                            return false;
                        }
                    }
                }
                true
            })
            .collect();
        dd.ribbon = dd.unit.clone();
        Ok(dd)
    }

    /// Quotient by the Hopf ideal generated by (kappa - 1) for a central
    /// group-like kappa. The quotient inherits the quasitriangular structure;
    /// a ribbon element is searched for in the quotient, the pivot is set to
    /// u v^-1, and all axioms are re-verified.
    pub fn quotient_by_central_group_like(&self, kappa: &[Scalar]) -> Result<RibbonHopfAlgebra> {
        let n = self.dim;
        let t = self.tables();
        // sanity: kappa group-like and central
        if t.comul_vec(kappa) != tensor_of(kappa, kappa) || !self.counit_of(kappa).is_one() {
            return Err(Error::AxiomsViolated("quotient: kappa is not group-like".into()));
        }
        for i in 0..n {
            if t.mul_vec(kappa, &self.basis_elem(i)) != t.mul_vec(&self.basis_elem(i), kappa) {
                return Err(Error::AxiomsViolated("quotient: kappa is not central".into()));
            }
        }
        // ideal W = span{ (kappa - 1) e_i }, in row echelon form
        let mut wrows = Vec::new();
        for i in 0..n {
            let mut w = t.mul_vec(kappa, &self.basis_elem(i));
            for (a, b) in w.iter_mut().zip(self.basis_elem(i)) {
                *a = a.sub(&b);
            }
            wrows.push(w);
        }
        let (rref, pivots) = Mat::from_rows(wrows).rref();
        let reduce = |v: &[Scalar]| -> Vec<Scalar> {
            let mut x = v.to_vec();
            for (ri, &pc) in pivots.iter().enumerate() {
                if !x[pc].is_zero() {
                    let f = x[pc].clone();
                    for c in 0..n {
                        x[c] = x[c].sub(&rref.at(ri, c).mul(&f));
                    }
                }
            }
            x
        };
        // quotient basis: residue classes of the non-pivot coordinates
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let m = free.len();
        let tofree = |x: &[Scalar]| -> Vec<Scalar> { free.iter().map(|&c| x[c].clone()).collect() };
        let lift = |q: usize| self.basis_elem(free[q]);
        let reduce2 = |grid_in: &dyn Fn(usize, usize) -> Scalar| -> Vec<(usize, usize, Scalar)> {
            // reduce an element of H (x) H in both tensor slots
            let mut grid2 = vec![vec![Scalar::zero(); m]; n];
            for r in 0..n {
                let row: Vec<Scalar> = (0..n).map(|c| grid_in(r, c)).collect();
                let red = tofree(&reduce(&row));
                for (q, c) in red.into_iter().enumerate() {
                    grid2[r][q] = c;
                }
            }
            let mut out = Vec::new();
            for q in 0..m {
                let col: Vec<Scalar> = (0..n).map(|r| grid2[r][q].clone()).collect();
                let red = tofree(&reduce(&col));
                for (p, c) in red.into_iter().enumerate() {
                    if !c.is_zero() {
                        out.push((p, q, c));
                    }
                }
            }
            out
        };
        let mut mulq = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let p = tofree(&reduce(&t.mul_vec(&lift(i), &lift(j))));
                for (k, c) in p.into_iter().enumerate() {
                    if !c.is_zero() {
                        mulq.push((i, j, k, c));
                    }
                }
            }
        }
        let mut comulq = Vec::new();
        for i in 0..m {
            let d = t.comul_vec(&lift(i));
            for (p, q, c) in reduce2(&|r, s| d[r * n + s].clone()) {
                comulq.push((i, p, q, c));
            }
        }
        let unitq = tofree(&reduce(&self.unit));
        let counitq: Vec<Scalar> = (0..m).map(|i| self.counit_of(&lift(i))).collect();
        let mut antq = Mat::zeros(m, m);
        for j in 0..m {
            let s = tofree(&reduce(&self.antipode_of(&lift(j))));
            for (r, c) in s.into_iter().enumerate() {
                antq.set(r, j, c);
            }
        }
        let mut rgrid = vec![vec![Scalar::zero(); n]; n];
        for (i, j, c) in &self.r_matrix {
            rgrid[*i][*j] = rgrid[*i][*j].add(c);
        }
        let rq = reduce2(&|r, s| rgrid[r][s].clone());
        // group-likes: images of the known ones, deduplicated
        let mut glq: Vec<Elem> = Vec::new();
        for g in &self.group_likes {
            let img = tofree(&reduce(g));
            if !glq.contains(&img) {
                glq.push(img);
            }
        }
        // characters descend iff chi(kappa) = 1
        let mut chq: Vec<Elem> = Vec::new();
        for chi in &self.characters {
            let mut at_kappa = Scalar::zero();
            for (a, b) in kappa.iter().zip(chi.iter()) {
                if !a.is_zero() && !b.is_zero() {
                    at_kappa = at_kappa.add(&a.mul(b));
                }
            }
            if at_kappa.is_one() {
                chq.push((0..m).map(|q| chi[free[q]].clone()).collect());
            }
        }
        let gensq: Vec<Elem> = self.gens.iter().map(|g| tofree(&reduce(g))).collect();
        let mut hq = RibbonHopfAlgebra {
            name: format!("{}_quotient", self.name),
            cyclotomic_order: self.cyclotomic_order,
            dim: m,
            mul: mulq,
            unit: unitq,
            comul: comulq,
            counit: counitq,
            antipode: antq,
            r_matrix: rq,
            ribbon: vec![Scalar::zero(); m],
            pivot: None,
            gens: gensq,
            group_likes: glq,
            characters: chq,
        };
        hq.ribbon = hq.unit.clone();
        hq.ribbon = hq.find_ribbon()?;
        let u = hq.drinfeld_u();
        let vinv = hq.invert_elem(&hq.ribbon)?;
        hq.pivot = Some(hq.tables().mul_vec(&u, &vinv));
        hq.check_axioms()?;
        Ok(hq)
    }

    /// Solve the antipode axiom m(S (x) id)Delta = eta eps as a linear system
    /// in the matrix entries of S; the solution is unique for a bialgebra
    /// that admits an antipode.
    pub fn solve_antipode(&self) -> Result<Mat> {
        let n = self.dim;
        let t = self.tables();
        // unknowns S[r][c], flat r*n + c; equations: for each basis a and each
        // output coordinate w: sum_{(j,k,c)} sum_r S[r][j] [e_r e_k]_w = eps(a) unit_w
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for a in 0..n {
            let mut eq = vec![vec![Scalar::zero(); n * n]; n];
            for (j, k, c) in &t.comul[a] {
                for r in 0..n {
                    let prod = t.mul_vec(&self.basis_elem(r), &self.basis_elem(*k));
                    for (w, pv) in prod.iter().enumerate() {
                        if !pv.is_zero() {
                            eq[w][r * n + j] = eq[w][r * n + j].add(&c.mul(pv));
                        }
                    }
                }
            }
            for (w, row) in eq.into_iter().enumerate() {
                rows.push(row);
                rhs.push(self.counit[a].mul(&self.unit[w]));
            }
        }
        let m = Mat::from_rows(rows);
        let x = m
            .solve(&rhs)
            .ok_or_else(|| Error::AxiomsViolated("no antipode exists".into()))?;
        let mut s = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                s.set(r, c, x[r * n + c].clone());
            }
        }
        Ok(s)
    }
}

#[derive(Clone, Debug)]
pub struct Integrals {
    pub left_integral: Elem,
    pub right_integral: Elem,
    pub left_cointegral: Elem,
    pub right_cointegral: Elem,
}

pub fn normalize_first(v: &[Scalar]) -> Elem {
    for c in v {
        if !c.is_zero() {
            let inv = c.inv().unwrap();
            return v.iter().map(|x| x.mul(&inv)).collect();
        }
    }
    v.to_vec()
}

pub fn tensor_of(a: &[Scalar], b: &[Scalar]) -> Elem {
    let mut out = vec![Scalar::zero(); a.len() * b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i * b.len() + j] = x.mul(y);
            }
        }
    }
    out
}

fn flip2(v: &[Scalar], n: usize) -> Elem {
    let mut out = vec![Scalar::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = v[i * n + j].clone();
        }
    }
    out
}

pub fn flip2_sparse(v: &SparseCol, n: usize) -> SparseCol {
    v.iter()
        .map(|(&idx, c)| ((idx % n) * n + idx / n, c.clone()))
        .collect()
}

pub fn dense_to_sparse(v: &[Scalar]) -> SparseCol {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

pub fn sparse_to_dense(v: &SparseCol, len: usize) -> Elem {
    let mut out = vec![Scalar::zero(); len];
    for (&i, c) in v {
        out[i] = c.clone();
    }
    out
}

pub fn add_sparse(col: &mut SparseCol, idx: usize, v: &Scalar) {
    if v.is_zero() {
        return;
    }
    let cur = col.entry(idx).or_insert_with(Scalar::zero);
    let nv = cur.add(v);
    if nv.is_zero() {
        col.remove(&idx);
    } else {
        *cur = nv;
    }
}

/// Place a tensor-square element into 3 factors at positions (p, q), with the
/// unit in the remaining slot.
fn place3(r: &SparseCol, n: usize, p: usize, q: usize, unit: &[Scalar]) -> SparseCol {
    let free = 3 - p - q;
    let mut out = BTreeMap::new();
    for (&idx, c) in r {
        let (i, j) = (idx / n, idx % n);
        for (k, uc) in unit.iter().enumerate() {
            if uc.is_zero() {
                continue;
            }
            let mut coords = [0usize; 3];
            coords[p] = i;
            coords[q] = j;
            coords[free] = k;
            let flat = (coords[0] * n + coords[1]) * n + coords[2];
            add_sparse(&mut out, flat, &c.mul(uc));
        }
    }
    out
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "trivial",
    "group_z2_semion",
    "group_z3",
    "sweedler",
    "double_z2",
    "double_sweedler",
    "quantum_sl2",
];

/// Group algebra of Z/m with the trivial quasitriangular structure.
fn group_algebra(m: usize, cyclotomic_order: u32) -> RibbonHopfAlgebra {
    let one = Scalar::one();
    let mut mul = Vec::new();
    let mut comul = Vec::new();
    for i in 0..m {
        for j in 0..m {
            mul.push((i, j, (i + j) % m, one.clone()));
        }
        comul.push((i, i, i, one.clone()));
    }
    let mut antipode = Mat::zeros(m, m);
    for j in 0..m {
        antipode.set((m - j) % m, j, one.clone());
    }
    let mut unit = vec![Scalar::zero(); m];
    unit[0] = one.clone();
    let counit = vec![one.clone(); m];
    let group_likes: Vec<Elem> = (0..m)
        .map(|j| {
            let mut v = vec![Scalar::zero(); m];
            v[j] = one.clone();
            v
        })
        .collect();
    // characters chi_a(g^j) = zeta_m^{aj}
    let characters: Vec<Elem> = (0..m)
        .map(|a| {
            (0..m)
                .map(|j| {
                    Scalar::root_of_unity(cyclotomic_order, (a * j) as i64 * (cyclotomic_order as i64) / (m as i64))
                })
                .collect()
        })
        .collect();
    let gens = if m > 1 { vec![group_likes[1].clone()] } else { vec![unit.clone()] };
    RibbonHopfAlgebra {
        name: format!("group_z{}", m),
        cyclotomic_order,
        dim: m,
        mul,
        unit: unit.clone(),
        comul,
        counit,
        antipode,
        r_matrix: vec![(0, 0, one)],
        ribbon: unit.clone(),
        pivot: Some(unit),
        gens,
        group_likes,
        characters,
    }
}

/// The Sweedler algebra H4: basis 1, g, x, gx with g^2 = 1, x^2 = 0,
/// xg = -gx; triangular R built from the group part, ribbon 1, pivot g.
fn sweedler(cyclotomic_order: u32) -> RibbonHopfAlgebra {
    let o = Scalar::one;
    let n = || Scalar::from_int(-1);
    let h = || Scalar::from_ratio(1, 2);
    let nh = || Scalar::from_ratio(-1, 2);
    // indices: 0 = 1, 1 = g, 2 = x, 3 = gx
    let mul = vec![
        (0, 0, 0, o()),
        (0, 1, 1, o()),
        (0, 2, 2, o()),
        (0, 3, 3, o()),
        (1, 0, 1, o()),
        (1, 1, 0, o()),
        (1, 2, 3, o()),
        (1, 3, 2, o()),
        (2, 0, 2, o()),
        (2, 1, 3, n()),
        (3, 0, 3, o()),
        (3, 1, 2, n()),
    ];
    let comul = vec![
        (0, 0, 0, o()),
        (1, 1, 1, o()),
        (2, 2, 0, o()),
        (2, 1, 2, o()),
        (3, 3, 1, o()),
        (3, 0, 3, o()),
    ];
    let counit = vec![o(), o(), Scalar::zero(), Scalar::zero()];
    let mut antipode = Mat::zeros(4, 4);
    antipode.set(0, 0, o());
    antipode.set(1, 1, o());
    antipode.set(3, 2, n()); // S(x) = -gx
    antipode.set(2, 3, o()); // S(gx) = x
    let r_matrix = vec![
        (0, 0, h()),
        (0, 1, h()),
        (1, 0, h()),
        (1, 1, nh()),
    ];
    let mut unit = vec![Scalar::zero(); 4];
    unit[0] = o();
    let mut g = vec![Scalar::zero(); 4];
    g[1] = o();
    let mut x = vec![Scalar::zero(); 4];
    x[2] = o();
    RibbonHopfAlgebra {
        name: "sweedler".into(),
        cyclotomic_order,
        dim: 4,
        mul,
        unit: unit.clone(),
        comul,
        counit,
        antipode,
        r_matrix,
        ribbon: unit.clone(),
        pivot: Some(g.clone()),
        gens: vec![g.clone(), x],
        group_likes: vec![unit, g],
        characters: vec![
            vec![o(), o(), Scalar::zero(), Scalar::zero()],
            vec![o(), n(), Scalar::zero(), Scalar::zero()],
        ],
    }
}

/// Taft algebra T_p: basis g^a x^b (0 <= a, b < p, flat index b*p + a) with
/// g^p = 1, x^p = 0, x g = q g x for q a primitive p-th root of unity,
/// Delta(g) = g (x) g, Delta(x) = x (x) 1 + g (x) x. Not quasitriangular for
/// p > 2 (the r_matrix field holds a placeholder); used as the input of the
/// double construction.
pub fn taft(p: usize, cyclotomic_order: u32) -> RibbonHopfAlgebra {
    assert_eq!(cyclotomic_order as usize % p, 0);
    let step = cyclotomic_order as i64 / p as i64;
    let q = |k: i64| Scalar::root_of_unity(cyclotomic_order, k.rem_euclid(p as i64) * step);
    let n = p * p;
    let idx = |a: usize, b: usize| b * p + a;
    // monomial product: (g^a x^b)(g^c x^d) = q^{bc} g^{a+c} x^{b+d}
    let mono_mul = |i: usize, j: usize| -> Option<(usize, Scalar)> {
        let (a, b) = (i % p, i / p);
        let (c, d) = (j % p, j / p);
        if b + d >= p {
            return None;
        }
        Some((idx((a + c) % p, b + d), q((b * c) as i64)))
    };
    let mut mul = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if let Some((k, c)) = mono_mul(i, j) {
                mul.push((i, j, k, c));
            }
        }
    }
    // coproduct by iterated multiplication in H (x) H
    type T2 = BTreeMap<(usize, usize), Scalar>;
    let t2mul = |u: &T2, v: &T2| -> T2 {
        let mut out: T2 = BTreeMap::new();
        for ((i1, i2), c1) in u {
            for ((j1, j2), c2) in v {
                if let (Some((k1, d1)), Some((k2, d2))) = (mono_mul(*i1, *j1), mono_mul(*i2, *j2)) {
                    let coef = c1.mul(c2).mul(&d1).mul(&d2);
                    if !coef.is_zero() {
                        let cur = out.entry((k1, k2)).or_insert_with(Scalar::zero);
                        *cur = cur.add(&coef);
                    }
                }
            }
        }
        out.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    };
    let dg: T2 = [((idx(1, 0), idx(1, 0)), Scalar::one())].into_iter().collect();
    let dx: T2 = [
        ((idx(0, 1), 0), Scalar::one()),
        ((idx(1, 0), idx(0, 1)), Scalar::one()),
    ]
    .into_iter()
    .collect();
    let mut comul = Vec::new();
    for a in 0..p {
        for b in 0..p {
            let mut d: T2 = [((0, 0), Scalar::one())].into_iter().collect();
            for _ in 0..a {
                d = t2mul(&d, &dg);
            }
            for _ in 0..b {
                d = t2mul(&d, &dx);
            }
            for ((j, k), c) in d {
                comul.push((idx(a, b), j, k, c));
            }
        }
    }
    let counit: Vec<Scalar> = (0..n)
        .map(|i| if i / p == 0 { Scalar::one() } else { Scalar::zero() })
        .collect();
    // antipode on monomials: S(g^a x^b) = (-g^{p-1} x)^b g^{(p-a) mod p}
    let mut antipode = Mat::zeros(n, n);
    for a in 0..p {
        for b in 0..p {
            // accumulate the single-monomial image
            let mut cur = (0usize, Scalar::one());
            for _ in 0..b {
                let (k, c) = mono_mul(cur.0, idx(p - 1, 1)).expect("x-degree < p");
                cur = (k, cur.1.mul(&c).mul(&Scalar::from_int(-1)));
            }
            let (k, c) = mono_mul(cur.0, idx((p - a) % p, 0)).expect("x-degree fits");
            antipode.set(k, idx(a, b), cur.1.mul(&c));
        }
    }
    let mut unit = vec![Scalar::zero(); n];
    unit[0] = Scalar::one();
    let group_likes: Vec<Elem> = (0..p)
        .map(|a| {
            let mut v = vec![Scalar::zero(); n];
            v[idx(a, 0)] = Scalar::one();
            v
        })
        .collect();
    let characters: Vec<Elem> = (0..p as i64)
        .map(|j| {
            let mut v = vec![Scalar::zero(); n];
            for a in 0..p {
                v[idx(a, 0)] = q(j * a as i64);
            }
            v
        })
        .collect();
    let mut x_elem = vec![Scalar::zero(); n];
    x_elem[idx(0, 1)] = Scalar::one();
    RibbonHopfAlgebra {
        name: format!("taft{}", p),
        cyclotomic_order,
        dim: n,
        mul,
        unit: unit.clone(),
        comul,
        counit,
        antipode,
        r_matrix: vec![(0, 0, Scalar::one())],
        ribbon: unit.clone(),
        pivot: None,
        gens: vec![group_likes[1].clone(), x_elem],
        group_likes,
        characters,
    }
}

pub fn builtin(name: &str) -> Result<RibbonHopfAlgebra> {
    match name {
        "trivial" => {
            let mut a = group_algebra(1, 1);
            a.name = "trivial".into();
            Ok(a)
        }
        "group_z2_semion" => {
            let mut a = group_algebra(2, 4);
            a.name = "group_z2_semion".into();
            let h = Scalar::from_ratio(1, 2);
            let nh = Scalar::from_ratio(-1, 2);
            a.r_matrix = vec![
                (0, 0, h.clone()),
                (0, 1, h.clone()),
                (1, 0, h),
                (1, 1, nh),
            ];
            // ribbon v = s; then u = s and the pivot is u v^-1 = 1
            a.ribbon = a.basis_elem(1);
            a.pivot = Some(a.unit.clone());
            Ok(a)
        }
        "group_z3" => {
            // anomalous abelian theory: R and v built from the idempotents
            // E_a = (1/3) sum_j zeta_3^{-aj} g^j
            let order = 12u32;
            let mut a = group_algebra(3, order);
            a.name = "group_z3".into();
            let z3 = |k: i64| Scalar::root_of_unity(order, 4 * k.rem_euclid(3));
            let third = Scalar::from_ratio(1, 3);
            let idem: Vec<Elem> = (0..3)
                .map(|aa: i64| {
                    (0..3)
                        .map(|j: i64| third.mul(&z3(-aa * j)))
                        .collect()
                })
                .collect();
            let mut r = Vec::new();
            for aa in 0..3i64 {
                for bb in 0..3i64 {
                    let c = z3(aa * bb);
                    for (j, ej) in idem[aa as usize].iter().enumerate() {
                        for (k, ek) in idem[bb as usize].iter().enumerate() {
                            let v = c.mul(ej).mul(ek);
                            if !v.is_zero() {
                                r.push((j, k, v));
                            }
                        }
                    }
                }
            }
            // merge duplicate (j, k) entries
            let mut merged: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
            for (j, k, v) in r {
                let cur = merged.entry((j, k)).or_insert_with(Scalar::zero);
                *cur = cur.add(&v);
            }
            a.r_matrix = merged
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((j, k), v)| (j, k, v))
                .collect();
            let mut v = vec![Scalar::zero(); 3];
            for aa in 0..3i64 {
                let c = z3(-aa * aa);
                for (j, ej) in idem[aa as usize].iter().enumerate() {
                    v[j] = v[j].add(&c.mul(ej));
                }
            }
            a.ribbon = v;
            a.pivot = Some(a.unit.clone()); // u = v here, so g = 1
            Ok(a)
        }
        "sweedler" => Ok(sweedler(4)),
        "double_z2" => {
            let base = group_algebra(2, 4);
            let mut d = base.drinfeld_double()?;
            d.name = "double_z2".into();
            Ok(d)
        }
        "double_sweedler" => {
            // The Drinfeld double of the Sweedler algebra admits no ribbon
            // element (the central square roots of u S(u) all fail the
            // monodromy coaxiom, and the obstruction persists over every
            // cyclotomic field). The catalogue entry is its maximal ribbon
            // quotient: the 8-dimensional quotient by the central group-like
            // kappa = (sign character) (x) g. It is ribbon and
            // non-semisimple but not factorizable, hence not modular.
            let base = sweedler(8);
            let skel = base.double_skeleton()?;
            let kappa = skel
                .central_group_likes()
                .into_iter()
                .find(|g| *g != skel.unit)
                .ok_or(Error::NoRibbonElement)?;
            let mut d = skel.quotient_by_central_group_like(&kappa)?;
            d.name = "double_sweedler".into();
            Ok(d)
        }
        "quantum_sl2" => {
            // Small quantum sl2 at a primitive third root of unity: the
            // quotient of the Drinfeld double of the Taft algebra T_3 by the
            // central group-like identifying the two Cartan generators.
            // Dimension 27, ribbon, non-semisimple, factorizable: the
            // catalogue's non-semisimple modular example.
            let base = taft(3, 12);
            let skel = base.double_skeleton()?;
            let kappa = skel
                .central_group_likes()
                .into_iter()
                .find(|g| *g != skel.unit)
                .ok_or(Error::NoRibbonElement)?;
            let mut d = skel.quotient_by_central_group_like(&kappa)?;
            d.name = "quantum_sl2".into();
            Ok(d)
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

impl Tables {
    pub fn mul_vec(&self, a: &[Scalar], b: &[Scalar]) -> Elem {
        let mut out = vec![Scalar::zero(); self.dim];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                if let Some(terms) = self.mul.get(&(i, j)) {
                    let xy = x.mul(y);
                    for (k, c) in terms {
                        out[*k] = out[*k].add(&xy.mul(c));
                    }
                }
            }
        }
        out
    }

    pub fn comul_vec(&self, a: &[Scalar]) -> Elem {
        let n = self.dim;
        let mut out = vec![Scalar::zero(); n * n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, k, c) in &self.comul[i] {
                out[j * n + k] = out[j * n + k].add(&x.mul(c));
            }
        }
        out
    }

    /// Product in H (x) H, dense inputs.
    pub fn mul_tensor2(&self, a: &[Scalar], b: &[Scalar]) -> Elem {
        sparse_to_dense(
            &self.mul_tensor2_sparse(&dense_to_sparse(a), &dense_to_sparse(b)),
            self.dim * self.dim,
        )
    }

    pub fn mul_tensor2_sparse(&self, a: &SparseCol, b: &SparseCol) -> SparseCol {
        let n = self.dim;
        let mut out = BTreeMap::new();
        for (&ia, ca) in a {
            let (a1, a2) = (ia / n, ia % n);
            for (&ib, cb) in b {
                let (b1, b2) = (ib / n, ib % n);
                let c = ca.mul(cb);
                if c.is_zero() {
                    continue;
                }
                let t1 = self.mul.get(&(a1, b1));
                let t2 = self.mul.get(&(a2, b2));
                if let (Some(t1), Some(t2)) = (t1, t2) {
                    for (k1, c1) in t1 {
                        for (k2, c2) in t2 {
                            add_sparse(&mut out, k1 * n + k2, &c.mul(c1).mul(c2));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mul_tensor3(&self, a: &SparseCol, b: &SparseCol) -> SparseCol {
        let n = self.dim;
        let mut out = BTreeMap::new();
        for (&ia, ca) in a {
            let (a1, rest) = (ia / (n * n), ia % (n * n));
            let (a2, a3) = (rest / n, rest % n);
            for (&ib, cb) in b {
                let (b1, rest) = (ib / (n * n), ib % (n * n));
                let (b2, b3) = (rest / n, rest % n);
                let c = ca.mul(cb);
                if c.is_zero() {
                    continue;
                }
                if let (Some(t1), Some(t2), Some(t3)) = (
                    self.mul.get(&(a1, b1)),
                    self.mul.get(&(a2, b2)),
                    self.mul.get(&(a3, b3)),
                ) {
                    for (k1, c1) in t1 {
                        for (k2, c2) in t2 {
                            for (k3, c3) in t3 {
                                add_sparse(
                                    &mut out,
                                    (k1 * n + k2) * n + k3,
                                    &c.mul(c1).mul(c2).mul(c3),
                                );
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_axioms() {
        for name in ["trivial", "group_z2_semion", "group_z3", "sweedler"] {
            let h = builtin(name).unwrap();
            h.check_axioms().unwrap_or_else(|e| panic!("{}: {}", name, e));
        }
    }

    #[test]
    fn double_z2_axioms() {
        let d = builtin("double_z2").unwrap();
        assert_eq!(d.dim, 4);
        d.check_axioms().unwrap();
    }

    #[test]
    fn double_sweedler_axioms() {
        // the full 16-dimensional double has no ribbon element ...
        let err = builtin("sweedler").unwrap().drinfeld_double();
        assert!(matches!(err, Err(Error::NoRibbonElement)));
        // ... and the catalogue entry is its 8-dimensional ribbon quotient,
        // which is not factorizable
        let d = builtin("double_sweedler").unwrap();
        assert_eq!(d.dim, 8);
        d.check_axioms().unwrap();
        assert!(!d.is_factorizable());
    }

    #[test]
    fn quantum_sl2_axioms() {
        let d = builtin("quantum_sl2").unwrap();
        assert_eq!(d.dim, 27);
        d.check_axioms().unwrap();
        assert!(!d.is_semisimple().unwrap());
        assert!(d.is_factorizable());
    }

    #[test]
    fn doubles_are_factorizable() {
        // the double itself is always factorizable, even when (as for the
        // Sweedler algebra) it has no ribbon element
        let skel = builtin("sweedler").unwrap().double_skeleton().unwrap();
        assert_eq!(skel.dim, 16);
        assert!(skel.is_factorizable());
        assert!(builtin("double_z2").unwrap().is_factorizable());
    }

    #[test]
    fn semion_drinfeld_u_is_s() {
        let h = builtin("group_z2_semion").unwrap();
        assert_eq!(h.drinfeld_u(), h.basis_elem(1));
    }

    #[test]
    fn sweedler_integrals() {
        let h = builtin("sweedler").unwrap();
        let ints = h.integrals().unwrap();
        // left integral x + gx, right integral x - gx (normalized)
        let mut left = vec![Scalar::zero(); 4];
        left[2] = Scalar::one();
        left[3] = Scalar::one();
        let mut right = vec![Scalar::zero(); 4];
        right[2] = Scalar::one();
        right[3] = Scalar::from_int(-1);
        assert_eq!(ints.left_integral, left);
        assert_eq!(ints.right_integral, right);
        assert!(!h.is_semisimple().unwrap());
    }

    #[test]
    fn semisimplicity() {
        assert!(builtin("trivial").unwrap().is_semisimple().unwrap());
        assert!(builtin("group_z2_semion").unwrap().is_semisimple().unwrap());
        assert!(builtin("group_z3").unwrap().is_semisimple().unwrap());
        assert!(builtin("double_z2").unwrap().is_semisimple().unwrap());
        assert!(!builtin("double_sweedler").unwrap().is_semisimple().unwrap());
    }

    #[test]
    fn doubles_are_unimodular() {
        let d = builtin("sweedler").unwrap().double_skeleton().unwrap();
        let ints = d.integrals().unwrap();
        assert_eq!(ints.left_integral, ints.right_integral);
        let q = builtin("quantum_sl2").unwrap();
        let ints = q.integrals().unwrap();
        assert_eq!(ints.left_integral, ints.right_integral);
    }

    #[test]
    fn corruption_detected() {
        // flipping a sign in the Sweedler antipode must be caught
        let mut h = builtin("sweedler").unwrap();
        h.antipode.set(3, 2, Scalar::one());
        assert!(matches!(h.check_axioms(), Err(Error::AxiomsViolated(_))));
        // corrupting an R entry must be caught
        let mut h = builtin("group_z2_semion").unwrap();
        h.r_matrix[3].2 = Scalar::from_ratio(1, 2);
        assert!(matches!(h.check_axioms(), Err(Error::AxiomsViolated(_))));
        // corrupting the ribbon must be caught
        let mut h = builtin("group_z3").unwrap();
        h.ribbon = h.basis_elem(1);
        assert!(matches!(h.check_axioms(), Err(Error::AxiomsViolated(_))));
    }
}
