//! The finite ribbon category of finite-dimensional modules over a ribbon
//! Hopf algebra: objects, intertwiner spaces, monoidal/rigid/braided/ribbon
//! structure, projectivity certificates, the mirrored category, and the
//! Deligne product realised as modules over the tensor-product algebra.
//!
//! Conventions (fixed throughout the crate):
//!   - tensor products index with the left factor most significant;
//!   - the dual module X* acts by rho_{X*}(a) = rho_X(S(a))^T;
//!   - ev(f (x) x) = f(x), coev(1) = sum e_i (x) e^i,
//!     ev~(x (x) f) = f(g x), coev~(1) = sum e^i (x) g^{-1} e_i,
//!     where g is the pivot;
//!   - braiding beta_{X,Y} = flip o (R-action); positive crossings in
//!     diagrams mean the left strand passes over the right one;
//!   - twist theta_X = rho_X(v^{-1}) for the ribbon element v;
//!   - the mirrored category uses the inverse braiding and inverse twist.

use std::sync::Arc;

use crate::hopf::{Elem, RibbonHopfAlgebra};
use crate::linalg::{Mat, SparseMat};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// A finite-dimensional left module over a ribbon Hopf algebra.
#[derive(Clone, Debug)]
pub struct ModuleObject {
    pub parent: Arc<RibbonHopfAlgebra>,
    pub dim: usize,
    /// One (sparse) d x d matrix per basis element of the parent algebra.
    pub action: Vec<SparseMat>,
    pub tag: Option<String>,
}

impl PartialEq for ModuleObject {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.parent.name == other.parent.name
            && self.action.iter().zip(other.action.iter()).all(|(a, b)| a == b)
    }
}

/// A morphism of the category: a matrix commuting with the module actions.
#[derive(Clone, Debug, PartialEq)]
pub struct Intertwiner {
    pub source: ModuleObject,
    pub target: ModuleObject,
    /// dim(target) x dim(source).
    pub matrix: Mat,
}

impl Intertwiner {
    /// Verify the defining property against every basis action matrix.
    pub fn verify(&self) -> Result<()> {
        if self.matrix.rows != self.target.dim || self.matrix.cols != self.source.dim {
            return Err(Error::ShapeMismatch(format!(
                "intertwiner matrix {}x{} between modules of dim {} -> {}",
                self.matrix.rows, self.matrix.cols, self.source.dim, self.target.dim
            )));
        }
        for i in 0..self.parent().dim {
            let lhs = self.matrix.matmul(&self.source.action[i].to_dense())?;
            let rhs = self.target.action[i].to_dense().matmul(&self.matrix)?;
            if lhs != rhs {
                return Err(Error::ShapeMismatch(format!(
                    "matrix does not intertwine the action of e_{}",
                    i
                )));
            }
        }
        Ok(())
    }

    pub fn parent(&self) -> &Arc<RibbonHopfAlgebra> {
        &self.source.parent
    }

    pub fn compose(&self, first: &Intertwiner) -> Result<Intertwiner> {
        if first.target != self.source {
            return Err(Error::ShapeMismatch("compose: target/source mismatch".into()));
        }
        Ok(Intertwiner {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.matmul(&first.matrix)?,
        })
    }

    pub fn tensor(&self, other: &Intertwiner) -> Intertwiner {
        Intertwiner {
            source: tensor(&self.source, &other.source),
            target: tensor(&self.target, &other.target),
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

impl ModuleObject {
    pub fn from_action(
        parent: Arc<RibbonHopfAlgebra>,
        dim: usize,
        action: Vec<SparseMat>,
        tag: Option<String>,
    ) -> Self {
        ModuleObject { parent, dim, action, tag }
    }

    /// The trivial module: every a acts by eps(a).
    pub fn trivial(parent: Arc<RibbonHopfAlgebra>) -> Self {
        let action = (0..parent.dim)
            .map(|i| {
                let mut m = SparseMat::new(1, 1);
                m.add_to(0, 0, &parent.counit[i]);
                m
            })
            .collect();
        ModuleObject { dim: 1, action, parent, tag: Some("1".into()) }
    }

    /// The left regular module H_reg.
    pub fn regular(parent: Arc<RibbonHopfAlgebra>) -> Self {
        let t = parent.tables();
        let n = parent.dim;
        let mut action = vec![SparseMat::new(n, n); n];
        for (&(i, j), list) in t.mul.iter().map(|(k, v)| (k, v)) {
            for (k, c) in list {
                action[i].add_to(*k, j, c);
            }
        }
        ModuleObject { dim: n, action, parent, tag: Some("H_reg".into()) }
    }

    /// A one-dimensional module from an algebra character.
    pub fn from_character(parent: Arc<RibbonHopfAlgebra>, chi: &[Scalar], tag: &str) -> Self {
        let action = chi
            .iter()
            .map(|c| {
                let mut m = SparseMat::new(1, 1);
                m.add_to(0, 0, c);
                m
            })
            .collect();
        ModuleObject { dim: 1, action, parent, tag: Some(tag.into()) }
    }

    /// The action matrix of an arbitrary algebra element.
    pub fn act_elem(&self, a: &[Scalar]) -> SparseMat {
        let mut out = SparseMat::new(self.dim, self.dim);
        for (i, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (&(r, s), v) in &self.action[i].entries {
                out.add_to(r, s, &c.mul(v));
            }
        }
        out
    }

    /// Check that the action respects multiplication and the unit.
    pub fn verify(&self) -> Result<()> {
        let n = self.parent.dim;
        let unit_act = self.act_elem(&self.parent.unit).to_dense();
        if unit_act != Mat::identity(self.dim) {
            return Err(Error::AxiomsViolated("module: rho(1) != id".into()));
        }
        let t = self.parent.tables();
        for i in 0..n {
            let rho_i = self.action[i].to_dense();
            for j in 0..n {
                let lhs = rho_i.matmul(&self.action[j].to_dense())?;
                let mut rhs = Mat::zeros(self.dim, self.dim);
                if let Some(list) = t.mul.get(&(i, j)) {
                    for (k, c) in list {
                        rhs = rhs.add(&self.action[*k].to_dense().scale(c))?;
                    }
                }
                if lhs != rhs {
                    return Err(Error::AxiomsViolated(format!(
                        "module: rho(e_{}) rho(e_{}) != rho(e_{} e_{})",
                        i, j, i, j
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_regular(&self) -> bool {
        self.tag.as_deref() == Some("H_reg")
    }
}

fn kron_sparse(a: &SparseMat, b: &SparseMat) -> SparseMat {
    let mut out = SparseMat::new(a.rows * b.rows, a.cols * b.cols);
    for (&(r1, c1), v1) in &a.entries {
        for (&(r2, c2), v2) in &b.entries {
            out.add_to(r1 * b.rows + r2, c1 * b.cols + c2, &v1.mul(v2));
        }
    }
    out
}

/// Tensor product module: action through the coproduct, left factor most
/// significant.
pub fn tensor(x: &ModuleObject, y: &ModuleObject) -> ModuleObject {
    let parent = x.parent.clone();
    let t = parent.tables();
    let d = x.dim * y.dim;
    let action = (0..parent.dim)
        .map(|i| {
            let mut m = SparseMat::new(d, d);
            for (j, k, c) in &t.comul[i] {
                let kr = kron_sparse(&x.action[*j], &y.action[*k]);
                for (&(r, s), v) in &kr.entries {
                    m.add_to(r, s, &c.mul(v));
                }
            }
            m
        })
        .collect();
    let tag = match (&x.tag, &y.tag) {
        (Some(a), Some(b)) => Some(format!("tensor({},{})", a, b)),
        _ => None,
    };
    ModuleObject { parent, dim: d, action, tag }
}

/// Dual module on the dual basis: rho_{X*}(a) = rho_X(S(a))^T.
pub fn dual(x: &ModuleObject) -> ModuleObject {
    let parent = x.parent.clone();
    let action = (0..parent.dim)
        .map(|i| {
            // S(e_i) is column i of the antipode matrix
            let mut s_ei = vec![Scalar::zero(); parent.dim];
            for (k, item) in s_ei.iter_mut().enumerate() {
                *item = parent.antipode.at(k, i).clone();
            }
            let m = x.act_elem(&s_ei);
            // transpose
            let mut out = SparseMat::new(x.dim, x.dim);
            for (&(r, c), v) in &m.entries {
                out.add_to(c, r, v);
            }
            out
        })
        .collect();
    let tag = x.tag.as_ref().map(|t| format!("dual({})", t));
    ModuleObject { parent, dim: x.dim, action, tag }
}

/// Evaluation ev_X : X* (x) X -> 1, f (x) x -> f(x).
pub fn ev(x: &ModuleObject) -> Intertwiner {
    let d = x.dim;
    let mut m = Mat::zeros(1, d * d);
    for i in 0..d {
        m.set(0, i * d + i, Scalar::one());
    }
    Intertwiner {
        source: tensor(&dual(x), x),
        target: ModuleObject::trivial(x.parent.clone()),
        matrix: m,
    }
}

/// Coevaluation coev_X : 1 -> X (x) X*, 1 -> sum e_i (x) e^i.
pub fn coev(x: &ModuleObject) -> Intertwiner {
    let d = x.dim;
    let mut m = Mat::zeros(d * d, 1);
    for i in 0..d {
        m.set(i * d + i, 0, Scalar::one());
    }
    Intertwiner {
        source: ModuleObject::trivial(x.parent.clone()),
        target: tensor(x, &dual(x)),
        matrix: m,
    }
}

/// Pivotal evaluation ev~_X : X (x) X* -> 1, x (x) f -> f(g x).
pub fn ev_tilde(x: &ModuleObject) -> Result<Intertwiner> {
    let g = pivot_of(&x.parent)?;
    let ga = x.act_elem(&g);
    let d = x.dim;
    let mut m = Mat::zeros(1, d * d);
    for (&(i, j), v) in &ga.entries {
        // ev~(e_j (x) e^i) = e^i(g e_j) = rho(g)_{ij}
        m.set(0, j * d + i, v.clone());
    }
    Ok(Intertwiner {
        source: tensor(x, &dual(x)),
        target: ModuleObject::trivial(x.parent.clone()),
        matrix: m,
    })
}

/// Pivotal coevaluation coev~_X : 1 -> X* (x) X, 1 -> sum e^i (x) g^{-1} e_i.
pub fn coev_tilde(x: &ModuleObject) -> Result<Intertwiner> {
    let g = pivot_of(&x.parent)?;
    let ginv = x.parent.invert_elem(&g)?;
    let ga = x.act_elem(&ginv);
    let d = x.dim;
    let mut m = Mat::zeros(d * d, 1);
    for (&(j, i), v) in &ga.entries {
        // component e^i (x) e_j of sum_i e^i (x) g^{-1} e_i
        m.set(i * d + j, 0, v.clone());
    }
    Ok(Intertwiner {
        source: ModuleObject::trivial(x.parent.clone()),
        target: tensor(&dual(x), x),
        matrix: m,
    })
}

fn pivot_of(h: &Arc<RibbonHopfAlgebra>) -> Result<Elem> {
    h.pivot
        .clone()
        .ok_or_else(|| Error::AxiomsViolated("category requires a pivot element".into()))
}

/// Braiding beta_{X,Y} : X (x) Y -> Y (x) X as a sparse matrix,
/// flip o (R-action); the inverse braiding when `mirrored`.
pub fn braiding_sparse(x: &ModuleObject, y: &ModuleObject, mirrored: bool) -> Result<SparseMat> {
    let (dx, dy) = (x.dim, y.dim);
    let mut out = SparseMat::new(dy * dx, dx * dy);
    if !mirrored {
        for (i, j, c) in &x.parent.r_matrix {
            let rx = &x.action[*i];
            let ry = &y.action[*j];
            for (&(xr, xc), xv) in &rx.entries {
                for (&(yr, yc), yv) in &ry.entries {
                    // beta(e_xc (x) e_yc) += c * (R2 e_yc) (x) (R1 e_xc)
                    out.add_to(yr * dx + xr, xc * dy + yc, &c.mul(xv).mul(yv));
                }
            }
        }
        Ok(out)
    } else {
        // inverse of beta_{Y,X}
        let forward = braiding_sparse(y, x, false)?;
        let inv = forward.to_dense().inv()?;
        Ok(SparseMat::from_dense(&inv))
    }
}

/// Braiding as an Intertwiner (dense); see `braiding_sparse`.
pub fn braiding(x: &ModuleObject, y: &ModuleObject, mirrored: bool) -> Result<Intertwiner> {
    Ok(Intertwiner {
        source: tensor(x, y),
        target: tensor(y, x),
        matrix: braiding_sparse(x, y, mirrored)?.to_dense(),
    })
}

/// Twist theta_X = rho_X(v^{-1}); the inverse (rho_X(v)) when mirrored.
pub fn twist(x: &ModuleObject, mirrored: bool) -> Result<Intertwiner> {
    let v = &x.parent.ribbon;
    let elem = if mirrored { v.clone() } else { x.parent.invert_elem(v)? };
    Ok(Intertwiner {
        source: x.clone(),
        target: x.clone(),
        matrix: x.act_elem(&elem).to_dense(),
    })
}

/// A basis of Hom_H(X, Y), deterministic (reduced echelon over the unknown
/// matrix entries in row-major order). Constraints are imposed for the
/// catalogued generating set and re-verified against the full basis.
pub fn hom_space(x: &ModuleObject, y: &ModuleObject) -> Result<Vec<Intertwiner>> {
    if !Arc::ptr_eq(&x.parent, &y.parent) && x.parent.name != y.parent.name {
        return Err(Error::ShapeMismatch("hom_space: different parent algebras".into()));
    }
    let mats: Vec<Mat> = if x.is_regular() {
        // Hom(H_reg, Y) ~ Y: phi_w(h) = rho_Y(h) w for w a basis vector of Y
        (0..y.dim)
            .map(|w| {
                let mut m = Mat::zeros(y.dim, x.dim);
                for i in 0..x.dim {
                    // column i = rho_Y(e_i) e_w
                    for (&(r, c), v) in &y.action[i].entries {
                        if c == w {
                            m.set(r, i, m.at(r, i).add(v));
                        }
                    }
                }
                m
            })
            .collect()
    } else {
        solve_hom(x, y)?
    };
    let out: Vec<Intertwiner> = mats
        .into_iter()
        .map(|m| Intertwiner { source: x.clone(), target: y.clone(), matrix: m })
        .collect();
    #[cfg(debug_assertions)]
    for iw in &out {
        iw.verify()?;
    }
    Ok(out)
}

fn gens_of(h: &RibbonHopfAlgebra) -> Vec<Elem> {
    if h.gens.is_empty() {
        (0..h.dim).map(|i| {
            let mut v = vec![Scalar::zero(); h.dim];
            v[i] = Scalar::one();
            v
        }).collect()
    } else {
        h.gens.clone()
    }
}

fn solve_hom(x: &ModuleObject, y: &ModuleObject) -> Result<Vec<Mat>> {
    let (dx, dy) = (x.dim, y.dim);
    let unknowns = dx * dy; // T_{a b}, flat a*dx + b
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for gen in gens_of(&x.parent) {
        let gx = x.act_elem(&gen);
        let gy = y.act_elem(&gen);
        // constraint (gy T - T gx)_{r c} = 0
        for r in 0..dy {
            for c in 0..dx {
                let mut row = vec![Scalar::zero(); unknowns];
                for (&(rr, a), v) in &gy.entries {
                    if rr == r {
                        row[a * dx + c] = row[a * dx + c].add(v);
                    }
                }
                for (&(b, cc), v) in &gx.entries {
                    if cc == c {
                        row[r * dx + b] = row[r * dx + b].sub(v);
                    }
                }
                if !row.iter().all(|s| s.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    if rows.is_empty() {
        rows.push(vec![Scalar::zero(); unknowns]);
    }
    let ns = Mat::from_rows(rows).nullspace();
    Ok(ns
        .into_iter()
        .map(|v| {
            let mut m = Mat::zeros(dy, dx);
            for a in 0..dy {
                for b in 0..dx {
                    m.set(a, b, v[a * dx + b].clone());
                }
            }
            m
        })
        .collect())
}

/// The free module H (x) underlying(X): the action is on the H factor only.
pub fn free_on(x: &ModuleObject) -> ModuleObject {
    let parent = x.parent.clone();
    let reg = ModuleObject::regular(parent.clone());
    let n = parent.dim;
    let d = x.dim;
    let action = (0..n)
        .map(|i| {
            let mut m = SparseMat::new(n * d, n * d);
            for (&(r, c), v) in &reg.action[i].entries {
                for k in 0..d {
                    m.add_to(r * d + k, c * d + k, v);
                }
            }
            m
        })
        .collect();
    ModuleObject { parent, dim: n * d, action, tag: None }
}

/// Projectivity via splitting of the free-module surjection
/// H (x) underlying(X) -> X, h (x) x -> h.x. Returns the splitting
/// intertwiner as a certificate when projective.
pub fn projective_check(x: &ModuleObject) -> Result<Option<Intertwiner>> {
    let d = x.dim;
    if d == 0 {
        // the zero module is projective with the zero splitting
        return Ok(Some(Intertwiner {
            source: x.clone(),
            target: free_on(x),
            matrix: Mat::zeros(0, 0),
        }));
    }
    // H-linear maps X -> H^{(+) d} are d-tuples from Hom(X, H_reg);
    // solve for coefficients c_{v m} with pi o s = id.
    let reg = ModuleObject::regular(x.parent.clone());
    let basis = hom_space(x, &reg)?;
    let b = basis.len();
    if b == 0 {
        return Ok(None);
    }
    // unknown c_{v m} (v < d slots, m < b), flat v*b + m
    // constraint: for each u (input basis of X), w (output coord):
    //   sum_{v m} c_{v m} [rho_X(phi_m(e_u)) e_v]_w = delta_{u w}
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for u in 0..d {
        // phi_m(e_u) = column u of basis[m], an element of H
        for w in 0..d {
            let mut row = vec![Scalar::zero(); d * b];
            for (m, phi) in basis.iter().enumerate() {
                let h_elem: Vec<Scalar> =
                    (0..x.parent.dim).map(|k| phi.matrix.at(k, u).clone()).collect();
                let act = x.act_elem(&h_elem);
                for v in 0..d {
                    if let Some(val) = act.entries.get(&(w, v)) {
                        row[v * b + m] = row[v * b + m].add(val);
                    }
                }
            }
            rows.push(row);
            rhs.push(if u == w { Scalar::one() } else { Scalar::zero() });
        }
    }
    let sol = match Mat::from_rows(rows).solve(&rhs) {
        Some(s) => s,
        None => return Ok(None),
    };
    // assemble s: X -> H (x) underlying(X), s(e_u) = sum_{v m} c_{v m} phi_m(e_u) (x) e_v
    let free = free_on(x);
    let n = x.parent.dim;
    let mut m = Mat::zeros(n * d, d);
    for u in 0..d {
        for v in 0..d {
            for (mm, phi) in basis.iter().enumerate() {
                let c = &sol[v * b + mm];
                if c.is_zero() {
                    continue;
                }
                for k in 0..n {
                    let val = phi.matrix.at(k, u);
                    if !val.is_zero() {
                        m.set(k * d + v, u, m.at(k * d + v, u).add(&c.mul(val)));
                    }
                }
            }
        }
    }
    let cert = Intertwiner { source: x.clone(), target: free, matrix: m };
    #[cfg(debug_assertions)]
    cert.verify()?;
    Ok(Some(cert))
}

/// The tensor-product ribbon Hopf algebra realizing the Deligne product of
/// the two module categories. Scalars are lifted to the least common
/// cyclotomic order.
pub fn deligne_product(
    h1: &RibbonHopfAlgebra,
    h2: &RibbonHopfAlgebra,
) -> Result<RibbonHopfAlgebra> {
    let n1 = h1.dim;
    let n2 = h2.dim;
    let n = n1 * n2;
    let idx = |i: usize, j: usize| i * n2 + j;
    let mut mul = Vec::new();
    let t1 = h1.tables();
    let t2 = h2.tables();
    for (&(i1, j1), l1) in &t1.mul {
        for (&(i2, j2), l2) in &t2.mul {
            for (k1, c1) in l1 {
                for (k2, c2) in l2 {
                    mul.push((idx(i1, i2), idx(j1, j2), idx(*k1, *k2), c1.mul(c2)));
                }
            }
        }
    }
    let mut comul = Vec::new();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for (a1, b1, c1) in &t1.comul[i1] {
                for (a2, b2, c2) in &t2.comul[i2] {
                    comul.push((idx(i1, i2), idx(*a1, *a2), idx(*b1, *b2), c1.mul(c2)));
                }
            }
        }
    }
    let pair = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    v[idx(i, j)] = x.mul(y);
                }
            }
        }
        v
    };
    let unit = pair(&h1.unit, &h2.unit);
    let counit: Vec<Scalar> = {
        let mut v = vec![Scalar::zero(); n];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                v[idx(i1, i2)] = h1.counit[i1].mul(&h2.counit[i2]);
            }
        }
        v
    };
    let mut antipode = Mat::zeros(n, n);
    for c1 in 0..n1 {
        for c2 in 0..n2 {
            for r1 in 0..n1 {
                for r2 in 0..n2 {
                    let v = h1.antipode.at(r1, c1).mul(h2.antipode.at(r2, c2));
                    if !v.is_zero() {
                        antipode.set(idx(r1, r2), idx(c1, c2), v);
                    }
                }
            }
        }
    }
    // R = R1_{13} R2_{24}: ((a1 (x) a2) (x) (b1 (x) b2)) entries
    let mut r_matrix = Vec::new();
    for (i1, j1, c1) in &h1.r_matrix {
        for (i2, j2, c2) in &h2.r_matrix {
            r_matrix.push((idx(*i1, *i2), idx(*j1, *j2), c1.mul(c2)));
        }
    }
    let ribbon = pair(&h1.ribbon, &h2.ribbon);
    let pivot = match (&h1.pivot, &h2.pivot) {
        (Some(g1), Some(g2)) => Some(pair(g1, g2)),
        _ => None,
    };
    let mut gens = Vec::new();
    for g in &h1.gens {
        gens.push(pair(g, &h2.unit));
    }
    for g in &h2.gens {
        gens.push(pair(&h1.unit, g));
    }
    let mut group_likes = Vec::new();
    for a in &h1.group_likes {
        for b in &h2.group_likes {
            group_likes.push(pair(a, b));
        }
    }
    let mut characters = Vec::new();
    for a in &h1.characters {
        for b in &h2.characters {
            characters.push(pair(a, b));
        }
    }
    let order = lcm(h1.cyclotomic_order as u64, h2.cyclotomic_order as u64) as u32;
    let out = RibbonHopfAlgebra {
        name: format!("deligne({},{})", h1.name, h2.name),
        cyclotomic_order: order,
        dim: n,
        mul,
        unit,
        comul,
        counit,
        antipode,
        r_matrix,
        ribbon,
        pivot,
        gens,
        group_likes,
        characters,
    };
    Ok(out)
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// A category signature: the parent algebra plus the mirror flag.
#[derive(Clone, Debug)]
pub struct CategorySignature {
    pub parent: Arc<RibbonHopfAlgebra>,
    pub mirrored: bool,
}

impl CategorySignature {
    pub fn new(parent: Arc<RibbonHopfAlgebra>) -> Self {
        CategorySignature { parent, mirrored: false }
    }

    /// The mirrored category: inverse braiding and twist.
    pub fn mirror(&self) -> Self {
        CategorySignature { parent: self.parent.clone(), mirrored: !self.mirrored }
    }

    pub fn braiding(&self, x: &ModuleObject, y: &ModuleObject) -> Result<Intertwiner> {
        braiding(x, y, self.mirrored)
    }

    pub fn braiding_sparse(&self, x: &ModuleObject, y: &ModuleObject) -> Result<SparseMat> {
        braiding_sparse(x, y, self.mirrored)
    }

    pub fn twist(&self, x: &ModuleObject) -> Result<Intertwiner> {
        twist(x, self.mirrored)
    }

    pub fn regular(&self) -> ModuleObject {
        ModuleObject::regular(self.parent.clone())
    }

    pub fn trivial(&self) -> ModuleObject {
        ModuleObject::trivial(self.parent.clone())
    }
}

/// The catalogue of named simple (or otherwise interesting small) modules of
/// a builtin algebra: the trivial module plus all character modules.
pub fn simples(parent: &Arc<RibbonHopfAlgebra>) -> Vec<ModuleObject> {
    let mut out = vec![ModuleObject::trivial(parent.clone())];
    for (i, chi) in parent.characters.iter().enumerate() {
        let m = ModuleObject::from_character(parent.clone(), chi, &format!("chi{}", i));
        if m.action != out[0].action {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::builtin;

    fn arc(name: &str) -> Arc<RibbonHopfAlgebra> {
        Arc::new(builtin(name).unwrap())
    }

    #[test]
    fn regular_and_trivial_are_modules() {
        for name in crate::hopf::BUILTIN_NAMES {
            let h = arc(name);
            ModuleObject::regular(h.clone()).verify().unwrap();
            ModuleObject::trivial(h.clone()).verify().unwrap();
        }
    }

    #[test]
    fn tensor_dual_are_modules() {
        for name in ["group_z2_semion", "sweedler", "group_z3"] {
            let h = arc(name);
            let reg = ModuleObject::regular(h.clone());
            tensor(&reg, &reg).verify().unwrap();
            dual(&reg).verify().unwrap();
            dual(&tensor(&reg, &dual(&reg))).verify().unwrap();
        }
    }

    #[test]
    fn hom_regular_endos() {
        // dim Hom(H_reg, H_reg) = dim H (right multiplications)
        for name in ["trivial", "group_z2_semion", "sweedler", "double_z2"] {
            let h = arc(name);
            let reg = ModuleObject::regular(h.clone());
            assert_eq!(hom_space(&reg, &reg).unwrap().len(), h.dim);
            // cross-check the Yoneda fast path against the solver
            let solved = solve_hom(&reg, &reg).unwrap();
            assert_eq!(solved.len(), h.dim);
        }
    }

    #[test]
    fn hom_triv_sign_empty() {
        let h = arc("group_z2_semion");
        let triv = ModuleObject::trivial(h.clone());
        let sign = ModuleObject::from_character(h.clone(), &h.characters[1], "sign");
        assert_eq!(hom_space(&triv, &sign).unwrap().len(), 0);
        assert_eq!(hom_space(&triv, &triv).unwrap().len(), 1);
    }

    #[test]
    fn zigzag_identities() {
        for name in ["group_z2_semion", "sweedler", "group_z3", "double_sweedler"] {
            let h = arc(name);
            let objs = {
                let mut v = simples(&h);
                v.push(ModuleObject::regular(h.clone()));
                v
            };
            for x in &objs {
                let d = x.dim;
                // (ev~ (x) id) o (id (x) coev~) = id_X
                let evt = ev_tilde(x).unwrap();
                let cvt = coev_tilde(x).unwrap();
                let lhs = {
                    // X --id (x) coev~--> X (x) X* (x) X --ev~ (x) id--> X
                    let step1 = Mat::identity(d).kron(&cvt.matrix); // (d*d*d) x d
                    let step2 = evt.matrix.kron(&Mat::identity(d)); // d x (d*d*d)
                    step2.matmul(&step1).unwrap()
                };
                assert_eq!(lhs, Mat::identity(d), "zigzag ev~/coev~ for {}", name);
                // (id (x) ev) o (coev (x) id) = id_X
                let e = ev(x);
                let c = coev(x);
                let lhs2 = {
                    let step1 = c.matrix.kron(&Mat::identity(d));
                    let step2 = Mat::identity(d).kron(&e.matrix);
                    step2.matmul(&step1).unwrap()
                };
                assert_eq!(lhs2, Mat::identity(d), "zigzag ev/coev for {}", name);
            }
        }
    }

    #[test]
    fn braiding_twist_relations() {
        for name in ["group_z2_semion", "sweedler", "group_z3", "double_z2"] {
            let h = arc(name);
            let sig = CategorySignature::new(h.clone());
            let objs = {
                let mut v = simples(&h);
                v.push(ModuleObject::regular(h.clone()));
                v
            };
            for x in &objs {
                for y in &objs {
                    let bxy = sig.braiding(x, y).unwrap();
                    bxy.verify().unwrap();
                    let byx = sig.braiding(y, x).unwrap();
                    // theta_{X(x)Y} = beta_{Y,X} o beta_{X,Y} o (theta_X (x) theta_Y)
                    let txy = sig.twist(&tensor(x, y)).unwrap();
                    let tx = sig.twist(x).unwrap();
                    let ty = sig.twist(y).unwrap();
                    let rhs = byx
                        .matrix
                        .matmul(&bxy.matrix)
                        .unwrap()
                        .matmul(&tx.matrix.kron(&ty.matrix))
                        .unwrap();
                    assert_eq!(txy.matrix, rhs, "twist braiding identity for {}", name);
                }
                // (theta_X)^T on the dual basis = theta_{X*}
                let tx = sig.twist(x).unwrap();
                let txd = sig.twist(&dual(x)).unwrap();
                assert_eq!(tx.matrix.transpose(), txd.matrix, "dual twist for {}", name);
            }
        }
    }

    #[test]
    fn mirror_is_inverse_braiding() {
        let h = arc("group_z2_semion");
        let sig = CategorySignature::new(h.clone());
        let m = sig.mirror();
        assert!(!m.mirror().mirrored);
        let reg = ModuleObject::regular(h.clone());
        let fwd = sig.braiding(&reg, &reg).unwrap().matrix;
        let bwd = m.braiding(&reg, &reg).unwrap().matrix;
        // beta-bar_{X,Y} = (beta_{Y,X})^{-1}
        assert_eq!(fwd.matmul(&bwd).unwrap(), Mat::identity(fwd.rows));
    }

    #[test]
    fn projectivity() {
        // regular module is projective everywhere; trivial module is
        // projective only in the semisimple cases
        for (name, triv_proj) in [
            ("trivial", true),
            ("group_z2_semion", true),
            ("group_z3", true),
            ("sweedler", false),
            ("double_sweedler", false),
        ] {
            let h = arc(name);
            let reg = ModuleObject::regular(h.clone());
            let cert = projective_check(&reg).unwrap();
            assert!(cert.is_some(), "H_reg projective for {}", name);
            // certificate splits the surjection: pi o s = id
            let s = cert.unwrap();
            let n = h.dim;
            let d = reg.dim;
            let mut pi = Mat::zeros(d, n * d);
            for k in 0..n {
                for v in 0..d {
                    for (&(r, c), val) in &reg.action[k].entries {
                        if c == v {
                            pi.set(r, k * d + v, pi.at(r, k * d + v).add(val));
                        }
                    }
                }
            }
            assert_eq!(pi.matmul(&s.matrix).unwrap(), Mat::identity(d));
            let triv = ModuleObject::trivial(h.clone());
            assert_eq!(projective_check(&triv).unwrap().is_some(), triv_proj, "{}", name);
            // absorbency: H (x) X is projective
            let hx = tensor(&reg, &triv);
            assert!(projective_check(&hx).unwrap().is_some());
        }
    }

    #[test]
    fn deligne_product_works() {
        let h1 = builtin("trivial").unwrap();
        let h2 = builtin("sweedler").unwrap();
        let d = deligne_product(&h1, &h2).unwrap();
        assert_eq!(d.dim, h2.dim);
        d.check_axioms().unwrap();
        let d2 = deligne_product(&h2, &builtin("group_z3").unwrap()).unwrap();
        assert_eq!(d2.dim, 12);
        d2.check_axioms().unwrap();
    }
}
