//! State spaces of the surgery TFT as Hom-spaces out of tensor powers of the
//! coend, the torus mapping-class-group action on Hom(L, 1) together with its
//! anomaly arithmetic, the gluing morphisms induced by the universal property
//! of the coend (connected and disconnected case), and dimension-level
//! corollaries: the central monad, the induction/restriction adjunction for
//! the Drinfeld double, and multiplicativity of dimensions under products of
//! categories.

use std::sync::Arc;

use crate::coend::{CoendData, CoendObject, Integrals, ModularConstants};
use crate::diagram::{
    self, cap, cross, cup_blue, cup_red, id_blue, CapVariant, CupVariant, DiagramEnv, Dir,
    MorphismEntry, Piece, SlicedDiagram,
};
use crate::hopf::RibbonHopfAlgebra;
use crate::linalg::{Mat, SparseMat};
use crate::mfld::{compose_defect, torus_triple};
use crate::repcat::{
    self, coev_tilde, hom_space, tensor, CategorySignature, Intertwiner, ModuleObject,
};
use crate::scalar::Scalar;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// State spaces
// ---------------------------------------------------------------------------

/// The state space of a genus-g surface with marked points: the Hom-space
/// Hom(L^(x)g (x) X_1 (x) ... (x) X_p, Y_1 (x) ... (x) Y_q).
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub genus: usize,
    /// L^(x)g (x) X_1 (x) ... (x) X_p.
    pub source: ModuleObject,
    /// Y_1 (x) ... (x) Y_q.
    pub target: ModuleObject,
    /// Deterministic solver basis of the Hom-space.
    pub basis: Vec<Intertwiner>,
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Compute the state space for genus `genus` with incoming colours
/// `in_colors` and outgoing colours `out_colors`.
pub fn state_space(
    coend: &CoendObject,
    genus: usize,
    in_colors: &[ModuleObject],
    out_colors: &[ModuleObject],
) -> Result<StateSpace> {
    let parent = coend.sig.parent.clone();
    let mut source = ModuleObject::trivial(parent.clone());
    for _ in 0..genus {
        source = tensor(&source, &coend.module);
    }
    for x in in_colors {
        source = tensor(&source, x);
    }
    let mut target = ModuleObject::trivial(parent);
    for y in out_colors {
        target = tensor(&target, y);
    }
    let basis = hom_space(&source, &target)?;
    Ok(StateSpace { genus, source, target, basis })
}

// ---------------------------------------------------------------------------
// Torus action
// ---------------------------------------------------------------------------

/// The action of the torus mapping classes on the state space Hom(L, 1),
/// by precomposition with the S and T endomorphisms of the coend.
#[derive(Clone, Debug)]
pub struct TorusAction {
    /// Solver basis of Hom(L, 1).
    pub basis: Vec<Intertwiner>,
    /// dim L x dim Hom(L,1); column j is the functional of basis element j.
    coords: Mat,
    pub s_rep: Mat,
    pub t_rep: Mat,
    pub zeta: Scalar,
    /// s_rep^2 equals zeta times precomposition with S_L^{-1}.
    pub relation_holds: bool,
    pub invertible: bool,
}

impl TorusAction {
    /// Matrix of precomposition with a module endomorphism of L on the
    /// Hom(L, 1) basis.
    pub fn rep(&self, endo: &Mat) -> Result<Mat> {
        rep_in(&self.coords, &self.basis, endo)
    }
}

fn rep_in(coords: &Mat, basis: &[Intertwiner], endo: &Mat) -> Result<Mat> {
    let k = basis.len();
    let mut out = Mat::zeros(k, k);
    for j in 0..k {
        let row = basis[j].matrix.matmul(endo)?;
        let rhs: Vec<Scalar> = (0..row.cols).map(|i| row.at(0, i).clone()).collect();
        let x = coords.solve(&rhs).ok_or_else(|| {
            Error::AxiomsViolated("endomorphism does not preserve Hom(L, 1)".into())
        })?;
        for (i, c) in x.into_iter().enumerate() {
            out.set(i, j, c);
        }
    }
    Ok(out)
}

fn scale_mat(m: &Mat, c: &Scalar) -> Mat {
    let mut out = Mat::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, m.at(i, j).mul(c));
        }
    }
    out
}

/// Build the torus action for a modular category.
pub fn torus_action(
    cd: &CoendData,
    ints: &Integrals,
    mc: &ModularConstants,
) -> Result<TorusAction> {
    if !cd.modular {
        return Err(Error::NotModular("torus action requires a modular category".into()));
    }
    let one = cd.coend.sig.trivial();
    let basis = hom_space(&cd.coend.module, &one)?;
    let k = basis.len();
    let n = cd.dim();
    let mut coords = Mat::zeros(n, k);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..n {
            coords.set(i, j, b.matrix.at(0, i).clone());
        }
    }
    let s_rep = rep_in(&coords, &basis, &mc.s_endo)?;
    let t_rep = rep_in(&coords, &basis, &cd.t_endo)?;
    let s2 = s_rep.matmul(&s_rep)?;
    let s_l_inv_rep = rep_in(&coords, &basis, &cd.s_l.inv()?)?;
    let relation_holds = s2 == scale_mat(&s_l_inv_rep, &ints.zeta);
    let invertible = s_rep.rank() == k && t_rep.rank() == k;
    Ok(TorusAction {
        basis,
        coords,
        s_rep,
        t_rep,
        zeta: ints.zeta.clone(),
        relation_holds,
        invertible,
    })
}

/// Generators of the torus mapping class group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusGen {
    S,
    T,
}

fn mat2_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut c = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn gen_mat2(g: TorusGen) -> [[i64; 2]; 2] {
    match g {
        TorusGen::S => [[0, -1], [1, 0]],
        TorusGen::T => [[1, 1], [0, 1]],
    }
}

/// The SL(2, Z) matrix of a word in the torus generators (left-to-right
/// product).
pub fn word_matrix(word: &[TorusGen]) -> [[i64; 2]; 2] {
    let mut m = [[1, 0], [0, 1]];
    for g in word {
        m = mat2_mul(m, gen_mat2(*g));
    }
    m
}

/// The endomorphism of L obtained by multiplying the S/T endomorphisms in
/// word order.
pub fn word_endo(cd: &CoendData, mc: &ModularConstants, word: &[TorusGen]) -> Result<Mat> {
    let mut m = Mat::identity(cd.dim());
    for g in word {
        m = m.matmul(match g {
            TorusGen::S => &mc.s_endo,
            TorusGen::T => &cd.t_endo,
        })?;
    }
    Ok(m)
}

/// The accumulated Maslov defect of composing the mapping cylinders of a
/// word one generator at a time, via the Lagrangian composition triple of
/// each partial product.
pub fn word_defect(word: &[TorusGen]) -> Result<i64> {
    let mut defect = 0i64;
    let mut acc = [[1, 0], [0, 1]];
    for g in word {
        let gm = gen_mat2(*g);
        let triple = torus_triple(acc, gm);
        defect = compose_defect(defect, 0, &triple)?;
        acc = mat2_mul(acc, gm);
    }
    Ok(defect)
}

/// Sign convention: when two words share the same SL(2, Z) matrix, the
/// torus representations of their endomorphisms differ by
/// delta^(ANOMALY_SIGN * (defect(w1) - defect(w2))).  Calibrated on the
/// anomalous builtin with delta a primitive cube root of unity.
pub const ANOMALY_SIGN: i64 = 1;

#[derive(Clone, Debug, Default)]
pub struct AnomalyReport {
    /// (label, defect difference, ratio matched the predicted delta power)
    pub items: Vec<(String, i64, bool)>,
}

impl AnomalyReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|(_, _, ok)| *ok)
    }
}

fn scalar_ratio(a: &Mat, b: &Mat) -> Option<Scalar> {
    if a.rows != b.rows || a.cols != b.cols {
        return None;
    }
    let mut c: Option<Scalar> = None;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if !b.at(i, j).is_zero() {
                c = Some(a.at(i, j).div(b.at(i, j)).ok()?);
                break;
            }
        }
        if c.is_some() {
            break;
        }
    }
    let c = c?;
    if *a == scale_mat(b, &c) {
        Some(c)
    } else {
        None
    }
}

/// Compare torus representations of pairs of words with equal SL(2, Z)
/// matrices; the ratio of the two representing matrices must be the delta
/// power predicted by the accumulated Maslov defects.
pub fn anomaly_check(
    cd: &CoendData,
    ints: &Integrals,
    mc: &ModularConstants,
) -> Result<AnomalyReport> {
    use TorusGen::{S, T};
    let ta = torus_action(cd, ints, mc)?;
    let st3: Vec<TorusGen> = vec![S, T, S, T, S, T];
    let pairs: Vec<(Vec<TorusGen>, Vec<TorusGen>, &str)> = vec![
        (st3.clone(), vec![S, S], "(ST)^3 vs S^2"),
        (vec![S, S, S, S], vec![], "S^4 vs 1"),
        ([st3.clone(), st3].concat(), vec![], "(ST)^6 vs 1"),
    ];
    let mut report = AnomalyReport::default();
    for (w1, w2, label) in pairs {
        if word_matrix(&w1) != word_matrix(&w2) {
            return Err(Error::AxiomsViolated(format!(
                "word pair {} does not agree in SL(2,Z)",
                label
            )));
        }
        let r1 = ta.rep(&word_endo(cd, mc, &w1)?)?;
        let r2 = ta.rep(&word_endo(cd, mc, &w2)?)?;
        let diff = word_defect(&w1)? - word_defect(&w2)?;
        let expected = mc.delta.pow(ANOMALY_SIGN * diff)?;
        let ok = match scalar_ratio(&r1, &r2) {
            Some(c) => c == expected,
            None => false,
        };
        report.items.push((label.to_string(), diff, ok));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Gluing morphisms
// ---------------------------------------------------------------------------

/// The Radford pairing kappa : L (x) L -> 1 as an intertwiner.
fn kappa_map(cd: &CoendData) -> Result<Intertwiner> {
    let form = cd
        .kappa_form
        .as_ref()
        .ok_or_else(|| Error::NotModular("Radford pairing requires normalised integrals".into()))?;
    let l = &cd.coend.module;
    let n = l.dim;
    let mut m = Mat::zeros(1, n * n);
    for i in 0..n {
        for j in 0..n {
            m.set(0, i * n + j, form.at(i, j).clone());
        }
    }
    Ok(Intertwiner { source: tensor(l, l), target: cd.coend.sig.trivial(), matrix: m })
}

/// Connected gluing: send f : X (x) U -> X (x) V to the morphism
/// L (x) U -> V given by
///   (kappa (x) id) o (id_L (x) iota_X (x) id) o (id (x) id (x) f)
///     o (id_L (x) coev~_X (x) id_U).
pub fn glue_connected_map(
    cd: &CoendData,
    x: &ModuleObject,
    u: &ModuleObject,
    v: &ModuleObject,
    f: &Intertwiner,
) -> Result<Intertwiner> {
    let n = cd.dim();
    let (dx, du, dv) = (x.dim, u.dim, v.dim);
    if f.matrix.rows != dx * dv || f.matrix.cols != dx * du {
        return Err(Error::ShapeMismatch(format!(
            "glue_connected_map: f is {}x{}, expected {}x{}",
            f.matrix.rows,
            f.matrix.cols,
            dx * dv,
            dx * du
        )));
    }
    let cvt = coev_tilde(x)?.matrix; // dx^2 x 1
    let m1 = Mat::identity(n).kron(&cvt).kron(&Mat::identity(du));
    let m2 = Mat::identity(n * dx).kron(&f.matrix);
    let iota = cd.coend.iota(x).matrix; // n x dx^2
    let m3 = Mat::identity(n).kron(&iota).kron(&Mat::identity(dv));
    let m4 = kappa_map(cd)?.matrix.kron(&Mat::identity(dv));
    let matrix = m4.matmul(&m3)?.matmul(&m2)?.matmul(&m1)?;
    Ok(Intertwiner {
        source: tensor(&cd.coend.module, u),
        target: v.clone(),
        matrix,
    })
}

/// Disconnected gluing: send f : U (x) X -> V and g : U' -> X (x) V' to
/// (f (x) id_{V'}) o (id_U (x) g) : U (x) U' -> V (x) V'.
pub fn glue_disconnected_map(
    u: &ModuleObject,
    v: &ModuleObject,
    u2: &ModuleObject,
    v2: &ModuleObject,
    f: &Intertwiner,
    g: &Intertwiner,
) -> Result<Intertwiner> {
    let first = Mat::identity(u.dim).kron(&g.matrix);
    let second = f.matrix.kron(&Mat::identity(v2.dim));
    Ok(Intertwiner {
        source: tensor(u, u2),
        target: tensor(v, v2),
        matrix: second.matmul(&first)?,
    })
}

/// Verification record for a gluing operation.
#[derive(Clone, Debug)]
pub struct GluingWitness {
    /// dim of the claimed universal target Hom-space.
    pub target_dim: usize,
    /// Rank of the family of glued morphisms over all probes.
    pub family_rank: usize,
    /// Rank of the family restricted to the regular-module probe.
    pub rank_at_regular: usize,
    pub dinatural: bool,
    /// Connected case only: the diagrammatic identity with the zeta factor.
    pub five_step: Option<bool>,
}

impl GluingWitness {
    pub fn pass(&self) -> bool {
        self.target_dim == self.family_rank
            && self.rank_at_regular == self.target_dim
            && self.dinatural
            && self.five_step.unwrap_or(true)
    }
}

fn flatten(m: &Mat) -> Vec<Scalar> {
    let mut v = Vec::with_capacity(m.rows * m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            v.push(m.at(i, j).clone());
        }
    }
    v
}

fn rank_of_rows(rows: Vec<Vec<Scalar>>, width: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let _ = width;
    Mat::from_rows(rows).rank()
}

/// Verify the connected gluing morphism for boundary colours U, V over the
/// given probe objects (which must include the regular module).
pub fn glue_connected(
    cd: &CoendData,
    ints: &Integrals,
    u: &ModuleObject,
    v: &ModuleObject,
    probes: &[ModuleObject],
) -> Result<GluingWitness> {
    if !cd.modular {
        return Err(Error::NotModular("connected gluing requires a modular category".into()));
    }
    let l = &cd.coend.module;
    let target_dim = hom_space(&tensor(l, u), v)?.len();
    let width = v.dim * l.dim * u.dim;

    let mut rows = Vec::new();
    let mut rows_reg = Vec::new();
    for x in probes {
        let fs = hom_space(&tensor(x, u), &tensor(x, v))?;
        for f in &fs {
            let glued = glue_connected_map(cd, x, u, v, f)?;
            let row = flatten(&glued.matrix);
            if x.is_regular() {
                rows_reg.push(row.clone());
            }
            rows.push(row);
        }
    }
    let family_rank = rank_of_rows(rows, width);
    let rank_at_regular = rank_of_rows(rows_reg, width);

    // Dinaturality: for h : X -> Y and f : Y (x) U -> X (x) V,
    //   i_X(f o (h (x) id_U)) = i_Y((h (x) id_V) o f).
    let mut dinatural = true;
    'outer: for x in probes {
        for y in probes {
            let hs = hom_space(x, y)?;
            let fs = hom_space(&tensor(y, u), &tensor(x, v))?;
            for h in hs.iter().take(2) {
                for f in fs.iter().take(3) {
                    let f_low = Intertwiner {
                        source: tensor(x, u),
                        target: tensor(x, v),
                        matrix: f.matrix.matmul(&h.matrix.kron(&Mat::identity(u.dim)))?,
                    };
                    let f_high = Intertwiner {
                        source: tensor(y, u),
                        target: tensor(y, v),
                        matrix: h.matrix.kron(&Mat::identity(v.dim)).matmul(&f.matrix)?,
                    };
                    let lhs = glue_connected_map(cd, x, u, v, &f_low)?;
                    let rhs = glue_connected_map(cd, y, u, v, &f_high)?;
                    if lhs.matrix != rhs.matrix {
                        dinatural = false;
                        break 'outer;
                    }
                }
            }
        }
    }

    // The diagrammatic identity is checked for closed boundary colours with
    // a small endomorphism probe.
    let five_step = if u.dim == 1 && v.dim == 1 {
        let h = cd.coend.sig.regular();
        let fs = hom_space(&h, &h)?;
        let mut ok = true;
        for f in fs.iter().take(2) {
            ok = ok && five_step_identity(cd, ints, &h, &h, f)?;
        }
        Some(ok)
    } else {
        None
    };

    Ok(GluingWitness { target_dim, family_rank, rank_at_regular, dinatural, five_step })
}

/// Verify the disconnected gluing morphism over the given probes.
pub fn glue_disconnected(
    u: &ModuleObject,
    v: &ModuleObject,
    u2: &ModuleObject,
    v2: &ModuleObject,
    probes: &[ModuleObject],
) -> Result<GluingWitness> {
    let target_dim = hom_space(&tensor(u, u2), &tensor(v, v2))?.len();
    let width = (v.dim * v2.dim) * (u.dim * u2.dim);

    let mut rows = Vec::new();
    let mut rows_reg = Vec::new();
    for x in probes {
        let fs = hom_space(&tensor(u, x), v)?;
        let gs = hom_space(u2, &tensor(x, v2))?;
        for f in &fs {
            for g in &gs {
                let glued = glue_disconnected_map(u, v, u2, v2, f, g)?;
                let row = flatten(&glued.matrix);
                if x.is_regular() {
                    rows_reg.push(row.clone());
                }
                rows.push(row);
            }
        }
    }
    let family_rank = rank_of_rows(rows, width);
    let rank_at_regular = rank_of_rows(rows_reg, width);

    // Dinaturality: for h : X -> Y, f : U (x) Y -> V, g : U' -> X (x) V',
    //   i_X(f o (id_U (x) h), g) = i_Y(f, (h (x) id_{V'}) o g).
    let mut dinatural = true;
    'outer: for x in probes {
        for y in probes {
            let hs = hom_space(x, y)?;
            let fs = hom_space(&tensor(u, y), v)?;
            let gs = hom_space(u2, &tensor(x, v2))?;
            for h in hs.iter().take(2) {
                for f in fs.iter().take(2) {
                    for g in gs.iter().take(2) {
                        let f_low = Intertwiner {
                            source: tensor(u, x),
                            target: v.clone(),
                            matrix: f
                                .matrix
                                .matmul(&Mat::identity(u.dim).kron(&h.matrix))?,
                        };
                        let g_high = Intertwiner {
                            source: u2.clone(),
                            target: tensor(y, v2),
                            matrix: h.matrix.kron(&Mat::identity(v2.dim)).matmul(&g.matrix)?,
                        };
                        let lhs = glue_disconnected_map(u, v, u2, v2, &f_low, g)?;
                        let rhs = glue_disconnected_map(u, v, u2, v2, f, &g_high)?;
                        if lhs.matrix != rhs.matrix {
                            dinatural = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    Ok(GluingWitness { target_dim, family_rank, rank_at_regular, dinatural, five_step: None })
}

// ---------------------------------------------------------------------------
// The diagrammatic gluing identity ("slide trick")
// ---------------------------------------------------------------------------

// The diagrams below realise the two sides of the gluing identity after
// precomposition with iota_Z: a blue f-loop on X clasped with an open Z
// strand, versus the same f-loop unlinked but pierced by a red circle.
// Cup/cap variants and crossing signs are frozen by calibration against the
// algebraic composite on several builtins.
const DA_S1: i8 = 1;
const DA_S2: i8 = 1;
const DB_T1: i8 = 1;
const DB_T2: i8 = 1;

fn da_diagram() -> SlicedDiagram {
    SlicedDiagram::new(
        vec![(Some("Zg".into()), Dir::Down), (Some("Zg".into()), Dir::Up)],
        vec![],
        vec![
            vec![
                cup_blue(CupVariant::Coev, "Xg"),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                Piece::Coupon { morphism: "fg".into(), ins: 1, outs: 1 },
                id_blue("Xg", Dir::Down),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![id_blue("Xg", Dir::Up), cross(DA_S1), id_blue("Zg", Dir::Up)],
            vec![id_blue("Xg", Dir::Up), cross(DA_S2), id_blue("Zg", Dir::Up)],
            vec![cap(CapVariant::EvTilde), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            vec![cap(CapVariant::Ev)],
        ],
    )
}

fn db_diagram() -> SlicedDiagram {
    SlicedDiagram::new(
        vec![(Some("Zg".into()), Dir::Down), (Some("Zg".into()), Dir::Up)],
        vec![],
        vec![
            vec![
                cup_blue(CupVariant::Coev, "Xg"),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                Piece::Coupon { morphism: "fg".into(), ins: 1, outs: 1 },
                id_blue("Xg", Dir::Down),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", Dir::Up),
                cup_red(CupVariant::CoevTilde),
                id_blue("Xg", Dir::Down),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", Dir::Up),
                diagram::id_red(Dir::Down),
                cross(DB_T1),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", Dir::Up),
                cross(DB_T2),
                diagram::id_red(Dir::Up),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", Dir::Up),
                id_blue("Xg", Dir::Down),
                cap(CapVariant::Ev),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![cap(CapVariant::EvTilde), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            vec![cap(CapVariant::Ev)],
        ],
    )
}

fn five_step_env(
    sig: &CategorySignature,
    x: &ModuleObject,
    z: &ModuleObject,
    f: &Intertwiner,
) -> DiagramEnv {
    DiagramEnv::new(sig.clone())
        .with_object("Xg", x.clone())
        .with_object("Zg", z.clone())
        .with_morphism(
            "fg",
            MorphismEntry {
                map: f.clone(),
                ins: vec![("Xg".into(), Dir::Up)],
                outs: vec![("Xg".into(), Dir::Up)],
            },
        )
}

/// The gluing identity with the zeta factor, precomposed with iota_Z: the
/// clasped blue diagram equals the algebraic composite, and equals
/// zeta^{-1} times the diagram with the red meridian circle.
pub fn five_step_identity(
    cd: &CoendData,
    ints: &Integrals,
    x: &ModuleObject,
    z: &ModuleObject,
    f: &Intertwiner,
) -> Result<bool> {
    let one = cd.coend.sig.trivial();
    let alg = glue_connected_map(cd, x, &one, &one, f)?;
    let target = alg.matrix.matmul(&cd.coend.iota(z).matrix)?;
    let env = five_step_env(&cd.coend.sig, x, z, f);
    let blue = diagram::eval_blue(&da_diagram(), &env)?;
    if blue.matrix != target {
        return Ok(false);
    }
    let bi = diagram::eval_bichrome(&db_diagram(), &env, cd, ints)?;
    Ok(bi.map.matrix == scale_mat(&target, &ints.zeta))
}

// ---------------------------------------------------------------------------
// Central monad and the induction/restriction adjunction
// ---------------------------------------------------------------------------

/// Report of the centre-related dimension checks.
#[derive(Clone, Debug)]
pub struct CentreReport {
    /// Cokernel dimension of the coend X |-> X* (x) V (x) X at the regular
    /// probe.
    pub coend_fiber_dim: usize,
    /// dim L * dim V.
    pub expected_fiber_dim: usize,
    /// dim Hom_{D(H)}(Ind V, W).
    pub induction_dim: usize,
    /// dim Hom_H(V, Res W).
    pub restriction_dim: usize,
}

impl CentreReport {
    pub fn pass(&self) -> bool {
        self.coend_fiber_dim == self.expected_fiber_dim
            && self.induction_dim == self.restriction_dim
    }
}

/// The induced D(H)-module D(H) (x)_H V on the basis f^p (x) v_k.
pub fn induce(dd: &Arc<RibbonHopfAlgebra>, v: &ModuleObject) -> Result<ModuleObject> {
    let h = &v.parent;
    let n = h.dim;
    if dd.dim != n * n {
        return Err(Error::ShapeMismatch(format!(
            "induce: double has dim {}, expected {}",
            dd.dim,
            n * n
        )));
    }
    let dv = v.dim;
    let dim = n * dv;
    let t = dd.tables();
    let mut action = vec![SparseMat::new(dim, dim); dd.dim];
    // f^p (x) 1 as an element of the double
    let mut fp_elems = Vec::with_capacity(n);
    for p in 0..n {
        let mut fp = vec![Scalar::zero(); dd.dim];
        for (j, uj) in h.unit.iter().enumerate() {
            if !uj.is_zero() {
                fp[p * n + j] = uj.clone();
            }
        }
        fp_elems.push(fp);
    }
    for (b, act) in action.iter_mut().enumerate() {
        let eb = dd.basis_elem(b);
        for (p, fp) in fp_elems.iter().enumerate() {
            let prod = t.mul_vec(&eb, fp);
            for (c, coeff) in prod.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let (c1, c2) = (c / n, c % n);
                for (&(r, k), av) in &v.action[c2].entries {
                    act.add_to(c1 * dv + r, p * dv + k, &coeff.mul(av));
                }
            }
        }
    }
    Ok(ModuleObject::from_action(dd.clone(), dim, action, Some("Ind".into())))
}

/// Restrict a D(H)-module to H along e_j |-> eps (x) e_j.
pub fn restrict(h: &Arc<RibbonHopfAlgebra>, w: &ModuleObject) -> Result<ModuleObject> {
    let n = h.dim;
    if w.parent.dim != n * n {
        return Err(Error::ShapeMismatch(format!(
            "restrict: parent has dim {}, expected {}",
            w.parent.dim,
            n * n
        )));
    }
    let action = (0..n)
        .map(|j| {
            let mut m = SparseMat::new(w.dim, w.dim);
            for i in 0..n {
                let c = &h.counit[i];
                if c.is_zero() {
                    continue;
                }
                for (&(r, cc), val) in &w.action[i * n + j].entries {
                    m.add_to(r, cc, &c.mul(val));
                }
            }
            m
        })
        .collect();
    Ok(ModuleObject::from_action(h.clone(), w.dim, action, Some("Res".into())))
}

/// Dimension checks for the central monad Z(V) = coend of X* (x) V (x) X
/// and the induction/restriction adjunction against the Drinfeld double.
pub fn central_monad_checks(
    v: &ModuleObject,
    dd: &Arc<RibbonHopfAlgebra>,
    w: &ModuleObject,
) -> Result<CentreReport> {
    let h = &v.parent;
    let n = h.dim;
    let dv = v.dim;
    // Coend fiber at the regular probe: H* (x) V (x) H modulo the relations
    // (t^* f) (x) v (x) x ~ f (x) v (x) t(x) for t ranging over the right
    // multiplications (the module endomorphisms of the regular module).
    let cols = n * dv * n;
    let mut rows = Vec::new();
    for a in 0..n {
        let ra = h.right_mul_mat(&h.basis_elem(a));
        for i in 0..n {
            for k in 0..dv {
                for j in 0..n {
                    let mut row = vec![Scalar::zero(); cols];
                    for x in 0..n {
                        let c = ra.at(i, x);
                        if !c.is_zero() {
                            let idx = (x * dv + k) * n + j;
                            row[idx] = row[idx].add(c);
                        }
                    }
                    for y in 0..n {
                        let c = ra.at(y, j);
                        if !c.is_zero() {
                            let idx = (i * dv + k) * n + y;
                            row[idx] = row[idx].sub(c);
                        }
                    }
                    if row.iter().any(|s| !s.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let rank = if rows.is_empty() { 0 } else { Mat::from_rows(rows).rank() };
    let coend_fiber_dim = cols - rank;

    let ind = induce(dd, v)?;
    let res = restrict(h, w)?;
    let induction_dim = hom_space(&ind, w)?.len();
    let restriction_dim = hom_space(v, &res)?.len();
    Ok(CentreReport {
        coend_fiber_dim,
        expected_fiber_dim: n * dv,
        induction_dim,
        restriction_dim,
    })
}

// ---------------------------------------------------------------------------
// Doubling dimensions
// ---------------------------------------------------------------------------

/// Report for the product-category dimension check.
#[derive(Clone, Debug)]
pub struct DoublingReport {
    pub factor_dim: usize,
    pub product_dim: usize,
}

impl DoublingReport {
    pub fn pass(&self) -> bool {
        self.product_dim == self.factor_dim * self.factor_dim
    }
}

/// State-space dimensions over the product category (tensor-product Hopf
/// algebra) are the products of the factor dimensions.  When `colored`,
/// the check additionally decorates the surface with a regular marked point
/// in each factor.
pub fn doubling_dimension_check(
    h: &Arc<RibbonHopfAlgebra>,
    genus: usize,
    colored: bool,
) -> Result<DoublingReport> {
    let sig = CategorySignature::new(h.clone());
    let c1 = CoendObject::new(&sig)?;
    let colors1: Vec<ModuleObject> = if colored { vec![sig.regular()] } else { vec![] };
    let d1 = state_space(&c1, genus, &colors1, &colors1)?.dim();

    let hp = Arc::new(repcat::deligne_product(h, h)?);
    let sigp = CategorySignature::new(hp);
    let cp = CoendObject::new(&sigp)?;
    let colorsp: Vec<ModuleObject> = if colored { vec![sigp.regular()] } else { vec![] };
    let dp = state_space(&cp, genus, &colorsp, &colorsp)?.dim();
    Ok(DoublingReport { factor_dim: d1, product_dim: dp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coend::CoendData;
    use crate::hopf::builtin;
    use crate::repcat::simples;

    fn sig(name: &str) -> CategorySignature {
        CategorySignature::new(Arc::new(builtin(name).unwrap()))
    }

    fn full_setup(name: &str) -> (CategorySignature, CoendData, Integrals, ModularConstants) {
        let s = sig(name);
        let mut cd = CoendData::build(&s).unwrap();
        let ints = cd.normalize_integrals().unwrap();
        let mc = cd.modular_constants(&ints, 1).unwrap();
        (s, cd, ints, mc)
    }

    #[test]
    fn torus_state_space_dimensions() {
        for (name, expect) in [
            ("trivial", 1),
            ("group_z2_semion", 2),
            ("group_z3", 3),
            ("double_z2", 4),
            ("double_sweedler", 8),
        ] {
            let s = sig(name);
            let c = CoendObject::new(&s).unwrap();
            let ss = state_space(&c, 1, &[], &[]).unwrap();
            assert_eq!(ss.dim(), expect, "torus dimension for {}", name);
        }
    }

    #[test]
    fn sphere_with_matching_points_has_dimension_one() {
        let s = sig("trivial");
        let c = CoendObject::new(&s).unwrap();
        let k = s.trivial();
        let ss = state_space(&c, 0, &[k.clone()], &[k]).unwrap();
        assert_eq!(ss.dim(), 1);
    }

    #[test]
    fn state_space_dimension_is_invariant_under_permuting_in_colors() {
        for name in ["group_z2_semion", "double_z2"] {
            let s = sig(name);
            let c = CoendObject::new(&s).unwrap();
            let h = s.regular();
            let chi = simples(&s.parent).pop().unwrap();
            let d1 = state_space(&c, 1, &[h.clone(), chi.clone()], &[h.clone()])
                .unwrap()
                .dim();
            let d2 = state_space(&c, 1, &[chi, h.clone()], &[h]).unwrap().dim();
            assert_eq!(d1, d2, "permuted in-colors for {}", name);
        }
    }

    #[test]
    fn torus_action_satisfies_the_modular_relation() {
        for name in ["trivial", "group_z3", "double_z2"] {
            let (_s, cd, ints, mc) = full_setup(name);
            let ta = torus_action(&cd, &ints, &mc).unwrap();
            assert!(ta.relation_holds, "S^2 = zeta S_L^{{-1}} fails for {}", name);
            assert!(ta.invertible, "rep matrices not invertible for {}", name);
        }
        let (_s, cd, ints, mc) = full_setup("trivial");
        let ta = torus_action(&cd, &ints, &mc).unwrap();
        assert_eq!(ta.s_rep, Mat::identity(1));
        assert_eq!(ta.t_rep, Mat::identity(1));
    }

    #[test]
    fn torus_action_rejects_non_modular_parents() {
        let s = sig("sweedler");
        let mut cd = CoendData::build(&s).unwrap();
        assert!(cd.normalize_integrals().is_err());
    }

    #[test]
    fn t_endomorphism_restricts_to_the_twist_on_probe_images() {
        for name in ["group_z3", "double_z2", "sweedler"] {
            let s = sig(name);
            let cd = CoendData::build(&s).unwrap();
            for x in [s.regular(), s.trivial()] {
                let iota = cd.coend.iota(&x);
                let theta = s.twist(&x).unwrap();
                let lhs = cd.t_endo.matmul(&iota.matrix).unwrap();
                let rhs = iota
                    .matrix
                    .matmul(&Mat::identity(x.dim).kron(&theta.matrix))
                    .unwrap();
                assert_eq!(lhs, rhs, "T o iota = iota o (id (x) theta) for {}", name);
            }
        }
    }

    #[test]
    fn anomaly_ratios_match_the_maslov_defects() {
        // delta = 1: every central word pair must match on the nose.
        let (_s, cd, ints, mc) = full_setup("double_z2");
        let rep = anomaly_check(&cd, &ints, &mc).unwrap();
        assert!(rep.all_pass(), "double_z2 report: {:?}", rep.items);
        // anomalous case: delta is a primitive cube root of unity.
        let (_s, cd, ints, mc) = full_setup("group_z3");
        assert!(!mc.delta.is_one());
        let rep = anomaly_check(&cd, &ints, &mc).unwrap();
        assert!(rep.all_pass(), "group_z3 report: {:?}", rep.items);
        assert!(rep.items.iter().any(|(_, d, _)| *d != 0));
    }

    #[test]
    fn connected_gluing_witness_passes() {
        for name in ["trivial", "group_z3", "double_z2"] {
            let (s, cd, ints, _mc) = full_setup(name);
            let one = s.trivial();
            let mut probes = simples(&s.parent);
            probes.push(s.regular());
            let w = glue_connected(&cd, &ints, &one, &one, &probes).unwrap();
            assert!(w.pass(), "connected gluing for {}: {:?}", name, w);
            assert_eq!(w.five_step, Some(true), "five-step identity for {}", name);
        }
    }

    #[test]
    fn connected_gluing_with_colors_and_probe_enlargement() {
        let (s, cd, ints, _mc) = full_setup("group_z3");
        let h = s.regular();
        let chi = simples(&s.parent).pop().unwrap();
        let mut probes = simples(&s.parent);
        probes.push(h.clone());
        let w = glue_connected(&cd, &ints, &chi, &chi, &probes).unwrap();
        assert!(w.pass(), "colored connected gluing: {:?}", w);
        // enlarging the probe set must not change the verdicts
        probes.push(tensor(&h, &h));
        let w2 = glue_connected(&cd, &ints, &chi, &chi, &probes).unwrap();
        assert!(w2.pass());
        assert_eq!(w.target_dim, w2.target_dim);
        assert_eq!(w.family_rank, w2.family_rank);
    }

    #[test]
    fn disconnected_gluing_witness_passes() {
        // all boundary colours trivial
        let s = sig("trivial");
        let k = s.trivial();
        let probes = vec![s.regular()];
        let w = glue_disconnected(&k, &k, &k, &k, &probes).unwrap();
        assert!(w.pass(), "trivial disconnected gluing: {:?}", w);
        assert_eq!(w.target_dim, 1);

        // regular colours; no modularity needed
        for name in ["group_z2_semion", "sweedler"] {
            let s = sig(name);
            let h = s.regular();
            let mut probes = simples(&s.parent);
            probes.push(h.clone());
            let w = glue_disconnected(&h, &h, &h, &h, &probes).unwrap();
            assert!(w.pass(), "disconnected gluing for {}: {:?}", name, w);
        }

        // mixed simples
        let s = sig("double_z2");
        let ss = simples(&s.parent);
        let mut probes = ss.clone();
        probes.push(s.regular());
        let w = glue_disconnected(&ss[1], &ss[2], &ss[3], &ss[1], &probes).unwrap();
        assert!(w.pass(), "mixed disconnected gluing: {:?}", w);
    }

    #[test]
    fn central_monad_and_adjunction_dimensions() {
        for (name, pick) in [("trivial", 0), ("group_z2_semion", 1), ("sweedler", 0)] {
            let s = sig(name);
            let v = if pick == 0 { s.regular() } else { simples(&s.parent)[pick].clone() };
            let dd = Arc::new(s.parent.drinfeld_double().unwrap());
            let w = ModuleObject::regular(dd.clone());
            let rep = central_monad_checks(&v, &dd, &w).unwrap();
            assert!(
                rep.pass(),
                "centre checks for {}: fiber {} vs {}, adjunction {} vs {}",
                name,
                rep.coend_fiber_dim,
                rep.expected_fiber_dim,
                rep.induction_dim,
                rep.restriction_dim
            );
        }
    }

    #[test]
    fn induced_and_restricted_modules_are_modules() {
        let s = sig("group_z2_semion");
        let dd = Arc::new(s.parent.drinfeld_double().unwrap());
        let v = simples(&s.parent)[1].clone();
        induce(&dd, &v).unwrap().verify().unwrap();
        restrict(&s.parent, &ModuleObject::regular(dd.clone())).unwrap().verify().unwrap();
    }

    #[test]
    fn doubling_multiplies_state_space_dimensions() {
        for (name, expect) in [("trivial", 1), ("group_z2_semion", 2), ("group_z3", 3), ("double_z2", 4)] {
            let h = Arc::new(builtin(name).unwrap());
            let rep = doubling_dimension_check(&h, 1, false).unwrap();
            assert_eq!(rep.factor_dim, expect);
            assert!(rep.pass(), "doubling for {}: {:?}", name, rep);
        }
        // a colored sample
        let h = Arc::new(builtin("group_z2_semion").unwrap());
        let rep = doubling_dimension_check(&h, 1, true).unwrap();
        assert!(rep.pass(), "colored doubling: {:?}", rep);
    }
}
