// scratch: calibrate the gluing-identity diagrams
use std::sync::Arc;

use coendtft::coend::CoendData;
use coendtft::diagram::{
    self, cap, cross, cup_blue, cup_red, id_blue, CapVariant, CupVariant, DiagramEnv, Dir,
    MorphismEntry, Piece, SlicedDiagram,
};
use coendtft::hopf::builtin;
use coendtft::linalg::Mat;
use coendtft::repcat::{hom_space, CategorySignature, Intertwiner};
use coendtft::scalar::Scalar;

fn scale(m: &Mat, c: &Scalar) -> Mat {
    let mut out = Mat::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, m.at(i, j).mul(c));
        }
    }
    out
}

fn da(cup: CupVariant, s1: i8, s2: i8) -> SlicedDiagram {
    let (capv, up_first) = match cup {
        CupVariant::Coev => (CapVariant::EvTilde, true),
        CupVariant::CoevTilde => (CapVariant::Ev, false),
    };
    let coupon = Piece::Coupon { morphism: "fg".into(), ins: 1, outs: 1 };
    let (l2, first_dir) = if up_first {
        (
            vec![coupon, id_blue("Xg", Dir::Down), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            Dir::Up,
        )
    } else {
        (
            vec![id_blue("Xg", Dir::Down), coupon, id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            Dir::Down,
        )
    };
    SlicedDiagram::new(
        vec![(Some("Zg".into()), Dir::Down), (Some("Zg".into()), Dir::Up)],
        vec![],
        vec![
            vec![cup_blue(cup, "Xg"), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            l2,
            vec![id_blue("Xg", first_dir), cross(s1), id_blue("Zg", Dir::Up)],
            vec![id_blue("Xg", first_dir), cross(s2), id_blue("Zg", Dir::Up)],
            vec![cap(capv), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            vec![cap(CapVariant::Ev)],
        ],
    )
}

fn db(cup: CupVariant, rcup: CupVariant, t1: i8, t2: i8) -> SlicedDiagram {
    let (capv, up_first) = match cup {
        CupVariant::Coev => (CapVariant::EvTilde, true),
        CupVariant::CoevTilde => (CapVariant::Ev, false),
    };
    let rcap = match rcup {
        CupVariant::CoevTilde => CapVariant::Ev,
        CupVariant::Coev => CapVariant::EvTilde,
    };
    let (rd1, rd2) = match rcup {
        CupVariant::CoevTilde => (Dir::Down, Dir::Up),
        CupVariant::Coev => (Dir::Up, Dir::Down),
    };
    let coupon = Piece::Coupon { morphism: "fg".into(), ins: 1, outs: 1 };
    let (l2, first_dir, second_dir) = if up_first {
        (
            vec![coupon, id_blue("Xg", Dir::Down), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            Dir::Up,
            Dir::Down,
        )
    } else {
        (
            vec![id_blue("Xg", Dir::Down), coupon, id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            Dir::Down,
            Dir::Up,
        )
    };
    SlicedDiagram::new(
        vec![(Some("Zg".into()), Dir::Down), (Some("Zg".into()), Dir::Up)],
        vec![],
        vec![
            vec![cup_blue(cup, "Xg"), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            l2,
            vec![
                id_blue("Xg", first_dir),
                cup_red(rcup),
                id_blue("Xg", second_dir),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", first_dir),
                diagram::id_red(rd1),
                cross(t1),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", first_dir),
                cross(t2),
                diagram::id_red(rd2),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![
                id_blue("Xg", first_dir),
                id_blue("Xg", second_dir),
                cap(rcap),
                id_blue("Zg", Dir::Down),
                id_blue("Zg", Dir::Up),
            ],
            vec![cap(capv), id_blue("Zg", Dir::Down), id_blue("Zg", Dir::Up)],
            vec![cap(CapVariant::Ev)],
        ],
    )
}

fn main() {
    for name in ["group_z3", "double_z2"] {
        println!("=== {} ===", name);
        let s = CategorySignature::new(Arc::new(builtin(name).unwrap()));
        let mut cd = CoendData::build(&s).unwrap();
        let ints = cd.normalize_integrals().unwrap();
        let h = s.regular();
        let fs: Vec<Intertwiner> = hom_space(&h, &h).unwrap();
        let probes: Vec<&Intertwiner> = fs.iter().take(3).collect();
        let one = s.trivial();
        // algebraic targets
        let targets: Vec<Mat> = probes
            .iter()
            .map(|f| {
                coendtft::tft::glue_connected_map(&cd, &h, &one, &one, f)
                    .unwrap()
                    .matrix
                    .matmul(&cd.coend.iota(&h).matrix)
                    .unwrap()
            })
            .collect();
        let envs: Vec<DiagramEnv> = probes
            .iter()
            .map(|f| {
                DiagramEnv::new(s.clone())
                    .with_object("Xg", h.clone())
                    .with_object("Zg", h.clone())
                    .with_morphism(
                        "fg",
                        MorphismEntry {
                            map: (*f).clone(),
                            ins: vec![("Xg".into(), Dir::Up)],
                            outs: vec![("Xg".into(), Dir::Up)],
                        },
                    )
            })
            .collect();
        let show = |m: &Mat| -> String {
            let mut s = String::new();
            for i in 0..m.rows {
                for j in 0..m.cols {
                    s.push_str(&format!("{:?} ", m.at(i, j)));
                }
                s.push('|');
            }
            s
        };
        if name == "group_z3" {
            println!("target[0]: {}", show(&targets[0]));
        }
        for cup in [CupVariant::Coev, CupVariant::CoevTilde] {
            for s1 in [1i8, -1] {
                for s2 in [1i8, -1] {
                    let d = da(cup, s1, s2);
                    let ok = envs.iter().zip(&targets).all(|(env, t)| {
                        match diagram::eval_blue(&d, env) {
                            Ok(r) => r.matrix == *t,
                            Err(e) => {
                                println!("  da {:?} {} {} error: {:?}", cup, s1, s2, e);
                                false
                            }
                        }
                    });
                    if ok {
                        println!("DA match: cup={:?} s1={} s2={}", cup, s1, s2);
                    }
                    if name == "group_z3" && s1 != s2 {
                        for (pi, env) in envs.iter().enumerate() {
                            if let Ok(r) = diagram::eval_blue(&d, env) {
                                println!(
                                    "da {:?} {} {} probe {}: {}",
                                    cup, s1, s2, pi, show(&r.matrix)
                                );
                                println!("            target {}: {}", pi, show(&targets[pi]));
                            }
                        }
                    }
                }
            }
        }
        for cup in [CupVariant::Coev, CupVariant::CoevTilde] {
            for rcup in [CupVariant::CoevTilde, CupVariant::Coev] {
                for t1 in [1i8, -1] {
                    for t2 in [1i8, -1] {
                        let d = db(cup, rcup, t1, t2);
                        let ok = envs.iter().zip(&targets).all(|(env, t)| {
                            match diagram::eval_bichrome(&d, env, &cd, &ints) {
                                Ok(r) => r.map.matrix == scale(t, &ints.zeta),
                                Err(e) => {
                                    println!(
                                        "  db {:?} {:?} {} {} error: {:?}",
                                        cup, rcup, t1, t2, e
                                    );
                                    false
                                }
                            }
                        });
                        if ok {
                            println!(
                                "DB match: cup={:?} rcup={:?} t1={} t2={}",
                                cup, rcup, t1, t2
                            );
                        }
                    }
                }
            }
        }
    }
}

#[allow(dead_code)]
fn diag_dump() {}
