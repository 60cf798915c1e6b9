use std::sync::Arc;

use coendtft::diagram::{
    cap, cup_blue, eval_blue, id_blue, open_at_edge, CapVariant, CupVariant, DiagramEnv, Dir,
    MorphismEntry, Piece, SlicedDiagram,
};
use coendtft::repcat::CategorySignature;

fn main() {
    for name in ["trivial", "group_z3", "double_z2", "quantum_sl2"] {
        let h = Arc::new(coendtft::hopf::builtin(name).unwrap());
        let sig = CategorySignature::new(h.clone());
        let x = sig.regular();
        let f = sig.twist(&x).unwrap();
        let env = DiagramEnv::new(sig.clone()).with_object("V", x.clone()).with_morphism(
            "f",
            MorphismEntry {
                map: f.clone(),
                ins: vec![("V".into(), Dir::Up)],
                outs: vec![("V".into(), Dir::Up)],
            },
        );
        let coupon = Piece::Coupon { morphism: "f".into(), ins: 1, outs: 1 };
        // closure bends on the right, cut below the coupon
        let right = SlicedDiagram::new(
            vec![],
            vec![],
            vec![
                vec![cup_blue(CupVariant::Coev, "V")],
                vec![id_blue("V", Dir::Up), id_blue("V", Dir::Down)],
                vec![coupon.clone(), id_blue("V", Dir::Down)],
                vec![cap(CapVariant::EvTilde)],
            ],
        );
        // closure bends on the left, cut below the coupon
        let left = SlicedDiagram::new(
            vec![],
            vec![],
            vec![
                vec![cup_blue(CupVariant::CoevTilde, "V")],
                vec![id_blue("V", Dir::Down), id_blue("V", Dir::Up)],
                vec![id_blue("V", Dir::Down), coupon.clone()],
                vec![cap(CapVariant::Ev)],
            ],
        );
        // cut above the coupon (right bends)
        let above = SlicedDiagram::new(
            vec![],
            vec![],
            vec![
                vec![cup_blue(CupVariant::Coev, "V")],
                vec![coupon, id_blue("V", Dir::Down)],
                vec![id_blue("V", Dir::Up), id_blue("V", Dir::Down)],
                vec![cap(CapVariant::EvTilde)],
            ],
        );
        for (label, d, li, pi) in
            [("right", &right, 1usize, 0usize), ("left", &left, 1, 1), ("above", &above, 2, 0)]
        {
            match open_at_edge(d, &env, li, pi) {
                Ok(opened) => {
                    let t = eval_blue(&opened, &env).unwrap();
                    println!("{name} {label}: T == f: {}", t.matrix == f.matrix);
                }
                Err(e) => println!("{name} {label}: ERR {e}"),
            }
        }
    }
}
