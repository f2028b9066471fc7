use mwk_core::fields::FieldDesc;
use mwk_core::geom::*;
use mwk_core::kmw::{KmwElem, KmwTwisted};
use mwk_core::vlines::VirtualBundle;

fn main() {
    let e = FieldDesc::finite(5, 1);
    let spec = Scheme::spec(e);
    let a1 = Scheme::affine_line(e);
    let u = a1.open_complement(&[zero_point(e)]).unwrap();
    let ff = FieldDesc::rational(5, 1);
    let x = KmwElem::gw_unit(&e.from_i64(2)).unwrap();
    let c = Cycle::single(
        spec.clone(),
        SchemeTwist::trivial(0),
        PointRef { component: 0, pt: Pt::Spec },
        KmwTwisted::new(x.clone(), VirtualBundle::zero(e)).unwrap(),
    )
    .unwrap();
    let pulled_a1 = pull_from_base(&a1, &c).unwrap();
    eprintln!("pulled: {} pts", pulled_a1.support.len());
    for (p, v) in &pulled_a1.support { eprintln!("  {:?} -> {} twist {:?}", p.pt, v.raw, v.twist.summands); }
    let pulled = pull_open(&u, &pulled_a1).unwrap();
    eprintln!("restricted: {} pts", pulled.support.len());
    let multiplied = mult_units(&pulled, &[ff.gen_t()]).unwrap();
    eprintln!("multiplied: {} pts", multiplied.support.len());
    for (p, v) in &multiplied.support { eprintln!("  {:?} -> {}", p.pt, v.raw); }
    let back = boundary(&a1, &[zero_point(e)], &multiplied).unwrap();
    eprintln!("boundary: {} pts", back.support.len());
    for (p, v) in &back.support { eprintln!("  {:?} -> {}", p.pt, v.raw); }
}
