use mwk_core::fields::{FieldDesc, Fq};
use mwk_core::kmw::{KmwElem, KmwTwisted};
use mwk_core::vlines::VirtualBundle;

fn main() {
    let e = Fq::new(3, 1);
    let f9 = FieldDesc::finite(3, 2);
    eprintln!("building transfer input");
    let x = KmwTwisted::new(KmwElem::one(f9), VirtualBundle::zero(f9)).unwrap();
    eprintln!("calling finite_transfer");
    let tr = mwk_core::premodule::transfer::finite_transfer(e, &x, None).unwrap();
    eprintln!("done: {}", tr.raw);
}
