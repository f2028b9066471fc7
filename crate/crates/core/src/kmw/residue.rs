//! Residue and specialization for the canonical uniformizer of a place,
//! computed through the residue extension: elements near the place split as
//! res(s) + [pi] res(d), and the pair (s, d) multiplies by
//!
//!   (a, b) (c, d) = (ac, eps^{|a|} a d + b c + eps^{|b|} [-1] b d),
//!
//! which encodes [pi][pi] = [pi][-1] and the eps-commutation of symbols.
//! Over the supported tower eps is central, which the rule uses.

use super::{KmwElem, KmwError};
use crate::fields::{FieldDesc, FieldElem, Place};

/// Specialization and residue of an element with respect to the canonical
/// uniformizer of a place, both over the nominal residue field.
#[derive(Clone, Debug)]
pub struct ResiduePair {
    pub spec: KmwElem,
    pub bound: KmwElem,
}

struct Pair {
    s: KmwElem,
    d: KmwElem,
}

fn pair_one(kappa: FieldDesc) -> Pair {
    Pair { s: KmwElem::one(kappa), d: KmwElem::zero(kappa, -1) }
}

fn pair_add(x: &Pair, y: &Pair) -> Pair {
    Pair { s: x.s.add(&y.s), d: x.d.add(&y.d) }
}

fn pair_mul(x: &Pair, y: &Pair) -> Pair {
    let kappa = x.s.field;
    let s = x.s.mul(&y.s).unwrap();
    let term1 = KmwElem::eps_pow(kappa, x.s.degree)
        .mul(&x.s)
        .unwrap()
        .mul(&y.d)
        .unwrap();
    let term2 = x.d.mul(&y.s).unwrap();
    let minus_one = KmwElem::symbol(&kappa.from_i64(-1)).unwrap();
    let term3 = KmwElem::eps_pow(kappa, x.d.degree)
        .mul(&minus_one)
        .unwrap()
        .mul(&x.d)
        .unwrap()
        .mul(&y.d)
        .unwrap();
    Pair { s, d: term1.add(&term2).add(&term3) }
}

/// Pair of a single symbol [pi^m u]: recursion on |m| through the product
/// relation, grounded at ([u-bar], 0), ([pi] -> (0, 1)) and
/// ([1/pi] -> (0, eps)).
fn entry_pair(place: &Place, kappa: FieldDesc, a: &FieldElem) -> Result<Pair, KmwError> {
    let (m, u) = place.valuation_and_unit(a)?;
    let ubar = FieldElem::fin(place.residue_field(), place.reduce(&u)?);
    let sym = KmwElem::symbol(&ubar)?;
    let mut acc = Pair { s: sym, d: KmwElem::zero(kappa, 0) };
    if m == 0 {
        return Ok(acc);
    }
    let step = if m > 0 {
        // [pi]
        Pair { s: KmwElem::zero(kappa, 1), d: KmwElem::one(kappa) }
    } else {
        // [1/pi]
        Pair { s: KmwElem::zero(kappa, 1), d: KmwElem::eps(kappa) }
    };
    let eta = Pair { s: KmwElem::eta(kappa), d: KmwElem::zero(kappa, -2) };
    for _ in 0..m.unsigned_abs() {
        // [pi^{k+1} u'] = [pi] + [pi^k u'] + eta [pi] [pi^k u']
        let cross = pair_mul(&eta, &pair_mul(&step, &acc));
        acc = pair_add(&pair_add(&step, &acc), &cross);
    }
    Ok(acc)
}

/// Compute s^pi and d^pi for the canonical uniformizer of the place.
pub fn residue_pair(place: &Place, x: &KmwElem) -> Result<ResiduePair, KmwError> {
    if x.field != place.field {
        return Err(KmwError::FieldMismatch);
    }
    let kappa = place.residue_desc();
    let mut spec = KmwElem::zero(kappa, x.degree);
    let mut bound = KmwElem::zero(kappa, x.degree - 1);
    for (w, c) in x.terms() {
        let mut acc = pair_one(kappa);
        let eta = Pair { s: KmwElem::eta(kappa), d: KmwElem::zero(kappa, -2) };
        for _ in 0..w.eta_pow {
            acc = pair_mul(&acc, &eta);
        }
        for a in &w.symbols {
            acc = pair_mul(&acc, &entry_pair(place, kappa, a)?);
        }
        spec = spec.add(&acc.s.scale(c));
        bound = bound.add(&acc.d.scale(c));
    }
    Ok(ResiduePair { spec, bound })
}

/// Residue for the canonical uniformizer.
pub fn raw_residue(place: &Place, x: &KmwElem) -> Result<KmwElem, KmwError> {
    Ok(residue_pair(place, x)?.bound)
}

/// Specialization for the canonical uniformizer.
pub fn raw_specialize(place: &Place, x: &KmwElem) -> Result<KmwElem, KmwError> {
    Ok(residue_pair(place, x)?.spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldDesc, Place, Poly};

    fn setup() -> (FieldDesc, Place, Place) {
        let f = FieldDesc::rational(5, 1);
        let ctx = f.ctx();
        let vt = Place::finite(f, Poly::x(&ctx)).unwrap();
        let vinf = Place::infinity(f);
        (f, vt, vinf)
    }

    #[test]
    fn residue_of_uniformizer_symbol() {
        let (f, vt, _) = setup();
        let t = f.gen_t();
        // d^t([t, 2]) = [2], d^t([3, 2]) = 0
        let x = KmwElem::symbols(f, &[t.clone(), f.from_i64(2)]).unwrap();
        let r = raw_residue(&vt, &x).unwrap();
        let kappa = vt.residue_desc();
        let expect = KmwElem::symbol(&kappa.from_i64(2)).unwrap();
        assert!(r.equal(&expect).unwrap());
        let y = KmwElem::symbols(f, &[f.from_i64(3), f.from_i64(2)]).unwrap();
        assert!(raw_residue(&vt, &y).unwrap().is_zero().unwrap());
    }

    #[test]
    fn residue_commutes_with_eta() {
        let (f, vt, _) = setup();
        let t = f.gen_t();
        let x = KmwElem::symbols(f, &[t.clone(), t.add(&f.from_i64(1))]).unwrap();
        let lhs = raw_residue(&vt, &x.mul_eta()).unwrap();
        let rhs = raw_residue(&vt, &x).unwrap().mul_eta();
        assert!(lhs.equal(&rhs).unwrap());
    }

    #[test]
    fn specialization_formula() {
        let (f, vt, _) = setup();
        let t = f.gen_t();
        // s^t([t * 2]) = [2]
        let x = KmwElem::symbol(&t.mul(&f.from_i64(2))).unwrap();
        let s = raw_specialize(&vt, &x).unwrap();
        let kappa = vt.residue_desc();
        assert!(s.equal(&KmwElem::symbol(&kappa.from_i64(2)).unwrap()).unwrap());
        // s^t([t^{m}a, t^{n}b]) = [a-bar, b-bar]
        let a = f.from_i64(3);
        let b = f.from_i64(2);
        let e1 = t.pow(2).mul(&a);
        let e2 = t.pow(-1).mul(&b);
        let x = KmwElem::symbols(f, &[e1, e2]).unwrap();
        let s = raw_specialize(&vt, &x).unwrap();
        let expect =
            KmwElem::symbols(kappa, &[kappa.from_i64(3), kappa.from_i64(2)]).unwrap();
        assert!(s.equal(&expect).unwrap());
    }

    #[test]
    fn residue_of_units_vanishes() {
        let (f, vt, _) = setup();
        let units = [f.from_i64(2), f.gen_t().add(&f.from_i64(1)), f.gen_t().add(&f.from_i64(3))];
        for a in &units {
            for b in &units {
                let x = KmwElem::symbols(f, &[a.clone(), b.clone()]).unwrap();
                assert!(raw_residue(&vt, &x).unwrap().is_zero().unwrap());
            }
        }
    }

    #[test]
    fn residue_at_infinity_of_t() {
        let (f, _, vinf) = setup();
        let t = f.gen_t();
        // t = (-1) * pi_inf^{-1}: the residue of [t] at infinity is -1 in
        // degree 0 (its rank shadow is -1)
        let x = KmwElem::symbol(&t).unwrap();
        let r = raw_residue(&vinf, &x).unwrap();
        assert_eq!(r.degree, 0);
        let minus_one = KmwElem::from_int(vinf.residue_desc(), -1);
        assert!(r.equal(&minus_one).unwrap());
    }

    #[test]
    fn uniformizer_change_law() {
        // d^pi(x) = <u> d^{pi'}(x) when pi' = u pi: exercised through the
        // element [pi'] = [u pi] whose pi-residue is <u-bar>
        let (f, vt, _) = setup();
        let u = f.from_i64(3);
        let pi_prime = vt.uniformizer().mul(&u);
        let x = KmwElem::symbol(&pi_prime).unwrap();
        let r = raw_residue(&vt, &x).unwrap();
        let kappa = vt.residue_desc();
        let expect = KmwElem::gw_unit(&kappa.from_i64(3)).unwrap();
        assert!(r.equal(&expect).unwrap());
    }

    #[test]
    fn quadratic_residue_field_places() {
        let f = FieldDesc::rational(5, 1);
        let ctx = f.ctx();
        // pi = t^2+2, irreducible over GF(5); residue field GF(25)
        let pi = Poly::from_coeffs(&ctx, vec![ctx.from_u64(2), ctx.zero(), ctx.from_u64(1)]);
        let v = Place::finite(f, pi).unwrap();
        let t = f.gen_t();
        // d([pi * (t+1)]) where entries: [t^2+2] has valuation 1
        let pi_el = v.uniformizer();
        let x = KmwElem::symbols(f, &[pi_el, t.add(&f.from_i64(1))]).unwrap();
        let r = raw_residue(&v, &x).unwrap();
        // = [red(t+1)] over GF(25)
        let red = v.reduce(&t.add(&f.from_i64(1))).unwrap();
        let expect = KmwElem::symbol(&FieldElem::fin(v.residue_field(), red)).unwrap();
        assert!(r.equal(&expect).unwrap());
    }
}
