//! The two shadows deciding equality in Milnor-Witt K-theory over the
//! tower: the Milnor shadow (eta -> 0, decided through tame symbols down to
//! finite fields) and the Witt shadow (eta -> 1, [a] -> <a> - 1, decided in
//! the Witt group through second residues and diagonal-form invariants).

use super::{KmwElem, KmwError};
use crate::fields::{place, ElemBody, FieldDesc, FieldElem, Place};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Milnor shadow
// ---------------------------------------------------------------------------

/// Integer combination of Milnor symbols {a_1,...,a_n} of a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorElem {
    pub field: FieldDesc,
    pub degree: i64,
    pub terms: BTreeMap<Vec<FieldElem>, BigInt>,
}

impl MilnorElem {
    pub fn zero(field: FieldDesc, degree: i64) -> MilnorElem {
        MilnorElem { field, degree, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, w: Vec<FieldElem>, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

/// Kill eta: keep the words without eta factors.
pub fn milnor_shadow(x: &KmwElem) -> MilnorElem {
    let mut out = MilnorElem::zero(x.field, x.degree);
    for (w, c) in x.terms() {
        if w.eta_pow == 0 {
            out.add_term(w.symbols.clone(), c.clone());
        }
    }
    out
}

pub fn milnor_shadow_is_zero(x: &KmwElem) -> Result<bool, KmwError> {
    milnor_is_zero(&milnor_shadow(x))
}

pub fn milnor_is_zero(m: &MilnorElem) -> Result<bool, KmwError> {
    if m.degree < 0 {
        return Ok(true);
    }
    match m.field {
        FieldDesc::Finite(_) => milnor_is_zero_finite(m),
        FieldDesc::RatFunc(..) => milnor_is_zero_ratfunc(m),
    }
}

fn milnor_is_zero_finite(m: &MilnorElem) -> Result<bool, KmwError> {
    match m.degree {
        0 => {
            let total: BigInt = m.terms.values().sum();
            Ok(total.is_zero())
        }
        1 => {
            // K^M_1(GF(q)) = Z/(q-1) via the discrete log
            let ctx = m.field.ctx();
            let modulus = BigInt::from(ctx.size - 1);
            let mut total = BigInt::zero();
            for (w, c) in &m.terms {
                let a = w[0].as_fq();
                total += c * BigInt::from(ctx.dlog(a));
            }
            Ok(total.mod_floor(&modulus).is_zero())
        }
        _ => Ok(true), // K^M_n of a finite field vanishes for n >= 2
    }
}

fn milnor_is_zero_ratfunc(m: &MilnorElem) -> Result<bool, KmwError> {
    if m.degree == 0 {
        let total: BigInt = m.terms.values().sum();
        return Ok(total.is_zero());
    }
    // all tame residues at finite places vanish ...
    for v in milnor_support(m) {
        let res = milnor_residue(&v, m);
        if !milnor_is_zero(&res)? {
            return Ok(false);
        }
    }
    // ... and so does the specialization at t
    let ctx = m.field.ctx();
    let v0 = Place::finite(m.field, crate::fields::Poly::x(&ctx)).unwrap();
    let spec = milnor_specialize(&v0, m);
    milnor_is_zero(&spec)
}

fn milnor_support(m: &MilnorElem) -> Vec<Place> {
    let mut out: Vec<Place> = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for w in m.terms.keys() {
        for a in w {
            for v in place::support(a) {
                if matches!(v.kind, crate::fields::PlaceKind::Finite(_))
                    && seen.insert(v.clone())
                {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Tame residue and specialization computed together through the residue
/// ring K^M(kappa) + xi K^M(kappa), xi^2 = {-1} xi.
struct MilnorPair {
    s: MilnorElem,
    d: MilnorElem,
}

fn milnor_pair_mul(x: &MilnorPair, y: &MilnorPair) -> MilnorPair {
    let field = x.s.field;
    let ds = x.s.degree + y.s.degree;
    let mut s = MilnorElem::zero(field, ds);
    let mut d = MilnorElem::zero(field, ds - 1);
    let sign = |n: i64| if n.rem_euclid(2) == 0 { 1 } else { -1 };
    for (w1, c1) in &x.s.terms {
        for (w2, c2) in &y.s.terms {
            let mut w = w1.clone();
            w.extend(w2.iter().cloned());
            s.add_term(w, c1 * c2);
        }
        // (-1)^{|s_x|} s_x * d_y
        for (w2, c2) in &y.d.terms {
            let mut w = w1.clone();
            w.extend(w2.iter().cloned());
            d.add_term(w, c1 * c2 * sign(x.s.degree));
        }
    }
    for (w1, c1) in &x.d.terms {
        for (w2, c2) in &y.s.terms {
            let mut w = w1.clone();
            w.extend(w2.iter().cloned());
            d.add_term(w, c1 * c2);
        }
        // (-1)^{|d_x|} {-1} d_x d_y
        let minus_one = field.from_i64(-1);
        for (w2, c2) in &y.d.terms {
            let mut w = vec![minus_one.clone()];
            w.extend(w1.iter().cloned());
            w.extend(w2.iter().cloned());
            d.add_term(w, c1 * c2 * sign(x.d.degree));
        }
    }
    MilnorPair { s, d }
}

fn milnor_entry_pair(v: &Place, a: &FieldElem) -> MilnorPair {
    let kappa = v.residue_desc();
    let (m, u) = v.valuation_and_unit(a).expect("nonzero symbol entry");
    let ubar = FieldElem::fin(v.residue_field(), v.reduce(&u).expect("unit reduces"));
    let mut s = MilnorElem::zero(kappa, 1);
    if !ubar.is_one() {
        s.add_term(vec![ubar], BigInt::from(1));
    }
    let mut d = MilnorElem::zero(kappa, 0);
    if m != 0 {
        d.add_term(vec![], BigInt::from(m));
    }
    MilnorPair { s, d }
}

fn milnor_word_pair(v: &Place, w: &[FieldElem]) -> MilnorPair {
    let kappa = v.residue_desc();
    let mut acc = MilnorPair {
        s: {
            let mut s = MilnorElem::zero(kappa, 0);
            s.add_term(vec![], BigInt::from(1));
            s
        },
        d: MilnorElem::zero(kappa, -1),
    };
    for a in w {
        acc = milnor_pair_mul(&acc, &milnor_entry_pair(v, a));
    }
    acc
}

pub fn milnor_residue(v: &Place, m: &MilnorElem) -> MilnorElem {
    let kappa = v.residue_desc();
    let mut out = MilnorElem::zero(kappa, m.degree - 1);
    for (w, c) in &m.terms {
        let pair = milnor_word_pair(v, w);
        for (ww, cc) in pair.d.terms {
            out.add_term(ww, cc * c);
        }
    }
    out
}

pub fn milnor_specialize(v: &Place, m: &MilnorElem) -> MilnorElem {
    let kappa = v.residue_desc();
    let mut out = MilnorElem::zero(kappa, m.degree);
    for (w, c) in &m.terms {
        let pair = milnor_word_pair(v, w);
        for (ww, cc) in pair.s.terms {
            out.add_term(ww, cc * c);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Witt shadow
// ---------------------------------------------------------------------------

/// Formal integer combination of rank-one forms <u>.
#[derive(Clone, Debug)]
pub struct WittElem {
    pub field: FieldDesc,
    pub terms: Vec<(BigInt, FieldElem)>,
}

/// eta -> 1, [a] -> <a> - 1; a word eta^k [a_1..a_m] becomes
/// prod_i (<a_i> - 1) expanded into 2^m diagonal terms.
pub fn witt_shadow(x: &KmwElem) -> WittElem {
    let field = x.field;
    let mut terms: Vec<(BigInt, FieldElem)> = vec![];
    for (w, c) in x.terms() {
        let m = w.symbols.len();
        for mask in 0..(1u64 << m) {
            let mut prod = field.one();
            let mut ones = 0;
            for (i, a) in w.symbols.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod = prod.mul(a);
                    ones += 1;
                }
            }
            let sign = if (m - ones) % 2 == 0 { 1 } else { -1 };
            terms.push((c * BigInt::from(sign), prod));
        }
    }
    WittElem { field, terms }
}

pub fn witt_shadow_is_zero(x: &KmwElem) -> Result<bool, KmwError> {
    witt_is_zero(&witt_shadow(x))
}

pub fn witt_is_zero(w: &WittElem) -> Result<bool, KmwError> {
    match w.field {
        FieldDesc::Finite(_) => Ok(witt_is_zero_finite(w)),
        FieldDesc::RatFunc(..) => witt_is_zero_ratfunc(w),
    }
}

/// W(GF(q)) through the pair (rank mod 2, signed discriminant class): the
/// group law twists the discriminant by the class of -1 when both ranks are
/// odd.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
struct WittFq {
    dim: bool,
    disc: bool,
}

fn wittfq_add(q_neg1_nonsquare: bool, x: WittFq, y: WittFq) -> WittFq {
    WittFq {
        dim: x.dim ^ y.dim,
        disc: x.disc ^ y.disc ^ (q_neg1_nonsquare && x.dim && y.dim),
    }
}


fn witt_is_zero_finite(w: &WittElem) -> bool {
    let ctx = w.field.ctx();
    let nu = !ctx.is_square(&ctx.from_i64(-1));
    let mut acc = WittFq::default();
    for (c, u) in &w.terms {
        let ElemBody::Fin(e) = &u.body else { unreachable!() };
        let gen = WittFq { dim: true, disc: !ctx.is_square(e) };
        // the Witt group of a finite field has exponent dividing 4
        let n = c.mod_floor(&BigInt::from(4)).to_u64_digits().1.first().copied().unwrap_or(0);
        for _ in 0..n {
            acc = wittfq_add(nu, acc, gen);
        }
    }
    acc == WittFq::default()
}

fn witt_is_zero_ratfunc(w: &WittElem) -> Result<bool, KmwError> {
    // Milnor's exact sequence 0 -> W(F) -> W(F(t)) -> (+)_pi W(kappa) -> 0:
    // zero iff every second residue at a finite place vanishes and the first
    // residue at t vanishes.
    let field = w.field;
    let ctx = field.ctx();
    let mut places: Vec<Place> = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for (_, u) in &w.terms {
        for v in place::support(u) {
            if matches!(v.kind, crate::fields::PlaceKind::Finite(_)) && seen.insert(v.clone()) {
                places.push(v);
            }
        }
    }
    for v in &places {
        let mut res = WittElem { field: v.residue_desc(), terms: vec![] };
        for (c, u) in &w.terms {
            let (m, unit) = v.valuation_and_unit(u)?;
            if m.rem_euclid(2) == 1 {
                let ubar = FieldElem::fin(v.residue_field(), v.reduce(&unit)?);
                res.terms.push((c.clone(), ubar));
            }
        }
        if !witt_is_zero_finite(&res) {
            return Ok(false);
        }
    }
    // first residue at the place t
    let v0 = Place::finite(field, crate::fields::Poly::x(&ctx)).unwrap();
    let mut first = WittElem { field: v0.residue_desc(), terms: vec![] };
    for (c, u) in &w.terms {
        let (m, unit) = v0.valuation_and_unit(u)?;
        if m.rem_euclid(2) == 0 {
            let ubar = FieldElem::fin(v0.residue_field(), v0.reduce(&unit)?);
            first.terms.push((c.clone(), ubar));
        }
    }
    Ok(witt_is_zero_finite(&first))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmw::KmwElem;

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    fn gf5t() -> FieldDesc {
        FieldDesc::rational(5, 1)
    }

    #[test]
    fn symbol_of_one_is_zero() {
        let x = KmwElem::symbol(&gf5().one()).unwrap();
        assert!(x.is_zero().unwrap());
    }

    #[test]
    fn steinberg_over_gf7() {
        let f = FieldDesc::finite(7, 1);
        for a in 2..7 {
            let fa = f.from_i64(a);
            let fb = f.from_i64(1 - a);
            let x = KmwElem::symbol(&fa)
                .unwrap()
                .mul(&KmwElem::symbol(&fb).unwrap())
                .unwrap();
            assert!(x.is_zero().unwrap(), "[{a}][1-{a}] should vanish");
        }
    }

    #[test]
    fn eta_relation() {
        // eta (eta [-1] + 2) = 0
        let f = gf5();
        let inner = KmwElem::symbol(&f.from_i64(-1))
            .unwrap()
            .mul_eta()
            .add(&KmwElem::from_int(f, 2));
        let x = inner.mul(&KmwElem::eta(f)).unwrap();
        assert!(x.is_zero().unwrap());
    }

    #[test]
    fn product_relation_over_function_field() {
        // [ab] = [a] + [b] + eta[a][b] with a = t, b = t+1 over GF(5)(t)
        let f = gf5t();
        let t = f.gen_t();
        let a = t.clone();
        let b = t.add(&f.from_i64(1));
        let lhs = KmwElem::symbol(&a.mul(&b)).unwrap();
        let rhs = KmwElem::symbol(&a)
            .unwrap()
            .add(&KmwElem::symbol(&b).unwrap())
            .add(
                &KmwElem::symbol(&a)
                    .unwrap()
                    .mul(&KmwElem::symbol(&b).unwrap())
                    .unwrap()
                    .mul_eta(),
            );
        assert!(lhs.equal(&rhs).unwrap());
    }

    #[test]
    fn gw_units_multiply() {
        // <a><b> = <ab> for all units of GF(7)
        let f = FieldDesc::finite(7, 1);
        for a in 1..7i64 {
            for b in 1..7i64 {
                let ga = KmwElem::gw_unit(&f.from_i64(a)).unwrap();
                let gb = KmwElem::gw_unit(&f.from_i64(b)).unwrap();
                let gab = KmwElem::gw_unit(&f.from_i64(a * b)).unwrap();
                assert!(ga.mul(&gb).unwrap().equal(&gab).unwrap());
            }
        }
    }

    #[test]
    fn n_eps_identity() {
        // 2_eps = 1 + <-1> = 2 + eta[-1] = h
        let f = gf5();
        let lhs = KmwElem::n_eps(f, 2);
        let rhs = KmwElem::from_int(f, 2)
            .add(&KmwElem::symbol(&f.from_i64(-1)).unwrap().mul_eta());
        assert!(lhs.equal(&rhs).unwrap());
        assert!(lhs.equal(&KmwElem::hyperbolic(f)).unwrap());
    }

    #[test]
    fn eps_squares_to_one_and_fixes_eta() {
        let f = gf5();
        let eps = KmwElem::eps(f);
        assert!(eps.mul(&eps).unwrap().equal(&KmwElem::one(f)).unwrap());
        let lhs = eps.mul(&KmwElem::eta(f)).unwrap();
        assert!(lhs.equal(&KmwElem::eta(f)).unwrap());
    }

    #[test]
    fn distinct_elements_differ() {
        let f = gf5();
        let x = KmwElem::symbol(&f.from_i64(2)).unwrap();
        let y = KmwElem::symbol(&f.from_i64(3)).unwrap();
        assert!(!x.equal(&y).unwrap());
        // <2> != <1> over GF(5): 2 is not a square
        let g2 = KmwElem::gw_unit(&f.from_i64(2)).unwrap();
        assert!(!g2.equal(&KmwElem::one(f)).unwrap());
        // but <4> = <1>
        let g4 = KmwElem::gw_unit(&f.from_i64(4)).unwrap();
        assert!(g4.equal(&KmwElem::one(f)).unwrap());
    }

    #[test]
    fn function_field_units_detect_places() {
        let f = gf5t();
        let t = f.gen_t();
        // <t> != <1> over GF(5)(t): second residue at t is <1> != 0
        let gt = KmwElem::gw_unit(&t).unwrap();
        assert!(!gt.equal(&KmwElem::one(f)).unwrap());
        // <t^2> = <1>
        let gt2 = KmwElem::gw_unit(&t.mul(&t)).unwrap();
        assert!(gt2.equal(&KmwElem::one(f)).unwrap());
    }

    #[test]
    fn milnor_residue_matches_tame_symbol() {
        let f = gf5t();
        let ctx = f.ctx();
        let t = f.gen_t();
        let v = Place::finite(f, crate::fields::Poly::x(&ctx)).unwrap();
        // d{t, 2} = {2}
        let mut m = MilnorElem::zero(f, 2);
        m.terms.insert(vec![t.clone(), f.from_i64(2)], BigInt::from(1));
        let r = milnor_residue(&v, &m);
        let mut expect = MilnorElem::zero(v.residue_desc(), 1);
        expect
            .terms
            .insert(vec![v.residue_desc().from_i64(2)], BigInt::from(1));
        assert_eq!(r.terms, expect.terms);
        // d{2, 3} = 0
        let mut m2 = MilnorElem::zero(f, 2);
        m2.terms
            .insert(vec![f.from_i64(2), f.from_i64(3)], BigInt::from(1));
        assert!(milnor_residue(&v, &m2).terms.is_empty());
    }
}
