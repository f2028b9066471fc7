//! Places of GF(q)(t): one for each monic irreducible polynomial, plus the
//! place at infinity with uniformizer -1/t. Residue fields are realized
//! nominally as GF(q^d), identified through the canonical root of the
//! defining polynomial.

use super::finite::{Fq, FqEl};
use super::poly::Poly;
use super::ratfunc::RatEl;
use super::{canonical_root, FieldDesc, FieldElem, FieldError};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PlaceKind {
    /// monic irreducible polynomial, also the canonical uniformizer
    Finite(Poly),
    /// the place at infinity; canonical uniformizer -1/t
    Infinity,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Place {
    pub field: FieldDesc,
    pub kind: PlaceKind,
}

impl Place {
    pub fn finite(field: FieldDesc, pi: Poly) -> Result<Place, FieldError> {
        let FieldDesc::RatFunc(..) = field else {
            return Err(FieldError::WrongField("places live on GF(q)(t)".into()));
        };
        let ctx = field.ctx();
        if pi.degree().is_none() || pi.degree() == Some(0) {
            return Err(FieldError::ZeroInput);
        }
        if !pi.is_monic(&ctx) || !super::factor::is_irreducible(&ctx, &pi) {
            return Err(FieldError::Reducible);
        }
        Ok(Place { field, kind: PlaceKind::Finite(pi) })
    }

    pub fn infinity(field: FieldDesc) -> Place {
        assert!(matches!(field, FieldDesc::RatFunc(..)));
        Place { field, kind: PlaceKind::Infinity }
    }

    /// The rational point t = a, i.e. the place at the polynomial t - a.
    pub fn at_point(field: FieldDesc, a: &FqEl) -> Place {
        let ctx = field.ctx();
        let pi = Poly::from_coeffs(&ctx, vec![ctx.neg(a), ctx.one()]);
        Place { field, kind: PlaceKind::Finite(pi) }
    }

    pub fn degree(&self) -> u32 {
        match &self.kind {
            PlaceKind::Finite(pi) => pi.degree().unwrap() as u32,
            PlaceKind::Infinity => 1,
        }
    }

    pub fn residue_field(&self) -> Fq {
        let base = self.field.base();
        Fq::new(base.p, base.deg * self.degree())
    }

    pub fn residue_desc(&self) -> FieldDesc {
        FieldDesc::Finite(self.residue_field())
    }

    /// Canonical uniformizer as a field element: the polynomial itself, or
    /// -1/t at infinity.
    pub fn uniformizer(&self) -> FieldElem {
        let ctx = self.field.ctx();
        match &self.kind {
            PlaceKind::Finite(pi) => FieldElem::rat(self.field, RatEl::from_poly(&ctx, pi.clone())),
            PlaceKind::Infinity => {
                let minus_one = Poly::constant(ctx.neg(&ctx.one()));
                FieldElem::rat(self.field, RatEl::new(&ctx, minus_one, Poly::x(&ctx)))
            }
        }
    }

    /// Canonical root of the defining polynomial inside the nominal residue
    /// field (the image of t-bar for finite places).
    pub fn residue_root(&self) -> FqEl {
        let bctx = self.field.ctx();
        let rctx = self.residue_field().ctx();
        match &self.kind {
            PlaceKind::Finite(pi) => {
                canonical_root(&bctx, &rctx, pi).expect("irreducible polynomial has a root")
            }
            PlaceKind::Infinity => rctx.zero(),
        }
    }

    /// Valuation of a nonzero element.
    pub fn valuation(&self, a: &FieldElem) -> Result<i64, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        if a.field != self.field {
            return Err(FieldError::WrongField(self.field.to_string_desc()));
        }
        let ctx = self.field.ctx();
        let r = a.as_rat();
        Ok(match &self.kind {
            PlaceKind::Finite(pi) => {
                multiplicity(&ctx, &r.num, pi) - multiplicity(&ctx, &r.den, pi)
            }
            PlaceKind::Infinity => r.den.deg_i64() - r.num.deg_i64(),
        })
    }

    /// Split a = uniformizer^m * u with u a unit at the place.
    pub fn valuation_and_unit(&self, a: &FieldElem) -> Result<(i64, FieldElem), FieldError> {
        let m = self.valuation(a)?;
        let u = a.mul(&self.uniformizer().pow(-m));
        debug_assert_eq!(self.valuation(&u), Ok(0));
        Ok((m, u))
    }

    /// Image of a unit in the nominal residue field.
    pub fn reduce(&self, u: &FieldElem) -> Result<FqEl, FieldError> {
        if self.valuation(u)? != 0 {
            return Err(FieldError::NotAUnit);
        }
        let ctx = self.field.ctx();
        let r = u.as_rat();
        match &self.kind {
            PlaceKind::Finite(pi) => {
                let rctx = self.residue_field().ctx();
                let root = self.residue_root();
                let num = r.num.rem(&ctx, pi).eval_in(&ctx, &rctx, &root);
                let den = r.den.rem(&ctx, pi).eval_in(&ctx, &rctx, &root);
                Ok(rctx.div(&num, &den))
            }
            PlaceKind::Infinity => {
                // leading coefficient ratio (degrees agree for units)
                Ok(ctx.div(&r.num.leading(&ctx), &r.den.leading(&ctx)))
            }
        }
    }

    /// Reduction as a field element of the residue field.
    pub fn reduce_elem(&self, u: &FieldElem) -> Result<FieldElem, FieldError> {
        Ok(FieldElem::fin(self.residue_field(), self.reduce(u)?))
    }

    /// Image of the derivative of the canonical uniformizer: for a finite
    /// place pi this is pi'(t) mod pi; at infinity it is 1. This is the unit
    /// relating the frame dt to the normal-line frame.
    pub fn uniformizer_derivative(&self) -> FqEl {
        let ctx = self.field.ctx();
        match &self.kind {
            PlaceKind::Finite(pi) => {
                let dpi = pi.derivative(&ctx);
                let rctx = self.residue_field().ctx();
                let root = self.residue_root();
                dpi.eval_in(&ctx, &rctx, &root)
            }
            PlaceKind::Infinity => self.residue_field().ctx().one(),
        }
    }

    pub fn render(&self) -> String {
        match &self.kind {
            PlaceKind::Finite(pi) => {
                let ctx = self.field.ctx();
                pi.to_string_in(&ctx, &self.field.var().unwrap().to_string())
            }
            PlaceKind::Infinity => "inf".into(),
        }
    }
}

fn multiplicity(ctx: &super::FqCtx, f: &Poly, pi: &Poly) -> i64 {
    if f.is_zero() {
        return 0;
    }
    let mut m = 0;
    let mut g = f.clone();
    loop {
        let (q, r) = g.divrem(ctx, pi);
        if r.is_zero() {
            m += 1;
            g = q;
        } else {
            return m;
        }
    }
}

/// All places where the element is not a unit (support of its divisor),
/// including infinity when relevant.
pub fn support(a: &FieldElem) -> Vec<Place> {
    let ctx = a.field.ctx();
    let r = a.as_rat();
    let mut out = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for poly in [&r.num, &r.den] {
        if poly.is_constant() {
            continue;
        }
        for (pi, _) in super::factor::factor(&ctx, poly).factors {
            if seen.insert(pi.order_key(&ctx)) {
                out.push(Place { field: a.field, kind: PlaceKind::Finite(pi) });
            }
        }
    }
    let inf = Place::infinity(a.field);
    if inf.valuation(a) != Ok(0) {
        out.push(inf);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf5t() -> FieldDesc {
        FieldDesc::rational(5, 1)
    }

    #[test]
    fn valuation_at_t() {
        let f = gf5t();
        let ctx = f.ctx();
        let v = Place::finite(f, Poly::x(&ctx)).unwrap();
        // a = t^2/(t+1)
        let t = f.gen_t();
        let a = t.mul(&t).div(&t.add(&f.from_i64(1)));
        let (m, u) = v.valuation_and_unit(&a).unwrap();
        assert_eq!(m, 2);
        assert_eq!(u, f.one().div(&t.add(&f.from_i64(1))));
        assert_eq!(u.mul(&v.uniformizer().pow(m)), a);
    }

    #[test]
    fn valuation_at_infinity_is_degree_difference() {
        let f = gf5t();
        let v = Place::infinity(f);
        let t = f.gen_t();
        // f/g with deg f = 3, deg g = 1: valuation = 1 - 3 = -2
        let a = t.pow(3).add(&f.from_i64(1)).div(&t.add(&f.from_i64(2)));
        assert_eq!(v.valuation(&a), Ok(-2));
        // reassembly
        let (m, u) = v.valuation_and_unit(&a).unwrap();
        assert_eq!(u.mul(&v.uniformizer().pow(m)), a);
    }

    #[test]
    fn reduce_at_finite_place() {
        let f = gf5t();
        let ctx = f.ctx();
        let v = Place::finite(f, Poly::x(&ctx)).unwrap();
        let t = f.gen_t();
        let u = t.add(&f.from_i64(3));
        assert_eq!(v.reduce(&u).unwrap(), ctx.from_u64(3));
    }

    #[test]
    fn reduce_at_infinity() {
        let f = gf5t();
        let ctx = f.ctx();
        let v = Place::infinity(f);
        let t = f.gen_t();
        // (2t+1)/(t+4) -> 2
        let u = f.from_i64(2).mul(&t).add(&f.from_i64(1)).div(&t.add(&f.from_i64(4)));
        assert_eq!(v.reduce(&u).unwrap(), ctx.from_u64(2));
    }

    #[test]
    fn reduce_into_quadratic_residue_field() {
        let f = FieldDesc::rational(7, 1);
        let ctx = f.ctx();
        // t^2+t+1 over GF(7): check irreducible (discriminant 1-4=-3=4, sqrt(4)=2 exists!)
        // use t^2+1 instead: -1 is not a square mod 7
        let pi = Poly::from_coeffs(&ctx, vec![ctx.from_u64(1), ctx.zero(), ctx.from_u64(1)]);
        let v = Place::finite(f, pi.clone()).unwrap();
        assert_eq!(v.residue_field(), Fq::new(7, 2));
        let t = f.gen_t();
        let red = v.reduce(&t).unwrap();
        // the image of t satisfies pi
        let rctx = v.residue_field().ctx();
        assert!(pi.eval_in(&ctx, &rctx, &red).is_zero());
    }

    #[test]
    fn unit_reduction_is_multiplicative() {
        let f = gf5t();
        let ctx = f.ctx();
        let pi = Poly::from_coeffs(&ctx, vec![ctx.from_u64(2), ctx.from_u64(1)]); // t+2
        let v = Place::finite(f, pi).unwrap();
        let t = f.gen_t();
        let units = [
            t.add(&f.from_i64(1)),
            t.add(&f.from_i64(4)),
            t.mul(&t).add(&f.from_i64(2)),
            f.from_i64(3),
        ];
        for a in &units {
            for b in &units {
                let ab = a.mul(b);
                let ctx2 = v.residue_field().ctx();
                assert_eq!(
                    v.reduce(&ab).unwrap(),
                    ctx2.mul(&v.reduce(a).unwrap(), &v.reduce(b).unwrap())
                );
            }
        }
    }

    #[test]
    fn degree_formula() {
        // sum over places of deg(v) * v(a) = 0 for nonzero a
        let f = gf5t();
        let t = f.gen_t();
        let a = t
            .pow(3)
            .add(&f.from_i64(2))
            .div(&t.add(&f.from_i64(1)).mul(&t.add(&f.from_i64(1))));
        let mut total = 0i64;
        for v in support(&a) {
            total += v.degree() as i64 * v.valuation(&a).unwrap();
        }
        assert_eq!(total, 0);
    }

    #[test]
    fn uniformizer_has_valuation_one() {
        let f = gf5t();
        let ctx = f.ctx();
        for v in [
            Place::finite(f, Poly::x(&ctx)).unwrap(),
            Place::infinity(f),
        ] {
            assert_eq!(v.valuation(&v.uniformizer()), Ok(1));
        }
    }
}
