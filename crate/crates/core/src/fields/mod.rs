//! The decidable base-field tower: finite fields of odd order and rational
//! function fields over them, with places, residue fields and the
//! Kähler-differential rank bookkeeping used by the cycle machinery.

pub mod factor;
pub mod finite;
pub mod place;
pub mod poly;
pub mod ratfunc;

pub use factor::{factor, irreducibles_of_degree, Factored};
pub use finite::{Fq, FqCtx, FqEl};
pub use place::{Place, PlaceKind};
pub use poly::Poly;
pub use ratfunc::RatEl;

use std::sync::Arc;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("zero is not allowed here")]
    ZeroInput,
    #[error("element does not belong to {0}")]
    WrongField(String),
    #[error("not a unit at the place")]
    NotAUnit,
    #[error("polynomial is reducible")]
    Reducible,
    #[error("unsupported field extension")]
    UnsupportedExtension,
}

/// A field in the supported tower: GF(q) or GF(q)(var).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldDesc {
    Finite(Fq),
    RatFunc(Fq, char),
}

impl FieldDesc {
    pub fn finite(p: u64, deg: u32) -> FieldDesc {
        FieldDesc::Finite(Fq::new(p, deg))
    }

    pub fn rational(p: u64, deg: u32) -> FieldDesc {
        FieldDesc::RatFunc(Fq::new(p, deg), 't')
    }

    pub fn base(&self) -> Fq {
        match self {
            FieldDesc::Finite(q) | FieldDesc::RatFunc(q, _) => *q,
        }
    }

    pub fn ctx(&self) -> Arc<FqCtx> {
        self.base().ctx()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FieldDesc::Finite(_))
    }

    pub fn var(&self) -> Option<char> {
        match self {
            FieldDesc::Finite(_) => None,
            FieldDesc::RatFunc(_, v) => Some(*v),
        }
    }

    pub fn transcendence_degree(&self) -> u32 {
        match self {
            FieldDesc::Finite(_) => 0,
            FieldDesc::RatFunc(..) => 1,
        }
    }

    /// Rank of the space of Kähler differentials over the (perfect) base.
    pub fn omega_rank(&self) -> u32 {
        self.transcendence_degree()
    }

    pub fn zero(&self) -> FieldElem {
        match self {
            FieldDesc::Finite(q) => FieldElem::fin(*q, q.ctx().zero()),
            FieldDesc::RatFunc(..) => FieldElem::rat(*self, RatEl::zero(&self.ctx())),
        }
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, c: i64) -> FieldElem {
        let ctx = self.ctx();
        match self {
            FieldDesc::Finite(q) => FieldElem::fin(*q, ctx.from_i64(c)),
            FieldDesc::RatFunc(..) => {
                FieldElem::rat(*self, RatEl::from_const(&ctx, ctx.from_i64(c)))
            }
        }
    }

    pub fn from_fq(&self, e: FqEl) -> FieldElem {
        match self {
            FieldDesc::Finite(q) => FieldElem::fin(*q, e),
            FieldDesc::RatFunc(..) => {
                FieldElem::rat(*self, RatEl::from_const(&self.ctx(), e))
            }
        }
    }

    /// The variable as a field element (rational function fields only).
    pub fn gen_t(&self) -> FieldElem {
        match self {
            FieldDesc::RatFunc(..) => {
                FieldElem::rat(*self, RatEl::from_poly(&self.ctx(), Poly::x(&self.ctx())))
            }
            FieldDesc::Finite(_) => panic!("no variable in a finite field"),
        }
    }

    /// Canonical multiplicative generator of the constant field.
    pub fn constant_generator(&self) -> FieldElem {
        self.from_fq(self.ctx().generator())
    }

    pub fn to_string_desc(&self) -> String {
        match self {
            FieldDesc::Finite(q) => format!("GF({})", q.size()),
            FieldDesc::RatFunc(q, v) => format!("GF({})({})", q.size(), v),
        }
    }
}

impl std::fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_string_desc())
    }
}

impl std::fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_string_desc())
    }
}

/// An element of a tower field, carrying its field descriptor.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FieldElem {
    pub field: FieldDesc,
    pub body: ElemBody,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ElemBody {
    Fin(FqEl),
    Rat(RatEl),
}

impl FieldElem {
    pub fn fin(q: Fq, e: FqEl) -> FieldElem {
        FieldElem { field: FieldDesc::Finite(q), body: ElemBody::Fin(e) }
    }

    pub fn rat(field: FieldDesc, e: RatEl) -> FieldElem {
        assert!(matches!(field, FieldDesc::RatFunc(..)));
        FieldElem { field, body: ElemBody::Rat(e) }
    }

    pub fn is_zero(&self) -> bool {
        match &self.body {
            ElemBody::Fin(e) => e.is_zero(),
            ElemBody::Rat(e) => e.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.field.one()
    }

    fn ctx(&self) -> Arc<FqCtx> {
        self.field.ctx()
    }

    pub fn as_fq(&self) -> &FqEl {
        match &self.body {
            ElemBody::Fin(e) => e,
            _ => panic!("not a finite-field element"),
        }
    }

    pub fn as_rat(&self) -> &RatEl {
        match &self.body {
            ElemBody::Rat(e) => e,
            _ => panic!("not a rational function"),
        }
    }

    fn check(&self, other: &FieldElem) {
        assert_eq!(self.field, other.field, "field mismatch");
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        self.check(other);
        let ctx = self.ctx();
        match (&self.body, &other.body) {
            (ElemBody::Fin(a), ElemBody::Fin(b)) => {
                FieldElem { field: self.field, body: ElemBody::Fin(ctx.add(a, b)) }
            }
            (ElemBody::Rat(a), ElemBody::Rat(b)) => {
                FieldElem { field: self.field, body: ElemBody::Rat(a.add(&ctx, b)) }
            }
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElem {
        let ctx = self.ctx();
        match &self.body {
            ElemBody::Fin(a) => FieldElem { field: self.field, body: ElemBody::Fin(ctx.neg(a)) },
            ElemBody::Rat(a) => {
                FieldElem { field: self.field, body: ElemBody::Rat(a.neg(&ctx)) }
            }
        }
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        self.check(other);
        let ctx = self.ctx();
        match (&self.body, &other.body) {
            (ElemBody::Fin(a), ElemBody::Fin(b)) => {
                FieldElem { field: self.field, body: ElemBody::Fin(ctx.mul(a, b)) }
            }
            (ElemBody::Rat(a), ElemBody::Rat(b)) => {
                FieldElem { field: self.field, body: ElemBody::Rat(a.mul(&ctx, b)) }
            }
            _ => unreachable!(),
        }
    }

    pub fn inv(&self) -> FieldElem {
        let ctx = self.ctx();
        match &self.body {
            ElemBody::Fin(a) => FieldElem { field: self.field, body: ElemBody::Fin(ctx.inv(a)) },
            ElemBody::Rat(a) => {
                FieldElem { field: self.field, body: ElemBody::Rat(a.inv(&ctx)) }
            }
        }
    }

    pub fn div(&self, other: &FieldElem) -> FieldElem {
        self.mul(&other.inv())
    }

    pub fn pow(&self, e: i64) -> FieldElem {
        if e == 0 {
            return self.field.one();
        }
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = self.field.one();
        let mut n = e.unsigned_abs();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            n >>= 1;
        }
        acc
    }

    /// Restriction of scalars along a tower morphism; supports the canonical
    /// embeddings GF -> GF', GF -> GF'(t) and GF(q)(t) -> GF(q^d)(t).
    pub fn map_into(&self, target: &FieldDesc) -> Result<FieldElem, FieldError> {
        if self.field == *target {
            return Ok(self.clone());
        }
        let sctx = self.ctx();
        let tctx = target.ctx();
        match (&self.body, target) {
            (ElemBody::Fin(a), FieldDesc::Finite(tq)) => {
                if !self.field.base().subfield_of(tq) {
                    return Err(FieldError::UnsupportedExtension);
                }
                Ok(FieldElem::fin(*tq, tctx.embed_from(&sctx, a)))
            }
            (ElemBody::Fin(a), FieldDesc::RatFunc(tq, _)) => {
                if !self.field.base().subfield_of(tq) {
                    return Err(FieldError::UnsupportedExtension);
                }
                let e = tctx.embed_from(&sctx, a);
                Ok(FieldElem::rat(*target, RatEl::from_const(&tctx, e)))
            }
            (ElemBody::Rat(a), FieldDesc::RatFunc(tq, _)) => {
                if !self.field.base().subfield_of(tq) {
                    return Err(FieldError::UnsupportedExtension);
                }
                Ok(FieldElem::rat(*target, rat_embed(&sctx, &tctx, a)))
            }
            _ => Err(FieldError::UnsupportedExtension),
        }
    }

    /// Inverse of `map_into` for elements lying in the image of the smaller
    /// field (projection along the canonical embedding).
    pub fn project_into(&self, target: &FieldDesc) -> Result<FieldElem, FieldError> {
        if self.field == *target {
            return Ok(self.clone());
        }
        let sctx = self.ctx();
        let tctx = target.ctx();
        match (&self.body, target) {
            (ElemBody::Fin(a), FieldDesc::Finite(tq)) => {
                if !tq.subfield_of(&self.field.base()) {
                    return Err(FieldError::UnsupportedExtension);
                }
                let e = sctx
                    .project_to(&tctx, a)
                    .ok_or(FieldError::UnsupportedExtension)?;
                Ok(FieldElem::fin(*tq, e))
            }
            (ElemBody::Rat(a), FieldDesc::RatFunc(tq, _)) => {
                if !tq.subfield_of(&self.field.base()) {
                    return Err(FieldError::UnsupportedExtension);
                }
                let project = |p: &Poly| -> Result<Poly, FieldError> {
                    let coeffs = p
                        .coeffs
                        .iter()
                        .map(|c| {
                            sctx.project_to(&tctx, c).ok_or(FieldError::UnsupportedExtension)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Poly::from_coeffs(&tctx, coeffs))
                };
                Ok(FieldElem::rat(
                    *target,
                    RatEl { num: project(&a.num)?, den: project(&a.den)? },
                ))
            }
            _ => Err(FieldError::UnsupportedExtension),
        }
    }

    /// Substitute the variable of a rational function field (an endomorphism
    /// of the field, e.g. t -> t^e for ramification samplers).
    pub fn substitute(&self, image_of_t: &FieldElem) -> FieldElem {
        match &self.body {
            ElemBody::Fin(_) => self.clone(),
            ElemBody::Rat(a) => {
                let ctx = self.ctx();
                assert_eq!(self.field, image_of_t.field);
                FieldElem::rat(self.field, a.compose(&ctx, image_of_t.as_rat()))
            }
        }
    }

    pub fn render(&self) -> String {
        let ctx = self.ctx();
        match &self.body {
            ElemBody::Fin(e) => poly::fqel_to_string(&ctx, e),
            ElemBody::Rat(e) => {
                e.to_string_in(&ctx, &self.field.var().unwrap().to_string())
            }
        }
    }
}

fn rat_embed(sctx: &FqCtx, tctx: &FqCtx, a: &RatEl) -> RatEl {
    if sctx.q == tctx.q {
        return a.clone();
    }
    a.embed(sctx, tctx)
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Handle for a monogeneous finite extension E(x)/E defined by an
/// irreducible polynomial, realized inside the nominal field GF(q^d).
pub struct FiniteExtension {
    pub base: Fq,
    pub top: Fq,
    pub defining: Poly,
    /// canonical root of `defining` in the top field
    pub root: FqEl,
}

impl FiniteExtension {
    pub fn new(base: Fq, defining: Poly) -> Result<FiniteExtension, FieldError> {
        let ctx = base.ctx();
        let d = defining.degree().ok_or(FieldError::ZeroInput)? as u32;
        if d == 0 || !factor::is_irreducible(&ctx, &defining) && d > 1 {
            return Err(FieldError::Reducible);
        }
        let top = Fq::new(base.p, base.deg * d);
        let root = canonical_root(&ctx, &top.ctx(), &defining)
            .ok_or(FieldError::Reducible)?;
        Ok(FiniteExtension { base, top, defining, root })
    }

    pub fn degree(&self) -> u32 {
        self.top.deg / self.base.deg
    }

    /// All conjugates of the canonical root, canonical one first.
    pub fn conjugates(&self) -> Vec<FqEl> {
        let tctx = self.top.ctx();
        let mut out = vec![self.root.clone()];
        let mut z = self.root.clone();
        for _ in 1..self.degree() {
            z = tctx.pow(&z, self.base.size());
            out.push(z.clone());
        }
        out
    }

    /// Evaluate a polynomial over the base field at the canonical root.
    pub fn push(&self, rep: &Poly) -> FqEl {
        rep.eval_in(&self.base.ctx(), &self.top.ctx(), &self.root)
    }

    /// Inverse of `push`: the unique representative of degree < [top:base].
    pub fn pull(&self, z: &FqEl) -> Poly {
        let bctx = self.base.ctx();
        let tctx = self.top.ctx();
        let p = self.base.p;
        let e = self.base.deg as usize;
        let d = self.degree() as usize;
        let n = e * d;
        // basis emb(x_base^i) * root^j over GF(p)
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        let gb = bctx.generator();
        let mut base_pows = vec![bctx.one()];
        for _ in 1..e {
            base_pows.push(bctx.mul(base_pows.last().unwrap(), &gb));
        }
        let mut root_pow = tctx.one();
        for _j in 0..d {
            for b in &base_pows {
                let v = tctx.mul(&tctx.embed_from(&bctx, b), &root_pow);
                cols.push(v.0.clone());
            }
            root_pow = tctx.mul(&root_pow, &self.root);
        }
        let sol = solve_modp(p, n, &cols, &z.0).expect("basis spans the top field");
        // reassemble coefficients of t^j in the base field
        let mut coeffs = vec![];
        for j in 0..d {
            let mut c = bctx.zero();
            for (i, b) in base_pows.iter().enumerate() {
                let s = sol[j * e + i];
                if s != 0 {
                    c = bctx.add(&c, &bctx.mul(&bctx.from_u64(s), b));
                }
            }
            coeffs.push(c);
        }
        Poly::from_coeffs(&bctx, coeffs)
    }

    pub fn norm(&self, z: &FqEl) -> FqEl {
        self.top.ctx().norm_to(&self.base.ctx(), z)
    }

    pub fn trace(&self, z: &FqEl) -> FqEl {
        self.top.ctx().trace_to(&self.base.ctx(), z)
    }
}

/// Smallest root (by encoding) of an irreducible base-field polynomial in
/// the extension of matching degree.
pub fn canonical_root(bctx: &FqCtx, tctx: &FqCtx, f: &Poly) -> Option<FqEl> {
    let mut best: Option<(u64, FqEl)> = None;
    // roots are found by scanning; fields in scope are small
    for z in tctx.elements() {
        if f.eval_in(bctx, tctx, &z).is_zero() {
            let code = tctx.encode(&z);
            if best.as_ref().map(|(c, _)| code < *c).unwrap_or(true) {
                best = Some((code, z));
            }
        }
    }
    best.map(|(_, z)| z)
}

/// Solve sum_i x_i * cols[i] = target over GF(p).
fn solve_modp(p: u64, n: usize, cols: &[Vec<u64>], target: &[u64]) -> Option<Vec<u64>> {
    let m = cols.len();
    // augmented matrix, n rows, m+1 cols
    let mut a = vec![vec![0u64; m + 1]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            a[i][j] = col[i] % p;
        }
    }
    for i in 0..n {
        a[i][m] = target[i] % p;
    }
    let mut pivots = vec![];
    let mut row = 0;
    for col in 0..m {
        let Some(pr) = (row..n).find(|&r| a[r][col] != 0) else { continue };
        a.swap(row, pr);
        let inv = mod_pow(a[row][col], p - 2, p);
        for x in a[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..n {
            if r != row && a[r][col] != 0 {
                let f = a[r][col];
                for cc in 0..=m {
                    a[r][cc] = (a[r][cc] + (p - f % p) * a[row][cc]) % p;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == n {
            break;
        }
    }
    for r in row..n {
        if a[r][m] != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; m];
    for (r, c) in pivots {
        x[c] = a[r][m];
    }
    Some(x)
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_elem_ops_in_tower() {
        let f = FieldDesc::rational(5, 1);
        let t = f.gen_t();
        let one = f.one();
        let a = t.add(&one); // t+1
        assert_eq!(a.mul(&a.inv()), one);
        assert!(a.sub(&a).is_zero());
        let sq = a.pow(2);
        assert_eq!(sq, a.mul(&a));
        assert_eq!(a.pow(-1), a.inv());
    }

    #[test]
    fn map_into_function_field() {
        let e = FieldDesc::finite(5, 1);
        let f = FieldDesc::rational(5, 1);
        let two = e.from_i64(2);
        let img = two.map_into(&f).unwrap();
        assert_eq!(img, f.from_i64(2));
        // constant-field extension of rational functions
        let big = FieldDesc::rational(5, 2);
        let t = f.gen_t();
        let x = t.add(&f.from_i64(3));
        let y = x.map_into(&big).unwrap();
        assert_eq!(y, big.gen_t().add(&big.from_i64(3)));
    }

    #[test]
    fn substitution_endomorphism() {
        let f = FieldDesc::rational(5, 1);
        let t = f.gen_t();
        let a = t.add(&f.from_i64(1)); // t+1
        let t2 = t.mul(&t);
        let sub = a.substitute(&t2);
        assert_eq!(sub, t2.add(&f.from_i64(1)));
    }

    #[test]
    fn finite_extension_push_pull() {
        let base = Fq::new(5, 1);
        let ctx = base.ctx();
        // t^2+2 is irreducible over GF(5) (squares are 0,1,4)
        let f = Poly::from_coeffs(&ctx, vec![ctx.from_u64(2), ctx.zero(), ctx.from_u64(1)]);
        let ext = FiniteExtension::new(base, f.clone()).unwrap();
        assert_eq!(ext.degree(), 2);
        // the root satisfies the defining polynomial
        let tctx = ext.top.ctx();
        assert!(f.eval_in(&ctx, &tctx, &ext.root).is_zero());
        // pull inverts push on all elements
        for z in tctx.elements() {
            let rep = ext.pull(&z);
            assert!(rep.degree().unwrap_or(0) < 2);
            assert_eq!(ext.push(&rep), z);
        }
        // norm is the product of conjugates
        let g = tctx.generator();
        let conj = ext.conjugates();
        let mut prod = tctx.one();
        for c in &conj {
            let _ = c;
        }
        let mut z = g.clone();
        for _ in 0..ext.degree() {
            prod = tctx.mul(&prod, &z);
            z = tctx.pow(&z, base.size());
        }
        assert_eq!(tctx.project_to(&ctx, &prod).unwrap(), ext.norm(&g));
    }

    #[test]
    fn rejects_reducible_extension() {
        let base = Fq::new(5, 1);
        let ctx = base.ctx();
        // t^2+4 = (t+1)(t+4)
        let f = Poly::from_coeffs(&ctx, vec![ctx.from_u64(4), ctx.zero(), ctx.from_u64(1)]);
        assert!(FiniteExtension::new(base, f).is_err());
    }
}
