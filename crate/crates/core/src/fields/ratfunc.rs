//! Rational functions over a finite field: reduced fractions of polynomials
//! with monic denominator, so equality is syntactic.

use super::finite::{FqCtx, FqEl};
use super::poly::Poly;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RatEl {
    pub num: Poly,
    pub den: Poly,
}

impl RatEl {
    pub fn new(ctx: &FqCtx, num: Poly, den: Poly) -> RatEl {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatEl { num: Poly::zero(), den: Poly::constant(ctx.one()) };
        }
        let g = num.gcd(ctx, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.divrem(ctx, &g).0, den.divrem(ctx, &g).0)
        };
        let (lc, den) = den.monic(ctx);
        let num = num.scale(ctx, &ctx.inv(&lc));
        RatEl { num, den }
    }

    pub fn from_poly(ctx: &FqCtx, p: Poly) -> RatEl {
        RatEl { num: p, den: Poly::constant(ctx.one()) }
    }

    pub fn from_const(ctx: &FqCtx, c: FqEl) -> RatEl {
        RatEl::from_poly(ctx, Poly::constant(c))
    }

    pub fn zero(ctx: &FqCtx) -> RatEl {
        RatEl::from_poly(ctx, Poly::zero())
    }

    pub fn one(ctx: &FqCtx) -> RatEl {
        RatEl::from_poly(ctx, Poly::constant(ctx.one()))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn add(&self, ctx: &FqCtx, other: &RatEl) -> RatEl {
        let num = self
            .num
            .mul(ctx, &other.den)
            .add(ctx, &other.num.mul(ctx, &self.den));
        RatEl::new(ctx, num, self.den.mul(ctx, &other.den))
    }

    pub fn sub(&self, ctx: &FqCtx, other: &RatEl) -> RatEl {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn neg(&self, ctx: &FqCtx) -> RatEl {
        RatEl { num: self.num.neg(ctx), den: self.den.clone() }
    }

    pub fn mul(&self, ctx: &FqCtx, other: &RatEl) -> RatEl {
        RatEl::new(ctx, self.num.mul(ctx, &other.num), self.den.mul(ctx, &other.den))
    }

    pub fn inv(&self, ctx: &FqCtx) -> RatEl {
        assert!(!self.is_zero(), "inverse of zero");
        RatEl::new(ctx, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, ctx: &FqCtx, other: &RatEl) -> RatEl {
        self.mul(ctx, &other.inv(ctx))
    }

    pub fn pow(&self, ctx: &FqCtx, e: i64) -> RatEl {
        if e == 0 {
            return RatEl::one(ctx);
        }
        let base = if e < 0 { self.inv(ctx) } else { self.clone() };
        let mut acc = RatEl::one(ctx);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(ctx, &base);
        }
        acc
    }

    /// Substitute the variable by another rational function.
    pub fn compose(&self, ctx: &FqCtx, g: &RatEl) -> RatEl {
        let eval_poly = |p: &Poly| -> RatEl {
            let mut acc = RatEl::zero(ctx);
            for c in p.coeffs.iter().rev() {
                acc = acc.mul(ctx, g).add(ctx, &RatEl::from_const(ctx, c.clone()));
            }
            acc
        };
        eval_poly(&self.num).div(ctx, &eval_poly(&self.den))
    }

    /// Coefficientwise embedding into a constant extension.
    pub fn embed(&self, ctx: &FqCtx, big: &FqCtx) -> RatEl {
        RatEl { num: self.num.embed(ctx, big), den: self.den.embed(ctx, big) }
    }

    pub fn to_string_in(&self, ctx: &FqCtx, var: &str) -> String {
        if self.den == Poly::constant(ctx.one()) {
            let s = self.num.to_string_in(ctx, var);
            if self.num.coeffs.iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({s})")
            } else {
                s
            }
        } else {
            format!(
                "({})/({})",
                self.num.to_string_in(ctx, var),
                self.den.to_string_in(ctx, var)
            )
        }
    }
}
