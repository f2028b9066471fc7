//! Dense univariate polynomials over a finite field, always used together
//! with the `FqCtx` of their coefficient field.

use super::finite::{FqCtx, FqEl};

/// Coefficients little-endian, no trailing zeros; empty vector is the zero
/// polynomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Poly {
    pub coeffs: Vec<FqEl>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn from_coeffs(ctx: &FqCtx, mut coeffs: Vec<FqEl>) -> Poly {
        let _ = ctx;
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: FqEl) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { coeffs: vec![c] }
        }
    }

    /// The monomial x.
    pub fn x(ctx: &FqCtx) -> Poly {
        Poly { coeffs: vec![ctx.zero(), ctx.one()] }
    }

    pub fn monomial(ctx: &FqCtx, c: FqEl, k: usize) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ctx.zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg_i64(&self) -> i64 {
        self.degree().map(|d| d as i64).unwrap_or(i64::MIN / 2)
    }

    pub fn leading(&self, ctx: &FqCtx) -> FqEl {
        self.coeffs.last().cloned().unwrap_or_else(|| ctx.zero())
    }

    pub fn coeff(&self, ctx: &FqCtx, k: usize) -> FqEl {
        self.coeffs.get(k).cloned().unwrap_or_else(|| ctx.zero())
    }

    pub fn is_monic(&self, ctx: &FqCtx) -> bool {
        self.leading(ctx) == ctx.one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(ctx.add(&self.coeff(ctx, i), &other.coeff(ctx, i)));
        }
        Poly::from_coeffs(ctx, coeffs)
    }

    pub fn sub(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(ctx.sub(&self.coeff(ctx, i), &other.coeff(ctx, i)));
        }
        Poly::from_coeffs(ctx, coeffs)
    }

    pub fn neg(&self, ctx: &FqCtx) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| ctx.neg(c)).collect() }
    }

    pub fn mul(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ctx.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = ctx.add(&coeffs[i + j], &ctx.mul(a, b));
            }
        }
        Poly::from_coeffs(ctx, coeffs)
    }

    pub fn scale(&self, ctx: &FqCtx, c: &FqEl) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|a| ctx.mul(a, c)).collect() }
    }

    pub fn divrem(&self, ctx: &FqCtx, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lc_inv = ctx.inv(&divisor.leading(ctx));
        let mut rem = self.clone();
        let mut quot = vec![
            ctx.zero();
            self.coeffs.len().saturating_sub(divisor.coeffs.len()) + 1
        ];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = ctx.mul(&rem.leading(ctx), &lc_inv);
            let k = rd - dd;
            quot[k] = ctx.add(&quot[k], &c);
            let shifted = Poly::monomial(ctx, c, k).mul(ctx, divisor);
            rem = rem.sub(ctx, &shifted);
        }
        (Poly::from_coeffs(ctx, quot), rem)
    }

    pub fn rem(&self, ctx: &FqCtx, divisor: &Poly) -> Poly {
        self.divrem(ctx, divisor).1
    }

    pub fn gcd(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(ctx, &b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic(ctx).1
        }
    }

    /// Splits into (leading unit, monic part).
    pub fn monic(&self, ctx: &FqCtx) -> (FqEl, Poly) {
        if self.is_zero() {
            return (ctx.one(), Poly::zero());
        }
        let lc = self.leading(ctx);
        (lc.clone(), self.scale(ctx, &ctx.inv(&lc)))
    }

    pub fn eval(&self, ctx: &FqCtx, at: &FqEl) -> FqEl {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, at), c);
        }
        acc
    }

    /// Evaluate in an extension field, embedding the coefficients.
    pub fn eval_in(&self, ctx: &FqCtx, big: &FqCtx, at: &FqEl) -> FqEl {
        let mut acc = big.zero();
        for c in self.coeffs.iter().rev() {
            acc = big.add(&big.mul(&acc, at), &big.embed_from(ctx, c));
        }
        acc
    }

    pub fn derivative(&self, ctx: &FqCtx) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs: Vec<FqEl> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let k = ctx.from_u64((i as u64) % ctx.q.p);
                ctx.mul(&k, c)
            })
            .collect();
        Poly::from_coeffs(ctx, coeffs)
    }

    pub fn pow_mod(&self, ctx: &FqCtx, e: u64, modulus: &Poly) -> Poly {
        let mut acc = Poly::constant(ctx.one());
        let mut base = self.rem(ctx, modulus);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(ctx, &base).rem(ctx, modulus);
            }
            base = base.mul(ctx, &base).rem(ctx, modulus);
            e >>= 1;
        }
        acc
    }

    /// Substitute x -> g(x).
    pub fn compose(&self, ctx: &FqCtx, g: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(ctx, g).add(ctx, &Poly::constant(c.clone()));
        }
        acc
    }

    /// Map coefficients into an extension field.
    pub fn embed(&self, ctx: &FqCtx, big: &FqCtx) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| big.embed_from(ctx, c)).collect() }
    }

    /// Deterministic total ordering key (degree, then encoded coefficients).
    pub fn order_key(&self, ctx: &FqCtx) -> (usize, Vec<u64>) {
        (self.coeffs.len(), self.coeffs.iter().map(|c| ctx.encode(c)).collect())
    }

    pub fn to_string_in(&self, ctx: &FqCtx, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = fqel_to_string(ctx, c);
            let part = match i {
                0 => cs,
                1 if cs == "1" => var.to_string(),
                1 => format!("{cs}*{var}"),
                _ if cs == "1" => format!("{var}^{i}"),
                _ => format!("{cs}*{var}^{i}"),
            };
            parts.push(part);
        }
        parts.join("+")
    }
}

pub fn fqel_to_string(ctx: &FqCtx, c: &FqEl) -> String {
    if ctx.q.deg == 1 {
        format!("{}", c.0[0])
    } else {
        // polynomial in the canonical generator, printed as a#code
        format!("a{}#{}", ctx.q.size(), ctx.encode(c))
    }
}
