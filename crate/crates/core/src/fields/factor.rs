//! Factorization of univariate polynomials over finite fields: monic part,
//! squarefree decomposition, distinct-degree and Cantor-Zassenhaus
//! equal-degree splitting. Output order is canonical (degree, then
//! coefficient encoding), so results are reproducible.

use super::finite::{FqCtx, FqEl};
use super::poly::Poly;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

/// `unit * prod(factor^multiplicity) = input`, factors monic irreducible,
/// sorted by (degree, encoding).
#[derive(Clone, Debug)]
pub struct Factored {
    pub unit: FqEl,
    pub factors: Vec<(Poly, u32)>,
}

pub fn factor(ctx: &FqCtx, f: &Poly) -> Factored {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    let (unit, monic) = f.monic(ctx);
    let mut out: Vec<(Poly, u32)> = vec![];
    if monic.is_constant() {
        return Factored { unit, factors: out };
    }
    for (g, mult) in squarefree_decomposition(ctx, &monic) {
        for (d, prod) in distinct_degree(ctx, &g) {
            for irr in equal_degree(ctx, &prod, d) {
                out.push((irr, mult));
            }
        }
    }
    out.sort_by(|a, b| a.0.order_key(ctx).cmp(&b.0.order_key(ctx)));
    Factored { unit, factors: out }
}

pub fn is_irreducible(ctx: &FqCtx, f: &Poly) -> bool {
    match f.degree() {
        None | Some(0) => false,
        Some(1) => true,
        Some(_) => {
            let fs = factor(ctx, f);
            fs.factors.len() == 1 && fs.factors[0].1 == 1
        }
    }
}

/// Monic squarefree parts with multiplicities (Yun-style, handling p-th
/// powers in characteristic p).
fn squarefree_decomposition(ctx: &FqCtx, f: &Poly) -> Vec<(Poly, u32)> {
    let mut out: Vec<(Poly, u32)> = vec![];
    collect_squarefree(ctx, f, 1, &mut out);
    out
}

fn collect_squarefree(ctx: &FqCtx, f: &Poly, outer: u32, out: &mut Vec<(Poly, u32)>) {
    if f.is_constant() {
        return;
    }
    let df = f.derivative(ctx);
    if df.is_zero() {
        // f = g(x^p)
        let root = pth_root_poly(ctx, f);
        collect_squarefree(ctx, &root, outer * ctx.q.p as u32, out);
        return;
    }
    let mut w = f.gcd(ctx, &df);
    let mut rest = f.divrem(ctx, &w).0; // product of squarefree part
    let mut i = 1u32;
    while !rest.is_constant() {
        let next = rest.gcd(ctx, &w);
        let piece = rest.divrem(ctx, &next).0;
        if !piece.is_constant() {
            out.push((piece, outer * i));
        }
        rest = next;
        w = w.divrem(ctx, &rest).0;
        i += 1;
    }
    if !w.is_constant() {
        collect_squarefree(ctx, &w, outer, out);
    }
}

/// Inverse Frobenius on coefficients: f(x) = g(x^p) -> g.
fn pth_root_poly(ctx: &FqCtx, f: &Poly) -> Poly {
    let p = ctx.q.p as usize;
    let mut coeffs = vec![];
    let mut k = 0;
    while k < f.coeffs.len() {
        // c^(p^(deg-1)) is the p-th root in GF(p^deg)
        let c = &f.coeffs[k];
        let mut r = c.clone();
        for _ in 0..ctx.q.deg.saturating_sub(1) {
            r = ctx.frobenius(&r);
        }
        coeffs.push(r);
        k += p;
    }
    Poly::from_coeffs(ctx, coeffs)
}

/// Split a monic squarefree polynomial into (d, product of all its
/// irreducible factors of degree d).
fn distinct_degree(ctx: &FqCtx, f: &Poly) -> Vec<(usize, Poly)> {
    let mut out = vec![];
    let mut rest = f.clone();
    let x = Poly::x(ctx);
    let mut xq = x.clone();
    let mut d = 0usize;
    while rest.degree().unwrap_or(0) >= 1 {
        d += 1;
        if 2 * d > rest.degree().unwrap() {
            out.push((rest.degree().unwrap(), rest.clone()));
            break;
        }
        xq = xq.pow_mod(ctx, ctx.size, &rest);
        let g = xq.sub(ctx, &x).gcd(ctx, &rest);
        if !g.is_constant() {
            out.push((d, g.clone()));
            rest = rest.divrem(ctx, &g).0;
            xq = xq.rem(ctx, &rest);
        }
    }
    out
}

/// Cantor-Zassenhaus splitting of a product of degree-d irreducibles.
/// Randomness is drawn from a generator seeded by the input, so the
/// function is deterministic.
fn equal_degree(ctx: &FqCtx, f: &Poly, d: usize) -> Vec<Poly> {
    let deg = match f.degree() {
        None | Some(0) => return vec![],
        Some(n) => n,
    };
    if deg == d {
        return vec![f.clone()];
    }
    let mut seed = {
        let mut h = DefaultHasher::new();
        f.order_key(ctx).hash(&mut h);
        ctx.q.p.hash(&mut h);
        h.finish() | 1
    };
    // (q^d - 1)/2 as a u128 exponent
    let qd: u128 = (0..d).fold(1u128, |a, _| a * ctx.size as u128);
    let e = (qd - 1) / 2;
    loop {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let r = random_poly(ctx, deg - 1, seed);
        if r.is_constant() {
            continue;
        }
        let g0 = r.gcd(ctx, f);
        let split = if !g0.is_constant() && g0.degree() < f.degree() {
            g0
        } else {
            let re = pow_mod_u128(ctx, &r, e, f);
            let re1 = re.sub(ctx, &Poly::constant(ctx.one()));
            let g = re1.gcd(ctx, f);
            if g.is_constant() || g.degree() == f.degree() {
                continue;
            }
            g
        };
        let other = f.divrem(ctx, &split).0;
        let mut out = equal_degree(ctx, &split, d);
        out.extend(equal_degree(ctx, &other, d));
        return out;
    }
}

fn pow_mod_u128(ctx: &FqCtx, base: &Poly, mut e: u128, modulus: &Poly) -> Poly {
    let mut acc = Poly::constant(ctx.one());
    let mut b = base.rem(ctx, modulus);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(ctx, &b).rem(ctx, modulus);
        }
        b = b.mul(ctx, &b).rem(ctx, modulus);
        e >>= 1;
    }
    acc
}

fn random_poly(ctx: &FqCtx, max_deg: usize, seed: u64) -> Poly {
    let mut s = seed;
    let mut coeffs = vec![];
    for _ in 0..=max_deg {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        coeffs.push(ctx.decode((s >> 16) % ctx.size));
    }
    Poly::from_coeffs(ctx, coeffs)
}

/// Monic irreducible polynomials of the given degree, in canonical order.
pub fn irreducibles_of_degree(ctx: &FqCtx, d: usize) -> Vec<Poly> {
    let mut out = vec![];
    let total = (0..d).fold(1u64, |a, _| a.saturating_mul(ctx.size));
    for code in 0..total {
        let mut coeffs = vec![];
        let mut c = code;
        for _ in 0..d {
            coeffs.push(ctx.decode(c % ctx.size));
            c /= ctx.size;
        }
        coeffs.push(ctx.one());
        let f = Poly::from_coeffs(ctx, coeffs);
        if d == 1 || is_irreducible(ctx, &f) {
            out.push(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::finite::Fq;

    fn poly5(cs: &[u64]) -> (std::sync::Arc<FqCtx>, Poly) {
        let ctx = Fq::new(5, 1).ctx();
        let coeffs = cs.iter().map(|&c| ctx.from_u64(c)).collect();
        let p = Poly::from_coeffs(&ctx, coeffs);
        (ctx, p)
    }

    fn reassemble(ctx: &FqCtx, f: &Factored) -> Poly {
        let mut acc = Poly::constant(f.unit.clone());
        for (g, m) in &f.factors {
            for _ in 0..*m {
                acc = acc.mul(ctx, g);
            }
        }
        acc
    }

    #[test]
    fn factor_t_is_t() {
        let (ctx, t) = poly5(&[0, 1]);
        let f = factor(&ctx, &t);
        assert_eq!(f.unit, ctx.one());
        assert_eq!(f.factors, vec![(t, 1)]);
    }

    #[test]
    fn factor_t2_plus_1_over_gf5() {
        // t^2+1 = (t+2)(t+3) over GF(5)
        let (ctx, f) = poly5(&[1, 0, 1]);
        let fact = factor(&ctx, &f);
        assert_eq!(fact.unit, ctx.one());
        let (_, t2) = poly5(&[2, 1]);
        let (_, t3) = poly5(&[3, 1]);
        assert_eq!(fact.factors, vec![(t2, 1), (t3, 1)]);
    }

    #[test]
    fn factor_with_unit() {
        // 3t^2+3 = 3 (t+2)(t+3)
        let (ctx, f) = poly5(&[3, 0, 3]);
        let fact = factor(&ctx, &f);
        assert_eq!(fact.unit, ctx.from_u64(3));
        assert_eq!(fact.factors.len(), 2);
        assert_eq!(reassemble(&ctx, &fact), f);
    }

    #[test]
    fn factor_reassembles_random() {
        let ctx = Fq::new(3, 1).ctx();
        for code in 1..200u64 {
            let mut coeffs = vec![];
            let mut c = code;
            for _ in 0..5 {
                coeffs.push(ctx.decode(c % 3));
                c /= 3;
            }
            let f = Poly::from_coeffs(&ctx, coeffs);
            if f.is_zero() {
                continue;
            }
            let fact = factor(&ctx, &f);
            assert_eq!(reassemble(&ctx, &fact), f, "code {code}");
            for (g, _) in &fact.factors {
                assert!(g.is_monic(&ctx));
                assert!(is_irreducible(&ctx, g) || g.degree() == Some(1));
            }
        }
    }

    #[test]
    fn factor_over_extension_field() {
        let ctx = Fq::new(3, 2).ctx();
        // x^2 - g where g is the generator: irreducible iff g is a nonsquare
        let g = ctx.generator();
        let f = Poly::from_coeffs(&ctx, vec![ctx.neg(&g), ctx.zero(), ctx.one()]);
        let fact = factor(&ctx, &f);
        assert_eq!(fact.factors.len(), 1);
        assert_eq!(fact.factors[0].0.degree(), Some(2));
    }

    #[test]
    fn repeated_factors() {
        // (t+1)^2 (t+2) over GF(5)
        let (ctx, a) = poly5(&[1, 1]);
        let (_, b) = poly5(&[2, 1]);
        let f = a.mul(&ctx, &a).mul(&ctx, &b);
        let fact = factor(&ctx, &f);
        assert_eq!(fact.factors, vec![(a, 2), (b, 1)]);
    }

    #[test]
    fn pth_power_factorization() {
        // (t+1)^3 over GF(3): derivative vanishes
        let ctx = Fq::new(3, 1).ctx();
        let a = Poly::from_coeffs(&ctx, vec![ctx.from_u64(1), ctx.from_u64(1)]);
        let f = a.mul(&ctx, &a).mul(&ctx, &a);
        let fact = factor(&ctx, &f);
        assert_eq!(fact.factors, vec![(a, 3)]);
    }

    #[test]
    fn irreducible_enumeration() {
        let ctx = Fq::new(3, 1).ctx();
        assert_eq!(irreducibles_of_degree(&ctx, 1).len(), 3);
        // number of monic irreducible quadratics over GF(q): (q^2-q)/2 = 3
        assert_eq!(irreducibles_of_degree(&ctx, 2).len(), 3);
        // cubics: (q^3-q)/3 = 8
        assert_eq!(irreducibles_of_degree(&ctx, 3).len(), 8);
    }
}
