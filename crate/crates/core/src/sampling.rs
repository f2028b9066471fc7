//! Seeded random sampling of field elements, symbols and places, used by
//! the rule-verification suites. Everything is deterministic under a fixed
//! seed.

use crate::fields::{FieldDesc, FieldElem, Place, Poly};
use crate::kmw::KmwElem;
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Sampler {
    pub rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn nonzero_fq(&mut self, field: &FieldDesc) -> FieldElem {
        let ctx = field.ctx();
        loop {
            let code = self.rng.gen_range(1..ctx.size);
            let e = ctx.decode(code);
            if !e.is_zero() {
                return field.from_fq(e);
            }
        }
    }

    /// Nonzero polynomial of degree <= max_deg over the constant field.
    pub fn poly(&mut self, field: &FieldDesc, max_deg: usize) -> Poly {
        let ctx = field.ctx();
        loop {
            let deg = self.rng.gen_range(0..=max_deg);
            let mut coeffs = vec![];
            for _ in 0..=deg {
                coeffs.push(ctx.decode(self.rng.gen_range(0..ctx.size)));
            }
            let p = Poly::from_coeffs(&ctx, coeffs);
            if !p.is_zero() {
                return p;
            }
        }
    }

    /// Nonzero element: a unit of GF(q), or a small-degree rational function.
    pub fn unit(&mut self, field: &FieldDesc) -> FieldElem {
        match field {
            FieldDesc::Finite(_) => self.nonzero_fq(field),
            FieldDesc::RatFunc(..) => {
                let ctx = field.ctx();
                let num = self.poly(field, 2);
                let den = self.poly(field, 1);
                FieldElem::rat(
                    *field,
                    crate::fields::RatEl::new(&ctx, num, den),
                )
            }
        }
    }

    /// A word eta^k [a_1..a_n] with small k, n.
    pub fn word(&mut self, field: &FieldDesc, max_symbols: usize, max_eta: u32) -> KmwElem {
        let n = self.rng.gen_range(0..=max_symbols);
        let k = self.rng.gen_range(0..=max_eta);
        let mut x = KmwElem::one(*field);
        for _ in 0..k {
            x = x.mul_eta();
        }
        for _ in 0..n {
            let s = KmwElem::symbol(&self.unit(field)).unwrap();
            x = x.mul(&s).unwrap();
        }
        let c = self.rng.gen_range(-3i64..=3);
        x.scale(&BigInt::from(if c == 0 { 1 } else { c }))
    }

    /// Sum of up to `terms` words, all of the same degree.
    pub fn element(&mut self, field: &FieldDesc, degree: i64, terms: usize) -> KmwElem {
        let mut acc = KmwElem::zero(*field, degree);
        let n_terms = self.rng.gen_range(1..=terms.max(1));
        for _ in 0..n_terms {
            // choose symbols/eta so that n - k = degree
            let extra = self.rng.gen_range(0..=2u32);
            let (n, k) = if degree >= 0 {
                (degree as u32 + extra, extra)
            } else {
                (extra, extra + (-degree) as u32)
            };
            let mut x = KmwElem::one(*field);
            for _ in 0..k {
                x = x.mul_eta();
            }
            for _ in 0..n {
                x = x.mul(&KmwElem::symbol(&self.unit(field)).unwrap()).unwrap();
            }
            let c = self.rng.gen_range(-3i64..=3);
            acc = acc.add(&x.scale(&BigInt::from(if c == 0 { 1 } else { c })));
        }
        acc
    }

    /// A finite place of small degree, or infinity.
    pub fn place(&mut self, field: &FieldDesc, max_deg: usize, allow_infinity: bool) -> Place {
        if allow_infinity && self.rng.gen_range(0..4) == 0 {
            return Place::infinity(*field);
        }
        let ctx = field.ctx();
        let deg = self.rng.gen_range(1..=max_deg);
        let irreducibles = crate::fields::irreducibles_of_degree(&ctx, deg);
        let pi = irreducibles[self.rng.gen_range(0..irreducibles.len())].clone();
        Place::finite(*field, pi).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let f = FieldDesc::rational(5, 1);
        let mut s1 = Sampler::new(42);
        let mut s2 = Sampler::new(42);
        for _ in 0..10 {
            assert_eq!(s1.unit(&f), s2.unit(&f));
        }
    }

    #[test]
    fn elements_have_requested_degree() {
        let f = FieldDesc::finite(5, 1);
        let mut s = Sampler::new(7);
        for d in -2..=3i64 {
            let x = s.element(&f, d, 3);
            assert_eq!(x.degree, d);
        }
    }
}
