//! The Milnor-Witt K-theory algebra of a tower field: integer combinations
//! of generator words eta^k [a_1,...,a_n], graded multiplication, the four
//! defining relations, and a sound equality oracle through the Milnor and
//! Witt shadows.
//!
//! No normal form is exposed; `equal` is the API. Soundness of the shadow
//! pair rests on the fiber square K^MW_n = K^M_n x_{I^n/I^{n+1}} I^n, which
//! holds over every field in the supported tower.

pub mod gw;
pub mod residue;
pub mod shadows;
pub mod twisted;

pub use gw::{gw_classify, GwClass};
pub use residue::{residue_pair, ResiduePair};
pub use twisted::KmwTwisted;

use crate::fields::{FieldDesc, FieldElem};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum KmwError {
    #[error("symbol entries must be nonzero")]
    ZeroSymbol,
    #[error("elements live over different fields")]
    FieldMismatch,
    #[error("elements have different degrees")]
    DegreeMismatch,
    #[error("operation needs degree {expected}, got {found}")]
    WrongDegree { expected: i64, found: i64 },
    #[error("equality is not decidable over {0}")]
    Undecidable(String),
    #[error("twist mismatch")]
    TwistMismatch,
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
}

/// A generator word eta^eta_pow [symbols...]. Degree = symbols - eta_pow.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Word {
    pub eta_pow: u32,
    pub symbols: Vec<FieldElem>,
}

impl Word {
    pub fn degree(&self) -> i64 {
        self.symbols.len() as i64 - self.eta_pow as i64
    }
}

/// Element of k^MW_degree(field): a finite integer combination of words of
/// the same degree. The zero element still remembers its degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KmwElem {
    pub field: FieldDesc,
    pub degree: i64,
    terms: BTreeMap<Word, BigInt>,
}

impl KmwElem {
    pub fn zero(field: FieldDesc, degree: i64) -> KmwElem {
        KmwElem { field, degree, terms: BTreeMap::new() }
    }

    pub fn one(field: FieldDesc) -> KmwElem {
        KmwElem::from_int(field, 1)
    }

    pub fn from_int(field: FieldDesc, n: i64) -> KmwElem {
        let mut terms = BTreeMap::new();
        if n != 0 {
            terms.insert(Word { eta_pow: 0, symbols: vec![] }, BigInt::from(n));
        }
        KmwElem { field, degree: 0, terms }
    }

    /// The generator [a], degree 1.
    pub fn symbol(a: &FieldElem) -> Result<KmwElem, KmwError> {
        if a.is_zero() {
            return Err(KmwError::ZeroSymbol);
        }
        Ok(KmwElem::word(a.field, 0, vec![a.clone()], BigInt::one()))
    }

    /// The word [a_1,...,a_n].
    pub fn symbols(field: FieldDesc, entries: &[FieldElem]) -> Result<KmwElem, KmwError> {
        if entries.iter().any(|a| a.is_zero()) {
            return Err(KmwError::ZeroSymbol);
        }
        Ok(KmwElem::word(field, 0, entries.to_vec(), BigInt::one()))
    }

    pub fn eta(field: FieldDesc) -> KmwElem {
        KmwElem::word(field, 1, vec![], BigInt::one())
    }

    pub(crate) fn word(
        field: FieldDesc,
        eta_pow: u32,
        symbols: Vec<FieldElem>,
        coeff: BigInt,
    ) -> KmwElem {
        let w = Word { eta_pow, symbols };
        let degree = w.degree();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(w, coeff);
        }
        KmwElem { field, degree, terms }
    }

    /// The form <a> = 1 + eta [a], degree 0.
    pub fn gw_unit(a: &FieldElem) -> Result<KmwElem, KmwError> {
        if a.is_zero() {
            return Err(KmwError::ZeroSymbol);
        }
        let mut x = KmwElem::one(a.field);
        x.add_term(Word { eta_pow: 1, symbols: vec![a.clone()] }, BigInt::one());
        Ok(x)
    }

    /// eps = -<-1>.
    pub fn eps(field: FieldDesc) -> KmwElem {
        KmwElem::gw_unit(&field.from_i64(-1)).unwrap().negate()
    }

    /// eps^n, reduced by eps^2 = 1.
    pub fn eps_pow(field: FieldDesc, n: i64) -> KmwElem {
        if n.rem_euclid(2) == 0 {
            KmwElem::one(field)
        } else {
            KmwElem::eps(field)
        }
    }

    /// The hyperbolic form h = 1 + <-1> = 2 + eta[-1].
    pub fn hyperbolic(field: FieldDesc) -> KmwElem {
        KmwElem::one(field).add(&KmwElem::gw_unit(&field.from_i64(-1)).unwrap())
    }

    /// n_eps = sum_{i=1..n} <(-1)^{i-1}> for n >= 0, and eps*(-n)_eps below.
    pub fn n_eps(field: FieldDesc, n: i64) -> KmwElem {
        if n < 0 {
            return KmwElem::eps(field).mul(&KmwElem::n_eps(field, -n)).unwrap();
        }
        let mut acc = KmwElem::zero(field, 0);
        for i in 1..=n {
            let sign = if (i - 1) % 2 == 0 { 1 } else { -1 };
            acc = acc.add(&KmwElem::gw_unit(&field.from_i64(sign)).unwrap());
        }
        acc
    }

    pub fn is_syntactically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, w: Word, c: BigInt) {
        debug_assert_eq!(w.degree(), self.degree, "mixed degrees in one element");
        let (w, c) = match reduce_word(self.field, w, c) {
            Some(t) => t,
            None => return,
        };
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

    pub fn add(&self, other: &KmwElem) -> KmwElem {
        assert_eq!(self.field, other.field, "field mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &KmwElem) -> KmwElem {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> KmwElem {
        KmwElem {
            field: self.field,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> KmwElem {
        if c.is_zero() {
            return KmwElem::zero(self.field, self.degree);
        }
        KmwElem {
            field: self.field,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, k)| (w.clone(), k * c)).collect(),
        }
    }

    pub fn scale_i64(&self, c: i64) -> KmwElem {
        self.scale(&BigInt::from(c))
    }

    /// Graded product: degrees add, words concatenate bilinearly. No
    /// reduction is performed.
    pub fn mul(&self, other: &KmwElem) -> Result<KmwElem, KmwError> {
        if self.field != other.field {
            return Err(KmwError::FieldMismatch);
        }
        let mut out = KmwElem::zero(self.field, self.degree + other.degree);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut symbols = w1.symbols.clone();
                symbols.extend(w2.symbols.iter().cloned());
                out.add_term(
                    Word { eta_pow: w1.eta_pow + w2.eta_pow, symbols },
                    c1 * c2,
                );
            }
        }
        Ok(out)
    }

    pub fn mul_eta(&self) -> KmwElem {
        KmwElem::eta(self.field).mul(self).unwrap()
    }

    pub fn pow(&self, n: u32) -> KmwElem {
        let mut acc = KmwElem::one(self.field);
        for _ in 0..n {
            acc = acc.mul(self).unwrap();
        }
        acc
    }

    /// Entrywise restriction along a tower embedding.
    pub fn map_into(&self, target: &FieldDesc) -> Result<KmwElem, KmwError> {
        let mut out = KmwElem::zero(*target, self.degree);
        for (w, c) in &self.terms {
            let symbols = w
                .symbols
                .iter()
                .map(|a| a.map_into(target))
                .collect::<Result<Vec<_>, _>>()?;
            out.add_term(Word { eta_pow: w.eta_pow, symbols }, c.clone());
        }
        Ok(out)
    }

    /// Entrywise substitution t -> f(t) (field endomorphism).
    pub fn substitute(&self, image_of_t: &FieldElem) -> KmwElem {
        let mut out = KmwElem::zero(self.field, self.degree);
        for (w, c) in &self.terms {
            let symbols = w.symbols.iter().map(|a| a.substitute(image_of_t)).collect();
            out.add_term(Word { eta_pow: w.eta_pow, symbols }, c.clone());
        }
        out
    }

    /// Decidable equality via the Milnor and Witt shadows (and the rank
    /// shadow, which in degree <= 0 is subsumed by them).
    pub fn equal(&self, other: &KmwElem) -> Result<bool, KmwError> {
        if self.field != other.field {
            return Err(KmwError::FieldMismatch);
        }
        if self.degree != other.degree {
            return Err(KmwError::DegreeMismatch);
        }
        let diff = self.sub(other);
        Ok(shadows::milnor_shadow_is_zero(&diff)? && shadows::witt_shadow_is_zero(&diff)?)
    }

    pub fn is_zero(&self) -> Result<bool, KmwError> {
        self.equal(&KmwElem::zero(self.field, self.degree))
    }

    /// Rank shadow: the generic rank in degree <= 0 (zero below degree 0).
    pub fn rank_shadow(&self) -> BigInt {
        if self.degree != 0 {
            return BigInt::zero();
        }
        self.terms
            .iter()
            .filter(|(w, _)| w.eta_pow == 0 && w.symbols.is_empty())
            .map(|(_, c)| c.clone())
            .sum()
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = vec![];
        for (w, c) in &self.terms {
            let mut factors = vec![];
            if !c.is_one() || (w.eta_pow == 0 && w.symbols.is_empty()) {
                if *c == BigInt::from(-1) && !(w.eta_pow == 0 && w.symbols.is_empty()) {
                    factors.push("-".to_string());
                } else {
                    factors.push(c.to_string());
                }
            }
            if w.eta_pow == 1 {
                factors.push("eta".into());
            } else if w.eta_pow > 1 {
                factors.push(format!("eta^{}", w.eta_pow));
            }
            for s in &w.symbols {
                factors.push(format!("[{}]", s.render()));
            }
            let joined = factors.join("*").replace("-*", "-");
            parts.push(joined);
        }
        parts.join(" + ")
    }
}

impl std::fmt::Display for KmwElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Cheap representative shrinking by two identities that hold in every
/// Milnor-Witt K-theory: words containing the symbol [1] vanish, and a
/// leading eta^2 [-1] collapses to -2 eta. Keeps the eta towers produced by
/// repeated eps-multiplications from growing without bound.
fn reduce_word(field: FieldDesc, mut w: Word, mut c: BigInt) -> Option<(Word, BigInt)> {
    let one = field.one();
    if w.symbols.iter().any(|a| *a == one) {
        return None;
    }
    let minus_one = field.from_i64(-1);
    while w.eta_pow >= 2 && w.symbols.first() == Some(&minus_one) {
        w.eta_pow -= 1;
        w.symbols.remove(0);
        c *= -2;
    }
    Some((w, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    #[test]
    fn construction_and_arithmetic() {
        let f = gf5();
        let a = f.from_i64(2);
        let x = KmwElem::symbol(&a).unwrap();
        assert_eq!(x.degree, 1);
        let y = x.mul(&x).unwrap();
        assert_eq!(y.degree, 2);
        assert_eq!(y.num_terms(), 1);
        let z = x.sub(&x);
        assert!(z.is_syntactically_zero());
        assert!(KmwElem::symbol(&f.zero()).is_err());
    }

    #[test]
    fn unit_is_multiplicative_identity() {
        let f = gf5();
        let x = KmwElem::symbol(&f.from_i64(3))
            .unwrap()
            .mul(&KmwElem::eta(f))
            .unwrap()
            .add(&KmwElem::symbol(&f.from_i64(2)).unwrap().mul_eta());
        let one = KmwElem::one(f);
        assert_eq!(x.mul(&one).unwrap(), x);
        assert_eq!(one.mul(&x).unwrap(), x);
    }

    #[test]
    fn degree_bookkeeping() {
        let f = gf5();
        let eta = KmwElem::eta(f);
        assert_eq!(eta.degree, -1);
        assert_eq!(eta.mul(&eta).unwrap().degree, -2);
        let h = KmwElem::hyperbolic(f);
        assert_eq!(h.degree, 0);
        let neps = KmwElem::n_eps(f, 3);
        assert_eq!(neps.degree, 0);
    }
}
