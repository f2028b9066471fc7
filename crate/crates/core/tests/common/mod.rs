//! Shared test infrastructure: the independent bounded rewriting oracle.
//!
//! Equality x = y in Milnor-Witt K-theory means x - y lies in the
//! two-sided homogeneous ideal generated by the defining relations. Over a
//! fixed finite field and degree, and with bounded word length and eta
//! power, both the word space and the relevant ideal slice are
//! finite-dimensional integer lattices. The oracle builds the slice
//! lattice from all bounded products (monomial) * (relation instance) *
//! (monomial) and decides membership by exact integer elimination.
//!
//! It runs on its own unreduced word algebra - eta-centrality is the only
//! structure baked into the representation - so it is independent of every
//! simplification the library applies, and in particular can audit them.

use mwk_core::fields::{FieldDesc, FieldElem};
use mwk_core::kmw::KmwElem;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Unreduced word: eta power and symbol list, nothing identified.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RWord {
    pub eta: u32,
    pub symbols: Vec<FieldElem>,
}

impl RWord {
    pub fn degree(&self) -> i64 {
        self.symbols.len() as i64 - self.eta as i64
    }
}

/// Integer combination of unreduced words of one degree.
#[derive(Clone, Debug)]
pub struct RawElem {
    pub field: FieldDesc,
    pub degree: i64,
    pub terms: BTreeMap<RWord, BigInt>,
}

impl RawElem {
    pub fn zero(field: FieldDesc, degree: i64) -> RawElem {
        RawElem { field, degree, terms: BTreeMap::new() }
    }

    pub fn word(field: FieldDesc, eta: u32, symbols: Vec<FieldElem>) -> RawElem {
        let w = RWord { eta, symbols };
        let degree = w.degree();
        let mut terms = BTreeMap::new();
        terms.insert(w, BigInt::one());
        RawElem { field, degree, terms }
    }

    pub fn int(field: FieldDesc, n: i64) -> RawElem {
        let mut x = RawElem::zero(field, 0);
        if n != 0 {
            x.terms.insert(RWord { eta: 0, symbols: vec![] }, BigInt::from(n));
        }
        x
    }

    pub fn symbol(field: FieldDesc, a: &FieldElem) -> RawElem {
        assert!(!a.is_zero());
        RawElem::word(field, 0, vec![a.clone()])
    }

    fn add_term(&mut self, w: RWord, c: BigInt) {
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

    pub fn add(&self, other: &RawElem) -> RawElem {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> RawElem {
        RawElem {
            field: self.field,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &RawElem) -> RawElem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RawElem) -> RawElem {
        let mut out = RawElem::zero(self.field, self.degree + other.degree);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut symbols = w1.symbols.clone();
                symbols.extend(w2.symbols.iter().cloned());
                out.add_term(RWord { eta: w1.eta + w2.eta, symbols }, c1 * c2);
            }
        }
        out
    }

    pub fn mul_eta(&self) -> RawElem {
        let mut out = RawElem::zero(self.field, self.degree - 1);
        for (w, c) in &self.terms {
            out.add_term(RWord { eta: w.eta + 1, symbols: w.symbols.clone() }, c.clone());
        }
        out
    }

    /// Convert a (reduced) library element to the raw representation; the
    /// library's representatives are honest words, so this is just a copy.
    pub fn from_kmw(x: &KmwElem) -> RawElem {
        let mut out = RawElem::zero(x.field, x.degree);
        for (w, c) in x.terms() {
            out.add_term(RWord { eta: w.eta_pow, symbols: w.symbols.clone() }, c.clone());
        }
        out
    }
}

pub struct OracleBounds {
    pub max_symbols: usize,
    pub max_eta: u32,
}

fn unit_elems(field: &FieldDesc) -> Vec<FieldElem> {
    let ctx = field.ctx();
    (1..ctx.size).map(|c| field.from_fq(ctx.decode(c))).collect()
}

/// Base relation instances: Steinberg, twisted multiplicativity and the
/// eta relation (eta-centrality is the representation).
fn base_relations(field: FieldDesc) -> Vec<RawElem> {
    let units = unit_elems(&field);
    let mut out = vec![];
    for a in &units {
        let one_minus = field.one().sub(a);
        if !one_minus.is_zero() {
            out.push(RawElem::word(field, 0, vec![a.clone(), one_minus]));
        }
        for b in &units {
            let ab = a.mul(b);
            let r = RawElem::symbol(field, &ab)
                .sub(&RawElem::symbol(field, a))
                .sub(&RawElem::symbol(field, b))
                .sub(&RawElem::symbol(field, a).mul(&RawElem::symbol(field, b)).mul_eta());
            out.push(r);
        }
    }
    let minus_one = field.from_i64(-1);
    let r = RawElem::symbol(field, &minus_one)
        .mul_eta()
        .add(&RawElem::int(field, 2))
        .mul_eta();
    out.push(r);
    out
}

fn monomials(field: FieldDesc, max_symbols: usize, max_eta: u32) -> Vec<RawElem> {
    let units = unit_elems(&field);
    let mut out = vec![];
    let mut layers: Vec<Vec<Vec<FieldElem>>> = vec![vec![vec![]]];
    for len in 1..=max_symbols {
        let mut next = vec![];
        for w in &layers[len - 1] {
            for u in &units {
                let mut v = w.clone();
                v.push(u.clone());
                next.push(v);
            }
        }
        layers.push(next);
    }
    for k in 0..=max_eta {
        for layer in &layers {
            for symbols in layer {
                out.push(RawElem::word(field, k, symbols.clone()));
            }
        }
    }
    out
}

/// The ideal lattice in one degree slice, held as an integer echelon basis.
pub struct IdealSlice {
    pub degree: i64,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    index: BTreeMap<RWord, usize>,
}

impl IdealSlice {
    pub fn build(field: FieldDesc, degree: i64, bounds: &OracleBounds) -> IdealSlice {
        let rels = base_relations(field);
        let mons = monomials(field, bounds.max_symbols, bounds.max_eta);
        let fits = |x: &RawElem| {
            x.terms
                .keys()
                .all(|w| w.symbols.len() <= bounds.max_symbols && w.eta <= bounds.max_eta)
        };
        // word index over the full bounded slice so membership never fails
        // merely for indexing reasons
        let mut index: BTreeMap<RWord, usize> = BTreeMap::new();
        for m in &mons {
            for w in m.terms.keys() {
                if w.degree() == degree {
                    let next = index.len();
                    index.entry(w.clone()).or_insert(next);
                }
            }
        }
        let mut slice = IdealSlice { degree, basis: vec![], pivots: vec![], index };
        for r in &rels {
            for left in &mons {
                let lr = left.mul(r);
                if lr.degree > degree {
                    continue;
                }
                for right in &mons {
                    if lr.degree + right.degree != degree {
                        continue;
                    }
                    let full = lr.mul(right);
                    if full.terms.is_empty() || !fits(&full) {
                        continue;
                    }
                    let mut v = vec![BigInt::zero(); slice.index.len()];
                    let mut ok = true;
                    for (w, c) in &full.terms {
                        match slice.index.get(w) {
                            Some(&i) => v[i] = c.clone(),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        slice.insert(v);
                    }
                }
            }
        }
        slice
    }

    fn insert(&mut self, mut v: Vec<BigInt>) {
        loop {
            let Some(p) = v.iter().position(|x| !x.is_zero()) else { return };
            match self.pivots.iter().position(|&q| q == p) {
                None => {
                    if v[p].is_negative() {
                        for x in v.iter_mut() {
                            *x = -x.clone();
                        }
                    }
                    let at =
                        self.pivots.iter().position(|&q| q > p).unwrap_or(self.pivots.len());
                    self.pivots.insert(at, p);
                    self.basis.insert(at, v);
                    return;
                }
                Some(i) => {
                    let b = self.basis[i].clone();
                    let q = num_integer::Integer::div_floor(&v[p], &b[p]);
                    if !q.is_zero() {
                        for (x, y) in v.iter_mut().zip(&b) {
                            *x -= &q * y;
                        }
                    }
                    if v[p].is_zero() {
                        continue;
                    }
                    // remainder smaller than the pivot: swap and continue
                    self.basis[i] = v;
                    v = b;
                }
            }
        }
    }

    pub fn contains_raw(&self, x: &RawElem) -> bool {
        if x.terms.is_empty() {
            return true;
        }
        if x.degree != self.degree {
            return false;
        }
        let mut v = vec![BigInt::zero(); self.index.len()];
        for (w, c) in &x.terms {
            match self.index.get(w) {
                Some(&i) => v[i] = c.clone(),
                None => return false,
            }
        }
        loop {
            let Some(p) = v.iter().position(|x| !x.is_zero()) else { return true };
            let Some(i) = self.pivots.iter().position(|&q| q == p) else {
                return false;
            };
            let b = &self.basis[i];
            let (q, r) = num_integer::Integer::div_rem(&v[p], &b[p]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in v.iter_mut().zip(b) {
                *x -= &q * y;
            }
        }
    }

    pub fn contains(&self, x: &KmwElem) -> bool {
        self.contains_raw(&RawElem::from_kmw(x))
    }

    pub fn equal(&self, x: &KmwElem, y: &KmwElem) -> bool {
        self.contains_raw(&RawElem::from_kmw(x).sub(&RawElem::from_kmw(y)))
    }
}

/// Slice cache keyed by degree.
pub struct Oracle {
    pub field: FieldDesc,
    pub bounds: OracleBounds,
    slices: std::cell::RefCell<BTreeMap<i64, std::rc::Rc<IdealSlice>>>,
}

impl Oracle {
    pub fn new(field: FieldDesc, max_symbols: usize, max_eta: u32) -> Oracle {
        Oracle {
            field,
            bounds: OracleBounds { max_symbols, max_eta },
            slices: Default::default(),
        }
    }

    pub fn slice(&self, degree: i64) -> std::rc::Rc<IdealSlice> {
        let mut map = self.slices.borrow_mut();
        map.entry(degree)
            .or_insert_with(|| {
                std::rc::Rc::new(IdealSlice::build(self.field, degree, &self.bounds))
            })
            .clone()
    }

    pub fn equal(&self, x: &KmwElem, y: &KmwElem) -> bool {
        self.slice(x.degree).equal(x, y)
    }

    pub fn contains_raw(&self, x: &RawElem) -> bool {
        self.slice(x.degree).contains_raw(x)
    }
}

/// All single words eta^k [a_1..a_n] with n <= max_symbols, k <= max_eta
/// and the given degree, as library elements.
pub fn enumerate_words(
    field: FieldDesc,
    degree: i64,
    max_symbols: usize,
    max_eta: u32,
) -> Vec<KmwElem> {
    let units = unit_elems(&field);
    let mut out = vec![];
    for n in 0..=max_symbols {
        let k = n as i64 - degree;
        if k < 0 || k > max_eta as i64 {
            continue;
        }
        let mut layer: Vec<Vec<FieldElem>> = vec![vec![]];
        for _ in 0..n {
            let mut next = vec![];
            for w in &layer {
                for u in &units {
                    let mut v = w.clone();
                    v.push(u.clone());
                    next.push(v);
                }
            }
            layer = next;
        }
        for symbols in layer {
            let mut x = KmwElem::symbols(field, &symbols).unwrap();
            for _ in 0..k {
                x = x.mul_eta();
            }
            out.push(x);
        }
    }
    out
}
