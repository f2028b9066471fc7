//! Exact linear algebra over the integers: presentations of finitely
//! generated abelian groups, integer-matrix homomorphisms, Smith normal
//! form, kernels, cokernels and homology of two-step complexes.
//!
//! A group is given as cokernel of its relation matrix acting on a free
//! module over the generators; the canonical shape is the invariant-factor
//! decomposition Z^r + Z/d_1 + ... with d_1 | d_2 | ...

pub mod matrix;

pub use matrix::{integer_kernel, smith_normal_form, solve_exact, IntMat};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AbGroupError {
    #[error("relation matrix has {found} columns, expected {expected}")]
    RelationShape { expected: usize, found: usize },
    #[error("map does not send source relations into the target relation lattice")]
    NotWellDefined,
    #[error("composition g o f is not zero")]
    CompositionNotZero,
    #[error("source/target mismatch when composing maps")]
    ComposeMismatch,
}

/// Finitely generated abelian group, presented by generators and relations.
/// Rows of `relations` are relation vectors in generator coordinates.
#[derive(Clone, Debug)]
pub struct FgAbGroup {
    num_generators: usize,
    relations: IntMat,
    labels: Vec<String>,
}

/// Canonical invariant-factor data for a presented group, together with the
/// unimodular change of coordinates that realizes it.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// invariant factors > 1, in divisibility order
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
    /// canonical coordinates of an element are `coords = u * x` where the
    /// first entries run over all invariant factors (including trivial ones)
    u: IntMat,
    u_inv: IntMat,
    /// diagonal of the SNF of the transposed relation matrix (length = generators)
    diag: Vec<BigInt>,
}

impl FgAbGroup {
    pub fn new(
        num_generators: usize,
        relations: IntMat,
        labels: Vec<String>,
    ) -> Result<Self, AbGroupError> {
        if relations.cols() != num_generators && relations.rows() != 0 {
            return Err(AbGroupError::RelationShape {
                expected: num_generators,
                found: relations.cols(),
            });
        }
        let relations = if relations.rows() == 0 {
            IntMat::zero(0, num_generators)
        } else {
            relations
        };
        let labels = if labels.is_empty() {
            (0..num_generators).map(|i| format!("g{i}")).collect()
        } else {
            assert_eq!(labels.len(), num_generators);
            labels
        };
        Ok(FgAbGroup { num_generators, relations, labels })
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup::new(rank, IntMat::zero(0, rank), vec![]).unwrap()
    }

    pub fn zero() -> Self {
        FgAbGroup::free(0)
    }

    pub fn cyclic(n: u64) -> Self {
        FgAbGroup::new(1, IntMat::from_rows(vec![vec![BigInt::from(n)]]), vec![]).unwrap()
    }

    /// Direct sum of cyclic groups Z/d for d in `ds` (d = 0 meaning Z).
    pub fn from_factors(ds: &[u64]) -> Self {
        let n = ds.len();
        let rows = ds
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| {
                let mut row = vec![BigInt::zero(); n];
                row[i] = BigInt::from(d);
                row
            })
            .collect::<Vec<_>>();
        let rel = if rows.is_empty() { IntMat::zero(0, n) } else { IntMat::from_rows(rows) };
        FgAbGroup::new(n, rel, vec![]).unwrap()
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn relations(&self) -> &IntMat {
        &self.relations
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.num_generators);
        self.labels = labels;
        self
    }

    pub fn direct_sum(&self, other: &FgAbGroup) -> FgAbGroup {
        let n = self.num_generators + other.num_generators;
        let mut rel = IntMat::zero(self.relations.rows() + other.relations.rows(), n);
        for i in 0..self.relations.rows() {
            for j in 0..self.num_generators {
                rel.set(i, j, self.relations.get(i, j).clone());
            }
        }
        for i in 0..other.relations.rows() {
            for j in 0..other.num_generators {
                rel.set(
                    self.relations.rows() + i,
                    self.num_generators + j,
                    other.relations.get(i, j).clone(),
                );
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        FgAbGroup::new(n, rel, labels).unwrap()
    }

    /// Canonical decomposition via Smith normal form of the relation matrix.
    pub fn canonical(&self) -> CanonicalForm {
        // group = coker(R^T : Z^m -> Z^n); SNF u R^T v = d gives coker = coker(d)
        // in coordinates y = u x.
        let rt = self.relations.transpose();
        let (d, u, v) = smith_normal_form(&rt);
        let _ = v;
        let n = self.num_generators;
        let mut diag = vec![BigInt::zero(); n];
        for i in 0..n.min(rt.cols()) {
            if i < rt.rows() {
                diag[i] = d.get(i, i).clone();
            }
        }
        let torsion: Vec<BigInt> =
            diag.iter().filter(|x| !x.is_zero() && !x.is_one()).cloned().collect();
        let free_rank = diag.iter().filter(|x| x.is_zero()).count();
        let u_inv = invert_unimodular(&u);
        CanonicalForm { torsion, free_rank, u, u_inv, diag }
    }

    /// Invariant factors including free rank, as (torsion, free_rank).
    pub fn invariants(&self) -> (Vec<BigInt>, usize) {
        let c = self.canonical();
        (c.torsion, c.free_rank)
    }

    pub fn is_trivial(&self) -> bool {
        let (t, r) = self.invariants();
        t.is_empty() && r == 0
    }

    /// Order of the group when finite.
    pub fn order(&self) -> Option<BigInt> {
        let (t, r) = self.invariants();
        if r > 0 {
            return None;
        }
        Some(t.iter().product())
    }

    /// Reduce an element (generator coordinates) to canonical coordinates:
    /// one residue per invariant-factor slot, then the free coordinates.
    pub fn canonical_coords(&self, x: &[BigInt]) -> Vec<BigInt> {
        let c = self.canonical();
        let y = c.u.mul_vec(x);
        y.iter()
            .zip(c.diag.iter())
            .map(|(yi, di)| {
                if di.is_zero() {
                    yi.clone()
                } else {
                    num_integer::Integer::mod_floor(yi, di)
                }
            })
            .collect()
    }

    pub fn is_zero_element(&self, x: &[BigInt]) -> bool {
        self.canonical_coords(x).iter().all(|c| c.is_zero())
    }

    pub fn elements_equal(&self, x: &[BigInt], y: &[BigInt]) -> bool {
        let diff: Vec<BigInt> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.is_zero_element(&diff)
    }

    /// Representatives (generator coordinates) for the canonical generators
    /// of the nontrivial part of the group, torsion first then free.
    pub fn canonical_generators(&self) -> Vec<(String, Vec<BigInt>)> {
        let c = self.canonical();
        let mut out = vec![];
        for (i, d) in c.diag.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let desc =
                if d.is_zero() { "Z".to_string() } else { format!("Z/{d}") };
            out.push((desc, c.u_inv.col(i)));
        }
        out
    }
}

fn invert_unimodular(u: &IntMat) -> IntMat {
    // u has determinant +-1, so the exact solver works column by column.
    let n = u.rows();
    let mut inv = IntMat::zero(n, n);
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        let col = solve_exact(u, &e).expect("unimodular matrix must be invertible");
        for i in 0..n {
            inv.set(i, j, col[i].clone());
        }
    }
    inv
}

/// Homomorphism of presented groups; `matrix` maps generator coordinates of
/// the source to generator coordinates of the target (columns = source gens).
#[derive(Clone, Debug)]
pub struct GroupMap {
    pub source: FgAbGroup,
    pub target: FgAbGroup,
    pub matrix: IntMat,
}

impl GroupMap {
    pub fn new(
        source: FgAbGroup,
        target: FgAbGroup,
        matrix: IntMat,
    ) -> Result<Self, AbGroupError> {
        assert_eq!(matrix.cols(), source.num_generators());
        assert_eq!(matrix.rows(), target.num_generators());
        // well-definedness: image of every source relation lies in the target
        // relation lattice
        for i in 0..source.relations.rows() {
            let img = matrix.mul_vec(&source.relations.row(i));
            if !in_lattice(&target.relations, &img) {
                return Err(AbGroupError::NotWellDefined);
            }
        }
        Ok(GroupMap { source, target, matrix })
    }

    pub fn zero(source: FgAbGroup, target: FgAbGroup) -> Self {
        let m = IntMat::zero(target.num_generators(), source.num_generators());
        GroupMap { source, target, matrix: m }
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        GroupMap {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMat::identity(g.num_generators()),
        }
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.matrix.mul_vec(x)
    }

    pub fn compose(&self, first: &GroupMap) -> Result<GroupMap, AbGroupError> {
        if first.target.num_generators() != self.source.num_generators() {
            return Err(AbGroupError::ComposeMismatch);
        }
        GroupMap::new(first.source.clone(), self.target.clone(), self.matrix.mul(&first.matrix))
    }

    pub fn is_zero_map(&self) -> bool {
        (0..self.matrix.cols()).all(|j| self.target.is_zero_element(&self.matrix.col(j)))
    }

    /// Kernel with its inclusion witness into the source.
    pub fn kernel(&self) -> (FgAbGroup, GroupMap) {
        let ns = self.source.num_generators();
        // K = { x : A x in rowlattice(R_T) }: project the integer kernel of
        // [A | R_T^T] onto the x block, then saturate with the source relations.
        let rt_t = self.target.relations.transpose();
        let block = self.matrix.hstack(&rt_t);
        let kern = integer_kernel(&block);
        let mut gens: Vec<Vec<BigInt>> =
            kern.iter().map(|k| k[0..ns].to_vec()).collect();
        // source relations are elements of K as well (A maps them into the lattice)
        for i in 0..self.source.relations.rows() {
            gens.push(self.source.relations.row(i));
        }
        // columns of `basis` generate K as a lattice... present the kernel group
        // as (lattice gens)/(source relations).
        let m = gens.len();
        if m == 0 {
            let k = FgAbGroup::zero();
            let incl = GroupMap::zero(k.clone(), self.source.clone());
            return (k, incl);
        }
        // relations among the chosen generators: integer kernel of the matrix
        // whose columns are the generators, combined with source relations
        // expressed in generator coordinates.
        let mut gen_mat = IntMat::zero(ns, m);
        for (j, g) in gens.iter().enumerate() {
            for i in 0..ns {
                gen_mat.set(i, j, g[i].clone());
            }
        }
        // relation lattice: { c in Z^m : gen_mat * c in rowlattice(R_S) }
        let rs_t = self.source.relations.transpose();
        let block2 = gen_mat.hstack(&rs_t);
        let rel_kern = integer_kernel(&block2);
        let rel_rows: Vec<Vec<BigInt>> =
            rel_kern.iter().map(|k| k[0..m].to_vec()).collect();
        let rel = if rel_rows.is_empty() {
            IntMat::zero(0, m)
        } else {
            IntMat::from_rows(rel_rows)
        };
        let k = FgAbGroup::new(m, rel, vec![]).unwrap();
        let incl = GroupMap { source: k.clone(), target: self.source.clone(), matrix: gen_mat };
        (k, incl)
    }

    /// Cokernel with the projection witness from the target.
    pub fn cokernel(&self) -> (FgAbGroup, GroupMap) {
        let nt = self.target.num_generators();
        let img_rows: Vec<Vec<BigInt>> =
            (0..self.matrix.cols()).map(|j| self.matrix.col(j)).collect();
        let mut rel = self.target.relations.clone();
        if !img_rows.is_empty() {
            rel = rel.vstack(&IntMat::from_rows(img_rows));
        }
        let c = FgAbGroup::new(nt, rel, self.target.labels.clone()).unwrap();
        let proj = GroupMap {
            source: self.target.clone(),
            target: c.clone(),
            matrix: IntMat::identity(nt),
        };
        (c, proj)
    }
}

fn in_lattice(rows: &IntMat, v: &[BigInt]) -> bool {
    if rows.rows() == 0 {
        return v.iter().all(|x| x.is_zero());
    }
    matrix::in_row_lattice(rows, v)
}

/// Homology ker(g)/im(f) at the middle of `A --f--> B --g--> C`.
///
/// The returned map sends the homology presentation's generators to
/// representatives in B (generator coordinates).
pub fn homology_at(f: &GroupMap, g: &GroupMap) -> Result<(FgAbGroup, GroupMap), AbGroupError> {
    if f.target.num_generators() != g.source.num_generators() {
        return Err(AbGroupError::ComposeMismatch);
    }
    let comp = g.compose(f)?;
    if !comp.is_zero_map() {
        return Err(AbGroupError::CompositionNotZero);
    }
    let (_k, incl) = g.kernel();
    let m = incl.matrix.cols();
    let nb = g.source.num_generators();
    // relations on kernel generators: pull back (im f + R_B) through the
    // kernel inclusion.
    let mut extra: Vec<Vec<BigInt>> = vec![];
    for j in 0..f.matrix.cols() {
        extra.push(f.matrix.col(j));
    }
    let mut lat = g.source.relations.clone();
    if !extra.is_empty() {
        lat = lat.vstack(&IntMat::from_rows(extra));
    }
    // relation lattice on K-coordinates: { c : incl * c in lat }
    let block = incl.matrix.hstack(&lat.transpose());
    let kern = integer_kernel(&block);
    let rel_rows: Vec<Vec<BigInt>> = kern.iter().map(|k| k[0..m].to_vec()).collect();
    let rel =
        if rel_rows.is_empty() { IntMat::zero(0, m) } else { IntMat::from_rows(rel_rows) };
    let h = FgAbGroup::new(m, rel, vec![]).unwrap();
    let repr = GroupMap {
        source: h.clone(),
        target: FgAbGroup::free(nb).with_labels(g.source.labels.clone()),
        matrix: incl.matrix,
    };
    Ok((h, repr))
}

/// Serializable view used by the CLI: {generators, relations, labels}.
#[derive(Serialize, Deserialize)]
pub struct GroupJson {
    pub generators: usize,
    pub relations: Vec<Vec<String>>,
    pub labels: Vec<String>,
}

impl From<&FgAbGroup> for GroupJson {
    fn from(g: &FgAbGroup) -> Self {
        GroupJson {
            generators: g.num_generators(),
            relations: (0..g.relations.rows())
                .map(|i| g.relations.row(i).iter().map(|x| x.to_string()).collect())
                .collect(),
            labels: g.labels.clone(),
        }
    }
}

/// Summary of the canonical decomposition, used in JSON output.
#[derive(Serialize, Deserialize, PartialEq, Eq, Debug)]
pub struct InvariantsJson {
    pub invariant_factors: Vec<String>,
    pub free_rank: usize,
}

impl From<&FgAbGroup> for InvariantsJson {
    fn from(g: &FgAbGroup) -> Self {
        let (t, r) = g.invariants();
        InvariantsJson {
            invariant_factors: t.iter().map(|x| x.to_string()).collect(),
            free_rank: r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> FgAbGroup {
        FgAbGroup::free(1)
    }

    #[test]
    fn invariants_of_presentations() {
        let g = FgAbGroup::new(2, IntMat::from_i64(&[&[2, 0], &[0, 3]]), vec![]).unwrap();
        let (t, r) = g.invariants();
        assert_eq!(r, 0);
        assert_eq!(t, vec![BigInt::from(6)]); // Z/2 + Z/3 = Z/6

        let g = FgAbGroup::new(2, IntMat::from_i64(&[&[2, 4], &[6, 8]]), vec![]).unwrap();
        let (t, r) = g.invariants();
        assert_eq!(r, 0);
        assert_eq!(t, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn invariants_permutation_independent() {
        let g1 = FgAbGroup::new(3, IntMat::from_i64(&[&[2, 0, 5], &[0, 12, 1]]), vec![]).unwrap();
        // permute generator columns
        let g2 = FgAbGroup::new(3, IntMat::from_i64(&[&[5, 2, 0], &[1, 0, 12]]), vec![]).unwrap();
        assert_eq!(g1.invariants(), g2.invariants());
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        let id = GroupMap::identity(&z());
        let (k, _) = id.kernel();
        assert!(k.is_trivial());
    }

    #[test]
    fn cokernel_of_mult3() {
        let f = GroupMap::new(z(), z(), IntMat::from_i64(&[&[3]])).unwrap();
        let (c, _) = f.cokernel();
        let (t, r) = c.invariants();
        assert_eq!(r, 0);
        assert_eq!(t, vec![BigInt::from(3)]);
    }

    #[test]
    fn kernel_of_z4_to_z2() {
        let z4 = FgAbGroup::cyclic(4);
        let z2 = FgAbGroup::cyclic(2);
        let f = GroupMap::new(z4, z2, IntMat::from_i64(&[&[1]])).unwrap();
        let (k, _) = f.kernel();
        let (t, r) = k.invariants();
        assert_eq!(r, 0);
        assert_eq!(t, vec![BigInt::from(2)]);
    }

    #[test]
    fn homology_zero_maps() {
        let f = GroupMap::zero(z(), z());
        let g = GroupMap::zero(z(), z());
        let (h, _) = homology_at(&f, &g).unwrap();
        let (t, r) = h.invariants();
        assert_eq!((t.len(), r), (0, 1)); // Z
    }

    #[test]
    fn homology_mult2_then_zero() {
        let f = GroupMap::new(z(), z(), IntMat::from_i64(&[&[2]])).unwrap();
        let g = GroupMap::zero(z(), FgAbGroup::zero());
        let (h, _) = homology_at(&f, &g).unwrap();
        let (t, r) = h.invariants();
        assert_eq!(r, 0);
        assert_eq!(t, vec![BigInt::from(2)]);
    }

    #[test]
    fn homology_antidiagonal_kernel() {
        // 0 -> Z^2 --(x+y)--> Z : kernel free of rank 1
        let f = GroupMap::zero(FgAbGroup::zero(), FgAbGroup::free(2));
        let g = GroupMap::new(FgAbGroup::free(2), z(), IntMat::from_i64(&[&[1, 1]])).unwrap();
        let (h, _) = homology_at(&f, &g).unwrap();
        let (t, r) = h.invariants();
        assert_eq!((t.len(), r), (0, 1));
    }

    #[test]
    fn rejects_nonzero_composition() {
        let f = GroupMap::identity(&z());
        let g = GroupMap::identity(&z());
        assert!(matches!(homology_at(&f, &g), Err(AbGroupError::CompositionNotZero)));
    }

    #[test]
    fn rejects_ill_defined_map() {
        let z2 = FgAbGroup::cyclic(2);
        // Z/2 -> Z by 1 is not well-defined
        assert!(GroupMap::new(z2, z(), IntMat::from_i64(&[&[1]])).is_err());
    }

    #[test]
    fn empty_matrices_denote_zero_objects() {
        let zero = FgAbGroup::zero();
        assert!(zero.is_trivial());
        let f = GroupMap::zero(zero.clone(), zero.clone());
        let (k, _) = f.kernel();
        assert!(k.is_trivial());
    }
}
