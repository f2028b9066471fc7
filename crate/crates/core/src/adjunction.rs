//! The classical Milnor instance and the two grading functors between
//! cycle-module worlds: one regrades a classical module by twist ranks
//! (eta acting as zero), the other kills eta degreewise. The unit and
//! counit of the adjunction are realized on finite generator tables.

use crate::abgroup::{FgAbGroup, IntMat};
use crate::fields::FieldDesc;
use crate::geom::homology::{kmw_coords, kmw_group};
use crate::kmw::shadows::{milnor_shadow_is_zero, MilnorElem};
use crate::kmw::{KmwElem, KmwError};
use crate::premodule::MValue;
use crate::vlines::VirtualBundle;
use num_bigint::BigInt;
use num_traits::Zero;

/// A value of the regraded classical module: eta acts as zero and frames
/// act trivially, so only the rank of the twist matters.
pub fn gamma_lower_value(elem: MilnorElem, twist: VirtualBundle) -> MValue {
    MValue::Milnor { elem, twist }
}

/// Lift a Milnor symbol into the eta-free part of Milnor-Witt K-theory.
pub fn milnor_to_kmw(m: &MilnorElem) -> Result<KmwElem, KmwError> {
    let mut out = KmwElem::zero(m.field, m.degree);
    for (w, c) in &m.terms {
        out = out.add(&KmwElem::symbols(m.field, w)?.scale(c));
    }
    Ok(out)
}

/// Decide vanishing in the eta-quotient of degree n: by exactness of
/// eta-multiplication against the Milnor quotient this is the Milnor
/// shadow.
pub fn gamma_upper_is_zero(x: &KmwElem) -> Result<bool, KmwError> {
    milnor_shadow_is_zero(x)
}

/// Presentation of K^MW_n(E)/eta over a finite field: the degree-n
/// presentation with the eta-images of the degree-(n+1) generators added
/// as relations.
pub fn gamma_upper_group(field: FieldDesc, n: i64) -> (FgAbGroup, Vec<KmwElem>) {
    let (base, gens) = kmw_group(field, n);
    let (_, above) = kmw_group(field, n + 1);
    let mut rel_rows: Vec<Vec<BigInt>> = vec![];
    for i in 0..base.relations().rows() {
        rel_rows.push(base.relations().row(i));
    }
    for g in &above {
        let image = g.mul_eta();
        rel_rows.push(kmw_coords(field, n, &image));
    }
    let rel = if rel_rows.is_empty() {
        IntMat::zero(0, base.num_generators())
    } else {
        IntMat::from_rows(rel_rows)
    };
    let group = FgAbGroup::new(base.num_generators(), rel, base.labels().to_vec()).unwrap();
    (group, gens)
}

/// Presentation of classical K^M_n over a finite field.
pub fn milnor_group(field: FieldDesc, n: i64) -> FgAbGroup {
    let ctx = field.ctx();
    match n {
        0 => FgAbGroup::free(1),
        1 => FgAbGroup::cyclic(ctx.size - 1),
        _ => FgAbGroup::zero(),
    }
}

/// Coordinates of a Milnor element in the `milnor_group` presentation.
pub fn milnor_coords(field: FieldDesc, n: i64, m: &MilnorElem) -> Vec<BigInt> {
    let ctx = field.ctx();
    match n {
        0 => vec![m.terms.values().sum()],
        1 => {
            let mut total = BigInt::zero();
            for (w, c) in &m.terms {
                total += c * BigInt::from(ctx.dlog(w[0].as_fq()));
            }
            vec![total]
        }
        _ => vec![],
    }
}

/// A morphism of graded modules given by one integer matrix per
/// (field, degree) slot of the sampled tower.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismTable {
    /// (field, degree) -> matrix acting on the slot presentation
    pub slots: Vec<((FieldDesc, i64), IntMat)>,
}

impl MorphismTable {
    /// The scalar morphism c * id on the listed slots.
    pub fn scalar(fields: &[FieldDesc], degrees: &[i64], c: i64) -> MorphismTable {
        let mut slots = vec![];
        for f in fields {
            for &d in degrees {
                let g = milnor_group(*f, d);
                let n = g.num_generators();
                let mut m = IntMat::zero(n, n);
                for i in 0..n {
                    m.set(i, i, BigInt::from(c));
                }
                slots.push(((*f, d), m));
            }
        }
        MorphismTable { slots }
    }

    pub fn get(&self, field: FieldDesc, degree: i64) -> Option<&IntMat> {
        self.slots.iter().find(|((f, d), _)| *f == field && *d == degree).map(|(_, m)| m)
    }

    /// Table equality as maps on the slot groups (entries compared modulo
    /// the slot relations).
    pub fn equal_as_maps(&self, other: &MorphismTable) -> bool {
        for ((f, d), m) in &self.slots {
            let Some(m2) = other.get(*f, *d) else { return false };
            let g = milnor_group(*f, *d);
            for j in 0..m.cols() {
                let a = m.col(j);
                let b = m2.col(j);
                if !g.elements_equal(&a, &b) {
                    return false;
                }
            }
        }
        true
    }
}

/// The adjunction map on morphism tables: a classical-module morphism
/// alpha from the eta-quotient to N yields a Milnor-Witt morphism into the
/// regraded N by projecting modulo eta first. On presentations, both the
/// eta-quotient of K^MW and K^M have matching generators, so the matrix
/// passes through; the content is the verified compatibility with the data.
pub fn phi(alpha: &MorphismTable) -> MorphismTable {
    alpha.clone()
}

/// Inverse direction: a Milnor-Witt morphism into a regraded module kills
/// eta and factors through the quotient.
pub fn psi(beta: &MorphismTable) -> MorphismTable {
    beta.clone()
}

/// A table is a module morphism when it commutes with restriction and
/// residue data; checked on the generator slots it carries.
pub fn table_is_morphism(table: &MorphismTable) -> Result<bool, KmwError> {
    // restriction compatibility between GF(q) and GF(q^2) slots in degree 1:
    // res [g_q] = s [g_{q^2}] where g_q maps to g_{q^2}^s
    for ((f, d), m) in &table.slots {
        if *d != 1 {
            continue;
        }
        let FieldDesc::Finite(q) = f else { continue };
        let big = FieldDesc::finite(q.p, q.deg * 2);
        let Some(m2) = table.get(big, 1) else { continue };
        // in Z/(q-1) and Z/(q^2-1): res is multiplication by s = (q^2-1)/(q-1)
        let s = BigInt::from((big.ctx().size - 1) / (f.ctx().size - 1));
        let g_small = milnor_group(*f, 1);
        let _ = g_small;
        let g_big = milnor_group(big, 1);
        // commuting square: res . m = m2 . res on the single generator
        let lhs = m.get(0, 0) * &s;
        let rhs = m2.get(0, 0) * &s;
        if !g_big.elements_equal(&[lhs], &[rhs]) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldElem;
    use crate::kmw::shadows::milnor_is_zero;
    use crate::premodule::{act, res, residue, FieldMor};
    use crate::vlines::VirtualBundle;

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    #[test]
    fn gamma_upper_degree_one_is_units() {
        // K^MW_1(GF(5))/eta = Z/4
        let (g, _) = gamma_upper_group(gf5(), 1);
        assert_eq!(g.invariants(), (vec![BigInt::from(4)], 0));
        let km = milnor_group(gf5(), 1);
        assert_eq!(g.invariants(), km.invariants());
    }

    #[test]
    fn gamma_upper_degree_zero_is_z() {
        // GW/<eta-image> = Z by the rank
        let (g, _) = gamma_upper_group(gf5(), 0);
        assert_eq!(g.invariants(), (vec![], 1));
    }

    #[test]
    fn gamma_upper_degree_two_vanishes() {
        // every [a][b] is an eta-multiple over GF(5): exhaustive
        let f = gf5();
        for a in 1..5i64 {
            for b in 1..5i64 {
                let x = KmwElem::symbols(f, &[f.from_i64(a), f.from_i64(b)]).unwrap();
                assert!(
                    gamma_upper_is_zero(&x).unwrap(),
                    "[{a}][{b}] should die modulo eta"
                );
            }
        }
        let (g, _) = gamma_upper_group(f, 2);
        assert!(g.is_trivial());
    }

    #[test]
    fn gamma_lower_eta_acts_as_zero() {
        let f = gf5();
        let mut m = MilnorElem::zero(f, 1);
        m.add_term(vec![f.from_i64(2)], BigInt::from(1));
        let val = gamma_lower_value(m, VirtualBundle::trivial(f, 1));
        let eta = crate::kmw::KmwTwisted::new(
            KmwElem::eta(f),
            VirtualBundle::trivial(f, -1),
        )
        .unwrap();
        let acted = act(&eta, &val).unwrap();
        assert!(acted.is_zero().unwrap());
    }

    #[test]
    fn gamma_lower_frame_changes_act_trivially() {
        // R4a for the regraded module: <delta> acts as the identity
        let f = gf5();
        let mut m = MilnorElem::zero(f, 1);
        m.add_term(vec![f.from_i64(3)], BigInt::from(1));
        let val = gamma_lower_value(m.clone(), VirtualBundle::trivial(f, 1));
        let delta = crate::kmw::KmwTwisted::new(
            KmwElem::gw_unit(&f.from_i64(2)).unwrap(),
            VirtualBundle::zero(f),
        )
        .unwrap();
        let acted = act(&delta, &val).unwrap();
        let expect = gamma_lower_value(m, VirtualBundle::trivial(f, 1));
        assert!(acted.equal(&expect).unwrap());
    }

    #[test]
    fn gamma_lower_residues_are_tame_symbols() {
        // the regraded module residue at a place is the classical one
        let ff = FieldDesc::rational(5, 1);
        let ctx = ff.ctx();
        let v = crate::fields::Place::finite(ff, crate::fields::Poly::x(&ctx)).unwrap();
        let t: FieldElem = ff.gen_t();
        let mut m = MilnorElem::zero(ff, 2);
        m.add_term(vec![t.clone(), ff.from_i64(2)], BigInt::from(1));
        let val = gamma_lower_value(m, VirtualBundle::trivial(ff, 2));
        let r = residue(&v, &val).unwrap();
        let MValue::Milnor { elem, .. } = r else { unreachable!() };
        let kappa = v.residue_desc();
        let mut expect = MilnorElem::zero(kappa, 1);
        expect.add_term(vec![kappa.from_i64(2)], BigInt::from(1));
        let mut diff = elem;
        for (w, c) in &expect.terms {
            diff.add_term(w.clone(), -c);
        }
        assert!(milnor_is_zero(&diff).unwrap());
    }

    #[test]
    fn gamma_lower_restriction_functorial() {
        let e = gf5();
        let big = FieldDesc::finite(5, 2);
        let mut m = MilnorElem::zero(e, 1);
        m.add_term(vec![e.from_i64(2)], BigInt::from(1));
        let val = gamma_lower_value(m, VirtualBundle::trivial(e, 1));
        let phi_mor = FieldMor::Embed { from: e, to: big };
        let moved = res(&phi_mor, &val).unwrap();
        let MValue::Milnor { elem, .. } = moved else { unreachable!() };
        assert_eq!(elem.field, big);
    }

    #[test]
    fn adjunction_round_trips_on_tables() {
        let fields = [gf5(), FieldDesc::finite(5, 2)];
        let degrees = [-1, 0, 1, 2, 3];
        for c in [0i64, 1, 2, 3, -1] {
            let alpha = MorphismTable::scalar(&fields, &degrees, c);
            assert!(table_is_morphism(&alpha).unwrap());
            let beta = phi(&alpha);
            let back = psi(&beta);
            assert!(back.equal_as_maps(&alpha), "psi(phi(alpha)) != alpha for c={c}");
            let again = phi(&back);
            assert!(again.equal_as_maps(&beta), "phi(psi(beta)) != beta for c={c}");
        }
    }

    #[test]
    fn gamma_upper_matches_milnor_along_degrees() {
        // K^MW/eta = K^M degreewise in degrees -1..3 over GF(5) and GF(25)
        for f in [gf5(), FieldDesc::finite(5, 2)] {
            for n in -1..=3i64 {
                let (g, _) = gamma_upper_group(f, n);
                let km = milnor_group(f, n);
                assert_eq!(
                    g.invariants(),
                    km.invariants(),
                    "degree {n} over {f}"
                );
            }
        }
    }
}
