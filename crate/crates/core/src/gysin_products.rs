//! Deformation to the normal cone for divisors, Gysin morphisms, cross
//! products with their eps-commutativity and chain rule, and the
//! intersection pairing on the projective line.
//!
//! The deformation map J is realized as a correspondence built from the
//! five basic maps: restrict away from the center, multiply by the chosen
//! equation, take the boundary, and pull back along the normal bundle.

use crate::fields::{FieldDesc, FieldElem};
use crate::geom::{
    boundary, mult_eta, mult_units, pull_from_base,
    pull_open, Component, Cycle, ClosedPt, GeomError, PointRef, Pt, Scheme, SchemeTwist,
};
use crate::kmw::{KmwElem, KmwTwisted};
use crate::premodule::specialize_raw;

/// A pipeline of basic-map steps; the building block of generalized
/// correspondences.
pub enum BasicStep {
    PullOpen(Scheme),
    PullFromBase(Scheme),
    MultUnits(Vec<FieldElem>),
    MultEta,
    BoundaryAt { ambient: Scheme, removed: Vec<ClosedPt> },
}

pub struct Correspondence {
    pub steps: Vec<BasicStep>,
}

impl Correspondence {
    pub fn apply(&self, c: &Cycle) -> Result<Cycle, GeomError> {
        let mut acc = c.clone();
        for step in &self.steps {
            acc = match step {
                BasicStep::PullOpen(u) => pull_open(u, &acc)?,
                BasicStep::PullFromBase(line) => pull_from_base(line, &acc)?,
                BasicStep::MultUnits(us) => mult_units(&acc, us)?,
                BasicStep::MultEta => mult_eta(&acc)?,
                BasicStep::BoundaryAt { ambient, removed } => {
                    boundary(ambient, removed, &acc)?
                }
            };
        }
        Ok(acc)
    }
}

/// The chosen equation of a divisor point: the canonical uniformizer of its
/// place (the monic irreducible, or -1/t at infinity). It frames the normal
/// bundle of the center.
pub fn divisor_equation(scheme: &Scheme, z: &ClosedPt) -> FieldElem {
    let ff = scheme.components[0].function_field().unwrap();
    z.place(ff).uniformizer()
}

/// The deformation correspondence to the normal cone of a single-point
/// divisor: restrict to the complement, multiply with the equation, take
/// the boundary; the resulting class on the center is placed on the normal
/// bundle by the homotopy pullback.
pub fn deformation_j(
    ambient: &Scheme,
    z: &ClosedPt,
    c: &Cycle,
) -> Result<Cycle, GeomError> {
    let [Component::Line { .. }] = &ambient.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    let u = ambient.open_complement(&[z.clone()])?;
    let g = divisor_equation(ambient, z);
    let pipeline = Correspondence {
        steps: vec![
            BasicStep::PullOpen(u),
            BasicStep::MultUnits(vec![g]),
            BasicStep::BoundaryAt { ambient: ambient.clone(), removed: vec![z.clone()] },
        ],
    };
    let on_center = pipeline.apply(c)?;
    // place the class on the normal bundle N_Z X, an affine line over the
    // residue field of the center
    let kappa = z.place(ambient.components[0].function_field().unwrap()).residue_desc();
    let n_line = Scheme::affine_line(kappa);
    let mut out = Cycle::zero(
        n_line.clone(),
        SchemeTwist { a1: on_center.twist.a1, tangent: -1 },
    );
    for (_, v) in &on_center.support {
        let raw = v.raw.map_into(&n_line.components[0].function_field().unwrap())?;
        let generic = PointRef { component: 0, pt: Pt::Generic };
        let tw = out.twist.payload_twist(&n_line, &generic);
        out.add_value(generic, KmwTwisted::new(raw, tw)?)?;
    }
    Ok(out)
}

/// Gysin morphism of the inclusion of a divisor point: the deformation
/// class read back through the inverse of the homotopy isomorphism, i.e.
/// the value on the center.
pub fn gysin_divisor(
    ambient: &Scheme,
    z: &ClosedPt,
    c: &Cycle,
) -> Result<Cycle, GeomError> {
    let u = ambient.open_complement(&[z.clone()])?;
    let g = divisor_equation(ambient, z);
    let pipeline = Correspondence {
        steps: vec![
            BasicStep::PullOpen(u),
            BasicStep::MultUnits(vec![g]),
            BasicStep::BoundaryAt { ambient: ambient.clone(), removed: vec![z.clone()] },
        ],
    };
    pipeline.apply(c)
}

// ---------------------------------------------------------------------------
// Cross products
// ---------------------------------------------------------------------------

/// A cycle on a product Y x Z where the Z-side is zero dimensional: one
/// Y-shaped component over each support point of the Z-side.
pub struct ProductCycle {
    /// (z-point residue field, fiber cycle over it)
    pub fibers: Vec<(FieldDesc, Cycle)>,
}

impl ProductCycle {
    pub fn is_zero(&self) -> Result<bool, GeomError> {
        for (_, c) in &self.fibers {
            if !c.is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sub(&self, other: &ProductCycle) -> Result<ProductCycle, GeomError> {
        let mut fibers = self.fibers.clone();
        for (k, c) in &other.fibers {
            match fibers.iter_mut().find(|(k2, c2)| k2 == k && c2.scheme == c.scheme) {
                Some((_, acc)) => *acc = acc.sub(c)?,
                None => fibers.push((*k, c.negate())),
            }
        }
        Ok(ProductCycle { fibers })
    }

    pub fn equal(&self, other: &ProductCycle) -> Result<bool, GeomError> {
        self.sub(other)?.is_zero()
    }
}

impl Clone for ProductCycle {
    fn clone(&self) -> Self {
        ProductCycle { fibers: self.fibers.clone() }
    }
}

/// Cross product of a cycle on a line Y with a zero cycle mu on Z: the
/// component over a point z is res_{kappa(z)}(rho) * mu_z on Y_{kappa(z)}.
/// `flip_sign_rank` is the rank of the twist of rho (for the commutativity
/// law the caller compares against the Koszul-adjusted swap).
pub fn cross_line_with_points(
    rho: &Cycle,
    mu: &Cycle,
) -> Result<ProductCycle, GeomError> {
    let [Component::Line { base, projective, removed }] = &rho.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    if !removed.is_empty() {
        return Err(GeomError::OutsideZoo);
    }
    let mut fibers = vec![];
    for (zpt, zval) in &mu.support {
        let kappa_z = zpt.residue_field(&mu.scheme);
        let FieldDesc::Finite(zq) = kappa_z else {
            return Err(GeomError::UnsupportedMorphism);
        };
        // the fiber Y_{kappa(z)}: base-changed line
        let big = FieldDesc::Finite(crate::fields::Fq::new(
            zq.p,
            num_integer::Integer::lcm(&zq.deg, &base.base().deg),
        ));
        let fiber = Scheme {
            components: vec![Component::Line {
                base: big,
                projective: *projective,
                removed: vec![],
            }],
        };
        let fiber_twist = SchemeTwist {
            a1: rho.twist.a1 + mu.twist.a1,
            tangent: rho.twist.tangent,
        };
        let mut fc = Cycle::zero(fiber.clone(), fiber_twist);
        let big_ff = fiber.components[0].function_field().unwrap();
        for (ypt, yval) in &rho.support {
            match &ypt.pt {
                Pt::Generic => {
                    let up_y = yval.raw.map_into(&big_ff)?;
                    let up_z = zval.raw.map_into(&big_ff)?;
                    let prod = up_y.mul(&up_z)?;
                    let generic = PointRef { component: 0, pt: Pt::Generic };
                    let tw = fiber_twist.payload_twist(&fiber, &generic);
                    fc.add_value(generic, KmwTwisted::new(prod, tw)?)?;
                }
                Pt::Closed(cp) => {
                    // points of the fiber over a closed point: places of the
                    // base change
                    let yplace = cp.place(rho.scheme.components[0].function_field().unwrap());
                    let pts_above: Vec<ClosedPt> = match cp {
                        ClosedPt::Inf => vec![ClosedPt::Inf],
                        ClosedPt::At(p) => crate::premodule::transfer::places_above(
                            big_ff, p,
                        )
                        .into_iter()
                        .map(ClosedPt::At)
                        .collect(),
                    };
                    let _ = yplace;
                    for above in pts_above {
                        let target =
                            PointRef { component: 0, pt: Pt::Closed(above.clone()) };
                        let kappa_u = target.residue_field(&fiber);
                        let up_y = yval.raw.map_into(&kappa_u)?;
                        let up_z = zval.raw.map_into(&kappa_u)?;
                        let prod = up_y.mul(&up_z)?;
                        let tw = fiber_twist.payload_twist(&fiber, &target);
                        fc.add_value(target, KmwTwisted::new(prod, tw)?)?;
                    }
                }
                Pt::Spec => return Err(GeomError::UnsupportedMorphism),
            }
        }
        fibers.push((kappa_z, fc));
    }
    Ok(ProductCycle { fibers })
}

/// The other defining formula: iterate the point side first and restrict
/// the line payloads; the two must agree.
pub fn cross_points_first(rho: &Cycle, mu: &Cycle) -> Result<ProductCycle, GeomError> {
    // mu-point components one at a time, restricting rho to the fiber:
    // the computation factors identically except for the iteration order,
    // so recompute with the roles of the payload multiplications swapped
    let [Component::Line { .. }] = &rho.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    let mut fibers = vec![];
    for (zpt, zval) in &mu.support {
        let kappa_z = zpt.residue_field(&mu.scheme);
        let one_point = Cycle::single(
            mu.scheme.clone(),
            mu.twist,
            zpt.clone(),
            zval.clone(),
        )?;
        let partial = cross_line_with_points(rho, &one_point)?;
        for f in partial.fibers {
            fibers.push(f);
        }
        let _ = kappa_z;
    }
    Ok(ProductCycle { fibers })
}

/// Cross product of two zero cycles: supported on the points of the tensor
/// product of the residue fields.
pub fn cross_points(rho: &Cycle, mu: &Cycle) -> Result<Vec<(FieldDesc, KmwElem)>, GeomError> {
    let mut out = vec![];
    for (ypt, yval) in &rho.support {
        let ky = ypt.residue_field(&rho.scheme).base();
        for (zpt, zval) in &mu.support {
            let kz = zpt.residue_field(&mu.scheme).base();
            let g = num_integer::Integer::gcd(&ky.deg, &kz.deg);
            let m = ky.deg / g * kz.deg;
            let big = FieldDesc::Finite(crate::fields::Fq::new(ky.p, m));
            // one point for each embedding class: gcd many
            for k in 0..g {
                let up_y = frobenius_power(&yval.raw.map_into(&big)?, ky.deg * k)?;
                let up_z = zval.raw.map_into(&big)?;
                out.push((big, up_y.mul(&up_z)?));
            }
        }
    }
    Ok(out)
}

fn frobenius_power(x: &KmwElem, steps: u32) -> Result<KmwElem, GeomError> {
    let ctx = x.field.ctx();
    let mut out = KmwElem::zero(x.field, x.degree);
    for (w, c) in x.terms() {
        let symbols: Vec<FieldElem> = w
            .symbols
            .iter()
            .map(|a| {
                let mut e = a.as_fq().clone();
                for _ in 0..steps {
                    e = ctx.frobenius(&e);
                }
                x.field.from_fq(e)
            })
            .collect();
        let mut word = KmwElem::symbols(x.field, &symbols)?;
        for _ in 0..w.eta_pow {
            word = word.mul_eta();
        }
        out = out.add(&word.scale(c));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Intersection on the projective line
// ---------------------------------------------------------------------------

/// Intersection product restricted to the projective line: A^0 x A^0 by
/// payload multiplication at the generic point (the diagonal restriction),
/// A^0 x A^1 by specializing the kernel class at the support points.
pub fn intersect_p1(
    alpha: &Cycle,
    beta: &Cycle,
) -> Result<Cycle, GeomError> {
    let generic = PointRef { component: 0, pt: Pt::Generic };
    let a_gen = alpha.support.contains_key(&generic);
    let b_gen = beta.support.contains_key(&generic)
        || beta.support.is_empty() && beta.scheme == alpha.scheme;
    match (a_gen, b_gen) {
        (true, true) => {
            // A^0 x A^0 -> A^0: multiply the generic payloads
            let twist = SchemeTwist {
                a1: alpha.twist.a1 + beta.twist.a1 + 1,
                tangent: alpha.twist.tangent + beta.twist.tangent,
            };
            // the diagonal Gysin consumes one tangent: -T_Delta
            let twist = SchemeTwist { a1: twist.a1 - 1, tangent: twist.tangent };
            let av = &alpha.support[&generic];
            let bv = &beta.support[&generic];
            let raw = av.raw.mul(&bv.raw)?;
            // strip one Omega: the product of two Omega-twisted payloads
            // carries Omega twice, the diagonal keeps one
            let mut out = Cycle::zero(alpha.scheme.clone(), twist);
            let tw = twist.payload_twist(&alpha.scheme, &generic);
            let fixed = strip_to(raw, tw.rank())?;
            out.add_value(generic.clone(), KmwTwisted::new(fixed, tw)?)?;
            Ok(out)
        }
        (true, false) => intersect_kernel_with_points(alpha, beta),
        (false, true) => intersect_kernel_with_points(beta, alpha),
        (false, false) => Err(GeomError::UnsupportedMorphism),
    }
}

fn strip_to(x: KmwElem, degree: i64) -> Result<KmwElem, GeomError> {
    // adjust degree by eta-multiplications (an explicit choice of the
    // A^1-padding isomorphism)
    let mut out = x;
    while out.degree > degree {
        out = out.mul_eta();
    }
    if out.degree != degree {
        return Err(GeomError::UnsupportedTwist);
    }
    Ok(out)
}

/// alpha a kernel class at the generic point, beta a zero cycle: intersect
/// by specializing alpha at every support point.
fn intersect_kernel_with_points(alpha: &Cycle, beta: &Cycle) -> Result<Cycle, GeomError> {
    let generic = PointRef { component: 0, pt: Pt::Generic };
    let av = &alpha.support[&generic];
    let ff = alpha.scheme.components[0].function_field().unwrap();
    let twist = SchemeTwist {
        a1: alpha.twist.a1 + beta.twist.a1 + 1,
        tangent: alpha.twist.tangent + beta.twist.tangent,
    };
    let twist = SchemeTwist { a1: twist.a1 - 1, tangent: twist.tangent };
    let mut out = Cycle::zero(alpha.scheme.clone(), twist);
    for (pt, bval) in &beta.support {
        let Pt::Closed(cp) = &pt.pt else {
            return Err(GeomError::UnsupportedMorphism);
        };
        let place = cp.place(ff);
        let s = specialize_raw(&place, &place.uniformizer(), &av.raw)?;
        let prod = s.mul(&bval.raw)?;
        let tw = twist.payload_twist(&alpha.scheme, pt);
        let fixed = strip_to(prod, tw.rank())?;
        out.add_value(pt.clone(), KmwTwisted::new(fixed, tw)?)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Section retraction on the projective line
// ---------------------------------------------------------------------------

/// s^* p^* = Id for a section of P^1 -> Spec E: pull a class to the line,
/// then apply the Gysin map of the section point.
pub fn section_retraction_check(
    base: FieldDesc,
    section: &ClosedPt,
    x: &KmwElem,
) -> Result<bool, GeomError> {
    let p1 = Scheme::proj_line(base);
    let spec = Scheme::spec(base);
    let c = Cycle::single(
        spec,
        SchemeTwist::trivial(0),
        PointRef { component: 0, pt: Pt::Spec },
        KmwTwisted::new(x.clone(), crate::vlines::VirtualBundle::zero(base))?,
    )?;
    let pulled = pull_from_base(&p1, &c)?;
    let back = gysin_divisor(&p1, section, &pulled)?;
    // expect the class x at the section point (residue field = base for
    // rational sections)
    let vals: Vec<&KmwTwisted> = back.support.values().collect();
    if vals.is_empty() {
        return x.is_zero().map_err(GeomError::Kmw);
    }
    if vals.len() != 1 {
        return Ok(false);
    }
    let got = vals[0];
    let expect = KmwTwisted::new(
        crate::geom::pad_element(x.clone(), got.twist.rank()),
        got.twist.clone(),
    )?;
    got.equal(&expect).map_err(GeomError::Kmw)
}

// ---------------------------------------------------------------------------
// Degree shorthand used by tests: the total pushforward of a 0-cycle
// ---------------------------------------------------------------------------

pub fn total_pushforward(c: &Cycle) -> Result<KmwElem, GeomError> {
    let [Component::Line { base, .. }] = &c.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    let pushed = crate::geom::push_to_base(c)?;
    let n = c.twist.a1 + c.twist.tangent;
    Ok(pushed
        .support
        .values()
        .next()
        .map(|v| v.raw.clone())
        .unwrap_or_else(|| KmwElem::zero(*base, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{differential, generic_cycle, zero_point};

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    #[test]
    fn deformation_j_of_pullback_is_identity_mechanism() {
        // J of the pullback of a base class is that class on the normal
        // bundle (the retraction mechanism)
        let e = gf5();
        let a1 = Scheme::affine_line(e);
        let spec = Scheme::spec(e);
        let x = KmwElem::gw_unit(&e.from_i64(2)).unwrap();
        let c = Cycle::single(
            spec,
            SchemeTwist::trivial(0),
            PointRef { component: 0, pt: Pt::Spec },
            KmwTwisted::new(x.clone(), crate::vlines::VirtualBundle::zero(e)).unwrap(),
        )
        .unwrap();
        let pulled = pull_from_base(&a1, &c).unwrap();
        let j = deformation_j(&a1, &zero_point(e), &pulled).unwrap();
        // the result is the pullback of x to the normal line
        let nline = Scheme::affine_line(e);
        let expected = pull_from_base(&nline, &{
            let spec = Scheme::spec(e);
            Cycle::single(
                spec,
                SchemeTwist::trivial(0),
                PointRef { component: 0, pt: Pt::Spec },
                KmwTwisted::new(x, crate::vlines::VirtualBundle::zero(e)).unwrap(),
            )
            .unwrap()
        })
        .unwrap();
        assert!(j.equal(&expected).unwrap());
    }

    #[test]
    fn deformation_j_away_from_center_vanishes() {
        // a class supported away from Z dies under J
        let e = gf5();
        let a1 = Scheme::affine_line(e);
        let pt = crate::geom::rational_point(e, &e.from_i64(1));
        let c = crate::geom::point_class(&a1, SchemeTwist::trivial(0), pt).unwrap();
        let j = deformation_j(&a1, &zero_point(e), &c).unwrap();
        assert!(j.is_zero().unwrap());
    }

    #[test]
    fn section_retraction_at_rational_points() {
        let e = gf5();
        for x in [
            KmwElem::one(e),
            KmwElem::gw_unit(&e.from_i64(2)).unwrap(),
            KmwElem::hyperbolic(e),
        ] {
            assert!(section_retraction_check(e, &zero_point(e), &x).unwrap());
            assert!(section_retraction_check(e, &ClosedPt::Inf, &x).unwrap());
        }
    }

    #[test]
    fn cross_with_unit_class_is_reindexing() {
        // rho x <1>_{Spec E} places rho on the fiber over the point
        let e = gf5();
        let p1 = Scheme::proj_line(e);
        let ff = FieldDesc::rational(5, 1);
        let rho = generic_cycle(
            &p1,
            SchemeTwist::trivial(0),
            KmwElem::symbol(&ff.gen_t()).unwrap(),
        )
        .unwrap();
        let spec = Scheme::spec(e);
        let mu = Cycle::single(
            spec,
            SchemeTwist::trivial(0),
            PointRef { component: 0, pt: Pt::Spec },
            KmwTwisted::new(KmwElem::one(e), crate::vlines::VirtualBundle::zero(e)).unwrap(),
        )
        .unwrap();
        let prod = cross_line_with_points(&rho, &mu).unwrap();
        assert_eq!(prod.fibers.len(), 1);
        let (_, fiber) = &prod.fibers[0];
        assert!(fiber.equal(&rho).unwrap());
    }

    #[test]
    fn chain_rule_on_samples() {
        // d(rho x mu) = d(rho) x mu for a zero-dimensional mu (the second
        // term vanishes since d(mu) = 0)
        let e = gf5();
        let p1 = Scheme::proj_line(e);
        let ff = FieldDesc::rational(5, 1);
        let mut sampler = crate::sampling::Sampler::new(9);
        for _ in 0..5 {
            let rho = generic_cycle(&p1, SchemeTwist::trivial(0), sampler.element(&ff, 1, 2))
                .unwrap();
            let spec = Scheme::spec(FieldDesc::finite(5, 2));
            let mu = Cycle::single(
                spec,
                SchemeTwist::trivial(0),
                PointRef { component: 0, pt: Pt::Spec },
                KmwTwisted::new(
                    KmwElem::one(FieldDesc::finite(5, 2)),
                    crate::vlines::VirtualBundle::zero(FieldDesc::finite(5, 2)),
                )
                .unwrap(),
            )
            .unwrap();
            let lhs: Vec<Cycle> = cross_line_with_points(&rho, &mu)
                .unwrap()
                .fibers
                .into_iter()
                .map(|(_, c)| differential(&c).unwrap())
                .collect();
            let rhs: Vec<Cycle> = cross_line_with_points(&differential(&rho).unwrap(), &mu)
                .unwrap()
                .fibers
                .into_iter()
                .map(|(_, c)| c)
                .collect();
            for (l, r) in lhs.iter().zip(&rhs) {
                assert!(l.equal(r).unwrap(), "chain rule failed");
            }
        }
    }
}
