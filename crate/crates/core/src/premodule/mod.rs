//! Cycle premodule structure on Milnor-Witt K-theory (and on classical
//! Milnor K-theory through the rank-grading functor): restriction,
//! corestriction, the K^MW-action, twisted residues and specialization.
//!
//! The twisted residue prepends the dual normal line with the frame of the
//! canonical uniformizer; the differential form consumes the leading
//! Kähler-twist, which costs the unit <-pi'(t)> at a finite place and <-1>
//! at infinity.

pub mod transfer;
pub mod verify;

pub use verify::{verify_rule, Rule, RuleReport};

use crate::fields::{FieldDesc, FieldElem, Fq, FqEl, Place};
use crate::kmw::shadows::{milnor_residue, milnor_shadow, MilnorElem};
use crate::kmw::{residue_pair, KmwElem, KmwError, KmwTwisted};
use crate::vlines::{LineName, VirtualBundle};
use num_bigint::BigInt;

/// A morphism of tower fields: a canonical embedding or an endomorphism of
/// a rational function field given by the image of the variable.
#[derive(Clone, Debug)]
pub enum FieldMor {
    Embed { from: FieldDesc, to: FieldDesc },
    Substitute { field: FieldDesc, image: FieldElem },
}

impl FieldMor {
    pub fn source(&self) -> FieldDesc {
        match self {
            FieldMor::Embed { from, .. } => *from,
            FieldMor::Substitute { field, .. } => *field,
        }
    }

    pub fn target(&self) -> FieldDesc {
        match self {
            FieldMor::Embed { to, .. } => *to,
            FieldMor::Substitute { field, .. } => *field,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FieldMor::Embed { from, to } => {
                from.transcendence_degree() == to.transcendence_degree()
            }
            FieldMor::Substitute { .. } => true,
        }
    }

    pub fn apply(&self, a: &FieldElem) -> Result<FieldElem, KmwError> {
        match self {
            FieldMor::Embed { to, .. } => a.map_into(to).map_err(KmwError::Field),
            FieldMor::Substitute { image, .. } => Ok(a.substitute(image)),
        }
    }
}

/// A value of a cycle premodule: the K^MW instance, or the classical Milnor
/// instance graded by twist ranks (eta acts as zero there).
#[derive(Clone, Debug)]
pub enum MValue {
    Kmw(KmwTwisted),
    Milnor { elem: MilnorElem, twist: VirtualBundle },
}

impl MValue {
    pub fn kmw(x: KmwTwisted) -> MValue {
        MValue::Kmw(x)
    }

    pub fn twist(&self) -> &VirtualBundle {
        match self {
            MValue::Kmw(x) => &x.twist,
            MValue::Milnor { twist, .. } => twist,
        }
    }

    pub fn field(&self) -> FieldDesc {
        match self {
            MValue::Kmw(x) => x.raw.field,
            MValue::Milnor { elem, .. } => elem.field,
        }
    }

    pub fn zero_like(&self, twist: VirtualBundle) -> MValue {
        match self {
            MValue::Kmw(_) => MValue::Kmw(KmwTwisted::zero(twist)),
            MValue::Milnor { .. } => {
                MValue::Milnor { elem: MilnorElem::zero(twist.field, twist.rank()), twist }
            }
        }
    }

    pub fn add(&self, other: &MValue) -> Result<MValue, KmwError> {
        match (self, other) {
            (MValue::Kmw(a), MValue::Kmw(b)) => Ok(MValue::Kmw(a.add(b)?)),
            (MValue::Milnor { elem: a, twist }, MValue::Milnor { elem: b, .. }) => {
                let mut e = a.clone();
                for (w, c) in &b.terms {
                    let entry = e.terms.entry(w.clone()).or_insert_with(|| BigInt::from(0));
                    *entry += c;
                    if num_traits::Zero::is_zero(entry) {
                        e.terms.remove(w);
                    }
                }
                Ok(MValue::Milnor { elem: e, twist: twist.clone() })
            }
            _ => Err(KmwError::FieldMismatch),
        }
    }

    pub fn negate(&self) -> MValue {
        match self {
            MValue::Kmw(a) => MValue::Kmw(a.negate()),
            MValue::Milnor { elem, twist } => {
                let mut e = MilnorElem::zero(elem.field, elem.degree);
                for (w, c) in &elem.terms {
                    e.terms.insert(w.clone(), -c);
                }
                MValue::Milnor { elem: e, twist: twist.clone() }
            }
        }
    }

    pub fn sub(&self, other: &MValue) -> Result<MValue, KmwError> {
        self.add(&other.negate())
    }

    pub fn is_zero(&self) -> Result<bool, KmwError> {
        match self {
            MValue::Kmw(a) => a.is_zero(),
            MValue::Milnor { elem, .. } => crate::kmw::shadows::milnor_is_zero(elem),
        }
    }

    /// Equality after reframing to a common twist when needed.
    pub fn equal(&self, other: &MValue) -> Result<bool, KmwError> {
        match (self, other) {
            (MValue::Kmw(a), MValue::Kmw(b)) => a.equal(b),
            (MValue::Milnor { elem: a, .. }, MValue::Milnor { elem: b, .. }) => {
                // frame data acts trivially on the Milnor instance
                if a.degree != b.degree || a.field != b.field {
                    return Err(KmwError::DegreeMismatch);
                }
                let mut diff = a.clone();
                for (w, c) in &b.terms {
                    let entry =
                        diff.terms.entry(w.clone()).or_insert_with(|| BigInt::from(0));
                    *entry -= c;
                    if num_traits::Zero::is_zero(entry) {
                        diff.terms.remove(w);
                    }
                }
                crate::kmw::shadows::milnor_is_zero(&diff)
            }
            _ => Err(KmwError::FieldMismatch),
        }
    }
}

// ---------------------------------------------------------------------------
// D1: restriction
// ---------------------------------------------------------------------------

pub fn res(phi: &FieldMor, x: &MValue) -> Result<MValue, KmwError> {
    match x {
        MValue::Kmw(v) => {
            let raw = match phi {
                FieldMor::Embed { to, .. } => v.raw.map_into(to)?,
                FieldMor::Substitute { image, .. } => v.raw.substitute(image),
            };
            let twist = transport_twist(phi, &v.twist)?;
            Ok(MValue::Kmw(KmwTwisted::new(raw, twist)?))
        }
        MValue::Milnor { elem, twist } => {
            let target = phi.target();
            let mut out = MilnorElem::zero(target, elem.degree);
            for (w, c) in &elem.terms {
                let sym = w
                    .iter()
                    .map(|a| phi.apply(a))
                    .collect::<Result<Vec<_>, _>>()?;
                out.terms.insert(sym, c.clone());
            }
            Ok(MValue::Milnor { elem: out, twist: transport_twist(phi, twist)? })
        }
    }
}

fn transport_twist(phi: &FieldMor, v: &VirtualBundle) -> Result<VirtualBundle, KmwError> {
    match phi {
        FieldMor::Embed { to, .. } => Ok(v.map_into(to)),
        FieldMor::Substitute { field, image } => {
            // Omega atoms of the field itself pull back with the unit g'(t)
            let deriv = rat_derivative(image)?;
            if deriv.is_zero() {
                return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
            }
            let mut unit = v.unit.substitute(image);
            for s in &v.summands {
                if s.line == LineName::Omega(*field) {
                    unit = if s.dual { unit.div(&deriv) } else { unit.mul(&deriv) };
                }
            }
            Ok(VirtualBundle { field: *field, summands: v.summands.clone(), unit })
        }
    }
}

fn rat_derivative(a: &FieldElem) -> Result<FieldElem, KmwError> {
    let FieldDesc::RatFunc(..) = a.field else {
        return Err(KmwError::FieldMismatch);
    };
    let ctx = a.field.ctx();
    let r = a.as_rat();
    let num = r.num.derivative(&ctx).mul(&ctx, &r.den).sub(
        &ctx,
        &r.num.mul(&ctx, &r.den.derivative(&ctx)),
    );
    let den = r.den.mul(&ctx, &r.den);
    Ok(FieldElem::rat(a.field, crate::fields::RatEl::new(&ctx, num, den)))
}

// ---------------------------------------------------------------------------
// D2: corestriction
// ---------------------------------------------------------------------------

pub fn cores(phi: &FieldMor, x: &MValue) -> Result<MValue, KmwError> {
    let FieldMor::Embed { from, to } = phi else {
        return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
    };
    match x {
        MValue::Kmw(v) => {
            if v.raw.field != *to {
                return Err(KmwError::FieldMismatch);
            }
            match (from, to) {
                (FieldDesc::Finite(sub), FieldDesc::Finite(_)) => {
                    Ok(MValue::Kmw(transfer::finite_transfer(*sub, v, None)?))
                }
                (FieldDesc::RatFunc(..), FieldDesc::RatFunc(..)) => {
                    Ok(MValue::Kmw(transfer::const_ext_transfer(*from, v)?))
                }
                _ => Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension)),
            }
        }
        MValue::Milnor { elem, twist } => {
            // transfers descend to the eta-quotient: lift, transfer, project
            let lifted = milnor_lift(elem)?;
            let ltwist = twist_over(*to, twist, elem.degree)?;
            let tr = cores(phi, &MValue::Kmw(KmwTwisted::new(lifted, ltwist)?))?;
            let MValue::Kmw(trv) = tr else { unreachable!() };
            Ok(MValue::Milnor {
                elem: milnor_shadow(&trv.raw),
                twist: transport_to(from, twist)?,
            })
        }
    }
}

fn milnor_lift(m: &MilnorElem) -> Result<KmwElem, KmwError> {
    let mut out = KmwElem::zero(m.field, m.degree);
    for (w, c) in &m.terms {
        out = out.add(&KmwElem::symbols(m.field, w)?.scale(c));
    }
    Ok(out)
}

fn twist_over(
    field: FieldDesc,
    model: &VirtualBundle,
    degree: i64,
) -> Result<VirtualBundle, KmwError> {
    let _ = model;
    Ok(VirtualBundle::omega(field).sum(&VirtualBundle::trivial(
        field,
        degree - VirtualBundle::omega(field).rank(),
    )))
}

fn transport_to(target: &FieldDesc, v: &VirtualBundle) -> Result<VirtualBundle, KmwError> {
    Ok(VirtualBundle { field: *target, summands: v.summands.clone(), unit: target.one() })
}

/// Corestriction along a finite-field extension with an explicit generator
/// (used by the generator-independence checks).
pub fn cores_with_generator(
    sub: Fq,
    x: &KmwTwisted,
    generator: FqEl,
) -> Result<KmwTwisted, KmwError> {
    transfer::finite_transfer(sub, x, Some(generator))
}

// ---------------------------------------------------------------------------
// D3: the K^MW-action
// ---------------------------------------------------------------------------

pub fn act(x: &KmwTwisted, rho: &MValue) -> Result<MValue, KmwError> {
    match rho {
        MValue::Kmw(v) => Ok(MValue::Kmw(v.act(x)?)),
        MValue::Milnor { elem, twist } => {
            // eta acts as zero: only the eta-free part of x survives
            let shadow = milnor_shadow(&x.raw);
            let mut out = MilnorElem::zero(elem.field, elem.degree + shadow.degree);
            for (w1, c1) in &shadow.terms {
                for (w2, c2) in &elem.terms {
                    let mut w = w1.clone();
                    w.extend(w2.iter().cloned());
                    out.add_term(w, c1 * c2);
                }
            }
            Ok(MValue::Milnor { elem: out, twist: x.twist.sum(twist) })
        }
    }
}

// ---------------------------------------------------------------------------
// D4: residues and specialization
// ---------------------------------------------------------------------------

/// The twisted residue: output twisted by the dual normal line, frame of the
/// canonical uniformizer, in front of the reduced input twist.
pub fn residue(v: &Place, x: &MValue) -> Result<MValue, KmwError> {
    match x {
        MValue::Kmw(val) => {
            let pair = residue_pair(v, &val.raw)?;
            let twist = VirtualBundle::normal(v)
                .negate()
                .sum(&reduce_twist(v, &val.twist)?);
            Ok(MValue::Kmw(KmwTwisted::new(pair.bound, twist)?))
        }
        MValue::Milnor { elem, twist } => {
            let out = milnor_residue(v, elem);
            let twist = VirtualBundle::normal(v)
                .negate()
                .sum(&reduce_twist(v, twist)?);
            Ok(MValue::Milnor { elem: out, twist })
        }
    }
}

fn reduce_twist(v: &Place, t: &VirtualBundle) -> Result<VirtualBundle, KmwError> {
    let unit = v.reduce_elem(&t.unit).map_err(KmwError::Field)?;
    Ok(VirtualBundle {
        field: v.residue_desc(),
        summands: t.summands.clone(),
        unit,
    })
}

/// The residue in the differential normalization: the leading Kähler twist
/// is consumed against the normal line, multiplying by <-pi'> (and by <-1>
/// at infinity).
pub fn differential_residue(v: &Place, x: &KmwTwisted) -> Result<KmwTwisted, KmwError> {
    let leading_ok = x
        .twist
        .summands
        .first()
        .map(|s| s.line == LineName::Omega(x.raw.field) && !s.dual && !s.neg)
        .unwrap_or(false);
    if !leading_ok {
        return Err(KmwError::TwistMismatch);
    }
    let pair = residue_pair(v, &x.raw)?;
    let kappa = v.residue_desc();
    let corr = kappa.from_fq(v.uniformizer_derivative()).neg();
    let raw = crate::kmw::KmwElem::gw_unit(&corr)?.mul(&pair.bound)?;
    let rest = VirtualBundle {
        field: x.raw.field,
        summands: x.twist.summands[1..].to_vec(),
        unit: x.twist.unit.clone(),
    };
    Ok(KmwTwisted::new(raw, reduce_twist(v, &rest)?)?)
}

/// Milnor-instance differential residue: the frame units act trivially.
pub fn milnor_differential_residue(
    v: &Place,
    elem: &MilnorElem,
    twist: &VirtualBundle,
) -> Result<(MilnorElem, VirtualBundle), KmwError> {
    let leading_ok = twist
        .summands
        .first()
        .map(|s| matches!(s.line, LineName::Omega(_)) && !s.dual && !s.neg)
        .unwrap_or(false);
    if !leading_ok {
        return Err(KmwError::TwistMismatch);
    }
    let out = milnor_residue(v, elem);
    let rest = VirtualBundle {
        field: elem.field,
        summands: twist.summands[1..].to_vec(),
        unit: twist.unit.clone(),
    };
    Ok((out, reduce_twist(v, &rest)?))
}

/// Raw specialization with respect to an arbitrary uniformizer pi = u pi_0:
/// s^pi(x) = <-u-bar> d^{pi_0}([-pi] x).
pub fn specialize_raw(v: &Place, pi: &FieldElem, x: &KmwElem) -> Result<KmwElem, KmwError> {
    if v.valuation(pi) != Ok(1) {
        return Err(KmwError::Field(crate::fields::FieldError::NotAUnit));
    }
    let u = pi.div(&v.uniformizer());
    let ubar = v.reduce_elem(&u).map_err(KmwError::Field)?;
    let shifted = KmwElem::symbol(&pi.neg())?.mul(x)?;
    let pair = residue_pair(v, &shifted)?;
    KmwElem::gw_unit(&ubar.neg())?.mul(&pair.bound)
}

/// Twisted specialization: the twist survives, reduced to the residue field.
pub fn specialize(v: &Place, pi: &FieldElem, x: &MValue) -> Result<MValue, KmwError> {
    match x {
        MValue::Kmw(val) => {
            let raw = specialize_raw(v, pi, &val.raw)?;
            Ok(MValue::Kmw(KmwTwisted::new(raw, reduce_twist(v, &val.twist)?)?))
        }
        MValue::Milnor { elem, twist } => {
            // s^pi mod eta: residue of {-pi} * x
            let mut shifted = MilnorElem::zero(elem.field, elem.degree + 1);
            for (w, c) in &elem.terms {
                let mut sym = vec![pi.neg()];
                sym.extend(w.iter().cloned());
                shifted.terms.insert(sym, c.clone());
            }
            let out = milnor_residue(v, &shifted);
            Ok(MValue::Milnor { elem: out, twist: reduce_twist(v, twist)? })
        }
    }
}

/// Convenience: build an Omega-twisted value over a function field.
pub fn omega_value(raw: KmwElem) -> Result<KmwTwisted, KmwError> {
    let field = raw.field;
    let om = VirtualBundle::omega(field);
    let pad = raw.degree - om.rank();
    KmwTwisted::new(raw, om.sum(&VirtualBundle::trivial(field, pad)))
}

/// The evaluation M(x, V) at a point with residue field kappa: the twist
/// Omega_kappa + V with the Kähler part leading.
pub fn point_twist(kappa: FieldDesc, v: &VirtualBundle) -> VirtualBundle {
    VirtualBundle::omega(kappa).sum(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Poly;

    fn gf5t() -> FieldDesc {
        FieldDesc::rational(5, 1)
    }

    fn tplace() -> Place {
        let f = gf5t();
        Place::finite(f, Poly::x(&f.ctx())).unwrap()
    }

    #[test]
    fn res_along_identity_is_identity() {
        let f = gf5t();
        let x = omega_value(
            KmwElem::symbols(f, &[f.gen_t(), f.from_i64(2)]).unwrap(),
        )
        .unwrap();
        let phi = FieldMor::Embed { from: f, to: f };
        let y = res(&phi, &MValue::kmw(x.clone())).unwrap();
        assert!(y.equal(&MValue::kmw(x)).unwrap());
    }

    #[test]
    fn res_of_square_becomes_trivial_form() {
        // <2> over GF(5) becomes <1> over GF(25): 2 is a square there
        let e = FieldDesc::finite(5, 1);
        let f25 = FieldDesc::finite(5, 2);
        let x = KmwTwisted::new(
            KmwElem::gw_unit(&e.from_i64(2)).unwrap(),
            VirtualBundle::zero(e),
        )
        .unwrap();
        let phi = FieldMor::Embed { from: e, to: f25 };
        let y = res(&phi, &MValue::kmw(x)).unwrap();
        let one = MValue::kmw(
            KmwTwisted::new(KmwElem::one(f25), VirtualBundle::zero(f25)).unwrap(),
        );
        assert!(y.equal(&one).unwrap());
    }

    #[test]
    fn specialization_composite_matches_pair() {
        // s with the canonical uniformizer agrees with the first component
        // of the residue pair
        let f = gf5t();
        let v = tplace();
        let mut sampler = crate::sampling::Sampler::new(11);
        for _ in 0..20 {
            let x = sampler.element(&f, 1, 2);
            let via_composite = specialize_raw(&v, &v.uniformizer(), &x).unwrap();
            let via_pair = residue_pair(&v, &x).unwrap().spec;
            assert!(via_composite.equal(&via_pair).unwrap());
        }
    }

    #[test]
    fn uniformizer_change_for_specialization() {
        // s^{pi'}(x) = s^pi(x) - [u-bar] d^{pi'}(x) with pi' = u pi
        let f = gf5t();
        let v = tplace();
        let u = f.from_i64(2);
        let pi = v.uniformizer();
        let pi_prime = pi.mul(&u);
        let mut sampler = crate::sampling::Sampler::new(23);
        for _ in 0..20 {
            let x = sampler.element(&f, 1, 2);
            let lhs = specialize_raw(&v, &pi_prime, &x).unwrap();
            // d^{pi'} = <u-bar>^{-1}-weighted canonical residue: d^{pi}(x) =
            // <u-bar> d^{pi'}(x), so d^{pi'}(x) = <u-bar> d^{pi}(x)
            let ubar = v.reduce_elem(&u).unwrap();
            let dpi = residue_pair(&v, &x).unwrap().bound;
            let dpi_prime = KmwElem::gw_unit(&ubar).unwrap().mul(&dpi).unwrap();
            let corr = KmwElem::symbol(&ubar).unwrap().mul(&dpi_prime).unwrap();
            let rhs = specialize_raw(&v, &pi, &x).unwrap().sub(&corr);
            assert!(lhs.equal(&rhs).unwrap(), "uniformizer change failed");
        }
    }

    #[test]
    fn finite_transfer_identity_and_unit_class() {
        let e = Fq::new(3, 1);
        let f9 = FieldDesc::finite(3, 2);
        // Tr(1): rank 2 class (the trace form of GF(9)/GF(3))
        let x = KmwTwisted::new(KmwElem::one(f9), VirtualBundle::zero(f9)).unwrap();
        let tr = transfer::finite_transfer(e, &x, None).unwrap();
        let cls = crate::kmw::gw_classify(&tr.raw).unwrap();
        assert_eq!(cls.rank, BigInt::from(2));
        // identity transfer
        let y = KmwTwisted::new(
            KmwElem::gw_unit(&FieldDesc::finite(3, 1).from_i64(2)).unwrap(),
            VirtualBundle::zero(FieldDesc::finite(3, 1)),
        )
        .unwrap();
        let id = transfer::finite_transfer(e, &y, None).unwrap();
        assert!(id.raw.equal(&y.raw).unwrap());
    }

    #[test]
    fn transfer_characterization_on_samples() {
        // sum_x Tr(d_x gamma) + d_inf gamma = 0 over GF(5)(t)
        let f = gf5t();
        let mut sampler = crate::sampling::Sampler::new(5);
        for _ in 0..10 {
            let raw = sampler.element(&f, 1, 2);
            let gamma = omega_value(raw).unwrap();
            let mut total = KmwElem::zero(FieldDesc::finite(5, 1), 0);
            for y in transfer::twisted_support(&gamma.raw) {
                let dy = differential_residue(&y, &gamma).unwrap();
                let down =
                    transfer::finite_transfer(Fq::new(5, 1), &dy, None).unwrap();
                total = total.add(&down.raw);
            }
            assert!(total.is_zero().unwrap(), "reciprocity failed: {total}");
        }
    }
}
