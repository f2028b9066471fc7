//! Desk-scale schemes (points, affine and projective lines over finite
//! fields, finite closed subschemes and their complements, disjoint
//! unions), cycles with coefficients in the K^MW premodule, the five basic
//! maps and the differential of the cycle complex.

pub mod homology;

use crate::fields::{FieldDesc, FieldElem, Place, Poly};
use crate::kmw::{KmwElem, KmwError, KmwTwisted};
use crate::premodule::{differential_residue, transfer};
use crate::vlines::{LineName, Summand, VirtualBundle};
use num_bigint::BigInt;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("point does not belong to the scheme")]
    PointNotInScheme,
    #[error("unsupported morphism for this operation")]
    UnsupportedMorphism,
    #[error("twist is not defined for this operation")]
    UnsupportedTwist,
    #[error("scheme outside the supported zoo")]
    OutsideZoo,
    #[error(transparent)]
    Kmw(#[from] KmwError),
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
    #[error(transparent)]
    Group(#[from] crate::abgroup::AbGroupError),
}

/// Closed point of a line over E: a finite place of E(t) or the point at
/// infinity (projective lines only).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ClosedPt {
    At(Place),
    Inf,
}

impl ClosedPt {
    pub fn place(&self, function_field: FieldDesc) -> Place {
        match self {
            ClosedPt::At(v) => v.clone(),
            ClosedPt::Inf => Place::infinity(function_field),
        }
    }
}

/// One connected piece of a zoo scheme.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Component {
    /// Spec of a finite field
    Point(FieldDesc),
    /// the affine or projective line over a finite field, minus a finite
    /// set of closed points
    Line { base: FieldDesc, projective: bool, removed: Vec<ClosedPt> },
}

impl Component {
    pub fn function_field(&self) -> Option<FieldDesc> {
        match self {
            Component::Point(_) => None,
            Component::Line { base, .. } => {
                Some(FieldDesc::RatFunc(base.base(), 't'))
            }
        }
    }

    pub fn dimension(&self) -> i64 {
        match self {
            Component::Point(_) => 0,
            Component::Line { .. } => 1,
        }
    }

    fn contains_closed(&self, pt: &ClosedPt) -> bool {
        match self {
            Component::Point(_) => false,
            Component::Line { projective, removed, .. } => {
                if matches!(pt, ClosedPt::Inf) && !projective {
                    return false;
                }
                !removed.contains(pt)
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scheme {
    pub components: Vec<Component>,
}

impl Scheme {
    pub fn spec(field: FieldDesc) -> Scheme {
        Scheme { components: vec![Component::Point(field)] }
    }

    pub fn affine_line(base: FieldDesc) -> Scheme {
        Scheme {
            components: vec![Component::Line { base, projective: false, removed: vec![] }],
        }
    }

    pub fn proj_line(base: FieldDesc) -> Scheme {
        Scheme {
            components: vec![Component::Line { base, projective: true, removed: vec![] }],
        }
    }

    /// The open complement of a finite set of closed points in a line.
    pub fn open_complement(&self, pts: &[ClosedPt]) -> Result<Scheme, GeomError> {
        let [Component::Line { base, projective, removed }] = &self.components[..] else {
            return Err(GeomError::OutsideZoo);
        };
        let mut removed = removed.clone();
        for p in pts {
            if !removed.contains(p) {
                removed.push(p.clone());
            }
        }
        removed.sort();
        Ok(Scheme {
            components: vec![Component::Line {
                base: *base,
                projective: *projective,
                removed,
            }],
        })
    }

    /// The finite closed subscheme on the given points: a disjoint union of
    /// spectra of the residue fields.
    pub fn finite_closed(&self, pts: &[ClosedPt]) -> Result<Scheme, GeomError> {
        let [Component::Line { base: _, projective, removed }] = &self.components[..] else {
            return Err(GeomError::OutsideZoo);
        };
        let ff = self.components[0].function_field().unwrap();
        let mut comps = vec![];
        for p in pts {
            if removed.contains(p) || (matches!(p, ClosedPt::Inf) && !projective) {
                return Err(GeomError::PointNotInScheme);
            }
            comps.push(Component::Point(p.place(ff).residue_desc()));
        }
        Ok(Scheme { components: comps })
    }

    pub fn disjoint_union(pieces: &[Scheme]) -> Scheme {
        Scheme {
            components: pieces.iter().flat_map(|s| s.components.iter().cloned()).collect(),
        }
    }

    pub fn dimension(&self) -> i64 {
        self.components.iter().map(|c| c.dimension()).max().unwrap_or(0)
    }
}

/// A point of a scheme: component index plus the point inside it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PointRef {
    pub component: usize,
    pub pt: Pt,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Pt {
    /// the point of a Spec component
    Spec,
    /// the generic point of a line
    Generic,
    Closed(ClosedPt),
}

impl PointRef {
    pub fn residue_field(&self, scheme: &Scheme) -> FieldDesc {
        let comp = &scheme.components[self.component];
        match (&self.pt, comp) {
            (Pt::Spec, Component::Point(f)) => *f,
            (Pt::Generic, Component::Line { .. }) => comp.function_field().unwrap(),
            (Pt::Closed(c), Component::Line { .. }) => {
                c.place(comp.function_field().unwrap()).residue_desc()
            }
            _ => panic!("point/component mismatch"),
        }
    }

    pub fn dimension(&self) -> i64 {
        match self.pt {
            Pt::Generic => 1,
            _ => 0,
        }
    }
}

/// Scheme-level twist: an integer combination of the trivial line and the
/// relative tangent line of the component (zero on Spec components).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct SchemeTwist {
    pub a1: i64,
    pub tangent: i64,
}

impl SchemeTwist {
    pub fn trivial(n: i64) -> SchemeTwist {
        SchemeTwist { a1: n, tangent: 0 }
    }

    pub fn rank_at(&self, point: &PointRef) -> i64 {
        let tangent_rank = match point.pt {
            Pt::Spec => 0,
            _ => self.tangent,
        };
        self.a1 + tangent_rank
    }

    /// The evaluated bundle at a point. The tangent line of the chart is
    /// trivialized by the coordinate (t, and -1/t at infinity, whose
    /// transition unit is a square and therefore invisible to the
    /// rank-one-form action), so tangent summands evaluate to standard
    /// lines everywhere; Spec components have no tangent.
    pub fn eval_at(&self, scheme: &Scheme, point: &PointRef) -> VirtualBundle {
        let kappa = point.residue_field(scheme);
        let mut v = VirtualBundle::trivial(kappa, self.a1);
        if !matches!(point.pt, Pt::Spec) {
            let atom = Summand {
                line: LineName::Std,
                dual: self.tangent < 0,
                neg: self.tangent < 0,
            };
            for _ in 0..self.tangent.unsigned_abs() {
                v.summands.push(atom.clone());
            }
        }
        v
    }

    /// The twist of the payload at a point: Omega of the residue field in
    /// front of the evaluated bundle.
    pub fn payload_twist(&self, scheme: &Scheme, point: &PointRef) -> VirtualBundle {
        let kappa = point.residue_field(scheme);
        VirtualBundle::omega(kappa).sum(&self.eval_at(scheme, point))
    }

    pub fn add(&self, other: &SchemeTwist) -> SchemeTwist {
        SchemeTwist { a1: self.a1 + other.a1, tangent: self.tangent + other.tangent }
    }
}

/// A cycle: finitely supported assignment of twisted values to points.
#[derive(Clone, Debug)]
pub struct Cycle {
    pub scheme: Scheme,
    pub twist: SchemeTwist,
    pub support: BTreeMap<PointRef, KmwTwisted>,
}

impl Cycle {
    pub fn zero(scheme: Scheme, twist: SchemeTwist) -> Cycle {
        Cycle { scheme, twist, support: BTreeMap::new() }
    }

    pub fn single(
        scheme: Scheme,
        twist: SchemeTwist,
        point: PointRef,
        value: KmwTwisted,
    ) -> Result<Cycle, GeomError> {
        let expected = twist.payload_twist(&scheme, &point);
        if value.twist != expected {
            return Err(GeomError::UnsupportedTwist);
        }
        let mut support = BTreeMap::new();
        if !value.raw.is_syntactically_zero() {
            support.insert(point, value);
        }
        Ok(Cycle { scheme, twist, support })
    }

    pub fn add_value(&mut self, point: PointRef, value: KmwTwisted) -> Result<(), GeomError> {
        let expected = self.twist.payload_twist(&self.scheme, &point);
        let value = if value.twist == expected {
            value
        } else {
            value.reframe_to(&expected)?
        };
        match self.support.remove(&point) {
            None => {
                self.support.insert(point, value);
            }
            Some(old) => {
                let sum = old.add(&value)?;
                if !sum.raw.is_syntactically_zero() {
                    self.support.insert(point, sum);
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Cycle) -> Result<Cycle, GeomError> {
        assert_eq!(self.scheme, other.scheme);
        assert_eq!(self.twist, other.twist);
        let mut out = self.clone();
        for (p, v) in &other.support {
            out.add_value(p.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn negate(&self) -> Cycle {
        Cycle {
            scheme: self.scheme.clone(),
            twist: self.twist,
            support: self
                .support
                .iter()
                .map(|(p, v)| (p.clone(), v.negate()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Cycle) -> Result<Cycle, GeomError> {
        self.add(&other.negate())
    }

    /// Degreewise slice: the part supported in dimension p.
    pub fn dimension_part(&self, p: i64) -> Cycle {
        Cycle {
            scheme: self.scheme.clone(),
            twist: self.twist,
            support: self
                .support
                .iter()
                .filter(|(pt, _)| pt.dimension() == p)
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> Result<bool, GeomError> {
        for v in self.support.values() {
            if !v.is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equal(&self, other: &Cycle) -> Result<bool, GeomError> {
        self.sub(other)?.is_zero()
    }
}

// ---------------------------------------------------------------------------
// The differential
// ---------------------------------------------------------------------------

/// The support of the differential of a generic-point payload: places
/// dividing a symbol entry, plus infinity on projective lines.
pub fn divisor_support(component: &Component, value: &KmwTwisted) -> Vec<ClosedPt> {
    let Component::Line { projective, removed, .. } = component else {
        return vec![];
    };
    let mut out = vec![];
    for v in transfer::twisted_support(&value.raw) {
        let pt = match v.kind {
            crate::fields::PlaceKind::Infinity => ClosedPt::Inf,
            crate::fields::PlaceKind::Finite(_) => ClosedPt::At(v),
        };
        if matches!(pt, ClosedPt::Inf) && !projective {
            continue;
        }
        if !removed.contains(&pt) {
            out.push(pt);
        }
    }
    out
}

/// d: C_p -> C_{p-1}, residues of generic-point payloads at the closed
/// points of the scheme.
pub fn differential(c: &Cycle) -> Result<Cycle, GeomError> {
    let mut out = Cycle::zero(c.scheme.clone(), c.twist);
    for (pt, value) in &c.support {
        if pt.pt != Pt::Generic {
            continue; // closed points have no divisors here
        }
        let comp = &c.scheme.components[pt.component];
        let ff = comp.function_field().unwrap();
        for cp in divisor_support(comp, value) {
            let place = cp.place(ff);
            let dv = differential_residue(&place, value)?;
            let target = PointRef { component: pt.component, pt: Pt::Closed(cp) };
            out.add_value(target, dv)?;
        }
    }
    Ok(out)
}

/// Boundary map of a boundary triple (Z, i, X, j, U): residues of U-cycles
/// at the removed points, landing on Z.
pub fn boundary(
    ambient: &Scheme,
    removed: &[ClosedPt],
    c: &Cycle,
) -> Result<Cycle, GeomError> {
    let [Component::Line { .. }] = &ambient.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    let z = ambient.finite_closed(removed)?;
    let mut out = Cycle::zero(z.clone(), SchemeTwist::trivial(c.twist.a1));
    // tangent twists restrict to closed points as standard atoms; keep the
    // same a1-count plus tangent-count as trivial lines on Z
    out.twist = SchemeTwist::trivial(c.twist.a1 + c.twist.tangent);
    for (pt, value) in &c.support {
        if pt.pt != Pt::Generic {
            continue;
        }
        let comp = &c.scheme.components[pt.component];
        let ff = comp.function_field().unwrap();
        for (zi, cp) in removed.iter().enumerate() {
            let place = cp.place(ff);
            let dv = differential_residue(&place, value)?;
            let target = PointRef { component: zi, pt: Pt::Spec };
            out.add_value(target, dv)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pushforward and pullback
// ---------------------------------------------------------------------------

/// Pushforward along the structure map of a line to its base: closed points
/// transfer along their residue extensions, the generic point contributes
/// nothing.
pub fn push_to_base(c: &Cycle) -> Result<Cycle, GeomError> {
    if c.twist.tangent != 0 {
        return Err(GeomError::UnsupportedTwist); // not a pullback twist
    }
    let [Component::Line { base, .. }] = &c.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    let target = Scheme::spec(*base);
    let mut out = Cycle::zero(target.clone(), c.twist);
    let spec_pt = PointRef { component: 0, pt: Pt::Spec };
    for (pt, value) in &c.support {
        match &pt.pt {
            Pt::Generic => continue,
            Pt::Spec => unreachable!(),
            Pt::Closed(_) => {
                let down = transfer::finite_transfer(base.base(), value, None)?;
                out.add_value(spec_pt.clone(), down)?;
            }
        }
    }
    Ok(out)
}

/// Pushforward along the inclusion of a finite closed subscheme into its
/// ambient line.
pub fn push_closed_into_line(
    ambient: &Scheme,
    pts: &[ClosedPt],
    c: &Cycle,
) -> Result<Cycle, GeomError> {
    let mut out = Cycle::zero(ambient.clone(), SchemeTwist::trivial(c.twist.a1));
    for (pt, value) in &c.support {
        let Pt::Spec = pt.pt else {
            return Err(GeomError::UnsupportedMorphism);
        };
        let cp = pts[pt.component].clone();
        let target = PointRef { component: 0, pt: Pt::Closed(cp) };
        out.add_value(target, value.clone())?;
    }
    Ok(out)
}

/// Pullback along the structure map of a line (essentially smooth of
/// relative dimension one): a Spec-payload restricts to the generic point,
/// the twist gains the dual tangent summand.
pub fn pull_from_base(line: &Scheme, c: &Cycle) -> Result<Cycle, GeomError> {
    let [Component::Point(base)] = &c.scheme.components[..] else {
        return Err(GeomError::UnsupportedMorphism);
    };
    let [Component::Line { base: lb, .. }] = &line.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    if lb != base {
        return Err(GeomError::UnsupportedMorphism);
    }
    if c.twist.tangent != 0 {
        return Err(GeomError::UnsupportedTwist);
    }
    let twist = SchemeTwist { a1: c.twist.a1, tangent: -1 };
    let mut out = Cycle::zero(line.clone(), twist);
    let ff = line.components[0].function_field().unwrap();
    let generic = PointRef { component: 0, pt: Pt::Generic };
    for (_, value) in &c.support {
        let raw = value.raw.map_into(&ff)?;
        let tw = twist.payload_twist(line, &generic);
        out.add_value(generic.clone(), KmwTwisted::new(raw, tw)?)?;
    }
    Ok(out)
}

/// Pullback along an open immersion: restriction of supports.
pub fn pull_open(sub: &Scheme, c: &Cycle) -> Result<Cycle, GeomError> {
    let mut out = Cycle::zero(sub.clone(), c.twist);
    for (pt, value) in &c.support {
        let keep = match &pt.pt {
            Pt::Generic => true,
            Pt::Closed(cp) => sub.components[pt.component].contains_closed(cp),
            Pt::Spec => true,
        };
        if keep {
            out.support.insert(pt.clone(), value.clone());
        }
    }
    Ok(out)
}

/// Base change of a line along a finite constant extension, as a proper
/// pushforward X_F -> X_E.
pub fn push_base_change(c: &Cycle, small_base: FieldDesc) -> Result<Cycle, GeomError> {
    let [Component::Line { base, projective, removed }] = &c.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    if !removed.is_empty() || c.twist.tangent != 0 {
        return Err(GeomError::UnsupportedMorphism);
    }
    let target = Scheme {
        components: vec![Component::Line {
            base: small_base,
            projective: *projective,
            removed: vec![],
        }],
    };
    let small_ff = FieldDesc::RatFunc(small_base.base(), 't');
    let big_ff = FieldDesc::RatFunc(base.base(), 't');
    let _ = big_ff;
    let mut out = Cycle::zero(target.clone(), c.twist);
    for (pt, value) in &c.support {
        match &pt.pt {
            Pt::Generic => {
                let down = transfer::const_ext_transfer(small_ff, value)?;
                out.add_value(
                    PointRef { component: 0, pt: Pt::Generic },
                    down,
                )?;
            }
            Pt::Closed(cp) => {
                let below = match cp {
                    ClosedPt::Inf => ClosedPt::Inf,
                    ClosedPt::At(w) => ClosedPt::At(transfer::place_below(small_ff, w)),
                };
                let sub_place = below.place(small_ff);
                let down =
                    transfer::finite_transfer(sub_place.residue_field(), value, None)?;
                out.add_value(
                    PointRef { component: 0, pt: Pt::Closed(below) },
                    down,
                )?;
            }
            Pt::Spec => unreachable!(),
        }
    }
    Ok(out)
}

/// Base change pullback along a finite constant extension (essentially
/// smooth of relative dimension zero).
pub fn pull_base_change(c: &Cycle, big_base: FieldDesc) -> Result<Cycle, GeomError> {
    let [Component::Line { base, projective, removed }] = &c.scheme.components[..] else {
        return Err(GeomError::OutsideZoo);
    };
    if !removed.is_empty() {
        return Err(GeomError::UnsupportedMorphism);
    }
    let target = Scheme {
        components: vec![Component::Line {
            base: big_base,
            projective: *projective,
            removed: vec![],
        }],
    };
    let big_ff = FieldDesc::RatFunc(big_base.base(), 't');
    let _ = base;
    let mut out = Cycle::zero(target.clone(), c.twist);
    for (pt, value) in &c.support {
        match &pt.pt {
            Pt::Generic => {
                let raw = value.raw.map_into(&big_ff)?;
                let tw = out
                    .twist
                    .payload_twist(&target, &PointRef { component: 0, pt: Pt::Generic });
                out.add_value(
                    PointRef { component: 0, pt: Pt::Generic },
                    KmwTwisted::new(raw, tw)?,
                )?;
            }
            Pt::Closed(cp) => match cp {
                ClosedPt::Inf => {
                    let kappa_big = FieldDesc::Finite(big_base.base());
                    let raw = value.raw.map_into(&kappa_big)?;
                    let target_pt = PointRef { component: 0, pt: Pt::Closed(ClosedPt::Inf) };
                    let tw = out.twist.payload_twist(&target, &target_pt);
                    out.add_value(target_pt, KmwTwisted::new(raw, tw)?)?;
                }
                ClosedPt::At(v) => {
                    for w in transfer::places_above(big_ff, v) {
                        let kappa = w.residue_desc();
                        let raw = value.raw.map_into(&kappa)?;
                        let target_pt = PointRef {
                            component: 0,
                            pt: Pt::Closed(ClosedPt::At(w)),
                        };
                        let tw = out.twist.payload_twist(&target, &target_pt);
                        out.add_value(target_pt, KmwTwisted::new(raw, tw)?)?;
                    }
                }
            },
            Pt::Spec => unreachable!(),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Multiplication by units and by eta
// ---------------------------------------------------------------------------

/// Multiply by the symbol of global units: at each p-dimensional point the
/// payload is multiplied by <-1>^{np} [a_1(x), ..., a_n(x)] and the new
/// trivial summands are moved past the Kähler twist.
pub fn mult_units(c: &Cycle, units: &[FieldElem]) -> Result<Cycle, GeomError> {
    let n = units.len() as i64;
    let twist = SchemeTwist { a1: c.twist.a1 + n, tangent: c.twist.tangent };
    let mut out = Cycle::zero(c.scheme.clone(), twist);
    for (pt, value) in &c.support {
        let kappa = pt.residue_field(&c.scheme);
        let p = pt.dimension();
        // evaluate the units at the point
        let mut evaluated = vec![];
        for a in units {
            let at = match (&pt.pt, a) {
                (Pt::Generic, _) => a.map_into(&kappa).map_err(GeomError::Field)?,
                (Pt::Closed(cp), _) => {
                    let comp = &c.scheme.components[pt.component];
                    let place = cp.place(comp.function_field().unwrap());
                    if place.valuation(a) != Ok(0) {
                        return Err(GeomError::UnsupportedMorphism);
                    }
                    place.reduce_elem(a).map_err(GeomError::Field)?
                }
                (Pt::Spec, _) => a.clone(),
            };
            evaluated.push(at);
        }
        let mut sym = KmwElem::symbols(kappa, &evaluated)?;
        let sign = KmwElem::gw_unit(&kappa.from_i64(-1))?;
        for _ in 0..(n * p).rem_euclid(2) {
            sym = sign.mul(&sym)?;
        }
        let acted = KmwTwisted::new(
            sym.mul(&value.raw)?,
            VirtualBundle::trivial(kappa, n).sum(&value.twist),
        )?;
        // move the new trivial lines past the Kähler summand
        let target_twist = twist.payload_twist(&c.scheme, pt);
        let moved = acted.reframe_to(&target_twist)?;
        out.add_value(pt.clone(), moved)?;
    }
    Ok(out)
}

/// Multiply every payload by eta.
pub fn mult_eta(c: &Cycle) -> Result<Cycle, GeomError> {
    let twist = SchemeTwist { a1: c.twist.a1 - 1, tangent: c.twist.tangent };
    let mut out = Cycle::zero(c.scheme.clone(), twist);
    for (pt, value) in &c.support {
        let kappa = pt.residue_field(&c.scheme);
        let acted = KmwTwisted::new(
            value.raw.mul_eta(),
            VirtualBundle::trivial(kappa, -1).sum(&value.twist),
        )?;
        let target_twist = twist.payload_twist(&c.scheme, pt);
        out.add_value(pt.clone(), acted.reframe_to(&target_twist)?)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Convenience constructors
// ---------------------------------------------------------------------------

/// A generic-point cycle on a line from a raw element of its function field.
pub fn generic_cycle(
    scheme: &Scheme,
    twist: SchemeTwist,
    raw: KmwElem,
) -> Result<Cycle, GeomError> {
    let generic = PointRef { component: 0, pt: Pt::Generic };
    let tw = twist.payload_twist(scheme, &generic);
    Ok(Cycle::single(scheme.clone(), twist, generic, KmwTwisted::new(raw, tw)?)?)
}

/// The class of a closed point with a unit coefficient.
pub fn point_class(
    scheme: &Scheme,
    twist: SchemeTwist,
    pt: ClosedPt,
) -> Result<Cycle, GeomError> {
    let point = PointRef { component: 0, pt: Pt::Closed(pt) };
    let kappa = point.residue_field(scheme);
    let tw = twist.payload_twist(scheme, &point);
    let pad = tw.rank();
    let raw = pad_element(KmwElem::one(kappa), pad);
    Ok(Cycle::single(scheme.clone(), twist, point, KmwTwisted::new(raw, tw)?)?)
}

/// Pad an element into the required degree by eta or [g]-multiplications.
pub fn pad_element(x: KmwElem, degree: i64) -> KmwElem {
    let mut out = x;
    while out.degree > degree {
        out = out.mul_eta();
    }
    while out.degree < degree {
        let g = out.field.constant_generator();
        out = KmwElem::symbol(&g).unwrap().mul(&out).unwrap();
    }
    out
}

/// A rational point of the line as a closed point.
pub fn rational_point(base: FieldDesc, a: &FieldElem) -> ClosedPt {
    let ff = FieldDesc::RatFunc(base.base(), 't');
    ClosedPt::At(Place::at_point(ff, a.as_fq()))
}

/// The zero point t = 0.
pub fn zero_point(base: FieldDesc) -> ClosedPt {
    let ff = FieldDesc::RatFunc(base.base(), 't');
    let ctx = ff.ctx();
    ClosedPt::At(Place::finite(ff, Poly::x(&ctx)).unwrap())
}

pub fn scale_cycle(c: &Cycle, k: i64) -> Cycle {
    Cycle {
        scheme: c.scheme.clone(),
        twist: c.twist,
        support: c
            .support
            .iter()
            .map(|(p, v)| {
                (
                    p.clone(),
                    KmwTwisted::new(v.raw.scale(&BigInt::from(k)), v.twist.clone()).unwrap(),
                )
            })
            .filter(|(_, v)| !v.raw.is_syntactically_zero())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    #[test]
    fn differential_of_symbol_t() {
        // d([t] at the generic point of A^1) is supported exactly at t = 0
        // with the unit class
        let a1 = Scheme::affine_line(gf5());
        let ff = FieldDesc::rational(5, 1);
        let c = generic_cycle(
            &a1,
            SchemeTwist::trivial(0),
            KmwElem::symbol(&ff.gen_t()).unwrap(),
        )
        .unwrap();
        let d = differential(&c).unwrap();
        assert_eq!(d.support.len(), 1);
        let (pt, val) = d.support.iter().next().unwrap();
        assert_eq!(pt.pt, Pt::Closed(zero_point(gf5())));
        // value is <-1> * <-1> = <1> times the unit class: check it is a
        // unit-rank class
        let cls = crate::kmw::gw_classify(&val.raw).unwrap();
        assert_eq!(cls.rank, BigInt::from(1));
    }

    #[test]
    fn differential_of_constant_class_vanishes() {
        // restriction of a constant has no divisor
        let a1 = Scheme::affine_line(gf5());
        let ff = FieldDesc::rational(5, 1);
        let c = generic_cycle(
            &a1,
            SchemeTwist::trivial(0),
            KmwElem::symbol(&ff.from_i64(2)).unwrap(),
        )
        .unwrap();
        let d = differential(&c).unwrap();
        assert!(d.is_zero().unwrap());
    }

    #[test]
    fn fd_support_is_exact() {
        // support of d = places dividing symbol entries (plus infinity)
        let p1 = Scheme::proj_line(gf5());
        let ff = FieldDesc::rational(5, 1);
        let t = ff.gen_t();
        let raw = KmwElem::symbol(&t.mul(&t.add(&ff.from_i64(1)))).unwrap();
        let c = generic_cycle(&p1, SchemeTwist::trivial(0), raw).unwrap();
        let comp = &p1.components[0];
        let supp = divisor_support(comp, c.support.values().next().unwrap());
        // t(t+1): places t, t+1, and infinity (valuation -2)
        assert_eq!(supp.len(), 3);
    }

    #[test]
    fn reciprocity_on_p1() {
        // push(d(c)) = 0 for generic classes on P^1
        let p1 = Scheme::proj_line(gf5());
        let ff = FieldDesc::rational(5, 1);
        let mut sampler = crate::sampling::Sampler::new(3);
        for _ in 0..5 {
            let raw = sampler.element(&ff, 1, 2);
            let c = generic_cycle(&p1, SchemeTwist::trivial(0), raw).unwrap();
            let d = differential(&c).unwrap();
            let pushed = push_to_base(&d).unwrap();
            assert!(pushed.is_zero().unwrap(), "reciprocity failed");
        }
    }

    #[test]
    fn zero_section_retraction() {
        // Theta d [t] g~* = id on A^1 minus the origin (the explicit
        // retraction of the zero section)
        let e = gf5();
        let spec = Scheme::spec(e);
        let a1 = Scheme::affine_line(e);
        let u = a1.open_complement(&[zero_point(e)]).unwrap();
        let ff = FieldDesc::rational(5, 1);
        let mut sampler = crate::sampling::Sampler::new(17);
        for _ in 0..5 {
            let x = sampler.element(&e, 0, 2);
            let c = Cycle::single(
                spec.clone(),
                SchemeTwist::trivial(0),
                PointRef { component: 0, pt: Pt::Spec },
                KmwTwisted::new(x.clone(), VirtualBundle::zero(e)).unwrap(),
            )
            .unwrap();
            let pulled_a1 = pull_from_base(&a1, &c).unwrap();
            let pulled = pull_open(&u, &pulled_a1).unwrap();
            let multiplied = mult_units(&pulled, &[ff.gen_t()]).unwrap();
            let back = boundary(&a1, &[zero_point(e)], &multiplied).unwrap();
            // expect the original class on Spec(kappa(0)) = Spec E
            let z = a1.finite_closed(&[zero_point(e)]).unwrap();
            let pt = PointRef { component: 0, pt: Pt::Spec };
            let tw = back.twist.payload_twist(&z, &pt);
            let expected = Cycle::single(
                z,
                back.twist,
                pt,
                KmwTwisted::new(x.clone(), tw).unwrap(),
            )
            .unwrap();
            assert!(back.equal(&expected).unwrap(), "retraction is not the identity");
        }
        // second identity: boundary of the bare pullback vanishes
        let x = KmwElem::one(e);
        let c = Cycle::single(
            spec.clone(),
            SchemeTwist::trivial(0),
            PointRef { component: 0, pt: Pt::Spec },
            KmwTwisted::new(x, VirtualBundle::zero(e)).unwrap(),
        )
        .unwrap();
        let pulled = pull_open(&u, &pull_from_base(&a1, &c).unwrap()).unwrap();
        let b = boundary(&a1, &[zero_point(e)], &pulled).unwrap();
        assert!(b.is_zero().unwrap());
    }
}
