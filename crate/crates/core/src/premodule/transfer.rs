//! Corestriction (transfer) maps.
//!
//! Finite fields: embed the extension as a closed point of the affine line
//! and read the transfer off the total-residue characterization
//! sum_x Tr o d_x + d_inf = 0: lift a symbol to a class on the line whose
//! residue at the chosen point is the symbol, then push the other residues
//! down recursively (their residue degrees drop strictly).
//!
//! Constant extensions of function fields: reconstruct the transferred
//! class from its prescribed residues at finite places (which reduce to
//! finite-field transfers) and pin the constant part by a specialization.

use crate::fields::{FieldDesc, FieldElem, FiniteExtension, Fq, FqEl, Place, Poly};
use crate::kmw::{KmwElem, KmwError, KmwTwisted};
use crate::vlines::VirtualBundle;

use super::{differential_residue, specialize_raw};

/// Transfer along GF(q^a) -> GF(q^b), computed with the given generator of
/// the extension (defaults to the canonical one).
pub fn finite_transfer(
    sub: Fq,
    x: &KmwTwisted,
    generator: Option<FqEl>,
) -> Result<KmwTwisted, KmwError> {
    let FieldDesc::Finite(top) = x.raw.field else {
        return Err(KmwError::FieldMismatch);
    };
    if !sub.subfield_of(&top) {
        return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
    }
    if sub == top {
        return Ok(x.clone());
    }
    let tctx = top.ctx();
    let theta = generator.unwrap_or_else(|| tctx.generator());
    let minpoly = minimal_polynomial(sub, top, &theta);
    let d = minpoly.degree().unwrap() as u32;
    if sub.deg * d != top.deg {
        return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
    }

    let target = FieldDesc::Finite(sub);
    let out_twist = descend_twist(&target, &x.twist)?;
    let line = FieldDesc::RatFunc(sub, 't');
    let ext = FiniteExtension::new(sub, minpoly.clone())
        .map_err(KmwError::Field)?;
    let place = Place::finite(line, minpoly.clone()).map_err(KmwError::Field)?;

    // the correction unit making the residue at the chosen point exactly the
    // symbol: delta = <-pi'(rho)> * <cbar>, so cbar = -pi'(rho)
    let rho = place.residue_root();
    let dpi = minpoly.derivative(&sub.ctx());
    let corr_bar = tctx.neg(&dpi.eval_in(&sub.ctx(), &tctx, &rho));
    let corr = ext.pull(&corr_bar);

    let mut out_raw = KmwElem::zero(target, x.raw.degree);
    for (w, c) in x.raw.terms() {
        // gamma = <corr> eta^k [minpoly, B_1, ..., B_n] on the affine line
        let mut entries: Vec<FieldElem> = vec![place.uniformizer()];
        for b in &w.symbols {
            let rep = ext.pull(b.as_fq());
            entries.push(FieldElem::rat(
                line,
                crate::fields::RatEl::from_poly(&line.ctx(), rep),
            ));
        }
        let mut gamma = KmwElem::symbols(line, &entries)?;
        for _ in 0..w.eta_pow {
            gamma = gamma.mul_eta();
        }
        let corr_el =
            FieldElem::rat(line, crate::fields::RatEl::from_poly(&line.ctx(), corr.clone()));
        gamma = KmwElem::gw_unit(&corr_el)?.mul(&gamma)?;

        let tr = transfer_of_lift(sub, &place, &gamma)?;
        out_raw = out_raw.add(&tr.scale(c));
    }
    KmwTwisted::new(out_raw, out_twist)
}

/// -d_inf(gamma) - sum over the other finite places of Tr(d_y(gamma)),
/// for a lift gamma on the affine line over GF(q^a) whose residue at
/// `chosen` is the class being transferred.
fn transfer_of_lift(
    sub: Fq,
    chosen: &Place,
    gamma: &KmwElem,
) -> Result<KmwElem, KmwError> {
    let line = gamma.field;
    let twist = VirtualBundle::omega(line)
        .sum(&VirtualBundle::trivial(line, gamma.degree - 1));
    let gamma_tw = KmwTwisted::new(gamma.clone(), twist)?;

    let target = FieldDesc::Finite(sub);
    let mut acc = KmwElem::zero(target, gamma.degree - 1);

    for y in lift_support(gamma) {
        if y == *chosen {
            continue;
        }
        let dy = differential_residue(&y, &gamma_tw)?;
        match y.kind {
            crate::fields::PlaceKind::Infinity => {
                // residue field is the constant field itself
                acc = acc.sub(&dy.raw);
            }
            crate::fields::PlaceKind::Finite(_) => {
                let down = finite_transfer(sub, &dy, None)?;
                acc = acc.sub(&down.raw);
            }
        }
    }
    Ok(acc)
}

fn lift_support(gamma: &KmwElem) -> Vec<Place> {
    let mut out: Vec<Place> = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for (w, _) in gamma.terms() {
        for a in &w.symbols {
            for v in crate::fields::place::support(a) {
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        }
    }
    let inf = Place::infinity(gamma.field);
    if seen.insert(inf.clone()) {
        out.push(inf);
    }
    out
}

/// Minimal polynomial of theta over the subfield, as a polynomial over the
/// subfield context.
pub fn minimal_polynomial(sub: Fq, top: Fq, theta: &FqEl) -> Poly {
    let sctx = sub.ctx();
    let tctx = top.ctx();
    // product of (X - conjugate) over the distinct conjugates under x -> x^|sub|
    let mut conjugates = vec![theta.clone()];
    let mut z = tctx.pow(theta, sub.size());
    while z != *theta {
        conjugates.push(z.clone());
        z = tctx.pow(&z, sub.size());
    }
    // multiply out over the top field
    let mut poly_top = vec![tctx.one()]; // coefficients little-endian
    for c in &conjugates {
        let mut next = vec![tctx.zero(); poly_top.len() + 1];
        for (i, a) in poly_top.iter().enumerate() {
            next[i + 1] = tctx.add(&next[i + 1], a);
            next[i] = tctx.sub(&next[i], &tctx.mul(a, c));
        }
        poly_top = next;
    }
    let coeffs = poly_top
        .iter()
        .map(|c| tctx.project_to(&sctx, c).expect("symmetric functions lie in the subfield"))
        .collect();
    Poly::from_coeffs(&sctx, coeffs)
}

/// Transfer along the constant extension GF(q^a)(t) -> GF(q^b)(t):
/// reconstruction from residues plus a specialization pin.
pub fn const_ext_transfer(
    target: FieldDesc,
    x: &KmwTwisted,
) -> Result<KmwTwisted, KmwError> {
    let (FieldDesc::RatFunc(sub, vart), FieldDesc::RatFunc(top, _)) = (target, x.raw.field)
    else {
        return Err(KmwError::FieldMismatch);
    };
    let _ = vart;
    if !sub.subfield_of(&top) {
        return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
    }
    if sub == top {
        return Ok(x.clone());
    }
    // the value must be Omega-twisted on the left (shape of D2)
    let mut atoms = x.twist.summands.clone();
    if atoms.first().map(|s| !matches!(s.line, crate::vlines::LineName::Omega(_))).unwrap_or(true)
    {
        return Err(KmwError::TwistMismatch);
    }
    atoms.remove(0);
    let out_twist = VirtualBundle::omega(target).sum(&VirtualBundle {
        field: target,
        summands: atoms,
        unit: x.twist.unit.project_into(&target).map_err(KmwError::Field)?,
    });

    // prescribed residues over the base: r_v = sum_{w | v} Tr(d_w(beta))
    let sub_fq = FieldDesc::Finite(sub);
    let mut targets: Vec<(Place, KmwTwisted)> = vec![];
    for w in twisted_support(&x.raw) {
        if matches!(w.kind, crate::fields::PlaceKind::Infinity) {
            continue;
        }
        let dw = differential_residue(&w, x)?;
        let v = place_below(target, &w);
        let down = finite_transfer(v.residue_field(), &dw, None)?;
        match targets.iter_mut().find(|(p, _)| *p == v) {
            Some((_, acc)) => *acc = acc.add(&down)?,
            None => targets.push((v, down)),
        }
    }

    // reconstruct by matching residues, largest degree first
    let mut alpha = KmwTwisted::zero(out_twist.clone());
    loop {
        let mut worklist: Vec<(Place, KmwTwisted)> = vec![];
        for v in twisted_support(&alpha.raw)
            .into_iter()
            .filter(|v| matches!(v.kind, crate::fields::PlaceKind::Finite(_)))
            .chain(targets.iter().map(|(v, _)| v.clone()))
        {
            if worklist.iter().any(|(p, _)| *p == v) {
                continue;
            }
            let want = targets
                .iter()
                .find(|(p, _)| *p == v)
                .map(|(_, r)| r.clone());
            let have = differential_residue(&v, &alpha)?;
            let miss = match want {
                Some(r) => r.sub(&have)?,
                None => have.negate(),
            };
            if !miss.raw.is_zero()? {
                worklist.push((v, miss));
            }
        }
        let Some((v, miss)) = worklist.into_iter().max_by_key(|(v, _)| v.degree()) else {
            break;
        };
        let lifted = lift_with_residue(&v, &miss.raw)?;
        let lifted_tw = KmwTwisted::new(lifted, out_twist.clone())?;
        alpha = alpha.add(&lifted_tw)?;
    }

    // pin the constant part by a shared specialization at a degree-one place
    let ctx = target.ctx();
    let pin = Place::finite(target, Poly::x(&ctx)).unwrap();
    let pin_unif = pin.uniformizer().map_into(&x.raw.field).map_err(KmwError::Field)?;
    let mut s_of_tr = KmwElem::zero(sub_fq, x.raw.degree);
    for w in places_above(x.raw.field, &pin) {
        let sw = specialize_raw(&w, &pin_unif, &x.raw)?;
        let tw = KmwTwisted::new(
            sw,
            VirtualBundle::trivial(FieldDesc::Finite(w.residue_field()), x.raw.degree),
        )?;
        let down = finite_transfer(pin.residue_field(), &tw, None)?;
        s_of_tr = s_of_tr.add(&down.raw);
    }
    let s_alpha = specialize_raw(&pin, &pin.uniformizer(), &alpha.raw)?;
    let constant = s_of_tr.sub(&s_alpha);
    let lifted_const = constant.map_into(&target)?;
    alpha.raw = alpha.raw.add(&lifted_const);
    Ok(alpha)
}

/// Transport a twist down a finite extension: atoms pass through nominally,
/// the unit must already be rational over the smaller field.
fn descend_twist(
    target: &FieldDesc,
    v: &VirtualBundle,
) -> Result<VirtualBundle, KmwError> {
    let unit = v.unit.project_into(target).map_err(KmwError::Field)?;
    Ok(VirtualBundle { field: *target, summands: v.summands.clone(), unit })
}

/// Places in the support of any symbol entry, plus infinity.
pub fn twisted_support(x: &KmwElem) -> Vec<Place> {
    let mut out: Vec<Place> = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for (w, _) in x.terms() {
        for a in &w.symbols {
            for v in crate::fields::place::support(a) {
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        }
    }
    let inf = Place::infinity(x.field);
    if seen.insert(inf.clone()) {
        out.push(inf);
    }
    out
}

/// The place of the smaller-constants field below a place of the bigger one
/// (constant extensions are unramified; the polynomial below is the orbit
/// product under the Galois action on coefficients).
pub fn place_below(target: FieldDesc, w: &Place) -> Place {
    let crate::fields::PlaceKind::Finite(piw) = &w.kind else {
        return Place::infinity(target);
    };
    let FieldDesc::RatFunc(sub, _) = target else { unreachable!() };
    let top_ctx = w.field.ctx();
    let sub_ctx = sub.ctx();
    let mut orbit = vec![piw.clone()];
    loop {
        let prev = orbit.last().unwrap();
        let next = Poly::from_coeffs(
            &top_ctx,
            prev.coeffs.iter().map(|c| top_ctx.pow(c, sub.size())).collect(),
        );
        if next == *piw {
            break;
        }
        orbit.push(next);
    }
    let mut prod = Poly::constant(top_ctx.one());
    for f in &orbit {
        prod = prod.mul(&top_ctx, f);
    }
    let coeffs = prod
        .coeffs
        .iter()
        .map(|c| top_ctx.project_to(&sub_ctx, c).expect("orbit product has base coefficients"))
        .collect();
    Place::finite(target, Poly::from_coeffs(&sub_ctx, coeffs)).unwrap()
}

/// Places of the constant extension lying over a place of the base.
pub fn places_above(top_field: FieldDesc, v: &Place) -> Vec<Place> {
    let crate::fields::PlaceKind::Finite(piv) = &v.kind else {
        return vec![Place::infinity(top_field)];
    };
    let top_ctx = top_field.ctx();
    let sub_ctx = v.field.ctx();
    let lifted = piv.embed(&sub_ctx, &top_ctx);
    crate::fields::factor::factor(&top_ctx, &lifted)
        .factors
        .into_iter()
        .map(|(pi, _)| Place::finite(top_field, pi).unwrap())
        .collect()
}

/// An element over GF(q)(t) whose canonical residue at `v` is exactly
/// `value`, with all other finite residues supported in smaller degrees.
pub fn lift_with_residue(v: &Place, value: &KmwElem) -> Result<KmwElem, KmwError> {
    let field = v.field;
    let ctx = field.ctx();
    let crate::fields::PlaceKind::Finite(piv) = &v.kind else {
        return Err(KmwError::Field(crate::fields::FieldError::UnsupportedExtension));
    };
    let ext = FiniteExtension::new(field.base(), piv.clone()).map_err(KmwError::Field)?;
    let rho = v.residue_root();
    let rctx = v.residue_field().ctx();
    let dpi = piv.derivative(&ctx);
    let corr_bar = rctx.neg(&dpi.eval_in(&ctx, &rctx, &rho));
    let corr = ext.pull(&corr_bar);
    let corr_el = FieldElem::rat(field, crate::fields::RatEl::from_poly(&ctx, corr));

    let mut out = KmwElem::zero(field, value.degree + 1);
    for (w, c) in value.terms() {
        let mut entries = vec![v.uniformizer()];
        for b in &w.symbols {
            let rep = ext.pull(b.as_fq());
            entries.push(FieldElem::rat(
                field,
                crate::fields::RatEl::from_poly(&ctx, rep),
            ));
        }
        let mut gamma = KmwElem::symbols(field, &entries)?;
        for _ in 0..w.eta_pow {
            gamma = gamma.mul_eta();
        }
        gamma = KmwElem::gw_unit(&corr_el)?.mul(&gamma)?;
        out = out.add(&gamma.scale(c));
    }
    Ok(out)
}
