//! Elements of the twisted groups K^MW(E, V): a raw element of degree
//! rank(V) together with the framed virtual bundle V. Changing the frame by
//! determinant delta multiplies the raw coordinate by <delta> (rule R4a);
//! other weights arise by adding trivial summands to the twist.

use super::{KmwElem, KmwError};
use crate::fields::FieldElem;
use crate::vlines::{canonical_iso, LineIso, VirtualBundle};

#[derive(Clone, Debug)]
pub struct KmwTwisted {
    pub raw: KmwElem,
    pub twist: VirtualBundle,
}

impl KmwTwisted {
    pub fn new(raw: KmwElem, twist: VirtualBundle) -> Result<KmwTwisted, KmwError> {
        if raw.field != twist.field || raw.degree != twist.rank() {
            return Err(KmwError::TwistMismatch);
        }
        Ok(KmwTwisted { raw, twist })
    }

    pub fn zero(twist: VirtualBundle) -> KmwTwisted {
        KmwTwisted { raw: KmwElem::zero(twist.field, twist.rank()), twist }
    }

    pub fn add(&self, other: &KmwTwisted) -> Result<KmwTwisted, KmwError> {
        if self.twist != other.twist {
            return Err(KmwError::TwistMismatch);
        }
        Ok(KmwTwisted { raw: self.raw.add(&other.raw), twist: self.twist.clone() })
    }

    pub fn sub(&self, other: &KmwTwisted) -> Result<KmwTwisted, KmwError> {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> KmwTwisted {
        KmwTwisted { raw: self.raw.negate(), twist: self.twist.clone() }
    }

    /// Left action of an untwisted element.
    pub fn act_raw(&self, x: &KmwElem) -> Result<KmwTwisted, KmwError> {
        let raw = x.mul(&self.raw)?;
        let twist = VirtualBundle::trivial(self.twist.field, x.degree).sum(&self.twist);
        Ok(KmwTwisted { raw, twist })
    }

    /// Left action of a twisted element: twist prepends on the left.
    pub fn act(&self, x: &KmwTwisted) -> Result<KmwTwisted, KmwError> {
        let raw = x.raw.mul(&self.raw)?;
        let twist = x.twist.sum(&self.twist);
        Ok(KmwTwisted { raw, twist })
    }

    /// Transport along an isomorphism of the twist: multiplies the raw
    /// coordinate by <(-1)^sign * unit>.
    pub fn reframe(&self, iso: &LineIso) -> Result<KmwTwisted, KmwError> {
        if iso.source != self.twist {
            return Err(KmwError::TwistMismatch);
        }
        let mult = KmwElem::gw_unit(&iso.multiplier())?;
        Ok(KmwTwisted { raw: mult.mul(&self.raw)?, twist: iso.target.clone() })
    }

    /// Reframe along the canonical isomorphism when one exists.
    pub fn reframe_to(&self, target: &VirtualBundle) -> Result<KmwTwisted, KmwError> {
        let iso = canonical_iso(&self.twist, target).ok_or(KmwError::TwistMismatch)?;
        self.reframe(&iso)
    }

    /// Equality of twisted elements: identical twists compare raw parts;
    /// canonically isomorphic twists compare after reframing.
    pub fn equal(&self, other: &KmwTwisted) -> Result<bool, KmwError> {
        if self.twist == other.twist {
            return self.raw.equal(&other.raw);
        }
        let moved = self.reframe_to(&other.twist)?;
        moved.raw.equal(&other.raw)
    }

    pub fn is_zero(&self) -> Result<bool, KmwError> {
        self.raw.is_zero()
    }

    pub fn map_into(&self, target: &crate::fields::FieldDesc) -> Result<KmwTwisted, KmwError> {
        Ok(KmwTwisted { raw: self.raw.map_into(target)?, twist: self.twist.map_into(target) })
    }

    /// Scale the frame by a unit (an automorphism with determinant u).
    pub fn with_frame_scaled(&self, u: &FieldElem) -> Result<KmwTwisted, KmwError> {
        let iso = crate::vlines::frame_change_unit(&self.twist, u)?;
        self.reframe(&iso)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldDesc;
    use crate::vlines::{switch, VirtualBundle};

    fn gf5() -> FieldDesc {
        FieldDesc::finite(5, 1)
    }

    #[test]
    fn identity_reframe_is_identity() {
        let f = gf5();
        let v = VirtualBundle::trivial(f, 1);
        let x = KmwTwisted::new(KmwElem::symbol(&f.from_i64(2)).unwrap(), v.clone()).unwrap();
        let iso = LineIso::identity(&v);
        let y = x.reframe(&iso).unwrap();
        assert!(x.equal(&y).unwrap());
    }

    #[test]
    fn reframe_by_minus_one_multiplies_by_gw_unit() {
        let f = gf5();
        let v = VirtualBundle::trivial(f, 1);
        let x = KmwTwisted::new(KmwElem::symbol(&f.from_i64(2)).unwrap(), v.clone()).unwrap();
        let iso = crate::vlines::frame_change_unit(&v, &f.from_i64(-1)).unwrap();
        let y = x.reframe(&iso).unwrap();
        let expect = KmwElem::gw_unit(&f.from_i64(-1))
            .unwrap()
            .mul(&x.raw)
            .unwrap();
        assert!(y.raw.equal(&expect).unwrap());
    }

    #[test]
    fn reframe_round_trip() {
        let f = gf5();
        let v = VirtualBundle::trivial(f, 1);
        let x = KmwTwisted::new(KmwElem::symbol(&f.from_i64(3)).unwrap(), v.clone()).unwrap();
        let iso = crate::vlines::frame_change_unit(&v, &f.from_i64(2)).unwrap();
        let there = x.reframe(&iso).unwrap();
        let back = there.reframe(&iso.inverse()).unwrap();
        assert!(back.equal(&x).unwrap());
    }

    #[test]
    fn squares_act_trivially() {
        let f = gf5();
        let v = VirtualBundle::trivial(f, 1);
        let x = KmwTwisted::new(KmwElem::symbol(&f.from_i64(2)).unwrap(), v.clone()).unwrap();
        let y = x.with_frame_scaled(&f.from_i64(4)).unwrap(); // 4 = 2^2
        // frames differ but the elements are equal under reframing back
        let back = y.reframe_to(&x.twist);
        // the twists differ only by the unit; canonical_iso relates them
        assert!(back.is_ok());
        assert!(back.unwrap().equal(&x).unwrap());
    }

    #[test]
    fn switch_action_is_koszul_sign() {
        let f = gf5();
        let a = VirtualBundle::trivial(f, 1);
        let x = KmwTwisted::new(
            KmwElem::symbols(f, &[f.from_i64(2), f.from_i64(3)]).unwrap(),
            a.sum(&a),
        )
        .unwrap();
        let iso = switch(&a, &a);
        let y = x.reframe(&iso).unwrap();
        let expect = KmwElem::gw_unit(&f.from_i64(-1)).unwrap().mul(&x.raw).unwrap();
        assert!(y.raw.equal(&expect).unwrap());
    }
}
