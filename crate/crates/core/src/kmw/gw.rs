//! Degree-zero classification: over a finite field of odd order the
//! Grothendieck-Witt class of a form is determined by rank and discriminant,
//! so GW(GF(q)) = Z (+) Z/2.

use super::{KmwElem, KmwError};
use crate::fields::FieldDesc;
use num_bigint::BigInt;
use num_traits::Zero;

/// Complete invariant of a degree-0 class over GF(q).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GwClass {
    pub rank: BigInt,
    /// true when the discriminant is the nonsquare class
    pub disc_nonsquare: bool,
}

/// Classify a degree-0 element over a finite field: in GW(GF(q)) the
/// element tau = <s> - 1 satisfies tau^2 = 0 and 2 tau = 0, so a word
/// eta^k [a_1..a_k] contributes only for k <= 1.
pub fn gw_classify(x: &KmwElem) -> Result<GwClass, KmwError> {
    if x.degree != 0 {
        return Err(KmwError::WrongDegree { expected: 0, found: x.degree });
    }
    let FieldDesc::Finite(_) = x.field else {
        return Err(KmwError::Undecidable(x.field.to_string_desc()));
    };
    let ctx = x.field.ctx();
    let mut rank = BigInt::zero();
    let mut disc = BigInt::zero();
    for (w, c) in x.terms() {
        match w.eta_pow {
            0 => rank += c,
            1 => {
                if !ctx.is_square(w.symbols[0].as_fq()) {
                    disc += c;
                }
            }
            _ => {
                // tau^2 = 0: products of two or more (<a> - 1) vanish unless
                // some entry is a square, in which case the factor is zero
                // anyway
            }
        }
    }
    use num_integer::Integer;
    Ok(GwClass { rank, disc_nonsquare: disc.mod_floor(&BigInt::from(2)) == BigInt::from(1) })
}
