//! Exact symbolic computation in Milnor-Witt K-theory: the graded algebra
//! with its defining relations, cycle (pre)modules over small field towers,
//! Rost-Schmid style cycle complexes and their homology, Gysin maps and
//! products, and the adjunction with classical Milnor K-theory.
//!
//! Everything is exact: integer linear algebra with arbitrary precision,
//! finite fields of odd order and rational function fields over them.

pub mod abgroup;
pub mod adjunction;
pub mod expr;
pub mod fields;
pub mod geom;
pub mod gysin_products;
pub mod kmw;
pub mod premodule;
pub mod sampling;
pub mod vlines;

pub use abgroup::{FgAbGroup, GroupMap};
