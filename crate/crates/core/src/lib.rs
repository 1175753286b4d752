//! Exact-arithmetic workbench for the equivariant birational geometry of the
//! Klein simple group of order 168.
//!
//! The crate builds the group as explicit matrices over Q(zeta_7), its
//! invariant theory on the plane, the Picard module of the degree-2 del Pezzo
//! surface, group cohomology of subgroup actions on lattices, and the del
//! Pezzo fibration models with their certified equivariant birational maps.
//! Every computation is exact; no floating point is used in any decision.

pub mod exact;
pub mod group;
pub mod invariants;
pub mod picard;
pub mod cohomology;
pub mod fibration;

pub use exact::{CycloNum, IntMatrix, MultiPoly, Rational, VarContext};
