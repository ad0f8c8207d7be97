//! Multisegment calculus for GL(n): L-parameter arithmetic, Zelevinsky
//! duality, Vogan-variety orbit geometry over exact rationals,
//! Grothendieck-group basis changes, and an ABV-packet knowledge base.

pub mod certify;
pub mod conormal;
pub mod duality;
pub mod geometry;
pub mod kb;
pub mod kgroup;
pub mod linalg;
pub mod param;
pub mod parse;
