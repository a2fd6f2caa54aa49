//! Scalar tower: exact cyclotomic numbers and degree-truncated polynomials
//! in formal marked-point variables.

mod cyc;
mod marked;

pub use cyc::{conductor_for_order, Cyc, Rat};
pub use marked::{Marked, MarkedCtx};
