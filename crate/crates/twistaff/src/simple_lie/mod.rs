//! Simple Lie algebras: root systems, Chevalley bases with exact structure
//! constants, the normalized invariant form, and the standard (anti-)linear
//! involutions.

mod chevalley;
mod root_system;

pub use chevalley::{ChevalleyAlgebra, Elt};
pub(crate) use root_system::rat_solve;
pub use root_system::{LieType, Root, RootSystem, Weight};
