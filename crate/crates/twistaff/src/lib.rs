//! Exact verification toolkit for the positive part of twisted affine Lie
//! algebras: cyclotomic scalar arithmetic, Chevalley bases with graded
//! automorphisms, finite-dimensional representations, graded Casimir
//! operators, energy-truncated highest-weight modules, and the homological
//! operators (differentials, codifferentials, Laplacians) acting on
//! loop-algebra chain complexes.

pub mod casimir_ops;
pub mod eta_moebius;
pub mod finite_reps;
pub mod homological;
pub mod graded_aut;
pub mod linalg;
pub mod scalars;
pub mod simple_lie;
pub mod twisted_affine;
