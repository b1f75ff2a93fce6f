//! Exact multilinear algebra for higher Weil Jacobians of polarized abelian
//! varieties and for pushforwards of invariant forms along their projections.

pub mod abelian;
pub mod analysis;
pub mod cli;
pub mod exterior;
pub mod linalg;
pub mod scalar;
pub mod weil;
