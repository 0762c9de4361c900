//! Rigidity and jamming analysis for periodic ball packings: rigidity
//! matrices and their affine and phase-periodic extensions, stress
//! linear programs, quotient-character sublattice tests, RUM spectrum
//! scans, the planar edge-flex calculus, and the twenty-disk pentagon
//! analytics.

pub mod catalog;
pub mod edgeflex;
pub mod error;
pub mod framework;
pub mod jamming;
pub mod lattice;
pub mod numkernel;
pub mod packing;
pub mod pentagon;
pub mod spectrum;

pub use error::{Error, Result};
