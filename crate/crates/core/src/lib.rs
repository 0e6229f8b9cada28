//! Finite homogeneous structures defined by forbidden triangles.
//!
//! The crate covers prioritised semi-free amalgamation of complete
//! edge-coloured digraphs, finite approximations of the Fraïssé limit,
//! audits of the induced (possibly asymmetric) stationary independence
//! relation, and finite-scale back-and-forth constructions of partial
//! automorphisms.

#![allow(clippy::needless_range_loop)]

pub mod amalgamation;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fraisse;
pub mod structure;
pub mod swir;

pub use error::{Error, Result};
