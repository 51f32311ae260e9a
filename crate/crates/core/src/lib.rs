//! Second-order Birkhoff polytope toolkit: vertices, affine hull, facet
//! certification, structural identities, the moment-matrix dependence
//! experiment, and cutting-plane lower bounds for quadratic assignment.

// Matrix code reads more clearly with explicit row and column indices.
#![allow(clippy::needless_range_loop)]

pub mod affine_hull;
pub mod error;
pub mod facets;
pub mod insufficiency;
pub mod lemmas;
pub mod linalg;
pub mod perm;
pub mod qap;

pub use error::{Error, Result};
