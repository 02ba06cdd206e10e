//! L_p support functions, L_p polar bodies, L_p Mahler volumes and shadow
//! systems for convex bodies in dimensions one to three (four by Monte Carlo),
//! together with an executable suite of the inequalities relating them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod bodies;
pub mod error;
pub mod format;
pub mod lp;
pub mod quadrature;
pub mod rng;
pub mod shadow;
pub mod verify;

pub use error::{Error, Result};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
