// Negated float comparisons reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod constants;
pub mod constructions;
pub mod error;
pub mod lattice;
pub mod moduli;
pub mod net;
pub mod norm;
pub(crate) mod search;
pub mod space;
pub mod spec;
pub mod suite;

pub use error::{Error, Result};
pub use norm::{Exponent, NormExpr};
pub use space::LatticeSpace;
