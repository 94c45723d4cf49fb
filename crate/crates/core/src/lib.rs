//! Relational clone theory with uniqueness quantification over finite
//! domains: polymorphisms, pp/qfpp/upp definability, Boolean co-clone
//! identification, and parsimonious reductions between constraint
//! problems.

pub mod budget;
pub mod error;
pub mod relcore;
pub mod closure;
pub mod lattice;
pub mod weakbase;
pub mod ppart;
pub mod csp;
pub mod reduce;
pub mod cli;
pub(crate) mod search;

pub use budget::Budget;
pub use error::{Error, Result};
