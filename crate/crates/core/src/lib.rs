//! School choice under constrained deferred acceptance with lottery
//! tie-breaking, and the effect of disclosing the lottery before students
//! submit their lists.

pub mod error;
pub mod harness;
pub mod info;
pub mod market;
pub mod oracle;
pub mod rational;
pub mod stats;
pub mod strategy;

pub use error::{Error, Result};
