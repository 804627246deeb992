//! Conditional preferences over finite event algebras.

pub mod condcore;
pub mod error;
pub mod events;
pub mod gaps;
pub mod harness;
pub mod par;
pub mod preference;
pub mod rational;
pub mod representation;
pub mod vnm;

pub use error::{Error, Result};
