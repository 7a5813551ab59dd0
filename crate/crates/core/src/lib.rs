//! Bounded-depth types of finite relational structures, distorted sums of
//! structures and the Gaifman locality procedures built on them.

pub mod error;
pub mod structure;
pub mod theory;
pub mod dsum;
pub mod io;
pub mod locality;
pub mod report;

pub use error::{Error, Result};
