//! Condition-based maintenance for systems whose overall degradation is a
//! weighted sum of independent gamma processes, with imperfect repairs
//! modelled as a geometric process.

pub mod cost;
pub mod degradation;
pub mod error;
pub mod heterogeneity;
pub mod orderstat;
pub mod policy;
pub mod quad;
pub mod scenario;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
