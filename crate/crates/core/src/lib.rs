//! Numerical toolkit for remote ensemble preparation, entropic uncertainty
//! relations and information-disturbance trade-offs in finite dimensions.

pub mod accinfo;
pub mod bb84;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod quantum;
pub mod random;
pub mod report;
pub mod scenario;
pub mod selftest;
pub mod steering;
pub mod uncertainty;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
