//! A lab for Fujisaki-Okamoto KEMs built from imperfectly correct PKE.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod games;
pub mod kem;
pub mod numeric;
pub mod oracle;
pub mod pke;
pub mod report;
pub mod stats;
pub mod toy;

pub use error::{Error, Result};
