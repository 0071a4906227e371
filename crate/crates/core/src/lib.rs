pub mod analytic;
pub mod appendix;
pub mod domain;
pub mod error;
pub mod export;
pub mod expr;
pub mod fixtures;
pub mod interval;
pub mod matrix;
mod modular;
pub mod operator;
pub mod oracle;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
