pub mod chain;
pub mod chutes;
pub mod cli;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod masks;
pub mod montecarlo;
pub use error::{Error, Result};
