pub mod ansatz;
pub mod chc;
pub mod cli;
pub mod clifford;
pub mod data;
pub mod error;
pub mod parallel;
pub mod shadow;
pub mod statevector;
pub mod trainer;
pub mod verify;

pub use error::{Error, ErrorCategory, Result};
