pub mod error;
pub mod numkernel;

pub use error::{Error, Result};
