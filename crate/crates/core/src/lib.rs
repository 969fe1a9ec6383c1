//! Certified optimal mechanisms for selling two goods with valuations drawn
//! uniformly from `[c, c+1]^2`.

pub mod closed_forms;
pub mod error;
pub mod fields;
pub mod lp_oracle;
pub mod mechanisms;
pub mod solutions;
pub mod sweep;
pub mod verify;

pub use closed_forms::Regime;
pub use error::{Error, Result};
