pub mod analysis;
pub mod chase;
pub mod cli;
mod error;
pub mod model;
pub mod rewrite;
pub mod syntax;
pub mod transform;

pub use error::Error;
