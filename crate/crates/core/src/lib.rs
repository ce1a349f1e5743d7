pub mod cli;
pub mod detector;
pub mod error;
pub mod filters;
pub mod motion;
pub mod scene;
pub mod sim;
pub mod tracker;
pub mod ut;

pub use error::{Error, Result};
