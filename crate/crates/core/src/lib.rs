pub mod catalog;
pub mod cli;
pub mod error;
pub mod field;
pub mod intpoly;
pub mod linalg;
pub mod padic;
pub mod panayi;
pub mod poly;
pub mod residue;
pub mod search;

pub use error::{Error, Result};
