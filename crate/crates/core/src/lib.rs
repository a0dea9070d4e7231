pub mod absorption;
pub mod constants;
pub mod detector;
pub mod error;
pub mod fiber;
pub mod graphene;
pub mod nanotube;
pub mod optical_matrix;
pub mod path;
pub mod quadrature;
pub mod roots;
pub mod runner;
pub mod special;

pub use error::{Error, Result};
