pub mod boussinesq;
pub mod elastic;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod io_cli;
pub mod polarization;
pub(crate) mod roots;
pub(crate) mod special;

pub use error::{Error, Result};
