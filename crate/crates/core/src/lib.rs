pub mod config;
mod elliptic;
pub mod error;
pub mod gl;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod newton;
pub mod ode;
pub mod pde;
pub mod special;
pub mod verify;

pub use config::SolverConfig;
pub use error::{Error, Result};
