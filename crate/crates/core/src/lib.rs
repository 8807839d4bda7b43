//! Constructive dynamics of parametric weighted backward shifts.
//!
//! Given a weight family, a compact parameter interval, and a pair of open
//! balls, this crate checks the applicability conditions, plans the block
//! parameters of a common visiting vector, assembles the vector, and
//! verifies its scheduled visits and visit densities on a parameter grid.

pub mod checker;
pub mod config;
pub mod construct;
pub mod density;
mod error;
mod par;
pub mod pipeline;
pub mod space;
pub mod verify;
pub mod weights;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
