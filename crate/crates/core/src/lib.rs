pub mod autodiff;
pub mod error;
pub mod linalg;
pub mod newton;

pub use error::{Error, Result};
pub mod lifts;
pub mod map;
pub mod systems;
pub mod integrators;
pub mod composition;
pub mod manifolds;
