pub mod complex;
pub mod engine;
pub mod error;
pub mod exactmath;
pub mod forms;
pub mod groupring;
pub mod isometry;
pub mod polyhedra;
pub mod reps;

pub use error::{Error, Result};
