pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod operators;
pub mod phantom;
pub mod prior;
pub mod rng;
pub mod schedule;
pub mod solvers;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{Dims, Volume};
