//! Counting answers to conjunctive queries and their unions, plain and under
//! guarded full tuple-generating dependencies.

pub mod algebra;
pub mod approx;
pub mod canon;
pub mod chase;
pub mod closure;
pub mod equivalence;
pub mod error;
pub mod gen;
pub mod hom;
pub mod measures;
pub mod model;
pub mod recovery;
pub mod reductions;
pub mod text;

pub use error::{Error, Result};
pub use model::*;
