//! Mixed finite elements for nonlinear Biot poroelasticity in five-field form
//! (strain, pressure, stress, displacement, rotation) with weakly imposed
//! stress symmetry on triangles.

pub mod assembly;
pub mod cli;
pub mod condense;
pub mod config;
pub mod elements;
pub mod error;
pub mod mesh;

pub use error::*;
pub mod forms;
pub mod linalg;
pub mod output;
pub mod physics;
pub mod problem;
pub mod scenarios;
pub mod solver;
pub mod verification;
