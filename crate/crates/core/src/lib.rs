//! Homogenization toolkit for power-law flow in a thin porous layer coupled
//! to a thin fluid film.

pub mod cell_problem;
pub mod dns;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod reynolds;
pub mod rheology;
pub mod scaling;
pub mod stokes;
pub mod unfolding;

pub use error::{Error, Result};
