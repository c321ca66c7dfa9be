//! Construction and Monte Carlo toolkit for an invariant percolation process
//! on the slab `Z² × {0, 1}` with many robust clusters.
//!
//! The pipeline: sample nested grids and collect fork rectangles
//! ([`gridgen`]), link them into the overlap tree ([`tree`]), cut every
//! rectangle into slices and fold the slices into the slab ([`slicing`]),
//! then run bond percolation on the result ([`percolation`]). The
//! [`planner`] chooses slice counts, [`dualtools`] covers planar duality.

pub mod config;
pub mod dualtools;
pub mod error;
pub mod geometry;
pub mod gridgen;
pub mod percolation;
pub mod planner;
pub mod render;
pub mod report;
pub mod rng;
pub mod slicing;
pub mod symmetry;
pub mod tree;
pub mod unionfind;

pub use error::{Error, Result};
