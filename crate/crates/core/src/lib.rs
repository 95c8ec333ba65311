//! Desk-scale workbench for lower bounds on planar Hadwiger–Debrunner
//! numbers via collinear point sets in integer grids.

pub mod arith;
pub mod cli;
pub mod coloring;
pub mod containers;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod grid;
pub mod plan;
pub mod report;
pub mod planar;
pub mod randcon;
pub mod search;
pub mod supersat;

pub use error::{Error, Result};
