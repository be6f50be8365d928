//! Random walks, harmonic functions and abelian sandpiles on supercritical percolation clusters.

pub mod blockcut;
pub mod diamond;
pub mod error;
pub mod field;
pub mod flow;
pub mod gadget;
pub mod graph;
pub mod harmonic;
pub mod harness;
pub mod lattice;
pub mod percolation;
pub mod potential;
pub mod sandpile;
pub mod solver;

pub use error::{LabError, Result};
