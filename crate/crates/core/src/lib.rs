//! Reassembly of line-drawing jigsaw puzzles.
//!
//! Pieces are players of a polymatrix game whose pure strategies are discrete
//! poses. Pairwise payoffs reward good continuation of line segments across
//! touching borders and punish overlap; discrete replicator dynamics then
//! drive the mixed-strategy profile toward a Nash equilibrium that is decoded
//! into a placement.

pub mod error;
pub mod geometry;
pub mod puzzle;
pub mod compat;
pub mod solver;
pub mod assembly;
pub mod eval;
pub mod pipeline;
pub mod io;
pub mod render;

pub use error::{Error, Result};
