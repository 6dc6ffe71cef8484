//! Error type shared by mesh construction, assembly, solving, and
//! certification.

use crate::solver::PicardTrace;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mesh file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The triangulation is not a conforming mesh (bad indices, inverted or
    /// duplicated elements, edges shared by more than two triangles, ...).
    #[error("topology error: {0}")]
    Topology(String),

    /// Degenerate geometry (zero-area triangle, coincident vertices).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The mesh has no Dirichlet boundary vertex, so boundary distances and
    /// the diagonal scaling are undefined.
    #[error("mesh has no Dirichlet boundary vertex")]
    NoBoundary,

    /// A linear solve failed (singular matrix or iteration breakdown).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// The Picard iteration did not reach the requested tolerance.
    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last increment {last_increment:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_increment: f64,
        /// Per-iteration increments recorded before the failure.
        trace: Box<PicardTrace>,
    },

    /// The diagonal scaling construction produced an invalid parameter set.
    #[error("scaling construction failed: {0}")]
    Scaling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
