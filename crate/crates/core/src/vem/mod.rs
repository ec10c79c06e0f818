//! Virtual elements of order 1 to 3 on polygonal cells.
//!
//! Local degrees of freedom of a cell with `n` loop vertices, in order:
//! vertex values, `k - 1` values at the interior Gauss–Legendre points of
//! every edge (in the cell's traversal direction), and the scaled moments
//! `|E|⁻¹ ∫ v m_α` for `|α| ≤ k - 2`.

mod layout;
mod local;
mod monomials;
mod system;

pub use layout::{build_dof_layout, DofKind, DofLayout};
pub use local::{assemble_cell, LocalSpace};
pub use monomials::{n_poly, Monomials};
pub use system::{
    assemble_and_solve, energy_error, interpolate, Discretization, LinearSolver, SolveStats,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::mesh::CellId;

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VemError {
    #[error("polynomial order {0} is not supported (use 1, 2 or 3)")]
    UnsupportedOrder(usize),
    #[error("cell {cell}: {source}")]
    Geometry {
        cell: CellId,
        #[source]
        source: GeometryError,
    },
    #[error("cell {0}: singular projector matrix")]
    SingularProjector(CellId),
    #[error("no Dirichlet boundary: the system is singular")]
    NoDirichlet,
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("conjugate gradient stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("fracture {0} has no data")]
    MissingFracture(usize),
}

pub(crate) fn check_order(k: usize) -> Result<(), VemError> {
    if (1..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(VemError::UnsupportedOrder(k))
    }
}
