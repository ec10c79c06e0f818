//! Ready-made benchmark problems.

use std::sync::Arc;

use crate::field::{LShapeSolution, ScalarField};
use crate::geometry::{Frame, Point2, Polygon};
use crate::mesh::{build_mesh, BoundaryLabel, Mesh};
use crate::problem::Problem;

/// Minimal mesh of the L-shaped domain `(-1, 1)² \ [-1, 0]²`: the upper
/// rectangle and the lower right square, with a hanging node at the origin.
pub fn lshape_mesh() -> Mesh {
    let p = |x, y| Point2::new(x, y);
    let top = Polygon::new(vec![p(-1.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(-1.0, 1.0)]).expect("valid rectangle");
    let low = Polygon::new(vec![p(0.0, -1.0), p(1.0, -1.0), p(1.0, 0.0), p(0.0, 0.0)]).expect("valid square");
    build_mesh(&[top, low], |_, _| BoundaryLabel::Dirichlet).expect("the L-shape cells are conforming")
}

/// Harmonic corner singularity `r^{2/3} sin(2/3 (θ + π/2))` with Dirichlet
/// data on the whole boundary and unit transmissivity.
pub fn lshape_problem() -> Problem {
    let exact: Arc<dyn ScalarField> = Arc::new(LShapeSolution);
    Problem::manufactured(exact, &[Frame::xy()], &[1.0])
}
