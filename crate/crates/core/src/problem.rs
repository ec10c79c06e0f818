//! Data of a steady Darcy problem on a set of fractures.

use std::sync::Arc;

use crate::field::{Jet, ScalarField};
use crate::geometry::{Frame, Point3};

/// Per-fracture coefficients. All fields are evaluated at 3D points of
/// the fracture.
#[derive(Clone)]
pub struct FractureData {
    /// Transmissivity `K_i`.
    pub transmissivity: f64,
    /// Source `Q_i`.
    pub source: Arc<dyn ScalarField>,
    /// Values imposed on Dirichlet edges of this fracture.
    pub dirichlet: Arc<dyn ScalarField>,
    /// Reference solution, if known.
    pub exact: Option<Arc<dyn ScalarField>>,
}

impl FractureData {
    pub fn new(transmissivity: f64, source: Arc<dyn ScalarField>, dirichlet: Arc<dyn ScalarField>) -> Self {
        Self {
            transmissivity,
            source,
            dirichlet,
            exact: None,
        }
    }

    /// Data generated from a known solution: the source is `-K Δ_τ exact`
    /// in the plane of `frame` and the Dirichlet values are `exact`.
    pub fn manufactured(exact: Arc<dyn ScalarField>, frame: &Frame, transmissivity: f64) -> Self {
        Self {
            transmissivity,
            source: Arc::new(ManufacturedSource {
                exact: exact.clone(),
                transmissivity,
                e1: frame.e1,
                e2: frame.e2,
            }),
            dirichlet: exact.clone(),
            exact: Some(exact),
        }
    }
}

/// Data of every fracture. Neumann boundaries are homogeneous (no flux).
#[derive(Clone)]
pub struct Problem {
    pub fractures: Vec<FractureData>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("fractures", &self.fractures.len())
            .field("exact", &self.has_exact())
            .finish()
    }
}

/// `-K Δ_τ U` where `Δ_τ` is the Laplacian in the fracture plane.
pub struct ManufacturedSource {
    pub exact: Arc<dyn ScalarField>,
    pub transmissivity: f64,
    pub e1: Point3,
    pub e2: Point3,
}

impl ScalarField for ManufacturedSource {
    fn eval(&self, p: Point3) -> Jet {
        let j = self.exact.eval(p);
        Jet::constant(-self.transmissivity * (j.hess_along(self.e1) + j.hess_along(self.e2)))
    }
}

impl Problem {
    /// The same known solution on every fracture.
    pub fn manufactured(exact: Arc<dyn ScalarField>, frames: &[Frame], transmissivity: &[f64]) -> Self {
        let fractures = frames
            .iter()
            .zip(transmissivity)
            .map(|(f, &k)| FractureData::manufactured(exact.clone(), f, k))
            .collect();
        Self { fractures }
    }

    /// True when every fracture carries a reference solution.
    pub fn has_exact(&self) -> bool {
        !self.fractures.is_empty() && self.fractures.iter().all(|f| f.exact.is_some())
    }
}
