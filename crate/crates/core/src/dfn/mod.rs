//! Discrete fracture networks: planar polygonal fractures in 3D coupled
//! along their intersection segments (traces).
//!
//! A network is read from a JSON description, traces are computed pairwise,
//! and a globally conforming minimal mesh is built: every fracture is split
//! into convex cells, cells crossed by a trace are cut along it, and the
//! nodes on each trace are unified so that both fractures share them.

mod build;
mod traces;

pub use build::{build_minimal_dfn_mesh, check_conformity, ConformityReport};
pub use traces::{compute_traces, Trace};

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Constant, Expr, ExprError, ScalarField};
use crate::geometry::{diameter, signed_area, Frame, GeometryError, Point2, Point3, TOL_LEN_REL};
use crate::mesh::{BoundaryLabel, MeshError};
use crate::problem::{FractureData, Problem};

#[derive(Debug, Error)]
pub enum DfnError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed network description at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("the network has no fractures")]
    Empty,
    #[error("fracture {fracture}: {source}")]
    Geometry {
        fracture: usize,
        #[source]
        source: GeometryError,
    },
    #[error("fracture {fracture}: vertex {vertex} is {distance:e} away from the fracture plane")]
    NonPlanar { fracture: usize, vertex: usize, distance: f64 },
    #[error("fracture {fracture}: transmissivity must be positive and finite, got {value}")]
    Transmissivity { fracture: usize, value: f64 },
    #[error("fracture {fracture}, field '{field}': {source}")]
    Expression {
        fracture: usize,
        field: &'static str,
        #[source]
        source: ExprError,
    },
    #[error("bad boundary selector '{0}' (expected e.g. \"x = 0.0\")")]
    Selector(String),
    #[error("fractures {0} and {1} are coplanar and overlap")]
    CoplanarOverlap(usize, usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("no Dirichlet boundary edge in the network")]
    NoDirichlet,
    #[error("trace {trace}: {message}")]
    Conformity { trace: usize, message: String },
}

/// One fracture as written in a network file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureSpec {
    pub vertices: Vec<[f64; 3]>,
    #[serde(default = "unit")]
    pub transmissivity: f64,
    /// Reference solution in global coordinates `x, y, z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// Source term; defaults to `-K Δ exact` when `exact` is given, else 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Dirichlet values; defaults to `exact`, then to the network-wide value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<String>,
}

fn unit() -> f64 {
    1.0
}

/// Boundary condition selection by plane predicates such as `"x = 0"`.
/// An edge matches when both of its endpoints satisfy the predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    /// Label of boundary edges matched by no selector.
    #[serde(default = "default_label")]
    pub default: BoundaryLabel,
    #[serde(default)]
    pub dirichlet: Vec<String>,
    #[serde(default)]
    pub neumann: Vec<String>,
}

fn default_label() -> BoundaryLabel {
    BoundaryLabel::Dirichlet
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self {
            default: BoundaryLabel::Dirichlet,
            dirichlet: Vec::new(),
            neumann: Vec::new(),
        }
    }
}

/// Contents of a network file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDescription {
    pub fractures: Vec<FractureSpec>,
    #[serde(default)]
    pub boundary: BoundarySpec,
    /// Dirichlet values for fractures that set neither `dirichlet` nor `exact`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<String>,
}

impl NetworkDescription {
    pub fn from_json(text: &str) -> Result<Self, DfnError> {
        serde_json::from_str(text).map_err(|e| DfnError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, DfnError> {
        let text = std::fs::read_to_string(path).map_err(|source| DfnError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Axis-aligned plane predicate `coord = value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSelector {
    pub axis: usize,
    pub value: f64,
}

impl PlaneSelector {
    pub fn parse(s: &str) -> Result<Self, DfnError> {
        let bad = || DfnError::Selector(s.to_string());
        let (lhs, rhs) = s.split_once('=').ok_or_else(bad)?;
        let axis = match lhs.trim() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => return Err(bad()),
        };
        let value: f64 = rhs.trim().parse().map_err(|_| bad())?;
        Ok(Self { axis, value })
    }

    pub fn contains(&self, p: Point3, tol: f64) -> bool {
        (p.as_array()[self.axis] - self.value).abs() <= tol
    }
}

#[derive(Debug, Clone)]
pub struct Fracture {
    pub id: usize,
    pub vertices: Vec<Point3>,
    pub frame: Frame,
    /// Vertices in the local frame, counter-clockwise.
    pub local: Vec<Point2>,
    pub transmissivity: f64,
    pub exact: Option<Expr>,
    pub source: Option<Expr>,
    pub dirichlet: Option<Expr>,
}

/// A validated network with its traces.
#[derive(Debug, Clone)]
pub struct FractureNetwork {
    pub fractures: Vec<Fracture>,
    pub traces: Vec<Trace>,
    pub dirichlet_selectors: Vec<PlaneSelector>,
    pub neumann_selectors: Vec<PlaneSelector>,
    pub default_label: BoundaryLabel,
    pub dirichlet: Option<Expr>,
    /// Absolute length tolerance, relative to the network size.
    pub tol: f64,
}

fn parse_expr(src: &Option<String>, fracture: usize, field: &'static str) -> Result<Option<Expr>, DfnError> {
    src.as_deref()
        .map(|s| Expr::parse(s).map_err(|source| DfnError::Expression { fracture, field, source }))
        .transpose()
}

impl FractureNetwork {
    pub fn new(desc: &NetworkDescription) -> Result<Self, DfnError> {
        if desc.fractures.is_empty() {
            return Err(DfnError::Empty);
        }
        let all: Vec<Point3> = desc
            .fractures
            .iter()
            .flat_map(|f| f.vertices.iter().map(|v| Point3::new(v[0], v[1], v[2])))
            .collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &all {
            for (k, c) in p.as_array().into_iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let span = Point3::new(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]).norm();
        let tol = TOL_LEN_REL * span.max(f64::MIN_POSITIVE);

        let mut fractures = Vec::with_capacity(desc.fractures.len());
        for (id, spec) in desc.fractures.iter().enumerate() {
            let vertices: Vec<Point3> = spec.vertices.iter().map(|v| Point3::new(v[0], v[1], v[2])).collect();
            let frame = Frame::from_polygon(&vertices).map_err(|source| DfnError::Geometry { fracture: id, source })?;
            let local: Vec<Point2> = vertices.iter().map(|&v| frame.project(v)).collect();
            let ptol = TOL_LEN_REL * diameter(&local).max(f64::MIN_POSITIVE);
            let worst = vertices
                .iter()
                .map(|&v| frame.height(v).abs())
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((vertex, distance)) = worst {
                if distance > ptol {
                    return Err(DfnError::NonPlanar { fracture: id, vertex, distance });
                }
            }
            if !(signed_area(&local) > 0.0) {
                return Err(DfnError::Geometry {
                    fracture: id,
                    source: GeometryError::Degenerate { area: signed_area(&local) },
                });
            }
            if !(spec.transmissivity.is_finite() && spec.transmissivity > 0.0) {
                return Err(DfnError::Transmissivity { fracture: id, value: spec.transmissivity });
            }
            fractures.push(Fracture {
                id,
                vertices,
                frame,
                local,
                transmissivity: spec.transmissivity,
                exact: parse_expr(&spec.exact, id, "exact")?,
                source: parse_expr(&spec.source, id, "source")?,
                dirichlet: parse_expr(&spec.dirichlet, id, "dirichlet")?,
            });
        }
        let parse_all = |list: &[String]| list.iter().map(|s| PlaneSelector::parse(s)).collect::<Result<Vec<_>, _>>();
        let traces = compute_traces(&fractures, tol)?;
        Ok(Self {
            fractures,
            traces,
            dirichlet_selectors: parse_all(&desc.boundary.dirichlet)?,
            neumann_selectors: parse_all(&desc.boundary.neumann)?,
            default_label: desc.boundary.default,
            dirichlet: parse_expr(&desc.dirichlet, usize::MAX, "dirichlet")?,
            tol,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, DfnError> {
        Self::new(&NetworkDescription::from_file(path)?)
    }

    /// Label of a boundary edge with endpoints `a` and `b`.
    pub fn boundary_label(&self, a: Point3, b: Point3) -> BoundaryLabel {
        let hit = |sel: &[PlaneSelector]| sel.iter().any(|s| s.contains(a, self.tol) && s.contains(b, self.tol));
        if hit(&self.dirichlet_selectors) {
            BoundaryLabel::Dirichlet
        } else if hit(&self.neumann_selectors) {
            BoundaryLabel::Neumann
        } else {
            self.default_label
        }
    }

    pub fn frames(&self) -> Vec<Frame> {
        self.fractures.iter().map(|f| f.frame).collect()
    }

    /// Problem data: per-fracture transmissivity, source (explicit, or
    /// generated from the reference solution), Dirichlet values and
    /// reference solution.
    pub fn problem(&self) -> Problem {
        let global: Arc<dyn ScalarField> = match &self.dirichlet {
            Some(e) => Arc::new(e.clone()),
            None => Arc::new(Constant(0.0)),
        };
        let fractures = self
            .fractures
            .iter()
            .map(|f| {
                let mut data = match &f.exact {
                    Some(u) => FractureData::manufactured(Arc::new(u.clone()), &f.frame, f.transmissivity),
                    None => FractureData::new(f.transmissivity, Arc::new(Constant(0.0)), global.clone()),
                };
                if let Some(q) = &f.source {
                    data.source = Arc::new(q.clone());
                }
                if let Some(g) = &f.dirichlet {
                    data.dirichlet = Arc::new(g.clone());
                }
                data
            })
            .collect();
        Problem { fractures }
    }
}

/// The three-fracture benchmark network shipped with the crate.
pub const THREE_FRACTURES: &str = include_str!("../../data/three_fracture.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        let s = PlaneSelector::parse(" z = -1.5 ").unwrap();
        assert_eq!(s, PlaneSelector { axis: 2, value: -1.5 });
        assert!(s.contains(Point3::new(3.0, 4.0, -1.5), 1e-12));
        assert!(PlaneSelector::parse("w = 1").is_err());
        assert!(PlaneSelector::parse("x < 1").is_err());
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = "{\n  \"fractures\": [\n    {\"vertices\": [[0,0,0], [1,0,0]], \"transmissivity\": }\n  ]\n}";
        match NetworkDescription::from_json(text) {
            Err(DfnError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_planar_vertex_is_named() {
        let text = r#"{"fractures": [{"vertices": [[0,0,0], [1,0,0], [1,1,0.1], [0,1,0]]}]}"#;
        let desc = NetworkDescription::from_json(text).unwrap();
        match FractureNetwork::new(&desc) {
            Err(DfnError::NonPlanar { fracture: 0, vertex, .. }) => assert!(vertex == 2 || vertex == 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shipped_network_parses() {
        let desc = NetworkDescription::from_json(THREE_FRACTURES).unwrap();
        let net = FractureNetwork::new(&desc).unwrap();
        assert_eq!(net.fractures.len(), 3);
        assert_eq!(net.traces.len(), 3);
        assert!(net.problem().has_exact());
    }
}
