use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2, Point3};

/// Orthonormal tangential frame of a planar fracture embedded in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point3,
    pub e1: Point3,
    pub e2: Point3,
    pub normal: Point3,
}

impl Frame {
    /// The `xy` plane with the identity frame.
    pub const fn xy() -> Self {
        Self {
            origin: Point3::new(0.0, 0.0, 0.0),
            e1: Point3::new(1.0, 0.0, 0.0),
            e2: Point3::new(0.0, 1.0, 0.0),
            normal: Point3::new(0.0, 0.0, 1.0),
        }
    }

    /// Frame of a planar polygon: origin at the first vertex, `e1` along the
    /// first edge, normal from Newell's formula so that the vertex order is
    /// counter-clockwise in local coordinates.
    pub fn from_polygon(vertices: &[Point3]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut normal = Point3::default();
        for i in 0..n {
            normal = normal + vertices[i].cross(vertices[(i + 1) % n]);
        }
        let area2 = normal.norm();
        let scale = vertices.iter().map(|v| v.distance(vertices[0])).fold(0.0, f64::max);
        if !(area2 > super::TOL_AREA_REL * scale * scale) {
            return Err(GeometryError::Degenerate { area: 0.5 * area2 });
        }
        let normal = normal / area2;
        let first = vertices[1] - vertices[0];
        // remove any out-of-plane component before normalizing
        let first = first - normal * first.dot(normal);
        let e1 = first / first.norm();
        let e2 = normal.cross(e1);
        Ok(Self {
            origin: vertices[0],
            e1,
            e2,
            normal,
        })
    }

    pub fn lift(&self, p: Point2) -> Point3 {
        self.origin + self.e1 * p.x + self.e2 * p.y
    }

    pub fn project(&self, p: Point3) -> Point2 {
        let d = p - self.origin;
        Point2::new(d.dot(self.e1), d.dot(self.e2))
    }

    /// Signed distance of `p` from the plane.
    pub fn height(&self, p: Point3) -> f64 {
        (p - self.origin).dot(self.normal)
    }

    /// Tangential components of a 3D vector.
    pub fn tangential(&self, v: Point3) -> Point2 {
        Point2::new(v.dot(self.e1), v.dot(self.e2))
    }
}
