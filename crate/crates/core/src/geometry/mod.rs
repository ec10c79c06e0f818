//! Planar polygon primitives: moments, characteristic radii, collinearity,
//! line/polygon intersection and sub-triangulation.
//!
//! Everything here works in floating point with relative tolerances; there
//! is no exact arithmetic. Polygons are expected counter-clockwise.

mod decompose;
mod frame;
mod point;
pub mod quadrature;

pub use decompose::{convex_decomposition, ear_clip, point_in_polygon};
pub use frame::Frame;
pub use point::{Point2, Point3};
pub use quadrature::{gauss_legendre, gauss_segment, gauss_triangle, polygon_quadrature};

use thiserror::Error;

/// Relative vertex-coincidence tolerance (scaled by the polygon diameter).
pub const TOL_LEN_REL: f64 = 1e-9;
/// Relative collinearity tolerance.
pub const TOL_COL: f64 = 1e-9;
/// Relative area tolerance (scaled by the squared diameter).
pub const TOL_AREA_REL: f64 = 1e-12;
/// Relative eigengap under which the inertia tensor is treated as isotropic.
pub const TOL_EIGENGAP: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has non-finite coordinates")]
    NonFinite,
    #[error("degenerate polygon (signed area {area:e})")]
    Degenerate { area: f64 },
    #[error("consecutive vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("polygon is not convex")]
    NotConvex,
    #[error("point lies outside the polygon")]
    PointOutside,
    #[error("line meets the polygon boundary {0} times, expected 2")]
    BadIntersection(usize),
    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(usize),
}

/// Counter-clockwise simple polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Validates vertex count, finiteness, orientation and repeated vertices.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let diam = diameter(&vertices);
        let area = signed_area(&vertices);
        if area <= TOL_AREA_REL * diam * diam {
            return Err(GeometryError::Degenerate { area });
        }
        let tol = TOL_LEN_REL * diam;
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i].distance(vertices[j]) <= tol {
                return Err(GeometryError::RepeatedVertex(i, j));
            }
        }
        Ok(Self { vertices })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        is_convex(&self.vertices)
    }
}

pub fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let o = vertices[0];
    let mut s = 0.0;
    for i in 1..n.saturating_sub(1) {
        s += (vertices[i] - o).cross(vertices[i + 1] - o);
    }
    0.5 * s
}

pub fn diameter(vertices: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            d = d.max(a.distance(*b));
        }
    }
    d
}

/// Convexity test that tolerates collinear (aligned) vertices.
pub fn is_convex(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    let diam = diameter(vertices);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let turn = (b - a).cross(c - b);
        if turn < -TOL_COL * diam * diam {
            return false;
        }
    }
    signed_area(vertices) > 0.0
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// True iff `c` lies within `tol_col * max(|ab|, |bc|)` of the line through `a` and `b`.
///
/// The predicate is symmetric in `a` and `c`, so either endpoint of a run may be
/// used as the anchor.
pub fn are_collinear(a: Point2, b: Point2, c: Point2, tol_col: f64) -> bool {
    let scale = a.distance(b).max(b.distance(c));
    if scale == 0.0 {
        return true;
    }
    // twice the triangle area over the longest side is the height on that side
    let ac = a.distance(c);
    let base = scale.max(ac);
    let height = (b - a).cross(c - a).abs() / base;
    height <= tol_col * scale
}

/// Second moments of area about the centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor {
    /// ∫ (y - y_c)² dA
    pub yy: f64,
    /// ∫ (x - x_c)(y - y_c) dA
    pub xy: f64,
    /// ∫ (x - x_c)² dA
    pub xx: f64,
}

impl InertiaTensor {
    /// Rotational form `[[∫y², -∫xy], [-∫xy, ∫x²]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.yy, -self.xy], [-self.xy, self.xx]]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let [[a, b], [_, c]] = self.matrix();
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mean + rad, mean - rad)
    }

    /// Unit eigenvector of the largest eigenvalue, or `None` when the two
    /// eigenvalues are within [`TOL_EIGENGAP`] relative of each other.
    pub fn max_eigenvector(&self) -> Option<Point2> {
        let (l1, l2) = self.eigenvalues();
        if l1 - l2 <= TOL_EIGENGAP * self.trace() {
            return None;
        }
        let [[a, b], [_, c]] = self.matrix();
        let v1 = Point2::new(b, l1 - a);
        let v2 = Point2::new(l1 - c, b);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        Some(canonical_direction(v / v.norm()))
    }
}

/// Flip a direction so that it points into the half plane `x > 0` (or `+y`).
pub fn canonical_direction(d: Point2) -> Point2 {
    if d.x < 0.0 || (d.x == 0.0 && d.y < 0.0) {
        -d
    } else {
        d
    }
}

/// Cached geometric quantities of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub centroid: Point2,
    pub area: f64,
    pub inertia: InertiaTensor,
    /// Minimum distance from the centroid to the edges.
    pub r_in: f64,
    /// Maximum distance from the centroid to the vertices.
    pub r_out: f64,
    /// Shortest edge length.
    pub h_min: f64,
    /// Longest edge length.
    pub h_max: f64,
    pub diameter: f64,
    pub n_vertices: usize,
}

impl CellGeometry {
    /// `min{h_E, r_E}`, the local size used by the quality checks.
    pub fn rho(&self) -> f64 {
        self.h_min.min(self.r_in)
    }

    pub fn aspect_rr(&self) -> f64 {
        self.r_out / self.r_in
    }

    pub fn aspect_rh(&self) -> f64 {
        self.r_out / self.h_min
    }
}

/// Area, centroid and centroidal second moments by Green's theorem.
pub fn polygon_moments(vertices: &[Point2]) -> (f64, Point2, InertiaTensor) {
    let n = vertices.len();
    let inv_n = 1.0 / n as f64;
    let shift = vertices
        .iter()
        .fold(Point2::new(0.0, 0.0), |acc, p| acc + *p * inv_n);

    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = vertices[i] - shift;
        let q = vertices[(i + 1) % n] - shift;
        let w = p.cross(q);
        area2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    let area = 0.5 * area2;
    let c = Point2::new(cx / (3.0 * area2), cy / (3.0 * area2));
    let centroid = c + shift;

    let (mut ixx, mut iyy, mut ixy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = vertices[i] - centroid;
        let q = vertices[(i + 1) % n] - centroid;
        let w = p.cross(q);
        ixx += (p.x * p.x + p.x * q.x + q.x * q.x) * w;
        iyy += (p.y * p.y + p.y * q.y + q.y * q.y) * w;
        ixy += (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y) * w;
    }
    let inertia = InertiaTensor {
        xx: ixx / 12.0,
        yy: iyy / 12.0,
        xy: ixy / 24.0,
    };
    (area, centroid, inertia)
}

pub fn compute_cell_geometry(poly: &Polygon) -> Result<CellGeometry, GeometryError> {
    cell_geometry_of(poly.vertices())
}

pub(crate) fn cell_geometry_of(vertices: &[Point2]) -> Result<CellGeometry, GeometryError> {
    let n = vertices.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    let diam = diameter(vertices);
    let (area, centroid, inertia) = polygon_moments(vertices);
    if !(area > TOL_AREA_REL * diam * diam) {
        return Err(GeometryError::Degenerate { area });
    }
    let mut r_in = f64::INFINITY;
    let mut r_out: f64 = 0.0;
    let mut h_min = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let len = a.distance(b);
        h_min = h_min.min(len);
        h_max = h_max.max(len);
        r_in = r_in.min(point_segment_distance(centroid, a, b));
        r_out = r_out.max(centroid.distance(a));
    }
    Ok(CellGeometry {
        centroid,
        area,
        inertia,
        r_in,
        r_out,
        h_min,
        h_max,
        diameter: diam,
        n_vertices: n,
    })
}

/// Unit direction of the line through the centroid used to bisect a
/// non-triangular cell: parallel to the eigenvector of the largest
/// eigenvalue of the rotational inertia tensor. Isotropic tensors fall back
/// to the normal of the (first) longest edge.
pub fn max_momentum_direction(vertices: &[Point2], inertia: &InertiaTensor) -> Point2 {
    if let Some(d) = inertia.max_eigenvector() {
        return d;
    }
    let n = vertices.len();
    let mut best = 0;
    let mut best_len = 0.0;
    for i in 0..n {
        let len = vertices[i].distance(vertices[(i + 1) % n]);
        if len > best_len * (1.0 + 1e-12) {
            best = i;
            best_len = len;
        }
    }
    let t = vertices[(best + 1) % n] - vertices[best];
    canonical_direction(Point2::new(-t.y, t.x) / t.norm())
}

/// One boundary crossing of a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineHit {
    /// Edge index (edge `i` joins vertex `i` and `i + 1`).
    pub edge: usize,
    /// Position along the edge in `[0, 1]`; exactly 0 or 1 when snapped to a vertex.
    pub param: f64,
    pub point: Point2,
}

impl LineHit {
    /// Index of the polygon vertex hit, if the crossing was snapped to one.
    pub fn vertex(&self, n: usize) -> Option<usize> {
        if self.param == 0.0 {
            Some(self.edge)
        } else if self.param == 1.0 {
            Some((self.edge + 1) % n)
        } else {
            None
        }
    }
}

/// Intersect the line `point + s * dir` with a convex polygon containing `point`.
///
/// Returns the two boundary crossings ordered by increasing `s`. Crossings
/// within `tol_len` of a vertex are reported at that vertex with parameter 0.
pub fn line_polygon_intersection(
    poly: &Polygon,
    point: Point2,
    dir: Point2,
) -> Result<[LineHit; 2], GeometryError> {
    if !poly.is_convex() {
        return Err(GeometryError::NotConvex);
    }
    line_convex_intersection(poly.vertices(), point, dir)
}

pub(crate) fn line_convex_intersection(
    vertices: &[Point2],
    point: Point2,
    dir: Point2,
) -> Result<[LineHit; 2], GeometryError> {
    let n = vertices.len();
    let diam = diameter(vertices);
    let tol = TOL_LEN_REL * diam;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (b - a).cross(point - a) <= 0.0 {
            return Err(GeometryError::PointOutside);
        }
    }
    let d = dir / dir.norm();
    let dist: Vec<f64> = vertices.iter().map(|v| d.cross(*v - point)).collect();

    let mut hits: Vec<LineHit> = Vec::with_capacity(2);
    for i in 0..n {
        let j = (i + 1) % n;
        let (fi, fj) = (dist[i], dist[j]);
        if fi.abs() <= tol {
            hits.push(LineHit {
                edge: i,
                param: 0.0,
                point: vertices[i],
            });
            continue;
        }
        if fj.abs() <= tol || fi.signum() == fj.signum() {
            continue;
        }
        let t = fi / (fi - fj);
        let (a, b) = (vertices[i], vertices[j]);
        let len = a.distance(b);
        let hit = if t * len <= tol {
            LineHit {
                edge: i,
                param: 0.0,
                point: a,
            }
        } else if (1.0 - t) * len <= tol {
            LineHit {
                edge: i,
                param: 1.0,
                point: b,
            }
        } else {
            LineHit {
                edge: i,
                param: t,
                point: a + (b - a) * t,
            }
        };
        hits.push(hit);
    }
    if hits.len() != 2 {
        return Err(GeometryError::BadIntersection(hits.len()));
    }
    let s0 = (hits[0].point - point).dot(d);
    let s1 = (hits[1].point - point).dot(d);
    if s0 <= s1 {
        Ok([hits[0], hits[1]])
    } else {
        Ok([hits[1], hits[0]])
    }
}

/// Sub-triangles joining the centroid to every edge.
pub fn fan_triangulate(poly: &Polygon) -> Result<Vec<[Point2; 3]>, GeometryError> {
    if !poly.is_convex() {
        return Err(GeometryError::NotConvex);
    }
    let (_, c, _) = polygon_moments(poly.vertices());
    Ok(fan_about(poly.vertices(), c))
}

pub(crate) fn fan_about(vertices: &[Point2], center: Point2) -> Vec<[Point2; 3]> {
    let n = vertices.len();
    (0..n)
        .map(|i| [center, vertices[i], vertices[(i + 1) % n]])
        .collect()
}

/// Drop vertices that lie on the straight segment between their neighbours.
pub fn remove_collinear(vertices: &[Point2], tol_col: f64) -> Vec<Point2> {
    let n = vertices.len();
    let keep: Vec<bool> = (0..n)
        .map(|i| {
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            !are_collinear(prev, vertices[i], next, tol_col)
        })
        .collect();
    vertices
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Polygon {
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn unit_square_radii() {
        let g = compute_cell_geometry(&square()).unwrap();
        assert_relative_eq!(g.r_in, 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.r_out, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.diameter, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.h_min, 1.0);
        assert_relative_eq!(g.h_max, 1.0);
        assert_eq!(g.n_vertices, 4);
    }

    #[test]
    fn rectangle_inertia() {
        let rect = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let g = compute_cell_geometry(&rect).unwrap();
        assert_relative_eq!(g.centroid.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.centroid.y, 0.5, epsilon = 1e-15);
        let (l1, l2) = g.inertia.eigenvalues();
        assert_relative_eq!(l1, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(l2, 1.0 / 6.0, epsilon = 1e-14);
        let v = g.inertia.max_eigenvector().unwrap();
        assert_relative_eq!(v.x.abs(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(v.y.abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reference_triangle_aspect() {
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let g = compute_cell_geometry(&tri).unwrap();
        assert_relative_eq!(g.aspect_rr(), 10f64.sqrt(), epsilon = 1e-13);
        assert_relative_eq!(g.aspect_rh(), 5f64.sqrt() / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn degenerate_polygons_rejected() {
        let flat = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        assert!(matches!(
            Polygon::new(flat),
            Err(GeometryError::Degenerate { .. })
        ));
        let cw = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        assert!(Polygon::new(cw).is_err());
        assert_eq!(
            Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        );
    }

    #[test]
    fn collinearity_predicate() {
        let o = Point2::new(0.0, 0.0);
        let a = Point2::new(1.0, 0.0);
        assert!(are_collinear(o, a, Point2::new(2.0, 0.0), TOL_COL));
        assert!(!are_collinear(o, a, Point2::new(2.0, 1.0), TOL_COL));
        assert!(are_collinear(o, a, Point2::new(2.0, 1e-14), 1e-9));
        // symmetric in the two outer points
        let c = Point2::new(2.0, 3e-10);
        assert_eq!(
            are_collinear(o, a, c, TOL_COL),
            are_collinear(c, a, o, TOL_COL)
        );
    }

    #[test]
    fn square_vertical_line_hits_midpoints() {
        let hits =
            line_polygon_intersection(&square(), Point2::new(0.5, 0.5), Point2::new(0.0, 1.0))
                .unwrap();
        assert_eq!(hits[0].edge, 0);
        assert_relative_eq!(hits[0].param, 0.5);
        assert_relative_eq!(hits[0].point.y, 0.0);
        assert_eq!(hits[1].edge, 2);
        assert_relative_eq!(hits[1].param, 0.5);
        assert_relative_eq!(hits[1].point.y, 1.0);
    }

    #[test]
    fn square_diagonal_snaps_to_corners() {
        let d = Point2::new(1.0, 1.0) / 2f64.sqrt();
        let hits = line_polygon_intersection(&square(), Point2::new(0.5, 0.5), d).unwrap();
        assert_eq!(hits[0].vertex(4), Some(0));
        assert_eq!(hits[0].point, Point2::new(0.0, 0.0));
        assert_eq!(hits[1].vertex(4), Some(2));
        assert_eq!(hits[1].point, Point2::new(1.0, 1.0));
    }

    #[test]
    fn triangle_horizontal_line_through_centroid() {
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        let c = compute_cell_geometry(&tri).unwrap().centroid;
        let hits = line_polygon_intersection(&tri, c, Point2::new(1.0, 0.0)).unwrap();
        // oracle: y = 1 meets x = 0 at (0, 1) and 3x + 4y = 12 at (8/3, 1)
        assert_eq!(hits[0].edge, 2);
        assert_relative_eq!(hits[0].param, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(hits[0].point.y, 1.0, epsilon = 1e-14);
        assert_eq!(hits[1].edge, 1);
        assert_relative_eq!(hits[1].param, 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(hits[1].point.x, 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn intersection_rejects_bad_input() {
        let outside = line_polygon_intersection(
            &square(),
            Point2::new(2.0, 0.5),
            Point2::new(0.0, 1.0),
        );
        assert_eq!(outside, Err(GeometryError::PointOutside));
        let dart = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(0.0, 2.0),
            Point2::new(0.5, 1.0),
        ])
        .unwrap();
        assert_eq!(
            line_polygon_intersection(&dart, Point2::new(1.0, 1.0), Point2::new(1.0, 0.0)),
            Err(GeometryError::NotConvex)
        );
    }

    #[test]
    fn fan_of_square_is_four_quarters() {
        let tris = fan_triangulate(&square()).unwrap();
        assert_eq!(tris.len(), 4);
        for t in tris {
            assert_relative_eq!(signed_area(&t), 0.25, epsilon = 1e-15);
        }
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let parts = fan_triangulate(&tri).unwrap();
        assert_eq!(parts.len(), 3);
        let total: f64 = parts.iter().map(|t| signed_area(t)).sum();
        assert_relative_eq!(total, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn regular_hexagon_falls_back_to_edge_normal() {
        let verts: Vec<Point2> = (0..6)
            .map(|i| {
                let a = std::f64::consts::PI / 3.0 * i as f64;
                Point2::new(a.cos(), a.sin())
            })
            .collect();
        let (_, _, inertia) = polygon_moments(&verts);
        assert!(inertia.max_eigenvector().is_none());
        let d = max_momentum_direction(&verts, &inertia);
        let e0 = verts[1] - verts[0];
        assert_relative_eq!(d.dot(e0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn remove_collinear_drops_hanging_nodes() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let out = remove_collinear(&pts, TOL_COL);
        assert_eq!(out.len(), 4);
        assert_eq!(remove_collinear(&out, TOL_COL), out);
    }
}
