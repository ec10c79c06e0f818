use std::collections::HashMap;

use super::{BoundaryLabel, CellId, Mesh, MeshError, VertexId};
use crate::geometry::{is_convex, Frame, Point2, Point3, Polygon, TOL_LEN_REL};

/// Vertices closer than this many merge tolerances, but not merged, are
/// reported as a gap.
const GAP_FACTOR: f64 = 1e3;

/// Build a planar mesh (fracture 0, `z = 0`) from a list of convex cells.
///
/// Coincident vertices are merged, vertices lying inside another cell's
/// edge become hanging nodes of that cell, and boundary edges are labelled
/// by `rule(a, b)`.
pub fn build_mesh<F>(cells: &[Polygon], rule: F) -> Result<Mesh, MeshError>
where
    F: Fn(Point2, Point2) -> BoundaryLabel,
{
    let mut mesh = Mesh::new();
    mesh.add_region(
        0,
        cells,
        Frame::xy(),
        &|a, b| rule(Point2::new(a.x, a.y), Point2::new(b.x, b.y)),
    )?;
    Ok(mesh)
}

impl Mesh {
    /// Add the cells of one fracture, given in the local coordinates of `frame`.
    pub fn add_region(
        &mut self,
        fracture: usize,
        cells: &[Polygon],
        frame: Frame,
        rule: &dyn Fn(Point3, Point3) -> BoundaryLabel,
    ) -> Result<Vec<CellId>, MeshError> {
        self.set_frame(fracture, frame);
        let (lo, hi) = bounding_box(cells.iter().flat_map(|p| p.vertices().iter().copied()));
        let tol = TOL_LEN_REL * lo.distance(hi).max(f64::MIN_POSITIVE);

        // merge coincident vertices through a uniform hash grid
        let cell_size = 2.0 * tol;
        let key = |p: Point2| ((p.x / cell_size).floor() as i64, (p.y / cell_size).floor() as i64);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut points: Vec<Point2> = Vec::new();
        let mut loops: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
        for poly in cells {
            let mut lp = Vec::with_capacity(poly.len());
            for &p in poly.vertices() {
                let (kx, ky) = key(p);
                let mut found = None;
                'search: for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                            for &i in list {
                                if points[i].distance(p) <= tol {
                                    found = Some(i);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
                let idx = found.unwrap_or_else(|| {
                    points.push(p);
                    grid.entry((kx, ky)).or_default().push(points.len() - 1);
                    points.len() - 1
                });
                lp.push(idx);
            }
            loops.push(lp);
        }

        let base = self.vertices.len();
        for &p in &points {
            self.add_vertex(frame.lift(p), fracture, p);
        }
        check_gaps(&points, tol, base)?;

        // hanging nodes: vertices lying inside an edge of another cell
        for lp in loops.iter_mut() {
            let mut full = Vec::with_capacity(lp.len());
            let n = lp.len();
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                full.push(a);
                let (pa, pb) = (points[a], points[b]);
                let d = pb - pa;
                let len2 = d.dot(d);
                let len = len2.sqrt();
                let mut inside: Vec<(f64, usize)> = points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != a && j != b)
                    .filter_map(|(j, &q)| {
                        let t = (q - pa).dot(d) / len2;
                        let dist = (q - pa).cross(d).abs() / len;
                        (t * len > tol && (1.0 - t) * len > tol && dist <= tol).then_some((t, j))
                    })
                    .collect();
                inside.sort_by(|x, y| x.0.total_cmp(&y.0));
                full.extend(inside.into_iter().map(|(_, j)| j));
            }
            *lp = full;
        }

        let mut edge_of: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut new_cells = Vec::with_capacity(loops.len());
        for lp in &loops {
            let verts: Vec<VertexId> = lp.iter().map(|&i| base + i).collect();
            let pts: Vec<Point2> = lp.iter().map(|&i| points[i]).collect();
            let id = self.cells.len();
            if !is_convex(&pts) {
                return Err(MeshError::NonConvex(id));
            }
            let n = verts.len();
            let mut edges = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                let k = (a.min(b), a.max(b));
                let e = match edge_of.get_mut(&k) {
                    Some((e, uses)) => {
                        // a second use must traverse the edge the other way round
                        let first = self.edges[*e].vertices[0];
                        if *uses >= 2 || first == base + a {
                            return Err(MeshError::Overlap(base + k.0, base + k.1));
                        }
                        *uses += 1;
                        *e
                    }
                    None => {
                        let e = self.push_edge(base + a, base + b, BoundaryLabel::Interior);
                        edge_of.insert(k, (e, 1));
                        e
                    }
                };
                edges.push(e);
            }
            let c = self.push_cell(verts, edges.clone(), fracture, None)?;
            for e in edges {
                self.edges[e].cells.push(c);
            }
            new_cells.push(c);
        }
        for (e, uses) in edge_of.into_values() {
            if uses == 1 {
                let [a, b] = self.edges[e].vertices;
                self.edges[e].label = rule(self.vertices[a].pos, self.vertices[b].pos);
            }
        }
        Ok(new_cells)
    }
}

fn bounding_box(points: impl Iterator<Item = Point2>) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if !lo.is_finite() {
        return (Point2::default(), Point2::default());
    }
    (lo, hi)
}

/// Sweep in x to find distinct vertices that are suspiciously close.
fn check_gaps(points: &[Point2], tol: f64, base: usize) -> Result<(), MeshError> {
    let window = GAP_FACTOR * tol;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    for (s, &i) in order.iter().enumerate() {
        for &j in &order[s + 1..] {
            if points[j].x - points[i].x > window {
                break;
            }
            let d = points[i].distance(points[j]);
            if d <= window {
                return Err(MeshError::Gap(base + i.min(j), base + i.max(j), d));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
        .unwrap()
    }

    #[test]
    fn single_square() {
        let mesh = build_mesh(&[rect(0.0, 0.0, 1.0, 1.0)], |_, _| BoundaryLabel::Dirichlet).unwrap();
        assert_eq!(mesh.n_active_cells(), 1);
        assert_eq!(mesh.edges.len(), 4);
        assert!(mesh.edges.iter().all(|e| e.label == BoundaryLabel::Dirichlet && e.cells.len() == 1));
    }

    #[test]
    fn two_squares_share_an_edge() {
        let mesh = build_mesh(
            &[rect(0.0, 0.0, 1.0, 1.0), rect(1.0, 0.0, 2.0, 1.0)],
            |_, _| BoundaryLabel::Neumann,
        )
        .unwrap();
        assert_eq!(mesh.vertices.len(), 6);
        assert_eq!(mesh.edges.len(), 7);
        let interior: Vec<_> = mesh.edges.iter().filter(|e| e.cells.len() == 2).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].label, BoundaryLabel::Interior);
        mesh.check_incidence().unwrap();
    }

    #[test]
    fn l_shape_has_hanging_origin() {
        let mesh = build_mesh(
            &[rect(-1.0, 0.0, 1.0, 1.0), rect(0.0, -1.0, 1.0, 0.0)],
            |_, _| BoundaryLabel::Dirichlet,
        )
        .unwrap();
        assert_eq!(mesh.n_active_cells(), 2);
        let upper: Vec<Point2> = mesh.cell_points(0);
        assert_eq!(upper.len(), 5);
        assert!(upper.contains(&Point2::new(0.0, 0.0)));
        assert_eq!(mesh.cell_points(1).len(), 4);
        // the shared segment from (0,0) to (1,0) is the only interior edge
        let interior: Vec<_> = mesh.active_edges().filter(|&e| mesh.edges[e].cells.len() == 2).collect();
        assert_eq!(interior.len(), 1);
        let [a, b] = mesh.edges[interior[0]].vertices;
        let mut ends = [mesh.local(a, 0), mesh.local(b, 0)];
        ends.sort_by(|p, q| p.x.total_cmp(&q.x));
        assert_eq!(ends, [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        let g = mesh.aligned_group(0, mesh.cells[0].edges[0]).unwrap();
        assert_eq!(g.count(), 2);
        mesh.check_incidence().unwrap();
    }

    #[test]
    fn overlap_is_rejected() {
        let err = build_mesh(
            &[rect(0.0, 0.0, 1.0, 1.0), rect(0.0, 0.0, 1.0, 1.0)],
            |_, _| BoundaryLabel::Dirichlet,
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Overlap(..)));
    }

    #[test]
    fn gap_is_rejected() {
        let err = build_mesh(
            &[rect(0.0, 0.0, 1.0, 1.0), rect(1.0 + 1e-8, 0.0, 2.0, 1.0)],
            |_, _| BoundaryLabel::Dirichlet,
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Gap(..)));
    }

    #[test]
    fn near_coincident_vertices_merge() {
        let mesh = build_mesh(
            &[rect(0.0, 0.0, 1.0, 1.0), rect(1.0 + 1e-13, 0.0, 2.0, 1.0)],
            |_, _| BoundaryLabel::Dirichlet,
        )
        .unwrap();
        assert_eq!(mesh.vertices.len(), 6);
    }

    #[test]
    fn non_convex_cell_is_rejected() {
        let dart = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.3),
            Point2::new(1.0, 2.0),
        ])
        .unwrap();
        assert!(matches!(
            build_mesh(&[dart], |_, _| BoundaryLabel::Dirichlet),
            Err(MeshError::NonConvex(_))
        ));
    }
}
