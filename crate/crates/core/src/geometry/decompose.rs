//! Convex decomposition of simple polygons: ear clipping followed by greedy
//! removal of diagonals (Hertel–Mehlhorn).

use super::{diameter, is_convex, point_segment_distance, remove_collinear, signed_area, GeometryError, Point2, TOL_COL};

fn point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Triangulate a counter-clockwise simple polygon by ear clipping.
/// Returns index triples into `pts`.
pub fn ear_clip(pts: &[Point2]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = pts.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    if !(signed_area(pts) > 0.0) {
        return Err(GeometryError::Degenerate { area: signed_area(pts) });
    }
    let eps = TOL_COL * diameter(pts).powi(2);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if (b - a).cross(c - b) <= eps {
                continue;
            }
            let blocked = idx
                .iter()
                .filter(|&&j| j != ia && j != ib && j != ic)
                .any(|&j| point_in_triangle(pts[j], a, b, c));
            if !blocked {
                out.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(GeometryError::NotConvex);
        }
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

/// Split a counter-clockwise simple polygon into convex pieces. A convex
/// input is returned unchanged as a single piece.
pub fn convex_decomposition(pts: &[Point2]) -> Result<Vec<Vec<Point2>>, GeometryError> {
    if is_convex(pts) {
        return Ok(vec![pts.to_vec()]);
    }
    let simple = remove_collinear(pts, TOL_COL);
    let tris = ear_clip(&simple)?;
    let mut pieces: Vec<Option<Vec<usize>>> = tris.into_iter().map(|t| Some(t.to_vec())).collect();
    let coords = |p: &[usize]| -> Vec<Point2> { p.iter().map(|&i| simple[i]).collect() };

    let mut merged_any = true;
    while merged_any {
        merged_any = false;
        'outer: for a in 0..pieces.len() {
            let Some(pa) = pieces[a].clone() else { continue };
            for b in a + 1..pieces.len() {
                let Some(pb) = pieces[b].clone() else { continue };
                if let Some(m) = merge_along_shared_edge(&pa, &pb) {
                    if is_convex(&coords(&m)) {
                        pieces[a] = Some(m);
                        pieces[b] = None;
                        merged_any = true;
                        continue 'outer;
                    }
                }
            }
        }
    }
    Ok(pieces.into_iter().flatten().map(|p| coords(&p)).collect())
}

/// Union of two counter-clockwise index loops sharing exactly one edge.
fn merge_along_shared_edge(p: &[usize], q: &[usize]) -> Option<Vec<usize>> {
    let (np, nq) = (p.len(), q.len());
    for i in 0..np {
        let (u, v) = (p[i], p[(i + 1) % np]);
        for j in 0..nq {
            if q[j] == v && q[(j + 1) % nq] == u {
                // p from v round to u, then q from u round to v without the ends
                let mut out: Vec<usize> = (0..np).map(|k| p[(i + 1 + k) % np]).collect();
                out.extend((1..nq - 1).map(|k| q[(j + 1 + k) % nq]));
                return Some(out);
            }
        }
    }
    None
}

/// Point in a simple polygon, counting points within `tol` of the boundary
/// as inside.
pub fn point_in_polygon(pts: &[Point2], p: Point2, tol: f64) -> bool {
    let n = pts.len();
    if (0..n).any(|i| point_segment_distance(p, pts[i], pts[(i + 1) % n]) <= tol) {
        return true;
    }
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_shape() -> Vec<Point2> {
        [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&(x, y)| Point2::new(x, y))
            .collect()
    }

    #[test]
    fn ear_clip_covers_area() {
        let pts = l_shape();
        let tris = ear_clip(&pts).unwrap();
        assert_eq!(tris.len(), 4);
        let area: f64 = tris.iter().map(|t| signed_area(&[pts[t[0]], pts[t[1]], pts[t[2]]])).sum();
        assert!((area - 3.0).abs() < 1e-14);
        assert!(tris.iter().all(|t| signed_area(&[pts[t[0]], pts[t[1]], pts[t[2]]]) > 0.0));
    }

    #[test]
    fn l_shape_becomes_two_convex_pieces() {
        let pieces = convex_decomposition(&l_shape()).unwrap();
        assert_eq!(pieces.len(), 2);
        let area: f64 = pieces.iter().map(|p| signed_area(p)).sum();
        assert!((area - 3.0).abs() < 1e-14);
        assert!(pieces.iter().all(|p| is_convex(p)));
    }

    #[test]
    fn convex_input_is_kept() {
        let sq = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
        assert_eq!(convex_decomposition(&sq).unwrap(), vec![sq]);
    }

    #[test]
    fn inside_test() {
        let pts = l_shape();
        assert!(point_in_polygon(&pts, Point2::new(0.5, 1.5), 1e-12));
        assert!(!point_in_polygon(&pts, Point2::new(1.5, 1.5), 1e-12));
        assert!(point_in_polygon(&pts, Point2::new(1.0, 1.5), 1e-12));
    }
}
