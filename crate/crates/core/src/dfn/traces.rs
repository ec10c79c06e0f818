use serde::Serialize;

use super::{DfnError, Fracture};
use crate::geometry::{point_in_polygon, Point2, Point3};

/// Intersection segment of exactly two fractures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub id: usize,
    pub fractures: [usize; 2],
    pub ends: [Point3; 2],
    /// End points in the local frame of `fractures[0]` and `fractures[1]`.
    pub local: [[Point2; 2]; 2],
}

impl Trace {
    pub fn length(&self) -> f64 {
        self.ends[0].distance(self.ends[1])
    }

    /// Parameter of `p` along the trace (0 at `ends[0]`, 1 at `ends[1]`).
    pub fn param(&self, p: Point3) -> f64 {
        let d = self.ends[1] - self.ends[0];
        (p - self.ends[0]).dot(d) / d.dot(d)
    }

    pub fn distance(&self, p: Point3) -> f64 {
        let t = self.param(p).clamp(0.0, 1.0);
        p.distance(self.ends[0].lerp(self.ends[1], t))
    }

    /// Position of fracture `f` in the pair, if it is one of the two.
    pub fn side(&self, f: usize) -> Option<usize> {
        self.fractures.iter().position(|&g| g == f)
    }
}

/// Parameters where the line `q0 + s * dir` (local coordinates) meets the
/// boundary of `poly`.
fn crossings(poly: &[Point2], q0: Point2, dir: Point2, tol: f64) -> Vec<f64> {
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = b - a;
        let len = e.norm();
        let denom = dir.cross(e);
        if denom.abs() <= 1e-12 * len {
            // parallel: keep both ends if the edge lies on the line
            if dir.cross(a - q0).abs() <= tol {
                out.push((a - q0).dot(dir));
                out.push((b - q0).dot(dir));
            }
            continue;
        }
        let s = (a - q0).cross(e) / denom;
        let t = (a - q0).cross(dir) / denom;
        if t * len >= -tol && (1.0 - t) * len >= -tol {
            out.push(s);
        }
    }
    out
}

fn coplanar_overlap(a: &[Point2], b: &[Point2], tol: f64) -> bool {
    let inside_strict = |poly: &[Point2], p: Point2| {
        let n = poly.len();
        point_in_polygon(poly, p, 0.0)
            && (0..n).all(|i| crate::geometry::point_segment_distance(p, poly[i], poly[(i + 1) % n]) > tol)
    };
    let centroid = |p: &[Point2]| p.iter().fold(Point2::default(), |acc, q| acc + *q) / p.len() as f64;
    if a.iter().any(|&p| inside_strict(b, p)) || b.iter().any(|&p| inside_strict(a, p)) {
        return true;
    }
    if inside_strict(b, centroid(a)) || inside_strict(a, centroid(b)) {
        return true;
    }
    // proper edge crossings
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        let (p, q) = (a[i], a[(i + 1) % na]);
        for j in 0..nb {
            let (r, s) = (b[j], b[(j + 1) % nb]);
            let d1 = (q - p).cross(r - p);
            let d2 = (q - p).cross(s - p);
            let d3 = (s - r).cross(p - r);
            let d4 = (s - r).cross(q - r);
            let scale = (q - p).norm() * (s - r).norm();
            if d1 * d2 < -(tol * scale).powi(2) && d3 * d4 < -(tol * scale).powi(2) {
                return true;
            }
        }
    }
    false
}

/// Traces of every pair of fractures, in lexicographic pair order.
/// Segments not longer than `tol` are discarded.
pub fn compute_traces(fractures: &[Fracture], tol: f64) -> Result<Vec<Trace>, DfnError> {
    let mut out = Vec::new();
    for i in 0..fractures.len() {
        for j in i + 1..fractures.len() {
            let (fi, fj) = (&fractures[i], &fractures[j]);
            let (ni, nj) = (fi.frame.normal, fj.frame.normal);
            let cr = ni.cross(nj);
            let scale = cr.norm();
            if scale <= 1e-12 {
                if fj.vertices.iter().all(|&v| fi.frame.height(v).abs() <= tol) {
                    let bj: Vec<Point2> = fj.vertices.iter().map(|&v| fi.frame.project(v)).collect();
                    if coplanar_overlap(&fi.local, &bj, tol) {
                        return Err(DfnError::CoplanarOverlap(i, j));
                    }
                }
                continue;
            }
            let d = cr / scale;
            let ci = ni.dot(fi.frame.origin);
            let cj = nj.dot(fj.frame.origin);
            let p0 = (nj.cross(cr) * ci + cr.cross(ni) * cj) / (scale * scale);

            let mut params = Vec::new();
            for f in [fi, fj] {
                let q0 = f.frame.project(p0);
                let dir = f.frame.tangential(d);
                params.extend(crossings(&f.local, q0, dir, tol));
            }
            params.sort_by(f64::total_cmp);
            params.dedup_by(|a, b| (*a - *b).abs() <= tol);
            let inside_both = |s: f64| {
                let p = p0 + d * s;
                [fi, fj]
                    .iter()
                    .all(|f| f.frame.height(p).abs() <= tol && point_in_polygon(&f.local, f.frame.project(p), tol))
            };
            let mut intervals: Vec<(f64, f64)> = Vec::new();
            for w in params.windows(2) {
                let (s0, s1) = (w[0], w[1]);
                if inside_both(0.5 * (s0 + s1)) {
                    match intervals.last_mut() {
                        Some(last) if (last.1 - s0).abs() <= tol => last.1 = s1,
                        _ => intervals.push((s0, s1)),
                    }
                }
            }
            for (s0, s1) in intervals {
                if s1 - s0 <= tol {
                    continue;
                }
                let ends = [p0 + d * s0, p0 + d * s1];
                out.push(Trace {
                    id: out.len(),
                    fractures: [i, j],
                    ends,
                    local: [ends.map(|p| fi.frame.project(p)), ends.map(|p| fj.frame.project(p))],
                });
            }
        }
    }
    Ok(out)
}
