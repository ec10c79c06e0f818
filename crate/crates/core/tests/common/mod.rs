#![allow(dead_code)]

use std::sync::Arc;

use polyvem::field::Expr;
use polyvem::geometry::{Frame, Point2, Polygon};
use polyvem::mesh::{build_mesh, BoundaryLabel, Mesh};
use polyvem::problem::Problem;

pub fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn square() -> Mesh {
    let sq = Polygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]).unwrap();
    build_mesh(&[sq], |_, _| BoundaryLabel::Dirichlet).unwrap()
}

/// Keep the part of `poly` where `(x - m) · n <= 0`.
fn clip_half_plane(poly: &[Point2], m: Point2, n: Point2) -> Vec<Point2> {
    let side = |x: Point2| (x - m).dot(n);
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            out.push(a + (b - a) * (sa / (sa - sb)));
        }
    }
    out
}

/// Voronoi tessellation of the unit square from a jittered `n x n` grid of
/// seeds. Cells are convex and the layout is deterministic.
pub fn voronoi(n: usize) -> Mesh {
    let h = 1.0 / n as f64;
    let seeds: Vec<Point2> = (0..n * n)
        .map(|i| {
            let (a, b) = ((i % n) as f64, (i / n) as f64);
            let jx = 0.3 * (1.7 * i as f64 + 0.4).sin();
            let jy = 0.3 * (2.3 * i as f64 + 1.1).cos();
            p((a + 0.5 + jx) * h, (b + 0.5 + jy) * h)
        })
        .collect();
    let cells: Vec<Polygon> = seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut poly = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
            for (j, &t) in seeds.iter().enumerate() {
                if i != j {
                    poly = clip_half_plane(&poly, (s + t) * 0.5, t - s);
                }
            }
            Polygon::new(poly).unwrap()
        })
        .collect();
    build_mesh(&cells, |_, _| BoundaryLabel::Dirichlet).unwrap()
}

/// Unit square as a 2 x 2 grid whose lower-left quarter is split into four,
/// so its two neighbours carry a hanging node, and a triangulated upper
/// right quarter with one hanging node on the diagonal.
pub fn aligned() -> Mesh {
    let r = |x0: f64, y0: f64, x1: f64, y1: f64| Polygon::new(vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)]).unwrap();
    let cells = vec![
        r(0.0, 0.0, 0.25, 0.25),
        r(0.25, 0.0, 0.5, 0.25),
        r(0.0, 0.25, 0.25, 0.5),
        r(0.25, 0.25, 0.5, 0.5),
        r(0.5, 0.0, 1.0, 0.5),
        r(0.0, 0.5, 0.5, 1.0),
        // this triangle gets a hanging node from the two on its other side
        Polygon::new(vec![p(0.5, 0.5), p(1.0, 0.5), p(1.0, 1.0)]).unwrap(),
        Polygon::new(vec![p(0.5, 0.5), p(0.75, 0.75), p(0.5, 1.0)]).unwrap(),
        Polygon::new(vec![p(0.75, 0.75), p(1.0, 1.0), p(0.5, 1.0)]).unwrap(),
    ];
    build_mesh(&cells, |_, _| BoundaryLabel::Dirichlet).unwrap()
}

/// A full polynomial of degree `k` in `x, y`.
pub fn polynomial(k: usize) -> &'static str {
    match k {
        1 => "1 + 0.7*x - 1.3*y",
        2 => "1 + 0.7*x - 1.3*y + 0.5*x^2 - 0.8*x*y + 0.3*y^2",
        3 => "1 + 0.7*x - 1.3*y + 0.5*x^2 - 0.8*x*y + 0.3*y^2 + 0.9*x^3 - 0.4*x^2*y + 0.6*x*y^2 - 0.2*y^3",
        _ => panic!("degree {k}"),
    }
}

pub fn planar_problem(exact: &str, transmissivity: f64) -> Problem {
    Problem::manufactured(Arc::new(Expr::parse(exact).unwrap()), &[Frame::xy()], &[transmissivity])
}
