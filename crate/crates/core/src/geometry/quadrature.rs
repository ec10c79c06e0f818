//! Gauss rules on `[0, 1]` and on the reference triangle.

use super::{fan_about, GeometryError, Point2};

/// Highest polynomial degree the rules below are built for.
pub const MAX_ORDER: usize = 60;

/// `n`-point Gauss–Legendre rule on `[0, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = ((4 * i + 3) as f64 * std::f64::consts::PI / (4 * n + 2) as f64).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (1.0 - x), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    // enforce exact symmetry of the rule about 1/2
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let t = 0.5 * (rule[i].0 + 1.0 - rule[j].0);
        let w = 0.5 * (rule[i].1 + rule[j].1);
        rule[i] = (t, w);
        rule[j] = (1.0 - t, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.5;
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss rule on `[0, 1]` exact for polynomials of degree `order`.
pub fn gauss_segment(order: usize) -> Result<Vec<(f64, f64)>, GeometryError> {
    if order == 0 || order > MAX_ORDER {
        return Err(GeometryError::UnsupportedOrder(order));
    }
    Ok(gauss_legendre((order + 1).div_ceil(2)))
}

/// Collapsed (Duffy) Gauss product rule on the triangle `(0,0), (1,0), (0,1)`,
/// exact for polynomials of degree `order`. Points are barycentric
/// `[λ0, λ1, λ2]`; weights are positive and sum to 1/2.
pub fn gauss_triangle(order: usize) -> Result<Vec<([f64; 3], f64)>, GeometryError> {
    if order == 0 || order > MAX_ORDER {
        return Err(GeometryError::UnsupportedOrder(order));
    }
    // x = s, y = t (1 - s); the Jacobian (1 - s) raises the degree in s by one
    let rule_s = gauss_legendre((order + 2).div_ceil(2));
    let rule_t = gauss_legendre((order + 1).div_ceil(2));
    let mut out = Vec::with_capacity(rule_s.len() * rule_t.len());
    for &(s, ws) in &rule_s {
        for &(t, wt) in &rule_t {
            let x = s;
            let y = t * (1.0 - s);
            out.push(([1.0 - x - y, x, y], ws * wt * (1.0 - s)));
        }
    }
    Ok(out)
}

/// Quadrature on a convex polygon: fan of triangles about `center` (a point
/// inside the polygon), collapsed Gauss rule on each, exact for degree `order`.
pub fn polygon_quadrature(pts: &[Point2], center: Point2, order: usize) -> Vec<(Point2, f64)> {
    let rule = gauss_triangle(order.clamp(1, MAX_ORDER)).expect("order clamped to the supported range");
    let mut out = Vec::with_capacity(rule.len() * pts.len());
    for [c, a, b] in fan_about(pts, center) {
        let jac = (a - c).cross(b - c);
        if jac <= 0.0 {
            continue;
        }
        for (l, w) in &rule {
            out.push((c * l[0] + a * l[1] + b * l[2], w * jac));
        }
    }
    out
}
