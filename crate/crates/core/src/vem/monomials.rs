use crate::geometry::Point2;

/// Number of polynomials of degree `≤ k` in two variables (0 for `k < 0`).
pub const fn n_poly(k: isize) -> usize {
    if k < 0 {
        0
    } else {
        let k = k as usize;
        (k + 1) * (k + 2) / 2
    }
}

/// Scaled monomials `((x - x_E) / D_E)^a ((y - y_E) / D_E)^b`, ordered by
/// total degree, then by decreasing power of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomials {
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    pub exps: Vec<(usize, usize)>,
}

impl Monomials {
    pub fn new(degree: usize, center: Point2, scale: f64) -> Self {
        let mut exps = Vec::with_capacity(n_poly(degree as isize));
        for d in 0..=degree {
            for b in 0..=d {
                exps.push((d - b, b));
            }
        }
        Self { degree, center, scale, exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Position of `x^a y^b` in the ordering.
    pub const fn index(a: usize, b: usize) -> usize {
        let d = a + b;
        d * (d + 1) / 2 + b
    }

    fn local(&self, p: Point2) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }

    fn powers(&self, t: f64) -> [f64; 4] {
        [1.0, t, t * t, t * t * t]
    }

    pub fn values(&self, p: Point2) -> Vec<f64> {
        let (x, y) = self.local(p);
        let (px, py) = (self.powers(x), self.powers(y));
        self.exps.iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    /// Gradients with respect to the unscaled coordinates.
    pub fn gradients(&self, p: Point2) -> Vec<Point2> {
        let (x, y) = self.local(p);
        let (px, py) = (self.powers(x), self.powers(y));
        let s = 1.0 / self.scale;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
                let dy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
                Point2::new(dx * s, dy * s)
            })
            .collect()
    }

    pub fn eval(&self, coeffs: &[f64], p: Point2) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(m, c)| m * c).sum()
    }

    pub fn eval_gradient(&self, coeffs: &[f64], p: Point2) -> Point2 {
        self.gradients(p)
            .iter()
            .zip(coeffs)
            .fold(Point2::default(), |acc, (g, c)| acc + *g * *c)
    }

    /// Coefficients of the Laplacian of `Σ c_α m_α` in the same basis.
    pub fn laplacian(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let s2 = 1.0 / (self.scale * self.scale);
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            if a >= 2 {
                out[Self::index(a - 2, b)] += coeffs[i] * (a * (a - 1)) as f64 * s2;
            }
            if b >= 2 {
                out[Self::index(a, b - 2)] += coeffs[i] * (b * (b - 1)) as f64 * s2;
            }
        }
        out
    }
}
