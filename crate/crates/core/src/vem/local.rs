use nalgebra::{DMatrix, DVector};

use super::{check_order, n_poly, Monomials, VemError};
use crate::geometry::{diameter, gauss_legendre, polygon_moments, polygon_quadrature, Point2};
use crate::mesh::{CellId, Mesh};

/// Projectors and local matrices of one cell.
///
/// Matrices acting on degrees of freedom use the local order described in
/// the module docs. Polynomial coefficients refer to [`Monomials`] of the
/// cell (degree `k`, centred at the centroid, scaled by the diameter).
#[derive(Debug, Clone)]
pub struct LocalSpace {
    pub k: usize,
    pub n_vertices: usize,
    pub monomials: Monomials,
    pub area: f64,
    /// `Π∇_k`: DOFs to coefficients in `P_k`.
    pub pi_nabla: DMatrix<f64>,
    /// `Π0_k`: DOFs to coefficients in `P_k`.
    pub pi0_k: DMatrix<f64>,
    /// `Π0_{k-1}`: DOFs to coefficients in `P_{k-1}`.
    pub pi0_km1: DMatrix<f64>,
    /// `Π0_{k-1} ∂_x` and `Π0_{k-1} ∂_y`: DOFs to coefficients in `P_{k-1}`.
    pub pi0_grad: [DMatrix<f64>; 2],
    /// `∫ m_α m_β` over the cell, `|α|, |β| ≤ k`.
    pub mass: DMatrix<f64>,
    /// `(Π0_{k-1}∇φ_i, Π0_{k-1}∇φ_j)` for unit transmissivity.
    pub consistency: DMatrix<f64>,
    /// `Σ_r dof_r((I - Π∇)φ_i) dof_r((I - Π∇)φ_j)` for unit transmissivity.
    pub stabilization: DMatrix<f64>,
    points: Vec<Point2>,
}

/// Lagrange basis on `nodes` evaluated at `t`.
fn lagrange(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &x)| (t - x) / (nodes[j] - x))
                .product()
        })
        .collect()
}

pub fn assemble_cell(mesh: &Mesh, c: CellId, k: usize) -> Result<LocalSpace, VemError> {
    LocalSpace::new(&mesh.cell_points(c), k).map_err(|e| match e {
        VemError::SingularProjector(_) => VemError::SingularProjector(c),
        VemError::Geometry { source, .. } => VemError::Geometry { cell: c, source },
        other => other,
    })
}

impl LocalSpace {
    /// Build the local space of the convex polygon `pts` (counter-clockwise,
    /// collinear hanging vertices allowed).
    pub fn new(pts: &[Point2], k: usize) -> Result<Self, VemError> {
        check_order(k)?;
        let n = pts.len();
        let (area, centroid, _) = polygon_moments(pts);
        if !(area > 0.0) {
            return Err(VemError::Geometry {
                cell: usize::MAX,
                source: crate::geometry::GeometryError::Degenerate { area },
            });
        }
        let diam = diameter(pts);
        let mk = Monomials::new(k, centroid, diam);
        let nk = mk.len();
        let n1 = n_poly(k as isize - 1);
        let n2 = n_poly(k as isize - 2);
        let ndof = n * k + n2;
        let mom0 = n * k;
        let singular = || VemError::SingularProjector(usize::MAX);

        let mut mass = DMatrix::<f64>::zeros(nk, nk);
        for (x, w) in polygon_quadrature(pts, centroid, 2 * k) {
            let m = mk.values(x);
            for a in 0..nk {
                for b in 0..=a {
                    mass[(a, b)] += w * m[a] * m[b];
                }
            }
        }
        for a in 0..nk {
            for b in a + 1..nk {
                mass[(a, b)] = mass[(b, a)];
            }
        }

        let gauss = gauss_legendre(k.max(2) - 1);
        let nodes_inner: Vec<f64> = if k > 1 { gauss.iter().map(|g| g.0).collect() } else { Vec::new() };

        // value matrix D: dof_i(m_α)
        let mut dmat = DMatrix::<f64>::zeros(ndof, nk);
        for i in 0..n {
            for (a, v) in mk.values(pts[i]).into_iter().enumerate() {
                dmat[(i, a)] = v;
            }
        }
        for p in 0..n {
            let (a, b) = (pts[p], pts[(p + 1) % n]);
            for (j, &t) in nodes_inner.iter().enumerate() {
                let row = n + p * (k - 1) + j;
                for (al, v) in mk.values(a.lerp(b, t)).into_iter().enumerate() {
                    dmat[(row, al)] = v;
                }
            }
        }
        for be in 0..n2 {
            for al in 0..nk {
                dmat[(mom0 + be, al)] = mass[(be, al)] / area;
            }
        }

        // B = (∇m_α, ∇φ_i) plus the constant fixing row; E_x, E_y = (∂φ_i, m_α)
        let mut bmat = DMatrix::<f64>::zeros(nk, ndof);
        let mut ex = DMatrix::<f64>::zeros(n1, ndof);
        let mut ey = DMatrix::<f64>::zeros(n1, ndof);
        let mut p0_row = DVector::<f64>::zeros(ndof);
        let mut perimeter = 0.0;
        let mut edge_nodes = Vec::with_capacity(k + 1);
        edge_nodes.push(0.0);
        edge_nodes.extend(&nodes_inner);
        edge_nodes.push(1.0);
        let bquad = gauss_legendre(k + 1);
        for p in 0..n {
            let (a, b) = (pts[p], pts[(p + 1) % n]);
            let d = b - a;
            let len = d.norm();
            let normal = Point2::new(d.y, -d.x) / len;
            let mut idx = Vec::with_capacity(k + 1);
            idx.push(p);
            idx.extend((0..k - 1).map(|j| n + p * (k - 1) + j));
            idx.push((p + 1) % n);
            perimeter += len;
            for &(t, w) in &bquad {
                let x = a.lerp(b, t);
                let lag = lagrange(&edge_nodes, t);
                let grads = mk.gradients(x);
                let vals = mk.values(x);
                let wl = w * len;
                for (j, &i) in idx.iter().enumerate() {
                    let wj = wl * lag[j];
                    for al in 0..nk {
                        bmat[(al, i)] += wj * grads[al].dot(normal);
                    }
                    for al in 0..n1 {
                        ex[(al, i)] += wj * vals[al] * normal.x;
                        ey[(al, i)] += wj * vals[al] * normal.y;
                    }
                    p0_row[i] += wj;
                }
            }
        }
        let s = 1.0 / diam;
        for (al, &(pa, pb)) in mk.exps.iter().enumerate() {
            // -(Δm_α, φ) through the moments
            if pa >= 2 {
                bmat[(al, mom0 + Monomials::index(pa - 2, pb))] -= area * (pa * (pa - 1)) as f64 * s * s;
            }
            if pb >= 2 {
                bmat[(al, mom0 + Monomials::index(pa, pb - 2))] -= area * (pb * (pb - 1)) as f64 * s * s;
            }
            if al < n1 {
                if pa >= 1 {
                    ex[(al, mom0 + Monomials::index(pa - 1, pb))] -= area * pa as f64 * s;
                }
                if pb >= 1 {
                    ey[(al, mom0 + Monomials::index(pa, pb - 1))] -= area * pb as f64 * s;
                }
            }
        }
        bmat.row_mut(0).fill(0.0);
        if k == 1 {
            for i in 0..ndof {
                bmat[(0, i)] = p0_row[i] / perimeter;
            }
        } else {
            bmat[(0, mom0)] = 1.0;
        }

        let g = &bmat * &dmat;
        let pi_nabla = g.lu().solve(&bmat).ok_or_else(singular)?;

        // moments of degree k-1 and k from the enhancement constraint
        let mut cmat = DMatrix::<f64>::zeros(nk, ndof);
        for al in 0..n2 {
            cmat[(al, mom0 + al)] = area;
        }
        let h2_inv = if n2 > 0 {
            Some(mass.view((0, 0), (n2, n2)).into_owned().cholesky().ok_or_else(singular)?)
        } else {
            None
        };
        for al in n2..nk {
            let mut diff = DVector::<f64>::zeros(nk);
            diff[al] = 1.0;
            if let Some(h2) = &h2_inv {
                let coef = h2.solve(&mass.view((0, al), (n2, 1)).into_owned());
                for be in 0..n2 {
                    cmat[(al, mom0 + be)] += coef[be] * area;
                    diff[be] -= coef[be];
                }
            }
            let hd = &mass * &diff;
            let row = hd.transpose() * &pi_nabla;
            let mut target = cmat.row_mut(al);
            target += row;
        }

        let h_chol = mass.clone().cholesky().ok_or_else(singular)?;
        let pi0_k = h_chol.solve(&cmat);
        let h1 = mass.view((0, 0), (n1, n1)).into_owned().cholesky().ok_or_else(singular)?;
        let pi0_km1 = h1.solve(&cmat.rows(0, n1).into_owned());
        let gx = h1.solve(&ex);
        let gy = h1.solve(&ey);
        let mut consistency = ex.transpose() * &gx + ey.transpose() * &gy;
        let sym = 0.5 * (&consistency + consistency.transpose());
        consistency = sym;

        let proj = &dmat * &pi_nabla;
        let resid = DMatrix::<f64>::identity(ndof, ndof) - proj;
        let stabilization = resid.transpose() * &resid;

        Ok(Self {
            k,
            n_vertices: n,
            monomials: mk,
            area,
            pi_nabla,
            pi0_k,
            pi0_km1,
            pi0_grad: [gx, gy],
            mass,
            consistency,
            stabilization,
            points: pts.to_vec(),
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_vertices * self.k + n_poly(self.k as isize - 2)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Local stiffness `K (consistency + stabilization)`.
    pub fn stiffness(&self, transmissivity: f64) -> DMatrix<f64> {
        (&self.consistency + &self.stabilization) * transmissivity
    }

    /// Quadrature rule over the cell exact for polynomials of degree `order`.
    pub fn quadrature(&self, order: usize) -> Vec<(Point2, f64)> {
        polygon_quadrature(&self.points, self.monomials.center, order)
    }

    /// `∫ f m_α` for `|α| ≤ degree`.
    pub fn moments(&self, f: &dyn Fn(Point2) -> f64, degree: usize, order: usize) -> Vec<f64> {
        let np = n_poly(degree as isize);
        let mut out = vec![0.0; np];
        for (x, w) in self.quadrature(order) {
            let fx = f(x) * w;
            for (o, m) in out.iter_mut().zip(self.monomials.values(x)) {
                *o += fx * m;
            }
        }
        out
    }

    /// Load vector `(Q, Π0_{k-1} φ_i)` from the moments `∫ Q m_α`, `|α| ≤ k - 1`.
    pub fn load(&self, q_moments: &[f64]) -> DVector<f64> {
        self.pi0_km1.tr_mul(&DVector::from_column_slice(q_moments))
    }

    /// Local degrees of freedom of a function known in closed form.
    pub fn interpolate(&self, f: &dyn Fn(Point2) -> f64) -> DVector<f64> {
        let n = self.n_vertices;
        let k = self.k;
        let mut out = DVector::zeros(self.n_dofs());
        for i in 0..n {
            out[i] = f(self.points[i]);
        }
        if k > 1 {
            let nodes = gauss_legendre(k - 1);
            for p in 0..n {
                let (a, b) = (self.points[p], self.points[(p + 1) % n]);
                for (j, &(t, _)) in nodes.iter().enumerate() {
                    out[n + p * (k - 1) + j] = f(a.lerp(b, t));
                }
            }
            let m = self.moments(f, k - 2, 2 * k + 4);
            for (j, v) in m.into_iter().enumerate() {
                out[n * k + j] = v / self.area;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    fn pentagon_with_hanging_node() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.7, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.3, 1.1),
            Point2::new(0.4, 1.6),
        ]
    }

    fn test_polys(k: usize) -> Vec<Box<dyn Fn(Point2) -> f64>> {
        let mut v: Vec<Box<dyn Fn(Point2) -> f64>> = vec![
            Box::new(|_| 1.0),
            Box::new(|p| 2.0 * p.x - 3.0 * p.y + 0.5),
        ];
        if k >= 2 {
            v.push(Box::new(|p| p.x * p.x - 0.5 * p.x * p.y + 2.0 * p.y * p.y - p.x));
        }
        if k >= 3 {
            v.push(Box::new(|p| p.x * p.x * p.x - 3.0 * p.x * p.y * p.y + 0.1 * p.y * p.y * p.y));
        }
        v
    }

    #[test]
    fn projectors_reproduce_polynomials() {
        for pts in [square(), pentagon_with_hanging_node()] {
            for k in 1..=3 {
                let sp = LocalSpace::new(&pts, k).unwrap();
                for f in test_polys(k) {
                    let dofs = sp.interpolate(&*f);
                    let c = &sp.pi_nabla * &dofs;
                    let c0 = &sp.pi0_k * &dofs;
                    for (x, _) in sp.quadrature(3) {
                        assert_relative_eq!(sp.monomials.eval(c.as_slice(), x), f(x), epsilon = 1e-11);
                        assert_relative_eq!(sp.monomials.eval(c0.as_slice(), x), f(x), epsilon = 1e-11);
                    }
                    // stabilization vanishes on polynomials
                    let s = (&sp.stabilization * &dofs).norm();
                    assert!(s < 1e-11, "k={k} stab residual {s}");
                }
            }
        }
    }

    #[test]
    fn constants_in_kernel_and_symmetry() {
        for k in 1..=3 {
            let sp = LocalSpace::new(&pentagon_with_hanging_node(), k).unwrap();
            let a = sp.stiffness(1.0);
            let ones = sp.interpolate(&|_| 1.0);
            assert!((&a * &ones).amax() < 1e-11);
            assert!((&a - a.transpose()).amax() < 1e-13 * a.amax());
            let eig = a.clone().symmetric_eigen();
            let min = eig.eigenvalues.min();
            assert!(min > -1e-11);
            // exactly one zero eigenvalue
            let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-10).count();
            assert_eq!(zeros, 1);
        }
    }

    #[test]
    fn transmissivity_scales_linearly() {
        let sp = LocalSpace::new(&square(), 2).unwrap();
        let a1 = sp.stiffness(1.0);
        let a3 = sp.stiffness(3.0);
        assert!((&a3 - &a1 * 3.0).amax() < 1e-14);
    }

    #[test]
    fn square_k1_consistency_matches_dense_oracle() {
        // brute force: (∇Π∇φ_i, ∇Π∇φ_j) by quadrature of the projected polynomials
        let sp = LocalSpace::new(&square(), 1).unwrap();
        let n = 4;
        let mut oracle = DMatrix::<f64>::zeros(n, n);
        for (x, w) in sp.quadrature(4) {
            let grads: Vec<Point2> = (0..n)
                .map(|i| {
                    let c: Vec<f64> = sp.pi_nabla.column(i).iter().copied().collect();
                    sp.monomials.eval_gradient(&c, x)
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    oracle[(i, j)] += w * grads[i].dot(grads[j]);
                }
            }
        }
        assert!((&sp.consistency - &oracle).amax() < 1e-14);
        // for the unit square, ∇Π∇φ_0 = (-1/2, -1/2)
        assert_relative_eq!(sp.consistency[(0, 0)], 0.5, epsilon = 1e-14);
        assert_relative_eq!(sp.consistency[(0, 2)], -0.5, epsilon = 1e-14);
        assert_relative_eq!(sp.consistency[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn unit_source_load_k1() {
        let sp = LocalSpace::new(&square(), 1).unwrap();
        let b = sp.moments(&|_| 1.0, 0, 2);
        assert_relative_eq!(b[0], 1.0, epsilon = 1e-14);
        let f = sp.load(&b);
        assert_relative_eq!(f.sum(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let nodes = [0.0, 0.2, 0.8, 1.0];
        for t in [0.0, 0.1, 0.5, 0.93] {
            let l = lagrange(&nodes, t);
            assert_relative_eq!(l.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(lagrange(&nodes, 0.2), vec![0.0, 1.0, 0.0, 0.0]);
    }
}
