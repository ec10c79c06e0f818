use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use super::{assemble_cell, n_poly, DofLayout, Monomials, VemError};
use crate::field::ScalarField;
use crate::geometry::polygon_quadrature;
use crate::mesh::{CellId, Mesh};
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LinearSolver {
    /// Sparse Cholesky factorization.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradient.
    Cg { rel_tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub n_dofs: usize,
    pub n_free: usize,
    pub nnz: usize,
    pub cg_iterations: Option<usize>,
    /// Relative residual `‖b - A x‖ / ‖b‖` of the reduced system.
    pub residual: f64,
}

/// A solved discrete problem on a fixed mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub layout: DofLayout,
    /// Values of all degrees of freedom, Dirichlet ones included.
    pub u: Vec<f64>,
    /// Coefficients of `Π∇_k u` on each active cell (empty for inactive cells).
    pub projections: Vec<Vec<f64>>,
    pub stats: SolveStats,
}

impl Discretization {
    pub fn k(&self) -> usize {
        self.layout.k
    }

    /// Scaled monomial basis of cell `c`, matching [`Discretization::projections`].
    pub fn monomials(&self, mesh: &Mesh, c: CellId, degree: usize) -> Monomials {
        let g = &mesh.cells[c].geom;
        Monomials::new(degree, g.centroid, g.diameter)
    }
}

/// Compressed sparse rows with summed duplicates.
#[derive(Debug, Clone)]
struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut t: Vec<(u32, u32, f64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len() / 2);
        let mut vals: Vec<f64> = Vec::with_capacity(t.len() / 2);
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c as usize);
                vals.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[i] = s;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&p| self.cols[p] == i)
                    .map_or(0.0, |p| self.vals[p])
            })
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_cholesky(a: &Csr, b: &[f64]) -> Result<Vec<f64>, VemError> {
    let mut trip = Vec::with_capacity(a.vals.len());
    for i in 0..a.n {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            trip.push(Triplet::new(i, a.cols[p], a.vals[p]));
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &trip)
        .map_err(|e| VemError::Factorization(format!("{e:?}")))?;
    let llt = mat
        .sp_cholesky(Side::Lower)
        .map_err(|e| VemError::Factorization(format!("{e:?}")))?;
    let rhs = Mat::<f64>::from_fn(a.n, 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    Ok((0..a.n).map(|i| x[(i, 0)]).collect())
}

fn solve_cg(a: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize), VemError> {
    let n = a.n;
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=max_iter {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rel_tol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(VemError::NotConverged {
        iterations: max_iter,
        residual: norm(&r) / bnorm,
    })
}

/// Values of `f` at point degrees of freedom and its scaled moments.
pub fn interpolate(mesh: &Mesh, layout: &DofLayout, f: &dyn ScalarField) -> Vec<f64> {
    let k = layout.k;
    let mut out = vec![0.0; layout.n_dofs()];
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(p) = layout.position(mesh, i) {
            *o = f.value(p);
        }
    }
    let n2 = n_poly(k as isize - 2);
    if n2 > 0 {
        for c in mesh.active_cells() {
            let cell = &mesh.cells[c];
            let frame = mesh.frame(cell.fracture);
            let mono = Monomials::new(k - 2, cell.geom.centroid, cell.geom.diameter);
            let pts = mesh.cell_points(c);
            let dofs = layout.cell_dofs(mesh, c);
            let first = dofs.len() - n2;
            let mut acc = vec![0.0; n2];
            for (x, w) in polygon_quadrature(&pts, cell.geom.centroid, 2 * k + 4) {
                let fx = f.value(frame.lift(x)) * w;
                for (a, m) in acc.iter_mut().zip(mono.values(x)) {
                    *a += fx * m;
                }
            }
            for (j, a) in acc.into_iter().enumerate() {
                out[dofs[first + j]] = a / cell.geom.area;
            }
        }
    }
    out
}

/// Assemble the global system over all fractures, impose Dirichlet values
/// by interpolation, and solve.
pub fn assemble_and_solve(
    mesh: &Mesh,
    layout: DofLayout,
    problem: &Problem,
    solver: LinearSolver,
) -> Result<Discretization, VemError> {
    let k = layout.k;
    let ndof = layout.n_dofs();
    if !layout.dirichlet.iter().any(|&d| d) {
        return Err(VemError::NoDirichlet);
    }
    let mut u = vec![0.0; ndof];
    let mut free_index = vec![usize::MAX; ndof];
    let mut n_free = 0;
    for i in 0..ndof {
        if layout.dirichlet[i] {
            let p = layout.position(mesh, i).expect("Dirichlet DOFs are point values");
            let f = layout.fracture(mesh, i);
            let data = problem.fractures.get(f).ok_or(VemError::MissingFracture(f))?;
            u[i] = data.dirichlet.value(p);
        } else {
            free_index[i] = n_free;
            n_free += 1;
        }
    }

    let mut rhs = vec![0.0; n_free];
    let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
    let mut pi_store: Vec<Option<(Vec<usize>, DMatrix<f64>)>> = vec![None; mesh.cells.len()];
    for c in mesh.active_cells() {
        let cell = &mesh.cells[c];
        let data = problem
            .fractures
            .get(cell.fracture)
            .ok_or(VemError::MissingFracture(cell.fracture))?;
        let sp = assemble_cell(mesh, c, k)?;
        let frame = *mesh.frame(cell.fracture);
        let source = data.source.clone();
        let q = move |x: crate::geometry::Point2| source.value(frame.lift(x));
        let b = sp.moments(&q, k - 1, 2 * k + 2);
        let f = sp.load(&b);
        let a = sp.stiffness(data.transmissivity);
        let dofs = layout.cell_dofs(mesh, c);
        for (i, &gi) in dofs.iter().enumerate() {
            let fi = free_index[gi];
            if fi == usize::MAX {
                continue;
            }
            rhs[fi] += f[i];
            for (j, &gj) in dofs.iter().enumerate() {
                let fj = free_index[gj];
                if fj == usize::MAX {
                    rhs[fi] -= a[(i, j)] * u[gj];
                } else {
                    triplets.push((fi as u32, fj as u32, a[(i, j)]));
                }
            }
        }
        pi_store[c] = Some((dofs, sp.pi_nabla));
    }

    let mut stats = SolveStats {
        n_dofs: ndof,
        n_free,
        ..SolveStats::default()
    };
    if n_free > 0 {
        let a = Csr::from_triplets(n_free, triplets);
        stats.nnz = a.vals.len();
        let x = match solver {
            LinearSolver::Cholesky => solve_cholesky(&a, &rhs)?,
            LinearSolver::Cg { rel_tol, max_iter } => {
                let (x, it) = solve_cg(&a, &rhs, rel_tol, max_iter)?;
                stats.cg_iterations = Some(it);
                x
            }
        };
        let mut ax = vec![0.0; n_free];
        a.mul(&x, &mut ax);
        let r: Vec<f64> = ax.iter().zip(&rhs).map(|(a, b)| b - a).collect();
        let bn = norm(&rhs);
        stats.residual = if bn > 0.0 { norm(&r) / bn } else { norm(&r) };
        for i in 0..ndof {
            if free_index[i] != usize::MAX {
                u[i] = x[free_index[i]];
            }
        }
    }

    let projections = pi_store
        .into_iter()
        .map(|entry| match entry {
            Some((dofs, pi)) => {
                let loc = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| u[g]));
                (pi * loc).iter().copied().collect()
            }
            None => Vec::new(),
        })
        .collect();
    Ok(Discretization {
        layout,
        u,
        projections,
        stats,
    })
}

/// Relative broken energy error `‖√K ∇(U - Π∇u)‖ / ‖√K ∇U‖`, together with
/// the numerator and denominator. `None` unless every fracture has a
/// reference solution `U`.
pub fn energy_error(mesh: &Mesh, disc: &Discretization, problem: &Problem) -> Option<(f64, f64, f64)> {
    if !problem.has_exact() {
        return None;
    }
    let k = disc.k();
    let mut num = 0.0;
    let mut den = 0.0;
    for c in mesh.active_cells() {
        let cell = &mesh.cells[c];
        let data = &problem.fractures[cell.fracture];
        let kf = data.transmissivity;
        let exact = data.exact.as_ref()?;
        let frame = mesh.frame(cell.fracture);
        let mono = disc.monomials(mesh, c, k);
        let coeffs = &disc.projections[c];
        let pts = mesh.cell_points(c);
        for (x, w) in polygon_quadrature(&pts, cell.geom.centroid, 2 * k + 2) {
            let gu = frame.tangential(exact.eval(frame.lift(x)).grad());
            let gh = mono.eval_gradient(coeffs, x);
            let d = gu - gh;
            num += kf * w * d.dot(d);
            den += kf * w * gu.dot(gu);
        }
    }
    let (num, den) = (num.sqrt(), den.sqrt());
    Some((if den > 0.0 { num / den } else { num }, num, den))
}
