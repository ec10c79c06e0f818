//! Residual error estimator for the projected discrete solution.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{gauss_legendre, polygon_quadrature, Point2};
use crate::mesh::{BoundaryLabel, CellId, EdgeId, Mesh};
use crate::problem::Problem;
use crate::vem::{n_poly, Discretization};

/// Three addends of the local indicator `η_E²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellIndicator {
    pub cell: CellId,
    /// `D_E²/K ‖Π0_{k-1}Q + K Δu^π‖²_E`.
    pub residual: f64,
    /// `Σ_e |e| / (#N_e K_e) ‖Σ_{N_e} K ∇u^π · n‖²_e` over non-Dirichlet edges.
    pub jump: f64,
    /// `D_E²/K ‖Q - Π0_{k-1}Q‖²_E`.
    pub oscillation: f64,
}

impl CellIndicator {
    pub fn total(&self) -> f64 {
        self.residual + self.jump + self.oscillation
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimatorReport {
    /// One entry per active cell, ascending cell id.
    pub cells: Vec<CellIndicator>,
    /// `Σ_E η_E²`.
    pub local_sum: f64,
    /// `η_Ω²` with each edge counted once with weight `|e| / K_e`.
    pub global: f64,
    /// Broken energy norm `‖√K ∇Π∇u‖`.
    pub energy_norm: f64,
    /// `η_Ω / ‖√K ∇Π∇u‖`.
    pub eta_rel: f64,
}

impl EstimatorReport {
    pub fn eta(&self) -> f64 {
        self.global.sqrt()
    }

    pub fn indicators(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.total()).collect()
    }
}

/// `‖Σ_{E ∈ N_e} K_E ∇u^π_E · n_E‖²_e` and `K_e = Σ K_E`.
fn edge_jump(mesh: &Mesh, disc: &Discretization, problem: &Problem, e: EdgeId) -> (f64, f64) {
    let k = disc.k();
    let edge = &mesh.edges[e];
    let [a, b] = edge.vertices;
    let rule = gauss_legendre(k + 1);
    let mut k_e = 0.0;
    let mut values = vec![0.0; rule.len()];
    for &c in &edge.cells {
        let cell = &mesh.cells[c];
        let f = cell.fracture;
        let kc = problem.fractures[f].transmissivity;
        k_e += kc;
        let (pa, pb) = (mesh.local(a, f), mesh.local(b, f));
        let pos = mesh.edge_position(c, e).expect("incidence");
        let d = if mesh.edge_is_forward(c, pos) { pb - pa } else { pa - pb };
        let normal = Point2::new(d.y, -d.x) / d.norm();
        let mono = disc.monomials(mesh, c, k);
        let coeffs = &disc.projections[c];
        for (v, &(t, _)) in values.iter_mut().zip(&rule) {
            *v += kc * mono.eval_gradient(coeffs, pa.lerp(pb, t)).dot(normal);
        }
    }
    let len = mesh.edge_length(e);
    let norm2 = len * rule.iter().zip(&values).map(|(&(_, w), v)| w * v * v).sum::<f64>();
    (norm2, k_e)
}

/// Internal residual and oscillation of one cell.
fn cell_terms(mesh: &Mesh, disc: &Discretization, problem: &Problem, c: CellId) -> (f64, f64) {
    let k = disc.k();
    let cell = &mesh.cells[c];
    let data = &problem.fractures[cell.fracture];
    let kf = data.transmissivity;
    let frame = *mesh.frame(cell.fracture);
    let mono = disc.monomials(mesh, c, k - 1);
    let n1 = n_poly(k as isize - 1);
    let pts = mesh.cell_points(c);
    let quad = polygon_quadrature(&pts, cell.geom.centroid, 2 * k + 2);

    let mut h1 = DMatrix::<f64>::zeros(n1, n1);
    let mut bq = DVector::<f64>::zeros(n1);
    let mut qvals = Vec::with_capacity(quad.len());
    for &(x, w) in &quad {
        let m = mono.values(x);
        let q = data.source.value(frame.lift(x));
        qvals.push(q);
        for i in 0..n1 {
            bq[i] += w * q * m[i];
            for j in 0..n1 {
                h1[(i, j)] += w * m[i] * m[j];
            }
        }
    }
    let chol = h1.clone().cholesky().expect("mass matrix of a valid cell is SPD");
    let qc = chol.solve(&bq);

    let full = disc.monomials(mesh, c, k);
    let lap = full.laplacian(&disc.projections[c]);
    let r = DVector::from_iterator(n1, (0..n1).map(|i| qc[i] + kf * lap[i]));
    let residual = (r.transpose() * &h1 * &r)[(0, 0)].max(0.0);

    let mut osc = 0.0;
    for (&(x, w), q) in quad.iter().zip(qvals) {
        let d = q - mono.eval(qc.as_slice(), x);
        osc += w * d * d;
    }
    let scale = cell.geom.diameter * cell.geom.diameter / kf;
    (scale * residual, scale * osc)
}

fn energy_norm_sq(mesh: &Mesh, disc: &Discretization, problem: &Problem, c: CellId) -> f64 {
    let k = disc.k();
    let cell = &mesh.cells[c];
    let kf = problem.fractures[cell.fracture].transmissivity;
    let mono = disc.monomials(mesh, c, k);
    let pts = mesh.cell_points(c);
    polygon_quadrature(&pts, cell.geom.centroid, 2 * k)
        .into_iter()
        .map(|(x, w)| {
            let g = mono.eval_gradient(&disc.projections[c], x);
            kf * w * g.dot(g)
        })
        .sum()
}

fn counts_jump(mesh: &Mesh, e: EdgeId) -> bool {
    mesh.edges[e].label != BoundaryLabel::Dirichlet
}

/// `η_E²` of a single cell.
pub fn local_estimator(mesh: &Mesh, disc: &Discretization, problem: &Problem, c: CellId) -> CellIndicator {
    let (residual, oscillation) = cell_terms(mesh, disc, problem, c);
    let mut jump = 0.0;
    for &e in &mesh.cells[c].edges {
        if counts_jump(mesh, e) {
            let (j2, k_e) = edge_jump(mesh, disc, problem, e);
            jump += mesh.edge_length(e) / (mesh.edges[e].cells.len() as f64 * k_e) * j2;
        }
    }
    CellIndicator { cell: c, residual, jump, oscillation }
}

/// Local indicators of all active cells and the global estimator.
pub fn estimate(mesh: &Mesh, disc: &Discretization, problem: &Problem) -> EstimatorReport {
    let mut jumps = vec![0.0; mesh.edges.len()];
    let mut global = 0.0;
    for e in mesh.active_edges() {
        if !counts_jump(mesh, e) {
            continue;
        }
        let (j2, k_e) = edge_jump(mesh, disc, problem, e);
        jumps[e] = j2 / k_e;
        global += mesh.edge_length(e) * jumps[e];
    }
    let mut cells = Vec::new();
    let mut local_sum = 0.0;
    let mut energy = 0.0;
    for c in mesh.active_cells() {
        let (residual, oscillation) = cell_terms(mesh, disc, problem, c);
        let mut jump = 0.0;
        for &e in &mesh.cells[c].edges {
            if counts_jump(mesh, e) {
                jump += mesh.edge_length(e) / mesh.edges[e].cells.len() as f64 * jumps[e];
            }
        }
        let ind = CellIndicator { cell: c, residual, jump, oscillation };
        global += residual + oscillation;
        local_sum += ind.total();
        energy += energy_norm_sq(mesh, disc, problem, c);
        cells.push(ind);
    }
    let energy_norm = energy.sqrt();
    let eta_rel = if energy_norm > 0.0 { global.sqrt() / energy_norm } else { global.sqrt() };
    EstimatorReport { cells, local_sum, global, energy_norm, eta_rel }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::{Constant, Expr, ScalarField};
    use crate::geometry::{Frame, Polygon};
    use crate::mesh::build_mesh;
    use crate::problem::FractureData;
    use crate::vem::{assemble_and_solve, build_dof_layout, LinearSolver};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
        .unwrap()
    }

    fn solve(mesh: &Mesh, k: usize, problem: &Problem) -> Discretization {
        let layout = build_dof_layout(mesh, k).unwrap();
        assemble_and_solve(mesh, layout, problem, LinearSolver::Cholesky).unwrap()
    }

    fn exact(src: &str) -> Problem {
        let f: Arc<dyn ScalarField> = Arc::new(Expr::parse(src).unwrap());
        Problem::manufactured(f, &[Frame::xy()], &[1.0])
    }

    #[test]
    fn unit_source_residual() {
        let mesh = build_mesh(&[rect(0.0, 0.0, 2.0, 1.0)], |_, _| BoundaryLabel::Dirichlet).unwrap();
        let problem = Problem {
            fractures: vec![FractureData::new(1.0, Arc::new(Constant(1.0)), Arc::new(Constant(0.0)))],
        };
        let disc = solve(&mesh, 1, &problem);
        let ind = local_estimator(&mesh, &disc, &problem, 0);
        // D² |E| = 5 · 2
        assert!((ind.residual - 10.0).abs() < 1e-12);
        assert!(ind.oscillation.abs() < 1e-14);
        assert_eq!(ind.jump, 0.0);
    }

    #[test]
    fn linear_solution_has_zero_estimator() {
        let cells = [
            rect(0.0, 0.0, 1.0, 1.0),
            rect(1.0, 0.0, 2.0, 0.5),
            rect(1.0, 0.5, 2.0, 1.0),
        ];
        let mesh = build_mesh(&cells, |_, _| BoundaryLabel::Dirichlet).unwrap();
        let problem = exact("1 + 2*x - 3*y");
        for k in 1..=3 {
            let disc = solve(&mesh, k, &problem);
            let rep = estimate(&mesh, &disc, &problem);
            assert!(rep.eta() < 1e-10, "k = {k}: {}", rep.eta());
        }
    }

    #[test]
    fn neumann_edges_carry_the_normal_flux() {
        let horizontal = |a: Point2, b: Point2| {
            if a.y == b.y {
                BoundaryLabel::Dirichlet
            } else {
                BoundaryLabel::Neumann
            }
        };
        let mesh = build_mesh(&[rect(0.0, 0.0, 1.0, 1.0)], horizontal).unwrap();
        // zero flux through the vertical sides
        let problem = exact("1 + 2*y");
        let disc = solve(&mesh, 1, &problem);
        assert!(estimate(&mesh, &disc, &problem).eta() < 1e-12);

        let problem = exact("x + y");
        let disc = solve(&mesh, 1, &problem);
        let ind = local_estimator(&mesh, &disc, &problem, 0);
        // u^π is linear, so each unit vertical side contributes (∂_x u^π)²
        let g = disc.monomials(&mesh, 0, 1).eval_gradient(&disc.projections[0], Point2::new(0.5, 0.5));
        assert!(g.x.abs() > 1e-3);
        assert!((ind.jump - 2.0 * g.x * g.x).abs() < 1e-12);
    }

    #[test]
    fn local_sum_matches_global_on_two_cells() {
        let cells = [rect(0.0, 0.0, 1.0, 1.0), rect(1.0, 0.0, 2.0, 1.0)];
        let mesh = build_mesh(&cells, |_, _| BoundaryLabel::Dirichlet).unwrap();
        let problem = exact("sin(2*x)*exp(y) + x^4");
        for k in 1..=3 {
            let disc = solve(&mesh, k, &problem);
            let rep = estimate(&mesh, &disc, &problem);
            assert!(rep.global > 0.0);
            assert!((rep.local_sum - rep.global).abs() <= 1e-12 * rep.global);
            let direct: f64 = mesh.active_cells().map(|c| local_estimator(&mesh, &disc, &problem, c).total()).sum();
            assert!((direct - rep.global).abs() <= 1e-12 * rep.global);
        }
    }

    #[test]
    fn dilation_scaling() {
        let base = [rect(0.0, 0.0, 1.0, 1.0), rect(1.0, 0.0, 2.0, 1.0), rect(0.0, 1.0, 2.0, 1.5)];
        let eta2 = |lambda: f64| {
            let cells: Vec<Polygon> = base
                .iter()
                .map(|p| Polygon::new(p.vertices().iter().map(|v| *v * lambda).collect()).unwrap())
                .collect();
            let mesh = build_mesh(&cells, |_, _| BoundaryLabel::Dirichlet).unwrap();
            // harmonic, so Q = 0
            let problem = exact(&format!("{lambda} * exp(x / {lambda}) * sin(y / {lambda})"));
            let disc = solve(&mesh, 2, &problem);
            estimate(&mesh, &disc, &problem).global
        };
        let (e1, e3) = (eta2(1.0), eta2(3.0));
        assert!(e1 > 0.0);
        assert!((e3 / e1 - 9.0).abs() < 1e-8 * 9.0, "{}", e3 / e1);
    }
}
