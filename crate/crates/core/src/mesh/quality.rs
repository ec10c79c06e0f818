//! Mesh quality indicators.

use serde::Serialize;

use super::Mesh;

/// Five-number summary plus mean. Quartiles use linear interpolation
/// between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Distribution {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            let nan = f64::NAN;
            return Self { min: nan, q1: nan, median: nan, q3: nan, max: nan, mean: nan };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < v.len() {
                v[i] + frac * (v[i + 1] - v[i])
            } else {
                v[i]
            }
        };
        Self {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshQualityReport {
    pub n_cells: usize,
    pub n_dofs: usize,
    /// Per active cell, in id order: `(cell, R/r, R/h)`.
    #[serde(skip)]
    pub per_cell: Vec<(usize, f64, f64)>,
    pub ar_rr: Distribution,
    pub ar_rh: Distribution,
    pub h: Distribution,
    pub r: Distribution,
    pub rho: Distribution,
    pub n_tri: usize,
    pub n_quad: usize,
    /// Cells whose loop has hanging nodes but only three corners.
    pub n_tri_al: usize,
    /// Cells whose loop has hanging nodes but only four corners.
    pub n_quad_al: usize,
    pub r_tri: f64,
    pub r_quad: f64,
    pub r_poly: f64,
    pub r_tri_al: f64,
    pub r_quad_al: f64,
    /// `#cells / #DOFs`.
    pub efficiency: f64,
    /// `min r_E / D_E`.
    pub gamma_r: f64,
    /// `min h_E / D_E`.
    pub gamma_h: f64,
    pub max_vertices: usize,
    /// Largest ratio between the longest and shortest edge of one aligned group.
    pub max_group_ratio: f64,
}

impl MeshQualityReport {
    /// `#DOFs / #cells`.
    pub fn efficiency_inv(&self) -> f64 {
        1.0 / self.efficiency
    }
}

pub fn quality_report(mesh: &Mesh, n_dofs: usize) -> MeshQualityReport {
    let cells: Vec<usize> = mesh.active_cells().collect();
    let n = cells.len();
    let mut per_cell = Vec::with_capacity(n);
    let (mut rr, mut rh, mut hs, mut rs, mut rhos) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut n_tri, mut n_quad, mut n_tri_al, mut n_quad_al) = (0, 0, 0, 0);
    let mut gamma_r = f64::INFINITY;
    let mut gamma_h = f64::INFINITY;
    let mut max_vertices = 0;
    let mut max_group_ratio: f64 = 1.0;
    for &c in &cells {
        let g = &mesh.cells[c].geom;
        per_cell.push((c, g.aspect_rr(), g.aspect_rh()));
        rr.push(g.aspect_rr());
        rh.push(g.aspect_rh());
        hs.push(g.h_min);
        rs.push(g.r_in);
        rhos.push(g.rho());
        gamma_r = gamma_r.min(g.r_in / g.diameter);
        gamma_h = gamma_h.min(g.h_min / g.diameter);
        let nv = mesh.cells[c].vertices.len();
        max_vertices = max_vertices.max(nv);
        match nv {
            3 => n_tri += 1,
            4 => n_quad += 1,
            _ => {}
        }
        let corners = mesh.corner_positions(c).len();
        match (corners, nv > corners) {
            (3, true) => n_tri_al += 1,
            (4, true) => n_quad_al += 1,
            _ => {}
        }
        if corners < nv {
            for group in mesh.aligned_groups(c) {
                let lens: Vec<f64> = group.edges.iter().map(|&e| mesh.edge_length(e)).collect();
                let lmax = lens.iter().copied().fold(0.0, f64::max);
                let lmin = lens.iter().copied().fold(f64::INFINITY, f64::min);
                max_group_ratio = max_group_ratio.max(lmax / lmin);
            }
        }
    }
    let nf = n.max(1) as f64;
    let r_tri = n_tri as f64 / nf;
    let r_quad = n_quad as f64 / nf;
    MeshQualityReport {
        n_cells: n,
        n_dofs,
        per_cell,
        ar_rr: Distribution::from_values(&rr),
        ar_rh: Distribution::from_values(&rh),
        h: Distribution::from_values(&hs),
        r: Distribution::from_values(&rs),
        rho: Distribution::from_values(&rhos),
        n_tri,
        n_quad,
        n_tri_al,
        n_quad_al,
        r_tri,
        r_quad,
        r_poly: 1.0 - (r_tri + r_quad),
        r_tri_al: n_tri_al as f64 / nf,
        r_quad_al: n_quad_al as f64 / nf,
        efficiency: n as f64 / n_dofs.max(1) as f64,
        gamma_r,
        gamma_h,
        max_vertices,
        max_group_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Polygon};
    use crate::mesh::{build_mesh, BoundaryLabel};

    #[test]
    fn quartiles_interpolate() {
        let d = Distribution::from_values(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(d.min, 1.0);
        assert_eq!(d.max, 4.0);
        assert!((d.q1 - 1.75).abs() < 1e-15);
        assert!((d.median - 2.5).abs() < 1e-15);
        assert!((d.q3 - 3.25).abs() < 1e-15);
        assert!((d.mean - 2.5).abs() < 1e-15);
    }

    #[test]
    fn triangles_only() {
        let a = Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]).unwrap();
        let b = Polygon::new(vec![Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]).unwrap();
        let mesh = build_mesh(&[a, b], |_, _| BoundaryLabel::Dirichlet).unwrap();
        let q = quality_report(&mesh, 4);
        assert_eq!(q.r_tri, 1.0);
        assert_eq!(q.r_quad, 0.0);
        assert_eq!(q.r_poly, 0.0);
        assert_eq!(q.n_tri_al, 0);
        assert!((q.ar_rr.median - 10f64.sqrt()).abs() < 1e-12);
        assert!((q.efficiency_inv() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn square_with_split_side_counts_as_aligned_quad() {
        let sq = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let mesh = build_mesh(&[sq], |_, _| BoundaryLabel::Dirichlet).unwrap();
        let q = quality_report(&mesh, 5);
        assert_eq!((q.n_tri, q.n_quad, q.n_tri_al, q.n_quad_al), (0, 0, 0, 1));
        assert_eq!(q.r_poly, 1.0);
        assert_eq!(q.max_vertices, 5);
        assert!((q.max_group_ratio - 1.0).abs() < 1e-15);
    }
}
