use super::{check_order, n_poly, VemError};
use crate::geometry::{gauss_legendre, Point3};
use crate::mesh::{BoundaryLabel, CellId, EdgeId, Mesh, VertexId};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Vertex(VertexId),
    /// Value at Gauss point `index` of the edge, counted from `vertices[0]`.
    EdgePoint { edge: EdgeId, index: usize },
    /// Scaled moment against monomial `index`.
    Moment { cell: CellId, index: usize },
}

/// Global numbering of the degrees of freedom of a mesh. Vertices and
/// edges shared between fractures are single mesh entities, so their
/// degrees of freedom are shared as well.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub k: usize,
    pub kinds: Vec<DofKind>,
    /// True for degrees of freedom on Dirichlet edges.
    pub dirichlet: Vec<bool>,
    vertex_dof: Vec<usize>,
    edge_dof: Vec<usize>,
    cell_dof: Vec<usize>,
    edge_nodes: Vec<f64>,
}

impl DofLayout {
    pub fn n_dofs(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_free(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    /// Gauss nodes on `[0, 1]` carrying edge values.
    pub fn edge_nodes(&self) -> &[f64] {
        &self.edge_nodes
    }

    pub fn vertex_dof(&self, v: VertexId) -> usize {
        self.vertex_dof[v]
    }

    /// Global ids of the local degrees of freedom of cell `c`.
    pub fn cell_dofs(&self, mesh: &Mesh, c: CellId) -> Vec<usize> {
        let k = self.k;
        let cell = &mesh.cells[c];
        let n = cell.vertices.len();
        let mut out = Vec::with_capacity(n * k + n_poly(k as isize - 2));
        out.extend(cell.vertices.iter().map(|&v| self.vertex_dof[v]));
        for p in 0..n {
            let first = self.edge_dof[cell.edges[p]];
            let forward = mesh.edge_is_forward(c, p);
            for j in 0..k - 1 {
                let g = if forward { j } else { k - 2 - j };
                out.push(first + g);
            }
        }
        let first = self.cell_dof[c];
        out.extend((0..n_poly(k as isize - 2)).map(|i| first + i));
        out
    }

    /// A fracture the degree of freedom belongs to (the lowest-numbered one
    /// for degrees of freedom shared across fractures).
    pub fn fracture(&self, mesh: &Mesh, dof: usize) -> usize {
        match self.kinds[dof] {
            DofKind::Vertex(v) => mesh.vertices[v].fractures().min().unwrap_or(0),
            DofKind::EdgePoint { edge, .. } => mesh.edges[edge]
                .cells
                .iter()
                .map(|&c| mesh.cells[c].fracture)
                .min()
                .unwrap_or(0),
            DofKind::Moment { cell, .. } => mesh.cells[cell].fracture,
        }
    }

    /// 3D location of a point-value degree of freedom.
    pub fn position(&self, mesh: &Mesh, dof: usize) -> Option<Point3> {
        match self.kinds[dof] {
            DofKind::Vertex(v) => Some(mesh.vertices[v].pos),
            DofKind::EdgePoint { edge, index } => {
                let [a, b] = mesh.edges[edge].vertices;
                Some(mesh.vertices[a].pos.lerp(mesh.vertices[b].pos, self.edge_nodes[index]))
            }
            DofKind::Moment { .. } => None,
        }
    }
}

pub fn build_dof_layout(mesh: &Mesh, k: usize) -> Result<DofLayout, VemError> {
    check_order(k)?;
    let mut kinds = Vec::new();
    let mut vertex_dof = vec![NONE; mesh.vertices.len()];
    let mut edge_dof = vec![NONE; mesh.edges.len()];
    let mut cell_dof = vec![NONE; mesh.cells.len()];

    let mut used_vertex = vec![false; mesh.vertices.len()];
    for c in mesh.active_cells() {
        for &v in &mesh.cells[c].vertices {
            used_vertex[v] = true;
        }
    }
    for (v, used) in used_vertex.iter().enumerate() {
        if *used {
            vertex_dof[v] = kinds.len();
            kinds.push(DofKind::Vertex(v));
        }
    }
    if k > 1 {
        for e in mesh.active_edges() {
            edge_dof[e] = kinds.len();
            for index in 0..k - 1 {
                kinds.push(DofKind::EdgePoint { edge: e, index });
            }
        }
    }
    let n_mom = n_poly(k as isize - 2);
    for c in mesh.active_cells() {
        cell_dof[c] = kinds.len();
        for index in 0..n_mom {
            kinds.push(DofKind::Moment { cell: c, index });
        }
    }

    let mut dirichlet = vec![false; kinds.len()];
    for e in mesh.active_edges() {
        let edge = &mesh.edges[e];
        if edge.label != BoundaryLabel::Dirichlet {
            continue;
        }
        for &v in &edge.vertices {
            dirichlet[vertex_dof[v]] = true;
        }
        if k > 1 {
            for j in 0..k - 1 {
                dirichlet[edge_dof[e] + j] = true;
            }
        }
    }
    let edge_nodes = if k > 1 {
        gauss_legendre(k - 1).into_iter().map(|(t, _)| t).collect()
    } else {
        Vec::new()
    };
    Ok(DofLayout {
        k,
        kinds,
        dirichlet,
        vertex_dof,
        edge_dof,
        cell_dof,
        edge_nodes,
    })
}
