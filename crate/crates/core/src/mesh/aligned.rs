use super::{CellId, EdgeId, Mesh, MeshError, VertexId};
use crate::geometry::{are_collinear, Point2, Polygon, TOL_COL};

/// Maximal run of contiguous collinear edges on one side of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedGroup {
    pub cell: CellId,
    /// Loop positions of the member edges, in loop order.
    pub positions: Vec<usize>,
    pub edges: Vec<EdgeId>,
    pub start: VertexId,
    pub end: VertexId,
    /// `|I|`: sum of member lengths.
    pub length: f64,
}

impl AlignedGroup {
    /// `#I`.
    pub fn count(&self) -> usize {
        self.edges.len()
    }
}

impl Mesh {
    /// `straight[i]` is true when loop vertex `i` sits between two collinear edges.
    pub fn straight_vertices(&self, c: CellId) -> Vec<bool> {
        straight_flags(&self.cell_points(c))
    }

    /// The aligned group of cell `c` that contains edge `e`.
    pub fn aligned_group(&self, c: CellId, e: EdgeId) -> Result<AlignedGroup, MeshError> {
        let p = self
            .edge_position(c, e)
            .ok_or(MeshError::EdgeNotInCell { edge: e, cell: c })?;
        let straight = self.straight_vertices(c);
        Ok(self.group_from(c, p, &straight))
    }

    fn group_from(&self, c: CellId, p: usize, straight: &[bool]) -> AlignedGroup {
        let n = straight.len();
        let mut first = p;
        let mut steps = 0;
        while straight[first] && steps < n {
            first = (first + n - 1) % n;
            steps += 1;
        }
        let mut positions = vec![first];
        let mut q = first;
        while straight[(q + 1) % n] && positions.len() < n {
            q = (q + 1) % n;
            positions.push(q);
        }
        let cell = &self.cells[c];
        let edges: Vec<EdgeId> = positions.iter().map(|&i| cell.edges[i]).collect();
        let length = edges.iter().map(|&e| self.edge_length(e)).sum();
        AlignedGroup {
            cell: c,
            start: cell.vertices[first],
            end: cell.vertices[(q + 1) % n],
            positions,
            edges,
            length,
        }
    }

    /// All aligned groups of a cell, starting at its first corner.
    pub fn aligned_groups(&self, c: CellId) -> Vec<AlignedGroup> {
        let straight = self.straight_vertices(c);
        let n = straight.len();
        let Some(first) = (0..n).find(|&i| !straight[i]) else {
            return Vec::new();
        };
        let mut groups = Vec::new();
        let mut p = first;
        let mut covered = 0;
        while covered < n {
            let g = self.group_from(c, p, &straight);
            covered += g.count();
            p = (g.positions[g.count() - 1] + 1) % n;
            groups.push(g);
        }
        groups
    }

    /// Loop positions of the corners of cell `c`, i.e. the vertices kept by
    /// [`Mesh::unify_aligned`].
    pub fn corner_positions(&self, c: CellId) -> Vec<usize> {
        let straight = self.straight_vertices(c);
        (0..straight.len()).filter(|&i| !straight[i]).collect()
    }

    /// `Ê`: the cell polygon with all hanging nodes removed.
    pub fn unify_aligned(&self, c: CellId) -> Polygon {
        let pts = self.cell_points(c);
        Polygon::from_vertices_unchecked(unify_points(&pts))
    }
}

pub(crate) fn straight_flags(pts: &[Point2]) -> Vec<bool> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            are_collinear(prev, pts[i], next, TOL_COL) && (pts[i] - prev).dot(next - pts[i]) > 0.0
        })
        .collect()
}

pub(crate) fn unify_points(pts: &[Point2]) -> Vec<Point2> {
    let straight = straight_flags(pts);
    pts.iter()
        .zip(&straight)
        .filter_map(|(p, s)| (!s).then_some(*p))
        .collect()
}
