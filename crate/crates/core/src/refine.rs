//! Quality-checked bisection of marked cells.
//!
//! Every marked cell is cut in two. The cut direction comes from the
//! cell with its hanging nodes removed: newest-vertex bisection for
//! triangles, the axis of largest rotational inertia otherwise. Cut ends
//! are then moved to edge midpoints or existing vertices depending on two
//! edge-size checks, and neighbours whose new hanging edges fail those
//! checks are refined as well.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::geometry::{line_convex_intersection, max_momentum_direction, GeometryError, Point2};
use crate::mesh::{ChordEnd, CellId, EdgeId, Mesh, MeshError, VertexId};

/// Relative slack on the size checks so that equality cases pass.
const CHECK_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("refinement parameters must be finite and non-negative (c_rho = {c_rho}, c_al = {c_al})")]
    BadParams { c_rho: f64, c_al: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("cell {cell}: {source}")]
    Geometry {
        cell: CellId,
        #[source]
        source: GeometryError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefinementParams {
    pub c_rho: f64,
    pub c_al: f64,
}

impl RefinementParams {
    pub fn new(c_rho: f64, c_al: f64) -> Result<Self, RefineError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(c_rho) || !ok(c_al) {
            return Err(RefineError::BadParams { c_rho, c_al });
        }
        Ok(Self { c_rho, c_al })
    }
}

impl Default for RefinementParams {
    fn default() -> Self {
        Self { c_rho: 0.5, c_al: 1.0 }
    }
}

/// A line `point + s * dir` used to cut a cell; `point` is inside the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLine {
    pub point: Point2,
    pub dir: Point2,
    /// Set for newest-vertex bisection of a (unified) triangle.
    pub newest: Option<VertexId>,
}

/// Per-split bookkeeping for structural checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub parent: CellId,
    pub parent_vertices: usize,
    pub children: [CellId; 2],
    pub child_vertices: [usize; 2],
    pub children_convex: bool,
    pub chord: (Point2, Point2),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefineOutcome {
    /// Cells actually split (`T^Ref`), in processing order.
    pub refined: Vec<CellId>,
    /// Cells requested by the caller (`T^ToRef`).
    pub to_refine: Vec<CellId>,
    /// Cells added by extension.
    pub extended: Vec<CellId>,
    pub splits: Vec<SplitRecord>,
}

/// Cut line for cell `c`, computed on its unified polygon.
pub fn max_momentum(mesh: &Mesh, c: CellId) -> CutLine {
    let cell = &mesh.cells[c];
    let pts = mesh.cell_points(c);
    let corners = mesh.corner_positions(c);
    if corners.len() == 3 {
        let cv: Vec<Point2> = corners.iter().map(|&i| pts[i]).collect();
        let ids: Vec<VertexId> = corners.iter().map(|&i| cell.vertices[i]).collect();
        let k = match cell.newest.and_then(|v| ids.iter().position(|&x| x == v)) {
            Some(k) => k,
            None => {
                // vertex opposite the longest side; first one on ties
                let mut best = 0;
                let mut best_len = -1.0;
                for s in 0..3 {
                    let len = cv[(s + 1) % 3].distance(cv[(s + 2) % 3]);
                    if len > best_len * (1.0 + 1e-12) {
                        best = s;
                        best_len = len;
                    }
                }
                best
            }
        };
        let apex = cv[k];
        let mid = cv[(k + 1) % 3].lerp(cv[(k + 2) % 3], 0.5);
        return CutLine {
            point: apex.lerp(mid, 0.5),
            dir: (mid - apex) / mid.distance(apex),
            newest: Some(ids[k]),
        };
    }
    let unified = mesh.unify_aligned(c);
    let dir = max_momentum_direction(unified.vertices(), &cell.geom.inertia);
    CutLine {
        point: cell.geom.centroid,
        dir,
        newest: None,
    }
}

/// Both size checks for splitting edge `e` of cell `c` into `s` equal parts.
pub fn check_quality(
    mesh: &Mesh,
    c: CellId,
    e: EdgeId,
    s: usize,
    params: &RefinementParams,
) -> Result<bool, MeshError> {
    if mesh.edge_position(c, e).is_none() {
        return Err(MeshError::EdgeNotInCell { edge: e, cell: c });
    }
    let len = mesh.edge_length(e) * (1.0 + CHECK_SLACK);
    let s = s as f64;
    let mut rho_max: f64 = 0.0;
    let mut group_max: f64 = 0.0;
    for &n in &mesh.edges[e].cells {
        rho_max = rho_max.max(mesh.cells[n].geom.rho());
        let g = mesh.aligned_group(n, e)?;
        group_max = group_max.max(g.length / (g.count() as f64 + s - 1.0));
    }
    Ok(len >= params.c_rho * s * rho_max && len >= params.c_al * s * group_max)
}

pub(crate) fn hit_to_end(mesh: &Mesh, c: CellId, pos: usize, param: f64) -> ChordEnd {
    let cell = &mesh.cells[c];
    let n = cell.vertices.len();
    if param == 0.0 {
        return ChordEnd::Vertex(cell.vertices[pos]);
    }
    if param == 1.0 {
        return ChordEnd::Vertex(cell.vertices[(pos + 1) % n]);
    }
    let t = if mesh.edge_is_forward(c, pos) { param } else { 1.0 - param };
    ChordEnd::OnEdge { edge: cell.edges[pos], t }
}

/// Boundary hits of the cut line on the actual loop of `c`.
fn raw_hits(mesh: &Mesh, c: CellId, line: &CutLine) -> Result<[(usize, f64, Point2); 2], RefineError> {
    let pts = mesh.cell_points(c);
    let hits = line_convex_intersection(&pts, line.point, line.dir)
        .map_err(|source| RefineError::Geometry { cell: c, source })?;
    Ok(hits.map(|h| (h.edge, h.param, h.point)))
}

/// Chord ends for splitting `c` along `line`.
pub fn smooth_direction(
    mesh: &Mesh,
    c: CellId,
    line: &CutLine,
    params: &RefinementParams,
) -> Result<[ChordEnd; 2], RefineError> {
    let hits = raw_hits(mesh, c, line)?;
    let raw = hits.map(|(pos, t, _)| hit_to_end(mesh, c, pos, t));
    if line.newest.is_some() {
        return Ok(raw);
    }
    let cell = &mesh.cells[c];
    let n = cell.vertices.len();
    let pts = mesh.cell_points(c);
    let mut ends = raw;
    for (slot, &(pos, t, point)) in ends.iter_mut().zip(&hits) {
        if t == 0.0 || t == 1.0 {
            continue;
        }
        let e = cell.edges[pos];
        *slot = if check_quality(mesh, c, e, 2, params)? {
            ChordEnd::OnEdge { edge: e, t: 0.5 }
        } else {
            let (a, b) = (pts[pos], pts[(pos + 1) % n]);
            // ties go to the start of the edge in loop order
            if point.distance(b) < point.distance(a) {
                ChordEnd::Vertex(cell.vertices[(pos + 1) % n])
            } else {
                ChordEnd::Vertex(cell.vertices[pos])
            }
        };
    }
    if !mesh.chord_is_degenerate(c, ends[0], ends[1]) {
        return Ok(ends);
    }
    let mid = hits.map(|(pos, t, _)| {
        if t == 0.0 || t == 1.0 {
            hit_to_end(mesh, c, pos, t)
        } else {
            ChordEnd::OnEdge { edge: cell.edges[pos], t: 0.5 }
        }
    });
    if !mesh.chord_is_degenerate(c, mid[0], mid[1]) {
        return Ok(mid);
    }
    Ok(raw)
}

/// Split every cell of `marked` once, extending to neighbours whose new
/// hanging edges fail the size checks.
pub fn refine(
    mesh: &mut Mesh,
    marked: &[CellId],
    params: &RefinementParams,
) -> Result<RefineOutcome, RefineError> {
    let mut out = RefineOutcome::default();
    let initial: BTreeSet<CellId> = marked.iter().copied().filter(|&c| mesh.cells[c].active).collect();
    out.to_refine = initial.iter().copied().collect();
    let mut queue: VecDeque<CellId> = initial.iter().copied().collect();
    let mut queued: BTreeSet<CellId> = initial;

    while let Some(c) = queue.pop_front() {
        if !mesh.cells[c].active {
            continue;
        }
        let line = max_momentum(mesh, c);
        let ends = smooth_direction(mesh, c, &line, params)?;
        let info = match mesh.split_cell(c, ends[0], ends[1]) {
            Ok(info) => info,
            Err(MeshError::DegenerateChord(_)) => {
                let hits = raw_hits(mesh, c, &line)?;
                let raw = hits.map(|(pos, t, _)| hit_to_end(mesh, c, pos, t));
                mesh.split_cell(c, raw[0], raw[1])?
            }
            Err(e) => return Err(e.into()),
        };
        let fracture = mesh.cells[c].fracture;
        if line.newest.is_some() {
            // the vertex created opposite the apex is the children's newest vertex
            for child in info.children {
                mesh.cells[child].newest = Some(info.ends[1]);
            }
        }
        let child_vertices = info.children.map(|ch| mesh.cells[ch].vertices.len());
        out.splits.push(SplitRecord {
            parent: c,
            parent_vertices: info.parent_vertices,
            children: info.children,
            child_vertices,
            children_convex: info.children.iter().all(|&ch| mesh.is_cell_convex(ch)),
            chord: (
                mesh.local(info.ends[0], fracture),
                mesh.local(info.ends[1], fracture),
            ),
        });
        out.refined.push(c);

        // neighbours sharing the freshly split edges
        let mut neighbours = BTreeSet::new();
        for &e in &info.new_edges {
            for &q in &mesh.edges[e].cells {
                if !info.children.contains(&q) {
                    neighbours.insert(q);
                }
            }
        }
        for q in neighbours {
            if queued.contains(&q) {
                continue;
            }
            let marked_edges: Vec<EdgeId> = mesh.cells[q]
                .edges
                .iter()
                .copied()
                .filter(|&e| mesh.edges[e].marked)
                .collect();
            for e in marked_edges {
                if check_quality(mesh, q, e, 1, params)? {
                    mesh.edges[e].marked = false;
                } else {
                    queued.insert(q);
                    queue.push_back(q);
                    out.extended.push(q);
                    break;
                }
            }
        }
    }
    for e in mesh.edges.iter_mut() {
        e.marked = false;
    }
    Ok(out)
}
