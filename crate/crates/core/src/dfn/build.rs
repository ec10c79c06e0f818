use std::collections::HashMap;

use serde::Serialize;

use super::{DfnError, FractureNetwork, Trace};
use crate::geometry::{
    convex_decomposition, line_convex_intersection, point_segment_distance, GeometryError, Point2, Point3, Polygon,
};
use crate::mesh::{BoundaryLabel, CellId, EdgeId, Mesh, MeshError, VertexId};
use crate::refine::hit_to_end;

/// Node counts found on each trace by [`check_conformity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformityReport {
    pub nodes_per_trace: Vec<usize>,
    /// Largest number of cells sharing one edge.
    pub max_edge_cells: usize,
}

/// Clip the segment `[p, q]` to a convex polygon; returns the parameter
/// range inside, if any.
fn clip_segment(pts: &[Point2], p: Point2, q: Point2) -> Option<(f64, f64)> {
    let d = q - p;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let e = b - a;
        // inside when e × (x - a) >= 0
        let num = e.cross(p - a);
        let den = e.cross(d);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

fn boundary_distance(pts: &[Point2], x: Point2) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| point_segment_distance(x, pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Cut every cell of fracture `f` whose interior the segment `[p, q]`
/// crosses, along the full chord of the segment's line.
fn cut_along(mesh: &mut Mesh, f: usize, trace: usize, p: Point2, q: Point2, tol: f64) -> Result<(), DfnError> {
    let cells: Vec<CellId> = mesh.active_cells().filter(|&c| mesh.cells[c].fracture == f).collect();
    let dir = q - p;
    let len = dir.norm();
    for c in cells {
        let pts = mesh.cell_points(c);
        let Some((t0, t1)) = clip_segment(&pts, p, q) else { continue };
        if (t1 - t0) * len <= tol {
            continue;
        }
        let mid = p.lerp(q, 0.5 * (t0 + t1));
        if boundary_distance(&pts, mid) <= tol {
            // the trace runs along an existing edge
            continue;
        }
        let hits = line_convex_intersection(&pts, mid, dir).map_err(|source| DfnError::Mesh(MeshError::Geometry { cell: c, source }))?;
        let ends = hits.map(|h| hit_to_end(mesh, c, h.edge, h.param));
        let info = mesh.split_cell(c, ends[0], ends[1])?;
        mesh.edges[info.chord].trace = Some(trace);
    }
    Ok(())
}

/// Vertices of fracture `f` lying on the trace, with their trace parameter.
fn trace_nodes(mesh: &Mesh, f: usize, trace: &Trace, tol: f64) -> Vec<(f64, VertexId)> {
    let mut seen: Vec<VertexId> = mesh
        .active_cells()
        .filter(|&c| mesh.cells[c].fracture == f)
        .flat_map(|c| mesh.cells[c].vertices.iter().copied())
        .collect();
    seen.sort_unstable();
    seen.dedup();
    let mut out: Vec<(f64, VertexId)> = seen
        .into_iter()
        .filter(|&v| trace.distance(mesh.vertices[v].pos) <= tol)
        .map(|v| (trace.param(mesh.vertices[v].pos), v))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// Active edges of fracture `f` with both ends on the trace.
fn trace_edges(mesh: &Mesh, f: usize, trace: &Trace, tol: f64) -> Vec<EdgeId> {
    mesh.active_edges()
        .filter(|&e| mesh.edges[e].cells.iter().any(|&c| mesh.cells[c].fracture == f))
        .filter(|&e| {
            let [a, b] = mesh.edges[e].vertices;
            trace.distance(mesh.vertices[a].pos) <= tol && trace.distance(mesh.vertices[b].pos) <= tol
        })
        .collect()
}

/// Make sure fracture `f` has a node at trace parameter `s`, splitting the
/// trace edge that contains it if necessary.
fn ensure_node(mesh: &mut Mesh, f: usize, trace: &Trace, s: f64, tol: f64) -> Result<VertexId, DfnError> {
    let target: Point3 = trace.ends[0].lerp(trace.ends[1], s);
    if let Some(&(_, v)) = trace_nodes(mesh, f, trace, tol)
        .iter()
        .find(|(_, v)| mesh.vertices[*v].pos.distance(target) <= tol)
    {
        return Ok(v);
    }
    // chords may run past the trace ends, so look along the whole line
    let off_line = |p: Point3| {
        let s = trace.param(p);
        p.distance(trace.ends[0].lerp(trace.ends[1], s))
    };
    let candidates: Vec<EdgeId> = mesh
        .active_edges()
        .filter(|&e| mesh.edges[e].cells.iter().any(|&c| mesh.cells[c].fracture == f))
        .filter(|&e| mesh.edges[e].vertices.iter().all(|&v| off_line(mesh.vertices[v].pos) <= tol))
        .collect();
    for e in candidates {
        let [a, b] = mesh.edges[e].vertices;
        let (pa, pb) = (mesh.vertices[a].pos, mesh.vertices[b].pos);
        let d = pb - pa;
        let t = (target - pa).dot(d) / d.dot(d);
        let len = d.norm();
        if t * len > tol && (1.0 - t) * len > tol {
            let (w, _, _) = mesh.split_edge(e, t);
            return Ok(w);
        }
    }
    Err(DfnError::Conformity {
        trace: trace.id,
        message: format!("fracture {f} has no edge through trace parameter {s}"),
    })
}

fn unify_trace(mesh: &mut Mesh, trace: &Trace, tol: f64) -> Result<(), DfnError> {
    let [fi, fj] = trace.fractures;
    let ptol = tol / trace.length();
    let mut params: Vec<f64> = vec![0.0, 1.0];
    for f in [fi, fj] {
        params.extend(trace_nodes(mesh, f, trace, tol).into_iter().map(|(s, _)| s));
    }
    params.sort_by(f64::total_cmp);
    params.dedup_by(|a, b| (*a - *b).abs() <= ptol);
    for &s in &params {
        let vi = ensure_node(mesh, fi, trace, s, tol)?;
        let vj = ensure_node(mesh, fj, trace, s, tol)?;
        if vi != vj {
            let (keep, drop) = (vi.min(vj), vi.max(vj));
            mesh.merge_vertices(keep, drop);
        }
    }
    let mut by_ends: HashMap<(VertexId, VertexId), EdgeId> = HashMap::new();
    for e in trace_edges(mesh, fi, trace, tol) {
        let [a, b] = mesh.edges[e].vertices;
        by_ends.insert((a.min(b), a.max(b)), e);
    }
    for e in trace_edges(mesh, fj, trace, tol) {
        let [a, b] = mesh.edges[e].vertices;
        if let Some(&keep) = by_ends.get(&(a.min(b), a.max(b))) {
            if keep != e {
                mesh.merge_edges(keep, e);
                mesh.edges[keep].trace = Some(trace.id);
            }
        }
    }
    Ok(())
}

/// Globally conforming minimal mesh of a network.
///
/// Each fracture is decomposed into convex cells (a single cell when the
/// fracture is convex). Cells crossed by a trace are cut along the whole
/// chord of the trace line, so a trace ending inside a cell is extended to
/// that cell's boundary. Nodes on every trace are then shared between the
/// two fractures, inserting hanging nodes where one side lacks them.
pub fn build_minimal_dfn_mesh(network: &FractureNetwork) -> Result<Mesh, DfnError> {
    let tol = network.tol;
    let mut mesh = Mesh::new();
    for f in &network.fractures {
        let pieces = convex_decomposition(&f.local).map_err(|source| DfnError::Geometry { fracture: f.id, source })?;
        let polys = pieces
            .into_iter()
            .map(Polygon::new)
            .collect::<Result<Vec<_>, GeometryError>>()
            .map_err(|source| DfnError::Geometry { fracture: f.id, source })?;
        let rule = |a: Point3, b: Point3| network.boundary_label(a, b);
        mesh.add_region(f.id, &polys, f.frame, &rule)?;
    }

    for f in &network.fractures {
        // traces crossing the whole fracture first, so that tips of the
        // others tend to land on existing edges
        let on_boundary = |p: Point2| boundary_distance(&f.local, p) <= tol;
        let mut mine: Vec<(usize, usize, &Trace)> = network
            .traces
            .iter()
            .filter_map(|t| t.side(f.id).map(|side| (t, side)))
            .map(|(t, side)| {
                let tips = t.local[side].iter().filter(|&&p| !on_boundary(p)).count();
                (tips, side, t)
            })
            .collect();
        mine.sort_by_key(|&(tips, _, t)| (tips, t.id));
        for (_, side, t) in mine {
            let [p, q] = t.local[side];
            cut_along(&mut mesh, f.id, t.id, p, q, tol)?;
        }
    }

    for t in &network.traces {
        unify_trace(&mut mesh, t, tol)?;
    }
    for e in mesh.edges.iter_mut() {
        e.marked = false;
    }
    if !mesh
        .active_edges()
        .any(|e| mesh.edges[e].label == BoundaryLabel::Dirichlet)
    {
        return Err(DfnError::NoDirichlet);
    }
    Ok(mesh)
}

/// Exhaustive conformity check: on every trace, both fractures see the same
/// nodes (same vertex ids, hence the same positions), and every trace edge
/// is shared by cells of both fractures.
pub fn check_conformity(mesh: &Mesh, network: &FractureNetwork) -> Result<ConformityReport, DfnError> {
    let tol = network.tol;
    let mut nodes_per_trace = Vec::with_capacity(network.traces.len());
    for t in &network.traces {
        let [fi, fj] = t.fractures;
        let ni = trace_nodes(mesh, fi, t, tol);
        let nj = trace_nodes(mesh, fj, t, tol);
        let fail = |message: String| DfnError::Conformity { trace: t.id, message };
        if ni.len() != nj.len() {
            return Err(fail(format!("{} nodes in fracture {fi}, {} in fracture {fj}", ni.len(), nj.len())));
        }
        for (&(si, vi), &(sj, vj)) in ni.iter().zip(&nj) {
            let gap = mesh.vertices[vi].pos.distance(mesh.vertices[vj].pos);
            if vi != vj || gap > tol {
                return Err(fail(format!(
                    "node mismatch at parameters {si} / {sj} (vertices {vi} / {vj}, gap {gap:e})"
                )));
            }
        }
        for &(s, _) in [ni.first(), ni.last()].into_iter().flatten() {
            if (s.abs() > tol / t.length()) && ((1.0 - s).abs() > tol / t.length()) {
                return Err(fail(format!("trace end not covered by a node (nearest parameter {s})")));
            }
        }
        for e in trace_edges(mesh, fi, t, tol) {
            let edge = &mesh.edges[e];
            if !edge.cells.iter().any(|&c| mesh.cells[c].fracture == fj) {
                return Err(fail(format!("edge {e} is not shared with fracture {fj}")));
            }
        }
        nodes_per_trace.push(ni.len());
    }
    let max_edge_cells = mesh.active_edges().map(|e| mesh.edges[e].cells.len()).max().unwrap_or(0);
    Ok(ConformityReport {
        nodes_per_trace,
        max_edge_cells,
    })
}
