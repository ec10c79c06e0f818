//! Mutable polygonal tessellation.
//!
//! Cells, edges and vertices live in flat index-based stores. Nothing is
//! ever physically removed: split cells and split edges are flagged inactive
//! so that ids stay stable for reporting. An edge may be shared by more than
//! two cells when it lies on a fracture intersection, and a cell loop may
//! contain several collinear edges on one geometric side (hanging nodes).

mod aligned;
mod build;
pub mod export;
pub mod quality;

pub use aligned::AlignedGroup;
pub use build::build_mesh;
pub use quality::{quality_report, Distribution, MeshQualityReport};

use smallvec::SmallVec;
use thiserror::Error;

use crate::geometry::{
    cell_geometry_of, is_convex, point_segment_distance, CellGeometry, Frame, GeometryError,
    Point2, Point3, Polygon, TOL_LEN_REL,
};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type CellId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("cell {cell}: {source}")]
    Geometry {
        cell: usize,
        #[source]
        source: GeometryError,
    },
    #[error("cell {0} is not convex")]
    NonConvex(usize),
    #[error("cells overlap along edge ({0}, {1})")]
    Overlap(VertexId, VertexId),
    #[error("vertices {0} and {1} are {2:e} apart: gap larger than the merge tolerance")]
    Gap(VertexId, VertexId, f64),
    #[error("degenerate chord in cell {0}")]
    DegenerateChord(CellId),
    #[error("edge {edge} is not on the boundary of cell {cell}")]
    EdgeNotInCell { edge: EdgeId, cell: CellId },
    #[error("cell {0} is not active")]
    InactiveCell(CellId),
    #[error("vertex {vertex} has no coordinates in fracture {fracture}")]
    MissingLocal { vertex: VertexId, fracture: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLabel {
    Interior,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub pos: Point3,
    /// Coordinates in the tangential frame of every fracture the vertex belongs to.
    local: SmallVec<[(usize, Point2); 2]>,
    pub alive: bool,
}

impl Vertex {
    pub fn local(&self, fracture: usize) -> Option<Point2> {
        self.local
            .iter()
            .find(|(f, _)| *f == fracture)
            .map(|(_, p)| *p)
    }

    pub fn fractures(&self) -> impl Iterator<Item = usize> + '_ {
        self.local.iter().map(|(f, _)| *f)
    }

    fn set_local(&mut self, fracture: usize, p: Point2) {
        match self.local.iter_mut().find(|(f, _)| *f == fracture) {
            Some(slot) => slot.1 = p,
            None => self.local.push((fracture, p)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub vertices: [VertexId; 2],
    /// Cells having this edge in their loop (`N_e`).
    pub cells: SmallVec<[CellId; 4]>,
    pub marked: bool,
    pub label: BoundaryLabel,
    pub trace: Option<usize>,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct Cell {
    /// Counter-clockwise vertex loop; edge `i` joins vertex `i` and `i + 1`.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub active: bool,
    pub fracture: usize,
    pub geom: CellGeometry,
    /// Newest vertex for bisection of triangles.
    pub newest: Option<VertexId>,
    pub parent: Option<CellId>,
}

/// Where a chord meets the boundary of the cell being split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChordEnd {
    Vertex(VertexId),
    /// Interior point of an edge, `t` measured from `edge.vertices[0]`.
    OnEdge { edge: EdgeId, t: f64 },
}

/// Result of [`Mesh::split_cell`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInfo {
    pub children: [CellId; 2],
    pub chord: EdgeId,
    /// Chord end vertices, in the order the ends were given.
    pub ends: [VertexId; 2],
    /// Sub-edges created by splitting boundary edges at chord ends.
    pub new_edges: Vec<EdgeId>,
    /// Vertices inserted at chord ends.
    pub new_vertices: Vec<VertexId>,
    pub parent_vertices: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
    frames: Vec<Frame>,
}

impl Mesh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_fractures(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, fracture: usize) -> &Frame {
        &self.frames[fracture]
    }

    pub(crate) fn set_frame(&mut self, fracture: usize, frame: Frame) {
        if self.frames.len() <= fracture {
            self.frames.resize(fracture + 1, Frame::xy());
        }
        self.frames[fracture] = frame;
    }

    pub fn active_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.active.then_some(i))
    }

    pub fn n_active_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.active).count()
    }

    pub fn active_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.active.then_some(i))
    }

    pub fn add_vertex(&mut self, pos: Point3, fracture: usize, local: Point2) -> VertexId {
        if self.frames.len() <= fracture {
            self.frames.resize(fracture + 1, Frame::xy());
        }
        let mut v = Vertex {
            pos,
            local: SmallVec::new(),
            alive: true,
        };
        v.set_local(fracture, local);
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    /// Coordinates of a vertex in the frame of `fracture`.
    pub fn local(&self, v: VertexId, fracture: usize) -> Point2 {
        self.vertices[v]
            .local(fracture)
            .unwrap_or_else(|| panic!("vertex {v} not in fracture {fracture}"))
    }

    /// Vertex coordinates of a cell in its fracture frame.
    pub fn cell_points(&self, c: CellId) -> Vec<Point2> {
        let cell = &self.cells[c];
        cell.vertices
            .iter()
            .map(|&v| self.local(v, cell.fracture))
            .collect()
    }

    pub fn cell_polygon(&self, c: CellId) -> Polygon {
        Polygon::from_vertices_unchecked(self.cell_points(c))
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        let [a, b] = self.edges[e].vertices;
        self.vertices[a].pos.distance(self.vertices[b].pos)
    }

    /// Position of edge `e` in the loop of cell `c`.
    pub fn edge_position(&self, c: CellId, e: EdgeId) -> Option<usize> {
        self.cells[c].edges.iter().position(|&x| x == e)
    }

    /// Whether cell `c` walks edge `e` from `vertices[0]` to `vertices[1]`.
    pub fn edge_is_forward(&self, c: CellId, pos: usize) -> bool {
        let e = self.cells[c].edges[pos];
        self.cells[c].vertices[pos] == self.edges[e].vertices[0]
    }

    pub fn refresh_geometry(&mut self, c: CellId) -> Result<(), MeshError> {
        let pts = self.cell_points(c);
        let geom = cell_geometry_of(&pts).map_err(|source| MeshError::Geometry { cell: c, source })?;
        self.cells[c].geom = geom;
        Ok(())
    }

    pub fn active_area(&self) -> f64 {
        self.active_cells().map(|c| self.cells[c].geom.area).sum()
    }

    pub fn fracture_area(&self, fracture: usize) -> f64 {
        self.active_cells()
            .filter(|&c| self.cells[c].fracture == fracture)
            .map(|c| self.cells[c].geom.area)
            .sum()
    }

    pub fn is_cell_convex(&self, c: CellId) -> bool {
        is_convex(&self.cell_points(c))
    }

    pub(crate) fn push_edge(&mut self, a: VertexId, b: VertexId, label: BoundaryLabel) -> EdgeId {
        self.edges.push(Edge {
            vertices: [a, b],
            cells: SmallVec::new(),
            marked: false,
            label,
            trace: None,
            active: true,
        });
        self.edges.len() - 1
    }

    pub(crate) fn push_cell(
        &mut self,
        vertices: Vec<VertexId>,
        edges: Vec<EdgeId>,
        fracture: usize,
        parent: Option<CellId>,
    ) -> Result<CellId, MeshError> {
        let id = self.cells.len();
        let pts: Vec<Point2> = vertices.iter().map(|&v| self.local(v, fracture)).collect();
        let geom =
            cell_geometry_of(&pts).map_err(|source| MeshError::Geometry { cell: id, source })?;
        self.cells.push(Cell {
            vertices,
            edges,
            active: true,
            fracture,
            geom,
            newest: None,
            parent,
        });
        Ok(id)
    }

    /// Split edge `e` at parameter `t` (from `vertices[0]`). Every cell in
    /// `N_e` gets the new vertex inserted in its loop, so coarse neighbours
    /// end up with two aligned edges in place of the old one.
    pub fn split_edge(&mut self, e: EdgeId, t: f64) -> (VertexId, EdgeId, EdgeId) {
        let [a, b] = self.edges[e].vertices;
        let pos = self.vertices[a].pos.lerp(self.vertices[b].pos, t);
        let mut local: SmallVec<[(usize, Point2); 2]> = SmallVec::new();
        for &(f, pa) in &self.vertices[a].local {
            if let Some(pb) = self.vertices[b].local(f) {
                local.push((f, pa.lerp(pb, t)));
            }
        }
        self.vertices.push(Vertex {
            pos,
            local,
            alive: true,
        });
        let w = self.vertices.len() - 1;

        let (label, trace, marked) = {
            let old = &self.edges[e];
            (old.label, old.trace, old.marked)
        };
        let e1 = self.push_edge(a, w, label);
        let e2 = self.push_edge(w, b, label);
        for &sub in &[e1, e2] {
            self.edges[sub].trace = trace;
            self.edges[sub].marked = marked;
        }
        let cells = std::mem::take(&mut self.edges[e].cells);
        self.edges[e].active = false;
        self.edges[e].marked = false;
        self.edges[e1].cells = cells.clone();
        self.edges[e2].cells = cells.clone();

        for &c in &cells {
            let p = self
                .edge_position(c, e)
                .expect("edge-cell incidence out of sync");
            let forward = self.cells[c].vertices[p] == a;
            let cell = &mut self.cells[c];
            cell.vertices.insert(p + 1, w);
            if forward {
                cell.edges[p] = e1;
                cell.edges.insert(p + 1, e2);
            } else {
                cell.edges[p] = e2;
                cell.edges.insert(p + 1, e1);
            }
            // area and centroid are unchanged; the edge statistics are not
            self.refresh_geometry(c)
                .expect("inserting a collinear vertex keeps the cell valid");
        }
        (w, e1, e2)
    }

    fn chord_point(&self, c: CellId, end: ChordEnd) -> Point2 {
        let f = self.cells[c].fracture;
        match end {
            ChordEnd::Vertex(v) => self.local(v, f),
            ChordEnd::OnEdge { edge, t } => {
                let [a, b] = self.edges[edge].vertices;
                self.local(a, f).lerp(self.local(b, f), t)
            }
        }
    }

    /// True when the chord between the two ends would not cut the interior
    /// of the cell (zero length or lying on the boundary).
    pub fn chord_is_degenerate(&self, c: CellId, a: ChordEnd, b: ChordEnd) -> bool {
        let pts = self.cell_points(c);
        let tol = TOL_LEN_REL * self.cells[c].geom.diameter;
        let pa = self.chord_point(c, a);
        let pb = self.chord_point(c, b);
        if pa.distance(pb) <= tol {
            return true;
        }
        let mid = pa.lerp(pb, 0.5);
        let n = pts.len();
        (0..n).any(|i| point_segment_distance(mid, pts[i], pts[(i + 1) % n]) <= 1e3 * tol)
    }

    /// Bisect cell `c` along the chord joining `a` and `b`.
    ///
    /// Chord ends inside an edge split that edge for all of its neighbours.
    /// The parent is deactivated and two children are created sharing the
    /// chord edge.
    pub fn split_cell(&mut self, c: CellId, a: ChordEnd, b: ChordEnd) -> Result<SplitInfo, MeshError> {
        if !self.cells[c].active {
            return Err(MeshError::InactiveCell(c));
        }
        for end in [a, b] {
            match end {
                ChordEnd::Vertex(v) => {
                    if !self.cells[c].vertices.contains(&v) {
                        return Err(MeshError::DegenerateChord(c));
                    }
                }
                ChordEnd::OnEdge { edge, .. } => {
                    if self.edge_position(c, edge).is_none() {
                        return Err(MeshError::EdgeNotInCell { edge, cell: c });
                    }
                }
            }
        }
        if self.chord_is_degenerate(c, a, b) {
            return Err(MeshError::DegenerateChord(c));
        }
        let parent_vertices = self.cells[c].vertices.len();

        let mut new_edges = Vec::new();
        let mut new_vertices = Vec::new();
        let mut ends = [0; 2];
        for (slot, end) in ends.iter_mut().zip([a, b]) {
            *slot = match end {
                ChordEnd::Vertex(v) => v,
                ChordEnd::OnEdge { edge, t } => {
                    let (w, e1, e2) = self.split_edge(edge, t);
                    self.edges[e1].marked = true;
                    self.edges[e2].marked = true;
                    new_edges.extend([e1, e2]);
                    new_vertices.push(w);
                    w
                }
            };
        }

        let loop_v = self.cells[c].vertices.clone();
        let loop_e = self.cells[c].edges.clone();
        let n = loop_v.len();
        let pi = loop_v.iter().position(|&v| v == ends[0]).expect("chord end in loop");
        let pj = loop_v.iter().position(|&v| v == ends[1]).expect("chord end in loop");
        let (i, j) = if pi < pj { (pi, pj) } else { (pj, pi) };

        let fracture = self.cells[c].fracture;
        let chord = self.push_edge(loop_v[i], loop_v[j], BoundaryLabel::Interior);

        let mut va: Vec<VertexId> = loop_v[i..=j].to_vec();
        let mut ea: Vec<EdgeId> = loop_e[i..j].to_vec();
        ea.push(chord);
        let mut vb: Vec<VertexId> = loop_v[j..].iter().chain(&loop_v[..=i]).copied().collect();
        let mut eb: Vec<EdgeId> = loop_e[j..].iter().chain(&loop_e[..i]).copied().collect();
        eb.push(chord);
        debug_assert_eq!(va.len() + vb.len(), n + 2);
        va.shrink_to_fit();
        vb.shrink_to_fit();

        let ca = self.push_cell(va, ea, fracture, Some(c))?;
        let cb = self.push_cell(vb, eb, fracture, Some(c))?;
        self.edges[chord].cells.extend([ca, cb]);

        for child in [ca, cb] {
            let edges = self.cells[child].edges.clone();
            for e in edges {
                if e == chord {
                    continue;
                }
                for slot in self.edges[e].cells.iter_mut() {
                    if *slot == c {
                        *slot = child;
                    }
                }
            }
        }
        self.cells[c].active = false;

        Ok(SplitInfo {
            children: [ca, cb],
            chord,
            ends,
            new_edges,
            new_vertices,
            parent_vertices,
        })
    }

    /// Replace every reference to vertex `drop` by `keep`, carrying over the
    /// fracture-local coordinates of `drop`.
    pub(crate) fn merge_vertices(&mut self, keep: VertexId, drop: VertexId) {
        if keep == drop {
            return;
        }
        let locals = self.vertices[drop].local.clone();
        for (f, p) in locals {
            if self.vertices[keep].local(f).is_none() {
                self.vertices[keep].set_local(f, p);
            }
        }
        self.vertices[drop].alive = false;
        for e in self.edges.iter_mut() {
            for v in e.vertices.iter_mut() {
                if *v == drop {
                    *v = keep;
                }
            }
        }
        for c in self.cells.iter_mut() {
            for v in c.vertices.iter_mut() {
                if *v == drop {
                    *v = keep;
                }
            }
            if c.newest == Some(drop) {
                c.newest = Some(keep);
            }
        }
    }

    /// Fold edge `drop` into `keep` (same endpoints): all cells of `drop` now
    /// reference `keep`.
    pub(crate) fn merge_edges(&mut self, keep: EdgeId, drop: EdgeId) {
        if keep == drop {
            return;
        }
        let cells = std::mem::take(&mut self.edges[drop].cells);
        for &c in &cells {
            for e in self.cells[c].edges.iter_mut() {
                if *e == drop {
                    *e = keep;
                }
            }
            if !self.edges[keep].cells.contains(&c) {
                self.edges[keep].cells.push(c);
            }
        }
        let (label, trace) = (self.edges[drop].label, self.edges[drop].trace);
        let k = &mut self.edges[keep];
        if k.trace.is_none() {
            k.trace = trace;
        }
        // a shared edge is interior as soon as one side says so
        if label == BoundaryLabel::Interior || k.cells.len() > 1 {
            k.label = BoundaryLabel::Interior;
        }
        self.edges[drop].active = false;
    }

    /// Exhaustive check that `e ∈ loop(E) ⇔ E ∈ N_e` over active entities,
    /// and that consecutive loop entries agree on shared vertices.
    pub fn check_incidence(&self) -> Result<(), String> {
        for (c, cell) in self.cells.iter().enumerate().filter(|(_, c)| c.active) {
            let n = cell.vertices.len();
            if cell.edges.len() != n {
                return Err(format!("cell {c}: {} vertices but {} edges", n, cell.edges.len()));
            }
            for (p, &e) in cell.edges.iter().enumerate() {
                let edge = &self.edges[e];
                if !edge.active {
                    return Err(format!("cell {c} references inactive edge {e}"));
                }
                if !edge.cells.contains(&c) {
                    return Err(format!("edge {e} misses cell {c} in N_e"));
                }
                let (u, v) = (cell.vertices[p], cell.vertices[(p + 1) % n]);
                let ok = edge.vertices == [u, v] || edge.vertices == [v, u];
                if !ok {
                    return Err(format!("cell {c} edge {e} endpoints disagree with loop"));
                }
            }
        }
        for (e, edge) in self.edges.iter().enumerate().filter(|(_, e)| e.active) {
            if edge.cells.is_empty() {
                return Err(format!("active edge {e} has no cells"));
            }
            if edge.vertices[0] == edge.vertices[1] {
                return Err(format!("edge {e} is a loop"));
            }
            for &c in &edge.cells {
                if !self.cells[c].active {
                    return Err(format!("edge {e} lists inactive cell {c}"));
                }
                if !self.cells[c].edges.contains(&e) {
                    return Err(format!("cell {c} does not contain edge {e}"));
                }
            }
            if edge.cells.len() > 2 && edge.trace.is_none() {
                return Err(format!("edge {e} has {} cells but no trace", edge.cells.len()));
            }
        }
        Ok(())
    }
}
