//! Combinatorial planar maps: half-edge structure with explicit oriented
//! face cycles, the dual map with the outer vertex split into degree-1
//! leaves, and the corner graph with its black/white face coloring.
//!
//! Orientation convention: every face cycle is listed so that the face lies
//! on the left of each directed edge. Inner faces are counterclockwise in
//! the plane; the outer (unbounded) face cycle therefore traverses the
//! boundary clockwise.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Cx;

#[derive(Debug, Error)]
pub enum PlanarError {
    #[error("non-planar input: {0}")]
    NonPlanarInput(String),
    #[error("non-positive conductance {c} on edge ({u},{v})")]
    NonPositiveConductance { u: usize, v: usize, c: f64 },
    #[error("dangling half-edge: {0}")]
    DanglingHalfEdge(String),
    #[error("graph json ({path}): {msg}")]
    BadJson { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub c: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct HalfEdge {
    pub from: usize,
    pub to: usize,
    /// Face on the left of (from -> to).
    pub face: usize,
    pub next: usize,
    pub prev: usize,
    pub twin: usize,
    pub edge: usize,
}

#[derive(Debug)]
pub struct PlanarMap {
    pub n_vertices: usize,
    pub faces: Vec<Vec<usize>>,
    pub outer_face: usize,
    pub edges: Vec<Edge>,
    pub boundary: Vec<bool>,
    pub half_edges: Vec<HalfEdge>,
    he_lookup: HashMap<(usize, usize), usize>,
    /// vertex -> (neighbor, edge id), unordered.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl PlanarMap {
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_inner_face(&self, f: usize) -> bool {
        f != self.outer_face
    }

    pub fn half_edge(&self, from: usize, to: usize) -> Option<usize> {
        self.he_lookup.get(&(from, to)).copied()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.half_edge(u, v).map(|h| self.half_edges[h].edge)
    }

    /// Face on the left of the directed edge (from -> to).
    pub fn left_face(&self, from: usize, to: usize) -> usize {
        self.half_edges[self.half_edge(from, to).unwrap()].face
    }

    pub fn total_conductance(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|&(_, e)| self.edges[e].c).sum()
    }

    /// Outgoing half-edges around `v` in counterclockwise rotation order.
    /// For boundary vertices the orbit starts with the half-edge lying on
    /// the outer face cycle.
    pub fn fan_ccw(&self, v: usize) -> Vec<usize> {
        let mut start = None;
        let mut any = None;
        for &(to, _) in &self.adjacency[v] {
            let h = self.half_edge(v, to).unwrap();
            if any.is_none() || h < any.unwrap() {
                any = Some(h);
            }
            if self.half_edges[h].face == self.outer_face {
                start = Some(h);
            }
        }
        let start = start.or(any).expect("isolated vertex");
        let mut orbit = Vec::with_capacity(self.adjacency[v].len());
        let mut h = start;
        loop {
            orbit.push(h);
            let prev = self.half_edges[h].prev;
            h = self.half_edges[prev].twin;
            if h == start {
                break;
            }
        }
        orbit
    }

    /// Build a map from oriented face cycles. `conductances` lists every
    /// undirected edge exactly once.
    pub fn build(
        n_vertices: usize,
        faces: Vec<Vec<usize>>,
        outer_face: usize,
        conductances: &[(usize, usize, f64)],
    ) -> Result<PlanarMap, PlanarError> {
        if outer_face >= faces.len() {
            return Err(PlanarError::NonPlanarInput(format!(
                "outer face id {outer_face} out of range"
            )));
        }
        // Collect directed edges from face cycles; each must appear once.
        let mut he_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut half_edges: Vec<HalfEdge> = Vec::new();
        for (f, cycle) in faces.iter().enumerate() {
            if cycle.len() < 2 {
                return Err(PlanarError::NonPlanarInput(format!(
                    "face {f} has fewer than 2 vertices"
                )));
            }
            let k = cycle.len();
            let base = half_edges.len();
            for i in 0..k {
                let from = cycle[i];
                let to = cycle[(i + 1) % k];
                if from >= n_vertices || to >= n_vertices {
                    return Err(PlanarError::NonPlanarInput(format!(
                        "face {f} references vertex out of range"
                    )));
                }
                if from == to {
                    return Err(PlanarError::DanglingHalfEdge(format!(
                        "face {f} contains a self-loop at vertex {from}"
                    )));
                }
                if he_lookup.insert((from, to), base + i).is_some() {
                    return Err(PlanarError::DanglingHalfEdge(format!(
                        "directed edge ({from},{to}) appears twice in face cycles"
                    )));
                }
                half_edges.push(HalfEdge {
                    from,
                    to,
                    face: f,
                    next: base + (i + 1) % k,
                    prev: base + (i + k - 1) % k,
                    twin: usize::MAX,
                    edge: usize::MAX,
                });
            }
        }
        // Twins.
        for h in 0..half_edges.len() {
            let (from, to) = (half_edges[h].from, half_edges[h].to);
            match he_lookup.get(&(to, from)) {
                Some(&t) => half_edges[h].twin = t,
                None => {
                    return Err(PlanarError::DanglingHalfEdge(format!(
                        "directed edge ({from},{to}) has no twin"
                    )))
                }
            }
        }
        // Undirected edges, deterministic order: sorted by (min, max).
        let mut pairs: Vec<(usize, usize)> = he_lookup
            .keys()
            .filter(|&&(a, b)| a < b)
            .copied()
            .collect();
        pairs.sort_unstable();
        let mut cond: HashMap<(usize, usize), f64> = HashMap::new();
        for &(u, v, c) in conductances {
            if c <= 0.0 || !c.is_finite() {
                return Err(PlanarError::NonPositiveConductance { u, v, c });
            }
            cond.insert((u.min(v), u.max(v)), c);
        }
        let mut edges = Vec::with_capacity(pairs.len());
        for (i, &(u, v)) in pairs.iter().enumerate() {
            let c = *cond.get(&(u, v)).ok_or_else(|| {
                PlanarError::NonPlanarInput(format!("edge ({u},{v}) has no conductance"))
            })?;
            edges.push(Edge { u, v, c });
            let h = he_lookup[&(u, v)];
            let t = half_edges[h].twin;
            half_edges[h].edge = i;
            half_edges[t].edge = i;
        }
        if cond.len() != edges.len() {
            return Err(PlanarError::NonPlanarInput(
                "conductance list mentions edges absent from the face cycles".into(),
            ));
        }
        // Euler relation.
        let v = n_vertices as i64;
        let e = edges.len() as i64;
        let f = faces.len() as i64;
        if v - e + f != 2 {
            return Err(PlanarError::NonPlanarInput(format!(
                "Euler relation fails: V-E+F = {v}-{e}+{f} = {}",
                v - e + f
            )));
        }
        let mut adjacency = vec![Vec::new(); n_vertices];
        for (i, ed) in edges.iter().enumerate() {
            adjacency[ed.u].push((ed.v, i));
            adjacency[ed.v].push((ed.u, i));
        }
        let mut boundary = vec![false; n_vertices];
        let mut outer_count = vec![0usize; n_vertices];
        for &v in &faces[outer_face] {
            boundary[v] = true;
            outer_count[v] += 1;
        }
        if let Some(v) = (0..n_vertices).find(|&v| outer_count[v] > 1) {
            return Err(PlanarError::NonPlanarInput(format!(
                "vertex {v} appears more than once on the outer face (pinched boundary)"
            )));
        }
        if let Some(v) = (0..n_vertices).find(|&v| adjacency[v].is_empty()) {
            return Err(PlanarError::NonPlanarInput(format!("vertex {v} is isolated")));
        }
        Ok(PlanarMap {
            n_vertices,
            faces,
            outer_face,
            edges,
            boundary,
            half_edges,
            he_lookup,
            adjacency,
        })
    }
}

/// Dual map with the outer dual vertex split into one degree-1 leaf per
/// outer-face half-edge. Global dual ids: 0..n_inner are inner faces,
/// n_inner.. are leaves in counterclockwise order along the outer cycle
/// (i.e. the stored order of the outer face cycle).
#[derive(Debug)]
pub struct DualMap {
    pub n_inner: usize,
    /// dual id (< n_inner) -> primal face id.
    pub face_of_dual: Vec<usize>,
    /// primal face id -> dual id (None for the outer face).
    pub dual_of_face: Vec<Option<usize>>,
    /// leaf index -> the outer-cycle half-edge it sits behind.
    pub leaf_half_edge: Vec<usize>,
    leaf_of_he: HashMap<usize, usize>,
    /// Aligned with primal edges: dual endpoints seen from the stored
    /// (u, v) orientation of the edge.
    pub dual_edges: Vec<DualEdge>,
}

/// Dual endpoints of a primal edge, for its stored (u -> v) orientation:
/// `left` is the dual vertex of the face on the left of u -> v.
#[derive(Debug, Clone, Copy)]
pub struct DualEdge {
    pub left: usize,
    pub right: usize,
}

impl DualMap {
    pub fn n_dual_vertices(&self) -> usize {
        self.n_inner + self.leaf_half_edge.len()
    }

    pub fn is_leaf(&self, d: usize) -> bool {
        d >= self.n_inner
    }

    pub fn build(m: &PlanarMap) -> DualMap {
        let mut dual_of_face = vec![None; m.n_faces()];
        let mut face_of_dual = Vec::new();
        for f in 0..m.n_faces() {
            if m.is_inner_face(f) {
                dual_of_face[f] = Some(face_of_dual.len());
                face_of_dual.push(f);
            }
        }
        let n_inner = face_of_dual.len();
        // Leaves in outer-cycle order.
        let mut leaf_half_edge = Vec::new();
        let mut leaf_of_he = HashMap::new();
        let cycle = &m.faces[m.outer_face];
        let k = cycle.len();
        for i in 0..k {
            let h = m.half_edge(cycle[i], cycle[(i + 1) % k]).unwrap();
            leaf_of_he.insert(h, leaf_half_edge.len());
            leaf_half_edge.push(h);
        }
        let dual_id = |h: usize| -> usize {
            let he = &m.half_edges[h];
            match dual_of_face[he.face] {
                Some(d) => d,
                None => n_inner + leaf_of_he[&h],
            }
        };
        let mut dual_edges = Vec::with_capacity(m.n_edges());
        for e in &m.edges {
            let h = m.half_edge(e.u, e.v).unwrap();
            let t = m.half_edges[h].twin;
            dual_edges.push(DualEdge { left: dual_id(h), right: dual_id(t) });
        }
        DualMap { n_inner, face_of_dual, dual_of_face, leaf_half_edge, leaf_of_he, dual_edges }
    }
}

/// A corner is an incident (vertex, dual vertex) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corner {
    pub v: usize,
    /// Global dual id (inner face or leaf).
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlackKind {
    /// Black face around a primal vertex.
    Primal(usize),
    /// Black face around an inner dual vertex (global dual id).
    Dual(usize),
}

#[derive(Debug, Clone)]
pub struct BlackFace {
    pub kind: BlackKind,
    /// Corner ids in counterclockwise rotation order. Closed cycles for
    /// interior primal vertices and inner dual vertices; open chains for
    /// boundary primal vertices.
    pub corners: Vec<usize>,
    pub closed: bool,
}

/// White face of a primal edge e = (u, v) (stored orientation), listed
/// counterclockwise: (u, right), (v, right), (v, left), (u, left).
#[derive(Debug, Clone, Copy)]
pub struct WhiteFace {
    pub edge: usize,
    pub corners: [usize; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerEdgeKind {
    /// (v1, d) - (v2, d): runs along a primal edge.
    PrimalSide,
    /// (v, d1) - (v, d2): runs along a dual edge.
    DualSide,
}

#[derive(Debug, Clone, Copy)]
pub struct CornerEdge {
    pub a: usize,
    pub b: usize,
    pub kind: CornerEdgeKind,
    /// The black face this edge borders (the other side is a white face).
    pub black: BlackKind,
    /// The white face (index into white_faces) it borders.
    pub white: usize,
}

#[derive(Debug)]
pub struct CornerGraph {
    pub corners: Vec<Corner>,
    pub corner_index: HashMap<(usize, usize), usize>,
    pub white_faces: Vec<WhiteFace>,
    pub black_faces: Vec<BlackFace>,
    pub edges: Vec<CornerEdge>,
    /// black face index by primal vertex / by inner dual id.
    pub black_of_vertex: Vec<usize>,
    pub black_of_dual: Vec<usize>,
}

impl CornerGraph {
    pub fn build(m: &PlanarMap, d: &DualMap) -> CornerGraph {
        let mut corners: Vec<Corner> = Vec::new();
        let mut corner_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut intern = |v: usize, dd: usize, corners: &mut Vec<Corner>| -> usize {
            *corner_index.entry((v, dd)).or_insert_with(|| {
                corners.push(Corner { v, d: dd });
                corners.len() - 1
            })
        };

        // Black faces around primal vertices, corners in CCW rotation order.
        let mut black_faces: Vec<BlackFace> = Vec::new();
        let mut black_of_vertex = vec![usize::MAX; m.n_vertices];
        for v in 0..m.n_vertices {
            let orbit = m.fan_ccw(v);
            let mut chain = Vec::new();
            let closed = !m.boundary[v];
            if closed {
                for &h in &orbit {
                    let dd = d.dual_of_face[m.half_edges[h].face].unwrap();
                    chain.push(intern(v, dd, &mut corners));
                }
            } else {
                // orbit[0] lies on the outer cycle; the chain runs from the
                // leaf behind the incoming outer half-edge, through the
                // inner faces, to the leaf behind orbit[0].
                let h0 = orbit[0];
                debug_assert_eq!(m.half_edges[h0].face, m.outer_face);
                let incoming = m.half_edges[h0].prev;
                let leaf_b = d.n_inner + d.leaf_of_he[&incoming];
                chain.push(intern(v, leaf_b, &mut corners));
                for &h in &orbit[1..] {
                    let dd = d.dual_of_face[m.half_edges[h].face].unwrap();
                    chain.push(intern(v, dd, &mut corners));
                }
                let leaf_a = d.n_inner + d.leaf_of_he[&h0];
                chain.push(intern(v, leaf_a, &mut corners));
            }
            black_of_vertex[v] = black_faces.len();
            black_faces.push(BlackFace { kind: BlackKind::Primal(v), corners: chain, closed });
        }
        // Black faces around inner dual vertices.
        let mut black_of_dual = vec![usize::MAX; d.n_inner];
        for dd in 0..d.n_inner {
            let cycle = &m.faces[d.face_of_dual[dd]];
            let chain: Vec<usize> =
                cycle.iter().map(|&v| intern(v, dd, &mut corners)).collect();
            black_of_dual[dd] = black_faces.len();
            black_faces.push(BlackFace { kind: BlackKind::Dual(dd), corners: chain, closed: true });
        }

        // White faces (one per primal edge) and the corner edges they carry.
        let mut white_faces = Vec::with_capacity(m.n_edges());
        let mut edges = Vec::with_capacity(4 * m.n_edges());
        for (ei, e) in m.edges.iter().enumerate() {
            let de = d.dual_edges[ei];
            let c_ur = intern(e.u, de.right, &mut corners);
            let c_vr = intern(e.v, de.right, &mut corners);
            let c_vl = intern(e.v, de.left, &mut corners);
            let c_ul = intern(e.u, de.left, &mut corners);
            let w = white_faces.len();
            white_faces.push(WhiteFace { edge: ei, corners: [c_ur, c_vr, c_vl, c_ul] });
            edges.push(CornerEdge {
                a: c_ur,
                b: c_vr,
                kind: CornerEdgeKind::PrimalSide,
                black: black_kind_of_dual(d, de.right),
                white: w,
            });
            edges.push(CornerEdge {
                a: c_vr,
                b: c_vl,
                kind: CornerEdgeKind::DualSide,
                black: BlackKind::Primal(e.v),
                white: w,
            });
            edges.push(CornerEdge {
                a: c_vl,
                b: c_ul,
                kind: CornerEdgeKind::PrimalSide,
                black: black_kind_of_dual(d, de.left),
                white: w,
            });
            edges.push(CornerEdge {
                a: c_ul,
                b: c_ur,
                kind: CornerEdgeKind::DualSide,
                black: BlackKind::Primal(e.u),
                white: w,
            });
        }

        CornerGraph {
            corners,
            corner_index,
            white_faces,
            black_faces,
            edges,
            black_of_vertex,
            black_of_dual,
        }
    }
}

fn black_kind_of_dual(d: &DualMap, dd: usize) -> BlackKind {
    // Leaves carry no closed black face, but edges along them still fold
    // with the dual-type rule; tag them as dual-side black kind.
    let _ = d;
    BlackKind::Dual(dd)
}

// ---------------------------------------------------------------------------
// Graph JSON.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct JsonVertex {
    id: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonBoundary {
    id: usize,
    pos: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    edges: Vec<Edge>,
    faces: Vec<Vec<usize>>,
    outer_face: usize,
    boundary: Vec<JsonBoundary>,
}

/// Serialize a map together with positions for its boundary vertices.
pub fn graph_to_json(m: &PlanarMap, boundary_pos: &[Option<Cx>]) -> String {
    let g = JsonGraph {
        vertices: (0..m.n_vertices).map(|id| JsonVertex { id }).collect(),
        edges: m.edges.clone(),
        faces: m.faces.clone(),
        outer_face: m.outer_face,
        boundary: (0..m.n_vertices)
            .filter_map(|id| {
                boundary_pos
                    .get(id)
                    .copied()
                    .flatten()
                    .map(|p| JsonBoundary { id, pos: [p.re, p.im] })
            })
            .collect(),
    };
    serde_json::to_string_pretty(&g).expect("serialization cannot fail")
}

/// Parse the graph JSON schema; returns the map plus boundary positions
/// (indexed by vertex, None for interior vertices). Parse errors carry the
/// offending line; semantic errors carry the JSON path.
pub fn graph_from_json(s: &str) -> Result<(PlanarMap, Vec<Option<Cx>>), PlanarError> {
    let g: JsonGraph = serde_json::from_str(s).map_err(|e| PlanarError::BadJson {
        path: format!("line {}, column {}", e.line(), e.column()),
        msg: e.to_string(),
    })?;
    let n = g.vertices.len();
    for (i, v) in g.vertices.iter().enumerate() {
        if v.id != i {
            return Err(PlanarError::BadJson {
                path: format!("vertices[{i}]"),
                msg: format!("ids must be dense 0..n, found {}", v.id),
            });
        }
    }
    let conds: Vec<(usize, usize, f64)> =
        g.edges.iter().map(|e| (e.u, e.v, e.c)).collect();
    let m = PlanarMap::build(n, g.faces, g.outer_face, &conds)?;
    let mut pos = vec![None; n];
    for (i, b) in g.boundary.iter().enumerate() {
        if b.id >= n {
            return Err(PlanarError::BadJson {
                path: format!("boundary[{i}]"),
                msg: format!("vertex id {} out of range", b.id),
            });
        }
        pos[b.id] = Some(Cx::new(b.pos[0], b.pos[1]));
    }
    for v in 0..n {
        if m.boundary[v] && pos[v].is_none() {
            return Err(PlanarError::BadJson {
                path: "boundary".into(),
                msg: format!("outer-face vertex {v} has no position"),
            });
        }
    }
    Ok((m, pos))
}

// ---------------------------------------------------------------------------
// Fixtures used across the test suite.
// ---------------------------------------------------------------------------

/// The 4-corner star: corners 0..3 on a square, center 4, four triangular
/// inner faces. Conductances default to 1; `center_weights` overrides the
/// spoke conductances (corner i, center).
pub fn star_graph(center_weights: Option<[f64; 4]>) -> PlanarMap {
    let w = center_weights.unwrap_or([1.0; 4]);
    let faces = vec![
        vec![0, 1, 4],
        vec![1, 2, 4],
        vec![2, 3, 4],
        vec![3, 0, 4],
        vec![0, 3, 2, 1], // outer, clockwise in the plane
    ];
    let conds = vec![
        (0, 1, 1.0),
        (1, 2, 1.0),
        (2, 3, 1.0),
        (3, 0, 1.0),
        (0, 4, w[0]),
        (1, 4, w[1]),
        (2, 4, w[2]),
        (3, 4, w[3]),
    ];
    PlanarMap::build(5, faces, 4, &conds).expect("star fixture is valid")
}

/// Positions for the star fixture: corners at 0, 1, 1+i, i.
pub fn star_boundary_positions() -> Vec<Option<Cx>> {
    vec![
        Some(Cx::new(0.0, 0.0)),
        Some(Cx::new(1.0, 0.0)),
        Some(Cx::new(1.0, 1.0)),
        Some(Cx::new(0.0, 1.0)),
        None,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_block(n: usize) -> PlanarMap {
        // (n+1) x (n+1) vertices, n x n cells, unit conductances.
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        // Outer cycle with the unbounded face on the left: bottom
        // right-to-left, then up the left side, along the top, down the right.
        let mut outer = Vec::new();
        for i in (1..=n).rev() {
            outer.push(id(i, 0));
        }
        for j in 0..n {
            outer.push(id(0, j));
        }
        for i in 0..n {
            outer.push(id(i, n));
        }
        for j in (1..=n).rev() {
            outer.push(id(n, j));
        }
        faces.push(outer);
        let mut conds = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                if i < n {
                    conds.push((id(i, j), id(i + 1, j), 1.0));
                }
                if j < n {
                    conds.push((id(i, j), id(i, j + 1), 1.0));
                }
            }
        }
        PlanarMap::build((n + 1) * (n + 1), faces, n * n, &conds).unwrap()
    }

    #[test]
    fn star_graph_counts() {
        let m = star_graph(None);
        assert_eq!(m.n_vertices, 5);
        assert_eq!(m.n_edges(), 8);
        assert_eq!(m.n_faces(), 5);
        assert!(m.boundary[0] && !m.boundary[4]);
    }

    #[test]
    fn single_square_face_is_valid() {
        let faces = vec![vec![0, 1, 2, 3], vec![0, 3, 2, 1]];
        let conds = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        let m = PlanarMap::build(4, faces, 1, &conds).unwrap();
        assert_eq!(m.n_edges(), 4);
        let d = DualMap::build(&m);
        assert_eq!(d.n_inner, 1);
        assert_eq!(d.leaf_half_edge.len(), 4);
    }

    #[test]
    fn duplicate_directed_edge_rejected() {
        let faces = vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 2, 1]];
        let conds = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)];
        assert!(matches!(
            PlanarMap::build(3, faces, 2, &conds),
            Err(PlanarError::DanglingHalfEdge(_))
        ));
    }

    #[test]
    fn nonpositive_conductance_rejected() {
        let faces = vec![vec![0, 1, 2], vec![0, 2, 1]];
        let conds = vec![(0, 1, 1.0), (1, 2, -0.5), (2, 0, 1.0)];
        assert!(matches!(
            PlanarMap::build(3, faces, 1, &conds),
            Err(PlanarError::NonPositiveConductance { .. })
        ));
    }

    #[test]
    fn dual_counts_on_blocks() {
        // 2x2 cells: 4 inner dual vertices, 8 leaves, 12 dual edges.
        let m = square_block(2);
        assert_eq!(m.n_edges(), 12);
        let d = DualMap::build(&m);
        assert_eq!(d.n_inner, 4);
        assert_eq!(d.leaf_half_edge.len(), 8);
        assert_eq!(d.dual_edges.len(), 12);
        // 3x3 cells: 9 inner, 12 leaves, 24 dual edges.
        let m = square_block(3);
        assert_eq!(m.n_edges(), 24);
        let d = DualMap::build(&m);
        assert_eq!(d.n_inner, 9);
        assert_eq!(d.leaf_half_edge.len(), 12);
        assert_eq!(d.dual_edges.len(), 24);
    }

    #[test]
    fn dual_edge_bijection_involutive() {
        let m = square_block(3);
        let d = DualMap::build(&m);
        // Every primal edge has exactly one dual edge and distinct endpoints.
        for (ei, de) in d.dual_edges.iter().enumerate() {
            assert_ne!(de.left, de.right, "edge {ei}");
            assert!(de.left < d.n_dual_vertices());
            assert!(de.right < d.n_dual_vertices());
        }
    }

    #[test]
    fn corner_graph_star() {
        let m = star_graph(None);
        let d = DualMap::build(&m);
        let cg = CornerGraph::build(&m, &d);
        // One white face per primal edge.
        assert_eq!(cg.white_faces.len(), 8);
        // Black faces: one per vertex plus one per inner face.
        assert_eq!(cg.black_faces.len(), 5 + 4);
        // Corner edges biject with the edges of the overlay of the graph
        // and its dual: 4 per white face.
        assert_eq!(cg.edges.len(), 4 * 8);
        // The center is interior with 4 incident faces.
        let bf = &cg.black_faces[cg.black_of_vertex[4]];
        assert!(bf.closed);
        assert_eq!(bf.corners.len(), 4);
    }

    #[test]
    fn corner_graph_block_counts() {
        let m = square_block(3);
        let d = DualMap::build(&m);
        let cg = CornerGraph::build(&m, &d);
        assert_eq!(cg.white_faces.len(), m.n_edges());
        assert_eq!(cg.black_faces.len(), m.n_vertices + d.n_inner);
        // Interior black faces enumerate the corners around the vertex in
        // rotation order: degree many.
        for v in 0..m.n_vertices {
            if !m.boundary[v] {
                let bf = &cg.black_faces[cg.black_of_vertex[v]];
                assert_eq!(bf.corners.len(), m.adjacency[v].len());
                assert!(bf.closed);
            }
        }
        // Dual-type black faces have the face degree.
        for dd in 0..d.n_inner {
            let bf = &cg.black_faces[cg.black_of_dual[dd]];
            assert_eq!(bf.corners.len(), m.faces[d.face_of_dual[dd]].len());
        }
    }

    #[test]
    fn single_edge_map() {
        let faces = vec![vec![0, 1]];
        let conds = vec![(0, 1, 1.0)];
        let m = PlanarMap::build(2, faces, 0, &conds).unwrap();
        let d = DualMap::build(&m);
        assert_eq!(d.n_inner, 0);
        assert_eq!(d.leaf_half_edge.len(), 2);
        let cg = CornerGraph::build(&m, &d);
        assert_eq!(cg.white_faces.len(), 1);
        assert_eq!(cg.corners.len(), 4);
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let m = star_graph(None);
        let pos = star_boundary_positions();
        let s = graph_to_json(&m, &pos);
        let (m2, pos2) = graph_from_json(&s).unwrap();
        assert_eq!(m2.n_edges(), m.n_edges());
        assert_eq!(pos2[1], Some(Cx::new(1.0, 0.0)));
        assert!(graph_from_json("{ not json").is_err());
        // Missing boundary position.
        let bad = graph_to_json(&m, &vec![None; 5]);
        assert!(graph_from_json(&bad).is_err());
    }

    #[test]
    fn fan_ccw_orders_interior_vertex() {
        let m = square_block(2);
        // Center vertex of the 3x3 grid is 4; it has 4 incident faces.
        let orbit = m.fan_ccw(4);
        assert_eq!(orbit.len(), 4);
        // Faces around it are the four cells, each seen once.
        let mut fs: Vec<usize> =
            orbit.iter().map(|&h| m.half_edges[h].face).collect();
        fs.sort_unstable();
        assert_eq!(fs, vec![0, 1, 2, 3]);
    }
}
