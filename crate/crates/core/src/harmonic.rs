//! Discrete harmonic analysis on an embedded graph: domain slices, the
//! normalized Laplacian, Dirichlet and Green solvers, harmonic conjugates
//! with monodromy reporting, Dirichlet energies, a Caccioppoli energy
//! inequality, t-holomorphic fields over the corner graph, and piecewise
//! linear gradients with their maximum principle.

use std::collections::VecDeque;

use thiserror::Error;

use crate::embedding::{EmbeddedGraph, HarmonicEmbedding};
use crate::geom::{self, Cx, Region};
use crate::planar::{BlackKind, CornerGraph, DualMap, PlanarMap};
use crate::sparse::{self, CsrMatrix, SolveError};
use crate::tol;

#[derive(Debug, Error)]
pub enum HarmonicError {
    #[error("no interior vertices inside the region")]
    EmptyInterior,
    #[error("vertex {0} has a neighbor without a value")]
    MissingNeighborValue(usize),
    #[error("pole {0} is not an interior vertex of the slice")]
    PoleOnBoundary(usize),
    #[error("ball of radius {r} around ({x}, {y}) is not covered by the graph")]
    BallNotCovered { x: f64, y: f64, r: f64 },
    #[error("fields are not a conjugate pair: closedness defect {0:.3e}")]
    NotConjugatePair(f64),
    #[error("degenerate triangle in face {0}")]
    DegenerateTriangle(usize),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexStatus {
    Outside,
    Interior,
    Boundary,
}

/// A region sliced out of the embedded graph: interior vertices strictly
/// inside, boundary vertices are their neighbors that are outside the region
/// or on the outer face. If the interior splits into components, the largest
/// one is kept.
#[derive(Debug, Clone)]
pub struct DomainSlice {
    pub status: Vec<VertexStatus>,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl DomainSlice {
    pub fn in_closure(&self, v: usize) -> bool {
        self.status[v] != VertexStatus::Outside
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.status[v] == VertexStatus::Interior
    }

    /// The whole graph as a slice: interior = off the outer face.
    pub fn full(m: &PlanarMap) -> DomainSlice {
        let status: Vec<VertexStatus> = (0..m.n_vertices)
            .map(|v| if m.boundary[v] { VertexStatus::Boundary } else { VertexStatus::Interior })
            .collect();
        DomainSlice::from_status(status)
    }

    fn from_status(status: Vec<VertexStatus>) -> DomainSlice {
        let interior: Vec<usize> = (0..status.len())
            .filter(|&v| status[v] == VertexStatus::Interior)
            .collect();
        let boundary: Vec<usize> = (0..status.len())
            .filter(|&v| status[v] == VertexStatus::Boundary)
            .collect();
        DomainSlice { status, interior, boundary }
    }

    /// Move an interior vertex to the boundary (used to puncture a slice at
    /// the pole of a Green's function).
    pub fn punctured(&self, v0: usize) -> DomainSlice {
        let mut status = self.status.clone();
        status[v0] = VertexStatus::Boundary;
        DomainSlice::from_status(status)
    }
}

pub fn slice_domain(
    e: &HarmonicEmbedding,
    region: &Region,
) -> Result<DomainSlice, HarmonicError> {
    let m = &*e.map;
    let n = m.n_vertices;
    let inside: Vec<bool> = (0..n)
        .map(|v| !m.boundary[v] && region.contains(e.pos[v]))
        .collect();
    if !inside.iter().any(|&b| b) {
        return Err(HarmonicError::EmptyInterior);
    }
    // Largest connected component of the inside vertices.
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if !inside[start] || comp[start] != usize::MAX {
            continue;
        }
        let me = sizes.len();
        comp[start] = me;
        let mut size = 1usize;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &m.adjacency[v] {
                if inside[w] && comp[w] == usize::MAX {
                    comp[w] = me;
                    size += 1;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    let keep = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(_, s)| *s)
        .map(|(i, _)| i)
        .unwrap();
    let mut status = vec![VertexStatus::Outside; n];
    for v in 0..n {
        if inside[v] && comp[v] == keep {
            status[v] = VertexStatus::Interior;
        }
    }
    for v in 0..n {
        if status[v] == VertexStatus::Interior {
            for &(w, _) in &m.adjacency[v] {
                if status[w] == VertexStatus::Outside {
                    status[w] = VertexStatus::Boundary;
                }
            }
        }
    }
    Ok(DomainSlice::from_status(status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Solution,
    Conjugate,
    Green,
}

/// Scalar values on primal vertices (or, for conjugates, on dual vertices).
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub values: Vec<f64>,
    pub role: FieldRole,
}

/// Normalized Laplacian (1/mu) sum c (f(v) - f(v')) at an interior vertex.
pub fn apply_laplacian(
    e: &HarmonicEmbedding,
    slice: &DomainSlice,
    f: &[f64],
    v: usize,
) -> Result<f64, HarmonicError> {
    if !slice.is_interior(v) {
        return Err(HarmonicError::PoleOnBoundary(v));
    }
    let mut s = 0.0;
    for &(w, ei) in &e.map.adjacency[v] {
        if !slice.in_closure(w) {
            return Err(HarmonicError::MissingNeighborValue(v));
        }
        s += e.map.edges[ei].c * (f[v] - f[w]);
    }
    Ok(s / e.mu(v))
}

/// Solve the Dirichlet problem on a slice: harmonic inside, `g` on the slice
/// boundary. Values outside the closure are copied from `g` untouched.
pub fn solve_dirichlet(
    e: &HarmonicEmbedding,
    slice: &DomainSlice,
    g: &[f64],
) -> Result<DiscreteField, HarmonicError> {
    let m = &*e.map;
    if slice.interior.is_empty() {
        return Err(HarmonicError::EmptyInterior);
    }
    let mut index = vec![usize::MAX; m.n_vertices];
    for (k, &v) in slice.interior.iter().enumerate() {
        index[v] = k;
    }
    let k = slice.interior.len();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; k];
    for (ki, &v) in slice.interior.iter().enumerate() {
        let mut diag = 0.0;
        for &(w, ei) in &m.adjacency[v] {
            let c = m.edges[ei].c;
            diag += c;
            if index[w] != usize::MAX {
                triplets.push((ki, index[w], -c));
            } else {
                rhs[ki] += c * g[w];
            }
        }
        triplets.push((ki, ki, diag));
    }
    let a = CsrMatrix::from_triplets(k, &triplets);
    let (x, _, _) = sparse::pcg(&a, &rhs, tol::CG_RTOL, sparse::default_iter_cap(k))?;
    let mut values = g.to_vec();
    for (ki, &v) in slice.interior.iter().enumerate() {
        values[v] = x[ki];
    }
    Ok(DiscreteField { values, role: FieldRole::Solution })
}

/// Green's function of the slice with pole v0: zero on the slice boundary,
/// harmonic off v0, and unit flux, i.e. sum over neighbors of
/// c (G(v0) - G(v')) = 1 (equivalently mu(v0) [L G](v0) = 1).
pub fn green(
    e: &HarmonicEmbedding,
    slice: &DomainSlice,
    v0: usize,
) -> Result<DiscreteField, HarmonicError> {
    if !slice.is_interior(v0) {
        return Err(HarmonicError::PoleOnBoundary(v0));
    }
    let m = &*e.map;
    let mut index = vec![usize::MAX; m.n_vertices];
    for (k, &v) in slice.interior.iter().enumerate() {
        index[v] = k;
    }
    let k = slice.interior.len();
    let mut triplets = Vec::new();
    for (ki, &v) in slice.interior.iter().enumerate() {
        let mut diag = 0.0;
        for &(w, ei) in &m.adjacency[v] {
            let c = m.edges[ei].c;
            diag += c;
            if index[w] != usize::MAX {
                triplets.push((ki, index[w], -c));
            }
        }
        triplets.push((ki, ki, diag));
    }
    let mut rhs = vec![0.0; k];
    rhs[index[v0]] = 1.0;
    let a = CsrMatrix::from_triplets(k, &triplets);
    let (x, _, _) = sparse::pcg(&a, &rhs, tol::CG_RTOL, sparse::default_iter_cap(k))?;
    let mut values = vec![0.0; m.n_vertices];
    for (ki, &v) in slice.interior.iter().enumerate() {
        values[v] = x[ki];
    }
    Ok(DiscreteField { values, role: FieldRole::Green })
}

/// Harmonic conjugate on the dual vertices covered by the slice, integrated
/// over a spanning tree; co-tree defects that are clearly nonzero are
/// reported as monodromies (one per independent hole) instead of failing.
#[derive(Debug, Clone)]
pub struct ConjugateField {
    /// Per global dual id; NaN outside the covered set.
    pub values: Vec<f64>,
    pub included: Vec<bool>,
    /// Co-tree defects exceeding the closure tolerance (sign depends on the
    /// implied cycle orientation).
    pub monodromies: Vec<f64>,
    /// Max co-tree defect below the monodromy threshold, relative.
    pub closure_defect: f64,
}

pub fn harmonic_conjugate(
    g: &EmbeddedGraph,
    slice: &DomainSlice,
    h: &[f64],
) -> Result<ConjugateField, HarmonicError> {
    let m = &*g.map;
    let d = &g.dual;
    let nd = d.n_dual_vertices();
    let mut included = vec![false; nd];
    for dd in 0..d.n_inner {
        let f = d.face_of_dual[dd];
        if m.faces[f].iter().all(|&v| slice.in_closure(v)) {
            included[dd] = true;
        }
    }
    for (li, &he) in d.leaf_half_edge.iter().enumerate() {
        let hedge = &m.half_edges[he];
        if slice.in_closure(hedge.from) && slice.in_closure(hedge.to) {
            included[d.n_inner + li] = true;
        }
    }
    // Usable dual edges: primal edge inside the closure, both sides covered.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nd];
    let mut usable = Vec::new();
    let mut max_inc: f64 = 0.0;
    for (ei, de) in d.dual_edges.iter().enumerate() {
        let ed = &m.edges[ei];
        if !slice.in_closure(ed.u) || !slice.in_closure(ed.v) {
            continue;
        }
        if !included[de.left] || !included[de.right] {
            continue;
        }
        // Increment across the edge, right to left of (u -> v).
        let inc = ed.c * (h[ed.v] - h[ed.u]);
        max_inc = max_inc.max(inc.abs());
        adj[de.right].push((de.left, inc));
        adj[de.left].push((de.right, -inc));
        usable.push((ei, inc));
    }
    let root = (0..nd)
        .find(|&dd| included[dd])
        .ok_or(HarmonicError::EmptyInterior)?;
    let mut values = vec![f64::NAN; nd];
    let mut seen = vec![false; nd];
    values[root] = 0.0;
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(dd) = queue.pop_front() {
        for &(w, inc) in &adj[dd] {
            if !seen[w] {
                seen[w] = true;
                values[w] = values[dd] + inc;
                queue.push_back(w);
            }
        }
    }
    // Covered dual vertices unreachable from the root stay NaN (separate
    // components of the slice's dual); drop them from `included`.
    for dd in 0..nd {
        if included[dd] && !seen[dd] {
            included[dd] = false;
        }
    }
    let scale = max_inc.max(1e-300);
    let mut monodromies = Vec::new();
    let mut closure_defect: f64 = 0.0;
    for &(ei, inc) in &usable {
        let de = d.dual_edges[ei];
        if !included[de.left] || !included[de.right] {
            continue;
        }
        let defect = values[de.left] - values[de.right] - inc;
        if defect.abs() > 1e3 * tol::CLOSURE_RTOL * scale {
            if monodromies
                .iter()
                .all(|&known: &f64| (known - defect).abs() > 1e3 * tol::CLOSURE_RTOL * scale)
            {
                monodromies.push(defect);
            }
        } else {
            closure_defect = closure_defect.max(defect.abs() / scale);
        }
    }
    Ok(ConjugateField { values, included, monodromies, closure_defect })
}

/// Conjugate increment around a counterclockwise dual loop encircling the
/// single vertex v: sum over neighbors of c (h(v') - h(v)). Equals -1 at the
/// pole of a Green's function.
pub fn conjugate_monodromy(e: &HarmonicEmbedding, h: &[f64], v: usize) -> f64 {
    e.map.adjacency[v]
        .iter()
        .map(|&(w, ei)| e.map.edges[ei].c * (h[w] - h[v]))
        .sum()
}

/// Dirichlet energy over a set of edges: sum c (df)^2.
pub fn dirichlet_energy(
    m: &PlanarMap,
    f: &[f64],
    keep_edge: impl Fn(usize) -> bool,
) -> f64 {
    m.edges
        .iter()
        .enumerate()
        .filter(|&(ei, _)| keep_edge(ei))
        .map(|(_, e)| {
            let df = f[e.v] - f[e.u];
            e.c * df * df
        })
        .sum()
}

/// Dual Dirichlet energy of a conjugate field: sum (1/c) (df*)^2 over the
/// dual edges of the kept primal edges. Edge-wise equal to the primal energy
/// of the conjugated function.
pub fn dual_dirichlet_energy(
    m: &PlanarMap,
    d: &DualMap,
    fstar: &[f64],
    keep_edge: impl Fn(usize) -> bool,
) -> f64 {
    d.dual_edges
        .iter()
        .enumerate()
        .filter(|&(ei, _)| keep_edge(ei))
        .map(|(ei, de)| {
            let df = fstar[de.left] - fstar[de.right];
            df * df / m.edges[ei].c
        })
        .sum()
}

/// Edge ids with both endpoints within distance r of p.
pub fn edges_in_ball(e: &HarmonicEmbedding, p: Cx, r: f64) -> Vec<usize> {
    e.map
        .edges
        .iter()
        .enumerate()
        .filter(|&(_, ed)| (e.pos[ed.u] - p).norm() <= r && (e.pos[ed.v] - p).norm() <= r)
        .map(|(ei, _)| ei)
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CaccioppoliReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Energy estimate on concentric balls for a function h harmonic on B(p, 2r):
/// lhs = energy over edges inside B(p, r); rhs = (C/r^2) sum of
/// c |dv|^2 (h(v1) + h(v2))^2 over edges touching B(p, 2r), with C = 4 fixed
/// by the smoothstep cutoff profile. Guarantees lhs <= rhs.
pub fn caccioppoli_check(
    e: &HarmonicEmbedding,
    h: &[f64],
    p: Cx,
    r: f64,
) -> Result<CaccioppoliReport, HarmonicError> {
    let m = &*e.map;
    // Coverage: the graph must own the full 2r-ball, so no outer-face vertex
    // may fall inside it and the inner ball must contain at least one edge.
    for v in 0..m.n_vertices {
        if m.boundary[v] && (e.pos[v] - p).norm() < 2.0 * r {
            return Err(HarmonicError::BallNotCovered { x: p.re, y: p.im, r: 2.0 * r });
        }
    }
    let inner = edges_in_ball(e, p, r);
    if inner.is_empty() {
        return Err(HarmonicError::BallNotCovered { x: p.re, y: p.im, r });
    }
    let lhs: f64 = inner
        .iter()
        .map(|&ei| {
            let ed = &m.edges[ei];
            let df = h[ed.v] - h[ed.u];
            ed.c * df * df
        })
        .sum();
    let mut rhs = 0.0;
    for ed in &m.edges {
        let du = (e.pos[ed.u] - p).norm();
        let dv = (e.pos[ed.v] - p).norm();
        if du.min(dv) <= 2.0 * r {
            let len2 = (e.pos[ed.v] - e.pos[ed.u]).norm_sqr();
            let s = h[ed.u] + h[ed.v];
            rhs += ed.c * len2 * s * s;
        }
    }
    rhs *= tol::CACCIOPPOLI_C / (r * r);
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(CaccioppoliReport { lhs, rhs, ratio })
}

/// A t-white-holomorphic field: real multiples of eta on black faces,
/// complex extension on corners, and the diagonal choice per white face.
#[derive(Debug, Clone)]
pub struct THoloField {
    /// Per black-face index of the corner graph.
    pub f_black: Vec<Cx>,
    /// Extension to corners: F(v) + F(v*).
    pub f_corner: Vec<Cx>,
    /// Per white face: 0 = corners[0]-corners[2], 1 = corners[1]-corners[3].
    pub diagonal: Vec<u8>,
    /// Worst white-loop integral of the associated 1-form, relative.
    pub closed_defect: f64,
}

impl THoloField {
    /// Value carried by a corner edge: the field of its black side.
    pub fn edge_value(&self, h: &[f64], hstar: &[f64], black: BlackKind) -> Cx {
        match black {
            BlackKind::Primal(v) => Cx::new(h[v], 0.0),
            BlackKind::Dual(dd) => Cx::new(0.0, hstar[dd]),
        }
    }
}

/// Build the t-white-holomorphic field of a conjugate pair (h, h*): h on
/// primal-type black faces, i h* on dual-type ones. Validates that the
/// 1-form F dT + conj(F) d(conj O) (= 2 F(b) dT edge-wise) is closed around
/// every white face.
pub fn t_white_holo(
    cg: &CornerGraph,
    ts: &crate::embedding::TSurface,
    h: &[f64],
    hstar: &[f64],
) -> Result<THoloField, HarmonicError> {
    let f_black: Vec<Cx> = cg
        .black_faces
        .iter()
        .map(|bf| match bf.kind {
            BlackKind::Primal(v) => Cx::new(h[v], 0.0),
            BlackKind::Dual(dd) => Cx::new(0.0, hstar[dd]),
        })
        .collect();
    let f_corner: Vec<Cx> = cg
        .corners
        .iter()
        .map(|c| Cx::new(h[c.v], hstar[c.d]))
        .collect();
    let fmax = f_corner.iter().map(|f| f.norm()).fold(0.0, f64::max).max(1e-300);
    let mut diagonal = Vec::with_capacity(cg.white_faces.len());
    let mut worst: f64 = 0.0;
    for (wi, wf) in cg.white_faces.iter().enumerate() {
        // Diagonal: shorter in T-coordinates, ties by smaller corner id.
        let d02 = (ts.t[wf.corners[2]] - ts.t[wf.corners[0]]).norm();
        let d13 = (ts.t[wf.corners[3]] - ts.t[wf.corners[1]]).norm();
        let diag = if (d02 - d13).abs() <= 1e-12 * (d02 + d13) {
            let m02 = wf.corners[0].min(wf.corners[2]);
            let m13 = wf.corners[1].min(wf.corners[3]);
            u8::from(m13 < m02)
        } else {
            u8::from(d13 < d02)
        };
        diagonal.push(diag);
        // Closedness around the white face.
        let mut integral = Cx::new(0.0, 0.0);
        let mut length = 0.0;
        for ce in &cg.edges[4 * wi..4 * wi + 4] {
            let f = match ce.black {
                BlackKind::Primal(v) => Cx::new(h[v], 0.0),
                BlackKind::Dual(dd) => Cx::new(0.0, hstar[dd]),
            };
            let dt = ts.t[ce.b] - ts.t[ce.a];
            integral += 2.0 * f * dt;
            length += dt.norm();
        }
        worst = worst.max(integral.norm() / (length.max(1e-300) * fmax));
    }
    if worst > tol::THOLO_LOOP_RTOL {
        return Err(HarmonicError::NotConjugatePair(worst));
    }
    Ok(THoloField { f_black, f_corner, diagonal, closed_defect: worst })
}

/// Integrate the closed 1-form of a t-white-holomorphic field over a
/// spanning tree of the corner graph, anchored at corner 0. Returns the
/// primitive and its relative co-tree defect.
pub fn integrate_closed_form(
    cg: &CornerGraph,
    ts: &crate::embedding::TSurface,
    fh: &THoloField,
) -> Result<(Vec<Cx>, f64), HarmonicError> {
    let n = cg.corners.len();
    let mut adj: Vec<Vec<(usize, Cx)>> = vec![Vec::new(); n];
    let mut max_inc: f64 = 0.0;
    let mut omegas = Vec::with_capacity(cg.edges.len());
    for ce in &cg.edges {
        let fv = reblack(fh, cg, ce.black);
        let omega = 2.0 * fv * (ts.t[ce.b] - ts.t[ce.a]);
        max_inc = max_inc.max(omega.norm());
        adj[ce.a].push((ce.b, omega));
        adj[ce.b].push((ce.a, -omega));
        omegas.push(omega);
    }
    let mut values = vec![Cx::new(0.0, 0.0); n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for &(w, omega) in &adj[c] {
            if !seen[w] {
                seen[w] = true;
                values[w] = values[c] + omega;
                queue.push_back(w);
            }
        }
    }
    let scale = max_inc.max(1e-300);
    let mut defect: f64 = 0.0;
    for (ce, &omega) in cg.edges.iter().zip(&omegas) {
        defect = defect.max((values[ce.b] - values[ce.a] - omega).norm() / scale);
    }
    if defect > tol::THOLO_LOOP_RTOL {
        return Err(HarmonicError::NotConjugatePair(defect));
    }
    Ok((values, defect))
}

fn reblack(fh: &THoloField, cg: &CornerGraph, kind: BlackKind) -> Cx {
    match kind {
        BlackKind::Primal(v) => fh.f_black[cg.black_of_vertex[v]],
        BlackKind::Dual(dd) => {
            if dd < cg.black_of_dual.len() {
                fh.f_black[cg.black_of_dual[dd]]
            } else {
                // Leaves carry no black face; their field value comes from
                // the corner extension: pure imaginary part at the leaf.
                let c = cg
                    .corners
                    .iter()
                    .position(|c| c.d == dd)
                    .expect("leaf corner exists");
                Cx::new(0.0, fh.f_corner[c].im)
            }
        }
    }
}

/// Piecewise linear gradient of a real function over fan triangulations of
/// the inner faces, with the maximum-principle comparison between interior
/// and boundary-touching triangles.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// (inner face id, triangle vertices).
    pub triangles: Vec<(usize, [usize; 3])>,
    /// d/dw of the linear interpolant, per triangle.
    pub grad: Vec<Cx>,
    pub boundary_touching: Vec<bool>,
}

impl GradientField {
    pub fn interior_max(&self) -> f64 {
        self.grad
            .iter()
            .zip(&self.boundary_touching)
            .filter(|&(_, &b)| !b)
            .map(|(g, _)| g.norm())
            .fold(0.0, f64::max)
    }

    pub fn boundary_max(&self) -> f64 {
        self.grad
            .iter()
            .zip(&self.boundary_touching)
            .filter(|&(_, &b)| b)
            .map(|(g, _)| g.norm())
            .fold(0.0, f64::max)
    }

    /// Maximum principle: interior max <= boundary max (with slack for
    /// rounding). On failure returns the offending triangle.
    pub fn max_principle_witness(&self) -> Option<(usize, f64, f64)> {
        let bmax = self.boundary_max();
        let slack = 1e-12 * (bmax + 1.0);
        self.grad
            .iter()
            .zip(&self.boundary_touching)
            .enumerate()
            .filter(|&(_, (_, &b))| !b)
            .find(|&(_, (g, _))| g.norm() > bmax + slack)
            .map(|(i, (g, _))| (i, g.norm(), bmax))
    }
}

pub fn gradient_field(
    e: &HarmonicEmbedding,
    h: &[f64],
    is_boundary: Option<&[bool]>,
) -> Result<GradientField, HarmonicError> {
    let m = &*e.map;
    let bflag = is_boundary.unwrap_or(&m.boundary);
    let mut triangles = Vec::new();
    let mut grad = Vec::new();
    let mut boundary_touching = Vec::new();
    let scale = e
        .pos
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    for f in 0..m.n_faces() {
        if !m.is_inner_face(f) {
            continue;
        }
        let cyc = &m.faces[f];
        for i in 1..cyc.len() - 1 {
            let tri = [cyc[0], cyc[i], cyc[i + 1]];
            let e1 = e.pos[tri[1]] - e.pos[tri[0]];
            let e2 = e.pos[tri[2]] - e.pos[tri[0]];
            let det = geom::cross(e1, e2);
            if det.abs() <= 1e-14 * scale * scale {
                return Err(HarmonicError::DegenerateTriangle(f));
            }
            let d1 = h[tri[1]] - h[tri[0]];
            let d2 = h[tri[2]] - h[tri[0]];
            let gx = (d1 * e2.im - d2 * e1.im) / det;
            let gy = (d2 * e1.re - d1 * e2.re) / det;
            triangles.push((f, tri));
            grad.push(0.5 * Cx::new(gx, -gy));
            boundary_touching.push(tri.iter().any(|&v| bflag[v]));
        }
    }
    Ok(GradientField { triangles, grad, boundary_touching })
}

/// Oscillation (max - min) of values at points within distance r of p.
pub fn oscillation_in_ball(
    pts: &[Cx],
    vals: &[f64],
    include: impl Fn(usize) -> bool,
    p: Cx,
    r: f64,
) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..pts.len() {
        if include(i) && (pts[i] - p).norm() <= r && vals[i].is_finite() {
            lo = lo.min(vals[i]);
            hi = hi.max(vals[i]);
        }
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}
