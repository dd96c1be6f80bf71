//! Harmonic (Tutte) embeddings and the objects built on top of them: the
//! dual embedding, the piecewise-linear convex potential, the gradient map
//! with point location, and the t-surface over the corner graph.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::geom::{self, Cx};
use crate::planar::{BlackKind, CornerGraph, DualMap, PlanarMap};
use crate::sparse::{self, CsrMatrix};
use crate::tol;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("interior vertices are not connected")]
    DisconnectedInterior,
    #[error(transparent)]
    Solver(#[from] sparse::SolveError),
    #[error("boundary vertex {0} has no position")]
    MissingBoundaryPosition(usize),
    #[error("closure defect {defect:.3e} exceeds tolerance (embedding insufficiently harmonic)")]
    ClosureDefect { defect: f64 },
    #[error("potential increments via the two dual endpoints disagree by {mismatch:.3e} on edge {edge}")]
    InconsistentIncrements { edge: usize, mismatch: f64 },
    #[error("point ({x}, {y}) lies outside the region covered by faces")]
    PointOutsideCoveredRegion { x: f64, y: f64 },
    #[error("embedding is not harmonic: relative residual {0:.3e}")]
    NotHarmonic(f64),
}

/// Straight-line embedding with conductance-weighted barycentric interior.
#[derive(Debug, Clone)]
pub struct HarmonicEmbedding {
    pub map: Arc<PlanarMap>,
    pub pos: Vec<Cx>,
    /// Maximal relative harmonicity residual over interior vertices.
    pub residual: f64,
}

impl HarmonicEmbedding {
    /// Solve the Tutte system for interior positions given boundary ones.
    pub fn solve_tutte(
        map: Arc<PlanarMap>,
        boundary_pos: &[Option<Cx>],
    ) -> Result<HarmonicEmbedding, EmbedError> {
        let n = map.n_vertices;
        for v in 0..n {
            if map.boundary[v] && boundary_pos.get(v).copied().flatten().is_none() {
                return Err(EmbedError::MissingBoundaryPosition(v));
            }
        }
        let interior: Vec<usize> = (0..n).filter(|&v| !map.boundary[v]).collect();
        let mut index = vec![usize::MAX; n];
        for (k, &v) in interior.iter().enumerate() {
            index[v] = k;
        }
        if !interior.is_empty() {
            check_interior_connected(&map, &interior, &index)?;
        }
        let m = interior.len();
        let mut triplets = Vec::new();
        let mut bx = vec![0.0; m];
        let mut by = vec![0.0; m];
        for (k, &v) in interior.iter().enumerate() {
            let mut diag = 0.0;
            for &(w, e) in &map.adjacency[v] {
                let c = map.edges[e].c;
                diag += c;
                if index[w] != usize::MAX {
                    triplets.push((k, index[w], -c));
                } else {
                    let p = boundary_pos[w].unwrap();
                    bx[k] += c * p.re;
                    by[k] += c * p.im;
                }
            }
            triplets.push((k, k, diag));
        }
        let mut pos: Vec<Cx> = (0..n)
            .map(|v| boundary_pos.get(v).copied().flatten().unwrap_or(Cx::new(0.0, 0.0)))
            .collect();
        if m > 0 {
            let a = CsrMatrix::from_triplets(m, &triplets);
            let cap = sparse::default_iter_cap(m);
            let (x, _, _) = sparse::pcg(&a, &bx, tol::CG_RTOL, cap)?;
            let (y, _, _) = sparse::pcg(&a, &by, tol::CG_RTOL, cap)?;
            for (k, &v) in interior.iter().enumerate() {
                pos[v] = Cx::new(x[k], y[k]);
            }
        }
        let emb = HarmonicEmbedding { map, pos, residual: 0.0 };
        let residual = emb.max_relative_residual();
        Ok(HarmonicEmbedding { residual, ..emb })
    }

    /// Wrap explicitly computed positions (generators with closed-form
    /// harmonic embeddings); validates harmonicity.
    pub fn from_positions(
        map: Arc<PlanarMap>,
        pos: Vec<Cx>,
    ) -> Result<HarmonicEmbedding, EmbedError> {
        let emb = HarmonicEmbedding { map, pos, residual: 0.0 };
        let residual = emb.max_relative_residual();
        if residual > tol::HARMONICITY_RTOL {
            return Err(EmbedError::NotHarmonic(residual));
        }
        Ok(HarmonicEmbedding { residual, ..emb })
    }

    /// Edge vector H(v) - H(u) for the stored orientation of edge `e`.
    pub fn edge_vec(&self, e: usize) -> Cx {
        let ed = &self.map.edges[e];
        self.pos[ed.v] - self.pos[ed.u]
    }

    /// |sum c (H(v')-H(v))| / sum c |H(v')-H(v)| at interior vertex v.
    pub fn relative_residual_at(&self, v: usize) -> f64 {
        let mut num = Cx::new(0.0, 0.0);
        let mut den = 0.0;
        for &(w, e) in &self.map.adjacency[v] {
            let c = self.map.edges[e].c;
            let d = self.pos[w] - self.pos[v];
            num += c * d;
            den += c * d.norm();
        }
        if den == 0.0 {
            num.norm()
        } else {
            num.norm() / den
        }
    }

    pub fn max_relative_residual(&self) -> f64 {
        (0..self.map.n_vertices)
            .filter(|&v| !self.map.boundary[v])
            .map(|v| self.relative_residual_at(v))
            .fold(0.0, f64::max)
    }

    /// Invariant measure mu(v) = sum c |H(v')-H(v)|^2.
    pub fn mu(&self, v: usize) -> f64 {
        self.map.adjacency[v]
            .iter()
            .map(|&(w, e)| self.map.edges[e].c * (self.pos[w] - self.pos[v]).norm_sqr())
            .sum()
    }

    /// Face polygon in embedding coordinates.
    pub fn face_polygon(&self, f: usize) -> Vec<Cx> {
        self.map.faces[f].iter().map(|&v| self.pos[v]).collect()
    }
}

fn check_interior_connected(
    map: &PlanarMap,
    interior: &[usize],
    index: &[usize],
) -> Result<(), EmbedError> {
    let mut seen = vec![false; interior.len()];
    let mut queue = VecDeque::new();
    queue.push_back(interior[0]);
    seen[index[interior[0]]] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &map.adjacency[v] {
            if index[w] != usize::MAX && !seen[index[w]] {
                seen[index[w]] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    if count != interior.len() {
        return Err(EmbedError::DisconnectedInterior);
    }
    Ok(())
}

/// Positions for the dual map (inner faces and boundary leaves), anchored
/// at dual vertex 0. Increments follow H*(left) - H*(right) = i c (H(v) - H(u))
/// for the stored orientation (u -> v); the face to the right of a directed
/// edge is its first dual endpoint.
#[derive(Debug, Clone)]
pub struct DualEmbedding {
    pub pos: Vec<Cx>,
    /// Max co-tree closure defect relative to the largest increment.
    pub closure_defect: f64,
}

pub fn dual_embedding(
    d: &DualMap,
    e: &HarmonicEmbedding,
) -> Result<DualEmbedding, EmbedError> {
    let n = d.n_dual_vertices();
    // Adjacency over dual vertices; increment oriented right -> left.
    let mut adj: Vec<Vec<(usize, Cx)>> = vec![Vec::new(); n];
    let mut max_inc: f64 = 0.0;
    for (ei, de) in d.dual_edges.iter().enumerate() {
        let c = e.map.edges[ei].c;
        let inc = Cx::new(0.0, 1.0) * c * e.edge_vec(ei);
        max_inc = max_inc.max(inc.norm());
        adj[de.right].push((de.left, inc));
        adj[de.left].push((de.right, -inc));
    }
    let mut pos = vec![Cx::new(0.0, 0.0); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(v) = queue.pop_front() {
        for &(w, inc) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                pos[w] = pos[v] + inc;
                queue.push_back(w);
            }
        }
    }
    // Dual graph is connected for a connected planar map.
    debug_assert!(seen.iter().all(|&s| s));
    // Co-tree closure.
    let mut defect: f64 = 0.0;
    for (ei, de) in d.dual_edges.iter().enumerate() {
        let c = e.map.edges[ei].c;
        let inc = Cx::new(0.0, 1.0) * c * e.edge_vec(ei);
        defect = defect.max((pos[de.left] - pos[de.right] - inc).norm());
    }
    let rel = if max_inc > 0.0 { defect / max_inc } else { defect };
    if rel > tol::CLOSURE_RTOL {
        return Err(EmbedError::ClosureDefect { defect: rel });
    }
    Ok(DualEmbedding { pos, closure_defect: rel })
}

/// Piecewise-linear convex potential: per-vertex values plus a per-face
/// affine representation whose gradient is the dual position.
#[derive(Debug, Clone)]
pub struct PiecewisePotential {
    pub phi: Vec<f64>,
    /// Per inner dual id: gradient (= dual position) and affine offset.
    pub face_gradient: Vec<Cx>,
    pub face_offset: Vec<f64>,
    pub closure_defect: f64,
}

pub fn potential(
    d: &DualMap,
    e: &HarmonicEmbedding,
    du: &DualEmbedding,
) -> Result<PiecewisePotential, EmbedError> {
    let m = &*e.map;
    let n = m.n_vertices;
    // Both expressions of the increment across every edge must agree.
    let mut inc = vec![0.0; m.n_edges()];
    let mut max_inc: f64 = 0.0;
    for (ei, de) in d.dual_edges.iter().enumerate() {
        let dv = e.edge_vec(ei);
        let via_right = (du.pos[de.right].conj() * dv).re;
        let via_left = (du.pos[de.left].conj() * dv).re;
        let scale = dv.norm() * (du.pos[de.right].norm() + du.pos[de.left].norm()) + 1e-300;
        if (via_right - via_left).abs() > tol::INCREMENT_AGREEMENT_RTOL * scale {
            return Err(EmbedError::InconsistentIncrements {
                edge: ei,
                mismatch: (via_right - via_left).abs(),
            });
        }
        inc[ei] = 0.5 * (via_right + via_left);
        max_inc = max_inc.max(inc[ei].abs());
    }
    let mut phi = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(v) = queue.pop_front() {
        for &(w, ei) in &m.adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                let s = if m.edges[ei].u == v { 1.0 } else { -1.0 };
                phi[w] = phi[v] + s * inc[ei];
                queue.push_back(w);
            }
        }
    }
    let mut defect: f64 = 0.0;
    for (ei, ed) in m.edges.iter().enumerate() {
        defect = defect.max((phi[ed.v] - phi[ed.u] - inc[ei]).abs());
    }
    let rel = if max_inc > 0.0 { defect / max_inc } else { defect };
    if rel > tol::CLOSURE_RTOL {
        return Err(EmbedError::ClosureDefect { defect: rel });
    }
    // Per-face affine data.
    let mut face_gradient = Vec::with_capacity(d.n_inner);
    let mut face_offset = Vec::with_capacity(d.n_inner);
    for dd in 0..d.n_inner {
        let g = du.pos[dd];
        let f = d.face_of_dual[dd];
        let v0 = m.faces[f][0];
        face_gradient.push(g);
        face_offset.push(phi[v0] - geom::dot(g, e.pos[v0]));
    }
    Ok(PiecewisePotential { phi, face_gradient, face_offset, closure_defect: rel })
}

impl PiecewisePotential {
    /// Max relative deviation of phi from the per-face affine functions.
    pub fn max_affine_deviation(&self, d: &DualMap, e: &HarmonicEmbedding) -> f64 {
        let mut worst: f64 = 0.0;
        for dd in 0..d.n_inner {
            let f = d.face_of_dual[dd];
            for &v in &e.map.faces[f] {
                let affine = geom::dot(self.face_gradient[dd], e.pos[v]) + self.face_offset[dd];
                let scale = self.phi[v].abs() + affine.abs() + 1.0;
                worst = worst.max((self.phi[v] - affine).abs() / scale);
            }
        }
        worst
    }
}

/// Point-location over the inner faces of an embedding, serving the
/// piecewise-constant gradient map Psi(w) = H*(face of w).
#[derive(Debug)]
pub struct GradientMap {
    faces: Vec<LocFace>,
    bx0: f64,
    by0: f64,
    bucket: f64,
    nx: usize,
    ny: usize,
    grid: Vec<Vec<usize>>,
}

#[derive(Debug)]
struct LocFace {
    dual_id: usize,
    poly: Vec<Cx>,
    gradient: Cx,
    offset: f64,
}

impl GradientMap {
    pub fn build(d: &DualMap, e: &HarmonicEmbedding, p: &PiecewisePotential) -> GradientMap {
        let mut faces = Vec::with_capacity(d.n_inner);
        let mut diams = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for dd in 0..d.n_inner {
            let poly = e.face_polygon(d.face_of_dual[dd]);
            for q in &poly {
                x0 = x0.min(q.re);
                y0 = y0.min(q.im);
                x1 = x1.max(q.re);
                y1 = y1.max(q.im);
            }
            diams.push(geom::polygon_diameter(&poly));
            faces.push(LocFace {
                dual_id: dd,
                poly,
                gradient: p.face_gradient[dd],
                offset: p.face_offset[dd],
            });
        }
        diams.sort_by(f64::total_cmp);
        let med = if diams.is_empty() { 1.0 } else { diams[diams.len() / 2] };
        let bucket = med.max(1e-12);
        let nx = (((x1 - x0) / bucket).ceil() as usize).max(1);
        let ny = (((y1 - y0) / bucket).ceil() as usize).max(1);
        let mut grid = vec![Vec::new(); nx * ny];
        for (fi, lf) in faces.iter().enumerate() {
            let (mut fx0, mut fy0, mut fx1, mut fy1) =
                (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for q in &lf.poly {
                fx0 = fx0.min(q.re);
                fy0 = fy0.min(q.im);
                fx1 = fx1.max(q.re);
                fy1 = fy1.max(q.im);
            }
            let i0 = (((fx0 - x0) / bucket).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let i1 = (((fx1 - x0) / bucket).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let j0 = (((fy0 - y0) / bucket).floor() as isize).clamp(0, ny as isize - 1) as usize;
            let j1 = (((fy1 - y0) / bucket).floor() as isize).clamp(0, ny as isize - 1) as usize;
            for j in j0..=j1 {
                for i in i0..=i1 {
                    grid[j * nx + i].push(fi);
                }
            }
        }
        GradientMap { faces, bx0: x0, by0: y0, bucket, nx, ny, grid }
    }

    /// Dual id of the face containing `w`. On-edge and on-vertex queries
    /// resolve to the incident face with the smallest dual id.
    pub fn locate(&self, w: Cx) -> Result<usize, EmbedError> {
        let i = (((w.re - self.bx0) / self.bucket).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j = (((w.im - self.by0) / self.bucket).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        let mut best_on: Option<usize> = None;
        let mut best_in: Option<usize> = None;
        for &fi in &self.grid[j * self.nx + i] {
            let lf = &self.faces[fi];
            match geom::locate_in_polygon(&lf.poly, w, tol::POINT_LOCATION_TOL) {
                geom::PolyLocation::Inside => {
                    best_in = Some(best_in.map_or(lf.dual_id, |b: usize| b.min(lf.dual_id)));
                }
                geom::PolyLocation::OnBoundary => {
                    best_on = Some(best_on.map_or(lf.dual_id, |b: usize| b.min(lf.dual_id)));
                }
                geom::PolyLocation::Outside => {}
            }
        }
        // A point within tolerance of an edge counts as on it even when a
        // neighbor's interior also claims it.
        match (best_on, best_in) {
            (Some(a), Some(b)) => Ok(a.min(b)),
            (Some(a), None) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => {
                Err(EmbedError::PointOutsideCoveredRegion { x: w.re, y: w.im })
            }
        }
    }

    pub fn psi(&self, w: Cx) -> Result<Cx, EmbedError> {
        let dd = self.locate(w)?;
        Ok(self.faces[dd].gradient)
    }

    /// The piecewise-linear potential evaluated at an arbitrary point.
    pub fn phi_at(&self, w: Cx) -> Result<f64, EmbedError> {
        let dd = self.locate(w)?;
        let lf = &self.faces[dd];
        Ok(geom::dot(lf.gradient, w) + lf.offset)
    }
}

/// The t-surface over the corner graph: T and O per corner, origami square
/// root per white face (eta is 1 on primal-type black faces and i on
/// dual-type ones).
#[derive(Debug)]
pub struct TSurface {
    pub t: Vec<Cx>,
    pub o: Vec<Cx>,
    /// Per white face, unit complex with dO = eta^2 dT along its sides.
    pub eta_white: Vec<Cx>,
}

pub fn t_surface(
    e: &HarmonicEmbedding,
    du: &DualEmbedding,
    cg: &CornerGraph,
) -> TSurface {
    let t: Vec<Cx> = cg
        .corners
        .iter()
        .map(|c| 0.5 * (e.pos[c.v] + du.pos[c.d]))
        .collect();
    let o: Vec<Cx> = cg
        .corners
        .iter()
        .map(|c| 0.5 * (du.pos[c.d].conj() - e.pos[c.v].conj()))
        .collect();
    let eta_white: Vec<Cx> = cg
        .white_faces
        .iter()
        .map(|wf| {
            let dv = e.edge_vec(wf.edge);
            // +i conj(dv)/|dv| makes Im(eta (v2-v1)) = |dv| >= 0.
            Cx::new(0.0, 1.0) * dv.conj() / dv.norm()
        })
        .collect();
    TSurface { t, o, eta_white }
}

impl TSurface {
    /// W = T - conj(O); collapses primal-type black faces to H(v).
    pub fn w(&self, corner: usize) -> Cx {
        self.t[corner] - self.o[corner].conj()
    }

    /// Signed area of the T-image of a white face (positive for valid
    /// embeddings).
    pub fn white_area(&self, cg: &CornerGraph, w: usize) -> f64 {
        let pts: Vec<Cx> =
            cg.white_faces[w].corners.iter().map(|&c| self.t[c]).collect();
        geom::polygon_signed_area(&pts)
    }

    /// Check the structural face identities; returns the worst relative
    /// deviation over all face sides for (|dT|=|dO|, folding rule).
    pub fn max_face_defect(&self, cg: &CornerGraph) -> f64 {
        let mut worst: f64 = 0.0;
        let mut check = |da: Cx, db: Cx, expected: Cx| {
            let scale = da.norm().max(1e-300);
            worst = worst.max((db.norm() - da.norm()).abs() / scale);
            worst = worst.max((db - expected).norm() / scale);
        };
        for (wi, wf) in cg.white_faces.iter().enumerate() {
            let eta2 = self.eta_white[wi] * self.eta_white[wi];
            for k in 0..4 {
                let a = wf.corners[k];
                let b = wf.corners[(k + 1) % 4];
                let dt = self.t[b] - self.t[a];
                let dob = self.o[b] - self.o[a];
                check(dt, dob, eta2 * dt);
            }
        }
        for bf in &cg.black_faces {
            if !bf.closed {
                continue;
            }
            let sign = match bf.kind {
                BlackKind::Primal(_) => 1.0,
                BlackKind::Dual(_) => -1.0,
            };
            let k = bf.corners.len();
            for i in 0..k {
                let a = bf.corners[i];
                let b = bf.corners[(i + 1) % k];
                let dt = self.t[b] - self.t[a];
                let dob = self.o[b] - self.o[a];
                // dO = conj(eta_b)^2 conj(dT): +conj for eta=1, -conj for eta=i.
                check(dt, dob, sign * dt.conj());
            }
        }
        worst
    }

    /// Max deviation of W from H(v) over primal-type black faces, relative
    /// to the embedding scale.
    pub fn max_w_collapse_defect(&self, cg: &CornerGraph, e: &HarmonicEmbedding) -> f64 {
        let scale = e
            .pos
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut worst: f64 = 0.0;
        for bf in &cg.black_faces {
            if let BlackKind::Primal(v) = bf.kind {
                for &c in &bf.corners {
                    worst = worst.max((self.w(c) - e.pos[v]).norm() / scale);
                }
            }
        }
        worst
    }
}

/// Bundle of everything derived from one weighted planar map; convenience
/// for generators, checks and the CLI.
#[derive(Debug)]
pub struct EmbeddedGraph {
    pub map: Arc<PlanarMap>,
    pub dual: DualMap,
    pub emb: HarmonicEmbedding,
    pub dual_emb: DualEmbedding,
    pub pot: PiecewisePotential,
}

impl EmbeddedGraph {
    pub fn from_embedding(emb: HarmonicEmbedding) -> Result<EmbeddedGraph, EmbedError> {
        let map = emb.map.clone();
        let dual = DualMap::build(&map);
        let dual_emb = dual_embedding(&dual, &emb)?;
        let pot = potential(&dual, &emb, &dual_emb)?;
        Ok(EmbeddedGraph { map, dual, emb, dual_emb, pot })
    }

    pub fn solve(
        map: Arc<PlanarMap>,
        boundary_pos: &[Option<Cx>],
    ) -> Result<EmbeddedGraph, EmbedError> {
        let emb = HarmonicEmbedding::solve_tutte(map, boundary_pos)?;
        EmbeddedGraph::from_embedding(emb)
    }

    pub fn corner_graph(&self) -> CornerGraph {
        CornerGraph::build(&self.map, &self.dual)
    }

    pub fn gradient_map(&self) -> GradientMap {
        GradientMap::build(&self.dual, &self.emb, &self.pot)
    }
}
