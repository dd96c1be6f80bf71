//! Generators of harmonic-embedding families: square and rhombic isoradial
//! lattices, conductance-perturbed lattices re-embedded by the Tutte solve,
//! and graphs induced by the lower convex hull of a lifted convex potential.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embedding::{EmbedError, EmbeddedGraph, HarmonicEmbedding};
use crate::geom::{self, Cx, Region};
use crate::planar::{PlanarError, PlanarMap};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("rhombus half-angle {0} outside the allowed range")]
    AngleOutOfRange(f64),
    #[error("degenerate hull: {0}")]
    DegenerateHull(String),
    #[error("potential is not convex over the sample grid: {0}")]
    NonConvexInput(String),
    #[error("region too small: no cells generated")]
    EmptyRegion,
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

// ---------------------------------------------------------------------------
// Generic cell-complex -> planar map assembly.
// ---------------------------------------------------------------------------

/// Build a planar map from counterclockwise cell cycles over abstract node
/// keys. Keeps the largest edge-connected component of cells, derives the
/// outer face by walking unmatched cell edges, and assigns dense vertex ids
/// in sorted key order.
pub fn assemble_cells<K: Copy + Ord + std::hash::Hash>(
    cells: &[Vec<K>],
    pos: impl Fn(K) -> Cx,
    cond: impl Fn(K, K) -> f64,
) -> Result<(PlanarMap, Vec<Cx>), MeshError> {
    if cells.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    // Edge-connected components of cells.
    let mut edge_cells: HashMap<(K, K), Vec<usize>> = HashMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        let k = cell.len();
        for i in 0..k {
            let (a, b) = (cell[i], cell[(i + 1) % k]);
            let key = (a.min(b), a.max(b));
            edge_cells.entry(key).or_default().push(ci);
        }
    }
    let mut comp = vec![usize::MAX; cells.len()];
    let mut n_comp = 0;
    for start in 0..cells.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let me = n_comp;
        n_comp += 1;
        let mut stack = vec![start];
        comp[start] = me;
        while let Some(ci) = stack.pop() {
            let cell = &cells[ci];
            let k = cell.len();
            for i in 0..k {
                let (a, b) = (cell[i], cell[(i + 1) % k]);
                for &cj in &edge_cells[&(a.min(b), a.max(b))] {
                    if comp[cj] == usize::MAX {
                        comp[cj] = me;
                        stack.push(cj);
                    }
                }
            }
        }
    }
    let mut sizes = vec![0usize; n_comp];
    for &c in &comp {
        sizes[c] += 1;
    }
    let keep = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(_, s)| *s)
        .map(|(i, _)| i)
        .unwrap();
    let kept: Vec<&Vec<K>> = cells
        .iter()
        .zip(&comp)
        .filter(|&(_, &c)| c == keep)
        .map(|(cell, _)| cell)
        .collect();

    // Directed edges of kept cells; outer boundary = reversed unmatched ones.
    let mut directed: HashSet<(K, K)> = HashSet::new();
    for cell in &kept {
        let k = cell.len();
        for i in 0..k {
            let e = (cell[i], cell[(i + 1) % k]);
            if !directed.insert(e) {
                return Err(MeshError::DegenerateHull(
                    "directed edge shared by two cells with the same orientation".into(),
                ));
            }
        }
    }
    let mut next_out: HashMap<K, K> = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) {
            // Outer face keeps the unbounded side on its left: traverse b->a.
            if next_out.insert(b, a).is_some() {
                return Err(MeshError::DegenerateHull(
                    "pinched boundary while walking the outer face".into(),
                ));
            }
        }
    }
    let start = *next_out
        .keys()
        .min()
        .ok_or_else(|| MeshError::DegenerateHull("no boundary edges".into()))?;
    let mut outer = vec![start];
    let mut cur = next_out[&start];
    while cur != start {
        outer.push(cur);
        cur = next_out[&cur];
    }
    if outer.len() != next_out.len() {
        return Err(MeshError::DegenerateHull(
            "cell complex has holes (multiple boundary cycles)".into(),
        ));
    }

    // Dense ids in sorted key order for determinism.
    let mut keys: Vec<K> = Vec::new();
    for cell in &kept {
        keys.extend_from_slice(cell);
    }
    keys.sort_unstable();
    keys.dedup();
    let id: HashMap<K, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();

    let mut faces: Vec<Vec<usize>> = kept
        .iter()
        .map(|cell| cell.iter().map(|k| id[k]).collect())
        .collect();
    faces.push(outer.iter().map(|k| id[k]).collect());
    let outer_face = faces.len() - 1;
    let mut seen: HashSet<(K, K)> = HashSet::new();
    let mut conds = Vec::new();
    for &(a, b) in &directed {
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            conds.push((id[&key.0], id[&key.1], cond(key.0, key.1)));
        }
    }
    let map = PlanarMap::build(keys.len(), faces, outer_face, &conds)?;
    let positions: Vec<Cx> = keys.iter().map(|&k| pos(k)).collect();
    Ok((map, positions))
}

fn contains_with_margin(u: &Region, p: Cx, margin: f64) -> bool {
    match u {
        Region::Disc { cx, cy, r } => (p - geom::cx(*cx, *cy)).norm() < r + margin,
        Region::Rect { x0, y0, x1, y1 } => {
            p.re > x0 - margin && p.re < x1 + margin && p.im > y0 - margin && p.im < y1 + margin
        }
        Region::Polygon { .. } => u.contains(p),
    }
}

/// Grid cells (i, j) whose four corners (under `pos`) lie in U, with a tiny
/// margin so region edges that coincide with lattice lines stay included.
fn grid_cells(
    u: &Region,
    delta: f64,
    pos: impl Fn(i64, i64) -> Cx,
) -> Vec<Vec<(i64, i64)>> {
    let (x0, y0, x1, y1) = u.bbox();
    let margin = 1e-9 * delta;
    // Conservative index bounds: positions are within O(delta) of the
    // nominal lattice, so scan a padded index box.
    let pad = 3;
    let i0 = (x0 / delta).floor() as i64 - pad;
    let i1 = (x1 / delta).ceil() as i64 + pad;
    let j0 = (y0 / delta).floor() as i64 - pad;
    let j1 = (y1 / delta).ceil() as i64 + pad;
    let mut cells = Vec::new();
    for j in j0..j1 {
        for i in i0..i1 {
            let corners = [pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)];
            if corners.iter().all(|&p| contains_with_margin(u, p, margin)) {
                cells.push(vec![(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]);
            }
        }
    }
    cells
}

// ---------------------------------------------------------------------------
// Lattice families.
// ---------------------------------------------------------------------------

/// Unit-conductance square lattice clipped to U; harmonic by symmetry.
pub fn square_lattice(delta: f64, u: &Region) -> Result<EmbeddedGraph, MeshError> {
    let pos = |i: i64, j: i64| Cx::new(i as f64 * delta, j as f64 * delta);
    let cells = grid_cells(u, delta, pos);
    if cells.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    let (map, positions) = assemble_cells(&cells, |(i, j)| pos(i, j), |_, _| 1.0)?;
    let emb = HarmonicEmbedding::from_positions(Arc::new(map), positions)?;
    Ok(EmbeddedGraph::from_embedding(emb)?)
}

/// Square-lattice combinatorics with i.i.d. random conductances and interior
/// positions re-solved by the Tutte system.
#[derive(Debug, Clone, Copy)]
pub enum PerturbationLaw {
    /// log-uniform on [lo, hi].
    LogUniform { lo: f64, hi: f64 },
    /// Constant law: reproduces the square lattice.
    Constant(f64),
}

impl Default for PerturbationLaw {
    fn default() -> Self {
        PerturbationLaw::LogUniform { lo: 0.5, hi: 2.0 }
    }
}

pub fn perturbed_lattice(
    delta: f64,
    u: &Region,
    law: PerturbationLaw,
    seed: u64,
) -> Result<EmbeddedGraph, MeshError> {
    let pos = |i: i64, j: i64| Cx::new(i as f64 * delta, j as f64 * delta);
    let cells = grid_cells(u, delta, pos);
    if cells.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    let (map, positions) = assemble_cells(&cells, |(i, j)| pos(i, j), |_, _| 1.0)?;
    // Resample conductances deterministically: edges are in a deterministic
    // order after assembly, so one sequential stream is reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conds: Vec<(usize, usize, f64)> = map
        .edges
        .iter()
        .map(|e| {
            let c = match law {
                PerturbationLaw::LogUniform { lo, hi } => {
                    let t: f64 = rng.gen();
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                }
                PerturbationLaw::Constant(c) => c,
            };
            (e.u, e.v, c)
        })
        .collect();
    let map = PlanarMap::build(map.n_vertices, map.faces.clone(), map.outer_face, &conds)?;
    let boundary_pos: Vec<Option<Cx>> = positions
        .iter()
        .zip(&map.boundary)
        .map(|(&p, &b)| if b { Some(p) } else { None })
        .collect();
    EmbeddedGraph::solve(Arc::new(map), &boundary_pos).map_err(MeshError::from)
}

/// Rhombic (isoradial) lattice. The quad-graph has unit rhombi with one
/// vertical side and one side at angle pi/2 - gamma, where gamma cycles
/// through `angle_profile` by column; the primal graph is the even sublattice
/// with conductances tan(gamma/2). All angles pi/2 gives a (tilted) square
/// lattice.
pub fn isoradial_rhombic(
    delta: f64,
    angle_profile: &[f64],
    theta_min: f64,
    u: &Region,
) -> Result<EmbeddedGraph, MeshError> {
    if !(theta_min > 0.0) || theta_min > std::f64::consts::FRAC_PI_4 {
        return Err(MeshError::AngleOutOfRange(theta_min));
    }
    for &g in angle_profile {
        let half = 0.5 * g;
        if half < theta_min || half > std::f64::consts::FRAC_PI_2 - theta_min {
            return Err(MeshError::AngleOutOfRange(half));
        }
    }
    if angle_profile.is_empty() {
        return Err(MeshError::AngleOutOfRange(0.0));
    }
    let l = angle_profile.len() as i64;
    let alpha = |m: i64| {
        let g = angle_profile[(m.rem_euclid(l)) as usize];
        std::f64::consts::FRAC_PI_2 - g
    };
    // Quad-graph vertex positions x_{m,n} = delta (sum of column steps + i n).
    let step_sum = |m: i64| -> Cx {
        let mut s = Cx::new(0.0, 0.0);
        if m > 0 {
            for j in 1..=m {
                s += Cx::from_polar(1.0, alpha(j));
            }
        } else {
            for j in (m + 1)..=0 {
                s -= Cx::from_polar(1.0, alpha(j));
            }
        }
        s
    };
    // Primal vertices are quad-graph vertices with even m+n; grid
    // coordinates (p, q) with m = p - q, n = p + q.
    let xq = |m: i64, n: i64| delta * (step_sum(m) + Cx::new(0.0, n as f64));
    let pos = |p: i64, q: i64| xq(p - q, p + q);
    let cells = grid_cells(u, delta, pos);
    if cells.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    let cond = |a: (i64, i64), b: (i64, i64)| -> f64 {
        let (ma, na) = (a.0 - a.1, a.0 + a.1);
        let (mb, nb) = (b.0 - b.1, b.0 + b.1);
        // The edge is a rhombus diagonal; the other diagonal joins the two
        // odd quad-graph vertices adjacent to both endpoints.
        let dm = mb - ma;
        let dn = nb - na;
        debug_assert!(dm.abs() == 1 && dn.abs() == 1);
        let odd1 = (ma + dm, na); // step in m first
        let odd2 = (ma, na + dn); // step in n first
        let primal = xq(mb, nb) - xq(ma, na);
        let dual = xq(odd2.0, odd2.1) - xq(odd1.0, odd1.1);
        dual.norm() / primal.norm()
    };
    let (map, positions) = assemble_cells(&cells, |(p, q)| pos(p, q), cond)?;
    let emb = HarmonicEmbedding::from_positions(Arc::new(map), positions)?;
    Ok(EmbeddedGraph::from_embedding(emb)?)
}

// ---------------------------------------------------------------------------
// Convex-hull graphs from a potential.
// ---------------------------------------------------------------------------

/// Graph induced by the lower convex hull of the lifted samples
/// (x, y, phi(x, y)) over delta Z^2 on an enlargement of U: faces are the
/// linearity cells of the convexification, edge conductances are the
/// gradient jump divided by the edge length, and the vertex positions
/// themselves form a harmonic embedding.
pub fn from_convex_potential(
    phi: impl Fn(Cx) -> f64,
    delta: f64,
    u: &Region,
) -> Result<EmbeddedGraph, MeshError> {
    let enlarged = u.enlarged(4.0 * delta);
    let (x0, y0, x1, y1) = enlarged.bbox();
    let i0 = (x0 / delta).floor() as i64;
    let i1 = (x1 / delta).ceil() as i64;
    let j0 = (y0 / delta).floor() as i64;
    let j1 = (y1 / delta).ceil() as i64;
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    if nx < 3 || ny < 3 {
        return Err(MeshError::EmptyRegion);
    }
    let vid = |i: i64, j: i64| ((j - j0) as usize) * nx + ((i - i0) as usize);
    let mut pts = vec![Cx::new(0.0, 0.0); nx * ny];
    let mut lift = vec![0.0; nx * ny];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = Cx::new(i as f64 * delta, j as f64 * delta);
            pts[vid(i, j)] = p;
            lift[vid(i, j)] = phi(p);
        }
    }

    // Initial triangulation: lexicographic diagonal (i,j)-(i+1,j+1).
    let mut tri = Triangulation::grid(nx, ny);
    tri.lawson_convexify(&pts, &lift);

    // Per-triangle gradients of the piecewise-linear convexification.
    let grads: Vec<Cx> = tri
        .tris
        .iter()
        .map(|t| {
            if !t.alive {
                return Cx::new(0.0, 0.0);
            }
            let [a, b, c] = t.v;
            let e1 = pts[b] - pts[a];
            let e2 = pts[c] - pts[a];
            let d1 = lift[b] - lift[a];
            let d2 = lift[c] - lift[a];
            let det = geom::cross(e1, e2);
            Cx::new(
                (d1 * e2.im - d2 * e1.im) / det,
                (d2 * e1.re - d1 * e2.re) / det,
            )
        })
        .collect();
    let gscale = grads.iter().map(|g| g.norm()).fold(0.0, f64::max) + 1.0;
    let merge_tol = 1e-7 * gscale;

    // Union triangles across edges with (numerically) equal gradients.
    let mut uf = UnionFind::new(tri.tris.len());
    for (&(a, b), &[t1, t2]) in &tri.edge_tris {
        let _ = (a, b);
        if let (Some(t1), Some(t2)) = (t1, t2) {
            if (grads[t1] - grads[t2]).norm() <= merge_tol {
                uf.union(t1, t2);
            }
        }
    }
    // Cell boundary cycles.
    let mut cell_edges: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (ti, t) in tri.tris.iter().enumerate() {
        if !t.alive {
            continue;
        }
        let root = uf.find(ti);
        for k in 0..3 {
            let (a, b) = (t.v[k], t.v[(k + 1) % 3]);
            let [t1, t2] = tri.edge_tris[&Triangulation::ekey(a, b)];
            let other = if t1 == Some(ti) { t2 } else { t1 };
            let boundary = match other {
                None => true,
                Some(o) => uf.find(o) != root,
            };
            if boundary {
                cell_edges.entry(root).or_default().push((a, b));
            }
        }
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut cell_grad: HashMap<usize, Cx> = HashMap::new();
    let mut roots: Vec<usize> = cell_edges.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let edges = &cell_edges[&root];
        let mut nxt: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in edges {
            if nxt.insert(a, b).is_some() {
                return Err(MeshError::DegenerateHull(
                    "linearity cell with a pinched boundary".into(),
                ));
            }
        }
        let start = *nxt.keys().min().unwrap();
        let mut cyc = vec![start];
        let mut cur = nxt[&start];
        while cur != start {
            cyc.push(cur);
            cur = nxt[&cur];
        }
        if cyc.len() != nxt.len() {
            return Err(MeshError::DegenerateHull(
                "linearity cell boundary is not a single cycle".into(),
            ));
        }
        cell_grad.insert(cells.len(), grads[root]);
        cells.push(cyc);
    }

    // Every sample point must be a vertex of some cell (uniform convexity).
    let mut used = vec![false; nx * ny];
    for cell in &cells {
        for &v in cell {
            used[v] = true;
        }
    }
    if used.iter().any(|&b| !b) {
        return Err(MeshError::NonConvexInput(
            "a sample point is not a vertex of the convexification".into(),
        ));
    }

    // Keep cells whose corners all lie in U (clipping the enlargement).
    let margin = 1e-9 * delta;
    let kept_ids: Vec<usize> = (0..cells.len())
        .filter(|&ci| cells[ci].iter().all(|&v| contains_with_margin(u, pts[v], margin)))
        .collect();
    if kept_ids.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    let kept: Vec<Vec<usize>> = kept_ids.iter().map(|&ci| cells[ci].clone()).collect();

    // Conductance across a kept edge: gradient jump / length, with the two
    // incident cell gradients found from the full (unclipped) complex.
    let mut edge_gap: HashMap<(usize, usize), Vec<Cx>> = HashMap::new();
    for ci in 0..cells.len() {
        let cell = &cells[ci];
        let k = cell.len();
        for i in 0..k {
            let (a, b) = (cell[i], cell[(i + 1) % k]);
            edge_gap
                .entry((a.min(b), a.max(b)))
                .or_default()
                .push(cell_grad[&ci]);
        }
    }
    let cond = |a: usize, b: usize| -> f64 {
        let gs = &edge_gap[&(a.min(b), a.max(b))];
        if gs.len() != 2 {
            return f64::NAN; // boundary of the enlargement; never kept
        }
        (gs[0] - gs[1]).norm() / (pts[a] - pts[b]).norm()
    };
    let (map, positions) = assemble_cells(&kept, |v| pts[v], cond)?;
    let emb = HarmonicEmbedding::from_positions(Arc::new(map), positions)?;
    Ok(EmbeddedGraph::from_embedding(emb)?)
}

struct Tri {
    v: [usize; 3],
    alive: bool,
}

struct Triangulation {
    tris: Vec<Tri>,
    /// Undirected edge -> up to two incident triangles.
    edge_tris: HashMap<(usize, usize), [Option<usize>; 2]>,
}

impl Triangulation {
    fn ekey(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    fn grid(nx: usize, ny: usize) -> Triangulation {
        let mut t = Triangulation { tris: Vec::new(), edge_tris: HashMap::new() };
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let a = j * nx + i;
                let b = j * nx + i + 1;
                let c = (j + 1) * nx + i + 1;
                let d = (j + 1) * nx + i;
                t.add_tri([a, b, c]);
                t.add_tri([a, c, d]);
            }
        }
        t
    }

    fn add_tri(&mut self, v: [usize; 3]) -> usize {
        let ti = self.tris.len();
        self.tris.push(Tri { v, alive: true });
        for k in 0..3 {
            let e = Self::ekey(v[k], v[(k + 1) % 3]);
            let slot = self.edge_tris.entry(e).or_insert([None, None]);
            if slot[0].is_none() {
                slot[0] = Some(ti);
            } else {
                debug_assert!(slot[1].is_none());
                slot[1] = Some(ti);
            }
        }
        ti
    }

    fn remove_tri(&mut self, ti: usize) {
        let v = self.tris[ti].v;
        self.tris[ti].alive = false;
        for k in 0..3 {
            let e = Self::ekey(v[k], v[(k + 1) % 3]);
            let slot = self.edge_tris.get_mut(&e).unwrap();
            if slot[0] == Some(ti) {
                slot[0] = slot[1];
            }
            slot[1] = None;
            if slot[0].is_none() {
                self.edge_tris.remove(&e);
            }
        }
    }

    /// Lawson flips toward the lower convex hull of the lift: across each
    /// interior edge, if the opposite vertex of one side lies strictly below
    /// the plane of the other side, flip the diagonal. The lifted surface
    /// decreases pointwise at each flip, so this terminates. Near-coplanar
    /// configurations are left alone, preserving the deterministic initial
    /// (lexicographic) diagonals of flat cells.
    fn lawson_convexify(&mut self, pts: &[Cx], lift: &[f64]) {
        let mut queue: Vec<(usize, usize)> = self.edge_tris.keys().copied().collect();
        queue.sort_unstable();
        let mut in_queue: HashSet<(usize, usize)> = queue.iter().copied().collect();
        while let Some(e) = queue.pop() {
            in_queue.remove(&e);
            let Some(&[Some(t1), Some(t2)]) = self.edge_tris.get(&e) else {
                continue;
            };
            let (a, b) = e;
            let c = self.tris[t1].v.iter().copied().find(|&x| x != a && x != b).unwrap();
            let d = self.tris[t2].v.iter().copied().find(|&x| x != a && x != b).unwrap();
            // Orient so (a2, b2, c) is the CCW triangle t1.
            let (a2, b2) = orient_edge(&self.tris[t1].v, a, b);
            // Flip only when d is strictly below the plane of t1 AND the quad
            // a2-d-b2-c is strictly convex (both new triangles positive).
            if !below_plane(pts, lift, a2, b2, c, d) {
                continue;
            }
            if geom::cross(pts[d] - pts[a2], pts[c] - pts[a2]) <= 0.0
                || geom::cross(pts[c] - pts[b2], pts[d] - pts[b2]) <= 0.0
            {
                continue;
            }
            self.remove_tri(t1);
            self.remove_tri(t2);
            self.add_tri([a2, d, c]);
            self.add_tri([d, b2, c]);
            for ne in [
                Self::ekey(a2, d),
                Self::ekey(d, b2),
                Self::ekey(b2, c),
                Self::ekey(c, a2),
            ] {
                if in_queue.insert(ne) {
                    queue.push(ne);
                }
            }
        }
    }
}

fn orient_edge(v: &[usize; 3], a: usize, b: usize) -> (usize, usize) {
    for k in 0..3 {
        let (x, y) = (v[k], v[(k + 1) % 3]);
        if (x == a && y == b) || (x == b && y == a) {
            return (x, y);
        }
    }
    unreachable!()
}

/// True when lift(d) lies strictly below the plane through the lifted
/// (a, b, c), with a relative margin so exactly coplanar samples never flip.
fn below_plane(pts: &[Cx], lift: &[f64], a: usize, b: usize, c: usize, d: usize) -> bool {
    let e1 = pts[b] - pts[a];
    let e2 = pts[c] - pts[a];
    let e3 = pts[d] - pts[a];
    let l1 = lift[b] - lift[a];
    let l2 = lift[c] - lift[a];
    let l3 = lift[d] - lift[a];
    let terms = [
        e1.re * (e2.im * l3),
        -e1.re * (l2 * e3.im),
        -e1.im * (e2.re * l3),
        e1.im * (l2 * e3.re),
        l1 * (e2.re * e3.im),
        -l1 * (e2.im * e3.re),
    ];
    let det: f64 = terms.iter().sum();
    let mag: f64 = terms.iter().map(|t| t.abs()).sum();
    // CCW (a,b,c) with positive z up: d below the plane <=> det < 0.
    det < -1e-10 * mag
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

// ---------------------------------------------------------------------------
// Tests.
// ---------------------------------------------------------------------------
