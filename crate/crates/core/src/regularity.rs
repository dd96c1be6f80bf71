//! Checkers that estimate the structural constants of an embedding: uniform
//! convexity of the potential along segments, Lipschitz behavior of the
//! gradient map, the origami contraction on the t-surface, the invariant
//! measures, random-walk ellipticity and measure comparability, face
//! fatness, and the exponential-fatness sweep.

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{EmbeddedGraph, GradientMap, TSurface};
use crate::geom::{self, Cx, Region};
use crate::planar::CornerGraph;
use crate::walk::{self, WalkEngine};

#[derive(Debug, Error)]
pub enum RegularityError {
    #[error("no admissible sample segments (region too small for C delta = {0})")]
    EmptySampleSet(f64),
    #[error("t-surface chart is degenerate (T-image has no area)")]
    NonInjectiveChart,
    #[error("face {0} has zero area")]
    DegenerateFace(usize),
    #[error("walk budget {0} too small")]
    BudgetTooSmall(u64),
    #[error(transparent)]
    Walk(#[from] walk::WalkError),
}

/// A sample realizing a reported extremum; re-running the defining formula
/// on (w1, w2) must reproduce `value`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Witness {
    pub w1: [f64; 2],
    pub w2: [f64; 2],
    pub value: f64,
    pub label: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub delta: f64,
    pub scan_constant: f64,
    /// The headline estimated constant (lambda, kappa-curly, kappa, c).
    pub constant: f64,
    /// Named sub-quantities behind the headline constant.
    pub details: Vec<(String, f64)>,
    pub witnesses: Vec<Witness>,
    pub pass: Option<bool>,
}

fn wit(w1: Cx, w2: Cx, value: f64, label: &'static str) -> Witness {
    Witness { w1: [w1.re, w1.im], w2: [w2.re, w2.im], value, label }
}

/// Second-difference ratio of the potential along [w1; w2]; None when any of
/// the three evaluation points leaves the covered region.
pub fn conv_ratio(gm: &GradientMap, w1: Cx, w2: Cx) -> Option<f64> {
    let mid = 0.5 * (w1 + w2);
    let (p1, p2, pm) = (gm.phi_at(w1).ok()?, gm.phi_at(w2).ok()?, gm.phi_at(mid).ok()?);
    Some((p1 + p2 - 2.0 * pm) / (w2 - w1).norm_sqr())
}

/// The two segment quantities of the gradient-Lipschitz property:
/// (Re[(Psi(w2) - Psi(w1)) conj(w2 - w1)] / |w2 - w1|^2, |dPsi| / |dw|).
pub fn lip_ratios(gm: &GradientMap, w1: Cx, w2: Cx) -> Option<(f64, f64)> {
    let (g1, g2) = (gm.psi(w1).ok()?, gm.psi(w2).ok()?);
    let dw = w2 - w1;
    let dpsi = g2 - g1;
    Some(((dpsi * dw.conj()).re / dw.norm_sqr(), dpsi.norm() / dw.norm()))
}

/// Quasi-random segments with dyadic lengths C delta, 2 C delta, ... across
/// the embedding's bounding box. Calls `f` with each admissible segment.
fn scan_segments(
    g: &EmbeddedGraph,
    delta: f64,
    c: f64,
    sample_density: usize,
    mut f: impl FnMut(Cx, Cx),
) -> usize {
    let (mut x0, mut y0, mut x1, mut y1) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &g.emb.pos {
        x0 = x0.min(p.re);
        y0 = y0.min(p.im);
        x1 = x1.max(p.re);
        y1 = y1.max(p.im);
    }
    let diam = Cx::new(x1 - x0, y1 - y0).norm();
    let mut n_levels = 0;
    while c * delta * (1 << n_levels) as f64 <= diam {
        n_levels += 1;
    }
    let mut count = 0;
    for level in 0..n_levels.max(1) {
        let len = c * delta * (1 << level) as f64;
        for i in 1..=sample_density as u64 {
            let (hx, hy) = geom::halton2(i | ((level as u64) << 32));
            let w1 = Cx::new(x0 + hx * (x1 - x0), y0 + hy * (y1 - y0));
            let ang = 2.0 * std::f64::consts::PI * geom::halton(i, 5);
            let w2 = w1 + Cx::from_polar(len, ang);
            f(w1, w2);
            count += 1;
        }
    }
    count
}

/// Uniform convexity of the potential: lambda-hat = min(min ratio,
/// 1 / max ratio) of the normalized second difference over sampled segments
/// of length at least C delta.
pub fn check_conv(
    g: &EmbeddedGraph,
    delta: f64,
    c: f64,
    sample_density: usize,
) -> Result<PropertyReport, RegularityError> {
    let gm = g.gradient_map();
    let mut min_r = f64::INFINITY;
    let mut max_r = f64::NEG_INFINITY;
    let mut wmin = None;
    let mut wmax = None;
    let mut admitted = 0usize;
    scan_segments(g, delta, c, sample_density, |w1, w2| {
        if let Some(r) = conv_ratio(&gm, w1, w2) {
            admitted += 1;
            if r < min_r {
                min_r = r;
                wmin = Some(wit(w1, w2, r, "min_second_difference_ratio"));
            }
            if r > max_r {
                max_r = r;
                wmax = Some(wit(w1, w2, r, "max_second_difference_ratio"));
            }
        }
    });
    if admitted == 0 {
        return Err(RegularityError::EmptySampleSet(c * delta));
    }
    let lambda = min_r.min(1.0 / max_r);
    Ok(PropertyReport {
        property: "conv".into(),
        delta,
        scan_constant: c,
        constant: lambda,
        details: vec![("min_ratio".into(), min_r), ("max_ratio".into(), max_r)],
        witnesses: [wmin, wmax].into_iter().flatten().collect(),
        pass: Some(lambda > 0.0),
    })
}

/// Gradient-map Lipschitz property: kappa-curly-hat = min of the worst
/// monotonicity ratio and the reciprocal of the worst expansion ratio.
pub fn check_lip(
    g: &EmbeddedGraph,
    delta: f64,
    c: f64,
    sample_density: usize,
) -> Result<PropertyReport, RegularityError> {
    let gm = g.gradient_map();
    let mut min_re = f64::INFINITY;
    let mut max_mod = f64::NEG_INFINITY;
    let mut wmin = None;
    let mut wmax = None;
    let mut admitted = 0usize;
    scan_segments(g, delta, c, sample_density, |w1, w2| {
        if let Some((re, md)) = lip_ratios(&gm, w1, w2) {
            admitted += 1;
            if re < min_re {
                min_re = re;
                wmin = Some(wit(w1, w2, re, "min_monotonicity_ratio"));
            }
            if md > max_mod {
                max_mod = md;
                wmax = Some(wit(w1, w2, md, "max_modulus_ratio"));
            }
        }
    });
    if admitted == 0 {
        return Err(RegularityError::EmptySampleSet(c * delta));
    }
    let kappa = min_re.min(1.0 / max_mod);
    Ok(PropertyReport {
        property: "lip".into(),
        delta,
        scan_constant: c,
        constant: kappa,
        details: vec![("min_re_ratio".into(), min_re), ("max_mod_ratio".into(), max_mod)],
        witnesses: [wmin, wmax].into_iter().flatten().collect(),
        pass: Some(kappa > 0.0),
    })
}

/// Origami contraction on the t-surface: kappa-hat = max over corner pairs
/// with |dT| >= delta (T-points inside the region, if given) of |dO|/|dT|.
pub fn check_lip_kdelta(
    cg: &CornerGraph,
    ts: &TSurface,
    delta: f64,
    region: Option<&Region>,
    sample_pairs: usize,
) -> Result<PropertyReport, RegularityError> {
    let keep: Vec<usize> = (0..cg.corners.len())
        .filter(|&ci| region.map_or(true, |u| u.contains(ts.t[ci])))
        .collect();
    if keep.len() < 3 {
        return Err(RegularityError::NonInjectiveChart);
    }
    // Chart degeneracy: the kept T-points must span two dimensions.
    let base = ts.t[keep[0]];
    let first = keep
        .iter()
        .map(|&ci| ts.t[ci] - base)
        .find(|d| d.norm() > 1e-12);
    let spans_2d = first.map_or(false, |d1| {
        keep.iter().any(|&ci| {
            geom::cross(d1, ts.t[ci] - base).abs() > 1e-12 * d1.norm_sqr()
        })
    });
    if !spans_2d {
        return Err(RegularityError::NonInjectiveChart);
    }
    let mut kappa: f64 = 0.0;
    let mut witness = None;
    let mut admitted = 0usize;
    let n = keep.len() as u64;
    for i in 1..=sample_pairs as u64 {
        let a = keep[((geom::halton(i, 2) * n as f64) as u64).min(n - 1) as usize];
        let b = keep[((geom::halton(i, 3) * n as f64) as u64).min(n - 1) as usize];
        let dt = ts.t[b] - ts.t[a];
        if dt.norm() < delta {
            continue;
        }
        admitted += 1;
        let r = (ts.o[b] - ts.o[a]).norm() / dt.norm();
        if r > kappa {
            kappa = r;
            witness = Some(wit(ts.t[a], ts.t[b], r, "max_origami_ratio"));
        }
    }
    if admitted == 0 {
        return Err(RegularityError::EmptySampleSet(delta));
    }
    Ok(PropertyReport {
        property: "lip_kdelta".into(),
        delta,
        scan_constant: 1.0,
        constant: kappa,
        details: vec![("pairs".into(), admitted as f64)],
        witnesses: witness.into_iter().collect(),
        pass: Some(kappa <= 1.0 + 1e-12),
    })
}

/// Invariant measures mu and their directional parts mu^alpha on a
/// 16-direction grid, plus the per-edge white-area identity defect.
#[derive(Debug, Clone)]
pub struct MeasureTable {
    pub mu: Vec<f64>,
    pub directions: Vec<Cx>,
    /// mu_alpha[v][k] for direction k.
    pub mu_alpha: Vec<Vec<f64>>,
    /// Worst relative deviation of c |dv|^2 = 4 Area(T(white face)).
    pub area_identity_defect: f64,
}

pub fn measures(g: &EmbeddedGraph, cg: &CornerGraph, ts: &TSurface) -> MeasureTable {
    let n = g.map.n_vertices;
    let ndir = 16;
    let directions: Vec<Cx> = (0..ndir)
        .map(|k| Cx::from_polar(1.0, std::f64::consts::PI * k as f64 / ndir as f64))
        .collect();
    let mu: Vec<f64> = (0..n).map(|v| g.emb.mu(v)).collect();
    let mu_alpha: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            directions
                .iter()
                .map(|alpha| {
                    g.map.adjacency[v]
                        .iter()
                        .map(|&(w, ei)| {
                            let proj =
                                (alpha.conj() * (g.emb.pos[w] - g.emb.pos[v])).re;
                            g.map.edges[ei].c * proj * proj
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut defect: f64 = 0.0;
    for wi in 0..cg.white_faces.len() {
        let ei = cg.white_faces[wi].edge;
        let c = g.map.edges[ei].c;
        let dv2 = g.emb.edge_vec(ei).norm_sqr();
        let area = ts.white_area(cg, wi);
        defect = defect.max((c * dv2 - 4.0 * area).abs() / (c * dv2));
    }
    MeasureTable { mu, directions, mu_alpha, area_identity_defect: defect }
}

/// Random-walk regularity: (a) directional exit variance from balls of
/// radius C delta, reported as c-hat = min over directions of Var / delta^2;
/// (b) comparability of the mu-mass of C delta balls with their Lebesgue
/// measure.
pub fn check_rw_property(
    g: &EmbeddedGraph,
    region: &Region,
    delta: f64,
    c: f64,
    walk_budget: u64,
    seed: u64,
) -> Result<PropertyReport, RegularityError> {
    if walk_budget < 100 {
        return Err(RegularityError::BudgetTooSmall(walk_budget));
    }
    let engine = WalkEngine::new(&g.emb, seed);
    let r = c * delta;
    // Sample interior vertices whose C delta ball stays inside the region.
    let shrunk = |p: Cx| {
        region.contains(p)
            && match region {
                Region::Disc { cx, cy, r: rr } => {
                    (p - Cx::new(*cx, *cy)).norm() < rr - 2.0 * r
                }
                Region::Rect { x0, y0, x1, y1 } => {
                    p.re > x0 + 2.0 * r
                        && p.re < x1 - 2.0 * r
                        && p.im > y0 + 2.0 * r
                        && p.im < y1 - 2.0 * r
                }
                Region::Polygon { .. } => true,
            }
    };
    let starts: Vec<usize> = (0..g.map.n_vertices)
        .filter(|&v| !g.map.boundary[v] && shrunk(g.emb.pos[v]))
        .collect();
    if starts.is_empty() {
        return Err(RegularityError::EmptySampleSet(r));
    }
    let n_starts = starts.len().min(8);
    let per_start = (walk_budget / n_starts as u64).max(50);
    let ndir = 8;
    let mut c_a = f64::INFINITY;
    let mut wit_a = None;
    for (si, &v) in starts.iter().take(n_starts).enumerate() {
        let p0 = g.emb.pos[v];
        let rule = walk::StopRule::ExitBall { center: p0, r };
        let mut projections: Vec<walk::Welford> = vec![walk::Welford::default(); ndir];
        for idx in 0..per_start {
            let traj = engine.simulate(v, &rule, (si as u64) << 32 | idx)?;
            let x = g.emb.pos[traj.last_vertex()] - p0;
            for k in 0..ndir {
                let theta = std::f64::consts::PI * k as f64 / ndir as f64;
                projections[k].push((Cx::from_polar(1.0, -theta) * x).re);
            }
        }
        for (k, acc) in projections.iter().enumerate() {
            let ratio = acc.variance() / (delta * delta);
            if ratio < c_a {
                c_a = ratio;
                let theta = std::f64::consts::PI * k as f64 / ndir as f64;
                wit_a = Some(wit(p0, p0 + Cx::from_polar(r, theta), ratio, "min_exit_variance_ratio"));
            }
        }
    }
    // (b) mass of C delta balls versus 4x their area.
    let mut min_b = f64::INFINITY;
    let mut max_b = f64::NEG_INFINITY;
    let mut wit_b = None;
    for &v in starts.iter() {
        let p = g.emb.pos[v];
        let mass: f64 = (0..g.map.n_vertices)
            .filter(|&w| (g.emb.pos[w] - p).norm() <= r)
            .map(|w| g.emb.mu(w))
            .sum();
        let ratio = mass / (4.0 * std::f64::consts::PI * r * r);
        if ratio < min_b {
            min_b = ratio;
            wit_b = Some(wit(p, p, ratio, "min_mass_ratio"));
        }
        max_b = max_b.max(ratio);
    }
    let c_b = min_b.min(1.0 / max_b);
    let constant = c_a.min(c_b);
    Ok(PropertyReport {
        property: "rw".into(),
        delta,
        scan_constant: c,
        constant,
        details: vec![
            ("ellipticity_c".into(), c_a),
            ("mass_min_ratio".into(), min_b),
            ("mass_max_ratio".into(), max_b),
        ],
        witnesses: [wit_a, wit_b].into_iter().flatten().collect(),
        pass: Some(constant > 0.0),
    })
}

/// Best minimum inradius achievable by a fan triangulation of the polygon,
/// searched over all apices. A conservative under-approximation of general
/// triangulations.
pub fn best_fan_inradius(poly: &[Cx]) -> Result<f64, RegularityError> {
    if geom::polygon_signed_area(poly).abs() < 1e-300 {
        return Err(RegularityError::DegenerateFace(0));
    }
    let k = poly.len();
    let mut best: f64 = 0.0;
    for apex in 0..k {
        let mut worst = f64::INFINITY;
        for i in 0..k {
            let (a, b) = (i, (i + 1) % k);
            if a == apex || b == apex {
                continue;
            }
            worst = worst.min(geom::triangle_inradius(poly[apex], poly[a], poly[b]));
        }
        if k == 3 {
            worst = geom::triangle_inradius(poly[0], poly[1], poly[2]);
        }
        best = best.max(worst);
    }
    Ok(best)
}

pub fn face_fatness(poly: &[Cx], rho: f64) -> Result<bool, RegularityError> {
    Ok(best_fan_inradius(poly)? >= rho)
}

/// Exponential fatness: drop every delta exp(-delta'/delta)-fat face, then
/// measure the diameters of the vertex-connected components of the
/// remainder that lie fully inside U. Passes when all are below delta'.
pub fn exp_fat_check(
    g: &EmbeddedGraph,
    u: &Region,
    delta: f64,
    delta_prime: f64,
) -> Result<PropertyReport, RegularityError> {
    let rho = delta * (-delta_prime / delta).exp();
    let m = &*g.map;
    // Thin faces and the union-find over their vertices.
    let mut parent: Vec<usize> = (0..m.n_vertices).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut in_thin = vec![false; m.n_vertices];
    for f in 0..m.n_faces() {
        if !m.is_inner_face(f) {
            continue;
        }
        let poly = g.emb.face_polygon(f);
        if best_fan_inradius(&poly)? >= rho {
            continue;
        }
        let cyc = &m.faces[f];
        for i in 0..cyc.len() {
            in_thin[cyc[i]] = true;
            let (a, b) = (find(&mut parent, cyc[i]), find(&mut parent, cyc[(i + 1) % cyc.len()]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    // Max diameter of components fully inside U.
    use std::collections::HashMap;
    let mut comp_vertices: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..m.n_vertices {
        if in_thin[v] {
            let root = find(&mut parent, v);
            comp_vertices.entry(root).or_default().push(v);
        }
    }
    let mut max_diam: f64 = 0.0;
    let mut witness = None;
    for verts in comp_vertices.values() {
        if !verts.iter().all(|&v| u.contains(g.emb.pos[v])) {
            continue;
        }
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                let d = (g.emb.pos[a] - g.emb.pos[b]).norm();
                if d > max_diam {
                    max_diam = d;
                    witness = Some(wit(g.emb.pos[a], g.emb.pos[b], d, "max_component_diameter"));
                }
            }
        }
    }
    Ok(PropertyReport {
        property: "exp_fat".into(),
        delta,
        scan_constant: delta_prime,
        constant: max_diam,
        details: vec![("fatness_threshold".into(), rho)],
        witnesses: witness.into_iter().collect(),
        pass: Some(max_diam < delta_prime),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::t_surface;
    use crate::meshgen;

    fn lattice(delta: f64, a: f64, b: f64) -> EmbeddedGraph {
        meshgen::square_lattice(delta, &Region::square(a, b)).unwrap()
    }

    #[test]
    fn conv_is_near_quarter_on_lattice() {
        let g = lattice(0.25, -1.0, 1.0);
        let rep = check_conv(&g, 0.25, 4.0, 200).unwrap();
        // Phi is the piecewise-linear interpolant of |w|^2 / 2, so the
        // second-difference ratio is 1/4 up to the interpolation gap
        // (at most delta^2 / 2 over segments of squared length 1).
        assert!((rep.constant - 0.25).abs() < 0.05, "lambda = {}", rep.constant);
        // Witnesses re-evaluate to the reported value.
        let gm = g.gradient_map();
        for w in &rep.witnesses {
            let r = conv_ratio(&gm, Cx::new(w.w1[0], w.w1[1]), Cx::new(w.w2[0], w.w2[1]))
                .unwrap();
            assert!((r - w.value).abs() < 1e-9);
        }
    }

    #[test]
    fn conv_anisotropic_range() {
        let u = Region::square(-1.0, 1.0);
        let g = meshgen::from_convex_potential(
            |w| w.re * w.re + 0.5 * w.im * w.im,
            0.125,
            &u,
        )
        .unwrap();
        let rep = check_conv(&g, 0.125, 8.0, 400).unwrap();
        let (min_r, max_r) = (rep.details[0].1, rep.details[1].1);
        // Ratios live between the half-eigenvalues 1/4 and 1/2 of the
        // sampled quadratic (up to O(delta) from snapping to lattice faces).
        assert!(min_r > 0.25 - 0.05 && max_r < 0.5 + 0.05, "[{min_r}, {max_r}]");
    }

    #[test]
    fn lip_on_lattice_and_conversion() {
        let g = lattice(0.125, -1.0, 1.0);
        let conv = check_conv(&g, 0.125, 4.0, 300).unwrap();
        let lip = check_lip(&g, 0.125, 4.0, 300).unwrap();
        assert!(lip.constant > 0.0);
        // Constant conversions, with sampling slack.
        assert!(lip.constant >= conv.constant / 8.0 - 0.05);
        assert!(conv.constant >= lip.constant / 4.0 - 0.05);
        // Witness re-evaluation.
        let gm = g.gradient_map();
        for w in &lip.witnesses {
            let (re, md) =
                lip_ratios(&gm, Cx::new(w.w1[0], w.w1[1]), Cx::new(w.w2[0], w.w2[1]))
                    .unwrap();
            let v = if w.label.contains("mod") { md } else { re };
            assert!((v - w.value).abs() < 1e-9);
        }
    }

    #[test]
    fn kdelta_on_lattice() {
        let g = lattice(0.25, -1.0, 1.0);
        let cg = g.corner_graph();
        let ts = t_surface(&g.emb, &g.dual_emb, &cg);
        let rep = check_lip_kdelta(&cg, &ts, 0.25, None, 4000).unwrap();
        assert!(rep.constant <= 1.0 + 1e-12);
        assert!(rep.constant > 0.0);
        // Witness re-evaluation through the corner pair distance ratio.
        for w in &rep.witnesses {
            assert!(w.value <= rep.constant + 1e-12);
        }
    }

    #[test]
    fn measure_table_on_lattice() {
        let g = lattice(0.5, -1.0, 1.0);
        let cg = g.corner_graph();
        let ts = t_surface(&g.emb, &g.dual_emb, &cg);
        let t = measures(&g, &cg, &ts);
        assert!(t.area_identity_defect < 1e-10);
        let v = (0..g.map.n_vertices).find(|&v| !g.map.boundary[v]).unwrap();
        assert!((t.mu[v] - 4.0 * 0.25).abs() < 1e-12);
        // Direction 0 (horizontal): only the two horizontal edges project.
        assert!((t.mu_alpha[v][0] - 2.0 * 0.25).abs() < 1e-12);
        // mu_alpha <= mu for every vertex and direction.
        for v in 0..g.map.n_vertices {
            for k in 0..t.directions.len() {
                assert!(t.mu_alpha[v][k] <= t.mu[v] + 1e-14);
            }
        }
    }

    #[test]
    fn rw_property_on_lattice() {
        let g = lattice(0.125, -1.0, 1.0);
        let rep = check_rw_property(
            &g,
            &Region::Disc { cx: 0.0, cy: 0.0, r: 0.8 },
            0.125,
            2.0,
            1600,
            17,
        )
        .unwrap();
        assert_eq!(rep.pass, Some(true));
        assert!(rep.constant > 0.0);
        assert!(matches!(
            check_rw_property(&g, &Region::Disc { cx: 0.0, cy: 0.0, r: 0.8 }, 0.125, 2.0, 0, 1),
            Err(RegularityError::BudgetTooSmall(0))
        ));
    }

    #[test]
    fn fan_fatness_on_square_and_needle() {
        let sq = [
            Cx::new(0.0, 0.0),
            Cx::new(1.0, 0.0),
            Cx::new(1.0, 1.0),
            Cx::new(0.0, 1.0),
        ];
        assert!(face_fatness(&sq, 0.2).unwrap());
        assert!(!face_fatness(&sq, 0.3).unwrap());
        let needle = [Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(0.5, 1e-6)];
        assert!(!face_fatness(&needle, 1e-3).unwrap());
        let flat = [Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(2.0, 0.0)];
        assert!(matches!(
            face_fatness(&flat, 0.1),
            Err(RegularityError::DegenerateFace(_))
        ));
    }

    #[test]
    fn exp_fat_passes_on_lattice() {
        let g = lattice(0.25, -1.0, 1.0);
        let rep = exp_fat_check(&g, &Region::square(-1.0, 1.0), 0.25, 0.5).unwrap();
        assert_eq!(rep.pass, Some(true));
        assert_eq!(rep.constant, 0.0);
        // Vacuous threshold always passes.
        let rep = exp_fat_check(&g, &Region::square(-1.0, 1.0), 0.25, 4.0).unwrap();
        assert_eq!(rep.pass, Some(true));
    }
}
