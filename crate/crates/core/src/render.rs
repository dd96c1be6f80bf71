//! Deterministic SVG rendering of embeddings, dual embeddings and
//! t-embeddings. Output depends only on the input graph (fixed precision,
//! no timestamps), so repeated runs are byte-identical.

use std::fmt::Write;

use crate::embedding::{EmbeddedGraph, TSurface};
use crate::geom::Cx;
use crate::planar::{BlackKind, CornerGraph};

struct Canvas {
    out: String,
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Canvas {
    /// Fit the given points into a width-`W` image with a margin.
    fn new(points: impl Iterator<Item = Cx>) -> Canvas {
        let (mut x0, mut y0, mut x1, mut y1) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        if !x0.is_finite() {
            (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
        }
        let w = (x1 - x0).max(1e-12);
        let h = (y1 - y0).max(1e-12);
        let scale = 720.0 / w.max(h);
        let (pix_w, pix_h) = (w * scale + 40.0, h * scale + 40.0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{pix_w:.0}\" height=\"{pix_h:.0}\" viewBox=\"0 0 {pix_w:.0} {pix_h:.0}\">"
        );
        Canvas { out, x0, y1, scale }
    }

    /// Map to pixel coordinates (y axis flipped).
    fn px(&self, p: Cx) -> (f64, f64) {
        (20.0 + (p.re - self.x0) * self.scale, 20.0 + (self.y1 - p.im) * self.scale)
    }

    fn line(&mut self, a: Cx, b: Cx, stroke: &str, width: f64) {
        let (ax, ay) = self.px(a);
        let (bx, by) = self.px(b);
        let _ = writeln!(
            self.out,
            "<line x1=\"{ax:.2}\" y1=\"{ay:.2}\" x2=\"{bx:.2}\" y2=\"{by:.2}\" stroke=\"{stroke}\" stroke-width=\"{width:.2}\"/>"
        );
    }

    fn circle(&mut self, p: Cx, r: f64, fill: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>"
        );
    }

    fn polygon(&mut self, pts: &[Cx], fill: &str, stroke: &str) {
        let mut path = String::new();
        for &p in pts {
            let (x, y) = self.px(p);
            let _ = write!(path, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.out,
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"0.8\"/>",
            path.trim_end()
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Primal embedding: edges plus vertex markers (boundary ones hollow-red).
pub fn render_embedding(g: &EmbeddedGraph) -> String {
    let mut cv = Canvas::new(g.emb.pos.iter().copied());
    for e in g.map.edges.iter() {
        cv.line(g.emb.pos[e.u], g.emb.pos[e.v], "#444444", 1.2);
    }
    for (v, &p) in g.emb.pos.iter().enumerate() {
        cv.circle(p, 2.6, if g.map.boundary[v] { "#cc2200" } else { "#222222" });
    }
    cv.finish()
}

/// Dual embedding: primal edges faint, dual edges and dual vertices on top.
pub fn render_dual(g: &EmbeddedGraph) -> String {
    let pts = g.emb.pos.iter().copied().chain(g.dual_emb.pos.iter().copied());
    let mut cv = Canvas::new(pts);
    for e in g.map.edges.iter() {
        cv.line(g.emb.pos[e.u], g.emb.pos[e.v], "#cccccc", 0.8);
    }
    for de in &g.dual.dual_edges {
        cv.line(g.dual_emb.pos[de.left], g.dual_emb.pos[de.right], "#0055bb", 1.2);
    }
    for (d, &p) in g.dual_emb.pos.iter().enumerate() {
        cv.circle(p, 2.4, if g.dual.is_leaf(d) { "#88aadd" } else { "#0055bb" });
    }
    cv.finish()
}

/// T-embedding of the corner graph with the black/white face two-coloring:
/// white quads white, primal black faces dark, dual black faces gray.
pub fn render_tembedding(cg: &CornerGraph, ts: &TSurface) -> String {
    let mut cv = Canvas::new(ts.t.iter().copied());
    for bf in &cg.black_faces {
        if !bf.closed || bf.corners.len() < 3 {
            continue;
        }
        let poly: Vec<Cx> = bf.corners.iter().map(|&c| ts.t[c]).collect();
        let fill = match bf.kind {
            BlackKind::Primal(_) => "#222222",
            BlackKind::Dual(_) => "#888888",
        };
        cv.polygon(&poly, fill, "#000000");
    }
    for wf in &cg.white_faces {
        let poly: Vec<Cx> = wf.corners.iter().map(|&c| ts.t[c]).collect();
        cv.polygon(&poly, "#ffffff", "#000000");
    }
    for &t in &ts.t {
        cv.circle(t, 1.4, "#cc2200");
    }
    cv.finish()
}

/// Per-vertex scalar field on the embedding, colored blue (min) to red
/// (max), with a simple two-label legend.
pub fn render_vertex_field(g: &EmbeddedGraph, values: &[f64]) -> String {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);
    let mut cv = Canvas::new(g.emb.pos.iter().copied());
    for e in g.map.edges.iter() {
        cv.line(g.emb.pos[e.u], g.emb.pos[e.v], "#dddddd", 0.8);
    }
    for (v, &p) in g.emb.pos.iter().enumerate() {
        let t = ((values[v] - lo) / span).clamp(0.0, 1.0);
        let r = (255.0 * t) as u8;
        let b = (255.0 * (1.0 - t)) as u8;
        cv.circle(p, 3.0, &format!("#{r:02x}30{b:02x}"));
    }
    let _ = writeln!(
        cv.out,
        "<text x=\"8\" y=\"14\" font-size=\"12\" fill=\"#000000\">min {lo:.4e} (blue) .. max {hi:.4e} (red)</text>"
    );
    cv.finish()
}
