//! Small planar-geometry helpers shared across modules.

use serde::{Deserialize, Serialize};

pub type Cx = num_complex::Complex64;

pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

/// Cross product of the vectors a and b (z-component).
pub fn cross(a: Cx, b: Cx) -> f64 {
    a.re * b.im - a.im * b.re
}

pub fn dot(a: Cx, b: Cx) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Signed area of a polygon (positive when counterclockwise).
pub fn polygon_signed_area(pts: &[Cx]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(pts[i], pts[(i + 1) % n]);
    }
    0.5 * s
}

pub fn polygon_centroid(pts: &[Cx]) -> Cx {
    let n = pts.len() as f64;
    pts.iter().sum::<Cx>() / n
}

pub fn polygon_diameter(pts: &[Cx]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &p) in pts.iter().enumerate() {
        for &q in &pts[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Where a point lies relative to a polygon, with an absolute tolerance for
/// the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyLocation {
    Inside,
    OnBoundary,
    Outside,
}

/// Point-in-polygon by winding, with `tol` as the distance below which a
/// point counts as lying on the boundary. Works for simple polygons of
/// either orientation.
pub fn locate_in_polygon(pts: &[Cx], p: Cx, tol: f64) -> PolyLocation {
    let n = pts.len();
    for i in 0..n {
        if dist_to_segment(p, pts[i], pts[(i + 1) % n]) <= tol {
            return PolyLocation::OnBoundary;
        }
    }
    // Crossing number against the ray going in +x direction.
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if x > p.re {
                inside = !inside;
            }
        }
    }
    if inside {
        PolyLocation::Inside
    } else {
        PolyLocation::Outside
    }
}

pub fn dist_to_segment(p: Cx, a: Cx, b: Cx) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Inradius of a triangle: area / semiperimeter.
pub fn triangle_inradius(a: Cx, b: Cx, c: Cx) -> f64 {
    let area = 0.5 * cross(b - a, c - a).abs();
    let per = (b - a).norm() + (c - b).norm() + (a - c).norm();
    if per == 0.0 {
        0.0
    } else {
        2.0 * area / per
    }
}

/// A planar region used for domain slicing and experiment windows.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Disc { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Polygon { points: Vec<(f64, f64)> },
}

impl Region {
    pub fn disc(center: Cx, r: f64) -> Self {
        Region::Disc { cx: center.re, cy: center.im, r }
    }

    pub fn square(a: f64, b: f64) -> Self {
        Region::Rect { x0: a, y0: a, x1: b, y1: b }
    }

    pub fn contains(&self, p: Cx) -> bool {
        match self {
            Region::Disc { cx, cy, r } => (p - crate::geom::cx(*cx, *cy)).norm() < *r,
            Region::Rect { x0, y0, x1, y1 } => {
                p.re > *x0 && p.re < *x1 && p.im > *y0 && p.im < *y1
            }
            Region::Polygon { points } => {
                let pts: Vec<Cx> = points.iter().map(|&(x, y)| cx(x, y)).collect();
                locate_in_polygon(&pts, p, 0.0) == PolyLocation::Inside
            }
        }
    }

    /// Axis-aligned bounding box (x0, y0, x1, y1).
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match self {
            Region::Disc { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
            Region::Rect { x0, y0, x1, y1 } => (*x0, *y0, *x1, *y1),
            Region::Polygon { points } => {
                let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &(x, y) in points {
                    b.0 = b.0.min(x);
                    b.1 = b.1.min(y);
                    b.2 = b.2.max(x);
                    b.3 = b.3.max(y);
                }
                b
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let (x0, y0, x1, y1) = self.bbox();
        cx(x1 - x0, y1 - y0).norm()
    }

    /// Grow the region by `margin` in every direction.
    pub fn enlarged(&self, margin: f64) -> Region {
        match self {
            Region::Disc { cx, cy, r } => Region::Disc { cx: *cx, cy: *cy, r: r + margin },
            Region::Rect { x0, y0, x1, y1 } => Region::Rect {
                x0: x0 - margin,
                y0: y0 - margin,
                x1: x1 + margin,
                y1: y1 + margin,
            },
            Region::Polygon { .. } => {
                let (x0, y0, x1, y1) = self.bbox();
                Region::Rect {
                    x0: x0 - margin,
                    y0: y0 - margin,
                    x1: x1 + margin,
                    y1: y1 + margin,
                }
            }
        }
    }

    /// Parse `disc:cx,cy,r`, `square:a,b` or `rect:x0,y0,x1,y1`.
    pub fn parse(s: &str) -> Result<Region, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("region `{s}`: expected kind:params"))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("region `{s}`: {e}")))
            .collect::<Result<_, _>>()?;
        match (kind, nums.as_slice()) {
            ("disc", [cx, cy, r]) => Ok(Region::Disc { cx: *cx, cy: *cy, r: *r }),
            ("square", [a, b]) => Ok(Region::square(*a, *b)),
            ("rect", [x0, y0, x1, y1]) => {
                Ok(Region::Rect { x0: *x0, y0: *y0, x1: *x1, y1: *y1 })
            }
            _ => Err(format!("region `{s}`: unknown kind or wrong arity")),
        }
    }
}

/// Halton low-discrepancy sequence in one dimension.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// 2-D low-discrepancy point (bases 2 and 3), index starts at 1.
pub fn halton2(i: u64) -> (f64, f64) {
    (halton(i, 2), halton(i, 3))
}

/// C^2 radial cutoff: 1 on [0, r], smoothstep down to 0 on [r, r_out].
/// The quintic smoothstep has maximal slope 15/8 / (r_out - r).
pub fn smooth_cutoff(d: f64, r: f64, r_out: f64) -> f64 {
    if d <= r {
        1.0
    } else if d >= r_out {
        0.0
    } else {
        let t = (d - r) / (r_out - r);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_location() {
        let sq = vec![cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 1.0), cx(0.0, 1.0)];
        assert!((polygon_signed_area(&sq) - 1.0).abs() < 1e-15);
        assert_eq!(locate_in_polygon(&sq, cx(0.5, 0.5), 1e-12), PolyLocation::Inside);
        assert_eq!(locate_in_polygon(&sq, cx(1.5, 0.5), 1e-12), PolyLocation::Outside);
        assert_eq!(locate_in_polygon(&sq, cx(1.0, 0.5), 1e-12), PolyLocation::OnBoundary);
    }

    #[test]
    fn inradius_of_right_isoceles() {
        // Legs 1: r = (2 - sqrt(2)) / 2.
        let r = triangle_inradius(cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 1.0));
        assert!((r - (2.0 - 2.0_f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn region_parse_roundtrip() {
        assert_eq!(
            Region::parse("disc:0,0,1").unwrap(),
            Region::Disc { cx: 0.0, cy: 0.0, r: 1.0 }
        );
        assert_eq!(Region::parse("square:-1,1").unwrap(), Region::square(-1.0, 1.0));
        assert!(Region::parse("blob:1").is_err());
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(smooth_cutoff(0.3, 1.0, 2.0), 1.0);
        assert_eq!(smooth_cutoff(2.5, 1.0, 2.0), 0.0);
        // Numerical slope stays below 2/r for the [r, 2r] profile.
        let mut max_slope: f64 = 0.0;
        for i in 0..1000 {
            let d = 1.0 + 2.0 * i as f64 / 1000.0;
            let h = 1e-6;
            let s = (smooth_cutoff(d + h, 1.0, 2.0) - smooth_cutoff(d - h, 1.0, 2.0)) / (2.0 * h);
            max_slope = max_slope.max(s.abs());
        }
        assert!(max_slope <= 2.0);
    }
}
