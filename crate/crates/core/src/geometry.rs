//! Region representations and overlap computations: axis-aligned boxes,
//! convex polygons, rotated boxes fitted to masks, and the IoU variants the
//! evaluation protocols need.
//!
//! Pixels are treated as unit squares (`pixel (r, c)` covers
//! `[c, c+1] x [r, r+1]`), so a filled `k x k` block fits an exact `k x k`
//! rectangle and axis-aligned cases have no rounding slack.

use crate::error::{Error, Result};
use crate::segment::Mask;
use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

/// Axis-aligned box with corners `(x0, y0)` (top-left) and `(x1, y1)`
/// (bottom-right), in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl AxisBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<AxisBox> {
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::DegenerateBox(format!(
                "({x0},{y0})-({x1},{y1}) is not a valid box"
            )));
        }
        Ok(AxisBox { x0, y0, x1, y1 })
    }

    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<AxisBox> {
        AxisBox::new(x, y, x + w, y + h)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Grow by `margin * extent` on every side.
    pub fn expanded(&self, margin: f64) -> AxisBox {
        let dx = self.width() * margin;
        let dy = self.height() * margin;
        AxisBox {
            x0: self.x0 - dx,
            y0: self.y0 - dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    /// CCW corner polygon of the box.
    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ])
        .expect("valid box corners form a polygon")
    }

    /// `x,y,w,h` region text form.
    pub fn to_region_string(&self) -> String {
        format!("{},{},{},{}", self.x0, self.y0, self.width(), self.height())
    }
}

fn shoelace(vertices: &[(f64, f64)]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = vertices[i];
        let (x1, y1) = vertices[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    acc / 2.0
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), p: (f64, f64), q: (f64, f64)| {
        (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
    };
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Simple polygon with counter-clockwise vertex order and positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<(f64, f64)>,
}

impl Polygon {
    /// Build a polygon, reversing clockwise input to the CCW convention.
    /// Fails on fewer than 3 vertices, zero area, or self-intersection.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Polygon> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateRegion(format!(
                "polygon needs >= 3 vertices, got {}",
                vertices.len()
            )));
        }
        if !vertices.iter().all(|(x, y)| x.is_finite() && y.is_finite()) {
            return Err(Error::DegenerateRegion("non-finite polygon vertex".into()));
        }
        let area = shoelace(&vertices);
        if area == 0.0 {
            return Err(Error::DegenerateRegion("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        // Non-adjacent edge pairs must not cross.
        let n = vertices.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::DegenerateRegion("self-intersecting polygon".into()));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
        (sx / n, sy / n)
    }

    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            let c = v[(i + 2) % n];
            let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
            let scale = ((b.0 - a.0).hypot(b.1 - a.1)) * ((c.0 - b.0).hypot(c.1 - b.1));
            if cross < -1e-9 * scale.max(1.0) {
                return false;
            }
        }
        true
    }

    /// Comma-separated vertex list, the 8-real VOT convention for quads.
    pub fn to_region_string(&self) -> String {
        let parts: Vec<String> = self
            .vertices
            .iter()
            .flat_map(|(x, y)| [x.to_string(), y.to_string()])
            .collect();
        parts.join(",")
    }
}

/// Axis-aligned bounding box of the polygon's vertices.
pub fn polygon_to_axis(p: &Polygon) -> AxisBox {
    let mut x0 = f64::INFINITY;
    let mut y0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in p.vertices() {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    AxisBox { x0, y0, x1, y1 }
}

/// Rotated rectangle: center, extents (canonicalized so `width >= height`)
/// and the long-axis angle in `[-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBox {
    pub center: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

fn wrap_half_pi(mut a: f64) -> f64 {
    a %= PI;
    if a >= FRAC_PI_2 {
        a -= PI;
    } else if a < -FRAC_PI_2 {
        a += PI;
    }
    a
}

impl RotatedBox {
    fn canonical(center: (f64, f64), width: f64, height: f64, angle: f64) -> RotatedBox {
        let (width, height, angle) = if width >= height {
            (width, height, angle)
        } else {
            (height, width, angle + FRAC_PI_2)
        };
        RotatedBox {
            center,
            width,
            height,
            angle: wrap_half_pi(angle),
        }
    }

    /// CCW corner polygon of the rectangle.
    pub fn corners(&self) -> Result<Polygon> {
        let (sin, cos) = self.angle.sin_cos();
        let hw = self.width / 2.0;
        let hh = self.height / 2.0;
        let local = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)];
        let verts = local
            .iter()
            .map(|&(u, v)| {
                (
                    self.center.0 + u * cos - v * sin,
                    self.center.1 + u * sin + v * cos,
                )
            })
            .collect();
        Polygon::new(verts)
    }
}

/// Corner point cloud of a mask under the pixel-as-unit-square convention:
/// each foreground pixel `(r, c)` contributes the four corners of
/// `[c, c+1] x [r, r+1]`, deduplicated.
pub fn mask_to_points(m: &Mask) -> Result<Vec<(f64, f64)>> {
    let mut corners: BTreeSet<(u32, u32)> = BTreeSet::new();
    for r in 0..m.height {
        for c in 0..m.width {
            if m.get(r, c) {
                let (r, c) = (r as u32, c as u32);
                corners.insert((r, c));
                corners.insert((r, c + 1));
                corners.insert((r + 1, c));
                corners.insert((r + 1, c + 1));
            }
        }
    }
    if corners.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(corners
        .into_iter()
        .map(|(r, c)| (c as f64, r as f64))
        .collect())
}

/// Counter-clockwise convex hull by monotone chain; collinear interior
/// points are excluded. Fails if all points are collinear.
pub fn convex_hull(points: &[(f64, f64)]) -> Result<Polygon> {
    if points.len() < 3 {
        return Err(Error::DegenerateRegion(format!(
            "convex hull needs >= 3 points, got {}",
            points.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let build = |iter: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut chain: Vec<(f64, f64)> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain
    };
    let lower = build(&mut pts.iter().copied());
    let upper = build(&mut pts.iter().rev().copied());
    let mut hull = lower;
    hull.pop();
    hull.extend(upper);
    hull.pop();
    if hull.len() < 3 {
        return Err(Error::DegenerateRegion("all points collinear".into()));
    }
    Polygon::new(hull)
}

/// Minimum-area enclosing rectangle of a point set.
///
/// An optimal rectangle has a side collinear with a hull edge, so the search
/// rotates the hull flush with each edge in turn and keeps the smallest
/// axis-aligned bound (first edge wins ties, for determinism).
pub fn min_area_rect(points: &[(f64, f64)]) -> Result<RotatedBox> {
    let hull = convex_hull(points)?;
    let v = hull.vertices();
    let n = v.len();
    let mut best: Option<(f64, f64, f64, f64, f64, f64)> = None; // area, theta, umin, umax, vmin, vmax
    for i in 0..n {
        let (ax, ay) = v[i];
        let (bx, by) = v[(i + 1) % n];
        let theta = (by - ay).atan2(bx - ax);
        let (sin, cos) = theta.sin_cos();
        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for &(x, y) in v {
            let u = x * cos + y * sin;
            let w = -x * sin + y * cos;
            umin = umin.min(u);
            umax = umax.max(u);
            vmin = vmin.min(w);
            vmax = vmax.max(w);
        }
        let area = (umax - umin) * (vmax - vmin);
        if best.map_or(true, |(a, ..)| area < a) {
            best = Some((area, theta, umin, umax, vmin, vmax));
        }
    }
    let (_, theta, umin, umax, vmin, vmax) = best.expect("hull has edges");
    let (sin, cos) = theta.sin_cos();
    let cu = (umin + umax) / 2.0;
    let cv = (vmin + vmax) / 2.0;
    let center = (cu * cos - cv * sin, cu * sin + cv * cos);
    Ok(RotatedBox::canonical(
        center,
        umax - umin,
        vmax - vmin,
        theta,
    ))
}

/// Intersection-over-union of two axis-aligned boxes.
pub fn iou_axis(a: &AxisBox, b: &AxisBox) -> f64 {
    let ix = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0.0);
    let iy = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Clip a convex subject polygon against one directed edge (keeps the left
/// side, CCW interior).
fn clip_edge(subject: &[(f64, f64)], a: (f64, f64), b: (f64, f64)) -> Vec<(f64, f64)> {
    let side = |p: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let mut out = Vec::with_capacity(subject.len() + 1);
    for i in 0..subject.len() {
        let cur = subject[i];
        let next = subject[(i + 1) % subject.len()];
        let sc = side(cur);
        let sn = side(next);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0) {
            let t = sc / (sc - sn);
            out.push((cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1)));
        }
    }
    out
}

/// Intersection-over-union of two convex polygons via Sutherland-Hodgman
/// clipping and shoelace areas. Non-convex input is rejected.
pub fn iou_polygon(a: &Polygon, b: &Polygon) -> Result<f64> {
    if !a.is_convex() || !b.is_convex() {
        return Err(Error::Argument("iou_polygon requires convex polygons".into()));
    }
    let mut clipped: Vec<(f64, f64)> = a.vertices().to_vec();
    let bv = b.vertices();
    for i in 0..bv.len() {
        let e0 = bv[i];
        let e1 = bv[(i + 1) % bv.len()];
        clipped = clip_edge(&clipped, e0, e1);
        if clipped.len() < 3 {
            return Ok(0.0);
        }
    }
    let inter = shoelace(&clipped).max(0.0);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return Ok(0.0);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Overlap of a polygon against an axis-aligned box, via the box's corner
/// polygon.
pub fn iou_polygon_axis(p: &Polygon, b: &AxisBox) -> Result<f64> {
    iou_polygon(p, &b.to_polygon())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::segment::Mask;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mask_from(rows: &[&str]) -> Mask {
        let h = rows.len();
        let w = rows[0].len();
        let mut m = Mask::empty(h, w);
        for (r, row) in rows.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                if ch == '#' {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    #[test]
    fn mask_corner_extraction() {
        let m = mask_from(&["#"]);
        let pts = mask_to_points(&m).unwrap();
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let m = mask_from(&["##", "##"]);
        assert_eq!(mask_to_points(&m).unwrap().len(), 9);
        assert!(matches!(
            mask_to_points(&Mask::empty(3, 3)),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn hull_of_square_corners_is_square() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert_eq!(hull.area(), 4.0);
        // center point excluded
        let with_center = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (1.0, 1.0)];
        let hull2 = convex_hull(&with_center).unwrap();
        assert_eq!(hull2.vertices().len(), 4);
    }

    #[test]
    fn hull_contains_all_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let hull = convex_hull(&pts).unwrap();
        let v = hull.vertices();
        for &p in &pts {
            for i in 0..v.len() {
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                assert!(cross >= -1e-9, "point {p:?} outside hull edge {i}");
            }
        }
    }

    #[test]
    fn hull_rejects_collinear_input() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert!(matches!(
            convex_hull(&pts),
            Err(Error::DegenerateRegion(_))
        ));
    }

    #[test]
    fn min_rect_axis_aligned_block_is_exact() {
        // filled pixel block rows 2..=5, cols 3..=9
        let mut m = Mask::empty(8, 12);
        for r in 2..=5 {
            for c in 3..=9 {
                m.set(r, c, true);
            }
        }
        let rect = min_area_rect(&mask_to_points(&m).unwrap()).unwrap();
        assert_eq!(rect.width, 7.0);
        assert_eq!(rect.height, 4.0);
        assert_eq!(rect.angle, 0.0);
        assert_eq!(rect.center, (6.5, 4.0));
        let corners = rect.corners().unwrap();
        let ax = polygon_to_axis(&corners);
        assert_eq!((ax.x0, ax.y0, ax.x1, ax.y1), (3.0, 2.0, 10.0, 6.0));
    }

    #[test]
    fn min_rect_single_pixel_is_unit_square() {
        let m = mask_from(&["#"]);
        let rect = min_area_rect(&mask_to_points(&m).unwrap()).unwrap();
        assert_eq!((rect.width, rect.height, rect.angle), (1.0, 1.0, 0.0));
        assert_eq!(rect.center, (0.5, 0.5));
    }

    #[test]
    fn min_rect_diagonal_run_matches_angle_sweep() {
        let m = mask_from(&["#..", ".#.", "..#"]);
        let pts = mask_to_points(&m).unwrap();
        let rect = min_area_rect(&pts).unwrap();
        let area = rect.width * rect.height;
        let sweep = oracle::min_area_rect_sweep(&pts);
        assert!((area - sweep).abs() <= 1e-6 * sweep.max(1.0));
    }

    #[test]
    fn min_rect_contains_every_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..30)
                .map(|_| (rng.random_range(-3.0..7.0), rng.random_range(-4.0..2.0)))
                .collect();
            let rect = min_area_rect(&pts).unwrap();
            let (sin, cos) = rect.angle.sin_cos();
            for &(x, y) in &pts {
                let dx = x - rect.center.0;
                let dy = y - rect.center.1;
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                assert!(u.abs() <= rect.width / 2.0 + 1e-9);
                assert!(v.abs() <= rect.height / 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn min_rect_rotation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|_| (rng.random_range(0.0..6.0), rng.random_range(0.0..3.0)))
            .collect();
        let base = min_area_rect(&pts).unwrap();
        for &theta in &[0.3f64, 1.1, -0.7] {
            let (sin, cos) = theta.sin_cos();
            let rotated: Vec<(f64, f64)> = pts
                .iter()
                .map(|&(x, y)| (x * cos - y * sin, x * sin + y * cos))
                .collect();
            let r = min_area_rect(&rotated).unwrap();
            let a0 = base.width * base.height;
            let a1 = r.width * r.height;
            assert!((a0 - a1).abs() <= 1e-6 * a0);
            let delta = (r.angle - base.angle - theta).rem_euclid(FRAC_PI_2);
            let dist = delta.min(FRAC_PI_2 - delta);
            assert!(dist <= 1e-6, "angle drift {dist}");
        }
    }

    #[test]
    fn iou_axis_cases() {
        let a = AxisBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(iou_axis(&a, &a), 1.0);
        let b = AxisBox::new(5.0, 5.0, 6.0, 6.0).unwrap();
        assert_eq!(iou_axis(&a, &b), 0.0);
        let c = AxisBox::new(0.5, 0.0, 1.5, 1.0).unwrap();
        assert!((iou_axis(&a, &c) - 1.0 / 3.0).abs() <= 1e-9);
    }

    #[test]
    fn iou_polygon_matches_axis_on_rectangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..100 {
            let a = AxisBox::new(
                rng.random_range(0.0..4.0),
                rng.random_range(0.0..4.0),
                rng.random_range(5.0..9.0),
                rng.random_range(5.0..9.0),
            )
            .unwrap();
            let b = AxisBox::new(
                rng.random_range(0.0..4.0),
                rng.random_range(0.0..4.0),
                rng.random_range(5.0..9.0),
                rng.random_range(5.0..9.0),
            )
            .unwrap();
            let poly = iou_polygon(&a.to_polygon(), &b.to_polygon()).unwrap();
            assert!((poly - iou_axis(&a, &b)).abs() <= 1e-9);
        }
    }

    #[test]
    fn iou_polygon_identical_and_disjoint() {
        let sq = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(iou_polygon(&sq, &sq).unwrap(), 1.0);
        let far = Polygon::new(vec![(9.0, 9.0), (10.0, 9.0), (10.0, 10.0), (9.0, 10.0)]).unwrap();
        assert_eq!(iou_polygon(&sq, &far).unwrap(), 0.0);
    }

    #[test]
    fn iou_polygon_rotated_square_matches_monte_carlo() {
        let sq = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let rot = RotatedBox {
            center: (0.5, 0.5),
            width: 1.0,
            height: 1.0,
            angle: std::f64::consts::FRAC_PI_4,
        };
        let rp = rot.corners().unwrap();
        let exact = iou_polygon(&sq, &rp).unwrap();
        let mc = oracle::iou_monte_carlo(&sq, &rp, 1_000_000, 77);
        assert!((exact - mc).abs() <= 2e-3, "exact {exact} mc {mc}");
    }

    #[test]
    fn iou_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let mk = |rng: &mut ChaCha8Rng| {
                let cx = rng.random_range(0.0..4.0);
                let cy = rng.random_range(0.0..4.0);
                RotatedBox {
                    center: (cx, cy),
                    width: rng.random_range(1.0..3.0),
                    height: rng.random_range(0.5..1.0),
                    angle: rng.random_range(-1.5..1.5),
                }
                .corners()
                .unwrap()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let ab = iou_polygon(&a, &b).unwrap();
            let ba = iou_polygon(&b, &a).unwrap();
            assert!((ab - ba).abs() <= 1e-9);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn iou_polygon_rejects_non_convex() {
        let cave = Polygon::new(vec![
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 4.0),
            (2.0, 1.0),
            (0.0, 4.0),
        ])
        .unwrap();
        let sq = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(matches!(iou_polygon(&cave, &sq), Err(Error::Argument(_))));
    }

    #[test]
    fn polygon_to_axis_cases() {
        let rect = Polygon::new(vec![(1.0, 2.0), (4.0, 2.0), (4.0, 6.0), (1.0, 6.0)]).unwrap();
        let ax = polygon_to_axis(&rect);
        assert_eq!((ax.x0, ax.y0, ax.x1, ax.y1), (1.0, 2.0, 4.0, 6.0));
        let rot = RotatedBox {
            center: (0.0, 0.0),
            width: 1.0,
            height: 1.0,
            angle: std::f64::consts::FRAC_PI_4,
        };
        let p = rot.corners().unwrap();
        let ax = polygon_to_axis(&p);
        let half = std::f64::consts::SQRT_2 / 2.0;
        assert!((ax.x1 - half).abs() <= 1e-12 && (ax.x0 + half).abs() <= 1e-12);
        for &(x, y) in p.vertices() {
            assert!(ax.contains(x, y));
        }
    }

    #[test]
    fn polygon_orientation_normalized() {
        let cw = Polygon::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        assert!(cw.area() > 0.0);
        assert!(Polygon::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn rotated_box_canonical_form() {
        let r = RotatedBox::canonical((0.0, 0.0), 1.0, 3.0, 0.0);
        assert!(r.width >= r.height);
        assert!((-FRAC_PI_2..FRAC_PI_2).contains(&r.angle));
        assert_eq!(r.width, 3.0);
    }
}
