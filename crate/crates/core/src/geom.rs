//! Planar geometry kernel: coordinates, polylines and multi-ring regions.
//!
//! Everything here works in projected (meter) units with `f64` coordinates.
//! Regions are stored as closed rings and use the even-odd rule, which keeps
//! containment correct for faces with holes or pinched boundaries without
//! requiring the rings to be assembled in any particular way.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A 2-D point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Coord) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Coord) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Coord) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Coord) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Exact identity key (bit pattern); `-0.0` is folded onto `0.0`.
    pub fn key(self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }

    /// Lexicographic total order on (x, y).
    pub fn lex_cmp(&self, other: &Coord) -> Ordering {
        self.x.total_cmp(&other.x).then_with(|| self.y.total_cmp(&other.y))
    }

    pub fn lerp(self, other: Coord, t: f64) -> Coord {
        Coord::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn as_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl Add for Coord {
    type Output = Coord;
    fn add(self, rhs: Coord) -> Coord {
        Coord::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Coord {
    type Output = Coord;
    fn sub(self, rhs: Coord) -> Coord {
        Coord::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Coord {
    type Output = Coord;
    fn mul(self, rhs: f64) -> Coord {
        Coord::new(self.x * rhs, self.y * rhs)
    }
}

impl From<(f64, f64)> for Coord {
    fn from((x, y): (f64, f64)) -> Self {
        Coord::new(x, y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: Coord,
    pub max: Coord,
}

impl Bbox {
    pub fn empty() -> Self {
        Bbox {
            min: Coord::new(f64::INFINITY, f64::INFINITY),
            max: Coord::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of(points: impl IntoIterator<Item = Coord>) -> Self {
        let mut b = Bbox::empty();
        for p in points {
            b.expand(p);
        }
        b
    }

    pub fn expand(&mut self, p: Coord) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, other: &Bbox) -> Bbox {
        let mut b = *self;
        b.expand(other.min);
        b.expand(other.max);
        b
    }

    pub fn is_empty(&self) -> bool {
        !(self.min.x <= self.max.x && self.min.y <= self.max.y)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn buffered(&self, d: f64) -> Bbox {
        Bbox {
            min: Coord::new(self.min.x - d, self.min.y - d),
            max: Coord::new(self.max.x + d, self.max.y + d),
        }
    }

    pub fn intersects(&self, other: &Bbox) -> bool {
        self.min.x <= other.max.x && other.min.x <= self.max.x && self.min.y <= other.max.y && other.min.y <= self.max.y
    }

    pub fn contains(&self, p: Coord) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn to_aabb(self) -> rstar::AABB<[f64; 2]> {
        rstar::AABB::from_corners(self.min.as_array(), self.max.as_array())
    }
}

pub fn polyline_length(line: &[Coord]) -> f64 {
    line.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Orientation of `c` relative to the directed line `a -> b`
/// (positive: left turn).
pub fn orient(a: Coord, b: Coord, c: Coord) -> f64 {
    (b - a).cross(c - a)
}

/// Closest point on segment `a-b` to `p`: returns `(distance, t)` with
/// `t` the clamped segment parameter.
pub fn point_segment_distance(p: Coord, a: Coord, b: Coord) -> (f64, f64) {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq == 0.0 {
        return (p.dist(a), 0.0);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p.dist(a.lerp(b, t)), t)
}

/// Location of the closest point of a polyline to a query point.
#[derive(Debug, Clone, Copy)]
pub struct LineLocation {
    pub segment: usize,
    pub t: f64,
    pub point: Coord,
    pub distance: f64,
}

impl LineLocation {
    /// Monotone position along the polyline, usable for sorting split points.
    pub fn position(&self) -> f64 {
        self.segment as f64 + self.t
    }
}

pub fn locate_on_polyline(p: Coord, line: &[Coord]) -> LineLocation {
    let mut best = LineLocation {
        segment: 0,
        t: 0.0,
        point: line[0],
        distance: p.dist(line[0]),
    };
    for (i, w) in line.windows(2).enumerate() {
        let (d, t) = point_segment_distance(p, w[0], w[1]);
        if d < best.distance {
            best = LineLocation {
                segment: i,
                t,
                point: w[0].lerp(w[1], t),
                distance: d,
            };
        }
    }
    best
}

pub fn distance_to_polyline(p: Coord, line: &[Coord]) -> f64 {
    locate_on_polyline(p, line).distance
}

/// True if the closed segments `a-b` and `c-d` share at least one point.
pub fn segments_intersect(a: Coord, b: Coord, c: Coord, d: Coord) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// True if the open segments cross at a single interior point of both.
pub fn segments_cross_properly(a: Coord, b: Coord, c: Coord, d: Coord) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
}

fn on_segment(a: Coord, b: Coord, p: Coord) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Shoelace signed area of a closed ring (`ring[0] == ring[last]` or not).
pub fn signed_area(ring: &[Coord]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.cross(b);
    }
    s / 2.0
}

/// Ramer-Douglas-Peucker simplification; endpoints are always kept.
pub fn douglas_peucker(line: &[Coord], tolerance: f64) -> Vec<Coord> {
    if line.len() <= 2 {
        return line.to_vec();
    }
    let mut keep = vec![false; line.len()];
    keep[0] = true;
    keep[line.len() - 1] = true;
    let mut stack = vec![(0usize, line.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let mut worst = 0.0;
        let mut idx = lo;
        for (i, &p) in line.iter().enumerate().take(hi).skip(lo + 1) {
            let d = point_segment_distance(p, line[lo], line[hi]).0;
            if d > worst {
                worst = d;
                idx = i;
            }
        }
        if worst > tolerance {
            keep[idx] = true;
            stack.push((lo, idx));
            stack.push((idx, hi));
        }
    }
    line.iter().zip(keep).filter_map(|(p, k)| k.then_some(*p)).collect()
}

/// Drops consecutive repeated vertices.
pub fn dedup_consecutive(line: &mut Vec<Coord>) {
    line.dedup_by(|a, b| a.key() == b.key());
}

/// Inserts vertices so that no segment is longer than `max_len`.
pub fn densify(line: &[Coord], max_len: f64) -> Vec<Coord> {
    let mut out = Vec::with_capacity(line.len());
    for w in line.windows(2) {
        out.push(w[0]);
        let len = w[0].dist(w[1]);
        let pieces = (len / max_len).ceil() as usize;
        for k in 1..pieces {
            out.push(w[0].lerp(w[1], k as f64 / pieces as f64));
        }
    }
    if let Some(last) = line.last() {
        out.push(*last);
    }
    out
}

/// A polygonal region bounded by one or more closed rings, even-odd filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// Closed rings (`first == last`).
    pub rings: Vec<Vec<Coord>>,
}

impl Region {
    pub fn new(rings: Vec<Vec<Coord>>) -> Self {
        let rings = rings
            .into_iter()
            .filter(|r| r.len() >= 2)
            .map(|mut r| {
                if r.first().map(|c| c.key()) != r.last().map(|c| c.key()) {
                    r.push(r[0]);
                }
                r
            })
            .collect();
        Region { rings }
    }

    /// Axis-aligned rectangle.
    pub fn rect(min: Coord, max: Coord) -> Self {
        Region::new(vec![vec![
            min,
            Coord::new(max.x, min.y),
            max,
            Coord::new(min.x, max.y),
            min,
        ]])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        self.rings.iter().flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
    }

    /// Unsigned area; rings contribute with their own orientation, so
    /// oppositely oriented holes subtract.
    pub fn area(&self) -> f64 {
        self.rings.iter().map(|r| signed_area(r)).sum::<f64>().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.rings.iter().map(|r| polyline_length(r)).sum()
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of(self.rings.iter().flatten().copied())
    }

    /// Area centroid; falls back to the vertex mean for degenerate input.
    pub fn centroid(&self) -> Coord {
        let mut a = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for r in &self.rings {
            for w in r.windows(2) {
                let c = w[0].cross(w[1]);
                a += c;
                cx += (w[0].x + w[1].x) * c;
                cy += (w[0].y + w[1].y) * c;
            }
        }
        if a.abs() < 1e-12 {
            let pts: Vec<Coord> = self.rings.iter().flatten().copied().collect();
            let n = pts.len().max(1) as f64;
            return Coord::new(
                pts.iter().map(|p| p.x).sum::<f64>() / n,
                pts.iter().map(|p| p.y).sum::<f64>() / n,
            );
        }
        Coord::new(cx / (3.0 * a), cy / (3.0 * a))
    }

    /// Even-odd point containment (boundary points may go either way).
    pub fn contains(&self, p: Coord) -> bool {
        let mut inside = false;
        for (a, b) in self.segments() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Coord) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside, or within `tol` of the boundary.
    pub fn covers(&self, p: Coord, tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    /// True if the polyline lies within the region buffered by `tol`.
    ///
    /// Every vertex must be covered, no segment may properly cross the
    /// boundary, and sampled interior points must be covered too (the last
    /// check catches segments that leave and re-enter through a vertex).
    pub fn covers_polyline(&self, line: &[Coord], tol: f64) -> bool {
        if !line.iter().all(|&p| self.covers(p, tol)) {
            return false;
        }
        for w in line.windows(2) {
            for (a, b) in self.segments() {
                if segments_cross_properly(w[0], w[1], a, b) {
                    // crossings within tolerance of an endpoint are touches
                    let near_end = [w[0], w[1]].iter().any(|&q| point_segment_distance(q, a, b).0 <= tol);
                    if !near_end {
                        return false;
                    }
                }
            }
            let len = w[0].dist(w[1]);
            let samples = ((len / 0.5).ceil() as usize).clamp(1, 64);
            for k in 1..samples {
                let q = w[0].lerp(w[1], k as f64 / samples as f64);
                if !self.covers(q, tol) {
                    return false;
                }
            }
        }
        true
    }

    /// True if the two regions share any point.
    pub fn intersects(&self, other: &Region) -> bool {
        if !self.bbox().intersects(&other.bbox()) {
            return false;
        }
        if self.rings.iter().flatten().any(|&p| other.contains(p))
            || other.rings.iter().flatten().any(|&p| self.contains(p))
        {
            return true;
        }
        for (a, b) in self.segments() {
            for (c, d) in other.segments() {
                if segments_intersect(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// Isoperimetric quotient `4πA / P²` (1 for a disc).
    pub fn isoperimetric_quotient(&self) -> f64 {
        let p = self.perimeter();
        if p <= 0.0 {
            return 0.0;
        }
        4.0 * std::f64::consts::PI * self.area() / (p * p)
    }
}
