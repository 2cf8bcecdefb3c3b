//! Exact planar geometry for convex polygon generators: areas, inradii,
//! inner parallel bodies, and Monte Carlo tube-volume estimation for
//! arbitrary sampleable shapes.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Coordinate tolerance for vertex deduplication and convexity checks.
pub const GEOM_TOL: f64 = 1e-12;

/// Areas below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// A strictly convex polygon with counterclockwise vertices.
///
/// Serializes as a JSON array of `[x, y]` pairs.
#[derive(Clone, Debug)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl Serialize for ConvexPolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.vertices.iter().map(|p| [p.x, p.y]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        ConvexPolygon::new(pairs).map_err(serde::de::Error::custom)
    }
}

impl ConvexPolygon {
    /// Builds a polygon from `[x, y]` pairs. Clockwise input is reversed so
    /// the stored orientation is always counterclockwise. Fails on fewer than
    /// 3 vertices, repeated vertices (within [`GEOM_TOL`]), non-strict
    /// convexity, or near-zero area.
    pub fn new(pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.len() < 3 {
            return Err(Error::DegenerateShape(format!(
                "{} vertices, need at least 3",
                pairs.len()
            )));
        }
        let mut vertices: Vec<Point> = pairs.iter().map(|p| Point::new(p[0], p[1])).collect();
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            if b.sub(a).norm() <= GEOM_TOL {
                return Err(Error::DegenerateShape(format!(
                    "repeated vertex near ({}, {})",
                    a.x, a.y
                )));
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = b.sub(a);
            let e2 = c.sub(b);
            if e1.cross(e2) <= GEOM_TOL * e1.norm() * e2.norm() {
                return Err(Error::DegenerateShape(format!(
                    "not strictly convex at vertex ({}, {})",
                    b.x, b.y
                )));
            }
        }
        let poly = ConvexPolygon { vertices };
        if poly.area() < DEGENERATE_AREA {
            return Err(Error::DegenerateShape(format!(
                "area {} below {}",
                poly.area(),
                DEGENERATE_AREA
            )));
        }
        Ok(poly)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::rectangle(side, side)
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::new(vec![
            [0.0, 0.0],
            [width, 0.0],
            [width, height],
            [0.0, height],
        ])
    }

    pub fn equilateral_triangle(side: f64) -> Result<Self> {
        Self::new(vec![
            [0.0, 0.0],
            [side, 0.0],
            [side / 2.0, side * 3f64.sqrt() / 2.0],
        ])
    }

    /// Regular `n`-gon with the given inradius, centered at the origin.
    pub fn regular_with_inradius(n: usize, inradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DegenerateShape("regular polygon needs n >= 3".into()));
        }
        let circum = inradius / (std::f64::consts::PI / n as f64).cos();
        let pairs = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [circum * th.cos(), circum * th.sin()]
            })
            .collect();
        Self::new(pairs)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Shoelace area; strictly positive by the construction invariants.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[(i + 1) % n].sub(self.vertices[i]).norm())
            .sum()
    }

    /// Sum of cot(theta_i / 2) over the interior angles; the quadratic
    /// erosion coefficient of the tube polynomial while all edges survive.
    pub fn angle_cotangent_sum(&self) -> f64 {
        let n = self.vertices.len();
        let mut sum = 0.0;
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let v = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let u = v.sub(prev);
            let w = next.sub(v);
            // interior angle = pi - exterior turn angle
            let turn = u.cross(w).atan2(u.dot(w));
            let interior = std::f64::consts::PI - turn;
            sum += 1.0 / (interior / 2.0).tan();
        }
        sum
    }

    /// Inward unit normal and a base vertex for each edge.
    fn edge_lines(&self) -> Vec<(Point, Point)> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = b.sub(a);
                let len = e.norm();
                // ccw orientation puts the interior on the left of a->b
                (Point::new(-e.y / len, e.x / len), a)
            })
            .collect()
    }

    /// The set of points at distance >= eps from the boundary, obtained by
    /// offsetting every edge line inward by eps and intersecting half-planes.
    /// Returns `None` once the intersection is empty or has no area.
    pub fn inner_parallel_body(&self, eps: f64) -> Option<ConvexPolygon> {
        assert!(eps >= 0.0, "offset must be nonnegative");
        if eps == 0.0 {
            return Some(self.clone());
        }
        let mut current: Vec<Point> = self.vertices.clone();
        for (normal, base) in self.edge_lines() {
            current = clip_halfplane(&current, normal, base, eps);
            if current.len() < 3 {
                return None;
            }
        }
        if signed_area(&current) <= DEGENERATE_AREA {
            return None;
        }
        ConvexPolygon::new(current.iter().map(|p| [p.x, p.y]).collect()).ok()
    }

    /// Radius of the largest inscribed disk, i.e. the max over interior
    /// points of the min distance to the edge lines. Computed by bisection
    /// on the emptiness of the offset half-plane intersection; the raw clip
    /// keeps measure-zero intersections so the transition sits at the
    /// Chebyshev radius itself.
    pub fn inradius(&self) -> f64 {
        let lines = self.edge_lines();
        let nonempty = |eps: f64| -> bool {
            let mut current = self.vertices.clone();
            for (normal, base) in &lines {
                current = clip_halfplane(&current, *normal, *base, eps);
                if current.is_empty() {
                    return false;
                }
            }
            true
        };
        let [xmin, ymin, xmax, ymax] = self.bounding_box_array();
        let mut lo = 0.0f64;
        let mut hi = 0.5 * (xmax - xmin).min(ymax - ymin) + GEOM_TOL;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if nonempty(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Area of the inner eps-neighbourhood: total area minus the area of the
    /// eroded core. Equals the full area once eps reaches the inradius.
    pub fn tube_area(&self, eps: f64) -> f64 {
        let core = self
            .inner_parallel_body(eps)
            .map(|p| p.area())
            .unwrap_or(0.0);
        self.area() - core
    }

    pub fn scale(&self, lambda: f64) -> ConvexPolygon {
        assert!(lambda > 0.0);
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(p.x * lambda, p.y * lambda))
                .collect(),
        }
    }

    fn bounding_box_array(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            b[0] = b[0].min(p.x);
            b[1] = b[1].min(p.y);
            b[2] = b[2].max(p.x);
            b[3] = b[3].max(p.y);
        }
        b
    }
}

fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        s += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * s
}

/// Sutherland-Hodgman clip of a convex polygon against the half-plane
/// `normal . (x - base) >= eps`.
fn clip_halfplane(vertices: &[Point], normal: Point, base: Point, eps: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(vertices.len() + 1);
    let n = vertices.len();
    let side = |p: Point| normal.dot(p.sub(base)) - eps;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let sa = side(a);
        let sb = side(b);
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
            let t = sa / (sa - sb);
            out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    // drop consecutive duplicates introduced by intersections at vertices
    let mut dedup: Vec<Point> = Vec::with_capacity(out.len());
    for p in out {
        if dedup
            .last()
            .is_none_or(|q| p.sub(*q).norm() > GEOM_TOL)
        {
            dedup.push(p);
        }
    }
    if dedup.len() >= 2 && dedup[0].sub(*dedup.last().unwrap()).norm() <= GEOM_TOL {
        dedup.pop();
    }
    dedup
}

/// A shape that can be sampled: point membership, distance from an interior
/// point to the boundary, and a bounding box.
pub trait ShapeSampler {
    fn contains(&self, x: f64, y: f64) -> bool;
    /// Distance to the boundary; only meaningful when `contains(x, y)`.
    fn boundary_distance(&self, x: f64, y: f64) -> f64;
    /// `[xmin, ymin, xmax, ymax]`.
    fn bounding_box(&self) -> [f64; 4];
}

impl ShapeSampler for ConvexPolygon {
    fn contains(&self, x: f64, y: f64) -> bool {
        let p = Point::new(x, y);
        self.edge_lines()
            .iter()
            .all(|(normal, base)| normal.dot(p.sub(*base)) >= -GEOM_TOL)
    }

    fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        let p = Point::new(x, y);
        // for a convex region the boundary distance from an interior point is
        // the min inward distance over the edge lines
        self.edge_lines()
            .iter()
            .map(|(normal, base)| normal.dot(p.sub(*base)))
            .fold(f64::INFINITY, f64::min)
    }

    fn bounding_box(&self) -> [f64; 4] {
        self.bounding_box_array()
    }
}

/// Monte Carlo estimate of a tube area together with its binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct TubeEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

const MC_CHUNK: u64 = 1 << 16;

/// Hit-rate estimate over the bounding box of `{x in shape : boundary_distance(x) <= eps}`.
///
/// Sampling is split into fixed-size chunks with per-chunk seeds derived from
/// `seed`, so the result is deterministic and independent of how chunks are
/// scheduled.
pub fn montecarlo_tube_area(
    shape: &dyn ShapeSampler,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<TubeEstimate> {
    if n_samples < 1000 {
        return Err(Error::InvalidModel(format!(
            "n_samples = {n_samples}, need at least 1000"
        )));
    }
    if eps < 0.0 {
        return Err(Error::InvalidModel("eps must be nonnegative".into()));
    }
    let [xmin, ymin, xmax, ymax] = shape.bounding_box();
    let box_area = (xmax - xmin) * (ymax - ymin);
    if !(box_area > 0.0) {
        return Err(Error::DegenerateShape("zero-area bounding box".into()));
    }
    let mut hits: u64 = 0;
    let n_chunks = n_samples.div_ceil(MC_CHUNK);
    for chunk in 0..n_chunks {
        let len = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (chunk + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..len {
            let x = xmin + (xmax - xmin) * rng.random::<f64>();
            let y = ymin + (ymax - ymin) * rng.random::<f64>();
            if shape.contains(x, y) && shape.boundary_distance(x, y) <= eps {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / n_samples as f64;
    Ok(TubeEstimate {
        estimate: box_area * p,
        std_error: box_area * (p * (1.0 - p) / n_samples as f64).sqrt(),
    })
}
