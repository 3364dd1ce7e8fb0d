//! Random three-phase concrete mesostructures.
//!
//! Aggregates are convex polygons built from random points on random
//! ellipses. Each aggregate carries an inner ring, the inward offset of its
//! outer boundary by the ITZ thickness; the band between the two rings is the
//! interfacial transition zone. Placement is random sequential: candidates are
//! rejected when they leave the domain, come closer than `min_gap` to an
//! accepted aggregate, or would overshoot the target volume fraction.

mod distance;
mod generate;
mod hull;
mod io;
mod offset;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distance::{point_segment_distance, polygon_distance, polygons_conflict, polygons_intersect};
pub use generate::{aggregate_from_points, generate_mesostructure, sample_aggregate};
pub use hull::convex_hull;
pub use io::{parse_mesostructure, serialize_mesostructure, MESOSTRUCTURE_FORMAT};
pub use offset::shrink_polygon;

/// A point in the specimen plane, in millimetres.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Orientation of `c` relative to the directed line `a -> b` (positive = left).
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("infeasible inward offset: polygon is too thin for offset {offset} mm")]
    InfeasibleOffset { offset: f64 },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("invalid geometry config: {0}")]
    InvalidConfig(String),
    #[error(
        "placement attempts exhausted after {attempts} tries: achieved volume fraction {achieved:.4} of target {target:.4}"
    )]
    PartialPacking { achieved: f64, target: f64, attempts: usize },
    #[error("mesostructure parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

/// Why a sampled candidate aggregate was discarded. Always recoverable: the
/// generator simply draws the next candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// Sampled points are collinear or coincident.
    Degenerate,
    /// The polygon is thinner than twice the ITZ thickness.
    ShrinkInfeasible,
}

/// Shoelace area with sign: positive for counter-clockwise rings.
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * acc
}

/// Area of a simple ring (absolute shoelace area).
pub fn polygon_area(ring: &[Point]) -> Result<f64, GeometryError> {
    if ring.len() < 3 {
        return Err(GeometryError::TooFewVertices(ring.len()));
    }
    Ok(signed_area(ring).abs())
}

/// Area centroid of a simple ring.
pub fn polygon_centroid(ring: &[Point]) -> Point {
    let n = ring.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a.abs() < f64::MIN_POSITIVE {
        let inv = 1.0 / n as f64;
        return ring.iter().fold(Point::default(), |s, &p| s + p) * inv;
    }
    Point::new(cx / (3.0 * a), cy / (3.0 * a))
}

/// Whether `ring` is convex and counter-clockwise (collinear runs allowed).
pub fn is_convex_ccw(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 || signed_area(ring) <= 0.0 {
        return false;
    }
    let scale = ring.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale * scale;
    (0..n).all(|i| orient(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) >= -tol)
}

/// Axis-aligned bounding box `(min, max)` of a ring.
pub fn bounding_box(ring: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in ring {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Rotate a ring so that it starts at its lowest, then leftmost, vertex.
pub(crate) fn rotate_to_lowest(ring: &mut [Point]) {
    if let Some(start) = (0..ring.len()).min_by(|&a, &b| {
        let (p, q) = (ring[a], ring[b]);
        p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x))
    }) {
        ring.rotate_left(start);
    }
}

/// Parameters of the random aggregate generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Side of the square specimen (mm).
    pub domain_length: f64,
    /// Aggregate area fraction to reach.
    pub target_volume_fraction: f64,
    /// Accepted deviation of the achieved fraction from the target.
    pub vf_tolerance: f64,
    /// ITZ band thickness (mm).
    pub itz_thickness: f64,
    /// Minimum clearance between outer aggregate boundaries, also used as the
    /// margin to the specimen edges (mm).
    pub min_gap: f64,
    /// Range of both ellipse semi-axes (mm).
    pub semi_axis_range: (f64, f64),
    pub points_per_ellipse: usize,
    pub max_placement_attempts: usize,
    pub seed: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            domain_length: 50.0,
            target_volume_fraction: 0.4,
            vf_tolerance: 0.01,
            itz_thickness: 0.6,
            min_gap: 0.5,
            semi_axis_range: (1.5, 5.0),
            points_per_ellipse: 10,
            max_placement_attempts: 200_000,
            seed: 0,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: &str| Err(GeometryError::InvalidConfig(msg.to_string()));
        let (lo, hi) = self.semi_axis_range;
        if !(self.domain_length > 0.0) {
            return bad("domain_length must be positive");
        }
        if !(self.itz_thickness > 0.0) {
            return bad("itz_thickness must be positive");
        }
        if !(self.min_gap >= 0.0) {
            return bad("min_gap must be non-negative");
        }
        if !(lo > 0.0 && lo <= hi) {
            return bad("semi_axis_range must satisfy 0 < min <= max");
        }
        if !(0.0..0.9).contains(&self.target_volume_fraction) {
            return bad("target_volume_fraction must lie in [0, 0.9)");
        }
        if !(self.vf_tolerance >= 0.0) {
            return bad("vf_tolerance must be non-negative");
        }
        if self.points_per_ellipse < 5 {
            return bad("points_per_ellipse must be at least 5");
        }
        Ok(())
    }
}

/// A convex aggregate with its ITZ ring.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePolygon {
    /// Outer boundary, convex and counter-clockwise.
    pub outer: Vec<Point>,
    /// Inner boundary (aggregate core), the inward offset of `outer`.
    pub inner: Vec<Point>,
    pub centroid: Point,
    pub area_outer: f64,
    pub area_inner: f64,
}

impl AggregatePolygon {
    /// Build from both rings, deriving centroid and areas.
    pub fn from_rings(outer: Vec<Point>, inner: Vec<Point>) -> Result<Self, GeometryError> {
        let area_outer = polygon_area(&outer)?;
        let area_inner = polygon_area(&inner)?;
        Ok(Self {
            centroid: polygon_centroid(&outer),
            outer,
            inner,
            area_outer,
            area_inner,
        })
    }
}

/// A generated specimen: configuration plus accepted aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesostructure {
    pub config: GeometryConfig,
    pub aggregates: Vec<AggregatePolygon>,
    /// Sum of outer areas over the domain area.
    pub achieved_volume_fraction: f64,
}

/// A broken mesostructure invariant, reported by [`Mesostructure::violations`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Overlap { first: usize, second: usize, distance: f64 },
    Boundary { aggregate: usize },
    RingShape { aggregate: usize },
    VolumeFraction { achieved: f64 },
}

impl Mesostructure {
    pub fn empty(config: GeometryConfig) -> Self {
        Self { config, aggregates: Vec::new(), achieved_volume_fraction: 0.0 }
    }

    pub fn domain_area(&self) -> f64 {
        self.config.domain_length * self.config.domain_length
    }

    /// Every invariant violation, in a deterministic order. Empty for a
    /// valid mesostructure.
    pub fn violations(&self) -> Vec<Violation> {
        let cfg = &self.config;
        let mut out = Vec::new();
        for (i, agg) in self.aggregates.iter().enumerate() {
            if !inside_domain(&agg.outer, cfg.domain_length, cfg.min_gap) {
                out.push(Violation::Boundary { aggregate: i });
            }
            if !is_convex_ccw(&agg.outer)
                || !is_convex_ccw(&agg.inner)
                || agg.area_inner >= agg.area_outer
            {
                out.push(Violation::RingShape { aggregate: i });
            }
        }
        for i in 0..self.aggregates.len() {
            for j in (i + 1)..self.aggregates.len() {
                let d = polygon_distance(&self.aggregates[i].outer, &self.aggregates[j].outer);
                if d < cfg.min_gap || d == 0.0 {
                    out.push(Violation::Overlap { first: i, second: j, distance: d });
                }
            }
        }
        if (self.achieved_volume_fraction - cfg.target_volume_fraction).abs()
            > cfg.vf_tolerance + 1e-12
        {
            out.push(Violation::VolumeFraction { achieved: self.achieved_volume_fraction });
        }
        out
    }
}

/// Whether every vertex lies strictly inside the domain square and at least
/// `margin` away from its edges.
pub(crate) fn inside_domain(ring: &[Point], length: f64, margin: f64) -> bool {
    ring.iter().all(|p| {
        let ok = |c: f64| c >= margin && c <= length - margin && c > 0.0 && c < length;
        ok(p.x) && ok(p.y)
    })
}
