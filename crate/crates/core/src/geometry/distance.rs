use super::Point;

/// Euclidean distance from `p` to the closed segment `a-b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Separating-axis test for two convex rings. Touching rings intersect.
pub fn polygons_intersect(a: &[Point], b: &[Point]) -> bool {
    !has_separating_edge(a, b) && !has_separating_edge(b, a)
}

fn has_separating_edge(edges_of: &[Point], other: &[Point]) -> bool {
    let n = edges_of.len();
    (0..n).any(|i| {
        let p = edges_of[i];
        let q = edges_of[(i + 1) % n];
        let axis = Point::new(q.y - p.y, p.x - q.x);
        let (min_a, max_a) = project(edges_of, axis);
        let (min_b, max_b) = project(other, axis);
        max_a < min_b || max_b < min_a
    })
}

fn project(ring: &[Point], axis: Point) -> (f64, f64) {
    ring.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let s = p.dot(axis);
        (lo.min(s), hi.max(s))
    })
}

/// Minimum distance between two convex rings; zero when they intersect.
///
/// For disjoint convex polygons the closest pair always involves a vertex of
/// one polygon and an edge of the other.
pub fn polygon_distance(a: &[Point], b: &[Point]) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    vertex_edge_min(a, b).min(vertex_edge_min(b, a))
}

fn vertex_edge_min(verts: &[Point], ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut best = f64::INFINITY;
    for &p in verts {
        for i in 0..n {
            best = best.min(point_segment_distance(p, ring[i], ring[(i + 1) % n]));
        }
    }
    best
}

/// True iff the two convex rings are closer than `gap` (intersecting rings
/// have distance zero). Exactly `gap` apart is not a conflict.
pub fn polygons_conflict(a: &[Point], b: &[Point], gap: f64) -> bool {
    let d = polygon_distance(a, b);
    d < gap || d == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(cx: f64, cy: f64, side: f64) -> Vec<Point> {
        let h = side / 2.0;
        vec![
            Point::new(cx - h, cy - h),
            Point::new(cx + h, cy - h),
            Point::new(cx + h, cy + h),
            Point::new(cx - h, cy + h),
        ]
    }

    /// Dense boundary sampling: minimum distance between points sampled along
    /// the edges of both rings. Converges from above to the true distance.
    fn sampled_distance(a: &[Point], b: &[Point], per_edge: usize) -> f64 {
        let sample = |ring: &[Point]| -> Vec<Point> {
            let n = ring.len();
            (0..n)
                .flat_map(|i| {
                    let p = ring[i];
                    let q = ring[(i + 1) % n];
                    (0..per_edge).map(move |k| p + (q - p) * (k as f64 / per_edge as f64))
                })
                .collect()
        };
        let (sa, sb) = (sample(a), sample(b));
        let mut best = f64::INFINITY;
        for &p in &sa {
            for &q in &sb {
                best = best.min((p - q).norm());
            }
        }
        best
    }

    #[test]
    fn separated_squares() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(3.0, 0.0, 1.0);
        assert_eq!(polygon_distance(&a, &b), 2.0);
        assert!(!polygons_conflict(&a, &b, 0.5));
    }

    #[test]
    fn overlapping_squares_conflict() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(0.5, 0.3, 1.0);
        assert!(polygons_intersect(&a, &b));
        assert!(polygons_conflict(&a, &b, 0.5));
        assert!(polygons_conflict(&a, &b, 0.0));
    }

    #[test]
    fn exact_gap_is_not_a_conflict() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.5, 0.0, 1.0);
        let d = polygon_distance(&a, &b);
        assert_eq!(d, 0.5);
        assert!(!polygons_conflict(&a, &b, 0.5));
        assert!(polygons_conflict(&a, &b, 0.5 + 1e-12));
        // Vertices of `b` land exactly on the sampling lattice of the shared
        // gap, so dense sampling recovers the distance to rounding.
        assert!((sampled_distance(&a, &b, 1000) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn diagonal_gap_matches_sampling_oracle() {
        let a = square(0.0, 0.0, 1.0);
        let tri = vec![Point::new(1.2, 0.9), Point::new(2.0, 1.0), Point::new(1.5, 2.0)];
        let d = polygon_distance(&a, &tri);
        let s = sampled_distance(&a, &tri, 4000);
        assert!(s >= d - 1e-12);
        assert!((s - d).abs() < 1e-3, "exact {d} vs sampled {s}");
    }

    #[test]
    fn touching_counts_as_intersection() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.0, 0.0, 1.0);
        assert!(polygons_intersect(&a, &b));
        assert_eq!(polygon_distance(&a, &b), 0.0);
    }

    #[test]
    fn segment_distance_cases() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        assert_eq!(point_segment_distance(Point::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point::new(3.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point::new(-3.0, 4.0), a, b), 5.0);
        assert_eq!(point_segment_distance(Point::new(0.0, 2.0), a, a), 2.0);
    }
}
