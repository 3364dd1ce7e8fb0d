use super::{orient, rotate_to_lowest, GeometryError, Point};

/// Convex hull of a point set (Andrew's monotone chain).
///
/// Returns the strictly convex hull vertices in counter-clockwise order,
/// starting from the lowest (then leftmost) point. Interior and collinear
/// boundary points are dropped.
pub fn convex_hull(points: &[Point]) -> Result<Vec<Point>, GeometryError> {
    let mut pts: Vec<Point> = points.to_vec();
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeometryError::Degenerate("non-finite point".into()));
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate(format!(
            "{} distinct points cannot span a polygon",
            pts.len()
        )));
    }

    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(GeometryError::Degenerate("all points are collinear".into()));
    }
    rotate_to_lowest(&mut hull);
    Ok(hull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    /// O(n^3) oracle: (i, j) is a hull edge iff every other point lies on its
    /// left or on the closed segment. Vertices are then ordered by angle about
    /// their mean and rotated to the lowest-then-leftmost vertex.
    fn brute_force_hull(points: &[Point]) -> Vec<Point> {
        let mut verts: Vec<Point> = Vec::new();
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate() {
                if i == j || a == b {
                    continue;
                }
                let edge = points.iter().all(|&c| {
                    let o = orient(a, b, c);
                    if o > 0.0 {
                        return true;
                    }
                    if o < 0.0 {
                        return false;
                    }
                    let t = (c - a).dot(b - a) / (b - a).dot(b - a);
                    (0.0..=1.0).contains(&t)
                });
                if edge {
                    for p in [a, b] {
                        if !verts.contains(&p) {
                            verts.push(p);
                        }
                    }
                }
            }
        }
        let n = verts.len() as f64;
        let cx = verts.iter().map(|p| p.x).sum::<f64>() / n;
        let cy = verts.iter().map(|p| p.y).sum::<f64>() / n;
        verts.sort_by(|p, q| (p.y - cy).atan2(p.x - cx).total_cmp(&(q.y - cy).atan2(q.x - cx)));
        rotate_to_lowest(&mut verts);
        verts
    }

    #[test]
    fn interior_point_excluded() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull, pts[..4].to_vec());
    }

    #[test]
    fn triangle_is_its_own_hull_ccw() {
        let pts = [Point::new(1.0, 2.0), Point::new(0.0, 0.0), Point::new(2.0, 0.5)];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull, vec![Point::new(0.0, 0.0), Point::new(2.0, 0.5), Point::new(1.0, 2.0)]);
    }

    #[test]
    fn starts_at_lowest_then_leftmost() {
        let pts = [
            Point::new(2.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 0.5),
        ];
        assert_eq!(convex_hull(&pts).unwrap()[0], Point::new(0.0, 0.0));
    }

    #[test]
    fn collinear_input_is_degenerate() {
        let pts: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(convex_hull(&pts), Err(GeometryError::Degenerate(_))));
        let dup = [Point::new(1.0, 1.0); 4];
        assert!(matches!(convex_hull(&dup), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn collinear_boundary_points_dropped() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull(&pts).unwrap().len(), 4);
    }

    #[test]
    fn matches_brute_force_on_200_points() {
        let mut r = rng::seeded(2024);
        let pts: Vec<Point> = (0..200).map(|_| Point::new(r.gen(), r.gen())).collect();
        assert_eq!(convex_hull(&pts).unwrap(), brute_force_hull(&pts));
    }

    #[test]
    fn idempotent() {
        let mut r = rng::seeded(5);
        let pts: Vec<Point> = (0..50).map(|_| Point::new(r.gen(), r.gen())).collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(convex_hull(&h).unwrap(), h);
    }
}
