use super::{polygon_area, rotate_to_lowest, signed_area, GeometryError, Point};

/// Inward offset of a convex counter-clockwise ring by `t`.
///
/// Every edge is moved inward by `t` along its normal and the resulting
/// half-planes are intersected (clipping the outer ring by each one in turn).
/// Short edges that vanish under the offset drop out naturally.
pub fn shrink_polygon(outer: &[Point], t: f64) -> Result<Vec<Point>, GeometryError> {
    let n = outer.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    if !(t > 0.0) {
        return Err(GeometryError::InfeasibleOffset { offset: t });
    }
    let outer_area = signed_area(outer);
    if outer_area <= 0.0 {
        return Err(GeometryError::Degenerate("ring is not counter-clockwise".into()));
    }

    let mut poly: Vec<Point> = outer.to_vec();
    for i in 0..n {
        let a = outer[i];
        let b = outer[(i + 1) % n];
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let normal = Point::new(-d.y / len, d.x / len);
        poly = clip_half_plane(&poly, normal, normal.dot(a) + t);
        if poly.len() < 3 {
            return Err(GeometryError::InfeasibleOffset { offset: t });
        }
    }

    let scale = outer.iter().map(|p| p.norm()).fold(1.0, f64::max);
    dedup_ring(&mut poly, 1e-12 * scale);
    if poly.len() < 3 || polygon_area(&poly)? <= 1e-12 * outer_area {
        return Err(GeometryError::InfeasibleOffset { offset: t });
    }
    rotate_to_lowest(&mut poly);
    Ok(poly)
}

/// Keep the part of a convex polygon where `normal . p >= level`.
fn clip_half_plane(poly: &[Point], normal: Point, level: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = normal.dot(p) - level;
        let sq = normal.dot(q) - level;
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let s = sp / (sp - sq);
            out.push(p + (q - p) * s);
        }
    }
    out
}

/// Drop consecutive near-duplicate vertices and vertices on straight runs.
fn dedup_ring(ring: &mut Vec<Point>, tol: f64) {
    let mut changed = true;
    while changed && ring.len() >= 3 {
        changed = false;
        let n = ring.len();
        for i in 0..n {
            let prev = ring[(i + n - 1) % n];
            let cur = ring[i];
            let next = ring[(i + 1) % n];
            let dup = (cur - prev).norm() <= tol;
            let straight = (cur - prev).cross(next - cur).abs() <= tol * (next - prev).norm();
            if dup || straight {
                ring.remove(i);
                changed = true;
                break;
            }
        }
    }
}
