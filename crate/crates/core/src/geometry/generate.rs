use std::f64::consts::PI;

use rand::Rng;

use super::{
    bounding_box, convex_hull, inside_domain, polygons_conflict, shrink_polygon, AggregatePolygon,
    GeometryConfig, GeometryError, Mesostructure, Point, Rejection,
};
use crate::rng::{self, uniform};

/// Build an aggregate from raw vertices: hull, then ITZ offset.
pub fn aggregate_from_points(points: &[Point], itz_thickness: f64) -> Result<AggregatePolygon, Rejection> {
    let outer = convex_hull(points).map_err(|_| Rejection::Degenerate)?;
    let inner = shrink_polygon(&outer, itz_thickness).map_err(|_| Rejection::ShrinkInfeasible)?;
    AggregatePolygon::from_rings(outer, inner).map_err(|_| Rejection::Degenerate)
}

/// Draw one candidate aggregate.
///
/// Centre uniform in the domain, both semi-axes uniform in
/// `semi_axis_range`, rotation uniform in `[0, pi)`, and
/// `points_per_ellipse` points at uniform parametric angles on the ellipse.
pub fn sample_aggregate<R: Rng + ?Sized>(
    rng: &mut R,
    config: &GeometryConfig,
) -> Result<AggregatePolygon, Rejection> {
    let l = config.domain_length;
    let (amin, amax) = config.semi_axis_range;
    let center = Point::new(uniform(rng, 0.0, l), uniform(rng, 0.0, l));
    let a = uniform(rng, amin, amax);
    let b = uniform(rng, amin, amax);
    let theta = uniform(rng, 0.0, PI);
    let (s, c) = theta.sin_cos();
    let points: Vec<Point> = (0..config.points_per_ellipse)
        .map(|_| {
            let t = uniform(rng, 0.0, 2.0 * PI);
            let (ex, ey) = (a * t.cos(), b * t.sin());
            center + Point::new(c * ex - s * ey, s * ex + c * ey)
        })
        .collect();
    aggregate_from_points(&points, config.itz_thickness)
}

struct Placed {
    lo: Point,
    hi: Point,
}

/// Random sequential placement until the target volume fraction is reached.
pub fn generate_mesostructure(config: &GeometryConfig) -> Result<Mesostructure, GeometryError> {
    config.validate()?;
    let mut rng = rng::seeded(config.seed);
    let domain_area = config.domain_length * config.domain_length;
    let lower = config.target_volume_fraction - config.vf_tolerance;
    let upper = config.target_volume_fraction + config.vf_tolerance;

    let mut meso = Mesostructure::empty(config.clone());
    let mut boxes: Vec<Placed> = Vec::new();
    let mut area = 0.0;
    let mut attempts = 0;

    while area / domain_area < lower {
        if attempts == config.max_placement_attempts {
            return Err(GeometryError::PartialPacking {
                achieved: area / domain_area,
                target: config.target_volume_fraction,
                attempts,
            });
        }
        attempts += 1;

        let Ok(candidate) = sample_aggregate(&mut rng, config) else {
            continue;
        };
        if (area + candidate.area_outer) / domain_area > upper {
            continue;
        }
        if !inside_domain(&candidate.outer, config.domain_length, config.min_gap) {
            continue;
        }
        let (lo, hi) = bounding_box(&candidate.outer);
        let g = config.min_gap;
        let clash = meso.aggregates.iter().zip(&boxes).any(|(other, bb)| {
            let apart = lo.x > bb.hi.x + g || bb.lo.x > hi.x + g || lo.y > bb.hi.y + g || bb.lo.y > hi.y + g;
            !apart && polygons_conflict(&candidate.outer, &other.outer, g)
        });
        if clash {
            continue;
        }
        area += candidate.area_outer;
        boxes.push(Placed { lo, hi });
        meso.aggregates.push(candidate);
    }

    meso.achieved_volume_fraction = meso.aggregates.iter().map(|a| a.area_outer).sum::<f64>() / domain_area;
    Ok(meso)
}
