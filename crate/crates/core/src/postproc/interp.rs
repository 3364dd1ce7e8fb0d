use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cubic::{estimate_gradients, evaluate};
use super::kdtree::KdTree;
use super::mesh::{Location, Mesh};
use super::PostprocError;
use crate::raster::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nearest,
    Linear,
    Cubic,
}

/// Scalar samples at scattered positions (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterCloud {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

enum Sample {
    Point(usize),
    Triangle(usize, [f64; 3]),
}

/// Resampling plan from a fixed point set onto the cell centres of a grid.
/// Building it is the expensive part; applying it to a new value set is cheap.
pub struct GridInterpolator {
    points: Vec<[f64; 2]>,
    method: Method,
    mesh: Option<Mesh>,
    samples: Vec<Sample>,
}

impl GridInterpolator {
    pub fn new(points: Vec<[f64; 2]>, grid: &GridSpec, method: Method) -> Result<Self, PostprocError> {
        if points.is_empty() {
            return Err(PostprocError::TooFewPoints { needed: 1, found: 0 });
        }
        let tree = KdTree::new(points.clone());
        let mesh = match method {
            Method::Nearest => None,
            Method::Linear | Method::Cubic => Some(Mesh::new(&points)?),
        };
        let n = grid.n_cells;
        let samples = (0..n)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut hint = None;
                let row: Vec<Sample> = (0..n)
                    .map(|i| {
                        let c = grid.cell_center(i, j);
                        let q = [c.x, c.y];
                        let nearest = || Sample::Point(tree.nearest(q).expect("non-empty tree"));
                        match &mesh {
                            None => nearest(),
                            Some(m) => match m.locate(&points, q, &mut hint) {
                                Location::Vertex(v) => Sample::Point(v),
                                Location::Triangle(t, b) => Sample::Triangle(t, b),
                                Location::Outside => nearest(),
                            },
                        }
                    })
                    .collect();
                row
            })
            .collect();
        Ok(GridInterpolator { points, method, mesh, samples })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Number of grid cells that fell outside the convex hull (or all
    /// cells for nearest-neighbour plans).
    pub fn nearest_fallbacks(&self) -> usize {
        self.samples.iter().filter(|s| matches!(s, Sample::Point(_))).count()
    }

    pub fn interpolate(&self, values: &[f64]) -> Result<Vec<f64>, PostprocError> {
        if values.len() != self.points.len() {
            return Err(PostprocError::LengthMismatch {
                what: "values",
                expected: self.points.len(),
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(PostprocError::NonFiniteValue { index, value });
        }
        let grad = match (self.method, &self.mesh) {
            (Method::Cubic, Some(m)) => Some(estimate_gradients(m, &self.points, values)),
            _ => None,
        };
        Ok(self
            .samples
            .par_iter()
            .with_min_len(1024)
            .map(|s| match *s {
                Sample::Point(i) => values[i],
                Sample::Triangle(t, b) => {
                    let mesh = self.mesh.as_ref().expect("triangle samples imply a mesh");
                    match &grad {
                        Some(g) => evaluate(mesh, &self.points, values, g, t, b),
                        None => {
                            let tri = mesh.triangles[t];
                            b[0] * values[tri[0]] + b[1] * values[tri[1]] + b[2] * values[tri[2]]
                        }
                    }
                }
            })
            .collect())
    }
}

/// Resample `cloud` onto the cell centres of `grid` (row-major, bottom row first).
pub fn scattered_to_grid(cloud: &ScatterCloud, grid: &GridSpec, method: Method) -> Result<Vec<f64>, PostprocError> {
    if cloud.points.len() != cloud.values.len() {
        return Err(PostprocError::LengthMismatch {
            what: "values",
            expected: cloud.points.len(),
            found: cloud.values.len(),
        });
    }
    GridInterpolator::new(cloud.points.clone(), grid, method)?.interpolate(&cloud.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_reproduced() {
        // Samples exactly at the cell centres: every method returns them verbatim.
        let grid = GridSpec::new(16, 8.0).unwrap();
        let mut points = Vec::new();
        let mut values = Vec::new();
        for j in 0..16 {
            for i in 0..16 {
                let c = grid.cell_center(i, j);
                points.push([c.x, c.y]);
                values.push((i * 7 + j * 3) as f64);
            }
        }
        let cloud = ScatterCloud { points, values: values.clone() };
        for m in [Method::Nearest, Method::Linear, Method::Cubic] {
            assert_eq!(scattered_to_grid(&cloud, &grid, m).unwrap(), values, "{m:?}");
        }
    }

    #[test]
    fn errors() {
        let grid = GridSpec::new(16, 8.0).unwrap();
        let line = ScatterCloud { points: vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], values: vec![1.0; 3] };
        assert!(matches!(scattered_to_grid(&line, &grid, Method::Linear), Err(PostprocError::DegenerateCloud(_))));
        assert_eq!(scattered_to_grid(&line, &grid, Method::Nearest).unwrap().len(), 256);
        let bad = ScatterCloud { points: vec![[0.0, 0.0]], values: vec![f64::NAN] };
        assert!(matches!(scattered_to_grid(&bad, &grid, Method::Nearest), Err(PostprocError::NonFiniteValue { .. })));
        let empty = ScatterCloud { points: vec![], values: vec![] };
        assert!(scattered_to_grid(&empty, &grid, Method::Nearest).is_err());
    }
}
