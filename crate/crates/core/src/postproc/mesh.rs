use std::collections::hash_map::Entry;
use std::collections::HashMap;

use spade::handles::FixedVertexHandle;
use spade::{DelaunayTriangulation, HasPosition, Point2, PositionInTriangulation, Triangulation};

use super::PostprocError;

#[derive(Debug, Clone, Copy)]
struct Site {
    position: Point2<f64>,
    index: usize,
}

impl HasPosition for Site {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.position
    }
}

/// Delaunay triangulation of a point cloud with duplicates merged into
/// their lowest-index occurrence.
pub(crate) struct Mesh {
    triangulation: DelaunayTriangulation<Site>,
    /// Counter-clockwise vertex triples, as indices into the input points.
    pub triangles: Vec<[usize; 3]>,
    /// Triangle across the edge opposite each vertex.
    pub neighbors: Vec<[Option<usize>; 3]>,
    /// Sorted adjacency of every input point (empty for merged duplicates).
    pub vertex_neighbors: Vec<Vec<usize>>,
    face_to_triangle: Vec<usize>,
}

pub(crate) enum Location {
    Vertex(usize),
    Triangle(usize, [f64; 3]),
    Outside,
}

impl Mesh {
    pub fn new(points: &[[f64; 2]]) -> Result<Self, PostprocError> {
        if points.len() < 3 {
            return Err(PostprocError::TooFewPoints { needed: 3, found: points.len() });
        }
        let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
        let mut sites = Vec::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(PostprocError::DegenerateCloud(format!("point {index} is not finite")));
            }
            // Normalise -0.0 so that it merges with 0.0.
            let key = ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits());
            if let Entry::Vacant(slot) = seen.entry(key) {
                slot.insert(index);
                sites.push(Site { position: Point2::new(p[0], p[1]), index });
            }
        }
        let triangulation: DelaunayTriangulation<Site> = DelaunayTriangulation::bulk_load(sites)
            .map_err(|e| PostprocError::DegenerateCloud(format!("triangulation failed: {e:?}")))?;
        if triangulation.num_inner_faces() == 0 {
            return Err(PostprocError::DegenerateCloud("all points are collinear".into()));
        }

        let mut face_to_triangle = vec![usize::MAX; triangulation.num_all_faces()];
        let mut triangles = Vec::with_capacity(triangulation.num_inner_faces());
        for face in triangulation.inner_faces() {
            let [a, b, c] = face.vertices().map(|v| v.data().index);
            let tri = if orient(points[a], points[b], points[c]) > 0.0 { [a, b, c] } else { [a, c, b] };
            face_to_triangle[face.fix().index()] = triangles.len();
            triangles.push(tri);
        }

        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                edges.entry(edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3])).or_default().push(t);
            }
        }
        let mut vertex_neighbors = vec![Vec::new(); points.len()];
        let neighbors = triangles
            .iter()
            .enumerate()
            .map(|(t, tri)| {
                std::array::from_fn(|k| {
                    let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    edges[&key].iter().copied().find(|&o| o != t)
                })
            })
            .collect();
        let mut keys: Vec<(usize, usize)> = edges.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
        }
        for v in &mut vertex_neighbors {
            v.sort_unstable();
        }

        Ok(Mesh { triangulation, triangles, neighbors, vertex_neighbors, face_to_triangle })
    }

    /// Locate `q`; `hint` carries the last visited vertex between calls.
    pub fn locate(&self, points: &[[f64; 2]], q: [f64; 2], hint: &mut Option<FixedVertexHandle>) -> Location {
        let target = Point2::new(q[0], q[1]);
        let position = match *hint {
            Some(h) => self.triangulation.locate_with_hint(target, h),
            None => self.triangulation.locate(target),
        };
        let face = match position {
            PositionInTriangulation::OnVertex(v) => {
                *hint = Some(v);
                return Location::Vertex(self.triangulation.vertex(v).data().index);
            }
            PositionInTriangulation::OnFace(f) => f,
            PositionInTriangulation::OnEdge(e) => {
                let edge = self.triangulation.directed_edge(e);
                match edge.face().as_inner().or_else(|| edge.rev().face().as_inner()) {
                    Some(f) => f.fix(),
                    None => return Location::Outside,
                }
            }
            PositionInTriangulation::OutsideOfConvexHull(_) | PositionInTriangulation::NoTriangulation => {
                return Location::Outside
            }
        };
        let t = self.face_to_triangle[face.index()];
        let tri = self.triangles[t];
        *hint = Some(self.triangulation.face(face).vertices()[0].fix());
        Location::Triangle(t, barycentric(tri.map(|i| points[i]), q))
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

pub(crate) fn barycentric(v: [[f64; 2]; 3], q: [f64; 2]) -> [f64; 3] {
    let det = orient(v[0], v[1], v[2]);
    let b1 = orient(q, v[1], v[2]) / det;
    let b2 = orient(v[0], q, v[2]) / det;
    [b1, b2, 1.0 - b1 - b2]
}
