//! C1 piecewise-cubic interpolation on a triangulation.
//!
//! Each triangle is split at its centroid into three cubic Bézier patches
//! (the Clough-Tocher element). Vertex gradients come from a global
//! estimate that minimises the squared second derivative integrated
//! along every mesh edge, solved by Gauss-Seidel sweeps.

use super::mesh::Mesh;

pub(crate) const GRADIENT_TOL: f64 = 1e-6;
pub(crate) const GRADIENT_MAX_ITERS: usize = 400;

/// Vertex gradients of `values` over `mesh`.
pub(crate) fn estimate_gradients(mesh: &Mesh, points: &[[f64; 2]], values: &[f64]) -> Vec<[f64; 2]> {
    let mut grad = vec![[0.0; 2]; points.len()];
    for _ in 0..GRADIENT_MAX_ITERS {
        let mut err: f64 = 0.0;
        for (i, nbrs) in mesh.vertex_neighbors.iter().enumerate() {
            if nbrs.is_empty() {
                continue;
            }
            let (mut q00, mut q01, mut q11) = (0.0, 0.0, 0.0);
            let (mut s0, mut s1) = (0.0, 0.0);
            for &j in nbrs {
                let ex = points[j][0] - points[i][0];
                let ey = points[j][1] - points[i][1];
                let l3 = (ex * ex + ey * ey).sqrt().powi(3);
                let df2 = -ex * grad[j][0] - ey * grad[j][1];
                q00 += 4.0 * ex * ex / l3;
                q01 += 4.0 * ex * ey / l3;
                q11 += 4.0 * ey * ey / l3;
                let t = 6.0 * (values[i] - values[j]) - 2.0 * df2;
                s0 += t * ex / l3;
                s1 += t * ey / l3;
            }
            let det = q00 * q11 - q01 * q01;
            let r0 = (q11 * s0 - q01 * s1) / det;
            let r1 = (-q01 * s0 + q00 * s1) / det;
            let change = (grad[i][0] + r0).abs().max((grad[i][1] + r1).abs());
            grad[i] = [-r0, -r1];
            err = err.max(change / r0.abs().max(r1.abs()).max(1.0));
        }
        if err < GRADIENT_TOL {
            break;
        }
    }
    grad
}

/// Value at barycentric coordinates `b` inside triangle `t`.
pub(crate) fn evaluate(
    mesh: &Mesh,
    points: &[[f64; 2]],
    values: &[f64],
    grad: &[[f64; 2]],
    t: usize,
    b: [f64; 3],
) -> f64 {
    let tri = mesh.triangles[t];
    let p = tri.map(|i| points[i]);
    let f = tri.map(|i| values[i]);
    let df = tri.map(|i| grad[i]);
    let e12 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
    let e23 = [p[2][0] - p[1][0], p[2][1] - p[1][1]];
    let e31 = [p[0][0] - p[2][0], p[0][1] - p[2][1]];
    let dot = |g: [f64; 2], e: [f64; 2]| g[0] * e[0] + g[1] * e[1];
    let df12 = dot(df[0], e12);
    let df21 = -dot(df[1], e12);
    let df23 = dot(df[1], e23);
    let df32 = -dot(df[2], e23);
    let df31 = dot(df[2], e31);
    let df13 = -dot(df[0], e31);

    let c3000 = f[0];
    let c2100 = (df12 + 3.0 * c3000) / 3.0;
    let c2010 = (df13 + 3.0 * c3000) / 3.0;
    let c0300 = f[1];
    let c1200 = (df21 + 3.0 * c0300) / 3.0;
    let c0210 = (df23 + 3.0 * c0300) / 3.0;
    let c0030 = f[2];
    let c1020 = (df31 + 3.0 * c0030) / 3.0;
    let c0120 = (df32 + 3.0 * c0030) / 3.0;

    let c2001 = (c2100 + c2010 + c3000) / 3.0;
    let c0201 = (c1200 + c0300 + c0210) / 3.0;
    let c0021 = (c1020 + c0120 + c0030) / 3.0;

    // Cross-boundary derivative towards the neighbour's centroid is made
    // linear along each edge; boundary edges use the own-centroid direction.
    let mut g = [-0.5; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let Some(o) = mesh.neighbors[t][k] else { continue };
        let q = mesh.triangles[o].map(|i| points[i]);
        let centroid = [(q[0][0] + q[1][0] + q[2][0]) / 3.0, (q[0][1] + q[1][1] + q[2][1]) / 3.0];
        let c = super::mesh::barycentric(p, centroid);
        *gk = match k {
            0 => (2.0 * c[2] + c[1] - 1.0) / (2.0 - 3.0 * c[2] - 3.0 * c[1]),
            1 => (2.0 * c[0] + c[2] - 1.0) / (2.0 - 3.0 * c[0] - 3.0 * c[2]),
            _ => (2.0 * c[1] + c[0] - 1.0) / (2.0 - 3.0 * c[1] - 3.0 * c[0]),
        };
    }

    let c0111 = (g[0] * (-c0300 + 3.0 * c0210 - 3.0 * c0120 + c0030)
        + (-c0300 + 2.0 * c0210 - c0120 + c0021 + c0201))
        / 2.0;
    let c1011 = (g[1] * (-c0030 + 3.0 * c1020 - 3.0 * c2010 + c3000)
        + (-c0030 + 2.0 * c1020 - c2010 + c2001 + c0021))
        / 2.0;
    let c1101 = (g[2] * (-c3000 + 3.0 * c2100 - 3.0 * c1200 + c0300)
        + (-c3000 + 2.0 * c2100 - c1200 + c2001 + c0201))
        / 2.0;

    let c1002 = (c1101 + c1011 + c2001) / 3.0;
    let c0102 = (c1101 + c0111 + c0201) / 3.0;
    let c0012 = (c1011 + c0111 + c0021) / 3.0;
    let c0003 = (c1002 + c0102 + c0012) / 3.0;

    // Barycentric coordinates with respect to the sub-triangle holding the point.
    let m = b[0].min(b[1]).min(b[2]);
    let (b1, b2, b3, b4) = (b[0] - m, b[1] - m, b[2] - m, 3.0 * m);

    b1.powi(3) * c3000
        + 3.0 * b1 * b1 * b2 * c2100
        + 3.0 * b1 * b1 * b3 * c2010
        + 3.0 * b1 * b1 * b4 * c2001
        + 3.0 * b1 * b2 * b2 * c1200
        + 6.0 * b1 * b2 * b4 * c1101
        + 3.0 * b1 * b3 * b3 * c1020
        + 6.0 * b1 * b3 * b4 * c1011
        + 3.0 * b1 * b4 * b4 * c1002
        + b2.powi(3) * c0300
        + 3.0 * b2 * b2 * b3 * c0210
        + 3.0 * b2 * b2 * b4 * c0201
        + 3.0 * b2 * b3 * b3 * c0120
        + 6.0 * b2 * b3 * b4 * c0111
        + 3.0 * b2 * b4 * b4 * c0102
        + b3.powi(3) * c0030
        + 3.0 * b3 * b3 * b4 * c0021
        + 3.0 * b3 * b4 * b4 * c0012
        + b4.powi(3) * c0003
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn cloud(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut r = rng::seeded(seed);
        let mut pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        pts.extend((0..n).map(|_| [r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]));
        pts
    }

    #[test]
    fn gradients_of_linear_field_are_exact() {
        let pts = cloud(60, 3);
        let mesh = Mesh::new(&pts).unwrap();
        let vals: Vec<f64> = pts.iter().map(|p| 2.0 * p[0] - 5.0 * p[1] + 1.0).collect();
        for g in estimate_gradients(&mesh, &pts, &vals) {
            assert!((g[0] - 2.0).abs() < 1e-5 && (g[1] + 5.0).abs() < 1e-5, "{g:?}");
        }
    }

    #[test]
    fn reproduces_linear_field_and_vertex_values() {
        let pts = cloud(60, 4);
        let mesh = Mesh::new(&pts).unwrap();
        let vals: Vec<f64> = pts.iter().map(|p| 2.0 * p[0] - 5.0 * p[1] + 1.0).collect();
        let grad = estimate_gradients(&mesh, &pts, &vals);
        let mut r = rng::seeded(8);
        for t in 0..mesh.triangles.len() {
            let (u, v): (f64, f64) = (r.gen(), r.gen());
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            let b = [u, v, 1.0 - u - v];
            let tri = mesh.triangles[t];
            let x: f64 = (0..3).map(|k| b[k] * pts[tri[k]][0]).sum();
            let y: f64 = (0..3).map(|k| b[k] * pts[tri[k]][1]).sum();
            let w = evaluate(&mesh, &pts, &vals, &grad, t, b);
            assert!((w - (2.0 * x - 5.0 * y + 1.0)).abs() < 1e-5);
            let corner = evaluate(&mesh, &pts, &vals, &grad, t, [0.0, 1.0, 0.0]);
            assert!((corner - vals[tri[1]]).abs() < 1e-12);
        }
    }
}
