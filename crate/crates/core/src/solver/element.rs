//! Bilinear square element matrices. For unit thickness both the stiffness
//! and the Laplacian of a square element are independent of its size.

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
const NODE_XI: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Shape-function gradients in physical units for a unit-size element.
fn gradients(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    // d/dx = 2 d/dxi on a unit square.
    NODE_XI.map(|(a, b)| [0.5 * a * (1.0 + b * eta), 0.5 * b * (1.0 + a * xi)])
}

/// 8x8 stiffness with dofs ordered `[u0, v0, u1, v1, ...]`, 2x2 Gauss rule.
pub fn q4_stiffness(d: &[[f64; 3]; 3]) -> [[f64; 8]; 8] {
    let mut k = [[0.0; 8]; 8];
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let g = gradients(xi, eta);
            let mut b = [[0.0; 8]; 3];
            for a in 0..4 {
                b[0][2 * a] = g[a][0];
                b[1][2 * a + 1] = g[a][1];
                b[2][2 * a] = g[a][1];
                b[2][2 * a + 1] = g[a][0];
            }
            let mut db = [[0.0; 8]; 3];
            for r in 0..3 {
                for c in 0..8 {
                    db[r][c] = (0..3).map(|s| d[r][s] * b[s][c]).sum();
                }
            }
            for r in 0..8 {
                for c in 0..8 {
                    // Jacobian determinant 1/4 on the unit square.
                    k[r][c] += 0.25 * (0..3).map(|s| b[s][r] * db[s][c]).sum::<f64>();
                }
            }
        }
    }
    k
}

/// 4x4 matrix of `int grad N_a . grad N_b`.
pub fn q4_laplacian() -> [[f64; 4]; 4] {
    let mut l = [[0.0; 4]; 4];
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let g = gradients(xi, eta);
            for a in 0..4 {
                for b in 0..4 {
                    l[a][b] += 0.25 * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
    }
    l
}

/// Strain at the element centre from corner displacements.
pub fn centroid_strain(u: &[[f64; 2]; 4], h: f64) -> [f64; 3] {
    let [u1, u2, u3, u4] = u.map(|d| d[0]);
    let [v1, v2, v3, v4] = u.map(|d| d[1]);
    let s = 1.0 / (2.0 * h);
    [
        s * (-u1 + u2 + u3 - u4),
        s * (-v1 - v2 + v3 + v4),
        s * (-u1 - u2 + u3 + u4) + s * (-v1 + v2 + v3 - v4),
    ]
}
