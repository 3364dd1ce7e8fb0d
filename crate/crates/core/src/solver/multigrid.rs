//! Geometric multigrid V-cycle for the node-stencil stiffness operator.
//!
//! Coarse grids keep every other node line (plus the last line when the
//! cell count is odd), transfers are bilinear, and coarse operators are
//! Galerkin products so they stay nine-point stencils of 2x2 blocks.
//! The smoother is block Gauss-Seidel over four node colours, which is
//! symmetric when the post-sweep runs the colours in reverse.

use rayon::prelude::*;

/// Stop coarsening once either side has at most this many cells.
const COARSEST_CELLS: usize = 8;

type Stencil = [f64; 36];

fn block_index(di: usize, dj: usize) -> usize {
    (dj * 3 + di) * 4
}

/// Bilinear transfer along one axis.
#[derive(Debug, Clone)]
struct Axis {
    /// Up to two `(coarse, weight)` parents per fine node.
    parents: Vec<[(usize, f64); 2]>,
    /// `(fine, weight)` children per coarse node.
    children: Vec<Vec<(usize, f64)>>,
    coarse_cells: usize,
}

impl Axis {
    fn new(cells: usize) -> Self {
        let coarse_cells = cells.div_ceil(2);
        let parents: Vec<[(usize, f64); 2]> = (0..=cells)
            .map(|i| {
                if i % 2 == 0 {
                    [(i / 2, 1.0), (0, 0.0)]
                } else if i == cells {
                    [(coarse_cells, 1.0), (0, 0.0)]
                } else {
                    [(i / 2, 0.5), (i / 2 + 1, 0.5)]
                }
            })
            .collect();
        let mut children = vec![Vec::new(); coarse_cells + 1];
        for (i, ps) in parents.iter().enumerate() {
            for &(c, w) in ps {
                if w != 0.0 {
                    children[c].push((i, w));
                }
            }
        }
        Axis { parents, children, coarse_cells }
    }
}

struct Level {
    nx: usize,
    ny: usize,
    stencil: Vec<Stencil>,
    /// Inverse of each node's diagonal 2x2 block, row-major.
    inv_block: Vec<[f64; 4]>,
    colours: [Vec<usize>; 4],
}

impl Level {
    fn new(nx: usize, ny: usize, stencil: Vec<Stencil>) -> Self {
        let inv_block = stencil
            .iter()
            .map(|c| {
                let (a, b, d, e) = (c[16], c[17], c[18], c[19]);
                let det = a * e - b * d;
                [e / det, -b / det, -d / det, a / det]
            })
            .collect();
        let cols = nx + 1;
        let colours = std::array::from_fn(|k| {
            (0..cols * (ny + 1)).filter(|n| (n % cols) % 2 == k % 2 && (n / cols) % 2 == k / 2).collect()
        });
        Level { nx, ny, stencil, inv_block, colours }
    }

    fn nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    /// `b - A x` at one node.
    fn node_residual(&self, n: usize, b: &[f64], x: &[f64]) -> [f64; 2] {
        let cols = self.nx + 1;
        let (i, j) = (n % cols, n / cols);
        let c = &self.stencil[n];
        let (mut fx, mut fy) = (b[2 * n], b[2 * n + 1]);
        for dj in 0..3 {
            if j + dj < 1 || j + dj > self.ny + 1 {
                continue;
            }
            for di in 0..3 {
                if i + di < 1 || i + di > self.nx + 1 {
                    continue;
                }
                let m = (j + dj - 1) * cols + i + di - 1;
                let k = block_index(di, dj);
                fx -= c[k] * x[2 * m] + c[k + 1] * x[2 * m + 1];
                fy -= c[k + 2] * x[2 * m] + c[k + 3] * x[2 * m + 1];
            }
        }
        [fx, fy]
    }

    fn residual(&self, b: &[f64], x: &[f64], out: &mut [f64]) {
        out.par_chunks_mut(2).with_min_len(1024).enumerate().for_each(|(n, o)| {
            let r = self.node_residual(n, b, x);
            o[0] = r[0];
            o[1] = r[1];
        });
    }

    fn smooth_colour(&self, colour: usize, b: &[f64], x: &mut [f64]) {
        let updates: Vec<[f64; 2]> = self.colours[colour]
            .par_iter()
            .with_min_len(512)
            .map(|&n| {
                let r = self.node_residual(n, b, x);
                let d = &self.inv_block[n];
                [x[2 * n] + d[0] * r[0] + d[1] * r[1], x[2 * n + 1] + d[2] * r[0] + d[3] * r[1]]
            })
            .collect();
        for (&n, u) in self.colours[colour].iter().zip(updates) {
            x[2 * n] = u[0];
            x[2 * n + 1] = u[1];
        }
    }
}

/// Galerkin coarse operator `P^T A P`, skipping rows listed as fixed.
fn galerkin(fine: &Level, fixed: Option<&[f64]>, ax: &Axis, ay: &Axis) -> Vec<Stencil> {
    let fcols = fine.nx + 1;
    let ccols = ax.coarse_cells + 1;
    let mut coarse = vec![[0.0; 36]; ccols * (ay.coarse_cells + 1)];
    coarse.par_iter_mut().with_min_len(64).enumerate().for_each(|(cn, out)| {
        let (ci, cj) = (cn % ccols, cn / ccols);
        for &(fj, wy) in &ay.children[cj] {
            for &(fi, wx) in &ax.children[ci] {
                let w = wx * wy;
                let f = fj * fcols + fi;
                let row_free = |r: usize| fixed.is_none_or(|m| m[2 * f + r] != 0.0);
                let c = &fine.stencil[f];
                for dj in 0..3 {
                    if fj + dj < 1 || fj + dj > fine.ny + 1 {
                        continue;
                    }
                    let gj = fj + dj - 1;
                    for di in 0..3 {
                        if fi + di < 1 || fi + di > fine.nx + 1 {
                            continue;
                        }
                        let gi = fi + di - 1;
                        let k = block_index(di, dj);
                        for &(pj, vy) in &ay.parents[gj] {
                            if vy == 0.0 {
                                continue;
                            }
                            for &(pi, vx) in &ax.parents[gi] {
                                if vx == 0.0 {
                                    continue;
                                }
                                let v = w * vx * vy;
                                let kk = block_index(pi + 1 - ci, pj + 1 - cj);
                                for r in 0..2 {
                                    if !row_free(r) {
                                        continue;
                                    }
                                    for s in 0..2 {
                                        out[kk + 2 * r + s] += v * c[k + 2 * r + s];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // A coarse dof whose fine support is entirely prescribed decouples.
        for d in [16, 19] {
            if out[d] == 0.0 {
                out[d] = 1.0;
            }
        }
    });
    coarse
}

/// Dense Cholesky factor of the coarsest operator.
struct Dense {
    n: usize,
    l: Vec<f64>,
}

impl Dense {
    fn new(level: &Level) -> Option<Self> {
        let n = 2 * level.nodes();
        let cols = level.nx + 1;
        let mut a = vec![0.0; n * n];
        for node in 0..level.nodes() {
            let (i, j) = (node % cols, node / cols);
            let c = &level.stencil[node];
            for dj in 0..3 {
                if j + dj < 1 || j + dj > level.ny + 1 {
                    continue;
                }
                for di in 0..3 {
                    if i + di < 1 || i + di > level.nx + 1 {
                        continue;
                    }
                    let m = (j + dj - 1) * cols + i + di - 1;
                    let k = block_index(di, dj);
                    for r in 0..2 {
                        for s in 0..2 {
                            a[(2 * node + r) * n + 2 * m + s] = c[k + 2 * r + s];
                        }
                    }
                }
            }
        }
        for k in 0..n {
            let mut d = a[k * n + k];
            for p in 0..k {
                d -= a[k * n + p] * a[k * n + p];
            }
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            a[k * n + k] = d;
            for i in k + 1..n {
                let mut v = a[i * n + k];
                for p in 0..k {
                    v -= a[i * n + p] * a[k * n + p];
                }
                a[i * n + k] = v / d;
            }
        }
        Some(Dense { n, l: a })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut v = b[i];
            for p in 0..i {
                v -= self.l[i * n + p] * x[p];
            }
            x[i] = v / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for p in i + 1..n {
                v -= self.l[p * n + i] * x[p];
            }
            x[i] = v / self.l[i * n + i];
        }
    }
}

pub(crate) struct Multigrid {
    levels: Vec<Level>,
    axes: Vec<(Axis, Axis)>,
    coarsest: Dense,
    /// 1 for free dofs on the finest level, 0 for prescribed ones.
    free: Vec<f64>,
}

impl Multigrid {
    /// Build a hierarchy for the stencil restricted to `free` dofs.
    /// Returns `None` when the grid is too thin to coarsen or the coarse
    /// factorisation breaks down.
    pub fn new(nx: usize, ny: usize, stencil: &[Stencil], free: &[f64]) -> Option<Self> {
        if nx <= COARSEST_CELLS || ny <= COARSEST_CELLS {
            return None;
        }
        // Prescribed dofs become identity rows and columns.
        let masked: Vec<Stencil> = stencil
            .par_iter()
            .enumerate()
            .map(|(n, c)| {
                let cols = nx + 1;
                let (i, j) = (n % cols, n / cols);
                let mut out = *c;
                for dj in 0..3 {
                    for di in 0..3 {
                        let k = block_index(di, dj);
                        if j + dj < 1 || j + dj > ny + 1 || i + di < 1 || i + di > nx + 1 {
                            continue;
                        }
                        let m = (j + dj - 1) * cols + i + di - 1;
                        for r in 0..2 {
                            for s in 0..2 {
                                if free[2 * n + r] == 0.0 || free[2 * m + s] == 0.0 {
                                    out[k + 2 * r + s] = if m == n && r == s { 1.0 } else { 0.0 };
                                }
                            }
                        }
                    }
                }
                out
            })
            .collect();
        let mut levels = vec![Level::new(nx, ny, masked)];
        let mut axes = Vec::new();
        loop {
            let last = levels.last().expect("finest level");
            if last.nx <= COARSEST_CELLS || last.ny <= COARSEST_CELLS {
                break;
            }
            let (ax, ay) = (Axis::new(last.nx), Axis::new(last.ny));
            let fixed = if levels.len() == 1 { Some(free) } else { None };
            let coarse = galerkin(last, fixed, &ax, &ay);
            levels.push(Level::new(ax.coarse_cells, ay.coarse_cells, coarse));
            axes.push((ax, ay));
        }
        let coarsest = Dense::new(levels.last().expect("coarsest level"))?;
        Some(Multigrid { levels, axes, coarsest, free: free.to_vec() })
    }

    /// One symmetric V-cycle applied to `r`, starting from zero.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
        z.iter_mut().zip(&self.free).for_each(|(v, f)| *v *= f);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        if l + 1 == self.levels.len() {
            self.coarsest.solve(b, x);
            return;
        }
        let level = &self.levels[l];
        x.iter_mut().for_each(|v| *v = 0.0);
        for colour in 0..4 {
            level.smooth_colour(colour, b, x);
        }
        let mut res = vec![0.0; b.len()];
        level.residual(b, x, &mut res);
        if l == 0 {
            res.iter_mut().zip(&self.free).for_each(|(v, f)| *v *= f);
        }

        let (ax, ay) = &self.axes[l];
        let coarse = &self.levels[l + 1];
        let (fcols, ccols) = (level.nx + 1, coarse.nx + 1);
        let mut bc = vec![0.0; 2 * coarse.nodes()];
        bc.par_chunks_mut(2).with_min_len(256).enumerate().for_each(|(cn, o)| {
            let (ci, cj) = (cn % ccols, cn / ccols);
            for &(fj, wy) in &ay.children[cj] {
                for &(fi, wx) in &ax.children[ci] {
                    let f = fj * fcols + fi;
                    o[0] += wx * wy * res[2 * f];
                    o[1] += wx * wy * res[2 * f + 1];
                }
            }
        });
        let mut xc = vec![0.0; bc.len()];
        self.cycle(l + 1, &bc, &mut xc);

        x.par_chunks_mut(2).with_min_len(1024).enumerate().for_each(|(f, o)| {
            let (fi, fj) = (f % fcols, f / fcols);
            for &(pj, vy) in &ay.parents[fj] {
                for &(pi, vx) in &ax.parents[fi] {
                    let w = vx * vy;
                    if w != 0.0 {
                        let c = pj * ccols + pi;
                        o[0] += w * xc[2 * c];
                        o[1] += w * xc[2 * c + 1];
                    }
                }
            }
        });
        if l == 0 {
            x.iter_mut().zip(&self.free).for_each(|(v, f)| *v *= f);
        }
        for colour in (0..4).rev() {
            level.smooth_colour(colour, b, x);
        }
    }
}
