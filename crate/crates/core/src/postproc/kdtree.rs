/// Static 2-d tree answering exact nearest-point queries.
///
/// Among points at equal distance the one with the lowest index wins.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 2]>,
    order: Vec<usize>,
}

impl KdTree {
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(&points, &mut order, 0);
        KdTree { points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Index of the nearest point, `None` for an empty tree.
    pub fn nearest(&self, q: [f64; 2]) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(q, 0, self.order.len(), 0, &mut best);
        Some(best.1)
    }

    fn search(&self, q: [f64; 2], lo: usize, hi: usize, depth: usize, best: &mut (f64, usize)) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let p = self.points[idx];
        let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        if d < best.0 || (d == best.0 && idx < best.1) {
            *best = (d, idx);
        }
        let axis = depth % 2;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(q, near.0, near.1, depth + 1, best);
        // Equal distances must still be visited for the index tie-break.
        if delta * delta <= best.0 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn build(points: &[[f64; 2]], order: &mut [usize], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % 2;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn brute(points: &[[f64; 2]], q: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in points.iter().enumerate() {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    #[test]
    fn matches_brute_force() {
        let mut r = rng::seeded(11);
        let pts: Vec<[f64; 2]> = (0..700).map(|_| [r.gen_range(0.0..10.0), r.gen_range(0.0..10.0)]).collect();
        let tree = KdTree::new(pts.clone());
        for _ in 0..2000 {
            let q = [r.gen_range(-1.0..11.0), r.gen_range(-1.0..11.0)];
            assert_eq!(tree.nearest(q), Some(brute(&pts, q)));
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // Integer lattice with duplicates: many exact ties.
        let mut pts = Vec::new();
        for rep in 0..3 {
            for i in 0..6 {
                for j in 0..6 {
                    pts.push([i as f64 + rep as f64 * 0.0, j as f64]);
                }
            }
        }
        let tree = KdTree::new(pts.clone());
        for i in 0..12 {
            for j in 0..12 {
                let q = [i as f64 * 0.5, j as f64 * 0.5];
                assert_eq!(tree.nearest(q), Some(brute(&pts, q)), "query {q:?}");
            }
        }
        assert_eq!(KdTree::new(Vec::new()).nearest([0.0, 0.0]), None);
    }
}
