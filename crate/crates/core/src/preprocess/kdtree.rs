use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;

/// Static 3D k-d tree stored implicitly: each subrange of `order` has its
/// splitting point at the midpoint.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    order: Vec<usize>,
    axis: Vec<u8>,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [Vec3]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axis = vec![0u8; points.len()];
        build_range(points, &mut order, &mut axis, 0);
        KdTree { points, order, axis }
    }

    /// The `k` nearest neighbours of `points[query]`, excluding the point
    /// itself, as `(squared distance, index)` in ascending distance.
    pub fn nearest_excluding(&self, query: usize, k: usize) -> Vec<(f64, usize)> {
        let mut best = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(0, self.order.len(), self.points[query], query, k, &mut best);
        }
        best
    }

    fn search(&self, lo: usize, hi: usize, q: Vec3, skip: usize, k: usize, best: &mut Vec<(f64, usize)>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let p = self.points[idx];
        if idx != skip {
            let d = dist2(p, q);
            if best.len() < k || (d, idx) < best[best.len() - 1] {
                let pos = best.partition_point(|&(bd, bi)| (bd, bi) < (d, idx));
                best.insert(pos, (d, idx));
                best.truncate(k);
            }
        }
        let a = self.axis[mid] as usize;
        let diff = q[a] - p[a];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, skip, k, best);
        if best.len() < k || diff * diff <= best[best.len() - 1].0 {
            self.search(far.0, far.1, q, skip, k, best);
        }
    }
}

fn dist2(a: Vec3, b: Vec3) -> f64 {
    let d = crate::geom::sub(a, b);
    crate::geom::dot(d, d)
}

fn build_range(points: &[Vec3], order: &mut [usize], axis: &mut [u8], offset: usize) {
    if order.len() <= 1 {
        return;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(points[i][a]);
            hi[a] = hi[a].max(points[i][a]);
        }
    }
    let split = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
        .unwrap_or(0);
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&i, &j| points[i][split].total_cmp(&points[j][split]).then(i.cmp(&j)));
    axis[offset + mid] = split as u8;
    let (left, right) = order.split_at_mut(mid);
    build_range(points, left, axis, offset);
    build_range(points, &mut right[1..], axis, offset + mid + 1);
}
