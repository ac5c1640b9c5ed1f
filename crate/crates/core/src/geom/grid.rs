//! Uniform-grid spatial hash backing the neighbor queries.
//!
//! Cells are cubes of a single edge length. Queries expand Chebyshev shells
//! around the query's (possibly out-of-bounds) ideal cell; once the current
//! k-th best distance is strictly below `shell * cell`, no unvisited point
//! can improve or tie the result, so tie rules survive the acceleration.

use super::{NeighborList, Point3};

pub struct PointGrid {
    cell: f64,
    min: Point3,
    dims: [i64; 3],
    /// point indices per cell, flattened x-major
    buckets: Vec<Vec<u32>>,
}

impl PointGrid {
    pub fn build(points: &[Point3]) -> PointGrid {
        assert!(!points.is_empty(), "grid over empty cloud");
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let ext = hi - lo;
        let longest = ext.x.max(ext.y).max(ext.z);
        // aim for roughly one point per cell, capped to keep memory bounded
        let target = (points.len() as f64).cbrt().ceil().max(1.0).min(64.0);
        let cell = if longest > 0.0 { longest / target } else { 1.0 };
        let dim = |e: f64| -> i64 { ((e / cell).floor() as i64 + 1).max(1) };
        let dims = [dim(ext.x), dim(ext.y), dim(ext.z)];
        let mut buckets = vec![Vec::new(); (dims[0] * dims[1] * dims[2]) as usize];
        let grid = |v: f64, min: f64, d: i64| -> i64 {
            (((v - min) / cell).floor() as i64).clamp(0, d - 1)
        };
        for (i, p) in points.iter().enumerate() {
            let cx = grid(p.x, lo.x, dims[0]);
            let cy = grid(p.y, lo.y, dims[1]);
            let cz = grid(p.z, lo.z, dims[2]);
            let flat = (cx * dims[1] + cy) * dims[2] + cz;
            buckets[flat as usize].push(i as u32);
        }
        PointGrid {
            cell,
            min: lo,
            dims,
            buckets,
        }
    }

    fn ideal_cell(&self, q: &Point3) -> [i64; 3] {
        [
            ((q.x - self.min.x) / self.cell).floor() as i64,
            ((q.y - self.min.y) / self.cell).floor() as i64,
            ((q.z - self.min.z) / self.cell).floor() as i64,
        ]
    }

    /// Visit every in-range cell at exactly Chebyshev distance `shell` from
    /// `center`, pushing candidate `(d2, index)` pairs.
    fn collect_shell(
        &self,
        points: &[Point3],
        q: &Point3,
        center: [i64; 3],
        shell: i64,
        out: &mut Vec<(f64, usize)>,
    ) {
        let [cx, cy, cz] = center;
        let mut visit = |x: i64, y: i64, z: i64| {
            if x < 0 || y < 0 || z < 0 || x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2]
            {
                return;
            }
            let flat = ((x * self.dims[1] + y) * self.dims[2] + z) as usize;
            for &i in &self.buckets[flat] {
                let d2 = (points[i as usize] - q).norm_squared();
                out.push((d2, i as usize));
            }
        };
        if shell == 0 {
            visit(cx, cy, cz);
            return;
        }
        for dx in -shell..=shell {
            for dy in -shell..=shell {
                if dx.abs() == shell || dy.abs() == shell {
                    // full z column belongs to the shell
                    for dz in -shell..=shell {
                        visit(cx + dx, cy + dy, cz + dz);
                    }
                } else {
                    visit(cx + dx, cy + dy, cz - shell);
                    visit(cx + dx, cy + dy, cz + shell);
                }
            }
        }
    }

    fn max_shell(&self, center: [i64; 3]) -> i64 {
        let mut s = 0i64;
        for a in 0..3 {
            s = s.max((center[a]).abs().max((self.dims[a] - 1 - center[a]).abs()));
        }
        s
    }

    pub fn knn(&self, points: &[Point3], q: &Point3, k: usize) -> NeighborList {
        let k = k.min(points.len());
        if k == 0 {
            return NeighborList {
                indices: Vec::new(),
                distances: Vec::new(),
            };
        }
        let center = self.ideal_cell(q);
        let max_shell = self.max_shell(center);
        let mut cands: Vec<(f64, usize)> = Vec::new();
        let mut shell = 0i64;
        loop {
            self.collect_shell(points, q, center, shell, &mut cands);
            if cands.len() >= k {
                cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let kth = cands[k - 1].0;
                let covered = shell as f64 * self.cell;
                if kth < covered * covered || shell >= max_shell {
                    break;
                }
            } else if shell >= max_shell {
                break;
            }
            shell += 1;
        }
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.truncate(k);
        NeighborList {
            indices: cands.iter().map(|&(_, i)| i).collect(),
            distances: cands.iter().map(|&(d2, _)| d2.sqrt()).collect(),
        }
    }

    pub fn radius_neighbors(
        &self,
        points: &[Point3],
        q: &Point3,
        r: f64,
        max_count: usize,
    ) -> NeighborList {
        let r2 = r * r;
        let center = self.ideal_cell(q);
        let max_shell = self.max_shell(center);
        // cells at Chebyshev distance c hold points no closer than (c-1)*cell
        let needed = ((r / self.cell).floor() as i64 + 1).min(max_shell);
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for shell in 0..=needed {
            self.collect_shell(points, q, center, shell, &mut cands);
        }
        cands.retain(|&(d2, _)| d2 <= r2);
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.truncate(max_count);
        NeighborList {
            indices: cands.iter().map(|&(_, i)| i).collect(),
            distances: cands.iter().map(|&(d2, _)| d2.sqrt()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_grid() {
        let pts = vec![Point3::new(0.5, 0.5, 0.5)];
        let g = PointGrid::build(&pts);
        let nl = g.knn(&pts, &Point3::origin(), 3);
        assert_eq!(nl.indices, vec![0]);
    }

    #[test]
    fn coincident_points_grid() {
        let pts = vec![Point3::origin(); 10];
        let g = PointGrid::build(&pts);
        let nl = g.knn(&pts, &Point3::origin(), 4);
        assert_eq!(nl.indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn query_far_outside_grid() {
        let pts: Vec<Point3> = (0..100)
            .map(|i| Point3::new((i % 10) as f64, (i / 10) as f64, 0.0))
            .collect();
        let g = PointGrid::build(&pts);
        let q = Point3::new(100.0, 100.0, 100.0);
        let got = g.knn(&pts, &q, 5);
        let want = crate::geom::brute::knn(&pts, &q, 5);
        assert_eq!(got, want);
    }
}
