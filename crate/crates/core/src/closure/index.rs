use std::collections::HashMap;

use crate::torus::distance_unchecked;

/// Uniform hash grid over `T^d` for radius and nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    m: usize,
    width: f64,
    buckets: HashMap<u64, Vec<usize>>,
    coords: Vec<Vec<f64>>,
}

impl SpatialIndex {
    /// Index with cells of roughly `cell_width` per axis (at least one cell).
    pub fn with_cell_width(dim: usize, cell_width: f64) -> Self {
        let max_m = max_cells_per_axis(dim);
        let m = if cell_width > 0.0 && cell_width.is_finite() {
            ((1.0 / cell_width).floor() as usize).clamp(1, max_m)
        } else {
            1
        };
        SpatialIndex {
            dim,
            m,
            width: 1.0 / m as f64,
            buckets: HashMap::new(),
            coords: Vec::new(),
        }
    }

    /// Index sized so that an evenly spread set puts about one point in each cell.
    pub fn for_points(dim: usize, points: &[Vec<f64>]) -> Self {
        let n = points.len().max(1) as f64;
        let m = n.powf(1.0 / dim as f64).ceil().max(1.0);
        let mut idx = Self::with_cell_width(dim, 1.0 / m);
        for p in points {
            idx.insert(p.clone());
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        p.iter()
            .map(|&x| ((x * self.m as f64).floor() as i64).rem_euclid(self.m as i64) as usize)
            .collect()
    }

    fn key(&self, cell: &[usize]) -> u64 {
        cell.iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.m as u64 + c as u64)
    }

    /// Add a point; returns its index.
    pub fn insert(&mut self, p: Vec<f64>) -> usize {
        debug_assert_eq!(p.len(), self.dim);
        let key = self.key(&self.cell_of(&p));
        let i = self.coords.len();
        self.coords.push(p);
        self.buckets.entry(key).or_default().push(i);
        i
    }

    /// Visit every stored point in cells within Chebyshev offset `k` of `p`'s cell.
    fn visit_block(&self, p: &[f64], k: usize, mut f: impl FnMut(usize)) {
        if 2 * k + 1 >= self.m {
            (0..self.coords.len()).for_each(f);
            return;
        }
        let center = self.cell_of(p);
        let side = 2 * k + 1;
        let total = side.pow(self.dim as u32);
        let mut cell = vec![0usize; self.dim];
        for code in 0..total {
            let mut c = code;
            for (axis, slot) in cell.iter_mut().enumerate() {
                let off = (c % side) as i64 - k as i64;
                c /= side;
                *slot = (center[axis] as i64 + off).rem_euclid(self.m as i64) as usize;
            }
            if let Some(b) = self.buckets.get(&self.key(&cell)) {
                b.iter().copied().for_each(&mut f);
            }
        }
    }

    /// Indices of stored points at torus distance `< radius` from `p`, ascending.
    pub fn within(&self, p: &[f64], radius: f64) -> Vec<usize> {
        let k = (radius / self.width).ceil() as usize;
        let mut out = Vec::new();
        self.visit_block(p, k, |i| {
            if distance_unchecked(p, &self.coords[i]) < radius {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    /// True iff some stored point lies at distance `< radius` from `p`.
    pub fn any_within(&self, p: &[f64], radius: f64) -> bool {
        let k = (radius / self.width).ceil() as usize;
        let mut hit = false;
        self.visit_block(p, k, |i| {
            hit = hit || distance_unchecked(p, &self.coords[i]) < radius;
        });
        hit
    }

    /// Nearest stored point (lowest index among ties) and its distance.
    pub fn nearest(&self, p: &[f64]) -> Option<(usize, f64)> {
        if self.coords.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let consider = |i: usize, best: &mut Option<(usize, f64)>| {
            let d = distance_unchecked(p, &self.coords[i]);
            match best {
                Some((bi, bd)) if d > *bd || (d == *bd && i > *bi) => {}
                _ => *best = Some((i, d)),
            }
        };
        let mut r = 0usize;
        loop {
            if 2 * r + 1 >= self.m {
                for i in 0..self.coords.len() {
                    consider(i, &mut best);
                }
                return best;
            }
            self.visit_ring(p, r, |i| consider(i, &mut best));
            // unvisited points sit at least r cell widths away
            if let Some((_, d)) = best {
                if d <= r as f64 * self.width {
                    return best;
                }
            }
            r += 1;
        }
    }

    fn visit_ring(&self, p: &[f64], r: usize, mut f: impl FnMut(usize)) {
        let center = self.cell_of(p);
        let side = 2 * r + 1;
        let total = side.pow(self.dim as u32);
        let mut cell = vec![0usize; self.dim];
        for code in 0..total {
            let mut c = code;
            let mut on_ring = r == 0;
            for (axis, slot) in cell.iter_mut().enumerate() {
                let off = (c % side) as i64 - r as i64;
                c /= side;
                on_ring |= off.unsigned_abs() as usize == r;
                *slot = (center[axis] as i64 + off).rem_euclid(self.m as i64) as usize;
            }
            if !on_ring {
                continue;
            }
            if let Some(b) = self.buckets.get(&self.key(&cell)) {
                b.iter().copied().for_each(&mut f);
            }
        }
    }
}

fn max_cells_per_axis(dim: usize) -> usize {
    // keep m^d inside u64 and the bucket count sane
    match dim {
        0 | 1 => 1 << 20,
        2 => 1 << 14,
        3 => 1 << 10,
        4 => 1 << 8,
        _ => 16,
    }
}
