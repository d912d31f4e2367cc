use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MaxError;
use crate::closure::SetApprox;
use crate::torus::{wrap_unit, HyperbolicMap, TorusPoint};

/// Largest grid (in cells) that the removal sweep will allocate.
pub const MAX_GRID_CELLS: usize = 1 << 24;

// Cells within this many cell widths of an image box count as hit, so that
// corner images landing exactly on grid lines are treated consistently
// across depths.
const TOUCH_SLACK: f64 = 1e-9;

/// A union of closed dyadic cells of width `2^-depth` in `T^dim`.
///
/// Cell `(c_0, …, c_{d-1})` has flat index `Σ c_i m^i`, `m = 2^depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GridRepr", try_from = "GridRepr")]
pub struct GridSet {
    dim: usize,
    depth: u32,
    cells: BTreeSet<u64>,
}

/// Run-length form: `runs` holds `[first, count]` pairs of consecutive indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridRepr {
    dim: usize,
    depth: u32,
    runs: Vec<[u64; 2]>,
}

impl From<GridSet> for GridRepr {
    fn from(g: GridSet) -> Self {
        GridRepr {
            dim: g.dim,
            depth: g.depth,
            runs: g.runs(),
        }
    }
}

impl TryFrom<GridRepr> for GridSet {
    type Error = MaxError;
    fn try_from(r: GridRepr) -> Result<Self, MaxError> {
        let mut g = GridSet::empty(r.dim, r.depth)?;
        let total = g.total();
        for [first, count] in r.runs {
            let end = first
                .checked_add(count)
                .filter(|&e| e <= total)
                .ok_or(MaxError::CellOutOfRange(first.saturating_add(count)))?;
            g.cells.extend(first..end);
        }
        Ok(g)
    }
}

fn check_size(dim: usize, depth: u32) -> Result<(), MaxError> {
    let cells = 1u128
        .checked_shl(depth.saturating_mul(dim as u32))
        .unwrap_or(u128::MAX);
    if dim == 0 || depth > 30 || cells > MAX_GRID_CELLS as u128 {
        return Err(MaxError::GridTooLarge {
            cells,
            limit: MAX_GRID_CELLS,
        });
    }
    Ok(())
}

impl GridSet {
    pub fn empty(dim: usize, depth: u32) -> Result<Self, MaxError> {
        check_size(dim, depth)?;
        Ok(GridSet {
            dim,
            depth,
            cells: BTreeSet::new(),
        })
    }

    pub fn full(dim: usize, depth: u32) -> Result<Self, MaxError> {
        let mut g = Self::empty(dim, depth)?;
        g.cells = (0..g.total()).collect();
        Ok(g)
    }

    /// Cells whose multi-index satisfies `keep`.
    pub fn from_predicate(
        dim: usize,
        depth: u32,
        keep: impl Fn(&[u32]) -> bool,
    ) -> Result<Self, MaxError> {
        let mut g = Self::empty(dim, depth)?;
        let total = g.total();
        g.cells = (0..total).filter(|&i| keep(&g.multi_index(i))).collect();
        Ok(g)
    }

    pub fn from_cells(
        dim: usize,
        depth: u32,
        cells: impl IntoIterator<Item = u64>,
    ) -> Result<Self, MaxError> {
        let mut g = Self::empty(dim, depth)?;
        for c in cells {
            if c >= g.total() {
                return Err(MaxError::CellOutOfRange(c));
            }
            g.cells.insert(c);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Cells per axis.
    pub fn side(&self) -> u64 {
        1 << self.depth
    }

    pub fn total(&self) -> u64 {
        self.side().pow(self.dim as u32)
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.side() as f64
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.cells.iter().copied()
    }

    pub fn contains(&self, cell: u64) -> bool {
        self.cells.contains(&cell)
    }

    pub fn insert(&mut self, cell: u64) -> Result<bool, MaxError> {
        if cell >= self.total() {
            return Err(MaxError::CellOutOfRange(cell));
        }
        Ok(self.cells.insert(cell))
    }

    pub fn remove(&mut self, cell: u64) -> bool {
        self.cells.remove(&cell)
    }

    pub fn multi_index(&self, cell: u64) -> Vec<u32> {
        let m = self.side();
        let mut c = cell;
        (0..self.dim)
            .map(|_| {
                let d = (c % m) as u32;
                c /= m;
                d
            })
            .collect()
    }

    pub fn flat_index(&self, idx: &[u32]) -> u64 {
        let m = self.side();
        idx.iter()
            .rev()
            .fold(0u64, |acc, &c| acc * m + (c as u64 % m))
    }

    /// The cell containing `p` (half-open convention).
    pub fn cell_of(&self, p: &TorusPoint) -> u64 {
        let m = self.side() as f64;
        let idx: Vec<u32> = p
            .coords()
            .iter()
            .map(|&x| ((wrap_unit(x) * m).floor() as u64).min(self.side() - 1) as u32)
            .collect();
        self.flat_index(&idx)
    }

    pub fn center(&self, cell: u64) -> TorusPoint {
        let w = self.cell_width();
        TorusPoint::new(
            self.multi_index(cell)
                .into_iter()
                .map(|c| (c as f64 + 0.5) * w)
                .collect::<Vec<_>>(),
        )
    }

    /// Torus distance from `p` to the closed cell.
    pub fn distance_to_cell(&self, cell: u64, p: &TorusPoint) -> f64 {
        let w = self.cell_width();
        self.multi_index(cell)
            .into_iter()
            .zip(p.coords())
            .map(|(c, &x)| {
                let rel = wrap_unit(x - c as f64 * w);
                let d = if rel <= w { 0.0 } else { (rel - w).min(1.0 - rel) };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from `p` to the union of the closed cells (infinite when empty).
    pub fn distance_to(&self, p: &TorusPoint) -> f64 {
        if self.cells.is_empty() {
            return f64::INFINITY;
        }
        let m = self.side() as i64;
        let w = self.cell_width();
        let home: Vec<i64> = self
            .multi_index(self.cell_of(p))
            .into_iter()
            .map(i64::from)
            .collect();
        let mut best = f64::INFINITY;
        let mut k = 0i64;
        loop {
            let side = 2 * k + 1;
            let block = (side as f64).powi(self.dim as i32);
            if side >= m || block > self.cells.len() as f64 {
                return self
                    .cells
                    .iter()
                    .map(|&c| self.distance_to_cell(c, p))
                    .fold(best, f64::min);
            }
            // shell at Chebyshev offset exactly k
            let mut idx = vec![0u32; self.dim];
            for code in 0..side.pow(self.dim as u32) {
                let mut c = code;
                let mut on_shell = k == 0;
                for (axis, slot) in idx.iter_mut().enumerate() {
                    let off = c % side - k;
                    c /= side;
                    on_shell |= off.abs() == k;
                    *slot = (home[axis] + off).rem_euclid(m) as u32;
                }
                if on_shell {
                    let cell = self.flat_index(&idx);
                    if self.cells.contains(&cell) {
                        best = best.min(self.distance_to_cell(cell, p));
                    }
                }
            }
            // cells on later shells are at least k cell widths away
            if best <= k as f64 * w {
                return best;
            }
            k += 1;
        }
    }

    /// The same region at a coarser depth: parents of the present cells.
    pub fn project(&self, depth: u32) -> Result<GridSet, MaxError> {
        let mut g = GridSet::empty(self.dim, depth.min(self.depth))?;
        let shift = self.depth - g.depth;
        for &c in &self.cells {
            let idx: Vec<u32> = self.multi_index(c).into_iter().map(|k| k >> shift).collect();
            g.cells.insert(g.flat_index(&idx));
        }
        Ok(g)
    }

    /// Every child of every present cell at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<GridSet, MaxError> {
        let depth = depth.max(self.depth);
        let mut g = GridSet::empty(self.dim, depth)?;
        let shift = depth - self.depth;
        let per = 1u64 << shift;
        let children = per.pow(self.dim as u32);
        for &c in &self.cells {
            let base = self.multi_index(c);
            for code in 0..children {
                let mut r = code;
                let idx: Vec<u32> = base
                    .iter()
                    .map(|&b| {
                        let o = (r % per) as u32;
                        r /= per;
                        (b << shift) + o
                    })
                    .collect();
                g.cells.insert(g.flat_index(&idx));
            }
        }
        Ok(g)
    }

    pub fn is_subset(&self, other: &GridSet) -> bool {
        self.dim == other.dim && self.depth == other.depth && self.cells.is_subset(&other.cells)
    }

    /// Sorted `[first, count]` runs of consecutive cell indices.
    pub fn runs(&self) -> Vec<[u64; 2]> {
        let mut runs: Vec<[u64; 2]> = Vec::new();
        for &c in &self.cells {
            match runs.last_mut() {
                Some(r) if r[0] + r[1] == c => r[1] += 1,
                _ => runs.push([c, 1]),
            }
        }
        runs
    }

    /// Cell centres as a net with resolution one cell width.
    pub fn to_set_approx(&self, label: impl Into<String>) -> Result<SetApprox, MaxError> {
        if self.cells.is_empty() {
            return Err(MaxError::EmptyGrid);
        }
        let pts = self.cells.iter().map(|&c| self.center(c)).collect();
        SetApprox::new(pts, self.cell_width(), label).map_err(|_| MaxError::EmptyGrid)
    }
}

/// Axis-aligned enclosure of the image of a cell, as inclusive lifted index ranges.
fn image_ranges<M: HyperbolicMap + ?Sized>(
    map: &M,
    idx: &[u32],
    m: u64,
    forward: bool,
) -> Vec<(i64, i64)> {
    let d = idx.len();
    let w = 1.0 / m as f64;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut corner = vec![0.0; d];
    for code in 0..(1u32 << d) {
        for (axis, x) in corner.iter_mut().enumerate() {
            *x = (idx[axis] as f64 + ((code >> axis) & 1) as f64) * w;
        }
        let img = if forward {
            map.lift_forward(&corner)
        } else {
            map.lift_backward(&corner)
        };
        for axis in 0..d {
            lo[axis] = lo[axis].min(img[axis]);
            hi[axis] = hi[axis].max(img[axis]);
        }
    }
    let pad = map.enclosure_padding(w);
    let mf = m as f64;
    (0..d)
        .map(|axis| {
            let a = ((lo[axis] - pad) * mf - TOUCH_SLACK).floor() as i64;
            let b = ((hi[axis] + pad) * mf + TOUCH_SLACK).floor() as i64;
            if b - a + 1 >= m as i64 {
                (0, m as i64 - 1)
            } else {
                (a, b)
            }
        })
        .collect()
}

fn box_hits(alive: &[bool], ranges: &[(i64, i64)], m: u64) -> bool {
    let d = ranges.len();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let flat = cur
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * m + c.rem_euclid(m as i64) as u64);
        if alive[flat as usize] {
            return true;
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return false;
            }
            cur[axis] += 1;
            if cur[axis] <= ranges[axis].1 {
                break;
            }
            cur[axis] = ranges[axis].0;
            axis += 1;
        }
    }
}

/// Outer approximation of `I_f(U) = ∩ f^n(U)`.
///
/// Each sweep drops the cells whose image enclosure under `f` or `f⁻¹` misses
/// the surviving cells; sweeps stop at a fixed point or after `n_iter`.
pub fn maximal_invariant_set<M: HyperbolicMap + ?Sized>(
    map: &M,
    u: &GridSet,
    n_iter: usize,
) -> Result<GridSet, MaxError> {
    if map.dim() != u.dim {
        return Err(MaxError::DimensionMismatch {
            expected: map.dim(),
            found: u.dim,
        });
    }
    if u.is_empty() {
        return Err(MaxError::EmptyGrid);
    }
    let m = u.side();
    let mut alive = vec![false; u.total() as usize];
    for &c in &u.cells {
        alive[c as usize] = true;
    }
    for _ in 0..n_iter {
        let next: Vec<bool> = (0..alive.len())
            .into_par_iter()
            .map(|c| {
                if !alive[c] {
                    return false;
                }
                let idx = u.multi_index(c as u64);
                [true, false]
                    .iter()
                    .all(|&fwd| box_hits(&alive, &image_ranges(map, &idx, m, fwd), m))
            })
            .collect();
        let changed = next != alive;
        alive = next;
        if !changed {
            break;
        }
    }
    Ok(GridSet {
        dim: u.dim,
        depth: u.depth,
        cells: (0..alive.len() as u64).filter(|&c| alive[c as usize]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{torus_distance, ToralAutomorphism};
    use rand::{Rng, SeedableRng};

    #[test]
    fn full_grid_is_invariant() {
        let a = ToralAutomorphism::cat_map();
        let u = GridSet::full(2, 5).unwrap();
        assert_eq!(maximal_invariant_set(&a, &u, 10).unwrap(), u);
    }

    #[test]
    fn block_without_invariant_points_empties() {
        let a = ToralAutomorphism::cat_map();
        let u = GridSet::from_predicate(2, 5, |c| (9..12).contains(&c[0]) && (18..21).contains(&c[1])).unwrap();
        let s = maximal_invariant_set(&a, &u, 20).unwrap();
        assert!(s.is_empty());
        // oracle: every cell centre escapes the block within a few steps
        for c in u.cells() {
            let mut p = u.center(c);
            let mut escaped = false;
            for _ in 0..5 {
                p = a.forward(&p);
                escaped |= !u.contains(u.cell_of(&p));
            }
            assert!(escaped);
        }
    }

    #[test]
    fn punctured_torus_keeps_fixed_point() {
        let a = ToralAutomorphism::cat_map();
        let hole = TorusPoint::new(vec![0.55, 0.35]);
        let u0 = GridSet::full(2, 5).unwrap();
        let u = GridSet::from_predicate(2, 5, |c| {
            let p = u0.center(u0.flat_index(c));
            torus_distance(&p, &hole).unwrap() > 0.06
        })
        .unwrap();
        let s = maximal_invariant_set(&a, &u, 30).unwrap();
        assert!(s.is_subset(&u));
        assert!(s.distance_to(&TorusPoint::origin(2)) == 0.0);
    }

    #[test]
    fn distance_matches_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let g = GridSet::from_predicate(2, 4, |c| (c[0] * 7 + c[1] * 3) % 11 == 0).unwrap();
        for _ in 0..300 {
            let p = TorusPoint::new(vec![rng.random::<f64>(), rng.random::<f64>()]);
            let scan = g
                .cells()
                .map(|c| g.distance_to_cell(c, &p))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(g.distance_to(&p), scan);
        }
    }

    #[test]
    fn cell_distance_wraps() {
        let g = GridSet::from_cells(1, 2, [0]).unwrap();
        assert_eq!(g.distance_to(&TorusPoint::new(vec![0.1])), 0.0);
        assert!((g.distance_to(&TorusPoint::new(vec![0.9])) - 0.1).abs() < 1e-15);
        assert!((g.distance_to(&TorusPoint::new(vec![0.4])) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn rle_roundtrip() {
        let g = GridSet::from_cells(2, 3, [0, 1, 2, 5, 9, 10, 63]).unwrap();
        assert_eq!(g.runs(), vec![[0, 3], [5, 1], [9, 2], [63, 1]]);
        let s = serde_json::to_string(&g).unwrap();
        let back: GridSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"dim":2,"depth":3,"runs":[[60,5]]}"#;
        assert!(serde_json::from_str::<GridSet>(bad).is_err());
    }

    #[test]
    fn project_and_refine() {
        let g = GridSet::from_cells(2, 2, [5]).unwrap();
        let f = g.refine(4).unwrap();
        assert_eq!(f.len(), 16);
        assert_eq!(f.project(2).unwrap(), g);
    }

    #[test]
    fn oversized_grid_is_refused() {
        assert!(matches!(GridSet::empty(4, 8), Err(MaxError::GridTooLarge { .. })));
    }
}
