//! Banded linear solver with partial pivoting for the block-bidiagonal Newton systems.

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Each row keeps a dense slice starting at its first structural column; row
/// swaps move whole slices, and fill-in from pivoting grows them to the right
/// by at most `kl` entries.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
struct Row {
    first: usize,
    vals: Vec<f64>,
}

impl Row {
    fn get(&self, c: usize) -> f64 {
        if c < self.first {
            return 0.0;
        }
        self.vals.get(c - self.first).copied().unwrap_or(0.0)
    }

    fn last(&self) -> usize {
        self.first + self.vals.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularMatrix {
    pub pivot: usize,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let first = i.saturating_sub(kl);
                let last = (i + ku + 1).min(n);
                Row {
                    first,
                    vals: vec![0.0; last - first],
                }
            })
            .collect();
        BandedMatrix { n, kl, ku, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(j)
    }

    /// Set an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let row = &mut self.rows[i];
        row.vals[j - row.first] = v;
    }

    /// Solve `A x = b` by Gaussian elimination with row pivoting, consuming `A`.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>, SingularMatrix> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let scale = self
            .rows
            .iter()
            .flat_map(|r| r.vals.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..n {
            let bottom = (k + self.kl + 1).min(n);
            let (mut p, mut best) = (k, self.rows[k].get(k).abs());
            for r in k + 1..bottom {
                let v = self.rows[r].get(k).abs();
                if v > best {
                    p = r;
                    best = v;
                }
            }
            if best <= 1e-14 * scale {
                return Err(SingularMatrix { pivot: k });
            }
            if p != k {
                self.rows.swap(p, k);
                b.swap(p, k);
            }
            let pivot_row = self.rows[k].clone();
            let piv = pivot_row.get(k);
            for r in k + 1..bottom {
                let factor = self.rows[r].get(k) / piv;
                if factor == 0.0 {
                    continue;
                }
                let row = &mut self.rows[r];
                if row.last() < pivot_row.last() {
                    let extra = pivot_row.last() - row.last();
                    row.vals.extend(std::iter::repeat_n(0.0, extra));
                }
                for c in k..pivot_row.last() {
                    let idx = c - row.first;
                    row.vals[idx] -= factor * pivot_row.get(c);
                }
                b[r] -= factor * b[k];
            }
        }
        for k in (0..n).rev() {
            let row = &self.rows[k];
            let mut acc = b[k];
            for c in k + 1..row.last() {
                acc -= row.get(c) * b[c];
            }
            b[k] = acc / row.get(k);
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_dense_lu() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(3..40);
            let kl = rng.random_range(0..4);
            let ku = rng.random_range(0..4);
            let mut band = BandedMatrix::zeros(n, kl, ku);
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                    // weak diagonal so pivoting actually happens
                    let v = rng.random_range(-1.0..1.0) + if i == j { 0.1 } else { 0.0 };
                    band.set(i, j, v);
                    dense[(i, j)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let Some(expected) = dense.clone().lu().solve(&DVector::from_column_slice(&b)) else {
                continue;
            };
            match band.solve(b) {
                Ok(x) => {
                    for (u, v) in x.iter().zip(expected.iter()) {
                        assert!((u - v).abs() < 1e-8 * (1.0 + v.abs()), "{u} vs {v}");
                    }
                }
                Err(_) => assert!(dense.determinant().abs() < 1e-10),
            }
        }
    }

    #[test]
    fn reports_singularity() {
        let mut m = BandedMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(1, 0, 1.0);
        m.set(2, 2, 1.0);
        assert_eq!(m.solve(vec![1.0, 1.0, 1.0]), Err(SingularMatrix { pivot: 1 }));
    }
}
