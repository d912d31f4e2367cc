use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::Serialize;

use super::point::{wrap_unit, TorusPoint};
use super::splitting::{compute_splitting, HyperbolicSplitting};
use super::{HyperbolicMap, TorusError};

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, TorusError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(TorusError::NotSquare {
                rows: dim,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Ok(IntMatrix {
            dim,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j) as f64)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.dim;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        IntMatrix { dim: n, entries }
    }

    pub fn pow(&self, e: u32) -> IntMatrix {
        let mut out = IntMatrix::identity(self.dim);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn sub_identity(&self) -> IntMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] -= 1;
        }
        out
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i64 {
        let n = self.dim;
        let mut a: Vec<i128> = self.entries.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                    return 0;
                };
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        (sign * a[n * n - 1]) as i64
    }

    /// Exact inverse over the rationals.
    pub fn rational_inverse(&self) -> Option<Vec<Vec<Ratio<i64>>>> {
        let n = self.dim;
        let mut a: Vec<Vec<Ratio<i64>>> = (0..n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        if j < n {
                            Ratio::from_integer(self.get(i, j))
                        } else if j - n == i {
                            Ratio::from_integer(1)
                        } else {
                            Ratio::from_integer(0)
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r][col] != Ratio::from_integer(0))?;
            a.swap(col, pivot);
            let p = a[col][col];
            for x in a[col].iter_mut() {
                *x /= p;
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col {
                    let f = row[col];
                    if f != Ratio::from_integer(0) {
                        for (x, y) in row.iter_mut().zip(&pivot_row) {
                            *x -= f * y;
                        }
                    }
                }
            }
        }
        Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Inverse when it is again an integer matrix (|det| = 1).
    pub fn integer_inverse(&self) -> Option<IntMatrix> {
        let inv = self.rational_inverse()?;
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for row in inv {
            for x in row {
                if !x.is_integer() {
                    return None;
                }
                entries.push(x.to_integer());
            }
        }
        Some(IntMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn block_diagonal(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let n = a.dim + b.dim;
        let mut entries = vec![0; n * n];
        for i in 0..a.dim {
            for j in 0..a.dim {
                entries[i * n + j] = a.get(i, j);
            }
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                entries[(a.dim + i) * n + a.dim + j] = b.get(i, j);
            }
        }
        IntMatrix { dim: n, entries }
    }

    fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let row = &self.entries[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
            })
            .collect()
    }
}

/// A hyperbolic automorphism of `T^d` given by a unimodular integer matrix.
#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    matrix: IntMatrix,
    inverse: IntMatrix,
    determinant: i64,
    splitting: HyperbolicSplitting,
    forward_norm: f64,
    inverse_norm: f64,
}

impl ToralAutomorphism {
    pub fn new(matrix: IntMatrix) -> Result<Self, TorusError> {
        if matrix.dim() < 2 {
            return Err(TorusError::DimensionTooSmall(matrix.dim()));
        }
        let determinant = matrix.determinant();
        if determinant.abs() != 1 {
            return Err(TorusError::NotUnimodular(determinant));
        }
        let inverse = matrix
            .integer_inverse()
            .ok_or(TorusError::NotUnimodular(determinant))?;
        let splitting = compute_splitting(&matrix.to_f64())?;
        let forward_norm = matrix.to_f64().singular_values().max();
        let inverse_norm = inverse.to_f64().singular_values().max();
        Ok(ToralAutomorphism {
            matrix,
            inverse,
            determinant,
            splitting,
            forward_norm,
            inverse_norm,
        })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, TorusError> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    /// The cat map `[[2,1],[1,1]]`.
    pub fn cat_map() -> Self {
        Self::from_rows(&[vec![2, 1], vec![1, 1]]).expect("cat map is hyperbolic")
    }

    /// `[[1,1],[1,0]]`, the weaker factor of the default dominated product.
    pub fn fibonacci_map() -> Self {
        Self::from_rows(&[vec![1, 1], vec![1, 0]]).expect("fibonacci map is hyperbolic")
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &IntMatrix {
        &self.inverse
    }

    pub fn determinant(&self) -> i64 {
        self.determinant
    }

    /// Spectral norm of the matrix.
    pub fn operator_norm(&self) -> f64 {
        self.forward_norm
    }

    pub fn inverse_operator_norm(&self) -> f64 {
        self.inverse_norm
    }

    pub fn apply(&self, p: &TorusPoint) -> Result<TorusPoint, TorusError> {
        self.check_dim(p)?;
        Ok(self.forward(p))
    }

    pub fn apply_inverse(&self, p: &TorusPoint) -> Result<TorusPoint, TorusError> {
        self.check_dim(p)?;
        Ok(self.backward(p))
    }

    /// Linear action on covering-space vectors.
    pub fn apply_vector(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.apply_f64(v)
    }

    pub fn apply_inverse_vector(&self, v: &[f64]) -> Vec<f64> {
        self.inverse.apply_f64(v)
    }

    fn check_dim(&self, p: &TorusPoint) -> Result<(), TorusError> {
        if p.dim() != self.matrix.dim() {
            return Err(TorusError::DimensionMismatch {
                expected: self.matrix.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }
}

impl HyperbolicMap for ToralAutomorphism {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        TorusPoint::new(
            self.matrix
                .apply_f64(p.coords())
                .into_iter()
                .map(wrap_unit)
                .collect::<Vec<_>>(),
        )
    }

    fn backward(&self, p: &TorusPoint) -> TorusPoint {
        TorusPoint::new(
            self.inverse
                .apply_f64(p.coords())
                .into_iter()
                .map(wrap_unit)
                .collect::<Vec<_>>(),
        )
    }

    fn lift_forward(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.apply_f64(x)
    }

    fn lift_backward(&self, x: &[f64]) -> Vec<f64> {
        self.inverse.apply_f64(x)
    }

    fn jacobian(&self, _p: &TorusPoint) -> DMatrix<f64> {
        self.matrix.to_f64()
    }

    fn splitting_at(&self, _p: &TorusPoint) -> std::borrow::Cow<'_, HyperbolicSplitting> {
        std::borrow::Cow::Borrowed(&self.splitting)
    }

    fn lipschitz(&self) -> f64 {
        self.forward_norm.max(self.inverse_norm)
    }

    fn as_linear(&self) -> Option<&ToralAutomorphism> {
        Some(self)
    }

    fn enclosure_padding(&self, _cell_width: f64) -> f64 {
        // Images of boxes are parallelepipeds spanned by the corner images.
        1e-12
    }
}

impl ToralAutomorphism {
    pub fn splitting(&self) -> &HyperbolicSplitting {
        &self.splitting
    }
}
