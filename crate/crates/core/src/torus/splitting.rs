use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::TorusError;

/// Eigenvalues whose modulus is this close to 1 are treated as neutral.
pub const NEUTRAL_TOL: f64 = 1e-9;
const CLUSTER_TOL: f64 = 1e-7;

/// `E^s ⊕ E^u` for a linear hyperbolic map, with the adapted frame.
///
/// The frame `P` has the stable basis in its leading columns and the unstable
/// basis after it. The adapted norm of a vector `v` is the Euclidean norm of
/// `P⁻¹ v`; in that norm the stable block contracts by at most `lambda_s` and the
/// inverse of the unstable block by at most `1 / lambda_u`.
#[derive(Debug, Clone)]
pub struct HyperbolicSplitting {
    stable_basis: Vec<Vec<f64>>,
    unstable_basis: Vec<Vec<f64>>,
    lambda_s: f64,
    lambda_u: f64,
    distortion: f64,
    eigenvalues: Vec<Complex64>,
    frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
    stable_block: DMatrix<f64>,
    unstable_block: DMatrix<f64>,
    unstable_block_inv: DMatrix<f64>,
}

/// Serializable summary of a splitting.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingSummary {
    pub stable_dim: usize,
    pub unstable_dim: usize,
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub distortion: f64,
    pub stable_basis: Vec<Vec<f64>>,
    pub unstable_basis: Vec<Vec<f64>>,
}

impl HyperbolicSplitting {
    pub fn stable_basis(&self) -> &[Vec<f64>] {
        &self.stable_basis
    }

    pub fn unstable_basis(&self) -> &[Vec<f64>] {
        &self.unstable_basis
    }

    pub fn stable_dim(&self) -> usize {
        self.stable_basis.len()
    }

    pub fn unstable_dim(&self) -> usize {
        self.unstable_basis.len()
    }

    pub fn dim(&self) -> usize {
        self.stable_dim() + self.unstable_dim()
    }

    /// Largest modulus among stable eigenvalues.
    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }

    /// Smallest modulus among unstable eigenvalues.
    pub fn lambda_u(&self) -> f64 {
        self.lambda_u
    }

    /// `C = cond(P)`: converts adapted-norm bounds into ambient-norm bounds.
    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_inv(&self) -> &DMatrix<f64> {
        &self.frame_inv
    }

    /// Restriction of the map to `E^s` in adapted coordinates.
    pub fn stable_block(&self) -> &DMatrix<f64> {
        &self.stable_block
    }

    pub fn unstable_block(&self) -> &DMatrix<f64> {
        &self.unstable_block
    }

    pub fn unstable_block_inv(&self) -> &DMatrix<f64> {
        &self.unstable_block_inv
    }

    /// Adapted coordinates `P⁻¹ v`.
    pub fn to_adapted(&self, v: &[f64]) -> DVector<f64> {
        &self.frame_inv * DVector::from_column_slice(v)
    }

    pub fn from_adapted(&self, c: &DVector<f64>) -> Vec<f64> {
        (&self.frame * c).as_slice().to_vec()
    }

    pub fn adapted_norm(&self, v: &[f64]) -> f64 {
        self.to_adapted(v).norm()
    }

    /// Split `v = v_s + v_u` along `E^s ⊕ E^u` (ambient coordinates).
    pub fn decompose(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.to_adapted(v);
        let ds = self.stable_dim();
        let mut cs = c.clone();
        let mut cu = c;
        for i in 0..cs.len() {
            if i < ds {
                cu[i] = 0.0;
            } else {
                cs[i] = 0.0;
            }
        }
        (self.from_adapted(&cs), self.from_adapted(&cu))
    }

    /// The linear shadowing constant `C · (1/(1-λ_s) + 1/(λ_u-1))`.
    pub fn shadowing_constant(&self) -> f64 {
        self.distortion * self.adapted_shadowing_constant()
    }

    /// Same constant measured in the adapted norm (where `C = 1`).
    pub fn adapted_shadowing_constant(&self) -> f64 {
        1.0 / (1.0 - self.lambda_s) + 1.0 / (self.lambda_u - 1.0)
    }

    pub fn summary(&self) -> SplittingSummary {
        SplittingSummary {
            stable_dim: self.stable_dim(),
            unstable_dim: self.unstable_dim(),
            lambda_s: self.lambda_s,
            lambda_u: self.lambda_u,
            distortion: self.distortion,
            stable_basis: self.stable_basis.clone(),
            unstable_basis: self.unstable_basis.clone(),
        }
    }
}

/// Real invariant subspace belonging to one eigenvalue cluster.
struct Block {
    modulus: f64,
    vectors: Vec<Vec<f64>>,
}

fn singular_null_space_real(m: &DMatrix<f64>, count: usize, scale: f64) -> Option<Vec<Vec<f64>>> {
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut out = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        if svd.singular_values[i] > 1e-6 * scale {
            return None;
        }
        let row: Vec<f64> = v_t.row(i).iter().copied().collect();
        out.push(row);
    }
    Some(out)
}

fn singular_null_space_complex(
    m: &DMatrix<Complex64>,
    count: usize,
    scale: f64,
) -> Option<Vec<Vec<Complex64>>> {
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut out = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        if svd.singular_values[i] > 1e-6 * scale {
            return None;
        }
        // rows of V^H are conjugated right singular vectors
        let row: Vec<Complex64> = v_t.row(i).iter().map(|z| z.conj()).collect();
        out.push(row);
    }
    Some(out)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    // deterministic sign: first significant entry positive
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigen-decompose an integer matrix into its stable and unstable subspaces.
///
/// Real eigenvalues contribute unit eigenvectors. A complex pair `a ± ib`
/// contributes the real and imaginary parts of one eigenvector, scaled jointly
/// so that the block stays `|λ|` times a rotation in adapted coordinates.
pub fn compute_splitting(matrix: &DMatrix<f64>) -> Result<HyperbolicSplitting, TorusError> {
    let n = matrix.nrows();
    if n != matrix.ncols() || n == 0 {
        return Err(TorusError::NotSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    let eigenvalues: Vec<Complex64> = matrix
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    if let Some(bad) = eigenvalues
        .iter()
        .find(|z| (z.norm() - 1.0).abs() < NEUTRAL_TOL)
    {
        return Err(TorusError::NotHyperbolic {
            modulus: bad.norm(),
        });
    }
    let scale = matrix.norm().max(1.0);

    // Group eigenvalues into clusters; complex pairs keep the im > 0 member.
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in &eigenvalues {
        let z = if z.im.abs() <= CLUSTER_TOL {
            Complex64::new(z.re, 0.0)
        } else {
            *z
        };
        if z.im < 0.0 {
            continue;
        }
        if let Some(c) = clusters
            .iter_mut()
            .find(|(w, _)| (w - z).norm() < CLUSTER_TOL * scale)
        {
            c.1 += 1;
        } else {
            clusters.push((z, 1));
        }
    }

    let mut blocks = Vec::new();
    for (lambda, mult) in clusters {
        if lambda.im == 0.0 {
            let shifted = matrix - DMatrix::<f64>::identity(n, n) * lambda.re;
            let mut vecs = singular_null_space_real(&shifted, mult, scale)
                .ok_or(TorusError::NotDiagonalizable)?;
            for v in vecs.iter_mut() {
                normalize(v);
            }
            blocks.push(Block {
                modulus: lambda.re.abs(),
                vectors: vecs,
            });
        } else {
            let mc = matrix.map(|x| Complex64::new(x, 0.0));
            let shifted = mc - DMatrix::<Complex64>::identity(n, n) * lambda;
            let vecs = singular_null_space_complex(&shifted, mult, scale)
                .ok_or(TorusError::NotDiagonalizable)?;
            let mut real_vecs = Vec::new();
            for v in vecs {
                // rotate the phase so that Re v ⟂ Im v
                let s: Complex64 = v.iter().map(|z| z * z).sum();
                let phase = Complex64::from_polar(1.0, -s.arg() / 2.0);
                let v: Vec<Complex64> = v.iter().map(|z| z * phase).collect();
                let mut re: Vec<f64> = v.iter().map(|z| z.re).collect();
                let mut im: Vec<f64> = v.iter().map(|z| z.im).collect();
                let nr = re.iter().map(|x| x * x).sum::<f64>().sqrt();
                let ni = im.iter().map(|x| x * x).sum::<f64>().sqrt();
                let joint = nr.max(ni);
                re.iter_mut().for_each(|x| *x /= joint);
                im.iter_mut().for_each(|x| *x /= joint);
                real_vecs.push(re);
                real_vecs.push(im);
            }
            blocks.push(Block {
                modulus: lambda.norm(),
                vectors: real_vecs,
            });
        }
    }

    // Stable blocks first, then unstable, each ordered by modulus.
    blocks.sort_by(|a, b| a.modulus.total_cmp(&b.modulus));
    let mut stable_basis = Vec::new();
    let mut unstable_basis = Vec::new();
    let mut lambda_s: f64 = 0.0;
    let mut lambda_u = f64::INFINITY;
    for b in blocks {
        if b.modulus < 1.0 {
            lambda_s = lambda_s.max(b.modulus);
            stable_basis.extend(b.vectors);
        } else {
            lambda_u = lambda_u.min(b.modulus);
            unstable_basis.extend(b.vectors);
        }
    }
    if stable_basis.len() + unstable_basis.len() != n {
        return Err(TorusError::NotDiagonalizable);
    }
    if stable_basis.is_empty() || unstable_basis.is_empty() {
        // |det| = 1 forces both to be present; anything else is degenerate input.
        return Err(TorusError::NotHyperbolic {
            modulus: if stable_basis.is_empty() {
                lambda_u
            } else {
                lambda_s
            },
        });
    }

    let frame = DMatrix::from_fn(n, n, |i, j| {
        if j < stable_basis.len() {
            stable_basis[j][i]
        } else {
            unstable_basis[j - stable_basis.len()][i]
        }
    });
    let frame_inv = frame
        .clone()
        .try_inverse()
        .ok_or(TorusError::NotDiagonalizable)?;
    let sv = frame.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 1e-10 * smax {
        return Err(TorusError::NotDiagonalizable);
    }
    let distortion = (smax / smin).max(1.0);

    let adapted = &frame_inv * matrix * &frame;
    let ds = stable_basis.len();
    let du = n - ds;
    let stable_block = adapted.view((0, 0), (ds, ds)).into_owned();
    let unstable_block = adapted.view((ds, ds), (du, du)).into_owned();
    let unstable_block_inv = unstable_block
        .clone()
        .try_inverse()
        .ok_or(TorusError::NotDiagonalizable)?;

    Ok(HyperbolicSplitting {
        stable_basis,
        unstable_basis,
        lambda_s,
        lambda_u,
        distortion,
        eigenvalues,
        frame,
        frame_inv,
        stable_block,
        unstable_block,
        unstable_block_inv,
    })
}
