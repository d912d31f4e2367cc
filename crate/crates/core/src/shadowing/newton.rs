use nalgebra::{DMatrix, DVector};

use super::banded::BandedMatrix;
use super::{check_defect, PseudoOrbit, ShadowError, ShadowResult};
use crate::torus::{wrap_centered, HyperbolicMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 20,
        }
    }
}

/// Newton iteration on the orbit equations `f(y_j) = y_{j+1}`.
///
/// Unknowns are the displacements `z_j = y_j - x_j`. Segments add the boundary
/// rows "stable adapted part of `z_l` is 0" and "unstable adapted part of `z_m`
/// is 0", which pick the same solution as the linear series; periodic orbits
/// close cyclically and need no boundary rows.
pub fn newton_shadow<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
    opts: NewtonOptions,
) -> Result<ShadowResult, ShadowError> {
    newton_shadow_from(map, po, None, opts)
}

/// [`newton_shadow`] started from the displacements `guess` instead of zero.
pub fn newton_shadow_from<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
    guess: Option<&[Vec<f64>]>,
    opts: NewtonOptions,
) -> Result<ShadowResult, ShadowError> {
    check_defect(map, po)?;
    let d = map.dim();
    let n = po.len();
    let mut z: Vec<Vec<f64>> = match guess {
        Some(g) => {
            if g.len() != n || g.iter().any(|v| v.len() != d) {
                return Err(ShadowError::DimensionMismatch {
                    expected: n * d,
                    found: g.iter().map(Vec::len).sum(),
                });
            }
            g.to_vec()
        }
        None => vec![vec![0.0; d]; n],
    };
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        let step = if po.is_periodic() {
            periodic_step(map, po, &z)?
        } else {
            segment_step(map, po, &z)?
        };
        for (zj, sj) in z.iter_mut().zip(step.chunks(d)) {
            for (a, b) in zj.iter_mut().zip(sj) {
                *a += b;
            }
        }
        iterations += 1;
        residual = max_residual(map, po, &z);
        if residual < opts.tol {
            break;
        }
    }
    if !(residual < opts.tol) {
        return Err(ShadowError::NotConverged {
            iterations,
            residual,
        });
    }
    Ok(ShadowResult::assemble(map, po, &z, true, iterations))
}

fn lifted(po: &PseudoOrbit, z: &[Vec<f64>], j: usize) -> Vec<f64> {
    po.points()[j]
        .coords()
        .iter()
        .zip(&z[j])
        .map(|(a, b)| a + b)
        .collect()
}

/// `r_j = wrap(f(y_j) - y_{j+1})` for every step of the window.
fn residuals<M: HyperbolicMap + ?Sized>(map: &M, po: &PseudoOrbit, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = po.len();
    let steps = if po.is_periodic() { n } else { n - 1 };
    (0..steps)
        .map(|j| {
            let image = map.lift_forward(&lifted(po, z, j));
            let next = lifted(po, z, (j + 1) % n);
            image
                .iter()
                .zip(&next)
                .map(|(a, b)| wrap_centered(a - b))
                .collect()
        })
        .collect()
}

fn max_residual<M: HyperbolicMap + ?Sized>(map: &M, po: &PseudoOrbit, z: &[Vec<f64>]) -> f64 {
    residuals(map, po, z)
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn segment_step<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
    z: &[Vec<f64>],
) -> Result<Vec<f64>, ShadowError> {
    let d = map.dim();
    let n = po.len();
    let first = map.splitting_at(&po.points()[0]);
    let last = map.splitting_at(&po.points()[n - 1]);
    let ds = first.stable_dim();
    let kl = ds + d - 1;
    let ku = (2 * d - 1 - ds).max(d - 1);
    let size = n * d;
    let mut a = BandedMatrix::zeros(size, kl, ku);
    let mut rhs = vec![0.0; size];

    // stable rows of P⁻¹ z_0 vanish
    let pinv0 = first.frame_inv();
    for k in 0..ds {
        let mut lhs = 0.0;
        for c in 0..d {
            a.set(k, c, pinv0[(k, c)]);
            lhs += pinv0[(k, c)] * z[0][c];
        }
        rhs[k] = -lhs;
    }
    let res = residuals(map, po, z);
    for j in 0..n - 1 {
        let y = po.points()[j].translate(&z[j]);
        let jac = map.jacobian(&y);
        let row0 = ds + j * d;
        for i in 0..d {
            for c in 0..d {
                a.set(row0 + i, j * d + c, jac[(i, c)]);
            }
            a.set(row0 + i, (j + 1) * d + i, -1.0);
            rhs[row0 + i] = -res[j][i];
        }
    }
    // unstable rows of P⁻¹ z_{n-1} vanish
    let pinv1 = last.frame_inv();
    let du = last.unstable_dim();
    let base_row = ds + (n - 1) * d;
    let base_col = (n - 1) * d;
    for k in 0..du {
        let mut lhs = 0.0;
        for c in 0..d {
            a.set(base_row + k, base_col + c, pinv1[(ds + k, c)]);
            lhs += pinv1[(ds + k, c)] * z[n - 1][c];
        }
        rhs[base_row + k] = -lhs;
    }
    a.solve(rhs).map_err(|e| ShadowError::Singular(e.pivot))
}

fn periodic_step<M: HyperbolicMap + ?Sized>(
    map: &M,
    po: &PseudoOrbit,
    z: &[Vec<f64>],
) -> Result<Vec<f64>, ShadowError> {
    let d = map.dim();
    let n = po.len();
    let size = n * d;
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    let res = residuals(map, po, z);
    for j in 0..n {
        let y = po.points()[j].translate(&z[j]);
        let jac = map.jacobian(&y);
        let next = (j + 1) % n;
        for i in 0..d {
            for c in 0..d {
                a[(j * d + i, j * d + c)] += jac[(i, c)];
            }
            a[(j * d + i, next * d + i)] -= 1.0;
            rhs[j * d + i] = -res[j][i];
        }
    }
    a.lu()
        .solve(&rhs)
        .map(|v| v.as_slice().to_vec())
        .ok_or(ShadowError::Singular(0))
}
