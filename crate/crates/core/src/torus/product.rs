use std::borrow::Cow;

use nalgebra::DMatrix;

use super::automorphism::{IntMatrix, ToralAutomorphism};
use super::point::TorusPoint;
use super::splitting::HyperbolicSplitting;
use super::{HyperbolicMap, TorusError};

/// `F(x, y) = (A x, B y)` on `T^2 × T^2`, where `A` dominates `B`.
#[derive(Debug, Clone)]
pub struct ProductSystem {
    factor_a: ToralAutomorphism,
    factor_b: ToralAutomorphism,
    combined: ToralAutomorphism,
}

impl ProductSystem {
    /// Requires `λ_u(A) > λ_u(B)` and `λ_s(A) < λ_s(B)`.
    pub fn new(factor_a: ToralAutomorphism, factor_b: ToralAutomorphism) -> Result<Self, TorusError> {
        if factor_a.matrix().dim() != 2 || factor_b.matrix().dim() != 2 {
            return Err(TorusError::ProductFactorDimension);
        }
        let sa = factor_a.splitting();
        let sb = factor_b.splitting();
        if !(sa.lambda_u() > sb.lambda_u() && sa.lambda_s() < sb.lambda_s()) {
            return Err(TorusError::NotDominated {
                lambda_u_a: sa.lambda_u(),
                lambda_u_b: sb.lambda_u(),
                lambda_s_a: sa.lambda_s(),
                lambda_s_b: sb.lambda_s(),
            });
        }
        let combined =
            ToralAutomorphism::new(IntMatrix::block_diagonal(factor_a.matrix(), factor_b.matrix()))?;
        Ok(ProductSystem {
            factor_a,
            factor_b,
            combined,
        })
    }

    /// Cat map dominating the Fibonacci map.
    pub fn default_dominated() -> Self {
        Self::new(ToralAutomorphism::cat_map(), ToralAutomorphism::fibonacci_map())
            .expect("default factors are dominated")
    }

    pub fn factor_a(&self) -> &ToralAutomorphism {
        &self.factor_a
    }

    pub fn factor_b(&self) -> &ToralAutomorphism {
        &self.factor_b
    }

    /// The block-diagonal automorphism of `T^4`.
    pub fn combined(&self) -> &ToralAutomorphism {
        &self.combined
    }

    pub fn is_dominated(&self) -> bool {
        let sa = self.factor_a.splitting();
        let sb = self.factor_b.splitting();
        sa.lambda_u() > sb.lambda_u() && sa.lambda_s() < sb.lambda_s()
    }

    pub fn join(x: &TorusPoint, y: &TorusPoint) -> TorusPoint {
        let mut c = x.coords().to_vec();
        c.extend_from_slice(y.coords());
        TorusPoint::new(c)
    }

    pub fn split(p: &TorusPoint) -> (TorusPoint, TorusPoint) {
        let (a, b) = p.coords().split_at(2);
        (TorusPoint::new(a.to_vec()), TorusPoint::new(b.to_vec()))
    }
}

impl HyperbolicMap for ProductSystem {
    fn dim(&self) -> usize {
        4
    }
    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        self.combined.forward(p)
    }
    fn backward(&self, p: &TorusPoint) -> TorusPoint {
        self.combined.backward(p)
    }
    fn lift_forward(&self, x: &[f64]) -> Vec<f64> {
        self.combined.lift_forward(x)
    }
    fn lift_backward(&self, x: &[f64]) -> Vec<f64> {
        self.combined.lift_backward(x)
    }
    fn jacobian(&self, p: &TorusPoint) -> DMatrix<f64> {
        self.combined.jacobian(p)
    }
    fn splitting_at(&self, p: &TorusPoint) -> Cow<'_, HyperbolicSplitting> {
        self.combined.splitting_at(p)
    }
    fn lipschitz(&self) -> f64 {
        self.combined.lipschitz()
    }
    fn as_linear(&self) -> Option<&ToralAutomorphism> {
        Some(&self.combined)
    }
    fn enclosure_padding(&self, cell_width: f64) -> f64 {
        self.combined.enclosure_padding(cell_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_product_is_dominated() {
        let f = ProductSystem::default_dominated();
        assert!(f.is_dominated());
        let s = f.combined().splitting();
        assert_eq!(s.stable_dim(), 2);
        assert_eq!(s.unstable_dim(), 2);
        // weakest rates come from B
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.lambda_u() - phi).abs() < 1e-12);
        assert!((s.lambda_s() - 1.0 / phi).abs() < 1e-12);
    }

    #[test]
    fn swapped_factors_are_rejected() {
        let err = ProductSystem::new(ToralAutomorphism::fibonacci_map(), ToralAutomorphism::cat_map())
            .unwrap_err();
        assert!(matches!(err, TorusError::NotDominated { .. }));
    }

    #[test]
    fn acts_blockwise() {
        let f = ProductSystem::default_dominated();
        let x = TorusPoint::new(vec![0.5, 0.5]);
        let y = TorusPoint::new(vec![0.25, 0.5]);
        let img = f.forward(&ProductSystem::join(&x, &y));
        let (ix, iy) = ProductSystem::split(&img);
        assert_eq!(ix, f.factor_a().forward(&x));
        assert_eq!(iy, f.factor_b().forward(&y));
    }
}
