use std::borrow::Cow;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::automorphism::ToralAutomorphism;
use super::point::TorusPoint;
use super::product::ProductSystem;
use super::splitting::HyperbolicSplitting;
use super::{HyperbolicMap, TorusError};

/// Text description of a system, as read from a TOML config.
///
/// ```toml
/// [system]
/// kind = "product"
/// a = [[2, 1], [1, 1]]
/// b = [[1, 1], [1, 0]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    Automorphism { matrix: Vec<Vec<i64>> },
    Product { a: Vec<Vec<i64>>, b: Vec<Vec<i64>> },
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Automorphism {
            matrix: vec![vec![2, 1], vec![1, 1]],
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<System, TorusError> {
        match self {
            SystemSpec::Automorphism { matrix } => {
                Ok(System::Automorphism(ToralAutomorphism::from_rows(matrix)?))
            }
            SystemSpec::Product { a, b } => Ok(System::Product(ProductSystem::new(
                ToralAutomorphism::from_rows(a)?,
                ToralAutomorphism::from_rows(b)?,
            )?)),
        }
    }

    pub fn default_product() -> Self {
        SystemSpec::Product {
            a: vec![vec![2, 1], vec![1, 1]],
            b: vec![vec![1, 1], vec![1, 0]],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, TorusError> {
        #[derive(Deserialize)]
        struct Wrapper {
            system: SystemSpec,
        }
        toml::from_str::<Wrapper>(text)
            .map(|w| w.system)
            .map_err(|e| TorusError::Config(e.to_string()))
    }
}

/// Any of the shipped systems.
#[derive(Debug, Clone)]
pub enum System {
    Automorphism(ToralAutomorphism),
    Product(ProductSystem),
}

impl System {
    pub fn cat_map() -> Self {
        System::Automorphism(ToralAutomorphism::cat_map())
    }

    pub fn linear(&self) -> &ToralAutomorphism {
        match self {
            System::Automorphism(a) => a,
            System::Product(p) => p.combined(),
        }
    }
}

impl HyperbolicMap for System {
    fn dim(&self) -> usize {
        self.linear().dim()
    }
    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        self.linear().forward(p)
    }
    fn backward(&self, p: &TorusPoint) -> TorusPoint {
        self.linear().backward(p)
    }
    fn lift_forward(&self, x: &[f64]) -> Vec<f64> {
        self.linear().lift_forward(x)
    }
    fn lift_backward(&self, x: &[f64]) -> Vec<f64> {
        self.linear().lift_backward(x)
    }
    fn jacobian(&self, p: &TorusPoint) -> DMatrix<f64> {
        self.linear().jacobian(p)
    }
    fn splitting_at(&self, p: &TorusPoint) -> Cow<'_, HyperbolicSplitting> {
        self.linear().splitting_at(p)
    }
    fn lipschitz(&self) -> f64 {
        self.linear().lipschitz()
    }
    fn as_linear(&self) -> Option<&ToralAutomorphism> {
        Some(self.linear())
    }
    fn enclosure_padding(&self, cell_width: f64) -> f64 {
        self.linear().enclosure_padding(cell_width)
    }
}
