//! Rational points on the torus and exact periodic-point enumeration.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use super::automorphism::{IntMatrix, ToralAutomorphism};
use super::point::TorusPoint;

pub type Rational = Ratio<i64>;

fn frac(x: Rational) -> Rational {
    x - x.floor()
}

/// A torus point with rational coordinates, reduced into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(Vec<Rational>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RationalPoint(coords.into_iter().map(frac).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_torus(&self) -> TorusPoint {
        TorusPoint::new(
            self.0
                .iter()
                .map(|x| x.to_f64().expect("finite rational"))
                .collect::<Vec<_>>(),
        )
    }

    pub fn apply(&self, m: &IntMatrix) -> RationalPoint {
        let n = m.dim();
        RationalPoint::new(
            (0..n)
                .map(|i| {
                    (0..n).fold(Rational::zero(), |acc, j| {
                        acc + self.0[j] * Rational::from_integer(m.get(i, j))
                    })
                })
                .collect(),
        )
    }
}

impl ToralAutomorphism {
    pub fn apply_exact(&self, p: &RationalPoint) -> RationalPoint {
        p.apply(self.matrix())
    }

    pub fn apply_inverse_exact(&self, p: &RationalPoint) -> RationalPoint {
        p.apply(self.inverse_matrix())
    }

    /// All points fixed by `A^n`, i.e. `(A^n - I)⁻¹ Z^d / Z^d`, sorted.
    pub fn points_fixed_by_power(&self, n: u32) -> Vec<RationalPoint> {
        let d = self.matrix().dim();
        let shifted = self.matrix().pow(n).sub_identity();
        let det = shifted.determinant().unsigned_abs() as usize;
        let Some(inv) = shifted.rational_inverse() else {
            return Vec::new();
        };
        // The solution group is generated by the columns of (A^n - I)^{-1};
        // each has order dividing |det|.
        let mut found = std::collections::BTreeSet::new();
        found.insert(RationalPoint::new(vec![Rational::zero(); d]));
        let columns: Vec<RationalPoint> = (0..d)
            .map(|j| RationalPoint::new((0..d).map(|i| inv[i][j]).collect()))
            .collect();
        for col in columns {
            let current: Vec<RationalPoint> = found.iter().cloned().collect();
            for p in current {
                let mut q = p.clone();
                for _ in 0..det {
                    q = RationalPoint::new(q.0.iter().zip(&col.0).map(|(a, b)| *a + *b).collect());
                    found.insert(q.clone());
                }
            }
        }
        found.into_iter().collect()
    }

    /// Points whose least period under the map is exactly `n`.
    pub fn periodic_points(&self, n: u32) -> Vec<RationalPoint> {
        self.points_fixed_by_power(n)
            .into_iter()
            .filter(|p| {
                (1..n).all(|m| {
                    let mut q = p.clone();
                    for _ in 0..m {
                        q = self.apply_exact(&q);
                    }
                    q != *p
                })
            })
            .collect()
    }

    /// The orbit of a periodic point, starting at the point itself.
    pub fn exact_orbit(&self, p: &RationalPoint) -> Vec<RationalPoint> {
        let mut orbit = vec![p.clone()];
        let mut q = self.apply_exact(p);
        while q != *p && orbit.len() < 100_000 {
            orbit.push(q.clone());
            q = self.apply_exact(&q);
        }
        orbit
    }
}
