//! Exact brackets for hyperbolic automorphisms of `T^2`.
//!
//! The eigenvalues of an integer 2×2 matrix with trace `t` and determinant
//! `e` are `(t ± √D)/2` with `D = t² − 4e`, so the splitting projectors and
//! every bracket of dyadic (hence `f64`) points live in `Q(√D)`. Orbits and
//! distances are then computed with no rounding at all.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::MaxError;
use crate::torus::{HyperbolicMap, ToralAutomorphism, TorusPoint};

/// `(a + b√d) / den` with integer parts, `den > 0` and a fixed non-square
/// `d > 0`. Fractions are left unreduced: every orbit keeps the denominator
/// of its starting point, so reduction would only cost gcds.
#[derive(Debug, Clone)]
pub struct Surd {
    a: BigInt,
    b: BigInt,
    den: BigInt,
    d: i64,
}

impl PartialEq for Surd {
    fn eq(&self, o: &Surd) -> bool {
        self.d == o.d && &self.a * &o.den == &o.a * &self.den && &self.b * &o.den == &o.b * &self.den
    }
}

impl Eq for Surd {}

impl Surd {
    pub fn rational(r: BigRational, d: i64) -> Self {
        let (a, den) = r.into_raw();
        let (a, den) = if den.is_negative() { (-a, -den) } else { (a, den) };
        Surd {
            a,
            b: BigInt::zero(),
            den,
            d,
        }
    }

    pub fn integer(n: i64, d: i64) -> Self {
        Surd {
            a: BigInt::from(n),
            b: BigInt::zero(),
            den: BigInt::one(),
            d,
        }
    }

    /// The exact value of a finite `f64`.
    pub fn from_f64(x: f64, d: i64) -> Option<Self> {
        BigRational::from_float(x).map(|r| Surd::rational(r, d))
    }

    /// `√d`.
    pub fn root(d: i64) -> Self {
        Surd {
            a: BigInt::zero(),
            b: BigInt::one(),
            den: BigInt::one(),
            d,
        }
    }

    /// Rational and irrational parts.
    pub fn parts(&self) -> (BigRational, BigRational) {
        (
            BigRational::new(self.a.clone(), self.den.clone()),
            BigRational::new(self.b.clone(), self.den.clone()),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn float_parts(&self) -> (f64, f64) {
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        let f = |n: &BigInt| n.to_f64().unwrap_or(f64::NAN) / den;
        (f(&self.a), f(&self.b))
    }

    /// Exact sign. The float value decides when it clears its own error
    /// bound; otherwise compare `a²` with `d b²`.
    pub fn signum(&self) -> Ordering {
        let (fa, fb) = self.float_parts();
        let r = (self.d as f64).sqrt();
        let value = fa + fb * r;
        let err = 1e-12 * (fa.abs() + fb.abs() * r);
        if value.is_finite() && value.abs() > err {
            return value.partial_cmp(&0.0).expect("finite");
        }
        let zero = BigInt::zero();
        match (self.a.cmp(&zero), self.b.cmp(&zero)) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, _) => {
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * BigInt::from(self.d);
                match lhs.cmp(&rhs) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (fa, fb) = self.float_parts();
        fa + fb * (self.d as f64).sqrt()
    }

    fn minus_integer(&self, k: &BigInt) -> Surd {
        Surd {
            a: &self.a - k * &self.den,
            b: self.b.clone(),
            den: self.den.clone(),
            d: self.d,
        }
    }

    pub fn floor(&self) -> BigInt {
        let mut k = BigInt::from(self.to_f64().floor() as i64);
        let at = |k: &BigInt| self.minus_integer(k).signum();
        while at(&k) == Ordering::Less {
            k -= 1;
        }
        while at(&(&k + 1)) != Ordering::Less {
            k += 1;
        }
        k
    }

    /// Representative of `self mod 1` in `[-1/2, 1/2)`.
    pub fn centered(&self) -> Surd {
        let twice = Surd {
            a: &self.a * 2 + &self.den,
            b: &self.b * 2,
            den: &self.den * 2,
            d: self.d,
        };
        self.minus_integer(&twice.floor())
    }

    /// Representative of `self mod 1` in `[0, 1)`.
    pub fn fract(&self) -> Surd {
        self.minus_integer(&self.floor())
    }

    pub fn inverse(&self) -> Option<Surd> {
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        if norm.is_zero() {
            return None;
        }
        let sign = if norm.is_negative() { -BigInt::one() } else { BigInt::one() };
        Some(Surd {
            a: &self.a * &self.den * &sign,
            b: -(&self.b * &self.den * &sign),
            den: norm * sign,
            d: self.d,
        })
    }

    pub fn pow(&self, n: u32) -> Surd {
        (0..n).fold(Surd::integer(1, self.d), |acc, _| &acc * self)
    }

    pub fn abs(&self) -> Surd {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, k: i64) -> Surd {
        Surd {
            a: &self.a * k,
            b: &self.b * k,
            den: self.den.clone(),
            d: self.d,
        }
    }
}

fn combine(x: &Surd, y: &Surd, sub: bool) -> Surd {
    debug_assert_eq!(x.d, y.d);
    let op = |p: BigInt, q: BigInt| if sub { p - q } else { p + q };
    if x.den == y.den {
        return Surd {
            a: op(x.a.clone(), y.a.clone()),
            b: op(x.b.clone(), y.b.clone()),
            den: x.den.clone(),
            d: x.d,
        };
    }
    Surd {
        a: op(&x.a * &y.den, &y.a * &x.den),
        b: op(&x.b * &y.den, &y.b * &x.den),
        den: &x.den * &y.den,
        d: x.d,
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        combine(self, o, false)
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        combine(self, o, true)
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        debug_assert_eq!(self.d, o.d);
        Surd {
            a: &self.a * &o.a + &self.b * &o.b * self.d,
            b: &self.a * &o.b + &self.b * &o.a,
            den: &self.den * &o.den,
            d: self.d,
        }
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            a: -&self.a,
            b: -&self.b,
            den: self.den.clone(),
            d: self.d,
        }
    }
}

/// A point of `T^2` with coordinates in `Q(√D)`, reduced into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdPoint(pub [Surd; 2]);

impl SurdPoint {
    pub fn to_torus(&self) -> TorusPoint {
        TorusPoint::new(vec![self.0[0].to_f64(), self.0[1].to_f64()])
    }
}

/// Exact arithmetic for a hyperbolic automorphism of `T^2`.
#[derive(Debug, Clone)]
pub struct QuadraticMap {
    m: [[i64; 2]; 2],
    inv: [[i64; 2]; 2],
    d: i64,
    lambda_s: Surd,
    lambda_u: Surd,
    /// Projector onto `E^u` along `E^s`: `(A − λ_s I)/(λ_u − λ_s)`.
    pu: [[Surd; 2]; 2],
}

impl QuadraticMap {
    pub fn new(a: &ToralAutomorphism) -> Result<Self, MaxError> {
        if a.dim() != 2 {
            return Err(MaxError::DimensionMismatch {
                expected: 2,
                found: a.dim(),
            });
        }
        let g = |m: &crate::torus::IntMatrix| [[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]];
        let (m, inv) = (g(a.matrix()), g(a.inverse_matrix()));
        let t = m[0][0] + m[1][1];
        let d = t * t - 4 * a.determinant();
        let half = |x: Surd| &x * &Surd::rational(BigRational::new(1.into(), 2.into()), d);
        let root = Surd::root(d);
        let tr = Surd::integer(t, d);
        let (l1, l2) = (half(&tr - &root), half(&tr + &root));
        let (lambda_s, lambda_u) = if (&l1.abs() - &Surd::integer(1, d)).signum() == Ordering::Less {
            (l1, l2)
        } else {
            (l2, l1)
        };
        let gap = (&lambda_u - &lambda_s).inverse().ok_or(MaxError::NotTransverse { condition: 0.0 })?;
        let entry = |i: usize, j: usize| {
            let mut e = Surd::integer(m[i][j], d);
            if i == j {
                e = &e - &lambda_s;
            }
            &e * &gap
        };
        let pu = [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]];
        Ok(QuadraticMap {
            m,
            inv,
            d,
            lambda_s,
            lambda_u,
            pu,
        })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn lambda_s(&self) -> &Surd {
        &self.lambda_s
    }

    pub fn lambda_u(&self) -> &Surd {
        &self.lambda_u
    }

    /// The exact value of a float point; `None` for non-finite coordinates.
    pub fn point(&self, p: &TorusPoint) -> Option<SurdPoint> {
        let c = p.coords();
        if c.len() != 2 {
            return None;
        }
        Some(SurdPoint([
            Surd::from_f64(c[0], self.d)?.fract(),
            Surd::from_f64(c[1], self.d)?.fract(),
        ]))
    }

    fn apply(&self, m: &[[i64; 2]; 2], p: &SurdPoint) -> SurdPoint {
        let row = |i: usize| (&p.0[0].scale(m[i][0]) + &p.0[1].scale(m[i][1])).fract();
        SurdPoint([row(0), row(1)])
    }

    pub fn forward(&self, p: &SurdPoint) -> SurdPoint {
        self.apply(&self.m, p)
    }

    pub fn backward(&self, p: &SurdPoint) -> SurdPoint {
        self.apply(&self.inv, p)
    }

    /// Shortest lift of `q − p`.
    pub fn difference(&self, p: &SurdPoint, q: &SurdPoint) -> [Surd; 2] {
        [(&q.0[0] - &p.0[0]).centered(), (&q.0[1] - &p.0[1]).centered()]
    }

    /// Squared flat distance.
    pub fn distance_sq(&self, p: &SurdPoint, q: &SurdPoint) -> Surd {
        let [u, v] = self.difference(p, q);
        &(&u * &u) + &(&v * &v)
    }

    /// Unstable and stable parts of a vector.
    pub fn split(&self, w: &[Surd; 2]) -> ([Surd; 2], [Surd; 2]) {
        let u = |i: usize| &(&self.pu[i][0] * &w[0]) + &(&self.pu[i][1] * &w[1]);
        let wu = [u(0), u(1)];
        let ws = [&w[0] - &wu[0], &w[1] - &wu[1]];
        (wu, ws)
    }

    /// `[x, y] = x + v_u` for the shortest `y − x = v_s + v_u`: the point
    /// on the unstable leaf of `x` and the stable leaf of `y`.
    pub fn bracket(&self, x: &SurdPoint, y: &SurdPoint) -> SurdPoint {
        let (wu, _) = self.split(&self.difference(x, y));
        SurdPoint([(&x.0[0] + &wu[0]).fract(), (&x.0[1] + &wu[1]).fract()])
    }
}
