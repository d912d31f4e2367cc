use serde::{Deserialize, Serialize};

use super::MaxError;
use crate::shadowing::{newton_shadow_from, NewtonOptions, PseudoOrbit};
use crate::torus::{distance_unchecked, HyperbolicMap, ToralAutomorphism, TorusPoint};

/// Splittings with frame condition number above this are treated as non-transverse.
pub const MAX_FRAME_CONDITION: f64 = 1e8;

/// `[x, y]`: the point of `W^u_ε(x) ∩ W^s_ε(y)`.
///
/// Its backward orbit follows `x` and its forward orbit follows `y`.
/// `u_distance` is measured along `W^u(x)` from `x`, `s_distance` along
/// `W^s(y)` from `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketPoint {
    pub point: TorusPoint,
    /// Always zero for maps.
    pub time_shift: f64,
    pub s_distance: f64,
    pub u_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketOptions {
    /// Half-width of the orbit window used by the Newton route.
    pub window: usize,
    /// Displacement added to every unknown of the Newton start.
    pub start_offset: Option<Vec<f64>>,
    pub newton: NewtonOptions,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            window: 24,
            start_offset: None,
            newton: NewtonOptions::default(),
        }
    }
}

fn check_pair<M: HyperbolicMap + ?Sized>(map: &M, x: &TorusPoint, y: &TorusPoint, eps: f64) -> Result<(), MaxError> {
    if x.dim() != map.dim() || y.dim() != map.dim() {
        return Err(MaxError::DimensionMismatch {
            expected: map.dim(),
            found: if x.dim() != map.dim() { x.dim() } else { y.dim() },
        });
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(MaxError::Epsilon(eps));
    }
    let cond = map.splitting_at(x).distortion();
    if cond > MAX_FRAME_CONDITION {
        return Err(MaxError::NotTransverse { condition: cond });
    }
    Ok(())
}

/// Exact bracket of a linear automorphism: `[x, y] = x + v_u` with `v = y - x`
/// (minimal lift) split as `v_s + v_u`.
pub fn bracket_linear(
    map: &ToralAutomorphism,
    x: &TorusPoint,
    y: &TorusPoint,
    eps: f64,
) -> Result<BracketPoint, MaxError> {
    check_pair(map, x, y, eps)?;
    let v = x.displacement_to(y);
    let (vs, vu) = map.splitting().decompose(&v);
    let norm = |w: &[f64]| w.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (s, u) = (norm(&vs), norm(&vu));
    if s > eps || u > eps {
        return Err(MaxError::NoLocalBracket {
            s_distance: s,
            u_distance: u,
            eps,
        });
    }
    let point = if s == 0.0 && u == 0.0 {
        x.clone()
    } else {
        x.translate(&vu)
    };
    Ok(BracketPoint {
        point,
        time_shift: 0.0,
        s_distance: s,
        u_distance: u,
    })
}

/// Bracket through the shadow of the one-jump pseudo-orbit
/// `f^{-w} x, …, f^{-1} x, y, f y, …, f^w y`, read at index 0.
pub fn bracket_newton<M: HyperbolicMap + ?Sized>(
    map: &M,
    x: &TorusPoint,
    y: &TorusPoint,
    eps: f64,
    opts: &BracketOptions,
) -> Result<BracketPoint, MaxError> {
    check_pair(map, x, y, eps)?;
    if x == y {
        return Ok(BracketPoint {
            point: x.clone(),
            time_shift: 0.0,
            s_distance: 0.0,
            u_distance: 0.0,
        });
    }
    let w = opts.window.max(1);
    let mut pts = Vec::with_capacity(2 * w + 1);
    let mut back = Vec::with_capacity(w);
    let mut q = x.clone();
    for _ in 0..w {
        q = map.backward(&q);
        back.push(q.clone());
    }
    pts.extend(back.into_iter().rev());
    let mut q = y.clone();
    for _ in 0..=w {
        pts.push(q.clone());
        q = map.forward(&q);
    }
    let po = PseudoOrbit::new(map, -(w as i64), pts)?;
    let guess = opts
        .start_offset
        .as_ref()
        .map(|off| vec![off.clone(); po.len()]);
    let r = newton_shadow_from(map, &po, guess.as_deref(), opts.newton)?;
    let point = r.point;
    let u = distance_unchecked(point.coords(), x.coords());
    let s = distance_unchecked(point.coords(), y.coords());
    if s > eps || u > eps {
        return Err(MaxError::NoLocalBracket {
            s_distance: s,
            u_distance: u,
            eps,
        });
    }
    Ok(BracketPoint {
        point,
        time_shift: 0.0,
        s_distance: s,
        u_distance: u,
    })
}

/// The exact formula on linear maps, Newton otherwise.
pub fn bracket<M: HyperbolicMap + ?Sized>(
    map: &M,
    x: &TorusPoint,
    y: &TorusPoint,
    eps: f64,
) -> Result<BracketPoint, MaxError> {
    match map.as_linear() {
        Some(lin) => bracket_linear(lin, x, y, eps),
        None => bracket_newton(map, x, y, eps, &BracketOptions::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::torus_distance;

    #[test]
    fn bracket_of_point_with_itself() {
        let a = ToralAutomorphism::cat_map();
        let x = TorusPoint::new(vec![0.37, 0.81]);
        let b = bracket(&a, &x, &x, 0.1).unwrap();
        assert_eq!(b.point, x);
        assert_eq!((b.s_distance, b.u_distance), (0.0, 0.0));
    }

    #[test]
    fn linear_bracket_takes_unstable_part() {
        let a = ToralAutomorphism::cat_map();
        let x = TorusPoint::origin(2);
        let y = TorusPoint::new(vec![0.01, -0.004]);
        let b = bracket_linear(&a, &x, &y, 0.1).unwrap();
        // adapted coordinates: stable part from x (zero), unstable from y
        let c = a.splitting().to_adapted(&x.displacement_to(&b.point));
        let cy = a.splitting().to_adapted(&x.displacement_to(&y));
        assert!(c[0].abs() < 1e-15);
        assert!((c[1] - cy[1]).abs() < 1e-15);
        let mut p = b.point.clone();
        let mut q = y.clone();
        for _ in 0..20 {
            p = a.forward(&p);
            q = a.forward(&q);
        }
        assert!(torus_distance(&p, &q).unwrap() < 1e-8);
    }

    #[test]
    fn newton_route_matches_formula() {
        let a = ToralAutomorphism::cat_map();
        let x = TorusPoint::new(vec![0.61, 0.27]);
        let y = x.translate(&[0.012, 0.007]);
        let exact = bracket_linear(&a, &x, &y, 0.1).unwrap();
        let newton = bracket_newton(&a, &x, &y, 0.1, &BracketOptions::default()).unwrap();
        assert!(torus_distance(&exact.point, &newton.point).unwrap() < 1e-9);
        for off in [[1e-3, 0.0], [-1e-3, 1e-3]] {
            let opts = BracketOptions {
                start_offset: Some(off.to_vec()),
                ..BracketOptions::default()
            };
            let b = bracket_newton(&a, &x, &y, 0.1, &opts).unwrap();
            assert!(torus_distance(&b.point, &newton.point).unwrap() < 1e-9);
        }
    }

    #[test]
    fn far_pairs_have_no_local_bracket() {
        let a = ToralAutomorphism::cat_map();
        let x = TorusPoint::origin(2);
        let y = TorusPoint::new(vec![0.2, 0.1]);
        assert!(matches!(
            bracket(&a, &x, &y, 0.05),
            Err(MaxError::NoLocalBracket { .. })
        ));
        assert!(matches!(bracket(&a, &x, &y, 0.3), Err(MaxError::Epsilon(_))));
    }
}
