use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{build_graph, sample_pseudo_orbits, SamplingParams};
use super::set_approx::{directed_hausdorff, hausdorff, SetApprox};
use super::ClosureError;
use crate::shadowing::{max_admissible_defect, shadow_operator_t};
use crate::torus::{HyperbolicMap, TorusPoint};

/// Safety factor applied to the strict-inequality bound on `γ`.
pub const GAMMA_MARGIN: f64 = 0.1;
/// Extra closure steps that must stay below tolerance before a trace is declared stable.
pub const CONFIRMATION_STEPS: usize = 3;
/// Slack applied to `γ` when checking the two-step dichotomy.
pub const DICHOTOMY_SLACK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureStats {
    pub nodes: usize,
    pub edges: usize,
    pub sampled: usize,
    pub refused: usize,
    pub added: usize,
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureStep {
    pub set: SetApprox,
    pub stats: ClosureStats,
}

/// One application of `sh(Λ, δ)` on a net.
///
/// Every sampled pseudo-orbit in the transition graph is shadowed, the trusted
/// window of each shadowing orbit is merged into the input, and the union is
/// coarsened back to the input resolution.
pub fn shadowing_closure<M: HyperbolicMap + ?Sized>(
    map: &M,
    set: &SetApprox,
    delta: f64,
    params: &SamplingParams,
) -> Result<ClosureStep, ClosureError> {
    let Some(first) = set.points().first() else {
        return Err(ClosureError::EmptySet);
    };
    check_delta(map, first, delta)?;
    let graph = build_graph(map, set, delta);
    let sampling = sample_pseudo_orbits(map, set, &graph, params)?;
    let shadows: Vec<_> = sampling
        .samples
        .par_iter()
        .map(|s| shadow_operator_t(map, &s.orbit).map(|r| (s.keep, r)))
        .collect();
    let mut refused = 0usize;
    let mut fresh: Vec<TorusPoint> = Vec::new();
    for s in shadows {
        match s {
            Ok(((a, b), r)) => fresh.extend(r.orbit[a..b].iter().cloned()),
            Err(_) => refused += 1,
        }
    }
    let sampled = sampling.samples.len();
    if sampled > 0 && refused == sampled {
        return Err(ClosureError::AllRefused(refused));
    }
    let out = set.merged(fresh, set.label());
    let stats = ClosureStats {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        sampled,
        refused,
        added: out.len() - set.len(),
        partial: sampling.partial,
    };
    Ok(ClosureStep { set: out, stats })
}

fn check_delta<M: HyperbolicMap + ?Sized>(map: &M, at: &TorusPoint, delta: f64) -> Result<(), ClosureError> {
    if !(delta > 0.0) {
        return Err(ClosureError::NonPositiveDelta(delta));
    }
    let bound = max_admissible_defect(map, at);
    if !(delta < bound) {
        return Err(ClosureError::DeltaNotAdmissible { delta, bound });
    }
    Ok(())
}

/// `γ = min(δ/4, δ/(4L)) · (1 - margin)`, with `L` bounding `f` and `f⁻¹`.
///
/// The Lipschitz bound is global for the shipped maps, so `domain` only
/// fixes the dimension it is checked against.
pub fn gamma_for<M: HyperbolicMap + ?Sized>(
    map: &M,
    delta: f64,
    domain: &SetApprox,
) -> Result<f64, ClosureError> {
    if !(delta > 0.0) {
        return Err(ClosureError::NonPositiveDelta(delta));
    }
    if let Some(d) = domain.dim() {
        if d != map.dim() {
            return Err(ClosureError::DimensionMismatch {
                expected: map.dim(),
                found: d,
            });
        }
    }
    Ok(gamma_from_lipschitz(delta, map.lipschitz()))
}

pub(crate) fn gamma_from_lipschitz(delta: f64, lipschitz: f64) -> f64 {
    (delta / 4.0).min(delta / (4.0 * lipschitz)) * (1.0 - GAMMA_MARGIN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum Verdict {
    /// `Λ_j` matched `Λ_{j+1}` at resolution and stayed so.
    Stabilized(usize),
    /// `Λ_j` left the `U_radius`-neighbourhood of `Λ_0`.
    EscapedNeighborhood(usize),
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub pairs_checked: usize,
    /// `j` such that `max(ν_j, ν_{j+1}) < slack · γ`.
    pub failures: Vec<usize>,
    pub threshold: f64,
}

impl DichotomyReport {
    pub fn held(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureTrace {
    pub delta: f64,
    pub u_radius: f64,
    pub resolution: f64,
    pub gamma: f64,
    pub iterates: Vec<SetApprox>,
    /// `nus[i] = d_H(Λ_{i+1}, Λ_i)`.
    pub nus: Vec<f64>,
    /// `d_H`-reach of each iterate outside `Λ_0`.
    pub spread: Vec<f64>,
    pub stats: Vec<ClosureStats>,
    pub verdict: Verdict,
    pub dichotomy: DichotomyReport,
}

impl ClosureTrace {
    pub fn final_set(&self) -> &SetApprox {
        self.iterates.last().expect("trace holds Λ_0")
    }

    pub fn stabilized(&self) -> bool {
        matches!(self.verdict, Verdict::Stabilized(_))
    }

    /// Sizes `|Λ_j|`.
    pub fn sizes(&self) -> Vec<usize> {
        self.iterates.iter().map(SetApprox::len).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureParams {
    pub delta: f64,
    pub u_radius: f64,
    pub max_iter: usize,
    pub sampling: SamplingParams,
}

/// Iterate `Λ_{j+1} = sh(Λ_j, δ)` and classify the trace.
///
/// A step with `ν ≤ resolution` becomes a stabilization candidate and is
/// accepted after [`CONFIRMATION_STEPS`] further steps stay below the same
/// tolerance. The sampler seed advances with each step so later steps draw
/// fresh walks.
pub fn iterate_closure<M: HyperbolicMap + ?Sized>(
    map: &M,
    lambda0: &SetApprox,
    params: &ClosureParams,
) -> Result<ClosureTrace, ClosureError> {
    let Some(first) = lambda0.points().first() else {
        return Err(ClosureError::EmptySet);
    };
    check_delta(map, first, params.delta)?;
    if !(params.u_radius > 0.0) {
        return Err(ClosureError::URadius(params.u_radius));
    }
    let gamma = gamma_for(map, params.delta, lambda0)?;
    let tol = lambda0.resolution();
    let mut iterates = vec![lambda0.clone().with_label("lambda_0")];
    let mut nus = Vec::new();
    let mut spread = vec![0.0];
    let mut stats = Vec::new();
    let mut candidate: Option<usize> = None;
    let mut verdict = Verdict::BudgetExhausted;
    for j in 0..params.max_iter {
        let mut sampling = params.sampling;
        sampling.seed = params.sampling.seed.wrapping_add(j as u64);
        let step = shadowing_closure(map, &iterates[j], params.delta, &sampling)?;
        let next = step.set.with_label(format!("lambda_{}", j + 1));
        let nu = hausdorff(&next, &iterates[j])?;
        let reach = directed_hausdorff(&next, lambda0)?;
        nus.push(nu);
        spread.push(reach);
        stats.push(step.stats);
        iterates.push(next);
        if reach > params.u_radius {
            verdict = Verdict::EscapedNeighborhood(j + 1);
            break;
        }
        if nu <= tol {
            let c = *candidate.get_or_insert(j);
            if j - c >= CONFIRMATION_STEPS {
                verdict = Verdict::Stabilized(c);
                break;
            }
        } else {
            candidate = None;
        }
    }
    let end = match verdict {
        Verdict::Stabilized(c) => c,
        _ => nus.len(),
    };
    let dichotomy = dichotomy(&nus[..end], gamma);
    Ok(ClosureTrace {
        delta: params.delta,
        u_radius: params.u_radius,
        resolution: tol,
        gamma,
        iterates,
        nus,
        spread,
        stats,
        verdict,
        dichotomy,
    })
}

/// Check `max(ν_j, ν_{j+1}) ≥ slack · γ` on each consecutive pair.
pub fn dichotomy(nus: &[f64], gamma: f64) -> DichotomyReport {
    let threshold = DICHOTOMY_SLACK * gamma;
    let failures = nus
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].max(w[1]) < threshold)
        .map(|(j, _)| j)
        .collect();
    DichotomyReport {
        pairs_checked: nus.len().saturating_sub(1),
        failures,
        threshold,
    }
}
