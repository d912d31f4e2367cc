use serde::Serialize;

use crate::closure::{iterate_closure, ClosureParams, ClosureTrace, SamplingParams, Verdict};
use crate::io::CrovisierConfig;
use crate::maximality::{
    crovisier_witness, verify_nonpremax_witness, CrovisierSetup, GridSet, MaxError, WitnessReport,
};
use crate::torus::{ProductSystem, TorusPoint};

/// Outcome of iterating the closure on the grid set.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClosureAttempt {
    /// The engine refused the parameters before the first step.
    Refused { delta: f64, u_radius: f64, reason: String },
    Ran {
        delta: f64,
        u_radius: f64,
        gamma: f64,
        verdict: Verdict,
        nus: Vec<f64>,
        /// Running sums of `ν_j`.
        cumulative: Vec<f64>,
        #[serde(skip)]
        trace: Box<ClosureTrace>,
    },
}

impl ClosureAttempt {
    pub fn trace(&self) -> Option<&ClosureTrace> {
        match self {
            ClosureAttempt::Ran { trace, .. } => Some(trace),
            ClosureAttempt::Refused { .. } => None,
        }
    }

    /// Escaped or ran out of budget, with the cumulative displacement
    /// strictly increasing and gaining at least `γ` over every two steps.
    pub fn never_stabilizes(&self) -> bool {
        match self {
            ClosureAttempt::Refused { .. } => false,
            ClosureAttempt::Ran {
                verdict,
                gamma,
                cumulative,
                ..
            } => {
                !matches!(verdict, Verdict::Stabilized(_))
                    && cumulative.windows(2).all(|w| w[1] > w[0])
                    && cumulative.windows(3).all(|w| w[2] - w[0] >= *gamma)
                    && cumulative.first().is_some_and(|&c| c > 0.0)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClosureAttempt::Refused { delta, reason, .. } => {
                format!("refused at δ = {delta}: {reason}")
            }
            ClosureAttempt::Ran {
                verdict,
                cumulative,
                gamma,
                ..
            } => format!(
                "{verdict:?} after {} steps, cumulative {:.4} (γ {gamma:.4})",
                cumulative.len(),
                cumulative.last().copied().unwrap_or(0.0)
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrovisierRun {
    pub setup: CrovisierSetup,
    pub q: Vec<f64>,
    pub cell_width: f64,
    pub total_cells: u64,
    pub kept_cells: usize,
    /// `dist((q, r), Λ)` and `dist((0, r), Λ)`.
    pub qr_distance: f64,
    pub origin_distance: f64,
    pub witness_tol: f64,
    pub witness: Result<WitnessReport, String>,
    pub closure: ClosureAttempt,
    #[serde(skip)]
    pub grid: GridSet,
}

/// Build the grid set, check the witness family against it and attempt the
/// closure at `δ = 4w`, `U = 3w`.
pub fn crovisier_run(cfg: &CrovisierConfig) -> Result<CrovisierRun, MaxError> {
    let product = ProductSystem::default_dominated();
    let setup = cfg.setup();
    let w = cfg.cell_width();
    let r = TorusPoint::new(setup.r.clone());
    let q = setup.q(&product)?;
    let grid = setup.run(&product)?;
    let qr = ProductSystem::join(&q, &r);
    let o = ProductSystem::join(&TorusPoint::origin(2), &r);
    let witness_tol = w / 8.0;
    let witness = crovisier_witness(&product, &q, &r, setup.v_radius, cfg.a, cfg.n_half, cfg.n_t)
        .map(|wit| verify_nonpremax_witness(&product, &grid, &wit, witness_tol))
        .map_err(|e| e.to_string());
    let (delta, u_radius) = (4.0 * w, 3.0 * w);
    let params = ClosureParams {
        delta,
        u_radius,
        max_iter: 10,
        sampling: SamplingParams::default(),
    };
    let closure = match grid
        .to_set_approx("crovisier")
        .map_err(|e| e.to_string())
        .and_then(|l0| iterate_closure(&product, &l0, &params).map_err(|e| e.to_string()))
    {
        Err(reason) => ClosureAttempt::Refused {
            delta,
            u_radius,
            reason,
        },
        Ok(t) => ClosureAttempt::Ran {
            delta,
            u_radius,
            gamma: t.gamma,
            verdict: t.verdict,
            nus: t.nus.clone(),
            cumulative: t
                .nus
                .iter()
                .scan(0.0, |acc, nu| {
                    *acc += nu;
                    Some(*acc)
                })
                .collect(),
            trace: Box::new(t),
        },
    };
    Ok(CrovisierRun {
        q: q.coords().to_vec(),
        cell_width: w,
        total_cells: grid.total(),
        kept_cells: grid.len(),
        qr_distance: grid.distance_to(&qr),
        origin_distance: grid.distance_to(&o),
        witness_tol,
        witness,
        closure,
        grid,
        setup,
    })
}
