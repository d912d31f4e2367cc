//! The experiment battery behind the `suite` subcommand: every check runs
//! from a fixed seed and writes a deterministic output tree.

mod battery;
mod checks;
mod crovisier;

use std::path::Path;

use serde::Serialize;

pub use battery::{battery, connecting_point, run_case, BatteryCase, BatterySettings, CaseOutcome, LPS_EPSILON};
pub use checks::{
    bracket_convergence, equivariance, expansivity, metric_axioms, random_pseudo_orbit,
    shadow_lemma, symbolic, BracketCheck, EquivarianceCheck, ExpansivityCheck, MetricCheck,
    ShadowLemmaCheck, ShadowRow, SymbolicCheck,
};
pub use crovisier::{crovisier_run, ClosureAttempt, CrovisierRun};

use crate::maximality::MaxError;
use crate::io::{to_json, trace_csv, write_set_csv, write_text, ExperimentConfig, IoError};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionLine {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionLine {
    fn new(id: u32, title: &str, passed: bool, detail: String) -> Self {
        CriterionLine {
            id,
            title: title.to_string(),
            passed,
            detail,
        }
    }

    pub fn render(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} [{:>2}] {}: {}", self.id, self.title, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyTally {
    pub pairs: usize,
    pub held: usize,
    /// `(trace, j)` for each failing pair.
    pub failures: Vec<(String, usize)>,
}

impl DichotomyTally {
    pub fn rate(&self) -> f64 {
        if self.pairs == 0 {
            1.0
        } else {
            self.held as f64 / self.pairs as f64
        }
    }
}

/// Pool the two-step dichotomy over the battery and the four-torus trace.
pub fn dichotomy_tally(outcomes: &[CaseOutcome], crovisier: &CrovisierRun) -> DichotomyTally {
    let mut tally = DichotomyTally {
        pairs: 0,
        held: 0,
        failures: Vec::new(),
    };
    let traces = outcomes
        .iter()
        .filter_map(|o| o.trace.as_ref().map(|t| (o.name.as_str(), t)))
        .chain(crovisier.closure.trace().map(|t| ("crovisier", t)));
    for (name, t) in traces {
        let d = &t.dichotomy;
        tally.pairs += d.pairs_checked;
        tally.held += d.pairs_checked - d.failures.len();
        tally
            .failures
            .extend(d.failures.iter().map(|&j| (name.to_string(), j)));
    }
    tally
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionLine>,
    pub shadow_lemma: ShadowLemmaCheck,
    pub equivariance: EquivarianceCheck,
    pub expansivity: ExpansivityCheck,
    pub brackets: BracketCheck,
    pub metrics: MetricCheck,
    pub symbolic: SymbolicCheck,
    pub dichotomy: DichotomyTally,
    #[serde(skip)]
    pub battery: Vec<CaseOutcome>,
    #[serde(skip)]
    pub crovisier: CrovisierRun,
}

impl SuiteReport {
    pub fn summary_text(&self) -> String {
        let mut s: String = self.criteria.iter().map(|c| c.render() + "\n").collect();
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        s.push_str(&format!("{passed}/{} criteria passed\n", self.criteria.len()));
        s
    }
}

pub fn battery_settings(cfg: &ExperimentConfig) -> BatterySettings {
    BatterySettings {
        delta: cfg.delta,
        u_radius: cfg.u_radius,
        resolution: cfg.resolution,
        max_iter: cfg.max_iter,
        sampling: cfg.sampling_params(),
    }
}

/// Run every check. The determinism criterion belongs to the caller, which
/// compares two output trees.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport, MaxError> {
    let seed = cfg.sampling.seed;
    let shadow = shadow_lemma(seed, 500, 200);
    let equi = equivariance(seed, 200);
    let expa = expansivity(seed, 100);
    let cases = battery(&battery_settings(cfg), seed);
    let outcomes: Vec<CaseOutcome> = cases.iter().map(run_case).collect();
    let symb = symbolic(100, cfg.kmax);
    let crov = crovisier_run(&cfg.crovisier)?;
    let brk = bracket_convergence(seed, 200);
    let metr = metric_axioms(seed, 1000);
    let tally = dichotomy_tally(&outcomes, &crov);

    let mut criteria = Vec::new();
    let worst_ratio = shadow.rows.iter().map(|r| r.max_adapted_ratio).fold(0.0, f64::max);
    let worst_gap = shadow.rows.iter().map(|r| r.max_route_gap).fold(0.0, f64::max);
    criteria.push(CriterionLine::new(
        1,
        "shadowing lemma",
        shadow.passed,
        format!("max ratio {worst_ratio:.4} <= K {:.4}, route gap {worst_gap:.1e}", shadow.constant),
    ));
    criteria.push(CriterionLine::new(
        2,
        "equivariance",
        equi.passed,
        format!("interior discrepancy {:.1e}", equi.max_discrepancy),
    ));
    criteria.push(CriterionLine::new(
        3,
        "expansivity",
        expa.passed,
        format!("{} of {} pairs stayed close", expa.stayed_close, expa.count),
    ));
    let stabilized: Vec<&CaseOutcome> = outcomes
        .iter()
        .filter(|o| o.trace.as_ref().is_some_and(|t| t.stabilized()))
        .collect();
    let lps_fail = stabilized
        .iter()
        .filter(|o| !o.lps.as_ref().is_some_and(|l| l.passed()))
        .count();
    let refused = outcomes.iter().filter(|o| o.error.is_some()).count();
    criteria.push(CriterionLine::new(
        4,
        "closure stabilization implies local product structure",
        outcomes.len() >= 10 && lps_fail == 0 && refused == 0,
        format!(
            "{} cases, {} stabilized, {lps_fail} bracket failures, {refused} refused",
            outcomes.len(),
            stabilized.len()
        ),
    ));
    criteria.push(CriterionLine::new(
        5,
        "symbolic stabilization and local maximality",
        symb.passed,
        format!(
            "{} stabilization failures; k full {:?}, golden {:?}, even {:?}",
            symb.stabilization_failures.len(),
            symb.full_shift_k,
            symb.golden_mean_k,
            symb.even_shift_k
        ),
    ));
    criteria.push(CriterionLine::new(
        6,
        "two-step dichotomy",
        tally.failures.is_empty(),
        format!("{}/{} pairs ({:.0}%)", tally.held, tally.pairs, 100.0 * tally.rate()),
    ));
    criteria.push(CriterionLine::new(
        7,
        "four-torus closure never stabilizes",
        crov.closure.never_stabilizes(),
        crov.closure.describe(),
    ));
    criteria.push(CriterionLine::new(
        8,
        "bracket convergence",
        brk.passed,
        format!(
            "worst exact ratio {:.3}, float route gap {:.1e}, float orbits clean to n = {}",
            brk.worst_ratio, brk.route_gap, brk.float_horizon
        ),
    ));
    criteria.push(CriterionLine::new(
        9,
        "metric axioms",
        metr.passed,
        format!(
            "violations torus {}, hausdorff {}, shift {}",
            metr.torus_violations, metr.hausdorff_violations, metr.shift_violations
        ),
    ));
    Ok(SuiteReport {
        seed,
        criteria,
        shadow_lemma: shadow,
        equivariance: equi,
        expansivity: expa,
        brackets: brk,
        metrics: metr,
        symbolic: symb,
        dichotomy: tally,
        battery: outcomes,
        crovisier: crov,
    })
}

/// Write the report tree under `dir`.
pub fn write_suite(report: &SuiteReport, cfg: &ExperimentConfig, dir: &Path) -> Result<(), IoError> {
    // the tree does not record where it was written
    let mut cfg = cfg.clone();
    cfg.output.dir = None;
    write_text(dir.join("config.toml"), &cfg.to_toml())?;
    write_text(dir.join("summary.txt"), &report.summary_text())?;
    write_text(dir.join("summary.json"), &to_json(report)?)?;
    for o in &report.battery {
        let base = dir.join("battery").join(&o.name);
        write_text(base.join("outcome.json"), &to_json(o)?)?;
        if let Some(t) = &o.trace {
            write_text(base.join("trace.csv"), &trace_csv(t))?;
            write_text(base.join("final_set.csv"), &write_set_csv(t.final_set()))?;
        }
    }
    let c = &report.crovisier;
    let base = dir.join("crovisier");
    write_text(base.join("grid.json"), &to_json(&c.grid)?)?;
    write_text(base.join("run.json"), &to_json(c)?)?;
    if let Some(t) = c.closure.trace() {
        write_text(base.join("trace.csv"), &trace_csv(t))?;
    }
    Ok(())
}
