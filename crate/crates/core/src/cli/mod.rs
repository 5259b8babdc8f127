//! Model files, the `run`, `check` and `energy` workflows, and their reports.
//!
//! The binary only parses arguments and prints what these functions return.

pub mod check;
pub mod json;
pub mod model;

use serde::{Deserialize, Serialize};

use crate::decomposition::InteractionBasis;
use crate::dynamics::{run_flow, FlowConfig, FlowForm, FlowStatus, FlowTrace, Schedule};
use crate::energy::{bethe_free_energy, criticality_residual, EnergyReport};
use crate::error::{Error, Result};
use crate::fields::{consistency_residual, zeta_action_obs, Field0, StatField};
use crate::lattice::{Region, RegionLattice};
use crate::oracle::{exact_marginal_field, global_gibbs, is_tree_like};

pub use check::{check_lattice, CheckReport};
pub use model::{Model, ModelFile, FORMAT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTable {
    pub region: Region,
    pub table: Vec<f64>,
}

fn tables(lattice: &RegionLattice, field: &Field0) -> Vec<RegionTable> {
    lattice
        .regions()
        .iter()
        .zip(field.tensors())
        .map(|(r, t)| RegionTable {
            region: r.clone(),
            table: t.values().to_vec(),
        })
        .collect()
}

/// Overrides applied on top of a model's `options`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFlags {
    pub tau: Option<f64>,
    pub steps: Option<usize>,
    pub tolerance: Option<f64>,
    pub no_normalize: bool,
    pub schedule: Option<Schedule>,
    pub form: Option<FlowForm>,
    pub oracle: bool,
}

impl RunFlags {
    pub fn apply(&self, base: FlowConfig) -> FlowConfig {
        FlowConfig {
            tau: self.tau.unwrap_or(base.tau),
            max_steps: self.steps.unwrap_or(base.max_steps),
            tolerance: self.tolerance.unwrap_or(base.tolerance),
            normalize: base.normalize && !self.no_normalize,
            form: self.form.unwrap_or(base.form),
            schedule: self.schedule.unwrap_or(base.schedule),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub update: f64,
    pub consistency: f64,
    pub criticality: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub log_partition: f64,
    /// Sup-norm distance between beliefs and exact marginals.
    pub max_belief_error: f64,
    /// `F_B − (−ln Z)` at the reported beliefs.
    pub bethe_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub command: &'static str,
    pub status: &'static str,
    pub converged: bool,
    pub failed: bool,
    pub steps: usize,
    pub config: FlowConfig,
    pub tree_like: bool,
    pub residuals: Residuals,
    pub bethe_free_energy: f64,
    pub conserved_drift: Option<f64>,
    pub beliefs: Vec<RegionTable>,
    pub oracle: Option<OracleComparison>,
}

impl RunReport {
    fn all_finite(&self) -> bool {
        let r = &self.residuals;
        [r.update, r.consistency, self.bethe_free_energy]
            .into_iter()
            .chain(r.criticality)
            .chain(self.conserved_drift)
            .chain(self.beliefs.iter().flat_map(|b| b.table.iter().copied()))
            .all(f64::is_finite)
    }
}

/// Runs the flow on a model and summarises the final state.
pub fn run_model(model: &Model, flags: &RunFlags) -> Result<(RunReport, FlowTrace)> {
    let config = flags.apply(model.options);
    let lattice = &model.lattice;
    let outcome = run_flow(lattice, &model.h, &config)?;
    let q = outcome.state.beliefs(lattice)?;
    let hamiltonians = zeta_action_obs(lattice, &model.h)?;
    let counts = crate::algebra::mobius_numbers(lattice);
    let basis = InteractionBasis::build(lattice);
    let bethe = bethe_free_energy(lattice, &q, &hamiltonians, &counts)?;
    let oracle = if flags.oracle {
        let g = global_gibbs(lattice, &model.h)?;
        let exact = exact_marginal_field(&g, lattice)?;
        Some(OracleComparison {
            log_partition: g.log_partition,
            max_belief_error: q.field().sub(exact.field())?.sup_norm(),
            bethe_gap: bethe + g.log_partition,
        })
    } else {
        None
    };
    let status = match outcome.status {
        FlowStatus::Converged => "converged",
        FlowStatus::MaxSteps => "max_steps",
        FlowStatus::Overflow { .. } => "overflow",
    };
    let mut report = RunReport {
        format: FORMAT,
        command: "run",
        status,
        converged: outcome.converged(),
        failed: false,
        steps: outcome.state.step,
        config,
        tree_like: is_tree_like(lattice),
        residuals: Residuals {
            update: outcome.state.residual,
            consistency: consistency_residual(lattice, &q)?,
            criticality: criticality_residual(lattice, &basis, &q, &hamiltonians).ok(),
        },
        bethe_free_energy: bethe,
        conserved_drift: outcome.trace.records.last().and_then(|r| r.conserved_drift),
        beliefs: tables(lattice, q.field()),
        oracle,
    };
    report.failed = matches!(outcome.status, FlowStatus::Overflow { .. })
        || report.residuals.criticality.is_none()
        || !report.all_finite();
    Ok((report, outcome.trace))
}

pub const TRACE_HEADER: &str = "step,residual,consistency,conserved_drift";

pub fn trace_csv(trace: &FlowTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let drift = r
            .conserved_drift
            .map(json::format_float)
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.step,
            json::format_float(r.residual),
            json::format_float(r.consistency),
            drift
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEnergy {
    pub region: Region,
    pub count: i64,
    pub gibbs_free_energy: f64,
    pub entropy: f64,
    pub summand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyOutput {
    pub format: &'static str,
    pub command: &'static str,
    /// `"beliefs"` when read from a file, `"oracle"` for exact marginals.
    pub source: &'static str,
    pub bethe_free_energy: f64,
    pub log_partition: Option<f64>,
    pub criticality_residual: Option<f64>,
    pub regions: Vec<RegionEnergy>,
}

#[derive(Debug, Deserialize)]
struct BeliefsFile {
    beliefs: Vec<RegionTable>,
}

/// Reads the `beliefs` array of a run report (other keys are ignored).
pub fn parse_beliefs(lattice: &RegionLattice, text: &str) -> Result<StatField> {
    let file: BeliefsFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut slots: Vec<Option<Vec<f64>>> = vec![None; lattice.len()];
    for (k, b) in file.beliefs.into_iter().enumerate() {
        let a = lattice.index_of(&b.region).ok_or_else(|| {
            Error::Parse(format!(
                "beliefs[{k}]: {} is not a lattice region",
                b.region
            ))
        })?;
        if slots[a].replace(b.table).is_some() {
            return Err(Error::Parse(format!(
                "beliefs[{k}]: {} given twice",
                b.region
            )));
        }
    }
    let tensors = slots
        .into_iter()
        .enumerate()
        .map(|(a, t)| {
            let r = lattice.region(a);
            let t = t.ok_or_else(|| Error::Parse(format!("beliefs: missing region {r}")))?;
            crate::tensor::Tensor::from_values(r, lattice.variables(), t)
        })
        .collect::<Result<Vec<_>>>()?;
    StatField::new(lattice, Field0::from_tensors(lattice, tensors)?)
}

/// Bethe free energy at given beliefs, or at exact marginals when none are
/// given and the model is small enough to enumerate.
pub fn energy_model(model: &Model, beliefs: Option<&str>) -> Result<EnergyOutput> {
    let lattice = &model.lattice;
    let (q, source, log_partition) = match beliefs {
        Some(text) => (parse_beliefs(lattice, text)?, "beliefs", None),
        None => {
            let g = global_gibbs(lattice, &model.h)?;
            (
                exact_marginal_field(&g, lattice)?,
                "oracle",
                Some(g.log_partition),
            )
        }
    };
    let hamiltonians = zeta_action_obs(lattice, &model.h)?;
    let basis = InteractionBasis::build(lattice);
    let criticality = criticality_residual(lattice, &basis, &q, &hamiltonians).ok();
    let counts = crate::algebra::mobius_numbers(lattice);
    let (bethe, regions) = match EnergyReport::compute(lattice, &basis, &q, &hamiltonians) {
        Ok(e) => {
            let regions = (0..lattice.len())
                .map(|a| RegionEnergy {
                    region: lattice.region(a).clone(),
                    count: e.counts[a],
                    gibbs_free_energy: e.gibbs_free_energy[a],
                    entropy: e.entropy[a],
                    summand: e.summands[a],
                })
                .collect();
            (e.bethe_free_energy, regions)
        }
        Err(Error::NonPositiveBelief(_)) => (
            bethe_free_energy(lattice, &q, &hamiltonians, &counts)?,
            Vec::new(),
        ),
        Err(e) => return Err(e),
    };
    Ok(EnergyOutput {
        format: FORMAT,
        command: "energy",
        source,
        bethe_free_energy: bethe,
        log_partition,
        criticality_residual: criticality,
        regions,
    })
}
