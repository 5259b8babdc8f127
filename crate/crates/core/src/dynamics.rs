//! Belief propagation as the transport equation `u̇ = ∂Φ(u)`.
//!
//! Potentials `u` and messages `φ` live in log space: beliefs are
//! `q_α = [e^{−(ζ·u)_α}]` and messages `m_{αβ} = e^{−φ_{αβ}}`. The classical
//! algorithm is the explicit Euler scheme of this flow at `τ = 1`.
//!
//! Two equivalent state representations are offered:
//!
//! * potential form: `u ← u + τ ∂Φ(u)`;
//! * message form: `φ ← φ + τ Φ(h + ∂φ)` with `u = h + ∂φ`.
//!
//! Without normalisation both produce the same potentials at every step,
//! since `∂` is linear. With normalisation the potential form re-centres each
//! `u_α` and the message form re-centres each `φ_{αβ}`; the two then differ by
//! a scalar field, which leaves beliefs unchanged.

use serde::{Deserialize, Serialize};

use crate::algebra::ScalarField0;
use crate::decomposition::{global_sum, InteractionBasis};
use crate::energy::criticality_residual;
use crate::error::{Error, Result};
use crate::fields::{boundary1, consistency_residual, zeta_action_obs, Field0, Field1, StatField};
use crate::lattice::{Region, RegionLattice};
use crate::tensor::Tensor;

/// Conserved-quantity drift is only tracked when `|E_Ω|` is at most this.
pub const CONSERVED_TRACKING_LIMIT: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowForm {
    #[default]
    Potential,
    Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every arrow is evaluated on the same snapshot.
    #[default]
    Synchronous,
    /// Arrows are updated one after another in lattice order.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub tau: f64,
    pub max_steps: usize,
    pub tolerance: f64,
    pub normalize: bool,
    pub form: FlowForm,
    pub schedule: Schedule,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            max_steps: 10_000,
            tolerance: 1e-10,
            normalize: true,
            form: FlowForm::Potential,
            schedule: Schedule::Synchronous,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Parse(format!(
                "tau must be finite and > 0, got {}",
                self.tau
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Parse(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Potentials.
    pub u: Field0,
    /// Message log-field, kept in message form only.
    pub phi: Option<Field1>,
    pub step: usize,
    /// Sup-norm of the mean-free part of the last applied update.
    pub residual: f64,
}

impl FlowState {
    pub fn initial(lattice: &RegionLattice, h: &Field0, form: FlowForm) -> Result<Self> {
        h.check(lattice)?;
        Ok(Self {
            u: h.clone(),
            phi: (form == FlowForm::Message).then(|| Field1::zeros(lattice)),
            step: 0,
            residual: f64::INFINITY,
        })
    }

    /// Starts from `u = h + ∂φ`.
    pub fn with_flux(
        lattice: &RegionLattice,
        h: &Field0,
        phi: Field1,
        form: FlowForm,
    ) -> Result<Self> {
        let u = h.add(&boundary1(lattice, &phi)?)?;
        Ok(Self {
            u,
            phi: (form == FlowForm::Message).then_some(phi),
            step: 0,
            residual: f64::INFINITY,
        })
    }

    pub fn beliefs(&self, lattice: &RegionLattice) -> Result<StatField> {
        beliefs(lattice, &self.u)
    }
}

/// Beliefs `q_α = [e^{−(ζ·u)_α}]`.
pub fn beliefs(lattice: &RegionLattice, u: &Field0) -> Result<StatField> {
    StatField::from_potentials(lattice, u)
}

/// `F^{βα}(U) = −ln Σ^{βα} e^{−U}`.
pub fn effective_energy(energy: &Tensor, target: &Region) -> Result<Tensor> {
    energy.neg_log_sum_exp(target)
}

/// `Φ_{αβ}(h) = F^{βα}(Σ_{β' ∈ Λ^α ∖ Λ^β} h_{β'})` on every arrow.
pub fn phi_field(lattice: &RegionLattice, h: &Field0) -> Result<Field1> {
    h.check(lattice)?;
    let vars = lattice.variables();
    let mut tensors = Vec::with_capacity(lattice.arrows().len());
    for ar in lattice.arrows() {
        let source = lattice.region(ar.source);
        let mut acc = Tensor::zeros(source, vars);
        for &b in lattice.below(ar.source) {
            if !lattice.includes(ar.target, b) {
                acc.add_assign(&h.get(b).extend(source, vars)?)?;
            }
        }
        tensors.push(effective_energy(&acc, lattice.region(ar.target))?);
    }
    let mut out = Field1::zeros(lattice);
    for (k, t) in tensors.into_iter().enumerate() {
        *out.get_mut(k) = t;
    }
    Ok(out)
}

/// Effective gradient `∇F(H)_{αβ} = H_β − F^{βα}(H_α)`.
pub fn effective_gradient(lattice: &RegionLattice, hamiltonians: &Field0) -> Result<Field1> {
    hamiltonians.check(lattice)?;
    let mut out = Field1::zeros(lattice);
    for (k, ar) in lattice.arrows().iter().enumerate() {
        let f = effective_energy(hamiltonians.get(ar.source), lattice.region(ar.target))?;
        *out.get_mut(k) = hamiltonians.get(ar.target).sub(&f)?;
    }
    Ok(out)
}

/// The vector field `Ξ(u) = ∂Φ(u)`.
pub fn xi(lattice: &RegionLattice, u: &Field0) -> Result<Field0> {
    boundary1(lattice, &phi_field(lattice, u)?)
}

/// One explicit Euler step of the flow.
pub fn euler_step(
    lattice: &RegionLattice,
    h: &Field0,
    state: &FlowState,
    config: &FlowConfig,
) -> Result<FlowState> {
    config.validate()?;
    let next = match config.schedule {
        Schedule::Synchronous => synchronous_step(lattice, h, state, config)?,
        Schedule::Sequential => sequential_step(lattice, h, state, config)?,
    };
    let finite = next.u.is_finite() && next.phi.as_ref().is_none_or(Field1::is_finite);
    if !finite || !next.residual.is_finite() {
        return Err(Error::NumericalOverflow { step: next.step });
    }
    Ok(next)
}

fn synchronous_step(
    lattice: &RegionLattice,
    h: &Field0,
    state: &FlowState,
    config: &FlowConfig,
) -> Result<FlowState> {
    match &state.phi {
        None => {
            let mut delta = xi(lattice, &state.u)?;
            delta.scale(config.tau);
            let mut u = state.u.add(&delta)?;
            if config.normalize {
                u.center();
            }
            Ok(FlowState {
                u,
                phi: None,
                step: state.step + 1,
                residual: delta.centered_sup_norm(),
            })
        }
        Some(phi) => {
            let mut delta = phi_field(lattice, &state.u)?;
            delta.scale(config.tau);
            let mut next = phi.clone();
            next.axpy(1.0, &delta)?;
            if config.normalize {
                next.center();
            }
            let u = h.add(&boundary1(lattice, &next)?)?;
            Ok(FlowState {
                u,
                phi: Some(next),
                step: state.step + 1,
                residual: delta.centered_sup_norm(),
            })
        }
    }
}

fn sequential_step(
    lattice: &RegionLattice,
    h: &Field0,
    state: &FlowState,
    config: &FlowConfig,
) -> Result<FlowState> {
    let vars = lattice.variables();
    let mut u = state.u.clone();
    let mut phi = state.phi.clone();
    let mut residual = 0.0f64;
    for (k, ar) in lattice.arrows().iter().enumerate() {
        let source = lattice.region(ar.source);
        let mut acc = Tensor::zeros(source, vars);
        for &b in lattice.below(ar.source) {
            if !lattice.includes(ar.target, b) {
                acc.add_assign(&u.get(b).extend(source, vars)?)?;
            }
        }
        let mut delta = effective_energy(&acc, lattice.region(ar.target))?;
        delta.scale(config.tau);
        residual = residual.max(delta.centered_sup_norm());
        u.get_mut(ar.target).add_assign(&delta)?;
        u.get_mut(ar.source)
            .axpy(-1.0, &delta.extend(source, vars)?)?;
        if let Some(phi) = phi.as_mut() {
            phi.get_mut(k).add_assign(&delta)?;
        }
    }
    if config.normalize {
        match phi.as_mut() {
            None => u.center(),
            Some(phi) => {
                phi.center();
                u = h.add(&boundary1(lattice, phi)?)?;
            }
        }
    }
    Ok(FlowState {
        u,
        phi,
        step: state.step + 1,
        residual,
    })
}

/// Returns `(Σ_α j(u_α), Σ_β c_β j((ζ·u)_β))` on `E_Ω`; the two agree for
/// every `u` and are invariant under the unnormalised synchronous flow.
pub fn conserved_quantity(
    lattice: &RegionLattice,
    u: &Field0,
    counts: &ScalarField0<i64>,
) -> Result<(Tensor, Tensor)> {
    let direct = global_sum(lattice, u)?;
    let big = zeta_action_obs(lattice, u)?;
    let weights: Vec<f64> = counts.values().iter().map(|&c| c as f64).collect();
    let weighted = global_sum(lattice, &big.scale_regions(&weights))?;
    Ok((direct, weighted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub residual: f64,
    pub consistency: f64,
    /// Drift of `Σ_α j(u_α)` since step 0; mean-free part when normalising.
    pub conserved_drift: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    MaxSteps,
    Overflow { step: usize },
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    /// Last finite state.
    pub state: FlowState,
    pub trace: FlowTrace,
    pub status: FlowStatus,
}

impl FlowOutcome {
    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }

    pub fn into_result(self) -> Result<FlowOutcome> {
        match self.status {
            FlowStatus::Converged => Ok(self),
            FlowStatus::MaxSteps => Err(Error::DidNotConverge {
                steps: self.state.step,
                residual: self.state.residual,
            }),
            FlowStatus::Overflow { step } => Err(Error::NumericalOverflow { step }),
        }
    }
}

/// Iterates [`euler_step`] from `u = h` until the residual drops to the
/// tolerance or `max_steps` is reached.
pub fn run_flow(lattice: &RegionLattice, h: &Field0, config: &FlowConfig) -> Result<FlowOutcome> {
    config.validate()?;
    let state = FlowState::initial(lattice, h, config.form)?;
    run_from(lattice, h, state, config)
}

pub fn run_from(
    lattice: &RegionLattice,
    h: &Field0,
    mut state: FlowState,
    config: &FlowConfig,
) -> Result<FlowOutcome> {
    config.validate()?;
    let track = lattice
        .variables()
        .state_count(&lattice.variables().universe())
        <= CONSERVED_TRACKING_LIMIT;
    let origin = if track {
        Some(global_sum(lattice, &state.u)?)
    } else {
        None
    };
    let mut trace = FlowTrace::default();
    let mut status = FlowStatus::MaxSteps;
    for _ in 0..config.max_steps {
        let next = match euler_step(lattice, h, &state, config) {
            Ok(next) => next,
            Err(Error::NumericalOverflow { step }) => {
                status = FlowStatus::Overflow { step };
                break;
            }
            Err(e) => return Err(e),
        };
        state = next;
        let consistency = consistency_residual(lattice, &state.beliefs(lattice)?)?;
        let conserved_drift = match &origin {
            Some(o) => {
                let d = global_sum(lattice, &state.u)?.sub(o)?;
                Some(if config.normalize {
                    d.centered_sup_norm()
                } else {
                    d.sup_norm()
                })
            }
            None => None,
        };
        trace.records.push(TraceRecord {
            step: state.step,
            residual: state.residual,
            consistency,
            conserved_drift,
        });
        if state.residual <= config.tolerance {
            status = FlowStatus::Converged;
            break;
        }
    }
    Ok(FlowOutcome {
        state,
        trace,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointReport {
    pub is_fixed_point: bool,
    pub consistency: f64,
    pub criticality: f64,
}

/// Static fixed-point test: beliefs of `u` consistent within `tolerance`.
///
/// Membership of the beliefs in the admissible family of `h` is not checked
/// here; along the flow it holds by construction.
pub fn is_fixed_point(
    lattice: &RegionLattice,
    basis: &InteractionBasis,
    u: &Field0,
    h: &Field0,
    tolerance: f64,
) -> Result<FixedPointReport> {
    let q = beliefs(lattice, u)?;
    let consistency = consistency_residual(lattice, &q)?;
    let hamiltonians = zeta_action_obs(lattice, h)?;
    let criticality = criticality_residual(lattice, basis, &q, &hamiltonians)?;
    Ok(FixedPointReport {
        is_fixed_point: consistency <= tolerance,
        consistency,
        criticality,
    })
}
