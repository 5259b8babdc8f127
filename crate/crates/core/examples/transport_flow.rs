//! Runs the unnormalised flow with a small step and watches the conserved
//! global energy and the consistency of beliefs along the trajectory.

use bethe_flow::decomposition::{global_sum, InteractionBasis};
use bethe_flow::dynamics::{euler_step, FlowConfig, FlowForm, FlowState};
use bethe_flow::fields::{consistency_residual, Field0};
use bethe_flow::lattice::{RegionLattice, VariableSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bethe_flow::Result<()> {
    let vars: Vec<VariableSpec> = (1..=3).map(|id| VariableSpec::new(id, 2)).collect();
    let lattice = RegionLattice::build(&[[1, 2].into(), [2, 3].into(), [1, 3].into()], &vars)?;
    let basis = InteractionBasis::build(&lattice);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = Field0::random(&lattice, &mut rng, 1.0);
    let origin = global_sum(&lattice, &h)?;

    let config = FlowConfig {
        tau: 0.1,
        normalize: false,
        ..FlowConfig::default()
    };
    let mut state = FlowState::initial(&lattice, &h, FlowForm::Potential)?;
    println!(
        "{:>5} {:>12} {:>12} {:>12} same class",
        "step", "update", "consistency", "drift"
    );
    while state.step < 300 {
        state = euler_step(&lattice, &h, &state, &config)?;
        if state.step % 30 == 0 {
            let q = state.beliefs(&lattice)?;
            let drift = global_sum(&lattice, &state.u)?.sub(&origin)?.sup_norm();
            println!(
                "{:>5} {:>12.3e} {:>12.3e} {:>12.3e} {}",
                state.step,
                state.residual,
                consistency_residual(&lattice, &q)?,
                drift,
                basis.homology_equivalent(&lattice, &state.u, &h)?
            );
        }
    }
    Ok(())
}
