//! Bethe free energy and criticality at three belief fields on a loopy
//! lattice: uniform, exact marginals, and the flow's fixed point.

use bethe_flow::decomposition::InteractionBasis;
use bethe_flow::dynamics::{run_flow, FlowConfig};
use bethe_flow::energy::{projected_gradient_norm, EnergyReport};
use bethe_flow::fields::{zeta_action_obs, Field0, StatField};
use bethe_flow::lattice::{RegionLattice, VariableSpec};
use bethe_flow::oracle::{exact_marginal_field, global_gibbs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bethe_flow::Result<()> {
    let vars: Vec<VariableSpec> = (1..=3).map(|id| VariableSpec::new(id, 2)).collect();
    let lattice = RegionLattice::build(&[[1, 2].into(), [2, 3].into(), [1, 3].into()], &vars)?;
    let basis = InteractionBasis::build(&lattice);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = Field0::random(&lattice, &mut rng, 1.0);
    let hamiltonians = zeta_action_obs(&lattice, &h)?;

    let global = global_gibbs(&lattice, &h)?;
    let exact = exact_marginal_field(&global, &lattice)?;
    let config = FlowConfig {
        tau: 0.5,
        ..FlowConfig::default()
    };
    let fixed = run_flow(&lattice, &h, &config)?
        .into_result()?
        .state
        .beliefs(&lattice)?;

    println!("-ln Z = {:.12}", -global.log_partition);
    println!(
        "{:<10} {:>16} {:>12} {:>12}",
        "beliefs", "F_B", "criticality", "|grad|"
    );
    for (name, q) in [
        ("uniform", StatField::uniform(&lattice)),
        ("exact", exact),
        ("fixed", fixed),
    ] {
        let e = EnergyReport::compute(&lattice, &basis, &q, &hamiltonians)?;
        let grad = projected_gradient_norm(&lattice, &q, &hamiltonians, 1e-6)?;
        println!(
            "{name:<10} {:>16.12} {:>12.3e} {:>12.3e}",
            e.bethe_free_energy, e.criticality_residual, grad
        );
    }
    Ok(())
}
