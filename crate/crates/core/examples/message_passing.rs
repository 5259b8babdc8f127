//! Message form of the flow with the sequential schedule, compared against
//! the synchronous potential form on a grid of pairwise clusters.

use bethe_flow::dynamics::{run_flow, FlowConfig, FlowForm, Schedule};
use bethe_flow::fields::{consistency_residual, Field0};
use bethe_flow::lattice::{Region, RegionLattice, VariableSpec};
use bethe_flow::oracle::{exact_marginal_field, global_gibbs, is_tree_like};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bethe_flow::Result<()> {
    // 3x3 grid, variables numbered row by row
    let vars: Vec<VariableSpec> = (0..9).map(|id| VariableSpec::new(id, 2)).collect();
    let mut edges: Vec<Region> = Vec::new();
    for i in 0..9u32 {
        if i % 3 != 2 {
            edges.push([i, i + 1].into());
        }
        if i < 6 {
            edges.push([i, i + 3].into());
        }
    }
    let lattice = RegionLattice::build(&edges, &vars)?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = Field0::random(&lattice, &mut rng, 0.5);
    let exact = exact_marginal_field(&global_gibbs(&lattice, &h)?, &lattice)?;
    println!(
        "{} regions, tree-like: {}",
        lattice.len(),
        is_tree_like(&lattice)
    );

    for (form, schedule) in [
        (FlowForm::Potential, Schedule::Synchronous),
        (FlowForm::Message, Schedule::Synchronous),
        (FlowForm::Message, Schedule::Sequential),
    ] {
        let config = FlowConfig {
            tau: 0.5,
            form,
            schedule,
            ..FlowConfig::default()
        };
        let out = run_flow(&lattice, &h, &config)?;
        let q = out.state.beliefs(&lattice)?;
        println!(
            "{form:?}/{schedule:?}: {:?} after {} steps, consistency {:.2e}, error vs exact {:.2e}",
            out.status,
            out.state.step,
            consistency_residual(&lattice, &q)?,
            q.field().sub(exact.field())?.sup_norm()
        );
    }
    Ok(())
}
