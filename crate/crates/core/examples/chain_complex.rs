//! The boundary and differential on random fields: `∂∂ = 0`, adjointness of
//! `d` and `∂`, and both Gauss formulas.

use bethe_flow::decomposition::{gauss_cone_defect, gauss_subsystem_defect};
use bethe_flow::fields::{adjointness_check, boundary1, boundary2, Field0, Field1, Field2};
use bethe_flow::lattice::{RegionLattice, VariableSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bethe_flow::Result<()> {
    let vars = [
        VariableSpec::new(1, 2),
        VariableSpec::new(2, 3),
        VariableSpec::new(3, 2),
    ];
    let lattice = RegionLattice::build(&[[1, 2].into(), [2, 3].into(), [1, 3].into()], &vars)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    println!(
        "{} regions, {} arrows, {} two-chains",
        lattice.len(),
        lattice.arrows().len(),
        lattice.nerve(2).len()
    );

    let v = Field2::random(&lattice, &mut rng, 1.0);
    let dd = boundary1(&lattice, &boundary2(&lattice, &v)?)?;
    println!("|∂∂v|          = {:.3e}", dd.sup_norm());

    let w = Field0::random(&lattice, &mut rng, 1.0);
    let phi = Field1::random(&lattice, &mut rng, 1.0);
    let (lhs, rhs) = adjointness_check(&lattice, &w, &phi)?;
    println!("<dw, phi>      = {lhs:.15}");
    println!("<w, ∂phi>      = {rhs:.15}");

    println!(
        "subsystem Gauss defect = {:.3e}",
        gauss_subsystem_defect(&lattice, &phi)?
    );
    println!(
        "cone Gauss defect      = {:.3e}",
        gauss_cone_defect(&lattice, &phi)?
    );
    Ok(())
}
