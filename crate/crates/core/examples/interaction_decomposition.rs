//! Splits observables into interaction components and recovers a flux
//! witnessing that `u` and its projection are homologous.

use bethe_flow::decomposition::{counted_projection_pair, InteractionBasis};
use bethe_flow::fields::{boundary1, Field0, Field1};
use bethe_flow::lattice::{RegionLattice, VariableSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bethe_flow::Result<()> {
    let vars = [
        VariableSpec::new(1, 3),
        VariableSpec::new(2, 2),
        VariableSpec::new(3, 3),
    ];
    let lattice = RegionLattice::build(&[[1, 2].into(), [2, 3].into(), [1, 3].into()], &vars)?;
    let basis = InteractionBasis::build(&lattice);

    println!("region      |E|  dim z");
    for (a, r) in lattice.regions().iter().enumerate() {
        println!(
            "{:<10} {:>4} {:>6}",
            r.to_string(),
            lattice.state_count(a),
            basis.dim(a)
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = Field0::random(&lattice, &mut rng, 1.0);
    let p = basis.project(&lattice, &u)?;
    let flux = basis.reconstruction_flux(&lattice, &u)?;
    let gap = boundary1(&lattice, &flux)?.sub(&p.as_field().sub(&u)?)?;
    println!("|∂phi - (P(u) - u)|  = {:.3e}", gap.sup_norm());

    let phi = Field1::random(&lattice, &mut rng, 1.0);
    let boundary = basis.project(&lattice, &boundary1(&lattice, &phi)?)?;
    println!("|P(∂phi)|            = {:.3e}", boundary.sup_norm());

    let shifted = u.add(&boundary1(&lattice, &phi)?)?;
    println!(
        "u ~ u + ∂phi          : {}",
        basis.homology_equivalent(&lattice, &u, &shifted)?
    );
    println!(
        "u ~ u + random        : {}",
        basis.homology_equivalent(
            &lattice,
            &u,
            &Field0::random(&lattice, &mut rng, 1.0).add(&u)?
        )?
    );

    let (pv, pcv) = counted_projection_pair(&lattice, &basis, &u)?;
    println!(
        "|P(v) - P(cV)|        = {:.3e}",
        pv.as_field().sub(pcv.as_field())?.sup_norm()
    );
    Ok(())
}
