//! Closes a set of generators under intersection and prints the incidence
//! structure: regions, arrows, Möbius function and counting numbers.

use bethe_flow::algebra::{mobius, mobius_numbers};
use bethe_flow::lattice::{RegionLattice, VariableSpec};

fn main() -> bethe_flow::Result<()> {
    let vars: Vec<VariableSpec> = (1..=4).map(|id| VariableSpec::new(id, 2)).collect();
    // a 4-cycle of pairwise clusters plus one triple
    let generators = [
        [1, 2].into(),
        [2, 3].into(),
        [3, 4].into(),
        [1, 4].into(),
        vec![1, 2, 3].into(),
    ];
    let lattice = RegionLattice::build(&generators, &vars)?;
    let c = mobius_numbers(&lattice);

    println!(
        "{} regions, nerve dimension {}",
        lattice.len(),
        lattice.dimension()
    );
    for (a, region) in lattice.regions().iter().enumerate() {
        let below: Vec<String> = lattice
            .below(a)
            .iter()
            .map(|&b| lattice.region(b).to_string())
            .collect();
        println!(
            "  {:<10} c = {:>2}   contains {}",
            region.to_string(),
            c.get(a),
            below.join(" ")
        );
    }

    let mu = mobius(&lattice);
    println!("non-trivial Möbius values:");
    for ar in lattice.arrows() {
        let m = mu.get(ar.source, ar.target);
        if m != 0 {
            println!(
                "  mu({}, {}) = {m}",
                lattice.region(ar.source),
                lattice.region(ar.target)
            );
        }
    }

    let omega = lattice.empty_index();
    let total: i64 = lattice.above(omega).iter().map(|&a| c.get(a)).sum();
    println!("sum of counting numbers = {total}");
    Ok(())
}
