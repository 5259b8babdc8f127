#![allow(dead_code)]

use std::path::PathBuf;

use bethe_flow::lattice::{Region, RegionLattice, VarId, VariableSpec};
use rand::Rng;

pub fn specs(cards: &[(VarId, usize)]) -> Vec<VariableSpec> {
    cards
        .iter()
        .map(|&(id, c)| VariableSpec::new(id, c))
        .collect()
}

pub fn diamond() -> RegionLattice {
    RegionLattice::build(
        &[[1, 2].into(), [2, 3].into()],
        &specs(&[(1, 2), (2, 2), (3, 2)]),
    )
    .unwrap()
}

pub fn triangle() -> RegionLattice {
    RegionLattice::build(
        &[[1, 2].into(), [2, 3].into(), [1, 3].into()],
        &specs(&[(1, 2), (2, 2), (3, 2)]),
    )
    .unwrap()
}

pub fn ternary_triangle() -> RegionLattice {
    RegionLattice::build(
        &[[1, 2].into(), [2, 3].into(), [1, 3].into()],
        &specs(&[(1, 3), (2, 2), (3, 3)]),
    )
    .unwrap()
}

pub fn fixtures() -> Vec<(&'static str, RegionLattice)> {
    vec![
        ("diamond", diamond()),
        ("triangle", triangle()),
        ("ternary", ternary_triangle()),
    ]
}

/// Closure of a few random generators over up to five variables, rejected
/// until it has at most `max_regions` regions.
pub fn random_lattice(rng: &mut impl Rng, max_regions: usize) -> RegionLattice {
    loop {
        let n = rng.gen_range(2..=5u32);
        let vars: Vec<VariableSpec> = (1..=n)
            .map(|id| VariableSpec::new(id, rng.gen_range(2..=3)))
            .collect();
        let count = rng.gen_range(1..=4);
        let generators: Vec<Region> = (0..count)
            .map(|_| {
                let ids: Vec<VarId> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
                Region::new(ids)
            })
            .collect();
        let lattice = RegionLattice::build(&generators, &vars).unwrap();
        if lattice.len() <= max_regions {
            return lattice;
        }
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}
