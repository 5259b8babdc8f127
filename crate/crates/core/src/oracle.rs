//! Brute-force exact inference on the global configuration space.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fields::{Field0, StatField};
use crate::lattice::{Region, RegionLattice};
use crate::tensor::Tensor;

/// Largest global configuration space the oracle will enumerate.
pub const MAX_GLOBAL_STATES: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    pub hamiltonian: Tensor,
    pub probability: Tensor,
    pub log_partition: f64,
}

/// Global Gibbs state of `H_Ω = Σ_α j(h_α)`.
pub fn global_gibbs(lattice: &RegionLattice, h: &Field0) -> Result<GlobalState> {
    h.check(lattice)?;
    let vars = lattice.variables();
    let omega = vars.universe();
    let size = vars.state_count(&omega);
    if size > MAX_GLOBAL_STATES {
        return Err(Error::TooLarge(size));
    }
    let mut hamiltonian = Tensor::zeros(&omega, vars);
    for t in h.tensors() {
        hamiltonian.add_assign(&t.extend(&omega, vars)?)?;
    }
    let min = hamiltonian
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let weights = hamiltonian.map(|x| (min - x).exp());
    let total = weights.sum();
    let probability = weights.map(|w| w / total);
    Ok(GlobalState {
        hamiltonian,
        probability,
        log_partition: total.ln() - min,
    })
}

/// Marginals of the global state on every region of the lattice.
pub fn exact_marginal_field(global: &GlobalState, lattice: &RegionLattice) -> Result<StatField> {
    let tensors = lattice
        .regions()
        .iter()
        .map(|r| global.probability.marginal(r))
        .collect::<Result<Vec<_>>>()?;
    StatField::new(lattice, Field0::from_tensors(lattice, tensors)?)
}

/// Whether the bipartite graph linking maximal regions to their nonempty
/// pairwise intersections is a forest. Sufficient only: `true` suggests the
/// Bethe approximation is exact, `false` proves nothing.
pub fn is_tree_like(lattice: &RegionLattice) -> bool {
    let maximal = lattice.maximal();
    let mut meets: BTreeSet<Region> = BTreeSet::new();
    let mut edges = Vec::new();
    for (i, &a) in maximal.iter().enumerate() {
        for &b in &maximal[i + 1..] {
            let m = lattice.region(a).intersection(lattice.region(b));
            if !m.is_empty() {
                meets.insert(m);
            }
        }
    }
    let meets: Vec<Region> = meets.into_iter().collect();
    for (i, &a) in maximal.iter().enumerate() {
        for (j, m) in meets.iter().enumerate() {
            if m.is_subset(lattice.region(a)) {
                edges.push((i, maximal.len() + j));
            }
        }
    }
    let mut parent: Vec<usize> = (0..maximal.len() + meets.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (x, y) in edges {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx == ry {
            return false;
        }
        parent[rx] = ry;
    }
    true
}
