//! Local Gibbs free energies and the Bethe free energy.
//!
//! Natural logarithms throughout, inverse temperature 1.

use nalgebra::DVector;

use crate::algebra::{mobius, mobius_numbers, ScalarField0};
use crate::decomposition::{orthonormal_split, require_same, InteractionBasis};
use crate::error::{Error, Result};
use crate::fields::{Field0, StatField};
use crate::lattice::RegionLattice;
use crate::tensor::Tensor;

/// Slack allowed on `Σ p = 1` when a tensor is checked as a probability.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

fn check_probability(p: &Tensor) -> Result<()> {
    if let Some(x) = p.values().iter().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(Error::NotAProbability(format!(
            "entry {x} on {} is negative",
            p.region()
        )));
    }
    let s = p.sum();
    if (s - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::NotAProbability(format!(
            "entries on {} sum to {s}",
            p.region()
        )));
    }
    Ok(())
}

/// Shannon entropy `−Σ p ln p`, with `0 ln 0 = 0`.
pub fn entropy(p: &Tensor) -> Result<f64> {
    check_probability(p)?;
    Ok(raw_entropy(p.values()))
}

fn raw_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum::<f64>()
        + 0.0
}

/// `F(p, H) = E_p[H] − S(p)`.
pub fn gibbs_free_energy(p: &Tensor, hamiltonian: &Tensor) -> Result<f64> {
    if p.region() != hamiltonian.region() || p.len() != hamiltonian.len() {
        return Err(Error::ShapeMismatch(format!(
            "belief on {} paired with hamiltonian on {}",
            p.region(),
            hamiltonian.region()
        )));
    }
    let s = entropy(p)?;
    Ok(p.dot(hamiltonian)? - s)
}

fn weights(c: &ScalarField0<i64>) -> Vec<f64> {
    c.values().iter().map(|&x| x as f64).collect()
}

/// `F_B(p, H) = Σ_β c_β F_β(p_β, H_β)`.
pub fn bethe_free_energy(
    lattice: &RegionLattice,
    beliefs: &StatField,
    hamiltonians: &Field0,
    counts: &ScalarField0<i64>,
) -> Result<f64> {
    hamiltonians.check(lattice)?;
    beliefs.field().check(lattice)?;
    if counts.values().len() != lattice.len() {
        return Err(Error::LatticeMismatch);
    }
    let mut total = 0.0;
    for (a, &c) in counts.values().iter().enumerate() {
        if c != 0 {
            total += c as f64 * gibbs_free_energy(beliefs.get(a), hamiltonians.get(a))?;
        }
    }
    Ok(total)
}

/// Möbius inversion `f_β = Σ_{γ ⊆ β} μ_{βγ} F_γ`.
pub fn free_energy_summands(lattice: &RegionLattice, free_energies: &[f64]) -> Result<Vec<f64>> {
    if free_energies.len() != lattice.len() {
        return Err(Error::LatticeMismatch);
    }
    let field = ScalarField0::new(lattice, free_energies.to_vec());
    Ok(mobius(lattice)
        .to_f64()
        .act_left(&field, lattice)?
        .values()
        .to_vec())
}

/// Distance of `p` from the critical set of `F_B^H`.
///
/// With `r_β = c_β (H_β + ln p_β)`, returns `max_{β ≠ ∅} ‖P^β(r)‖_∞`, which
/// vanishes exactly when `r ∈ Im ∂ + R₀(X)`.
pub fn criticality_residual(
    lattice: &RegionLattice,
    basis: &InteractionBasis,
    beliefs: &StatField,
    hamiltonians: &Field0,
) -> Result<f64> {
    require_same(lattice, basis)?;
    hamiltonians.check(lattice)?;
    let counts = weights(&mobius_numbers(lattice));
    let mut r = Field0::zeros(lattice);
    for (a, &weight) in counts.iter().enumerate() {
        let p = beliefs.get(a);
        if p.values().iter().any(|&x| x.is_nan() || x <= 0.0) {
            return Err(Error::NonPositiveBelief(p.region().clone()));
        }
        let mut t = p.map(f64::ln);
        t.add_assign(hamiltonians.get(a))?;
        t.scale(weight);
        *r.get_mut(a) = t;
    }
    let proj = basis.project(lattice, &r)?;
    let empty = lattice.empty_index();
    Ok((0..lattice.len())
        .filter(|&b| b != empty)
        .map(|b| proj.component(b).sup_norm())
        .fold(0.0, f64::max))
}

/// Per-region energy breakdown at a belief field.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub counts: Vec<i64>,
    pub gibbs_free_energy: Vec<f64>,
    pub entropy: Vec<f64>,
    pub summands: Vec<f64>,
    pub bethe_free_energy: f64,
    pub criticality_residual: f64,
}

impl EnergyReport {
    pub fn compute(
        lattice: &RegionLattice,
        basis: &InteractionBasis,
        beliefs: &StatField,
        hamiltonians: &Field0,
    ) -> Result<Self> {
        let counts = mobius_numbers(lattice);
        let mut gibbs = Vec::with_capacity(lattice.len());
        let mut entropies = Vec::with_capacity(lattice.len());
        for a in 0..lattice.len() {
            entropies.push(entropy(beliefs.get(a))?);
            gibbs.push(gibbs_free_energy(beliefs.get(a), hamiltonians.get(a))?);
        }
        let bethe = bethe_free_energy(lattice, beliefs, hamiltonians, &counts)?;
        Ok(Self {
            summands: free_energy_summands(lattice, &gibbs)?,
            counts: counts.values().to_vec(),
            gibbs_free_energy: gibbs,
            entropy: entropies,
            bethe_free_energy: bethe,
            criticality_residual: criticality_residual(lattice, basis, beliefs, hamiltonians)?,
        })
    }
}

/// Euclidean norm of the numerical gradient of `F_B^H`, projected onto the
/// tangent space of normalised consistent fields (`dp = 0`, `Σ p_β = 1`).
///
/// The gradient is taken by central differences with the given step on every
/// entry of every belief, independently of [`criticality_residual`].
pub fn projected_gradient_norm(
    lattice: &RegionLattice,
    beliefs: &StatField,
    hamiltonians: &Field0,
    step: f64,
) -> Result<f64> {
    hamiltonians.check(lattice)?;
    let counts = weights(&mobius_numbers(lattice));
    let offsets: Vec<usize> = (0..lattice.len())
        .scan(0, |acc, a| {
            let o = *acc;
            *acc += lattice.state_count(a);
            Some(o)
        })
        .collect();
    let total = offsets.last().copied().unwrap_or(0) + lattice.state_count(lattice.len() - 1);

    let mut flat = Vec::with_capacity(total);
    for a in 0..lattice.len() {
        flat.extend_from_slice(beliefs.get(a).values());
    }
    let region_energy = |a: usize, values: &[f64]| -> f64 {
        let h = hamiltonians.get(a).values();
        let e: f64 = values.iter().zip(h).map(|(p, h)| p * h).sum();
        counts[a] * (e - raw_entropy(values))
    };

    let mut grad = DVector::zeros(total);
    for (a, &o) in offsets.iter().enumerate() {
        let n = lattice.state_count(a);
        let mut local = flat[o..o + n].to_vec();
        for x in 0..n {
            let keep = local[x];
            local[x] = keep + step;
            let up = region_energy(a, &local);
            local[x] = keep - step;
            let down = region_energy(a, &local);
            local[x] = keep;
            grad[o + x] = (up - down) / (2.0 * step);
        }
        let mean = grad.rows(o, n).mean();
        for x in 0..n {
            grad[o + x] -= mean;
        }
    }

    // constraint rows: d (one row per arrow and target state), then normalisation
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for ar in lattice.arrows() {
        let src = lattice.region(ar.source);
        let tgt = lattice.region(ar.target);
        let map = crate::tensor::projection_map(src, &lattice.variables().dims(src), tgt);
        for y in 0..lattice.state_count(ar.target) {
            let mut row = DVector::zeros(total);
            row[offsets[ar.target] + y] = 1.0;
            for (x, &j) in map.iter().enumerate() {
                if j == y {
                    row[offsets[ar.source] + x] -= 1.0;
                }
            }
            rows.push(row);
        }
    }
    for a in 0..lattice.len() {
        let mut row = DVector::zeros(total);
        for x in 0..lattice.state_count(a) {
            row[offsets[a] + x] = 1.0;
        }
        rows.push(row);
    }
    let (span, _) = orthonormal_split(total, &rows);
    let projected = &grad - &span * (span.transpose() * &grad);
    Ok(projected.norm())
}
