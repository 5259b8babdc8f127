//! Interaction decomposition and degree-0 homology.
//!
//! Each observable space splits as `A_α = z_α ⊕ b_α`, where `b_α` is spanned
//! by extensions of observables on strict subregions of `α` in the lattice and
//! `z_α` is its orthogonal complement under the counting inner product. With
//! this choice the summands of `A_α = ⊕_{β ⊆ α} j(z_β)` are mutually
//! orthogonal, so the coherent projector onto `z_β` is
//!
//! ```text
//! P^{βα}(u_α) = Π_{z_β}( Σ^{βα}(u_α) / |E_{α∖β}| )
//! ```
//!
//! i.e. fibre-average down to `β`, then project.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::algebra::mobius_numbers;
use crate::error::{Error, Result};
use crate::fields::{boundary1, zeta_action_obs, Field0, Field1};
use crate::lattice::{Region, RegionLattice};
use crate::tensor::Tensor;

/// Relative cut-off below which singular values count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Default tolerance for homology comparisons.
pub const HOMOLOGY_TOLERANCE: f64 = 1e-9;

/// Orthonormal bases of the interaction subspaces `z_α`.
#[derive(Debug, Clone)]
pub struct InteractionBasis {
    signature: u64,
    // columns are basis vectors of z_α, rows indexed by E_α
    bases: Vec<DMatrix<f64>>,
}

impl InteractionBasis {
    pub fn build(lattice: &RegionLattice) -> Self {
        let vars = lattice.variables();
        let bases = (0..lattice.len())
            .map(|a| {
                let region = lattice.region(a);
                let n = lattice.state_count(a);
                let mut columns = Vec::new();
                for &b in lattice.below(a) {
                    if b == a {
                        continue;
                    }
                    let sub = lattice.region(b);
                    let m = lattice.state_count(b);
                    for x in 0..m {
                        let mut e = Tensor::zeros(sub, vars);
                        e.values_mut()[x] = 1.0;
                        columns.push(DVector::from_vec(
                            e.extend(region, vars).expect("subregion").into_values(),
                        ));
                    }
                }
                orthonormal_split(n, &columns).1
            })
            .collect();
        Self {
            signature: lattice.signature(),
            bases,
        }
    }

    pub fn dim(&self, a: usize) -> usize {
        self.bases[a].ncols()
    }

    /// Basis vectors of `z_α` as tensors on `E_α`.
    pub fn vectors(&self, lattice: &RegionLattice, a: usize) -> Vec<Tensor> {
        let region = lattice.region(a);
        self.bases[a]
            .column_iter()
            .map(|c| {
                Tensor::from_values(region, lattice.variables(), c.iter().copied().collect())
                    .expect("basis shape")
            })
            .collect()
    }

    fn check(&self, lattice: &RegionLattice) -> Result<()> {
        lattice.check_same(self.signature)
    }

    fn project_onto(&self, b: usize, v: &Tensor) -> Tensor {
        let basis = &self.bases[b];
        let x = DVector::from_column_slice(v.values());
        let y = basis * (basis.transpose() * x);
        let mut out = v.clone();
        out.values_mut().copy_from_slice(y.as_slice());
        out
    }

    /// `P^{βα}(u_α)`: the `z_β` component of an observable on `α ⊇ β`.
    pub fn project_pair(
        &self,
        lattice: &RegionLattice,
        b: usize,
        a: usize,
        u: &Tensor,
    ) -> Result<Tensor> {
        self.check(lattice)?;
        let sub = lattice.region(b);
        let mut m = u.marginal(sub)?;
        m.scale(lattice.state_count(b) as f64 / lattice.state_count(a) as f64);
        Ok(self.project_onto(b, &m))
    }

    /// The interaction decomposition `P(u)`, one `z_β` component per region.
    pub fn project(&self, lattice: &RegionLattice, u: &Field0) -> Result<ProjectionResult> {
        self.check(lattice)?;
        u.check(lattice)?;
        let vars = lattice.variables();
        let components = (0..lattice.len())
            .map(|b| {
                let sub = lattice.region(b);
                let mut avg = Tensor::zeros(sub, vars);
                for &a in lattice.above(b) {
                    let mut m = u.get(a).marginal(sub)?;
                    m.scale(lattice.state_count(b) as f64 / lattice.state_count(a) as f64);
                    avg.add_assign(&m)?;
                }
                Ok(self.project_onto(b, &avg))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectionResult {
            field: Field0::from_tensors(lattice, components)?,
        })
    }

    /// The flux `φ_{αβ} = P^{βα}(u_α)`, which satisfies `∂φ = P(u) − u`.
    pub fn reconstruction_flux(&self, lattice: &RegionLattice, u: &Field0) -> Result<Field1> {
        self.check(lattice)?;
        u.check(lattice)?;
        let arrows = lattice.arrows();
        let tensors = arrows
            .iter()
            .map(|ar| self.project_pair(lattice, ar.target, ar.source, u.get(ar.source)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Field1::zeros(lattice);
        for (k, t) in tensors.into_iter().enumerate() {
            *out.get_mut(k) = t;
        }
        Ok(out)
    }

    /// Whether `u − v ∈ Im ∂`, decided by `P(u) = P(v)` within `tol`.
    pub fn homology_equivalent_tol(
        &self,
        lattice: &RegionLattice,
        u: &Field0,
        v: &Field0,
        tol: f64,
    ) -> Result<bool> {
        let diff = self.project(lattice, &u.sub(v)?)?;
        Ok(diff.field.sup_norm() <= tol)
    }

    pub fn homology_equivalent(
        &self,
        lattice: &RegionLattice,
        u: &Field0,
        v: &Field0,
    ) -> Result<bool> {
        self.homology_equivalent_tol(lattice, u, v, HOMOLOGY_TOLERANCE)
    }
}

/// Orthonormal bases of span(columns) and of its orthogonal complement in
/// `R^n`, read off the eigenvectors of the Gram matrix `B Bᵀ`.
pub(crate) fn orthonormal_split(
    n: usize,
    columns: &[DVector<f64>],
) -> (DMatrix<f64>, DMatrix<f64>) {
    if columns.is_empty() {
        return (DMatrix::zeros(n, 0), DMatrix::identity(n, n));
    }
    let b = DMatrix::from_columns(columns);
    let eig = SymmetricEigen::new(&b * b.transpose());
    let top = eig.eigenvalues.max();
    let (span, kernel): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&k| eig.eigenvalues[k] > RANK_TOLERANCE * top);
    let gather = |idx: &[usize]| {
        let mut out = DMatrix::zeros(n, idx.len());
        for (j, &k) in idx.iter().enumerate() {
            out.set_column(j, &eig.eigenvectors.column(k));
        }
        out
    };
    (gather(&span), gather(&kernel))
}

/// `P(u)`: for each region `β`, a tensor in `z_β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    field: Field0,
}

impl ProjectionResult {
    pub fn component(&self, b: usize) -> &Tensor {
        self.field.get(b)
    }

    pub fn as_field(&self) -> &Field0 {
        &self.field
    }

    pub fn sup_norm(&self) -> f64 {
        self.field.sup_norm()
    }
}

/// `ζ_Ω(u) = Σ_α j(u_α)` as one tensor on the full configuration space.
pub fn global_sum(lattice: &RegionLattice, u: &Field0) -> Result<Tensor> {
    u.check(lattice)?;
    let vars = lattice.variables();
    let omega = vars.universe();
    let mut total = Tensor::zeros(&omega, vars);
    for t in u.tensors() {
        total.add_assign(&t.extend(&omega, vars)?)?;
    }
    Ok(total)
}

/// Returns `(P(v), P(cV))` with `V = ζ·v` and `c` the Möbius numbers.
pub fn counted_projection_pair(
    lattice: &RegionLattice,
    basis: &InteractionBasis,
    v: &Field0,
) -> Result<(ProjectionResult, ProjectionResult)> {
    let big = zeta_action_obs(lattice, v)?;
    let weights: Vec<f64> = mobius_numbers(lattice)
        .values()
        .iter()
        .map(|&c| c as f64)
        .collect();
    let cv = big.scale_regions(&weights);
    Ok((basis.project(lattice, v)?, basis.project(lattice, &cv)?))
}

/// Maximum over regions of the Gauss-formula defect on subsystems:
/// `Σ_{β ∈ Λ^α} (∂φ)_β` against `Σ_{δΛ^α} φ`, all extended to `E_α`.
pub fn gauss_subsystem_defect(lattice: &RegionLattice, flux: &Field1) -> Result<f64> {
    let vars = lattice.variables();
    let d = boundary1(lattice, flux)?;
    let mut worst = 0.0f64;
    for a in 0..lattice.len() {
        let region = lattice.region(a);
        let mut lhs = Tensor::zeros(region, vars);
        for &b in lattice.below(a) {
            lhs.add_assign(&d.get(b).extend(region, vars)?)?;
        }
        let mut rhs = Tensor::zeros(region, vars);
        for ar in lattice.coboundary_down_of(a) {
            let k = lattice.arrow_index(ar.source, ar.target).unwrap();
            rhs.add_assign(&flux.get(k).extend(region, vars)?)?;
        }
        worst = worst.max(lhs.sub(&rhs)?.sup_norm());
    }
    Ok(worst)
}

/// Maximum over regions of the Gauss-formula defect on cones, as global
/// observables: `Σ_{α ∈ V_β} (∂φ)_α` against the flux through `δV_β`.
///
/// Arrows of `δV_β` point out of the cone, so they enter with a negative
/// orientation: `Σ_{α ∈ V_β} (∂φ)_α = −Σ_{δV_β} φ`.
pub fn gauss_cone_defect(lattice: &RegionLattice, flux: &Field1) -> Result<f64> {
    let vars = lattice.variables();
    let omega: Region = vars.universe();
    let d = boundary1(lattice, flux)?;
    let mut worst = 0.0f64;
    for b in 0..lattice.len() {
        let mut lhs = Tensor::zeros(&omega, vars);
        for &a in lattice.above(b) {
            lhs.add_assign(&d.get(a).extend(&omega, vars)?)?;
        }
        let mut rhs = Tensor::zeros(&omega, vars);
        for ar in lattice.coboundary_up_of(b) {
            let k = lattice.arrow_index(ar.source, ar.target).unwrap();
            rhs.axpy(-1.0, &flux.get(k).extend(&omega, vars)?)?;
        }
        worst = worst.max(lhs.sub(&rhs)?.sup_norm());
    }
    Ok(worst)
}

/// Largest violation of `Σ_{β ⊆ α} dim z_β = |E_α|` (zero when it holds).
pub fn dimension_defect(lattice: &RegionLattice, basis: &InteractionBasis) -> usize {
    (0..lattice.len())
        .map(|a| {
            let total: usize = lattice.below(a).iter().map(|&b| basis.dim(b)).sum();
            total.abs_diff(lattice.state_count(a))
        })
        .max()
        .unwrap_or(0)
}

pub(crate) fn require_same(lattice: &RegionLattice, basis: &InteractionBasis) -> Result<()> {
    if basis.bases.len() != lattice.len() {
        return Err(Error::LatticeMismatch);
    }
    basis.check(lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::fixtures::*;
    use crate::lattice::VariableSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn idx(l: &RegionLattice, r: &[u32]) -> usize {
        l.index_of(&Region::new(r.to_vec())).unwrap()
    }

    #[test]
    fn interaction_spaces_are_orthogonal_to_all_extensions() {
        let vars = [(1, 3), (2, 2), (3, 2), (4, 2), (5, 3)].map(|(id, c)| VariableSpec::new(id, c));
        let l = RegionLattice::build(
            &[vec![1, 2, 4, 5].into(), [1, 2, 3].into(), [2, 4, 5].into()],
            &vars,
        )
        .unwrap();
        let z = InteractionBasis::build(&l);
        assert_eq!(dimension_defect(&l, &z), 0);
        let v = l.variables();
        for a in 0..l.len() {
            let zs = z.vectors(&l, a);
            for &b in l.below(a).iter().filter(|&&b| b != a) {
                for x in 0..l.state_count(b) {
                    let mut e = Tensor::zeros(l.region(b), v);
                    e.values_mut()[x] = 1.0;
                    let e = e.extend(l.region(a), v).unwrap();
                    for w in &zs {
                        assert!(w.dot(&e).unwrap().abs() < 1e-12);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = Field1::random(&l, &mut rng, 1.0);
        assert!(
            z.project(&l, &boundary1(&l, &phi).unwrap())
                .unwrap()
                .sup_norm()
                < 1e-12
        );
    }

    fn ternary_chain() -> RegionLattice {
        RegionLattice::build(
            &[[1, 2].into(), [2, 3].into(), [1, 2, 4].into()],
            &[
                VariableSpec::new(1, 3),
                VariableSpec::new(2, 2),
                VariableSpec::new(3, 3),
                VariableSpec::new(4, 2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn small_dimensions() {
        let l = diamond();
        let z = InteractionBasis::build(&l);
        assert_eq!(z.dim(l.empty_index()), 1);
        let b = idx(&l, &[2]);
        assert_eq!(z.dim(b), 1);
        let v = &z.vectors(&l, b)[0];
        let s = 1.0 / 2f64.sqrt();
        assert!((v.values()[0].abs() - s).abs() < 1e-12);
        assert!((v.values()[0] + v.values()[1]).abs() < 1e-12);
        assert_eq!(z.dim(idx(&l, &[1, 2])), 2);
        assert_eq!(dimension_defect(&l, &z), 0);
    }

    #[test]
    fn bases_are_orthonormal_and_orthogonal_to_boundaries() {
        let l = ternary_chain();
        let z = InteractionBasis::build(&l);
        assert_eq!(dimension_defect(&l, &z), 0);
        let vars = l.variables();
        for a in 0..l.len() {
            let vs = z.vectors(&l, a);
            for (i, x) in vs.iter().enumerate() {
                for (j, y) in vs.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((x.dot(y).unwrap() - expected).abs() < 1e-10);
                }
                for &b in l.below(a) {
                    if b == a {
                        continue;
                    }
                    for k in 0..l.state_count(b) {
                        let mut e = Tensor::zeros(l.region(b), vars);
                        e.values_mut()[k] = 1.0;
                        let e = e.extend(l.region(a), vars).unwrap();
                        assert!(x.dot(&e).unwrap().abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn projection_of_zero_and_pure_interactions() {
        let l = triangle();
        let z = InteractionBasis::build(&l);
        assert_eq!(z.project(&l, &Field0::zeros(&l)).unwrap().sup_norm(), 0.0);
        for a in 0..l.len() {
            for v in z.vectors(&l, a) {
                let mut u = Field0::zeros(&l);
                *u.get_mut(a) = v.clone();
                let p = z.project(&l, &u).unwrap();
                for b in 0..l.len() {
                    let err = if b == a {
                        p.component(b).sub(&v).unwrap().sup_norm()
                    } else {
                        p.component(b).sup_norm()
                    };
                    assert!(err < 1e-10);
                }
            }
        }
    }

    #[test]
    fn projection_kills_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in [diamond(), triangle(), ternary_chain()] {
            let z = InteractionBasis::build(&l);
            let phi = Field1::random(&l, &mut rng, 1.0);
            let p = z.project(&l, &boundary1(&l, &phi).unwrap()).unwrap();
            assert!(p.sup_norm() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_flux_inverts_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for l in [diamond(), triangle(), ternary_chain()] {
            let z = InteractionBasis::build(&l);
            let u = Field0::random(&l, &mut rng, 1.0);
            let phi = z.reconstruction_flux(&l, &u).unwrap();
            let lhs = boundary1(&l, &phi).unwrap();
            let rhs = z.project(&l, &u).unwrap().as_field().sub(&u).unwrap();
            assert!(lhs.sub(&rhs).unwrap().sup_norm() < 1e-9);
        }
    }

    #[test]
    fn global_sum_examples() {
        let l = diamond();
        assert_eq!(global_sum(&l, &Field0::zeros(&l)).unwrap().sup_norm(), 0.0);
        let mut u = Field0::zeros(&l);
        u.get_mut(l.empty_index()).values_mut()[0] = -0.5;
        let g = global_sum(&l, &u).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.values().iter().all(|&x| x == -0.5));
    }

    #[test]
    fn vanishing_projection_iff_vanishing_global_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for l in [diamond(), triangle()] {
            let z = InteractionBasis::build(&l);
            let u = Field0::random(&l, &mut rng, 1.0);
            assert!(z.project(&l, &u).unwrap().sup_norm() > 1e-3);
            assert!(global_sum(&l, &u).unwrap().sup_norm() > 1e-3);
            // remove the homology class: u + ∂φ with the reconstruction flux
            let p = z.project(&l, &u).unwrap();
            let killed = u.sub(p.as_field()).unwrap();
            assert!(z.project(&l, &killed).unwrap().sup_norm() < 1e-10);
            assert!(global_sum(&l, &killed).unwrap().sup_norm() < 1e-10);
        }
    }

    #[test]
    fn homology_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = triangle();
        let z = InteractionBasis::build(&l);
        let u = Field0::random(&l, &mut rng, 1.0);
        let phi = Field1::random(&l, &mut rng, 1.0);
        let v = u.add(&boundary1(&l, &phi).unwrap()).unwrap();
        assert!(z.homology_equivalent(&l, &u, &v).unwrap());
        let a = idx(&l, &[1, 2]);
        let mut w = u.clone();
        w.get_mut(a).add_assign(&z.vectors(&l, a)[0]).unwrap();
        assert!(!z.homology_equivalent(&l, &u, &w).unwrap());
    }

    #[test]
    fn counted_projection_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for l in [diamond(), triangle(), ternary_chain()] {
            let z = InteractionBasis::build(&l);
            let v = Field0::random(&l, &mut rng, 1.0);
            let (pv, pcv) = counted_projection_pair(&l, &z, &v).unwrap();
            assert!(pv.as_field().sub(pcv.as_field()).unwrap().sup_norm() < 1e-9);
        }
    }

    #[test]
    fn gauss_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for l in [diamond(), triangle(), ternary_chain()] {
            let phi = Field1::random(&l, &mut rng, 1.0);
            assert!(gauss_subsystem_defect(&l, &phi).unwrap() < 1e-10);
            assert!(gauss_cone_defect(&l, &phi).unwrap() < 1e-10);
        }
    }

    #[test]
    fn mismatched_basis() {
        let z = InteractionBasis::build(&diamond());
        let t = triangle();
        assert!(z.project(&t, &Field0::zeros(&t)).is_err());
        assert!(require_same(&t, &z).is_err());
    }
}
