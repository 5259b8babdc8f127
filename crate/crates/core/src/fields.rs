//! Observable and density fields over the nerve of a lattice.
//!
//! A degree-0 field holds one tensor per region, a degree-1 field one tensor
//! per arrow `α → β` living on `E_β`, and a degree-2 field one tensor per
//! 2-chain `α → β → γ` living on `E_γ`. Observables and densities share these
//! shapes and are paired by the counting dot product; the aliases below only
//! record intent.
//!
//! Potentials and messages are kept in log space. Probabilities appear only
//! through [`gibbs_state`].

use rand::Rng;

use crate::algebra::{mobius, zeta, IncidenceElement};
use crate::error::{Error, Result};
use crate::lattice::{Chain, Region, RegionLattice};
use crate::tensor::Tensor;

/// One tensor per region, indexed like [`RegionLattice::regions`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field0 {
    tensors: Vec<Tensor>,
}

/// One tensor per arrow, indexed like [`RegionLattice::arrows`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field1 {
    tensors: Vec<Tensor>,
}

/// One tensor per non-degenerate 2-chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    chains: Vec<Chain>,
    tensors: Vec<Tensor>,
}

pub type ObservableField0 = Field0;
pub type DensityField0 = Field0;
pub type FluxField1 = Field1;
pub type DensityField1 = Field1;

fn sample(rng: &mut impl Rng, scale: f64) -> f64 {
    rng.gen_range(-scale..scale)
}

impl Field0 {
    pub fn zeros(lattice: &RegionLattice) -> Self {
        Self::from_fn(lattice, |_, r| Tensor::zeros(r, lattice.variables()))
    }

    pub fn from_fn(lattice: &RegionLattice, mut f: impl FnMut(usize, &Region) -> Tensor) -> Self {
        Self {
            tensors: lattice
                .regions()
                .iter()
                .enumerate()
                .map(|(a, r)| f(a, r))
                .collect(),
        }
    }

    /// Takes ownership of per-region tensors, checking each one's region.
    pub fn from_tensors(lattice: &RegionLattice, tensors: Vec<Tensor>) -> Result<Self> {
        let field = Self { tensors };
        field.check(lattice)?;
        Ok(field)
    }

    /// Uniform entries in `(−scale, scale)`.
    pub fn random(lattice: &RegionLattice, rng: &mut impl Rng, scale: f64) -> Self {
        Self::from_fn(lattice, |_, r| {
            Tensor::from_fn(r, lattice.variables(), |_| sample(rng, scale))
        })
    }

    pub fn check(&self, lattice: &RegionLattice) -> Result<()> {
        if self.tensors.len() != lattice.len() {
            return Err(Error::LatticeMismatch);
        }
        for (t, r) in self.tensors.iter().zip(lattice.regions()) {
            if t.region() != r || t.len() != lattice.variables().state_count(r) as usize {
                return Err(Error::ShapeMismatch(format!(
                    "field entry on {} where {} was expected",
                    t.region(),
                    r
                )));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn get(&self, a: usize) -> &Tensor {
        &self.tensors[a]
    }

    pub fn get_mut(&mut self, a: usize) -> &mut Tensor {
        &mut self.tensors[a]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        pair_dot(&self.tensors, &other.tensors)
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        pair_axpy(&mut self.tensors, a, &other.tensors)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        self.tensors.iter_mut().for_each(|t| t.scale(a));
    }

    /// Multiplies each region's tensor by its own scalar.
    pub fn scale_regions(&self, weights: &[f64]) -> Self {
        let mut out = self.clone();
        for (t, &w) in out.tensors.iter_mut().zip(weights) {
            t.scale(w);
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.tensors.iter().fold(0.0, |m, t| m.max(t.sup_norm()))
    }

    /// Largest sup-norm after removing each tensor's mean.
    pub fn centered_sup_norm(&self) -> f64 {
        self.tensors
            .iter()
            .fold(0.0, |m, t| m.max(t.centered_sup_norm()))
    }

    /// Re-centres every tensor to mean zero.
    pub fn center(&mut self) {
        self.tensors.iter_mut().for_each(Tensor::center);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }
}

impl Field1 {
    pub fn zeros(lattice: &RegionLattice) -> Self {
        Self::from_fn(lattice, |_, r| Tensor::zeros(r, lattice.variables()))
    }

    /// `f(arrow index, target region)`.
    pub fn from_fn(lattice: &RegionLattice, mut f: impl FnMut(usize, &Region) -> Tensor) -> Self {
        Self {
            tensors: lattice
                .arrows()
                .iter()
                .enumerate()
                .map(|(k, ar)| f(k, lattice.region(ar.target)))
                .collect(),
        }
    }

    pub fn random(lattice: &RegionLattice, rng: &mut impl Rng, scale: f64) -> Self {
        Self::from_fn(lattice, |_, r| {
            Tensor::from_fn(r, lattice.variables(), |_| sample(rng, scale))
        })
    }

    pub fn check(&self, lattice: &RegionLattice) -> Result<()> {
        if self.tensors.len() != lattice.arrows().len() {
            return Err(Error::LatticeMismatch);
        }
        for (t, ar) in self.tensors.iter().zip(lattice.arrows()) {
            if t.region() != lattice.region(ar.target) {
                return Err(Error::ShapeMismatch(format!(
                    "flux entry on {} where {} was expected",
                    t.region(),
                    lattice.region(ar.target)
                )));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn get(&self, k: usize) -> &Tensor {
        &self.tensors[k]
    }

    pub fn get_mut(&mut self, k: usize) -> &mut Tensor {
        &mut self.tensors[k]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        pair_dot(&self.tensors, &other.tensors)
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        pair_axpy(&mut self.tensors, a, &other.tensors)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        self.tensors.iter_mut().for_each(|t| t.scale(a));
    }

    pub fn sup_norm(&self) -> f64 {
        self.tensors.iter().fold(0.0, |m, t| m.max(t.sup_norm()))
    }

    pub fn centered_sup_norm(&self) -> f64 {
        self.tensors
            .iter()
            .fold(0.0, |m, t| m.max(t.centered_sup_norm()))
    }

    pub fn center(&mut self) {
        self.tensors.iter_mut().for_each(Tensor::center);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }
}

impl Field2 {
    pub fn zeros(lattice: &RegionLattice) -> Self {
        Self::from_fn(lattice, |_, r| Tensor::zeros(r, lattice.variables()))
    }

    /// `f(chain index, terminal region)` over `lattice.nerve(2)`.
    pub fn from_fn(lattice: &RegionLattice, mut f: impl FnMut(usize, &Region) -> Tensor) -> Self {
        let chains = lattice.nerve(2);
        let tensors = chains
            .iter()
            .enumerate()
            .map(|(k, ch)| f(k, lattice.region(ch.terminal())))
            .collect();
        Self { chains, tensors }
    }

    pub fn random(lattice: &RegionLattice, rng: &mut impl Rng, scale: f64) -> Self {
        Self::from_fn(lattice, |_, r| {
            Tensor::from_fn(r, lattice.variables(), |_| sample(rng, scale))
        })
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn get_mut(&mut self, k: usize) -> &mut Tensor {
        &mut self.tensors[k]
    }
}

fn pair_dot(a: &[Tensor], b: &[Tensor]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LatticeMismatch);
    }
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x.dot(y)?;
    }
    Ok(s)
}

fn pair_axpy(a: &mut [Tensor], k: f64, b: &[Tensor]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LatticeMismatch);
    }
    for (x, y) in a.iter_mut().zip(b) {
        x.axpy(k, y)?;
    }
    Ok(())
}

/// `(∂φ)_β = Σ_{α ⊋ β} φ_{αβ} − Σ_{γ ⊊ β} j(φ_{βγ})`.
pub fn boundary1(lattice: &RegionLattice, flux: &Field1) -> Result<Field0> {
    flux.check(lattice)?;
    let vars = lattice.variables();
    let mut out = Field0::zeros(lattice);
    // arrows are visited in a fixed order, so the sums are reproducible
    for (k, ar) in lattice.arrows().iter().enumerate() {
        let v = flux.get(k);
        out.tensors[ar.target].add_assign(v)?;
        let up = v.extend(lattice.region(ar.source), vars)?;
        out.tensors[ar.source].axpy(-1.0, &up)?;
    }
    Ok(out)
}

/// Alternating-face boundary of a 2-field: a 2-chain `(α,β,γ)` carrying `v`
/// contributes `+v` to `(β,γ)`, `−v` to `(α,γ)` and `+j(v)` to `(α,β)`.
pub fn boundary2(lattice: &RegionLattice, field: &Field2) -> Result<Field1> {
    let vars = lattice.variables();
    let mut out = Field1::zeros(lattice);
    for (ch, v) in field.chains.iter().zip(&field.tensors) {
        let &[a, b, c] = ch.regions.as_slice() else {
            return Err(Error::ShapeMismatch(
                "2-field entry on a chain of wrong degree".into(),
            ));
        };
        let bc = lattice.arrow_index(b, c).ok_or(Error::LatticeMismatch)?;
        let ac = lattice.arrow_index(a, c).ok_or(Error::LatticeMismatch)?;
        let ab = lattice.arrow_index(a, b).ok_or(Error::LatticeMismatch)?;
        out.tensors[bc].add_assign(v)?;
        out.tensors[ac].axpy(-1.0, v)?;
        out.tensors[ab].add_assign(&v.extend(lattice.region(b), vars)?)?;
    }
    Ok(out)
}

/// `(dω)_{αβ} = ω_β − Σ^{βα} ω_α`, the consistency defect on each arrow.
pub fn differential0(lattice: &RegionLattice, density: &Field0) -> Result<Field1> {
    density.check(lattice)?;
    let mut tensors = Vec::with_capacity(lattice.arrows().len());
    for ar in lattice.arrows() {
        let m = density.get(ar.source).marginal(lattice.region(ar.target))?;
        tensors.push(density.get(ar.target).sub(&m)?);
    }
    Ok(Field1 { tensors })
}

/// Returns `(⟨dω, φ⟩, ⟨ω, ∂φ⟩)`, equal when `d` and `∂` are adjoint.
pub fn adjointness_check(
    lattice: &RegionLattice,
    density: &Field0,
    flux: &Field1,
) -> Result<(f64, f64)> {
    let lhs = differential0(lattice, density)?.dot(flux)?;
    let rhs = density.dot(&boundary1(lattice, flux)?)?;
    Ok((lhs, rhs))
}

/// Left action of an incidence element with injections:
/// `(φ·u)_α = Σ_{β ⊆ α} φ_{αβ} j_{αβ}(u_β)`.
pub fn incidence_action(
    lattice: &RegionLattice,
    element: &IncidenceElement<f64>,
    field: &Field0,
) -> Result<Field0> {
    field.check(lattice)?;
    if element.size() != lattice.len() {
        return Err(Error::LatticeMismatch);
    }
    let vars = lattice.variables();
    let mut out = Field0::zeros(lattice);
    for a in 0..lattice.len() {
        let target = lattice.region(a);
        for &b in lattice.below(a) {
            let w = element.get(a, b);
            if w != 0.0 {
                out.tensors[a].axpy(w, &field.get(b).extend(target, vars)?)?;
            }
        }
    }
    Ok(out)
}

/// Local hamiltonians `H_α = Σ_{β ⊆ α} j(h_β)`.
pub fn zeta_action_obs(lattice: &RegionLattice, field: &Field0) -> Result<Field0> {
    incidence_action(lattice, &zeta(lattice).to_f64(), field)
}

/// Inverse of [`zeta_action_obs`].
pub fn mobius_action_obs(lattice: &RegionLattice, field: &Field0) -> Result<Field0> {
    incidence_action(lattice, &mobius(lattice).to_f64(), field)
}

/// The Gibbs state `e^{−U} / Σ e^{−U}`, computed with a max shift.
pub fn gibbs_state(energy: &Tensor) -> Tensor {
    let low = energy
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut p = energy.map(|u| (low - u).exp());
    let z = p.sum();
    p.scale(1.0 / z);
    p
}

/// A field of strictly positive, normalised beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct StatField(Field0);

impl StatField {
    pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

    pub fn new(lattice: &RegionLattice, field: Field0) -> Result<Self> {
        field.check(lattice)?;
        for t in field.tensors() {
            if t.values().iter().any(|&x| x.is_nan() || x <= 0.0) {
                return Err(Error::NonPositiveBelief(t.region().clone()));
            }
            let s = t.sum();
            if (s - 1.0).abs() > Self::NORMALIZATION_TOLERANCE {
                return Err(Error::NotAProbability(format!(
                    "belief on {} sums to {s}",
                    t.region()
                )));
            }
        }
        Ok(Self(field))
    }

    /// Gibbs states of the local hamiltonians `H = ζ·u`.
    pub fn from_potentials(lattice: &RegionLattice, potentials: &Field0) -> Result<Self> {
        let h = zeta_action_obs(lattice, potentials)?;
        Self::from_hamiltonians(lattice, &h)
    }

    pub fn from_hamiltonians(lattice: &RegionLattice, hamiltonians: &Field0) -> Result<Self> {
        hamiltonians.check(lattice)?;
        Ok(Self(Field0 {
            tensors: hamiltonians.tensors().iter().map(gibbs_state).collect(),
        }))
    }

    pub fn uniform(lattice: &RegionLattice) -> Self {
        Self(Field0::from_fn(lattice, |a, r| {
            Tensor::constant(r, lattice.variables(), 1.0 / lattice.state_count(a) as f64)
        }))
    }

    pub fn field(&self) -> &Field0 {
        &self.0
    }

    pub fn get(&self, a: usize) -> &Tensor {
        self.0.get(a)
    }

    pub fn into_field(self) -> Field0 {
        self.0
    }
}

/// Sup-norm of `dp`; zero exactly on consistent fields.
pub fn consistency_residual(lattice: &RegionLattice, beliefs: &StatField) -> Result<f64> {
    Ok(differential0(lattice, beliefs.field())?.sup_norm())
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

    fn mixed() -> RegionLattice {
        RegionLattice::build(
            &[[1, 2].into(), [2, 3].into(), [1, 3].into(), [3, 4].into()],
            &[
                VariableSpec::new(1, 2),
                VariableSpec::new(2, 3),
                VariableSpec::new(3, 2),
                VariableSpec::new(4, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn boundary_of_zero() {
        let l = diamond();
        assert_eq!(
            boundary1(&l, &Field1::zeros(&l)).unwrap(),
            Field0::zeros(&l)
        );
        assert_eq!(
            boundary2(&l, &Field2::zeros(&l)).unwrap(),
            Field1::zeros(&l)
        );
    }

    #[test]
    fn boundary_of_single_arrow() {
        let l = diamond();
        let (a, b) = (idx(&l, &[1, 2]), idx(&l, &[2]));
        let k = l.arrow_index(a, b).unwrap();
        let mut phi = Field1::zeros(&l);
        phi.get_mut(k).values_mut().copy_from_slice(&[1.0, -2.0]);
        let d = boundary1(&l, &phi).unwrap();
        assert_eq!(d.get(b).values(), &[1.0, -2.0]);
        assert_eq!(d.get(a).values(), &[-1.0, 2.0, -1.0, 2.0]);
        for c in 0..l.len() {
            if c != a && c != b {
                assert_eq!(d.get(c).sup_norm(), 0.0);
            }
        }
    }

    #[test]
    fn boundary_is_globally_acyclic() {
        let l = diamond();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = Field1::random(&l, &mut rng, 1.0);
        let d = boundary1(&l, &phi).unwrap();
        let omega = l.variables().universe();
        let mut total = Tensor::zeros(&omega, l.variables());
        for t in d.tensors() {
            total
                .add_assign(&t.extend(&omega, l.variables()).unwrap())
                .unwrap();
        }
        assert!(total.sup_norm() < 1e-12);
    }

    #[test]
    fn boundary2_of_single_chain() {
        let l = diamond();
        let (a, b, c) = (idx(&l, &[1, 2]), idx(&l, &[2]), idx(&l, &[]));
        let mut psi = Field2::zeros(&l);
        let k = psi
            .chains()
            .iter()
            .position(|ch| ch.regions == vec![a, b, c])
            .unwrap();
        psi.get_mut(k).values_mut()[0] = 2.5;
        let d = boundary2(&l, &psi).unwrap();
        assert_eq!(d.get(l.arrow_index(b, c).unwrap()).values(), &[2.5]);
        assert_eq!(d.get(l.arrow_index(a, c).unwrap()).values(), &[-2.5]);
        assert_eq!(d.get(l.arrow_index(a, b).unwrap()).values(), &[2.5, 2.5]);
    }

    #[test]
    fn boundary_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [diamond(), triangle(), mixed()] {
            for _ in 0..10 {
                let psi = Field2::random(&l, &mut rng, 1.0);
                let dd = boundary1(&l, &boundary2(&l, &psi).unwrap()).unwrap();
                assert!(dd.sup_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn differential_examples() {
        let l = diamond();
        let u = StatField::uniform(&l);
        assert_eq!(differential0(&l, u.field()).unwrap().sup_norm(), 0.0);
        assert_eq!(consistency_residual(&l, &u).unwrap(), 0.0);

        let mut p = u.into_field();
        let b = idx(&l, &[2]);
        p.get_mut(b).values_mut().copy_from_slice(&[0.3, 0.7]);
        let dp = differential0(&l, &p).unwrap();
        let k = l.arrow_index(idx(&l, &[1, 2]), b).unwrap();
        let v = dp.get(k).values();
        assert!((v[0] + 0.2).abs() < 1e-15 && (v[1] - 0.2).abs() < 1e-15);
        let p = StatField::new(&l, p).unwrap();
        assert!((consistency_residual(&l, &p).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn d_is_adjoint_to_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in [diamond(), triangle(), mixed()] {
            let omega = Field0::random(&l, &mut rng, 1.0);
            let phi = Field1::random(&l, &mut rng, 1.0);
            let (lhs, rhs) = adjointness_check(&l, &omega, &phi).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
            let (lhs, rhs) = adjointness_check(&l, &omega, &Field1::zeros(&l)).unwrap();
            assert_eq!((lhs, rhs), (0.0, 0.0));
        }
    }

    #[test]
    fn zeta_action_examples() {
        let l = diamond();
        let e = l.empty_index();
        let mut h = Field0::zeros(&l);
        h.get_mut(e).values_mut()[0] = 1.75;
        let hh = zeta_action_obs(&l, &h).unwrap();
        for t in hh.tensors() {
            assert!(t.values().iter().all(|&x| x == 1.75));
        }

        let b = idx(&l, &[2]);
        let mut h = Field0::zeros(&l);
        h.get_mut(b).values_mut().copy_from_slice(&[1.0, 2.0]);
        let hh = zeta_action_obs(&l, &h).unwrap();
        assert_eq!(hh.get(idx(&l, &[1, 2])).values(), &[1.0, 2.0, 1.0, 2.0]);
        assert_eq!(hh.get(idx(&l, &[2, 3])).values(), &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(hh.get(b).values(), &[1.0, 2.0]);
        assert_eq!(hh.get(e).values(), &[0.0]);
    }

    #[test]
    fn mobius_action_inverts_zeta_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in [diamond(), triangle(), mixed()] {
            let h = Field0::random(&l, &mut rng, 1.0);
            let back = mobius_action_obs(&l, &zeta_action_obs(&l, &h).unwrap()).unwrap();
            assert!(back.sub(&h).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn gibbs_examples() {
        let v = crate::lattice::Variables::uniform([1, 2], 2).unwrap();
        let u = Tensor::zeros(&[1, 2].into(), &v);
        assert_eq!(gibbs_state(&u).values(), &[0.25; 4]);
        let u = Tensor::from_values(&[1].into(), &v, vec![0.0, 3f64.ln()]).unwrap();
        let p = gibbs_state(&u);
        assert!((p.values()[0] - 0.75).abs() < 1e-15);
        assert!((p.values()[1] - 0.25).abs() < 1e-15);
        let shifted = gibbs_state(&u.map(|x| x + 123.0));
        for (a, b) in p.values().iter().zip(shifted.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn stat_field_validation() {
        let l = diamond();
        let mut f = StatField::uniform(&l).into_field();
        f.get_mut(0).values_mut()[0] = 0.0;
        assert!(matches!(
            StatField::new(&l, f.clone()),
            Err(Error::NonPositiveBelief(_))
        ));
        f.get_mut(0).values_mut()[0] = 0.5;
        assert!(matches!(
            StatField::new(&l, f),
            Err(Error::NotAProbability(_))
        ));
    }

    #[test]
    fn shape_checks() {
        let l = diamond();
        let t = triangle();
        assert!(boundary1(&l, &Field1::zeros(&t)).is_err());
        assert!(differential0(&l, &Field0::zeros(&t)).is_err());
    }
}
