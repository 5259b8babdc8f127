//! The incidence algebra of a region lattice.
//!
//! Elements are scalar functions on pairs `α ⊇ β` (diagonal included) under
//! Dirichlet convolution. `ζ` and `μ` are kept in exact `i64` arithmetic; real
//! elements are obtained with [`IncidenceElement::to_f64`].

use num_traits::{Num, NumCast};

use crate::error::{Error, Result};
use crate::lattice::RegionLattice;

#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceElement<T> {
    size: usize,
    signature: u64,
    entries: Vec<T>,
}

impl<T: Num + Copy> IncidenceElement<T> {
    /// Evaluates `f(α, β)` on every pair `β ⊆ α`; other pairs are zero.
    pub fn from_fn(lattice: &RegionLattice, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = lattice.len();
        let mut entries = vec![T::zero(); n * n];
        for a in 0..n {
            for &b in lattice.below(a) {
                entries[a * n + b] = f(a, b);
            }
        }
        Self {
            size: n,
            signature: lattice.signature(),
            entries,
        }
    }

    /// The Kronecker delta, unit of convolution.
    pub fn delta(lattice: &RegionLattice) -> Self {
        Self::from_fn(lattice, |a, b| if a == b { T::one() } else { T::zero() })
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.entries[a * self.size + b]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check(&self, lattice: &RegionLattice) -> Result<()> {
        lattice.check_same(self.signature)?;
        if self.size != lattice.len() {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }

    /// `(φ * ψ)_{αγ} = Σ_{α ⊇ β ⊇ γ} φ_{αβ} ψ_{βγ}`.
    pub fn convolve(&self, other: &Self, lattice: &RegionLattice) -> Result<Self> {
        self.check(lattice)?;
        other.check(lattice)?;
        Ok(Self::from_fn(lattice, |a, c| {
            lattice
                .below(a)
                .iter()
                .filter(|&&b| lattice.includes(b, c))
                .fold(T::zero(), |acc, &b| acc + self.get(a, b) * other.get(b, c))
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.signature != other.signature || self.size != other.size {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self {
            size: self.size,
            signature: self.signature,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&x, &y)| x - y)
                .collect(),
        })
    }

    /// Left action `(φ·λ)_α = Σ_{β ⊆ α} φ_{αβ} λ_β`.
    pub fn act_left(
        &self,
        field: &ScalarField0<T>,
        lattice: &RegionLattice,
    ) -> Result<ScalarField0<T>> {
        self.check(lattice)?;
        field.check(lattice)?;
        let values = (0..lattice.len())
            .map(|a| {
                lattice
                    .below(a)
                    .iter()
                    .fold(T::zero(), |acc, &b| acc + self.get(a, b) * field.values[b])
            })
            .collect();
        Ok(ScalarField0::new(lattice, values))
    }

    /// Right action `(λ·φ)_β = Σ_{α ⊇ β} λ_α φ_{αβ}`.
    pub fn act_right(
        &self,
        field: &ScalarField0<T>,
        lattice: &RegionLattice,
    ) -> Result<ScalarField0<T>> {
        self.check(lattice)?;
        field.check(lattice)?;
        let values = (0..lattice.len())
            .map(|b| {
                lattice
                    .above(b)
                    .iter()
                    .fold(T::zero(), |acc, &a| acc + field.values[a] * self.get(a, b))
            })
            .collect();
        Ok(ScalarField0::new(lattice, values))
    }
}

impl<T: Num + Copy + NumCast> IncidenceElement<T> {
    pub fn to_f64(&self) -> IncidenceElement<f64> {
        IncidenceElement {
            size: self.size,
            signature: self.signature,
            entries: self
                .entries
                .iter()
                .map(|&x| <f64 as NumCast>::from(x).expect("finite scalar"))
                .collect(),
        }
    }
}

/// `ζ_{αβ} = 1` for every `β ⊆ α`.
pub fn zeta(lattice: &RegionLattice) -> IncidenceElement<i64> {
    IncidenceElement::from_fn(lattice, |_, _| 1)
}

/// The Möbius function, inverse of `ζ`, by the recursion
/// `μ_{αα} = 1`, `μ_{αβ} = −Σ_{α ⊇ γ ⊋ β} μ_{αγ}`.
pub fn mobius(lattice: &RegionLattice) -> IncidenceElement<i64> {
    let n = lattice.len();
    let mut entries = vec![0i64; n * n];
    for a in 0..n {
        entries[a * n + a] = 1;
        // below(a) is ascending in index, i.e. decreasing in inclusion order,
        // so every γ ⊋ β is settled before β
        for &b in lattice.below(a) {
            if b == a {
                continue;
            }
            let s: i64 = lattice
                .below(a)
                .iter()
                .filter(|&&g| g != b && lattice.includes(g, b))
                .map(|&g| entries[a * n + g])
                .sum();
            entries[a * n + b] = -s;
        }
    }
    IncidenceElement {
        size: n,
        signature: lattice.signature(),
        entries,
    }
}

/// The Möbius function as the alternating series `Σ_k (−1)^k (ζ − δ)^{*k}`.
///
/// Exponential in the lattice depth; kept as an independent cross-check of
/// [`mobius`].
pub fn mobius_series(lattice: &RegionLattice) -> IncidenceElement<i64> {
    let delta = IncidenceElement::<i64>::delta(lattice);
    let strict = zeta(lattice).sub(&delta).expect("same lattice");
    let mut total = delta.clone();
    let mut power = delta;
    let mut sign = 1i64;
    // chains have at most dimension() + 1 strict steps
    for _ in 0..=lattice.dimension() {
        power = power.convolve(&strict, lattice).expect("same lattice");
        sign = -sign;
        for (t, p) in total.entries.iter_mut().zip(&power.entries) {
            *t += sign * p;
        }
    }
    total
}

/// Möbius numbers `c_β = Σ_{α ⊇ β} μ_{αβ}`, the Bethe counting weights.
pub fn mobius_numbers(lattice: &RegionLattice) -> ScalarField0<i64> {
    mobius(lattice)
        .act_right(&ScalarField0::constant(lattice, 1), lattice)
        .expect("same lattice")
}

/// A scalar per region.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField0<T> {
    signature: u64,
    values: Vec<T>,
}

impl<T: Num + Copy> ScalarField0<T> {
    pub fn new(lattice: &RegionLattice, values: Vec<T>) -> Self {
        assert_eq!(values.len(), lattice.len(), "one scalar per region");
        Self {
            signature: lattice.signature(),
            values,
        }
    }

    pub fn constant(lattice: &RegionLattice, value: T) -> Self {
        Self::new(lattice, vec![value; lattice.len()])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, a: usize) -> T {
        self.values[a]
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        if self.signature != other.signature {
            return Err(Error::LatticeMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y))
    }

    fn check(&self, lattice: &RegionLattice) -> Result<()> {
        lattice.check_same(self.signature)?;
        if self.values.len() != lattice.len() {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }
}
