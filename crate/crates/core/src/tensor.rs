//! Dense real tensors on configuration spaces.
//!
//! A tensor on region `α` stores one value per configuration `x_α ∈ E_α`.
//! Flat indexing is mixed-radix over the region's variables in sorted id
//! order, first variable slowest. For binary variables 1 and 2 the entries of
//! a tensor on `{1,2}` are, in order, `(0,0) (0,1) (1,0) (1,1)`; on a binary
//! `{1}` by ternary `{2}` region the six entries run `(0,0) (0,1) (0,2) (1,0)
//! (1,1) (1,2)`. The empty region has a single entry.

use crate::error::{Error, Result};
use crate::lattice::{Region, Variables};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    region: Region,
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl Tensor {
    pub fn zeros(region: &Region, vars: &Variables) -> Self {
        Self::constant(region, vars, 0.0)
    }

    pub fn constant(region: &Region, vars: &Variables, value: f64) -> Self {
        let dims = vars.dims(region);
        let len = dims.iter().product();
        Self {
            region: region.clone(),
            dims,
            values: vec![value; len],
        }
    }

    pub fn from_values(region: &Region, vars: &Variables, values: Vec<f64>) -> Result<Self> {
        vars.check(region)?;
        let dims = vars.dims(region);
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "region {region} has {len} states but {} values were given",
                values.len()
            )));
        }
        Ok(Self {
            region: region.clone(),
            dims,
            values,
        })
    }

    /// Builds a tensor from a function of the configuration (one index per variable).
    pub fn from_fn(region: &Region, vars: &Variables, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let dims = vars.dims(region);
        let len: usize = dims.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            values.push(f(&idx));
            increment(&mut idx, &dims);
        }
        Self {
            region: region.clone(),
            dims,
            values,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.region != other.region || self.values.len() != other.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor on {} combined with tensor on {}",
                self.region, other.region
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        self.axpy(1.0, other)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Tensor) -> Result<()> {
        self.same_shape(other)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.values {
            *x *= a;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            region: self.region.clone(),
            dims: self.dims.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Sup-norm after removing the mean.
    pub fn centered_sup_norm(&self) -> f64 {
        let m = self.mean();
        self.values
            .iter()
            .fold(0.0, |acc, x| acc.max((x - m).abs()))
    }

    pub fn center(&mut self) {
        let m = self.mean();
        for x in &mut self.values {
            *x -= m;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Cylindrical extension `u ∘ π` to a larger region.
    pub fn extend(&self, target: &Region, vars: &Variables) -> Result<Tensor> {
        if !self.region.is_subset(target) {
            return Err(Error::NotASubregion {
                sub: self.region.clone(),
                sup: target.clone(),
            });
        }
        vars.check(target)?;
        if &self.region == target {
            return Ok(self.clone());
        }
        let dims = vars.dims(target);
        let map = projection_map(target, &dims, &self.region);
        let values = map.iter().map(|&j| self.values[j]).collect();
        Ok(Tensor {
            region: target.clone(),
            dims,
            values,
        })
    }

    /// Sum over the fibres of the projection onto a subregion.
    pub fn marginal(&self, target: &Region) -> Result<Tensor> {
        let (dims, map) = self.fibres(target)?;
        let mut values = vec![0.0; dims.iter().product()];
        for (i, &j) in map.iter().enumerate() {
            values[j] += self.values[i];
        }
        Ok(Tensor {
            region: target.clone(),
            dims,
            values,
        })
    }

    /// `−ln Σ_fibre e^{−self}`, shifted by the fibre minimum for stability.
    pub fn neg_log_sum_exp(&self, target: &Region) -> Result<Tensor> {
        let (dims, map) = self.fibres(target)?;
        let len: usize = dims.iter().product();
        let mut low = vec![f64::INFINITY; len];
        for (i, &j) in map.iter().enumerate() {
            low[j] = low[j].min(self.values[i]);
        }
        let mut acc = vec![0.0; len];
        for (i, &j) in map.iter().enumerate() {
            acc[j] += (low[j] - self.values[i]).exp();
        }
        let values = low.iter().zip(&acc).map(|(m, s)| m - s.ln()).collect();
        Ok(Tensor {
            region: target.clone(),
            dims,
            values,
        })
    }

    fn fibres(&self, target: &Region) -> Result<(Vec<usize>, Vec<usize>)> {
        if !target.is_subset(&self.region) {
            return Err(Error::NotASubregion {
                sub: target.clone(),
                sup: self.region.clone(),
            });
        }
        let dims: Vec<usize> = target
            .vars()
            .iter()
            .map(|v| {
                let k = self.region.vars().binary_search(v).unwrap();
                self.dims[k]
            })
            .collect();
        Ok((dims, projection_map(&self.region, &self.dims, target)))
    }
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..dims.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// For each flat index of `sup`, the flat index of its projection onto `sub`.
pub(crate) fn projection_map(sup: &Region, sup_dims: &[usize], sub: &Region) -> Vec<usize> {
    // stride in `sub` of each variable of `sup` (0 when not in `sub`)
    let mut strides = vec![0usize; sup_dims.len()];
    let mut stride = 1;
    for v in sub.vars().iter().rev() {
        let k = sup.vars().binary_search(v).expect("sub is a subregion");
        strides[k] = stride;
        stride *= sup_dims[k];
    }
    let len: usize = sup_dims.iter().product();
    let mut out = Vec::with_capacity(len);
    let mut idx = vec![0usize; sup_dims.len()];
    let mut flat = 0usize;
    for _ in 0..len {
        out.push(flat);
        for k in (0..sup_dims.len()).rev() {
            idx[k] += 1;
            flat += strides[k];
            if idx[k] < sup_dims[k] {
                break;
            }
            flat -= strides[k] * idx[k];
            idx[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::VariableSpec;

    fn vars() -> Variables {
        Variables::new(&[
            VariableSpec::new(1, 2),
            VariableSpec::new(2, 2),
            VariableSpec::new(3, 3),
        ])
        .unwrap()
    }

    #[test]
    fn empty_region_has_one_entry() {
        let t = Tensor::zeros(&Region::empty(), &vars());
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn from_values_checks_length() {
        let v = vars();
        assert!(Tensor::from_values(&[1, 3].into(), &v, vec![0.0; 6]).is_ok());
        assert!(matches!(
            Tensor::from_values(&[1, 3].into(), &v, vec![0.0; 5]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            Tensor::from_values(&[7].into(), &v, vec![0.0; 2]),
            Err(Error::UnknownVariable(7))
        ));
    }

    #[test]
    fn first_variable_slowest() {
        let v = vars();
        let t = Tensor::from_fn(&[1, 3].into(), &v, |x| (10 * x[0] + x[1]) as f64);
        assert_eq!(t.values(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn extend_from_empty_is_constant() {
        let v = vars();
        let u = Tensor::from_values(&Region::empty(), &v, vec![2.5]).unwrap();
        let e = u.extend(&[1, 3].into(), &v).unwrap();
        assert_eq!(e.values(), &[2.5; 6]);
    }

    #[test]
    fn extend_identity() {
        let v = vars();
        let u = Tensor::from_values(&[2].into(), &v, vec![1.0, 2.0]).unwrap();
        assert_eq!(u.extend(&[2].into(), &v).unwrap(), u);
    }

    #[test]
    fn extend_binary_pair() {
        let v = vars();
        let u = Tensor::from_values(&[2].into(), &v, vec![3.0, 4.0]).unwrap();
        let e = u.extend(&[1, 2].into(), &v).unwrap();
        assert_eq!(e.values(), &[3.0, 4.0, 3.0, 4.0]);
        let u = Tensor::from_values(&[1].into(), &v, vec![3.0, 4.0]).unwrap();
        let e = u.extend(&[1, 2].into(), &v).unwrap();
        assert_eq!(e.values(), &[3.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn extend_rejects_non_subregion() {
        let v = vars();
        let u = Tensor::zeros(&[1, 2].into(), &v);
        assert!(matches!(
            u.extend(&[2, 3].into(), &v),
            Err(Error::NotASubregion { .. })
        ));
        assert!(matches!(
            u.marginal(&[3].into()),
            Err(Error::NotASubregion { .. })
        ));
    }

    #[test]
    fn marginals() {
        let v = vars();
        let w = Tensor::from_values(&[1, 2].into(), &v, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = w.marginal(&[2].into()).unwrap();
        assert!((m.values()[0] - 0.4).abs() < 1e-15);
        assert!((m.values()[1] - 0.6).abs() < 1e-15);
        let total = w.marginal(&Region::empty()).unwrap();
        assert_eq!(total.len(), 1);
        assert!((total.values()[0] - 1.0).abs() < 1e-15);
        assert_eq!(w.marginal(&[1, 2].into()).unwrap(), w);
    }

    #[test]
    fn marginal_of_extension_scales_by_fibre() {
        let v = vars();
        let u = Tensor::from_values(&[2].into(), &v, vec![1.5, -2.0]).unwrap();
        let e = u.extend(&[1, 2, 3].into(), &v).unwrap();
        let back = e.marginal(&[2].into()).unwrap();
        assert_eq!(back.values(), &[9.0, -12.0]);
    }

    #[test]
    fn neg_log_sum_exp_of_zero() {
        let v = vars();
        let u = Tensor::zeros(&[1, 3].into(), &v);
        let f = u.neg_log_sum_exp(&[1].into()).unwrap();
        for x in f.values() {
            assert!((x + 3f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn neg_log_sum_exp_is_stable() {
        let v = vars();
        let u = Tensor::from_values(&[1].into(), &v, vec![1000.0, 1001.0]).unwrap();
        let f = u.neg_log_sum_exp(&Region::empty()).unwrap();
        let expected = 1000.0 - (1.0 + (-1f64).exp()).ln();
        assert!((f.values()[0] - expected).abs() < 1e-12);
    }
}
