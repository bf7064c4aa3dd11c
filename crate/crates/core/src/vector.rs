//! Dense and sparse vectors with deterministic arithmetic.
//!
//! All reductions (dot products, norms, sums) run in ascending index order so
//! that repeated runs on the same inputs are bit-identical. Nothing here is
//! parallelized or reassociated.

use crate::error::{Error, Result};

/// A dense vector of finite `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Wraps `values`, rejecting NaN or infinite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry {bad} in dense vector"
            )));
        }
        Ok(DenseVector { values })
    }

    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            values: vec![0.0; dim],
        }
    }

    /// Convenience constructor for a 1-dimensional vector.
    pub fn scalar(v: f64) -> Result<Self> {
        DenseVector::new(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// The single entry of a 1-dimensional vector.
    pub fn only(&self) -> f64 {
        assert_eq!(self.dim(), 1, "only() requires a 1-dimensional vector");
        self.values[0]
    }

    fn check_dim(&self, other: &DenseVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Elementwise sum.
    pub fn add(&self, other: &DenseVector) -> Result<DenseVector> {
        self.check_dim(other)?;
        Ok(DenseVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        self.check_dim(other)?;
        Ok(DenseVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Scalar multiple. `s` must be finite.
    pub fn scale(&self, s: f64) -> DenseVector {
        assert!(s.is_finite(), "scale factor must be finite");
        DenseVector {
            values: self.values.iter().map(|a| a * s).collect(),
        }
    }

    /// In-place `self += s * other`.
    pub fn add_assign_scaled(&mut self, other: &DenseVector, s: f64) -> Result<()> {
        self.check_dim(other)?;
        assert!(s.is_finite(), "scale factor must be finite");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    /// Inner product, accumulated in ascending index order.
    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        self.check_dim(other)?;
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b;
        }
        Ok(acc)
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        let mut acc = 0.0;
        for a in &self.values {
            acc += a * a;
        }
        acc.sqrt()
    }

    /// Infinity norm. Zero for the empty vector.
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &DenseVector) -> Result<f64> {
        Ok(self.sub(other)?.norm2())
    }

    /// Sum of entries, ascending index order.
    pub fn sum(&self) -> f64 {
        let mut acc = 0.0;
        for a in &self.values {
            acc += a;
        }
        acc
    }
}

/// A sparse vector stored as parallel index/value arrays.
///
/// Indices are 0-based and strictly increasing. Values must be finite;
/// explicit zeros are allowed since some LIBSVM files contain them.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a sparse vector from `(index, value)` pairs.
    pub fn new(pairs: Vec<(usize, f64)>) -> Result<Self> {
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if let Some(&last) = indices.last() {
                if i <= last {
                    return Err(Error::InvalidArgument(format!(
                        "sparse indices must be strictly increasing, got {i} after {last}"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite entry {v} at sparse index {i}"
                )));
            }
            indices.push(i);
            values.push(v);
        }
        Ok(SparseVector { indices, values })
    }

    /// An all-zero sparse vector.
    pub fn empty() -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Number of stored entries (not the ambient dimension).
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Smallest ambient dimension containing all stored indices.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Inner product with a dense vector. Stored indices beyond `w.dim()`
    /// contribute zero, so a model trained on a lower-dimensional split can
    /// still score samples that mention unseen feature indices.
    pub fn dot_dense(&self, w: &DenseVector) -> f64 {
        let mut acc = 0.0;
        for (i, v) in self.iter() {
            if i < w.dim() {
                acc += v * w.get(i);
            }
        }
        acc
    }

    /// Euclidean norm of the stored entries.
    pub fn norm2(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v * v;
        }
        acc.sqrt()
    }

    /// Adds `s * self` into the dense accumulator `acc`, which must be large
    /// enough to hold every stored index.
    pub fn add_into(&self, acc: &mut [f64], s: f64) {
        for (i, v) in self.iter() {
            acc[i] += s * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_rejects_non_finite() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![1.0, -2.5]).is_ok());
    }

    #[test]
    fn dense_dot_example() {
        let a = DenseVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = DenseVector::new(vec![4.0, 5.0, 6.0]).unwrap();
        assert_eq!(a.dot(&b).unwrap(), 32.0);
    }

    #[test]
    fn dense_norms() {
        let v = DenseVector::new(vec![3.0, -4.0]).unwrap();
        assert_eq!(v.norm2(), 5.0);
        assert_eq!(v.norm_inf(), 4.0);
        assert_eq!(DenseVector::zeros(0).norm_inf(), 0.0);
    }

    #[test]
    fn dense_dim_mismatch() {
        let a = DenseVector::zeros(2);
        let b = DenseVector::zeros(3);
        assert!(matches!(
            a.dot(&b),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn dense_arithmetic() {
        let a = DenseVector::new(vec![1.0, 2.0]).unwrap();
        let b = DenseVector::new(vec![0.5, -1.0]).unwrap();
        assert_eq!(a.add(&b).unwrap().as_slice(), &[1.5, 1.0]);
        assert_eq!(a.sub(&b).unwrap().as_slice(), &[0.5, 3.0]);
        assert_eq!(a.scale(2.0).as_slice(), &[2.0, 4.0]);
        let mut c = a.clone();
        c.add_assign_scaled(&b, 2.0).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn sparse_requires_increasing_indices() {
        assert!(SparseVector::new(vec![(0, 1.0), (2, 2.0)]).is_ok());
        assert!(SparseVector::new(vec![(2, 1.0), (2, 2.0)]).is_err());
        assert!(SparseVector::new(vec![(3, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn sparse_dot_dense() {
        let s = SparseVector::new(vec![(1, 2.0), (4, 1.5)]).unwrap();
        let w = DenseVector::new(vec![1.0, 10.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(s.dot_dense(&w), 23.0);
        assert_eq!(s.min_dim(), 5);
        assert_eq!(s.nnz(), 2);
    }

    #[test]
    fn sparse_indices_beyond_dense_dim_contribute_zero() {
        let s = SparseVector::new(vec![(0, 1.0), (9, 5.0)]).unwrap();
        let w = DenseVector::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(s.dot_dense(&w), 2.0);
    }

    #[test]
    fn sparse_add_into() {
        let s = SparseVector::new(vec![(0, 1.0), (2, -2.0)]).unwrap();
        let mut acc = vec![0.0; 3];
        s.add_into(&mut acc, 0.5);
        assert_eq!(acc, vec![0.5, 0.0, -1.0]);
    }
}
