//! Dataset handling: LIBSVM text parsing and serialization, raw-to-binary
//! label remapping, seeded train/test splitting, and a small generated
//! dataset for desk-scale runs without external files.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::vector::SparseVector;

/// An immutable labeled sample collection. `dimension` is the global
/// maximum feature index + 1, so samples never get truncated against each
/// other.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<SparseVector>,
    labels: Vec<f64>,
    dimension: usize,
}

impl Dataset {
    /// Builds a dataset; the dimension is computed from the samples.
    pub fn new(features: Vec<SparseVector>, labels: Vec<f64>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let dimension = features.iter().map(|f| f.min_dim()).max().unwrap_or(0);
        Ok(Dataset {
            features,
            labels,
            dimension,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn features(&self) -> &[SparseVector] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SparseVector, f64)> + '_ {
        self.features.iter().zip(self.labels.iter().copied())
    }

    /// Forces a larger ambient dimension (e.g. to align a test set with a
    /// train set that has more features).
    pub fn with_dimension(mut self, dimension: usize) -> Result<Self> {
        if dimension < self.dimension {
            return Err(Error::InvalidArgument(format!(
                "dimension {dimension} smaller than required {}",
                self.dimension
            )));
        }
        self.dimension = dimension;
        Ok(self)
    }
}

/// Parses LIBSVM-format text: each nonempty line is a label followed by
/// whitespace-separated `index:value` pairs with 1-based, strictly
/// increasing indices. Content after `#` on a line is a comment. Indices
/// are converted to 0-based internally.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty after trim");
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("malformed label '{label_tok}'"),
        })?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected index:value, got '{tok}'"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                line,
                message: format!("malformed feature index '{idx_str}'"),
            })?;
            if idx == 0 {
                return Err(Error::Format {
                    line,
                    message: "feature indices are 1-based; got 0".into(),
                });
            }
            let val: f64 = val_str.parse().map_err(|_| Error::Parse {
                line,
                message: format!("malformed feature value '{val_str}'"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite feature value '{val_str}'"),
                });
            }
            let zero_based = idx - 1;
            if let Some(&(last, _)) = pairs.last() {
                if zero_based <= last {
                    return Err(Error::Format {
                        line,
                        message: format!(
                            "feature indices must be strictly increasing; {idx} follows {}",
                            last + 1
                        ),
                    });
                }
            }
            pairs.push((zero_based, val));
        }
        features.push(SparseVector::new(pairs).expect("checked increasing and finite"));
        labels.push(label);
    }
    Dataset::new(features, labels)
}

/// Serializes a dataset back to LIBSVM text (1-based indices, one sample
/// per line). `parse_libsvm` of the output reproduces the dataset exactly.
pub fn serialize_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for (f, label) in ds.iter() {
        out.push_str(&format!("{label}"));
        for (i, v) in f.iter() {
            out.push_str(&format!(" {}:{v}", i + 1));
        }
        out.push('\n');
    }
    out
}

/// Rule mapping raw labels onto {-1, +1}. Matching is by exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelRemap {
    positive: Vec<f64>,
    negative: Vec<f64>,
}

impl LabelRemap {
    pub fn new(positive: Vec<f64>, negative: Vec<f64>) -> Result<Self> {
        for v in positive.iter().chain(&negative) {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite raw label {v} in remap"
                )));
            }
        }
        if let Some(shared) = positive.iter().find(|v| negative.contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "raw label {shared} appears in both classes"
            )));
        }
        Ok(LabelRemap { positive, negative })
    }

    /// The identity map for data already labeled with -1/+1.
    pub fn identity() -> Self {
        LabelRemap {
            positive: vec![1.0],
            negative: vec![-1.0],
        }
    }

    fn apply(&self, raw: f64) -> Result<f64> {
        if self.positive.contains(&raw) {
            Ok(1.0)
        } else if self.negative.contains(&raw) {
            Ok(-1.0)
        } else {
            Err(Error::UnmappedLabel(raw))
        }
    }
}

/// Applies a label remap, preserving sample order and feature data.
pub fn remap_labels(ds: &Dataset, map: &LabelRemap) -> Result<Dataset> {
    let labels: Result<Vec<f64>> = ds.labels().iter().map(|&l| map.apply(l)).collect();
    let out = Dataset::new(ds.features().to_vec(), labels?)?;
    out.with_dimension(ds.dimension())
}

/// Deterministically splits a dataset: indices are shuffled by a seeded
/// PRNG and the first `round(n * test_fraction)` go to the test set.
///
/// # Errors
/// `InvalidArgument` when the fraction is outside (0, 1) or either side
/// would be empty.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.n();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::InvalidArgument(format!(
            "test_fraction {test_fraction} leaves an empty side for n = {n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let take = |idx: &[usize]| -> Result<Dataset> {
        let feats = idx.iter().map(|&i| ds.features()[i].clone()).collect();
        let labels = idx.iter().map(|&i| ds.labels()[i]).collect();
        Dataset::new(feats, labels)?.with_dimension(ds.dimension())
    };
    let test = take(&indices[..n_test])?;
    let train = take(&indices[n_test..])?;
    Ok((train, test))
}

/// Generates the desk-scale binary classification dataset used when no
/// external data is configured.
///
/// Samples come in antisymmetric pairs sharing one label: a Gaussian row
/// `a` and its slightly perturbed negation `-a + delta*noise`. A planted
/// direction determines labels, with a 10% flip rate. Because each pair's
/// margins nearly cancel, the mean hinge loss is essentially 1 for every
/// small `w`, which gives the robust objective a flat, well-understood
/// optimum while keeping per-sample losses spread out enough to move the
/// dual variable.
///
/// Returns `(train, test)` with the requested sizes; both come from one
/// seeded stream, so a fixed seed reproduces both sets exactly.
pub fn desk_dataset(
    n_train: usize,
    n_test: usize,
    d: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if n_train < 2 || n_test < 2 || d == 0 {
        return Err(Error::InvalidArgument(
            "desk dataset needs n_train >= 2, n_test >= 2, d >= 1".into(),
        ));
    }
    let scale = 0.5;
    let delta = 0.02;
    let flip = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root_d = (d as f64).sqrt();

    let mut planted: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = planted.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut planted {
        *v /= norm.max(1e-12);
    }

    let mut make = |n: usize| -> Result<Dataset> {
        let half = n.div_ceil(2);
        let mut features = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..half {
            let a: Vec<f64> = (0..d)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal) / root_d)
                .collect();
            let noise: Vec<f64> = (0..d)
                .map(|_| delta * rng.sample::<f64, _>(StandardNormal) / root_d)
                .collect();
            let along: f64 = a.iter().zip(&planted).map(|(x, v)| x * v).sum();
            let mut label = if along >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < flip {
                label = -label;
            }
            let twin: Vec<f64> = a.iter().zip(&noise).map(|(x, p)| -x + p).collect();
            features.push(dense_row_to_sparse(&a)?);
            labels.push(label);
            features.push(dense_row_to_sparse(&twin)?);
            labels.push(label);
        }
        features.truncate(n);
        labels.truncate(n);
        Dataset::new(features, labels)?.with_dimension(d)
    };

    let train = make(n_train)?;
    let test = make(n_test)?;
    Ok((train, test))
}

fn dense_row_to_sparse(row: &[f64]) -> Result<SparseVector> {
    SparseVector::new(
        row.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect(),
    )
}
