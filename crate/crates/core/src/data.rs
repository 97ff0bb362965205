//! Dataset container and label bookkeeping.
//!
//! Labels follow the 1-based class convention used everywhere in this crate:
//! `1..=K` are known classes and `0` marks a row whose label is unknown
//! (a test row). Internally class `k` lives at index `k - 1`.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label value reserved for rows with unknown class.
pub const UNKNOWN: u32 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<u32>,
    num_classes: u32,
}

impl Dataset {
    /// Pairs a feature matrix with labels. Only the shapes are checked here;
    /// label semantics are checked by [`validate`].
    pub fn new(features: Array2<f64>, labels: Vec<u32>, num_classes: u32) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if num_classes == 0 {
            return Err(Error::InvalidParams("number of classes must be positive".into()));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes as usize
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    /// Same features with a different label vector.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Self> {
        Self::new(self.features.clone(), labels, self.num_classes)
    }

    /// Copy of the dataset where the listed rows have their labels set to 0.
    pub fn masked(&self, rows: &[usize]) -> Self {
        let mut labels = self.labels.clone();
        for &r in rows {
            labels[r] = UNKNOWN;
        }
        Self {
            features: self.features.clone(),
            labels,
            num_classes: self.num_classes,
        }
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<u32>, u32) {
        (self.features, self.labels, self.num_classes)
    }
}

/// Per-class counts and the training index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassStats {
    /// `counts[k - 1]` is the number of rows labelled `k`.
    pub counts: Vec<usize>,
    /// Rows with a nonzero label, ascending.
    pub trn: Vec<usize>,
}

impl ClassStats {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    /// Counts without presence checks. Labels must already be in range.
    pub(crate) fn tally(labels: &[u32], num_classes: usize) -> Self {
        let mut counts = vec![0usize; num_classes];
        let mut trn = Vec::new();
        for (i, &y) in labels.iter().enumerate() {
            if y != UNKNOWN {
                counts[y as usize - 1] += 1;
                trn.push(i);
            }
        }
        Self { counts, trn }
    }
}

/// Checks label range, finiteness and class presence, then counts.
pub fn validate(dataset: &Dataset) -> Result<ClassStats> {
    let k = dataset.num_classes;
    for (row, &label) in dataset.labels.iter().enumerate() {
        if label > k {
            return Err(Error::LabelOutOfRange {
                row,
                label,
                num_classes: k,
            });
        }
    }
    for ((row, col), v) in dataset.features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row, col });
        }
    }
    let stats = ClassStats::tally(&dataset.labels, k as usize);
    if stats.trn.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(missing) = stats.counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingClass(missing as u32 + 1));
    }
    Ok(stats)
}
