//! Linear-time encoder: class-mean representatives and the n×K embedding.
//!
//! The weight matrix `W` (n×K, `W(i,k) = 1/n_k` when row `i` has label `k`)
//! is never materialised densely. It is kept as one label per row plus the
//! per-class reciprocal counts, so `U = Wᵀ X` is a grouped row sum in O(np).

use ndarray::{Array2, ArrayView2};

use crate::data::{ClassStats, UNKNOWN};
use crate::error::{Error, Result};
use crate::kernels::{kernel_cross, KernelId};

/// n×K embedding of samples against class representatives.
pub type Embedding = Array2<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    labels: Vec<u32>,
    inv_counts: Vec<f64>,
}

impl EncoderWeights {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.inv_counts.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// `W(i, k)` with `k` 1-based.
    pub fn w(&self, i: usize, k: usize) -> f64 {
        if self.labels[i] as usize == k {
            self.inv_counts[k - 1]
        } else {
            0.0
        }
    }

    /// `V(i, k)` with `k` 1-based.
    pub fn v(&self, i: usize, k: usize) -> f64 {
        if self.labels[i] as usize == k {
            1.0
        } else {
            0.0
        }
    }

    pub fn dense_w(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n(), self.num_classes()), |(i, k)| self.w(i, k + 1))
    }

    pub fn dense_v(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n(), self.num_classes()), |(i, k)| self.v(i, k + 1))
    }
}

pub fn build_weights(labels: &[u32], stats: &ClassStats) -> Result<EncoderWeights> {
    let k = stats.num_classes();
    let recount = ClassStats::tally(labels, k);
    if labels.iter().any(|&y| y as usize > k) || recount != *stats {
        return Err(Error::ShapeMismatch("class statistics do not match the labels".into()));
    }
    let inv_counts = stats
        .counts
        .iter()
        .map(|&c| if c > 0 { 1.0 / c as f64 } else { 0.0 })
        .collect();
    Ok(EncoderWeights {
        labels: labels.to_vec(),
        inv_counts,
    })
}

/// `U = Wᵀ X`: row `k` is the mean of the training rows of class `k`.
pub fn build_u(x: ArrayView2<'_, f64>, weights: &EncoderWeights) -> Result<Array2<f64>> {
    if x.nrows() != weights.n() {
        return Err(Error::DimensionMismatch {
            expected: weights.n(),
            found: x.nrows(),
        });
    }
    let mut u = Array2::zeros((weights.num_classes(), x.ncols()));
    for (row, &y) in x.outer_iter().zip(&weights.labels) {
        if y != UNKNOWN {
            let mut acc = u.row_mut(y as usize - 1);
            acc += &row;
        }
    }
    for (mut acc, &inv) in u.outer_iter_mut().zip(&weights.inv_counts) {
        acc *= inv;
    }
    Ok(u)
}

/// Embeds every row of `x`, labelled or not, against the representatives `u`.
pub fn embed(x: ArrayView2<'_, f64>, u: ArrayView2<'_, f64>, kernel: &KernelId) -> Result<Embedding> {
    kernel_cross(x, u, kernel)
}
