//! Linear discriminant analysis with a pooled covariance.
//!
//! Scores are `log π_k − ½ (z − μ_k)ᵀ Σ⁻¹ (z − μ_k)`; posteriors are their
//! softmax. A small ridge proportional to the average covariance diagonal is
//! always added before factorisation.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Ridge as a fraction of `trace(Σ) / d`.
pub const RIDGE_FACTOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LdaModel {
    /// Class means, one row per class (class `k` at row `k - 1`).
    pub means: Array2<f64>,
    /// Pooled within-class covariance, ridge already added to the diagonal.
    pub pooled_cov: Array2<f64>,
    pub priors: Vec<f64>,
    pub ridge: f64,
    precision: Option<Array2<f64>>,
    log_priors: Vec<f64>,
}

impl LdaModel {
    /// Rebuilds a model from stored parameters. `pooled_cov` must already
    /// include the ridge.
    pub fn from_parts(means: Array2<f64>, pooled_cov: Array2<f64>, priors: Vec<f64>, ridge: f64) -> Result<Self> {
        let d = means.ncols();
        if pooled_cov.dim() != (d, d) || priors.len() != means.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "means {:?}, covariance {:?}, {} priors",
                means.dim(),
                pooled_cov.dim(),
                priors.len()
            )));
        }
        let precision = spd_inverse(&pooled_cov)?;
        let log_priors = priors.iter().map(|p| p.ln()).collect();
        Ok(Self {
            means,
            pooled_cov,
            priors,
            ridge,
            precision: Some(precision),
            log_priors,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    fn precision(&self) -> Result<&Array2<f64>> {
        self.precision.as_ref().ok_or(Error::NotFitted)
    }

    fn scores_row(&self, z: ArrayView1<'_, f64>, precision: &Array2<f64>, out: &mut [f64]) {
        let mut diff = Array1::zeros(self.dim());
        for (k, mean) in self.means.outer_iter().enumerate() {
            diff.assign(&z);
            diff -= &mean;
            let maha = diff.dot(&precision.dot(&diff));
            out[k] = self.log_priors[k] - 0.5 * maha;
        }
    }

    /// Discriminant scores, one row per sample.
    pub fn scores(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let precision = self.precision()?;
        self.check_dim(z)?;
        let mut out = Array2::zeros((z.nrows(), self.num_classes()));
        for (row, mut o) in z.outer_iter().zip(out.outer_iter_mut()) {
            self.scores_row(row, precision, o.as_slice_mut().expect("contiguous"));
        }
        Ok(out)
    }

    /// Row-stochastic posterior class probabilities.
    pub fn posterior(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut s = self.scores(z)?;
        for mut row in s.outer_iter_mut() {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            row.mapv_inplace(|v| (v - max).exp());
            let total = row.sum();
            row /= total;
        }
        Ok(s)
    }

    pub fn predict(&self, z: ArrayView2<'_, f64>) -> Result<Vec<u32>> {
        Ok(argmax_labels(self.posterior(z)?.view()))
    }

    fn check_dim(&self, z: ArrayView2<'_, f64>) -> Result<()> {
        if z.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.ncols(),
            });
        }
        Ok(())
    }
}

/// 1-based argmax of each row; the first maximum wins.
pub fn argmax_labels(probs: ArrayView2<'_, f64>) -> Vec<u32> {
    probs
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best as u32 + 1
        })
        .collect()
}

fn spd_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let d = a.nrows();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    let m = DMatrix::from_fn(d, d, |i, j| a[[i, j]]);
    let chol = m.cholesky().ok_or(Error::SingularCovariance)?;
    let inv = chol.inverse();
    Ok(Array2::from_shape_fn((d, d), |(i, j)| inv[(i, j)]))
}

/// Fits class means, pooled covariance (denominator `m − K`) and priors.
///
/// `labels` are 1-based and must all be nonzero.
pub fn fit_lda(z: ArrayView2<'_, f64>, labels: &[u32], num_classes: usize) -> Result<LdaModel> {
    let (m, d) = z.dim();
    if labels.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: labels.len(),
        });
    }
    if m < num_classes + 1 {
        return Err(Error::TooFewTrainingRows {
            needed: num_classes + 1,
            found: m,
        });
    }
    let mut counts = vec![0usize; num_classes];
    for &y in labels {
        if y == 0 || y as usize > num_classes {
            return Err(Error::InvalidParams(format!(
                "training label {y} outside 1..={num_classes}"
            )));
        }
        counts[y as usize - 1] += 1;
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::ClassAbsent(k as u32 + 1));
    }

    let mut means = Array2::zeros((num_classes, d));
    for (row, &y) in z.outer_iter().zip(labels) {
        let mut acc = means.row_mut(y as usize - 1);
        acc += &row;
    }
    for (mut mean, &c) in means.outer_iter_mut().zip(&counts) {
        mean /= c as f64;
    }

    let mut cov = Array2::<f64>::zeros((d, d));
    let mut diff = Array1::zeros(d);
    for (row, &y) in z.outer_iter().zip(labels) {
        diff.assign(&row);
        diff -= &means.row(y as usize - 1);
        for a in 0..d {
            for b in 0..=a {
                cov[[a, b]] += diff[a] * diff[b];
            }
        }
    }
    let denom = (m - num_classes) as f64;
    for a in 0..d {
        for b in 0..=a {
            let v = cov[[a, b]] / denom;
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }

    let mut scale = cov.diag().sum() / d as f64;
    if scale <= 0.0 {
        // zero within-class spread: fall back to the magnitude of the means
        scale = means.iter().map(|v| v * v).sum::<f64>() / means.len() as f64;
        if scale <= 0.0 {
            scale = 1.0;
        }
    }
    let ridge = RIDGE_FACTOR * scale;
    for a in 0..d {
        cov[[a, a]] += ridge;
    }
    let priors = counts.iter().map(|&c| c as f64 / m as f64).collect();
    LdaModel::from_parts(means, cov, priors, ridge)
}
