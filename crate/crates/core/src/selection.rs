//! Multi-kernel fitting: one embedding and LDA per candidate kernel, scored
//! by training cross-entropy, with a thresholded switch away from the
//! inner-product baseline.

use ndarray::{Array2, ArrayView2, Axis};

use crate::data::{validate, Dataset};
use crate::encoder::{build_u, build_weights, embed, Embedding};
use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::lda::{argmax_labels, fit_lda, LdaModel};
use crate::par;

/// Lower clip applied to probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

/// Default switching threshold: a kernel replaces the inner product only if
/// its cross-entropy is at most this fraction of the baseline's.
pub const DEFAULT_SWITCH_THRESHOLD: f64 = 0.7;

/// `−Σ_i Σ_k V(i,k) log T(i,k)` with `T` clipped below at [`LOG_FLOOR`].
pub fn cross_entropy(t: ArrayView2<'_, f64>, v: ArrayView2<'_, f64>) -> Result<f64> {
    if t.dim() != v.dim() {
        return Err(Error::ShapeMismatch(format!(
            "probabilities {:?} vs one-hot {:?}",
            t.dim(),
            v.dim()
        )));
    }
    Ok(t.iter()
        .zip(v.iter())
        .filter(|(_, &vv)| vv != 0.0)
        .map(|(&tt, &vv)| -vv * tt.max(LOG_FLOOR).ln())
        .sum())
}

/// Cross-entropy of posterior rows against 1-based labels.
fn label_cross_entropy(t: ArrayView2<'_, f64>, labels: &[u32]) -> f64 {
    t.outer_iter()
        .zip(labels)
        .map(|(row, &y)| -row[y as usize - 1].max(LOG_FLOOR).ln())
        .sum()
}

/// Index of the kernel to use given per-kernel cross-entropies.
///
/// The overall minimum (first on ties) is taken when it is the baseline or
/// when it is at most `threshold` times the baseline value; otherwise the
/// baseline is kept. A threshold of 1 reduces to a plain argmin.
pub fn select_index(cross_entropies: &[f64], baseline: usize, threshold: f64) -> usize {
    let mut best = 0;
    for (i, &c) in cross_entropies.iter().enumerate() {
        if c < cross_entropies[best] {
            best = i;
        }
    }
    if best != baseline && cross_entropies[best] <= threshold * cross_entropies[baseline] {
        best
    } else {
        baseline
    }
}

/// Result of fitting one candidate kernel.
#[derive(Debug, Clone)]
pub struct KernelScore {
    pub kernel: KernelId,
    pub cross_entropy: f64,
    pub model: LdaModel,
    pub embedding: Embedding,
}

pub fn select_kernel(scores: &[KernelScore], threshold: f64) -> Result<usize> {
    let baseline = scores
        .iter()
        .position(|s| s.kernel == KernelId::InnerProduct)
        .ok_or(Error::NoBaselineKernel)?;
    let ces: Vec<f64> = scores.iter().map(|s| s.cross_entropy).collect();
    Ok(select_index(&ces, baseline, threshold))
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub kernels: Vec<KernelId>,
    pub switch_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            kernels: KernelId::builtins(),
            switch_threshold: DEFAULT_SWITCH_THRESHOLD,
        }
    }
}

impl FitOptions {
    pub fn linear() -> Self {
        Self {
            kernels: vec![KernelId::InnerProduct],
            ..Self::default()
        }
    }

    pub fn with_kernels(kernels: Vec<KernelId>) -> Self {
        Self {
            kernels,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !self.kernels.contains(&KernelId::InnerProduct) {
            return Err(Error::NoBaselineKernel);
        }
        if !(self.switch_threshold > 0.0 && self.switch_threshold <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "switch threshold must lie in (0, 1], got {}",
                self.switch_threshold
            )));
        }
        Ok(())
    }
}

/// A fitted multi-kernel encoder classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    /// K×p class representatives.
    pub u: Array2<f64>,
    pub kernel_ids: Vec<KernelId>,
    pub cross_entropies: Vec<f64>,
    /// LDA fitted for each candidate, in `kernel_ids` order.
    pub candidates: Vec<LdaModel>,
    pub selected: usize,
    pub switch_threshold: f64,
}

impl EncoderModel {
    pub fn kernel(&self) -> &KernelId {
        &self.kernel_ids[self.selected]
    }

    pub fn lda(&self) -> &LdaModel {
        &self.candidates[self.selected]
    }

    pub fn num_classes(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.u.ncols()
    }

    /// Labels and posteriors for new samples using the selected kernel.
    pub fn predict_new(&self, x_new: ArrayView2<'_, f64>) -> Result<Prediction> {
        if self.candidates.is_empty() {
            return Err(Error::NotFitted);
        }
        if x_new.ncols() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: x_new.ncols(),
            });
        }
        let z = embed(x_new, self.u.view(), self.kernel())?;
        let posteriors = self.lda().posterior(z.view())?;
        let labels = argmax_labels(posteriors.view());
        Ok(Prediction { labels, posteriors })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u32>,
    pub posteriors: Array2<f64>,
}

pub fn predict_new(model: &EncoderModel, x_new: ArrayView2<'_, f64>) -> Result<Prediction> {
    model.predict_new(x_new)
}

pub fn fit(dataset: &Dataset, options: &FitOptions) -> Result<EncoderModel> {
    fit_detailed(dataset, options).map(|(model, _)| model)
}

/// Like [`fit`], also returning each candidate's embedding and LDA.
pub fn fit_detailed(dataset: &Dataset, options: &FitOptions) -> Result<(EncoderModel, Vec<KernelScore>)> {
    options.check()?;
    let stats = validate(dataset)?;
    let weights = build_weights(dataset.labels(), &stats)?;
    let x = dataset.features();
    let u = build_u(x, &weights)?;
    let y_trn: Vec<u32> = stats.trn.iter().map(|&i| dataset.labels()[i]).collect();
    let k = dataset.num_classes();

    let scores = par::map_indices(options.kernels.len(), |m| -> Result<KernelScore> {
        let kernel = options.kernels[m].clone();
        let embedding = embed(x, u.view(), &kernel)?;
        let z_trn = embedding.select(Axis(0), &stats.trn);
        let model = fit_lda(z_trn.view(), &y_trn, k)?;
        let t = model.posterior(z_trn.view())?;
        let cross_entropy = label_cross_entropy(t.view(), &y_trn);
        Ok(KernelScore {
            kernel,
            cross_entropy,
            model,
            embedding,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let selected = select_kernel(&scores, options.switch_threshold)?;
    let model = EncoderModel {
        u,
        kernel_ids: scores.iter().map(|s| s.kernel.clone()).collect(),
        cross_entropies: scores.iter().map(|s| s.cross_entropy).collect(),
        candidates: scores.iter().map(|s| s.model.clone()).collect(),
        selected,
        switch_threshold: options.switch_threshold,
    };
    Ok((model, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn cross_entropy_identities() {
        let v = array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        assert_eq!(cross_entropy(v.view(), v.view()).unwrap(), 0.0);
        let uniform = Array2::from_elem((3, 2), 0.5);
        assert_abs_diff_eq!(
            cross_entropy(uniform.view(), v.view()).unwrap(),
            2.0 * 2f64.ln(),
            epsilon = 1e-15
        );
        let t = array![[0.0, 1.0], [0.0, 1.0], [0.3, 0.7]];
        let c = cross_entropy(t.view(), v.view()).unwrap();
        assert_abs_diff_eq!(c, -(1e-12f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(c, 27.631, epsilon = 1e-3);
        assert!(cross_entropy(t.view(), v.slice(ndarray::s![..2, ..])).is_err());
    }

    #[test]
    fn label_form_matches_one_hot_form() {
        let t = array![[0.2, 0.5, 0.3], [0.1, 0.1, 0.8]];
        let v = array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(
            label_cross_entropy(t.view(), &[2, 3]),
            cross_entropy(t.view(), v.view()).unwrap()
        );
    }

    #[test]
    fn switching_rule_examples() {
        assert_eq!(select_index(&[10.0, 6.0, 9.0], 0, 0.7), 1);
        assert_eq!(select_index(&[10.0, 8.0, 9.0], 0, 0.7), 0);
        assert_eq!(select_index(&[5.0], 0, 0.7), 0);
        assert_eq!(select_index(&[10.0, 8.0, 9.0], 0, 1.0), 1);
        assert_eq!(select_index(&[10.0, 7.0, 7.0], 0, 0.7), 1);
        assert_eq!(select_index(&[6.0, 10.0, 3.0], 1, 0.7), 2);
    }

    #[test]
    fn missing_baseline_is_an_error() {
        let ds = Dataset::new(array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.1]], vec![1, 2, 1], 2).unwrap();
        let opts = FitOptions::with_kernels(vec![KernelId::SpearmanRank]);
        assert_eq!(fit(&ds, &opts), Err(Error::NoBaselineKernel));
        let bad = FitOptions {
            switch_threshold: 1.5,
            ..FitOptions::default()
        };
        assert!(matches!(fit(&ds, &bad), Err(Error::InvalidParams(_))));
    }

    proptest! {
        #[test]
        fn selection_is_scale_invariant(ces in proptest::collection::vec(0.01f64..100.0, 1..6), scale in 1e-3f64..1e3, base in 0usize..6) {
            let base = base % ces.len();
            let scaled: Vec<f64> = ces.iter().map(|c| c * scale).collect();
            // scaling by a power of two keeps every comparison exact
            let exact = scale.log2().round().exp2();
            let pow2: Vec<f64> = ces.iter().map(|c| c * exact).collect();
            prop_assert_eq!(select_index(&ces, base, 0.7), select_index(&pow2, base, 0.7));
            let chosen = select_index(&scaled, base, 0.7);
            prop_assert!(chosen == base || scaled[chosen] <= 0.7 * scaled[base] * (1.0 + 1e-12));
        }
    }
}
