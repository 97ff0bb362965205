//! Quadratic-time reference path: full Gram matrix `A`, then `Z = A W`.
//!
//! Kept as a correctness oracle for the encoder and as the timing foil in
//! the scaling benchmark. Not used by kernel selection.

use ndarray::{Array2, ArrayView2};

use crate::data::{validate, Dataset};
use crate::encoder::{build_weights, Embedding};
use crate::error::Result;
use crate::kernels::{kernel_gram, KernelId};
use crate::lda::{fit_lda, LdaModel};
use crate::par;

/// `Z = A W` with `A` the n×n Gram matrix. Covers every row, labelled or not.
pub fn embed_reference(dataset: &Dataset, kernel: &KernelId) -> Result<Embedding> {
    let stats = validate(dataset)?;
    let weights = build_weights(dataset.labels(), &stats)?;
    let gram = kernel_gram(dataset.features(), kernel)?;
    Ok(dense_product(gram.view(), weights.dense_w().view()))
}

/// Row-by-row product in plain summation order.
fn dense_product(a: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, k) = (a.nrows(), w.ncols());
    let rows = par::map_indices(n, |i| {
        let ai = a.row(i);
        (0..k)
            .map(|c| ai.iter().zip(w.column(c)).map(|(x, y)| x * y).sum::<f64>())
            .collect::<Vec<f64>>()
    });
    Array2::from_shape_vec((n, k), rows.concat()).expect("n×K")
}

/// Reference embedding plus an LDA fitted on its training rows.
#[derive(Debug, Clone)]
pub struct ReferenceFit {
    pub embedding: Embedding,
    pub lda: LdaModel,
}

impl ReferenceFit {
    /// Predicted labels for the given rows of the embedding.
    pub fn predict_rows(&self, rows: &[usize]) -> Result<Vec<u32>> {
        let z = self.embedding.select(ndarray::Axis(0), rows);
        self.lda.predict(z.view())
    }
}

pub fn fit_reference(dataset: &Dataset, kernel: &KernelId) -> Result<ReferenceFit> {
    let stats = validate(dataset)?;
    let embedding = embed_reference(dataset, kernel)?;
    let z_trn = embedding.select(ndarray::Axis(0), &stats.trn);
    let y_trn: Vec<u32> = stats.trn.iter().map(|&i| dataset.labels()[i]).collect();
    let lda = fit_lda(z_trn.view(), &y_trn, dataset.num_classes())?;
    Ok(ReferenceFit { embedding, lda })
}
