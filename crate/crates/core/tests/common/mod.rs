#![allow(dead_code)]

use kec::Dataset;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Class patterns with every row multiplied by its own random power of ten.
///
/// Rank order inside a row carries the class; magnitude carries nothing.
pub fn rescaled_patterns(n: usize, p: usize, k: u32, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let prototypes: Vec<Vec<f64>> = (0..k).map(|_| (0..p).map(|_| std.sample(&mut rng)).collect()).collect();
    let labels: Vec<u32> = (0..n).map(|i| (i as u32 % k) + 1).collect();
    let mut x = Array2::zeros((n, p));
    for (mut row, &y) in x.outer_iter_mut().zip(&labels) {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        for (s, v) in row.iter_mut().enumerate() {
            *v = scale * (prototypes[y as usize - 1][s] + 0.5 * std.sample(&mut rng));
        }
    }
    Dataset::new(x, labels, k).unwrap()
}

/// Random dataset with every class present and some unlabelled rows.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, k: u32) -> Dataset {
    let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-3.0..3.0));
    let mut labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..=k)).collect();
    for (c, y) in labels.iter_mut().take(k as usize).enumerate() {
        *y = c as u32 + 1;
    }
    Dataset::new(x, labels, k).unwrap()
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Sample mean of each row group, keyed by 1-based label.
pub fn class_means(z: &Array2<f64>, labels: &[u32], k: usize) -> Array2<f64> {
    let mut out = Array2::zeros((k, z.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &y) in z.outer_iter().zip(labels) {
        if y > 0 {
            let mut acc = out.row_mut(y as usize - 1);
            acc += &row;
            counts[y as usize - 1] += 1;
        }
    }
    for (mut r, c) in out.outer_iter_mut().zip(counts) {
        r /= c as f64;
    }
    out
}
