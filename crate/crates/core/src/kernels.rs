//! Kernel functions and their batched evaluation.
//!
//! Three built-in kernels are provided: the inner product, the
//! distance-induced kernel `(‖x‖ + ‖u‖ − ‖x − u‖) / 2`, and Spearman rank
//! correlation. The batched routines prepare per-row quantities (norms, rank
//! profiles) with the same helpers the scalar functions use, so a batched
//! entry is bitwise equal to the scalar kernel on the same pair of rows.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::par;

/// Identifier recorded for the distance-to-kernel transform in use.
pub const DISTANCE_TRANSFORM: &str = "origin-centered";

pub type KernelFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A user-supplied kernel.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub func: Arc<KernelFn>,
}

impl CustomKernel {
    pub fn new(name: impl Into<String>, func: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum KernelId {
    InnerProduct,
    DistanceInduced,
    SpearmanRank,
    Custom(CustomKernel),
}

impl PartialEq for KernelId {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (KernelId::Custom(a), KernelId::Custom(b)) => a.name == b.name,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl KernelId {
    pub fn builtins() -> Vec<KernelId> {
        vec![
            KernelId::InnerProduct,
            KernelId::DistanceInduced,
            KernelId::SpearmanRank,
        ]
    }

    pub fn name(&self) -> &str {
        match self {
            KernelId::InnerProduct => "linear",
            KernelId::DistanceInduced => "distance",
            KernelId::SpearmanRank => "spearman",
            KernelId::Custom(c) => &c.name,
        }
    }

    /// Parses a built-in kernel name. Custom kernels cannot be named from text.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "linear" | "inner" | "inner-product" => Ok(KernelId::InnerProduct),
            "distance" | "distance-induced" | "euclidean" => Ok(KernelId::DistanceInduced),
            "spearman" => Ok(KernelId::SpearmanRank),
            other => Err(Error::InvalidParams(format!("unknown kernel '{other}'"))),
        }
    }

    fn is_symmetric(&self) -> bool {
        !matches!(self, KernelId::Custom(_))
    }

    /// Applies the kernel to a single pair of vectors.
    pub fn eval(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        match self {
            KernelId::InnerProduct => inner_product(x, u),
            KernelId::DistanceInduced => distance_induced(x, u),
            KernelId::SpearmanRank => spearman(x, u),
            KernelId::Custom(c) => {
                check_len(x, u)?;
                Ok((c.func)(x, u))
            }
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_len(x: &[f64], u: &[f64]) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: u.len(),
        });
    }
    Ok(())
}

#[inline]
fn dot(x: &[f64], u: &[f64]) -> f64 {
    x.iter().zip(u).map(|(a, b)| a * b).sum()
}

#[inline]
fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[inline]
fn distance(x: &[f64], u: &[f64]) -> f64 {
    x.iter()
        .zip(u)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn distance_from_norms(x: &[f64], nx: f64, u: &[f64], nu: f64) -> f64 {
    // Rounding can push collinear pairs a hair below zero.
    (0.5 * (nx + nu - distance(x, u))).max(0.0)
}

pub fn inner_product(x: &[f64], u: &[f64]) -> Result<f64> {
    check_len(x, u)?;
    Ok(dot(x, u))
}

pub fn distance_induced(x: &[f64], u: &[f64]) -> Result<f64> {
    check_len(x, u)?;
    Ok(distance_from_norms(x, norm(x), u, norm(u)))
}

pub fn spearman(x: &[f64], u: &[f64]) -> Result<f64> {
    check_len(x, u)?;
    if x.len() < 2 {
        return Err(Error::DegenerateLength(x.len()));
    }
    Ok(RankProfile::new(x).corr(&RankProfile::new(u)))
}

/// Average ranks (1-based) of `x`; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Centred rank vector and its squared norm; the Pearson correlation of two
/// profiles is the Spearman correlation of the underlying vectors.
#[derive(Debug, Clone)]
struct RankProfile {
    centred: Vec<f64>,
    sq_norm: f64,
}

impl RankProfile {
    fn new(x: &[f64]) -> Self {
        let mean = (x.len() as f64 + 1.0) / 2.0;
        let centred: Vec<f64> = average_ranks(x).into_iter().map(|r| r - mean).collect();
        let sq_norm = dot(&centred, &centred);
        Self { centred, sq_norm }
    }

    fn corr(&self, other: &RankProfile) -> f64 {
        if self.sq_norm == 0.0 || other.sq_norm == 0.0 {
            return 0.0;
        }
        dot(&self.centred, &other.centred) / (self.sq_norm * other.sq_norm).sqrt()
    }
}

/// Row data plus whatever per-row quantity the kernel reuses.
struct Prepared<'a> {
    data: &'a [f64],
    p: usize,
    extra: Extra,
}

enum Extra {
    None,
    Norms(Vec<f64>),
    Ranks(Vec<RankProfile>),
}

impl<'a> Prepared<'a> {
    fn new(data: &'a [f64], rows: usize, p: usize, kernel: &KernelId) -> Self {
        let row = |i: usize| &data[i * p..(i + 1) * p];
        let extra = match kernel {
            KernelId::DistanceInduced => Extra::Norms(par::map_indices(rows, |i| norm(row(i)))),
            KernelId::SpearmanRank => Extra::Ranks(par::map_indices(rows, |i| RankProfile::new(row(i)))),
            _ => Extra::None,
        };
        Self { data, p, extra }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    fn pair(&self, i: usize, other: &Prepared<'_>, j: usize, kernel: &KernelId) -> f64 {
        match (kernel, &self.extra, &other.extra) {
            (KernelId::InnerProduct, _, _) => dot(self.row(i), other.row(j)),
            (KernelId::DistanceInduced, Extra::Norms(a), Extra::Norms(b)) => {
                distance_from_norms(self.row(i), a[i], other.row(j), b[j])
            }
            (KernelId::SpearmanRank, Extra::Ranks(a), Extra::Ranks(b)) => a[i].corr(&b[j]),
            (KernelId::Custom(c), _, _) => (c.func)(self.row(i), other.row(j)),
            _ => unreachable!("prepared rows built for a different kernel"),
        }
    }
}

fn check_spearman_len(kernel: &KernelId, p: usize) -> Result<()> {
    if matches!(kernel, KernelId::SpearmanRank) && p < 2 {
        return Err(Error::DegenerateLength(p));
    }
    Ok(())
}

/// Kernel between every row of `x` (n×p) and every row of `u` (K×p): n×K.
pub fn kernel_cross(x: ArrayView2<'_, f64>, u: ArrayView2<'_, f64>, kernel: &KernelId) -> Result<Array2<f64>> {
    if x.ncols() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            found: x.ncols(),
        });
    }
    let (n, k, p) = (x.nrows(), u.nrows(), x.ncols());
    if n == 0 || k == 0 {
        return Ok(Array2::zeros((n, k)));
    }
    check_spearman_len(kernel, p)?;
    let xs = x.as_standard_layout();
    let us = u.as_standard_layout();
    let xs = xs.as_slice().expect("standard layout");
    let us = us.as_slice().expect("standard layout");
    let px = Prepared::new(xs, n, p, kernel);
    let pu = Prepared::new(us, k, p, kernel);
    let rows = par::map_indices(n, |i| (0..k).map(|j| px.pair(i, &pu, j, kernel)).collect::<Vec<_>>());
    Ok(Array2::from_shape_vec((n, k), rows.concat()).expect("n×K"))
}

/// Full n×n Gram matrix of the rows of `x`.
pub fn kernel_gram(x: ArrayView2<'_, f64>, kernel: &KernelId) -> Result<Array2<f64>> {
    let (n, p) = x.dim();
    if n == 0 {
        return Err(Error::InvalidParams("gram matrix of an empty sample".into()));
    }
    check_spearman_len(kernel, p)?;
    let xs = x.as_standard_layout();
    let xs = xs.as_slice().expect("standard layout");
    let prep = Prepared::new(xs, n, p, kernel);
    let mut gram = Array2::zeros((n, n));
    if kernel.is_symmetric() {
        let upper = par::map_indices(n, |i| {
            (i..n).map(|j| prep.pair(i, &prep, j, kernel)).collect::<Vec<_>>()
        });
        for (i, row) in upper.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                gram[[i, i + off]] = v;
                gram[[i + off, i]] = v;
            }
        }
    } else {
        let rows = par::map_indices(n, |i| {
            (0..n).map(|j| prep.pair(i, &prep, j, kernel)).collect::<Vec<_>>()
        });
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                gram[[i, j]] = v;
            }
        }
    }
    Ok(gram)
}
