//! The six synthetic classification settings.
//!
//! Every sample draws its class uniformly from `1..=K`. The coordinate whose
//! index equals the class carries the signal distribution; all others carry
//! the background distribution. Noise variants add a scaled `Uniform(0,1)` to
//! every coordinate, and transformed variants then right-multiply by a fresh
//! p×p matrix with `Uniform(0,1)` entries.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_P: usize = 500;
pub const FULL_P: usize = 5000;
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimSetting {
    UniformHD,
    UniformNoise,
    UniformTransformed,
    NormalHD,
    NormalNoise,
    NormalTransformed,
}

impl SimSetting {
    pub const ALL: [SimSetting; 6] = [
        SimSetting::UniformHD,
        SimSetting::UniformNoise,
        SimSetting::UniformTransformed,
        SimSetting::NormalHD,
        SimSetting::NormalNoise,
        SimSetting::NormalTransformed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimSetting::UniformHD => "uniform-hd",
            SimSetting::UniformNoise => "uniform-noise",
            SimSetting::UniformTransformed => "uniform-transformed",
            SimSetting::NormalHD => "normal-hd",
            SimSetting::NormalNoise => "normal-noise",
            SimSetting::NormalTransformed => "normal-transformed",
        }
    }

    fn is_normal(self) -> bool {
        matches!(
            self,
            SimSetting::NormalHD | SimSetting::NormalNoise | SimSetting::NormalTransformed
        )
    }

    fn has_noise(self) -> bool {
        !matches!(self, SimSetting::UniformHD | SimSetting::NormalHD)
    }

    pub fn is_transformed(self) -> bool {
        matches!(self, SimSetting::UniformTransformed | SimSetting::NormalTransformed)
    }

    fn noise_scale(self) -> f64 {
        if self.is_normal() {
            2.0
        } else {
            0.5
        }
    }

    /// (signal mean, background mean) before noise.
    fn base_means(self) -> (f64, f64) {
        if self.is_normal() {
            (8.0, 1.0)
        } else {
            (2.0, 0.5)
        }
    }
}

impl fmt::Display for SimSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimSetting::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown setting '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub setting: SimSetting,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub seed: u64,
}

impl SimParams {
    pub fn new(setting: SimSetting, n: usize, seed: u64) -> Self {
        Self {
            setting,
            n,
            p: DEFAULT_P,
            k: DEFAULT_K,
            seed,
        }
    }

    pub fn with_dims(mut self, p: usize, k: usize) -> Self {
        self.p = p;
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    fn check(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidParams("n and K must be positive".into()));
        }
        if self.p < self.k {
            return Err(Error::InvalidParams(format!(
                "p = {} is smaller than K = {}",
                self.p, self.k
            )));
        }
        if self.k > u32::MAX as usize {
            return Err(Error::InvalidParams("K too large".into()));
        }
        Ok(())
    }
}

/// A generated dataset together with the transform used, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub dataset: Dataset,
    pub transform: Option<Array2<f64>>,
}

pub fn generate(params: &SimParams) -> Result<SimData> {
    params.check()?;
    let SimParams { setting, n, p, k, seed } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(1..=k as u32)).collect();

    let signal_normal = Normal::new(8.0, 1.0).expect("valid normal");
    let background_normal = Normal::new(1.0, 1.0).expect("valid normal");
    let noise_scale = setting.noise_scale();
    let mut x = Array2::zeros((n, p));
    for (mut row, &y) in x.outer_iter_mut().zip(&labels) {
        let signal_col = y as usize - 1;
        for (s, v) in row.iter_mut().enumerate() {
            let base = match (setting.is_normal(), s == signal_col) {
                (true, true) => signal_normal.sample(&mut rng),
                (true, false) => background_normal.sample(&mut rng),
                (false, true) => rng.random_range(1.0..3.0),
                (false, false) => rng.random::<f64>(),
            };
            *v = if setting.has_noise() {
                base + noise_scale * rng.random::<f64>()
            } else {
                base
            };
        }
    }

    let transform = if setting.is_transformed() {
        let q = Array2::from_shape_fn((p, p), |_| rng.random::<f64>());
        x = x.dot(&q);
        Some(q)
    } else {
        None
    };
    let dataset = Dataset::new(x, labels, k as u32)?;
    Ok(SimData { dataset, transform })
}

/// Exact class-conditional means `E(X | Y = k)`, one row per class.
///
/// Transformed settings need the transform that was drawn with the data.
pub fn analytic_means(params: &SimParams, transform: Option<&Array2<f64>>) -> Result<Array2<f64>> {
    params.check()?;
    let setting = params.setting;
    let (signal, background) = setting.base_means();
    let offset = if setting.has_noise() {
        0.5 * setting.noise_scale()
    } else {
        0.0
    };
    let base = Array2::from_shape_fn((params.k, params.p), |(k, s)| {
        offset + if k == s { signal } else { background }
    });
    if !setting.is_transformed() {
        return Ok(base);
    }
    let q = transform.ok_or_else(|| Error::UnsupportedSetting(format!("{setting} needs its transform matrix")))?;
    if q.dim() != (params.p, params.p) {
        return Err(Error::DimensionMismatch {
            expected: params.p,
            found: q.nrows(),
        });
    }
    Ok(base.dot(q))
}
