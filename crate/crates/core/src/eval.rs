//! Cross-validation, Monte-Carlo replication and scaling measurements.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{Dataset, UNKNOWN};
use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::par;
use crate::reference::fit_reference;
use crate::selection::{fit, FitOptions, DEFAULT_SWITCH_THRESHOLD};
use crate::simgen::{generate, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Fast encoder over the configured kernel list with selection.
    FastMulti,
    /// Fast encoder with the inner product only.
    FastLinear,
    /// Gram-matrix encoder with the inner product.
    Reference,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FastMulti, Method::FastLinear, Method::Reference];

    pub fn name(self) -> &'static str {
        match self {
            Method::FastMulti => "fast-multi",
            Method::FastLinear => "fast-linear",
            Method::Reference => "reference",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub folds: usize,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// When set, work items run one at a time so timings are not contended.
    pub timing: bool,
    /// Candidates for [`Method::FastMulti`].
    pub kernels: Vec<KernelId>,
    pub switch_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            replicates: 20,
            seed: 0,
            methods: vec![Method::FastMulti, Method::FastLinear],
            timing: true,
            kernels: KernelId::builtins(),
            switch_threshold: DEFAULT_SWITCH_THRESHOLD,
        }
    }
}

impl EvalConfig {
    fn check(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidParams(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidParams("replicates must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParams("no methods selected".into()));
        }
        Ok(())
    }
}

/// Seed for replicate `r`, decorrelated from neighbouring base seeds.
fn replicate_seed(base: u64, r: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64)
}

/// Splits `0..n` into `folds` disjoint sets whose sizes differ by at most one.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds == 0 || n < folds {
        return Err(Error::TooFewSamples { n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += len;
    }
    Ok(out)
}

/// Training view for one fold: the test rows' labels are replaced by 0.
pub fn prepare_fold(dataset: &Dataset, test: &[usize]) -> Result<Dataset> {
    let masked = dataset.masked(test);
    if test.iter().any(|&i| masked.labels()[i] != UNKNOWN) {
        return Err(Error::ShapeMismatch("test fold label leaked into training data".into()));
    }
    Ok(masked)
}

fn error_rate(predicted: &[u32], truth: &[u32]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    wrong as f64 / truth.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub replicate: usize,
    pub fold: usize,
    pub method: Method,
    pub error: f64,
    pub seconds: f64,
    /// Name of the kernel the method ended up using.
    pub kernel: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_time: f64,
    pub std_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub summaries: Vec<MethodSummary>,
    pub records: Vec<EvalRecord>,
}

impl EvalReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Records with timings zeroed, for comparisons that must ignore the clock.
    pub fn without_timings(&self) -> EvalReport {
        let mut out = self.clone();
        for r in &mut out.records {
            r.seconds = 0.0;
        }
        for s in &mut out.summaries {
            s.mean_time = 0.0;
            s.std_time = 0.0;
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>22} {:>24}",
            "method", "error (mean ± std)", "time s (mean ± std)"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<12} {:>10.2}% ± {:>6.2}% {:>12.4} ± {:>8.4}",
                s.method.name(),
                100.0 * s.mean_error,
                100.0 * s.std_error,
                s.mean_time,
                s.std_time
            )?;
        }
        Ok(())
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_method(method: Method, train: &Dataset, test: &[usize], config: &EvalConfig) -> Result<(Vec<u32>, f64, String)> {
    let start = Instant::now();
    let (predicted, kernel) = match method {
        Method::FastMulti | Method::FastLinear => {
            let options = if method == Method::FastLinear {
                FitOptions::linear()
            } else {
                FitOptions {
                    kernels: config.kernels.clone(),
                    switch_threshold: config.switch_threshold,
                }
            };
            let model = fit(train, &options)?;
            let x_test = train.features().select(ndarray::Axis(0), test);
            (
                model.predict_new(x_test.view())?.labels,
                model.kernel().name().to_string(),
            )
        }
        Method::Reference => {
            let fitted = fit_reference(train, &KernelId::InnerProduct)?;
            (fitted.predict_rows(test)?, KernelId::InnerProduct.name().to_string())
        }
    };
    Ok((predicted, start.elapsed().as_secs_f64(), kernel))
}

fn evaluate(datasets: &[Dataset], config: &EvalConfig) -> Result<EvalReport> {
    config.check()?;
    let mut items = Vec::new();
    for (r, data) in datasets.iter().enumerate() {
        let folds = kfold_split(data.n(), config.folds, replicate_seed(config.seed, r))?;
        for (f, test) in folds.into_iter().enumerate() {
            items.push((r, f, test));
        }
    }
    let run_item = |idx: usize| -> Result<Vec<EvalRecord>> {
        let (r, f, test) = &items[idx];
        let data = &datasets[*r];
        let train = prepare_fold(data, test)?;
        let truth: Vec<u32> = test.iter().map(|&i| data.labels()[i]).collect();
        config
            .methods
            .iter()
            .map(|&method| {
                let (predicted, seconds, kernel) = run_method(method, &train, test, config)?;
                Ok(EvalRecord {
                    replicate: *r,
                    fold: *f,
                    method,
                    error: error_rate(&predicted, &truth),
                    seconds,
                    kernel,
                })
            })
            .collect()
    };
    let per_item = if config.timing {
        par::map_indices_seq(items.len(), run_item)
    } else {
        par::map_indices(items.len(), run_item)
    };
    let mut records = Vec::new();
    for item in per_item {
        records.extend(item?);
    }
    let summaries = config
        .methods
        .iter()
        .map(|&method| {
            let errors: Vec<f64> = records.iter().filter(|r| r.method == method).map(|r| r.error).collect();
            let times: Vec<f64> = records
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.seconds)
                .collect();
            let (mean_error, std_error) = mean_std(&errors);
            let (mean_time, std_time) = mean_std(&times);
            MethodSummary {
                method,
                mean_error,
                std_error,
                mean_time,
                std_time,
            }
        })
        .collect();
    Ok(EvalReport { summaries, records })
}

/// Cross-validates a fixed dataset; each replicate draws a fresh split.
pub fn cross_validate(dataset: &Dataset, config: &EvalConfig) -> Result<EvalReport> {
    config.check()?;
    let copies = vec![dataset.clone(); config.replicates];
    evaluate(&copies, config)
}

/// Cross-validates a simulation setting, regenerating the data per replicate.
pub fn cross_validate_sim(params: &SimParams, config: &EvalConfig) -> Result<EvalReport> {
    config.check()?;
    let datasets = (0..config.replicates)
        .map(|r| generate(&params.with_seed(replicate_seed(params.seed ^ config.seed, r))).map(|d| d.dataset))
        .collect::<Result<Vec<_>>>()?;
    evaluate(&datasets, config)
}

/// Which implementations a scaling run times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Paths {
    pub fast: bool,
    pub reference: bool,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            fast: true,
            reference: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kernels: Vec<KernelId>,
    pub paths: Paths,
    /// Timed runs per grid point; the median is reported.
    pub runs: usize,
    /// Each run repeats the operation until at least this long has elapsed.
    pub min_run_seconds: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kernels: vec![KernelId::InnerProduct],
            paths: Paths::default(),
            runs: 5,
            min_run_seconds: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub fast_seconds: Option<f64>,
    pub reference_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub fast_slope: Option<f64>,
    pub reference_slope: Option<f64>,
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.6}"));
        writeln!(f, "{:>8} {:>14} {:>14}", "n", "fast s", "reference s")?;
        for p in &self.points {
            writeln!(
                f,
                "{:>8} {:>14} {:>14}",
                p.n,
                fmt_opt(p.fast_seconds),
                fmt_opt(p.reference_seconds)
            )?;
        }
        let slope = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.3}"));
        writeln!(
            f,
            "log-log slope: fast {}, reference {}",
            slope(self.fast_slope),
            slope(self.reference_slope)
        )
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median seconds per call of `op` over `runs` timed runs.
pub fn time_median(runs: usize, min_run_seconds: f64, mut op: impl FnMut() -> Result<()>) -> Result<f64> {
    // one untimed call warms caches and surfaces errors early
    op()?;
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        let mut iters = 0u32;
        loop {
            op()?;
            iters += 1;
            if start.elapsed().as_secs_f64() >= min_run_seconds {
                break;
            }
        }
        samples.push(start.elapsed().as_secs_f64() / iters as f64);
    }
    Ok(median(samples))
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.len() < 4 {
        return Err(Error::InsufficientGrid(format!(
            "need at least 4 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::InsufficientGrid(
            "grid must be strictly ascending and positive".into(),
        ));
    }
    if grid[grid.len() - 1] < 8 * grid[0] {
        return Err(Error::InsufficientGrid(format!(
            "grid spans {}..{}, needs at least an 8x range",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    Ok(())
}

/// Times the fast and reference paths over a grid of sample sizes.
///
/// Data generation is excluded from every timing.
pub fn bench_scaling(params: &SimParams, n_grid: &[usize], config: &BenchConfig) -> Result<ScalingReport> {
    check_grid(n_grid)?;
    if config.runs < 5 {
        return Err(Error::InvalidParams(format!(
            "need at least 5 runs per point, got {}",
            config.runs
        )));
    }
    let options = FitOptions::with_kernels(config.kernels.clone());
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let data = generate(&params.with_n(n))?.dataset;
        let fast_seconds = if config.paths.fast {
            Some(time_median(config.runs, config.min_run_seconds, || {
                fit(&data, &options).map(|_| ())
            })?)
        } else {
            None
        };
        let reference_seconds = if config.paths.reference {
            Some(time_median(config.runs, config.min_run_seconds, || {
                fit_reference(&data, &KernelId::InnerProduct).map(|_| ())
            })?)
        } else {
            None
        };
        points.push(ScalingPoint {
            n,
            fast_seconds,
            reference_seconds,
        });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let slope = |sel: fn(&ScalingPoint) -> Option<f64>| -> Option<f64> {
        let ts: Option<Vec<f64>> = points.iter().map(sel).collect();
        ts.map(|ts| log_log_slope(&ns, &ts))
    };
    let fast_slope = slope(|p| p.fast_seconds);
    let reference_slope = slope(|p| p.reference_seconds);
    Ok(ScalingReport {
        points,
        fast_slope,
        reference_slope,
    })
}

/// Ratio of fast-path fit times between two kernel lists on the same data.
pub fn kernel_time_ratio(params: &SimParams, many: &[KernelId], few: &[KernelId], runs: usize) -> Result<f64> {
    let data = generate(params)?.dataset;
    let time = |kernels: &[KernelId]| {
        let options = FitOptions::with_kernels(kernels.to_vec());
        time_median(runs, 0.02, || fit(&data, &options).map(|_| ()))
    };
    Ok(time(many)? / time(few)?)
}
