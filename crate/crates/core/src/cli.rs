//! `kec` command-line interface.
//!
//! Data and tables go to stdout, diagnostics to stderr. Exit codes: 0 on
//! success, 2 for usage or validation errors, 3 for I/O failures.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::data::validate;
use crate::error::{Error, Result};
use crate::eval::{bench_scaling, cross_validate, cross_validate_sim, BenchConfig, EvalConfig, Paths};
use crate::io::{load_model_file, read_dataset_file, read_table, save_model_file, write_dataset};
use crate::kernels::KernelId;
use crate::par;
use crate::selection::{fit, FitOptions, DEFAULT_SWITCH_THRESHOLD};
use crate::simgen::{generate, SimParams, SimSetting, DEFAULT_K, DEFAULT_P};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kec", version, about = "Fast multi-kernel encoder classifier")]
pub struct Cli {
    /// Worker threads for data-parallel loops (defaults to all cores).
    #[arg(long, global = true, env = "KEC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Simulate(SimulateArgs),
    /// Fit a model on a labelled CSV and save it.
    Train(TrainArgs),
    /// Apply a saved model to a CSV.
    Predict(PredictArgs),
    /// K-fold cross-validation with Monte-Carlo replicates.
    Cv(CvArgs),
    /// Time the fast and reference paths over a grid of sample sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, value_parser = parse_setting)]
    setting: Option<SimSetting>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_P)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated kernels: linear, distance, spearman.
    #[arg(long, default_value = "linear,distance,spearman")]
    kernels: String,
    #[arg(long, default_value_t = DEFAULT_SWITCH_THRESHOLD)]
    switch_threshold: f64,
    /// Number of classes; defaults to the largest label in the file.
    #[arg(long)]
    classes: Option<u32>,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    /// Labelled CSV to cross-validate; alternative to --setting.
    #[arg(long, conflicts_with = "setting")]
    data: Option<PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long)]
    classes: Option<u32>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, default_value = "fast-multi,fast-linear")]
    methods: String,
    #[arg(long, default_value = "linear,distance,spearman")]
    kernels: String,
    #[arg(long, default_value_t = DEFAULT_SWITCH_THRESHOLD)]
    switch_threshold: f64,
    /// Also write one JSON record per fold and method to this path.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_setting, default_value = "normal-hd")]
    setting: SimSetting,
    #[arg(long, default_value = "500,1000,2000,4000,8000")]
    n_grid: String,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "linear")]
    kernels: String,
    /// Comma-separated subset of: fast, reference.
    #[arg(long, default_value = "fast,reference")]
    paths: String,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long)]
    records: Option<PathBuf>,
}

fn parse_setting(s: &str) -> std::result::Result<SimSetting, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kernels(s: &str) -> Result<Vec<KernelId>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(KernelId::parse)
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad {what} '{t}'")))
        })
        .collect()
}

fn sim_params(sim: &SimArgs) -> Result<SimParams> {
    let setting = sim
        .setting
        .ok_or_else(|| Error::InvalidParams("either --data or --setting is required".into()))?;
    Ok(SimParams {
        setting,
        n: sim.n,
        p: sim.p,
        k: sim.k,
        seed: sim.seed,
    })
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let params = sim_params(&args.sim)?;
    let data = generate(&params)?;
    let mut out = open_out(&args.out)?;
    write_dataset(&data.dataset, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let dataset = read_dataset_file(&args.data, args.classes)?;
    let options = FitOptions {
        kernels: parse_kernels(&args.kernels)?,
        switch_threshold: args.switch_threshold,
    };
    let model = fit(&dataset, &options)?;
    let stats = validate(&dataset)?;
    let x_trn = dataset.features().select(ndarray::Axis(0), &stats.trn);
    let predicted = model.predict_new(x_trn.view())?.labels;
    let wrong = stats
        .trn
        .iter()
        .zip(&predicted)
        .filter(|(&i, &y)| dataset.labels()[i] != y)
        .count();
    save_model_file(&model, &args.model_out)?;

    let mut out = io::stdout().lock();
    writeln!(out, "{:<10} {:>16}", "kernel", "cross-entropy")?;
    for (k, ce) in model.kernel_ids.iter().zip(&model.cross_entropies) {
        writeln!(out, "{:<10} {:>16.6}", k.name(), ce)?;
    }
    writeln!(out, "selected: {}", model.kernel())?;
    writeln!(
        out,
        "training error: {:.6} ({wrong}/{})",
        wrong as f64 / stats.trn.len() as f64,
        stats.trn.len()
    )?;
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = load_model_file(&args.model)?;
    let table = read_table(File::open(&args.data)?)?;
    if table.features.ncols() != model.p() {
        return Err(Error::InvalidParams(format!(
            "model expects p = {} features, data has p = {}",
            model.p(),
            table.features.ncols()
        )));
    }
    let pred = model.predict_new(table.features.view())?;
    let mut out = open_out(&args.out)?;
    let header: Vec<String> = std::iter::once("label".to_string())
        .chain((1..=model.num_classes()).map(|k| format!("p{k}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (label, row) in pred.labels.iter().zip(pred.posteriors.outer_iter()) {
        let probs: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{label},{}", probs.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn write_records<T: serde::Serialize>(path: &Option<PathBuf>, items: &[T]) -> Result<()> {
    if let Some(p) = path {
        let mut f = BufWriter::new(File::create(p)?);
        for item in items {
            serde_json::to_writer(&mut f, item).map_err(|e| Error::Io(e.to_string()))?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    Ok(())
}

fn cmd_cv(args: &CvArgs) -> Result<()> {
    let config = EvalConfig {
        folds: args.folds,
        replicates: args.replicates,
        seed: args.sim.seed,
        methods: parse_list(&args.methods, "method")?,
        timing: true,
        kernels: parse_kernels(&args.kernels)?,
        switch_threshold: args.switch_threshold,
    };
    let report = match &args.data {
        Some(path) => cross_validate(&read_dataset_file(path, args.classes)?, &config)?,
        None => cross_validate_sim(&sim_params(&args.sim)?, &config)?,
    };
    write!(io::stdout().lock(), "{report}")?;
    if args.records.is_some() {
        #[derive(serde::Serialize)]
        #[serde(tag = "kind", rename_all = "kebab-case")]
        enum Line<'a> {
            Summary(&'a crate::eval::MethodSummary),
            Fold(&'a crate::eval::EvalRecord),
        }
        let lines: Vec<Line> = report
            .summaries
            .iter()
            .map(Line::Summary)
            .chain(report.records.iter().map(Line::Fold))
            .collect();
        write_records(&args.records, &lines)?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let grid: Vec<usize> = parse_list(&args.n_grid, "grid size")?;
    let path_names: Vec<String> = parse_list(&args.paths, "path")?;
    let mut paths = Paths {
        fast: false,
        reference: false,
    };
    for p in &path_names {
        match p.as_str() {
            "fast" => paths.fast = true,
            "reference" => paths.reference = true,
            other => return Err(Error::InvalidParams(format!("unknown path '{other}'"))),
        }
    }
    let config = BenchConfig {
        kernels: parse_kernels(&args.kernels)?,
        paths,
        runs: args.runs,
        ..BenchConfig::default()
    };
    let params = SimParams {
        setting: args.setting,
        n: grid.first().copied().unwrap_or(1),
        p: args.p,
        k: args.k,
        seed: args.seed,
    };
    let report = bench_scaling(&params, &grid, &config)?;
    write!(io::stdout().lock(), "{report}")?;
    write_records(&args.records, &report.points)?;
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 || !par::set_threads(t) {
            eprintln!("warning: could not set thread count to {t}");
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Method;

    #[test]
    fn kernel_lists() {
        assert_eq!(
            parse_kernels("linear,spearman").unwrap(),
            vec![KernelId::InnerProduct, KernelId::SpearmanRank]
        );
        assert!(parse_kernels("linear,rbf").is_err());
    }

    #[test]
    fn method_lists() {
        let m: Vec<Method> = parse_list("reference,fast-linear", "method").unwrap();
        assert_eq!(m, vec![Method::Reference, Method::FastLinear]);
        assert!(parse_list::<Method>("svm", "method").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::MissingClass(2)), EXIT_USAGE);
    }
}
