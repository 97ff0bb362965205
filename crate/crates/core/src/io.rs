//! CSV datasets and model artifacts.
//!
//! Dataset files have a header `f1,…,fp,label`, one sample per line, features
//! as decimal literals and the label as an integer (0 = unknown). Model
//! artifacts are a single JSON document with a schema version and row-major
//! matrices that carry their dimensions.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{KernelId, DISTANCE_TRANSFORM};
use crate::lda::LdaModel;
use crate::selection::EncoderModel;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_FORMAT: &str = "kec-model";

/// Writes `dataset` as CSV.
pub fn write_dataset<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(out);
    let mut header: Vec<String> = (1..=dataset.p()).map(|s| format!("f{s}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(dataset.p() + 1);
    for (row, &y) in dataset.features().outer_iter().zip(dataset.labels()) {
        record.clear();
        // `{}` on f64 prints the shortest string that parses back exactly
        record.extend(row.iter().map(|v| format!("{v}")));
        record.push(y.to_string());
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Features-only rows plus the label column (0 when all rows are unknown).
pub struct CsvTable {
    pub features: Array2<f64>,
    pub labels: Vec<u32>,
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
            _ => unreachable!(),
        }
    } else {
        Error::Format(e.to_string())
    }
}

/// Reads a CSV table. The last column must be named `label`.
pub fn read_table<R: Read>(input: R) -> Result<CsvTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || headers.get(headers.len() - 1).map(str::trim) != Some("label") {
        return Err(Error::Format("last header column must be 'label'".into()));
    }
    let p = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != p + 1 {
            return Err(Error::Format(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                rec.len(),
                p + 1
            )));
        }
        for field in rec.iter().take(p) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: '{field}' is not a number", line + 1)))?;
            values.push(v);
        }
        let label = rec[p].trim();
        labels.push(label.parse().map_err(|_| {
            Error::Format(format!(
                "row {}: label '{label}' is not a non-negative integer",
                line + 1
            ))
        })?);
    }
    let features = Array2::from_shape_vec((labels.len(), p), values).expect("row-major table");
    Ok(CsvTable { features, labels })
}

/// Reads a labelled dataset. `num_classes` defaults to the largest label.
pub fn read_dataset<R: Read>(input: R, num_classes: Option<u32>) -> Result<Dataset> {
    let table = read_table(input)?;
    let k = num_classes.unwrap_or_else(|| table.labels.iter().copied().max().unwrap_or(0));
    if k == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    Dataset::new(table.features, table.labels, k)
}

pub fn read_dataset_file(path: &Path, num_classes: Option<u32>) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?), num_classes)
}

pub fn write_dataset_file(dataset: &Dataset, path: &Path) -> Result<()> {
    write_dataset(dataset, File::create(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    fn from_array(a: &Array2<f64>) -> Self {
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }

    fn to_array(&self) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone()).map_err(|_| {
            Error::Format(format!(
                "matrix declares {}x{} but holds {} values",
                self.rows,
                self.cols,
                self.data.len()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaRecord {
    pub means: MatrixRecord,
    pub pooled_cov: MatrixRecord,
    pub priors: Vec<f64>,
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub kernel: KernelRecord,
    pub cross_entropy: f64,
    pub lda: LdaRecord,
}

/// On-disk form of an [`EncoderModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub schema_version: u32,
    pub k: usize,
    pub p: usize,
    pub selected: usize,
    pub kernel: KernelRecord,
    pub switch_threshold: f64,
    pub u: MatrixRecord,
    pub candidates: Vec<CandidateRecord>,
}

fn kernel_record(k: &KernelId) -> KernelRecord {
    KernelRecord {
        name: k.name().to_string(),
        transform: matches!(k, KernelId::DistanceInduced).then(|| DISTANCE_TRANSFORM.to_string()),
    }
}

fn kernel_from_record(r: &KernelRecord) -> Result<KernelId> {
    let k = KernelId::parse(&r.name)
        .map_err(|_| Error::Format(format!("kernel '{}' cannot be restored from a file", r.name)))?;
    if let Some(t) = &r.transform {
        if t != DISTANCE_TRANSFORM {
            return Err(Error::Format(format!("unsupported distance transform '{t}'")));
        }
    }
    Ok(k)
}

impl ModelArtifact {
    pub fn from_model(model: &EncoderModel) -> Self {
        let candidates = model
            .kernel_ids
            .iter()
            .zip(&model.cross_entropies)
            .zip(&model.candidates)
            .map(|((k, &ce), lda)| CandidateRecord {
                kernel: kernel_record(k),
                cross_entropy: ce,
                lda: LdaRecord {
                    means: MatrixRecord::from_array(&lda.means),
                    pooled_cov: MatrixRecord::from_array(&lda.pooled_cov),
                    priors: lda.priors.clone(),
                    ridge: lda.ridge,
                },
            })
            .collect();
        Self {
            format: ARTIFACT_FORMAT.into(),
            schema_version: SCHEMA_VERSION,
            k: model.num_classes(),
            p: model.p(),
            selected: model.selected,
            kernel: kernel_record(model.kernel()),
            switch_threshold: model.switch_threshold,
            u: MatrixRecord::from_array(&model.u),
            candidates,
        }
    }

    pub fn into_model(self) -> Result<EncoderModel> {
        if self.format != ARTIFACT_FORMAT || self.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported artifact {} v{}",
                self.format, self.schema_version
            )));
        }
        let u = self.u.to_array()?;
        if u.dim() != (self.k, self.p) {
            return Err(Error::Format(format!(
                "U is {:?}, header says {}x{}",
                u.dim(),
                self.k,
                self.p
            )));
        }
        if self.selected >= self.candidates.len() {
            return Err(Error::Format("selected kernel index out of range".into()));
        }
        let mut kernel_ids = Vec::new();
        let mut cross_entropies = Vec::new();
        let mut candidates = Vec::new();
        for c in &self.candidates {
            kernel_ids.push(kernel_from_record(&c.kernel)?);
            cross_entropies.push(c.cross_entropy);
            candidates.push(LdaModel::from_parts(
                c.lda.means.to_array()?,
                c.lda.pooled_cov.to_array()?,
                c.lda.priors.clone(),
                c.lda.ridge,
            )?);
        }
        if kernel_ids[self.selected] != kernel_from_record(&self.kernel)? {
            return Err(Error::Format("selected kernel does not match candidate list".into()));
        }
        Ok(EncoderModel {
            u,
            kernel_ids,
            cross_entropies,
            candidates,
            selected: self.selected,
            switch_threshold: self.switch_threshold,
        })
    }
}

pub fn save_model<W: Write>(model: &EncoderModel, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ModelArtifact::from_model(model)).map_err(|e| {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Format(e.to_string())
        }
    })
}

pub fn load_model<R: Read>(input: R) -> Result<EncoderModel> {
    let artifact: ModelArtifact = serde_json::from_reader(input).map_err(|e| {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Format(e.to_string())
        }
    })?;
    artifact.into_model()
}

pub fn save_model_file(model: &EncoderModel, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    save_model(model, &mut f)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_model_file(path: &Path) -> Result<EncoderModel> {
    load_model(BufReader::new(File::open(path)?))
}
